//! Test-side oracles that share no code with the library.
#![allow(dead_code)]

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let pair = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gk15(f, a, b);
    if depth == 0 || err <= tol {
        return value;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, tol, depth - 1) + adaptive(f, m, b, tol, depth - 1)
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`, to roughly 1e-13
/// relative accuracy. The tolerance is refined once against the first pass.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let tol = |whole: f64| whole.abs() * 1e-14 + f64::MIN_POSITIVE;
    let (rough, _) = gk15(&f, a, b);
    let first = adaptive(&f, a, b, tol(rough), 30);
    adaptive(&f, a, b, tol(first), 30)
}

/// `int_0^x t^(a-1) (1-t)^(b-1) dt` for `x <= 1/2`. When `a < 1` the
/// substitution `t = s^(1/a)` removes the endpoint singularity.
fn lower_piece(x: f64, a: f64, b: f64) -> f64 {
    if a < 1.0 {
        let top = x.powf(a);
        integrate(|s| (1.0 - s.powf(1.0 / a)).powf(b - 1.0), 0.0, top) / a
    } else {
        integrate(|t| t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0), 0.0, x)
    }
}

/// Complete beta function by quadrature.
pub fn beta_fn(a: f64, b: f64) -> f64 {
    lower_piece(0.5, a, b) + lower_piece(0.5, b, a)
}

/// Regularized incomplete beta by quadrature.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let total = beta_fn(a, b);
    if x <= 0.5 {
        lower_piece(x, a, b) / total
    } else {
        1.0 - lower_piece(1.0 - x, b, a) / total
    }
}

/// Beta density for integer shapes using exact factorials.
pub fn beta_pdf_integer_shapes(x: f64, a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    let norm = fact(a + b - 1) / (fact(a - 1) * fact(b - 1));
    norm * x.powi(a as i32 - 1) * (1.0 - x).powi(b as i32 - 1)
}
