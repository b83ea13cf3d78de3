//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smoothq::fixtures;
use smoothq::risk::{tail_prob_bootstrap, TailMethod};
use smoothq::{
    beta_cdf, beta_pdf, bootstrap_quantiles, c5ns_summary, coverage_bound, quantile_covariance, run_study,
    smoothed_quantile, smoothing_weights, BetaParams, Design, ResampleConfig, Study, StudyMode,
    SupportRule,
};

const QUARTILES: [f64; 3] = [0.25, 0.5, 0.75];

/// Upper triangle of a symmetric 3x3 matrix, row by row.
type Upper = [f64; 6];

fn upper(m: &[Vec<f64>]) -> Upper {
    [m[0][0], m[0][1], m[0][2], m[1][1], m[1][2], m[2][2]]
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn study(model: &str, k: f64, n: usize, reps: usize, mode: StudyMode, seed: u64) -> Study {
    Study {
        model: model.parse().unwrap(),
        k,
        n,
        reps,
        levels: QUARTILES.to_vec(),
        seed,
        mode,
        workers: None,
        support: SupportRule::Window,
    }
}

struct Cell {
    model: &'static str,
    k: f64,
    means: [f64; 3],
    cov: Upper,
}

// 0.318 below is a table entry, not 1/pi.
#[allow(clippy::approx_constant)]
fn population_cells() -> Vec<Cell> {
    let (k1, k2, k3) = (PI, PI * PI, PI.powi(3));
    let cell = |model, k, means, cov| Cell { model, k, means, cov };
    vec![
        cell("poisson:lambda=9", k1, [6.815, 8.835, 11.021], [11.367, 8.360, 5.539, 11.497, 9.753, 15.478]),
        cell("poisson:lambda=9", k2, [6.856, 8.838, 10.982], [12.153, 8.309, 5.526, 12.289, 9.714, 16.579]),
        cell("poisson:lambda=9", k3, [6.893, 8.853, 10.951], [10.533, 7.033, 4.695, 11.401, 8.415, 15.631]),
        cell("nb:r=9,beta=1", k1, [5.859, 8.504, 11.628], [18.038, 14.458, 10.384, 22.085, 20.054, 34.815]),
        cell("nb:r=9,beta=1", k2, [5.904, 8.515, 11.604], [19.552, 14.467, 10.507, 23.833, 20.212, 37.975]),
        cell("nb:r=9,beta=1", k3, [5.928, 8.504, 11.554], [17.673, 13.777, 9.675, 28.408, 20.920, 40.813]),
        cell("zip:lambda=1,c=0.8", k1, [0.006, 0.095, 0.616], [0.001, 0.015, 0.044, 0.150, 0.461, 1.522]),
        cell("zip:lambda=1,c=0.8", k2, [0.000, 0.026, 0.514], [0.000, 0.000, 0.004, 0.041, 0.318, 2.709]),
        cell("zip:lambda=1,c=0.8", k3, [0.000, 0.001, 0.315], [0.000, 0.000, 0.000, 0.000, 0.021, 3.400]),
        cell("zinb:r=1,beta=1,c=0.8", k1, [0.003, 0.069, 0.642], [0.000, 0.007, 0.029, 0.119, 0.519, 2.534]),
        cell("zinb:r=1,beta=1,c=0.8", k2, [0.000, 0.012, 0.489], [0.000, 0.000, 0.001, 0.014, 0.223, 3.781]),
        cell("zinb:r=1,beta=1,c=0.8", k3, [0.000, 0.000, 0.270], [0.000, 0.000, 0.000, 0.000, 0.003, 4.155]),
    ]
}

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn theoretical_targets() -> Check {
    let start = Instant::now();
    let (mut worst_mean, mut worst_cov) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for c in population_cells() {
        let r = run_study(&study(c.model, c.k, 0, 0, StudyMode::Theoretical, 0)).map_err(|e| e.to_string())?;
        let dm = max_dev(&r.means, &c.means);
        let dc = max_dev(&upper(&r.scaled_cov.unwrap()), &c.cov);
        worst_mean = worst_mean.max(dm);
        worst_cov = worst_cov.max(dc);
        if dm > 0.005 || dc > 0.01 {
            failures.push(format!("{} k={:.3}", c.model, c.k));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        failures.is_empty() && secs < 5.0,
        format!(
            "12 cells, max |mean dev| {worst_mean:.4} (tol 0.005), max |cov dev| {worst_cov:.4} (tol 0.01), {secs:.2} s (limit 5 s){}",
            if failures.is_empty() { String::new() } else { format!(", off: {}", failures.join("; ")) }
        ),
    )
}

fn monte_carlo_convergence() -> Check {
    let start = Instant::now();
    let r = run_study(&study("poisson:lambda=9", PI, 1000, 10_000, StudyMode::Simulate, 20_240_101)).map_err(|e| e.to_string())?;
    let dm = max_dev(&r.means, &[6.82, 8.84, 11.02]);
    let dc = max_dev(&upper(&r.scaled_cov.unwrap()), &[11.64, 8.65, 5.78, 11.79, 10.20, 16.29]);
    ensure(
        dm <= 0.03 && dc <= 0.6,
        format!(
            "means {:.3?} (max dev {dm:.4}, tol 0.03), n*cov max dev {dc:.3} (tol 0.6), {:.1} s",
            r.means,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn bootstrap_validation() -> Check {
    let start = Instant::now();
    let p = run_study(&study("poisson:lambda=9", PI, 10_000, 10_000, StudyMode::BootstrapValidate, 31)).map_err(|e| e.to_string())?;
    let dm = max_dev(&p.means, &[6.815, 8.835, 11.021]);
    let dc = max_dev(&upper(&p.scaled_cov.unwrap()), &[11.367, 8.360, 5.539, 11.497, 9.753, 15.478]);
    let z = run_study(&study("zinb:r=1,beta=1,c=0.8", PI.powi(3), 1000, 10_000, StudyMode::BootstrapValidate, 32)).map_err(|e| e.to_string())?;
    let corner = z.scaled_cov.unwrap()[2][2];
    let ratio = corner / 4.155;
    ensure(
        dm <= 0.1 && dc <= 1.5 && (0.5..=2.0).contains(&ratio),
        format!(
            "Poisson means max dev {dm:.3} (tol 0.1), n*cov max dev {dc:.3} (tol 1.5); ZINB n*cov(3,3) {corner:.3} = {ratio:.2} x 4.155 (allowed 0.5..2), {:.1} s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn coverage_bounds() -> Check {
    let cases: [(Option<u64>, f64, f64); 7] = [
        (Some(10), 5.0, 0.909),
        (Some(50), 5.0, 0.941),
        (Some(100), 5.0, 0.950),
        (None, 5.0, 0.960),
        (None, PI, 0.899),
        (None, PI * PI, 0.990),
        (None, PI.powi(3), 0.999),
    ];
    let mut got = Vec::new();
    let mut ok = true;
    for (n, k, want) in cases {
        let v = coverage_bound(n, k).map_err(|e| e.to_string())?;
        let rounded = (v * 1000.0).round() / 1000.0;
        ok &= rounded == want;
        got.push(format!("{rounded:.3}"));
    }
    ensure(ok, format!("rounded bounds {}", got.join(" ")))
}

fn c5ns_table() -> Check {
    let rows: [(&str, [f64; 5], [(f64, f64); 5]); 4] = [
        ("O", [1.35, 1.60, 2.28, 3.70, 5.33], [(1.28, 1.41), (1.51, 1.68), (2.14, 2.43), (3.48, 3.92), (5.15, 5.50)]),
        ("M1", [1.47, 1.71, 2.38, 3.76, 5.35], [(1.40, 1.53), (1.63, 1.80), (2.24, 2.52), (3.54, 3.97), (5.17, 5.52)]),
        ("M2", [1.86, 2.25, 3.19, 4.69, 5.96], [(1.76, 1.96), (2.13, 2.37), (3.05, 3.34), (4.56, 4.82), (5.89, 6.04)]),
        ("M3", [2.30, 2.79, 3.85, 5.26, 6.27], [(2.16, 2.43), (2.64, 2.93), (3.69, 4.00), (5.15, 5.37), (6.22, 6.33)]),
    ];
    let (mut worst_q, mut worst_ci) = (0.0f64, 0.0f64);
    for (name, quantiles, intervals) in rows {
        let s = fixtures::data_set(name).unwrap();
        let r = c5ns_summary(&s, 0.9, PI.powi(3), 0.95, SupportRule::Observed).map_err(|e| e.to_string())?;
        worst_q = worst_q.max(max_dev(&r.quantiles, &quantiles));
        for (got, want) in r.intervals.iter().zip(intervals) {
            worst_ci = worst_ci.max((got.0 - want.0).abs()).max((got.1 - want.1).abs());
        }
    }
    ensure(
        worst_q <= 0.01 && worst_ci <= 0.02,
        format!("20 estimates max dev {worst_q:.4} (tol 0.01), 40 endpoints max dev {worst_ci:.4} (tol 0.02)"),
    )
}

fn tail_table() -> Check {
    let start = Instant::now();
    let thresholds = [0.0, 0.21, 1.29];
    let cfg = ResampleConfig::new(1000, 53);
    let k = PI.powi(3);
    let mut detail = Vec::new();
    let mut ok = true;
    let mut conservative = 0;
    for name in fixtures::DATA_SET_NAMES {
        let s = fixtures::data_set(name).unwrap();
        let sm = tail_prob_bootstrap(&s, &thresholds, TailMethod::Smoothed, k, SupportRule::Observed, &cfg).map_err(|e| e.to_string())?;
        let ip = tail_prob_bootstrap(&s, &thresholds, TailMethod::Interpolated, k, SupportRule::Observed, &cfg).map_err(|e| e.to_string())?;
        conservative += sm.iter().zip(&ip).filter(|(a, b)| a.mean >= b.mean).count();
        let ratio = sm[2].cv.unwrap() / ip[2].cv.unwrap();
        ok &= (0.35..=0.70).contains(&ratio);
        detail.push(format!("{name} cv ratio {ratio:.2}"));
        if name == "O" {
            let im: Vec<f64> = ip.iter().map(|e| e.mean).collect();
            let smm: Vec<f64> = sm.iter().map(|e| e.mean).collect();
            let di = max_dev(&im, &[0.172, 0.142, 0.025]);
            let ds = max_dev(&smm, &[0.208, 0.301, 0.095]);
            ok &= di <= 0.003 && ds <= 0.01;
            detail.push(format!("O interpolated {im:.3?} (max dev {di:.4}, tol 0.003), smoothed {smm:.3?} (max dev {ds:.4}, tol 0.01)"));
        }
    }
    ok &= conservative == 12;
    detail.push(format!("smoothed >= interpolated in {conservative}/12 cells, {:.1} s", start.elapsed().as_secs_f64()));
    ensure(ok, detail.join("; "))
}

fn random_design(rng: &mut ChaCha8Rng) -> Design {
    loop {
        let len = rng.random_range(2..40usize);
        let start = rng.random_range(0..30i64);
        let masses: Vec<f64> = (0..len)
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.0..1.0) })
            .collect();
        let total: f64 = masses.iter().sum();
        if total == 0.0 {
            continue;
        }
        let mut run = 0.0;
        let mut cdf: Vec<f64> = masses.iter().map(|m| {
            run += m;
            run / total
        }).collect();
        *cdf.last_mut().unwrap() = 1.0;
        let support = (start..start + len as i64).collect();
        if let Ok(d) = Design::finite(support, cdf) {
            return d;
        }
    }
}

fn property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut parts = Vec::new();

    let mut worst_cdf = 0.0f64;
    for _ in 0..1000 {
        let a = rng.random_range(0.05f64.ln()..150f64.ln()).exp();
        let b = rng.random_range(0.05f64.ln()..150f64.ln()).exp();
        let x: f64 = rng.random_range(0.0..1.0);
        let got = beta_cdf(x, &BetaParams::new(a, b).unwrap()).map_err(|e| e.to_string())?;
        worst_cdf = worst_cdf.max((got - common::beta_cdf(x, a, b)).abs());
    }
    parts.push((worst_cdf <= 1e-10, format!("beta cdf vs quadrature max dev {worst_cdf:.1e}")));

    let (mut worst_sum, mut monotone) = (0.0f64, true);
    for _ in 0..50 {
        let design = random_design(&mut rng);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..200 {
            let u = i as f64 / 200.0;
            let w = smoothing_weights(&design, u).map_err(|e| e.to_string())?;
            worst_sum = worst_sum.max((w.iter().sum::<f64>() - 1.0).abs());
            let q = smoothed_quantile(&design, u).map_err(|e| e.to_string())?;
            monotone &= q >= prev - 1e-12;
            prev = q;
        }
    }
    parts.push((worst_sum <= 1e-12 && monotone, format!("50 designs: weight sum dev {worst_sum:.1e}, monotone {monotone}")));

    let (mut worst_hdh, mut psd) = (0.0f64, true);
    for _ in 0..200 {
        let mut f = [rng.random_range(0.01..0.99), rng.random_range(0.01..0.99)];
        f.sort_by(f64::total_cmp);
        if f[1] - f[0] < 1e-3 {
            continue;
        }
        let y0 = rng.random_range(0..10i64);
        let support = vec![y0, y0 + rng.random_range(1..5i64), y0 + rng.random_range(5..10i64)];
        let design = Design::finite(support.clone(), vec![f[0], f[1], 1.0]).unwrap();
        let qc = quantile_covariance(&design, &QUARTILES, 1).map_err(|e| e.to_string())?;
        // d = 3, so the kernel shapes at the quartiles are (1,3), (2,2), (3,1).
        let shapes = [(1u32, 3u32), (2, 2), (3, 1)];
        let h: Vec<Vec<f64>> = shapes
            .iter()
            .map(|&(a, b)| (0..2).map(|j| (support[j] - support[j + 1]) as f64 * common::beta_pdf_integer_shapes(f[j], a, b)).collect())
            .collect();
        for i in 0..3 {
            for l in 0..3 {
                let mut brute = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        brute += h[i][a] * f[a.min(b)] * (1.0 - f[a.max(b)]) * h[l][b];
                    }
                }
                worst_hdh = worst_hdh.max((qc.sigma[i][l] - brute).abs() / brute.abs().max(1.0));
                psd &= qc.sigma[i][l] == qc.sigma[l][i];
            }
        }
        let s = &qc.sigma;
        let minors = [
            s[0][0],
            s[1][1],
            s[2][2],
            s[0][0] * s[1][1] - s[0][1] * s[0][1],
            s[0][0] * s[2][2] - s[0][2] * s[0][2],
            s[1][1] * s[2][2] - s[1][2] * s[1][2],
        ];
        let scale = s[0][0].max(s[1][1]).max(s[2][2]).max(1.0);
        psd &= minors.iter().all(|&m| m >= -1e-10 * scale * scale);
        for _ in 0..20 {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let quad: f64 = (0..3).flat_map(|i| (0..3).map(move |l| (i, l))).map(|(i, l)| v[i] * s[i][l] * v[l]).sum();
            psd &= quad >= -1e-10 * scale;
        }
    }
    parts.push((worst_hdh <= 1e-12 && psd, format!("H D H' vs index-sum oracle rel dev {worst_hdh:.1e}, symmetric PSD {psd}")));

    let sample = fixtures::data_set("M3").unwrap();
    let run = |workers| {
        bootstrap_quantiles(&sample, PI.powi(3), &QUARTILES, SupportRule::Observed, &ResampleConfig::new(500, 4242).with_workers(workers))
    };
    let (one, eight) = (run(1).map_err(|e| e.to_string())?, run(8).map_err(|e| e.to_string())?);
    let bits = |b: &smoothq::Bootstrap| -> Vec<u64> {
        b.replicates.iter().flatten().chain(&b.col_means).chain(b.cov.iter().flatten()).map(|v| v.to_bits()).collect()
    };
    let identical = bits(&one) == bits(&eight) && one == eight;
    parts.push((identical, format!("bootstrap 1 vs 8 workers bit-identical {identical}")));

    let mut worst_fd = 0.0f64;
    let h = 1e-6;
    for _ in 0..1000 {
        let a: f64 = rng.random_range(0.5..30.0);
        let b: f64 = rng.random_range(0.5..30.0);
        let x: f64 = rng.random_range(0.05..0.95);
        let p = BetaParams::new(a, b).unwrap();
        let slope = (beta_cdf(x + h, &p).unwrap() - beta_cdf(x - h, &p).unwrap()) / (2.0 * h);
        let density = beta_pdf(x, &p).unwrap();
        worst_fd = worst_fd.max((slope - density).abs() / density.max(1.0));
    }
    parts.push((worst_fd <= 1e-6, format!("finite-difference cdf vs pdf max dev {worst_fd:.1e}")));

    let ok = parts.iter().all(|(ok, _)| *ok);
    ensure(ok, parts.into_iter().map(|(_, d)| d).collect::<Vec<_>>().join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("theoretical targets", theoretical_targets),
        ("Monte Carlo convergence", monte_carlo_convergence),
        ("bootstrap validation", bootstrap_validation),
        ("coverage bounds", coverage_bounds),
        ("C5NS table", c5ns_table),
        ("tail probability table", tail_table),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {tag}: {name}: {detail}", i + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
