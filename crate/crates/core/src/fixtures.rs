//! The automobile accident frequency tables (9,461 policies each): the
//! original portfolio and three tail modifications that move 140 zero-claim
//! policies to higher claim counts.

use crate::empirical::DiscreteSample;

/// Names of the bundled data sets, in increasing order of tail riskiness.
pub const DATA_SET_NAMES: [&str; 4] = ["O", "M1", "M2", "M3"];

/// Dense counts for claim numbers 0..=7 (no policy reports 8 or more).
pub fn counts(name: &str) -> Option<[u64; 8]> {
    match name {
        "O" => Some([7840, 1317, 239, 42, 14, 4, 4, 1]),
        "M1" => Some([7700, 1317, 379, 42, 14, 4, 4, 1]),
        "M2" => Some([7700, 1317, 279, 62, 34, 24, 24, 21]),
        "M3" => Some([7700, 1317, 239, 42, 14, 4, 4, 141]),
        _ => None,
    }
}

pub fn data_set(name: &str) -> Option<DiscreteSample> {
    counts(name).map(|c| DiscreteSample::from_dense(&c).expect("fixture is valid"))
}
