//! Benchmark distributions shipped with the crate (the JSON files in `bench/`).

use crate::error::{Error, Result};
use crate::prob::FiniteDist;

/// `(name, JSON)` of every bundled distribution.
pub const BUNDLED: &[(&str, &str)] = &[
    ("uni_centered", include_str!("../../../bench/uni_centered.json")),
    ("uni_shifted", include_str!("../../../bench/uni_shifted.json")),
    ("uni_skewed", include_str!("../../../bench/uni_skewed.json")),
    ("d2_six", include_str!("../../../bench/d2_six.json")),
    ("d2_four", include_str!("../../../bench/d2_four.json")),
    ("d3_gauss", include_str!("../../../bench/d3_gauss.json")),
];

/// Parses a bundled distribution by name.
pub fn bundled(name: &str) -> Result<FiniteDist<f64>> {
    let (_, json) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::pre(format!("no bundled distribution named `{name}`")))?;
    FiniteDist::from_json_str(json)
}

/// Names of the bundled univariate distributions.
pub const UNIVARIATE: [&str; 3] = ["uni_centered", "uni_shifted", "uni_skewed"];
