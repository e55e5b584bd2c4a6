//! Machine-readable run reports.
//!
//! A [`RunReport`] serializes as pretty-printed JSON with fields in
//! declaration order; absent sections are written as `null` so every
//! report of a command has the same shape. Floats use the shortest
//! representation that parses back to the same value, which makes
//! parse → serialize byte-identical.

use serde::{Deserialize, Serialize};

use crate::estimation::{FitResult, ModelComparison};
use crate::gof::GofReport;

pub const TOOL_VERSION: &str = concat!("nubs ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub name: String,
    pub source: String,
    pub n_obs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub data: Option<DataSummary>,
    pub params_in: Option<Vec<f64>>,
    pub params_out: Option<Vec<f64>>,
    pub fit: Option<FitResult>,
    pub gof: Option<GofReport>,
    pub comparison: Option<ModelComparison>,
    pub value: Option<f64>,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed: None,
            data: None,
            params_in: None,
            params_out: None,
            fit: None,
            gof: None,
            comparison: None,
            value: None,
            timing_ms: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{fit_univariate, OptimizerConfig};
    use crate::gof::gof_test;
    use crate::univariate::sample;
    use crate::NuBsParams;

    #[test]
    fn round_trip_is_byte_identical() {
        let p = NuBsParams::new(0.5, 2.0, 0.75).unwrap();
        let data = sample(&p, 200, 3);
        let fit = fit_univariate(&data, &OptimizerConfig::default()).unwrap();
        let mut r = RunReport::new("gof");
        r.seed = Some(3);
        r.params_out = Some(fit.params.to_vec());
        r.gof = Some(gof_test(&data, fit.params.univariate().unwrap(), 0, 3).unwrap());
        r.fit = Some(fit);
        r.value = Some(0.1 + 0.2);
        r.timing_ms = 12;
        let text = r.to_json();
        let back = RunReport::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn field_order_is_fixed() {
        let text = RunReport::new("eval").to_json();
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.strip_prefix("  \"").and_then(|l| l.split('"').next()))
            .collect();
        assert_eq!(
            keys,
            [
                "command",
                "tool_version",
                "seed",
                "data",
                "params_in",
                "params_out",
                "fit",
                "gof",
                "comparison",
                "value",
                "timing_ms"
            ]
        );
    }
}
