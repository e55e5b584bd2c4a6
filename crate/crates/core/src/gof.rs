//! One-sample Kolmogorov–Smirnov test against a ν-BS model.
//!
//! The report carries the raw statistic `D_n`, the scaled statistic
//! `√n·D_n` whose limiting law is Kolmogorov's, and the p-value computed
//! from the scaled one. A parametric bootstrap that refits each simulated
//! sample accounts for parameters estimated from the same data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{fit_univariate, fit_univariate_fixed_nu, OptimizerConfig};
use crate::par::{stream_rng, Execution};
use crate::univariate::{cdf, sample_with, NuBsParams};

pub const DEFAULT_N_BOOT: usize = 999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub params: NuBsParams,
    /// max |F_n − F| over the sample
    pub d_statistic: f64,
    /// √n · d_statistic
    pub scaled_statistic: f64,
    /// Kolmogorov tail probability of `scaled_statistic`
    pub p_asymptotic: f64,
    pub p_bootstrap: Option<f64>,
    pub n_obs: usize,
    pub n_boot: Option<usize>,
    /// Bootstrap replicates whose refit failed or did not converge.
    pub n_boot_skipped: usize,
}

/// D_n = maxᵢ max(i/n − F(t₍ᵢ₎), F(t₍ᵢ₎) − (i−1)/n).
pub fn ks_statistic<F: Fn(f64) -> f64>(data: &[f64], cdf_eval: F) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let d = sorted.iter().enumerate().fold(0.0_f64, |d, (i, &t)| {
        let f = cdf_eval(t);
        let i = i as f64;
        d.max((i + 1.0) / n - f).max(f - i / n)
    });
    Ok(d)
}

/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
///
/// Below λ = 1 the alternating series converges slowly, so the complement
/// is taken from the theta-function dual
/// `1 − Q(λ) = (√(2π)/λ) Σ_{k≥1} e^{−(2k−1)²π²/(8λ²)}`.
pub fn kolmogorov_pvalue(scaled_statistic: f64) -> f64 {
    let l = scaled_statistic;
    if l.is_nan() {
        return f64::NAN;
    }
    if l <= 0.0 {
        return 1.0;
    }
    let q = if l < 1.0 {
        let c = std::f64::consts::PI.powi(2) / (8.0 * l * l);
        let mut s = 0.0;
        for k in 1..=50 {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * c).exp();
            s += term;
            if term < 1e-18 * s {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / l * s
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let k = k as f64;
            let term = (-2.0 * k * k * l * l).exp();
            s += if k as u64 % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        2.0 * s
    };
    q.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refit {
    /// Refit (α, β, ν) on each replicate.
    Free,
    /// Refit (α, β) with ν held at the given value.
    FixedNu(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofOptions {
    /// Bootstrap replicates; 0 disables the bootstrap.
    pub n_boot: usize,
    pub seed: u64,
    pub refit: Refit,
    pub config: OptimizerConfig,
}

impl Default for GofOptions {
    fn default() -> Self {
        Self {
            n_boot: DEFAULT_N_BOOT,
            seed: 0,
            refit: Refit::Free,
            config: OptimizerConfig::default(),
        }
    }
}

/// KS test with `n_boot` free-ν bootstrap replicates.
pub fn gof_test(data: &[f64], params: &NuBsParams, n_boot: usize, seed: u64) -> Result<GofReport> {
    gof_test_with(
        data,
        params,
        &GofOptions {
            n_boot,
            seed,
            ..Default::default()
        },
    )
}

fn model_d(data: &[f64], p: &NuBsParams) -> Result<f64> {
    ks_statistic(data, |t| cdf(t, p).unwrap_or(f64::NAN))
}

/// Replicate `i` draws from stream `i + 1` of `seed`, so the p-value does
/// not depend on scheduling.
pub fn gof_test_with(data: &[f64], params: &NuBsParams, opts: &GofOptions) -> Result<GofReport> {
    if let Some(bad) = data.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::Domain(format!("data must be finite and positive, found {bad}")));
    }
    let d = model_d(data, params)?;
    let n = data.len();
    let scaled = (n as f64).sqrt() * d;

    let (p_bootstrap, n_boot, skipped) = if opts.n_boot == 0 {
        (None, None, 0)
    } else {
        let inner = OptimizerConfig {
            execution: Execution::Sequential,
            ..opts.config.clone()
        };
        let stats: Vec<Option<f64>> = opts.config.execution.map(opts.n_boot, |i| {
            let mut rng = stream_rng(opts.seed, i as u64 + 1);
            let sim = sample_with(params, n, &mut rng);
            let fit = match opts.refit {
                Refit::Free => fit_univariate(&sim, &inner),
                Refit::FixedNu(v) => fit_univariate_fixed_nu(&sim, v, &inner),
            };
            match fit {
                Ok(f) if f.converged => model_d(&sim, f.params.univariate()?).ok(),
                _ => None,
            }
        });
        let valid: Vec<f64> = stats.iter().flatten().copied().collect();
        let skipped = opts.n_boot - valid.len();
        let p = if valid.is_empty() {
            None
        } else {
            Some(valid.iter().filter(|&&s| s >= d).count() as f64 / valid.len() as f64)
        };
        (p, Some(opts.n_boot), skipped)
    };

    Ok(GofReport {
        params: *params,
        d_statistic: d,
        scaled_statistic: scaled,
        p_asymptotic: kolmogorov_pvalue(scaled),
        p_bootstrap,
        n_obs: n,
        n_boot,
        n_boot_skipped: skipped,
    })
}
