//! Bivariate ν-BS (per-coordinate ν₁, ν₂ and latent correlation ρ) and the
//! m-variate family (shared ν, latent correlation matrix Γ).
//!
//! Both are Gaussian-copula constructions: each coordinate is mapped to its
//! latent normal score `ξ_ν(tᵢ/βᵢ)/αᵢ`, and the joint law of the scores is
//! standard normal with the given correlation.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_time, Error, Result};
use crate::normal::{biv_normal_cdf, mvn_cdf_mc_with, mvn_log_pdf, CorrelationMatrix, McEstimate};
use crate::par::{stream_rng, Execution};
use crate::univariate::{self, ln_2cosh, standardized, NuBsParams, LN_SQRT_2PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBiv")]
pub struct BivNuBsParams {
    p1: NuBsParams,
    p2: NuBsParams,
    rho: f64,
}

#[derive(Deserialize)]
struct RawBiv {
    p1: NuBsParams,
    p2: NuBsParams,
    rho: f64,
}

impl TryFrom<RawBiv> for BivNuBsParams {
    type Error = Error;

    fn try_from(raw: RawBiv) -> Result<Self> {
        BivNuBsParams::new(raw.p1, raw.p2, raw.rho)
    }
}

impl BivNuBsParams {
    pub fn new(p1: NuBsParams, p2: NuBsParams, rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "must satisfy |rho| < 1",
            });
        }
        Ok(Self { p1, p2, rho })
    }

    /// From the 7-tuple (α₁, β₁, ν₁, α₂, β₂, ν₂, ρ).
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 7 {
            return Err(Error::DimensionMismatch {
                expected: 7,
                got: v.len(),
            });
        }
        Self::new(
            NuBsParams::new(v[0], v[1], v[2])?,
            NuBsParams::new(v[3], v[4], v[5])?,
            v[6],
        )
    }

    pub fn to_array(&self) -> [f64; 7] {
        let [a1, b1, n1] = self.p1.to_array();
        let [a2, b2, n2] = self.p2.to_array();
        [a1, b1, n1, a2, b2, n2, self.rho]
    }

    pub fn p1(&self) -> &NuBsParams {
        &self.p1
    }

    pub fn p2(&self) -> &NuBsParams {
        &self.p2
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub(crate) fn log_pdf_unchecked(&self, t1: f64, t2: f64) -> f64 {
        let (j1, u) = log_jacobian_and_score(t1, &self.p1);
        let (j2, v) = log_jacobian_and_score(t2, &self.p2);
        let one_m = 1.0 - self.rho * self.rho;
        let quad = (u * u + v * v - 2.0 * self.rho * u * v) / one_m;
        j1 + j2 - 2.0 * LN_SQRT_2PI - 0.5 * one_m.ln() - 0.5 * quad
    }
}

// ln[ν/(αβ)·((t/β)^(ν−1) + (β/t)^(ν+1))] and the latent score ξ/α.
#[inline]
fn log_jacobian_and_score(t: f64, p: &NuBsParams) -> (f64, f64) {
    let ln_r = (t / p.beta()).ln();
    let x = p.nu() * ln_r;
    let j = p.nu().ln() - p.alpha().ln() - p.beta().ln() - ln_r + ln_2cosh(x);
    (j, standardized(x, p.alpha()))
}

/// F(t₁, t₂) = Φ₂(ξ₁/α₁, ξ₂/α₂; ρ).
pub fn biv_cdf(t1: f64, t2: f64, params: &BivNuBsParams) -> Result<f64> {
    check_time(t1)?;
    check_time(t2)?;
    biv_normal_cdf(params.p1.z_score(t1), params.p2.z_score(t2), params.rho)
}

pub fn biv_log_pdf(t1: f64, t2: f64, params: &BivNuBsParams) -> Result<f64> {
    check_time(t1)?;
    check_time(t2)?;
    if t1.is_infinite() || t2.is_infinite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(params.log_pdf_unchecked(t1, t2))
}

/// φ₂(ξ₁/α₁, ξ₂/α₂; ρ) times the two coordinate Jacobians.
pub fn biv_pdf(t1: f64, t2: f64, params: &BivNuBsParams) -> Result<f64> {
    biv_log_pdf(t1, t2, params).map(f64::exp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Margin {
    First,
    Second,
}

/// Marginal density of one coordinate; it is the univariate ν-BS density
/// of that coordinate's triple and does not involve ρ.
pub fn biv_marginal_pdf(which: Margin, t: f64, params: &BivNuBsParams) -> Result<f64> {
    match which {
        Margin::First => univariate::pdf(t, &params.p1),
        Margin::Second => univariate::pdf(t, &params.p2),
    }
}

/// `n` correlated pairs, deterministic in `seed`.
pub fn biv_sample(params: &BivNuBsParams, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = stream_rng(seed, 0);
    let s = (1.0 - params.rho * params.rho).sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let z2 = params.rho * a + s * b;
            [params.p1.from_z(a), params.p2.from_z(z2)]
        })
        .collect()
}

/// Which coordinates of (T₁, T₂) are replaced by their reciprocals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReciprocalMode {
    Both,
    First,
    Second,
}

/// Parameters of the vector with the selected coordinates inverted.
///
/// Inverting a coordinate inverts its β and negates its latent score,
/// so the latent correlation keeps its sign when both coordinates are
/// inverted and flips sign when only one is.
pub fn biv_reciprocal_params(mode: ReciprocalMode, params: &BivNuBsParams) -> BivNuBsParams {
    let inv = univariate::reciprocal_params;
    match mode {
        ReciprocalMode::Both => BivNuBsParams {
            p1: inv(&params.p1),
            p2: inv(&params.p2),
            rho: params.rho,
        },
        ReciprocalMode::First => BivNuBsParams {
            p1: inv(&params.p1),
            p2: params.p2,
            rho: -params.rho,
        },
        ReciprocalMode::Second => BivNuBsParams {
            p1: params.p1,
            p2: inv(&params.p2),
            rho: -params.rho,
        },
    }
}

/// m-variate parameters with one shared ν.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiNuBsParams {
    alphas: Vec<f64>,
    betas: Vec<f64>,
    nu: f64,
    gamma: CorrelationMatrix,
}

impl MultiNuBsParams {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>, nu: f64, gamma: CorrelationMatrix) -> Result<Self> {
        let m = gamma.dim();
        for len in [alphas.len(), betas.len()] {
            if len != m {
                return Err(Error::DimensionMismatch { expected: m, got: len });
            }
        }
        for &a in &alphas {
            check_positive("alpha", a)?;
        }
        for &b in &betas {
            check_positive("beta", b)?;
        }
        check_positive("nu", nu)?;
        Ok(Self {
            alphas,
            betas,
            nu,
            gamma,
        })
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn gamma(&self) -> &CorrelationMatrix {
        &self.gamma
    }

    /// Univariate triple of coordinate `i`.
    pub fn marginal(&self, i: usize) -> NuBsParams {
        NuBsParams::new(self.alphas[i], self.betas[i], self.nu).expect("validated at construction")
    }

    fn check_point(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: t.len(),
            });
        }
        for &ti in t {
            check_time(ti)?;
        }
        Ok(())
    }
}

pub fn multi_log_pdf(t: &[f64], params: &MultiNuBsParams) -> Result<f64> {
    params.check_point(t)?;
    if t.iter().any(|x| x.is_infinite()) {
        return Ok(f64::NEG_INFINITY);
    }
    let mut scores = Vec::with_capacity(t.len());
    let mut log_jac = 0.0;
    for (i, &ti) in t.iter().enumerate() {
        let (j, z) = log_jacobian_and_score(ti, &params.marginal(i));
        log_jac += j;
        scores.push(z);
    }
    Ok(mvn_log_pdf(&scores, &params.gamma)? + log_jac)
}

/// φ_m(ξᵢ/αᵢ; Γ) · Πᵢ ν/(αᵢβᵢ)·[(tᵢ/βᵢ)^(ν−1) + (βᵢ/tᵢ)^(ν+1)].
pub fn multi_pdf(t: &[f64], params: &MultiNuBsParams) -> Result<f64> {
    multi_log_pdf(t, params).map(f64::exp)
}

/// Monte Carlo joint cdf on the latent scores.
pub fn multi_cdf(t: &[f64], params: &MultiNuBsParams, n_draws: usize, seed: u64) -> Result<McEstimate> {
    multi_cdf_with(t, params, n_draws, seed, Execution::default())
}

pub fn multi_cdf_with(
    t: &[f64],
    params: &MultiNuBsParams,
    n_draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    params.check_point(t)?;
    let scores: Vec<f64> = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| params.marginal(i).z_score(ti))
        .collect();
    mvn_cdf_mc_with(&scores, &params.gamma, n_draws, seed, exec)
}

/// `n` draws as rows of length m, deterministic in `seed`.
pub fn multi_sample(params: &MultiNuBsParams, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let m = params.dim();
    let l = params.gamma.cholesky();
    let margins: Vec<NuBsParams> = (0..m).map(|i| params.marginal(i)).collect();
    let mut rng = stream_rng(seed, 0);
    let mut z = vec![0.0; m];
    let mut x = vec![0.0; m];
    (0..n)
        .map(|_| {
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            l.mul_vec(&z, &mut x);
            x.iter().zip(&margins).map(|(&xi, p)| p.from_z(xi)).collect()
        })
        .collect()
}

/// Latent normal scores of a univariate sample (ξ/α per value).
pub fn latent_scores(data: &[f64], params: &NuBsParams) -> Vec<f64> {
    data.iter().map(|&t| params.z_score(t)).collect()
}
