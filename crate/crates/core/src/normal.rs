//! Standard-normal kernels: univariate pdf/cdf/quantile, the bivariate cdf,
//! the correlated m-variate density and a Monte Carlo m-variate cdf.
//!
//! The univariate cdf combines a power series around the origin with the
//! Laplace continued fraction for the Mills ratio in the tails, giving
//! absolute error below 1e-15 everywhere and small relative error in
//! both tails. The bivariate cdf follows the Drezner–Wesolowsky reduction
//! over the correlation parameter with Genz's refinements for |ρ| close
//! to one.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{stream_rng, Execution};
use crate::quadrature::cached_legendre;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SERIES_LIMIT: f64 = 3.0;

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

#[inline]
pub fn std_normal_log_pdf(z: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * z * z
}

/// Φ(z). Accepts ±∞.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z.abs() < SERIES_LIMIT {
        0.5 + std_normal_pdf(z) * origin_series(z)
    } else if z < 0.0 {
        upper_tail(-z)
    } else {
        1.0 - upper_tail(z)
    }
}

/// 1 − Φ(z), computed without cancellation for large z.
#[inline]
pub fn std_normal_sf(z: f64) -> f64 {
    std_normal_cdf(-z)
}

// Σ z^(2k+1) / (2k+1)!!, so that Φ(z) = 1/2 + φ(z)·S(z).
fn origin_series(z: f64) -> f64 {
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut k = 1.0;
    loop {
        term *= z2 / (2.0 * k + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    sum
}

// Q(x) for x ≥ SERIES_LIMIT via the continued fraction
// Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + ...)))), modified Lentz.
fn upper_tail(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    let density = std_normal_pdf(x);
    if density == 0.0 {
        return 0.0;
    }
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..1000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    density / f
}

/// Φ⁻¹(p) for p in (0, 1).
///
/// Acklam's rational approximation seeds two Halley steps against
/// [`std_normal_cdf`], so the result is as accurate as Φ itself.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

// p in (0, 0.5)
fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..2 {
        let density = std_normal_pdf(x);
        if density == 0.0 {
            break;
        }
        let u = (std_normal_cdf(x) - p) / density;
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Φ₂(u, v; ρ) = P(Z₁ ≤ u, Z₂ ≤ v) for standard normals with correlation ρ.
///
/// Infinite limits are resolved by their marginal limits.
pub fn biv_normal_cdf(u: f64, v: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "correlation must satisfy |rho| < 1, got {rho}"
        )));
    }
    if u.is_nan() || v.is_nan() {
        return Err(Error::Domain("bivariate normal limits must not be NaN".into()));
    }
    if u == f64::NEG_INFINITY || v == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if u == f64::INFINITY {
        return Ok(std_normal_cdf(v));
    }
    if v == f64::INFINITY {
        return Ok(std_normal_cdf(u));
    }
    Ok(upper_orthant(-u, -v, rho).clamp(0.0, 1.0))
}

// P(X > h, Y > k); Genz's BVND.
fn upper_orthant(h: f64, k: f64, r: f64) -> f64 {
    let rule = cached_legendre(if r.abs() < 0.3 {
        6
    } else if r.abs() < 0.75 {
        12
    } else {
        20
    });
    let two_pi = 2.0 * PI;
    let mut k = k;
    let mut hk = h * k;

    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        let mut sum = 0.0;
        for (x, w) in rule.iter() {
            let sn = (0.5 * asr * (x + 1.0)).sin();
            sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        return sum * asr / (2.0 * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    let as_ = (1.0 - r) * (1.0 + r);
    let mut a = as_.sqrt();
    let bs = (h - k) * (h - k);
    let c = (4.0 - hk) / 8.0;
    let d = (12.0 - hk) / 16.0;
    let asr = -0.5 * (bs / as_ + hk);
    if asr > -100.0 {
        bvn = a
            * asr.exp()
            * (1.0 - c * (bs - as_) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as_ * as_ / 5.0);
    }
    if -hk < 100.0 {
        let b = bs.sqrt();
        bvn -= (-0.5 * hk).exp()
            * two_pi.sqrt()
            * std_normal_cdf(-b / a)
            * b
            * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (x, w) in rule.iter() {
        let xs = (a * (x + 1.0)).powi(2);
        let rs = (1.0 - xs).sqrt();
        let asr = -0.5 * (bs / xs + hk);
        if asr > -100.0 {
            bvn += a
                * w
                * asr.exp()
                * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                    - (1.0 + c * xs * (1.0 + d * xs)));
        }
    }
    bvn = -bvn / two_pi;

    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        bvn = -bvn;
        if k > h {
            if h < 0.0 {
                bvn += std_normal_cdf(k) - std_normal_cdf(h);
            } else {
                bvn += std_normal_cdf(-h) - std_normal_cdf(-k);
            }
        }
        bvn
    }
}

/// Lower-triangular factor `L` with `L·Lᵀ = A`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    /// Factors a symmetric row-major `dim × dim` matrix. Fails if any pivot
    /// is not strictly positive.
    pub fn factor(dim: usize, a: &[f64]) -> Result<Self> {
        if dim == 0 || a.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: a.len(),
            });
        }
        let mut l = vec![0.0; dim * dim];
        for j in 0..dim {
            let mut diag = a[j * dim + j];
            for k in 0..j {
                diag -= l[j * dim + k] * l[j * dim + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: diag,
                });
            }
            let ljj = diag.sqrt();
            l[j * dim + j] = ljj;
            for i in (j + 1)..dim {
                let mut s = a[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                l[i * dim + j] = s / ljj;
            }
        }
        Ok(Self { dim, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// ln |A| = 2 Σ ln Lᵢᵢ.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.get(i, i).ln()).sum::<f64>()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        y
    }

    /// `L z`, mapping independent standard normals to correlated ones.
    pub fn mul_vec(&self, z: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = (0..=i).map(|k| self.get(i, k) * z[k]).sum();
        }
    }

    /// Diagonal of A⁻¹, i.e. Σₖ ((L⁻¹)ₖᵢ)².
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.dim;
        let mut diag = vec![0.0; n];
        let mut e = vec![0.0; n];
        for i in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[i] = 1.0;
            // column i of L⁻¹
            let col = self.solve_lower(&e);
            diag[i] = col.iter().map(|c| c * c).sum();
        }
        diag
    }
}

/// Positive-definite correlation matrix Γ with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    dim: usize,
    entries: Vec<f64>,
    factor: CholeskyFactor,
}

impl CorrelationMatrix {
    /// Validates a row-major `dim × dim` matrix.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for i in 0..dim {
            if entries[i * dim + i] != 1.0 {
                return Err(Error::InvalidCorrelation(format!(
                    "diagonal entry ({i},{i}) is {} rather than 1",
                    entries[i * dim + i]
                )));
            }
            for j in 0..i {
                let (a, b) = (entries[i * dim + j], entries[j * dim + i]);
                if !a.is_finite() || !b.is_finite() || (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidCorrelation(format!(
                        "entries ({i},{j}) = {a} and ({j},{i}) = {b} are not symmetric"
                    )));
                }
                if a.abs() > 1.0 {
                    return Err(Error::InvalidCorrelation(format!(
                        "entry ({i},{j}) = {a} lies outside [-1, 1]"
                    )));
                }
            }
        }
        let factor = CholeskyFactor::factor(dim, &entries)?;
        Ok(Self {
            dim,
            entries,
            factor,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidCorrelation("matrix is not square".into()));
        }
        Self::new(dim, rows.concat())
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self::new(dim, entries).expect("identity is a valid correlation matrix")
    }

    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(2, vec![1.0, rho, rho, 1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn cholesky(&self) -> &CholeskyFactor {
        &self.factor
    }
}

/// ln φ_p(u; Γ).
pub fn mvn_log_pdf(u: &[f64], gamma: &CorrelationMatrix) -> Result<f64> {
    if u.len() != gamma.dim() {
        return Err(Error::DimensionMismatch {
            expected: gamma.dim(),
            got: u.len(),
        });
    }
    let l = gamma.cholesky();
    let y = l.solve_lower(u);
    let quad: f64 = y.iter().map(|v| v * v).sum();
    Ok(-(u.len() as f64) * LN_SQRT_2PI - 0.5 * l.log_det() - 0.5 * quad)
}

/// φ_p(u; Γ) = (2π)^(−p/2) |Γ|^(−1/2) exp(−uᵀΓ⁻¹u / 2).
pub fn mvn_pdf(u: &[f64], gamma: &CorrelationMatrix) -> Result<f64> {
    mvn_log_pdf(u, gamma).map(f64::exp)
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

const MC_CHUNK: usize = 8192;
pub const MIN_MC_DRAWS: usize = 1000;

/// Φ_m(u; Γ) by counting factor-transformed standard-normal draws inside
/// the orthant. Deterministic for a given seed.
pub fn mvn_cdf_mc(
    u: &[f64],
    gamma: &CorrelationMatrix,
    n_draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    mvn_cdf_mc_with(u, gamma, n_draws, seed, Execution::default())
}

pub fn mvn_cdf_mc_with(
    u: &[f64],
    gamma: &CorrelationMatrix,
    n_draws: usize,
    seed: u64,
    exec: Execution,
) -> Result<McEstimate> {
    let m = gamma.dim();
    if u.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: u.len(),
        });
    }
    if u.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("orthant limits must not be NaN".into()));
    }
    if n_draws < MIN_MC_DRAWS {
        return Err(Error::Domain(format!(
            "Monte Carlo cdf needs at least {MIN_MC_DRAWS} draws, got {n_draws}"
        )));
    }
    let l = gamma.cholesky();
    let n_chunks = n_draws.div_ceil(MC_CHUNK);
    let hits: Vec<u64> = exec.map(n_chunks, |c| {
        let mut rng = stream_rng(seed, c as u64);
        let len = MC_CHUNK.min(n_draws - c * MC_CHUNK);
        let mut z = vec![0.0; m];
        let mut x = vec![0.0; m];
        let mut count = 0u64;
        for _ in 0..len {
            z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
            l.mul_vec(&z, &mut x);
            if x.iter().zip(u).all(|(xi, ui)| xi <= ui) {
                count += 1;
            }
        }
        count
    });
    let total: u64 = hits.iter().sum();
    let n = n_draws as f64;
    let p = total as f64 / n;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
    })
}
