//! Maximum-likelihood fitting of the univariate and bivariate models.
//!
//! For fixed (β, ν) the likelihood is maximised in α by
//! `α̂² = (1/n)·Σ ξᵢ²`, so the univariate search runs over (ln β, ln ν)
//! only. The bivariate likelihood profiles (α₁, α₂, ρ) the same way via the
//! sample second moments of the unscaled ξ's, leaving (ln β₁, ln ν₁,
//! ln β₂, ln ν₂). Every search is Nelder–Mead followed by a Newton polish.
//!
//! Score residuals are reported per observation in log coordinates,
//! `θⱼ·(∂ℓ/∂θⱼ)/n` (and `(1−ρ²)·(∂ℓ/∂ρ)/n` for ρ), which makes them
//! invariant to the units of the data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multivariate::BivNuBsParams;
use crate::normal::CholeskyFactor;
use crate::optim::{fd_gradient, nelder_mead, newton_polish};
use crate::par::Execution;
use crate::univariate::{ln_2cosh, NuBsParams, LN_SQRT_2PI};

/// Largest scaled score residual compatible with `converged = true`.
pub const UNI_SCORE_TOL: f64 = 1e-4;
pub const BIV_GRADIENT_TOL: f64 = 1e-3;

/// ν is searched inside `[NU_MIN, NU_MAX]`.
pub const NU_MIN: f64 = 1e-6;
pub const NU_MAX: f64 = 1e4;

pub const NU_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

const MIN_UNI_OBS: usize = 4;
const MIN_BIV_OBS: usize = 10;
const POLISH_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// One start at β₀ = √(arithmetic mean · harmonic mean), ν₀ = 1/2.
    MomentBased,
    /// β₀ = sample median with ν₀ over [`NU_GRID`].
    Grid,
    /// Full parameter vector: 3 values univariate, 7 bivariate.
    UserSupplied(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Iteration cap for each Nelder–Mead run.
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    /// Nelder–Mead runs per start; runs after the first restart from the
    /// previous optimum with a fresh simplex.
    pub restarts: usize,
    pub init_strategy: InitStrategy,
    #[serde(default)]
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            rel_tolerance: 1e-10,
            restarts: 2,
            init_strategy: InitStrategy::Grid,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rel_tolerance",
                value: self.rel_tolerance,
                reason: "must be positive",
            });
        }
        if self.restarts < 1 {
            return Err(Error::InvalidParameter {
                name: "restarts",
                value: self.restarts as f64,
                reason: "must be at least 1",
            });
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter {
                name: "max_iterations",
                value: self.max_iterations as f64,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum FittedParams {
    Univariate(NuBsParams),
    Bivariate(BivNuBsParams),
}

impl FittedParams {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            FittedParams::Univariate(p) => p.to_array().to_vec(),
            FittedParams::Bivariate(p) => p.to_array().to_vec(),
        }
    }

    pub fn univariate(&self) -> Option<&NuBsParams> {
        match self {
            FittedParams::Univariate(p) => Some(p),
            FittedParams::Bivariate(_) => None,
        }
    }

    pub fn bivariate(&self) -> Option<&BivNuBsParams> {
        match self {
            FittedParams::Univariate(_) => None,
            FittedParams::Bivariate(p) => Some(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: FittedParams,
    /// Set when ν was held fixed during the fit.
    pub fixed_nu: Option<f64>,
    pub log_likelihood: f64,
    pub converged: bool,
    pub n_iterations: usize,
    pub score_residuals: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub aic: f64,
    pub bic: f64,
    pub n_obs: usize,
    /// Number of free parameters.
    pub k: usize,
    /// Log-likelihood at each start, in start order.
    pub start_log_likelihoods: Vec<f64>,
    pub diagnostics: Vec<String>,
}

fn information_criteria(ll: f64, k: usize, n: usize) -> (f64, f64) {
    let k = k as f64;
    (2.0 * k - 2.0 * ll, k * (n as f64).ln() - 2.0 * ll)
}

fn check_data(data: &[f64], needed: usize) -> Result<()> {
    if data.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: data.len(),
        });
    }
    if let Some((i, &v)) = data.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!(
            "observation {} is {v}; data must be finite and positive",
            i + 1
        )));
    }
    if data.iter().all(|&v| v == data[0]) {
        return Err(Error::Domain("all observations are equal".into()));
    }
    Ok(())
}

fn median(data: &[f64]) -> f64 {
    let mut s = data.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

fn moment_beta(data: &[f64]) -> f64 {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let harmonic = n / data.iter().map(|t| 1.0 / t).sum::<f64>();
    (mean * harmonic).sqrt()
}

// ---------------------------------------------------------------------------
// Univariate likelihood

/// Σ log f(tᵢ). Returns −∞ if any datum is not a positive finite number.
pub fn uni_log_likelihood(data: &[f64], params: &NuBsParams) -> f64 {
    if data.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return f64::NEG_INFINITY;
    }
    data.iter().map(|&t| params.log_pdf_unchecked(t)).sum()
}

/// The log-likelihood written term by term with explicit powers:
/// n ln ν − n ln α − n ln β − (n/2) ln 2π − (1/2α²) Σ[(tᵢ/β)^{2ν} + (tᵢ/β)^{−2ν} − 2]
/// + Σ ln[(tᵢ/β)^{ν−1} + (tᵢ/β)^{−(ν+1)}].
pub fn uni_log_likelihood_closed_form(data: &[f64], params: &NuBsParams) -> f64 {
    if data.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return f64::NEG_INFINITY;
    }
    let [a, b, v] = params.to_array();
    let n = data.len() as f64;
    let quad: f64 = data
        .iter()
        .map(|&t| (t / b).powf(2.0 * v) + (t / b).powf(-2.0 * v) - 2.0)
        .sum();
    let jac: f64 = data
        .iter()
        .map(|&t| ((t / b).powf(v - 1.0) + (t / b).powf(-(v + 1.0))).ln())
        .sum();
    n * v.ln() - n * a.ln() - n * b.ln() - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
        - quad / (2.0 * a * a)
        + jac
}

/// (∂ℓ/∂α, ∂ℓ/∂β, ∂ℓ/∂ν) with `xᵢ = ν ln(tᵢ/β)`:
///
/// ∂ℓ/∂α = −n/α + Σ ξᵢ²/α³
/// ∂ℓ/∂β = (2ν/(α²β)) Σ sinh 2xᵢ − (ν/β) Σ tanh xᵢ
/// ∂ℓ/∂ν = n/ν − (2/α²) Σ sinh(2xᵢ)·ln(tᵢ/β) + Σ tanh(xᵢ)·ln(tᵢ/β)
pub fn uni_score(data: &[f64], params: &NuBsParams) -> Result<[f64; 3]> {
    if data.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if data.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Domain("data must be finite and positive".into()));
    }
    let [a, b, v] = params.to_array();
    let n = data.len() as f64;
    let (mut s_xi2, mut s_sinh2, mut s_tanh, mut s_sinh2_l, mut s_tanh_l) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &t in data {
        let l = (t / b).ln();
        let x = v * l;
        let xi = 2.0 * x.sinh();
        let s2 = (2.0 * x).sinh();
        let th = x.tanh();
        s_xi2 += xi * xi;
        s_sinh2 += s2;
        s_tanh += th;
        s_sinh2_l += s2 * l;
        s_tanh_l += th * l;
    }
    let a2 = a * a;
    Ok([
        -n / a + s_xi2 / (a2 * a),
        2.0 * v / (a2 * b) * s_sinh2 - v / b * s_tanh,
        n / v - 2.0 / a2 * s_sinh2_l + s_tanh_l,
    ])
}

/// α̂(β, ν) = {(1/n) Σ [(tᵢ/β)^{2ν} + (β/tᵢ)^{2ν} − 2]}^{1/2}.
pub fn profile_alpha(data: &[f64], beta: f64, nu: f64) -> f64 {
    let s: f64 = data
        .iter()
        .map(|&t| {
            let xi = 2.0 * (nu * (t / beta).ln()).sinh();
            xi * xi
        })
        .sum();
    (s / data.len() as f64).sqrt()
}

struct UniProfile {
    ln_t: Vec<f64>,
    sum_ln_t: f64,
}

impl UniProfile {
    fn new(data: &[f64]) -> Self {
        let ln_t: Vec<f64> = data.iter().map(|t| t.ln()).collect();
        let sum_ln_t = ln_t.iter().sum();
        Self { ln_t, sum_ln_t }
    }

    fn n(&self) -> f64 {
        self.ln_t.len() as f64
    }

    /// (profile log-likelihood, α̂) at (ln β, ν).
    fn eval(&self, ln_beta: f64, nu: f64) -> (f64, f64) {
        if !(NU_MIN..=NU_MAX).contains(&nu) || !ln_beta.is_finite() {
            return (f64::NEG_INFINITY, f64::NAN);
        }
        let (mut s, mut g) = (0.0, 0.0);
        for &lt in &self.ln_t {
            let x = nu * (lt - ln_beta);
            let xi = 2.0 * x.sinh();
            s += xi * xi;
            g += ln_2cosh(x);
        }
        let n = self.n();
        let alpha = (s / n).sqrt();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return (f64::NEG_INFINITY, alpha);
        }
        let ll = n * nu.ln() - n * alpha.ln() - n * LN_SQRT_2PI - 0.5 * n + g - self.sum_ln_t;
        (ll, alpha)
    }

    /// Gradient of the profile in (ln β, ln ν), via the envelope identity.
    fn grad(&self, ln_beta: f64, nu: f64) -> [f64; 2] {
        let (ll, alpha) = self.eval(ln_beta, nu);
        if !ll.is_finite() {
            return [f64::NAN; 2];
        }
        let a2 = alpha * alpha;
        let (mut s_sinh2, mut s_tanh, mut s_sinh2_l, mut s_tanh_l) = (0.0, 0.0, 0.0, 0.0);
        for &lt in &self.ln_t {
            let l = lt - ln_beta;
            let x = nu * l;
            let s2 = (2.0 * x).sinh();
            let th = x.tanh();
            s_sinh2 += s2;
            s_tanh += th;
            s_sinh2_l += s2 * l;
            s_tanh_l += th * l;
        }
        [
            2.0 * nu / a2 * s_sinh2 - nu * s_tanh,
            nu * (self.n() / nu - 2.0 / a2 * s_sinh2_l + s_tanh_l),
        ]
    }
}

/// Log-coordinate score per observation.
fn scaled_uni_score(data: &[f64], p: &NuBsParams, fixed_nu: bool) -> Vec<f64> {
    let n = data.len() as f64;
    let s = uni_score(data, p).unwrap_or([f64::NAN; 3]);
    let theta = p.to_array();
    let k = if fixed_nu { 2 } else { 3 };
    (0..k).map(|j| theta[j] * s[j] / n).collect()
}

fn residuals_ok(res: &[f64], tol: f64) -> bool {
    res.iter().all(|r| r.is_finite() && r.abs() <= tol)
}

#[derive(Debug, Clone)]
struct SearchOutcome {
    y: Vec<f64>,
    value: f64,
    iterations: usize,
    nm_converged: bool,
}

/// Nelder–Mead runs (with restarts) from each start, then a Newton polish of
/// the best one. `objective` is the log-likelihood to maximise.
fn maximise<F, G>(
    objective: &F,
    gradient: &G,
    starts: &[Vec<f64>],
    step: &[f64],
    config: &OptimizerConfig,
) -> (SearchOutcome, Vec<SearchOutcome>)
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let neg = |y: &[f64]| -objective(y);
    let runs: Vec<SearchOutcome> = config.execution.map(starts.len(), |i| {
        let mut y = starts[i].clone();
        let mut value = objective(&y);
        let mut iterations = 0;
        let mut nm_converged = false;
        for _ in 0..config.restarts {
            let m = nelder_mead(neg, &y, step, config.rel_tolerance, config.max_iterations);
            iterations += m.iterations;
            nm_converged = m.converged;
            if -m.value >= value {
                y = m.x;
                value = -m.value;
            }
        }
        SearchOutcome {
            y,
            value,
            iterations,
            nm_converged,
        }
    });
    let mut best = runs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r.clone())
        .expect("at least one start");
    let steps = newton_polish(objective, gradient, &mut best.y, &mut best.value, POLISH_STEPS);
    best.iterations = runs.iter().map(|r| r.iterations).sum::<usize>() + steps;
    (best, runs)
}

fn uni_starts(data: &[f64], config: &OptimizerConfig) -> Result<Vec<(f64, f64)>> {
    Ok(match &config.init_strategy {
        InitStrategy::Grid => {
            let b0 = median(data);
            NU_GRID.iter().map(|&v| (b0, v)).collect()
        }
        InitStrategy::MomentBased => vec![(moment_beta(data), 0.5)],
        InitStrategy::UserSupplied(v) => {
            if v.len() != 3 {
                return Err(Error::DimensionMismatch {
                    expected: 3,
                    got: v.len(),
                });
            }
            let p = NuBsParams::new(v[0], v[1], v[2])?;
            vec![(p.beta(), p.nu())]
        }
    })
}

/// Free (α, β, ν) maximum-likelihood fit.
pub fn fit_univariate(data: &[f64], config: &OptimizerConfig) -> Result<FitResult> {
    fit_univariate_from(data, config, &[])
}

fn fit_univariate_from(data: &[f64], config: &OptimizerConfig, extra: &[(f64, f64)]) -> Result<FitResult> {
    config.validate()?;
    check_data(data, MIN_UNI_OBS)?;
    let prof = UniProfile::new(data);
    let mut starts: Vec<Vec<f64>> = uni_starts(data, config)?
        .into_iter()
        .chain(extra.iter().copied())
        .map(|(b, v)| vec![b.ln(), v.ln()])
        .collect();
    starts.dedup();
    let objective = |y: &[f64]| prof.eval(y[0], y[1].exp()).0;
    let gradient = |y: &[f64]| prof.grad(y[0], y[1].exp()).to_vec();
    let (best, _) = maximise(&objective, &gradient, &starts, &[0.2, 0.5], config);

    let beta = best.y[0].exp();
    let nu = best.y[1].exp();
    let (_, alpha) = prof.eval(best.y[0], nu);
    let params = NuBsParams::new(alpha, beta, nu)?;
    let start_lls = starts
        .iter()
        .map(|y| {
            let (b, v) = (y[0].exp(), y[1].exp());
            match NuBsParams::new(profile_alpha(data, b, v), b, v) {
                Ok(p) => uni_log_likelihood(data, &p),
                Err(_) => f64::NEG_INFINITY,
            }
        })
        .collect();

    let mut diagnostics = Vec::new();
    if nu <= 1e-2 {
        let (lower, _) = prof.eval(best.y[0], (nu / 10.0).max(NU_MIN));
        if lower >= best.value - 1e-9 * best.value.abs() {
            diagnostics.push(format!(
                "profile log-likelihood does not decrease as nu -> 0 (nu = {nu:.3e}); \
                 the supremum is approached in the log-normal limit"
            ));
        }
    }
    if nu >= NU_MAX * 0.99 {
        diagnostics.push(format!("nu reached the search bound {NU_MAX:e}"));
    }
    let boundary = !diagnostics.is_empty();
    let mut fit = finish_univariate(data, params, None, best, start_lls, diagnostics, !boundary)?;
    if boundary && fit.converged {
        fit.diagnostics
            .push("standard errors omitted: the optimum lies on the nu boundary".into());
    }
    Ok(fit)
}

/// Fit of (α, β) with ν held at `nu`; `nu = 0.5` is the classic model.
pub fn fit_univariate_fixed_nu(data: &[f64], nu: f64, config: &OptimizerConfig) -> Result<FitResult> {
    config.validate()?;
    check_data(data, MIN_UNI_OBS)?;
    let nu = crate::error::check_positive("nu", nu)?;
    let prof = UniProfile::new(data);
    let mut starts: Vec<Vec<f64>> = uni_starts(data, config)?
        .into_iter()
        .map(|(b, _)| vec![b.ln()])
        .collect();
    if matches!(config.init_strategy, InitStrategy::Grid) {
        starts.push(vec![moment_beta(data).ln()]);
    }
    starts.dedup();
    let objective = |y: &[f64]| prof.eval(y[0], nu).0;
    let gradient = |y: &[f64]| vec![prof.grad(y[0], nu)[0]];
    let (best, _) = maximise(&objective, &gradient, &starts, &[0.2], config);
    let beta = best.y[0].exp();
    let (_, alpha) = prof.eval(best.y[0], nu);
    let params = NuBsParams::new(alpha, beta, nu)?;
    let start_lls = starts
        .iter()
        .map(|y| {
            let b = y[0].exp();
            match NuBsParams::new(profile_alpha(data, b, nu), b, nu) {
                Ok(p) => uni_log_likelihood(data, &p),
                Err(_) => f64::NEG_INFINITY,
            }
        })
        .collect();
    finish_univariate(data, params, Some(nu), best, start_lls, Vec::new(), true)
}

fn finish_univariate(
    data: &[f64],
    params: NuBsParams,
    fixed_nu: Option<f64>,
    best: SearchOutcome,
    start_log_likelihoods: Vec<f64>,
    mut diagnostics: Vec<String>,
    with_std_errors: bool,
) -> Result<FitResult> {
    let n = data.len();
    let k = if fixed_nu.is_some() { 2 } else { 3 };
    let ll = uni_log_likelihood(data, &params);
    let score_residuals = scaled_uni_score(data, &params, fixed_nu.is_some());
    let converged = best.nm_converged && residuals_ok(&score_residuals, UNI_SCORE_TOL);
    if !best.nm_converged {
        diagnostics.push("Nelder-Mead stopped at the iteration limit".into());
    }
    if !residuals_ok(&score_residuals, UNI_SCORE_TOL) {
        diagnostics.push(format!("score residuals exceed {UNI_SCORE_TOL:e}"));
    }
    let (aic, bic) = information_criteria(ll, k, n);
    let mut fit = FitResult {
        params: FittedParams::Univariate(params),
        fixed_nu,
        log_likelihood: ll,
        converged,
        n_iterations: best.iterations,
        score_residuals,
        std_errors: None,
        aic,
        bic,
        n_obs: n,
        k,
        start_log_likelihoods,
        diagnostics,
    };
    if converged && with_std_errors {
        match std_errors(&fit, data) {
            Ok(se) => fit.std_errors = Some(se),
            Err(e) => fit.diagnostics.push(format!("standard errors unavailable: {e}")),
        }
    }
    Ok(fit)
}

// ---------------------------------------------------------------------------
// Standard errors

/// √diag of the inverse central-difference Hessian of −f at `theta`, with
/// step `1e-4·max(|θⱼ|, floor)` per coordinate.
fn hessian_std_errors<F: Fn(&[f64]) -> f64>(f: F, theta: &[f64], floor: f64) -> Result<Vec<f64>> {
    let k = theta.len();
    let h: Vec<f64> = theta.iter().map(|t| 1e-4 * t.abs().max(floor)).collect();
    let f0 = f(theta);
    let mut x = theta.to_vec();
    let mut at = |d: &[(usize, f64)]| {
        for &(i, s) in d {
            x[i] = theta[i] + s * h[i];
        }
        let v = f(&x);
        for &(i, _) in d {
            x[i] = theta[i];
        }
        v
    };
    let mut neg_h = vec![0.0; k * k];
    for i in 0..k {
        let d2 = (at(&[(i, 1.0)]) - 2.0 * f0 + at(&[(i, -1.0)])) / (h[i] * h[i]);
        neg_h[i * k + i] = -d2;
        for j in 0..i {
            let pp = at(&[(i, 1.0), (j, 1.0)]);
            let pm = at(&[(i, 1.0), (j, -1.0)]);
            let mp = at(&[(i, -1.0), (j, 1.0)]);
            let mm = at(&[(i, -1.0), (j, -1.0)]);
            let d = (pp - pm - mp + mm) / (4.0 * h[i] * h[j]);
            neg_h[i * k + j] = -d;
            neg_h[j * k + i] = -d;
        }
    }
    if neg_h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: f64::NAN,
        });
    }
    let chol = CholeskyFactor::factor(k, &neg_h)?;
    Ok(chol.inverse_diagonal().into_iter().map(f64::sqrt).collect())
}

/// Observed-information standard errors for a univariate fit, in parameter
/// order (α, β, ν), or (α, β) when ν was fixed.
pub fn std_errors(fit: &FitResult, data: &[f64]) -> Result<Vec<f64>> {
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    let p = fit
        .params
        .univariate()
        .ok_or_else(|| Error::Domain("std_errors expects a univariate fit".into()))?;
    match fit.fixed_nu {
        Some(nu) => hessian_std_errors(
            |th| match NuBsParams::new(th[0], th[1], nu) {
                Ok(q) => uni_log_likelihood(data, &q),
                Err(_) => f64::NAN,
            },
            &[p.alpha(), p.beta()],
            0.0,
        ),
        None => hessian_std_errors(
            |th| match NuBsParams::new(th[0], th[1], th[2]) {
                Ok(q) => uni_log_likelihood(data, &q),
                Err(_) => f64::NAN,
            },
            &p.to_array(),
            0.0,
        ),
    }
}

/// Observed-information standard errors for a bivariate fit, order
/// (α₁, β₁, ν₁, α₂, β₂, ν₂, ρ).
pub fn biv_std_errors(fit: &FitResult, data: &[[f64; 2]]) -> Result<Vec<f64>> {
    if !fit.converged {
        return Err(Error::NotConverged);
    }
    let p = fit
        .params
        .bivariate()
        .ok_or_else(|| Error::Domain("biv_std_errors expects a bivariate fit".into()))?;
    hessian_std_errors(
        |th| match BivNuBsParams::from_slice(th) {
            Ok(q) => biv_log_likelihood(data, &q),
            Err(_) => f64::NAN,
        },
        &p.to_array(),
        1e-2,
    )
}

// ---------------------------------------------------------------------------
// Model comparison

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Classic,
    FreeNu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub classic: FitResult,
    pub free_nu: FitResult,
    /// 2·(ℓ_free − ℓ_classic)
    pub lr_statistic: f64,
    /// Asymptotic χ²₁ tail probability of `lr_statistic`.
    pub lr_p_value: f64,
    pub aic_preferred: Model,
    pub bic_preferred: Model,
}

/// Classic (ν = 1/2) against free-ν fits. The free fit also starts from
/// the classic optimum, so its log-likelihood is never below the classic one.
pub fn compare_models(data: &[f64], config: &OptimizerConfig) -> Result<ModelComparison> {
    let classic = fit_univariate_fixed_nu(data, 0.5, config)?;
    let cp = classic.params.univariate().expect("univariate fit");
    let free_nu = fit_univariate_from(data, config, &[(cp.beta(), 0.5)])?;
    let lr = (2.0 * (free_nu.log_likelihood - classic.log_likelihood)).max(0.0);
    let lr_p_value = 2.0 * crate::normal::std_normal_sf(lr.sqrt());
    let pick = |a: f64, b: f64| if b < a { Model::FreeNu } else { Model::Classic };
    Ok(ModelComparison {
        aic_preferred: pick(classic.aic, free_nu.aic),
        bic_preferred: pick(classic.bic, free_nu.bic),
        classic,
        free_nu,
        lr_statistic: lr,
        lr_p_value,
    })
}

// ---------------------------------------------------------------------------
// Bivariate likelihood

fn valid_pairs(data: &[[f64; 2]]) -> bool {
    data.iter().flatten().all(|t| t.is_finite() && *t > 0.0)
}

/// Σ log f(t₁ᵢ, t₂ᵢ). Returns −∞ if any entry is not positive and finite.
pub fn biv_log_likelihood(data: &[[f64; 2]], params: &BivNuBsParams) -> f64 {
    if !valid_pairs(data) {
        return f64::NEG_INFINITY;
    }
    data.iter().map(|&[a, b]| params.log_pdf_unchecked(a, b)).sum()
}

/// The bivariate log-likelihood written with explicit powers and the
/// cross term `−(2ρ/(α₁α₂)) Σ ξ₁ᵢ ξ₂ᵢ` inside the `1/(2(1−ρ²))` bracket.
pub fn biv_log_likelihood_closed_form(data: &[[f64; 2]], params: &BivNuBsParams) -> f64 {
    if !valid_pairs(data) {
        return f64::NEG_INFINITY;
    }
    let [a1, b1, v1, a2, b2, v2, rho] = params.to_array();
    let n = data.len() as f64;
    let xi = |t: f64, b: f64, v: f64| (t / b).powf(v) - (b / t).powf(v);
    let bracket = |t: f64, b: f64, v: f64| ((t / b).powf(v - 1.0) + (b / t).powf(v + 1.0)).ln();
    let (mut s11, mut s22, mut s12, mut jac) = (0.0, 0.0, 0.0, 0.0);
    for &[t1, t2] in data {
        let (x1, x2) = (xi(t1, b1, v1), xi(t2, b2, v2));
        s11 += x1 * x1;
        s22 += x2 * x2;
        s12 += x1 * x2;
        jac += bracket(t1, b1, v1) + bracket(t2, b2, v2);
    }
    n * v1.ln() + n * v2.ln() - n * a1.ln() - n * a2.ln() - n * b1.ln() - n * b2.ln()
        - n * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * n * (1.0 - rho * rho).ln()
        + jac
        - (s11 / (a1 * a1) + s22 / (a2 * a2) - 2.0 * rho * s12 / (a1 * a2)) / (2.0 * (1.0 - rho * rho))
}

struct BivProfile {
    ln_t1: Vec<f64>,
    ln_t2: Vec<f64>,
    sum_ln_t: f64,
}

struct BivProfileValue {
    ll: f64,
    alpha1: f64,
    alpha2: f64,
    rho: f64,
}

impl BivProfile {
    fn new(data: &[[f64; 2]]) -> Self {
        let ln_t1: Vec<f64> = data.iter().map(|p| p[0].ln()).collect();
        let ln_t2: Vec<f64> = data.iter().map(|p| p[1].ln()).collect();
        let sum_ln_t = ln_t1.iter().sum::<f64>() + ln_t2.iter().sum::<f64>();
        Self {
            ln_t1,
            ln_t2,
            sum_ln_t,
        }
    }

    // y = (ln β₁, ln ν₁, ln β₂, ln ν₂)
    fn eval(&self, y: &[f64]) -> BivProfileValue {
        let bad = BivProfileValue {
            ll: f64::NEG_INFINITY,
            alpha1: f64::NAN,
            alpha2: f64::NAN,
            rho: f64::NAN,
        };
        let (lb1, v1, lb2, v2) = (y[0], y[1].exp(), y[2], y[3].exp());
        let in_range = |v: f64| (NU_MIN..=NU_MAX).contains(&v);
        if !(in_range(v1) && in_range(v2) && lb1.is_finite() && lb2.is_finite()) {
            return bad;
        }
        let (mut s11, mut s22, mut s12, mut g) = (0.0, 0.0, 0.0, 0.0);
        for (&l1, &l2) in self.ln_t1.iter().zip(&self.ln_t2) {
            let x1 = v1 * (l1 - lb1);
            let x2 = v2 * (l2 - lb2);
            let (e1, e2) = (2.0 * x1.sinh(), 2.0 * x2.sinh());
            s11 += e1 * e1;
            s22 += e2 * e2;
            s12 += e1 * e2;
            g += ln_2cosh(x1) + ln_2cosh(x2);
        }
        let n = self.ln_t1.len() as f64;
        let (alpha1, alpha2) = ((s11 / n).sqrt(), (s22 / n).sqrt());
        let rho = s12 / (s11 * s22).sqrt();
        if !(alpha1 > 0.0 && alpha2 > 0.0 && alpha1.is_finite() && alpha2.is_finite() && rho.abs() < 1.0 - 1e-12) {
            return bad;
        }
        let ll = n * (v1.ln() + v2.ln() - alpha1.ln() - alpha2.ln())
            - 0.5 * n * (1.0 - rho * rho).ln()
            - 2.0 * n * LN_SQRT_2PI
            - n
            + g
            - self.sum_ln_t;
        BivProfileValue {
            ll,
            alpha1,
            alpha2,
            rho,
        }
    }
}

fn biv_scaled_gradient(data: &[[f64; 2]], p: &BivNuBsParams) -> Vec<f64> {
    let n = data.len() as f64;
    let theta = p.to_array();
    // coordinates: logs of the six positive parameters, atanh ρ
    let mut u: Vec<f64> = theta[..6].iter().map(|v| v.ln()).collect();
    u.push(theta[6].atanh());
    let f = |u: &[f64]| {
        let mut th: Vec<f64> = u[..6].iter().map(|v| v.exp()).collect();
        th.push(u[6].tanh());
        match BivNuBsParams::from_slice(&th) {
            Ok(q) => biv_log_likelihood(data, &q),
            Err(_) => f64::NAN,
        }
    };
    fd_gradient(&f, &u, 1e-6).into_iter().map(|g| g / n).collect()
}

fn column(data: &[[f64; 2]], j: usize) -> Vec<f64> {
    data.iter().map(|p| p[j]).collect()
}

/// Seven-parameter fit of (α₁, β₁, ν₁, α₂, β₂, ν₂, ρ).
pub fn fit_bivariate(data: &[[f64; 2]], config: &OptimizerConfig) -> Result<FitResult> {
    config.validate()?;
    if data.len() < MIN_BIV_OBS {
        return Err(Error::InsufficientData {
            needed: MIN_BIV_OBS,
            got: data.len(),
        });
    }
    let (c1, c2) = (column(data, 0), column(data, 1));
    check_data(&c1, MIN_BIV_OBS)?;
    check_data(&c2, MIN_BIV_OBS)?;

    let mut diagnostics = Vec::new();
    let start_params: BivNuBsParams = match &config.init_strategy {
        InitStrategy::UserSupplied(v) => {
            if v.len() != 7 {
                return Err(Error::DimensionMismatch {
                    expected: 7,
                    got: v.len(),
                });
            }
            BivNuBsParams::from_slice(v)?
        }
        _ => {
            let f1 = fit_univariate(&c1, config)?;
            let f2 = fit_univariate(&c2, config)?;
            for (i, f) in [&f1, &f2].iter().enumerate() {
                if !f.converged {
                    diagnostics.push(format!("margin {} start fit did not converge", i + 1));
                }
            }
            let p1 = *f1.params.univariate().expect("univariate");
            let p2 = *f2.params.univariate().expect("univariate");
            let rho0 = latent_correlation(data, &p1, &p2).clamp(-0.99, 0.99);
            BivNuBsParams::new(p1, p2, rho0)?
        }
    };
    let [_, b1, v1, _, b2, v2, _] = start_params.to_array();
    let starts = vec![vec![b1.ln(), v1.ln(), b2.ln(), v2.ln()]];
    let prof = BivProfile::new(data);
    let objective = |y: &[f64]| prof.eval(y).ll;
    let gradient = |y: &[f64]| fd_gradient(&objective, y, 1e-6);
    let (best, _) = maximise(&objective, &gradient, &starts, &[0.2, 0.5, 0.2, 0.5], config);

    let pv = prof.eval(&best.y);
    let params = BivNuBsParams::new(
        NuBsParams::new(pv.alpha1, best.y[0].exp(), best.y[1].exp())?,
        NuBsParams::new(pv.alpha2, best.y[2].exp(), best.y[3].exp())?,
        pv.rho,
    )?;
    let n = data.len();
    let ll = biv_log_likelihood(data, &params);
    let start_log_likelihoods = vec![biv_log_likelihood(data, &start_params)];
    let score_residuals = biv_scaled_gradient(data, &params);
    let converged = best.nm_converged && residuals_ok(&score_residuals, BIV_GRADIENT_TOL);
    if !best.nm_converged {
        diagnostics.push("Nelder-Mead stopped at the iteration limit".into());
    }
    if !residuals_ok(&score_residuals, BIV_GRADIENT_TOL) {
        diagnostics.push(format!("gradient residuals exceed {BIV_GRADIENT_TOL:e}"));
    }
    if pv.rho.abs() > 0.999 {
        diagnostics.push(format!("latent correlation {:.6} is near the boundary", pv.rho));
    }
    let (aic, bic) = information_criteria(ll, 7, n);
    let mut fit = FitResult {
        params: FittedParams::Bivariate(params),
        fixed_nu: None,
        log_likelihood: ll,
        converged,
        n_iterations: best.iterations,
        score_residuals,
        std_errors: None,
        aic,
        bic,
        n_obs: n,
        k: 7,
        start_log_likelihoods,
        diagnostics,
    };
    if converged {
        match biv_std_errors(&fit, data) {
            Ok(se) => fit.std_errors = Some(se),
            Err(e) => fit.diagnostics.push(format!("standard errors unavailable: {e}")),
        }
    }
    Ok(fit)
}

/// Pearson correlation of the latent normal scores of the two margins.
pub fn latent_correlation(data: &[[f64; 2]], p1: &NuBsParams, p2: &NuBsParams) -> f64 {
    let n = data.len() as f64;
    let z: Vec<(f64, f64)> = data.iter().map(|&[a, b]| (p1.z_score(a), p2.z_score(b))).collect();
    let m1 = z.iter().map(|p| p.0).sum::<f64>() / n;
    let m2 = z.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &z {
        sxy += (a - m1) * (b - m2);
        sxx += (a - m1) * (a - m1);
        syy += (b - m2) * (b - m2);
    }
    sxy / (sxx * syy).sqrt()
}
