mod common;

use common::{biv_mass, grid, integrate, log_range, normal_cdf};
use nubs::gof::{kolmogorov_pvalue, ks_statistic};
use nubs::multivariate::{biv_marginal_pdf, biv_pdf, biv_sample, BivNuBsParams, Margin};
use nubs::normal::biv_normal_cdf;
use nubs::univariate::{cdf, pdf, raw_moment, reciprocal_params, sample};
use nubs::NuBsParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn total_mass(p: &NuBsParams) -> f64 {
    let (lo, hi) = log_range(p.alpha(), p.beta(), p.nu(), 9.0);
    integrate(&|u: f64| pdf(u.exp(), p).unwrap() * u.exp(), lo, hi, 1e-12)
}

#[test]
fn univariate_density_integrates_to_one() {
    for p in grid() {
        let m = total_mass(&p);
        assert!((m - 1.0).abs() < 1e-8, "{p:?}: {m}");
    }
}

#[test]
fn cdf_is_integral_of_pdf() {
    for p in grid() {
        let (lo, _) = log_range(p.alpha(), p.beta(), p.nu(), 9.0);
        for q in [0.01, 0.3, 0.5, 0.9] {
            let t = nubs::univariate::quantile(q, &p).unwrap();
            let m = integrate(&|u: f64| pdf(u.exp(), &p).unwrap() * u.exp(), lo, t.ln(), 1e-13);
            assert!((m - cdf(t, &p).unwrap()).abs() < 1e-9, "{p:?} q={q}");
        }
    }
}

#[test]
fn bivariate_density_integrates_to_one() {
    for rho in [-0.5, 0.0, 0.5] {
        for n1 in [0.5, 1.0] {
            for n2 in [0.5, 1.0] {
                let p = BivNuBsParams::new(
                    NuBsParams::new(0.5, 1.0, n1).unwrap(),
                    NuBsParams::new(0.8, 2.0, n2).unwrap(),
                    rho,
                )
                .unwrap();
                let m = biv_mass(&p);
                assert!((m - 1.0).abs() < 1e-6, "{p:?}: {m}");
            }
        }
    }
}

#[test]
fn bivariate_marginals_match_univariate() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..25 {
        let p = BivNuBsParams::new(
            NuBsParams::new(rng.random_range(0.2..1.5), rng.random_range(0.5..3.0), rng.random_range(0.3..1.5))
                .unwrap(),
            NuBsParams::new(rng.random_range(0.2..1.5), rng.random_range(0.5..3.0), rng.random_range(0.3..1.5))
                .unwrap(),
            rng.random_range(-0.9..0.9),
        )
        .unwrap();
        let t1 = nubs::univariate::quantile(rng.random_range(0.05..0.95), p.p1()).unwrap();
        let (l2, h2) = log_range(p.p2().alpha(), p.p2().beta(), p.p2().nu(), 9.0);
        let m = integrate(&|v: f64| biv_pdf(t1, v.exp(), &p).unwrap() * v.exp(), l2, h2, 1e-13);
        let want = biv_marginal_pdf(Margin::First, t1, &p).unwrap();
        assert!((m - want).abs() <= 1e-6 * want, "{m} vs {want}");
        assert_eq!(want, pdf(t1, p.p1()).unwrap());
    }
}

#[test]
fn bivariate_normal_cdf_matches_conditional_quadrature() {
    // Φ₂(u, v; ρ) = ∫_{−∞}^{u} φ(x) Φ((v − ρx)/√(1−ρ²)) dx
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    for &rho in &[-0.95f64, -0.6, -0.1, 0.0, 0.3, 0.8, 0.99] {
        for &(u, v) in &[(-2.0, 1.0), (0.0, 0.0), (0.5, -0.7), (1.7, 2.2), (-3.5, -3.0)] {
            let s = (1.0 - rho * rho).sqrt();
            let f = |x: f64| phi(x) * normal_cdf((v - rho * x) / s);
            let want = integrate(&f, -12.0, u, 1e-14);
            let got = biv_normal_cdf(u, v, rho).unwrap();
            assert!((got - want).abs() < 1e-10, "ρ={rho} ({u},{v}): {got} vs {want}");
        }
    }
}

#[test]
fn samples_follow_the_cdf() {
    for (i, p) in grid().into_iter().enumerate() {
        let x = sample(&p, 20_000, i as u64);
        let d = ks_statistic(&x, |t| cdf(t, &p).unwrap()).unwrap();
        let pv = kolmogorov_pvalue((x.len() as f64).sqrt() * d);
        assert!(pv > 1e-3, "{p:?}: p = {pv}");
    }
}

#[test]
fn bivariate_sample_margins_follow_their_cdfs() {
    let p = BivNuBsParams::from_slice(&[0.5, 1.0, 0.5, 0.8, 2.0, 0.7, -0.6]).unwrap();
    let x = biv_sample(&p, 20_000, 3);
    for (j, m) in [p.p1(), p.p2()].into_iter().enumerate() {
        let col: Vec<f64> = x.iter().map(|r| r[j]).collect();
        let d = ks_statistic(&col, |t| cdf(t, m).unwrap()).unwrap();
        assert!(kolmogorov_pvalue((col.len() as f64).sqrt() * d) > 1e-3);
    }
}

#[test]
fn reciprocal_samples_follow_reciprocal_params() {
    let p = NuBsParams::new(0.7, 2.5, 0.8).unwrap();
    let q = reciprocal_params(&p);
    let passes = (0..20)
        .filter(|&s| {
            let inv: Vec<f64> = sample(&p, 20_000, 100 + s).iter().map(|t| 1.0 / t).collect();
            let d = ks_statistic(&inv, |t| cdf(t, &q).unwrap()).unwrap();
            kolmogorov_pvalue((inv.len() as f64).sqrt() * d) > 0.01
        })
        .count();
    assert!(passes >= 19, "{passes}/20");
}

#[test]
fn reciprocal_density_identity() {
    // f_{1/T}(s) = f_T(1/s)/s²
    for p in grid() {
        let q = reciprocal_params(&p);
        for s in [0.05, 0.4, 1.0, 2.2, 9.0] {
            let lhs = pdf(s, &q).unwrap();
            let rhs = pdf(1.0 / s, &p).unwrap() / (s * s);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300), "{p:?} s={s}");
        }
    }
}

#[test]
fn raw_moments_match_quadrature() {
    for p in grid().into_iter().filter(|p| p.alpha() <= 1.0 && p.nu() >= 0.5) {
        let (lo, hi) = log_range(p.alpha(), p.beta(), p.nu(), 12.0);
        for k in 1..=3u32 {
            let want = integrate(
                &|u: f64| pdf(u.exp(), &p).unwrap() * (u * (k as f64 + 1.0)).exp(),
                lo,
                hi,
                1e-13,
            );
            let got = raw_moment(k, &p, 64).unwrap();
            assert!((got - want).abs() <= 1e-8 * want, "{p:?} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn classic_mean_and_variance() {
    // E[T] = β(1 + α²/2), Var[T] = (αβ)²(1 + 5α²/4)
    let (a, b) = (0.8, 3.0);
    let p = NuBsParams::classic(a, b).unwrap();
    let m1 = raw_moment(1, &p, 64).unwrap();
    let m2 = raw_moment(2, &p, 64).unwrap();
    assert!((m1 - b * (1.0 + a * a / 2.0)).abs() < 1e-12 * m1);
    let var = (a * b).powi(2) * (1.0 + 1.25 * a * a);
    assert!((m2 - m1 * m1 - var).abs() < 1e-10 * var);
}
