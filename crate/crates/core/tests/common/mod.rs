//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

/// Adaptive Gauss–Kronrod (7, 15) integration of `f` over `[a, b]` to
/// absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
        const XK: [f64; 8] = [
            0.991455371120812639206854697526329,
            0.949107912342758524526189684047851,
            0.864864423359769072789712788640926,
            0.741531185599394439863864773280788,
            0.586087235467691130294144845693013,
            0.405845151377397166906606412076961,
            0.207784955007898467600689403773245,
            0.000000000000000000000000000000000,
        ];
        const WK: [f64; 8] = [
            0.022935322010529224963732008058970,
            0.063092092629978553290700663189204,
            0.104790010322250183839876322541518,
            0.140653259715525918745189590510238,
            0.169004726639267902826583426598550,
            0.190350578064785409913256402421014,
            0.204432940075298892414161999234649,
            0.209482141084727828012999174891714,
        ];
        const WG: [f64; 4] = [
            0.129484966168869693270611432679082,
            0.279705391489276667901467771423780,
            0.381830050505118944950369775488975,
            0.417959183673469387755102040816327,
        ];
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let fc = f(c);
        let mut k = WK[7] * fc;
        let mut g = WG[3] * fc;
        for i in 0..7 {
            let x = h * XK[i];
            let s = f(c - x) + f(c + x);
            k += WK[i] * s;
            if i % 2 == 1 {
                g += WG[i / 2] * s;
            }
        }
        (k * h, (k - g).abs() * h)
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, tol, 40)
}

/// Log-lifetime range `[ln β + asinh(−αz/2)/ν, ln β + asinh(αz/2)/ν]`
/// holding all but ~2·Φ(−z) of the mass.
pub fn log_range(alpha: f64, beta: f64, nu: f64, z: f64) -> (f64, f64) {
    let w = (0.5 * alpha * z).asinh() / nu;
    (beta.ln() - w, beta.ln() + w)
}

/// Φ by direct quadrature of the normal density.
pub fn normal_cdf(z: f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if z < 0.0 {
        integrate(&phi, (-40.0_f64).min(z - 1.0), z, 1e-17)
    } else {
        0.5 + integrate(&phi, 0.0, z, 1e-17)
    }
}

/// Classic Birnbaum–Saunders MLE: β̂ solves
/// `β² − β(2r + K(β)) + r(s + K(β)) = 0` with s the arithmetic mean, r the
/// harmonic mean and `K(x) = [(1/n) Σ 1/(x + tᵢ)]⁻¹`; then
/// `α̂ = √(s/β̂ + β̂/r − 2)`. The root lies between r and s.
pub fn classic_mle(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let s = data.iter().sum::<f64>() / n;
    let r = n / data.iter().map(|t| 1.0 / t).sum::<f64>();
    let k = |x: f64| n / data.iter().map(|t| 1.0 / (x + t)).sum::<f64>();
    let g = |b: f64| b * b - b * (2.0 * r + k(b)) + r * (s + k(b));
    let (mut lo, mut hi) = (r, s);
    assert!(g(lo) * g(hi) <= 0.0, "root not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(lo) * g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    ((s / beta + beta / r - 2.0).sqrt(), beta)
}

/// Asymptotic KS p-value Q(λ) by the plain alternating series; accurate
/// for λ ≥ 0.5.
pub fn kolmogorov_q(l: f64) -> f64 {
    let mut s = 0.0;
    for k in 1..=10_000 {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * (-2.0 * k * k * l * l).exp();
    }
    (2.0 * s).clamp(0.0, 1.0)
}

pub fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn nubs_in(args: &[&str], dir: &std::path::Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nubs"))
        .args(args)
        .current_dir(dir)
        .env_remove("NUBS_SEED")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// (file, argv) pairs whose reports are frozen under tests/golden. They run
/// with tests/golden as the working directory.
pub fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let cases: Vec<(&str, Vec<&str>)> = vec![
        ("eval_cdf.json", vec!["eval", "--alpha", "1", "--beta", "1", "--nu", "0.5", "--at", "2", "--cdf", "--json"]),
        ("fit_table1_classic.json", vec!["fit", "--table1", "--fix-nu", "0.5", "--seed", "1"]),
        ("fit_table1.json", vec!["fit", "--table1"]),
        ("gof_table1.json", vec!["gof", "--table1", "--fit", "--boot", "199", "--seed", "42"]),
        ("compare_table1.json", vec!["compare", "--table1"]),
        ("moments.json", vec!["moments", "--alpha", "0.5", "--beta", "2", "--nu", "0.75", "-k", "2", "--json"]),
        ("fit2.json", vec!["fit2", "--data", "pairs.txt"]),
    ];
    cases
        .into_iter()
        .map(|(f, a)| {
            let mut v: Vec<String> = a.into_iter().map(String::from).collect();
            v.push("--no-timing".into());
            (f, v)
        })
        .collect()
}

pub fn run_golden(args: &[String]) -> String {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let (code, out, err) = nubs_in(&refs, &golden_dir());
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

/// Twelve (α, β, ν) sets spanning small to large shape.
pub fn grid() -> Vec<nubs::NuBsParams> {
    let mut v = Vec::new();
    for (i, &a) in [0.1, 0.5, 1.0, 2.0].iter().enumerate() {
        for (j, &n) in [0.25, 0.5, 1.5].iter().enumerate() {
            let b = [0.5, 1.0, 3.0][(i + j) % 3];
            v.push(nubs::NuBsParams::new(a, b, n).unwrap());
        }
    }
    v
}

pub fn biv_mass(p: &nubs::multivariate::BivNuBsParams) -> f64 {
    let (l1, h1) = log_range(p.p1().alpha(), p.p1().beta(), p.p1().nu(), 8.5);
    let (l2, h2) = log_range(p.p2().alpha(), p.p2().beta(), p.p2().nu(), 8.5);
    let inner = |u: f64| {
        integrate(
            &|v: f64| nubs::multivariate::biv_pdf(u.exp(), v.exp(), p).unwrap() * (u + v).exp(),
            l2,
            h2,
            1e-10,
        )
    };
    integrate(&inner, l1, h1, 1e-9)
}
