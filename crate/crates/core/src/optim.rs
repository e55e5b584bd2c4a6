//! Derivative-free Nelder–Mead minimisation plus a safeguarded Newton
//! polish used to finish profile-likelihood maximisation.

use crate::normal::CholeskyFactor;

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `f` from `x0` with initial simplex offsets `step`.
///
/// Stops when the spread of simplex values falls below
/// `rel_tol·(|f_best| + 1e-300)` and the simplex has shrunk to
/// `sqrt(rel_tol)` in every coordinate, or after `max_iter` iterations.
/// Non-finite values are treated as +∞.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], rel_tol: f64, max_iter: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
    let x_tol = rel_tol.sqrt();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[n];
        let spread = (worst - best).abs();
        let diameter = (1..=n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (simplex[i][j] - simplex[0][j]).abs())
            .fold(0.0, f64::max);
        if best.is_finite() && spread <= rel_tol * (best.abs() + 1e-300) && diameter <= x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(-0.5);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=n {
            for j in 0..n {
                simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
            }
            values[i] = eval(&simplex[i]);
        }
    }
    let (bi, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("simplex is nonempty");
    Minimum {
        x: simplex[bi].clone(),
        value: values[bi],
        iterations,
        converged,
    }
}

/// Central-difference gradient with absolute step `h`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Newton iterations for a maximum, given value and gradient closures.
/// The Hessian is the symmetrised central difference of the gradient.
/// A step is taken only when the negated Hessian factors, and it is halved
/// until the value does not decrease. Returns the number of accepted steps.
pub fn newton_polish<F, G>(value: F, grad: G, x: &mut Vec<f64>, fx: &mut f64, max_steps: usize) -> usize
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let h = 1e-5;
    let mut taken = 0;
    for _ in 0..max_steps {
        let g = grad(x);
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        let mut neg_hess = vec![0.0; n * n];
        let mut xp = x.clone();
        for j in 0..n {
            xp[j] = x[j] + h;
            let gp = grad(&xp);
            xp[j] = x[j] - h;
            let gm = grad(&xp);
            xp[j] = x[j];
            for i in 0..n {
                neg_hess[i * n + j] = -(gp[i] - gm[i]) / (2.0 * h);
            }
        }
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (neg_hess[i * n + j] + neg_hess[j * n + i]);
                neg_hess[i * n + j] = s;
                neg_hess[j * n + i] = s;
            }
        }
        let Ok(chol) = CholeskyFactor::factor(n, &neg_hess) else {
            break;
        };
        // solve (−H) d = g
        let y = chol.solve_lower(&g);
        let mut d = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= chol.get(k, i) * d[k];
            }
            d[i] = s / chol.get(i, i);
        }
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + scale * b).collect();
            let ft = value(&trial);
            if ft.is_finite() && ft >= *fx {
                let gain = ft - *fx;
                *x = trial;
                *fx = ft;
                accepted = true;
                taken += 1;
                if gain <= 1e-15 * fx.abs() {
                    return taken;
                }
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    taken
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], &[0.5, 0.5], 1e-14, 10_000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn nelder_mead_never_returns_worse_than_start() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).abs();
        let start = [0.5, 0.5];
        let m = nelder_mead(f, &start, &[0.1, 0.1], 1e-12, 5);
        assert!(m.value <= f(&start));
    }

    #[test]
    fn nelder_mead_treats_nan_as_infeasible() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.2).powi(2) };
        let m = nelder_mead(f, &[1.0], &[0.5], 1e-12, 1000);
        assert!((m.x[0] - 0.2).abs() < 1e-5);
    }

    #[test]
    fn newton_polish_reaches_quadratic_optimum() {
        let value = |x: &[f64]| -((x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + x[0] * x[1]);
        let grad = |x: &[f64]| vec![-(2.0 * (x[0] - 1.0) + x[1]), -(4.0 * (x[1] + 0.5) + x[0])];
        let mut x = vec![0.0, 0.0];
        let mut fx = value(&x);
        let steps = newton_polish(value, grad, &mut x, &mut fx, 10);
        assert!(steps >= 1);
        let g = grad(&x);
        assert!(g.iter().all(|v| v.abs() < 1e-9), "{g:?}");
    }
}
