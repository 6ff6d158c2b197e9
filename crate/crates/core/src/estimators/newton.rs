//! Damped Newton ascent for small smooth objectives.
//!
//! The Hessian is assembled by central differences of the analytic gradient.
//! When the negated Hessian is not positive definite a multiple of the
//! identity is added until a Cholesky factorization succeeds.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub(crate) struct Ascent<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad_norm: T,
    pub iters: usize,
    pub converged: bool,
}

pub(crate) fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Lower-triangular Cholesky factor of a symmetric matrix, row-major `n x n`.
fn cholesky<T: Real>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > T::zero()) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &[T]) -> Vec<T> {
    let mut z = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s = s - l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Symmetrized central-difference Hessian of `grad` at `x`.
pub(crate) fn fd_hessian<T, G>(grad: &G, x: &[T]) -> Vec<T>
where
    T: Real,
    G: Fn(&[T]) -> Vec<T>,
{
    let n = x.len();
    let mut h = vec![T::zero(); n * n];
    let mut probe = x.to_vec();
    for j in 0..n {
        let step = T::fd_step() * T::one().max(x[j].abs());
        probe[j] = x[j] + step;
        let up = grad(&probe);
        probe[j] = x[j] - step;
        let down = grad(&probe);
        probe[j] = x[j];
        for i in 0..n {
            h[i * n + j] = (up[i] - down[i]) / (T::two() * step);
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = (h[i * n + j] + h[j * n + i]) * T::half();
            h[i * n + j] = avg;
            h[j * n + i] = avg;
        }
    }
    h
}

/// Maximizes `value` from `x0` until `|grad| < tol` or `max_iter` steps.
pub(crate) fn maximize<T, F, G>(
    value: &F,
    grad: &G,
    x0: Vec<T>,
    tol: T,
    max_iter: usize,
) -> Ascent<T>
where
    T: Real,
    F: Fn(&[T]) -> T,
    G: Fn(&[T]) -> Vec<T>,
{
    let n = x0.len();
    let mut x = x0;
    let mut f = value(&x);
    let mut g = grad(&x);
    let mut gn = norm(&g);
    let armijo = T::lit(1e-4);
    let mut iters = 0;

    while iters < max_iter && !(gn < tol) {
        iters += 1;
        let mut a: Vec<T> = fd_hessian(grad, &x).into_iter().map(|v| -v).collect();
        let scale = (0..n).fold(T::one(), |acc, i| acc.max(a[i * n + i].abs()));
        let mut shift = T::zero();
        let factor = loop {
            if let Some(l) = cholesky(&a, n) {
                break Some(l);
            }
            let next = if shift == T::zero() {
                T::lit(1e-8) * scale
            } else {
                shift * T::lit(10.0)
            };
            if !next.is_finite() || next > T::lit(1e12) * scale {
                break None;
            }
            for i in 0..n {
                a[i * n + i] = a[i * n + i] + (next - shift);
            }
            shift = next;
        };
        let dir = match factor {
            Some(l) => cholesky_solve(&l, n, &g),
            None => g.clone(),
        };
        let slope = dot(&g, &dir);

        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<T> = x
                .iter()
                .zip(&dir)
                .map(|(&xi, &di)| xi + step * di)
                .collect();
            let fc = value(&cand);
            if fc.is_finite() {
                if fc >= f + armijo * step * slope {
                    accepted = Some((cand, fc));
                    break;
                }
                // Near the optimum the objective change drops below rounding;
                // accept a step that still shrinks the gradient.
                let slack = T::epsilon() * T::lit(64.0) * (T::one() + f.abs());
                if fc >= f - slack {
                    let gc = grad(&cand);
                    if norm(&gc) < gn * T::half() {
                        accepted = Some((cand, fc));
                        break;
                    }
                }
            }
            step = step * T::half();
        }
        match accepted {
            Some((cand, fc)) => {
                x = cand;
                f = fc;
                g = grad(&x);
                gn = norm(&g);
            }
            None => break,
        }
    }

    Ascent {
        converged: gn < tol,
        x,
        value: f,
        grad_norm: gn,
        iters,
    }
}
