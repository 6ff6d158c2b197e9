//! Estimation strategies for the logistic CATE model.
//!
//! Every strategy maximizes the exact expected log-likelihood of an
//! observational (or randomized) joint table. Offset models hold `beta_t`
//! fixed; the constrained model instead ties the implied marginal odds-ratio
//! to a trial-reported value through an augmented Lagrangian.

mod newton;

use std::fmt;
use std::str::FromStr;

use crate::causal::{implied_arms, implied_marginal_log_or, population_arms, true_marginal_log_or};
use crate::dgm::{build_joint, x_marginal, JointTable, ScmSpec, BIN};
use crate::error::{Error, Result};
use crate::likelihood::{expected_loglik, grad_expected_loglik, ModelParams};
use crate::scalar::Real;

use newton::{dot, maximize, norm};

/// Solver settings. Defaults: gradient 1e-9, constraint 1e-8, 200 inner and
/// 50 outer iterations, `mu` starting at 10 and growing tenfold whenever the
/// residual fails to shrink fourfold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    pub grad_tol: T,
    pub constraint_tol: T,
    /// Projected-gradient tolerance for constrained fits.
    pub projected_grad_tol: T,
    pub max_inner: usize,
    pub max_outer: usize,
    pub mu0: T,
    pub mu_growth: T,
    pub required_shrink: T,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            grad_tol: T::grad_tolerance(),
            constraint_tol: T::constraint_tolerance(),
            projected_grad_tol: T::constraint_tolerance(),
            max_inner: 200,
            max_outer: 50,
            mu0: T::lit(10.0),
            mu_growth: T::lit(10.0),
            required_shrink: T::lit(4.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<T> {
    pub params: ModelParams<T>,
    pub loglik: T,
    /// Free-coefficient gradient norm; projected onto the constraint's
    /// tangent space for constrained fits.
    pub grad_norm: T,
    /// Implied minus target marginal log odds-ratio; zero when unconstrained.
    pub constraint_residual: T,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodId {
    AteBaseline,
    RctReference,
    FullObservational,
    ConditionalOffset,
    MarginalOffset,
    ConstrainedOffset,
}

impl MethodId {
    pub const ALL: [MethodId; 6] = [
        MethodId::AteBaseline,
        MethodId::RctReference,
        MethodId::FullObservational,
        MethodId::ConditionalOffset,
        MethodId::MarginalOffset,
        MethodId::ConstrainedOffset,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::AteBaseline => "ate_baseline",
            MethodId::RctReference => "rct_reference",
            MethodId::FullObservational => "full_observational",
            MethodId::ConditionalOffset => "conditional_offset",
            MethodId::MarginalOffset => "marginal_offset",
            MethodId::ConstrainedOffset => "constrained_offset",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MethodId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Sweep(format!("unknown method `{s}`")))
    }
}

/// Maximum-likelihood fit over the free coefficients of `init`.
pub fn fit_mle<T: Real>(table: &JointTable<T>, init: ModelParams<T>) -> Result<FitResult<T>> {
    fit_mle_with(table, init, &FitOptions::default())
}

pub fn fit_mle_with<T: Real>(
    table: &JointTable<T>,
    init: ModelParams<T>,
    opts: &FitOptions<T>,
) -> Result<FitResult<T>> {
    init.validate()?;
    let value = |x: &[T]| expected_loglik(&init.with_free_values(x), table);
    let grad = |x: &[T]| grad_expected_loglik(&init.with_free_values(x), table);
    let out = maximize(
        &value,
        &grad,
        init.free_values(),
        opts.grad_tol,
        opts.max_inner,
    );
    Ok(FitResult {
        params: init.with_free_values(&out.x),
        loglik: out.value,
        grad_norm: out.grad_norm,
        constraint_residual: T::zero(),
        outer_iters: 0,
        inner_iters: out.iters,
        converged: out.converged,
    })
}

/// Gradient of the implied marginal log odds-ratio over all three coefficients.
pub fn implied_log_or_gradient<T: Real>(params: &ModelParams<T>, x_weights: [T; 2]) -> [T; 3] {
    let arms = implied_arms(params, x_weights);
    let mut g = [T::zero(); 3];
    for t in BIN {
        let a = arms[t as usize];
        let sign = if t == 1 { T::one() } else { -T::one() };
        let outer = sign / (a * (T::one() - a));
        for x in BIN {
            let p = crate::numeric::sigmoid(params.eta(t, x));
            let d = outer * x_weights[x as usize] * p * (T::one() - p);
            g[0] = g[0] + d;
            if t == 1 {
                g[1] = g[1] + d;
            }
            if x == 1 {
                g[2] = g[2] + d;
            }
        }
    }
    g
}

fn project_out<T: Real>(g: &[T], normal: &[T]) -> Vec<T> {
    let nn = dot(normal, normal);
    if !(nn > T::zero()) {
        return g.to_vec();
    }
    let k = dot(g, normal) / nn;
    g.iter().zip(normal).map(|(&gi, &ni)| gi - k * ni).collect()
}

/// Maximum likelihood subject to `implied_marginal_log_or(params, x_weights) = gamma_star`.
pub fn fit_constrained<T: Real>(
    table: &JointTable<T>,
    gamma_star: T,
    x_weights: [T; 2],
    init: ModelParams<T>,
) -> Result<FitResult<T>> {
    fit_constrained_with(table, gamma_star, x_weights, init, &FitOptions::default())
}

pub fn fit_constrained_with<T: Real>(
    table: &JointTable<T>,
    gamma_star: T,
    x_weights: [T; 2],
    init: ModelParams<T>,
    opts: &FitOptions<T>,
) -> Result<FitResult<T>> {
    init.validate()?;
    if !gamma_star.is_finite() {
        return Err(Error::NonFinite {
            name: "gamma_star",
            value: gamma_star.as_f64(),
        });
    }
    // Validates the weights once; later evaluations may leave logit's domain
    // during line search and are then treated as infeasible.
    implied_marginal_log_or(&init, x_weights)?;

    let free = init.free_coefs();
    let params_at = |x: &[T]| init.with_free_values(x);
    let residual = |x: &[T]| match implied_marginal_log_or(&params_at(x), x_weights) {
        Ok(g) => g - gamma_star,
        Err(_) => T::nan(),
    };
    let residual_grad = |x: &[T]| {
        let g = implied_log_or_gradient(&params_at(x), x_weights);
        free.iter().map(|c| g[*c as usize]).collect::<Vec<T>>()
    };

    let mut x = init.free_values();
    let mut lambda = T::zero();
    let mut mu = opts.mu0;
    let mut prev = residual(&x).abs();
    let mut inner_total = 0;
    let mut outer = 0;
    let mut converged = false;
    let mut c = residual(&x);
    let mut pg = T::infinity();

    while outer < opts.max_outer {
        outer += 1;
        let (lam, m) = (lambda, mu);
        let value = |z: &[T]| {
            let c = residual(z);
            expected_loglik(&params_at(z), table) - lam * c - m * T::half() * c * c
        };
        let grad = |z: &[T]| {
            let c = residual(z);
            let gl = grad_expected_loglik(&params_at(z), table);
            let gc = residual_grad(z);
            let w = lam + m * c;
            gl.iter()
                .zip(&gc)
                .map(|(&a, &b)| a - w * b)
                .collect::<Vec<T>>()
        };
        let inner = maximize(&value, &grad, x.clone(), opts.grad_tol, opts.max_inner);
        inner_total += inner.iters;
        x = inner.x;
        c = residual(&x);
        if !c.is_finite() {
            break;
        }
        lambda = lambda + mu * c;
        let gl = grad_expected_loglik(&params_at(&x), table);
        pg = norm(&project_out(&gl, &residual_grad(&x)));
        if c.abs() < opts.constraint_tol && pg < opts.projected_grad_tol && inner.converged {
            converged = true;
            break;
        }
        if c.abs() > prev / opts.required_shrink {
            mu = mu * opts.mu_growth;
        }
        prev = c.abs();
    }

    let params = params_at(&x);
    Ok(FitResult {
        params,
        loglik: expected_loglik(&params, table),
        grad_norm: pg,
        constraint_residual: c,
        outer_iters: outer,
        inner_iters: inner_total,
        converged,
    })
}

/// Logistic regression on the randomized version of `spec`, all coefficients free.
pub fn fit_rct_reference<T: Real>(spec: &ScmSpec<T>) -> Result<FitResult<T>> {
    let table = build_joint(&spec.randomized())?;
    fit_mle(&table, ModelParams::zeros())
}

/// Logistic regression on the observational table, all coefficients free.
pub fn fit_full_observational<T: Real>(spec: &ScmSpec<T>) -> Result<FitResult<T>> {
    fit_mle(&build_joint(spec)?, ModelParams::zeros())
}

/// Offset model with `beta_t` taken from the randomized reference fit.
pub fn fit_conditional_offset<T: Real>(spec: &ScmSpec<T>) -> Result<FitResult<T>> {
    let beta_t = fit_rct_reference(spec)?.params.beta_t;
    fit_mle(&build_joint(spec)?, ModelParams::offset(beta_t))
}

/// Offset model with the trial's marginal log odds-ratio plugged in for `beta_t`.
pub fn fit_marginal_offset<T: Real>(spec: &ScmSpec<T>) -> Result<FitResult<T>> {
    let gamma = true_marginal_log_or(spec)?;
    fit_mle(&build_joint(spec)?, ModelParams::offset(gamma))
}

/// Constrained offset model started from the full observational fit.
pub fn fit_constrained_offset<T: Real>(spec: &ScmSpec<T>) -> Result<FitResult<T>> {
    let table = build_joint(spec)?;
    let gamma = true_marginal_log_or(spec)?;
    let start = fit_mle(&table, ModelParams::zeros())?;
    fit_constrained(&table, gamma, x_marginal(&table), start.params)
}

/// Population average treatment effect on the probability scale.
pub fn ate_baseline<T: Real>(spec: &ScmSpec<T>) -> T {
    let [p0, p1] = population_arms(spec);
    p1 - p0
}
