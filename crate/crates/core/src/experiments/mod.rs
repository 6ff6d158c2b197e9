//! Parameter sweeps over the binary mechanisms, CSV and SVG output.
//!
//! Every runner evaluates grid cells independently and returns rows in grid
//! order, whether the cells ran on one thread or many.

mod config;
mod csv;
mod svg;

pub use config::parse_config;
pub use csv::{collapsibility_csv, contours_csv, fmt_g12, rows_csv, CSV_HEADER};
pub use svg::{collapsibility_svg, example1_svg, sweep_svg};

use rayon::prelude::*;

use crate::causal::{
    collapsibility_from_probs, collapsibility_pipeline, implied_marginal_log_or,
    true_marginal_log_or, CollapsibilityRow,
};
use crate::dgm::{build_joint, CovariateCoding, ScmSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    ate_baseline, fit_conditional_offset, fit_constrained_offset, fit_full_observational,
    fit_marginal_offset, fit_mle, fit_rct_reference, FitResult, MethodId,
};
use crate::likelihood::{expected_loglik, Coef, ModelParams};
use crate::metrics::{pehe, CatePrediction};

/// Grid of mechanisms and the methods to evaluate on each.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Confounder odds-ratios, used for both `u -> t` and `u -> y`.
    pub or_u: Vec<f64>,
    pub beta_x: Vec<f64>,
    /// Coupling values for the correlated sweep.
    pub alpha: Vec<f64>,
    pub p_u: f64,
    pub p_x: f64,
    pub beta_t: f64,
    pub methods: Vec<MethodId>,
    pub x_coding: CovariateCoding,
    pub contour: ContourGrid,
}

/// Rectangle in `(beta0, beta_t)` on which the log-likelihood is tabulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourGrid {
    pub beta0: (f64, f64),
    pub beta_t: (f64, f64),
    pub points: usize,
}

impl Default for ContourGrid {
    fn default() -> Self {
        Self {
            beta0: (-2.5, 1.5),
            beta_t: (-0.5, 3.5),
            points: 41,
        }
    }
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            or_u: vec![1.0, 2.0, 5.0, 10.0],
            beta_x: default_beta_x_grid(),
            alpha: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            p_u: 0.5,
            p_x: 0.5,
            beta_t: 1.0,
            methods: MethodId::ALL.to_vec(),
            x_coding: CovariateCoding::Indicator,
            contour: ContourGrid::default(),
        }
    }
}

/// 21 log odds-ratios evenly spaced on `[0, ln 10]`.
pub fn default_beta_x_grid() -> Vec<f64> {
    let top = 10f64.ln();
    (0..=20).map(|i| top * i as f64 / 20.0).collect()
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let nonempty = |name: &str, v: &[f64]| {
            if v.is_empty() {
                Err(Error::Sweep(format!("`{name}` grid is empty")))
            } else {
                Ok(())
            }
        };
        nonempty("or_u", &self.or_u)?;
        nonempty("beta_x", &self.beta_x)?;
        if self.methods.is_empty() {
            return Err(Error::Sweep("no methods selected".into()));
        }
        if let Some(or) = self.or_u.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Sweep(format!(
                "odds-ratio must be positive and finite, got {or}"
            )));
        }
        if let Some(b) = self.beta_x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Sweep(format!("beta_x must be finite, got {b}")));
        }
        if let Some(a) = self.alpha.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Sweep(format!("alpha must lie in (0, 1), got {a}")));
        }
        let c = self.contour;
        if c.points < 2 || !(c.beta0.0 < c.beta0.1) || !(c.beta_t.0 < c.beta_t.1) {
            return Err(Error::Sweep(
                "contour grid needs at least 2 points and increasing bounds".into(),
            ));
        }
        self.mechanism(self.or_u[0], self.beta_x[0], None)
            .validate()
    }

    /// Mechanism at one grid point.
    pub fn mechanism(&self, or_u: f64, beta_x: f64, alpha: Option<f64>) -> ScmSpec<f64> {
        let beta_u = or_u.ln();
        ScmSpec {
            p_u: self.p_u,
            p_x: self.p_x,
            alpha,
            beta_t: self.beta_t,
            beta_x,
            beta_ut: beta_u,
            beta_uy: beta_u,
            x_coding: self.x_coding,
            ..ScmSpec::example1(or_u)
        }
    }
}

/// One grid point under one method.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub or_u: f64,
    pub beta_x: f64,
    pub alpha: Option<f64>,
    pub p_u: f64,
    pub p_x: f64,
    pub beta_t: f64,
    pub method: MethodId,
    /// Fitted `(beta0, beta_t, beta_x)`; `None` for the ATE baseline or a failed fit.
    pub fit: Option<[f64; 3]>,
    pub implied_gamma: Option<f64>,
    pub true_gamma: f64,
    pub pehe: Option<f64>,
    pub converged: bool,
    /// Constraint residual of the fit, zero for unconstrained methods.
    pub constraint_residual: f64,
    pub error: Option<String>,
}

/// Count of rows and of fits that did not converge.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunSummary {
    pub rows: usize,
    pub non_converged: usize,
    pub failures: Vec<String>,
}

impl RunSummary {
    pub fn from_rows(rows: &[SweepRow]) -> Self {
        let mut s = RunSummary {
            rows: rows.len(),
            ..Default::default()
        };
        for r in rows.iter().filter(|r| !r.converged) {
            s.non_converged += 1;
            let why = r.error.as_deref().unwrap_or("did not converge");
            s.failures.push(format!(
                "or_u={} beta_x={} alpha={} method={}: {why}",
                fmt_g12(r.or_u),
                fmt_g12(r.beta_x),
                r.alpha.map(fmt_g12).unwrap_or_default(),
                r.method
            ));
        }
        s
    }

    pub fn all_converged(&self) -> bool {
        self.non_converged == 0
    }
}

/// Maps `f` over `items` on `jobs` threads, keeping input order.
pub fn par_map<I, O, F>(items: &[I], jobs: usize, f: F) -> Result<Vec<O>>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    if jobs <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Sweep(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}

fn fit_method(method: MethodId, spec: &ScmSpec<f64>) -> Result<FitResult<f64>> {
    match method {
        MethodId::RctReference => fit_rct_reference(spec),
        MethodId::FullObservational => fit_full_observational(spec),
        MethodId::ConditionalOffset => fit_conditional_offset(spec),
        MethodId::MarginalOffset => fit_marginal_offset(spec),
        MethodId::ConstrainedOffset => fit_constrained_offset(spec),
        MethodId::AteBaseline => unreachable!("the ATE baseline has no fitted model"),
    }
}

/// Evaluates one method on one mechanism.
pub fn evaluate(spec: &ScmSpec<f64>, method: MethodId) -> SweepRow {
    let weights = [spec.p_x_of(0), spec.p_x_of(1)];
    let mut row = SweepRow {
        or_u: spec.beta_ut.exp(),
        beta_x: spec.beta_x,
        alpha: spec.alpha,
        p_u: spec.p_u,
        p_x: spec.p_x,
        beta_t: spec.beta_t,
        method,
        fit: None,
        implied_gamma: None,
        true_gamma: f64::NAN,
        pehe: None,
        converged: false,
        constraint_residual: 0.0,
        error: None,
    };
    match true_marginal_log_or(spec) {
        Ok(g) => row.true_gamma = g,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    if method == MethodId::AteBaseline {
        row.pehe = Some(pehe(&CatePrediction::Constant(ate_baseline(spec)), spec));
        row.converged = true;
        return row;
    }
    match fit_method(method, spec) {
        Ok(fit) => fill_from_fit(&mut row, &fit, spec, weights),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn fill_from_fit(row: &mut SweepRow, fit: &FitResult<f64>, spec: &ScmSpec<f64>, weights: [f64; 2]) {
    row.fit = Some(fit.params.values());
    row.pehe = Some(pehe(&CatePrediction::from_fit(fit), spec));
    row.converged = fit.converged;
    row.constraint_residual = fit.constraint_residual;
    match implied_marginal_log_or(&fit.params, weights) {
        Ok(g) => row.implied_gamma = Some(g),
        Err(e) => {
            row.converged = false;
            row.error = Some(e.to_string());
        }
    }
}

fn run_grid(
    spec: &SweepSpec,
    points: Vec<(f64, f64, Option<f64>)>,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let cells: Vec<(f64, ScmSpec<f64>, MethodId)> = points
        .into_iter()
        .flat_map(|(or_u, bx, alpha)| {
            let m = spec.mechanism(or_u, bx, alpha);
            spec.methods.iter().map(move |&method| (or_u, m, method))
        })
        .collect();
    par_map(&cells, jobs, |(or_u, m, method)| SweepRow {
        // The grid's own value, not exp(ln(or_u)).
        or_u: *or_u,
        ..evaluate(m, *method)
    })
}

/// Covariate sweep: every `(or_u, beta_x)` with `x` independent of `u`.
pub fn run_covariate_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    let points = spec
        .or_u
        .iter()
        .flat_map(|&or| spec.beta_x.iter().map(move |&bx| (or, bx, None)))
        .collect();
    run_grid(spec, points, jobs)
}

/// Correlated sweep: every `(or_u, beta_x, alpha)` with `P(u=1 | x)` coupled by `alpha`.
pub fn run_correlated_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    if spec.alpha.is_empty() {
        return Err(Error::Sweep("`alpha` grid is empty".into()));
    }
    let points = spec
        .or_u
        .iter()
        .flat_map(|&or| {
            spec.beta_x
                .iter()
                .flat_map(move |&bx| spec.alpha.iter().map(move |&a| (or, bx, Some(a))))
        })
        .collect();
    run_grid(spec, points, jobs)
}

/// Log-likelihood of `beta0 + beta_t t` over a rectangle, for one odds-ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSurface {
    pub or_u: f64,
    pub beta0: Vec<f64>,
    pub beta_t: Vec<f64>,
    /// Row-major: `values[i * beta_t.len() + j]` is at `(beta0[i], beta_t[j])`.
    pub values: Vec<f64>,
}

impl ContourSurface {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.beta_t.len() + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example1Output {
    /// Per odds-ratio: the randomized fit (ground truth), the full observational fit and the offset fit.
    pub rows: Vec<SweepRow>,
    pub contours: Vec<ContourSurface>,
}

/// Methods of the `example1` run, in output order.
pub const EXAMPLE1_METHODS: [MethodId; 3] = [
    MethodId::RctReference,
    MethodId::FullObservational,
    MethodId::ConditionalOffset,
];

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn example1_row(spec: &ScmSpec<f64>, or_u: f64, method: MethodId) -> SweepRow {
    let mut row = evaluate(spec, MethodId::AteBaseline);
    row.or_u = or_u;
    row.method = method;
    row.converged = false;
    row.pehe = None;
    let result = (|| {
        // The covariate carries no signal here, so its coefficient stays at zero.
        let no_x = ModelParams::zeros().fix(Coef::BetaX, 0.0);
        let rct = fit_mle(&build_joint(&spec.randomized())?, no_x)?;
        match method {
            MethodId::RctReference => Ok(rct),
            MethodId::FullObservational => fit_mle(&build_joint(spec)?, no_x),
            MethodId::ConditionalOffset => fit_mle(
                &build_joint(spec)?,
                no_x.fix(Coef::BetaT, rct.params.beta_t),
            ),
            other => Err(Error::Sweep(format!(
                "method {other} is not part of the example1 run"
            ))),
        }
    })();
    match result {
        Ok(fit) => fill_from_fit(&mut row, &fit, spec, [spec.p_x_of(0), spec.p_x_of(1)]),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Covariate-free runs, one per odds-ratio in `spec.or_u`, plus likelihood surfaces.
pub fn run_example1(spec: &SweepSpec, jobs: usize) -> Result<Example1Output> {
    spec.validate()?;
    let mechanisms: Vec<(f64, ScmSpec<f64>)> = spec
        .or_u
        .iter()
        .map(|&or| (or, spec.mechanism(or, 0.0, None)))
        .collect();
    let cells: Vec<(f64, ScmSpec<f64>, MethodId)> = mechanisms
        .iter()
        .flat_map(|&(or, m)| {
            EXAMPLE1_METHODS
                .into_iter()
                .map(move |method| (or, m, method))
        })
        .collect();
    let rows = par_map(&cells, jobs, |(or, m, method)| {
        example1_row(m, *or, *method)
    })?;

    let c = spec.contour;
    let b0 = linspace(c.beta0.0, c.beta0.1, c.points);
    let bt = linspace(c.beta_t.0, c.beta_t.1, c.points);
    let contours = par_map(&mechanisms, jobs, |(or, m)| -> Result<ContourSurface> {
        let table = build_joint(m)?;
        let values = b0
            .iter()
            .flat_map(|&a| bt.iter().map(move |&b| (a, b)))
            .map(|(a, b)| expected_loglik(&ModelParams::new(a, b, 0.0), &table))
            .collect();
        Ok(ContourSurface {
            or_u: *or,
            beta0: b0.clone(),
            beta_t: bt.clone(),
            values,
        })
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(Example1Output { rows, contours })
}

/// One setting of the collapsibility table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsibilitySetting {
    pub label: &'static str,
    pub rows: [CollapsibilityRow<f64>; 2],
}

/// Both settings of the non-collapsibility table (`beta_t = 1`, balanced `x`)
/// followed by the near-deterministic strata example.
pub fn run_collapsibility_table() -> Result<Vec<CollapsibilitySetting>> {
    Ok(vec![
        CollapsibilitySetting {
            label: "a",
            rows: collapsibility_pipeline([-1.5, 0.5], 1.0, 0.5)?,
        },
        CollapsibilitySetting {
            label: "b",
            rows: collapsibility_pipeline([-3.5, 2.5], 1.0, 0.5)?,
        },
        CollapsibilitySetting {
            label: "extreme",
            rows: collapsibility_from_probs([0.01, 0.98], [0.02, 0.99], 0.5)?,
        },
    ])
}
