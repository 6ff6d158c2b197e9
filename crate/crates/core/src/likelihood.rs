//! Logistic models `eta = beta0 + beta_t t + beta_x x`, their exact expected
//! log-likelihood under a joint table, and identification diagnostics for the
//! covariate-free case.

use crate::dgm::{JointTable, ScmSpec, BIN};
use crate::error::{Error, Result};
use crate::numeric::{log_sigmoid, logit, sigmoid};
use crate::scalar::Real;

/// Coefficient slot in [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coef {
    Beta0 = 0,
    BetaT = 1,
    BetaX = 2,
}

impl Coef {
    pub const ALL: [Coef; 3] = [Coef::Beta0, Coef::BetaT, Coef::BetaX];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Freedom {
    #[default]
    Free,
    /// Held at its current value; a fixed `beta_t` is the treatment offset.
    Fixed,
}

/// Coefficients of the logistic model plus which of them are estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    pub beta0: T,
    pub beta_t: T,
    pub beta_x: T,
    pub mask: [Freedom; 3],
}

impl<T: Real> Default for ModelParams<T> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<T: Real> ModelParams<T> {
    pub fn new(beta0: T, beta_t: T, beta_x: T) -> Self {
        Self {
            beta0,
            beta_t,
            beta_x,
            mask: [Freedom::Free; 3],
        }
    }

    pub fn zeros() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    /// Marks `coef` fixed at `value`.
    pub fn fix(mut self, coef: Coef, value: T) -> Self {
        self.set(coef, value);
        self.mask[coef as usize] = Freedom::Fixed;
        self
    }

    /// Offset model: `beta_t` held at `beta_t`.
    pub fn offset(beta_t: T) -> Self {
        Self::zeros().fix(Coef::BetaT, beta_t)
    }

    pub fn get(&self, coef: Coef) -> T {
        match coef {
            Coef::Beta0 => self.beta0,
            Coef::BetaT => self.beta_t,
            Coef::BetaX => self.beta_x,
        }
    }

    pub fn set(&mut self, coef: Coef, value: T) {
        match coef {
            Coef::Beta0 => self.beta0 = value,
            Coef::BetaT => self.beta_t = value,
            Coef::BetaX => self.beta_x = value,
        }
    }

    pub fn values(&self) -> [T; 3] {
        [self.beta0, self.beta_t, self.beta_x]
    }

    pub fn is_free(&self, coef: Coef) -> bool {
        self.mask[coef as usize] == Freedom::Free
    }

    pub fn free_coefs(&self) -> Vec<Coef> {
        Coef::ALL.into_iter().filter(|c| self.is_free(*c)).collect()
    }

    pub fn free_values(&self) -> Vec<T> {
        self.free_coefs().into_iter().map(|c| self.get(c)).collect()
    }

    /// Writes `values` into the free slots in [`Coef::ALL`] order.
    pub fn with_free_values(mut self, values: &[T]) -> Self {
        for (c, v) in self.free_coefs().into_iter().zip(values) {
            self.set(c, *v);
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mask.iter().all(|m| *m == Freedom::Fixed) {
            return Err(Error::NoFreeCoefficient);
        }
        for (name, v) in [
            ("beta0", self.beta0),
            ("beta_t", self.beta_t),
            ("beta_x", self.beta_x),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    name,
                    value: v.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// Baseline log odds `f(x) = beta0 + beta_x x`.
    pub fn baseline(&self, x: u8) -> T {
        if x == 1 {
            self.beta0 + self.beta_x
        } else {
            self.beta0
        }
    }

    pub fn eta(&self, t: u8, x: u8) -> T {
        if t == 1 {
            self.baseline(x) + self.beta_t
        } else {
            self.baseline(x)
        }
    }

    /// Predicted `sigmoid(eta(1, x)) - sigmoid(eta(0, x))`.
    pub fn cate(&self, x: u8) -> T {
        sigmoid(self.eta(1, x)) - sigmoid(self.eta(0, x))
    }
}

fn design<T: Real>(t: u8, x: u8) -> [T; 3] {
    let b = |v: u8| if v == 1 { T::one() } else { T::zero() };
    [T::one(), b(t), b(x)]
}

/// `E[log p(y | t, x; params)]` under the joint table.
pub fn expected_loglik<T: Real>(params: &ModelParams<T>, table: &JointTable<T>) -> T {
    let mut total = T::zero();
    for u in BIN {
        for x in BIN {
            for t in BIN {
                let eta = params.eta(t, x);
                total = total
                    + table.get(u, x, t, 1) * log_sigmoid(eta)
                    + table.get(u, x, t, 0) * log_sigmoid(-eta);
            }
        }
    }
    total
}

/// Gradient with respect to all three coefficients, ignoring the mask.
pub fn full_gradient<T: Real>(params: &ModelParams<T>, table: &JointTable<T>) -> [T; 3] {
    let mut g = [T::zero(); 3];
    for x in BIN {
        for t in BIN {
            let p = sigmoid(params.eta(t, x));
            let mut resid = T::zero();
            for u in BIN {
                resid = resid + table.get(u, x, t, 1) * (T::one() - p) - table.get(u, x, t, 0) * p;
            }
            for (gi, zi) in g.iter_mut().zip(design::<T>(t, x)) {
                *gi = *gi + resid * zi;
            }
        }
    }
    g
}

/// Analytic gradient over the free coefficients, in [`Coef::ALL`] order.
pub fn grad_expected_loglik<T: Real>(params: &ModelParams<T>, table: &JointTable<T>) -> Vec<T> {
    let g = full_gradient(params, table);
    params
        .free_coefs()
        .into_iter()
        .map(|c| g[c as usize])
        .collect()
}

/// `dL/dbeta0` at the interventional truth of a covariate-free mechanism,
/// from raw ingredients: `p_u = P(u=1)`, `p_t1[u] = P(t=1 | u)`,
/// `pi[t][u] = P(y=1 | t, u)`.
pub fn grad_at_truth_from_parts<T: Real>(p_u: T, p_t1: [T; 2], pi: [[T; 2]; 2]) -> T {
    let p_t0 = [T::one() - p_t1[0], T::one() - p_t1[1]];
    p_u * (T::one() - p_u)
        * ((pi[0][1] - pi[0][0]) * (p_t0[1] - p_t0[0])
            + (pi[1][1] - pi[1][0]) * (p_t1[1] - p_t1[0]))
}

/// Closed-form offset-model gradient at the true baseline for an Example-1
/// mechanism (`beta_x = 0`).
pub fn grad_at_truth_closed_form<T: Real>(spec: &ScmSpec<T>) -> Result<T> {
    spec.validate()?;
    if spec.beta_x != T::zero() {
        return Err(Error::NotExample1("beta_x must be 0"));
    }
    let mut pi = [[T::zero(); 2]; 2];
    for t in BIN {
        for u in BIN {
            pi[t as usize][u as usize] = spec.outcome_prob(t, 0, u);
        }
    }
    Ok(grad_at_truth_from_parts(
        spec.p_u1(),
        [spec.p_t1_given(0), spec.p_t1_given(1)],
        pi,
    ))
}

/// Interventional truth `(beta0*, beta_t*)` of a covariate-free mechanism.
pub fn example1_truth<T: Real>(spec: &ScmSpec<T>) -> Result<(T, T)> {
    if spec.beta_x != T::zero() {
        return Err(Error::NotExample1("beta_x must be 0"));
    }
    let p_u = spec.p_u1();
    let arm =
        |t: u8| (T::one() - p_u) * spec.outcome_prob(t, 0, 0) + p_u * spec.outcome_prob(t, 0, 1);
    let b0 = logit(arm(0))?;
    Ok((b0, logit(arm(1))? - b0))
}

/// The other baseline with the same CATE: `-(beta0* + beta_t*)`.
pub fn alt_baseline_solution<T: Real>(beta0_star: T, beta_t_star: T) -> T {
    -(beta0_star + beta_t_star)
}

/// Solutions of `sigmoid(b0 + beta_t) - sigmoid(b0) = delta` in `b0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSetRoots<T> {
    None,
    One(T),
    /// Ascending.
    Two(T, T),
    /// `delta = 0` and `beta_t = 0`: every baseline solves the equation.
    Any,
}

impl<T: Real> LevelSetRoots<T> {
    pub fn to_vec(self) -> Vec<T> {
        match self {
            LevelSetRoots::None | LevelSetRoots::Any => Vec::new(),
            LevelSetRoots::One(a) => vec![a],
            LevelSetRoots::Two(a, b) => vec![a, b],
        }
    }
}

/// Solves `delta e^b y^2 + (delta (1 + e^b) - e^b + 1) y + delta = 0` for
/// `y = e^{beta0}` and keeps the strictly positive roots.
pub fn cate_level_set_roots<T: Real>(delta: T, beta_t: T) -> LevelSetRoots<T> {
    let eb = beta_t.exp();
    let a = delta * eb;
    let b = delta * (T::one() + eb) - eb + T::one();
    let c = delta;
    if a == T::zero() {
        // delta = 0: b y = 0 has no positive root unless b vanishes too.
        return if b == T::zero() {
            LevelSetRoots::Any
        } else {
            LevelSetRoots::None
        };
    }
    let disc = b * b - T::lit(4.0) * a * c;
    if disc < T::zero() {
        return LevelSetRoots::None;
    }
    let sq = disc.sqrt();
    let q = -T::half() * (b + b.signum() * sq);
    let mut ys = if disc == T::zero() {
        vec![-b / (T::two() * a)]
    } else {
        vec![q / a, c / q]
    };
    ys.retain(|y| *y > T::zero() && y.is_finite());
    let mut logs: Vec<T> = ys.into_iter().map(|y| y.ln()).collect();
    logs.sort_by(|l, r| l.partial_cmp(r).expect("finite roots"));
    match logs.as_slice() {
        [] => LevelSetRoots::None,
        [a] => LevelSetRoots::One(*a),
        [a, b] => LevelSetRoots::Two(*a, *b),
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgm::{build_joint, CovariateCoding, Regime};
    use approx::assert_relative_eq;

    fn uniform() -> JointTable<f64> {
        JointTable::from_cells([1.0 / 16.0; 16]).unwrap()
    }

    #[test]
    fn zero_model_on_uniform_table() {
        let ll = expected_loglik(&ModelParams::zeros(), &uniform());
        assert_relative_eq!(ll, 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn loglik_matches_cell_summation() {
        let spec = ScmSpec::example1(10.0f64);
        let table = build_joint(&spec).unwrap();
        let (b0, bt) = example1_truth(&spec).unwrap();
        let params = ModelParams::new(b0, bt, 0.0);
        // Oracle: eight (u, t, y) cells, P(u) P(t|u) P(y|t,u) log q(y|t).
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let beta = 10.0f64.ln();
        let mut direct = 0.0;
        for u in 0..2 {
            let uc = u as f64 - 0.5;
            for t in 0..2 {
                let tc = t as f64 - 0.5;
                let pt1 = s(beta * uc);
                let pt = if t == 1 { pt1 } else { 1.0 - pt1 };
                let pi = s(tc + beta * uc);
                let q = s(b0 + bt * t as f64);
                direct += 0.5 * pt * (pi * q.ln() + (1.0 - pi) * (1.0 - q).ln());
            }
        }
        assert_relative_eq!(expected_loglik(&params, &table), direct, epsilon = 1e-14);
    }

    #[test]
    fn gradient_respects_mask() {
        let table = build_joint(&ScmSpec::with_covariate(2.0f64, 0.7)).unwrap();
        let p = ModelParams::new(0.1, 0.2, 0.3).fix(Coef::BetaT, 0.2);
        let g = grad_expected_loglik(&p, &table);
        let full = full_gradient(&p, &table);
        assert_eq!(g, vec![full[0], full[2]]);
    }

    #[test]
    fn loglik_stable_for_large_predictors() {
        let table = build_joint(&ScmSpec::with_covariate(10.0f64, 2.0)).unwrap();
        let ll = expected_loglik(&ModelParams::new(60.0, -120.0, 40.0), &table);
        assert!(ll.is_finite() && ll < 0.0);
    }

    #[test]
    fn closed_form_hand_example() {
        let g = grad_at_truth_from_parts(0.5, [0.2, 0.8], [[0.3, 0.6], [0.5, 0.9]]);
        assert_relative_eq!(g, 0.015, epsilon = 1e-15);
    }

    #[test]
    fn closed_form_zero_without_confounding() {
        let spec = ScmSpec {
            beta_ut: 0.0,
            ..ScmSpec::example1(10.0f64)
        };
        assert_eq!(grad_at_truth_closed_form(&spec).unwrap(), 0.0);
        let spec = ScmSpec {
            beta_uy: 0.0,
            ..ScmSpec::example1(10.0f64)
        };
        assert_eq!(grad_at_truth_closed_form(&spec).unwrap(), 0.0);
        assert_eq!(
            grad_at_truth_from_parts(0.3, [0.1, 0.9], [[0.4, 0.4], [0.7, 0.7]]),
            0.0
        );
    }

    #[test]
    fn closed_form_matches_generic_gradient() {
        for or_u in [1.5f64, 3.0, 10.0] {
            for p_u in [0.2, 0.5, 0.8] {
                let spec = ScmSpec {
                    p_u,
                    beta_y0: -0.8,
                    beta_ut: or_u.ln(),
                    beta_uy: -0.7 * or_u.ln(),
                    ..ScmSpec::example1(or_u)
                };
                let (b0, bt) = example1_truth(&spec).unwrap();
                let table = build_joint(&spec).unwrap();
                let p = ModelParams::new(b0, bt, 0.0)
                    .fix(Coef::BetaT, bt)
                    .fix(Coef::BetaX, 0.0);
                let g = grad_expected_loglik(&p, &table);
                assert_eq!(g.len(), 1);
                let closed = grad_at_truth_closed_form(&spec).unwrap();
                assert!(closed.abs() > 1e-6);
                assert_relative_eq!(g[0], closed, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_vanishes_for_symmetric_arms() {
        // Without an outcome intercept the confounder moves both arms by the
        // same probability amount, so the truth is stationary.
        for p_u in [0.1f64, 0.5, 0.8] {
            let spec = ScmSpec {
                p_u,
                ..ScmSpec::example1(10.0)
            };
            assert!(grad_at_truth_closed_form(&spec).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_rejects_covariate_effect() {
        let spec = ScmSpec::with_covariate(2.0f64, 0.5);
        assert!(matches!(
            grad_at_truth_closed_form(&spec),
            Err(Error::NotExample1(_))
        ));
    }

    #[test]
    fn alternative_baseline_examples() {
        let alt = alt_baseline_solution(-1.0f64, 1.0);
        assert_eq!(alt, 0.0);
        let orig = ModelParams::new(-1.0f64, 1.0, 0.0).cate(0);
        let other = ModelParams::new(alt, 1.0, 0.0).cate(0);
        assert_relative_eq!(orig, 0.231_058_578_630_004_87, epsilon = 1e-14);
        assert_relative_eq!(other, orig, epsilon = 1e-15);
        assert_eq!(alt_baseline_solution(0.0f64, 0.0), 0.0);
        assert_eq!(alt_baseline_solution(-0.8f64, 1.6), -0.8);
    }

    #[test]
    fn level_set_roots_examples() {
        let delta = sigmoid(0.0f64) - sigmoid(-1.0);
        match cate_level_set_roots(delta, 1.0) {
            LevelSetRoots::Two(a, b) => {
                assert_relative_eq!(a, -1.0, epsilon = 1e-12);
                assert_relative_eq!(b, 0.0, epsilon = 1e-12);
            }
            other => panic!("expected two roots, got {other:?}"),
        }
        assert_eq!(cate_level_set_roots(0.0f64, 0.0), LevelSetRoots::Any);
        // max CATE for beta_t = 1 is sigmoid(1/2) - sigmoid(-1/2) ~ 0.245
        assert_eq!(cate_level_set_roots(0.3f64, 1.0), LevelSetRoots::None);
        let peak = sigmoid(0.5f64) - sigmoid(-0.5);
        match cate_level_set_roots(peak, 1.0) {
            LevelSetRoots::One(a) => assert_relative_eq!(a, -0.5, epsilon = 1e-6),
            LevelSetRoots::Two(a, b) => {
                assert_relative_eq!(a, -0.5, epsilon = 1e-6);
                assert_relative_eq!(b, -0.5, epsilon = 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn truth_requires_covariate_free_spec() {
        let spec = ScmSpec {
            x_coding: CovariateCoding::Centered,
            regime: Regime::Observational,
            ..ScmSpec::with_covariate(2.0f64, 1.0)
        };
        assert!(example1_truth(&spec).is_err());
    }
}
