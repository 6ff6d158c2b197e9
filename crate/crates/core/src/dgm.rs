//! Discrete structural causal models over binary `(u, x, t, y)` and their
//! exact joint distributions.
//!
//! The treatment and the unobserved confounder enter every linear predictor
//! through the centered code `v - 1/2`, so a coefficient is always the full log
//! odds-ratio between the two levels. The covariate can be coded either way,
//! see [`CovariateCoding`].

use crate::error::{Error, Result};
use crate::numeric::sigmoid;
use crate::scalar::Real;

/// Treatment assignment mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `P(t=1 | u) = sigmoid(beta_ut * (u - 1/2))`, independent of `x`.
    Observational,
    /// `P(t=1 | u, x) = 1/2`.
    Randomized,
}

/// How the covariate enters the outcome predictor.
///
/// `Centered` uses `beta_x * (x - 1/2)`; with `p_u = 1/2` this places both
/// strata symmetrically around `-beta_t / 2` and the CATE is then identical in
/// both strata. `Indicator` uses `beta_x * x`, which leaves the untreated
/// stratum at the symmetric point and shifts the treated-covariate stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CovariateCoding {
    Centered,
    #[default]
    Indicator,
}

impl CovariateCoding {
    pub fn code<T: Real>(self, x: u8) -> T {
        let x = if x == 1 { T::one() } else { T::zero() };
        match self {
            CovariateCoding::Centered => x - T::half(),
            CovariateCoding::Indicator => x,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CovariateCoding::Centered => "centered",
            CovariateCoding::Indicator => "indicator",
        }
    }
}

impl std::str::FromStr for CovariateCoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "centered" => Ok(CovariateCoding::Centered),
            "indicator" => Ok(CovariateCoding::Indicator),
            other => Err(format!("unknown covariate coding `{other}`")),
        }
    }
}

/// Full parameterization of the binary structural causal model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmSpec<T> {
    /// `P(u=1)` when `u` and `x` are independent.
    pub p_u: T,
    /// `P(x=1)`.
    pub p_x: T,
    /// `P(u=1 | x=0) = alpha`, `P(u=1 | x=1) = 1 - alpha`. Overrides `p_u`.
    pub alpha: Option<T>,
    /// Outcome intercept. Zero places the untreated and treated arms
    /// symmetrically around even odds.
    pub beta_y0: T,
    pub beta_t: T,
    pub beta_x: T,
    /// Confounder to treatment log odds-ratio.
    pub beta_ut: T,
    /// Confounder to outcome log odds-ratio.
    pub beta_uy: T,
    pub regime: Regime,
    pub x_coding: CovariateCoding,
}

impl<T: Real> ScmSpec<T> {
    /// Covariate-free reference mechanism: `beta_ut = beta_uy = ln(or_u)`, `beta_t = 1`, `p_u = 1/2`.
    pub fn example1(or_u: T) -> Self {
        let beta_u = or_u.ln();
        Self {
            p_u: T::half(),
            p_x: T::half(),
            alpha: None,
            beta_y0: T::zero(),
            beta_t: T::one(),
            beta_x: T::zero(),
            beta_ut: beta_u,
            beta_uy: beta_u,
            regime: Regime::Observational,
            x_coding: CovariateCoding::Indicator,
        }
    }

    /// The reference mechanism plus a binary covariate with log odds-ratio `beta_x`.
    pub fn with_covariate(or_u: T, beta_x: T) -> Self {
        Self {
            beta_x,
            ..Self::example1(or_u)
        }
    }

    /// Same mechanism with treatment assigned by a fair coin.
    pub fn randomized(&self) -> Self {
        Self {
            regime: Regime::Randomized,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_u", self.p_u)?;
        check_probability("p_x", self.p_x)?;
        if let Some(alpha) = self.alpha {
            check_probability("alpha", alpha)?;
        }
        check_finite("beta_y0", self.beta_y0)?;
        check_finite("beta_t", self.beta_t)?;
        check_finite("beta_x", self.beta_x)?;
        check_finite("beta_ut", self.beta_ut)?;
        check_finite("beta_uy", self.beta_uy)?;
        Ok(())
    }

    pub fn p_x_of(&self, x: u8) -> T {
        if x == 1 {
            self.p_x
        } else {
            T::one() - self.p_x
        }
    }

    /// `P(u=1 | x)`.
    pub fn p_u1_given_x(&self, x: u8) -> T {
        match self.alpha {
            Some(alpha) if x == 1 => T::one() - alpha,
            Some(alpha) => alpha,
            None => self.p_u,
        }
    }

    /// `P(u | x)`.
    pub fn p_u_given_x(&self, u: u8, x: u8) -> T {
        let p1 = self.p_u1_given_x(x);
        if u == 1 {
            p1
        } else {
            T::one() - p1
        }
    }

    /// Marginal `P(u=1)`; `p_x (1 - alpha) + (1 - p_x) alpha` under coupling.
    pub fn p_u1(&self) -> T {
        self.p_x * self.p_u1_given_x(1) + (T::one() - self.p_x) * self.p_u1_given_x(0)
    }

    /// `P(t=1 | u, x)` under the spec's regime.
    pub fn p_t1_given(&self, u: u8) -> T {
        match self.regime {
            Regime::Randomized => T::half(),
            Regime::Observational => sigmoid(self.beta_ut * centered(u)),
        }
    }

    /// Linear predictor of the outcome.
    pub fn outcome_logit(&self, t: u8, x: u8, u: u8) -> T {
        self.beta_y0
            + self.beta_t * centered(t)
            + self.beta_x * self.x_coding.code(x)
            + self.beta_uy * centered(u)
    }

    /// `P(y=1 | t, x, u)`.
    pub fn outcome_prob(&self, t: u8, x: u8, u: u8) -> T {
        sigmoid(self.outcome_logit(t, x, u))
    }
}

fn centered<T: Real>(v: u8) -> T {
    if v == 1 {
        T::half()
    } else {
        -T::half()
    }
}

fn check_probability<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value < T::one() {
        Ok(())
    } else {
        Err(Error::Probability {
            name,
            value: value.as_f64(),
        })
    }
}

fn check_finite<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            name,
            value: value.as_f64(),
        })
    }
}

/// Iterator over `{0,1}`.
pub(crate) const BIN: [u8; 2] = [0, 1];

/// Exact joint distribution over `(u, x, t, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointTable<T> {
    prob: [T; 16],
}

impl<T: Real> JointTable<T> {
    fn index(u: u8, x: u8, t: u8, y: u8) -> usize {
        ((u as usize) << 3) | ((x as usize) << 2) | ((t as usize) << 1) | y as usize
    }

    /// Builds a table from raw cells ordered `(u, x, t, y)` with `y` fastest.
    ///
    /// Entries must be non-negative and sum to one.
    pub fn from_cells(prob: [T; 16]) -> Result<Self> {
        let sum = prob.iter().fold(T::zero(), |acc, &p| acc + p);
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
        if prob.iter().any(|p| !(*p >= T::zero())) || (sum - T::one()).abs() > tol {
            return Err(Error::Weights { sum: sum.as_f64() });
        }
        Ok(Self { prob })
    }

    pub fn get(&self, u: u8, x: u8, t: u8, y: u8) -> T {
        self.prob[Self::index(u, x, t, y)]
    }

    pub fn cells(&self) -> &[T; 16] {
        &self.prob
    }

    pub fn total(&self) -> T {
        self.prob.iter().fold(T::zero(), |acc, &p| acc + p)
    }

    /// `P(u, x, t)`.
    pub fn mass(&self, u: u8, x: u8, t: u8) -> T {
        self.get(u, x, t, 0) + self.get(u, x, t, 1)
    }

    /// True outcome probability `P(y=1 | t, x, u)`, `None` when the cell has no mass.
    pub fn outcome_given(&self, u: u8, x: u8, t: u8) -> Option<T> {
        let m = self.mass(u, x, t);
        if m > T::zero() {
            Some(self.get(u, x, t, 1) / m)
        } else {
            None
        }
    }
}

/// Exact product `P(u, x) P(t | u, x) P(y | t, x, u)`.
pub fn build_joint<T: Real>(spec: &ScmSpec<T>) -> Result<JointTable<T>> {
    spec.validate()?;
    let mut prob = [T::zero(); 16];
    for u in BIN {
        let p_t1 = spec.p_t1_given(u);
        for x in BIN {
            let p_ux = spec.p_x_of(x) * spec.p_u_given_x(u, x);
            for t in BIN {
                let p_t = if t == 1 { p_t1 } else { T::one() - p_t1 };
                let pi = spec.outcome_prob(t, x, u);
                let m = p_ux * p_t;
                prob[JointTable::<T>::index(u, x, t, 1)] = m * pi;
                prob[JointTable::<T>::index(u, x, t, 0)] = m * (T::one() - pi);
            }
        }
    }
    Ok(JointTable { prob })
}

/// Outcome probabilities indexed `[t][x]`.
pub type TxGrid<T> = [[T; 2]; 2];

/// `P(y=1 | t, x)` with the confounder marginalized out.
pub fn observational_conditional<T: Real>(table: &JointTable<T>) -> Result<TxGrid<T>> {
    let mut out = [[T::zero(); 2]; 2];
    for t in BIN {
        for x in BIN {
            let mut num = T::zero();
            let mut den = T::zero();
            for u in BIN {
                num = num + table.get(u, x, t, 1);
                den = den + table.mass(u, x, t);
            }
            if !(den > T::zero()) {
                return Err(Error::DegenerateCell { t, x });
            }
            out[t as usize][x as usize] = num / den;
        }
    }
    Ok(out)
}

/// `P(x)` indexed by `x`.
pub fn x_marginal<T: Real>(table: &JointTable<T>) -> [T; 2] {
    let mut out = [T::zero(); 2];
    for x in BIN {
        for u in BIN {
            for t in BIN {
                out[x as usize] = out[x as usize] + table.mass(u, x, t);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform_spec() -> ScmSpec<f64> {
        ScmSpec {
            p_u: 0.5,
            p_x: 0.5,
            alpha: None,
            beta_y0: 0.0,
            beta_t: 0.0,
            beta_x: 0.0,
            beta_ut: 0.0,
            beta_uy: 0.0,
            regime: Regime::Observational,
            x_coding: CovariateCoding::Centered,
        }
    }

    #[test]
    fn symmetric_spec_gives_uniform_table() {
        let table = build_joint(&uniform_spec()).unwrap();
        for &p in table.cells() {
            assert_eq!(p, 1.0 / 16.0);
        }
        let cond = observational_conditional(&table).unwrap();
        for row in cond {
            for p in row {
                assert_eq!(p, 0.5);
            }
        }
    }

    #[test]
    fn example1_treatment_propensity() {
        let spec = ScmSpec::example1(10.0f64);
        // sigmoid(ln(10)/2) = sqrt(10)/(1+sqrt(10))
        assert_relative_eq!(spec.p_t1_given(1), 0.759_746_926_647_957_5, epsilon = 1e-12);
        let table = build_joint(&spec).unwrap();
        let p = table.mass(1, 0, 1) + table.mass(1, 1, 1);
        let pu1 = (0..4).map(|i| table.mass(1, i / 2, i % 2)).sum::<f64>();
        assert_relative_eq!(p / pu1, 0.759_746_926_647_957_5, epsilon = 1e-12);
    }

    #[test]
    fn randomized_regime_is_fair_coin() {
        let spec = ScmSpec::with_covariate(10.0f64, 1.3).randomized();
        let table = build_joint(&spec).unwrap();
        for u in BIN {
            for x in BIN {
                assert_relative_eq!(table.mass(u, x, 1), table.mass(u, x, 0), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn unconfounded_conditional_is_plain_sigmoid() {
        let spec = ScmSpec {
            beta_t: 1.0,
            ..uniform_spec()
        };
        let cond = observational_conditional(&build_joint(&spec).unwrap()).unwrap();
        for x in 0..2 {
            assert_relative_eq!(cond[1][x], sigmoid(0.5), epsilon = 1e-15);
            assert_relative_eq!(cond[0][x], sigmoid(-0.5), epsilon = 1e-15);
        }
    }

    #[test]
    fn confounded_conditional_matches_cell_summation() {
        let spec = ScmSpec::example1(10.0f64);
        let cond = observational_conditional(&build_joint(&spec).unwrap()).unwrap();
        // Oracle: enumerate the eight (u, t, y) cells from the mechanism directly.
        let b = 10.0f64.ln();
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        for t in 0..2 {
            let mut num = 0.0;
            let mut den = 0.0;
            for u in 0..2 {
                let pu = 0.5;
                let pt1 = s(0.5 * b * (2.0 * u as f64 - 1.0));
                let pt = if t == 1 { pt1 } else { 1.0 - pt1 };
                let pi = s(0.5 * (2.0 * t as f64 - 1.0) + 0.5 * b * (2.0 * u as f64 - 1.0));
                num += pu * pt * pi;
                den += pu * pt;
            }
            assert_relative_eq!(cond[t][0], num / den, epsilon = 1e-14);
            assert_relative_eq!(cond[t][1], num / den, epsilon = 1e-14);
        }
    }

    #[test]
    fn x_marginal_recovers_p_x() {
        for &px in &[0.5, 0.3] {
            let spec = ScmSpec {
                p_x: px,
                beta_ut: 0.7,
                beta_uy: -1.1,
                ..uniform_spec()
            };
            let w = x_marginal(&build_joint(&spec).unwrap());
            assert_relative_eq!(w[1], px, epsilon = 1e-15);
            assert_relative_eq!(w[0], 1.0 - px, epsilon = 1e-15);
        }
        let coupled = ScmSpec {
            alpha: Some(0.9),
            ..uniform_spec()
        };
        let w = x_marginal(&build_joint(&coupled).unwrap());
        assert_relative_eq!(w[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn alpha_half_reproduces_independent_table() {
        let base = ScmSpec::with_covariate(5.0f64, 0.8);
        let coupled = ScmSpec {
            alpha: Some(0.5),
            ..base
        };
        assert_eq!(build_joint(&base).unwrap(), build_joint(&coupled).unwrap());
    }

    #[test]
    fn coupled_confounder_marginal() {
        let spec = ScmSpec {
            alpha: Some(0.2),
            p_x: 0.3,
            ..uniform_spec()
        };
        assert_relative_eq!(spec.p_u1(), 0.3 * 0.8 + 0.7 * 0.2, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_probabilities() {
        for bad in [0.0, 1.0, -0.1, f64::NAN] {
            let spec = ScmSpec {
                p_u: bad,
                ..uniform_spec()
            };
            assert!(matches!(
                build_joint(&spec),
                Err(Error::Probability { name: "p_u", .. })
            ));
        }
        let spec = ScmSpec {
            alpha: Some(1.0),
            ..uniform_spec()
        };
        assert!(build_joint(&spec).is_err());
        let spec = ScmSpec {
            beta_uy: f64::INFINITY,
            ..uniform_spec()
        };
        assert!(matches!(build_joint(&spec), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn degenerate_cell_is_named() {
        let mut cells = [1.0 / 12.0; 16];
        for u in 0..2 {
            cells[JointTable::<f64>::index(u, 1, 0, 0)] = 0.0;
            cells[JointTable::<f64>::index(u, 1, 0, 1)] = 0.0;
        }
        let table = JointTable::from_cells(cells).unwrap();
        assert_eq!(
            observational_conditional(&table),
            Err(Error::DegenerateCell { t: 0, x: 1 })
        );
    }

    #[test]
    fn single_precision_table_sums_to_one() {
        let table = build_joint(&ScmSpec::with_covariate(10.0f32, 2.0)).unwrap();
        assert!((table.total() - 1.0).abs() < 1e-6);
    }
}
