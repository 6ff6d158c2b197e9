//! Interventional ground truth, marginal versus conditional odds-ratios and the
//! implied marginal odds-ratio of a fitted model.

use crate::dgm::{ScmSpec, TxGrid, BIN};
use crate::error::{Error, Result};
use crate::likelihood::ModelParams;
use crate::numeric::{logit, sigmoid};
use crate::scalar::Real;

/// `pi[t][x] = P(y=1 | do(t), x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterventionalTable<T> {
    pub pi: TxGrid<T>,
}

impl<T: Real> InterventionalTable<T> {
    pub fn get(&self, t: u8, x: u8) -> T {
        self.pi[t as usize][x as usize]
    }

    pub fn cate(&self, x: u8) -> T {
        self.get(1, x) - self.get(0, x)
    }
}

/// `P(y=1 | do(t), x) = sum_u P(u | x) P(y=1 | t, x, u)`.
pub fn interventional<T: Real>(spec: &ScmSpec<T>) -> InterventionalTable<T> {
    let mut pi = [[T::zero(); 2]; 2];
    for t in BIN {
        for x in BIN {
            pi[t as usize][x as usize] = BIN.iter().fold(T::zero(), |acc, &u| {
                acc + spec.p_u_given_x(u, x) * spec.outcome_prob(t, x, u)
            });
        }
    }
    InterventionalTable { pi }
}

pub fn true_cate<T: Real>(spec: &ScmSpec<T>, x: u8) -> T {
    interventional(spec).cate(x)
}

/// `P(y=1 | do(t))` pooled over the covariate.
pub fn population_arms<T: Real>(spec: &ScmSpec<T>) -> [T; 2] {
    let table = interventional(spec);
    let mut arms = [T::zero(); 2];
    for t in BIN {
        for x in BIN {
            arms[t as usize] = arms[t as usize] + spec.p_x_of(x) * table.get(t, x);
        }
    }
    arms
}

/// Marginal log odds-ratio a large trial in this population would report.
pub fn true_marginal_log_or<T: Real>(spec: &ScmSpec<T>) -> Result<T> {
    let [p0, p1] = population_arms(spec);
    Ok(logit(p1)? - logit(p0)?)
}

fn check_weights<T: Real>(w: [T; 2]) -> Result<()> {
    let sum = w[0] + w[1];
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    if w[0] < T::zero() || w[1] < T::zero() || (sum - T::one()).abs() > tol {
        return Err(Error::Weights { sum: sum.as_f64() });
    }
    Ok(())
}

/// Pooled predicted arms `sum_x w_x sigmoid(f(x) + beta_t t)`.
pub fn implied_arms<T: Real>(params: &ModelParams<T>, x_weights: [T; 2]) -> [T; 2] {
    let mut arms = [T::zero(); 2];
    for t in BIN {
        for x in BIN {
            arms[t as usize] = arms[t as usize] + x_weights[x as usize] * sigmoid(params.eta(t, x));
        }
    }
    arms
}

/// Marginal log odds-ratio a trial would report if `params` were the truth,
/// with the covariate distributed as `x_weights`.
pub fn implied_marginal_log_or<T: Real>(params: &ModelParams<T>, x_weights: [T; 2]) -> Result<T> {
    check_weights(x_weights)?;
    let [a0, a1] = implied_arms(params, x_weights);
    Ok(logit(a1)? - logit(a0)?)
}

/// Same as [`implied_marginal_log_or`] averaging over observed covariate values.
pub fn implied_marginal_log_or_empirical<T: Real>(params: &ModelParams<T>, xs: &[u8]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = T::from_usize(xs.len()).expect("sample size");
    let mut sums = [T::zero(); 2];
    for &x in xs {
        for t in BIN {
            sums[t as usize] = sums[t as usize] + sigmoid(params.eta(t, x));
        }
    }
    Ok(logit(sums[1] / n)? - logit(sums[0] / n)?)
}

/// One covariate stratum of the collapsibility computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsibilityRow<T> {
    pub x: u8,
    /// `logit(pi0(x))`.
    pub eta0: T,
    /// `logit(pi1(x))`.
    pub eta1: T,
    /// Conditional log odds-ratio `eta1 - eta0`.
    pub beta_t: T,
    pub pi0_x: T,
    pub pi1_x: T,
    pub pi0: T,
    pub pi1: T,
    pub eta0_marg: T,
    pub eta1_marg: T,
    pub gamma_t: T,
}

/// Pools stratum probabilities `pi0[x]`, `pi1[x]` with `P(x=1) = p_x1`.
pub fn collapsibility_from_probs<T: Real>(
    pi0: [T; 2],
    pi1: [T; 2],
    p_x1: T,
) -> Result<[CollapsibilityRow<T>; 2]> {
    if !(p_x1 > T::zero() && p_x1 < T::one()) {
        return Err(Error::Probability {
            name: "p_x1",
            value: p_x1.as_f64(),
        });
    }
    let pool = |p: [T; 2]| (T::one() - p_x1) * p[0] + p_x1 * p[1];
    let pooled0 = pool(pi0);
    let pooled1 = pool(pi1);
    let eta0_marg = logit(pooled0)?;
    let eta1_marg = logit(pooled1)?;
    let gamma_t = eta1_marg - eta0_marg;
    let row = |x: usize| -> Result<CollapsibilityRow<T>> {
        let eta0 = logit(pi0[x])?;
        let eta1 = logit(pi1[x])?;
        Ok(CollapsibilityRow {
            x: x as u8,
            eta0,
            eta1,
            beta_t: eta1 - eta0,
            pi0_x: pi0[x],
            pi1_x: pi1[x],
            pi0: pooled0,
            pi1: pooled1,
            eta0_marg,
            eta1_marg,
            gamma_t,
        })
    };
    Ok([row(0)?, row(1)?])
}

/// Marginal odds-ratio of `P(y=1 | do(t), x) = sigmoid(beta0(x) + beta_t t)`.
pub fn collapsibility_pipeline<T: Real>(
    beta0_of_x: [T; 2],
    beta_t: T,
    p_x1: T,
) -> Result<[CollapsibilityRow<T>; 2]> {
    let pi0 = [sigmoid(beta0_of_x[0]), sigmoid(beta0_of_x[1])];
    let pi1 = [
        sigmoid(beta0_of_x[0] + beta_t),
        sigmoid(beta0_of_x[1] + beta_t),
    ];
    let mut rows = collapsibility_from_probs(pi0, pi1, p_x1)?;
    // Keep the defining log odds exactly as given rather than round-tripped.
    for (row, b0) in rows.iter_mut().zip(beta0_of_x) {
        row.eta0 = b0;
        row.eta1 = b0 + beta_t;
        row.beta_t = beta_t;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgm::{build_joint, observational_conditional, CovariateCoding};
    use approx::assert_relative_eq;

    fn table1(beta_x: f64) -> ScmSpec<f64> {
        ScmSpec {
            beta_ut: 0.0,
            beta_uy: 0.0,
            x_coding: CovariateCoding::Centered,
            ..ScmSpec::with_covariate(1.0, beta_x)
        }
    }

    #[test]
    fn no_confounder_effect_means_plain_sigmoid() {
        let spec = ScmSpec {
            beta_uy: 0.0,
            ..ScmSpec::example1(10.0f64)
        };
        let it = interventional(&spec);
        for x in 0..2 {
            assert_relative_eq!(it.get(1, x), sigmoid(0.5), epsilon = 1e-15);
            assert_relative_eq!(it.get(0, x), sigmoid(-0.5), epsilon = 1e-15);
        }
    }

    #[test]
    fn example1_arm_is_average_of_strata() {
        let spec = ScmSpec::example1(10.0f64);
        let pi00 = spec.outcome_prob(0, 0, 0);
        let pi01 = spec.outcome_prob(0, 0, 1);
        assert_relative_eq!(
            interventional(&spec).get(0, 0),
            (pi00 + pi01) / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn randomization_oracle() {
        for alpha in [None, Some(0.2), Some(0.9)] {
            let spec = ScmSpec {
                alpha,
                ..ScmSpec::with_covariate(5.0f64, 1.2)
            };
            let rct = observational_conditional(&build_joint(&spec.randomized()).unwrap()).unwrap();
            let it = interventional(&spec);
            for t in 0..2 {
                for x in 0..2 {
                    assert_relative_eq!(rct[t][x], it.pi[t][x], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn cate_examples() {
        assert_eq!(
            true_cate(
                &ScmSpec {
                    beta_t: 0.0,
                    ..ScmSpec::with_covariate(3.0f64, 0.4)
                },
                1
            ),
            0.0
        );
        let a = table1(2.0);
        assert_relative_eq!(
            true_cate(&a, 0),
            sigmoid(-0.5) - sigmoid(-1.5),
            epsilon = 1e-15
        );
        assert!((true_cate(&a, 0) - 0.196).abs() < 1e-3);
        let b = table1(6.0);
        assert!((true_cate(&b, 1) - (0.971 - 0.924)).abs() < 1e-3);
    }

    #[test]
    fn marginal_log_or_examples() {
        let collapsible = table1(0.0);
        assert_relative_eq!(
            true_marginal_log_or(&collapsible).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert!((true_marginal_log_or(&table1(2.0)).unwrap() - 0.791).abs() < 5e-4);
        assert!((true_marginal_log_or(&table1(6.0)).unwrap() - 0.186).abs() < 5e-4);
    }

    #[test]
    fn implied_log_or_examples() {
        let p = ModelParams::new(0.3f64, 0.8, 0.0);
        assert_relative_eq!(
            implied_marginal_log_or(&p, [0.1, 0.9]).unwrap(),
            0.8,
            epsilon = 1e-14
        );
        let a = ModelParams::new(-1.5f64, 1.0, 2.0);
        assert!((implied_marginal_log_or(&a, [0.5, 0.5]).unwrap() - 0.791).abs() < 5e-4);
        let b = ModelParams::new(-3.5f64, 1.0, 6.0);
        assert!((implied_marginal_log_or(&b, [0.5, 0.5]).unwrap() - 0.186).abs() < 5e-4);
    }

    #[test]
    fn implied_log_or_rejects_bad_weights() {
        let p = ModelParams::new(0.0f64, 1.0, 1.0);
        assert!(implied_marginal_log_or(&p, [0.5, 0.6]).is_err());
        assert!(implied_marginal_log_or(&p, [-0.5, 1.5]).is_err());
    }

    #[test]
    fn empirical_matches_weighted() {
        let p = ModelParams::new(-0.4f64, 1.1, 1.7);
        let xs = [0u8, 1, 1, 0, 1, 1, 1, 0, 1, 1];
        let weighted = implied_marginal_log_or(&p, [0.3, 0.7]).unwrap();
        assert_relative_eq!(
            implied_marginal_log_or_empirical(&p, &xs).unwrap(),
            weighted,
            epsilon = 1e-14
        );
        assert_eq!(
            implied_marginal_log_or_empirical(&p, &[]),
            Err(Error::EmptySample)
        );
    }

    #[test]
    fn pipeline_table_one() {
        let a = collapsibility_pipeline([-1.5f64, 0.5], 1.0, 0.5).unwrap();
        let close = |v: f64, want: f64| assert!((v - want).abs() < 5e-4, "{v} vs {want}");
        close(a[0].pi0_x, 0.182);
        close(a[0].pi1_x, 0.378);
        close(a[1].pi0_x, 0.622);
        close(a[1].pi1_x, 0.818);
        close(a[0].pi0, 0.402);
        close(a[0].pi1, 0.598);
        close(a[0].eta0_marg, -0.395);
        close(a[0].eta1_marg, 0.395);
        close(a[0].gamma_t, 0.791);
        assert_eq!(a[0].gamma_t, a[0].eta1_marg - a[0].eta0_marg);
        let b = collapsibility_pipeline([-3.5f64, 2.5], 1.0, 0.5).unwrap();
        close(b[0].pi0, 0.477);
        close(b[0].pi1, 0.523);
        close(b[1].gamma_t, 0.186);
    }

    #[test]
    fn pipeline_extreme_example() {
        let rows = collapsibility_from_probs([0.01f64, 0.98], [0.02, 0.99], 0.5).unwrap();
        assert_relative_eq!(rows[0].pi0, 0.495, epsilon = 1e-12);
        assert_relative_eq!(rows[0].pi1, 0.505, epsilon = 1e-12);
        assert!((rows[0].gamma_t.exp() - 1.04).abs() < 1e-3);
        for row in rows {
            assert!((row.beta_t.exp() - 2.02).abs() < 1e-2);
        }
    }

    #[test]
    fn pipeline_rejects_degenerate_share() {
        assert!(collapsibility_pipeline([0.0f64, 1.0], 1.0, 1.0).is_err());
    }
}
