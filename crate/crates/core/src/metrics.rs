//! Precision in estimating heterogeneous effects (PEHE), weighted exactly by `P(x)`.

use crate::causal::interventional;
use crate::dgm::{ScmSpec, BIN};
use crate::error::{Error, Result};
use crate::estimators::FitResult;
use crate::scalar::Real;

/// Predicted treatment effect on the probability scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatePrediction<T> {
    PerX([T; 2]),
    /// One effect for everyone, as in the ATE baseline.
    Constant(T),
}

impl<T: Real> CatePrediction<T> {
    pub fn at(&self, x: u8) -> T {
        match self {
            CatePrediction::PerX(v) => v[x as usize],
            CatePrediction::Constant(c) => *c,
        }
    }

    pub fn from_fit(fit: &FitResult<T>) -> Self {
        CatePrediction::PerX([predicted_cate(fit, 0), predicted_cate(fit, 1)])
    }
}

pub fn predicted_cate<T: Real>(fit: &FitResult<T>, x: u8) -> T {
    fit.params.cate(x)
}

/// `sqrt(sum_x P(x) (CATE(x) - pred(x))^2)`.
pub fn pehe<T: Real>(pred: &CatePrediction<T>, spec: &ScmSpec<T>) -> T {
    let truth = interventional(spec);
    pehe_weighted(
        pred,
        [truth.cate(0), truth.cate(1)],
        [spec.p_x_of(0), spec.p_x_of(1)],
    )
}

/// PEHE against an explicit true effect per stratum and stratum weights.
pub fn pehe_weighted<T: Real>(pred: &CatePrediction<T>, truth: [T; 2], x_weights: [T; 2]) -> T {
    BIN.iter()
        .fold(T::zero(), |acc, &x| {
            let d = truth[x as usize] - pred.at(x);
            acc + x_weights[x as usize] * d * d
        })
        .sqrt()
}

/// Sample version: root mean square over the listed covariate values.
pub fn pehe_sample<T: Real>(pred: &CatePrediction<T>, spec: &ScmSpec<T>, xs: &[u8]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let truth = interventional(spec);
    let n = T::from_usize(xs.len()).expect("sample size");
    let sum = xs.iter().fold(T::zero(), |acc, &x| {
        let d = truth.cate(x) - pred.at(x);
        acc + d * d
    });
    Ok((sum / n).sqrt())
}
