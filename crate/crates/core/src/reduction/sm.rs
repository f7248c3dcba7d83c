//! Slow-manifold model: a static polynomial input-to-observable map fitted
//! from forced trajectories, with a calibrated input range and a dense
//! inverse interpolant for feedforward use.
//!
//! The regression runs on inputs affinely normalized to [-1, 1] (raw
//! monomials at order 7 over volt-scale ranges are numerically hopeless)
//! and the fitted coefficients are expanded exactly back to raw input
//! units, which is what the model stores and serializes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{univariate, PolynomialMap};
use crate::scalar::Real;
use crate::signals::TimeSeries;

use super::regress::weighted_lstsq;

/// Number of nodes in the dense inverse table.
pub const INVERSE_TABLE_POINTS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct SmDiagnostics<T> {
    /// Condition number of the normalized design matrix.
    pub condition: T,
    pub residual_rel: T,
    pub monotone: bool,
    pub increasing: bool,
    pub min_abs_slope: T,
    pub max_abs_slope: T,
    /// Worst-case |g(g^-1(y)) - y| bound from table resolution and slope
    /// spread; absent when the fit is not monotone.
    pub roundtrip_bound: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct SlowManifoldModel<T> {
    forward: PolynomialMap<T>,
    input_lo: T,
    input_hi: T,
    inverse_u: Vec<T>,
    inverse_g: Vec<T>,
    diagnostics: SmDiagnostics<T>,
}

impl<T: Real> SlowManifoldModel<T> {
    pub fn forward(&self) -> &PolynomialMap<T> {
        &self.forward
    }

    pub fn input_range(&self) -> (T, T) {
        (self.input_lo, self.input_hi)
    }

    /// Image of the calibrated input range, low end first.
    pub fn image(&self) -> (T, T) {
        let a = self.inverse_g[0];
        let b = self.inverse_g[self.inverse_g.len() - 1];
        (a.min(b), a.max(b))
    }

    pub fn diagnostics(&self) -> &SmDiagnostics<T> {
        &self.diagnostics
    }

    /// Pointwise, memoryless evaluation. Inputs outside the calibrated
    /// range are clipped; the count of clipped samples is returned.
    pub fn predict(&self, input: &TimeSeries<T>) -> Result<(TimeSeries<T>, usize)> {
        if !input.is_scalar() {
            return Err(Error::DimensionMismatch("input must be scalar".into()));
        }
        let mut clipped = 0usize;
        let values: Vec<T> = input
            .values()
            .iter()
            .map(|&u| {
                let c = u.clamp(self.input_lo, self.input_hi);
                if c != u {
                    clipped += 1;
                }
                self.forward.evaluate_scalar(c)
            })
            .collect();
        Ok((TimeSeries::scalar(input.t0(), input.dt(), values)?, clipped))
    }

    /// Invert the forward map by linear interpolation on the dense table.
    /// The target is clipped to the calibrated image first.
    pub fn invert(&self, target: T) -> Result<T> {
        if !self.diagnostics.monotone {
            return Err(Error::NonMonotone(
                "inversion refused: forward map is not strictly monotone".into(),
            ));
        }
        let n = self.inverse_g.len();
        let increasing = self.diagnostics.increasing;
        let (g_lo, g_hi) = self.image();
        let y = target.clamp(g_lo, g_hi);
        // binary search for the bracketing segment in table order
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            let above = if increasing {
                self.inverse_g[mid] <= y
            } else {
                self.inverse_g[mid] >= y
            };
            if above {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ga, gb) = (self.inverse_g[lo], self.inverse_g[hi]);
        let (ua, ub) = (self.inverse_u[lo], self.inverse_u[hi]);
        if ga == gb {
            return Ok(ua);
        }
        Ok(ua + (y - ga) / (gb - ga) * (ub - ua))
    }
}

/// Fit a slow-manifold polynomial of the given order to pooled
/// (input, observable) trajectory pairs.
pub fn fit_slow_manifold<T: Real>(
    pairs: &[(TimeSeries<T>, TimeSeries<T>)],
    order: u32,
) -> Result<SlowManifoldModel<T>> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter("need at least one trajectory pair".into()));
    }
    if order < 1 {
        return Err(Error::InvalidParameter("polynomial order must be at least 1".into()));
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (u, y) in pairs {
        if !u.is_scalar() || !y.is_scalar() {
            return Err(Error::DimensionMismatch("trajectory pairs must be scalar".into()));
        }
        if u.len() != y.len() {
            return Err(Error::DimensionMismatch(
                "input and observable lengths differ".into(),
            ));
        }
        inputs.extend_from_slice(u.values());
        outputs.extend_from_slice(y.values());
    }
    let lo = inputs.iter().copied().fold(inputs[0], T::min);
    let hi = inputs.iter().copied().fold(inputs[0], T::max);
    let span = hi - lo;
    if !(span > T::zero()) {
        return Err(Error::InvalidParameter("degenerate input range".into()));
    }

    // regression in normalized coordinates
    let a = -(lo + hi) / span;
    let b = T::lit(2.0) / span;
    let f = order as usize + 1;
    let design = DMatrix::from_fn(inputs.len(), f, |i, j| (a + b * inputs[i]).powi(j as i32));
    let target = DMatrix::from_fn(outputs.len(), 1, |i, _| outputs[i]);
    let (coeffs, diag) = weighted_lstsq(&design, &target, None)?;
    let normalized: Vec<T> = (0..f).map(|i| coeffs[(i, 0)]).collect();
    let raw = univariate::affine_substitute(&normalized, a, b);
    let forward = PolynomialMap::from_univariate(&raw);

    // monotonicity on a dense grid of the calibrated range
    let slope_coeffs = univariate::derivative(&raw);
    let check_points = 4 * INVERSE_TABLE_POINTS;
    let mut min_slope = T::max_value().unwrap();
    let mut max_slope = T::zero();
    let mut positive = 0usize;
    let mut negative = 0usize;
    for i in 0..check_points {
        let u = lo + span * T::of_usize(i) / T::of_usize(check_points - 1);
        let s = univariate::horner(&slope_coeffs, u);
        if s > T::zero() {
            positive += 1;
        } else if s < T::zero() {
            negative += 1;
        }
        min_slope = min_slope.min(s.abs());
        max_slope = max_slope.max(s.abs());
    }
    let monotone = (positive == check_points) || (negative == check_points);
    let increasing = positive >= negative;

    // dense inverse table over the calibrated range, evaluated through the
    // same path as predict()
    let inverse_u: Vec<T> = (0..INVERSE_TABLE_POINTS)
        .map(|i| lo + span * T::of_usize(i) / T::of_usize(INVERSE_TABLE_POINTS - 1))
        .collect();
    let inverse_g: Vec<T> = inverse_u.iter().map(|&u| forward.evaluate_scalar(u)).collect();

    let roundtrip_bound = if monotone && min_slope > T::zero() {
        let image_span = (inverse_g[INVERSE_TABLE_POINTS - 1] - inverse_g[0]).abs();
        Some(image_span / T::of_usize(INVERSE_TABLE_POINTS - 1) * (max_slope / min_slope))
    } else {
        None
    };

    Ok(SlowManifoldModel {
        forward,
        input_lo: lo,
        input_hi: hi,
        inverse_u,
        inverse_g,
        diagnostics: SmDiagnostics {
            condition: diag.condition,
            residual_rel: diag.residual_rel,
            monotone,
            increasing,
            min_abs_slope: min_slope,
            max_abs_slope: max_slope,
            roundtrip_bound,
        },
    })
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real", deny_unknown_fields)]
struct SmFile<T> {
    schema: String,
    model: SlowManifoldModel<T>,
}

const SM_SCHEMA: &str = "ssmred.sm.v1";

pub fn sm_to_json<T: Real>(model: &SlowManifoldModel<T>) -> Result<String> {
    serde_json::to_string_pretty(&SmFile {
        schema: SM_SCHEMA.to_string(),
        model: model.clone(),
    })
    .map_err(|e| Error::Serialization(e.to_string()))
}

pub fn sm_from_json<T: Real>(json: &str) -> Result<SlowManifoldModel<T>> {
    let file: SmFile<T> =
        serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
    if file.schema != SM_SCHEMA {
        return Err(Error::Serialization(format!(
            "unsupported schema `{}`, expected `{SM_SCHEMA}`",
            file.schema
        )));
    }
    Ok(file.model)
}
