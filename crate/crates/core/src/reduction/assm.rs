//! Input-indexed family of local reduced models with piecewise-linear
//! coefficient interpolation, and prediction under slowly varying inputs.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{univariate, PolynomialMap};
use crate::scalar::Real;
use crate::signals::TimeSeries;

use super::local::{EmbeddingSpec, LocalSsmModel};

/// Largest angle tolerated between a shared tangent and each local tangent.
const TRANSVERSALITY_LIMIT_DEG: f64 = 30.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct AdiabaticSsmModel<T> {
    embedding: EmbeddingSpec,
    shared_tangent: bool,
    /// Sorted by strictly increasing input level.
    locals: Vec<LocalSsmModel<T>>,
}

/// Interpolated local model at a query input level.
#[derive(Clone, Debug)]
pub struct LocalEval<T> {
    pub fixed_point: Vec<T>,
    /// d x0 / du of the piecewise-linear fixed-point interpolant on the
    /// segment containing the query.
    pub fixed_point_slope: Vec<T>,
    pub tangent: Vec<Vec<T>>,
    pub parametrization: PolynomialMap<T>,
    pub reduced_dynamics: PolynomialMap<T>,
}

/// Assemble sorted locals into an interpolated family.
///
/// With `shared_tangent`, all locals are re-expressed in the tangent of
/// the median-level local (reduced coordinate `eta_s = V_s^T xi`), which
/// for d = 1 is an exact univariate change of polynomial coordinates; the
/// shared plane must stay within 30 degrees of every local tangent.
pub fn build_assm<T: Real>(
    locals: Vec<LocalSsmModel<T>>,
    embedding: EmbeddingSpec,
    shared_tangent: bool,
) -> Result<AdiabaticSsmModel<T>> {
    if locals.len() < 2 {
        return Err(Error::Model("need at least two local models".into()));
    }
    for l in &locals {
        if !l.input_level.is_finite() {
            return Err(Error::Model("non-finite input level".into()));
        }
        if l.fixed_point.len() != embedding.window
            || l.tangent.len() != embedding.reduced_dim
            || l.parametrization.input_dim() != embedding.reduced_dim
            || l.parametrization.output_dim() != embedding.window
            || l.reduced_dynamics.input_dim() != embedding.reduced_dim
            || l.reduced_dynamics.output_dim() != embedding.reduced_dim
        {
            return Err(Error::Model("local model shape differs from the embedding spec".into()));
        }
    }
    let mut locals = locals;
    locals.sort_by(|a, b| {
        a.input_level
            .partial_cmp(&b.input_level)
            .expect("input levels are finite")
    });
    for pair in locals.windows(2) {
        if !(pair[1].input_level > pair[0].input_level) {
            return Err(Error::Model(format!(
                "duplicate input level {}",
                pair[0].input_level
            )));
        }
        // identical coefficient layouts are required for interpolation
        PolynomialMap::interpolate(&pair[0].parametrization, &pair[1].parametrization, T::zero())?;
        PolynomialMap::interpolate(&pair[0].reduced_dynamics, &pair[1].reduced_dynamics, T::zero())?;
    }

    if shared_tangent {
        if embedding.reduced_dim != 1 {
            return Err(Error::Model(
                "shared tangent re-expression is supported for reduced dimension 1".into(),
            ));
        }
        let shared: Vec<T> = locals[locals.len() / 2].tangent[0].clone();
        let limit = T::lit(TRANSVERSALITY_LIMIT_DEG.to_radians().cos());
        let max_order = locals[0].parametrization.max_order() as usize;
        let dyn_order = locals[0].reduced_dynamics.max_order() as usize;
        for local in locals.iter_mut() {
            let own = &local.tangent[0];
            let cos: T = shared.iter().zip(own).map(|(&a, &b)| a * b).sum();
            if cos.abs() < limit {
                return Err(Error::Model(format!(
                    "tangent at level {} spans {:.1} degrees from the shared plane",
                    local.input_level,
                    cos.abs().acos() * T::lit(180.0) / T::pi()
                )));
            }
            // eta_s = phi(eta) with phi_k = <V_s, H_k>
            let p = local.fixed_point.len();
            let mut phi = vec![T::zero(); max_order + 1];
            let mut rows: Vec<Vec<T>> = vec![vec![T::zero(); max_order + 1]; p];
            for (idx, coeffs) in local.parametrization.coefficients() {
                let k = idx.total_degree() as usize;
                phi[k] = shared.iter().zip(coeffs).map(|(&a, &b)| a * b).sum();
                for i in 0..p {
                    rows[i][k] = coeffs[i];
                }
            }
            let psi = univariate::invert_series(&phi, max_order);
            let mut new_param = PolynomialMap::new(1, p);
            let mut new_rows: Vec<Vec<T>> = Vec::with_capacity(p);
            for row in &rows {
                new_rows.push(univariate::compose(row, &psi, max_order));
            }
            for k in 1..=max_order {
                new_param.insert(
                    crate::poly::MultiIndex::univariate(k as u32),
                    new_rows.iter().map(|r| r[k]).collect(),
                );
            }
            // eta_s' = phi'(eta) r(eta), re-expressed through eta = psi(eta_s)
            let r_old = local.reduced_dynamics.to_univariate();
            let phi_prime = univariate::derivative(&phi);
            let mut scaled = univariate::multiply(&phi_prime, &r_old);
            scaled.truncate(dyn_order + 1);
            let new_r = univariate::compose(&scaled, &psi, dyn_order);
            let mut new_dyn = PolynomialMap::new(1, 1);
            for (k, &c) in new_r.iter().enumerate().skip(1) {
                new_dyn.insert(crate::poly::MultiIndex::univariate(k as u32), vec![c]);
            }
            local.parametrization = new_param;
            local.reduced_dynamics = new_dyn;
            local.tangent = vec![shared.clone()];
        }
    }

    align_bases(&mut locals, embedding.reduced_dim);

    Ok(AdiabaticSsmModel {
        embedding,
        shared_tangent,
        locals,
    })
}

/// Rotate every local's tangent basis onto its lower neighbour's
/// (orthogonal Procrustes), transforming the polynomial coefficients with
/// it. SVD bases are only defined up to in-plane rotation and sign, so
/// without alignment the coefficient interpolants are meaningless.
fn align_bases<T: Real>(locals: &mut [LocalSsmModel<T>], d: usize) {
    for i in 1..locals.len() {
        let prev = tangent_matrix(&locals[i - 1], d);
        let own = tangent_matrix(&locals[i], d);
        // maximize tr(Q^T V_i^T V_{i-1}) over orthogonal Q
        let c = own.transpose() * &prev;
        let svd = c.svd(true, true);
        let q = svd.u.as_ref().expect("svd with u") * svd.v_t.as_ref().expect("svd with v_t");
        let rotated = &own * &q;
        let local = &mut locals[i];
        // eta = Q eta': substitute into the charts, rotate the dynamics
        local.parametrization = local.parametrization.substitute_linear_input(&q);
        local.reduced_dynamics = local
            .reduced_dynamics
            .substitute_linear_input(&q)
            .transform_output(&q.transpose());
        local.tangent = (0..d)
            .map(|j| rotated.column(j).iter().copied().collect())
            .collect();
    }
}

fn tangent_matrix<T: Real>(local: &LocalSsmModel<T>, d: usize) -> DMatrix<T> {
    let p = local.fixed_point.len();
    DMatrix::from_fn(p, d, |i, j| local.tangent[j][i])
}

impl<T: Real> AdiabaticSsmModel<T> {
    pub fn embedding(&self) -> EmbeddingSpec {
        self.embedding
    }

    pub fn shared_tangent(&self) -> bool {
        self.shared_tangent
    }

    pub fn locals(&self) -> &[LocalSsmModel<T>] {
        &self.locals
    }

    pub fn input_range(&self) -> (T, T) {
        (
            self.locals[0].input_level,
            self.locals[self.locals.len() - 1].input_level,
        )
    }

    /// Piecewise-linear interpolation of the fixed point, tangent and all
    /// polynomial coefficients at an input level inside the grid.
    pub fn local_at(&self, input: T) -> Result<LocalEval<T>> {
        let (lo, hi) = self.input_range();
        let tol = T::lit(1e-9) * (hi - lo);
        if input < lo - tol || input > hi + tol {
            return Err(Error::Model(format!(
                "input {input} outside the model grid [{lo}, {hi}]"
            )));
        }
        let u = input.clamp(lo, hi);
        let seg = match self
            .locals
            .binary_search_by(|l| l.input_level.partial_cmp(&u).expect("finite levels"))
        {
            Ok(i) => i.min(self.locals.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.locals.len() - 2),
        };
        let (a, b) = (&self.locals[seg], &self.locals[seg + 1]);
        let w = (u - a.input_level) / (b.input_level - a.input_level);

        let fixed_point: Vec<T> = a
            .fixed_point
            .iter()
            .zip(&b.fixed_point)
            .map(|(&x, &y)| x + (y - x) * w)
            .collect();
        let du = b.input_level - a.input_level;
        let fixed_point_slope: Vec<T> = a
            .fixed_point
            .iter()
            .zip(&b.fixed_point)
            .map(|(&x, &y)| (y - x) / du)
            .collect();
        let d = self.embedding.reduced_dim;
        let p = self.embedding.window;
        // interpolate the tangent columns, then re-orthonormalize
        let mut tangent = DMatrix::<T>::zeros(p, d);
        for j in 0..d {
            let col = DVector::from_fn(p, |i, _| {
                a.tangent[j][i] + (b.tangent[j][i] - a.tangent[j][i]) * w
            });
            tangent.set_column(j, &col);
        }
        for j in 0..d {
            let mut col: DVector<T> = tangent.column(j).into();
            for k in 0..j {
                let prev: DVector<T> = tangent.column(k).into();
                let proj = prev.dot(&col);
                col -= prev * proj;
            }
            let norm = col.norm();
            if norm == T::zero() {
                return Err(Error::Model("degenerate interpolated tangent".into()));
            }
            col /= norm;
            tangent.set_column(j, &col);
        }

        Ok(LocalEval {
            fixed_point,
            fixed_point_slope,
            tangent: (0..d)
                .map(|j| tangent.column(j).iter().copied().collect())
                .collect(),
            parametrization: PolynomialMap::interpolate(&a.parametrization, &b.parametrization, w)?,
            reduced_dynamics: PolynomialMap::interpolate(
                &a.reduced_dynamics,
                &b.reduced_dynamics,
                w,
            )?,
        })
    }
}

/// Predict the observable under a sampled input: embed the initial window,
/// project to reduced coordinates, integrate the interpolated reduced
/// dynamics with RK4, reconstruct through the interpolated parametrization.
///
/// With `transport`, the reduced flow includes the exact shifted-frame
/// coupling `-V(u)^T dx0/du u'` that drives the state off the fixed-point
/// curve as the input moves; without it the reduced state of an
/// equilibrium start stays at zero and the prediction collapses onto the
/// interpolated fixed-point curve.
pub fn predict_assm<T: Real>(
    model: &AdiabaticSsmModel<T>,
    input: &TimeSeries<T>,
    initial_window: &[T],
    substeps: usize,
    transport: bool,
) -> Result<TimeSeries<T>> {
    if !input.is_scalar() {
        return Err(Error::DimensionMismatch("input must be scalar".into()));
    }
    if substeps == 0 {
        return Err(Error::InvalidParameter("need at least one substep".into()));
    }
    let spec = model.embedding();
    let needed = spec.required_window();
    if initial_window.len() < needed {
        return Err(Error::Model(format!(
            "initial window of {} samples is shorter than the embedding ({needed})",
            initial_window.len()
        )));
    }
    let p = spec.window;
    let d = spec.reduced_dim;

    let u0 = input.value(0);
    let local0 = model.local_at(u0)?;
    let mut eta = vec![T::zero(); d];
    for i in 0..d {
        eta[i] = (0..p)
            .map(|j| local0.tangent[i][j] * (initial_window[j * spec.delay] - local0.fixed_point[j]))
            .sum();
    }

    let n = input.len();
    let dt = input.dt() / T::of_usize(substeps);
    let mut observable = Vec::with_capacity(n);
    let mut rate = vec![T::zero(); d];
    let mut stage = vec![T::zero(); d];
    let mut k = vec![vec![T::zero(); d]; 4];

    for j in 0..n {
        let u_j = input.value(j);
        let local = model.local_at(u_j)?;
        let lift = local.parametrization.evaluate(&eta);
        observable.push(local.fixed_point[0] + lift[0]);

        if j + 1 < n {
            let u_next = input.value(j + 1);
            let u_rate = (u_next - u_j) / input.dt();
            for s in 0..substeps {
                let frac0 = T::of_usize(s) / T::of_usize(substeps);
                let frac1 = T::of_usize(s + 1) / T::of_usize(substeps);
                let u_a = u_j + (u_next - u_j) * frac0;
                let u_b = u_j + (u_next - u_j) * frac1;
                let u_m = (u_a + u_b) * T::lit(0.5);
                let half = T::lit(0.5);

                let eval = |u: T, eta: &[T], out: &mut [T]| -> Result<()> {
                    let local = model.local_at(u)?;
                    local.reduced_dynamics.evaluate_into(eta, out);
                    if transport {
                        for (i, o) in out.iter_mut().enumerate() {
                            let coupling: T = local.tangent[i]
                                .iter()
                                .zip(&local.fixed_point_slope)
                                .map(|(&v, &s)| v * s)
                                .sum();
                            *o -= coupling * u_rate;
                        }
                    }
                    Ok(())
                };
                eval(u_a, &eta, &mut rate)?;
                k[0].copy_from_slice(&rate);
                for i in 0..d {
                    stage[i] = eta[i] + half * dt * k[0][i];
                }
                eval(u_m, &stage, &mut rate)?;
                k[1].copy_from_slice(&rate);
                for i in 0..d {
                    stage[i] = eta[i] + half * dt * k[1][i];
                }
                eval(u_m, &stage, &mut rate)?;
                k[2].copy_from_slice(&rate);
                for i in 0..d {
                    stage[i] = eta[i] + dt * k[2][i];
                }
                eval(u_b, &stage, &mut rate)?;
                k[3].copy_from_slice(&rate);
                for i in 0..d {
                    let two = T::lit(2.0);
                    eta[i] += dt * T::lit(1.0 / 6.0)
                        * (k[0][i] + two * k[1][i] + two * k[2][i] + k[3][i]);
                }
            }
        }
    }
    TimeSeries::scalar(input.t0(), input.dt(), observable)
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real", deny_unknown_fields)]
struct AssmFile<T> {
    schema: String,
    model: AdiabaticSsmModel<T>,
}

const ASSM_SCHEMA: &str = "ssmred.assm.v1";

pub fn assm_to_json<T: Real>(model: &AdiabaticSsmModel<T>) -> Result<String> {
    serde_json::to_string_pretty(&AssmFile {
        schema: ASSM_SCHEMA.to_string(),
        model: model.clone(),
    })
    .map_err(|e| Error::Serialization(e.to_string()))
}

pub fn assm_from_json<T: Real>(json: &str) -> Result<AdiabaticSsmModel<T>> {
    let file: AssmFile<T> =
        serde_json::from_str(json).map_err(|e| Error::Serialization(e.to_string()))?;
    if file.schema != ASSM_SCHEMA {
        return Err(Error::Serialization(format!(
            "unsupported schema `{}`, expected `{ASSM_SCHEMA}`",
            file.schema
        )));
    }
    Ok(file.model)
}
