//! Local reduced models at a frozen input level, fitted from decay data.
//!
//! Pipeline per input level: settle check, delay embedding, fixed point
//! from the settled tail, tangent space from the dominant directions of
//! the shifted data, reduced coordinates by orthogonal projection, then
//! least-squares polynomial fits of the manifold parametrization (orders
//! 2..m, the linear block is the tangent itself) and of the reduced
//! dynamics (orders 1..r, derivatives by smoothed central differences).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{multi_indices, MultiIndex, PolynomialMap};
use crate::scalar::Real;
use crate::signals::{TimeSeries, SETTLE_RATIO};

use super::embed::delay_embed;
use super::regress::weighted_lstsq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSpec {
    /// Number of delayed copies (embedding dimension p).
    pub window: usize,
    /// Delay between copies, in samples.
    pub delay: usize,
    /// Dimension d of the reduced model.
    pub reduced_dim: usize,
}

impl Default for EmbeddingSpec {
    fn default() -> Self {
        EmbeddingSpec {
            window: 5,
            delay: 1,
            reduced_dim: 1,
        }
    }
}

impl EmbeddingSpec {
    /// Samples needed to embed a single point.
    pub fn required_window(&self) -> usize {
        (self.window - 1) * self.delay + 1
    }
}

#[derive(Clone, Debug)]
pub struct LocalFitConfig<T> {
    pub embedding: EmbeddingSpec,
    /// Polynomial order m of the parametrization.
    pub parametrization_order: u32,
    /// Polynomial order r of the reduced dynamics.
    pub dynamics_order: u32,
    /// Leading fraction of each decay dropped before regression; the data
    /// off the slow manifold would otherwise bias the fits.
    pub transient_trim: T,
    /// Moving-average window for derivative estimation (samples, odd).
    pub smoothing_window: usize,
    /// Regression weight of the first/last three samples of each
    /// trajectory, where the shrunk smoother and one-sided differences
    /// distort the rate estimates. Zero excludes them.
    pub endpoint_weight: T,
}

impl<T: Real> Default for LocalFitConfig<T> {
    fn default() -> Self {
        LocalFitConfig {
            embedding: EmbeddingSpec::default(),
            parametrization_order: 3,
            dynamics_order: 3,
            transient_trim: T::lit(0.6),
            smoothing_window: 5,
            endpoint_weight: T::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct FitDiagnostics<T> {
    pub parametrization_residual: T,
    pub parametrization_condition: T,
    pub dynamics_residual: T,
    pub dynamics_condition: T,
    /// Singular values of the pooled shifted data, descending.
    pub singular_values: Vec<T>,
}

/// Reduced model of the attracting manifold at one frozen input level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: crate::scalar::Real")]
pub struct LocalSsmModel<T> {
    pub input_level: T,
    /// Embedded-space fixed point (length p).
    pub fixed_point: Vec<T>,
    /// Orthonormal tangent basis, d columns of length p.
    pub tangent: Vec<Vec<T>>,
    /// Manifold parametrization, d -> p, orders 1..m; the order-1 block
    /// equals the tangent basis.
    pub parametrization: PolynomialMap<T>,
    /// Reduced dynamics, d -> d, orders 1..r.
    pub reduced_dynamics: PolynomialMap<T>,
    pub diagnostics: FitDiagnostics<T>,
}

impl<T: Real> LocalSsmModel<T> {
    pub fn tangent_matrix(&self) -> DMatrix<T> {
        let p = self.fixed_point.len();
        let d = self.tangent.len();
        DMatrix::from_fn(p, d, |i, j| self.tangent[j][i])
    }
}

/// Symmetric shrinking-window moving average (full width `window` in the
/// interior, shorter near the edges).
fn moving_average<T: Real>(values: &[T], window: usize) -> Vec<T> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|j| {
            let h = half.min(j).min(n - 1 - j);
            let slice = &values[j - h..=j + h];
            slice.iter().copied().sum::<T>() / T::of_usize(slice.len())
        })
        .collect()
}

/// Fixed-point estimate from the settled tail: Shanks extrapolation of the
/// means of the last three 5% windows, which cancels the leading
/// exponential of the residual transient exactly. Falls back to the plain
/// tail mean when the window means have already converged.
fn tail_fixed_point<T: Real>(values: &[T]) -> T {
    let n = values.len();
    let w = ((n as f64 * 0.05).round() as usize).clamp(1, n / 3);
    let mean = |lo: usize, hi: usize| -> T {
        values[lo..hi].iter().copied().sum::<T>() / T::of_usize(hi - lo)
    };
    let m3 = mean(n - w, n);
    if n < 3 * w {
        return m3;
    }
    let m1 = mean(n - 3 * w, n - 2 * w);
    let m2 = mean(n - 2 * w, n - w);
    let denom = m1 + m3 - m2 - m2;
    let scale = m1.abs().max(m2.abs()).max(m3.abs()).max(T::lit(1e-300));
    if denom.abs() <= T::lit(1e-9) * scale {
        return m3;
    }
    (m1 * m3 - m2 * m2) / denom
}

fn settle_check<T: Real>(series: &TimeSeries<T>) -> Result<()> {
    let n = series.len();
    let tail = (n as f64 * 0.05).round().max(1.0) as usize;
    let tail_mean =
        series.values()[n - tail..].iter().copied().sum::<T>() / T::of_usize(tail);
    let peak = series
        .values()
        .iter()
        .map(|&v| (v - tail_mean).abs())
        .fold(T::zero(), T::max);
    if peak == T::zero() {
        return Err(Error::NotSettled("decay has no transient content".into()));
    }
    let terminal = (series.value(n - 1) - tail_mean).abs();
    if terminal > T::lit(SETTLE_RATIO) * peak {
        return Err(Error::NotSettled(format!(
            "terminal deviation {terminal} above {SETTLE_RATIO} of peak {peak}"
        )));
    }
    Ok(())
}

/// Fit a local reduced model from one or more decays recorded at the same
/// constant input level.
pub fn fit_local_ssm<T: Real>(
    decays: &[TimeSeries<T>],
    input_level: T,
    cfg: &LocalFitConfig<T>,
) -> Result<LocalSsmModel<T>> {
    let spec = cfg.embedding;
    if decays.is_empty() {
        return Err(Error::InvalidParameter("need at least one decay".into()));
    }
    if spec.reduced_dim == 0 || spec.reduced_dim > spec.window {
        return Err(Error::InvalidParameter(
            "reduced dimension must lie in 1..=window".into(),
        ));
    }
    if cfg.parametrization_order < 1 || cfg.dynamics_order < 1 {
        return Err(Error::InvalidParameter("polynomial orders must be at least 1".into()));
    }
    if !(cfg.transient_trim >= T::zero() && cfg.transient_trim < T::one()) {
        return Err(Error::InvalidParameter("transient trim must lie in [0, 1)".into()));
    }
    let dt = decays[0].dt();
    for d in decays {
        if !d.is_scalar() {
            return Err(Error::DimensionMismatch("decays must be scalar".into()));
        }
        if d.dt() != dt {
            return Err(Error::DimensionMismatch("decays must share the sample period".into()));
        }
        settle_check(d)?;
    }

    let p = spec.window;
    let d = spec.reduced_dim;

    // embed; the embedded fixed point repeats the scalar settled value
    let embedded: Vec<DMatrix<T>> = decays
        .iter()
        .map(|s| delay_embed(s, p, spec.delay))
        .collect::<Result<_>>()?;
    let settled = decays
        .iter()
        .map(|s| tail_fixed_point(s.values()))
        .sum::<T>()
        / T::of_usize(decays.len());
    let fixed_point = DVector::<T>::from_element(p, settled);

    // shift and trim the leading transient
    let mut shifted: Vec<DMatrix<T>> = Vec::with_capacity(embedded.len());
    for x in &embedded {
        let cols = x.ncols();
        let start = (T::of_usize(cols) * cfg.transient_trim)
            .floor()
            .to_usize()
            .unwrap();
        let kept = cols - start;
        if kept < p.max(8) {
            return Err(Error::InvalidParameter(format!(
                "only {kept} samples left after trimming; shorten the trim or lengthen the decay"
            )));
        }
        let mut m = DMatrix::zeros(p, kept);
        for j in 0..kept {
            m.set_column(j, &(x.column(start + j) - &fixed_point));
        }
        shifted.push(m);
    }

    // tangent basis: dominant eigenvectors of the pooled Gram matrix
    let mut gram = DMatrix::<T>::zeros(p, p);
    for m in &shifted {
        gram += m * m.transpose();
    }
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });
    let singular_values: Vec<T> = order
        .iter()
        .map(|&i| eig.eigenvalues[i].max(T::zero()).sqrt())
        .collect();
    let mut tangent = DMatrix::<T>::zeros(p, d);
    for (col, &i) in order.iter().take(d).enumerate() {
        let mut v: DVector<T> = eig.eigenvectors.column(i).into();
        // deterministic sign: largest-magnitude component positive
        let mut pivot = 0usize;
        for k in 1..p {
            if v[k].abs() > v[pivot].abs() {
                pivot = k;
            }
        }
        if v[pivot] < T::zero() {
            v.neg_mut();
        }
        tangent.set_column(col, &v);
    }

    // reduced coordinates per trajectory
    let etas: Vec<DMatrix<T>> = shifted.iter().map(|m| tangent.transpose() * m).collect();
    let total_cols: usize = etas.iter().map(|e| e.ncols()).sum();

    // parametrization: regress the off-tangent residual on orders 2..m
    let m_order = cfg.parametrization_order;
    let param_indices = multi_indices(d, 2, m_order);
    let mut parametrization = PolynomialMap::new(d, p);
    for j in 0..d {
        let mut unit = vec![0u32; d];
        unit[j] = 1;
        parametrization.insert(MultiIndex(unit), tangent.column(j).iter().copied().collect());
    }
    let param_condition = if param_indices.is_empty() {
        T::one()
    } else {
        let mut design = DMatrix::zeros(total_cols, param_indices.len());
        let mut target = DMatrix::zeros(total_cols, p);
        let mut row = 0usize;
        for (m, e) in shifted.iter().zip(&etas) {
            for j in 0..e.ncols() {
                let eta: Vec<T> = e.column(j).iter().copied().collect();
                for (c, idx) in param_indices.iter().enumerate() {
                    design[(row, c)] = monomial(&eta, idx);
                }
                let resid = m.column(j) - &tangent * e.column(j);
                for i in 0..p {
                    target[(row, i)] = resid[i];
                }
                row += 1;
            }
        }
        let (coeffs, diag) = weighted_lstsq(&design, &target, None)?;
        for (c, idx) in param_indices.iter().enumerate() {
            parametrization.insert(idx.clone(), coeffs.row(c).iter().copied().collect());
        }
        diag.condition
    };
    // reconstruction residual of the full chart, relative to the data
    let param_residual = {
        let mut num = T::zero();
        let mut den = T::zero();
        for (m, e) in shifted.iter().zip(&etas) {
            for j in 0..e.ncols() {
                let eta: Vec<T> = e.column(j).iter().copied().collect();
                let lift = parametrization.evaluate(&eta);
                for i in 0..p {
                    let r = m[(i, j)] - lift[i];
                    num += r * r;
                }
            }
            den += m.norm_squared();
        }
        num.sqrt() / den.sqrt().max(T::lit(1e-300))
    };

    // reduced dynamics: smoothed coordinates, central-difference rates,
    // endpoints down-weighted
    let dyn_indices = multi_indices(d, 1, cfg.dynamics_order);
    let mut design = DMatrix::zeros(total_cols, dyn_indices.len());
    let mut target = DMatrix::zeros(total_cols, d);
    let mut weights = Vec::with_capacity(total_cols);
    let mut row = 0usize;
    for e in &etas {
        let cols = e.ncols();
        let mut smoothed = DMatrix::zeros(d, cols);
        let mut rates = DMatrix::zeros(d, cols);
        for i in 0..d {
            let channel: Vec<T> = e.row(i).iter().copied().collect();
            let smooth = moving_average(&channel, cfg.smoothing_window);
            let rate = crate::signals::central_difference(&smooth, dt);
            for j in 0..cols {
                smoothed[(i, j)] = smooth[j];
                rates[(i, j)] = rate[j];
            }
        }
        for j in 0..cols {
            let eta: Vec<T> = smoothed.column(j).iter().copied().collect();
            for (c, idx) in dyn_indices.iter().enumerate() {
                design[(row, c)] = monomial(&eta, idx);
            }
            for i in 0..d {
                target[(row, i)] = rates[(i, j)];
            }
            weights.push(if j < 3 || j + 3 >= cols {
                cfg.endpoint_weight
            } else {
                T::one()
            });
            row += 1;
        }
    }
    let (coeffs, dyn_diag) = weighted_lstsq(&design, &target, Some(&weights))?;
    let mut reduced_dynamics = PolynomialMap::new(d, d);
    for (c, idx) in dyn_indices.iter().enumerate() {
        reduced_dynamics.insert(idx.clone(), coeffs.row(c).iter().copied().collect());
    }

    Ok(LocalSsmModel {
        input_level,
        fixed_point: fixed_point.iter().copied().collect(),
        tangent: (0..d)
            .map(|j| tangent.column(j).iter().copied().collect())
            .collect(),
        parametrization,
        reduced_dynamics,
        diagnostics: FitDiagnostics {
            parametrization_residual: param_residual,
            parametrization_condition: param_condition,
            dynamics_residual: dyn_diag.residual_rel,
            dynamics_condition: dyn_diag.condition,
            singular_values,
        },
    })
}

fn monomial<T: Real>(input: &[T], index: &MultiIndex) -> T {
    let mut term = T::one();
    for (&x, &k) in input.iter().zip(&index.0) {
        if k > 0 {
            term *= x.powi(k as i32);
        }
    }
    term
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plants::{Plant, SdofParams, SdofPlant};
    use crate::signals::TimeSeries;

    #[test]
    fn recovers_linear_decay_rate() {
        let lambda = -2.0;
        let series = TimeSeries::from_fn(0.0, 0.01, 401, |t: f64| (lambda * t).exp()).unwrap();
        let cfg = LocalFitConfig::<f64> {
            embedding: EmbeddingSpec {
                window: 2,
                delay: 1,
                reduced_dim: 1,
            },
            ..Default::default()
        };
        let model = fit_local_ssm(&[series], 0.0, &cfg).unwrap();
        let coeffs = model.reduced_dynamics.to_univariate();
        let slope = coeffs[1];
        assert!(
            (slope - lambda).abs() < 0.01 * lambda.abs(),
            "recovered {slope}"
        );
        for &c in &coeffs[2..] {
            assert!(c.abs() < 1e-3 * lambda.abs(), "spurious coefficient {c}");
        }
    }

    #[test]
    fn planar_data_has_tiny_parametrization_residual() {
        // two decaying exponentials embed exactly into a 2-plane
        let series = TimeSeries::from_fn(0.0, 0.01, 1401, |t: f64| {
            0.7 * (-t).exp() + 0.3 * (-3.0 * t).exp()
        })
        .unwrap();
        let cfg = LocalFitConfig::<f64> {
            embedding: EmbeddingSpec {
                window: 3,
                delay: 1,
                reduced_dim: 2,
            },
            parametrization_order: 2,
            dynamics_order: 2,
            transient_trim: 0.1,
            ..Default::default()
        };
        let model = fit_local_ssm(&[series], 0.0, &cfg).unwrap();
        assert!(
            model.diagnostics.parametrization_residual < 1e-10,
            "residual {}",
            model.diagnostics.parametrization_residual
        );

        // the fitted plane spans the exact embedding directions
        let dt = 0.01;
        let w1 = DVector::from_fn(3, |i, _| (-(i as f64) * dt).exp());
        let w2 = DVector::from_fn(3, |i, _| (-3.0 * (i as f64) * dt).exp());
        let v = model.tangent_matrix();
        for w in [w1, w2] {
            let wn = &w / w.norm();
            let proj = &v * (v.transpose() * &wn);
            let angle = (wn - proj).norm().asin();
            assert!(angle < 1e-8, "principal angle {angle}");
        }
    }

    #[test]
    fn tangent_is_orthonormal() {
        let series = TimeSeries::from_fn(0.0, 0.005, 2001, |t: f64| {
            (-1.5 * t).exp() * (1.0 + 0.2 * (5.0 * t).cos())
        })
        .unwrap();
        let cfg = LocalFitConfig::<f64> {
            embedding: EmbeddingSpec {
                window: 5,
                delay: 2,
                reduced_dim: 2,
            },
            transient_trim: 0.3,
            ..Default::default()
        };
        let model = fit_local_ssm(&[series], 0.0, &cfg).unwrap();
        let v = model.tangent_matrix();
        let gram = v.transpose() * &v;
        for i in 0..2 {
            for j in 0..2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - expected).abs() < 1e-10);
            }
        }
        // linear block of the parametrization equals the tangent
        for j in 0..2 {
            let mut unit = vec![0u32; 2];
            unit[j] = 1;
            let block = model.parametrization.coefficient(&MultiIndex(unit)).unwrap();
            for i in 0..5 {
                assert_eq!(block[i], v[(i, j)]);
            }
        }
    }

    #[test]
    fn unsettled_decay_is_rejected() {
        let series = TimeSeries::from_fn(0.0, 0.01, 60, |t: f64| (-t).exp()).unwrap();
        let cfg = LocalFitConfig::<f64>::default();
        assert!(matches!(
            fit_local_ssm(&[series], 0.0, &cfg),
            Err(Error::NotSettled(_))
        ));
    }

    #[test]
    fn sdof_slow_eigenvalue_matches_quadratic_root() {
        let plant = SdofPlant::new(SdofParams::<f64>::default(), 3.0).unwrap();
        // release from two offset equilibria and record the decays at u = 0
        let decays: Vec<TimeSeries<f64>> = [0.5, 0.8]
            .iter()
            .map(|&u_start| {
                let initial = plant.steady_state(u_start).unwrap();
                let input = TimeSeries::from_fn(0.0, 1e-3, 1801, |_: f64| 0.0).unwrap();
                let out = crate::plants::simulate(&plant, &input, &initial, 1e-4).unwrap();
                out.channel(2).unwrap()
            })
            .collect();
        let model = fit_local_ssm(&decays, 0.0, &LocalFitConfig::default()).unwrap();
        let fitted = model.reduced_dynamics.to_univariate()[1];
        // analytic slow root of m s^2 + c s + k = 0
        let (slow, _) = plant.linear_poles();
        let rel = (fitted - slow).abs() / slow.abs();
        assert!(rel < 0.05, "fitted {fitted}, analytic {slow}, rel {rel}");
    }
}
