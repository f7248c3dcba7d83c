//! Multivariate polynomial maps with multi-index coefficients, plus the
//! univariate coefficient-vector helpers used for map composition and
//! series reversion.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exponent tuple of a single monomial, one entry per input variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn univariate(order: u32) -> Self {
        MultiIndex(vec![order])
    }

    fn to_key(&self) -> String {
        self.0
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn from_key(key: &str, dim: usize) -> Result<Self> {
        let parts: Vec<u32> = key
            .split(',')
            .map(|p| p.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Serialization(format!("bad multi-index `{key}`: {e}")))?;
        if parts.len() != dim {
            return Err(Error::Serialization(format!(
                "multi-index `{key}` has {} entries, expected {dim}",
                parts.len()
            )));
        }
        Ok(MultiIndex(parts))
    }
}

/// Enumerate all multi-indices over `dim` variables with total degree in
/// `min_order..=max_order`, in (degree, lexicographic) order.
pub fn multi_indices(dim: usize, min_order: u32, max_order: u32) -> Vec<MultiIndex> {
    fn fill(dim: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if dim == 1 {
            prefix.push(degree);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=degree).rev() {
            prefix.push(first);
            fill(dim - 1, degree - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for degree in min_order..=max_order {
        fill(dim, degree, &mut Vec::new(), &mut out);
    }
    out
}

/// Polynomial map `R^d_in -> R^d_out` stored as multi-index -> coefficient
/// vector. Keys are kept in a `BTreeMap` so evaluation and serialization
/// order are deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialMap<T> {
    input_dim: usize,
    output_dim: usize,
    coefficients: BTreeMap<MultiIndex, Vec<T>>,
}

impl<T: Real> PolynomialMap<T> {
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        assert!(input_dim >= 1 && output_dim >= 1);
        PolynomialMap {
            input_dim,
            output_dim,
            coefficients: BTreeMap::new(),
        }
    }

    /// 1 -> 1 map from dense ascending-order coefficients `[c0, c1, ...]`.
    pub fn from_univariate(coeffs: &[T]) -> Self {
        let mut map = PolynomialMap::new(1, 1);
        for (order, &c) in coeffs.iter().enumerate() {
            map.insert(MultiIndex::univariate(order as u32), vec![c]);
        }
        map
    }

    /// Dense ascending-order coefficients of a 1 -> 1 map.
    pub fn to_univariate(&self) -> Vec<T> {
        assert_eq!(self.input_dim, 1);
        assert_eq!(self.output_dim, 1);
        let mut out = vec![T::zero(); self.max_order() as usize + 1];
        for (idx, c) in &self.coefficients {
            out[idx.0[0] as usize] = c[0];
        }
        out
    }

    pub fn insert(&mut self, index: MultiIndex, coeffs: Vec<T>) {
        assert_eq!(index.0.len(), self.input_dim, "multi-index arity");
        assert_eq!(coeffs.len(), self.output_dim, "coefficient arity");
        self.coefficients.insert(index, coeffs);
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn max_order(&self) -> u32 {
        self.coefficients
            .keys()
            .map(|k| k.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &[T])> {
        self.coefficients.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn coefficient(&self, index: &MultiIndex) -> Option<&[T]> {
        self.coefficients.get(index).map(|v| v.as_slice())
    }

    /// Monomial value `prod_i x_i^{k_i}`.
    fn monomial(input: &[T], index: &MultiIndex) -> T {
        let mut term = T::one();
        for (x, &k) in input.iter().zip(&index.0) {
            if k > 0 {
                term *= x.powi(k as i32);
            }
        }
        term
    }

    pub fn evaluate_into(&self, input: &[T], out: &mut [T]) {
        assert_eq!(input.len(), self.input_dim);
        assert_eq!(out.len(), self.output_dim);
        out.fill(T::zero());
        for (index, coeffs) in &self.coefficients {
            let term = Self::monomial(input, index);
            for (o, &c) in out.iter_mut().zip(coeffs) {
                *o += c * term;
            }
        }
    }

    pub fn evaluate(&self, input: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.output_dim];
        self.evaluate_into(input, &mut out);
        out
    }

    /// Scalar evaluation of a 1 -> 1 map.
    pub fn evaluate_scalar(&self, x: T) -> T {
        assert_eq!(self.input_dim, 1);
        assert_eq!(self.output_dim, 1);
        let mut out = [T::zero()];
        self.evaluate_into(&[x], &mut out);
        out[0]
    }

    /// Coefficients of `p(M x)` for a square matrix `M` acting on the
    /// input (row `j` of `M` expresses old variable `j` in new variables).
    /// Linear substitution preserves total degree, so no truncation occurs.
    pub fn substitute_linear_input(&self, m: &nalgebra::DMatrix<T>) -> Self {
        let d = self.input_dim;
        assert_eq!((m.nrows(), m.ncols()), (d, d));
        // old variable j as a degree-1 polynomial in the new variables
        let linears: Vec<BTreeMap<MultiIndex, T>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| {
                        let mut unit = vec![0u32; d];
                        unit[i] = 1;
                        (MultiIndex(unit), m[(j, i)])
                    })
                    .collect()
            })
            .collect();
        let mul = |a: &BTreeMap<MultiIndex, T>, b: &BTreeMap<MultiIndex, T>| {
            let mut out: BTreeMap<MultiIndex, T> = BTreeMap::new();
            for (ka, &va) in a {
                for (kb, &vb) in b {
                    let key = MultiIndex(ka.0.iter().zip(&kb.0).map(|(x, y)| x + y).collect());
                    *out.entry(key).or_insert_with(T::zero) += va * vb;
                }
            }
            out
        };
        let mut out = PolynomialMap::new(d, self.output_dim);
        for (index, coeffs) in &self.coefficients {
            let mut term: BTreeMap<MultiIndex, T> =
                [(MultiIndex(vec![0; d]), T::one())].into_iter().collect();
            for (j, &k) in index.0.iter().enumerate() {
                for _ in 0..k {
                    term = mul(&term, &linears[j]);
                }
            }
            for (key, &scale) in &term {
                let entry = out
                    .coefficients
                    .entry(key.clone())
                    .or_insert_with(|| vec![T::zero(); self.output_dim]);
                for (e, &c) in entry.iter_mut().zip(coeffs) {
                    *e += c * scale;
                }
            }
        }
        out
    }

    /// Coefficients of `A p(x)` for a matrix acting on the output.
    pub fn transform_output(&self, a: &nalgebra::DMatrix<T>) -> Self {
        assert_eq!(a.ncols(), self.output_dim);
        let mut out = PolynomialMap::new(self.input_dim, a.nrows());
        for (index, coeffs) in &self.coefficients {
            let v = nalgebra::DVector::from_column_slice(coeffs);
            let transformed = a * v;
            out.insert(index.clone(), transformed.iter().copied().collect());
        }
        out
    }

    /// Keys must match entry-for-entry; values are linearly interpolated.
    pub fn interpolate(a: &Self, b: &Self, weight: T) -> Result<Self> {
        if a.input_dim != b.input_dim || a.output_dim != b.output_dim {
            return Err(Error::Model("interpolating maps of different shape".into()));
        }
        let mut out = PolynomialMap::new(a.input_dim, a.output_dim);
        if a.coefficients.len() != b.coefficients.len() {
            return Err(Error::Model(
                "interpolating maps with different coefficient sets".into(),
            ));
        }
        for ((ka, va), (kb, vb)) in a.coefficients.iter().zip(b.coefficients.iter()) {
            if ka != kb {
                return Err(Error::Model(
                    "interpolating maps with different coefficient sets".into(),
                ));
            }
            let blended = va
                .iter()
                .zip(vb)
                .map(|(&x, &y)| x + (y - x) * weight)
                .collect();
            out.insert(ka.clone(), blended);
        }
        Ok(out)
    }
}

// Serialized form: coefficient arrays keyed by comma-joined multi-index
// strings, e.g. "3" for eta^3 or "1,2" for eta_1 * eta_2^2.
#[derive(Serialize, Deserialize)]
struct PolyRepr<T> {
    input_dim: usize,
    output_dim: usize,
    coefficients: BTreeMap<String, Vec<T>>,
}

impl<T: Real> Serialize for PolynomialMap<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = PolyRepr {
            input_dim: self.input_dim,
            output_dim: self.output_dim,
            coefficients: self
                .coefficients
                .iter()
                .map(|(k, v)| (k.to_key(), v.clone()))
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de, T: Real> Deserialize<'de> for PolynomialMap<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::<T>::deserialize(deserializer)?;
        let mut map = PolynomialMap::new(repr.input_dim, repr.output_dim);
        for (key, coeffs) in repr.coefficients {
            let index = MultiIndex::from_key(&key, repr.input_dim).map_err(serde::de::Error::custom)?;
            if coeffs.len() != repr.output_dim {
                return Err(serde::de::Error::custom("coefficient arity mismatch"));
            }
            map.insert(index, coeffs);
        }
        Ok(map)
    }
}

/// Dense univariate polynomial helpers on ascending coefficient vectors.
pub mod univariate {
    use super::Real;

    /// Horner evaluation of `[c0, c1, ...]` at `x`.
    pub fn horner<T: Real>(coeffs: &[T], x: T) -> T {
        let mut acc = T::zero();
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
        if coeffs.len() <= 1 {
            return vec![T::zero()];
        }
        coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * T::of_usize(k))
            .collect()
    }

    pub fn multiply<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] += ai * bj;
            }
        }
        out
    }

    /// Coefficients of `p(q(x))` truncated at `max_order`.
    pub fn compose<T: Real>(p: &[T], q: &[T], max_order: usize) -> Vec<T> {
        let mut out = vec![T::zero(); max_order + 1];
        let mut q_pow = vec![T::one()];
        for &c in p {
            for (o, &qp) in q_pow.iter().enumerate() {
                if o <= max_order {
                    out[o] += c * qp;
                }
            }
            q_pow = multiply(&q_pow, q);
            q_pow.truncate(max_order + 1);
        }
        out
    }

    /// Compositional inverse of `phi(x) = c1 x + c2 x^2 + ...` (no constant
    /// term, `c1 != 0`) truncated at `max_order`: returns `psi` with
    /// `phi(psi(y)) = y + O(y^{max_order+1})`.
    ///
    /// Fixed-point iteration on `psi = (y - sum_{j>=2} c_j psi^j) / c1`;
    /// each pass fixes one more coefficient, so `max_order` passes suffice.
    pub fn invert_series<T: Real>(phi: &[T], max_order: usize) -> Vec<T> {
        assert!(phi.len() >= 2, "series must have a linear term");
        assert!(phi[0] == T::zero(), "series must vanish at zero");
        let c1 = phi[1];
        assert!(c1 != T::zero(), "linear coefficient must be nonzero");
        let mut psi = vec![T::zero(), T::one() / c1];
        for _ in 0..max_order {
            // tail(psi) = sum_{j >= 2} c_j psi^j
            let mut tail = vec![T::zero(); max_order + 1];
            let mut psi_pow = multiply(&psi, &psi);
            psi_pow.truncate(max_order + 1);
            for j in 2..phi.len() {
                for (o, &pp) in psi_pow.iter().enumerate() {
                    if o <= max_order {
                        tail[o] += phi[j] * pp;
                    }
                }
                psi_pow = multiply(&psi_pow, &psi);
                psi_pow.truncate(max_order + 1);
            }
            let mut next = vec![T::zero(); max_order + 1];
            next[1] = T::one() / c1;
            for o in 2..=max_order {
                next[o] = -tail[o] / c1;
            }
            psi = next;
        }
        psi
    }

    /// Coefficients of `p(a + b*x)` expanded in `x`.
    pub fn affine_substitute<T: Real>(p: &[T], a: T, b: T) -> Vec<T> {
        compose(p, &[a, b], p.len().saturating_sub(1))
    }
}
