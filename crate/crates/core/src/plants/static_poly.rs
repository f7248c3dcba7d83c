//! Synthetic memoryless plant: the observable is a polynomial of the
//! input, exactly. Useful as ground truth for identification tests and
//! demos. The single state relaxes toward the observable but does not
//! feed it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::univariate;
use crate::scalar::Real;

use super::Plant;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: crate::scalar::Real")]
pub struct StaticPolyParams<T> {
    /// Ascending coefficients of the input-to-observable map.
    pub coefficients: Vec<T>,
    /// Relaxation time of the bookkeeping state, seconds.
    #[serde(default = "default_time_constant")]
    pub time_constant: T,
}

fn default_time_constant<T: Real>() -> T {
    T::lit(0.01)
}

#[derive(Clone, Debug)]
pub struct StaticPolyPlant<T> {
    params: StaticPolyParams<T>,
}

impl<T: Real> StaticPolyPlant<T> {
    pub fn new(params: StaticPolyParams<T>) -> Result<Self> {
        if params.coefficients.is_empty() {
            return Err(Error::InvalidParameter("need at least one coefficient".into()));
        }
        if !(params.time_constant > T::zero()) {
            return Err(Error::InvalidParameter("time constant must be positive".into()));
        }
        Ok(StaticPolyPlant { params })
    }

    pub fn map(&self, input: T) -> T {
        univariate::horner(&self.params.coefficients, input)
    }
}

impl<T: Real> Plant<T> for StaticPolyPlant<T> {
    fn state_dim(&self) -> usize {
        1
    }

    fn state_names(&self) -> Vec<String> {
        vec!["x".into()]
    }

    fn rhs(&self, state: &[T], input: T, deriv: &mut [T]) {
        deriv[0] = (self.map(input) - state[0]) / self.params.time_constant;
    }

    fn observable(&self, _state: &[T], input: T) -> T {
        self.map(input)
    }

    fn steady_state(&self, input: T) -> Result<Vec<T>> {
        Ok(vec![self.map(input)])
    }
}
