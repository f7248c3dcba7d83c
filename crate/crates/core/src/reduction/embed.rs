use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signals::TimeSeries;

/// Delay embedding of a scalar series: column `j` is
/// `(s_j, s_{j+delay}, ..., s_{j+(window-1) delay})`, giving a
/// `window x (N - (window-1) delay)` matrix.
pub fn delay_embed<T: Real>(
    series: &TimeSeries<T>,
    window: usize,
    delay: usize,
) -> Result<DMatrix<T>> {
    if !series.is_scalar() {
        return Err(Error::DimensionMismatch("delay embedding needs a scalar series".into()));
    }
    if window == 0 || delay == 0 {
        return Err(Error::InvalidParameter("window and delay must be at least 1".into()));
    }
    let n = series.len();
    let span = (window - 1) * delay;
    if n <= span {
        return Err(Error::InvalidSeries(format!(
            "series of length {n} too short for window {window}, delay {delay}"
        )));
    }
    let cols = n - span;
    let values = series.values();
    Ok(DMatrix::from_fn(window, cols, |i, j| values[j + i * delay]))
}
