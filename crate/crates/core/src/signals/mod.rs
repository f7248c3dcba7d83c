//! Time-series container, slowness and trajectory-error metrics, and
//! generation of random slowly varying input signals.

mod gen;
mod metrics;
mod series;

pub use gen::{gen_slow_input, ramp_in, SlowInputSpec};
pub use metrics::{central_difference, nmte, slowness_rho, trapezoid_l2_norm};
pub use series::{DecayReference, TimeSeries, SETTLE_RATIO};
