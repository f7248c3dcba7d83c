//! Controller realizations for the antagonistic joint: inverse
//! slow-manifold feedforward, PI feedback with conditional-integration
//! anti-windup, their sum, measurement filtering, saturation and
//! slew-rate limiting, the clutch scheduling state machine, the
//! closed-loop runner and the benchmarking protocol.

mod benchmark;
mod clutch;
mod pi;
mod runner;
mod tuning;

pub use benchmark::{benchmark, BenchmarkReport, ModeStats};
pub use clutch::{clutch_step, ClutchConfig, ClutchOutput, ClutchPhase, ClutchState};
pub use pi::{apply_limits, ema_step, ff_command, pi_step, PiConfig, PiState, SafetyLimits};
pub use runner::{run_closed_loop, ControlLog, ControlMode, LogRow};
pub use tuning::{tune_gains, GainGrid};
