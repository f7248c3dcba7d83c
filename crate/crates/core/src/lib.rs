//! Desk-scale toolkit for soft-actuator work: forward simulation of
//! HASEL-style plants, identification of slow-manifold and adiabatic
//! spectral-submanifold reduced models from trajectory data, and a
//! feedforward/feedback tracking benchmark built on the inverted
//! slow-manifold map.
//!
//! Everything numeric is generic over the scalar type through
//! [`scalar::Real`] (`f32` or `f64`); the `*64`/`*32` aliases below pin
//! the common concrete choices.

pub mod control;
pub mod error;
pub mod pipeline;
pub mod plants;
pub mod poly;
pub mod reduction;
pub mod scalar;
pub mod signals;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TimeSeries64 = signals::TimeSeries<f64>;
pub type TimeSeries32 = signals::TimeSeries<f32>;
pub type PolynomialMap64 = poly::PolynomialMap<f64>;
pub type SlowManifoldModel64 = reduction::SlowManifoldModel<f64>;
pub type AdiabaticSsmModel64 = reduction::AdiabaticSsmModel<f64>;
pub type SdofPlant64 = plants::SdofPlant<f64>;
pub type HaselPlant64 = plants::HaselPlant<f64>;
pub type JointPlant64 = plants::JointPlant<f64>;
