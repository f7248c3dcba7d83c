//! Data-driven model reduction: delay embedding, tangent-space estimation,
//! polynomial regression of manifold parametrizations and reduced dynamics
//! per frozen input level, interpolation into an input-indexed family,
//! direct slow-manifold fitting from forced data, prediction and inversion.

mod assm;
mod embed;
mod local;
mod regress;
mod sm;

pub use assm::{
    assm_from_json, assm_to_json, build_assm, predict_assm, AdiabaticSsmModel, LocalEval,
};
pub use embed::delay_embed;
pub use local::{fit_local_ssm, EmbeddingSpec, FitDiagnostics, LocalFitConfig, LocalSsmModel};
pub use regress::{weighted_lstsq, LstsqDiagnostics, CONDITION_LIMIT};
pub use sm::{
    fit_slow_manifold, sm_from_json, sm_to_json, SlowManifoldModel, SmDiagnostics,
    INVERSE_TABLE_POINTS,
};
