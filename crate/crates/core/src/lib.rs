//! Complex Binet-Legendre transform and the invariant Hermitian metric `κ`
//! of model hyperbolic domains.
//!
//! Conventions used throughout: a Hermitian form with Gram `G` evaluates as
//! `G(v, w) = Σ v_j G_jk conj(w_k)`, linear in the first argument. Complex
//! vectors are realified with interleaved coordinates
//! `(Re v_1, Im v_1, Re v_2, …)`.

// `!(x > 0.0)` is used on purpose so that NaN takes the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bl;
pub mod domains;
pub mod error;
pub mod field;
pub mod finsler;
pub mod linalg;
pub mod maps;
pub mod verify;
pub mod wu;

pub use bl::{complex_bl, complex_bl_dual, dualize, product_bl, real_bl, real_complex_consistency, MomentMatrix};
pub use domains::{
    indicatrix, kobayashi_busemann, kobayashi_distance_ball, kobayashi_royden, DomainSpec, TangentSample,
};
pub use error::{Error, Result};
pub use field::{
    field_sweep, hsc_estimate, integrated_length, kappa_at, pullback, CurveSpec, FieldTable, GridSpec, KappaConfig,
    MetricSample,
};
pub use finsler::{busemann_convexify, dual_norm, sphere_integrate, HullConfig, Norm, Pseudonorm, QuadratureRule};
pub use linalg::{ComplexVector, HermitianForm, C64};
pub use verify::{run_verify, Fault, VerifyConfig, VerifyReport};
pub use wu::{mvee_balanced, wu_metric, wu_sandwich_report, EllipsoidForm, MveeConfig, WuSandwich};

/// Version recorded in every JSON output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
