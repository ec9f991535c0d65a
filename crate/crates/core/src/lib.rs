//! Mixed explicit-implicit cut-cell finite volume schemes for linear advection.
//!
//! Explicit MUSCL-type fluxes are used away from small cut cells. Near them the
//! update switches to an implicit trapezoidal scheme, and flux bounding keeps the
//! coupled update conservative.

pub mod analysis;
pub mod bounding;
pub mod config;
pub mod convergence;
pub mod error;
pub mod geometry2d;
pub mod implicit;
pub mod mesh1d;
pub mod norms;
pub mod reconstruct;
pub mod run;
pub mod schemes1d;
pub mod schemes2d;
pub mod state;

pub use config::{Coupling, ExplicitScheme, ImplicitScheme, Limiter, SchemeSpec, SlopeMethod};
pub use convergence::{fit_orders, ConvergenceTable};
pub use error::{Error, Result};
pub use norms::norms;
pub use state::{FvMesh, GridFn, MeshId, Role};
