//! Construction and certification of Poisson structures that hamiltonize a
//! given vector field.

pub mod constructions;
pub mod conventions;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod poisson;
pub mod verify;

pub use error::{Error, Result};
pub use constructions::HamiltonizationResult;
pub use expr::{parse, Chart, Expr, Frac, RationalMatrix, TriState, Q};
pub use exterior::{Form, Metric, MultiVector, VolumeForm};
pub use poisson::{Certificate, Identity, Verdict};
pub use verify::SamplerConfig;
