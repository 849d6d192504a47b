//! Numeric back end: admissible sampling, residual statistics and
//! trajectory conservation checks.

mod compile;
mod flow;
mod sampler;
mod stats;

pub use compile::Compiled;
pub use flow::{flow_conservation, FlowReport, FlowSpec};
pub use sampler::{sample_points, Point, SamplerConfig, PARAM_RANGE};
pub use stats::{residual_stats, Stats};
