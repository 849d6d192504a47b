//! Coordinate exterior algebra: multivector fields, differential forms and
//! the graded operations between them.

mod json;
mod metric;
mod ops;
mod tensor;
mod volume;

pub use json::{EntryJson, TensorJson};
pub use metric::Metric;
pub use ops::{
    apply, bivector_matrix, d, d_fn, divergence, form_matrix, from_form, interior, interior_form,
    lie_bracket, lie_derivative_fn, lie_derivative_form, lie_derivative_mv, numeric_rank, pair,
    rank_at_bivector, rank_at_form, schouten, sharp, to_form,
};
pub use tensor::{index_sets, Co, Contra, Form, GradedTensor, MultiVector, Variance};
pub use volume::VolumeForm;
