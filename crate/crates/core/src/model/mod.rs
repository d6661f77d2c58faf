//! Moment models: spec documents, datasets, weights, and LP assembly.

mod assemble;
mod data;
mod spec;

pub use assemble::{build_empirical_lp, BoundModel, Direction, EmpiricalLp, MomentMeans, RowOrigin};
pub use data::{Dataset, Weights};
pub use spec::{parse_model, AffineForm, ModelSpec, Moment, MomentSense, Source};
