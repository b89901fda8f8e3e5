pub mod dimension;
pub mod shape;
pub mod torus;

pub use dimension::{boundary_dimension_estimate, least_squares_slope, BoxDimensionEstimate};
pub use shape::{Bitmap, Shape};
pub use torus::{
    coset_point, sample_free_system, torus_dist_inf, translation_set, wrap, FreeVectorSystem, FreenessReport,
    TorusPoint,
};
