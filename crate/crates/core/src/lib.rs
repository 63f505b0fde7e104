//! Surface calculus in curvature-line coordinates.
//!
//! The crate evaluates moving frames and curvatures of parametric surfaces
//! whose fundamental forms are diagonal, computes infinitesimal
//! strain-displacement fields, assembles the first-variation formulas for
//! area, enclosed volume, the mean-curvature integral, and the combined
//! functional E = integral (a H + b) dA + c V, and validates each formula
//! against a finite-difference oracle that literally deforms the surface.
//! A gradient flow on profile curves of revolution surfaces drives shapes
//! toward the linear Weingarten condition a K + 2 b H = c.
//!
//! Orientation: N = e1 x e2, and built-in closed surfaces point N outward,
//! so convex outward surfaces have negative mean curvature (unit sphere:
//! H = -1, K = +1).

pub mod error;
pub mod fields;
pub mod flow;
pub mod grid;
pub mod io;
pub mod math;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod rng;
pub mod stencil;
pub mod strain;
pub mod surface;
pub mod variation;

pub use error::{Error, Result};

/// Sizes the global worker pool used for grid sweeps. Call once, before any
/// parallel evaluation; later calls report an error from the pool builder.
pub fn configure_threads(n: usize) -> std::result::Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}
pub use fields::{BoundarySpec, DisplacementField, ScalarField, TangentField};
pub use grid::{Edge, ParamDomain};
pub use math::Vec3;
pub use profile::{BoundaryCondition, ProfileCurve};
pub use surface::{FrameField, FramePointData, SurfaceFamily};
pub use variation::{FunctionalCoefficients, FunctionalValues, VariationBreakdown};
