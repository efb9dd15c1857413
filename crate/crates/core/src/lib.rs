//! Numerical geometry of tangent hypersurfaces in the space of oriented
//! geodesics of the sphere (ε = +1) and of hyperbolic space (ε = −1).
//!
//! The crate is organised bottom-up:
//!
//! * [`ambient`]: signature-ε products on ℝⁿ⁺², Λ² and its flat metric.
//! * [`frame`]: hyperspherical angles over an orthonormal frame.
//! * [`geodesic`]: points and tangents of 𝕃(𝕊ⁿ⁺¹_ε), with 𝔾, 𝕁, 𝕁', 𝔾̄.
//! * [`surface`] and [`catalog`]: parametrized hypersurfaces and their
//!   fundamental forms.
//! * [`tangent`]: the tangent hypersurface, its shape operator (two
//!   independent routes) and Hopf checks.

pub mod ambient;
pub mod catalog;
pub mod error;
pub mod frame;
pub mod geodesic;
pub mod surface;
pub mod tangent;

pub use ambient::{wedge, AmbientVector, Bivector, Epsilon, EpsilonSpace};
pub use catalog::{catalog_surface, SurfaceSpec};
pub use error::{GeometryError, Result};
pub use frame::{compose, decompose, HypersphericalAngles};
pub use geodesic::{GeodesicPoint, TangentAtGeodesic};
pub use surface::{DerivativeMode, FundamentalForms, HypersurfaceChart};
pub use tangent::{
    HopfReport, HopfThresholds, Method, SampleGrid, ShapeOperatorSample, StructureField,
    TangentHypersurfacePoint, Verdict,
};
