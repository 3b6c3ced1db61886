//! Fractional mean curvature and the nonlocal Willmore energy of planar
//! closed curves: quadrature, oracles, fractional operators and a
//! convexity-constrained descent.

pub mod curvature;
pub mod curve;
pub mod energy;
pub mod error;
pub mod fracops;
pub mod geom;
pub mod minimize;
pub mod special;

pub use curvature::{BarrierSpec, CurvatureSamples, Method, RegionKind, RegionSpec};
pub use curve::{ArcCurve, ConvexityReport, SupportCurve};
pub use energy::{BmoProfile, EnergyBreakdown, FracParams};
pub use error::{FracError, Result};
pub use fracops::{Domain, GridFunction, SeminormResult};
pub use geom::Point;
pub use minimize::{ConcentrationReport, DescentConfig, DescentTrace};
