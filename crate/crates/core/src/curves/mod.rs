//! Local analysis of elliptic curves: reduction, formal group, torsion, Kummer classes,
//! Serre-Tate and Tate parameters.

pub mod analysis;
pub mod formal;
pub mod kummer;
pub mod reduction;
pub mod series;
pub mod tate;
pub mod torsion;
pub mod weierstrass;

pub use formal::{formal_group, FormalGroup};
pub use reduction::{classify_reduction, ReductionData, ReductionType};
pub use weierstrass::{Point, WeierstrassCurve};
