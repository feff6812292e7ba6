//! Arithmetic in finite extensions of Q_p.

pub mod ext;
pub mod field;
pub mod kummer;
pub mod literal;
pub mod poly;
pub mod residue;

pub use ext::{adjoin_root, Extension, RelAlgebra};
pub use field::{FieldElement, LocalField, StepKind, TowerStep};
pub use poly::{hensel_split, Poly, Segment};
pub use residue::{Res, ResidueField};
pub use kummer::{adjoin_mu_p, adjoin_pth_root, contains_mu_p, e0, is_pth_power, norm_trace, unramified_extension, zeta_p};
pub use literal::{parse_element, parse_rational};
