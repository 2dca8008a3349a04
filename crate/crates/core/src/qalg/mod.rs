//! Linear-algebra and state layer: layouts, density operators, unitaries,
//! partial trace and transpose, entropies and seeded random sampling.

mod density;
mod entropy;
mod layout;
pub mod linalg;
mod random;
mod unitary;

pub use density::{DensityOperator, TOL_HERMITIAN, TOL_PSD, TOL_TRACE};
pub use entropy::{binary_entropy, spectrum_entropy, trace_distance, vn_entropy, CLIP_THRESHOLD};
pub(crate) use entropy::h2;
pub use layout::{Factor, SystemLayout};
pub use linalg::CMatrix;
pub use random::{random_density, random_pure, random_unitary};
pub(crate) use random::{density_from_factor, ginibre, haar_unitary, rng};
pub use unitary::{UnitaryOperator, TOL_UNITARY};
