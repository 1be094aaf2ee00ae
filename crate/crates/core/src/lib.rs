//! Quasi-static response of two coupled plasmonic disks.
//!
//! Three series representations of the scattered potential for a uniform
//! field `H = x1` are provided, together with a Nyström boundary-integral
//! solver used as ground truth:
//!
//! * [`resonant`]: eigenfunction expansion in bipolar coordinates,
//! * [`hybrid`]: single-disk multipoles coupled through the change of basis
//!   between bipolar and polar Fourier modes,
//! * [`cgpt`]: contracted generalized polarization tensors and the far-field
//!   expansion about the origin,
//! * [`oracle`]: dense Nyström discretization of the Neumann–Poincaré system.

pub mod cgpt;
pub mod error;
pub mod geometry;
pub mod hybrid;
pub mod material;
pub mod numeric;
pub mod oracle;
pub mod resonant;
pub mod spectrum;

pub use error::{Error, Result};
pub use geometry::{BipolarFrame, ComplexVector, Disk, DiskPair, Point};
pub use material::{DrudeModel, Resonance, SpectralParam};
pub use spectrum::{NpMode, Sign};
