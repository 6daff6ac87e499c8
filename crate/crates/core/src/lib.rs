//! Constructive real-interpolation machinery for weighted Sobolev norms on
//! finite metric measure spaces.
//!
//! The crate models a space as a finite point set with an explicit metric and
//! a positive measure, and builds on top of it:
//!
//! * ball enumeration and geometric constants ([`space`]),
//! * reverse-Hölder / Muckenhoupt weight auditing ([`weights`]),
//! * discrete gradients, weighted Sobolev norms, maximal operators and the
//!   Poincaré / Fefferman-Phong constants ([`calculus`]),
//! * decreasing rearrangements and step-function integral transforms
//!   ([`rearrange`]),
//! * Whitney covers, partitions of unity and the Calderón-Zygmund
//!   decomposition of Sobolev functions ([`czd`]),
//! * two-sided K-functional estimation and interpolation norms ([`kfunc`]),
//! * bundled verification suites ([`verify`]) and file formats ([`io`]).
//!
//! Everything is deterministic: all randomness is drawn from explicit seeds
//! and every operation is a pure function of immutable inputs.

pub mod calculus;
pub mod czd;
pub mod error;
pub mod fields;
pub mod io;
pub mod kfunc;
pub mod rearrange;
pub mod report;
pub mod space;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use space::{PointField, Space};
