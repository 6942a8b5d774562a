//! Invariants of crossed products by minimal torus diffeomorphisms.

pub mod conjugacy;
pub mod elliott;
pub mod error;
pub mod fgab;
pub mod ktheory;
pub mod schweitzer;
pub mod smooth_cp;
pub mod tempered;
pub mod torus;
pub mod trig;

pub use error::{Error, Result};
pub use fgab::{FgAbGroup, IntMatrix};
pub use torus::{CircleDiffeo, IrrationalBasis, TorusMap, TorusPoint, Translation};
pub use trig::TrigPoly;
