//! Z2-graded matrix algebras, Fermi and ordinary tensor products, covariant
//! GNS representations and the Klein transformation, all at finite dimension.

pub mod cli;
pub mod error;
pub mod fixtures;
pub mod graded;
pub mod hilbert;
pub mod io;
pub mod klein;
pub mod linalg;
pub mod map;
pub mod product;
pub mod report;
pub mod states;
pub mod structure;

pub use error::{Error, Result};
pub use graded::{GradedAlgebra, GradingSpec, Parity, DEFAULT_TOLERANCE};
pub use report::{Check, Report, ValidationReport};
