pub mod cwt;
pub mod embed;
pub mod frame;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod group;
pub mod norms;
pub mod orbit;
pub mod quadrature;
pub mod wavelet;

pub use error::{CoorbitError, Result};
