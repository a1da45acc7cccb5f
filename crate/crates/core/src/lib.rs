pub mod autodiff;
pub mod critical;
pub mod error;
pub mod intmat;
pub mod linalg;
pub mod localmodel;
pub mod nodal;
pub mod symplectic;
pub mod svg;
pub mod systems;
pub mod verification;
pub mod williamson;

pub use error::{Error, Result};
