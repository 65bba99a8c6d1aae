pub mod bounds;
pub mod equilibrium;
pub mod error;
pub mod instances;
pub mod lifting;
pub mod lp_models;
pub mod market;
pub mod numeric;
pub mod revenue;
pub mod welfare;

pub use error::{Error, Result};
pub use numeric::{r, rat, Rational};
