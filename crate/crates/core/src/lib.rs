//! Lacunary sequences, dyadic survivor sets and Bohr-type colorings of
//! distance graphs, all in exact rational arithmetic.

pub mod coloring;
pub mod dyadic;
pub mod error;
pub mod lll;
pub mod rational;
pub mod sequences;
pub mod strategy;
pub mod survivor;
pub mod theta_oracle;
pub mod vdc;

pub use error::Error;
pub use rational::Rational;
