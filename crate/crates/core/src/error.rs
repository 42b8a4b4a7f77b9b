use crate::coloring::ColoringError;
use crate::dyadic::DyadicError;
use crate::lll::LllError;
use crate::rational::ParseRationalError;
use crate::sequences::SequenceError;
use crate::survivor::SurvivorError;
use crate::theta_oracle::OracleError;
use crate::vdc::VdcError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
    #[error(transparent)]
    Dyadic(#[from] DyadicError),
    #[error(transparent)]
    Lll(#[from] LllError),
    #[error(transparent)]
    Survivor(#[from] SurvivorError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Vdc(#[from] VdcError),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
}
