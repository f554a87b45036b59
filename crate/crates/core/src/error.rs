use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angular separation q = {q} is outside (0, pi)")]
    SeparationOutOfRange { q: f64 },

    #[error("casimir is zero: spherical angles are undefined")]
    DegenerateCasimir,

    #[error("m3 = 0: the square completion is undefined on the equator")]
    Equator,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("multiple quartic root near y = {y} (multiplicity {multiplicity}); (C, h) lies on the bifurcation locus")]
    DegenerateRoot { y: f64, multiplicity: usize },

    #[error("level set is empty after {rejections} consecutive rejections")]
    EmptyLevelSet { rejections: u64 },

    #[error("theta = {theta} is outside the permitted band")]
    OutOfBand { theta: f64 },

    #[error("could not bracket the main bifurcation branch at C = {c}")]
    BracketFailure { c: f64 },

    #[error("state blew up (|xi| > 1e12 or non-finite) after t = {time}")]
    Blowup { time: f64, partial: Box<Trajectory> },

    #[error("step must satisfy 0 < dt <= t_end (dt = {dt}, t_end = {t_end})")]
    InvalidStep { dt: f64, t_end: f64 },
}
