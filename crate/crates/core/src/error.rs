use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Coin angle at (or within 1e-9 of) a multiple of π/2.
    ForbiddenAngle { theta: f64 },
    /// Coin whose top-left entry vanishes, so no J-coin exists.
    DegenerateCoin,
    /// Matrix that fails the unitarity check.
    NotUnitary { deviation: f64 },
    /// Initial spin whose squared norm is not 1.
    UnnormalizedSpin { norm_sq: f64 },
    EmptyProtocol,
    /// Coin kind the limit theory has no closed form for.
    UnsupportedCoin,
    OutsideSupportHull { x: f64 },
    OutsideSupport { x: f64 },
    EndpointSingularity { x: f64 },
    DegenerateQuasimomentum { k: f64 },
    NoGap,
    InvalidArgument(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ForbiddenAngle { theta } => {
                write!(f, "coin angle {theta} is a multiple of pi/2 (trivial walk)")
            }
            Error::DegenerateCoin => write!(f, "coin has a vanishing top-left entry"),
            Error::NotUnitary { deviation } => {
                write!(f, "matrix is not unitary (deviation {deviation:e})")
            }
            Error::UnnormalizedSpin { norm_sq } => {
                write!(f, "initial spin has squared norm {norm_sq}, expected 1")
            }
            Error::EmptyProtocol => write!(f, "step protocol needs at least one coin"),
            Error::UnsupportedCoin => {
                write!(f, "limit law needs a rotation or general-unitary coin")
            }
            Error::OutsideSupportHull { x } => write!(f, "x = {x} is outside the support hull"),
            Error::OutsideSupport { x } => write!(f, "x = {x} is outside the support interval"),
            Error::EndpointSingularity { x } => {
                write!(f, "density is singular at support endpoint x = {x}")
            }
            Error::DegenerateQuasimomentum { k } => {
                write!(f, "eigenvalues coincide at quasi-momentum k = {k}")
            }
            Error::NoGap => write!(f, "limit law has no gap around the origin"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
