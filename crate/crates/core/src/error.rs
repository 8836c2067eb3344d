use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input: malformed parameters, shape mismatches, violated preconditions.
    Input,
    /// A numerical certificate could not be established (non-integral Chern sum, solver failure).
    Numerical,
    /// The requested model cannot be realized (flux quantization, band crossings, cluster separation).
    Infeasible,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("flux {p}/{q} is not a reduced fraction (gcd = {gcd}); use {}/{}", p / gcd, q / gcd)]
    NotReduced { p: i64, q: i64, gcd: i64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not Hermitian: max |M - M^H| = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "inconsistent torus gauge: total flux 2B*L^2 = {total} is not an integer \
         (side {side}, B = {field})"
    )]
    TorusFlux { field: f64, side: usize, total: f64 },

    #[error("dispersion is not real: harmonic ({n}, {m}) lacks the conjugate partner ({}, {})", -n, -m)]
    NonRealDispersion { n: i64, m: i64 },

    #[error(
        "band crossing between bands {lower} and {upper} near k = ({k1:.6}, {k2:.6}) \
         (gap {gap:.3e}); Chern numbers are undefined"
    )]
    BandCrossing { lower: usize, upper: usize, k1: f64, k2: f64, gap: f64 },

    #[error(
        "lattice field-strength sum for band {band} is {raw:.6}, not an integer; \
         try a finer k-grid"
    )]
    NonIntegerChern { band: usize, raw: f64 },

    #[error(
        "flux quantization infeasible for B = {requested} with N_phi = {n_phi}: \
         no integer cell count; nearest feasible B = {nearest}"
    )]
    InfeasibleQuantization { requested: f64, n_phi: usize, nearest: f64 },

    #[error("wave vector ({kx}, {ky}) is not compatible with the torus periodicity")]
    IncompatibleWaveVector { kx: f64, ky: f64 },

    #[error("eigenvalue {value} lies within {tolerance:.0e} of the window boundary; cluster is ambiguous")]
    AmbiguousWindow { value: f64, tolerance: f64 },

    #[error("projectors are too far apart: ||P - Q|| = {norm} >= 1, no intertwiner exists")]
    ProjectorsTooFar { norm: f64 },

    #[error("projected state has zero norm")]
    ZeroProjection,

    #[error("empty set: {0}")]
    EmptySet(&'static str),

    #[error("no spectral gap: at least two band intervals are required")]
    NoGap,

    #[error("cluster of {size} levels is not separated: gap {gap:.3e} below threshold {threshold:.3e}")]
    ClusterNotSeparated { size: usize, gap: f64, threshold: f64 },

    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonIntegerChern { .. } | Error::Lapack { .. } => ErrorKind::Numerical,
            Error::TorusFlux { .. }
            | Error::InfeasibleQuantization { .. }
            | Error::BandCrossing { .. }
            | Error::ClusterNotSeparated { .. } => ErrorKind::Infeasible,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
