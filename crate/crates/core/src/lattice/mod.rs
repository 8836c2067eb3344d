pub mod boxop;
pub mod fiber;
pub mod flux;
pub mod matrix;

pub use boxop::{add_onsite_disorder, plaquette_flux, symmetric_gauge_box, Boundary, BoxOperator};
pub use fiber::{
    harper_family, harper_fiber, hofstadter_family, hofstadter_fiber, peierls_quantize, BlochFiberFamily, FiberZone,
    FourierDispersion, Gauge,
};
pub use flux::RationalFlux;
pub use matrix::{CMatrix, HermitianMatrix};
