//! Independent numerical ground truth.
//!
//! Nothing in here touches the symbolic transform path: quadrature integrates
//! the defining Laplace integral directly and RK4 integrates the differential
//! equation in state-space form.

mod quadrature;
mod rk4;

pub use quadrature::{
    gauss_legendre, integrate_composite, numeric_laplace, KahanSum, QuadratureConfig,
};
pub use rk4::{rk4_solve, rk4_solve_chain, OdeGrid, OdeSample};
