//! Parabolic solvers on the reference domain: single-phase heat equations
//! with Neumann data, the coupled two-phase concentration pair with
//! permeability transmission, and the vector-valued parabolic transmission
//! system used by the velocity reduction.

mod scalar;
mod transmission;

pub use scalar::{
    solve_coupled_concentrations, solve_heat_neumann, CoupledTrajectory, HeatError, HeatProblem,
    HeatTrajectory,
};
pub use transmission::{
    solve_parabolic_transmission, ParabolicTransmissionProblem, TransmissionData, VectorTrajectory,
};

pub(crate) use scalar::region_rows;
