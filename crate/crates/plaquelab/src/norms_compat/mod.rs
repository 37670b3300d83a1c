//! Discrete Sobolev–Slobodeckij norms and data-compatibility checkers.
//!
//! The norms submodule provides computable fractional seminorms and integer
//! Sobolev norms used to measure traces, trajectories, and contraction
//! ratios. The compat submodule evaluates every algebraic identity the
//! problem data must satisfy at `t = 0` and at the contact points for the
//! solvers to accept the problem, reporting each as a named
//! [`crate::report::ConditionEntry`].

mod compat;
mod norms;

pub use compat::{
    check_heat_compatibility, check_nonlinear_initial, check_parabolic_transmission,
    check_stokes_compatibility, InitialParams, InitialState,
};
pub(crate) use compat::{deriv_into, trace_to_boundary};
pub use norms::{
    slobodeckij_seminorm, slobodeckij_seminorm_uniform, sobolev_norm_discrete, sobolev_w1_time,
    NormError,
};
