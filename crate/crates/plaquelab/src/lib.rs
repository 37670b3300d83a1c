//! Desk-scale numerical laboratory for a two-phase flow / interface-growth
//! model in a vessel-like reference geometry.
//!
//! The reference domain is the rectangle `[0, L] x [0, 1]`: a fluid layer
//! `0 < y < h` below a solid ring `h < y < 1`, separated by the flat interface
//! `Sigma = {y = h}`. The outer wall `S = {y = 1}` bounds the solid, the end
//! faces `G = {x = 0} u {x = L}` carry outflow-type conditions, and `{y = 0}`
//! is a symmetry axis. All solvers work in Lagrangian (reference-domain)
//! coordinates on a staggered (MAC) grid and use backward-Euler time stepping
//! with a banded direct factorization, so results are deterministic.
//!
//! Module map:
//!
//! * [`geometry`] — reference grid, field storage, boundary traces, and a
//!   partition of unity with flattened normal derivatives at contact points.
//! * [`stokes`] — single-phase and two-phase unsteady Stokes solvers with
//!   interface jump conditions and outflow boundaries.
//! * [`heat`] — single-phase heat flows, the interface-coupled concentration
//!   pair, and the vector-valued parabolic transmission solver.
//! * [`elliptic`] — scalar transmission problems (Helmholtz and Laplace
//!   flavours), the divergence-reduction step, and the pressure-duality check.
//! * [`model_problems`] — reflection/extension operators, bent-domain
//!   pullbacks, perturbation terms, Neumann-series iteration, and the
//!   reflection-symmetry verification oracles.
//! * [`coupling`] — Lagrangian kinematics, the growth/surplus ODE pair,
//!   stress assembly, the quadratic right-hand-side terms, and the Picard
//!   fixed-point driver.
//! * [`norms_compat`] — Slobodeckij seminorms, discrete Sobolev norms,
//!   trajectory norms, and the data-compatibility checkers.
//!
//! Infrastructure lives in [`linalg`] (banded LU), [`expr`] (the tiny
//! expression language used by configuration files), [`report`] (structured
//! pass/fail condition reports), and [`exec`] (the parallel/sequential
//! execution switch; see the `parallel` cargo feature).

pub mod coupling;
pub mod elliptic;
pub mod exec;
pub mod expr;
pub mod geometry;
pub mod heat;
pub mod linalg;
pub mod model_problems;
pub mod norms_compat;
pub mod report;
pub mod stokes;

pub use report::{ConditionEntry, ConditionReport};
