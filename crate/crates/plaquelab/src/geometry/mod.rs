//! Reference geometry: the rectangular two-phase domain, staggered field
//! storage, boundary/interface traces, and a partition of unity whose members
//! have flat normal derivatives at the contact points.
//!
//! The reference domain is `[0, L] x [0, 1]` with
//!
//! * the *fluid* phase `0 < y < h`,
//! * the *solid* phase `h < y < 1`,
//! * the interface `Sigma = {y = h}` (grid-aligned by construction),
//! * the outer wall `S = {y = 1}`,
//! * the end faces `G = {x = 0} u {x = L}`, split per phase,
//! * the symmetry axis `{y = 0}`.
//!
//! Orientation conventions (used verbatim by every solver):
//!
//! * the interface normal `nu_Sigma` points from the solid into the fluid,
//!   i.e. `-e_y`; [`InterfaceOrientation::FluidIntoSolid`] flips it,
//! * jumps follow the one-sided-limit rule `[[v]] = v(+nu side) - v(-nu
//!   side)`, so under the default orientation `[[v]] = v_fluid - v_solid`
//!   (the normal points into the fluid), and the bracket flips sign with the
//!   normal,
//! * outward normals on `G` are `-e_x` (left) and `+e_x` (right); on `S` it is
//!   `+e_y`.

mod grid;
mod pou;
mod velocity;

pub use grid::{
    build_reference_domain, CellField, FaceXField, FaceYField, FieldRef, GeometryError,
    InterfaceOrientation, NodeField, Phase, PhaseCoeff, ReferenceGrid, Segment, Side, Trace,
};
pub use pou::{partition_of_unity, PartitionOfUnity, Patch};
pub use velocity::StagVelocity;
