//! Unsteady Stokes solvers on the reference domain.
//!
//! The continuous problem is the linearized momentum/mass system
//!
//! ```text
//! rho d/dt u - Div S = f_u,   Div u = f_d        in each phase,
//! S = -pi I + mu (grad u + grad u^T)             (phase viscosity mu),
//! ```
//!
//! with, in the two-phase case, prescribed velocity and stress jumps across
//! the interface,
//!
//! ```text
//! [[u]] = g1,    [[S nu_Sigma]] = g2              on Sigma = {y = h},
//! ```
//!
//! outflow conditions on the end faces `G = {x = 0} u {x = L}`,
//!
//! ```text
//! u_y = g3,      -pi + 2 mu dx(u_x) = g4          on G,
//! ```
//!
//! no-slip data `u = g5` on the outer wall `S = {y = 1}`, symmetry on the
//! axis `{y = 0}` (`u_y = 0`, `dy(u_x) = 0`), and initial velocity `u0`.
//!
//! Discretization: MAC staggering (pressure at cell centers, `u_x` on
//! vertical faces, `u_y` on horizontal faces), backward Euler in time, and a
//! finite-volume *stress form* of the momentum balance: each momentum row
//! integrates `Div S` over a control volume, so the outflow datum `g4` is
//! exactly the natural x-flux on `G` and no derivative of data is ever
//! needed. The interface row of `u_y` is stored twice (per-phase traces) and
//! the `u_x` lattice is augmented with one ghost row per phase next to the
//! interface; the four extra unknown families are closed by the two jump
//! conditions, a summed conservative momentum balance over the control
//! volume straddling the interface, and the tangential-stress jump. With
//! equal coefficients and zero jump data this closure reduces *algebraically*
//! to the single-phase scheme, so the two-phase solver reproduces the
//! single-phase one to solver tolerance on the nose (a tested invariant).
//!
//! Submodules: [`solve_single_phase`] (one phase, per-side boundary
//! conditions), [`solve_two_phase`] (full interface coupling, compatibility
//! gated), [`solve_with_concentration_source`] (prescribed divergence source
//! from a solid concentration), [`stokes_residual`] (independent a-posteriori
//! residual), and [`pressure_duality_residual`] (weak-form duality check of
//! the discrete pressure).

mod expr;
mod single;
mod two_phase;

pub use single::solve_single_phase;
pub use two_phase::{solve_two_phase, solve_with_concentration_source};
pub(crate) use two_phase::{assemble_two_phase, TwoPhaseLayout};

use crate::geometry::{
    CellField, FaceXField, FaceYField, InterfaceOrientation, Phase, PhaseCoeff, ReferenceGrid,
    StagVelocity,
};
use crate::linalg::LinAlgError;
use crate::report::ConditionReport;
use std::fmt;

/// Errors reported by the Stokes solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum StokesError {
    /// Malformed problem data (shape mismatch, non-finite values, bad dt...).
    InvalidParameter { reason: String },
    /// The t = 0 data slice failed the compatibility checks; the report lists
    /// every checked condition with its residual.
    IncompatibleData { report: ConditionReport },
    /// All-Dirichlet boundaries but the boundary flux of the velocity data
    /// does not match the integrated divergence source: the discrete system
    /// is singular and no gauge fix can repair the data defect.
    IncompatibleFlux {
        level: usize,
        boundary_flux: f64,
        volume_source: f64,
    },
    /// A factored step left a residual above the safety threshold; the
    /// per-level relative residual history is attached for diagnosis.
    ResidualTooLarge {
        level: usize,
        residual: f64,
        history: Vec<f64>,
    },
    /// Linear-algebra failure (singular factorization, index bugs).
    LinAlg(LinAlgError),
}

impl fmt::Display for StokesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StokesError::InvalidParameter { reason } => {
                write!(f, "invalid Stokes problem: {reason}")
            }
            StokesError::IncompatibleData { report } => {
                write!(
                    f,
                    "initial/contact data fail compatibility: {:?}",
                    report.failed_names()
                )
            }
            StokesError::IncompatibleFlux {
                level,
                boundary_flux,
                volume_source,
            } => write!(
                f,
                "all-Dirichlet data are flux-incompatible at level {level}: \
                 boundary outflow {boundary_flux:.6e} != divergence source \
                 {volume_source:.6e}; the discrete system is singular"
            ),
            StokesError::ResidualTooLarge {
                level,
                residual,
                history,
            } => write!(
                f,
                "step {level} residual {residual:.3e} exceeds the safety \
                 threshold (history: {history:?})"
            ),
            StokesError::LinAlg(e) => write!(f, "linear algebra failure: {e}"),
        }
    }
}

impl std::error::Error for StokesError {}

impl From<LinAlgError> for StokesError {
    fn from(e: LinAlgError) -> Self {
        StokesError::LinAlg(e)
    }
}

/// Boundary-condition kind for one side of a single-phase domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcKind {
    /// Both velocity components prescribed.
    Dirichlet,
    /// Tangential velocity and normal stress (`-pi + 2 mu dn(u_n)`)
    /// prescribed; the natural condition for truncated ends.
    Outflow,
    /// Mirror symmetry: zero normal velocity, zero shear stress.
    Symmetry,
}

/// Sides of the rectangular domain, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSide {
    Bottom = 0,
    Top = 1,
    Left = 2,
    Right = 3,
}

impl EdgeSide {
    pub const ALL: [EdgeSide; 4] = [
        EdgeSide::Bottom,
        EdgeSide::Top,
        EdgeSide::Left,
        EdgeSide::Right,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_horizontal(self) -> bool {
        matches!(self, EdgeSide::Bottom | EdgeSide::Top)
    }
}

/// Per-side boundary-condition kinds for the single-phase solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SideBc {
    pub bottom: BcKind,
    pub top: BcKind,
    pub left: BcKind,
    pub right: BcKind,
}

impl SideBc {
    pub fn at(&self, side: EdgeSide) -> BcKind {
        match side {
            EdgeSide::Bottom => self.bottom,
            EdgeSide::Top => self.top,
            EdgeSide::Left => self.left,
            EdgeSide::Right => self.right,
        }
    }

    /// True when no side is an outflow side (every normal velocity is
    /// pinned), so the pressure is only determined up to a constant and the
    /// data must satisfy the net-flux identity.
    pub fn all_velocity_pinned(&self) -> bool {
        EdgeSide::ALL
            .iter()
            .all(|&s| !matches!(self.at(s), BcKind::Outflow))
    }
}

/// Which cell rows of the reference grid a single-phase solve runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinglePhaseDomain {
    /// Rows below the interface (`0 <= y <= h`).
    Fluid,
    /// Rows above the interface (`h <= y <= 1`).
    Solid,
    /// The whole rectangle (`0 <= y <= 1`), ignoring the interface.
    Whole,
}

impl SinglePhaseDomain {
    /// Half-open range of active cell rows.
    pub fn cell_rows(self, grid: &ReferenceGrid) -> std::ops::Range<usize> {
        match self {
            SinglePhaseDomain::Fluid => 0..grid.j_sigma,
            SinglePhaseDomain::Solid => grid.j_sigma..grid.ny,
            SinglePhaseDomain::Whole => 0..grid.ny,
        }
    }
}

/// Analytic data sampled into a [`SinglePhaseProblem`]. All methods default
/// to zero so tests override only what they need.
pub trait SinglePhaseData {
    /// Boundary velocity `(u_x, u_y)`; used for Dirichlet sides (both
    /// components) and for the tangential component of outflow sides.
    fn velocity(&self, _x: f64, _y: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Outflow normal-stress datum `-pi + 2 mu dn(u_n)` (outward normal).
    fn normal_stress(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Momentum forcing `f_u`.
    fn forcing(&self, _x: f64, _y: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Divergence source `f_d`.
    fn div_source(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Initial velocity `u0`.
    fn initial(&self, _x: f64, _y: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Fully sampled single-phase Stokes problem.
///
/// Per-side data layouts (`side_tan` / `side_nor`, indexed
/// `[EdgeSide::index()][level][position]`):
///
/// * horizontal sides: tangential datum (`u_x`) at the `nx + 1` node
///   abscissas; normal datum (`u_y` for Dirichlet, normal stress for
///   outflow) at the `nx` cell abscissas;
/// * vertical sides: tangential datum (`u_y`) at the `r + 1` horizontal-face
///   heights of the active rows; normal datum (`u_x` or normal stress) at
///   the `r` cell-row heights.
///
/// Symmetry sides ignore their data arrays. Forcing and divergence sources
/// are stored for levels `0..=nsteps` (level 0 unused by backward Euler).
#[derive(Debug, Clone)]
pub struct SinglePhaseProblem {
    pub domain: SinglePhaseDomain,
    pub bc: SideBc,
    pub rho: f64,
    pub mu: f64,
    pub dt: f64,
    pub nsteps: usize,
    pub f: Vec<(FaceXField, FaceYField)>,
    pub f_d: Vec<CellField>,
    pub side_tan: [Vec<Vec<f64>>; 4],
    pub side_nor: [Vec<Vec<f64>>; 4],
    pub u0: (FaceXField, FaceYField),
}

impl SinglePhaseProblem {
    /// Samples `data` on `grid` for `nsteps` backward-Euler steps of size
    /// `dt`.
    pub fn sample(
        grid: &ReferenceGrid,
        domain: SinglePhaseDomain,
        bc: SideBc,
        rho: f64,
        mu: f64,
        dt: f64,
        nsteps: usize,
        data: &impl SinglePhaseData,
    ) -> Self {
        let nlev = nsteps + 1;
        let mut f = Vec::with_capacity(nlev);
        let mut f_d = Vec::with_capacity(nlev);
        let mut side_tan: [Vec<Vec<f64>>; 4] = Default::default();
        let mut side_nor: [Vec<Vec<f64>>; 4] = Default::default();
        for n in 0..nlev {
            let t = n as f64 * dt;
            f.push((
                FaceXField::from_fn(grid, |x, y| data.forcing(x, y, t).0),
                FaceYField::from_fn(grid, |x, y| data.forcing(x, y, t).1),
            ));
            f_d.push(CellField::from_fn(grid, |x, y| data.div_source(x, y, t)));
            for side in EdgeSide::ALL {
                let (tan, nor) = sample_side(grid, domain, side, bc.at(side), data, t);
                side_tan[side.index()].push(tan);
                side_nor[side.index()].push(nor);
            }
        }
        SinglePhaseProblem {
            domain,
            bc,
            rho,
            mu,
            dt,
            nsteps,
            f,
            f_d,
            side_tan,
            side_nor,
            u0: (
                FaceXField::from_fn(grid, |x, y| data.initial(x, y).0),
                FaceYField::from_fn(grid, |x, y| data.initial(x, y).1),
            ),
        }
    }

    /// Shape/parameter validation; returns a message naming the defect.
    pub fn validate(&self, grid: &ReferenceGrid) -> Result<(), String> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(format!("dt must be positive and finite, got {}", self.dt));
        }
        if self.nsteps == 0 {
            return Err("nsteps must be at least 1".into());
        }
        if !(self.rho.is_finite() && self.rho > 0.0) || !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(format!(
                "rho and mu must be positive and finite, got rho={} mu={}",
                self.rho, self.mu
            ));
        }
        let rows = self.domain.cell_rows(grid);
        let r = rows.len();
        if grid.nx < 3 || r < 3 {
            return Err(format!(
                "domain too small: need nx >= 3 and >= 3 active cell rows, \
                 got nx={} rows={r}",
                grid.nx
            ));
        }
        let nlev = self.nsteps + 1;
        if self.f.len() != nlev || self.f_d.len() != nlev {
            return Err(format!(
                "need {} levels of forcing/divergence data, got {}/{}",
                nlev,
                self.f.len(),
                self.f_d.len()
            ));
        }
        for side in EdgeSide::ALL {
            let (want_tan, want_nor) = if side.is_horizontal() {
                (grid.nx + 1, grid.nx)
            } else {
                (r + 1, r)
            };
            let (tans, nors) = (&self.side_tan[side.index()], &self.side_nor[side.index()]);
            if tans.len() != nlev || nors.len() != nlev {
                return Err(format!("side data must have {nlev} levels on {side:?}"));
            }
            if tans.iter().any(|v| v.len() != want_tan) || nors.iter().any(|v| v.len() != want_nor)
            {
                return Err(format!(
                    "side data shape mismatch on {side:?}: want tan {want_tan}, nor {want_nor}"
                ));
            }
        }
        Ok(())
    }

    /// Largest data magnitude (for residual thresholds).
    pub fn data_scale(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (fx, fy) in &self.f {
            m = m.max(fx.max_abs()).max(fy.max_abs());
        }
        for fd in &self.f_d {
            m = m.max(fd.max_abs());
        }
        for arrs in self.side_tan.iter().chain(self.side_nor.iter()) {
            for a in arrs {
                for v in a {
                    m = m.max(v.abs());
                }
            }
        }
        m.max(self.u0.0.max_abs()).max(self.u0.1.max_abs())
    }
}

fn sample_side(
    grid: &ReferenceGrid,
    domain: SinglePhaseDomain,
    side: EdgeSide,
    kind: BcKind,
    data: &impl SinglePhaseData,
    t: f64,
) -> (Vec<f64>, Vec<f64>) {
    let rows = domain.cell_rows(grid);
    let (jr0, jr1) = (rows.start, rows.end);
    let (y_bot, y_top) = (jr0 as f64 * grid.dy, jr1 as f64 * grid.dy);
    match side {
        EdgeSide::Bottom | EdgeSide::Top => {
            let y = if side == EdgeSide::Bottom { y_bot } else { y_top };
            let tan = (0..=grid.nx)
                .map(|i| data.velocity(grid.xf(i), y, t).0)
                .collect();
            let nor = (0..grid.nx)
                .map(|i| match kind {
                    BcKind::Outflow => data.normal_stress(grid.xc(i), y, t),
                    _ => data.velocity(grid.xc(i), y, t).1,
                })
                .collect();
            (tan, nor)
        }
        EdgeSide::Left | EdgeSide::Right => {
            let x = if side == EdgeSide::Left { 0.0 } else { grid.l };
            let tan = (jr0..=jr1)
                .map(|j| data.velocity(x, grid.yf(j), t).1)
                .collect();
            let nor = (jr0..jr1)
                .map(|j| match kind {
                    BcKind::Outflow => data.normal_stress(x, grid.yc(j), t),
                    _ => data.velocity(x, grid.yc(j), t).0,
                })
                .collect();
            (tan, nor)
        }
    }
}

/// Analytic data sampled into a two-phase [`StokesProblem`]. All methods
/// default to zero.
pub trait StokesData {
    /// Momentum forcing `f_u`; `phase` disambiguates samples on the
    /// interface row.
    fn forcing(&self, _x: f64, _y: f64, _t: f64, _phase: Phase) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Divergence source `f_d` (cell centers never lie on the interface).
    fn div_source(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Velocity jump `g1 = [[u]]` on the interface: `(x, y)` components.
    fn jump_velocity(&self, _x: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Stress jump `g2 = [[S nu_Sigma]]` on the interface.
    fn jump_stress(&self, _x: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Tangential velocity `g3 = u_y` on the end faces; `phase`
    /// disambiguates the two one-sided limits at the contact height `y = h`.
    fn end_tangential(&self, _x: f64, _y: f64, _t: f64, _phase: Phase) -> f64 {
        0.0
    }
    /// Outflow normal stress `g4 = -pi + 2 mu dx(u_x)` on the end faces.
    fn end_normal_stress(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Wall velocity `g5 = (u_x, u_y)` on `{y = 1}`.
    fn wall_velocity(&self, _x: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Initial velocity `u0` (per phase, for one-sided interface traces).
    fn initial(&self, _x: f64, _y: f64, _phase: Phase) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Momentum forcing samples for one time level. The interface row of the
/// y-component is phase-ambiguous, so the fluid limit lives in `fy`'s row
/// `j_sigma` and the solid limit in `fy_sigma_solid` (matching
/// [`StagVelocity`]'s storage convention).
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    pub fx: FaceXField,
    pub fy: FaceYField,
    pub fy_sigma_solid: Vec<f64>,
}

impl ForceField {
    pub fn zeros(grid: &ReferenceGrid) -> Self {
        ForceField {
            fx: FaceXField::zeros(grid),
            fy: FaceYField::zeros(grid),
            fy_sigma_solid: vec![0.0; grid.nx],
        }
    }

    pub fn sample(grid: &ReferenceGrid, data: &impl StokesData, t: f64) -> Self {
        let mut out = ForceField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let phase = grid.phase_of_cell_row(j);
                out.fx.set(i, j, data.forcing(grid.xf(i), grid.yc(j), t, phase).0);
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let phase = if j <= grid.j_sigma {
                    Phase::Fluid
                } else {
                    Phase::Solid
                };
                out.fy.set(i, j, data.forcing(grid.xc(i), grid.yf(j), t, phase).1);
            }
        }
        for i in 0..grid.nx {
            out.fy_sigma_solid[i] = data.forcing(grid.xc(i), grid.h, t, Phase::Solid).1;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.fx
            .max_abs()
            .max(self.fy.max_abs())
            .max(self.fy_sigma_solid.iter().fold(0.0, |m, v| v.abs().max(m)))
    }
}

/// Fully sampled two-phase Stokes problem.
///
/// Data layouts (level index `0..=nsteps` first where present):
///
/// * `f` — forcing per level;
/// * `f_d` — divergence source per level at cell centers;
/// * `g1x`, `g2x` — x-components of the velocity/stress jumps at the
///   `nx + 1` interface node abscissas;
/// * `g1y`, `g2y` — y-components at the `nx` interface cell abscissas;
/// * `g3[side][level][j]` — end tangential velocity at horizontal-face
///   heights `j = 0..=ny` (the entry at `j = j_sigma` is *not used* by the
///   solver; the one-sided contact limits live in `g3_sigma_*`);
/// * `g3_sigma_fluid[side][level]` / `g3_sigma_solid[side][level]` — the
///   one-sided limits of `g3` at the contact points `(0, h)` and `(L, h)`;
/// * `g4[side][level][j]` — end normal stress at cell-row heights;
/// * `g5x[level][i]` (node abscissas) and `g5y[level][i]` (cell abscissas) —
///   wall velocity;
/// * `u0` — initial velocity with per-phase interface traces.
///
/// Side index: `0 = left`, `1 = right`.
#[derive(Debug, Clone)]
pub struct StokesProblem {
    pub rho: PhaseCoeff,
    pub mu: PhaseCoeff,
    pub dt: f64,
    pub nsteps: usize,
    pub orientation: InterfaceOrientation,
    pub f: Vec<ForceField>,
    pub f_d: Vec<CellField>,
    pub g1x: Vec<Vec<f64>>,
    pub g1y: Vec<Vec<f64>>,
    pub g2x: Vec<Vec<f64>>,
    pub g2y: Vec<Vec<f64>>,
    pub g3: [Vec<Vec<f64>>; 2],
    pub g3_sigma_fluid: [Vec<f64>; 2],
    pub g3_sigma_solid: [Vec<f64>; 2],
    pub g4: [Vec<Vec<f64>>; 2],
    pub g5x: Vec<Vec<f64>>,
    pub g5y: Vec<Vec<f64>>,
    pub u0: StagVelocity,
}

impl StokesProblem {
    /// Samples `data` on `grid` for `nsteps` backward-Euler steps of size
    /// `dt` under the default interface orientation.
    pub fn sample(
        grid: &ReferenceGrid,
        rho: PhaseCoeff,
        mu: PhaseCoeff,
        dt: f64,
        nsteps: usize,
        data: &impl StokesData,
    ) -> Self {
        let nlev = nsteps + 1;
        let mut p = StokesProblem {
            rho,
            mu,
            dt,
            nsteps,
            orientation: InterfaceOrientation::default(),
            f: Vec::with_capacity(nlev),
            f_d: Vec::with_capacity(nlev),
            g1x: Vec::new(),
            g1y: Vec::new(),
            g2x: Vec::new(),
            g2y: Vec::new(),
            g3: [Vec::new(), Vec::new()],
            g3_sigma_fluid: [Vec::new(), Vec::new()],
            g3_sigma_solid: [Vec::new(), Vec::new()],
            g4: [Vec::new(), Vec::new()],
            g5x: Vec::new(),
            g5y: Vec::new(),
            u0: StagVelocity::sample(
                grid,
                |x, y| data.initial(x, y, Phase::Fluid),
                |x, y| data.initial(x, y, Phase::Solid),
            ),
        };
        for n in 0..nlev {
            let t = n as f64 * dt;
            p.f.push(ForceField::sample(grid, data, t));
            p.f_d
                .push(CellField::from_fn(grid, |x, y| data.div_source(x, y, t)));
            p.g1x
                .push((0..=grid.nx).map(|i| data.jump_velocity(grid.xf(i), t).0).collect());
            p.g1y
                .push((0..grid.nx).map(|i| data.jump_velocity(grid.xc(i), t).1).collect());
            p.g2x
                .push((0..=grid.nx).map(|i| data.jump_stress(grid.xf(i), t).0).collect());
            p.g2y
                .push((0..grid.nx).map(|i| data.jump_stress(grid.xc(i), t).1).collect());
            for (s, &x) in [0.0, grid.l].iter().enumerate() {
                p.g3[s].push(
                    (0..=grid.ny)
                        .map(|j| {
                            let phase = if j <= grid.j_sigma {
                                Phase::Fluid
                            } else {
                                Phase::Solid
                            };
                            data.end_tangential(x, grid.yf(j), t, phase)
                        })
                        .collect(),
                );
                p.g3_sigma_fluid[s].push(data.end_tangential(x, grid.h, t, Phase::Fluid));
                p.g3_sigma_solid[s].push(data.end_tangential(x, grid.h, t, Phase::Solid));
                p.g4[s].push(
                    (0..grid.ny)
                        .map(|j| data.end_normal_stress(x, grid.yc(j), t))
                        .collect(),
                );
            }
            p.g5x
                .push((0..=grid.nx).map(|i| data.wall_velocity(grid.xf(i), t).0).collect());
            p.g5y
                .push((0..grid.nx).map(|i| data.wall_velocity(grid.xc(i), t).1).collect());
        }
        p
    }

    /// Shape/parameter validation; returns a message naming the defect.
    pub fn validate(&self, grid: &ReferenceGrid) -> Result<(), String> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(format!("dt must be positive and finite, got {}", self.dt));
        }
        if self.nsteps == 0 {
            return Err("nsteps must be at least 1".into());
        }
        for (name, c) in [("rho", &self.rho), ("mu", &self.mu)] {
            for v in [c.fluid, c.solid] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(format!("{name} must be positive and finite, got {v}"));
                }
            }
        }
        if grid.nx < 3 || grid.j_sigma < 3 || grid.ny - grid.j_sigma < 3 {
            return Err(format!(
                "grid too small: need nx >= 3 and >= 3 cell rows per phase, \
                 got nx={} fluid rows={} solid rows={}",
                grid.nx,
                grid.j_sigma,
                grid.ny - grid.j_sigma
            ));
        }
        let nlev = self.nsteps + 1;
        let lens_ok = self.f.len() == nlev
            && self.f_d.len() == nlev
            && [&self.g1x, &self.g1y, &self.g2x, &self.g2y, &self.g5x, &self.g5y]
                .iter()
                .all(|v| v.len() == nlev)
            && self.g3.iter().all(|v| v.len() == nlev)
            && self.g4.iter().all(|v| v.len() == nlev)
            && self.g3_sigma_fluid.iter().all(|v| v.len() == nlev)
            && self.g3_sigma_solid.iter().all(|v| v.len() == nlev);
        if !lens_ok {
            return Err(format!("all data families must have {nlev} levels"));
        }
        let shapes_ok = self.g1x.iter().chain(&self.g2x).all(|v| v.len() == grid.nx + 1)
            && self.g1y.iter().chain(&self.g2y).all(|v| v.len() == grid.nx)
            && self.g5x.iter().all(|v| v.len() == grid.nx + 1)
            && self.g5y.iter().all(|v| v.len() == grid.nx)
            && self.g3.iter().all(|s| s.iter().all(|v| v.len() == grid.ny + 1))
            && self.g4.iter().all(|s| s.iter().all(|v| v.len() == grid.ny));
        if !shapes_ok {
            return Err("interface/boundary data shape mismatch".into());
        }
        Ok(())
    }

    /// Largest data magnitude (for residual thresholds).
    pub fn data_scale(&self) -> f64 {
        let mut m: f64 = 0.0;
        for ff in &self.f {
            m = m.max(ff.max_abs());
        }
        for fd in &self.f_d {
            m = m.max(fd.max_abs());
        }
        let flat = |arrs: &Vec<Vec<f64>>| -> f64 {
            arrs.iter()
                .flat_map(|v| v.iter())
                .fold(0.0f64, |acc, v| acc.max(v.abs()))
        };
        for fam in [&self.g1x, &self.g1y, &self.g2x, &self.g2y, &self.g5x, &self.g5y] {
            m = m.max(flat(fam));
        }
        for s in 0..2 {
            m = m.max(flat(&self.g3[s])).max(flat(&self.g4[s]));
            for v in self.g3_sigma_fluid[s].iter().chain(&self.g3_sigma_solid[s]) {
                m = m.max(v.abs());
            }
        }
        m.max(self.u0.max_abs())
    }
}

/// Discrete trajectory produced by the Stokes solvers.
///
/// Velocities are stored for levels `0..=nsteps` (level 0 is the sampled
/// initial datum). The pressure of a backward-Euler step belongs to the *new*
/// time level, so `p[0]` (and the level-0 trace entries) are kept as zeros:
/// the scheme never defines an initial pressure.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub u: Vec<StagVelocity>,
    pub p: Vec<CellField>,
    /// One-sided pressure traces on the interface (cell abscissas), per
    /// level.
    pub p_sigma_fluid: Vec<Vec<f64>>,
    pub p_sigma_solid: Vec<Vec<f64>>,
    /// Oriented pressure jump across the interface, per level.
    pub p_jump_sigma: Vec<Vec<f64>>,
    /// Pressure traces on the end faces (`[left, right]`, cell-row heights),
    /// per level.
    pub p_end: Vec<[Vec<f64>; 2]>,
    /// Relative residual of each solved linear system (levels `1..=nsteps`).
    pub step_residuals: Vec<f64>,
    pub dt: f64,
}

impl StokesSolution {
    pub(crate) fn with_zeros(grid: &ReferenceGrid, nsteps: usize, dt: f64) -> Self {
        StokesSolution {
            u: Vec::with_capacity(nsteps + 1),
            p: vec![CellField::zeros(grid)],
            p_sigma_fluid: vec![vec![0.0; grid.nx]],
            p_sigma_solid: vec![vec![0.0; grid.nx]],
            p_jump_sigma: vec![vec![0.0; grid.nx]],
            p_end: vec![[vec![0.0; grid.ny], vec![0.0; grid.ny]]],
            step_residuals: Vec::with_capacity(nsteps),
            dt,
        }
    }

    /// Records a level's pressure with one-sided interface/end traces.
    pub(crate) fn push_pressure(&mut self, grid: &ReferenceGrid, orientation: InterfaceOrientation, p: CellField) {
        let js = grid.j_sigma;
        let jsign = orientation.jump_sign();
        let mut trf = vec![0.0; grid.nx];
        let mut trs = vec![0.0; grid.nx];
        let mut jump = vec![0.0; grid.nx];
        for i in 0..grid.nx {
            let f = 1.5 * p.at(i, js - 1) - 0.5 * p.at(i, js - 2);
            let s = 1.5 * p.at(i, js) - 0.5 * p.at(i, js + 1);
            trf[i] = f;
            trs[i] = s;
            jump[i] = jsign * (s - f);
        }
        let mut ends = [vec![0.0; grid.ny], vec![0.0; grid.ny]];
        for j in 0..grid.ny {
            ends[0][j] = 1.5 * p.at(0, j) - 0.5 * p.at(1, j);
            ends[1][j] = 1.5 * p.at(grid.nx - 1, j) - 0.5 * p.at(grid.nx - 2, j);
        }
        self.p_sigma_fluid.push(trf);
        self.p_sigma_solid.push(trs);
        self.p_jump_sigma.push(jump);
        self.p_end.push(ends);
        self.p.push(p);
    }

    /// Largest relative residual over all solved steps.
    pub fn max_step_residual(&self) -> f64 {
        self.step_residuals.iter().fold(0.0f64, |m, r| m.max(*r))
    }
}
