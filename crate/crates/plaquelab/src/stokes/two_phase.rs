//! Two-phase unsteady Stokes with velocity/stress jump transmission.
//!
//! Unknowns per time level: the single-valued `vx` lattice plus one ghost
//! row per phase next to the interface (`vxg_f` extends the fluid upward to
//! `y = h + dy/2`, `vxg_s` extends the solid downward to `y = h - dy/2`),
//! the `vy` lattice whose interface row holds the fluid trace plus a second
//! solid-trace row `ss`, and a single-valued pressure. The four interface
//! unknown families are closed by four interface rows per column:
//!
//! * tangential velocity jump: the mid-interface averages of each phase's
//!   (value, ghost) pair differ by `g1 . e_x`;
//! * tangential stress jump: the one-sided shear stresses, formed with
//!   *centered* cross-interface differences through the ghosts, differ by
//!   `g2 . e_x`;
//! * normal velocity jump: the two `u_y` traces differ by `g1 . e_y`;
//! * a *summed* conservative momentum balance over the control volume
//!   straddling the interface, with the prescribed normal-stress jump
//!   `g2 . e_y` entering as a surface source on the right-hand side.
//!
//! With equal coefficients and zero jump data the first three rows force the
//! ghosts and the doubled trace to coincide with the single-valued lattice,
//! and every remaining row then *is* the single-phase stress-form scheme;
//! the two-phase solver therefore reproduces [`super::solve_single_phase`]
//! node-wise to solver tolerance (tested below).

use super::expr::{impose, LinExpr};
use super::{StokesError, StokesProblem, StokesSolution};
use crate::geometry::{CellField, Phase, ReferenceGrid, StagVelocity};
use crate::linalg::SystemBuilder;
use crate::norms_compat::check_stokes_compatibility;

/// Unknown ordering, level by level from the axis: `[vy row j | vx row j |
/// p row j]`, except that the interface row `j = j_sigma` of `vy` is
/// replaced by the cluster `[vxg_f | vy fluid trace | ss | vxg_s]`.
pub(crate) struct TwoPhaseLayout {
    pub nx: usize,
    pub ny: usize,
    pub js: usize,
}

impl TwoPhaseLayout {
    pub fn new(grid: &ReferenceGrid) -> Self {
        TwoPhaseLayout {
            nx: grid.nx,
            ny: grid.ny,
            js: grid.j_sigma,
        }
    }

    pub fn n(&self) -> usize {
        self.ny * (3 * self.nx + 1) + (3 * self.nx + 2) + self.nx
    }

    /// Start of the `vy`-block (or interface cluster) of level `j`.
    fn base(&self, j: usize) -> usize {
        let plain = j * (3 * self.nx + 1);
        if j > self.js {
            plain + 3 * self.nx + 2
        } else {
            plain
        }
    }

    pub fn vy(&self, i: usize, j: usize) -> usize {
        if j == self.js {
            // Fluid-side trace inside the cluster.
            self.base(j) + self.nx + 1 + i
        } else {
            self.base(j) + i
        }
    }

    /// Fluid ghost of `vx` at the solid-side row `j_sigma`.
    pub fn vxg_f(&self, i: usize) -> usize {
        self.base(self.js) + i
    }

    /// Solid-side `vy` trace on the interface.
    pub fn ss(&self, i: usize) -> usize {
        self.base(self.js) + 2 * self.nx + 1 + i
    }

    /// Solid ghost of `vx` at the fluid-side row `j_sigma - 1`.
    pub fn vxg_s(&self, i: usize) -> usize {
        self.base(self.js) + 3 * self.nx + 1 + i
    }

    fn vy_block_len(&self, j: usize) -> usize {
        if j == self.js {
            4 * self.nx + 2
        } else {
            self.nx
        }
    }

    pub fn vx(&self, i: usize, j: usize) -> usize {
        self.base(j) + self.vy_block_len(j) + i
    }

    pub fn p(&self, i: usize, j: usize) -> usize {
        self.base(j) + self.vy_block_len(j) + self.nx + 1 + i
    }

    /// Packs a solution level into a raw unknown vector (the exact inverse
    /// of the solver's unpacking; ghosts are reconstructed from the stored
    /// per-phase traces). Used by the discrete-adjoint pressure check.
    pub fn pack(&self, u: &StagVelocity, p: &CellField) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        for j in 0..self.ny {
            for i in 0..=self.nx {
                x[self.vx(i, j)] = u.vx.at(i, j);
            }
            for i in 0..self.nx {
                x[self.p(i, j)] = p.at(i, j);
            }
        }
        for j in 0..=self.ny {
            for i in 0..self.nx {
                x[self.vy(i, j)] = u.vy.at(i, j);
            }
        }
        for i in 0..self.nx {
            x[self.ss(i)] = u.vy_sigma_solid[i];
        }
        for i in 0..=self.nx {
            x[self.vxg_f(i)] = 2.0 * u.vx_sigma_fluid[i] - u.vx.at(i, self.js - 1);
            x[self.vxg_s(i)] = 2.0 * u.vx_sigma_solid[i] - u.vx.at(i, self.js);
        }
        x
    }
}

/// One time level of the two-phase assembly.
struct Asm<'a> {
    grid: &'a ReferenceGrid,
    prob: &'a StokesProblem,
    lay: &'a TwoPhaseLayout,
    level: usize,
    prev: &'a StagVelocity,
}

impl Asm<'_> {
    fn mu_row(&self, j: usize) -> f64 {
        if j < self.lay.js {
            self.prob.mu.fluid
        } else {
            self.prob.mu.solid
        }
    }
    fn rho_row(&self, j: usize) -> f64 {
        if j < self.lay.js {
            self.prob.rho.fluid
        } else {
            self.prob.rho.solid
        }
    }
    /// End tangential datum at a non-interface node height.
    fn g3v(&self, side: usize, j: usize) -> f64 {
        self.prob.g3[side][self.level][j]
    }
    fn g3_sigma(&self, side: usize, phase: Phase) -> f64 {
        match phase {
            Phase::Fluid => self.prob.g3_sigma_fluid[side][self.level],
            Phase::Solid => self.prob.g3_sigma_solid[side][self.level],
        }
    }

    /// `S_xx` at cell `(i, j)`.
    fn sxx(&self, i: usize, j: usize) -> LinExpr {
        let (lay, dx) = (self.lay, self.grid.dx);
        let mu = self.mu_row(j);
        LinExpr::term(lay.p(i, j), -1.0)
            .with(lay.vx(i + 1, j), 2.0 * mu / dx)
            .with(lay.vx(i, j), -2.0 * mu / dx)
    }

    /// `S_yy` at cell `(i, j)`; the solid interface cell reads its bottom
    /// `u_y` from the solid trace.
    fn syy(&self, i: usize, j: usize) -> LinExpr {
        let (lay, dy) = (self.lay, self.grid.dy);
        let mu = self.mu_row(j);
        let bot = if j == lay.js {
            lay.ss(i)
        } else {
            lay.vy(i, j)
        };
        LinExpr::term(lay.p(i, j), -1.0)
            .with(lay.vy(i, j + 1), 2.0 * mu / dy)
            .with(bot, -2.0 * mu / dy)
    }

    /// `S_xy` at a non-interface node `(i, j)`, `j != j_sigma`: zero on the
    /// axis (symmetry), one-sided against the wall datum at `j = ny`,
    /// one-sided against the end tangential datum at `i = 0, nx`.
    fn sxy_reg(&self, i: usize, j: usize) -> LinExpr {
        let (lay, nx) = (self.lay, self.lay.nx);
        let (dx, dy) = (self.grid.dx, self.grid.dy);
        if j == 0 {
            return LinExpr::zero();
        }
        let mu = if j < lay.js {
            self.prob.mu.fluid
        } else {
            self.prob.mu.solid
        };
        let mut e = if j == lay.ny {
            LinExpr::term(lay.vx(i, j - 1), -2.0 / dy)
                .plus_con(2.0 / dy * self.prob.g5x[self.level][i])
        } else {
            LinExpr::term(lay.vx(i, j), 1.0 / dy).with(lay.vx(i, j - 1), -1.0 / dy)
        };
        e = if i == 0 {
            e.with(lay.vy(0, j), 2.0 / dx)
                .plus_con(-2.0 / dx * self.g3v(0, j))
        } else if i == nx {
            e.with(lay.vy(nx - 1, j), -2.0 / dx)
                .plus_con(2.0 / dx * self.g3v(1, j))
        } else {
            e.with(lay.vy(i, j), 1.0 / dx).with(lay.vy(i - 1, j), -1.0 / dx)
        };
        e.scaled(mu)
    }

    /// One-sided `S_xy` on the interface at node abscissa `i`: centered
    /// cross-interface difference through the phase's ghost row plus the
    /// tangential derivative of that phase's `u_y` trace (one-sided against
    /// the per-phase contact datum at the ends).
    fn sxy_sigma(&self, i: usize, phase: Phase) -> LinExpr {
        let (lay, nx) = (self.lay, self.lay.nx);
        let (dx, dy) = (self.grid.dx, self.grid.dy);
        let (mu, dyux) = match phase {
            Phase::Fluid => (
                self.prob.mu.fluid,
                LinExpr::term(lay.vxg_f(i), 1.0 / dy).with(lay.vx(i, lay.js - 1), -1.0 / dy),
            ),
            Phase::Solid => (
                self.prob.mu.solid,
                LinExpr::term(lay.vx(i, lay.js), 1.0 / dy).with(lay.vxg_s(i), -1.0 / dy),
            ),
        };
        let trace = |k: usize| match phase {
            Phase::Fluid => lay.vy(k, lay.js),
            Phase::Solid => lay.ss(k),
        };
        let mut e = dyux;
        if i == 0 {
            e = e
                .with(trace(0), 2.0 / dx)
                .plus_con(-2.0 / dx * self.g3_sigma(0, phase));
        } else if i == nx {
            e = e
                .with(trace(nx - 1), -2.0 / dx)
                .plus_con(2.0 / dx * self.g3_sigma(1, phase));
        } else {
            e = e.with(trace(i), 1.0 / dx).with(trace(i - 1), -1.0 / dx);
        }
        e.scaled(mu)
    }

    /// `S_xy` at node `(i, jn)` as seen from the control volume of cell row
    /// `row_j` (selects the one-sided stress on the interface).
    fn sxy_at(&self, i: usize, jn: usize, row_j: usize) -> LinExpr {
        if jn == self.lay.js {
            let phase = if row_j < self.lay.js {
                Phase::Fluid
            } else {
                Phase::Solid
            };
            self.sxy_sigma(i, phase)
        } else {
            self.sxy_reg(i, jn)
        }
    }

    fn assemble(&self) -> Result<SystemBuilder, StokesError> {
        let (grid, prob, lay) = (self.grid, self.prob, self.lay);
        let (dx, dy, dt) = (grid.dx, grid.dy, prob.dt);
        let (nx, ny, js) = (lay.nx, lay.ny, lay.js);
        let jsign = prob.orientation.jump_sign();
        let n_y = prob.orientation.normal_y();
        let ff = &prob.f[self.level];
        let fd = &prob.f_d[self.level];
        let mut sys = SystemBuilder::new(lay.n());

        // x-momentum on every vertical face; the ends are always outflow
        // half-volume balances carrying the g4 datum.
        for j in 0..ny {
            let (rho, mu_unused) = (self.rho_row(j), ());
            let _ = mu_unused;
            for i in 0..=nx {
                let me = lay.vx(i, j);
                let mut e = LinExpr::term(me, rho / dt);
                if i == 0 {
                    e.add_scaled(&self.sxx(0, j), -2.0 / dx);
                    e.con += 2.0 / dx * prob.g4[0][self.level][j];
                } else if i == nx {
                    e.add_scaled(&self.sxx(nx - 1, j), 2.0 / dx);
                    e.con += -2.0 / dx * prob.g4[1][self.level][j];
                } else {
                    e.add_scaled(&self.sxx(i, j), -1.0 / dx);
                    e.add_scaled(&self.sxx(i - 1, j), 1.0 / dx);
                }
                e.add_scaled(&self.sxy_at(i, j + 1, j), -1.0 / dy);
                e.add_scaled(&self.sxy_at(i, j, j), 1.0 / dy);
                let rhs = ff.fx.at(i, j) + rho / dt * self.prev.vx.at(i, j);
                impose(&mut sys, me, &e, rhs)?;
            }
        }

        // y-momentum on horizontal faces off the interface; axis and wall
        // pins.
        for j in 0..=ny {
            if j == js {
                continue;
            }
            for i in 0..nx {
                let me = lay.vy(i, j);
                if j == 0 {
                    impose(&mut sys, me, &LinExpr::term(me, 1.0), 0.0)?;
                    continue;
                }
                if j == ny {
                    impose(&mut sys, me, &LinExpr::term(me, 1.0), prob.g5y[self.level][i])?;
                    continue;
                }
                let rho = if j < js {
                    prob.rho.fluid
                } else {
                    prob.rho.solid
                };
                let mut e = LinExpr::term(me, rho / dt);
                e.add_scaled(&self.syy(i, j), -1.0 / dy);
                e.add_scaled(&self.syy(i, j - 1), 1.0 / dy);
                e.add_scaled(&self.sxy_reg(i + 1, j), -1.0 / dx);
                e.add_scaled(&self.sxy_reg(i, j), 1.0 / dx);
                let rhs = ff.fy.at(i, j) + rho / dt * self.prev.vy.at(i, j);
                impose(&mut sys, me, &e, rhs)?;
            }
        }

        // Interface cluster.
        let g1x = &prob.g1x[self.level];
        let g1y = &prob.g1y[self.level];
        let g2x = &prob.g2x[self.level];
        let g2y = &prob.g2y[self.level];
        for i in 0..=nx {
            // Tangential velocity jump of the mid-interface averages.
            let row = lay.vxg_f(i);
            let e = LinExpr::term(lay.vxg_s(i), 0.5 * jsign)
                .with(lay.vx(i, js), 0.5 * jsign)
                .with(lay.vx(i, js - 1), -0.5 * jsign)
                .with(lay.vxg_f(i), -0.5 * jsign);
            impose(&mut sys, row, &e, g1x[i])?;

            // Tangential stress jump of the one-sided shears.
            let row = lay.vxg_s(i);
            let mut e = LinExpr::zero();
            e.add_scaled(&self.sxy_sigma(i, Phase::Solid), jsign * n_y);
            e.add_scaled(&self.sxy_sigma(i, Phase::Fluid), -jsign * n_y);
            impose(&mut sys, row, &e, g2x[i])?;
        }
        let (rho_f, rho_s) = (prob.rho.fluid, prob.rho.solid);
        for i in 0..nx {
            // Normal velocity jump of the two traces.
            let row = lay.ss(i);
            let e = LinExpr::term(lay.ss(i), jsign).with(lay.vy(i, js), -jsign);
            impose(&mut sys, row, &e, g1y[i])?;

            // Summed conservative balance over the straddling control
            // volume; the prescribed normal-stress jump is the surface
            // source `-jsign nu_y g2y / dy`.
            let row = lay.vy(i, js);
            let mut e = LinExpr::term(lay.vy(i, js), 0.5 * rho_f / dt)
                .with(lay.ss(i), 0.5 * rho_s / dt);
            e.add_scaled(&self.syy(i, js), -1.0 / dy);
            e.add_scaled(&self.syy(i, js - 1), 1.0 / dy);
            let mut sxy_mean = |k: usize, sgn: f64, e: &mut LinExpr| {
                e.add_scaled(&self.sxy_sigma(k, Phase::Fluid), 0.5 * sgn / dx);
                e.add_scaled(&self.sxy_sigma(k, Phase::Solid), 0.5 * sgn / dx);
            };
            sxy_mean(i + 1, -1.0, &mut e);
            sxy_mean(i, 1.0, &mut e);
            let rhs = 0.5 * (ff.fy.at(i, js) + ff.fy_sigma_solid[i])
                + 0.5 / dt * (rho_f * self.prev.vy.at(i, js) + rho_s * self.prev.vy_sigma_solid[i])
                - jsign * n_y * g2y[i] / dy;
            impose(&mut sys, row, &e, rhs)?;
        }

        // Divergence rows; the solid interface cell reads its bottom trace.
        for j in 0..ny {
            for i in 0..nx {
                let bot = if j == js { lay.ss(i) } else { lay.vy(i, j) };
                let e = LinExpr::term(lay.vx(i + 1, j), 1.0 / dx)
                    .with(lay.vx(i, j), -1.0 / dx)
                    .with(lay.vy(i, j + 1), 1.0 / dy)
                    .with(bot, -1.0 / dy);
                impose(&mut sys, lay.p(i, j), &e, fd.at(i, j))?;
            }
        }
        Ok(sys)
    }
}

pub(crate) fn assemble_two_phase(
    grid: &ReferenceGrid,
    problem: &StokesProblem,
    lay: &TwoPhaseLayout,
    level: usize,
    prev: &StagVelocity,
) -> Result<SystemBuilder, StokesError> {
    Asm {
        grid,
        prob: problem,
        lay,
        level,
        prev,
    }
    .assemble()
}

/// Solves the sampled two-phase problem. Refuses data that fail the
/// compatibility checks (the report carries one entry per identity) and
/// returns the trajectory with per-phase interface traces for velocity and
/// one-sided pressure traces per level.
pub fn solve_two_phase(
    grid: &ReferenceGrid,
    problem: &StokesProblem,
) -> Result<StokesSolution, StokesError> {
    problem
        .validate(grid)
        .map_err(|reason| StokesError::InvalidParameter { reason })?;
    let report = check_stokes_compatibility(grid, problem, None);
    if !report.all_passed() {
        return Err(StokesError::IncompatibleData { report });
    }
    let lay = TwoPhaseLayout::new(grid);
    let scale = problem.data_scale();
    let mut sol = StokesSolution::with_zeros(grid, problem.nsteps, problem.dt);
    sol.u.push(problem.u0.clone());
    let mut prev = problem.u0.clone();
    let mut lu = None;
    for n in 1..=problem.nsteps {
        let sys = assemble_two_phase(grid, problem, &lay, n, &prev)?;
        if lu.is_none() {
            lu = Some(sys.factor()?);
        }
        let mut x = sys.rhs().to_vec();
        lu.as_ref().unwrap().solve_in_place(&mut x);
        let rnorm = sys
            .residual(&x)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let bnorm = sys.rhs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rel = rnorm / (1.0 + bnorm);
        sol.step_residuals.push(rel);
        if rel > 1e-8 * (1.0 + scale) {
            return Err(StokesError::ResidualTooLarge {
                level: n,
                residual: rel,
                history: sol.step_residuals.clone(),
            });
        }
        let (u, p) = unpack(grid, &lay, &x);
        prev = u.clone();
        sol.u.push(u);
        sol.push_pressure(grid, problem.orientation, p);
    }
    Ok(sol)
}

fn unpack(grid: &ReferenceGrid, lay: &TwoPhaseLayout, x: &[f64]) -> (StagVelocity, CellField) {
    let mut u = StagVelocity::zeros(grid);
    let mut p = CellField::zeros(grid);
    for j in 0..lay.ny {
        for i in 0..=lay.nx {
            u.vx.set(i, j, x[lay.vx(i, j)]);
        }
        for i in 0..lay.nx {
            p.set(i, j, x[lay.p(i, j)]);
        }
    }
    for j in 0..=lay.ny {
        for i in 0..lay.nx {
            u.vy.set(i, j, x[lay.vy(i, j)]);
        }
    }
    let js = lay.js;
    for i in 0..lay.nx {
        u.vy_sigma_solid[i] = x[lay.ss(i)];
    }
    for i in 0..=lay.nx {
        u.vx_sigma_fluid[i] = 0.5 * (x[lay.vxg_f(i)] + u.vx.at(i, js - 1));
        u.vx_sigma_solid[i] = 0.5 * (x[lay.vxg_s(i)] + u.vx.at(i, js));
    }
    (u, p)
}

/// Two-phase solve with the divergence source `f_d + (gamma beta / rho_s)
/// c_s 1_solid` induced by a prescribed solid concentration trajectory
/// (levels `0..=nsteps`). With `c_s = 0` the output is identical to
/// [`solve_two_phase`] (same code path).
pub fn solve_with_concentration_source(
    grid: &ReferenceGrid,
    problem: &StokesProblem,
    c_s: &[CellField],
    gamma: f64,
    beta: f64,
) -> Result<StokesSolution, StokesError> {
    if c_s.len() != problem.nsteps + 1 {
        return Err(StokesError::InvalidParameter {
            reason: format!(
                "need {} concentration levels, got {}",
                problem.nsteps + 1,
                c_s.len()
            ),
        });
    }
    if !(gamma.is_finite() && beta.is_finite() && gamma >= 0.0 && beta >= 0.0) {
        return Err(StokesError::InvalidParameter {
            reason: format!("gamma and beta must be finite and nonnegative, got {gamma}, {beta}"),
        });
    }
    let mut eff = problem.clone();
    let w = gamma * beta / problem.rho.solid;
    for (n, cs) in c_s.iter().enumerate() {
        for j in grid.j_sigma..grid.ny {
            for i in 0..grid.nx {
                eff.f_d[n].add(i, j, w * cs.at(i, j));
            }
        }
    }
    solve_two_phase(grid, &eff)
}

#[cfg(test)]
mod tests {
    use super::super::{
        solve_single_phase, BcKind, SideBc, SinglePhaseData, SinglePhaseDomain,
        SinglePhaseProblem, StokesData,
    };
    use super::*;
    use crate::geometry::{build_reference_domain, PhaseCoeff};
    use std::f64::consts::PI;

    struct Zero;
    impl StokesData for Zero {}

    fn coeffs(f: f64, s: f64) -> PhaseCoeff {
        PhaseCoeff::new(f, s)
    }

    #[test]
    fn zero_data_zero_solution() {
        let grid = build_reference_domain(1.0, 0.5, 6, 8).unwrap();
        let p = StokesProblem::sample(&grid, coeffs(1.0, 2.0), coeffs(1.0, 3.0), 0.1, 3, &Zero);
        let sol = solve_two_phase(&grid, &p).unwrap();
        for n in 0..=3 {
            assert!(sol.u[n].max_abs() < 1e-13, "level {n}");
            assert!(sol.p[n].max_abs() < 1e-13, "level {n}");
        }
    }

    /// Smooth continuous data with equal coefficients: the interface rows
    /// force the ghosts onto the lattice and the scheme degenerates
    /// algebraically into the single-phase one, so the two solvers must
    /// agree node-wise to solver tolerance (not discretization order).
    struct EqData {
        l: f64,
    }
    impl StokesData for EqData {
        fn forcing(&self, x: f64, y: f64, _t: f64, _phase: Phase) -> (f64, f64) {
            ((x + y).sin(), (x - y).cos())
        }
        fn end_normal_stress(&self, _x: f64, y: f64, t: f64) -> f64 {
            t * (2.0 * PI * y).cos()
        }
        fn wall_velocity(&self, x: f64, t: f64) -> (f64, f64) {
            (t * (PI * x / self.l).sin(), 0.0)
        }
    }
    impl SinglePhaseData for EqData {
        fn velocity(&self, x: f64, _y: f64, t: f64) -> (f64, f64) {
            (t * (PI * x / self.l).sin(), 0.0)
        }
        fn normal_stress(&self, _x: f64, y: f64, t: f64) -> f64 {
            t * (2.0 * PI * y).cos()
        }
        fn forcing(&self, x: f64, y: f64, _t: f64) -> (f64, f64) {
            ((x + y).sin(), (x - y).cos())
        }
    }

    #[test]
    fn equal_coefficients_reduce_to_single_phase() {
        let grid = build_reference_domain(2.0, 0.5, 8, 12).unwrap();
        let data = EqData { l: grid.l };
        let (rho, mu, dt, nsteps) = (1.3, 0.7, 0.1, 3);
        let p2 = StokesProblem::sample(&grid, coeffs(rho, rho), coeffs(mu, mu), dt, nsteps, &data);
        let sol2 = solve_two_phase(&grid, &p2).unwrap();
        let bc = SideBc {
            bottom: BcKind::Symmetry,
            top: BcKind::Dirichlet,
            left: BcKind::Outflow,
            right: BcKind::Outflow,
        };
        let p1 = SinglePhaseProblem::sample(
            &grid,
            SinglePhaseDomain::Whole,
            bc,
            rho,
            mu,
            dt,
            nsteps,
            &data,
        );
        let sol1 = solve_single_phase(&grid, &p1).unwrap();
        let js = grid.j_sigma;
        for n in 1..=nsteps {
            let (u2, u1) = (&sol2.u[n], &sol1.u[n]);
            let mut e: f64 = 0.0;
            for j in 0..grid.ny {
                for i in 0..=grid.nx {
                    e = e.max((u2.vx.at(i, j) - u1.vx.at(i, j)).abs());
                }
            }
            for j in 0..=grid.ny {
                for i in 0..grid.nx {
                    e = e.max((u2.vy.at(i, j) - u1.vy.at(i, j)).abs());
                }
            }
            for i in 0..grid.nx {
                e = e.max((u2.vy_sigma_solid[i] - u1.vy.at(i, js)).abs());
            }
            for i in 0..=grid.nx {
                let mid = 0.5 * (u1.vx.at(i, js - 1) + u1.vx.at(i, js));
                e = e.max((u2.vx_sigma_fluid[i] - mid).abs());
                e = e.max((u2.vx_sigma_solid[i] - mid).abs());
            }
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    e = e.max((sol2.p[n].at(i, j) - sol1.p[n].at(i, j)).abs());
                }
            }
            assert!(e < 1e-8, "level {n}: node-wise deviation {e:.3e}");
        }
    }

    /// Piecewise-polynomial/trigonometric manufactured solution with
    /// distinct viscosities and densities, continuous velocity (zero g1),
    /// nonzero stress jumps g2, nonzero g4 and g5, satisfying the axis
    /// symmetry and every compatibility identity exactly.
    struct Piecewise {
        l: f64,
        h: f64,
        rho: PhaseCoeff,
        mu: PhaseCoeff,
        decay: bool,
    }

    impl Piecewise {
        fn s(&self, t: f64) -> f64 {
            if self.decay {
                (-t).exp()
            } else {
                1.0
            }
        }
        fn s1(&self, t: f64) -> f64 {
            if self.decay {
                -(-t).exp()
            } else {
                0.0
            }
        }
        fn q(&self, x: f64) -> f64 {
            (PI * x / self.l).cos()
        }
        fn q1(&self, x: f64) -> f64 {
            -(PI / self.l) * (PI * x / self.l).sin()
        }
        fn q2(&self, x: f64) -> f64 {
            -(PI / self.l) * (PI / self.l) * (PI * x / self.l).cos()
        }
        fn q3(&self, x: f64) -> f64 {
            (PI / self.l).powi(3) * (PI * x / self.l).sin()
        }
        fn w(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => y * y * y,
                Phase::Solid => 0.125 + 0.75 * (y - self.h) - (y - self.h) * (y - self.h),
            }
        }
        fn w1(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => 3.0 * y * y,
                Phase::Solid => 0.75 - 2.0 * (y - self.h),
            }
        }
        fn w2(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => 6.0 * y,
                Phase::Solid => -2.0,
            }
        }
        fn w3(&self, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => 6.0,
                Phase::Solid => 0.0,
            }
        }
        fn pres(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => 1.0 + y * y,
                Phase::Solid => 2.0 + y,
            }
        }
        fn pres1(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => 2.0 * y,
                Phase::Solid => 1.0,
            }
        }
        fn mu_of(&self, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => self.mu.fluid,
                Phase::Solid => self.mu.solid,
            }
        }
        fn rho_of(&self, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => self.rho.fluid,
                Phase::Solid => self.rho.solid,
            }
        }
        fn exact(&self, x: f64, y: f64, t: f64, phase: Phase) -> (f64, f64) {
            (
                self.q(x) * self.w1(y, phase) * self.s(t),
                -self.q1(x) * self.w(y, phase) * self.s(t),
            )
        }
        fn exact_p(&self, x: f64, y: f64, t: f64, phase: Phase) -> f64 {
            self.s(t) * self.q(x) * self.pres(y, phase)
        }
        fn phase_of(&self, y: f64) -> Phase {
            if y < self.h {
                Phase::Fluid
            } else {
                Phase::Solid
            }
        }
    }

    impl StokesData for Piecewise {
        fn forcing(&self, x: f64, y: f64, t: f64, phase: Phase) -> (f64, f64) {
            let (s, s1) = (self.s(t), self.s1(t));
            let (q, q1, q2, q3) = (self.q(x), self.q1(x), self.q2(x), self.q3(x));
            let (w, w1, w2, w3) = (
                self.w(y, phase),
                self.w1(y, phase),
                self.w2(y, phase),
                self.w3(phase),
            );
            let (mu, rho) = (self.mu_of(phase), self.rho_of(phase));
            let (pr, pr1) = (self.pres(y, phase), self.pres1(y, phase));
            let fx = rho * s1 * q * w1 + s * q1 * pr - mu * s * q2 * w1 - mu * s * q * w3;
            let fy = -rho * q1 * w * s1 + mu * s * (q1 * w2 + q3 * w) + s * q * pr1;
            (fx, fy)
        }
        fn jump_stress(&self, x: f64, t: f64) -> (f64, f64) {
            // jump_sign * normal_y = +1 under either orientation.
            let s = self.s(t);
            let (q, q1, q2) = (self.q(x), self.q1(x), self.q2(x));
            let h = self.h;
            let (mf, ms) = (self.mu.fluid, self.mu.solid);
            let g2x = s
                * (q * (ms * self.w2(h, Phase::Solid) - mf * self.w2(h, Phase::Fluid))
                    - q2 * self.w(h, Phase::Fluid) * (ms - mf));
            let g2y = s
                * (q * (self.pres(h, Phase::Fluid) - self.pres(h, Phase::Solid))
                    - 2.0 * q1 * self.w1(h, Phase::Fluid) * (ms - mf));
            (g2x, g2y)
        }
        fn end_tangential(&self, x: f64, y: f64, t: f64, phase: Phase) -> f64 {
            -self.q1(x) * self.w(y, phase) * self.s(t)
        }
        fn end_normal_stress(&self, x: f64, y: f64, t: f64) -> f64 {
            let phase = self.phase_of(y);
            -self.exact_p(x, y, t, phase)
                + 2.0 * self.mu_of(phase) * self.s(t) * self.q1(x) * self.w1(y, phase)
        }
        fn wall_velocity(&self, x: f64, t: f64) -> (f64, f64) {
            self.exact(x, 1.0, t, Phase::Solid)
        }
        fn initial(&self, x: f64, y: f64, phase: Phase) -> (f64, f64) {
            self.exact(x, y, 0.0, phase)
        }
    }

    fn piecewise(grid: &ReferenceGrid, decay: bool) -> Piecewise {
        Piecewise {
            l: grid.l,
            h: grid.h,
            rho: coeffs(1.0, 2.0),
            mu: coeffs(0.5, 1.5),
            decay,
        }
    }

    fn piecewise_errors(n: usize) -> (f64, f64) {
        let grid = build_reference_domain(2.0, 0.5, n, n).unwrap();
        let data = piecewise(&grid, false);
        let prob = StokesProblem::sample(&grid, data.rho, data.mu, 0.05, 2, &data);
        let sol = solve_two_phase(&grid, &prob).unwrap();
        let lvl = 2;
        let t = 0.05 * lvl as f64;
        let u = &sol.u[lvl];
        let mut eu: f64 = 0.0;
        for j in 0..grid.ny {
            let phase = grid.phase_of_cell_row(j);
            for i in 0..=grid.nx {
                let ex = data.exact(grid.xf(i), grid.yc(j), t, phase).0;
                eu = eu.max((u.vx.at(i, j) - ex).abs());
            }
        }
        for j in 0..=grid.ny {
            let phase = if j <= grid.j_sigma {
                Phase::Fluid
            } else {
                Phase::Solid
            };
            for i in 0..grid.nx {
                let ex = data.exact(grid.xc(i), grid.yf(j), t, phase).1;
                eu = eu.max((u.vy.at(i, j) - ex).abs());
            }
        }
        for i in 0..grid.nx {
            let ex = data.exact(grid.xc(i), grid.h, t, Phase::Solid).1;
            eu = eu.max((u.vy_sigma_solid[i] - ex).abs());
        }
        let mut ep: f64 = 0.0;
        for j in 0..grid.ny {
            let phase = grid.phase_of_cell_row(j);
            for i in 0..grid.nx {
                let ex = data.exact_p(grid.xc(i), grid.yc(j), t, phase);
                ep = ep.max((sol.p[lvl].at(i, j) - ex).abs());
            }
        }
        // Divergence identity: f_d = 0 here, per-phase traces included.
        let div = u.divergence(&grid);
        assert!(
            div.max_abs() < 1e-9,
            "divergence identity violated: {:.3e}",
            div.max_abs()
        );
        (eu, ep)
    }

    #[test]
    fn piecewise_viscosity_second_order_in_space() {
        let (eu_c, ep_c) = piecewise_errors(16);
        let (eu_f, ep_f) = piecewise_errors(32);
        let ru = eu_c / eu_f;
        let rp = ep_c / ep_f;
        assert!(
            (3.2..=4.8).contains(&ru),
            "velocity refinement ratio {ru:.2} (errors {eu_c:.3e} -> {eu_f:.3e})"
        );
        assert!(
            (3.2..=4.8).contains(&rp),
            "pressure refinement ratio {rp:.2} (errors {ep_c:.3e} -> {ep_f:.3e})"
        );
    }

    #[test]
    fn piecewise_first_order_in_time() {
        let grid = build_reference_domain(2.0, 0.5, 16, 16).unwrap();
        let data = piecewise(&grid, true);
        let t_end = 0.2;
        let run = |nsteps: usize| {
            let prob =
                StokesProblem::sample(&grid, data.rho, data.mu, t_end / nsteps as f64, nsteps, &data);
            solve_two_phase(&grid, &prob).unwrap()
        };
        let reference = run(64);
        let father = |sol: &StokesSolution| {
            let (a, b) = (sol.u.last().unwrap(), reference.u.last().unwrap());
            let mut e: f64 = 0.0;
            for j in 0..grid.ny {
                for i in 0..=grid.nx {
                    e = e.max((a.vx.at(i, j) - b.vx.at(i, j)).abs());
                }
            }
            for j in 0..=grid.ny {
                for i in 0..grid.nx {
                    e = e.max((a.vy.at(i, j) - b.vy.at(i, j)).abs());
                }
            }
            e
        };
        let e4 = father(&run(4));
        let e8 = father(&run(8));
        let ratio = e4 / e8;
        assert!(
            (1.6..=2.6).contains(&ratio),
            "temporal refinement ratio {ratio:.2} (errors {e4:.3e} -> {e8:.3e})"
        );
    }

    #[test]
    fn manufactured_data_pass_compatibility() {
        let grid = build_reference_domain(2.0, 0.5, 16, 16).unwrap();
        let data = piecewise(&grid, true);
        let prob = StokesProblem::sample(&grid, data.rho, data.mu, 0.05, 2, &data);
        let report = check_stokes_compatibility(&grid, &prob, None);
        assert!(
            report.all_passed(),
            "failed entries: {:?}",
            report.failed_names()
        );
    }

    #[test]
    fn single_perturbation_fails_exactly_its_entry() {
        let grid = build_reference_domain(1.0, 0.5, 8, 8).unwrap();
        let mut prob = StokesProblem::sample(&grid, coeffs(1.0, 1.0), coeffs(1.0, 1.0), 0.1, 2, &Zero);
        let eps = 1e-3;
        prob.g1x[0][3] += eps;
        let report = check_stokes_compatibility(&grid, &prob, Some(1e-5));
        assert_eq!(report.failed_names(), vec!["stokes-initial-velocity-jump"]);
        let entry = report.entry("stokes-initial-velocity-jump").unwrap();
        assert!(
            (entry.residual - eps).abs() < 1e-15,
            "residual {} != eps",
            entry.residual
        );
    }

    #[test]
    fn incompatible_jump_is_refused() {
        let grid = build_reference_domain(1.0, 0.5, 32, 32).unwrap();
        let mut prob =
            StokesProblem::sample(&grid, coeffs(1.0, 1.0), coeffs(1.0, 1.0), 0.01, 2, &Zero);
        for v in prob.g1x[0].iter_mut() {
            *v = 1.0;
        }
        match solve_two_phase(&grid, &prob) {
            Err(StokesError::IncompatibleData { report }) => {
                assert!(report
                    .failed_names()
                    .contains(&"stokes-initial-velocity-jump"));
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn concentration_source_identity_and_outflow() {
        let grid = build_reference_domain(1.0, 0.5, 16, 16).unwrap();
        let prob = StokesProblem::sample(&grid, coeffs(1.0, 1.0), coeffs(1.0, 1.0), 0.05, 2, &Zero);
        // c_s = 0 reproduces the plain solve exactly (same code path).
        let zeros: Vec<CellField> = (0..=2).map(|_| CellField::zeros(&grid)).collect();
        let a = solve_with_concentration_source(&grid, &prob, &zeros, 1.0, 1.0).unwrap();
        let b = solve_two_phase(&grid, &prob).unwrap();
        for n in 0..=2 {
            assert_eq!(a.u[n], b.u[n]);
        }
        // Uniform c_s = 0.1 with gamma beta / rho_s = 1: the discrete
        // divergence equals 0.1 on solid cells, 0 on fluid cells, and the
        // net outflow through the ends equals 0.1 * |solid| = 0.05 * L.
        let cbar = 0.1;
        let cs: Vec<CellField> = (0..=2)
            .map(|_| CellField::from_fn(&grid, |_, _| cbar))
            .collect();
        let sol = solve_with_concentration_source(&grid, &prob, &cs, 1.0, 1.0).unwrap();
        let n = 2;
        let div = sol.u[n].divergence(&grid);
        for j in 0..grid.ny {
            let want = if j >= grid.j_sigma { cbar } else { 0.0 };
            for i in 0..grid.nx {
                assert!(
                    (div.at(i, j) - want).abs() < 1e-9,
                    "cell ({i},{j}): {} vs {want}",
                    div.at(i, j)
                );
            }
        }
        let mut outflow = 0.0;
        for j in 0..grid.ny {
            outflow += grid.dy * (sol.u[n].vx.at(grid.nx, j) - sol.u[n].vx.at(0, j));
        }
        let want = cbar * grid.l * (1.0 - grid.h);
        assert!(
            (outflow - want).abs() < 1e-8,
            "net outflow {outflow} vs {want}"
        );
    }
}
