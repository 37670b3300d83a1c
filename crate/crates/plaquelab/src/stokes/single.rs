//! Single-phase unsteady Stokes on a sub-rectangle of the reference grid.
//!
//! Backward Euler in time; in space every momentum row is a control-volume
//! balance of the stress tensor `S = -p I + mu (grad u + grad u^T)`:
//!
//! * `S_xx = -p + 2 mu dx(u_x)` and `S_yy = -p + 2 mu dy(u_y)` live at cell
//!   centers (exact on the MAC stagger),
//! * `S_xy = mu (dy(u_x) + dx(u_y))` lives at grid nodes,
//! * boundary faces replace the stress flux by data: Dirichlet sides pin the
//!   normal velocity and close the shear stress one-sidedly against the
//!   tangential datum; outflow sides impose the normal-stress datum as the
//!   literal boundary flux of a half control volume; symmetry sides pin the
//!   normal velocity to zero and set the shear stress to zero.
//!
//! The divergence rows close the saddle-point system. When every side pins
//! the normal velocity the pressure is determined only up to a constant and
//! the data must satisfy the net-flux identity; the solver verifies it,
//! projects the roundoff-to-quadrature-sized defect out of the divergence
//! right-hand side, and pins one pressure cell to zero.

use super::expr::{impose, LinExpr};
use super::{BcKind, EdgeSide, SinglePhaseProblem, StokesError, StokesSolution};
use crate::geometry::{CellField, FaceXField, FaceYField, ReferenceGrid, StagVelocity};
use crate::linalg::SystemBuilder;

/// Unknown ordering, level by level from the bottom of the active rows:
/// `[vy row j | vx row j | p row j]` for each cell row `j`, closed by the
/// final `vy` row. Keeps the bandwidth at `O(nx)`.
pub(super) struct Layout {
    pub jr0: usize,
    pub jr1: usize,
    pub nx: usize,
}

impl Layout {
    pub fn n(&self) -> usize {
        (self.jr1 - self.jr0) * (3 * self.nx + 1) + self.nx
    }
    fn base(&self, j: usize) -> usize {
        (j - self.jr0) * (3 * self.nx + 1)
    }
    pub fn vy(&self, i: usize, j: usize) -> usize {
        self.base(j) + i
    }
    pub fn vx(&self, i: usize, j: usize) -> usize {
        self.base(j) + self.nx + i
    }
    pub fn p(&self, i: usize, j: usize) -> usize {
        self.base(j) + 2 * self.nx + 1 + i
    }
}

/// One time level of the assembly (grid, problem, layout, data views).
struct Asm<'a> {
    grid: &'a ReferenceGrid,
    prob: &'a SinglePhaseProblem,
    lay: &'a Layout,
    level: usize,
    prev: &'a (FaceXField, FaceYField),
}

impl Asm<'_> {
    fn tan(&self, side: EdgeSide, k: usize) -> f64 {
        self.prob.side_tan[side.index()][self.level][k]
    }
    fn nor(&self, side: EdgeSide, k: usize) -> f64 {
        self.prob.side_nor[side.index()][self.level][k]
    }

    /// `S_xx` at cell `(i, j)`.
    fn sxx(&self, i: usize, j: usize) -> LinExpr {
        let (lay, dx, mu) = (self.lay, self.grid.dx, self.prob.mu);
        LinExpr::term(lay.p(i, j), -1.0)
            .with(lay.vx(i + 1, j), 2.0 * mu / dx)
            .with(lay.vx(i, j), -2.0 * mu / dx)
    }

    /// `S_yy` at cell `(i, j)`.
    fn syy(&self, i: usize, j: usize) -> LinExpr {
        let (lay, dy, mu) = (self.lay, self.grid.dy, self.prob.mu);
        LinExpr::term(lay.p(i, j), -1.0)
            .with(lay.vy(i, j + 1), 2.0 * mu / dy)
            .with(lay.vy(i, j), -2.0 * mu / dy)
    }

    /// `S_xy` at node `(i, j)`, `jr0 <= j <= jr1`, `0 <= i <= nx`. Boundary
    /// nodes close the one-sided derivative against the tangential datum of
    /// their side; symmetry sides (corners included) have zero shear stress.
    fn sxy(&self, i: usize, j: usize) -> LinExpr {
        let (lay, bc) = (self.lay, &self.prob.bc);
        let (dx, dy, mu) = (self.grid.dx, self.grid.dy, self.prob.mu);
        let (jr0, jr1, nx) = (lay.jr0, lay.jr1, lay.nx);
        if (j == jr0 && bc.bottom == BcKind::Symmetry)
            || (j == jr1 && bc.top == BcKind::Symmetry)
            || (i == 0 && bc.left == BcKind::Symmetry)
            || (i == nx && bc.right == BcKind::Symmetry)
        {
            return LinExpr::zero();
        }
        // dy(u_x) part.
        let mut e = if j == jr0 {
            LinExpr::term(lay.vx(i, j), 2.0 / dy)
                .plus_con(-2.0 / dy * self.tan(EdgeSide::Bottom, i))
        } else if j == jr1 {
            LinExpr::term(lay.vx(i, j - 1), -2.0 / dy)
                .plus_con(2.0 / dy * self.tan(EdgeSide::Top, i))
        } else {
            LinExpr::term(lay.vx(i, j), 1.0 / dy).with(lay.vx(i, j - 1), -1.0 / dy)
        };
        // dx(u_y) part.
        e = if i == 0 {
            e.with(lay.vy(0, j), 2.0 / dx)
                .plus_con(-2.0 / dx * self.tan(EdgeSide::Left, j - jr0))
        } else if i == nx {
            e.with(lay.vy(nx - 1, j), -2.0 / dx)
                .plus_con(2.0 / dx * self.tan(EdgeSide::Right, j - jr0))
        } else {
            e.with(lay.vy(i, j), 1.0 / dx).with(lay.vy(i - 1, j), -1.0 / dx)
        };
        e.scaled(mu)
    }

    fn assemble(&self) -> Result<SystemBuilder, StokesError> {
        let (grid, prob, lay) = (self.grid, self.prob, self.lay);
        let (dx, dy) = (grid.dx, grid.dy);
        let (jr0, jr1, nx) = (lay.jr0, lay.jr1, lay.nx);
        let rho_dt = prob.rho / prob.dt;
        let (fx, fy) = &prob.f[self.level];
        let fd = &prob.f_d[self.level];
        let mut sys = SystemBuilder::new(lay.n());

        // x-momentum / vx pins.
        for j in jr0..jr1 {
            for i in 0..=nx {
                let me = lay.vx(i, j);
                let side = if i == 0 {
                    Some(EdgeSide::Left)
                } else if i == nx {
                    Some(EdgeSide::Right)
                } else {
                    None
                };
                let kind = side.map(|s| prob.bc.at(s));
                match kind {
                    Some(BcKind::Dirichlet) => {
                        let datum = self.nor(side.unwrap(), j - jr0);
                        impose(&mut sys, me, &LinExpr::term(me, 1.0), datum)?;
                    }
                    Some(BcKind::Symmetry) => {
                        impose(&mut sys, me, &LinExpr::term(me, 1.0), 0.0)?;
                    }
                    _ => {
                        let mut e = LinExpr::term(me, rho_dt);
                        match side {
                            // Half control volume against the end face: the
                            // outflow datum is the literal x-flux there.
                            Some(EdgeSide::Left) => {
                                e.add_scaled(&self.sxx(0, j), -2.0 / dx);
                                e.con += 2.0 / dx * self.nor(EdgeSide::Left, j - jr0);
                            }
                            Some(EdgeSide::Right) => {
                                e.add_scaled(&self.sxx(nx - 1, j), 2.0 / dx);
                                e.con += -2.0 / dx * self.nor(EdgeSide::Right, j - jr0);
                            }
                            _ => {
                                e.add_scaled(&self.sxx(i, j), -1.0 / dx);
                                e.add_scaled(&self.sxx(i - 1, j), 1.0 / dx);
                            }
                        }
                        e.add_scaled(&self.sxy(i, j + 1), -1.0 / dy);
                        e.add_scaled(&self.sxy(i, j), 1.0 / dy);
                        let rhs = fx.at(i, j) + rho_dt * self.prev.0.at(i, j);
                        impose(&mut sys, me, &e, rhs)?;
                    }
                }
            }
        }

        // y-momentum / vy pins.
        for j in jr0..=jr1 {
            for i in 0..nx {
                let me = lay.vy(i, j);
                let side = if j == jr0 {
                    Some(EdgeSide::Bottom)
                } else if j == jr1 {
                    Some(EdgeSide::Top)
                } else {
                    None
                };
                let kind = side.map(|s| prob.bc.at(s));
                match kind {
                    Some(BcKind::Dirichlet) => {
                        let datum = self.nor(side.unwrap(), i);
                        impose(&mut sys, me, &LinExpr::term(me, 1.0), datum)?;
                    }
                    Some(BcKind::Symmetry) => {
                        impose(&mut sys, me, &LinExpr::term(me, 1.0), 0.0)?;
                    }
                    _ => {
                        let mut e = LinExpr::term(me, rho_dt);
                        match side {
                            Some(EdgeSide::Bottom) => {
                                e.add_scaled(&self.syy(i, jr0), -2.0 / dy);
                                e.con += 2.0 / dy * self.nor(EdgeSide::Bottom, i);
                            }
                            Some(EdgeSide::Top) => {
                                e.add_scaled(&self.syy(i, jr1 - 1), 2.0 / dy);
                                e.con += -2.0 / dy * self.nor(EdgeSide::Top, i);
                            }
                            _ => {
                                e.add_scaled(&self.syy(i, j), -1.0 / dy);
                                e.add_scaled(&self.syy(i, j - 1), 1.0 / dy);
                            }
                        }
                        e.add_scaled(&self.sxy(i + 1, j), -1.0 / dx);
                        e.add_scaled(&self.sxy(i, j), 1.0 / dx);
                        let rhs = fy.at(i, j) + rho_dt * self.prev.1.at(i, j);
                        impose(&mut sys, me, &e, rhs)?;
                    }
                }
            }
        }

        // Divergence rows, with the all-Dirichlet gauge handling.
        let gauged = prob.bc.all_velocity_pinned();
        let mut fd_shift = 0.0;
        if gauged {
            let (flux, source) = self.net_flux_and_source();
            let defect = flux - source;
            let tol = 10.0 * (dx * dx + dy * dy) * prob.data_scale().max(1.0);
            if defect.abs() > tol {
                return Err(StokesError::IncompatibleFlux {
                    level: self.level,
                    boundary_flux: flux,
                    volume_source: source,
                });
            }
            // Project the (quadrature-sized) defect out so that every kept
            // divergence row remains consistent with the boundary pins,
            // including the one the gauge pin displaces.
            let area = (jr1 - jr0) as f64 * nx as f64 * dx * dy;
            fd_shift = defect / area;
        }
        for j in jr0..jr1 {
            for i in 0..nx {
                let row = lay.p(i, j);
                if gauged && i == 0 && j == jr0 {
                    // Pressure gauge replaces this cell's divergence row.
                    impose(&mut sys, row, &LinExpr::term(row, 1.0), 0.0)?;
                    continue;
                }
                let e = LinExpr::term(lay.vx(i + 1, j), 1.0 / dx)
                    .with(lay.vx(i, j), -1.0 / dx)
                    .with(lay.vy(i, j + 1), 1.0 / dy)
                    .with(lay.vy(i, j), -1.0 / dy);
                impose(&mut sys, row, &e, fd.at(i, j) + fd_shift)?;
            }
        }
        Ok(sys)
    }

    /// Net boundary outflow of the pinned velocity data and integrated
    /// divergence source at this level.
    fn net_flux_and_source(&self) -> (f64, f64) {
        let (grid, prob, lay) = (self.grid, self.prob, self.lay);
        let (jr0, jr1, nx) = (lay.jr0, lay.jr1, lay.nx);
        let mut flux = 0.0;
        for i in 0..nx {
            if prob.bc.top == BcKind::Dirichlet {
                flux += grid.dx * self.nor(EdgeSide::Top, i);
            }
            if prob.bc.bottom == BcKind::Dirichlet {
                flux -= grid.dx * self.nor(EdgeSide::Bottom, i);
            }
        }
        for j in jr0..jr1 {
            if prob.bc.right == BcKind::Dirichlet {
                flux += grid.dy * self.nor(EdgeSide::Right, j - jr0);
            }
            if prob.bc.left == BcKind::Dirichlet {
                flux -= grid.dy * self.nor(EdgeSide::Left, j - jr0);
            }
        }
        let mut source = 0.0;
        for j in jr0..jr1 {
            for i in 0..nx {
                source += self.prob.f_d[self.level].at(i, j) * grid.dx * grid.dy;
            }
        }
        (flux, source)
    }
}

/// Solves the sampled single-phase problem. See the module docs for the
/// scheme; the returned trajectory stores velocities for levels
/// `0..=nsteps` and pressures for `1..=nsteps` (the level-0 pressure slot is
/// zero: backward Euler defines no initial pressure).
pub fn solve_single_phase(
    grid: &ReferenceGrid,
    problem: &SinglePhaseProblem,
) -> Result<StokesSolution, StokesError> {
    problem
        .validate(grid)
        .map_err(|reason| StokesError::InvalidParameter { reason })?;
    let rows = problem.domain.cell_rows(grid);
    let lay = Layout {
        jr0: rows.start,
        jr1: rows.end,
        nx: grid.nx,
    };
    let scale = problem.data_scale();
    let mut sol = StokesSolution::with_zeros(grid, problem.nsteps, problem.dt);

    let mut u0 = StagVelocity::zeros(grid);
    for j in lay.jr0..lay.jr1 {
        for i in 0..=grid.nx {
            u0.vx.set(i, j, problem.u0.0.at(i, j));
        }
    }
    for j in lay.jr0..=lay.jr1 {
        for i in 0..grid.nx {
            u0.vy.set(i, j, problem.u0.1.at(i, j));
        }
    }
    fill_traces(grid, &mut u0, &lay);
    let mut prev = (u0.vx.clone(), u0.vy.clone());
    sol.u.push(u0);

    let mut lu = None;
    for n in 1..=problem.nsteps {
        let asm = Asm {
            grid,
            prob: problem,
            lay: &lay,
            level: n,
            prev: &prev,
        };
        let sys = asm.assemble()?;
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

        let mut u = StagVelocity::zeros(grid);
        let mut p = CellField::zeros(grid);
        for j in lay.jr0..lay.jr1 {
            for i in 0..=grid.nx {
                u.vx.set(i, j, x[lay.vx(i, j)]);
            }
            for i in 0..grid.nx {
                p.set(i, j, x[lay.p(i, j)]);
            }
        }
        for j in lay.jr0..=lay.jr1 {
            for i in 0..grid.nx {
                u.vy.set(i, j, x[lay.vy(i, j)]);
            }
        }
        fill_traces(grid, &mut u, &lay);
        prev = (u.vx.clone(), u.vy.clone());
        sol.u.push(u);
        push_pressure_single(grid, &mut sol, &lay, p);
    }
    Ok(sol)
}

/// Populates the per-phase interface trace slots of a single-valued field:
/// copies where the interface row is part of the active lattice,
/// extrapolates `vx` one-sidedly from whichever phase rows are active.
fn fill_traces(grid: &ReferenceGrid, u: &mut StagVelocity, lay: &Layout) {
    let js = grid.j_sigma;
    if js < lay.jr0 || js > lay.jr1 {
        return;
    }
    for i in 0..grid.nx {
        u.vy_sigma_solid[i] = u.vy.at(i, js);
    }
    let from_below = js >= lay.jr0 + 2;
    let from_above = js + 2 <= lay.jr1;
    for i in 0..=grid.nx {
        let below = if from_below {
            1.5 * u.vx.at(i, js - 1) - 0.5 * u.vx.at(i, js - 2)
        } else {
            0.0
        };
        let above = if from_above {
            1.5 * u.vx.at(i, js) - 0.5 * u.vx.at(i, js + 1)
        } else {
            0.0
        };
        u.vx_sigma_fluid[i] = if from_below { below } else { above };
        u.vx_sigma_solid[i] = if from_above { above } else { below };
    }
}

/// Single-phase variant of the pressure bookkeeping: end traces over the
/// active rows; interface traces only when both phases flank the interface
/// inside the active lattice (domain `Whole`), zeros otherwise.
fn push_pressure_single(
    grid: &ReferenceGrid,
    sol: &mut StokesSolution,
    lay: &Layout,
    p: CellField,
) {
    let js = grid.j_sigma;
    let nx = grid.nx;
    let mut trf = vec![0.0; nx];
    let mut trs = vec![0.0; nx];
    let jump = vec![0.0; nx];
    if js >= lay.jr0 + 2 && js + 2 <= lay.jr1 {
        for i in 0..nx {
            trf[i] = 1.5 * p.at(i, js - 1) - 0.5 * p.at(i, js - 2);
            trs[i] = 1.5 * p.at(i, js) - 0.5 * p.at(i, js + 1);
        }
    }
    let mut ends = [vec![0.0; grid.ny], vec![0.0; grid.ny]];
    for j in lay.jr0..lay.jr1 {
        ends[0][j] = 1.5 * p.at(0, j) - 0.5 * p.at(1, j);
        ends[1][j] = 1.5 * p.at(nx - 1, j) - 0.5 * p.at(nx - 2, j);
    }
    sol.p_sigma_fluid.push(trf);
    sol.p_sigma_solid.push(trs);
    sol.p_jump_sigma.push(jump);
    sol.p_end.push(ends);
    sol.p.push(p);
}

#[cfg(test)]
mod tests {
    use super::super::{SideBc, SinglePhaseData, SinglePhaseDomain};
    use super::*;
    use crate::geometry::build_reference_domain;
    use std::f64::consts::PI;

    fn solve(
        grid: &ReferenceGrid,
        domain: SinglePhaseDomain,
        bc: SideBc,
        rho: f64,
        mu: f64,
        dt: f64,
        nsteps: usize,
        data: &impl SinglePhaseData,
    ) -> Result<StokesSolution, StokesError> {
        let p = SinglePhaseProblem::sample(grid, domain, bc, rho, mu, dt, nsteps, data);
        solve_single_phase(grid, &p)
    }

    struct Zero;
    impl SinglePhaseData for Zero {}

    #[test]
    fn zero_data_zero_solution() {
        let grid = build_reference_domain(1.5, 0.5, 6, 8).unwrap();
        let bc = SideBc {
            bottom: BcKind::Symmetry,
            top: BcKind::Dirichlet,
            left: BcKind::Outflow,
            right: BcKind::Outflow,
        };
        let sol = solve(&grid, SinglePhaseDomain::Whole, bc, 1.0, 1.0, 0.1, 3, &Zero).unwrap();
        for n in 0..=3 {
            assert!(sol.u[n].max_abs() < 1e-13, "level {n}");
            assert!(sol.p[n].max_abs() < 1e-13, "level {n}");
        }
    }

    /// Rigid horizontal translation `u = (1 + t, 0)` with matching forcing:
    /// linear-in-time data make backward Euler exact, and the field is exact
    /// on the stagger, so the discrete solution must agree to solver
    /// tolerance (not just discretization order).
    struct Rigid {
        rho: f64,
    }
    impl SinglePhaseData for Rigid {
        fn velocity(&self, _x: f64, _y: f64, t: f64) -> (f64, f64) {
            (1.0 + t, 0.0)
        }
        fn forcing(&self, _x: f64, _y: f64, _t: f64) -> (f64, f64) {
            (self.rho, 0.0)
        }
        fn initial(&self, _x: f64, _y: f64) -> (f64, f64) {
            (1.0, 0.0)
        }
    }

    #[test]
    fn rigid_translation_is_exact() {
        let grid = build_reference_domain(2.0, 0.5, 6, 8).unwrap();
        let bc = SideBc {
            bottom: BcKind::Symmetry,
            top: BcKind::Dirichlet,
            left: BcKind::Outflow,
            right: BcKind::Outflow,
        };
        let rho = 2.5;
        let sol = solve(
            &grid,
            SinglePhaseDomain::Whole,
            bc,
            rho,
            0.7,
            0.2,
            3,
            &Rigid { rho },
        )
        .unwrap();
        for n in 0..=3 {
            let c = 1.0 + 0.2 * n as f64;
            let mut err: f64 = 0.0;
            for j in 0..grid.ny {
                for i in 0..=grid.nx {
                    err = err.max((sol.u[n].vx.at(i, j) - c).abs());
                }
            }
            assert!(err < 1e-10, "level {n}: vx error {err:.3e}");
            assert!(sol.u[n].vy.max_abs() < 1e-10);
            assert!(sol.p[n].max_abs() < 1e-9);
        }
    }

    /// Steady channel profile `u = (sin(pi y), 0)`, `p = cos(pi y)`, driven
    /// by its own forcing, with outflow ends carrying the nonzero normal
    /// stress `-cos(pi y)`.
    struct Channel {
        mu: f64,
    }
    impl SinglePhaseData for Channel {
        fn velocity(&self, _x: f64, y: f64, _t: f64) -> (f64, f64) {
            ((PI * y).sin(), 0.0)
        }
        fn normal_stress(&self, _x: f64, y: f64, _t: f64) -> f64 {
            -(PI * y).cos()
        }
        fn forcing(&self, _x: f64, y: f64, _t: f64) -> (f64, f64) {
            (
                self.mu * PI * PI * (PI * y).sin(),
                -PI * (PI * y).sin(),
            )
        }
        fn initial(&self, _x: f64, y: f64) -> (f64, f64) {
            ((PI * y).sin(), 0.0)
        }
    }

    fn channel_errors(ny: usize) -> (f64, f64) {
        let grid = build_reference_domain(1.0, 0.5, 6, ny).unwrap();
        let bc = SideBc {
            bottom: BcKind::Dirichlet,
            top: BcKind::Dirichlet,
            left: BcKind::Outflow,
            right: BcKind::Outflow,
        };
        let mu = 0.8;
        let sol = solve(
            &grid,
            SinglePhaseDomain::Whole,
            bc,
            1.3,
            mu,
            0.05,
            2,
            &Channel { mu },
        )
        .unwrap();
        let n = 2;
        let mut eu: f64 = 0.0;
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                eu = eu.max((sol.u[n].vx.at(i, j) - (PI * grid.yc(j)).sin()).abs());
            }
        }
        let mut ep: f64 = 0.0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                ep = ep.max((sol.p[n].at(i, j) - (PI * grid.yc(j)).cos()).abs());
            }
        }
        // The exact cross-velocity is zero; the discrete one carries the
        // truncation error, so it belongs to the measured error.
        let eu = eu.max(sol.u[n].vy.max_abs());
        (eu, ep)
    }

    #[test]
    fn channel_second_order_in_space() {
        let (eu_c, ep_c) = channel_errors(16);
        let (eu_f, ep_f) = channel_errors(32);
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

    /// Near the outflow ends the recovered boundary pressure must honor the
    /// normal-stress datum: `p ~ -g4 + 2 mu dx(u_x)`, here simply `cos(pi
    /// y)`; and the divergence rows hold to solver accuracy everywhere,
    /// boundary cells included.
    #[test]
    fn outflow_end_pressure_hinge() {
        let grid = build_reference_domain(1.0, 0.5, 6, 32).unwrap();
        let bc = SideBc {
            bottom: BcKind::Dirichlet,
            top: BcKind::Dirichlet,
            left: BcKind::Outflow,
            right: BcKind::Outflow,
        };
        let mu = 0.8;
        let p = SinglePhaseProblem::sample(
            &grid,
            SinglePhaseDomain::Whole,
            bc,
            1.3,
            mu,
            0.05,
            2,
            &Channel { mu },
        );
        let sol = solve_single_phase(&grid, &p).unwrap();
        let n = 2;
        for side in 0..2 {
            for j in 0..grid.ny {
                let want = (PI * grid.yc(j)).cos();
                assert!(
                    (sol.p_end[n][side][j] - want).abs() < 0.02,
                    "side {side} row {j}: {} vs {want}",
                    sol.p_end[n][side][j]
                );
            }
        }
        let div = sol.u[n].divergence(&grid);
        assert!(div.max_abs() < 1e-9, "divergence {:.3e}", div.max_abs());
    }

    /// All-Dirichlet lid: compatible (zero net flux), so the gauge-pinned
    /// system solves; the pinned cell's pressure is exactly zero and the
    /// divergence identity holds.
    struct Lid;
    impl SinglePhaseData for Lid {
        fn velocity(&self, _x: f64, y: f64, _t: f64) -> (f64, f64) {
            if y >= 1.0 {
                (1.0, 0.0)
            } else {
                (0.0, 0.0)
            }
        }
    }

    #[test]
    fn all_dirichlet_gauge_pin() {
        let grid = build_reference_domain(1.0, 0.5, 8, 8).unwrap();
        let bc = SideBc {
            bottom: BcKind::Dirichlet,
            top: BcKind::Dirichlet,
            left: BcKind::Dirichlet,
            right: BcKind::Dirichlet,
        };
        let sol = solve(&grid, SinglePhaseDomain::Whole, bc, 1.0, 1.0, 0.1, 2, &Lid).unwrap();
        let n = 2;
        assert!(
            sol.p[n].at(0, 0).abs() < 1e-12,
            "gauge cell must be pinned to zero"
        );
        let div = sol.u[n].divergence(&grid);
        assert!(div.max_abs() < 1e-9, "divergence {:.3e}", div.max_abs());
        // The lid actually drives a flow.
        assert!(sol.u[n].vx.max_abs() > 0.05);
    }

    /// All-Dirichlet data pumping net volume through the wall with no
    /// divergence source: the solver must refuse with the named flux defect
    /// rather than hand back garbage from a singular system.
    struct Leak;
    impl SinglePhaseData for Leak {
        fn velocity(&self, _x: f64, y: f64, _t: f64) -> (f64, f64) {
            if y >= 1.0 {
                (0.0, 1.0)
            } else {
                (0.0, 0.0)
            }
        }
    }

    #[test]
    fn incompatible_net_flux_is_refused() {
        let grid = build_reference_domain(1.0, 0.5, 8, 8).unwrap();
        let bc = SideBc {
            bottom: BcKind::Dirichlet,
            top: BcKind::Dirichlet,
            left: BcKind::Dirichlet,
            right: BcKind::Dirichlet,
        };
        let err = solve(&grid, SinglePhaseDomain::Whole, bc, 1.0, 1.0, 0.1, 2, &Leak).unwrap_err();
        match err {
            StokesError::IncompatibleFlux {
                level,
                boundary_flux,
                volume_source,
            } => {
                assert_eq!(level, 1);
                assert!((boundary_flux - 1.0).abs() < 1e-12);
                assert_eq!(volume_source, 0.0);
            }
            other => panic!("expected IncompatibleFlux, got {other:?}"),
        }
    }

    /// The sub-domain variants run on their own rows: a fluid-only solve
    /// with a moving interface row behaves like a lid on `y = h`.
    #[test]
    fn fluid_subdomain_lid() {
        let grid = build_reference_domain(1.0, 0.5, 6, 12).unwrap();
        struct SigmaLid;
        impl SinglePhaseData for SigmaLid {
            fn velocity(&self, _x: f64, y: f64, _t: f64) -> (f64, f64) {
                if y >= 0.5 {
                    (1.0, 0.0)
                } else {
                    (0.0, 0.0)
                }
            }
        }
        let bc = SideBc {
            bottom: BcKind::Symmetry,
            top: BcKind::Dirichlet,
            left: BcKind::Dirichlet,
            right: BcKind::Dirichlet,
        };
        let sol = solve(
            &grid,
            SinglePhaseDomain::Fluid,
            bc,
            1.0,
            1.0,
            0.1,
            2,
            &SigmaLid,
        )
        .unwrap();
        let n = 2;
        // Flow confined to the fluid rows.
        for j in grid.j_sigma..grid.ny {
            for i in 0..=grid.nx {
                assert_eq!(sol.u[n].vx.at(i, j), 0.0);
            }
        }
        assert!(sol.u[n].vx.max_abs() > 0.05);
        let div = sol.u[n].divergence(&grid);
        let mut dmax: f64 = 0.0;
        for j in 0..grid.j_sigma {
            for i in 0..grid.nx {
                dmax = dmax.max(div.at(i, j).abs());
            }
        }
        assert!(dmax < 1e-9);
    }
}
