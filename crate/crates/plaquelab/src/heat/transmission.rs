//! Vector-valued parabolic transmission solver.
//!
//! Solves, with backward Euler, the two-phase vector diffusion system
//!
//! ```text
//! rho du/dt - mu Lap(u) = f                 off the interface,
//! [[u]]                          = g1       on the interface,
//! [[mu (grad u + grad u^T) nu]]  = g2       on the interface,
//! u_y = g3,  2 mu dx(u_x) = g4              on the end faces,
//! u = g5                                    on the outer wall,
//! u_y = 0, dy(u_x) = 0                      on the symmetry axis,
//! u(0) = u0,
//! ```
//!
//! on the staggered grid, with per-phase interface traces of both velocity
//! components kept as unknowns. The trace rows carry the two jump equations;
//! momentum rows close onto the traces with one-sided second-order stencils.
//! Data must satisfy twelve regularity/compatibility identities (checked
//! discretely before assembly; violations are refused naming the item).

// Stencil tables below spell every weight, including -1.0, for parallelism.
#![allow(clippy::neg_multiply)]

use crate::geometry::{
    FaceXField, FaceYField, InterfaceOrientation, Phase, PhaseCoeff, ReferenceGrid, StagVelocity,
};
use crate::heat::HeatError;
use crate::linalg::SystemBuilder;

/// Analytic data bundle for the transmission problem; every method defaults
/// to zero. Positions follow the reference domain (`x` along the vessel,
/// `y` across it); `phase` disambiguates two-sided quantities on the
/// interface.
pub trait TransmissionData {
    /// Body forcing `f(x, y, t)`, sampled per phase by position.
    fn forcing(&self, _x: f64, _y: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Interface velocity jump `g1(x, t)`.
    fn jump_velocity(&self, _x: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Interface stress jump `g2(x, t)` (tangential, normal) components.
    fn jump_stress(&self, _x: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Tangential velocity `g3(x, y, t)` on the end faces, `x` in `{0, L}`.
    fn end_tangential(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Normal stress `g4(x, y, t) = 2 mu dx(u_x)` on the end faces.
    fn end_normal_stress(&self, _x: f64, _y: f64, _t: f64) -> f64 {
        0.0
    }
    /// Velocity `g5(x, t)` on the outer wall.
    fn wall_velocity(&self, _x: f64, _t: f64) -> (f64, f64) {
        (0.0, 0.0)
    }
    /// Initial velocity `u0(x, y)`, per phase (it may jump on the interface).
    fn initial(&self, _x: f64, _y: f64, _phase: Phase) -> (f64, f64) {
        (0.0, 0.0)
    }
}

/// Transmission data sampled on the staggered grid at every time level.
#[derive(Debug, Clone)]
pub struct ParabolicTransmissionProblem {
    pub rho: PhaseCoeff,
    pub mu: PhaseCoeff,
    pub dt: f64,
    pub nsteps: usize,
    pub orientation: InterfaceOrientation,
    /// Forcing per level at the (x-face, y-face) velocity points.
    pub f: Vec<(FaceXField, FaceYField)>,
    /// Velocity-jump data per level: x-component at x-face nodes (`nx + 1`),
    /// y-component at cell columns (`nx`).
    pub g1x: Vec<Vec<f64>>,
    pub g1y: Vec<Vec<f64>>,
    /// Stress-jump data per level, laid out like `g1`.
    pub g2x: Vec<Vec<f64>>,
    pub g2y: Vec<Vec<f64>>,
    /// Tangential end-face data per side per level at node heights
    /// (`ny + 1`; the interface-height entry is unused).
    pub g3: [Vec<Vec<f64>>; 2],
    /// Normal-stress end-face data per side per level at face heights (`ny`).
    pub g4: [Vec<Vec<f64>>; 2],
    /// Wall data per level: x-component at nodes (`nx + 1`), y-component at
    /// cell columns (`nx`).
    pub g5x: Vec<Vec<f64>>,
    pub g5y: Vec<Vec<f64>>,
    /// Initial velocity with per-phase interface traces.
    pub u0: StagVelocity,
}

impl ParabolicTransmissionProblem {
    /// Samples analytic data onto the staggered grid.
    pub fn sample(
        grid: &ReferenceGrid,
        data: &impl TransmissionData,
        rho: PhaseCoeff,
        mu: PhaseCoeff,
        dt: f64,
        nsteps: usize,
    ) -> Self {
        let times: Vec<f64> = (0..=nsteps).map(|n| n as f64 * dt).collect();
        let nodes_x: Vec<f64> = (0..=grid.nx).map(|i| grid.xf(i)).collect();
        let centers_x: Vec<f64> = (0..grid.nx).map(|i| grid.xc(i)).collect();
        let sides = [0.0, grid.l];
        ParabolicTransmissionProblem {
            rho,
            mu,
            dt,
            nsteps,
            orientation: InterfaceOrientation::default(),
            f: times
                .iter()
                .map(|&t| {
                    (
                        FaceXField::from_fn(grid, |x, y| data.forcing(x, y, t).0),
                        FaceYField::from_fn(grid, |x, y| data.forcing(x, y, t).1),
                    )
                })
                .collect(),
            g1x: times
                .iter()
                .map(|&t| {
                    nodes_x
                        .iter()
                        .map(|&x| data.jump_velocity(x, t).0)
                        .collect()
                })
                .collect(),
            g1y: times
                .iter()
                .map(|&t| {
                    centers_x
                        .iter()
                        .map(|&x| data.jump_velocity(x, t).1)
                        .collect()
                })
                .collect(),
            g2x: times
                .iter()
                .map(|&t| nodes_x.iter().map(|&x| data.jump_stress(x, t).0).collect())
                .collect(),
            g2y: times
                .iter()
                .map(|&t| {
                    centers_x
                        .iter()
                        .map(|&x| data.jump_stress(x, t).1)
                        .collect()
                })
                .collect(),
            g3: sides.map(|xs| {
                times
                    .iter()
                    .map(|&t| {
                        (0..=grid.ny)
                            .map(|j| data.end_tangential(xs, grid.yf(j), t))
                            .collect()
                    })
                    .collect()
            }),
            g4: sides.map(|xs| {
                times
                    .iter()
                    .map(|&t| {
                        (0..grid.ny)
                            .map(|j| data.end_normal_stress(xs, grid.yc(j), t))
                            .collect()
                    })
                    .collect()
            }),
            g5x: times
                .iter()
                .map(|&t| {
                    nodes_x
                        .iter()
                        .map(|&x| data.wall_velocity(x, t).0)
                        .collect()
                })
                .collect(),
            g5y: times
                .iter()
                .map(|&t| {
                    centers_x
                        .iter()
                        .map(|&x| data.wall_velocity(x, t).1)
                        .collect()
                })
                .collect(),
            u0: StagVelocity::sample(
                grid,
                |x, y| data.initial(x, y, Phase::Fluid),
                |x, y| data.initial(x, y, Phase::Solid),
            ),
        }
    }

    pub(crate) fn validate(&self, grid: &ReferenceGrid) -> Result<(), HeatError> {
        if !(self.rho.is_positive() && self.mu.is_positive()) {
            return Err(HeatError::InvalidParameter {
                reason: "density and viscosity must be positive in both phases".into(),
            });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HeatError::InvalidParameter {
                reason: format!("time step must be positive, got {}", self.dt),
            });
        }
        if grid.nx < 3 || grid.j_sigma < 2 || grid.ny - grid.j_sigma < 2 {
            return Err(HeatError::InvalidParameter {
                reason: "transmission solve needs nx >= 3 and two cell rows per phase".into(),
            });
        }
        let lv = self.nsteps + 1;
        let node_ok = |v: &Vec<Vec<f64>>| v.len() == lv && v.iter().all(|r| r.len() == grid.nx + 1);
        let cell_ok = |v: &Vec<Vec<f64>>| v.len() == lv && v.iter().all(|r| r.len() == grid.nx);
        let ok = self.f.len() == lv
            && node_ok(&self.g1x)
            && cell_ok(&self.g1y)
            && node_ok(&self.g2x)
            && cell_ok(&self.g2y)
            && node_ok(&self.g5x)
            && cell_ok(&self.g5y)
            && self
                .g3
                .iter()
                .all(|s| s.len() == lv && s.iter().all(|r| r.len() == grid.ny + 1))
            && self
                .g4
                .iter()
                .all(|s| s.len() == lv && s.iter().all(|r| r.len() == grid.ny));
        if !ok {
            return Err(HeatError::InvalidParameter {
                reason: "data level count or lengths do not match the grid".into(),
            });
        }
        Ok(())
    }

    /// Largest data magnitude, for tolerance scaling.
    pub(crate) fn data_scale(&self) -> f64 {
        let mut m = self.u0.max_abs();
        for (fx, fy) in &self.f {
            m = m.max(fx.max_abs()).max(fy.max_abs());
        }
        let arrays = [
            &self.g1x, &self.g1y, &self.g2x, &self.g2y, &self.g5x, &self.g5y,
        ];
        for levels in arrays {
            for row in levels.iter() {
                for &v in row {
                    m = m.max(v.abs());
                }
            }
        }
        for side in self.g3.iter().chain(self.g4.iter()) {
            for row in side {
                for &v in row {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }
}

/// Velocity trajectory produced by the transmission solver.
#[derive(Debug, Clone)]
pub struct VectorTrajectory {
    /// Levels `0..=nsteps`, level 0 is the initial velocity.
    pub levels: Vec<StagVelocity>,
    pub dt: f64,
}

/// Unknown layout: levels of the staggered grid ordered by height, with the
/// four interface trace blocks clustered at the interface height to keep the
/// matrix band narrow.
struct Layout {
    vx: Vec<usize>,
    vy: Vec<usize>,
    ss: Vec<usize>,
    uxf: Vec<usize>,
    uxs: Vec<usize>,
    n: usize,
}

impl Layout {
    fn new(grid: &ReferenceGrid) -> Self {
        let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
        let mut vx = vec![usize::MAX; (nx + 1) * ny];
        let mut vy = vec![usize::MAX; nx * (ny + 1)];
        let mut ss = vec![usize::MAX; nx];
        let mut uxf = vec![usize::MAX; nx + 1];
        let mut uxs = vec![usize::MAX; nx + 1];
        let mut next = 0usize;
        let mut take = |slot: &mut usize| {
            *slot = next;
            next += 1;
        };
        for j in 0..=ny {
            if j == js {
                (0..=nx).for_each(|i| take(&mut uxf[i]));
                (0..nx).for_each(|i| take(&mut vy[j * nx + i]));
                (0..nx).for_each(|i| take(&mut ss[i]));
                (0..=nx).for_each(|i| take(&mut uxs[i]));
            } else {
                (0..nx).for_each(|i| take(&mut vy[j * nx + i]));
            }
            if j < ny {
                (0..=nx).for_each(|i| take(&mut vx[j * (nx + 1) + i]));
            }
        }
        let n = next;
        Layout {
            vx,
            vy,
            ss,
            uxf,
            uxs,
            n,
        }
    }

    fn vx(&self, grid: &ReferenceGrid, i: usize, j: usize) -> usize {
        self.vx[j * (grid.nx + 1) + i]
    }
    fn vy(&self, grid: &ReferenceGrid, i: usize, j: usize) -> usize {
        self.vy[j * grid.nx + i]
    }
}

/// Solves the transmission problem; data failing the twelve discrete
/// compatibility checks are refused with the failing item named.
pub fn solve_parabolic_transmission(
    grid: &ReferenceGrid,
    problem: &ParabolicTransmissionProblem,
) -> Result<VectorTrajectory, HeatError> {
    problem.validate(grid)?;
    let report = crate::norms_compat::check_parabolic_transmission(grid, problem, None);
    if !report.all_passed() {
        return Err(HeatError::Incompatible(report));
    }

    let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
    let (dx, dy, dt) = (grid.dx, grid.dy, problem.dt);
    let lay = Layout::new(grid);
    let jsign = problem.orientation.jump_sign();
    let n_y = problem.orientation.normal_y();
    let mu = problem.mu;
    let rho = problem.rho;

    let mut sys = SystemBuilder::new(lay.n);

    // --- vx momentum rows (all x-face points) ---------------------------
    for j in 0..ny {
        let phase = grid.phase_of_cell_row(j);
        let (m, r) = (mu.at(phase), rho.at(phase));
        for i in 0..=nx {
            let me = lay.vx(grid, i, j);
            sys.add(me, me, r / dt)?;
            // x-direction: interior 3-point Laplacian; half-cell balance with
            // the prescribed normal stress at the end faces.
            if i == 0 {
                sys.add(me, me, 2.0 * m / (dx * dx))?;
                sys.add(me, lay.vx(grid, 1, j), -2.0 * m / (dx * dx))?;
            } else if i == nx {
                sys.add(me, me, 2.0 * m / (dx * dx))?;
                sys.add(me, lay.vx(grid, nx - 1, j), -2.0 * m / (dx * dx))?;
            } else {
                sys.add(me, me, 2.0 * m / (dx * dx))?;
                sys.add(me, lay.vx(grid, i - 1, j), -m / (dx * dx))?;
                sys.add(me, lay.vx(grid, i + 1, j), -m / (dx * dx))?;
            }
            // y-direction closures.
            if j == 0 {
                // Symmetry axis: mirror ghost with zero derivative.
                sys.add(me, me, m / (dy * dy))?;
                sys.add(me, lay.vx(grid, i, 1), -m / (dy * dy))?;
            } else if j == js - 1 {
                // Fluid cell under the interface: one-sided closure through
                // the fluid-side trace.
                sys.add(me, me, 4.0 * m / (dy * dy))?;
                sys.add(me, lay.uxf[i], -8.0 * m / (3.0 * dy * dy))?;
                sys.add(me, lay.vx(grid, i, js - 2), -4.0 * m / (3.0 * dy * dy))?;
            } else if j == js {
                // Solid cell above the interface: solid-side trace.
                sys.add(me, me, 4.0 * m / (dy * dy))?;
                sys.add(me, lay.uxs[i], -8.0 * m / (3.0 * dy * dy))?;
                sys.add(me, lay.vx(grid, i, js + 1), -4.0 * m / (3.0 * dy * dy))?;
            } else if j == ny - 1 {
                // Outer wall: half-cell Dirichlet balance (datum on the rhs).
                sys.add(me, me, 3.0 * m / (dy * dy))?;
                sys.add(me, lay.vx(grid, i, ny - 2), -m / (dy * dy))?;
            } else {
                sys.add(me, me, 2.0 * m / (dy * dy))?;
                sys.add(me, lay.vx(grid, i, j - 1), -m / (dy * dy))?;
                sys.add(me, lay.vx(grid, i, j + 1), -m / (dy * dy))?;
            }
        }
    }

    // --- vy rows ---------------------------------------------------------
    for j in 0..=ny {
        for i in 0..nx {
            let me = lay.vy(grid, i, j);
            if j == 0 || j == ny {
                // Axis and wall rows are Dirichlet.
                sys.add(me, me, 1.0)?;
                continue;
            }
            if j == js {
                // Fluid-side trace row: normal stress jump
                // jsign * n_y * 2 (mu_s dy(u_y)|s - mu_f dy(u_y)|f) = g2y.
                let w = jsign * n_y * 2.0 / (2.0 * dy);
                // Solid side: dy(u_y) = (-3 ss + 4 vy(js+1) - vy(js+2)) / (2 dy).
                sys.add(me, lay.ss[i], w * mu.solid * -3.0)?;
                sys.add(me, lay.vy(grid, i, js + 1), w * mu.solid * 4.0)?;
                sys.add(me, lay.vy(grid, i, js + 2), w * mu.solid * -1.0)?;
                // Fluid side: dy(u_y) = (3 vy(js) - 4 vy(js-1) + vy(js-2)) / (2 dy).
                sys.add(me, me, -w * mu.fluid * 3.0)?;
                sys.add(me, lay.vy(grid, i, js - 1), -w * mu.fluid * -4.0)?;
                sys.add(me, lay.vy(grid, i, js - 2), -w * mu.fluid * 1.0)?;
                continue;
            }
            let phase = if j < js { Phase::Fluid } else { Phase::Solid };
            let m = mu.at(phase);
            sys.add(me, me, rho.at(phase) / dt)?;
            // x-direction: half-cell Dirichlet closures at the ends (g3).
            if i == 0 {
                sys.add(me, me, 3.0 * m / (dx * dx))?;
                sys.add(me, lay.vy(grid, 1, j), -m / (dx * dx))?;
            } else if i == nx - 1 {
                sys.add(me, me, 3.0 * m / (dx * dx))?;
                sys.add(me, lay.vy(grid, nx - 2, j), -m / (dx * dx))?;
            } else {
                sys.add(me, me, 2.0 * m / (dx * dx))?;
                sys.add(me, lay.vy(grid, i - 1, j), -m / (dx * dx))?;
                sys.add(me, lay.vy(grid, i + 1, j), -m / (dx * dx))?;
            }
            // y-direction: centered; the neighbour across the interface is
            // the own-phase trace.
            let below = if j - 1 == js && phase == Phase::Solid {
                lay.ss[i]
            } else {
                lay.vy(grid, i, j - 1)
            };
            let above = lay.vy(grid, i, j + 1);
            sys.add(me, me, 2.0 * m / (dy * dy))?;
            sys.add(me, below, -m / (dy * dy))?;
            sys.add(me, above, -m / (dy * dy))?;
        }
    }

    // --- interface trace rows ---------------------------------------------
    // Solid-side normal trace: velocity jump (normal component).
    for i in 0..nx {
        let me = lay.ss[i];
        sys.add(me, me, jsign)?;
        sys.add(me, lay.vy(grid, i, js), -jsign)?;
    }
    // Fluid-side tangential trace: tangential stress jump at x-face nodes,
    // jsign * n_y * (mu_s (dy ux + dx uy)|s - mu_f (dy ux + dx uy)|f) = g2x.
    let dx_along = |sys: &mut SystemBuilder,
                    row: usize,
                    weight: f64,
                    at: &dyn Fn(usize) -> usize,
                    i: usize|
     -> Result<(), crate::linalg::LinAlgError> {
        // d/dx of a cell-sampled interface line, evaluated at node i.
        if i == 0 {
            sys.add(row, at(0), weight * -2.0 / dx)?;
            sys.add(row, at(1), weight * 3.0 / dx)?;
            sys.add(row, at(2), weight * -1.0 / dx)?;
        } else if i == nx {
            sys.add(row, at(nx - 1), weight * 2.0 / dx)?;
            sys.add(row, at(nx - 2), weight * -3.0 / dx)?;
            sys.add(row, at(nx - 3), weight * 1.0 / dx)?;
        } else {
            sys.add(row, at(i), weight / dx)?;
            sys.add(row, at(i - 1), -weight / dx)?;
        }
        Ok(())
    };
    for i in 0..=nx {
        let me = lay.uxf[i];
        let w = jsign * n_y;
        // Solid side dy(u_x) through the trace: (-8 Uxs + 9 vx(js) - vx(js+1)) / (3 dy).
        let cs = w * mu.solid / (3.0 * dy);
        sys.add(me, lay.uxs[i], cs * -8.0)?;
        sys.add(me, lay.vx(grid, i, js), cs * 9.0)?;
        sys.add(me, lay.vx(grid, i, js + 1), cs * -1.0)?;
        // Fluid side dy(u_x): (8 Uxf - 9 vx(js-1) + vx(js-2)) / (3 dy).
        let cf = w * mu.fluid / (3.0 * dy);
        sys.add(me, lay.uxf[i], -cf * 8.0)?;
        sys.add(me, lay.vx(grid, i, js - 1), -cf * -9.0)?;
        sys.add(me, lay.vx(grid, i, js - 2), -cf * 1.0)?;
        // dx(u_y) along each side of the interface.
        dx_along(&mut sys, me, w * mu.solid, &|k| lay.ss[k], i)?;
        dx_along(&mut sys, me, -w * mu.fluid, &|k| lay.vy(grid, k, js), i)?;
    }
    // Solid-side tangential trace: velocity jump (tangential component).
    for i in 0..=nx {
        let me = lay.uxs[i];
        sys.add(me, me, jsign)?;
        sys.add(me, lay.uxf[i], -jsign)?;
    }

    let lu = sys.factor()?;

    // --- time stepping -----------------------------------------------------
    let mut levels = Vec::with_capacity(problem.nsteps + 1);
    levels.push(problem.u0.clone());
    let mut old = problem.u0.clone();
    for step in 1..=problem.nsteps {
        let (fx, fy) = &problem.f[step];
        let mut rhs = vec![0.0; lay.n];
        for j in 0..ny {
            let phase = grid.phase_of_cell_row(j);
            let (m, r) = (mu.at(phase), rho.at(phase));
            for i in 0..=nx {
                let me = lay.vx(grid, i, j);
                rhs[me] = r * old.vx.at(i, j) / dt + fx.at(i, j);
                if i == 0 {
                    rhs[me] -= problem.g4[0][step][j] / dx;
                } else if i == nx {
                    rhs[me] += problem.g4[1][step][j] / dx;
                }
                if j == ny - 1 {
                    rhs[me] += 2.0 * m * problem.g5x[step][i] / (dy * dy);
                }
            }
        }
        for j in 1..ny {
            if j == js {
                continue;
            }
            let phase = if j < js { Phase::Fluid } else { Phase::Solid };
            let (m, r) = (mu.at(phase), rho.at(phase));
            for i in 0..nx {
                let me = lay.vy(grid, i, j);
                rhs[me] = r * old.vy.at(i, j) / dt + fy.at(i, j);
                if i == 0 {
                    rhs[me] += 2.0 * m * problem.g3[0][step][j] / (dx * dx);
                } else if i == nx - 1 {
                    rhs[me] += 2.0 * m * problem.g3[1][step][j] / (dx * dx);
                }
            }
        }
        for i in 0..nx {
            rhs[lay.vy(grid, i, 0)] = 0.0;
            rhs[lay.vy(grid, i, ny)] = problem.g5y[step][i];
            rhs[lay.vy(grid, i, js)] = problem.g2y[step][i];
            rhs[lay.ss[i]] = problem.g1y[step][i];
        }
        for i in 0..=nx {
            rhs[lay.uxf[i]] = problem.g2x[step][i];
            rhs[lay.uxs[i]] = problem.g1x[step][i];
        }
        lu.solve_in_place(&mut rhs);

        let mut v = StagVelocity::zeros(grid);
        for j in 0..ny {
            for i in 0..=nx {
                v.vx.set(i, j, rhs[lay.vx(grid, i, j)]);
            }
        }
        for j in 0..=ny {
            for i in 0..nx {
                v.vy.set(i, j, rhs[lay.vy(grid, i, j)]);
            }
        }
        for i in 0..nx {
            v.vy_sigma_solid[i] = rhs[lay.ss[i]];
        }
        for i in 0..=nx {
            v.vx_sigma_fluid[i] = rhs[lay.uxf[i]];
            v.vx_sigma_solid[i] = rhs[lay.uxs[i]];
        }
        old = v.clone();
        levels.push(v);
    }
    Ok(VectorTrajectory { levels, dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_reference_domain;
    use std::f64::consts::PI;

    struct ZeroData;
    impl TransmissionData for ZeroData {}

    #[test]
    fn zero_data_yields_zero_trajectory() {
        let grid = build_reference_domain(1.0, 0.5, 8, 8).unwrap();
        let p = ParabolicTransmissionProblem::sample(
            &grid,
            &ZeroData,
            PhaseCoeff::new(1.0, 2.0),
            PhaseCoeff::new(1.0, 3.0),
            0.05,
            4,
        );
        let traj = solve_parabolic_transmission(&grid, &p).unwrap();
        assert_eq!(traj.levels.len(), 5);
        for level in &traj.levels {
            assert_eq!(level.max_abs(), 0.0);
        }
    }

    /// Manufactured scalar-slice solution u = (e^{-t} w(y) q(x), 0) with
    /// w piecewise smooth across the interface, exercising the jump data,
    /// the wall Dirichlet data, and the per-phase forcing.
    struct SliceData {
        l: f64,
        mu: PhaseCoeff,
        rho: PhaseCoeff,
    }

    impl SliceData {
        fn w(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => 2.0 + (PI * y).cos(),
                Phase::Solid => 1.0 + (y - 1.0) * (y - 1.0),
            }
        }
        fn w2(&self, y: f64, phase: Phase) -> f64 {
            match phase {
                Phase::Fluid => -PI * PI * (PI * y).cos(),
                Phase::Solid => 2.0,
            }
        }
        fn q(&self, x: f64) -> f64 {
            (PI * x / self.l).cos()
        }
        fn ux(&self, x: f64, y: f64, t: f64, phase: Phase) -> f64 {
            (-t).exp() * self.w(y, phase) * self.q(x)
        }
        fn phase_at(&self, y: f64) -> Phase {
            if y < 0.5 {
                Phase::Fluid
            } else {
                Phase::Solid
            }
        }
    }

    impl TransmissionData for SliceData {
        fn forcing(&self, x: f64, y: f64, t: f64) -> (f64, f64) {
            let p = self.phase_at(y);
            let (m, r) = (self.mu.at(p), self.rho.at(p));
            let k = PI / self.l;
            let fx = (-t).exp()
                * self.q(x)
                * (-r * self.w(y, p) - m * self.w2(y, p) + m * k * k * self.w(y, p));
            (fx, 0.0)
        }
        fn jump_velocity(&self, x: f64, t: f64) -> (f64, f64) {
            // [[u_x]] = fluid - solid: w_f(1/2) - w_s(1/2) = 2 - 1.25 = 0.75.
            (0.75 * (-t).exp() * self.q(x), 0.0)
        }
        fn jump_stress(&self, x: f64, t: f64) -> (f64, f64) {
            // [[mu dy(u_x)]] nu_y = -(mu_f w_f' - mu_s w_s') at y = 1/2,
            // with w_f'(1/2) = -pi, w_s'(1/2) = -1.
            let jump = self.mu.solid * -1.0 - self.mu.fluid * -PI;
            (jump * (-t).exp() * self.q(x), 0.0)
        }
        fn wall_velocity(&self, x: f64, t: f64) -> (f64, f64) {
            ((-t).exp() * self.q(x), 0.0)
        }
        fn initial(&self, x: f64, y: f64, phase: Phase) -> (f64, f64) {
            (self.ux(x, y, 0.0, phase), 0.0)
        }
    }

    fn slice_error(nx: usize, ny: usize, nsteps: usize) -> f64 {
        let grid = build_reference_domain(2.0, 0.5, nx, ny).unwrap();
        let data = SliceData {
            l: grid.l,
            mu: PhaseCoeff::new(0.7, 1.4),
            rho: PhaseCoeff::new(1.0, 1.2),
        };
        let t_end = 0.1;
        let p = ParabolicTransmissionProblem::sample(
            &grid,
            &data,
            data.rho,
            data.mu,
            t_end / nsteps as f64,
            nsteps,
        );
        let traj = solve_parabolic_transmission(&grid, &p).unwrap();
        let last = traj.levels.last().unwrap();
        let mut sq = 0.0;
        let mut count = 0usize;
        for j in 0..grid.ny {
            let phase = grid.phase_of_cell_row(j);
            for i in 0..=grid.nx {
                let e = last.vx.at(i, j) - data.ux(grid.xf(i), grid.yc(j), t_end, phase);
                sq += e * e;
                count += 1;
            }
        }
        (sq / count as f64).sqrt()
    }

    #[test]
    fn scalar_slice_converges() {
        let e1 = slice_error(16, 16, 8);
        let e2 = slice_error(32, 32, 32);
        let order = (e1 / e2).log2();
        assert!(
            (1.5..2.6).contains(&order),
            "order {order}, errors {e1:.3e} -> {e2:.3e}"
        );
    }

    struct JumpMismatch;
    impl TransmissionData for JumpMismatch {
        fn jump_velocity(&self, _x: f64, t: f64) -> (f64, f64) {
            // Vanishes at t = 0 (initial compatibility holds) but disagrees
            // with the zero tangential end data at the contact corners later.
            (0.0, 100.0 * t)
        }
    }

    #[test]
    fn contact_mismatch_is_refused_naming_the_item() {
        let grid = build_reference_domain(1.0, 0.5, 32, 32).unwrap();
        let p = ParabolicTransmissionProblem::sample(
            &grid,
            &JumpMismatch,
            PhaseCoeff::default(),
            PhaseCoeff::default(),
            0.01,
            50,
        );
        match solve_parabolic_transmission(&grid, &p) {
            Err(HeatError::Incompatible(report)) => {
                assert_eq!(report.failed_names(), vec!["transmission-item-9"]);
            }
            other => panic!("expected refusal, got {:?}", other.map(|t| t.levels.len())),
        }
    }
}
