//! Scalar diffusion solvers: single-region Neumann problems (fluid strip or
//! solid ring) and the permeability-coupled two-phase concentration system.
//!
//! Both use backward Euler in time on the cell-centered grid. The coupled
//! system ties the two phases together through a Robin-type permeability
//! equation and flux continuity on the interface:
//!
//! ```text
//! zeta [[c]] - D_s grad(c_s) . nu_Sigma = F_robin   (datum: solid problem)
//! [[D grad(c)]] . nu_Sigma              = F_flux    (datum: fluid problem)
//! ```
//!
//! discretized with one-sided second-order flux stencils through a pair of
//! interface trace values per column; the trace pair is eliminated exactly,
//! so discrete flux continuity holds as a linear identity and total mass is
//! conserved to solver roundoff when the data are homogeneous.

use crate::geometry::{CellField, InterfaceOrientation, Phase, PhaseCoeff, ReferenceGrid};
use crate::linalg::{LinAlgError, SystemBuilder};
use crate::report::ConditionReport;
use thiserror::Error;

/// Errors from the scalar diffusion solvers.
#[derive(Debug, Error)]
pub enum HeatError {
    /// Initial data incompatible with the time-zero flux data.
    #[error("incompatible initial/flux data: {}", .0.failed_names().join(", "))]
    Incompatible(ConditionReport),
    #[error("invalid heat problem: {reason}")]
    InvalidParameter { reason: String },
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// Data bundle for a scalar diffusion problem.
///
/// Flux data are outward normal fluxes `D grad(c) . nu` of the region the
/// solve runs on, sampled per time level (`nsteps + 1` levels, level `n` at
/// `t = n dt`): `flux_sigma` on interface cell columns, `flux_left` /
/// `flux_right` on end-face cell rows (full-grid rows; only region rows are
/// consulted), `flux_outer` on outer-wall columns (solid region only). The
/// symmetry axis always carries zero flux. In the coupled solve the two
/// `flux_sigma` arrays reinterpret as the interface inhomogeneities (see
/// [`solve_coupled_concentrations`]).
#[derive(Debug, Clone)]
pub struct HeatProblem {
    /// Diffusivity per phase (the region solve uses its own phase's value).
    pub d: PhaseCoeff,
    /// Forcing per time level (cell-centered, full grid).
    pub f_c: Vec<CellField>,
    /// Interface flux datum per level per column.
    pub flux_sigma: Vec<Vec<f64>>,
    /// Left end-face flux datum per level per row.
    pub flux_left: Vec<Vec<f64>>,
    /// Right end-face flux datum per level per row.
    pub flux_right: Vec<Vec<f64>>,
    /// Outer-wall flux datum per level per column.
    pub flux_outer: Vec<Vec<f64>>,
    /// Optional permeability coefficient carried with the problem (the
    /// coupled solver takes the coefficient explicitly).
    pub robin: Option<f64>,
    /// Initial concentration (cell-centered, full grid).
    pub c0: CellField,
    /// Time step (> 0).
    pub dt: f64,
    /// Number of backward-Euler steps.
    pub nsteps: usize,
    /// Interface orientation convention for jump data.
    pub orientation: InterfaceOrientation,
}

impl HeatProblem {
    /// Samples analytic data; closures receive `(x, y, t)` or the relevant
    /// subset. `flux_ends(x, y, t)` is evaluated with `x` in `{0, L}`.
    #[allow(clippy::too_many_arguments)] // one closure per datum, in display order
    pub fn from_functions(
        grid: &ReferenceGrid,
        d: PhaseCoeff,
        dt: f64,
        nsteps: usize,
        c0: impl Fn(f64, f64) -> f64,
        f_c: impl Fn(f64, f64, f64) -> f64,
        flux_sigma: impl Fn(f64, f64) -> f64,
        flux_ends: impl Fn(f64, f64, f64) -> f64,
        flux_outer: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let times: Vec<f64> = (0..=nsteps).map(|n| n as f64 * dt).collect();
        HeatProblem {
            d,
            f_c: times
                .iter()
                .map(|&t| CellField::from_fn(grid, |x, y| f_c(x, y, t)))
                .collect(),
            flux_sigma: times
                .iter()
                .map(|&t| (0..grid.nx).map(|i| flux_sigma(grid.xc(i), t)).collect())
                .collect(),
            flux_left: times
                .iter()
                .map(|&t| {
                    (0..grid.ny)
                        .map(|j| flux_ends(0.0, grid.yc(j), t))
                        .collect()
                })
                .collect(),
            flux_right: times
                .iter()
                .map(|&t| {
                    (0..grid.ny)
                        .map(|j| flux_ends(grid.l, grid.yc(j), t))
                        .collect()
                })
                .collect(),
            flux_outer: times
                .iter()
                .map(|&t| (0..grid.nx).map(|i| flux_outer(grid.xc(i), t)).collect())
                .collect(),
            robin: None,
            c0: CellField::from_fn(grid, c0),
            dt,
            nsteps,
            orientation: InterfaceOrientation::default(),
        }
    }

    /// Problem with zero forcing and zero flux data.
    pub fn zero_data(
        grid: &ReferenceGrid,
        d: PhaseCoeff,
        dt: f64,
        nsteps: usize,
        c0: CellField,
    ) -> Self {
        Self::from_functions(
            grid,
            d,
            dt,
            nsteps,
            |_, _| 0.0,
            |_, _, _| 0.0,
            |_, _| 0.0,
            |_, _, _| 0.0,
            |_, _| 0.0,
        )
        .with_initial(c0)
    }

    /// Replaces the initial field.
    pub fn with_initial(mut self, c0: CellField) -> Self {
        self.c0 = c0;
        self
    }

    pub(crate) fn validate(&self, grid: &ReferenceGrid) -> Result<(), HeatError> {
        if !self.d.is_positive() {
            return Err(HeatError::InvalidParameter {
                reason: format!("diffusivity must be positive, got {:?}", self.d),
            });
        }
        if let Some(z) = self.robin {
            if !(z > 0.0 && z.is_finite()) {
                return Err(HeatError::InvalidParameter {
                    reason: format!("permeability coefficient must be positive, got {z}"),
                });
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(HeatError::InvalidParameter {
                reason: format!("time step must be positive, got {}", self.dt),
            });
        }
        let lv = self.nsteps + 1;
        let ok = self.f_c.len() == lv
            && self.flux_sigma.len() == lv
            && self.flux_left.len() == lv
            && self.flux_right.len() == lv
            && self.flux_outer.len() == lv
            && self.flux_sigma.iter().all(|v| v.len() == grid.nx)
            && self.flux_outer.iter().all(|v| v.len() == grid.nx)
            && self.flux_left.iter().all(|v| v.len() == grid.ny)
            && self.flux_right.iter().all(|v| v.len() == grid.ny)
            && self.c0.cols() == grid.nx;
        if !ok {
            return Err(HeatError::InvalidParameter {
                reason: "data level count or lengths do not match the grid".into(),
            });
        }
        Ok(())
    }

    /// Largest data magnitude, for tolerance scaling.
    pub(crate) fn data_scale(&self) -> f64 {
        let mut m = self.c0.max_abs();
        for f in &self.f_c {
            m = m.max(f.max_abs());
        }
        for levels in [
            &self.flux_sigma,
            &self.flux_left,
            &self.flux_right,
            &self.flux_outer,
        ] {
            for v in levels.iter() {
                for &x in v {
                    m = m.max(x.abs());
                }
            }
        }
        m
    }
}

/// Concentration trajectory of a single-region solve (cells outside the
/// region are zero).
#[derive(Debug, Clone)]
pub struct HeatTrajectory {
    /// Levels `0..=nsteps`, level 0 is the initial field.
    pub levels: Vec<CellField>,
    pub dt: f64,
}

/// Trajectory of the coupled two-phase solve, with recovered interface
/// traces and one-sided interface fluxes `D dc/dy` per column per level.
#[derive(Debug, Clone)]
pub struct CoupledTrajectory {
    pub levels: Vec<CellField>,
    /// Fluid-side interface trace per level per column.
    pub trace_fluid: Vec<Vec<f64>>,
    /// Solid-side interface trace per level per column.
    pub trace_solid: Vec<Vec<f64>>,
    /// Fluid-side interface flux `D_f dc_f/dy` at the interface.
    pub flux_fluid: Vec<Vec<f64>>,
    /// Solid-side interface flux `D_s dc_s/dy` at the interface.
    pub flux_solid: Vec<Vec<f64>>,
    pub dt: f64,
}

impl CoupledTrajectory {
    /// Fluid part of the trajectory (solid cells zeroed).
    pub fn fluid_trajectory(&self, grid: &ReferenceGrid) -> HeatTrajectory {
        self.phase_trajectory(grid, Phase::Fluid)
    }

    /// Solid part of the trajectory (fluid cells zeroed).
    pub fn solid_trajectory(&self, grid: &ReferenceGrid) -> HeatTrajectory {
        self.phase_trajectory(grid, Phase::Solid)
    }

    fn phase_trajectory(&self, grid: &ReferenceGrid, phase: Phase) -> HeatTrajectory {
        let (j0, j1) = region_rows(grid, phase);
        HeatTrajectory {
            levels: self
                .levels
                .iter()
                .map(|f| region_only(grid, f, j0, j1))
                .collect(),
            dt: self.dt,
        }
    }
}

/// Rows spanned by a region.
pub(crate) fn region_rows(grid: &ReferenceGrid, region: Phase) -> (usize, usize) {
    match region {
        Phase::Fluid => (0, grid.j_sigma),
        Phase::Solid => (grid.j_sigma, grid.ny),
    }
}

/// Solves the diffusion equation in one region with outward Neumann flux
/// data on its interface/end/outer boundaries (the axis is zero-flux), after
/// checking the time-zero compatibility of `c0` against the flux data.
pub fn solve_heat_neumann(
    grid: &ReferenceGrid,
    problem: &HeatProblem,
    region: Phase,
) -> Result<HeatTrajectory, HeatError> {
    problem.validate(grid)?;
    let (j0, j1) = region_rows(grid, region);
    if grid.nx < 2 || j1 - j0 < 2 {
        return Err(HeatError::InvalidParameter {
            reason: "region must span at least two cells in each direction".into(),
        });
    }
    let report = crate::norms_compat::check_heat_compatibility(grid, problem, region, None);
    if !report.all_passed() {
        return Err(HeatError::Incompatible(report));
    }

    let (nx, dx, dy, dt) = (grid.nx, grid.dx, grid.dy, problem.dt);
    let nyr = j1 - j0;
    let n = nx * nyr;
    let d = problem.d.at(region);
    let idx = |i: usize, j: usize| (j - j0) * nx + i;

    let mut sys = SystemBuilder::new(n);
    for j in j0..j1 {
        for i in 0..nx {
            let me = idx(i, j);
            sys.add(me, me, 1.0 / dt)?;
            // x-direction faces (interior only; end faces carry flux data).
            if i > 0 {
                sys.add(me, me, d / (dx * dx))?;
                sys.add(me, idx(i - 1, j), -d / (dx * dx))?;
            }
            if i + 1 < nx {
                sys.add(me, me, d / (dx * dx))?;
                sys.add(me, idx(i + 1, j), -d / (dx * dx))?;
            }
            // y-direction faces (interior only).
            if j > j0 {
                sys.add(me, me, d / (dy * dy))?;
                sys.add(me, idx(i, j - 1), -d / (dy * dy))?;
            }
            if j + 1 < j1 {
                sys.add(me, me, d / (dy * dy))?;
                sys.add(me, idx(i, j + 1), -d / (dy * dy))?;
            }
        }
    }
    let lu = sys.factor()?;

    let mut levels = Vec::with_capacity(problem.nsteps + 1);
    levels.push(region_only(grid, &problem.c0, j0, j1));
    let mut c: Vec<f64> = (j0..j1)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| problem.c0.at(i, j))
        .collect();
    for step in 1..=problem.nsteps {
        let mut rhs = vec![0.0; n];
        for j in j0..j1 {
            for i in 0..nx {
                let me = idx(i, j);
                rhs[me] = c[me] / dt + problem.f_c[step].at(i, j);
                if i == 0 {
                    rhs[me] += problem.flux_left[step][j] / dx;
                }
                if i + 1 == nx {
                    rhs[me] += problem.flux_right[step][j] / dx;
                }
                match region {
                    Phase::Fluid => {
                        if j + 1 == j1 {
                            rhs[me] += problem.flux_sigma[step][i] / dy;
                        }
                    }
                    Phase::Solid => {
                        if j == j0 {
                            rhs[me] += problem.flux_sigma[step][i] / dy;
                        }
                        if j + 1 == j1 {
                            rhs[me] += problem.flux_outer[step][i] / dy;
                        }
                    }
                }
            }
        }
        lu.solve_in_place(&mut rhs);
        c = rhs;
        let mut field = CellField::zeros(grid);
        for j in j0..j1 {
            for i in 0..nx {
                field.set(i, j, c[idx(i, j)]);
            }
        }
        levels.push(field);
    }
    Ok(HeatTrajectory { levels, dt })
}

fn region_only(grid: &ReferenceGrid, c: &CellField, j0: usize, j1: usize) -> CellField {
    let mut out = CellField::zeros(grid);
    for j in j0..j1 {
        for i in 0..grid.nx {
            out.set(i, j, c.at(i, j));
        }
    }
    out
}

/// Linear forms expressing an interface quantity in terms of the four
/// adjacent cell values `(f0, f1, s0, s1)` plus the two interface data.
#[derive(Debug, Clone, Copy)]
struct TraceForm {
    cells: [f64; 4],
    data: [f64; 2],
}

/// Per-column elimination of the coupled interface trace pair.
///
/// With `q_f = D_f (8 t_f - 9 f0 + f1)/(3 dy)` (fluid-side flux) and
/// `q_s = D_s (-8 t_s + 9 s0 - s1)/(3 dy)` (solid-side flux), the two
/// interface equations are
///
/// ```text
/// q_s - q_f                      = s_ny  * F_flux     (flux continuity)
/// zeta j (t_s - t_f) - n_y q_s   = F_robin            (permeability)
/// ```
///
/// where `j` is the jump sign and `s_ny = j * n_y`. Solving the 2x2 system
/// for `(t_f, t_s)` gives each as a linear form in the cell values and data.
struct InterfaceElim {
    t_f: TraceForm,
    t_s: TraceForm,
    q_f: TraceForm,
    q_s: TraceForm,
}

fn eliminate_interface(
    d_f: f64,
    d_s: f64,
    zeta: f64,
    dy: f64,
    orientation: InterfaceOrientation,
) -> InterfaceElim {
    let j = orientation.jump_sign();
    let n_y = orientation.normal_y();
    // Row 1:  -8 D_f t_f - 8 D_s t_s
    //           = 3 dy (j n_y F_flux) - 9 D_f f0 + D_f f1 - 9 D_s s0 + D_s s1
    // Row 2:  -zeta j t_f + (zeta j + 8 n_y D_s/(3 dy)) t_s
    //           = F_robin + n_y D_s (9 s0 - s1)/(3 dy)
    let a = [
        [-8.0 * d_f, -8.0 * d_s],
        [-zeta * j, zeta * j + 8.0 * n_y * d_s / (3.0 * dy)],
    ];
    // RHS of each row as linear forms in (f0, f1, s0, s1; F_flux, F_robin).
    let r1 = TraceForm {
        cells: [-9.0 * d_f, d_f, -9.0 * d_s, d_s],
        data: [3.0 * dy * j * n_y, 0.0],
    };
    let r2 = TraceForm {
        cells: [
            0.0,
            0.0,
            9.0 * n_y * d_s / (3.0 * dy),
            -n_y * d_s / (3.0 * dy),
        ],
        data: [0.0, 1.0],
    };
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    assert!(det.abs() > 0.0, "interface trace system is singular");
    let inv = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let combine = |w0: f64, w1: f64| TraceForm {
        cells: std::array::from_fn(|k| w0 * r1.cells[k] + w1 * r2.cells[k]),
        data: std::array::from_fn(|k| w0 * r1.data[k] + w1 * r2.data[k]),
    };
    let t_f = combine(inv[0][0], inv[0][1]);
    let t_s = combine(inv[1][0], inv[1][1]);
    // q_f = D_f (8 t_f - 9 f0 + f1)/(3 dy); q_s = D_s (-8 t_s + 9 s0 - s1)/(3 dy).
    let cf = d_f / (3.0 * dy);
    let q_f = TraceForm {
        cells: std::array::from_fn(|k| {
            cf * (8.0 * t_f.cells[k]
                + if k == 0 {
                    -9.0
                } else if k == 1 {
                    1.0
                } else {
                    0.0
                })
        }),
        data: [cf * 8.0 * t_f.data[0], cf * 8.0 * t_f.data[1]],
    };
    let cs = d_s / (3.0 * dy);
    let q_s = TraceForm {
        cells: std::array::from_fn(|k| {
            cs * (-8.0 * t_s.cells[k]
                + if k == 2 {
                    9.0
                } else if k == 3 {
                    -1.0
                } else {
                    0.0
                })
        }),
        data: [cs * -8.0 * t_s.data[0], cs * -8.0 * t_s.data[1]],
    };
    InterfaceElim { t_f, t_s, q_f, q_s }
}

impl TraceForm {
    fn eval(&self, cells: [f64; 4], data: [f64; 2]) -> f64 {
        self.cells
            .iter()
            .zip(cells)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            + self.data.iter().zip(data).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Solves the permeability-coupled two-phase concentration system with a
/// monolithic implicit step.
///
/// `fluid` supplies the fluid diffusivity/forcing/end fluxes and its
/// `flux_sigma` is the flux-continuity inhomogeneity; `solid` supplies the
/// solid side and its `flux_sigma` is the permeability-equation
/// inhomogeneity. Both problems must share `dt` and `nsteps`.
pub fn solve_coupled_concentrations(
    grid: &ReferenceGrid,
    fluid: &HeatProblem,
    solid: &HeatProblem,
    zeta: f64,
) -> Result<CoupledTrajectory, HeatError> {
    fluid.validate(grid)?;
    solid.validate(grid)?;
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(HeatError::InvalidParameter {
            reason: format!("permeability coefficient must be positive, got {zeta}"),
        });
    }
    if fluid.dt != solid.dt || fluid.nsteps != solid.nsteps {
        return Err(HeatError::InvalidParameter {
            reason: "fluid and solid problems must share dt and nsteps".into(),
        });
    }
    if fluid.orientation != solid.orientation {
        return Err(HeatError::InvalidParameter {
            reason: "fluid and solid problems must share the interface orientation".into(),
        });
    }
    let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
    let (dx, dy, dt) = (grid.dx, grid.dy, fluid.dt);
    if js < 2 || ny - js < 2 {
        return Err(HeatError::InvalidParameter {
            reason: "coupled solve needs at least two cell rows per phase".into(),
        });
    }
    let d_f = fluid.d.fluid;
    let d_s = solid.d.solid;
    let elim = eliminate_interface(d_f, d_s, zeta, dy, fluid.orientation);

    let idx = |i: usize, j: usize| j * nx + i;
    let n = nx * ny;
    let mut sys = SystemBuilder::new(n);
    for j in 0..ny {
        let d = if j < js { d_f } else { d_s };
        for i in 0..nx {
            let me = idx(i, j);
            sys.add(me, me, 1.0 / dt)?;
            if i > 0 {
                sys.add(me, me, d / (dx * dx))?;
                sys.add(me, idx(i - 1, j), -d / (dx * dx))?;
            }
            if i + 1 < nx {
                sys.add(me, me, d / (dx * dx))?;
                sys.add(me, idx(i + 1, j), -d / (dx * dx))?;
            }
            // Interior y-faces of each phase.
            if j > 0 && j != js {
                sys.add(me, me, d / (dy * dy))?;
                sys.add(me, idx(i, j - 1), -d / (dy * dy))?;
            }
            if j + 1 < ny && j + 1 != js {
                sys.add(me, me, d / (dy * dy))?;
                sys.add(me, idx(i, j + 1), -d / (dy * dy))?;
            }
        }
    }
    // Interface faces: the fluid top face carries flux +q_f, the solid bottom
    // face carries -q_s, each a linear form in the four neighbouring cells.
    // (Data parts enter the right-hand side each step.)
    for i in 0..nx {
        let cells = [idx(i, js - 1), idx(i, js - 2), idx(i, js), idx(i, js + 1)];
        for (k, &col) in cells.iter().enumerate() {
            // Fluid cell (i, js-1): -q_f/dy moved to the left-hand side.
            sys.add(idx(i, js - 1), col, -elim.q_f.cells[k] / dy)?;
            // Solid cell (i, js): +q_s/dy on the left-hand side.
            sys.add(idx(i, js), col, elim.q_s.cells[k] / dy)?;
        }
    }
    let lu = sys.factor()?;

    let mut c: Vec<f64> = (0..ny)
        .flat_map(|j| {
            let src = if j < js { &fluid.c0 } else { &solid.c0 };
            (0..nx).map(move |i| src.at(i, j))
        })
        .collect();

    let push_level = |c: &[f64], step: usize, out: &mut CoupledTrajectory| {
        let mut field = CellField::zeros(grid);
        for j in 0..ny {
            for i in 0..nx {
                field.set(i, j, c[idx(i, j)]);
            }
        }
        let mut tf = vec![0.0; nx];
        let mut ts = vec![0.0; nx];
        let mut qf = vec![0.0; nx];
        let mut qs = vec![0.0; nx];
        for i in 0..nx {
            let cells = [
                c[idx(i, js - 1)],
                c[idx(i, js - 2)],
                c[idx(i, js)],
                c[idx(i, js + 1)],
            ];
            let data = [fluid.flux_sigma[step][i], solid.flux_sigma[step][i]];
            tf[i] = elim.t_f.eval(cells, data);
            ts[i] = elim.t_s.eval(cells, data);
            qf[i] = elim.q_f.eval(cells, data);
            qs[i] = elim.q_s.eval(cells, data);
        }
        out.levels.push(field);
        out.trace_fluid.push(tf);
        out.trace_solid.push(ts);
        out.flux_fluid.push(qf);
        out.flux_solid.push(qs);
    };

    let mut out = CoupledTrajectory {
        levels: Vec::new(),
        trace_fluid: Vec::new(),
        trace_solid: Vec::new(),
        flux_fluid: Vec::new(),
        flux_solid: Vec::new(),
        dt,
    };
    push_level(&c, 0, &mut out);

    for step in 1..=fluid.nsteps {
        let mut rhs = vec![0.0; n];
        for j in 0..ny {
            let p = if j < js { fluid } else { solid };
            for i in 0..nx {
                let me = idx(i, j);
                rhs[me] = c[me] / dt + p.f_c[step].at(i, j);
                if i == 0 {
                    rhs[me] += p.flux_left[step][j] / dx;
                }
                if i + 1 == nx {
                    rhs[me] += p.flux_right[step][j] / dx;
                }
                if j + 1 == ny {
                    rhs[me] += solid.flux_outer[step][i] / dy;
                }
            }
        }
        // Interface data parts of q_f, q_s (implicit data at the new level).
        for i in 0..nx {
            let data = [fluid.flux_sigma[step][i], solid.flux_sigma[step][i]];
            let qf_data = elim.q_f.data[0] * data[0] + elim.q_f.data[1] * data[1];
            let qs_data = elim.q_s.data[0] * data[0] + elim.q_s.data[1] * data[1];
            rhs[idx(i, js - 1)] += qf_data / dy;
            rhs[idx(i, js)] -= qs_data / dy;
        }
        lu.solve_in_place(&mut rhs);
        c = rhs;
        push_level(&c, step, &mut out);
    }
    Ok(out)
}
