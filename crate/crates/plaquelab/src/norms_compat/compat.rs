//! Data-compatibility checkers.
//!
//! The time-dependent solvers only admit data satisfying algebraic identities
//! at `t = 0` and at the contact points where the interface or the outer wall
//! meets an end face. Each checker evaluates the discrete analogue of every
//! identity on its list using second-order one-sided stencils and returns a
//! [`ConditionReport`] with one named entry per identity; residuals are
//! measured in the discrete maximum norm over the relevant point set.
//!
//! Entry names are stable identifiers (tests and refusal messages key on
//! them); anchors spell out the identity being checked.

use crate::geometry::{CellField, InterfaceOrientation, Phase, ReferenceGrid, StagVelocity};
use crate::heat::{HeatProblem, ParabolicTransmissionProblem};
use crate::report::{default_threshold, ConditionReport};
use crate::stokes::StokesProblem;

/// Second-order one-sided first derivative at a boundary, taken with respect
/// to distance *into* the sampled side. Samples sit at distances `h/2`,
/// `3h/2` (and `5h/2` when available) from the boundary.
pub(crate) fn deriv_into(f0: f64, f1: f64, f2: Option<f64>, h: f64) -> f64 {
    match f2 {
        Some(f2) => (-2.0 * f0 + 3.0 * f1 - f2) / h,
        None => (f1 - f0) / h,
    }
}

/// Second-order extrapolation of cell samples at distances `h/2`, `3h/2` to
/// the boundary itself.
pub(crate) fn trace_to_boundary(f0: f64, f1: f64) -> f64 {
    1.5 * f0 - 0.5 * f1
}

/// Extrapolation of node samples at distances `h`, `2h` to the boundary.
fn extrap_node(f1: f64, f2: f64) -> f64 {
    2.0 * f1 - f2
}

/// First derivative with respect to distance into the domain, at a boundary
/// the samples do not reach: samples sit at distances `h`, `2h` (and `3h`).
fn deriv_into_offset(f1: f64, f2: f64, f3: Option<f64>, h: f64) -> f64 {
    match f3 {
        Some(f3) => (-2.5 * f1 + 4.0 * f2 - 1.5 * f3) / h,
        None => (f2 - f1) / h,
    }
}

/// First derivative with respect to distance into the domain at a boundary
/// node, from node samples at distances `0`, `h` (and `2h`).
fn node_deriv_into(f0: f64, f1: f64, f2: Option<f64>, h: f64) -> f64 {
    match f2 {
        Some(f2) => (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h),
        None => (f1 - f0) / h,
    }
}

/// Material constants entering the initial-data identities.
#[derive(Debug, Clone, Copy)]
pub struct InitialParams {
    /// Fluid viscosity.
    pub mu_f: f64,
    /// Solid viscosity.
    pub mu_s: f64,
    /// Fluid diffusivity.
    pub d_f: f64,
    /// Solid diffusivity.
    pub d_s: f64,
    /// Interface permeability.
    pub zeta: f64,
    /// Interface orientation convention.
    pub orientation: InterfaceOrientation,
}

impl Default for InitialParams {
    fn default() -> Self {
        InitialParams {
            mu_f: 1.0,
            mu_s: 1.0,
            d_f: 1.0,
            d_s: 1.0,
            zeta: 1.0,
            orientation: InterfaceOrientation::default(),
        }
    }
}

/// Initial velocity and concentration sampled on the staggered grid.
#[derive(Debug, Clone)]
pub struct InitialState {
    /// Velocity, with per-phase interface traces.
    pub v: StagVelocity,
    /// Concentration at cell centers.
    pub c: CellField,
}

impl InitialState {
    /// Samples per-phase analytic data; `v_*` return `(v_x, v_y)` at `(x, y)`.
    pub fn sample(
        grid: &ReferenceGrid,
        v_fluid: impl Fn(f64, f64) -> (f64, f64),
        v_solid: impl Fn(f64, f64) -> (f64, f64),
        c_fluid: impl Fn(f64, f64) -> f64,
        c_solid: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let v = StagVelocity::sample(grid, v_fluid, v_solid);
        let c = CellField::from_fn(grid, |x, y| {
            if y < grid.h {
                c_fluid(x, y)
            } else {
                c_solid(x, y)
            }
        });
        InitialState { v, c }
    }

    /// Samples globally defined (continuous) data.
    pub fn from_single(
        grid: &ReferenceGrid,
        v: impl Fn(f64, f64) -> (f64, f64) + Copy,
        c: impl Fn(f64, f64) -> f64 + Copy,
    ) -> Self {
        Self::sample(grid, v, v, c, c)
    }

    /// Largest absolute sample over all stored fields.
    pub fn max_abs(&self) -> f64 {
        self.v.max_abs().max(self.c.max_abs())
    }
}

/// Checks the initial-data identities of the coupled nonlinear system:
/// divergence-free velocity, homogeneous boundary traces, continuity of
/// velocity and of tangential viscous stress across the interface, the
/// permeability balance and flux continuity of the concentration on the
/// interface, and vanishing end-face concentration flux.
///
/// `threshold` overrides the default `10 * max(dx, dy) * max(1, scale)`.
pub fn check_nonlinear_initial(
    grid: &ReferenceGrid,
    state: &InitialState,
    params: &InitialParams,
    threshold: Option<f64>,
) -> ConditionReport {
    let scale = state.max_abs().max(1.0);
    let thr = threshold.unwrap_or_else(|| default_threshold(grid.dx.max(grid.dy), 0.0, scale));
    let mut report = ConditionReport::new(scale);
    let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
    let (dx, dy) = (grid.dx, grid.dy);
    let (vx, vy, c) = (&state.v.vx, &state.v.vy, &state.c);
    let n_y = params.orientation.normal_y();
    let jsign = params.orientation.jump_sign();

    // 1. Divergence-free interior (conservative cell divergence, each phase
    // using its own interface trace).
    let r = state.v.divergence(grid).max_abs();
    report.push(
        "interior-divergence-free",
        "div v0 = 0 in both phases",
        r,
        thr,
    );

    // 2. Tangential velocity vanishes on the end faces (the tangential
    // component on an end face is v_y; extrapolated from the two nearest
    // columns).
    let mut r = 0.0f64;
    for j in 0..=ny {
        r = r.max(trace_to_boundary(vy.at(0, j), vy.at(1, j)).abs());
        r = r.max(trace_to_boundary(vy.at(nx - 1, j), vy.at(nx - 2, j)).abs());
    }
    let ss = &state.v.vy_sigma_solid;
    r = r.max(trace_to_boundary(ss[0], ss[1]).abs());
    r = r.max(trace_to_boundary(ss[nx - 1], ss[nx - 2]).abs());
    report.push(
        "end-tangential-velocity-zero",
        "tangential part of v0 = 0 on the end faces",
        r,
        thr,
    );

    // 3. Velocity vanishes on the outer wall.
    let mut r = 0.0f64;
    for i in 0..nx {
        r = r.max(vy.at(i, ny).abs());
    }
    for i in 0..=nx {
        r = r.max(trace_to_boundary(vx.at(i, ny - 1), vx.at(i, ny - 2)).abs());
    }
    report.push(
        "outer-wall-velocity-zero",
        "v0 = 0 on the outer wall",
        r,
        thr,
    );

    // 4. Velocity continuity across the interface (stored per-phase traces).
    let mut r = 0.0f64;
    for i in 0..nx {
        r = r.max((state.v.vy_sigma_solid[i] - vy.at(i, js)).abs());
    }
    for i in 0..=nx {
        r = r.max((state.v.vx_sigma_solid[i] - state.v.vx_sigma_fluid[i]).abs());
    }
    report.push(
        "interface-velocity-jump-zero",
        "[[v0]] = 0 on the interface",
        r,
        thr,
    );

    // 5. Tangential viscous stress continuity across the interface: the
    // tangential traction component is mu (dy v_x + dx v_y) nu_y, with
    // one-sided dy v_x from each phase's cell rows and dx v_y along the
    // interface from each phase's trace.
    let fd3 = js >= 3; // three cell rows available for the one-sided stencil
    let sd3 = ny - js >= 3;
    let mut r = 0.0f64;
    for i in 0..=nx {
        let dyvx_f = -deriv_into(
            vx.at(i, js - 1),
            vx.at(i, js - 2),
            if fd3 { Some(vx.at(i, js - 3)) } else { None },
            dy,
        );
        let dyvx_s = deriv_into(
            vx.at(i, js),
            vx.at(i, js + 1),
            if sd3 { Some(vx.at(i, js + 2)) } else { None },
            dy,
        );
        let dxvy_at = |row_f: &dyn Fn(usize) -> f64| -> f64 {
            if i == 0 {
                deriv_into(
                    row_f(0),
                    row_f(1),
                    if nx >= 3 { Some(row_f(2)) } else { None },
                    dx,
                )
            } else if i == nx {
                -deriv_into(
                    row_f(nx - 1),
                    row_f(nx - 2),
                    if nx >= 3 { Some(row_f(nx - 3)) } else { None },
                    dx,
                )
            } else {
                (row_f(i) - row_f(i - 1)) / dx
            }
        };
        let dxvy_f = dxvy_at(&|k| vy.at(k, js));
        let dxvy_s = dxvy_at(&|k| state.v.vy_sigma_solid[k]);
        let jump = jsign * (params.mu_s * (dyvx_s + dxvy_s) - params.mu_f * (dyvx_f + dxvy_f));
        r = r.max((jump * n_y).abs());
    }
    report.push(
        "interface-tangential-stress-jump-zero",
        "tangential part of [[mu (grad v0 + grad v0^T) nu_Sigma]] = 0 on the interface",
        r,
        thr,
    );

    // 6. Interface permeability balance and 7. diffusive flux continuity for
    // the concentration.
    let mut r6 = 0.0f64;
    let mut r7 = 0.0f64;
    for i in 0..nx {
        let cf = trace_to_boundary(c.at(i, js - 1), c.at(i, js - 2));
        let cs = trace_to_boundary(c.at(i, js), c.at(i, js + 1));
        let dyc_f = -deriv_into(
            c.at(i, js - 1),
            c.at(i, js - 2),
            if fd3 { Some(c.at(i, js - 3)) } else { None },
            dy,
        );
        let dyc_s = deriv_into(
            c.at(i, js),
            c.at(i, js + 1),
            if sd3 { Some(c.at(i, js + 2)) } else { None },
            dy,
        );
        let jump_c = jsign * (cs - cf);
        r6 = r6.max((params.zeta * jump_c - params.d_s * n_y * dyc_s).abs());
        r7 = r7.max((jsign * n_y * (params.d_s * dyc_s - params.d_f * dyc_f)).abs());
    }
    report.push(
        "interface-permeability-balance",
        "zeta [[c0]] - D_s grad c0 . nu_Sigma = 0 on the interface (solid side)",
        r6,
        thr,
    );
    report.push(
        "interface-flux-continuity",
        "[[D grad c0]] . nu_Sigma = 0 on the interface",
        r7,
        thr,
    );

    // 8. Concentration flux vanishes on the end faces.
    let x3 = nx >= 3;
    let mut r = 0.0f64;
    for j in 0..ny {
        let d = if j < js { params.d_f } else { params.d_s };
        let left = deriv_into(
            c.at(0, j),
            c.at(1, j),
            if x3 { Some(c.at(2, j)) } else { None },
            dx,
        );
        let right = -deriv_into(
            c.at(nx - 1, j),
            c.at(nx - 2, j),
            if x3 { Some(c.at(nx - 3, j)) } else { None },
            dx,
        );
        r = r.max((d * left).abs()).max((d * right).abs());
    }
    report.push(
        "end-concentration-flux-zero",
        "D grad c0 . nu_G = 0 on the end faces",
        r,
        thr,
    );

    report
}

/// Outward normal derivative of a line of samples ordered from the boundary
/// inward (positions `h/2`, `3h/2`, `5h/2`): the derivative *into* the line,
/// negated.
fn outward_deriv(samples: &[f64], start: usize, step: isize, count: usize, h: f64) -> f64 {
    let at = |k: usize| samples[(start as isize + step * k as isize) as usize];
    let f2 = if count >= 3 { Some(at(2)) } else { None };
    -deriv_into(at(0), at(1), f2, h)
}

/// Checks the time-zero identities a single-region Neumann heat problem must
/// satisfy: the initial field's outward diffusive flux matches the flux data
/// on the interface, the end faces, and (solid region) the outer wall, and
/// the flux data on segments meeting at a contact corner have consistent
/// cross derivatives there.
///
/// `threshold` overrides the default `10 * (max(dx, dy) + dt) * max(1, scale)`.
pub fn check_heat_compatibility(
    grid: &ReferenceGrid,
    problem: &HeatProblem,
    region: Phase,
    threshold: Option<f64>,
) -> ConditionReport {
    let scale = problem.data_scale().max(1.0);
    let thr =
        threshold.unwrap_or_else(|| default_threshold(grid.dx.max(grid.dy), problem.dt, scale));
    let mut report = ConditionReport::new(scale);
    let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
    let (dx, dy) = (grid.dx, grid.dy);
    let (j0, j1) = crate::heat::region_rows(grid, region);
    let nyr = j1 - j0;
    let d = problem.d.at(region);
    let c0 = &problem.c0;

    // Cell column of the region ordered away from the interface.
    let column: Vec<Vec<f64>> = (0..nx)
        .map(|i| match region {
            Phase::Fluid => (0..nyr).map(|k| c0.at(i, js - 1 - k)).collect(),
            Phase::Solid => (0..nyr).map(|k| c0.at(i, js + k)).collect(),
        })
        .collect();

    // 1. Interface flux of c0 matches the interface datum at t = 0.
    let mut r = 0.0f64;
    for (i, col) in column.iter().enumerate() {
        let flux = d * outward_deriv(col, 0, 1, nyr, dy);
        r = r.max((flux - problem.flux_sigma[0][i]).abs());
    }
    report.push(
        "initial-flux-match-interface",
        "D grad c0 . nu_Sigma = g_Sigma(0) on the interface",
        r,
        thr,
    );

    // 2. End-face fluxes of c0 match the end data at t = 0 (region rows).
    let mut r = 0.0f64;
    for j in j0..j1 {
        let row: Vec<f64> = (0..nx).map(|i| c0.at(i, j)).collect();
        let left = d * outward_deriv(&row, 0, 1, nx, dx);
        let right = d * outward_deriv(&row, nx - 1, -1, nx, dx);
        r = r.max((left - problem.flux_left[0][j]).abs());
        r = r.max((right - problem.flux_right[0][j]).abs());
    }
    report.push(
        "initial-flux-match-ends",
        "D grad c0 . nu_G = g_G(0) on the end faces",
        r,
        thr,
    );

    // 3. Outer-wall flux (solid region only).
    if region == Phase::Solid {
        let mut r = 0.0f64;
        for (i, col) in column.iter().enumerate() {
            let flux = d * outward_deriv(col, nyr - 1, -1, nyr, dy);
            r = r.max((flux - problem.flux_outer[0][i]).abs());
        }
        report.push(
            "initial-flux-match-outer",
            "D grad c0 . nu_S = g_S(0) on the outer wall",
            r,
            thr,
        );
    }

    // 4. Corner consistency of the boundary data themselves: where two
    // flux-carrying segments meet, the outward derivative of one segment's
    // datum along the other segment's normal must match its counterpart.
    let sigma = &problem.flux_sigma[0];
    let ends = [&problem.flux_left[0], &problem.flux_right[0]];
    let row_near_sigma = if region == Phase::Fluid { js - 1 } else { js };
    let row_step: isize = if region == Phase::Fluid { -1 } else { 1 };
    let mut r = 0.0f64;
    for (side, g_end) in ends.iter().enumerate() {
        let (start_x, step_x): (usize, isize) = if side == 0 { (0, 1) } else { (nx - 1, -1) };
        // Interface / end-face corner.
        let d_sigma = outward_deriv(sigma, start_x, step_x, nx, dx);
        let d_end = outward_deriv(g_end, row_near_sigma, row_step, nyr, dy);
        r = r.max((d_sigma - d_end).abs());
        // Outer-wall / end-face corner (solid region).
        if region == Phase::Solid {
            let d_wall = outward_deriv(&problem.flux_outer[0], start_x, step_x, nx, dx);
            let d_end = outward_deriv(g_end, ny - 1, -1, nyr, dy);
            r = r.max((d_wall - d_end).abs());
        }
    }
    report.push(
        "corner-flux-consistency",
        "d(g_Sigma)/d nu_G = d(g_G)/d nu_Sigma at the contact corners (likewise at the wall)",
        r,
        thr,
    );

    report
}

/// Checks the twelve admissibility conditions of the vector parabolic
/// transmission problem: finiteness of each data family (items 1-6), initial
/// matching of the interface jumps and outer-boundary data (items 7-8), and
/// the contact-point identities tying the boundary data families together at
/// the interface and wall corners on every time level (items 9-12; item 10
/// concerns the out-of-plane contact component, which vanishes identically in
/// the planar reduction).
pub fn check_parabolic_transmission(
    grid: &ReferenceGrid,
    problem: &ParabolicTransmissionProblem,
    threshold: Option<f64>,
) -> ConditionReport {
    let scale = problem.data_scale().max(1.0);
    let thr =
        threshold.unwrap_or_else(|| default_threshold(grid.dx.max(grid.dy), problem.dt, scale));
    let mut report = ConditionReport::new(scale);
    let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
    let (dx, dy) = (grid.dx, grid.dy);
    let jsign = problem.orientation.jump_sign();
    let n_y = problem.orientation.normal_y();
    let (mu_f, mu_s) = (problem.mu.fluid, problem.mu.solid);
    let u0 = &problem.u0;
    let fin = |ok: bool| if ok { 0.0 } else { f64::INFINITY };
    let all = |arrs: &[&Vec<Vec<f64>>]| {
        arrs.iter()
            .all(|a| a.iter().all(|r| r.iter().all(|v| v.is_finite())))
    };

    // Items 1-6: every sampled data family must be finite on every level.
    report.push(
        "transmission-item-1",
        "forcing f is finite on every level",
        fin(problem
            .f
            .iter()
            .all(|(a, b)| a.max_abs().is_finite() && b.max_abs().is_finite())),
        thr,
    );
    report.push(
        "transmission-item-2",
        "velocity-jump data g1 are finite on every level",
        fin(all(&[&problem.g1x, &problem.g1y])),
        thr,
    );
    report.push(
        "transmission-item-3",
        "stress-jump data g2 are finite on every level",
        fin(all(&[&problem.g2x, &problem.g2y])),
        thr,
    );
    report.push(
        "transmission-item-4",
        "end-face tangential data g3 are finite on every level",
        fin(all(&[&problem.g3[0], &problem.g3[1]])),
        thr,
    );
    report.push(
        "transmission-item-5",
        "end-face normal-stress data g4 are finite on every level",
        fin(all(&[&problem.g4[0], &problem.g4[1]])),
        thr,
    );
    report.push(
        "transmission-item-6",
        "wall data g5 are finite on every level",
        fin(all(&[&problem.g5x, &problem.g5y])),
        thr,
    );

    // Item 7: the initial velocity satisfies the interface jump data at
    // t = 0 -- velocity jump in both components, viscous stress jump in the
    // tangential component.
    let mut r7 = 0.0f64;
    for i in 0..=nx {
        let jump = jsign * (u0.vx_sigma_solid[i] - u0.vx_sigma_fluid[i]);
        r7 = r7.max((jump - problem.g1x[0][i]).abs());
    }
    for i in 0..nx {
        let jump = jsign * (u0.vy_sigma_solid[i] - u0.vy.at(i, js));
        r7 = r7.max((jump - problem.g1y[0][i]).abs());
    }
    let dx_on_sigma = |row: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        if i == 0 {
            deriv_into(
                row(0),
                row(1),
                if nx >= 3 { Some(row(2)) } else { None },
                dx,
            )
        } else if i == nx {
            -deriv_into(
                row(nx - 1),
                row(nx - 2),
                if nx >= 3 { Some(row(nx - 3)) } else { None },
                dx,
            )
        } else {
            (row(i) - row(i - 1)) / dx
        }
    };
    for i in 0..=nx {
        let dy_ux_f = (8.0 * u0.vx_sigma_fluid[i] - 9.0 * u0.vx.at(i, js - 1)
            + u0.vx.at(i, js - 2))
            / (3.0 * dy);
        let dy_ux_s = (-8.0 * u0.vx_sigma_solid[i] + 9.0 * u0.vx.at(i, js) - u0.vx.at(i, js + 1))
            / (3.0 * dy);
        let dx_uy_f = dx_on_sigma(&|k| u0.vy.at(k, js), i);
        let dx_uy_s = dx_on_sigma(&|k| u0.vy_sigma_solid[k], i);
        let jump = jsign * n_y * (mu_s * (dy_ux_s + dx_uy_s) - mu_f * (dy_ux_f + dx_uy_f));
        r7 = r7.max((jump - problem.g2x[0][i]).abs());
    }
    report.push(
        "transmission-item-7",
        "[[u0]] = g1(0) and tangential [[mu (grad u0 + grad u0^T) nu]] = (g2)_tan(0)",
        r7,
        thr,
    );

    // Item 8: the initial velocity satisfies the end-face and wall data at
    // t = 0.
    let mut r8 = 0.0f64;
    let x3 = nx >= 3;
    for (side, (c0, c1)) in [(0, 1), (nx - 1, nx - 2)].into_iter().enumerate() {
        for j in 1..ny {
            if j == js {
                continue;
            }
            let ext = trace_to_boundary(u0.vy.at(c0, j), u0.vy.at(c1, j));
            r8 = r8.max((ext - problem.g3[side][0][j]).abs());
        }
        let (n0, n1, n2) = if side == 0 {
            (0, 1, 2)
        } else {
            (nx, nx - 1, nx - 2)
        };
        for j in 0..ny {
            let m = if j < js { mu_f } else { mu_s };
            let d = node_deriv_into(
                u0.vx.at(n0, j),
                u0.vx.at(n1, j),
                if x3 { Some(u0.vx.at(n2, j)) } else { None },
                dx,
            );
            // d/dx = +into at the left face, -into at the right face.
            let dxux = if side == 0 { d } else { -d };
            r8 = r8.max((2.0 * m * dxux - problem.g4[side][0][j]).abs());
        }
    }
    for i in 0..=nx {
        let ext = trace_to_boundary(u0.vx.at(i, ny - 1), u0.vx.at(i, ny - 2));
        r8 = r8.max((ext - problem.g5x[0][i]).abs());
    }
    for i in 0..nx {
        r8 = r8.max((u0.vy.at(i, ny) - problem.g5y[0][i]).abs());
    }
    report.push(
        "transmission-item-8",
        "(u0)_tan = g3(0) and 2 mu dx(u0)_x = g4(0) on the ends; u0 = g5(0) on the wall",
        r8,
        thr,
    );

    // Items 9, 11, 12: contact identities between data families, on every
    // level and at both end faces.
    let (mut r9, mut r11, mut r12) = (0.0f64, 0.0f64, 0.0f64);
    let f3 = js >= 3;
    let s3 = ny - js >= 3;
    for lvl in 0..=problem.nsteps {
        for side in 0..2 {
            let g3 = &problem.g3[side][lvl];
            let g4 = &problem.g4[side][lvl];
            let (c0, c1) = if side == 0 { (0, 1) } else { (nx - 1, nx - 2) };
            // Item 9: the jump of g3 across the interface equals the
            // tangential (normal-direction) component of g1 at the corner.
            let g3_f = extrap_node(g3[js - 1], g3[js - 2]);
            let g3_s = extrap_node(g3[js + 1], g3[js + 2]);
            let g1y_ext = trace_to_boundary(problem.g1y[lvl][c0], problem.g1y[lvl][c1]);
            r9 = r9.max((jsign * (g3_s - g3_f) - g1y_ext).abs());
            // Item 11: the normal stress jump datum at the corner equals the
            // jump of 2 mu dy(g3) across the interface.
            let dy_f = -deriv_into_offset(
                g3[js - 1],
                g3[js - 2],
                if f3 { Some(g3[js - 3]) } else { None },
                dy,
            );
            let dy_s = deriv_into_offset(
                g3[js + 1],
                g3[js + 2],
                if s3 { Some(g3[js + 3]) } else { None },
                dy,
            );
            let g2y_ext = trace_to_boundary(problem.g2y[lvl][c0], problem.g2y[lvl][c1]);
            r11 = r11.max((jsign * n_y * 2.0 * (mu_s * dy_s - mu_f * dy_f) - g2y_ext).abs());
            // Item 12: g3 and g4 match the wall data at the wall corner.
            let g5y_ext = trace_to_boundary(problem.g5y[lvl][c0], problem.g5y[lvl][c1]);
            r12 = r12.max((g3[ny] - g5y_ext).abs());
            let g4_ext = trace_to_boundary(g4[ny - 1], g4[ny - 2]);
            let g5x = &problem.g5x[lvl];
            let d = if side == 0 {
                node_deriv_into(g5x[0], g5x[1], if x3 { Some(g5x[2]) } else { None }, dx)
            } else {
                -node_deriv_into(
                    g5x[nx],
                    g5x[nx - 1],
                    if x3 { Some(g5x[nx - 2]) } else { None },
                    dx,
                )
            };
            r12 = r12.max((g4_ext - 2.0 * mu_s * d).abs());
        }
    }
    report.push(
        "transmission-item-9",
        "[[g3]] = (g1)_normal-direction component at the interface contact corners",
        r9,
        thr,
    );
    report.push(
        "transmission-item-10",
        "out-of-plane contact component: vanishes identically in the planar reduction",
        0.0,
        thr,
    );
    report.push(
        "transmission-item-11",
        "(g2)_normal = [[2 mu dy(g3)]] nu_y at the interface contact corners",
        r11,
        thr,
    );
    report.push(
        "transmission-item-12",
        "g3 = (g5)_tan and g4 = 2 mu_s dx((g5)_x) at the wall contact corners",
        r12,
        thr,
    );

    report
}

/// Checks the admissibility conditions of the two-phase unsteady Stokes
/// problem: finiteness of all data families, the five initial identities
/// (divergence, end tangential trace, wall trace, velocity jump, tangential
/// stress jump at `t = 0`), and the contact-point identities tying the
/// boundary families together at the interface and wall corners on every
/// level. The out-of-plane contact component vanishes identically in the
/// planar reduction and is noted in the normal-stress entry's anchor.
///
/// Assumes at least three cell rows per phase and `nx >= 3` (the same
/// minimum the solver enforces).
pub fn check_stokes_compatibility(
    grid: &ReferenceGrid,
    problem: &StokesProblem,
    threshold: Option<f64>,
) -> ConditionReport {
    let scale = problem.data_scale().max(1.0);
    let thr =
        threshold.unwrap_or_else(|| default_threshold(grid.dx.max(grid.dy), problem.dt, scale));
    let mut report = ConditionReport::new(scale);
    let (nx, ny, js) = (grid.nx, grid.ny, grid.j_sigma);
    assert!(
        nx >= 3 && js >= 3 && ny - js >= 3,
        "compatibility stencils need nx >= 3 and three cell rows per phase"
    );
    let (dx, dy) = (grid.dx, grid.dy);
    let jsign = problem.orientation.jump_sign();
    let n_y = problem.orientation.normal_y();
    let (mu_f, mu_s) = (problem.mu.fluid, problem.mu.solid);
    let u0 = &problem.u0;

    // Finiteness of every sampled family.
    let mut finite = u0.max_abs().is_finite();
    finite &= problem.f.iter().all(|f| f.max_abs().is_finite());
    finite &= problem.f_d.iter().all(|f| f.max_abs().is_finite());
    let all = |arrs: &[&Vec<Vec<f64>>]| {
        arrs.iter()
            .all(|a| a.iter().all(|r| r.iter().all(|v| v.is_finite())))
    };
    finite &= all(&[
        &problem.g1x,
        &problem.g1y,
        &problem.g2x,
        &problem.g2y,
        &problem.g5x,
        &problem.g5y,
        &problem.g3[0],
        &problem.g3[1],
        &problem.g4[0],
        &problem.g4[1],
    ]);
    finite &= problem
        .g3_sigma_fluid
        .iter()
        .chain(&problem.g3_sigma_solid)
        .all(|v| v.iter().all(|x| x.is_finite()));
    report.push(
        "stokes-data-finite",
        "every data family is finite on every level",
        if finite { 0.0 } else { f64::INFINITY },
        thr,
    );

    // Initial identity 1: prescribed divergence.
    let div = u0.divergence(grid);
    let mut r1 = 0.0f64;
    for j in 0..ny {
        for i in 0..nx {
            r1 = r1.max((div.at(i, j) - problem.f_d[0].at(i, j)).abs());
        }
    }
    report.push(
        "stokes-initial-divergence",
        "Div u0 = f_d(0) in both phases",
        r1,
        thr,
    );

    // Initial identity 2: tangential (y-component) trace on the end faces,
    // per phase at the contact height.
    let mut r2 = 0.0f64;
    for (side, (c0, c1)) in [(0, 1), (nx - 1, nx - 2)].into_iter().enumerate() {
        for j in 1..ny {
            if j == js {
                continue;
            }
            let ext = trace_to_boundary(u0.vy.at(c0, j), u0.vy.at(c1, j));
            r2 = r2.max((ext - problem.g3[side][0][j]).abs());
        }
        let ext_f = trace_to_boundary(u0.vy.at(c0, js), u0.vy.at(c1, js));
        r2 = r2.max((ext_f - problem.g3_sigma_fluid[side][0]).abs());
        let ext_s = trace_to_boundary(u0.vy_sigma_solid[c0], u0.vy_sigma_solid[c1]);
        r2 = r2.max((ext_s - problem.g3_sigma_solid[side][0]).abs());
    }
    report.push(
        "stokes-initial-end-tangential",
        "(u0)_y = g3(0) on the end faces, one-sided limits at the contact height",
        r2,
        thr,
    );

    // Initial identity 3: wall trace.
    let mut r3 = 0.0f64;
    for i in 0..=nx {
        let ext = trace_to_boundary(u0.vx.at(i, ny - 1), u0.vx.at(i, ny - 2));
        r3 = r3.max((ext - problem.g5x[0][i]).abs());
    }
    for i in 0..nx {
        r3 = r3.max((u0.vy.at(i, ny) - problem.g5y[0][i]).abs());
    }
    report.push(
        "stokes-initial-wall",
        "u0 = g5(0) on the outer wall",
        r3,
        thr,
    );

    // Initial identity 4: velocity jump.
    let mut r4 = 0.0f64;
    for i in 0..=nx {
        let jump = jsign * (u0.vx_sigma_solid[i] - u0.vx_sigma_fluid[i]);
        r4 = r4.max((jump - problem.g1x[0][i]).abs());
    }
    for i in 0..nx {
        let jump = jsign * (u0.vy_sigma_solid[i] - u0.vy.at(i, js));
        r4 = r4.max((jump - problem.g1y[0][i]).abs());
    }
    report.push(
        "stokes-initial-velocity-jump",
        "[[u0]] = g1(0) across the interface",
        r4,
        thr,
    );

    // Initial identity 5: tangential part of the viscous stress jump (the
    // pressure cannot enter an initial identity; only the projection away
    // from the normal is constrained at t = 0).
    let mut r5 = 0.0f64;
    let dx_on_sigma = |row: &dyn Fn(usize) -> f64, i: usize| -> f64 {
        if i == 0 {
            deriv_into(row(0), row(1), Some(row(2)), dx)
        } else if i == nx {
            -deriv_into(row(nx - 1), row(nx - 2), Some(row(nx - 3)), dx)
        } else {
            (row(i) - row(i - 1)) / dx
        }
    };
    for i in 0..=nx {
        let dy_ux_f = (8.0 * u0.vx_sigma_fluid[i] - 9.0 * u0.vx.at(i, js - 1)
            + u0.vx.at(i, js - 2))
            / (3.0 * dy);
        let dy_ux_s = (-8.0 * u0.vx_sigma_solid[i] + 9.0 * u0.vx.at(i, js) - u0.vx.at(i, js + 1))
            / (3.0 * dy);
        let dx_uy_f = dx_on_sigma(&|k| u0.vy.at(k, js), i);
        let dx_uy_s = dx_on_sigma(&|k| u0.vy_sigma_solid[k], i);
        let jump = jsign * n_y * (mu_s * (dy_ux_s + dx_uy_s) - mu_f * (dy_ux_f + dx_uy_f));
        r5 = r5.max((jump - problem.g2x[0][i]).abs());
    }
    report.push(
        "stokes-initial-shear-jump",
        "tangential part of [[mu (grad u0 + grad u0^T) nu]] = tangential g2(0)",
        r5,
        thr,
    );

    // Contact identities, on every level and at both end faces.
    let (mut rc1, mut rc2, mut rc3) = (0.0f64, 0.0f64, 0.0f64);
    for lvl in 0..=problem.nsteps {
        for side in 0..2 {
            let g3 = &problem.g3[side][lvl];
            let g4 = &problem.g4[side][lvl];
            let (c0, c1) = if side == 0 { (0, 1) } else { (nx - 1, nx - 2) };
            // Wall corner: the end tangential datum meets the wall datum.
            let g5y_ext = trace_to_boundary(problem.g5y[lvl][c0], problem.g5y[lvl][c1]);
            rc1 = rc1.max((g3[ny] - g5y_ext).abs());
            // Interface corner: the jump of g3 equals the y-component of g1.
            let g3f = problem.g3_sigma_fluid[side][lvl];
            let g3s = problem.g3_sigma_solid[side][lvl];
            let g1y_ext = trace_to_boundary(problem.g1y[lvl][c0], problem.g1y[lvl][c1]);
            rc2 = rc2.max((jsign * (g3s - g3f) - g1y_ext).abs());
            // Interface corner: the normal component of g2 is determined by
            // g4, f_d and the tangential derivative of g3 (eliminating the
            // one-sided pressures through the outflow and divergence
            // relations).
            let g2y_ext = trace_to_boundary(problem.g2y[lvl][c0], problem.g2y[lvl][c1]);
            let g4_f = trace_to_boundary(g4[js - 1], g4[js - 2]);
            let g4_s = trace_to_boundary(g4[js], g4[js + 1]);
            let fd_at = |j: usize| {
                let f = &problem.f_d[lvl];
                if side == 0 {
                    trace_to_boundary(f.at(0, j), f.at(1, j))
                } else {
                    trace_to_boundary(f.at(nx - 1, j), f.at(nx - 2, j))
                }
            };
            let fd_f = trace_to_boundary(fd_at(js - 1), fd_at(js - 2));
            let fd_s = trace_to_boundary(fd_at(js), fd_at(js + 1));
            let dyg3_f = (3.0 * g3f - 4.0 * g3[js - 1] + g3[js - 2]) / (2.0 * dy);
            let dyg3_s = (-3.0 * g3s + 4.0 * g3[js + 1] - g3[js + 2]) / (2.0 * dy);
            let want = n_y
                * (jsign * ((g4_s - 2.0 * mu_s * fd_s) - (g4_f - 2.0 * mu_f * fd_f))
                    + 4.0 * jsign * (mu_s * dyg3_s - mu_f * dyg3_f));
            rc3 = rc3.max((g2y_ext - want).abs());
        }
    }
    report.push(
        "stokes-contact-wall",
        "g3 = g5 . e_y at the wall corners, every level",
        rc1,
        thr,
    );
    report.push(
        "stokes-contact-velocity-jump",
        "[[g3]] = g1 . e_y at the contact points, every level",
        rc2,
        thr,
    );
    report.push(
        "stokes-contact-normal-stress",
        "g2 . nu = nu_y ([[g4 - 2 mu f_d]] + 4 [[mu dy(g3)]]) at the contact points, \
         every level (the out-of-plane component vanishes in the planar reduction)",
        rc3,
        thr,
    );

    report
}
