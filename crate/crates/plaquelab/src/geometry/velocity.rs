//! Staggered vector fields with doubled interface traces.
//!
//! Vector unknowns (velocity, or the vector-valued transmission solutions)
//! may jump across the interface `Sigma = {y = h}`. On the MAC grid the
//! horizontal-face row `j = j_sigma` lies *on* the interface, so that row is
//! stored twice (fluid-side and solid-side traces); `v_x` samples never lie on
//! the interface, so the `v_x` lattice is single-valued and per-phase
//! interface traces of `v_x` are stored separately.

use super::grid::{CellField, FaceXField, FaceYField, Phase, ReferenceGrid};

/// A vector field on the staggered grid with per-phase interface traces.
///
/// * `vx` — x-component on vertical faces, single-valued;
/// * `vy` — y-component on horizontal faces; the interface row `j = j_sigma`
///   holds the *fluid-side* trace;
/// * `vy_sigma_solid` — solid-side y-component trace on the interface row;
/// * `vx_sigma_fluid` / `vx_sigma_solid` — per-phase x-component traces on the
///   interface (at vertical-face x positions `i dx`, `i = 0..=nx`).
#[derive(Debug, Clone, PartialEq)]
pub struct StagVelocity {
    pub vx: FaceXField,
    pub vy: FaceYField,
    pub vy_sigma_solid: Vec<f64>,
    pub vx_sigma_fluid: Vec<f64>,
    pub vx_sigma_solid: Vec<f64>,
}

impl StagVelocity {
    /// All-zero field.
    pub fn zeros(grid: &ReferenceGrid) -> Self {
        StagVelocity {
            vx: FaceXField::zeros(grid),
            vy: FaceYField::zeros(grid),
            vy_sigma_solid: vec![0.0; grid.nx],
            vx_sigma_fluid: vec![0.0; grid.nx + 1],
            vx_sigma_solid: vec![0.0; grid.nx + 1],
        }
    }

    /// Samples per-phase analytic fields; each closure returns `(v_x, v_y)`.
    /// Rows strictly below the interface sample the fluid field, rows strictly
    /// above the solid field; the interface traces sample both.
    pub fn sample(
        grid: &ReferenceGrid,
        v_fluid: impl Fn(f64, f64) -> (f64, f64),
        v_solid: impl Fn(f64, f64) -> (f64, f64),
    ) -> Self {
        let mut out = StagVelocity::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..=grid.nx {
                let (x, y) = (grid.xf(i), grid.yc(j));
                let v = if j < grid.j_sigma {
                    v_fluid(x, y).0
                } else {
                    v_solid(x, y).0
                };
                out.vx.set(i, j, v);
            }
        }
        for j in 0..=grid.ny {
            for i in 0..grid.nx {
                let (x, y) = (grid.xc(i), grid.yf(j));
                let v = if j <= grid.j_sigma {
                    v_fluid(x, y).1
                } else {
                    v_solid(x, y).1
                };
                out.vy.set(i, j, v);
            }
        }
        for i in 0..grid.nx {
            out.vy_sigma_solid[i] = v_solid(grid.xc(i), grid.h).1;
        }
        for i in 0..=grid.nx {
            out.vx_sigma_fluid[i] = v_fluid(grid.xf(i), grid.h).0;
            out.vx_sigma_solid[i] = v_solid(grid.xf(i), grid.h).0;
        }
        out
    }

    /// Samples a globally defined (continuous) field.
    pub fn from_single(grid: &ReferenceGrid, v: impl Fn(f64, f64) -> (f64, f64) + Copy) -> Self {
        Self::sample(grid, v, v)
    }

    /// y-component trace on the interface row seen from `phase`, column `i`.
    pub fn vy_on_sigma(&self, grid: &ReferenceGrid, phase: Phase, i: usize) -> f64 {
        match phase {
            Phase::Fluid => self.vy.at(i, grid.j_sigma),
            Phase::Solid => self.vy_sigma_solid[i],
        }
    }

    /// Conservative cell divergence `(dvx/dx + dvy/dy)`, each phase using its
    /// own interface trace.
    pub fn divergence(&self, grid: &ReferenceGrid) -> CellField {
        let mut div = CellField::zeros(grid);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let bottom = if j == grid.j_sigma {
                    self.vy_sigma_solid[i]
                } else {
                    self.vy.at(i, j)
                };
                let top = self.vy.at(i, j + 1);
                let d =
                    (self.vx.at(i + 1, j) - self.vx.at(i, j)) / grid.dx + (top - bottom) / grid.dy;
                div.set(i, j, d);
            }
        }
        div
    }

    /// In-place `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        let pairs = [
            (self.vx.as_mut_slice(), other.vx.as_slice()),
            (self.vy.as_mut_slice(), other.vy.as_slice()),
            (&mut self.vy_sigma_solid[..], &other.vy_sigma_solid[..]),
            (&mut self.vx_sigma_fluid[..], &other.vx_sigma_fluid[..]),
            (&mut self.vx_sigma_solid[..], &other.vx_sigma_solid[..]),
        ];
        for (dst, src) in pairs {
            assert_eq!(dst.len(), src.len(), "staggered-field size mismatch");
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    /// In-place `self *= a`.
    pub fn scale(&mut self, a: f64) {
        for slice in [
            self.vx.as_mut_slice(),
            self.vy.as_mut_slice(),
            &mut self.vy_sigma_solid[..],
            &mut self.vx_sigma_fluid[..],
            &mut self.vx_sigma_solid[..],
        ] {
            for v in slice {
                *v *= a;
            }
        }
    }

    /// Largest absolute sample over all component lattices and traces.
    pub fn max_abs(&self) -> f64 {
        let m = self.vx.max_abs().max(self.vy.max_abs());
        [
            &self.vy_sigma_solid,
            &self.vx_sigma_fluid,
            &self.vx_sigma_solid,
        ]
        .iter()
        .flat_map(|v| v.iter())
        .fold(m, |m, v| m.max(v.abs()))
    }
}
