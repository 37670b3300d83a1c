//! Partition of unity subordinate to the reference-domain decomposition.
//!
//! Patches are laid out on a tensor lattice whose rows pass exactly through
//! the axis, the interface, and the outer wall, so the interface and wall are
//! always *centered* lines of their patch rows. Each patch is a tensor bump
//! with an inner plateau: the profile equals one on the inner third of the
//! support and falls to zero through a polynomial smoothstep of degree
//! `2m + 1` (so the weight is `C^m` across both the plateau edge and the
//! support edge).
//!
//! Two layout rules make the *discrete* normal derivatives vanish at the
//! contact points (not merely the analytic ones):
//!
//! * a patch row centered on the interface/wall has zero profile slope on its
//!   plateau, which covers the one-sided difference stencil; and
//! * adjacent rows keep a margin of a quarter row-spacing before their
//!   support begins, so their tails contribute exactly zero on that stencil.
//!
//! Consequently the normalized weights are constant (one or zero) on the few
//! node rows next to each contact point and every one-sided difference of
//! them is zero to rounding.

use super::grid::{GeometryError, NodeField, ReferenceGrid};

/// Fraction of the support radius occupied by the flat plateau.
const PLATEAU: f64 = 1.0 / 3.0;
/// Patch radius as a fraction of the row/column spacing; the complement is
/// the margin that keeps neighbor tails away from the centered lines.
const RADIUS_FRACTION: f64 = 0.75;

/// One tensor-product patch. Vertical radii may differ below/above the center
/// because the interface row straddles two phases with different spacings.
#[derive(Debug, Clone, Copy)]
pub struct Patch {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub r_down: f64,
    pub r_up: f64,
}

impl Patch {
    /// Raw (unnormalized) bump value at `(x, y)`.
    pub fn raw(&self, x: f64, y: f64, m: usize) -> f64 {
        let sx = (x - self.cx).abs() / self.rx;
        let sy = if y >= self.cy {
            (y - self.cy) / self.r_up
        } else {
            (self.cy - y) / self.r_down
        };
        bump_profile(sx, m) * bump_profile(sy, m)
    }
}

/// Polynomial smoothstep of order `m`: `C^m`, increasing from 0 at 0 to 1 at
/// 1 with `m` vanishing derivatives at both ends; degree `2m + 1`.
fn smoothstep(t: f64, m: usize) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    // S_m(t) = t^{m+1} * sum_{k=0}^m C(m+k, k) C(2m+1, m-k) (-t)^k
    let mut acc = 0.0;
    for k in (0..=m).rev() {
        let c = binom(m + k, k) * binom(2 * m + 1, m - k);
        let term = if k % 2 == 0 { c } else { -c };
        acc = acc * t + term;
    }
    acc * t.powi(m as i32 + 1)
}

fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Plateau bump profile in the scaled distance `s >= 0`: one for
/// `s <= 1/3`, zero for `s >= 1`, a degree-`2m+1` smoothstep in between.
pub fn bump_profile(s: f64, m: usize) -> f64 {
    if s <= PLATEAU {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 - smoothstep((s - PLATEAU) / (1.0 - PLATEAU), m)
    }
}

/// A partition of unity on the grid nodes: per-patch normalized weights that
/// sum to one everywhere.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    pub patches: Vec<Patch>,
    pub weights: Vec<NodeField>,
    pub m: usize,
}

impl PartitionOfUnity {
    /// Sum of all weights at node `(i, j)` (should be one to rounding).
    pub fn sum_at(&self, i: usize, j: usize) -> f64 {
        self.weights.iter().map(|w| w.at(i, j)).sum()
    }

    /// Degenerate single-patch cover: one weight identically one. Useful as
    /// the trivial case in tests and as a no-op localization.
    pub fn trivial(grid: &ReferenceGrid) -> Self {
        let patch = Patch {
            cx: 0.5 * grid.l,
            cy: 0.5,
            rx: grid.l, // generous: the plateau covers the whole domain
            r_down: 1.0,
            r_up: 1.0,
        };
        let mut w = NodeField::zeros(grid);
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                w.set(i, j, 1.0);
            }
        }
        PartitionOfUnity {
            patches: vec![patch],
            weights: vec![w],
            m: 1,
        }
    }

    /// Indices of patches whose support contains `(x, y)`.
    pub fn covering(&self, x: f64, y: f64) -> Vec<usize> {
        self.patches
            .iter()
            .enumerate()
            .filter(|(_, p)| p.raw(x, y, self.m) > 0.0)
            .map(|(k, _)| k)
            .collect()
    }
}

/// Builds the partition of unity with the requested nominal patch radius and
/// smoothness order `m >= 1`.
///
/// Patch rows are placed so that the axis, the interface, and the outer wall
/// are row centers; the actual radii are `3/4` of the resulting spacings.
/// Errors if the radius is so large that a single patch would have to meet
/// both the interface and the outer wall (no separation possible), naming the
/// offending patch.
pub fn partition_of_unity(
    grid: &ReferenceGrid,
    radius: f64,
    m: usize,
) -> Result<PartitionOfUnity, GeometryError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(GeometryError::Partition {
            reason: format!("radius {radius} must be positive"),
        });
    }
    if m == 0 {
        return Err(GeometryError::Partition {
            reason: "smoothness order m must be at least 1".into(),
        });
    }
    let solid_depth = 1.0 - grid.h;
    if radius >= solid_depth {
        return Err(GeometryError::Partition {
            reason: format!(
                "patch centered at (0, 1) with radius {radius} would meet both the interface \
                 (y = {}) and the outer wall (y = 1); reduce the radius below {solid_depth}",
                grid.h
            ),
        });
    }

    // Row layout: p fluid intervals, q solid intervals, px columns.
    let p = (grid.h / radius).ceil() as usize;
    let q = (solid_depth / radius).ceil() as usize;
    let px = (grid.l / radius).ceil() as usize;
    let df = grid.h / p as f64;
    let ds = solid_depth / q as f64;
    let dxp = grid.l / px as f64;

    let mut rows: Vec<(f64, f64, f64)> = Vec::new(); // (cy, r_down, r_up)
    for k in 0..=p {
        let cy = k as f64 * df;
        let (rd, ru) = if k == p {
            (RADIUS_FRACTION * df, RADIUS_FRACTION * ds) // interface row
        } else {
            (RADIUS_FRACTION * df, RADIUS_FRACTION * df)
        };
        rows.push((cy, rd, ru));
    }
    for k in 1..=q {
        let cy = grid.h + k as f64 * ds;
        rows.push((cy, RADIUS_FRACTION * ds, RADIUS_FRACTION * ds));
    }

    let mut patches = Vec::new();
    for &(cy, rd, ru) in &rows {
        for c in 0..=px {
            patches.push(Patch {
                cx: c as f64 * dxp,
                cy,
                rx: RADIUS_FRACTION * dxp,
                r_down: rd,
                r_up: ru,
            });
        }
    }

    // Raw weights on nodes, then normalize.
    let mut weights: Vec<NodeField> = patches.iter().map(|_| NodeField::zeros(grid)).collect();
    for j in 0..=grid.ny {
        for i in 0..=grid.nx {
            let (x, y) = (grid.xf(i), grid.yf(j));
            let mut sum = 0.0;
            let raw: Vec<f64> = patches.iter().map(|p| p.raw(x, y, m)).collect();
            for v in &raw {
                sum += v;
            }
            if sum <= 0.0 {
                return Err(GeometryError::Partition {
                    reason: format!("coverage hole at node ({x}, {y}); radius {radius} too small"),
                });
            }
            for (w, v) in weights.iter_mut().zip(&raw) {
                w.set(i, j, v / sum);
            }
        }
    }

    Ok(PartitionOfUnity {
        patches,
        weights,
        m,
    })
}
