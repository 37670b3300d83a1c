//! Reference grid, staggered fields, and trace extraction.

use thiserror::Error;

/// Errors from domain construction or trace extraction.
#[derive(Debug, Error)]
pub enum GeometryError {
    /// The requested interface height does not lie on a horizontal cell
    /// boundary of the requested grid; the nearest admissible height is
    /// reported so callers can snap to it deliberately.
    #[error(
        "interface height h = {h} does not lie on a cell boundary for ny = {ny}; \
         nearest admissible height is {nearest}"
    )]
    InterfaceNotAligned { h: f64, ny: usize, nearest: f64 },
    /// Domain extent or resolution is unusable.
    #[error("invalid domain: {reason}")]
    InvalidDomain { reason: String },
    /// Each phase needs at least two cell rows (and the grid at least two cell
    /// columns) for the one-sided second-order trace stencils.
    #[error(
        "too few cells: nx = {nx}, fluid rows = {fluid_rows}, solid rows = {solid_rows}; \
         need nx >= 2 and at least 2 rows per phase"
    )]
    TooFewCells {
        nx: usize,
        fluid_rows: usize,
        solid_rows: usize,
    },
    /// A trace was requested from a phase that does not touch the segment.
    #[error("segment {segment:?} has no trace from the {phase:?} phase")]
    SegmentPhaseMismatch { segment: Segment, phase: Phase },
    /// Partition-of-unity construction failed; see the message for the patch.
    #[error("partition of unity: {reason}")]
    Partition { reason: String },
}

/// The two material phases of the reference domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// `0 < y < h`.
    Fluid,
    /// `h < y < 1`.
    Solid,
}

/// Left (`x = 0`) or right (`x = L`) end of the domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A piecewise-constant material coefficient (one value per phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCoeff {
    pub fluid: f64,
    pub solid: f64,
}

impl PhaseCoeff {
    pub fn new(fluid: f64, solid: f64) -> Self {
        PhaseCoeff { fluid, solid }
    }

    /// The same value in both phases.
    pub fn uniform(v: f64) -> Self {
        PhaseCoeff { fluid: v, solid: v }
    }

    /// Value in `phase`.
    pub fn at(self, phase: Phase) -> f64 {
        match phase {
            Phase::Fluid => self.fluid,
            Phase::Solid => self.solid,
        }
    }

    /// True if both values are finite and strictly positive.
    pub fn is_positive(self) -> bool {
        self.fluid.is_finite() && self.solid.is_finite() && self.fluid > 0.0 && self.solid > 0.0
    }
}

impl Default for PhaseCoeff {
    fn default() -> Self {
        PhaseCoeff::uniform(1.0)
    }
}

/// A boundary or interface segment of the reference domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// Symmetry axis `{y = 0}`.
    Axis,
    /// Fluid–solid interface `Sigma = {y = h}`.
    Interface,
    /// Outer solid wall `S = {y = 1}`.
    OuterWall,
    /// Fluid part of an end face: `x in {0, L}`, `0 < y < h`.
    EndFluid(Side),
    /// Solid part of an end face: `x in {0, L}`, `h < y < 1`.
    EndSolid(Side),
}

impl Segment {
    /// The phase whose fields a trace on this segment samples (for the
    /// interface both phases qualify and the caller picks one).
    pub fn natural_phase(self) -> Option<Phase> {
        match self {
            Segment::Axis | Segment::EndFluid(_) => Some(Phase::Fluid),
            Segment::OuterWall | Segment::EndSolid(_) => Some(Phase::Solid),
            Segment::Interface => None,
        }
    }
}

/// Which way the interface normal points.
///
/// The jump bracket is tied to the normal by the one-sided-limit rule
/// `[[v]](x) = lim_{t->0+} v(x + t nu) - v(x - t nu)`: the trace on the side
/// the normal points *into* minus the trace on the side it points *away
/// from*. The default normal is solid-into-fluid, i.e. `nu_Sigma = -e_y`,
/// which makes `[[v]] = v_fluid - v_solid`. The opposite choice negates both
/// the normal and the bracket, so expressions of the form
/// `jump_sign() * normal_y()` are orientation-independent; data prepared
/// under one convention replay under the other by flipping the signs of
/// interface data.
///
/// Keeping the bracket slaved to the normal is what makes the permeability
/// law `zeta [[c]] - D_s grad(c_s) . nu = 0` dissipative: solving for the
/// solid flux gives `D_s dc_s/dy = zeta (c_s - c_f)`, so mass always leaves
/// the richer side regardless of which orientation is selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterfaceOrientation {
    #[default]
    SolidIntoFluid,
    FluidIntoSolid,
}

impl InterfaceOrientation {
    /// The `y`-component of `nu_Sigma` (the `x`-component is zero).
    pub fn normal_y(self) -> f64 {
        match self {
            InterfaceOrientation::SolidIntoFluid => -1.0,
            InterfaceOrientation::FluidIntoSolid => 1.0,
        }
    }

    /// Sign `s` such that `[[v]] = s * (v_solid - v_fluid)`.
    ///
    /// Equal to [`normal_y`](Self::normal_y) by the one-sided-limit rule:
    /// the normal `-e_y` points into the fluid, so the fluid trace is the
    /// `+` limit and `[[v]] = v_fluid - v_solid = -(v_solid - v_fluid)`.
    pub fn jump_sign(self) -> f64 {
        match self {
            InterfaceOrientation::SolidIntoFluid => -1.0,
            InterfaceOrientation::FluidIntoSolid => 1.0,
        }
    }
}

/// Staggered (MAC) grid over the reference domain.
///
/// * pressure / concentration: cell centers `((i+1/2) dx, (j+1/2) dy)`,
/// * `u_x`: vertical faces `(i dx, (j+1/2) dy)`, `i = 0..=nx`,
/// * `u_y`: horizontal faces `((i+1/2) dx, j dy)`, `j = 0..=ny`,
/// * the interface coincides with the horizontal-face row `j = j_sigma`.
#[derive(Debug, Clone)]
pub struct ReferenceGrid {
    pub l: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Horizontal-face row index of the interface: `h = j_sigma * dy`.
    pub j_sigma: usize,
}

/// Builds the reference grid, validating that the interface height lies on a
/// horizontal cell boundary and that each phase is at least two cells thick.
pub fn build_reference_domain(
    l: f64,
    h: f64,
    nx: usize,
    ny: usize,
) -> Result<ReferenceGrid, GeometryError> {
    if !(l.is_finite() && l > 0.0) {
        return Err(GeometryError::InvalidDomain {
            reason: format!("length l = {l} must be positive"),
        });
    }
    if !(h.is_finite() && 0.0 < h && h < 1.0) {
        return Err(GeometryError::InvalidDomain {
            reason: format!("interface height h = {h} must lie strictly inside (0, 1)"),
        });
    }
    if nx == 0 || ny == 0 {
        return Err(GeometryError::InvalidDomain {
            reason: "nx and ny must be positive".into(),
        });
    }
    let dy = 1.0 / ny as f64;
    let j_float = h * ny as f64;
    let j_sigma = j_float.round() as usize;
    let nearest = j_sigma.clamp(1, ny.saturating_sub(1)) as f64 * dy;
    if (j_float - j_sigma as f64).abs() > 1e-9 * ny as f64 {
        return Err(GeometryError::InterfaceNotAligned { h, ny, nearest });
    }
    let fluid_rows = j_sigma;
    let solid_rows = ny - j_sigma;
    if nx < 2 || fluid_rows < 2 || solid_rows < 2 {
        return Err(GeometryError::TooFewCells {
            nx,
            fluid_rows,
            solid_rows,
        });
    }
    Ok(ReferenceGrid {
        l,
        h: j_sigma as f64 * dy,
        nx,
        ny,
        dx: l / nx as f64,
        dy,
        j_sigma,
    })
}

impl ReferenceGrid {
    /// x-coordinate of cell-center column `i`.
    pub fn xc(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }
    /// y-coordinate of cell-center row `j`.
    pub fn yc(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }
    /// x-coordinate of vertical-face column `i`.
    pub fn xf(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
    /// y-coordinate of horizontal-face row `j`.
    pub fn yf(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    /// Phase of cell row `j`.
    pub fn phase_of_cell_row(&self, j: usize) -> Phase {
        if j < self.j_sigma {
            Phase::Fluid
        } else {
            Phase::Solid
        }
    }

    /// Cell-row range of a phase (half-open).
    pub fn cell_rows(&self, phase: Phase) -> std::ops::Range<usize> {
        match phase {
            Phase::Fluid => 0..self.j_sigma,
            Phase::Solid => self.j_sigma..self.ny,
        }
    }

    /// Number of fluid cells.
    pub fn fluid_cell_count(&self) -> usize {
        self.nx * self.j_sigma
    }
    /// Number of solid cells.
    pub fn solid_cell_count(&self) -> usize {
        self.nx * (self.ny - self.j_sigma)
    }

    /// The four contact points where the interface and the outer wall meet the
    /// end faces: `(0, h)`, `(L, h)`, `(0, 1)`, `(L, 1)`.
    pub fn contact_points(&self) -> [(f64, f64); 4] {
        [(0.0, self.h), (self.l, self.h), (0.0, 1.0), (self.l, 1.0)]
    }

    /// Cell area `dx * dy`.
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Extracts a 1D trace of `field` on `segment`, sampling from `phase`.
    ///
    /// Values stored on the segment itself (e.g. `u_y` on a horizontal
    /// segment, `u_x` on an end face) are copied; all other placements are
    /// extrapolated one-sidedly at second order, `f(0) = (3 f(a) - f(3a)) / 2`
    /// for samples at distances `a` and `3a` (exact on linear fields).
    ///
    /// The trace records an arclength coordinate `s` measured from the
    /// segment start (lower-left end), sample values, and midpoint/trapezoid
    /// quadrature weights for discrete norms.
    pub fn extract_trace(
        &self,
        field: FieldRef<'_>,
        segment: Segment,
        phase: Phase,
    ) -> Result<Trace, GeometryError> {
        if let Some(p) = segment.natural_phase() {
            if p != phase {
                return Err(GeometryError::SegmentPhaseMismatch { segment, phase });
            }
        }
        let js = self.j_sigma;
        match field {
            FieldRef::Cell(f) => match segment {
                Segment::Axis => Ok(self.horizontal_trace_from_cells(f, 0, true)),
                Segment::Interface => match phase {
                    Phase::Fluid => Ok(self.horizontal_trace_from_cells(f, js, false)),
                    Phase::Solid => Ok(self.horizontal_trace_from_cells(f, js, true)),
                },
                Segment::OuterWall => Ok(self.horizontal_trace_from_cells(f, self.ny, false)),
                Segment::EndFluid(side) => Ok(self.vertical_trace_from_cells(f, side, 0..js)),
                Segment::EndSolid(side) => Ok(self.vertical_trace_from_cells(f, side, js..self.ny)),
            },
            FieldRef::FaceX(f) => match segment {
                // u_x values live on the end faces: direct copy.
                Segment::EndFluid(side) => {
                    let i = self.side_face_col(side);
                    Ok(self.collect_vertical_face_x(f, i, 0..js, 0.0))
                }
                Segment::EndSolid(side) => {
                    let i = self.side_face_col(side);
                    Ok(self.collect_vertical_face_x(f, i, js..self.ny, self.h))
                }
                // Horizontal segments: extrapolate in y from face rows.
                Segment::Axis => Ok(self.horizontal_trace_from_face_x(f, 0, true)),
                Segment::Interface => match phase {
                    Phase::Fluid => Ok(self.horizontal_trace_from_face_x(f, js, false)),
                    Phase::Solid => Ok(self.horizontal_trace_from_face_x(f, js, true)),
                },
                Segment::OuterWall => Ok(self.horizontal_trace_from_face_x(f, self.ny, false)),
            },
            FieldRef::FaceY(f) => match segment {
                // u_y values live on horizontal segments: direct copy.
                Segment::Axis => Ok(self.collect_horizontal_face_y(f, 0)),
                Segment::Interface => Ok(self.collect_horizontal_face_y(f, js)),
                Segment::OuterWall => Ok(self.collect_horizontal_face_y(f, self.ny)),
                // End faces: extrapolate in x from face columns.
                Segment::EndFluid(side) => {
                    Ok(self.vertical_trace_from_face_y(f, side, 0..(js + 1), 0.0))
                }
                Segment::EndSolid(side) => {
                    Ok(self.vertical_trace_from_face_y(f, side, js..(self.ny + 1), self.h))
                }
            },
        }
    }

    fn side_face_col(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.nx,
        }
    }

    /// Trace on the horizontal line `y = jf * dy` from cell rows; `from_above`
    /// selects the rows `jf, jf+1` (above) or `jf-1, jf-2` (below).
    fn horizontal_trace_from_cells(&self, f: &CellField, jf: usize, from_above: bool) -> Trace {
        let (j0, j1) = if from_above {
            (jf, jf + 1)
        } else {
            (jf - 1, jf - 2)
        };
        let mut s = Vec::with_capacity(self.nx);
        let mut values = Vec::with_capacity(self.nx);
        for i in 0..self.nx {
            s.push(self.xc(i));
            values.push(1.5 * f.at(i, j0) - 0.5 * f.at(i, j1));
        }
        Trace::midpoint(s, values, self.dx)
    }

    /// Trace on an end face from cell columns (one-sided in x).
    fn vertical_trace_from_cells(
        &self,
        f: &CellField,
        side: Side,
        rows: std::ops::Range<usize>,
    ) -> Trace {
        let (i0, i1) = match side {
            Side::Left => (0, 1),
            Side::Right => (self.nx - 1, self.nx - 2),
        };
        let y_start = rows.start as f64 * self.dy;
        let mut s = Vec::new();
        let mut values = Vec::new();
        for j in rows {
            s.push(self.yc(j) - y_start);
            values.push(1.5 * f.at(i0, j) - 0.5 * f.at(i1, j));
        }
        Trace::midpoint(s, values, self.dy)
    }

    fn horizontal_trace_from_face_x(&self, f: &FaceXField, jf: usize, from_above: bool) -> Trace {
        let (j0, j1) = if from_above {
            (jf, jf + 1)
        } else {
            (jf - 1, jf - 2)
        };
        let mut s = Vec::with_capacity(self.nx + 1);
        let mut values = Vec::with_capacity(self.nx + 1);
        for i in 0..=self.nx {
            s.push(self.xf(i));
            values.push(1.5 * f.at(i, j0) - 0.5 * f.at(i, j1));
        }
        Trace::trapezoid(s, values, self.dx)
    }

    fn collect_vertical_face_x(
        &self,
        f: &FaceXField,
        i: usize,
        rows: std::ops::Range<usize>,
        y_start: f64,
    ) -> Trace {
        let mut s = Vec::new();
        let mut values = Vec::new();
        for j in rows {
            s.push(self.yc(j) - y_start);
            values.push(f.at(i, j));
        }
        Trace::midpoint(s, values, self.dy)
    }

    fn collect_horizontal_face_y(&self, f: &FaceYField, j: usize) -> Trace {
        let mut s = Vec::with_capacity(self.nx);
        let mut values = Vec::with_capacity(self.nx);
        for i in 0..self.nx {
            s.push(self.xc(i));
            values.push(f.at(i, j));
        }
        Trace::midpoint(s, values, self.dx)
    }

    fn vertical_trace_from_face_y(
        &self,
        f: &FaceYField,
        side: Side,
        rows: std::ops::Range<usize>,
        y_start: f64,
    ) -> Trace {
        let (i0, i1) = match side {
            Side::Left => (0, 1),
            Side::Right => (self.nx - 1, self.nx - 2),
        };
        let mut s = Vec::new();
        let mut values = Vec::new();
        for j in rows {
            s.push(self.yf(j) - y_start);
            values.push(1.5 * f.at(i0, j) - 0.5 * f.at(i1, j));
        }
        Trace::trapezoid(s, values, self.dy)
    }
}

/// Borrowed reference to any staggered field, for trace extraction.
#[derive(Clone, Copy)]
pub enum FieldRef<'a> {
    Cell(&'a CellField),
    FaceX(&'a FaceXField),
    FaceY(&'a FaceYField),
}

macro_rules! field_type {
    ($(#[$doc:meta])* $name:ident, $cols:expr, $rows:expr, $xpos:ident, $ypos:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            nx: usize,
            ny: usize,
            data: Vec<f64>,
        }

        impl $name {
            /// All-zero field on `grid`.
            pub fn zeros(grid: &ReferenceGrid) -> Self {
                let (nx, ny) = (grid.nx, grid.ny);
                let n = ($cols)(nx) * ($rows)(ny);
                Self { nx, ny, data: vec![0.0; n] }
            }

            /// Samples `f(x, y)` at this field's staggered positions.
            pub fn from_fn(grid: &ReferenceGrid, f: impl Fn(f64, f64) -> f64) -> Self {
                let mut out = Self::zeros(grid);
                for j in 0..($rows)(grid.ny) {
                    for i in 0..($cols)(grid.nx) {
                        let v = f(grid.$xpos(i), grid.$ypos(j));
                        out.set(i, j, v);
                    }
                }
                out
            }

            /// Number of sample columns.
            pub fn cols(&self) -> usize {
                ($cols)(self.nx)
            }

            /// Number of sample rows.
            pub fn rows(&self) -> usize {
                ($rows)(self.ny)
            }

            #[inline]
            fn idx(&self, i: usize, j: usize) -> usize {
                debug_assert!(i < self.cols() && j < self.rows());
                j * self.cols() + i
            }

            /// Value at column `i`, row `j`.
            #[inline]
            pub fn at(&self, i: usize, j: usize) -> f64 {
                self.data[self.idx(i, j)]
            }

            /// Sets the value at column `i`, row `j`.
            #[inline]
            pub fn set(&mut self, i: usize, j: usize, v: f64) {
                let k = self.idx(i, j);
                self.data[k] = v;
            }

            /// Adds to the value at column `i`, row `j`.
            #[inline]
            pub fn add(&mut self, i: usize, j: usize, v: f64) {
                let k = self.idx(i, j);
                self.data[k] += v;
            }

            /// Raw sample slice (row-major).
            pub fn as_slice(&self) -> &[f64] {
                &self.data
            }

            /// Mutable raw sample slice (row-major).
            pub fn as_mut_slice(&mut self) -> &mut [f64] {
                &mut self.data
            }

            /// Maximum absolute sample.
            pub fn max_abs(&self) -> f64 {
                self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            }
        }
    };
}

field_type!(
    /// Cell-centered scalar field (pressure, concentration): samples at
    /// `((i+1/2) dx, (j+1/2) dy)` for `i < nx`, `j < ny`.
    CellField,
    |nx| nx,
    |ny| ny,
    xc,
    yc
);

field_type!(
    /// Vertical-face field (`u_x`): samples at `(i dx, (j+1/2) dy)` for
    /// `i <= nx`, `j < ny`.
    FaceXField,
    |nx: usize| nx + 1,
    |ny| ny,
    xf,
    yc
);

field_type!(
    /// Horizontal-face field (`u_y`): samples at `((i+1/2) dx, j dy)` for
    /// `i < nx`, `j <= ny`.
    FaceYField,
    |nx| nx,
    |ny: usize| ny + 1,
    xc,
    yf
);

field_type!(
    /// Node field (partition-of-unity weights): samples at `(i dx, j dy)` for
    /// `i <= nx`, `j <= ny`.
    NodeField,
    |nx: usize| nx + 1,
    |ny: usize| ny + 1,
    xf,
    yf
);

/// A 1D trace along a segment: arclength coordinates from the segment start,
/// sample values, and quadrature weights.
#[derive(Debug, Clone)]
pub struct Trace {
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Trace {
    /// Midpoint-rule trace: every sample weighs `spacing`.
    pub fn midpoint(s: Vec<f64>, values: Vec<f64>, spacing: f64) -> Self {
        let weights = vec![spacing; values.len()];
        Trace { s, values, weights }
    }

    /// Trapezoid-rule trace: end samples weigh `spacing / 2`.
    pub fn trapezoid(s: Vec<f64>, values: Vec<f64>, spacing: f64) -> Self {
        let n = values.len();
        let mut weights = vec![spacing; n];
        if n > 0 {
            weights[0] = 0.5 * spacing;
            weights[n - 1] = 0.5 * spacing;
        }
        Trace { s, values, weights }
    }

    /// Discrete `L^q` norm with the stored quadrature weights.
    pub fn norm_lq(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for (v, w) in self.values.iter().zip(&self.weights) {
            acc += v.abs().powf(q) * w;
        }
        acc.powf(1.0 / q)
    }

    /// Discrete `L^2` norm.
    pub fn norm_l2(&self) -> f64 {
        let mut acc = 0.0;
        for (v, w) in self.values.iter().zip(&self.weights) {
            acc += v * v * w;
        }
        acc.sqrt()
    }

    /// Maximum absolute sample.
    pub fn norm_max(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Weighted integral of the samples.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| v * w)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_10() -> ReferenceGrid {
        build_reference_domain(1.0, 0.3, 10, 10).unwrap()
    }

    #[test]
    fn build_validates_interface_alignment() {
        // h = 0.3 on ny = 10 is aligned.
        let g = grid_10();
        assert_eq!(g.j_sigma, 3);
        assert_eq!(g.fluid_cell_count(), 30);
        assert_eq!(g.solid_cell_count(), 70);
        // h = 0.25 on ny = 10 is not; nearest admissible heights are 0.2/0.3.
        match build_reference_domain(1.0, 0.25, 10, 10) {
            Err(GeometryError::InterfaceNotAligned { nearest, .. }) => {
                assert!((nearest - 0.2).abs() < 1e-12 || (nearest - 0.3).abs() < 1e-12);
            }
            other => panic!("expected misalignment error, got {other:?}"),
        }
        // Thin phases are rejected: h = 0.1 on ny = 10 leaves one fluid row.
        assert!(matches!(
            build_reference_domain(1.0, 0.1, 10, 10),
            Err(GeometryError::TooFewCells { .. })
        ));
    }

    #[test]
    fn trace_extrapolation_is_exact_on_linear_fields() {
        let g = grid_10();
        // f(x, y) = 2y + 1 sampled at cell centers; the one-sided trace on the
        // interface must reproduce 2h + 1 exactly (linear extrapolation).
        let f = CellField::from_fn(&g, |_, y| 2.0 * y + 1.0);
        for phase in [Phase::Fluid, Phase::Solid] {
            let tr = g
                .extract_trace(FieldRef::Cell(&f), Segment::Interface, phase)
                .unwrap();
            for v in &tr.values {
                assert!((v - (2.0 * g.h + 1.0)).abs() < 1e-13, "{v}");
            }
        }
        // Same on the outer wall from the solid side.
        let tr = g
            .extract_trace(FieldRef::Cell(&f), Segment::OuterWall, Phase::Solid)
            .unwrap();
        for v in &tr.values {
            assert!((v - 3.0).abs() < 1e-13);
        }
        // End-face trace of a field linear in x.
        let fx = CellField::from_fn(&g, |x, _| 3.0 * x - 0.5);
        let tr = g
            .extract_trace(
                FieldRef::Cell(&fx),
                Segment::EndFluid(Side::Right),
                Phase::Fluid,
            )
            .unwrap();
        for v in &tr.values {
            assert!((v - (3.0 * g.l - 0.5)).abs() < 1e-13);
        }
    }

    #[test]
    fn face_fields_on_their_own_segments_are_copied() {
        let g = grid_10();
        let uy = FaceYField::from_fn(&g, |x, y| x + 10.0 * y);
        let tr = g
            .extract_trace(FieldRef::FaceY(&uy), Segment::Interface, Phase::Fluid)
            .unwrap();
        for (k, v) in tr.values.iter().enumerate() {
            let expect = g.xc(k) + 10.0 * g.h;
            assert!((v - expect).abs() < 1e-13);
        }
        let ux = FaceXField::from_fn(&g, |x, y| x - y);
        let tr = g
            .extract_trace(
                FieldRef::FaceX(&ux),
                Segment::EndSolid(Side::Left),
                Phase::Solid,
            )
            .unwrap();
        for (k, v) in tr.values.iter().enumerate() {
            let y = g.yc(g.j_sigma + k);
            assert!((v - (0.0 - y)).abs() < 1e-13);
            assert!((tr.s[k] - (y - g.h)).abs() < 1e-13);
        }
    }

    #[test]
    fn trace_norms_use_segment_quadrature() {
        let g = grid_10();
        let one = CellField::from_fn(&g, |_, _| 1.0);
        let tr = g
            .extract_trace(FieldRef::Cell(&one), Segment::Axis, Phase::Fluid)
            .unwrap();
        // Integral of 1 over the axis = L.
        assert!((tr.integral() - g.l).abs() < 1e-12);
        assert!((tr.norm_l2() - g.l.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn phase_mismatch_is_rejected() {
        let g = grid_10();
        let f = CellField::zeros(&g);
        assert!(matches!(
            g.extract_trace(FieldRef::Cell(&f), Segment::Axis, Phase::Solid),
            Err(GeometryError::SegmentPhaseMismatch { .. })
        ));
    }
}
