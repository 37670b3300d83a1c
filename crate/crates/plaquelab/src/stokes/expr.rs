//! Tiny linear-expression builder for finite-volume assembly.
//!
//! Momentum rows are balances of stress fluxes; each flux is a linear
//! expression in the unknowns plus a constant carrying boundary data. The
//! builder lets the assembly code compose fluxes exactly as the scheme is
//! written on paper and then impose `expression = rhs` as one matrix row,
//! with the data constant moved to the right-hand side automatically. Both
//! Stokes assemblies use it, which keeps matrix and right-hand side in a
//! single code path (no drift between the two).

use crate::linalg::{LinAlgError, SystemBuilder};

/// A linear expression `sum_k coeff_k * x_{idx_k} + con`.
#[derive(Debug, Clone, Default)]
pub(crate) struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub con: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        LinExpr::default()
    }

    /// Expression consisting of a single unknown with coefficient `c`.
    pub fn term(idx: usize, c: f64) -> Self {
        LinExpr {
            terms: vec![(idx, c)],
            con: 0.0,
        }
    }

    /// Adds a term in place and returns `self` (builder style).
    pub fn with(mut self, idx: usize, c: f64) -> Self {
        self.terms.push((idx, c));
        self
    }

    /// Adds a constant (known data) contribution.
    pub fn plus_con(mut self, v: f64) -> Self {
        self.con += v;
        self
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, other: &LinExpr, s: f64) {
        for &(idx, c) in &other.terms {
            self.terms.push((idx, s * c));
        }
        self.con += s * other.con;
    }

    /// Returns `s * self`.
    pub fn scaled(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= s;
        }
        self.con *= s;
        self
    }
}

/// Imposes `expr = rhs` as matrix row `row`: unknown coefficients go into
/// the matrix, the data constant moves to the right-hand side. Exactly one
/// `impose` call per row (it *sets* the right-hand side).
pub(crate) fn impose(
    sys: &mut SystemBuilder,
    row: usize,
    expr: &LinExpr,
    rhs: f64,
) -> Result<(), LinAlgError> {
    for &(col, v) in &expr.terms {
        if v != 0.0 {
            sys.add(row, col, v)?;
        }
    }
    sys.rhs_set(row, rhs - expr.con);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composes_and_imposes() {
        // 2 x0 - x1 + 3 = 7  and  x1 = 1  =>  x0 = 2.5.
        let mut sys = SystemBuilder::new(2);
        let mut e = LinExpr::term(0, 1.0);
        e.add_scaled(&LinExpr::term(0, 1.0).with(1, -1.0).plus_con(3.0), 1.0);
        impose(&mut sys, 0, &e, 7.0).unwrap();
        impose(&mut sys, 1, &LinExpr::term(1, 1.0), 1.0).unwrap();
        let x = sys.solve().unwrap();
        assert!((x[0] - 2.5).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }
}
