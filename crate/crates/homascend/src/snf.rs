//! Smith normal form over `k[x]` localized at (x).
//!
//! The localization is a discrete valuation ring with uniformizer x: every
//! nonzero polynomial is x^e times a unit (a polynomial with nonzero constant
//! term). Diagonalization therefore needs only polynomial row and column
//! operations of the form `row_i := u_p * row_i - x^d * u_a * row_pivot`,
//! whose transformation matrices have unit determinant in the localization.

use std::fmt;

use crate::field::Field;
use crate::poly::Poly;

#[derive(Clone, PartialEq, Eq)]
pub struct PolyMat {
    field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Poly>, // row-major
}

impl PolyMat {
    pub fn zero(field: &Field, rows: usize, cols: usize) -> PolyMat {
        PolyMat {
            field: field.clone(),
            rows,
            cols,
            entries: vec![Poly::zero(field); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> PolyMat {
        let mut m = PolyMat::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, Poly::one(field));
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<Poly>>) -> PolyMat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            entries.extend(row);
        }
        PolyMat {
            field: field.clone(),
            rows: r,
            cols: c,
            entries,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Poly) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &PolyMat) -> PolyMat {
        assert_eq!(self.cols, other.rows);
        let mut out = PolyMat::zero(&self.field, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let t = a.mul(b);
                    let cur = out.get(i, j).clone();
                    out.set(i, j, cur.add(&t));
                }
            }
        }
        out
    }

    /// Determinant by cofactor expansion. Intended for the small matrices of
    /// the verification harness.
    pub fn det(&self) -> Poly {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Poly::one(&self.field);
        }
        if n == 1 {
            return self.get(0, 0).clone();
        }
        let mut acc = Poly::zero(&self.field);
        for j in 0..n {
            let c = self.get(0, j);
            if c.is_zero() {
                continue;
            }
            let minor = self.minor(0, j);
            let term = c.mul(&minor.det());
            acc = if j % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }

    fn minor(&self, row: usize, col: usize) -> PolyMat {
        let mut rows = Vec::new();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let mut r = Vec::new();
            for j in 0..self.cols {
                if j == col {
                    continue;
                }
                r.push(self.get(i, j).clone());
            }
            rows.push(r);
        }
        PolyMat::from_rows(&self.field, rows)
    }
}

impl fmt::Debug for PolyMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PolyMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Outcome of [`snf_localized`]: U * A * V = D with D diagonal, the nonzero
/// diagonal entries x^{e_i} * unit_i sorted by exponent, and U, V invertible
/// over the localization (unit determinants).
pub struct SnfLocalized {
    pub u: PolyMat,
    pub v: PolyMat,
    pub d: PolyMat,
    /// x-adic exponents e_1 <= ... <= e_r of the nonzero invariant factors.
    pub exponents: Vec<usize>,
    /// cols(A) - r: the free rank of the cokernel of the presented module.
    pub free_defect: usize,
}

/// Diagonalize over `k[x]_(x)`. Pivot selection: minimal x-adic valuation, ties
/// broken by lexicographic (row, col).
pub fn snf_localized(a: &PolyMat) -> SnfLocalized {
    let field = a.field().clone();
    let mut m = a.clone();
    let mut u = PolyMat::identity(&field, a.rows());
    let mut v = PolyMat::identity(&field, a.cols());
    let mut step = 0usize;
    let limit = a.rows().min(a.cols());

    while step < limit {
        // find pivot of minimal valuation in the trailing submatrix
        let mut best: Option<(usize, usize, usize)> = None; // (val, row, col)
        for i in step..m.rows() {
            for j in step..m.cols() {
                if let Some(val) = m.get(i, j).valuation() {
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => val < bv || (val == bv && (i, j) < (bi, bj)),
                    };
                    if better {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        swap_rows(&mut m, step, pi);
        swap_rows(&mut u, step, pi);
        swap_cols(&mut m, step, pj);
        swap_cols(&mut v, step, pj);

        // clear the pivot column, then the pivot row; pivot row/col stay
        // fixed under the operations on the others, so one pass each suffices
        let pivot = m.get(step, step).clone();
        let pv = pivot.valuation().unwrap();
        let unit_p = unit_part(&pivot, pv);
        for i in step + 1..m.rows() {
            let e = m.get(i, step).clone();
            let Some(ev) = e.valuation() else { continue };
            debug_assert!(ev >= pv);
            let unit_a = unit_part(&e, ev).shift(ev - pv);
            // row_i := unit_p * row_i - x^{ev-pv} * unit_a * row_step
            row_combine(&mut m, i, step, &unit_p, &unit_a);
            row_combine(&mut u, i, step, &unit_p, &unit_a);
        }
        for j in step + 1..m.cols() {
            let e = m.get(step, j).clone();
            let Some(ev) = e.valuation() else { continue };
            debug_assert!(ev >= pv);
            let unit_a = unit_part(&e, ev).shift(ev - pv);
            col_combine(&mut m, j, step, &unit_p, &unit_a);
            col_combine(&mut v, j, step, &unit_p, &unit_a);
        }
        step += 1;
    }

    let mut exponents = Vec::new();
    for i in 0..limit {
        if let Some(val) = m.get(i, i).valuation() {
            exponents.push(val);
        }
    }
    debug_assert!(exponents.windows(2).all(|w| w[0] <= w[1]));
    let free_defect = a.cols() - exponents.len();
    SnfLocalized {
        u,
        v,
        d: m,
        exponents,
        free_defect,
    }
}

/// The unit cofactor of a nonzero polynomial: p = x^val * unit.
fn unit_part(p: &Poly, val: usize) -> Poly {
    Poly::from_coeffs(p.field(), p.coeffs()[val..].to_vec())
}

fn swap_rows(m: &mut PolyMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let x = m.get(a, j).clone();
        let y = m.get(b, j).clone();
        m.set(a, j, y);
        m.set(b, j, x);
    }
}

fn swap_cols(m: &mut PolyMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let x = m.get(i, a).clone();
        let y = m.get(i, b).clone();
        m.set(i, a, y);
        m.set(i, b, x);
    }
}

/// row_i := u_p * row_i - mult * row_pivot
fn row_combine(m: &mut PolyMat, i: usize, pivot: usize, u_p: &Poly, mult: &Poly) {
    for j in 0..m.cols() {
        let v = u_p.mul(m.get(i, j)).sub(&mult.mul(m.get(pivot, j)));
        m.set(i, j, v);
    }
}

/// col_j := u_p * col_j - mult * col_pivot
fn col_combine(m: &mut PolyMat, j: usize, pivot: usize, u_p: &Poly, mult: &Poly) {
    for i in 0..m.rows() {
        let v = u_p.mul(m.get(i, j)).sub(&mult.mul(m.get(i, pivot)));
        m.set(i, j, v);
    }
}
