//! Dense exact matrices over a [`Field`], with the echelon-form toolbox the
//! rest of the crate is built on: rref, kernels, solving, inverses, and
//! column-space manipulation for subspace arithmetic.

use std::fmt;

use crate::field::{Field, FieldElem};
use crate::rng::Rng;

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<FieldElem>, // row-major
}

/// Result of reduced row-echelon computation.
pub struct Rref {
    pub mat: Mat,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl Mat {
    pub fn zero(field: &Field, rows: usize, cols: usize) -> Mat {
        Mat {
            field: field.clone(),
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Mat {
        let mut m = Mat::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: &Field, rows: Vec<Vec<FieldElem>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Mat {
            field: field.clone(),
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(
        field: &Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> FieldElem,
    ) -> Mat {
        let mut m = Mat::zero(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Column vector from entries.
    pub fn col_vec(field: &Field, entries: Vec<FieldElem>) -> Mat {
        let n = entries.len();
        Mat {
            field: field.clone(),
            rows: n,
            cols: 1,
            data: entries,
        }
    }

    pub fn random(field: &Field, rows: usize, cols: usize, rng: &mut Rng) -> Mat {
        Mat::from_fn(field, rows, cols, |_, _| field.random_elem(rng))
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

    pub fn get(&self, i: usize, j: usize) -> &FieldElem {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| self.field.is_zero(e))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Mat::identity(&self.field, self.rows)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(&self.field, self.cols, self.rows, |i, j| {
            self.get(j, i).clone()
        })
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| {
            self.field.add(self.get(i, j), other.get(i, j))
        })
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| {
            self.field.sub(self.get(i, j), other.get(i, j))
        })
    }

    pub fn neg(&self) -> Mat {
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| {
            self.field.neg(self.get(i, j))
        })
    }

    pub fn scale(&self, c: &FieldElem) -> Mat {
        Mat::from_fn(&self.field, self.rows, self.cols, |i, j| {
            self.field.mul(self.get(i, j), c)
        })
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let f = &self.field;
        let mut out = Mat::zero(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let t = f.mul(a, b);
                    let cur = out.get(i, j).clone();
                    out.set(i, j, f.add(&cur, &t));
                }
            }
        }
        out
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(&self.field, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        })
    }

    /// Vertical concatenation [self; other].
    pub fn vstack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        Mat::from_fn(&self.field, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self.get(i, j).clone()
            } else {
                other.get(i - self.rows, j).clone()
            }
        })
    }

    pub fn col(&self, j: usize) -> Mat {
        Mat::from_fn(&self.field, self.rows, 1, |i, _| self.get(i, j).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Mat {
        Mat::from_fn(&self.field, self.rows, idx.len(), |i, j| {
            self.get(i, idx[j]).clone()
        })
    }

    pub fn col_entries(&self, j: usize) -> Vec<FieldElem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Reduced row-echelon form with pivot columns.
    pub fn rref(&self) -> Rref {
        let f = self.field.clone();
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            // find pivot
            let mut piv = None;
            for r in row..m.rows {
                if !f.is_zero(m.get(r, col)) {
                    piv = Some(r);
                    break;
                }
            }
            let Some(p) = piv else { continue };
            // swap rows
            if p != row {
                for j in 0..m.cols {
                    let a = m.get(row, j).clone();
                    let b = m.get(p, j).clone();
                    m.set(row, j, b);
                    m.set(p, j, a);
                }
            }
            // normalize
            let inv = f.inv(m.get(row, col)).expect("pivot invertible");
            for j in col..m.cols {
                let v = f.mul(m.get(row, j), &inv);
                m.set(row, j, v);
            }
            // eliminate
            for r in 0..m.rows {
                if r == row || f.is_zero(m.get(r, col)) {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for j in col..m.cols {
                    let v = f.sub(m.get(r, j), &f.mul(&factor, m.get(row, j)));
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        let rank = pivots.len();
        Rref {
            mat: m,
            pivots,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    /// Basis of the null space, as columns. Column count = cols - rank.
    pub fn kernel(&self) -> Mat {
        let f = &self.field;
        let Rref {
            mat: r,
            pivots,
            rank,
        } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Mat::zero(f, self.cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            out.set(fc, k, f.one());
            for (prow, &pc) in pivots.iter().enumerate().take(rank) {
                out.set(pc, k, f.neg(r.get(prow, fc)));
            }
        }
        out
    }

    /// Echelonized basis of the column space (canonical for a given span).
    pub fn col_basis(&self) -> Mat {
        let rt = self.transpose().rref();
        Mat::from_fn(&self.field, self.rows, rt.rank, |i, j| {
            rt.mat.get(j, i).clone()
        })
    }

    /// Solve self * X = B for all columns of B. None if inconsistent.
    pub fn solve(&self, b: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, b.rows);
        let f = &self.field;
        let aug = self.hstack(b);
        let r = aug.rref();
        // consistency: no pivot in the B block
        if r.pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        let mut x = Mat::zero(f, self.cols, b.cols);
        for (prow, &pc) in r.pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.mat.get(prow, self.cols + j).clone());
            }
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let x = self.solve(&Mat::identity(&self.field, self.rows))?;
        if self.mul(&x).is_identity() {
            Some(x)
        } else {
            None
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.rank() == self.rows
    }

    /// Membership of a column vector in the column span.
    pub fn span_contains(&self, v: &Mat) -> bool {
        self.solve(v).is_some()
    }

    /// Does span(self) contain span(other)? Both as column generators.
    pub fn span_contains_all(&self, other: &Mat) -> bool {
        self.solve(other).is_some()
    }

    pub fn span_eq(&self, other: &Mat) -> bool {
        self.span_contains_all(other) && other.span_contains_all(self)
    }

    /// Column basis of span(self) + span(other).
    pub fn span_union(&self, other: &Mat) -> Mat {
        self.hstack(other).col_basis()
    }

    /// Column basis of span(self) ∩ span(other).
    pub fn span_intersect(&self, other: &Mat) -> Mat {
        if self.cols == 0 || other.cols == 0 {
            return Mat::zero(&self.field, self.rows, 0);
        }
        let joint = self.hstack(&other.neg());
        let ker = joint.kernel();
        // first block of each kernel vector gives coefficients on self
        let mut gens = Mat::zero(&self.field, self.rows, ker.cols());
        for k in 0..ker.cols() {
            let coeffs = Mat::from_fn(&self.field, self.cols, 1, |i, _| ker.get(i, k).clone());
            let v = self.mul(&coeffs);
            for i in 0..self.rows {
                gens.set(i, k, v.get(i, 0).clone());
            }
        }
        gens.col_basis()
    }

    /// Extend the independent columns of `self` to a basis of the ambient
    /// space using standard basis vectors; returns the complement columns.
    pub fn complement_to_full(&self) -> Mat {
        let f = &self.field;
        let n = self.rows;
        let mut cur = self.col_basis();
        let mut extra = Vec::new();
        for i in 0..n {
            if cur.cols() == n {
                break;
            }
            let mut e = Mat::zero(f, n, 1);
            e.set(i, 0, f.one());
            if !cur.span_contains(&e) {
                cur = cur.hstack(&e);
                extra.push(e);
            }
        }
        let mut out = Mat::zero(f, n, extra.len());
        for (k, e) in extra.iter().enumerate() {
            for i in 0..n {
                out.set(i, k, e.get(i, 0).clone());
            }
        }
        out
    }

    /// Coordinates of v in the given independent-column basis, if v lies in
    /// the span.
    pub fn coords_in(&self, v: &Mat) -> Option<Vec<FieldElem>> {
        let x = self.solve(v)?;
        Some((0..self.cols).map(|i| x.get(i, 0).clone()).collect())
    }

    pub fn fmt_plain(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.field.fmt_elem(self.get(i, j)))
                .collect();
            s.push_str(&format!("[{}]\n", row.join(", ")));
        }
        s
    }
}

/// Monic minimal polynomial of a square matrix, as coefficients c0..cd.
/// Found as the first linear dependence among I, M, M^2, ...
pub fn min_poly(m: &Mat) -> Vec<FieldElem> {
    let f = m.field().clone();
    let n = m.rows();
    assert_eq!(n, m.cols());
    if n == 0 {
        return vec![f.one()];
    }
    let mut powers: Vec<Mat> = vec![Mat::identity(&f, n)];
    loop {
        // stack the flattened powers as columns and look for a dependence
        // ending at the newest power
        let k = powers.len();
        let mut stacked = Mat::zero(&f, n * n, k);
        for (c, p) in powers.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    stacked.set(i * n + j, c, p.get(i, j).clone());
                }
            }
        }
        let next = powers.last().unwrap().mul(m);
        let mut target = Mat::zero(&f, n * n, 1);
        for i in 0..n {
            for j in 0..n {
                target.set(i * n + j, 0, next.get(i, j).clone());
            }
        }
        if let Some(x) = stacked.solve(&target) {
            // M^k = sum_{i<k} x_i M^i  =>  minpoly = t^k - sum x_i t^i
            let mut coeffs = Vec::with_capacity(k + 1);
            for i in 0..k {
                coeffs.push(f.neg(x.get(i, 0)));
            }
            coeffs.push(f.one());
            return coeffs;
        }
        powers.push(next);
        assert!(
            powers.len() <= n + 1,
            "minimal polynomial search exceeded dimension"
        );
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Mat {}x{} over {}\n{}",
            self.rows,
            self.cols,
            self.field,
            self.fmt_plain()
        )
    }
}
