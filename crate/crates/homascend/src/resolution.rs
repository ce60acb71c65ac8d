//! Minimal free resolutions over a local algebra and Ext computed from them.
//!
//! Differentials are stored as matrices over the algebra; every column of a
//! differential lies in m times the next free module (minimality), and each
//! step's kernel is computed exactly, so the resolution is exact at every
//! spot it covers.

use crate::algebra::{AlgElem, Algebra};
use crate::fmodule::FModule;
use crate::mat::Mat;

/// Matrix with entries in the algebra, encoding an A-linear map A^cols -> A^rows.
#[derive(Clone, Debug)]
pub struct AlgMat {
    pub algebra: Algebra,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<AlgElem>, // row-major
}

impl AlgMat {
    pub fn get(&self, i: usize, j: usize) -> &AlgElem {
        &self.entries[i * self.cols + j]
    }

    /// The underlying k-linear map between free modules in the copy-major
    /// coordinate layout of [`FModule::free`].
    pub fn to_k_matrix(&self) -> Mat {
        let a = &self.algebra;
        let n = a.dim();
        let f = a.field();
        let mut m = Mat::zero(f, self.rows * n, self.cols * n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let op = a.action_of(self.get(i, j));
                for r in 0..n {
                    for c in 0..n {
                        let v = op.get(r, c);
                        if !f.is_zero(v) {
                            m.set(i * n + r, j * n + c, v.clone());
                        }
                    }
                }
            }
        }
        m
    }

    /// All entries in the maximal ideal?
    pub fn entries_in_radical(&self) -> bool {
        let rad = self.algebra.radical();
        self.entries
            .iter()
            .all(|e| rad.span_contains(&Mat::col_vec(self.algebra.field(), e.clone())))
    }
}

/// Minimal free resolution F_L -> ... -> F_1 -> F_0 -> M -> 0.
pub struct Resolution {
    pub module: FModule,
    /// Free ranks beta_0 .. beta_L.
    pub betti: Vec<usize>,
    /// `diffs[t]` is the differential F_{t+1} -> F_t (so diffs.len() = L).
    pub diffs: Vec<AlgMat>,
    /// Images in M of the generators of F_0, as module coordinates.
    pub augmentation: Mat,
}

impl Resolution {
    pub fn length(&self) -> usize {
        self.betti.len() - 1
    }

    /// The k-matrix of the augmentation F_0 -> M.
    pub fn augmentation_k_matrix(&self) -> Mat {
        let a = self.module.algebra();
        let n = a.dim();
        let f = a.field();
        let b0 = self.betti[0];
        let mut m = Mat::zero(f, self.module.dim(), b0 * n);
        for i in 0..b0 {
            for c in 0..n {
                let v = self.module.action(c).mul(&self.augmentation.col(i));
                for r in 0..self.module.dim() {
                    m.set(r, i * n + c, v.get(r, 0).clone());
                }
            }
        }
        m
    }
}

/// Compute a minimal free resolution of length L (that is, through F_L).
pub fn minimal_resolution(m: &FModule, length: usize) -> Resolution {
    let a = m.algebra().clone();
    let n = a.dim();
    let f = a.field().clone();
    let rad = a.radical().clone();

    let gens = m.minimal_generators();
    let b0 = gens.cols();
    let mut betti = vec![b0];
    let mut diffs: Vec<AlgMat> = Vec::new();

    // kernel of the augmentation as a subspace of F_0
    let mut current_rank = b0;
    let mut kernel: Mat = if b0 == 0 {
        Mat::zero(&f, 0, 0)
    } else {
        let aug = {
            let mut k_mat = Mat::zero(&f, m.dim(), b0 * n);
            for i in 0..b0 {
                for c in 0..n {
                    let v = m.action(c).mul(&gens.col(i));
                    for r in 0..m.dim() {
                        k_mat.set(r, i * n + c, v.get(r, 0).clone());
                    }
                }
            }
            k_mat
        };
        aug.kernel()
    };

    for _t in 1..=length {
        if current_rank == 0 {
            betti.push(0);
            diffs.push(AlgMat {
                algebra: a.clone(),
                rows: 0,
                cols: 0,
                entries: vec![],
            });
            continue;
        }
        let free_prev = FModule::free(&a, current_rank);
        // minimal generators of the kernel: independent modulo m * kernel
        let kbasis = kernel.col_basis();
        let mut m_k = Mat::zero(&f, free_prev.dim(), 0);
        for c in 0..rad.cols() {
            let op = free_prev.action_of(&rad.col_entries(c));
            m_k = m_k.hstack(&op.mul(&kbasis));
        }
        let mut span = m_k.col_basis();
        let mut gens_t = Mat::zero(&f, free_prev.dim(), 0);
        for c in 0..kbasis.cols() {
            let v = kbasis.col(c);
            if !span.span_contains(&v) {
                span = span.hstack(&v);
                gens_t = gens_t.hstack(&v);
            }
        }
        let bt = gens_t.cols();
        // read the A-matrix straight off the copy-major coordinates
        let mut entries = Vec::with_capacity(current_rank * bt);
        for i in 0..current_rank {
            for j in 0..bt {
                let e: AlgElem = (0..n).map(|r| gens_t.get(i * n + r, j).clone()).collect();
                entries.push(e);
            }
        }
        let d = AlgMat {
            algebra: a.clone(),
            rows: current_rank,
            cols: bt,
            entries,
        };
        debug_assert!(
            d.entries_in_radical(),
            "resolution differential not minimal"
        );
        let dk = d.to_k_matrix();
        kernel = dk.kernel();
        betti.push(bt);
        diffs.push(d);
        current_rank = bt;
    }

    Resolution {
        module: m.clone(),
        betti,
        diffs,
        augmentation: gens,
    }
}

/// dim_k Ext^i_A(M, N) with representative cocycles in the minimal-resolution
/// model (each an N-valued matrix on the generators of F_i).
pub fn ext_dim(m: &FModule, n: &FModule, i: usize) -> (usize, Vec<Mat>) {
    let f = m.algebra().field().clone();
    if m.dim() == 0 || n.dim() == 0 {
        return (0, vec![]);
    }
    let res = minimal_resolution(m, i + 1);
    let delta = |t: usize| -> Mat {
        // N^{beta_t} -> N^{beta_{t+1}} induced by d_{t+1}
        let bt = res.betti[t];
        let bt1 = res.betti[t + 1];
        let nn = n.dim();
        let mut mat = Mat::zero(&f, bt1 * nn, bt * nn);
        let d = &res.diffs[t];
        for j in 0..bt1 {
            for iidx in 0..bt {
                let op = n.action_of(d.get(iidx, j));
                for r in 0..nn {
                    for c in 0..nn {
                        let v = op.get(r, c);
                        if !f.is_zero(v) {
                            mat.set(j * nn + r, iidx * nn + c, v.clone());
                        }
                    }
                }
            }
        }
        mat
    };
    let nn = n.dim();
    let dom = res.betti[i] * nn;
    if dom == 0 {
        return (0, vec![]);
    }
    let ker = delta(i).kernel().col_basis();
    let im = if i == 0 {
        Mat::zero(&f, dom, 0)
    } else {
        delta(i - 1).col_basis()
    };
    let dim = ker.cols() - im.cols();
    // representatives: kernel columns independent modulo the image
    let mut span = im;
    let mut reps = Vec::new();
    for c in 0..ker.cols() {
        let v = ker.col(c);
        if !span.span_contains(&v) {
            span = span.hstack(&v);
            let cocycle = Mat::from_fn(&f, nn, res.betti[i], |r, g| v.get(g * nn + r, 0).clone());
            reps.push(cocycle);
        }
    }
    debug_assert_eq!(reps.len(), dim);
    (dim, reps)
}
