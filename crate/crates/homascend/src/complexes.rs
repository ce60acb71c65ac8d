//! Bounded chain complexes of modules over a local algebra, with homological
//! indexing (differentials lower degree by one). Provides the Hom complex
//! with differential {f_p} -> {d^Y_{p+n} f_p - (-1)^n f_{p-1} d^X_p}, Koszul
//! complexes on the standard exterior basis, base change of complexes,
//! mapping cones with the convention d(x, y) = (-dx, dy + f(x)), and
//! quasi-isomorphism testing by two independent routes that must agree.

use crate::algebra::{AlgElem, Algebra, AlgebraMap};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::fmodule::{hom_module, FModule, HomSpace};
use crate::mat::Mat;
use crate::resolution::{AlgMat, Resolution};

#[derive(Clone)]
pub struct BoundedComplex {
    algebra: Algebra,
    lo: i64,
    modules: Vec<FModule>,
    /// diffs[i]: modules[i+1] -> modules[i].
    diffs: Vec<Mat>,
}

impl BoundedComplex {
    pub fn new(
        algebra: Algebra,
        lo: i64,
        modules: Vec<FModule>,
        diffs: Vec<Mat>,
    ) -> Result<BoundedComplex> {
        if modules.is_empty() {
            return Err(Error::Invariant("complex needs at least one degree".into()));
        }
        if diffs.len() + 1 != modules.len() {
            return Err(Error::Invariant(
                "need one differential per adjacent pair".into(),
            ));
        }
        let c = BoundedComplex {
            algebra,
            lo,
            modules,
            diffs,
        };
        c.verify()?;
        Ok(c)
    }

    fn verify(&self) -> Result<()> {
        let a = &self.algebra;
        for (i, d) in self.diffs.iter().enumerate() {
            if d.rows() != self.modules[i].dim() || d.cols() != self.modules[i + 1].dim() {
                return Err(Error::Invariant(format!(
                    "differential {i} has wrong shape"
                )));
            }
            // A-linearity
            for b in 0..a.dim() {
                if d.mul(self.modules[i + 1].action(b)) != self.modules[i].action(b).mul(d) {
                    return Err(Error::Invariant(format!(
                        "differential {i} is not A-linear"
                    )));
                }
            }
        }
        for i in 1..self.diffs.len() {
            if !self.diffs[i - 1].mul(&self.diffs[i]).is_zero() {
                return Err(Error::Invariant(format!("d^2 != 0 at interior degree {i}")));
            }
        }
        Ok(())
    }

    pub fn single(m: &FModule, degree: i64) -> BoundedComplex {
        BoundedComplex {
            algebra: m.algebra().clone(),
            lo: degree,
            modules: vec![m.clone()],
            diffs: vec![],
        }
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.modules.len() as i64 - 1
    }

    pub fn module_at(&self, n: i64) -> FModule {
        if n < self.lo || n > self.hi() {
            FModule::zero(&self.algebra)
        } else {
            self.modules[(n - self.lo) as usize].clone()
        }
    }

    pub fn dim_at(&self, n: i64) -> usize {
        if n < self.lo || n > self.hi() {
            0
        } else {
            self.modules[(n - self.lo) as usize].dim()
        }
    }

    /// Differential X_n -> X_{n-1}; zero-shaped outside the stored range.
    pub fn diff_at(&self, n: i64) -> Mat {
        if n > self.lo && n <= self.hi() {
            self.diffs[(n - self.lo - 1) as usize].clone()
        } else {
            Mat::zero(self.algebra.field(), self.dim_at(n - 1), self.dim_at(n))
        }
    }

    /// Homology at degree n, with the data needed to map cycles to classes.
    pub fn homology(&self, n: i64) -> Homology {
        let f = self.algebra.field().clone();
        let d_out = self.diff_at(n);
        let d_in = self.diff_at(n + 1);
        let cycles = d_out.kernel().col_basis();
        let boundaries = d_in.col_basis();
        // representatives: cycles independent modulo boundaries
        let mut span = boundaries.clone();
        let mut reps = Mat::zero(&f, self.dim_at(n), 0);
        for c in 0..cycles.cols() {
            let v = cycles.col(c);
            if !span.span_contains(&v) {
                span = span.hstack(&v);
                reps = reps.hstack(&v);
            }
        }
        let hdim = reps.cols();
        // induced action on classes
        let module_n = self.module_at(n);
        let basis = reps.hstack(&boundaries);
        let class_coords = |v: &Mat| -> Option<Vec<FieldElem>> {
            let coords = basis.coords_in(v)?;
            Some(coords[..hdim].to_vec())
        };
        let mut action = Vec::with_capacity(self.algebra.dim());
        for b in 0..self.algebra.dim() {
            let mut mat = Mat::zero(&f, hdim, hdim);
            for j in 0..hdim {
                let img = module_n.action(b).mul(&reps.col(j));
                let cls = class_coords(&img).expect("action preserves cycles mod boundaries");
                for (r, c) in cls.iter().enumerate() {
                    mat.set(r, j, c.clone());
                }
            }
            action.push(mat);
        }
        let module = FModule::from_action_unchecked(self.algebra.clone(), action);
        Homology {
            module,
            reps,
            cycles,
            boundaries,
        }
    }

    pub fn homology_dims(&self) -> Vec<(i64, usize)> {
        (self.lo..=self.hi())
            .map(|n| (n, self.homology(n).module.dim()))
            .collect()
    }

    pub fn is_exact(&self) -> bool {
        self.homology_dims().iter().all(|(_, d)| *d == 0)
    }

    /// Total homology dimension; a complex is nonzero in the derived sense
    /// iff this is positive.
    pub fn total_homology_dim(&self) -> usize {
        self.homology_dims().iter().map(|(_, d)| d).sum()
    }

    pub fn is_degreewise_free(&self) -> bool {
        self.modules.iter().all(|m| {
            m.dim() % self.algebra.dim() == 0 && {
                let rank = m.dim() / self.algebra.dim();
                *m == FModule::free(&self.algebra, rank)
            }
        })
    }
}

/// Homology of one degree: the subquotient module together with chosen cycle
/// representatives (columns of `reps`).
pub struct Homology {
    pub module: FModule,
    pub reps: Mat,
    pub cycles: Mat,
    pub boundaries: Mat,
}

impl Homology {
    /// Class coordinates of a cycle; None if the vector is not a cycle.
    pub fn class_of(&self, v: &Mat) -> Option<Vec<FieldElem>> {
        if !self.cycles.span_contains(v) {
            return None;
        }
        let basis = self.reps.hstack(&self.boundaries);
        let coords = basis.coords_in(v)?;
        Some(coords[..self.reps.cols()].to_vec())
    }
}

/// A chain morphism, stored over the union of the two degree ranges.
#[derive(Clone)]
pub struct ComplexMorphism {
    pub source: BoundedComplex,
    pub target: BoundedComplex,
    lo: i64,
    components: Vec<Mat>, // components[i]: X_{lo+i} -> Y_{lo+i}
}

impl ComplexMorphism {
    pub fn new(
        source: BoundedComplex,
        target: BoundedComplex,
        lo: i64,
        components: Vec<Mat>,
    ) -> Result<ComplexMorphism> {
        let m = ComplexMorphism {
            source,
            target,
            lo,
            components,
        };
        m.verify()?;
        Ok(m)
    }

    pub fn identity(x: &BoundedComplex) -> ComplexMorphism {
        let comps = (x.lo()..=x.hi())
            .map(|n| Mat::identity(x.algebra().field(), x.dim_at(n)))
            .collect();
        ComplexMorphism {
            source: x.clone(),
            target: x.clone(),
            lo: x.lo(),
            components: comps,
        }
    }

    pub fn component_at(&self, n: i64) -> Mat {
        let idx = n - self.lo;
        if idx < 0 || idx as usize >= self.components.len() {
            Mat::zero(
                self.source.algebra().field(),
                self.target.dim_at(n),
                self.source.dim_at(n),
            )
        } else {
            self.components[idx as usize].clone()
        }
    }

    fn verify(&self) -> Result<()> {
        let a = self.source.algebra();
        if self.target.algebra() != a {
            return Err(Error::Invariant(
                "morphism between complexes over different algebras".into(),
            ));
        }
        let lo = self.source.lo().min(self.target.lo());
        let hi = self.source.hi().max(self.target.hi());
        for n in lo..=hi {
            let f_n = self.component_at(n);
            if f_n.rows() != self.target.dim_at(n) || f_n.cols() != self.source.dim_at(n) {
                return Err(Error::Invariant(format!(
                    "component at degree {n} has wrong shape"
                )));
            }
            for b in 0..a.dim() {
                if f_n.mul(self.source.module_at(n).action(b))
                    != self.target.module_at(n).action(b).mul(&f_n)
                {
                    return Err(Error::Invariant(format!(
                        "component at degree {n} is not A-linear"
                    )));
                }
            }
            // commuting square d^Y f_n = f_{n-1} d^X
            let lhs = self.target.diff_at(n).mul(&f_n);
            let rhs = self.component_at(n - 1).mul(&self.source.diff_at(n));
            if lhs != rhs {
                return Err(Error::Invariant(format!(
                    "square at degree {n} does not commute"
                )));
            }
        }
        Ok(())
    }

    /// Induced map on homology at degree n, as a matrix in the chosen
    /// representative bases.
    pub fn homology_map(&self, n: i64) -> Mat {
        let hx = self.source.homology(n);
        let hy = self.target.homology(n);
        let f = self.source.algebra().field();
        let mut m = Mat::zero(f, hy.module.dim(), hx.module.dim());
        let comp = self.component_at(n);
        for j in 0..hx.reps.cols() {
            let img = comp.mul(&hx.reps.col(j));
            let cls = hy.class_of(&img).expect("morphism sends cycles to cycles");
            for (r, c) in cls.iter().enumerate() {
                m.set(r, j, c.clone());
            }
        }
        m
    }

    /// Mapping cone with d(x, y) = (-dx, dy + f(x)).
    pub fn cone(&self) -> BoundedComplex {
        let a = self.source.algebra().clone();
        let f = a.field();
        let lo = (self.source.lo() + 1).min(self.target.lo());
        let hi = (self.source.hi() + 1).max(self.target.hi());
        let mut modules = Vec::new();
        for n in lo..=hi {
            let x_part = self.source.module_at(n - 1);
            let y_part = self.target.module_at(n);
            if x_part.dim() == 0 && y_part.dim() == 0 {
                modules.push(FModule::zero(&a));
            } else if x_part.dim() == 0 {
                modules.push(y_part);
            } else if y_part.dim() == 0 {
                modules.push(x_part);
            } else {
                modules.push(FModule::direct_sum(&[x_part, y_part]).0);
            }
        }
        let mut diffs = Vec::new();
        for n in lo + 1..=hi {
            let xd = self.source.dim_at(n - 1);
            let yd = self.target.dim_at(n);
            let xd_prev = self.source.dim_at(n - 2);
            let yd_prev = self.target.dim_at(n - 1);
            let dx = self.source.diff_at(n - 1);
            let dy = self.target.diff_at(n);
            let fx = self.component_at(n - 1);
            let d = Mat::from_fn(f, xd_prev + yd_prev, xd + yd, |r, c| {
                if r < xd_prev && c < xd {
                    f.neg(dx.get(r, c))
                } else if r >= xd_prev && c < xd {
                    fx.get(r - xd_prev, c).clone()
                } else if r >= xd_prev && c >= xd {
                    dy.get(r - xd_prev, c - xd).clone()
                } else {
                    f.zero()
                }
            });
            diffs.push(d);
        }
        BoundedComplex::new(a, lo, modules, diffs).expect("cone is a complex")
    }
}

/// Quasi-isomorphism test: all induced homology maps bijective, and the
/// mapping cone exact. Both are computed; disagreement is a hard failure.
pub fn is_quasi_iso(alpha: &ComplexMorphism) -> Result<bool> {
    let lo = alpha.source.lo().min(alpha.target.lo());
    let hi = alpha.source.hi().max(alpha.target.hi());
    let mut via_homology = true;
    for n in lo..=hi {
        let m = alpha.homology_map(n);
        if m.rows() != m.cols() || !m.is_invertible() {
            via_homology = false;
            break;
        }
    }
    let via_cone = alpha.cone().is_exact();
    if via_homology != via_cone {
        return Err(Error::EquivalenceViolation {
            label: "quasi-isomorphism routes".into(),
            witness: format!("homology route says {via_homology}, cone route says {via_cone}"),
        });
    }
    Ok(via_homology)
}

/// The Hom complex Hom(X, Y) with Hom_n = product over p of Hom(X_p, Y_{p+n})
/// and the cited sign convention. Blocks record, per degree, which p each
/// coordinate slice belongs to.
pub struct HomComplex {
    pub complex: BoundedComplex,
    pub lo: i64,
    /// `blocks[i]` for degree lo+i: list of (p, hom space Hom(X_p, Y_{p+n})).
    pub blocks: Vec<Vec<(i64, HomSpace)>>,
}

pub fn hom_complex(x: &BoundedComplex, y: &BoundedComplex) -> HomComplex {
    assert!(x.algebra() == y.algebra());
    let a = x.algebra().clone();
    let f = a.field().clone();
    let lo = y.lo() - x.hi();
    let hi = y.hi() - x.lo();
    let mut blocks: Vec<Vec<(i64, HomSpace)>> = Vec::new();
    let mut modules: Vec<FModule> = Vec::new();
    for n in lo..=hi {
        let mut degree_blocks = Vec::new();
        let mut parts: Vec<FModule> = Vec::new();
        for p in x.lo()..=x.hi() {
            let xp = x.module_at(p);
            let ypn = y.module_at(p + n);
            if xp.dim() == 0 || ypn.dim() == 0 {
                degree_blocks.push((
                    p,
                    HomSpace {
                        source_dim: xp.dim(),
                        target_dim: ypn.dim(),
                        basis: vec![],
                    },
                ));
                continue;
            }
            let (hm, hs) = hom_module(&xp, &ypn);
            parts.push(hm);
            degree_blocks.push((p, hs));
        }
        let module = if parts.is_empty() {
            FModule::zero(&a)
        } else {
            FModule::direct_sum(&parts).0
        };
        modules.push(module);
        blocks.push(degree_blocks);
    }
    // differential from degree n (index i) to degree n-1 (index i-1)
    let offsets = |i: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut acc = 0;
        for (_, hs) in &blocks[i] {
            out.push(acc);
            acc += hs.dim();
        }
        out.push(acc);
        out
    };
    let block_pos = |i: usize, p: i64| -> usize {
        blocks[i]
            .iter()
            .position(|(q, _)| *q == p)
            .expect("block present")
    };
    let mut diffs = Vec::new();
    for i in 1..modules.len() {
        let n = lo + i as i64;
        let src_off = offsets(i);
        let tgt_off = offsets(i - 1);
        let mut d = Mat::zero(&f, modules[i - 1].dim(), modules[i].dim());
        let sign_flip = n.rem_euclid(2) == 1; // -(-1)^n: subtract when n even
        for (bi, (p, hs)) in blocks[i].iter().enumerate() {
            let p = *p;
            for (j, fmat) in hs.basis.iter().enumerate() {
                let col = src_off[bi] + j;
                // term 1: d^Y_{p+n} . f_p lands in Hom(X_p, Y_{p+n-1})
                let post = y.diff_at(p + n).mul(fmat);
                if !post.is_zero() {
                    let tb = block_pos(i - 1, p);
                    let coords = blocks[i - 1][tb].1.coords_of(&post).expect("A-linear");
                    for (r, c) in coords.iter().enumerate() {
                        let cur = d.get(tgt_off[tb] + r, col).clone();
                        d.set(tgt_off[tb] + r, col, f.add(&cur, c));
                    }
                }
                // term 2: -(-1)^n f_p . d^X_{p+1} lands in Hom(X_{p+1}, Y_{p+n})
                if p + 1 <= x.hi() {
                    let pre = fmat.mul(&x.diff_at(p + 1));
                    if !pre.is_zero() {
                        let tb = block_pos(i - 1, p + 1);
                        let coords = blocks[i - 1][tb].1.coords_of(&pre).expect("A-linear");
                        for (r, c) in coords.iter().enumerate() {
                            let cur = d.get(tgt_off[tb] + r, col).clone();
                            let val = if sign_flip {
                                f.add(&cur, c)
                            } else {
                                f.sub(&cur, c)
                            };
                            d.set(tgt_off[tb] + r, col, val);
                        }
                    }
                }
            }
        }
        diffs.push(d);
    }
    let complex =
        BoundedComplex::new(a, lo, modules, diffs).expect("Hom complex satisfies d^2 = 0");
    HomComplex {
        complex,
        lo,
        blocks,
    }
}

/// The morphism Hom(P, alpha): Hom(P, X) -> Hom(P, Y), post-composition in
/// each block.
pub fn hom_complex_map(p: &BoundedComplex, alpha: &ComplexMorphism) -> Result<ComplexMorphism> {
    let hx = hom_complex(p, &alpha.source);
    let hy = hom_complex(p, &alpha.target);
    let f = p.algebra().field().clone();
    let lo = hx.lo.min(hy.lo);
    let hi = (hx.lo + hx.blocks.len() as i64 - 1).max(hy.lo + hy.blocks.len() as i64 - 1);
    let mut comps = Vec::new();
    for n in lo..=hi {
        let rows = hy.complex.dim_at(n);
        let cols = hx.complex.dim_at(n);
        let mut m = Mat::zero(&f, rows, cols);
        if rows > 0 && cols > 0 {
            let xi = (n - hx.lo) as usize;
            let yi = (n - hy.lo) as usize;
            let mut src_off = 0;
            for (pp, hs) in &hx.blocks[xi] {
                let tgt_block = hy.blocks[yi]
                    .iter()
                    .position(|(q, _)| q == pp)
                    .expect("matching block");
                let tgt_off: usize = hy.blocks[yi][..tgt_block]
                    .iter()
                    .map(|(_, h)| h.dim())
                    .sum();
                let thom = &hy.blocks[yi][tgt_block].1;
                for (j, fmat) in hs.basis.iter().enumerate() {
                    let img = alpha.component_at(pp + n).mul(fmat);
                    let coords = thom.coords_of(&img).ok_or_else(|| {
                        Error::Invariant("composite not in target hom space".into())
                    })?;
                    for (r, c) in coords.iter().enumerate() {
                        m.set(tgt_off + r, src_off + j, c.clone());
                    }
                }
                src_off += hs.dim();
            }
        }
        comps.push(m);
    }
    ComplexMorphism::new(hx.complex, hy.complex, lo, comps)
}

/// Koszul complex on a sequence of elements of m, realized on the standard
/// exterior basis ordered lexicographically.
pub fn koszul(a: &Algebra, xs: &[AlgElem]) -> BoundedComplex {
    let m = xs.len();
    let rad = a.radical();
    for x in xs {
        assert!(
            rad.span_contains(&Mat::col_vec(a.field(), x.clone())),
            "Koszul sequence must lie in the maximal ideal"
        );
    }
    // subsets of {0..m} of size j, lex ordered
    let mut subsets: Vec<Vec<Vec<usize>>> = vec![vec![vec![]]];
    for j in 1..=m {
        let mut level = Vec::new();
        gen_combinations(m, j, &mut vec![], 0, &mut level);
        subsets.push(level);
    }
    let modules: Vec<FModule> = (0..=m)
        .map(|j| FModule::free(a, subsets[j].len()))
        .collect();
    let mut diffs = Vec::new();
    for j in 1..=m {
        let rows = subsets[j - 1].len();
        let cols = subsets[j].len();
        let mut entries = vec![a.zero_elem(); rows * cols];
        for (c, s) in subsets[j].iter().enumerate() {
            for (l, &il) in s.iter().enumerate() {
                let mut t = s.clone();
                t.remove(l);
                let r = subsets[j - 1].iter().position(|u| *u == t).unwrap();
                let coeff = if l % 2 == 0 {
                    xs[il].clone()
                } else {
                    a.scale_elem(&a.field().from_i64(-1), &xs[il])
                };
                entries[r * cols + c] = a.add_elems(&entries[r * cols + c], &coeff);
            }
        }
        let am = AlgMat {
            algebra: a.clone(),
            rows,
            cols,
            entries,
        };
        diffs.push(am.to_k_matrix());
    }
    // chain indexing: K_j in degree j, differentials K_j -> K_{j-1}
    BoundedComplex::new(a.clone(), 0, modules, diffs).expect("Koszul complex")
}

fn gen_combinations(
    m: usize,
    j: usize,
    cur: &mut Vec<usize>,
    start: usize,
    out: &mut Vec<Vec<usize>>,
) {
    if cur.len() == j {
        out.push(cur.clone());
        return;
    }
    for i in start..m {
        cur.push(i);
        gen_combinations(m, j, cur, i + 1, out);
        cur.pop();
    }
}

/// Degreewise base change of a complex along phi, with the degreewise natural
/// maps iota. Differentials are induced on the quotients by id_S tensor d.
pub fn tensor_complex(phi: &AlgebraMap, x: &BoundedComplex) -> (BoundedComplex, Vec<Mat>) {
    let s = phi.target().clone();
    let f = s.field().clone();
    let ns = s.dim();
    let mut modules = Vec::new();
    let mut projs = Vec::new();
    let mut iotas = Vec::new();
    for i in 0..=(x.hi() - x.lo()) {
        let xm = x.module_at(x.lo() + i);
        let (q, proj, iota) = FModule::base_change_with_maps(phi, &xm);
        modules.push(q);
        projs.push(proj);
        iotas.push(iota);
    }
    let mut diffs = Vec::new();
    for i in 1..modules.len() {
        let n = x.lo() + i as i64;
        let d = x.diff_at(n);
        let nm_src = x.dim_at(n);
        let nm_tgt = x.dim_at(n - 1);
        // id_S tensor d on the big spaces, slot (a, v) at a*nm + v
        let big = Mat::from_fn(&f, ns * nm_tgt, ns * nm_src, |r, c| {
            if r / nm_tgt == c / nm_src {
                d.get(r % nm_tgt, c % nm_src).clone()
            } else {
                f.zero()
            }
        });
        // induced map on quotients: proj_tgt . big . lift_src
        let lift = projs[i]
            .solve(&Mat::identity(&f, modules[i].dim()))
            .expect("projection is onto");
        diffs.push(projs[i - 1].mul(&big).mul(&lift));
    }
    let complex = BoundedComplex::new(s, x.lo(), modules, diffs).expect("base-changed complex");
    (complex, iotas)
}

/// The natural morphism omega: X -> S tensor_R X viewed inside R-complexes
/// (the target is restricted back along phi). For a free phi with
/// finite-dimensional homology, omega is a quasi-isomorphism exactly when
/// the induced residue map k -> S/mS is an isomorphism, i.e. when phi
/// satisfies (dagger).
pub fn omega_morphism(phi: &AlgebraMap, x: &BoundedComplex) -> Result<ComplexMorphism> {
    let (sx, iotas) = tensor_complex(phi, x);
    let restricted_modules: Vec<FModule> = (0..=(sx.hi() - sx.lo()))
        .map(|i| FModule::restrict(phi, &sx.module_at(sx.lo() + i)))
        .collect();
    let diffs: Vec<Mat> = (1..restricted_modules.len())
        .map(|i| sx.diff_at(sx.lo() + i as i64))
        .collect();
    let target = BoundedComplex::new(phi.source().clone(), sx.lo(), restricted_modules, diffs)?;
    ComplexMorphism::new(x.clone(), target, x.lo(), iotas)
}

/// Free-to-complex adapter: the resolution F_L -> ... -> F_0 as a complex in
/// degrees 0..=L.
pub fn resolution_complex(res: &Resolution) -> BoundedComplex {
    let a = res.module.algebra().clone();
    let modules: Vec<FModule> = res.betti.iter().map(|&b| FModule::free(&a, b)).collect();
    let diffs: Vec<Mat> = res.diffs.iter().map(|d| d.to_k_matrix()).collect();
    BoundedComplex::new(a, 0, modules, diffs).expect("resolution complex")
}

/// Prop-2.4-style harness: if Hom(P, alpha) is a quasi-isomorphism for a
/// bounded nonzero complex P of finitely generated frees, then alpha must be
/// one. Violation of the implication is a hard error.
pub struct HarnessReport {
    pub hom_p_alpha_qis: bool,
    pub alpha_qis: bool,
}

pub fn projectivization_harness(
    alpha: &ComplexMorphism,
    p: &BoundedComplex,
) -> Result<HarnessReport> {
    if !p.is_degreewise_free() {
        return Err(Error::Invariant("P must be degreewise free".into()));
    }
    if p.total_homology_dim() == 0 {
        return Err(Error::Invariant("P must be nonzero in homology".into()));
    }
    let hom_map = hom_complex_map(p, alpha)?;
    let hom_p_alpha_qis = is_quasi_iso(&hom_map)?;
    let alpha_qis = is_quasi_iso(alpha)?;
    if hom_p_alpha_qis && !alpha_qis {
        return Err(Error::EquivalenceViolation {
            label: "Hom(P, alpha) qis must force alpha qis".into(),
            witness: format!(
                "P range [{},{}], alpha source range [{},{}]",
                p.lo(),
                p.hi(),
                alpha.source.lo(),
                alpha.source.hi()
            ),
        });
    }
    Ok(HarnessReport {
        hom_p_alpha_qis,
        alpha_qis,
    })
}
