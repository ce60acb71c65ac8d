//! Finitely generated modules over a local algebra, given by one action
//! matrix per algebra basis element on a k-basis of the module.
//!
//! The constructors here (free modules, submodules, quotients, presentations,
//! restriction and base change along an algebra map) produce verified module
//! structures; `hom_space` solves the commutant linear system exactly.

use crate::algebra::{AlgElem, Algebra, AlgebraMap};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::mat::Mat;
use crate::rng::Rng;

#[derive(Clone, PartialEq, Eq)]
pub struct FModule {
    algebra: Algebra,
    dim: usize,
    action: Vec<Mat>,
}

impl std::fmt::Debug for FModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "FModule(dim {} over dim-{} algebra)",
            self.dim,
            self.algebra.dim()
        )
    }
}

impl FModule {
    /// Construct from action matrices, verifying the module axioms in full.
    pub fn new(algebra: Algebra, action: Vec<Mat>) -> Result<FModule> {
        if action.len() != algebra.dim() {
            return Err(Error::Invariant(
                "one action matrix per algebra basis element".into(),
            ));
        }
        let dim = action.first().map_or(0, |m| m.rows());
        for m in &action {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::Invariant(
                    "action matrices must be square of equal size".into(),
                ));
            }
        }
        let md = FModule {
            algebra,
            dim,
            action,
        };
        md.verify()?;
        Ok(md)
    }

    pub(crate) fn from_action_unchecked(algebra: Algebra, action: Vec<Mat>) -> FModule {
        let dim = action.first().map_or(0, |m| m.rows());
        let md = FModule {
            algebra,
            dim,
            action,
        };
        debug_assert!(md.action[md.algebra.unit_index()].is_identity());
        md
    }

    pub fn verify(&self) -> Result<()> {
        let a = &self.algebra;
        if !self.action[a.unit_index()].is_identity() {
            return Err(Error::Invariant("action of 1 is not the identity".into()));
        }
        for i in 0..a.dim() {
            for j in 0..=i {
                let lhs = self.action[i].mul(&self.action[j]);
                let mut rhs = Mat::zero(a.field(), self.dim, self.dim);
                for k in 0..a.dim() {
                    let c = a.left_mul(i).get(k, j);
                    if a.field().is_zero(c) {
                        continue;
                    }
                    rhs = rhs.add(&self.action[k].scale(c));
                }
                if lhs != rhs {
                    return Err(Error::Invariant(format!(
                        "action incompatible with structure constants at pair ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn action(&self, i: usize) -> &Mat {
        &self.action[i]
    }

    pub fn zero(algebra: &Algebra) -> FModule {
        let action = (0..algebra.dim())
            .map(|_| Mat::zero(algebra.field(), 0, 0))
            .collect();
        FModule {
            algebra: algebra.clone(),
            dim: 0,
            action,
        }
    }

    /// Free module A^rank; basis slot (copy i, algebra basis a) sits at index
    /// i * dim(A) + a, so each copy's coordinate block is an element of A.
    pub fn free(algebra: &Algebra, rank: usize) -> FModule {
        let n = algebra.dim();
        let f = algebra.field();
        let mut action = Vec::with_capacity(n);
        for b in 0..n {
            let blk = algebra.left_mul(b);
            let m = Mat::from_fn(f, rank * n, rank * n, |r, c| {
                if r / n == c / n {
                    blk.get(r % n, c % n).clone()
                } else {
                    f.zero()
                }
            });
            action.push(m);
        }
        FModule {
            algebra: algebra.clone(),
            dim: rank * n,
            action,
        }
    }

    pub fn regular(algebra: &Algebra) -> FModule {
        FModule::free(algebra, 1)
    }

    /// The residue module A/m.
    pub fn residue(algebra: &Algebra) -> FModule {
        let reg = FModule::regular(algebra);
        reg.quotient(algebra.radical()).0
    }

    /// Standard-basis vector of the i-th generator of a free module.
    pub fn free_generator(algebra: &Algebra, rank: usize, i: usize) -> Mat {
        let f = algebra.field();
        let mut v = Mat::zero(f, rank * algebra.dim(), 1);
        v.set(i * algebra.dim() + algebra.unit_index(), 0, f.one());
        v
    }

    /// Action operator of an arbitrary algebra element.
    pub fn action_of(&self, elem: &[FieldElem]) -> Mat {
        let f = self.algebra.field();
        let mut m = Mat::zero(f, self.dim, self.dim);
        for (i, c) in elem.iter().enumerate() {
            if f.is_zero(c) {
                continue;
            }
            m = m.add(&self.action[i].scale(c));
        }
        m
    }

    /// Smallest action-stable subspace containing the given columns.
    pub fn saturate(&self, gens: &Mat) -> Mat {
        let mut span = gens.col_basis();
        loop {
            let mut grown = span.clone();
            for b in 0..self.algebra.dim() {
                grown = grown.span_union(&self.action[b].mul(&span));
            }
            if grown.cols() == span.cols() {
                return span;
            }
            span = grown;
        }
    }

    pub fn is_submodule(&self, cols: &Mat) -> bool {
        (0..self.algebra.dim()).all(|b| cols.span_contains_all(&self.action[b].mul(cols)))
    }

    /// Submodule generated by the given columns, with its inclusion map.
    pub fn submodule(&self, gens: &Mat) -> (FModule, Mat) {
        let basis = self.saturate(gens);
        let sub_dim = basis.cols();
        let mut action = Vec::with_capacity(self.algebra.dim());
        for b in 0..self.algebra.dim() {
            let image = self.action[b].mul(&basis);
            let coords = basis.solve(&image).expect("submodule stable under action");
            debug_assert_eq!(coords.rows(), sub_dim);
            action.push(coords);
        }
        (
            FModule::from_action_unchecked(self.algebra.clone(), action),
            basis,
        )
    }

    /// Quotient by the submodule generated by the given columns, with the
    /// projection map.
    pub fn quotient(&self, gens: &Mat) -> (FModule, Mat) {
        let f = self.algebra.field();
        let sub = self.saturate(gens);
        // complement by standard basis vectors
        let mut span = sub.clone();
        let mut picked = Vec::new();
        for i in 0..self.dim {
            if span.cols() == self.dim {
                break;
            }
            let mut e = Mat::zero(f, self.dim, 1);
            e.set(i, 0, f.one());
            if !span.span_contains(&e) {
                span = span.hstack(&e);
                picked.push(i);
            }
        }
        let qdim = picked.len();
        let mut comp = Mat::zero(f, self.dim, qdim);
        for (c, &i) in picked.iter().enumerate() {
            comp.set(i, c, f.one());
        }
        let basis = comp.hstack(&sub);
        // projection: ambient coords -> quotient coords
        let mut proj = Mat::zero(f, qdim, self.dim);
        for i in 0..self.dim {
            let mut e = Mat::zero(f, self.dim, 1);
            e.set(i, 0, f.one());
            let coords = basis.coords_in(&e).expect("basis spans ambient");
            for r in 0..qdim {
                proj.set(r, i, coords[r].clone());
            }
        }
        let mut action = Vec::with_capacity(self.algebra.dim());
        for b in 0..self.algebra.dim() {
            action.push(proj.mul(&self.action[b]).mul(&comp));
        }
        (
            FModule::from_action_unchecked(self.algebra.clone(), action),
            proj,
        )
    }

    /// Direct sum with the injection of each part.
    pub fn direct_sum(parts: &[FModule]) -> (FModule, Vec<Mat>) {
        assert!(!parts.is_empty());
        let algebra = parts[0].algebra.clone();
        let f = algebra.field();
        let total: usize = parts.iter().map(|p| p.dim).sum();
        let mut action = Vec::with_capacity(algebra.dim());
        for b in 0..algebra.dim() {
            let mut m = Mat::zero(f, total, total);
            let mut off = 0;
            for p in parts {
                assert!(p.algebra == algebra, "direct sum over mixed algebras");
                for i in 0..p.dim {
                    for j in 0..p.dim {
                        m.set(off + i, off + j, p.action[b].get(i, j).clone());
                    }
                }
                off += p.dim;
            }
            action.push(m);
        }
        let mut injections = Vec::with_capacity(parts.len());
        let mut off = 0;
        for p in parts {
            let inj = Mat::from_fn(f, total, p.dim, |r, c| {
                if r == off + c {
                    f.one()
                } else {
                    f.zero()
                }
            });
            injections.push(inj);
            off += p.dim;
        }
        (FModule::from_action_unchecked(algebra, action), injections)
    }

    /// Module presented by generators and relation rows: A^g modulo the
    /// submodule generated by the rows, each row a g-tuple of algebra
    /// elements.
    pub fn present(
        algebra: &Algebra,
        gens: usize,
        rows: &[Vec<AlgElem>],
    ) -> Result<(FModule, Mat)> {
        let n = algebra.dim();
        let f = algebra.field();
        let free = FModule::free(algebra, gens);
        let mut rel = Mat::zero(f, gens * n, rows.len());
        for (c, row) in rows.iter().enumerate() {
            if row.len() != gens {
                return Err(Error::Invariant(format!(
                    "relation row has {} entries, expected {gens}",
                    row.len()
                )));
            }
            for (i, a) in row.iter().enumerate() {
                if a.len() != n {
                    return Err(Error::Invariant(
                        "relation entry has wrong coordinate length".into(),
                    ));
                }
                for (r, x) in a.iter().enumerate() {
                    rel.set(i * n + r, c, x.clone());
                }
            }
        }
        Ok(free.quotient(&rel))
    }

    /// Cyclic module A / (elements).
    pub fn cyclic(algebra: &Algebra, ideal_elems: &[AlgElem]) -> Result<(FModule, Mat)> {
        let rows: Vec<Vec<AlgElem>> = ideal_elems.iter().map(|e| vec![e.clone()]).collect();
        FModule::present(algebra, 1, &rows)
    }

    /// Restriction of an S-module along phi: R -> S.
    pub fn restrict(phi: &AlgebraMap, n_mod: &FModule) -> FModule {
        assert!(
            n_mod.algebra == *phi.target(),
            "module not over the map target"
        );
        let r = phi.source();
        let mut action = Vec::with_capacity(r.dim());
        for i in 0..r.dim() {
            action.push(n_mod.action_of(&phi.apply(&r.basis_elem(i))));
        }
        FModule {
            algebra: r.clone(),
            dim: n_mod.dim,
            action,
        }
    }

    /// Base change S tensor_R M along phi: R -> S, with the natural map
    /// iota: M -> S tensor_R M, x -> 1 tensor x.
    pub fn base_change(phi: &AlgebraMap, m_mod: &FModule) -> (FModule, Mat) {
        let (q, _, iota) = FModule::base_change_with_maps(phi, m_mod);
        (q, iota)
    }

    /// Like [`FModule::base_change`] but also returns the projection from the
    /// plain tensor space S tensor_k M (slot (a, x) at a * dim M + x) onto
    /// the quotient, which is what induced maps on base changes factor
    /// through.
    pub fn base_change_with_maps(phi: &AlgebraMap, m_mod: &FModule) -> (FModule, Mat, Mat) {
        assert!(
            m_mod.algebra == *phi.source(),
            "module not over the map source"
        );
        let r = phi.source();
        let s = phi.target();
        let f = s.field();
        let ns = s.dim();
        let nm = m_mod.dim;
        let big = ns * nm; // slot (a, x) at a * nm + x
                           // S-action on S tensor_k M through the left factor
        let mut action0 = Vec::with_capacity(ns);
        for b in 0..ns {
            let lm = s.left_mul(b);
            let m = Mat::from_fn(f, big, big, |rr, cc| {
                if rr % nm == cc % nm {
                    lm.get(rr / nm, cc / nm).clone()
                } else {
                    f.zero()
                }
            });
            action0.push(m);
        }
        let t0 = FModule::from_action_unchecked(s.clone(), action0);
        // relations (s_a phi(b_c)) tensor m_x - s_a tensor (b_c m_x)
        let mut rels = Mat::zero(f, big, ns * r.dim() * nm);
        let mut col = 0;
        for a in 0..ns {
            for c in 0..r.dim() {
                let u = s.mul_elems(&s.basis_elem(a), &phi.apply(&r.basis_elem(c)));
                for x in 0..nm {
                    for (i, ui) in u.iter().enumerate() {
                        if !f.is_zero(ui) {
                            let cur = rels.get(i * nm + x, col).clone();
                            rels.set(i * nm + x, col, f.add(&cur, ui));
                        }
                    }
                    for y in 0..nm {
                        let v = m_mod.action[c].get(y, x);
                        if !f.is_zero(v) {
                            let cur = rels.get(a * nm + y, col).clone();
                            rels.set(a * nm + y, col, f.sub(&cur, v));
                        }
                    }
                    col += 1;
                }
            }
        }
        let (q, proj) = t0.quotient(&rels);
        // iota: x -> class of 1 tensor x
        let mut emb = Mat::zero(f, big, nm);
        for x in 0..nm {
            emb.set(s.unit_index() * nm + x, x, f.one());
        }
        let iota = proj.mul(&emb);
        (q, proj, iota)
    }

    /// Exact basis of Ann(M) = {a in A : a M = 0} and the support flag.
    pub fn annihilator(&self) -> (Mat, bool) {
        let a = &self.algebra;
        let f = a.field();
        let mut sys = Mat::zero(f, self.dim * self.dim, a.dim());
        for i in 0..a.dim() {
            for r in 0..self.dim {
                for c in 0..self.dim {
                    sys.set(r * self.dim + c, i, self.action[i].get(r, c).clone());
                }
            }
        }
        (sys.kernel().col_basis(), self.dim > 0)
    }

    /// Strictly decreasing chain M, mM, m^2 M, ..., 0 of subspace bases.
    pub fn radical_filtration(&self) -> Vec<Mat> {
        let a = &self.algebra;
        let f = a.field();
        let rad = a.radical();
        let mut chain = vec![Mat::identity(f, self.dim)];
        loop {
            let prev = chain.last().unwrap();
            if prev.cols() == 0 {
                break;
            }
            let mut gens = Mat::zero(f, self.dim, 0);
            for c in 0..rad.cols() {
                let op = self.action_of(&rad.col_entries(c));
                gens = gens.hstack(&op.mul(prev));
            }
            let next = gens.col_basis();
            assert!(
                next.cols() < prev.cols(),
                "radical filtration must strictly decrease"
            );
            chain.push(next);
        }
        chain
    }

    /// Minimal generators: a lift of a basis of M/mM, chosen greedily from
    /// the standard basis and current subspace columns.
    pub fn minimal_generators(&self) -> Mat {
        let f = self.algebra.field();
        let filt = self.radical_filtration();
        let m_m = if filt.len() > 1 {
            filt[1].clone()
        } else {
            Mat::zero(f, self.dim, 0)
        };
        let mut span = m_m;
        let mut picked = Mat::zero(f, self.dim, 0);
        for i in 0..self.dim {
            if span.cols() == self.dim {
                break;
            }
            let mut e = Mat::zero(f, self.dim, 1);
            e.set(i, 0, f.one());
            if !span.span_contains(&e) {
                span = span.hstack(&e);
                picked = picked.hstack(&e);
            }
        }
        picked
    }

    /// Random small module: a quotient of a random free module by a random
    /// submodule, deterministic in the rng stream.
    pub fn random_module(algebra: &Algebra, rng: &mut Rng, max_dim: usize) -> FModule {
        let f = algebra.field();
        loop {
            let rank = 1 + rng.below(2) as usize;
            let free = FModule::free(algebra, rank);
            let ngens = rng.below(3) as usize;
            let mut gens = Mat::zero(f, free.dim(), ngens);
            for c in 0..ngens {
                for r in 0..free.dim() {
                    gens.set(r, c, f.random_elem(rng));
                }
            }
            let (q, _) = free.quotient(&gens);
            if q.dim() > 0 && q.dim() <= max_dim {
                return q;
            }
            if q.dim() == 0 && max_dim == 0 {
                return q;
            }
        }
    }
}

/// Exact basis of the space of A-linear maps M -> N, found by solving the
/// commutation system f rho_M(b) = rho_N(b) f over all algebra basis
/// elements.
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub source_dim: usize,
    pub target_dim: usize,
    pub basis: Vec<Mat>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of a given map in the hom basis.
    pub fn coords_of(&self, f: &Mat) -> Option<Vec<FieldElem>> {
        if self.basis.is_empty() {
            return if f.is_zero() { Some(vec![]) } else { None };
        }
        let field = self.basis[0].field().clone();
        let rows = self.target_dim * self.source_dim;
        let mut stacked = Mat::zero(&field, rows, self.basis.len());
        for (c, b) in self.basis.iter().enumerate() {
            for i in 0..self.target_dim {
                for j in 0..self.source_dim {
                    stacked.set(i * self.source_dim + j, c, b.get(i, j).clone());
                }
            }
        }
        let mut target = Mat::zero(&field, rows, 1);
        for i in 0..self.target_dim {
            for j in 0..self.source_dim {
                target.set(i * self.source_dim + j, 0, f.get(i, j).clone());
            }
        }
        let x = stacked.solve(&target)?;
        Some(x.col_entries(0))
    }

    /// Linear combination of the basis.
    pub fn combination(&self, coeffs: &[FieldElem]) -> Mat {
        assert_eq!(coeffs.len(), self.basis.len());
        let field = self.basis[0].field().clone();
        let mut acc = Mat::zero(&field, self.target_dim, self.source_dim);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            acc = acc.add(&b.scale(c));
        }
        acc
    }
}

/// Hom_A(M, N) over the common algebra.
pub fn hom_space(m: &FModule, n: &FModule) -> HomSpace {
    assert!(m.algebra() == n.algebra(), "hom over mismatched algebras");
    // maps out of a free module need no solving: they are determined freely
    // by the generator values
    let alg = m.algebra();
    if m.dim() > 0 && m.dim() % alg.dim() == 0 {
        let rank = m.dim() / alg.dim();
        if *m == FModule::free(alg, rank) {
            return hom_space_from_free(alg, rank, n);
        }
    }
    let pairs: Vec<(Mat, Mat)> = m
        .algebra()
        .generating_elems()
        .iter()
        .map(|g| (m.action_of(g), n.action_of(g)))
        .collect();
    hom_space_commuting(m, n, &pairs)
}

/// Basis of Hom_A(A^rank, N): for each copy i and each basis vector v of N,
/// the map sending e_i b_a to b_a v.
fn hom_space_from_free(alg: &Algebra, rank: usize, n: &FModule) -> HomSpace {
    let f = alg.field();
    let nd = alg.dim();
    let src = rank * nd;
    let mut basis = Vec::with_capacity(rank * n.dim());
    for i in 0..rank {
        for v in 0..n.dim() {
            let mut mat = Mat::zero(f, n.dim(), src);
            for a in 0..nd {
                let col = n.action(a).col(v);
                for r in 0..n.dim() {
                    mat.set(r, i * nd + a, col.get(r, 0).clone());
                }
            }
            basis.push(mat);
        }
    }
    HomSpace {
        source_dim: src,
        target_dim: n.dim(),
        basis,
    }
}

/// Hom over R of two S-modules restricted along phi: maps commuting with the
/// R-action only.
pub fn hom_space_over(phi: &AlgebraMap, m: &FModule, n: &FModule) -> HomSpace {
    let pairs: Vec<(Mat, Mat)> = phi
        .source()
        .generating_elems()
        .iter()
        .map(|g| {
            let img = phi.apply(g);
            (m.action_of(&img), n.action_of(&img))
        })
        .collect();
    hom_space_commuting(m, n, &pairs)
}

fn hom_space_commuting(m: &FModule, n: &FModule, pairs: &[(Mat, Mat)]) -> HomSpace {
    let f = m.algebra().field();
    let nm = m.dim();
    let nn = n.dim();
    if nm == 0 || nn == 0 {
        return HomSpace {
            source_dim: nm,
            target_dim: nn,
            basis: vec![],
        };
    }
    let unknowns = nn * nm; // F[i][j], i < nn, j < nm, flattened i*nm + j
    let mut rows: Vec<Vec<FieldElem>> = Vec::new();
    for (am, an) in pairs {
        for r in 0..nn {
            for c in 0..nm {
                let mut row = vec![f.zero(); unknowns];
                // sum_k an[r,k] F[k,c] - sum_l F[r,l] am[l,c] = 0
                for k in 0..nn {
                    let coeff = an.get(r, k);
                    if !f.is_zero(coeff) {
                        let idx = k * nm + c;
                        row[idx] = f.add(&row[idx], coeff);
                    }
                }
                for l in 0..nm {
                    let coeff = am.get(l, c);
                    if !f.is_zero(coeff) {
                        let idx = r * nm + l;
                        row[idx] = f.sub(&row[idx], coeff);
                    }
                }
                if row.iter().any(|x| !f.is_zero(x)) {
                    rows.push(row);
                }
            }
        }
    }
    let ker = if rows.is_empty() {
        Mat::identity(f, unknowns)
    } else {
        Mat::from_rows(f, rows).kernel()
    };
    let mut basis = Vec::with_capacity(ker.cols());
    for c in 0..ker.cols() {
        let mat = Mat::from_fn(f, nn, nm, |i, j| ker.get(i * nm + j, c).clone());
        basis.push(mat);
    }
    HomSpace {
        source_dim: nm,
        target_dim: nn,
        basis,
    }
}

/// The A-module structure on Hom_A(M, N): (a f)(x) = a f(x). Returns the
/// module in hom-basis coordinates together with the hom space itself.
pub fn hom_module(m: &FModule, n: &FModule) -> (FModule, HomSpace) {
    let a = m.algebra();
    let f = a.field();
    // free source: (b . f_{(i,v)})(e_i) = b v = sum_w rho(b)[w,v] f_{(i,w)}
    if m.dim() > 0 && m.dim() % a.dim() == 0 {
        let rank = m.dim() / a.dim();
        if *m == FModule::free(a, rank) {
            let hs = hom_space_from_free(a, rank, n);
            let nd = n.dim();
            let mut action = Vec::with_capacity(a.dim());
            for b in 0..a.dim() {
                let mut mat = Mat::zero(f, hs.dim(), hs.dim());
                for i in 0..rank {
                    for v in 0..nd {
                        for w in 0..nd {
                            let c = n.action(b).get(w, v);
                            if !f.is_zero(c) {
                                mat.set(i * nd + w, i * nd + v, c.clone());
                            }
                        }
                    }
                }
                action.push(mat);
            }
            return (FModule::from_action_unchecked(a.clone(), action), hs);
        }
    }
    let hs = hom_space(m, n);
    let h = hs.dim();
    let mut action = Vec::with_capacity(a.dim());
    for b in 0..a.dim() {
        let mut mat = Mat::zero(f, h, h);
        for (j, fj) in hs.basis.iter().enumerate() {
            let image = n.action(b).mul(fj);
            let coords = hs.coords_of(&image).expect("Hom closed under action");
            for (i, c) in coords.iter().enumerate() {
                mat.set(i, j, c.clone());
            }
        }
        action.push(mat);
    }
    (FModule::from_action_unchecked(a.clone(), action), hs)
}
