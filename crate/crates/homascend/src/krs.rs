//! Krull-Remak-Schmidt decomposition and isomorphism testing.
//!
//! Splitting uses Fitting's lemma on a deterministic sequence of
//! endomorphisms (hom basis, pairwise sums and products), refined by the
//! eigenvalue splittings that the minimal polynomial's roots provide. Over
//! small finite fields an exhaustive idempotent search is the fallback
//! oracle. Indecomposable pieces are matched by the unit-composite criterion:
//! two indecomposables are isomorphic iff some composite g f of hom-basis
//! elements is invertible.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fmodule::{hom_space, FModule};
use crate::mat::{min_poly, Mat};
use crate::poly::Poly;

/// Cooperative cancellation for long-running decompositions: the caller
/// holds a clone and flips it; the search checks it between splits.
#[derive(Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> CancelToken {
        CancelToken::default()
    }
    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }
    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

/// Exhaustive idempotent search is attempted when the number of endomorphism
/// coefficient tuples is at most this bound.
pub const IDEMPOTENT_SEARCH_BOUND: u64 = 1 << 16;

/// Result of a full decomposition: M is isomorphic to the direct sum of the
/// pieces, in order, via `iso` (a change of basis from M to the sum).
pub struct Decomposition {
    pub pieces: Vec<FModule>,
    pub iso: Mat,
}

/// Decompose into indecomposables, sorted by (dimension, action fingerprint).
pub fn krs_decompose(m: &FModule) -> Decomposition {
    krs_decompose_cancellable(m, &CancelToken::new()).expect("fresh token never cancels")
}

/// Like [`krs_decompose`], interruptible between splits.
pub fn krs_decompose_cancellable(m: &FModule, token: &CancelToken) -> Result<Decomposition> {
    let f = m.algebra().field().clone();
    let mut parts = split_recursive(m, &Mat::identity(&f, m.dim()), token)?;
    parts.sort_by(|(a, _), (b, _)| (a.dim(), fingerprint(a)).cmp(&(b.dim(), fingerprint(b))));
    let mut cols = Mat::zero(&f, m.dim(), 0);
    for (_, incl) in &parts {
        cols = cols.hstack(incl);
    }
    let iso = cols.inverse().expect("decomposition basis is invertible");
    Ok(Decomposition {
        pieces: parts.into_iter().map(|(p, _)| p).collect(),
        iso,
    })
}

pub fn is_indecomposable(m: &FModule) -> bool {
    m.dim() > 0 && krs_decompose(m).pieces.len() == 1
}

/// pieces as (module, inclusion into the ambient M)
fn split_recursive(m: &FModule, incl: &Mat, token: &CancelToken) -> Result<Vec<(FModule, Mat)>> {
    if token.is_cancelled() {
        return Err(Error::Cancelled);
    }
    if m.dim() == 0 {
        return Ok(vec![]);
    }
    match find_split(m) {
        None => Ok(vec![(m.clone(), incl.clone())]),
        Some((k_cols, i_cols)) => {
            let (mk, bk) = m.submodule(&k_cols);
            let (mi, bi) = m.submodule(&i_cols);
            debug_assert_eq!(mk.dim() + mi.dim(), m.dim());
            let mut out = split_recursive(&mk, &incl.mul(&bk), token)?;
            out.extend(split_recursive(&mi, &incl.mul(&bi), token)?);
            Ok(out)
        }
    }
}

/// Search for a nontrivial direct-sum decomposition M = K + I given by the
/// Fitting split of some endomorphism.
fn find_split(m: &FModule) -> Option<(Mat, Mat)> {
    let f = m.algebra().field().clone();
    if m.dim() <= 1 {
        return None;
    }
    let hs = hom_space(m, m);
    if hs.dim() <= 1 {
        return None; // End = k, certified indecomposable
    }
    // deterministic endomorphism sequence
    let mut seq: Vec<Mat> = hs.basis.clone();
    for i in 0..hs.basis.len() {
        for j in 0..i {
            seq.push(hs.basis[i].add(&hs.basis[j]));
        }
    }
    for i in 0..hs.basis.len() {
        for j in 0..hs.basis.len() {
            if i != j {
                seq.push(hs.basis[i].mul(&hs.basis[j]));
            }
        }
    }
    for endo in &seq {
        if let Some(split) = fitting_split(m, endo) {
            return Some(split);
        }
        // eigenvalue refinement: split off generalized eigenspaces
        let mp = min_poly(endo);
        let poly = Poly::from_coeffs(&f, mp);
        for root in poly.squarefree_part().roots() {
            let shifted = endo.sub(&Mat::identity(&f, m.dim()).scale(&root));
            if let Some(split) = fitting_split(m, &shifted) {
                return Some(split);
            }
        }
    }
    // fallback: exhaustive idempotent search over small finite fields
    if let Some(elems) = f.enumerate() {
        let count = (elems.len() as u64).checked_pow(hs.dim() as u32);
        if count.is_some_and(|c| c <= IDEMPOTENT_SEARCH_BOUND) {
            let mut coeffs = vec![0usize; hs.dim()];
            loop {
                let e =
                    hs.combination(&coeffs.iter().map(|&i| elems[i].clone()).collect::<Vec<_>>());
                if !e.is_zero() && !e.is_identity() && e.mul(&e) == e {
                    let k = e.kernel().col_basis();
                    let i = e.col_basis();
                    if k.cols() > 0 && i.cols() > 0 {
                        return Some((k, i));
                    }
                }
                // odometer
                let mut pos = 0;
                loop {
                    if pos == coeffs.len() {
                        return None;
                    }
                    coeffs[pos] += 1;
                    if coeffs[pos] < elems.len() {
                        break;
                    }
                    coeffs[pos] = 0;
                    pos += 1;
                }
            }
        }
    }
    None
}

/// Fitting: M = ker(f^n) + im(f^n); nontrivial unless f is nilpotent or
/// invertible.
fn fitting_split(m: &FModule, endo: &Mat) -> Option<(Mat, Mat)> {
    let mut p = endo.clone();
    for _ in 1..m.dim() {
        p = p.mul(endo);
    }
    let k = p.kernel().col_basis();
    let i = p.col_basis();
    if k.cols() == 0 || i.cols() == 0 {
        return None;
    }
    debug_assert_eq!(k.cols() + i.cols(), m.dim());
    Some((k, i))
}

/// Deterministic ordering fingerprint; isomorphic modules presented on
/// different bases may differ, which only affects report ordering.
fn fingerprint(m: &FModule) -> Vec<String> {
    let mut out = Vec::new();
    let dims: Vec<usize> = m.radical_filtration().iter().map(|s| s.cols()).collect();
    out.push(format!("{dims:?}"));
    for b in 0..m.algebra().dim() {
        out.push(m.action(b).fmt_plain());
    }
    out
}

/// Isomorphism test with witness: decompose both sides and match
/// indecomposable pieces by the unit-composite criterion.
pub fn is_isomorphic(m: &FModule, n: &FModule) -> Option<Mat> {
    if m.algebra() != n.algebra() || m.dim() != n.dim() {
        return None;
    }
    let f = m.algebra().field().clone();
    if m.dim() == 0 {
        return Some(Mat::identity(&f, 0));
    }
    let dm = krs_decompose(m);
    let dn = krs_decompose(n);
    if dm.pieces.len() != dn.pieces.len() {
        return None;
    }
    let mut used = vec![false; dn.pieces.len()];
    // block isomorphism from the M-sum coordinates to the N-sum coordinates
    let total = m.dim();
    let mut block = Mat::zero(&f, total, total);
    let offsets_m: Vec<usize> = dm
        .pieces
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.dim();
            Some(o)
        })
        .collect();
    let offsets_n: Vec<usize> = dn
        .pieces
        .iter()
        .scan(0, |acc, p| {
            let o = *acc;
            *acc += p.dim();
            Some(o)
        })
        .collect();
    for (pi, piece) in dm.pieces.iter().enumerate() {
        let mut matched = false;
        for (qi, other) in dn.pieces.iter().enumerate() {
            if used[qi] || other.dim() != piece.dim() {
                continue;
            }
            if let Some(w) = indecomposable_iso(piece, other) {
                used[qi] = true;
                matched = true;
                for r in 0..other.dim() {
                    for c in 0..piece.dim() {
                        block.set(offsets_n[qi] + r, offsets_m[pi] + c, w.get(r, c).clone());
                    }
                }
                break;
            }
        }
        if !matched {
            return None;
        }
    }
    // witness M -> N through the two decomposition isomorphisms
    let witness = dn.iso.inverse().unwrap().mul(&block).mul(&dm.iso);
    debug_assert!(verify_module_iso(m, n, &witness));
    Some(witness)
}

/// For indecomposables with local endomorphism rings: U isomorphic to V iff
/// some composite g f of hom-basis elements is invertible (then f itself is
/// an isomorphism).
fn indecomposable_iso(u: &FModule, v: &FModule) -> Option<Mat> {
    if u.dim() != v.dim() {
        return None;
    }
    let huv = hom_space(u, v);
    let hvu = hom_space(v, u);
    for f in &huv.basis {
        for g in &hvu.basis {
            if g.mul(f).is_invertible() {
                return Some(f.clone());
            }
        }
    }
    None
}

/// Independent re-verification of a module isomorphism witness.
pub fn verify_module_iso(m: &FModule, n: &FModule, w: &Mat) -> bool {
    if !w.is_invertible() {
        return false;
    }
    (0..m.algebra().dim()).all(|b| w.mul(m.action(b)) == n.action(b).mul(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Algebra;
    use crate::field::Field;
    use crate::rng::Rng;

    fn qq() -> Field {
        Field::rationals()
    }

    fn plane() -> Algebra {
        Algebra::from_presentation(&qq(), &["X", "Y"], &[], 2).unwrap()
    }

    #[test]
    fn regular_module_of_local_algebra_is_indecomposable() {
        let a = plane();
        let reg = FModule::regular(&a);
        assert!(is_indecomposable(&reg));
    }

    #[test]
    fn free_cube_splits_into_three_regulars() {
        let a = plane();
        let f3 = FModule::free(&a, 3);
        let d = krs_decompose(&f3);
        assert_eq!(d.pieces.len(), 3);
        for p in &d.pieces {
            assert_eq!(p.dim(), a.dim());
            assert!(is_isomorphic(p, &FModule::regular(&a)).is_some());
        }
    }

    #[test]
    fn regular_plus_residue_splits() {
        let a = plane();
        let (sum, _) = FModule::direct_sum(&[FModule::regular(&a), FModule::residue(&a)]);
        let d = krs_decompose(&sum);
        let dims: Vec<usize> = d.pieces.iter().map(|p| p.dim()).collect();
        assert_eq!(dims, vec![1, 3]);
    }

    #[test]
    fn radical_of_plane_splits_into_two_simples() {
        // m inside QQ[X,Y]/(X,Y)^2 is k + k since m^2 = 0
        let a = plane();
        let reg = FModule::regular(&a);
        let (msub, _) = reg.submodule(a.radical());
        assert_eq!(msub.dim(), 2);
        let d = krs_decompose(&msub);
        assert_eq!(d.pieces.len(), 2);
        let k = FModule::residue(&a);
        for p in &d.pieces {
            assert!(is_isomorphic(p, &k).is_some());
        }
    }

    #[test]
    fn double_residue_not_isomorphic_to_dual_numbers() {
        // k + k vs k[x]/(x^2) over k[x]/(x^2)
        let a = Algebra::truncated_polynomial(&qq(), "x", 2).unwrap();
        let k = FModule::residue(&a);
        let (kk, _) = FModule::direct_sum(&[k.clone(), k]);
        let reg = FModule::regular(&a);
        assert!(is_isomorphic(&kk, &reg).is_none());
    }

    #[test]
    fn permuted_bases_are_isomorphic() {
        let a = Algebra::truncated_polynomial(&qq(), "x", 3).unwrap();
        let reg = FModule::regular(&a);
        let (sum, _) = FModule::direct_sum(&[reg.clone(), FModule::residue(&a)]);
        let f = qq();
        let dim = sum.dim();
        let mut rng = Rng::new(7);
        for _ in 0..5 {
            // random permutation matrix
            let mut perm: Vec<usize> = (0..dim).collect();
            for i in (1..dim).rev() {
                let j = rng.below((i + 1) as u64) as usize;
                perm.swap(i, j);
            }
            let p = Mat::from_fn(
                &f,
                dim,
                dim,
                |i, j| {
                    if perm[j] == i {
                        f.one()
                    } else {
                        f.zero()
                    }
                },
            );
            let pinv = p.inverse().unwrap();
            let action: Vec<Mat> = (0..a.dim())
                .map(|b| p.mul(sum.action(b)).mul(&pinv))
                .collect();
            let permuted = FModule::new(a.clone(), action).unwrap();
            let w = is_isomorphic(&sum, &permuted).expect("permuted copy isomorphic");
            assert!(verify_module_iso(&sum, &permuted, &w));
            // KRS multiset invariant
            let d1 = krs_decompose(&sum);
            let d2 = krs_decompose(&permuted);
            let dims1: Vec<usize> = d1.pieces.iter().map(|x| x.dim()).collect();
            let dims2: Vec<usize> = d2.pieces.iter().map(|x| x.dim()).collect();
            assert_eq!(dims1, dims2);
        }
    }

    #[test]
    fn decompose_is_idempotent_on_pieces() {
        let a = plane();
        let mut rng = Rng::new(0x1234);
        for _ in 0..6 {
            let m = FModule::random_module(&a, &mut rng, 6);
            let d = krs_decompose(&m);
            for p in &d.pieces {
                let again = krs_decompose(p);
                assert_eq!(again.pieces.len(), 1, "piece decomposed further");
            }
            // dimensions add up
            let total: usize = d.pieces.iter().map(|p| p.dim()).sum();
            assert_eq!(total, m.dim());
        }
    }

    #[test]
    fn finite_field_fallback_finds_idempotents() {
        let f2 = Field::prime(2).unwrap();
        let a = Algebra::truncated_polynomial(&f2, "x", 2).unwrap();
        let k = FModule::residue(&a);
        let reg = FModule::regular(&a);
        let (sum, _) = FModule::direct_sum(&[k.clone(), reg.clone(), k.clone()]);
        let d = krs_decompose(&sum);
        let dims: Vec<usize> = d.pieces.iter().map(|p| p.dim()).collect();
        assert_eq!(dims, vec![1, 1, 2]);
    }

    #[test]
    fn indecomposability_matches_across_dagger_restriction() {
        // along a (dagger) surjection, an S-module is indecomposable over S
        // iff it is indecomposable over R
        let r = Algebra::truncated_polynomial(&qq(), "x", 4).unwrap();
        let ideal = Mat::col_vec(r.field(), r.basis_elem(2));
        let (s, phi) = r.quotient_by_ideal(&ideal).unwrap();
        let mut rng = Rng::new(0xc13);
        let mut seen_decomposable = false;
        let mut seen_indec = false;
        for _ in 0..8 {
            let n = crate::fmodule::FModule::random_module(&s, &mut rng, 5);
            if n.dim() == 0 {
                continue;
            }
            let over_s = krs_decompose(&n).pieces.len();
            let restricted = crate::fmodule::FModule::restrict(&phi, &n);
            let over_r = krs_decompose(&restricted).pieces.len();
            assert_eq!(
                over_s == 1,
                over_r == 1,
                "indecomposability must agree across restriction"
            );
            if over_s == 1 {
                seen_indec = true;
            } else {
                seen_decomposable = true;
            }
        }
        assert!(
            seen_decomposable && seen_indec,
            "suite should exercise both cases"
        );
    }

    #[test]
    fn cancelled_token_interrupts_decomposition() {
        let a = plane();
        let m = FModule::free(&a, 3);
        let token = CancelToken::new();
        token.cancel();
        let err = krs_decompose_cancellable(&m, &token).err().unwrap();
        assert!(matches!(err, crate::error::Error::Cancelled));
        // a live token decomposes normally
        let live = CancelToken::new();
        let d = krs_decompose_cancellable(&m, &live).unwrap();
        assert_eq!(d.pieces.len(), 3);
    }

    #[test]
    fn zero_modules_are_isomorphic() {
        let a = plane();
        let z1 = FModule::zero(&a);
        let z2 = FModule::zero(&a);
        assert!(is_isomorphic(&z1, &z2).is_some());
    }
}
