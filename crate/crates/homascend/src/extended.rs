//! Extended modules along a module-finite free extension: the search for a
//! descent witness N = S tensor_R M, the two-out-of-three principle for
//! direct sums, level-by-level divisor checks, separability idempotents with
//! the constructive splitting they induce, and the beta-isomorphism descent
//! of extensions, kernels and cokernels.
//!
//! The witness search is complete because restrict(S tensor M) = M^rank:
//! every indecomposable summand of a candidate M must already divide the
//! restriction of N, so the Krull-Remak-Schmidt pieces of restrict(N) span
//! the whole search space.

use crate::algebra::{is_flat, AlgebraMap};
use crate::error::{Error, Result};
use crate::field::FieldElem;
use crate::fmodule::{hom_module, FModule, HomSpace};
use crate::krs::{is_isomorphic, krs_decompose, verify_module_iso};
use crate::mat::Mat;
use crate::resolution::{minimal_resolution, Resolution};

/// Dimension cap for the brute-force descent oracle used by the test suites.
pub const ORACLE_DIM_CAP: usize = 8;
/// Scalar grid for brute-force candidate module presentations over the
/// rationals.
pub const ORACLE_SCALAR_GRID: [i64; 5] = [-2, -1, 0, 1, 2];

/// A flat (= free) module-finite extension with a chosen free basis.
pub struct FiniteExtension {
    pub phi: AlgebraMap,
    pub basis: Mat,
    pub rank: usize,
}

impl FiniteExtension {
    pub fn new(phi: AlgebraMap) -> Result<FiniteExtension> {
        match is_flat(&phi) {
            Some(w) => Ok(FiniteExtension {
                phi,
                basis: w.basis,
                rank: w.rank,
            }),
            None => Err(Error::Invariant("extension is not flat (free)".into())),
        }
    }
}

/// A verified descent witness: N = S tensor_R M via `iso`.
pub struct ExtendedWitness {
    pub module: FModule,
    /// S-linear isomorphism from S tensor_R module to N.
    pub iso: Mat,
}

/// Decide whether N is extended, returning a verified witness or a
/// definitive negative.
pub fn is_extended(e: &FiniteExtension, n: &FModule) -> Result<Option<ExtendedWitness>> {
    assert!(n.algebra() == e.phi.target());
    if n.dim() == 0 {
        return Ok(Some(ExtendedWitness {
            module: FModule::zero(e.phi.source()),
            iso: Mat::identity(e.phi.target().field(), 0),
        }));
    }
    if n.dim() % e.rank != 0 {
        return Ok(None);
    }
    let target_dim = n.dim() / e.rank;
    let restricted = FModule::restrict(&e.phi, n);
    let dec = krs_decompose(&restricted);
    // group the pieces into isomorphism classes
    let mut classes: Vec<(FModule, usize)> = Vec::new();
    'pieces: for p in &dec.pieces {
        for (rep, count) in classes.iter_mut() {
            if is_isomorphic(rep, p).is_some() {
                *count += 1;
                continue 'pieces;
            }
        }
        classes.push((p.clone(), 1));
    }
    // enumerate candidate multisets with the right total dimension
    let dims: Vec<usize> = classes.iter().map(|(m, _)| m.dim()).collect();
    let caps: Vec<usize> = classes.iter().map(|(_, c)| *c).collect();
    let mut counts = vec![0usize; classes.len()];
    loop {
        let total: usize = counts.iter().zip(&dims).map(|(c, d)| c * d).sum();
        if total == target_dim && counts.iter().any(|&c| c > 0) {
            let parts: Vec<FModule> = counts
                .iter()
                .zip(&classes)
                .flat_map(|(&c, (rep, _))| std::iter::repeat_with(|| rep.clone()).take(c))
                .collect();
            let candidate = FModule::direct_sum(&parts).0;
            let (sm, _) = FModule::base_change(&e.phi, &candidate);
            if let Some(iso) = is_isomorphic(&sm, n) {
                debug_assert!(verify_module_iso(&sm, n, &iso));
                return Ok(Some(ExtendedWitness {
                    module: candidate,
                    iso,
                }));
            }
        }
        // odometer over counts
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return Ok(None);
            }
            counts[pos] += 1;
            if counts[pos] <= caps[pos] {
                break;
            }
            counts[pos] = 0;
            pos += 1;
        }
    }
}

/// Decide whether u (r + s X + t Y) = X + c Y is solvable with u a unit of
/// S and r, s, t in the ground field, for the square-zero plane extension.
/// Comparing coefficients forces r = 0, a s = 1, a t = c with a the constant
/// term of u, so solvability is exactly c lying in the ground field; a
/// positive answer is re-verified by expanding the witness product in S.
pub fn matrix_equiv_1x1(e: &FiniteExtension, c: &FieldElem) -> Result<bool> {
    let s = e.phi.target();
    let r = e.phi.source();
    let f = r.field();
    if r.var_names().len() != 2 || r.nilpotency() != 2 {
        return Err(Error::Invariant(
            "matrix equivalence test expects the square-zero plane extension".into(),
        ));
    }
    let ext_field = match s.var_names().first() {
        Some(_) => (), // generator name present
        None => return Err(Error::Invariant("target is not a tensor extension".into())),
    };
    let _ = ext_field;
    let FieldElem::Ext(coords) = c else {
        // already a ground-field scalar
        return Ok(true);
    };
    let in_ground = coords.iter().skip(1).all(|x| f.is_zero(x));
    if in_ground {
        // witness u = 1, r = 0, s = 1, t = c: expand and compare inside S
        let x_name = r.var_names()[0].clone();
        let y_name = r.var_names()[1].clone();
        let x_elem = s.basis_elem(s.label_index(&x_name).expect("X basis label"));
        let y_elem = s.basis_elem(s.label_index(&y_name).expect("Y basis label"));
        let c0 = coords[0].clone();
        let lhs = s.add_elems(&x_elem, &s.scale_elem(&c0, &y_elem));
        let rhs = {
            // X + c Y assembled through the extension generator powers
            let mut acc = x_elem.clone();
            let gen_label = &s.var_names()[0];
            for (p, cp) in coords.iter().enumerate() {
                if f.is_zero(cp) {
                    continue;
                }
                let t_pow = if p == 0 {
                    s.unit_elem()
                } else if p == 1 {
                    s.basis_elem(s.label_index(gen_label).expect("generator label"))
                } else {
                    s.basis_elem(
                        s.label_index(&format!("{gen_label}^{p}"))
                            .expect("generator power"),
                    )
                };
                let term = s.mul_elems(&t_pow, &y_elem);
                acc = s.add_elems(&acc, &s.scale_elem(cp, &term));
            }
            acc
        };
        if lhs != rhs {
            return Err(Error::EquivalenceViolation {
                label: "matrix equivalence witness".into(),
                witness: format!("{} vs {}", s.fmt_elem(&lhs), s.fmt_elem(&rhs)),
            });
        }
    }
    Ok(in_ground)
}

/// Input for the two-out-of-three principle on a direct sum N1 + N2.
pub enum TwoOfThree {
    /// Both summands known extended: produce the sum's witness.
    BothParts {
        m1: FModule,
        iso1: Mat,
        m2: FModule,
        iso2: Mat,
    },
    /// The sum and the first summand known: recover the second.
    SumAndFirst {
        m: FModule,
        iso: Mat,
        m1: FModule,
        iso1: Mat,
    },
}

pub struct TwoOfThreeResult {
    pub module: FModule,
    pub iso: Mat,
}

pub fn two_of_three_sum(
    e: &FiniteExtension,
    n1: &FModule,
    n2: &FModule,
    knowledge: TwoOfThree,
) -> Result<TwoOfThreeResult> {
    let s = e.phi.target();
    let f = s.field();
    let (n_sum, injections) = FModule::direct_sum(&[n1.clone(), n2.clone()]);
    match knowledge {
        TwoOfThree::BothParts { m1, iso1, m2, iso2 } => {
            verify_witness(e, &m1, n1, &iso1)?;
            verify_witness(e, &m2, n2, &iso2)?;
            let (m_sum, _) = FModule::direct_sum(&[m1.clone(), m2.clone()]);
            let (sm, _, _) = FModule::base_change_with_maps(&e.phi, &m_sum);
            // natural iso S(M1 + M2) -> SM1 + SM2 built on the tensor level
            let (_sm1, proj1, _) = FModule::base_change_with_maps(&e.phi, &m1);
            let (_sm2, proj2, _) = FModule::base_change_with_maps(&e.phi, &m2);
            let ns = s.dim();
            let d1 = m1.dim();
            let d2 = m2.dim();
            let dm = d1 + d2;
            // big-space split maps: s_a tensor (x1, x2) -> (s_a tensor x1, s_a tensor x2)
            let split1 = Mat::from_fn(f, ns * d1, ns * dm, |r, c| {
                if c / dm == r / d1 && c % dm == r % d1 {
                    f.one()
                } else {
                    f.zero()
                }
            });
            let split2 = Mat::from_fn(f, ns * d2, ns * dm, |r, c| {
                if c / dm == r / d2 && c % dm == r % d2 + d1 {
                    f.one()
                } else {
                    f.zero()
                }
            });
            let (_, proj_sum, _) = FModule::base_change_with_maps(&e.phi, &m_sum);
            let lift = proj_sum.solve(&Mat::identity(f, sm.dim())).expect("onto");
            let to1 = proj1.mul(&split1).mul(&lift);
            let to2 = proj2.mul(&split2).mul(&lift);
            // assemble the witness into N1 + N2
            let w1 = injections[0].mul(&iso1).mul(&to1);
            let w2 = injections[1].mul(&iso2).mul(&to2);
            let iso = w1.add(&w2);
            if !verify_module_iso(&sm, &n_sum, &iso) {
                return Err(Error::EquivalenceViolation {
                    label: "sum witness".into(),
                    witness: "assembled witness failed verification".into(),
                });
            }
            Ok(TwoOfThreeResult { module: m_sum, iso })
        }
        TwoOfThree::SumAndFirst { m, iso, m1, iso1 } => {
            verify_witness(e, &m, &n_sum, &iso)?;
            verify_witness(e, &m1, n1, &iso1)?;
            // claim: M1 divides M; take the complement through KRS matching
            let dm = krs_decompose(&m);
            let dm1 = krs_decompose(&m1);
            let mut remaining: Vec<FModule> = dm.pieces.clone();
            for p in &dm1.pieces {
                let pos = remaining.iter().position(|q| is_isomorphic(p, q).is_some());
                match pos {
                    Some(i) => {
                        remaining.remove(i);
                    }
                    None => {
                        return Err(Error::EquivalenceViolation {
                            label: "direct-sum divisor claim".into(),
                            witness: format!(
                                "a piece of dimension {} of M1 does not divide M",
                                p.dim()
                            ),
                        })
                    }
                }
            }
            let m2 = if remaining.is_empty() {
                FModule::zero(e.phi.source())
            } else {
                FModule::direct_sum(&remaining).0
            };
            let (sm2, _) = FModule::base_change(&e.phi, &m2);
            let iso2 = is_isomorphic(&sm2, n2).ok_or_else(|| Error::EquivalenceViolation {
                label: "complement witness".into(),
                witness: "S tensor complement not isomorphic to N2".into(),
            })?;
            Ok(TwoOfThreeResult {
                module: m2,
                iso: iso2,
            })
        }
    }
}

fn verify_witness(e: &FiniteExtension, m: &FModule, n: &FModule, iso: &Mat) -> Result<()> {
    let (sm, _) = FModule::base_change(&e.phi, m);
    if !verify_module_iso(&sm, n, iso) {
        return Err(Error::Invariant(
            "extended-module witness failed verification".into(),
        ));
    }
    Ok(())
}

/// M1 | M tested on every quotient level R/m^t; at the nilpotency degree the
/// level answer coincides with the direct answer over R, which is asserted.
pub fn guralnick_levels(m1: &FModule, m: &FModule, levels: usize) -> Result<Vec<bool>> {
    let r = m1.algebra().clone();
    assert!(m.algebra() == &r);
    let mut out = Vec::with_capacity(levels);
    for t in 1..=levels {
        let holds = if t >= r.nilpotency() {
            divides(m1, m)
        } else {
            let power = r.radical_power(t);
            let (rt, pi) = r.quotient_by_ideal(&power)?;
            let m1_t = reduce_mod_power(m1, t, &rt, &pi);
            let m_t = reduce_mod_power(m, t, &rt, &pi);
            divides(&m1_t, &m_t)
        };
        out.push(holds);
    }
    if levels >= r.nilpotency() {
        let level_answer = out[r.nilpotency() - 1];
        let direct = divides(m1, m);
        if level_answer != direct {
            return Err(Error::EquivalenceViolation {
                label: "level check at nilpotency degree".into(),
                witness: format!(
                    "level {} says {level_answer}, direct says {direct}",
                    r.nilpotency()
                ),
            });
        }
    }
    Ok(out)
}

/// M / m^t M as a module over R / m^t.
fn reduce_mod_power(
    m: &FModule,
    t: usize,
    rt: &crate::algebra::Algebra,
    pi: &AlgebraMap,
) -> FModule {
    let r = m.algebra();
    let f = r.field();
    let power = r.radical_power(t);
    // m^t M generators
    let mut gens = Mat::zero(f, m.dim(), 0);
    for c in 0..power.cols() {
        gens = gens.hstack(&m.action_of(&power.col_entries(c)));
    }
    let (q, proj) = m.quotient(&gens);
    // action over R/m^t through arbitrary preimages
    let lift = proj.solve(&Mat::identity(f, q.dim())).expect("onto");
    let mut action = Vec::with_capacity(rt.dim());
    for b in 0..rt.dim() {
        let pre = pi
            .matrix()
            .solve(&Mat::col_vec(f, rt.basis_elem(b)))
            .expect("pi onto");
        let op = m.action_of(&pre.col_entries(0));
        action.push(proj.mul(&op).mul(&lift));
    }
    FModule::new(rt.clone(), action).expect("reduced module")
}

/// Multiset divisibility of KRS pieces.
fn divides(m1: &FModule, m: &FModule) -> bool {
    if m1.dim() == 0 {
        return true;
    }
    let d1 = krs_decompose(m1);
    let d = krs_decompose(m);
    let mut remaining: Vec<FModule> = d.pieces;
    for p in &d1.pieces {
        match remaining.iter().position(|q| is_isomorphic(p, q).is_some()) {
            Some(i) => {
                remaining.remove(i);
            }
            None => return false,
        }
    }
    true
}

/// The two-sided S-module structure of S tensor_R S on a basis-free quotient
/// presentation, with the multiplication map down to S.
pub struct TensorSquare {
    pub dim: usize,
    /// projection from the plain tensor space (slot (a,b) = a dim S + b)
    pub proj: Mat,
    pub lift: Mat,
    /// left and right multiplication operators per S-basis element
    pub left: Vec<Mat>,
    pub right: Vec<Mat>,
    /// multiplication T -> S
    pub mu: Mat,
    /// class of 1 tensor 1
    pub unit: Mat,
}

pub fn tensor_square(e: &FiniteExtension) -> TensorSquare {
    let s = e.phi.target();
    let r = e.phi.source();
    let f = s.field();
    let ns = s.dim();
    let big = ns * ns;
    // relations (s_a phi(r_c)) tensor s_b - s_a tensor (phi(r_c) s_b)
    let mut rels = Mat::zero(f, big, 0);
    for a in 0..ns {
        for c in 0..r.dim() {
            let img = e.phi.apply(&r.basis_elem(c));
            let left_mult = s.mul_elems(&s.basis_elem(a), &img);
            for b in 0..ns {
                let right_mult = s.mul_elems(&img, &s.basis_elem(b));
                let mut v = Mat::zero(f, big, 1);
                for (i, x) in left_mult.iter().enumerate() {
                    if !f.is_zero(x) {
                        v.set(i * ns + b, 0, x.clone());
                    }
                }
                for (j, x) in right_mult.iter().enumerate() {
                    if !f.is_zero(x) {
                        let cur = v.get(a * ns + j, 0).clone();
                        v.set(a * ns + j, 0, f.sub(&cur, x));
                    }
                }
                rels = rels.hstack(&v);
            }
        }
    }
    // quotient as a plain vector space
    let sub = rels.col_basis();
    let mut span = sub.clone();
    let mut picked = Vec::new();
    for i in 0..big {
        if span.cols() == big {
            break;
        }
        let mut e_vec = Mat::zero(f, big, 1);
        e_vec.set(i, 0, f.one());
        if !span.span_contains(&e_vec) {
            span = span.hstack(&e_vec);
            picked.push(i);
        }
    }
    let dim = picked.len();
    let mut comp = Mat::zero(f, big, dim);
    for (c, &i) in picked.iter().enumerate() {
        comp.set(i, c, f.one());
    }
    let basis = comp.hstack(&sub);
    let mut proj = Mat::zero(f, dim, big);
    for i in 0..big {
        let mut e_vec = Mat::zero(f, big, 1);
        e_vec.set(i, 0, f.one());
        let coords = basis.coords_in(&e_vec).expect("spans");
        for rr in 0..dim {
            proj.set(rr, i, coords[rr].clone());
        }
    }
    let lift = comp;
    // left/right multiplication on the big space, then descend
    let mut left = Vec::with_capacity(ns);
    let mut right = Vec::with_capacity(ns);
    for b in 0..ns {
        let lm = s.left_mul(b);
        let big_left = Mat::from_fn(f, big, big, |rr, cc| {
            if rr % ns == cc % ns {
                lm.get(rr / ns, cc / ns).clone()
            } else {
                f.zero()
            }
        });
        let big_right = Mat::from_fn(f, big, big, |rr, cc| {
            if rr / ns == cc / ns {
                lm.get(rr % ns, cc % ns).clone()
            } else {
                f.zero()
            }
        });
        left.push(proj.mul(&big_left).mul(&lift));
        right.push(proj.mul(&big_right).mul(&lift));
    }
    // mu: class(s_a tensor s_b) -> s_a s_b
    let mut mu_big = Mat::zero(f, ns, big);
    for a in 0..ns {
        for b in 0..ns {
            let prod = s.mul_elems(&s.basis_elem(a), &s.basis_elem(b));
            for (i, x) in prod.iter().enumerate() {
                mu_big.set(i, a * ns + b, x.clone());
            }
        }
    }
    debug_assert!(mu_big.mul(&sub).is_zero(), "mu must kill the relations");
    let mu = mu_big.mul(&lift);
    let mut unit_big = Mat::zero(f, big, 1);
    unit_big.set(s.unit_index() * ns + s.unit_index(), 0, f.one());
    let unit = proj.mul(&unit_big);
    TensorSquare {
        dim,
        proj,
        lift,
        left,
        right,
        mu,
        unit,
    }
}

/// A verified separability idempotent: mu(e) = 1, (s tensor 1 - 1 tensor s) e = 0
/// for all s, and e^2 = e.
pub struct SeparabilityIdempotent {
    pub tensor: TensorSquare,
    pub e: Mat,
    pub unique: bool,
}

pub fn separability_idempotent(e: &FiniteExtension) -> Result<Option<SeparabilityIdempotent>> {
    let s = e.phi.target();
    let f = s.field();
    let t = tensor_square(e);
    // linear system: mu(e) = 1, (left_b - right_b) e = 0 for all b
    let mut sys = t.mu.clone();
    let mut rhs = Mat::col_vec(f, s.unit_elem());
    for b in 0..s.dim() {
        let diff = t.left[b].sub(&t.right[b]);
        sys = sys.vstack(&diff);
        rhs = rhs.vstack(&Mat::zero(f, t.dim, 1));
    }
    let Some(sol) = sys.solve(&rhs) else {
        return Ok(None);
    };
    let unique = sys.kernel().cols() == 0;
    // verify idempotency through the big-space product
    let e_vec = sol;
    let e_big = t.lift.mul(&e_vec);
    let ns = s.dim();
    // multiply e * e in the quotient: expand e = sum c_{ab} s_a tensor s_b and
    // act by left_a right_b on e
    let mut prod = Mat::zero(f, t.dim, 1);
    for a in 0..ns {
        for b in 0..ns {
            let c = e_big.get(a * ns + b, 0);
            if f.is_zero(c) {
                continue;
            }
            let term = t.left[a].mul(&t.right[b]).mul(&e_vec).scale(c);
            prod = prod.add(&term);
        }
    }
    if prod != e_vec {
        return Err(Error::EquivalenceViolation {
            label: "separability idempotent".into(),
            witness: "solution of the splitting system is not idempotent".into(),
        });
    }
    Ok(Some(SeparabilityIdempotent {
        tensor: t,
        e: e_vec,
        unique,
    }))
}

/// Constructive splitting: for separable extensions every finitely generated
/// S-module N is a direct summand of the extended module S tensor_R
/// restrict(N), via j(n) = e . (1 tensor n) with retraction the
/// multiplication map.
pub struct SummandWitness {
    pub module: FModule,
    pub extended: FModule,
    pub injection: Mat,
    pub retraction: Mat,
}

pub fn summand_of_extended(e: &FiniteExtension, n: &FModule) -> Result<SummandWitness> {
    let Some(sep) = separability_idempotent(e)? else {
        return Err(Error::Invariant("extension is not separable".into()));
    };
    let s = e.phi.target();
    let f = s.field();
    let ns = s.dim();
    let m = FModule::restrict(&e.phi, n);
    let (sm, proj, iota) = FModule::base_change_with_maps(&e.phi, &m);
    let nm = n.dim();
    let lift = proj.solve(&Mat::identity(f, sm.dim())).expect("onto");
    // operators on S tensor N descending from the big space
    let big_left = |b: usize| -> Mat {
        let lm = s.left_mul(b);
        Mat::from_fn(f, ns * nm, ns * nm, |rr, cc| {
            if rr % nm == cc % nm {
                lm.get(rr / nm, cc / nm).clone()
            } else {
                f.zero()
            }
        })
    };
    let big_right = |b: usize| -> Mat {
        let act = n.action(b);
        Mat::from_fn(f, ns * nm, ns * nm, |rr, cc| {
            if rr / nm == cc / nm {
                act.get(rr % nm, cc % nm).clone()
            } else {
                f.zero()
            }
        })
    };
    // action of the idempotent on S tensor N
    let e_big = sep.tensor.lift.mul(&sep.e);
    let mut op_e = Mat::zero(f, sm.dim(), sm.dim());
    for a in 0..ns {
        for b in 0..ns {
            let c = e_big.get(a * ns + b, 0);
            if f.is_zero(c) {
                continue;
            }
            let term = proj
                .mul(&big_left(a))
                .mul(&big_right(b))
                .mul(&lift)
                .scale(c);
            op_e = op_e.add(&term);
        }
    }
    let injection = op_e.mul(&iota);
    // retraction: multiplication S tensor N -> N
    let mut mu_big = Mat::zero(f, nm, ns * nm);
    for a in 0..ns {
        let act = n.action_of(&s.basis_elem(a));
        for x in 0..nm {
            for rr in 0..nm {
                mu_big.set(rr, a * nm + x, act.get(rr, x).clone());
            }
        }
    }
    let retraction = mu_big.mul(&lift);
    // verify: retraction . injection = id, both S-linear
    if !retraction.mul(&injection).is_identity() {
        return Err(Error::EquivalenceViolation {
            label: "summand splitting".into(),
            witness: "retraction composed with injection is not the identity".into(),
        });
    }
    for b in 0..ns {
        if injection.mul(n.action(b)) != sm.action(b).mul(&injection)
            || retraction.mul(sm.action(b)) != n.action(b).mul(&retraction)
        {
            return Err(Error::EquivalenceViolation {
                label: "summand splitting".into(),
                witness: "splitting maps are not S-linear".into(),
            });
        }
    }
    Ok(SummandWitness {
        module: m,
        extended: sm,
        injection,
        retraction,
    })
}

/// The delta complex Hom(F_., N) of a resolution, with entries pushed
/// through phi when crossing to the extension side.
fn delta_matrices(res: &Resolution, n: &FModule, push: Option<&AlgebraMap>) -> Vec<Mat> {
    let f = n.algebra().field().clone();
    let nn = n.dim();
    let mut out = Vec::new();
    for t in 0..res.diffs.len() {
        let bt = res.betti[t];
        let bt1 = res.betti[t + 1];
        let mut mat = Mat::zero(&f, bt1 * nn, bt * nn);
        let d = &res.diffs[t];
        for j in 0..bt1 {
            for i in 0..bt {
                let entry = match push {
                    Some(phi) => phi.apply(d.get(i, j)),
                    None => d.get(i, j).clone(),
                };
                let op = n.action_of(&entry);
                for r in 0..nn {
                    for c in 0..nn {
                        let v = op.get(r, c);
                        if !f.is_zero(v) {
                            mat.set(j * nn + r, i * nn + c, v.clone());
                        }
                    }
                }
            }
        }
        out.push(mat);
    }
    out
}

/// Subquotient bookkeeping for one Ext group computed from delta matrices.
struct ExtGroup {
    reps: Mat,
    boundaries: Mat,
    dim: usize,
    ambient: usize,
}

impl ExtGroup {
    fn new(deltas: &[Mat], i: usize, ambient: usize, field: &crate::field::Field) -> ExtGroup {
        let ker = if i < deltas.len() {
            deltas[i].kernel().col_basis()
        } else {
            Mat::identity(field, ambient)
        };
        let im = if i == 0 {
            Mat::zero(field, ambient, 0)
        } else {
            deltas[i - 1].col_basis()
        };
        let mut span = im.clone();
        let mut reps = Mat::zero(field, ambient, 0);
        for c in 0..ker.cols() {
            let v = ker.col(c);
            if !span.span_contains(&v) {
                span = span.hstack(&v);
                reps = reps.hstack(&v);
            }
        }
        ExtGroup {
            dim: reps.cols(),
            reps,
            boundaries: im,
            ambient,
        }
    }

    fn class_of(&self, v: &Mat) -> Option<Vec<FieldElem>> {
        let basis = self.reps.hstack(&self.boundaries);
        let coords = basis.coords_in(v)?;
        Some(coords[..self.dim].to_vec())
    }
}

/// The natural map beta: S tensor Ext^1_R(M2, M1) -> Ext^1_S(N2, N1)
/// constructed from a minimal resolution and base change, verified to be an
/// isomorphism (flat case), plus the image of alpha (classes descending to
/// R) inside the source.
pub struct BetaIso {
    /// S tensor Ext^1_R(M2, M1) as an S-module.
    pub source: FModule,
    /// matrix of beta in the chosen bases (target = Ext_S class coords).
    pub beta: Mat,
    pub ext_r_dim: usize,
    pub ext_s_dim: usize,
    /// alpha: Ext_R -> S tensor Ext_R (the natural map into the source).
    pub alpha: Mat,
}

pub struct Prop32Machine {
    pub res: Resolution,
    pub deltas_r: Vec<Mat>,
    pub deltas_s: Vec<Mat>,
    pub beta: BetaIso,
    n1: FModule,
}

/// Build the descent machinery for Ext^1 along the extension: resolutions of
/// M2 over R, the pushed resolution over S (exactness of the push is
/// rechecked, which is where flatness enters), and the beta isomorphism.
pub fn prop32_machine(e: &FiniteExtension, m1: &FModule, m2: &FModule) -> Result<Prop32Machine> {
    let f = e.phi.source().field().clone();
    let res = minimal_resolution(m2, 2);
    let (n1, _, _) = FModule::base_change_with_maps(&e.phi, m1);
    // flatness: the pushed resolution stays exact; verify the first two spots
    {
        let pushed: Vec<Mat> = res
            .diffs
            .iter()
            .map(|d| {
                let entries: Vec<_> = (0..d.rows * d.cols)
                    .map(|idx| e.phi.apply(&d.entries[idx]))
                    .collect();
                crate::resolution::AlgMat {
                    algebra: e.phi.target().clone(),
                    rows: d.rows,
                    cols: d.cols,
                    entries,
                }
                .to_k_matrix()
            })
            .collect();
        if pushed.len() >= 2 && pushed[0].cols() > 0 && pushed[1].cols() > 0 {
            if !pushed[0].kernel().span_eq(&pushed[1].col_basis()) {
                return Err(Error::EquivalenceViolation {
                    label: "flat push of resolution".into(),
                    witness: "pushed resolution lost exactness".into(),
                });
            }
        }
    }
    let deltas_r = delta_matrices(&res, m1, None);
    let deltas_s = delta_matrices(&res, &n1, Some(&e.phi));
    let ext_r = ExtGroup::new(&deltas_r, 1, res.betti[1] * m1.dim(), &f);
    let ext_s = ExtGroup::new(&deltas_s, 1, res.betti[1] * n1.dim(), &f);
    // Ext^1_R as an R-module: subquotient of M1^{beta_1}
    let b1 = res.betti[1];
    let r_alg = e.phi.source().clone();
    let mut ext_r_action = Vec::with_capacity(r_alg.dim());
    for b in 0..r_alg.dim() {
        let act = m1.action(b);
        let amb = Mat::from_fn(&f, ext_r.ambient, ext_r.ambient, |rr, cc| {
            if rr / m1.dim() == cc / m1.dim() {
                act.get(rr % m1.dim(), cc % m1.dim()).clone()
            } else {
                f.zero()
            }
        });
        let mut mat = Mat::zero(&f, ext_r.dim, ext_r.dim);
        for j in 0..ext_r.dim {
            let img = amb.mul(&ext_r.reps.col(j));
            let cls = ext_r.class_of(&img).expect("action preserves classes");
            for (rr, c) in cls.iter().enumerate() {
                mat.set(rr, j, c.clone());
            }
        }
        ext_r_action.push(mat);
    }
    let ext_r_module = FModule::new(r_alg, ext_r_action)?;
    let (s_ext_r, proj_e, alpha) = FModule::base_change_with_maps(&e.phi, &ext_r_module);
    // kappa: M1^{b1} -> N1^{b1} per copy through iota of M1
    let (_, _, iota1) = FModule::base_change_with_maps(&e.phi, m1);
    let kappa = Mat::from_fn(&f, b1 * n1.dim(), b1 * m1.dim(), |rr, cc| {
        if rr / n1.dim() == cc / m1.dim() {
            iota1.get(rr % n1.dim(), cc % m1.dim()).clone()
        } else {
            f.zero()
        }
    });
    // beta on the big space S tensor_k ExtR: s_a tensor class_j ->
    // class_S(s_a . kappa(rep_j)); verify the relations die, then descend
    let s_alg = e.phi.target();
    let ns = s_alg.dim();
    let er = ext_r_module.dim();
    let mut beta_big = Mat::zero(&f, ext_s.dim, ns * er);
    for a in 0..ns {
        // action of s_a on N1^{b1}
        let act = n1.action_of(&s_alg.basis_elem(a));
        let amb = Mat::from_fn(&f, ext_s.ambient, ext_s.ambient, |rr, cc| {
            if rr / n1.dim() == cc / n1.dim() {
                act.get(rr % n1.dim(), cc % n1.dim()).clone()
            } else {
                f.zero()
            }
        });
        for j in 0..er {
            let img = amb.mul(&kappa.mul(&ext_r.reps.col(j)));
            let cls = ext_s
                .class_of(&img)
                .ok_or_else(|| Error::EquivalenceViolation {
                    label: "beta construction".into(),
                    witness: "image of a cocycle is not a cocycle".into(),
                })?;
            for (rr, c) in cls.iter().enumerate() {
                beta_big.set(rr, a * er + j, c.clone());
            }
        }
    }
    // descend along the base-change projection of Ext_R
    let lift = proj_e
        .solve(&Mat::identity(&f, s_ext_r.dim()))
        .expect("onto");
    let beta = beta_big.mul(&lift);
    // well-definedness: beta_big must kill the projection kernel
    if !beta_big.mul(&proj_e.kernel()).is_zero() {
        return Err(Error::EquivalenceViolation {
            label: "beta well-definedness".into(),
            witness: "beta does not factor through the base change".into(),
        });
    }
    // beta is an isomorphism in the flat case
    if s_ext_r.dim() != ext_s.dim || !beta.is_invertible() {
        return Err(Error::EquivalenceViolation {
            label: "beta isomorphism".into(),
            witness: format!(
                "dim S tensor Ext_R = {}, dim Ext_S = {}, invertible: {}",
                s_ext_r.dim(),
                ext_s.dim,
                beta.is_invertible()
            ),
        });
    }
    Ok(Prop32Machine {
        res,
        deltas_r,
        deltas_s,
        beta: BetaIso {
            source: s_ext_r,
            beta,
            ext_r_dim: ext_r.dim,
            ext_s_dim: ext_s.dim,
            alpha,
        },
        n1,
    })
}

pub enum Prop32Outcome {
    /// The middle descends: the R-module and a verified witness.
    Extended { module: FModule, iso: Mat },
    /// The class does not lie in the image of alpha.
    DescentObstruction { coker_alpha_dim: usize },
}

/// Case 1: given the witnesses for N1 and N2 and a short exact sequence
/// 0 -> N1 -> N -> N2 -> 0 (maps included), decide whether the middle is
/// extended by pulling its class through beta and alpha.
#[allow(clippy::too_many_arguments)]
pub fn prop32_extension(
    e: &FiniteExtension,
    m1: &FModule,
    iso1: &Mat,
    m2: &FModule,
    iso2: &Mat,
    n: &FModule,
    incl: &Mat,
    proj: &Mat,
) -> Result<Prop32Outcome> {
    let s = e.phi.target();
    let f = s.field().clone();
    let machine = prop32_machine(e, m1, m2)?;
    let (n1_model, _) = FModule::base_change(&e.phi, m1);
    let (n2_model, _) = FModule::base_change(&e.phi, m2);
    verify_witness(e, m1, &n1_model.clone(), &Mat::identity(&f, n1_model.dim()))?;
    // the provided witnesses: iso1: n1_model -> N1 (subobject of N via incl),
    // iso2: n2_model -> N2
    // augmentation of the pushed resolution: F0^S -> n2_model
    let b0 = machine.res.betti[0];
    let ns = s.dim();
    // S-linear augmentation on the pushed resolution: generators of F0 map to
    // iota(g_i) in n2_model
    let (_, _, iota2) = FModule::base_change_with_maps(&e.phi, m2);
    let mut aug = Mat::zero(&f, n2_model.dim(), b0 * ns);
    for i in 0..b0 {
        let g = iota2.mul(&machine.res.augmentation.col(i));
        for b in 0..ns {
            let v = n2_model.action_of(&s.basis_elem(b)).mul(&g);
            for rr in 0..n2_model.dim() {
                aug.set(rr, i * ns + b, v.get(rr, 0).clone());
            }
        }
    }
    // p: F0^S -> N2 through iso2; lift through proj: N -> N2 via generator
    // preimages, extended S-linearly
    let p_map = iso2.mul(&aug);
    let mut p_tilde = Mat::zero(&f, n.dim(), b0 * ns);
    for i in 0..b0 {
        let gen_col = i * ns + s.unit_index();
        let target = p_map.col(gen_col);
        let pre = proj
            .solve(&target)
            .ok_or_else(|| Error::Invariant("projection not onto".into()))?;
        for b in 0..ns {
            let v = n.action_of(&s.basis_elem(b)).mul(&pre);
            for rr in 0..n.dim() {
                p_tilde.set(rr, i * ns + b, v.get(rr, 0).clone());
            }
        }
    }
    // the cocycle: p_tilde . d1^S lands in ker(proj) = incl(N1)
    let d1_pushed = {
        let d = &machine.res.diffs[0];
        let entries: Vec<_> = (0..d.rows * d.cols)
            .map(|idx| e.phi.apply(&d.entries[idx]))
            .collect();
        crate::resolution::AlgMat {
            algebra: s.clone(),
            rows: d.rows,
            cols: d.cols,
            entries,
        }
        .to_k_matrix()
    };
    let into_n = p_tilde.mul(&d1_pushed);
    let in_n1 = incl
        .solve(&into_n)
        .ok_or_else(|| Error::Invariant("boundary of the lift does not land in N1".into()))?;
    // express in the n1_model through iso1, then read off generator values
    let iso1_inv = iso1
        .inverse()
        .ok_or_else(|| Error::Invariant("witness not invertible".into()))?;
    let in_model = iso1_inv.mul(&in_n1);
    let b1 = machine.res.betti[1];
    let nn1 = machine.n1.dim();
    let mut xi = Mat::zero(&f, b1 * nn1, 1);
    for j in 0..b1 {
        let gen_col = j * ns + s.unit_index();
        for rr in 0..nn1 {
            xi.set(j * nn1 + rr, 0, in_model.get(rr, gen_col).clone());
        }
    }
    // class in Ext_S, pulled through beta, membership in im(alpha)
    let ext_s = ExtGroup::new(&machine.deltas_s, 1, b1 * nn1, &f);
    let cls = ext_s
        .class_of(&xi)
        .ok_or_else(|| Error::Invariant("lifted boundary is not a cocycle".into()))?;
    let cls_vec = Mat::col_vec(&f, cls);
    let beta_inv = machine.beta.beta.inverse().expect("beta invertible");
    let in_source = beta_inv.mul(&cls_vec);
    match machine.beta.alpha.solve(&in_source) {
        Some(y) => {
            // realize the extension over R from the descended class
            let ext_r = ExtGroup::new(&machine.deltas_r, 1, b1 * m1.dim(), &f);
            let mut zeta = Mat::zero(&f, b1 * m1.dim(), 1);
            for j in 0..ext_r.dim.min(y.rows()) {
                zeta = zeta.add(&ext_r.reps.col(j).scale(y.get(j, 0)));
            }
            let middle = extension_middle(m1, &machine.res, &zeta)?;
            let (sm, _) = FModule::base_change(&e.phi, &middle);
            match is_isomorphic(&sm, n) {
                Some(w) => Ok(Prop32Outcome::Extended {
                    module: middle,
                    iso: w,
                }),
                None => Err(Error::EquivalenceViolation {
                    label: "descended extension".into(),
                    witness: "base change of the descended middle is not isomorphic to N".into(),
                }),
            }
        }
        None => Ok(Prop32Outcome::DescentObstruction {
            coker_alpha_dim: machine.beta.source.dim() - machine.beta.alpha.rank(),
        }),
    }
}

/// The pushout middle of an extension class: coker of (zeta, -d1): F1 -> M1 + F0.
fn extension_middle(m1: &FModule, res: &Resolution, zeta: &Mat) -> Result<FModule> {
    let a = m1.algebra().clone();
    let f = a.field().clone();
    let n = a.dim();
    let b0 = res.betti[0];
    let b1 = res.betti[1];
    let free0 = FModule::free(&a, b0);
    let (ambient, injections) = FModule::direct_sum(&[m1.clone(), free0]);
    let d1 = res.diffs[0].to_k_matrix();
    // columns: images of the generators of F1
    let mut gens = Mat::zero(&f, ambient.dim(), b1);
    for j in 0..b1 {
        // zeta value on generator j
        let mut zv = Mat::zero(&f, m1.dim(), 1);
        for rr in 0..m1.dim() {
            zv.set(rr, 0, zeta.get(j * m1.dim() + rr, 0).clone());
        }
        let into_m1 = injections[0].mul(&zv);
        // -d1 on generator j
        let gcol = j * n + a.unit_index();
        let dv = d1.col(gcol).neg();
        let into_f0 = injections[1].mul(&dv);
        let total = into_m1.add(&into_f0);
        for rr in 0..ambient.dim() {
            gens.set(rr, j, total.get(rr, 0).clone());
        }
    }
    Ok(ambient.quotient(&gens).0)
}

/// Case 2 (kernel): a map N -> N2 with both extended descends to f: M -> M2
/// when its class lies in the image of alpha for Hom; then N1 = S tensor ker(f).
pub fn prop32_kernel(
    e: &FiniteExtension,
    m: &FModule,
    iso: &Mat,
    m2: &FModule,
    iso2: &Mat,
    f_tilde: &Mat,
) -> Result<Prop32Outcome> {
    let s = e.phi.target();
    let field = s.field().clone();
    let (n_model, _) = FModule::base_change(&e.phi, m);
    let (n2_model, _) = FModule::base_change(&e.phi, m2);
    // transport f_tilde to the models
    let iso_inv = iso2
        .inverse()
        .ok_or_else(|| Error::Invariant("witness not invertible".into()))?;
    let f_model = iso_inv.mul(&f_tilde.mul(iso));
    // beta for Hom: S tensor Hom_R(M, M2) -> Hom_S(SM, SM2)
    let (hom_r_mod, hom_r) = hom_module(m, m2);
    let (s_hom, proj_h, alpha) = FModule::base_change_with_maps(&e.phi, &hom_r_mod);
    let hom_s = s_linear_maps(&n_model, &n2_model, s);
    // beta on generators: s_a tensor f_j -> action(s_a) . S tensor f_j
    let (_, proj_m, _) = FModule::base_change_with_maps(&e.phi, m);
    let (_, _, _iota2) = FModule::base_change_with_maps(&e.phi, m2);
    let lift_m = proj_m
        .solve(&Mat::identity(&field, n_model.dim()))
        .expect("onto");
    let ns = s.dim();
    let er = hom_r_mod.dim();
    let mut beta_big = Mat::zero(&field, hom_s.dim(), ns * er);
    for a_idx in 0..ns {
        let act = n2_model.action_of(&s.basis_elem(a_idx));
        for (j, fj) in hom_r.basis.iter().enumerate() {
            // S tensor f_j on the big spaces: (id tensor f_j)
            let big = Mat::from_fn(&field, ns * m2.dim(), ns * m.dim(), |rr, cc| {
                if rr / m2.dim() == cc / m.dim() {
                    fj.get(rr % m2.dim(), cc % m.dim()).clone()
                } else {
                    field.zero()
                }
            });
            let (_, proj_m2, _) = FModule::base_change_with_maps(&e.phi, m2);
            let induced = act.mul(&proj_m2.mul(&big).mul(&lift_m));
            let coords = hom_s
                .coords_of(&induced)
                .ok_or_else(|| Error::EquivalenceViolation {
                    label: "beta for Hom".into(),
                    witness: "induced map is not S-linear".into(),
                })?;
            for (rr, c) in coords.iter().enumerate() {
                beta_big.set(rr, a_idx * er + j, c.clone());
            }
        }
    }
    let lift_h = proj_h
        .solve(&Mat::identity(&field, s_hom.dim()))
        .expect("onto");
    let beta = beta_big.mul(&lift_h);
    if !beta_big.mul(&proj_h.kernel()).is_zero()
        || s_hom.dim() != hom_s.dim()
        || !beta.is_invertible()
    {
        return Err(Error::EquivalenceViolation {
            label: "beta for Hom".into(),
            witness: format!("dims {} vs {}", s_hom.dim(), hom_s.dim()),
        });
    }
    let coords = hom_s
        .coords_of(&f_model)
        .ok_or_else(|| Error::Invariant("given map is not S-linear".into()))?;
    let in_source = beta.inverse().unwrap().mul(&Mat::col_vec(&field, coords));
    match alpha.solve(&in_source) {
        Some(y) => {
            let f_r = hom_r.combination(&y.col_entries(0));
            let ker = f_r.kernel().col_basis();
            let (ker_mod, _) = m.submodule(&ker);
            let (s_ker, _) = FModule::base_change(&e.phi, &ker_mod);
            // N1 = kernel of f_tilde inside N
            let n1_cols = f_tilde.kernel().col_basis();
            let n_outer = outer_module_of(f_tilde, iso, &n_model);
            let (n1_mod, _) = n_outer.submodule(&n1_cols);
            match is_isomorphic(&s_ker, &n1_mod) {
                Some(w) => Ok(Prop32Outcome::Extended {
                    module: ker_mod,
                    iso: w,
                }),
                None => Err(Error::EquivalenceViolation {
                    label: "descended kernel".into(),
                    witness: "S tensor ker(f) not isomorphic to ker of the given map".into(),
                }),
            }
        }
        None => Ok(Prop32Outcome::DescentObstruction {
            coker_alpha_dim: s_hom.dim() - alpha.rank(),
        }),
    }
}

/// Case 3 (cokernel): a map N1 -> N with both ends extended descends to
/// g: M1 -> M when its class lies in the image of alpha for Hom; then
/// N2 = S tensor coker(g).
pub fn prop32_cokernel(
    e: &FiniteExtension,
    m1: &FModule,
    iso1: &Mat,
    m: &FModule,
    iso: &Mat,
    g_tilde: &Mat,
) -> Result<Prop32Outcome> {
    let s = e.phi.target();
    let field = s.field().clone();
    let (n1_model, _) = FModule::base_change(&e.phi, m1);
    let (n_model, _) = FModule::base_change(&e.phi, m);
    let iso_inv = iso
        .inverse()
        .ok_or_else(|| Error::Invariant("witness not invertible".into()))?;
    let g_model = iso_inv.mul(&g_tilde.mul(iso1));
    // beta for Hom(M1, M)
    let (hom_r_mod, hom_r) = hom_module(m1, m);
    let (s_hom, proj_h, alpha) = FModule::base_change_with_maps(&e.phi, &hom_r_mod);
    let hom_s = s_linear_maps(&n1_model, &n_model, s);
    let (_, proj_m1, _) = FModule::base_change_with_maps(&e.phi, m1);
    let lift_m1 = proj_m1
        .solve(&Mat::identity(&field, n1_model.dim()))
        .expect("onto");
    let ns = s.dim();
    let er = hom_r_mod.dim();
    let mut beta_big = Mat::zero(&field, hom_s.dim(), ns * er);
    for a_idx in 0..ns {
        let act = n_model.action_of(&s.basis_elem(a_idx));
        for (j, gj) in hom_r.basis.iter().enumerate() {
            let big = Mat::from_fn(&field, ns * m.dim(), ns * m1.dim(), |rr, cc| {
                if rr / m.dim() == cc / m1.dim() {
                    gj.get(rr % m.dim(), cc % m1.dim()).clone()
                } else {
                    field.zero()
                }
            });
            let (_, proj_m, _) = FModule::base_change_with_maps(&e.phi, m);
            let induced = act.mul(&proj_m.mul(&big).mul(&lift_m1));
            let coords = hom_s
                .coords_of(&induced)
                .ok_or_else(|| Error::EquivalenceViolation {
                    label: "beta for Hom".into(),
                    witness: "induced map is not S-linear".into(),
                })?;
            for (rr, c) in coords.iter().enumerate() {
                beta_big.set(rr, a_idx * er + j, c.clone());
            }
        }
    }
    let lift_h = proj_h
        .solve(&Mat::identity(&field, s_hom.dim()))
        .expect("onto");
    let beta = beta_big.mul(&lift_h);
    if !beta_big.mul(&proj_h.kernel()).is_zero()
        || s_hom.dim() != hom_s.dim()
        || !beta.is_invertible()
    {
        return Err(Error::EquivalenceViolation {
            label: "beta for Hom".into(),
            witness: format!("dims {} vs {}", s_hom.dim(), hom_s.dim()),
        });
    }
    let coords = hom_s
        .coords_of(&g_model)
        .ok_or_else(|| Error::Invariant("given map is not S-linear".into()))?;
    let in_source = beta.inverse().unwrap().mul(&Mat::col_vec(&field, coords));
    match alpha.solve(&in_source) {
        Some(y) => {
            let g_r = hom_r.combination(&y.col_entries(0));
            // cokernel of g over R
            let image = g_r.col_basis();
            let (coker, _) = m.quotient(&image);
            let (s_coker, _) = FModule::base_change(&e.phi, &coker);
            // cokernel of the given map over S
            let n_outer = outer_module_of(&g_tilde.clone(), iso, &n_model);
            let (coker_s, _) = n_outer.quotient(&g_tilde.col_basis());
            match is_isomorphic(&s_coker, &coker_s) {
                Some(w) => Ok(Prop32Outcome::Extended {
                    module: coker,
                    iso: w,
                }),
                None => Err(Error::EquivalenceViolation {
                    label: "descended cokernel".into(),
                    witness: "S tensor coker(g) not isomorphic to the cokernel of the given map"
                        .into(),
                }),
            }
        }
        None => Ok(Prop32Outcome::DescentObstruction {
            coker_alpha_dim: s_hom.dim() - alpha.rank(),
        }),
    }
}

/// The S-module the given outer map acts on (N with its structure from the
/// witness conjugation).
fn outer_module_of(_f_tilde: &Mat, iso: &Mat, n_model: &FModule) -> FModule {
    // N carries the structure conjugated from the model by the witness
    let f = n_model.algebra().field();
    let iso_inv = iso.inverse().expect("witness invertible");
    let action: Vec<Mat> = (0..n_model.algebra().dim())
        .map(|b| iso.mul(n_model.action(b)).mul(&iso_inv))
        .collect();
    let _ = f;
    FModule::new(n_model.algebra().clone(), action).expect("conjugated module")
}

/// Hom_S(M, N) as a HomSpace (all S-linear maps).
fn s_linear_maps(m: &FModule, n: &FModule, _s: &crate::algebra::Algebra) -> HomSpace {
    crate::fmodule::hom_space(m, n)
}
