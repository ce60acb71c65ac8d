//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured wall time. Tolerances are exact (no floating point anywhere);
//! the stated time bounds are asserted.

use std::time::Instant;

use homascend::algebra::{check_dagger, Algebra, AlgebraMap};
use homascend::ascent::{
    compatibility_report, gallery_field_extension, gallery_frobenius, gallery_regular_quotient,
    ring_retract, vmax, GalleryReport, RetractOutcome,
};
use homascend::complexes::{
    hom_complex, koszul, projectivization_harness, resolution_complex, BoundedComplex,
    ComplexMorphism,
};
use homascend::extended::{
    is_extended, matrix_equiv_1x1, separability_idempotent, summand_of_extended, FiniteExtension,
    TwoOfThree, ORACLE_SCALAR_GRID,
};
use homascend::field::{Field, FieldElem};
use homascend::fmodule::FModule;
use homascend::krs::{is_isomorphic, krs_decompose, verify_module_iso};
use homascend::mat::Mat;
use homascend::pidmodel::{
    classify, completion_ascent, ext_pid, prop32_case1_pid, thm113_decision, vmax_pid,
    ExtensionClass, PIDModule, PIDPresentation, PidVector, Side,
};
use homascend::poly::Poly;
use homascend::resolution::{ext_dim, minimal_resolution};
use homascend::rng::Rng;
use homascend::runner::{emit, run, EmitFormat};
use homascend::session::parse_session;
use homascend::snf::{snf_localized, PolyMat};

fn qq() -> Field {
    Field::rationals()
}

fn gaussian() -> Field {
    let q = qq();
    Field::extension(q.clone(), vec![q.one(), q.zero(), q.one()], "i").unwrap()
}

fn plane_extension() -> FiniteExtension {
    let r = Algebra::from_presentation(&qq(), &["X", "Y"], &[], 2).unwrap();
    let (_s, phi) = Algebra::tensor_extension(&gaussian(), &r).unwrap();
    FiniteExtension::new(phi).unwrap()
}

fn frobenius_extension() -> FiniteExtension {
    let f2 = Field::prime(2).unwrap();
    let r = Algebra::truncated_polynomial(&f2, "y", 2).unwrap();
    let s = Algebra::truncated_polynomial(&f2, "x", 4).unwrap();
    let mut mat = Mat::zero(&f2, 4, 2);
    mat.set(0, 0, f2.one());
    mat.set(2, 1, f2.one());
    FiniteExtension::new(AlgebraMap::new(r, s, mat).unwrap()).unwrap()
}

/// N = S/(X + c Y) over the plane extension, c an extension-field scalar.
fn linear_form_quotient(s: &Algebra, c: &FieldElem) -> FModule {
    let f = s.field();
    let x = s.basis_elem(s.label_index("X").unwrap());
    let y = s.basis_elem(s.label_index("Y").unwrap());
    let cy = match c {
        FieldElem::Ext(coords) => {
            let mut acc = s.zero_elem();
            for (p, cp) in coords.iter().enumerate() {
                if f.is_zero(cp) {
                    continue;
                }
                let t_pow = if p == 0 {
                    s.unit_elem()
                } else if p == 1 {
                    s.basis_elem(s.label_index("i").unwrap())
                } else {
                    s.basis_elem(s.label_index(&format!("i^{p}")).unwrap())
                };
                acc = s.add_elems(&acc, &s.scale_elem(cp, &s.mul_elems(&t_pow, &y)));
            }
            acc
        }
        _ => s.scale_elem(c, &y),
    };
    let form = s.add_elems(&x, &cy);
    let reg = FModule::regular(s);
    let sat = reg.saturate(&Mat::col_vec(f, form));
    reg.quotient(&sat).0
}

#[test]
fn acceptance_01_regular_element_ext_values() {
    let t0 = Instant::now();
    let rx = PIDModule::new(0, vec![1], Side::OverR);
    let r = PIDModule::new(1, vec![], Side::OverR);
    let e0 = ext_pid(&rx, &r, 0).module;
    let e1 = ext_pid(&rx, &r, 1).module;
    let e2 = ext_pid(&rx, &r, 2).module;
    assert!(e0.is_zero());
    assert_eq!(e1, PIDModule::new(0, vec![1], Side::OverR));
    assert!(e2.is_zero());
    match gallery_regular_quotient() {
        GalleryReport::RegularElementQuotient {
            ext0, ext1, ext2, ..
        } => {
            assert!(ext0.is_zero());
            assert_eq!(ext1.exponents, vec![1]);
            assert!(ext2.is_zero());
        }
        _ => panic!("wrong gallery variant"),
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}, bound 1 s");
    println!("ACCEPTANCE 1: PASS (Ext invariants 0 | (1) | 0) in {dt:?}");
}

#[test]
fn acceptance_02_gorenstein_ext_vanishing_and_no_retract() {
    for n in [2usize, 3, 4] {
        let t0 = Instant::now();
        let r = Algebra::truncated_polynomial(&qq(), "x", n).unwrap();
        let k = FModule::residue(&r);
        let reg = FModule::regular(&r);
        assert_eq!(ext_dim(&k, &reg, 0).0, 1, "n = {n}: dim Ext^0 must be 1");
        for i in 1..=5 {
            assert_eq!(ext_dim(&k, &reg, i).0, 0, "n = {n}: Ext^{i} must vanish");
        }
        let (_k_alg, phi) = r.quotient_by_ideal(r.radical()).unwrap();
        assert!(matches!(ring_retract(&phi), RetractOutcome::NotExists));
        let dt = t0.elapsed();
        assert!(dt.as_secs_f64() < 1.0, "n = {n} took {dt:?}, bound 1 s");
        println!("ACCEPTANCE 2 (n = {n}): PASS in {dt:?}");
    }
}

#[test]
fn acceptance_03_field_extension_gallery() {
    let t0 = Instant::now();
    let rep = gallery_field_extension(5).unwrap();
    match rep {
        GalleryReport::FieldExtension {
            flat,
            free_rank,
            dagger,
            ext_dims_above_zero,
            compatible_structure,
            retract,
        } => {
            assert!(flat);
            assert_eq!(free_rank, 2);
            assert!(!dagger.residue_iso);
            assert_eq!(ext_dims_above_zero, vec![0; 5]);
            assert!(!compatible_structure);
            assert_eq!(retract, "none");
        }
        _ => panic!("wrong gallery variant"),
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 1.0, "took {dt:?}, bound 1 s");
    println!("ACCEPTANCE 3: PASS in {dt:?}");
}

#[test]
fn acceptance_04_frobenius_truncated_gallery() {
    let t0 = Instant::now();
    let rep = gallery_frobenius(2, 2, 5).unwrap();
    match rep {
        GalleryReport::FrobeniusTruncated {
            flat,
            free_rank,
            ext_dims_above_zero,
            retract,
            ..
        } => {
            assert!(flat);
            assert_eq!(free_rank, 2);
            assert_eq!(ext_dims_above_zero, vec![0; 5]);
            assert_eq!(retract, "none");
        }
        _ => panic!("wrong gallery variant"),
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "took {dt:?}, bound 5 s");
    println!("ACCEPTANCE 4: PASS in {dt:?}");
}

/// Brute-force descent oracle: enumerate all module structures on k^2 over
/// the square-zero plane with action entries drawn from the configured
/// scalar grid, and check whether any base-changes to N.
fn brute_force_extended(e: &FiniteExtension, n: &FModule) -> bool {
    let r = e.phi.source();
    let f = r.field();
    // square-zero 2x2 matrices over the grid
    let mut square_zero: Vec<Mat> = Vec::new();
    let g = &ORACLE_SCALAR_GRID;
    for a in g {
        for b in g {
            for c in g {
                for d in g {
                    let m = Mat::from_rows(
                        f,
                        vec![
                            vec![f.from_i64(*a), f.from_i64(*b)],
                            vec![f.from_i64(*c), f.from_i64(*d)],
                        ],
                    );
                    if m.mul(&m).is_zero() {
                        square_zero.push(m);
                    }
                }
            }
        }
    }
    let unit_idx = r.unit_index();
    let x_idx = r.label_index("X").unwrap();
    let y_idx = r.label_index("Y").unwrap();
    let mut candidates = 0usize;
    for mx in &square_zero {
        for my in &square_zero {
            if !mx.mul(my).is_zero() || !my.mul(mx).is_zero() {
                continue;
            }
            let mut action = vec![Mat::zero(f, 2, 2); r.dim()];
            action[unit_idx] = Mat::identity(f, 2);
            action[x_idx] = mx.clone();
            action[y_idx] = my.clone();
            let Ok(m) = FModule::new(r.clone(), action) else {
                continue;
            };
            candidates += 1;
            let (sm, _) = FModule::base_change(&e.phi, &m);
            if is_isomorphic(&sm, n).is_some() {
                return true;
            }
        }
    }
    assert!(candidates > 0, "oracle grid produced no candidates");
    false
}

#[test]
fn acceptance_05_linear_form_descent_with_oracle() {
    let t0 = Instant::now();
    let e = plane_extension();
    let s = e.phi.target().clone();
    let qi = gaussian();
    let i_elem = qi.generator().unwrap();
    let cases: Vec<(FieldElem, bool)> = vec![
        (qi.from_i64(0), true),
        (qi.from_i64(1), true),
        (qi.from_i64(-2), true),
        (i_elem.clone(), false),
        (qi.add(&qi.one(), &i_elem), false),
    ];
    for (c, expected) in &cases {
        let n = linear_form_quotient(&s, c);
        let got = is_extended(&e, &n).unwrap().is_some();
        assert_eq!(got, *expected, "is_extended for c = {}", qi.fmt_elem(c));
        let equiv = matrix_equiv_1x1(&e, c).unwrap();
        assert_eq!(equiv, *expected, "matrix_equiv for c = {}", qi.fmt_elem(c));
        let oracle = brute_force_extended(&e, &n);
        assert_eq!(oracle, *expected, "brute force for c = {}", qi.fmt_elem(c));
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}, bound 30 s");
    println!("ACCEPTANCE 5: PASS (5 scalars, three routes agree) in {dt:?}");
}

#[test]
fn acceptance_06_ascent_equivalence_suite() {
    let t0 = Instant::now();
    // three surjection pairs
    let pairs: Vec<(Algebra, AlgebraMap)> = vec![
        {
            let r = Algebra::truncated_polynomial(&qq(), "x", 4).unwrap();
            let ideal = Mat::col_vec(r.field(), r.basis_elem(2));
            let (_s, phi) = r.quotient_by_ideal(&ideal).unwrap();
            (r, phi)
        },
        {
            let r = Algebra::truncated_polynomial(&qq(), "x", 3).unwrap();
            let ideal = Mat::col_vec(r.field(), r.basis_elem(1));
            let (_s, phi) = r.quotient_by_ideal(&ideal).unwrap();
            (r, phi)
        },
        {
            let r = Algebra::from_presentation(&qq(), &["X", "Y"], &[], 2).unwrap();
            let ideal = Mat::col_vec(r.field(), r.basis_elem(2));
            let (_s, phi) = r.quotient_by_ideal(&ideal).unwrap();
            (r, phi)
        },
    ];
    let mut instances = 0;
    for (r, phi) in &pairs {
        assert!(check_dagger(phi).dagger);
        let mut modules: Vec<FModule> = Vec::new();
        // all cyclic modules R/(single basis generator)
        for b in 0..r.dim() {
            if b == r.unit_index() {
                continue;
            }
            let (m, _) = FModule::cyclic(r, &[r.basis_elem(b)]).unwrap();
            if m.dim() > 0 {
                modules.push(m);
            }
        }
        modules.push(FModule::regular(r));
        modules.push(FModule::residue(r));
        // random submodule / quotient constructions
        let mut rng = Rng::new(0xacc6);
        while modules.len() < 20 {
            let m = FModule::random_module(r, &mut rng, 6);
            if rng.bool() {
                let gens = Mat::random(r.field(), m.dim(), 1, &mut rng);
                let (sub, _) = m.submodule(&gens);
                if sub.dim() > 0 {
                    modules.push(sub);
                    continue;
                }
            }
            modules.push(m);
        }
        for m in &modules {
            // the report itself hard-fails unless (1), (2), (3) agree
            let (rep, witness) = compatibility_report(phi, m, 2).unwrap();
            assert_eq!(rep.compatible_structure, rep.iota_bijective);
            assert_eq!(rep.compatible_structure, rep.epsilon_bijective);
            if let Some(w) = witness {
                assert_eq!(w.s_module.dim(), m.dim());
            }
            instances += 1;
        }
    }
    assert!(instances >= 60);
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "took {dt:?}, bound 10 s");
    println!(
        "ACCEPTANCE 6: PASS ({instances} instances over {} pairs) in {dt:?}",
        pairs.len()
    );
}

#[test]
fn acceptance_07_vmax_triple_agreement() {
    let t0 = Instant::now();
    let mut instances = 0;
    // surjection pair gallery: V(M) computed three ways inside vmax, which
    // hard-fails on any disagreement
    let r = Algebra::truncated_polynomial(&qq(), "x", 4).unwrap();
    let ideal = Mat::col_vec(r.field(), r.basis_elem(2));
    let (s, phi) = r.quotient_by_ideal(&ideal).unwrap();
    let mut rng = Rng::new(0x77);
    let ambients = vec![
        FModule::regular(&s),
        FModule::free(&s, 2),
        FModule::direct_sum(&[FModule::residue(&s), FModule::regular(&s)]).0,
    ];
    for n in &ambients {
        let n_over_r = FModule::restrict(&phi, n);
        for _ in 0..17 {
            let gens = Mat::random(s.field(), n.dim(), 1 + rng.below(2) as usize, &mut rng);
            let (_, m_cols) = n_over_r.submodule(&gens);
            let v = vmax(&phi, n, &m_cols).unwrap();
            // over a surjection every R-submodule is an S-submodule
            assert!(v.v_cols.span_eq(&m_cols));
            instances += 1;
        }
    }
    assert!(
        instances >= 50,
        "need at least 50 instances, got {instances}"
    );
    // the two completion-model examples
    let f = qq();
    let n_free = PIDModule::new(1, vec![], Side::OverS);
    let gens = vec![PidVector {
        torsion: vec![],
        free: vec![Poly::one(&f)],
    }];
    let rep = vmax_pid(&f, &n_free, &gens, 8).unwrap();
    assert!(rep.v.is_zero(), "V(R inside S) must vanish");
    let n_mixed = PIDModule::new(1, vec![2], Side::OverS);
    let gens = vec![
        PidVector {
            torsion: vec![Poly::one(&f)],
            free: vec![Poly::zero(&f)],
        },
        PidVector {
            torsion: vec![Poly::zero(&f)],
            free: vec![Poly::one(&f)],
        },
    ];
    let rep = vmax_pid(&f, &n_mixed, &gens, 8).unwrap();
    assert_eq!(rep.v, PIDModule::new(0, vec![2], Side::OverS));
    assert_eq!(rep.k_dim, 2);
    let dt = t0.elapsed();
    println!("ACCEPTANCE 7: PASS ({instances} instances + 2 completion examples) in {dt:?}");
}

#[test]
fn acceptance_08_koszul_and_hom_complex_suite() {
    let t0 = Instant::now();
    let algebras: Vec<Algebra> = vec![
        Algebra::truncated_polynomial(&qq(), "x", 3).unwrap(),
        Algebra::from_presentation(&qq(), &["X", "Y"], &[], 3).unwrap(),
        {
            let f5 = Field::prime(5).unwrap();
            let xy = homascend::mpoly::MPoly::var(&f5, 2, 0)
                .mul(&homascend::mpoly::MPoly::var(&f5, 2, 1));
            let x3 = homascend::mpoly::MPoly::var(&f5, 2, 0).pow(3);
            let y3 = homascend::mpoly::MPoly::var(&f5, 2, 1).pow(3);
            Algebra::from_presentation(&f5, &["x", "y"], &[xy, x3, y3], 3).unwrap()
        },
    ];
    for a in &algebras {
        let gens = a.radical_min_gens();
        let m = gens.len();
        let k_complex = koszul(a, &gens);
        // ranks are binomial coefficients
        for j in 0..=m {
            let expected = binomial(m, j);
            assert_eq!(
                k_complex.dim_at(j as i64),
                expected * a.dim(),
                "rank at {j}"
            );
        }
        // H_0 = k and m annihilates all homology
        let h0 = k_complex.homology(0);
        assert_eq!(h0.module.dim(), a.residue_dim());
        for n in 0..=m as i64 {
            let h = k_complex.homology(n);
            for c in 0..a.radical().cols() {
                assert!(
                    h.module.action_of(&a.radical().col_entries(c)).is_zero(),
                    "m must annihilate H_{n}"
                );
            }
        }
    }
    // Ext via hom complex equals Ext via minimal resolution, randomized
    let mut rng = Rng::new(0x8888);
    let mut checked = 0;
    while checked < 20 {
        let a = &algebras[(rng.below(algebras.len() as u64)) as usize];
        let m = FModule::random_module(a, &mut rng, 4);
        let n = FModule::random_module(a, &mut rng, 4);
        if m.dim() == 0 || n.dim() == 0 {
            continue;
        }
        let i = rng.below(4) as usize;
        let res = minimal_resolution(&m, i + 1);
        let p = resolution_complex(&res);
        let h = hom_complex(&p, &BoundedComplex::single(&n, 0));
        let via_complex = h.complex.homology(-(i as i64)).module.dim();
        let via_res = ext_dim(&m, &n, i).0;
        assert_eq!(via_complex, via_res, "Ext^{i} routes disagree");
        checked += 1;
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 20.0, "took {dt:?}, bound 20 s");
    println!("ACCEPTANCE 8: PASS (3 Koszul galleries + {checked} Ext cross-checks) in {dt:?}");
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A random chain morphism into or out of small complexes, drawn from the
/// kernel of the degree-0 Hom-complex differential.
fn random_morphism_space(x: &BoundedComplex, y: &BoundedComplex) -> Vec<ComplexMorphism> {
    let h = hom_complex(x, y);
    let d0 = h.complex.diff_at(0);
    let ker = d0.kernel();
    let idx0 = (0 - h.lo) as usize;
    let mut out = Vec::new();
    for c in 0..ker.cols() {
        // reassemble the block components
        let mut comps = Vec::new();
        let lo = x.lo().min(y.lo());
        let hi = x.hi().max(y.hi());
        let mut offset = 0usize;
        let mut by_p: std::collections::BTreeMap<i64, Mat> = Default::default();
        for (p, hs) in &h.blocks[idx0] {
            let coeffs: Vec<FieldElem> = (0..hs.dim())
                .map(|j| ker.get(offset + j, c).clone())
                .collect();
            if hs.dim() > 0 {
                by_p.insert(*p, hs.combination(&coeffs));
            }
            offset += hs.dim();
        }
        for nn in lo..=hi {
            match by_p.get(&nn) {
                Some(m) => comps.push(m.clone()),
                None => comps.push(Mat::zero(x.algebra().field(), y.dim_at(nn), x.dim_at(nn))),
            }
        }
        if let Ok(m) = ComplexMorphism::new(x.clone(), y.clone(), lo, comps) {
            out.push(m);
        }
    }
    out
}

#[test]
fn acceptance_09_projectivization_harness() {
    let t0 = Instant::now();
    let algebras: Vec<Algebra> = vec![
        Algebra::truncated_polynomial(&qq(), "x", 2).unwrap(),
        Algebra::truncated_polynomial(&qq(), "x", 3).unwrap(),
        Algebra::from_presentation(&qq(), &["X", "Y"], &[], 2).unwrap(),
    ];
    let mut rng = Rng::new(0x24ac);
    let mut total = 0usize;
    let mut hom_qis_count = 0usize;
    while total < 100 {
        let a = &algebras[(rng.below(algebras.len() as u64)) as usize];
        let p = koszul(a, &a.radical_min_gens());
        // build a source complex: a short resolution piece or single module
        let m = FModule::random_module(a, &mut rng, 3);
        if m.dim() == 0 {
            continue;
        }
        let res = minimal_resolution(&m, 1);
        let x = resolution_complex(&res);
        let alpha = match rng.below(4) {
            0 => ComplexMorphism::identity(&x),
            3 => {
                // inclusion of the target into a mapping cone
                let m2 = FModule::random_module(a, &mut rng, 3);
                if m2.dim() == 0 {
                    continue;
                }
                let res2 = minimal_resolution(&m2, 1);
                let y = resolution_complex(&res2);
                let space = random_morphism_space(&x, &y);
                if space.is_empty() {
                    continue;
                }
                let base = space[(rng.below(space.len() as u64)) as usize].clone();
                let cone = base.cone();
                let f = a.field();
                let mut comps = Vec::new();
                let lo = y.lo().min(cone.lo());
                let hi = y.hi().max(cone.hi());
                for nn in lo..=hi {
                    let rows = cone.dim_at(nn);
                    let cols = y.dim_at(nn);
                    let x_part = base.source.dim_at(nn - 1);
                    comps.push(Mat::from_fn(f, rows, cols, |rr, cc| {
                        if rr >= x_part && rr - x_part == cc {
                            f.one()
                        } else {
                            f.zero()
                        }
                    }));
                }
                match ComplexMorphism::new(y, cone, lo, comps) {
                    Ok(mm) => mm,
                    Err(_) => continue,
                }
            }
            1 => {
                // augmentation-style morphism onto the module in degree 0
                let y = BoundedComplex::single(&m, 0);
                let aug = res.augmentation_k_matrix();
                let zero1 = Mat::zero(a.field(), 0, x.dim_at(1));
                match ComplexMorphism::new(x.clone(), y, 0, vec![aug, zero1]) {
                    Ok(mm) => mm,
                    Err(_) => continue,
                }
            }
            _ => {
                // random member of the chain-morphism space to a second complex
                let m2 = FModule::random_module(a, &mut rng, 3);
                if m2.dim() == 0 {
                    continue;
                }
                let res2 = minimal_resolution(&m2, 1);
                let y = resolution_complex(&res2);
                let space = random_morphism_space(&x, &y);
                if space.is_empty() {
                    continue;
                }
                space[(rng.below(space.len() as u64)) as usize].clone()
            }
        };
        // the harness hard-fails if Hom(P, alpha) is a qis while alpha is not
        let rep = projectivization_harness(&alpha, &p).unwrap();
        if rep.hom_p_alpha_qis {
            hom_qis_count += 1;
            assert!(rep.alpha_qis);
        }
        total += 1;
    }
    assert!(
        hom_qis_count > 0,
        "suite must include genuine quasi-isomorphisms"
    );
    let dt = t0.elapsed();
    println!(
        "ACCEPTANCE 9: PASS ({total} morphisms, {hom_qis_count} with Hom(P, alpha) qis) in {dt:?}"
    );
}

#[test]
fn acceptance_10_krs_and_two_of_three_suite() {
    let t0 = Instant::now();
    let extensions = vec![plane_extension(), frobenius_extension()];
    let mut rng = Rng::new(0x3131);
    for e in &extensions {
        let r = e.phi.source().clone();
        for trial in 0..10 {
            let m = FModule::random_module(&r, &mut rng, 4);
            if m.dim() == 0 {
                continue;
            }
            // restrict(S tensor M) = M^rank
            let (sm, _) = FModule::base_change(&e.phi, &m);
            let back = FModule::restrict(&e.phi, &sm);
            let parts: Vec<FModule> = (0..e.rank).map(|_| m.clone()).collect();
            let (m_power, _) = FModule::direct_sum(&parts);
            let w = is_isomorphic(&back, &m_power)
                .unwrap_or_else(|| panic!("restriction not M^r at trial {trial}"));
            assert!(verify_module_iso(&back, &m_power, &w));
            // two-of-three: erase the second summand and recover it
            let m2 = FModule::random_module(&r, &mut rng, 3);
            if m2.dim() == 0 {
                continue;
            }
            let (n1, _) = FModule::base_change(&e.phi, &m);
            let (n2, _) = FModule::base_change(&e.phi, &m2);
            let f = r.field();
            let sum = homascend::extended::two_of_three_sum(
                e,
                &n1,
                &n2,
                TwoOfThree::BothParts {
                    m1: m.clone(),
                    iso1: Mat::identity(f, n1.dim()),
                    m2: m2.clone(),
                    iso2: Mat::identity(f, n2.dim()),
                },
            )
            .unwrap();
            let recovered = homascend::extended::two_of_three_sum(
                e,
                &n1,
                &n2,
                TwoOfThree::SumAndFirst {
                    m: sum.module.clone(),
                    iso: sum.iso.clone(),
                    m1: m.clone(),
                    iso1: Mat::identity(f, n1.dim()),
                },
            )
            .unwrap();
            assert!(
                is_isomorphic(&recovered.module, &m2).is_some(),
                "recovered complement must match the erased summand"
            );
            // KRS multiset invariance under basis permutations
            let dims_base: Vec<usize> = krs_decompose(&m).pieces.iter().map(|p| p.dim()).collect();
            for _ in 0..10 {
                let dim = m.dim();
                let mut perm: Vec<usize> = (0..dim).collect();
                for i in (1..dim).rev() {
                    let j = rng.below((i + 1) as u64) as usize;
                    perm.swap(i, j);
                }
                let f = r.field();
                let pmat = Mat::from_fn(
                    f,
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
                let pinv = pmat.inverse().unwrap();
                let action: Vec<Mat> = (0..r.dim())
                    .map(|b| pmat.mul(m.action(b)).mul(&pinv))
                    .collect();
                let permuted = FModule::new(r.clone(), action).unwrap();
                let dims: Vec<usize> = krs_decompose(&permuted)
                    .pieces
                    .iter()
                    .map(|p| p.dim())
                    .collect();
                assert_eq!(dims, dims_base, "KRS multiset changed under permutation");
            }
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}, bound 30 s");
    println!("ACCEPTANCE 10: PASS in {dt:?}");
}

#[test]
fn acceptance_11_separability_splitting() {
    let t0 = Instant::now();
    // exact idempotent identities for QQ(i)/QQ
    let q = qq();
    let ground = Algebra::ground(&q);
    let (s, phi) = Algebra::tensor_extension(&gaussian(), &ground).unwrap();
    let e = FiniteExtension::new(phi).unwrap();
    let sep = separability_idempotent(&e).unwrap().expect("separable");
    let t = &sep.tensor;
    // mu(e) = 1
    let mu_e = t.mu.mul(&sep.e);
    assert_eq!(mu_e.col_entries(0), s.unit_elem());
    // (i tensor 1 - 1 tensor i) e = 0
    let i_idx = s.label_index("i").unwrap();
    let killed = t.left[i_idx].sub(&t.right[i_idx]).mul(&sep.e);
    assert!(killed.is_zero());
    // e^2 = e was verified during construction; spot-check the coordinates
    let big = t.lift.mul(&sep.e);
    let half = q.from_ratio(1, 2).unwrap();
    assert_eq!(big.get(0, 0), &half);

    // summand splitting for the non-extended N = S/(X + i Y)
    let plane = plane_extension();
    let qi = gaussian();
    let n = linear_form_quotient(plane.phi.target(), &qi.generator().unwrap());
    let w = summand_of_extended(&plane, &n).unwrap();
    assert!(w.retraction.mul(&w.injection).is_identity());

    // inseparable instance reports no idempotent
    let f2 = Field::prime(2).unwrap();
    let ground2 = Algebra::ground(&f2);
    let s2 = Algebra::truncated_polynomial(&f2, "x", 2).unwrap();
    let mut mat = Mat::zero(&f2, 2, 1);
    mat.set(0, 0, f2.one());
    let phi2 = AlgebraMap::new(ground2, s2, mat).unwrap();
    let e2 = FiniteExtension::new(phi2).unwrap();
    assert!(separability_idempotent(&e2).unwrap().is_none());
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 5.0, "took {dt:?}, bound 5 s");
    println!("ACCEPTANCE 11: PASS in {dt:?}");
}

#[test]
fn acceptance_12_pid_consistency_suite() {
    let t0 = Instant::now();
    // completion ascent and the prime criterion agree on 100 random tuples
    let mut rng = Rng::new(0x9999);
    for _ in 0..100 {
        let a = rng.below(3) as usize;
        let nexp = rng.below(4) as usize;
        let exps: Vec<usize> = (0..nexp).map(|_| 1 + rng.below(5) as usize).collect();
        let m = PIDModule::new(a, exps, Side::OverR);
        let asc = completion_ascent(&m).unwrap();
        let prime = thm113_decision(&m).unwrap();
        assert_eq!(asc.compatible_structure, prime.decision);
    }
    // extension middles match the brute-force enumeration for a + b <= 6
    let f = qq();
    for a in 1..=5usize {
        for b in 1..=5usize {
            if a + b > 6 {
                continue;
            }
            for c in 0..a.min(b) {
                for unit_coeffs in [vec![1i64], vec![1, 1], vec![1, -1], vec![1, 0, 2]] {
                    let unit = Poly::from_i64_coeffs(&f, &unit_coeffs);
                    let cls = Poly::x_pow(&f, c).mul(&unit);
                    let rows = vec![
                        vec![Poly::x_pow(&f, a), Poly::zero(&f)],
                        vec![cls.neg(), Poly::x_pow(&f, b)],
                    ];
                    let middle = classify(&f, &PIDPresentation { gens: 2, rows }, Side::OverR);
                    let expected = PIDModule::new(0, vec![c, a + b - c], Side::OverR);
                    assert_eq!(middle, expected, "a={a} b={b} c={c} u={unit_coeffs:?}");
                }
                let rep = prop32_case1_pid(&f, a, b, ExtensionClass::XPower(c)).unwrap();
                assert_eq!(
                    rep.extended_witness_over_r,
                    PIDModule::new(0, vec![c, a + b - c], Side::OverR)
                );
            }
            let rep = prop32_case1_pid(&f, a, b, ExtensionClass::Split).unwrap();
            assert_eq!(
                rep.extended_witness_over_r,
                PIDModule::new(0, vec![a, b], Side::OverR)
            );
        }
    }
    // SNF postconditions on 100 random 4x4 matrices of degree <= 4
    let mut rng = Rng::new(0x4444);
    for _ in 0..100 {
        let mut m = PolyMat::zero(&f, 4, 4);
        for i in 0..4 {
            for j in 0..4 {
                let deg = rng.below(5) as usize;
                let coeffs: Vec<i64> = (0..=deg).map(|_| rng.range_i64(-2, 2)).collect();
                m.set(i, j, Poly::from_i64_coeffs(&f, &coeffs));
            }
        }
        let s = snf_localized(&m);
        // U A V = D exactly, diagonal, unit determinants, divisibility chain
        let prod = s.u.mul(&m).mul(&s.v);
        assert_eq!(prod, s.d);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(s.d.get(i, j).is_zero());
                }
            }
        }
        assert!(s.u.det().is_local_unit());
        assert!(s.v.det().is_local_unit());
        assert!(s.exponents.windows(2).all(|w| w[0] <= w[1]));
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "took {dt:?}, bound 60 s");
    println!("ACCEPTANCE 12: PASS in {dt:?}");
}

const DETERMINISM_SESSION: &str = "\
set seed = 20260808
field q = rationals
field qi = extend q by t^2+1
algebra R = quotient q [X,Y] rels [] trunc 2
map phi = tensor_extension qi R as S
module N1 = present S cols 1 rels [[X + Y]]
module N2 = present S cols 1 rels [[X + t*Y]]
module F = free R 1
cmd gallery 2.8 L=5
cmd gallery 2.9 p=2 N=2 L=5
cmd gallery 2.10
cmd gallery 2.11 n=2 L=5
cmd dagger phi
cmd flat phi
cmd extended phi N1
cmd extended phi N2
cmd matrix_equiv phi 1
cmd matrix_equiv phi t
cmd separability phi
cmd krs N2
cmd pid_classify gens 2 rels [[x, x^2], [x^2, x^3]]
cmd pid_ascent free 1 tors [2]
cmd pid_ext free 0 tors [1] free 1 tors [] i=1
cmd pid_prop32 1 1 0
cmd pid_vmax tors [2] free 1 gens [[1, 0], [0, 1]] prec 8
";

#[test]
fn acceptance_13_deterministic_reports() {
    let t0 = Instant::now();
    let run_once = || {
        let session = parse_session(DETERMINISM_SESSION).unwrap();
        let report = run(&session, None).unwrap();
        emit(&report, EmitFormat::Json)
    };
    let first = run_once();
    let second = run_once();
    assert_eq!(first, second, "JSON reports must be byte-identical");
    assert!(first.contains("\"schema\": 1"));
    assert!(first.contains("\"seed\": 20260808"));
    let dt = t0.elapsed();
    println!("ACCEPTANCE 13: PASS (byte-identical reports) in {dt:?}");
}
