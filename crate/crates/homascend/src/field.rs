//! Exact scalar arithmetic: the rationals, prime fields GF(p), and simple
//! extensions `k[t]/(f)` with f monic.
//!
//! A [`Field`] is a shared descriptor; elements are plain values interpreted
//! relative to it. All arithmetic is exact, arbitrary precision over the
//! rationals. Irreducibility of an extension's minimal polynomial is verified
//! by exhaustive root search up to degree 3; from degree 4 on it is
//! caller-asserted and any inversion failure surfaces as a hard
//! [`Error::ReducibleMinpoly`].

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Element of a [`Field`]. Interpreted relative to the field descriptor.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum FieldElem {
    /// Arbitrary-precision rational.
    Rat(BigRational),
    /// Residue mod p, always reduced.
    Fp(u64),
    /// Coefficient vector over the base field, length = extension degree.
    Ext(Vec<FieldElem>),
}

#[derive(Debug, PartialEq, Eq)]
pub enum FieldKind {
    Rationals,
    Prime(u64),
    Extension {
        base: Field,
        /// Coefficients c0..cd of the minimal polynomial, monic (cd = 1), d >= 2.
        minpoly: Vec<FieldElem>,
        gen_name: String,
    },
}

/// Shared, immutable field descriptor.
#[derive(Clone, Debug)]
pub struct Field(Arc<FieldKind>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}
impl Eq for Field {}

/// Fields with at most this many elements can be enumerated exhaustively.
pub const ENUMERATION_BOUND: u64 = 1 << 20;

impl Field {
    pub fn rationals() -> Field {
        Field(Arc::new(FieldKind::Rationals))
    }

    pub fn prime(p: u64) -> Result<Field> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Field(Arc::new(FieldKind::Prime(p))))
    }

    /// Simple extension `base[t]/(minpoly)`. `minpoly` lists coefficients
    /// c0..cd over `base`; it must be monic of degree >= 2. Degrees 2 and 3
    /// are verified irreducible by root search; higher degrees are accepted
    /// as asserted by the caller.
    pub fn extension(base: Field, minpoly: Vec<FieldElem>, gen_name: &str) -> Result<Field> {
        let d = minpoly.len().saturating_sub(1);
        if d < 2 {
            return Err(Error::Invariant(format!(
                "minimal polynomial must have degree >= 2, got {d}"
            )));
        }
        if minpoly.last() != Some(&base.one()) {
            return Err(Error::Invariant("minimal polynomial must be monic".into()));
        }
        if d <= 3 {
            if let Some(root) = base.poly_root(&minpoly)? {
                return Err(Error::Invariant(format!(
                    "minimal polynomial is reducible: root {}",
                    base.fmt_elem(&root)
                )));
            }
        }
        Ok(Field(Arc::new(FieldKind::Extension {
            base,
            minpoly,
            gen_name: gen_name.to_string(),
        })))
    }

    pub fn kind(&self) -> &FieldKind {
        &self.0
    }

    pub fn characteristic(&self) -> u64 {
        match self.kind() {
            FieldKind::Rationals => 0,
            FieldKind::Prime(p) => *p,
            FieldKind::Extension { base, .. } => base.characteristic(),
        }
    }

    /// Number of elements, if finite and representable.
    pub fn size(&self) -> Option<BigUint> {
        match self.kind() {
            FieldKind::Rationals => None,
            FieldKind::Prime(p) => Some(BigUint::from(*p)),
            FieldKind::Extension { base, minpoly, .. } => {
                let d = (minpoly.len() - 1) as u32;
                base.size().map(|s| s.pow(d))
            }
        }
    }

    /// Degree over the base field for extensions, 1 otherwise.
    pub fn ext_degree(&self) -> usize {
        match self.kind() {
            FieldKind::Extension { minpoly, .. } => minpoly.len() - 1,
            _ => 1,
        }
    }

    pub fn base_field(&self) -> Option<&Field> {
        match self.kind() {
            FieldKind::Extension { base, .. } => Some(base),
            _ => None,
        }
    }

    pub fn zero(&self) -> FieldElem {
        match self.kind() {
            FieldKind::Rationals => FieldElem::Rat(BigRational::zero()),
            FieldKind::Prime(_) => FieldElem::Fp(0),
            FieldKind::Extension { base, minpoly, .. } => {
                FieldElem::Ext(vec![base.zero(); minpoly.len() - 1])
            }
        }
    }

    pub fn one(&self) -> FieldElem {
        match self.kind() {
            FieldKind::Rationals => FieldElem::Rat(BigRational::one()),
            FieldKind::Prime(_) => FieldElem::Fp(1),
            FieldKind::Extension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.len() - 1];
                v[0] = base.one();
                FieldElem::Ext(v)
            }
        }
    }

    /// The generator t of a simple extension.
    pub fn generator(&self) -> Option<FieldElem> {
        match self.kind() {
            FieldKind::Extension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.len() - 1];
                v[1] = base.one();
                Some(FieldElem::Ext(v))
            }
            _ => None,
        }
    }

    pub fn from_i64(&self, n: i64) -> FieldElem {
        match self.kind() {
            FieldKind::Rationals => FieldElem::Rat(BigRational::from(BigInt::from(n))),
            FieldKind::Prime(p) => FieldElem::Fp(n.rem_euclid(*p as i64) as u64),
            FieldKind::Extension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.len() - 1];
                v[0] = base.from_i64(n);
                FieldElem::Ext(v)
            }
        }
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Result<FieldElem> {
        let d = self.from_i64(den);
        if self.is_zero(&d) {
            return Err(Error::DivisionByZero);
        }
        let n = self.from_i64(num);
        self.div(&n, &d)
    }

    /// Embed a base-field element into this extension.
    pub fn embed(&self, e: &FieldElem) -> FieldElem {
        match self.kind() {
            FieldKind::Extension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.len() - 1];
                v[0] = e.clone();
                FieldElem::Ext(v)
            }
            _ => e.clone(),
        }
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        match a {
            FieldElem::Rat(r) => r.is_zero(),
            FieldElem::Fp(x) => *x == 0,
            FieldElem::Ext(v) => v.iter().all(|c| self.base_of(a).is_zero(c)),
        }
    }

    pub fn is_one(&self, a: &FieldElem) -> bool {
        *a == self.one()
    }

    fn base_of(&self, witness: &FieldElem) -> &Field {
        match (self.kind(), witness) {
            (FieldKind::Extension { base, .. }, FieldElem::Ext(_)) => base,
            _ => self,
        }
    }

    fn check(&self, a: &FieldElem) {
        let ok = match (self.kind(), a) {
            (FieldKind::Rationals, FieldElem::Rat(_)) => true,
            (FieldKind::Prime(p), FieldElem::Fp(x)) => x < p,
            (FieldKind::Extension { minpoly, .. }, FieldElem::Ext(v)) => {
                v.len() == minpoly.len() - 1
            }
            _ => false,
        };
        assert!(ok, "element does not belong to field {self}");
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        match (self.kind(), a, b) {
            (FieldKind::Rationals, FieldElem::Rat(x), FieldElem::Rat(y)) => FieldElem::Rat(x + y),
            (FieldKind::Prime(p), FieldElem::Fp(x), FieldElem::Fp(y)) => {
                FieldElem::Fp(((*x as u128 + *y as u128) % (*p as u128)) as u64)
            }
            (FieldKind::Extension { base, .. }, FieldElem::Ext(x), FieldElem::Ext(y)) => {
                FieldElem::Ext(x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect())
            }
            _ => unreachable!(),
        }
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        self.check(a);
        match (self.kind(), a) {
            (FieldKind::Rationals, FieldElem::Rat(x)) => FieldElem::Rat(-x),
            (FieldKind::Prime(p), FieldElem::Fp(x)) => {
                FieldElem::Fp(if *x == 0 { 0 } else { p - x })
            }
            (FieldKind::Extension { base, .. }, FieldElem::Ext(v)) => {
                FieldElem::Ext(v.iter().map(|c| base.neg(c)).collect())
            }
            _ => unreachable!(),
        }
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        match (self.kind(), a, b) {
            (FieldKind::Rationals, FieldElem::Rat(x), FieldElem::Rat(y)) => FieldElem::Rat(x * y),
            (FieldKind::Prime(p), FieldElem::Fp(x), FieldElem::Fp(y)) => {
                FieldElem::Fp(((*x as u128 * *y as u128) % (*p as u128)) as u64)
            }
            (FieldKind::Extension { base, minpoly, .. }, FieldElem::Ext(x), FieldElem::Ext(y)) => {
                let d = x.len();
                let mut prod = vec![base.zero(); 2 * d - 1];
                for (i, xi) in x.iter().enumerate() {
                    if base.is_zero(xi) {
                        continue;
                    }
                    for (j, yj) in y.iter().enumerate() {
                        if base.is_zero(yj) {
                            continue;
                        }
                        let t = base.mul(xi, yj);
                        prod[i + j] = base.add(&prod[i + j], &t);
                    }
                }
                // reduce mod the monic minimal polynomial, high degree first
                for k in (d..2 * d - 1).rev() {
                    if base.is_zero(&prod[k]) {
                        continue;
                    }
                    let c = prod[k].clone();
                    prod[k] = base.zero();
                    for (j, mj) in minpoly.iter().take(d).enumerate() {
                        let t = base.mul(&c, mj);
                        prod[k - d + j] = base.sub(&prod[k - d + j], &t);
                    }
                }
                prod.truncate(d);
                FieldElem::Ext(prod)
            }
            _ => unreachable!(),
        }
    }

    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        self.check(a);
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        match (self.kind(), a) {
            (FieldKind::Rationals, FieldElem::Rat(x)) => Ok(FieldElem::Rat(x.recip())),
            (FieldKind::Prime(p), FieldElem::Fp(x)) => Ok(FieldElem::Fp(pow_mod(*x, p - 2, *p))),
            (FieldKind::Extension { base, minpoly, .. }, FieldElem::Ext(v)) => {
                // extended Euclid in base[t]: s*a + t*minpoly = gcd
                let g = ext_gcd_inverse(base, v, minpoly);
                match g {
                    Some(inv) => Ok(FieldElem::Ext(inv)),
                    None => Err(Error::ReducibleMinpoly(self.fmt_elem(a))),
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn div(&self, a: &FieldElem, b: &FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow_i(&self, a: &FieldElem, n: u32) -> FieldElem {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// All elements, if the field is finite and small enough to enumerate.
    pub fn enumerate(&self) -> Option<Vec<FieldElem>> {
        let size = self.size()?;
        if size > BigUint::from(ENUMERATION_BOUND) {
            return None;
        }
        match self.kind() {
            FieldKind::Prime(p) => Some((0..*p).map(FieldElem::Fp).collect()),
            FieldKind::Extension { base, minpoly, .. } => {
                let d = minpoly.len() - 1;
                let base_elems = base.enumerate()?;
                let mut out = vec![vec![]];
                for _ in 0..d {
                    let mut next = Vec::new();
                    for partial in &out {
                        for b in &base_elems {
                            let mut v: Vec<FieldElem> = partial.clone();
                            v.push(b.clone());
                            next.push(v);
                        }
                    }
                    out = next;
                }
                Some(out.into_iter().map(FieldElem::Ext).collect())
            }
            FieldKind::Rationals => None,
        }
    }

    /// Deterministic small-scalar grid: 0, 1, -1, 2, -2, ... (wrapping for
    /// finite fields). Used by deterministic searches.
    pub fn small_scalars(&self, count: usize) -> Vec<FieldElem> {
        let mut out = Vec::with_capacity(count);
        out.push(self.zero());
        let mut n: i64 = 1;
        while out.len() < count {
            out.push(self.from_i64(n));
            if out.len() < count {
                out.push(self.from_i64(-n));
            }
            n += 1;
        }
        out.truncate(count);
        out
    }

    /// Random element with small entries, for property tests.
    pub fn random_elem(&self, rng: &mut Rng) -> FieldElem {
        match self.kind() {
            FieldKind::Rationals => self.from_i64(rng.range_i64(-4, 4)),
            FieldKind::Prime(p) => FieldElem::Fp(rng.below(*p)),
            FieldKind::Extension { base, minpoly, .. } => {
                let d = minpoly.len() - 1;
                FieldElem::Ext((0..d).map(|_| base.random_elem(rng)).collect())
            }
        }
    }

    pub fn fmt_elem(&self, a: &FieldElem) -> String {
        match (self.kind(), a) {
            (_, FieldElem::Rat(r)) => r.to_string(),
            (_, FieldElem::Fp(x)) => x.to_string(),
            (FieldKind::Extension { base, gen_name, .. }, FieldElem::Ext(v)) => {
                let mut parts = Vec::new();
                for (i, c) in v.iter().enumerate() {
                    if base.is_zero(c) {
                        continue;
                    }
                    let cs = base.fmt_elem(c);
                    let term = match i {
                        0 => cs,
                        1 if cs == "1" => gen_name.clone(),
                        1 => format!("{cs}*{gen_name}"),
                        _ if cs == "1" => format!("{gen_name}^{i}"),
                        _ => format!("{cs}*{gen_name}^{i}"),
                    };
                    parts.push(term);
                }
                if parts.is_empty() {
                    "0".into()
                } else {
                    parts.join(" + ")
                }
            }
            _ => unreachable!(),
        }
    }

    /// Search for a root of the polynomial `coeffs` (c0..cd over self).
    /// Exhaustive where the field permits it; `Unsupported` otherwise.
    pub fn poly_root(&self, coeffs: &[FieldElem]) -> Result<Option<FieldElem>> {
        let eval = |x: &FieldElem| -> FieldElem {
            let mut acc = self.zero();
            for c in coeffs.iter().rev() {
                acc = self.add(&self.mul(&acc, x), c);
            }
            acc
        };
        match self.kind() {
            FieldKind::Rationals => {
                let roots = rational_root_candidates(coeffs)?;
                for r in roots {
                    let x = FieldElem::Rat(r);
                    if self.is_zero(&eval(&x)) {
                        return Ok(Some(x));
                    }
                }
                Ok(None)
            }
            _ => match self.enumerate() {
                Some(elems) => {
                    for x in elems {
                        if self.is_zero(&eval(&x)) {
                            return Ok(Some(x));
                        }
                    }
                    Ok(None)
                }
                None => Err(Error::Unsupported(
                    "root search requires the rationals or a small finite field".into(),
                )),
            },
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            FieldKind::Rationals => write!(f, "QQ"),
            FieldKind::Prime(p) => write!(f, "GF({p})"),
            FieldKind::Extension {
                base,
                gen_name,
                minpoly,
            } => {
                write!(f, "{base}({gen_name}) deg {}", minpoly.len() - 1)
            }
        }
    }
}

/// Inverse of `a` mod the monic polynomial `m`, both coefficient vectors over
/// `base`. Returns None when gcd(a, m) is not constant (reducible m).
fn ext_gcd_inverse(base: &Field, a: &[FieldElem], m: &[FieldElem]) -> Option<Vec<FieldElem>> {
    type P = Vec<FieldElem>;
    let deg = |p: &P| -> Option<usize> {
        let mut d = None;
        for (i, c) in p.iter().enumerate() {
            if !base.is_zero(c) {
                d = Some(i);
            }
        }
        d
    };
    let trim = |mut p: P| -> P {
        while p.len() > 1 && base.is_zero(p.last().unwrap()) {
            p.pop();
        }
        p
    };
    let sub = |p: &P, q: &P| -> P {
        let n = p.len().max(q.len());
        let mut out = vec![base.zero(); n];
        for i in 0..n {
            let x = p.get(i).cloned().unwrap_or_else(|| base.zero());
            let y = q.get(i).cloned().unwrap_or_else(|| base.zero());
            out[i] = base.sub(&x, &y);
        }
        trim(out)
    };
    let mul = |p: &P, q: &P| -> P {
        if deg(p).is_none() || deg(q).is_none() {
            return vec![base.zero()];
        }
        let mut out = vec![base.zero(); p.len() + q.len() - 1];
        for (i, pi) in p.iter().enumerate() {
            for (j, qj) in q.iter().enumerate() {
                let t = base.mul(pi, qj);
                out[i + j] = base.add(&out[i + j], &t);
            }
        }
        trim(out)
    };
    // returns (quotient, remainder); divisor must be nonzero
    let divmod = |p: &P, q: &P| -> (P, P) {
        let dq = deg(q).expect("division by zero polynomial");
        let lead_inv = base.inv(&q[dq]).expect("field inversion of leading coeff");
        let mut rem = p.clone();
        let mut quo = vec![base.zero(); p.len().max(1)];
        while let Some(dr) = deg(&rem) {
            if dr < dq {
                break;
            }
            let c = base.mul(&rem[dr], &lead_inv);
            let shift = dr - dq;
            quo[shift] = base.add(&quo[shift], &c);
            let mut subtrahend = vec![base.zero(); shift];
            for qc in q.iter() {
                subtrahend.push(base.mul(&c, qc));
            }
            rem = sub(&rem, &subtrahend);
        }
        (trim(quo), trim(rem))
    };

    // extended Euclid on (m, a): invariants r_i = s_i*a mod m (t coeffs dropped)
    let mut r0: P = trim(m.to_vec());
    let mut r1: P = trim(a.to_vec());
    let mut s0: P = vec![base.zero()];
    let mut s1: P = vec![base.one()];
    while deg(&r1).is_some() {
        let (q, r) = divmod(&r0, &r1);
        let s = sub(&s0, &mul(&q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    let d = deg(&r0)?;
    if d != 0 {
        return None; // nonconstant gcd: m reducible
    }
    let c_inv = base.inv(&r0[0]).ok()?;
    let mut inv: P = s0.iter().map(|c| base.mul(c, &c_inv)).collect();
    // reduce mod m and pad to degree-vector length
    let (_, rem) = divmod(&inv, &trim(m.to_vec()));
    inv = rem;
    inv.resize(m.len() - 1, base.zero());
    Some(inv)
}

/// Candidate rational roots of a polynomial with rational coefficients, via
/// the rational root theorem after clearing denominators.
fn rational_root_candidates(coeffs: &[FieldElem]) -> Result<Vec<BigRational>> {
    let rats: Vec<&BigRational> = coeffs
        .iter()
        .map(|c| match c {
            FieldElem::Rat(r) => r,
            _ => unreachable!(),
        })
        .collect();
    let mut lcm = BigInt::one();
    for r in &rats {
        let d = r.denom();
        lcm = &lcm / num_integer_gcd(&lcm, d) * d;
    }
    let ints: Vec<BigInt> = rats.iter().map(|r| (*r * &lcm).to_integer()).collect();
    let lead = ints.last().cloned().unwrap_or_else(BigInt::zero);
    let mut low = BigInt::zero();
    for c in &ints {
        if !c.is_zero() {
            low = c.clone();
            break;
        }
    }
    let mut out = vec![BigRational::zero()];
    if lead.is_zero() || low.is_zero() {
        return Ok(out);
    }
    let ps = divisors_of(&low)?;
    let qs = divisors_of(&lead)?;
    for p in &ps {
        for q in &qs {
            let r = BigRational::new(p.clone(), q.clone());
            out.push(r.clone());
            out.push(-r);
        }
    }
    Ok(out)
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    if a.is_zero() {
        BigInt::one()
    } else {
        a
    }
}

fn divisors_of(n: &BigInt) -> Result<Vec<BigInt>> {
    let n = n.abs();
    let n_u64: u64 = match n.try_into() {
        Ok(v) => v,
        Err(_) => {
            return Err(Error::Unsupported(
                "root search constant term too large to factor".into(),
            ))
        }
    };
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n_u64 {
        if n_u64 % d == 0 {
            out.push(BigInt::from(d));
            out.push(BigInt::from(n_u64 / d));
        }
        d += 1;
    }
    Ok(out)
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut b: u128 = base as u128 % m as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m as u128;
        }
        b = b * b % m as u128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Deterministic Miller-Rabin, valid for all u64.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
