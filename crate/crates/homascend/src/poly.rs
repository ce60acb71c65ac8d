//! Univariate polynomials over a [`Field`] in the distinguished variable x.
//! No trailing zero coefficients are ever stored; the zero polynomial has an
//! empty coefficient vector.

use std::fmt;

use crate::field::{Field, FieldElem};

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    coeffs: Vec<FieldElem>, // coeffs[i] is the coefficient of x^i
}

impl Poly {
    pub fn zero(field: &Field) -> Poly {
        Poly {
            field: field.clone(),
            coeffs: vec![],
        }
    }

    pub fn one(field: &Field) -> Poly {
        Poly::constant(field, field.one())
    }

    pub fn constant(field: &Field, c: FieldElem) -> Poly {
        Poly::from_coeffs(field, vec![c])
    }

    pub fn x(field: &Field) -> Poly {
        Poly::from_coeffs(field, vec![field.zero(), field.one()])
    }

    /// x^n
    pub fn x_pow(field: &Field, n: usize) -> Poly {
        let mut coeffs = vec![field.zero(); n + 1];
        coeffs[n] = field.one();
        Poly::from_coeffs(field, coeffs)
    }

    pub fn from_coeffs(field: &Field, mut coeffs: Vec<FieldElem>) -> Poly {
        while coeffs.last().is_some_and(|c| field.is_zero(c)) {
            coeffs.pop();
        }
        Poly {
            field: field.clone(),
            coeffs,
        }
    }

    pub fn from_i64_coeffs(field: &Field, coeffs: &[i64]) -> Poly {
        Poly::from_coeffs(field, coeffs.iter().map(|&c| field.from_i64(c)).collect())
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// x-adic valuation: index of the lowest nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !self.field.is_zero(c))
    }

    /// A unit of the localization `k[x]_(x)` is a polynomial with nonzero
    /// constant term.
    pub fn is_local_unit(&self) -> bool {
        self.valuation() == Some(0)
    }

    pub fn leading_coeff(&self) -> FieldElem {
        self.coeffs
            .last()
            .cloned()
            .unwrap_or_else(|| self.field.zero())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(f.add(&self.coeff(i), &other.coeff(i)));
        }
        Poly::from_coeffs(f, out)
    }

    pub fn neg(&self) -> Poly {
        Poly::from_coeffs(
            &self.field,
            self.coeffs.iter().map(|c| self.field.neg(c)).collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Poly::zero(f);
        }
        let mut out = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if f.is_zero(b) {
                    continue;
                }
                let t = f.mul(a, b);
                out[i + j] = f.add(&out[i + j], &t);
            }
        }
        Poly::from_coeffs(f, out)
    }

    pub fn scale(&self, c: &FieldElem) -> Poly {
        Poly::from_coeffs(
            &self.field,
            self.coeffs.iter().map(|a| self.field.mul(a, c)).collect(),
        )
    }

    /// Multiply by x^n.
    pub fn shift(&self, n: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let f = &self.field;
        let mut out = vec![f.zero(); n];
        out.extend(self.coeffs.iter().cloned());
        Poly::from_coeffs(f, out)
    }

    /// Euclidean division; divisor must be nonzero.
    pub fn divmod(&self, divisor: &Poly) -> (Poly, Poly) {
        let f = &self.field;
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead_inv = f
            .inv(&divisor.leading_coeff())
            .expect("leading coeff invertible");
        let mut rem = self.clone();
        let mut quo = Poly::zero(f);
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let c = f.mul(&rem.leading_coeff(), &lead_inv);
            let term = Poly::constant(f, c).shift(dr - dd);
            quo = quo.add(&term);
            rem = rem.sub(&term.mul(divisor));
        }
        (quo, rem)
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let f = &self.field;
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divmod(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        // monic normalization
        let inv = f.inv(&a.leading_coeff()).unwrap();
        a.scale(&inv)
    }

    pub fn derivative(&self) -> Poly {
        let f = &self.field;
        if self.coeffs.len() <= 1 {
            return Poly::zero(f);
        }
        let mut out = Vec::with_capacity(self.coeffs.len() - 1);
        for (i, c) in self.coeffs.iter().enumerate().skip(1) {
            out.push(f.mul(c, &f.from_i64(i as i64)));
        }
        Poly::from_coeffs(f, out)
    }

    pub fn eval(&self, x: &FieldElem) -> FieldElem {
        let f = &self.field;
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    /// Drop all terms of degree >= prec (truncated power-series view).
    pub fn truncate(&self, prec: usize) -> Poly {
        Poly::from_coeffs(
            &self.field,
            self.coeffs.iter().take(prec).cloned().collect(),
        )
    }

    /// Largest-degree-first square-free part p / gcd(p, p').
    pub fn squarefree_part(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let d = self.derivative();
        if d.is_zero() {
            return self.clone();
        }
        let g = self.gcd(&d);
        let (q, _) = self.divmod(&g);
        q
    }

    /// All roots in the coefficient field that a deterministic search can
    /// find (exhaustive over small finite fields, rational-root over QQ).
    pub fn roots(&self) -> Vec<FieldElem> {
        match self.field.poly_root_all(&self.coeffs) {
            Ok(v) => v,
            Err(_) => vec![],
        }
    }
}

impl Field {
    /// All roots found by the same strategy as [`Field::poly_root`].
    pub fn poly_root_all(&self, coeffs: &[FieldElem]) -> crate::error::Result<Vec<FieldElem>> {
        let mut p = Poly::from_coeffs(self, coeffs.to_vec());
        let mut out = Vec::new();
        loop {
            if p.degree().unwrap_or(0) == 0 {
                break;
            }
            match self.poly_root(p.coeffs())? {
                Some(r) => {
                    // divide out (x - r)
                    let lin = Poly::from_coeffs(self, vec![self.neg(&r), self.one()]);
                    let (q, rem) = p.divmod(&lin);
                    assert!(rem.is_zero());
                    if !out.contains(&r) {
                        out.push(r.clone());
                    }
                    p = q;
                }
                None => break,
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.field.is_zero(c) {
                continue;
            }
            let cs = self.field.fmt_elem(c);
            let cs = if cs.contains('+') {
                format!("({cs})")
            } else {
                cs
            };
            parts.push(match i {
                0 => cs,
                1 if cs == "1" => "x".to_string(),
                1 => format!("{cs}*x"),
                _ if cs == "1" => format!("x^{i}"),
                _ => format!("{cs}*x^{i}"),
            });
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
