//! Arithmetic in GF(p^k) with elements stored as coefficient vectors over GF(p).
//!
//! An element is addressed by its integer code `Σ c_i p^i` (constant term is
//! the least significant digit). The code doubles as the canonical total order
//! on the field wherever one is needed.

mod extension;
mod matrix;

pub use extension::QuadraticExtension;
pub use matrix::{AffineSolution, Matrix};

use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 16;

/// Fields up to this order get cached addition/multiplication tables.
const TABLE_LIMIT: u32 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("degree must be in 1..=16, got {0}")]
    BadDegree(u32),
    #[error("field order {p}^{k} exceeds 2^16")]
    OrderTooLarge { p: u32, k: u32 },
    #[error("no monic irreducible polynomial of degree {k} over GF({p}) found")]
    NoIrreducible { p: u32, k: u32 },
}

/// Handle to a field element; the integer is its coefficient code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Gf(pub u32);

impl Gf {
    pub const ZERO: Gf = Gf(0);
    pub const ONE: Gf = Gf(1);

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone)]
struct Tables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

/// The finite field GF(p^k) = GF(p)[x] / (m(x)).
#[derive(Clone)]
pub struct Field {
    p: u32,
    k: u32,
    order: u32,
    /// Monic modulus, low degree first, length k+1.
    modulus: Vec<u32>,
    tables: Option<Tables>,
}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// If `q` is a prime power p^k, returns (p, k).
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 || q > u32::MAX as u64 {
        return None;
    }
    let q = q as u32;
    let mut p = 2u32;
    while p <= q {
        if q % p == 0 {
            break;
        }
        p += 1;
    }
    if !is_prime(p) {
        return None;
    }
    let (mut rest, mut k) = (q, 0u32);
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

// Polynomials over GF(p), low degree first, no trailing zeros (zero poly = []).
fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod_p(a, p - 2, p)
}

fn pow_mod_p(base: u32, mut exp: u32, p: u32) -> u32 {
    let (mut acc, pp) = (1u64, p as u64);
    let mut b = base as u64 % pp;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % pp;
        }
        b = b * b % pp;
        exp >>= 1;
    }
    acc as u32
}

/// Remainder of `a` modulo `m` over GF(p).
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let m = trim(m.to_vec());
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p) as u64;
    while r.len() > dm {
        let dr = r.len() - 1;
        let factor = (r[dr] as u64 * lead_inv % p as u64) as u32;
        let shift = dr - dm;
        for (i, &c) in m.iter().enumerate() {
            let sub = (factor as u64 * c as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn monic_from_index(index: u64, degree: u32, p: u32) -> Vec<u32> {
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut rest = index;
    for _ in 0..degree {
        coeffs.push((rest % p as u64) as u32);
        rest /= p as u64;
    }
    coeffs.push(1);
    coeffs
}

/// Trial division against every monic polynomial of degree 1..=k/2.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let k = poly.len() as u32 - 1;
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d);
        for idx in 0..count {
            let divisor = monic_from_index(idx, d, p);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// GF(p^k) with the smallest monic irreducible modulus (non-leading
    /// coefficients read as a base-p integer, top coefficient most significant).
    pub fn new(p: u32, k: u32) -> Result<Field, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if !(1..=16).contains(&k) {
            return Err(FieldError::BadDegree(k));
        }
        let order = (p as u64).checked_pow(k).filter(|&q| q <= MAX_ORDER);
        let order = order.ok_or(FieldError::OrderTooLarge { p, k })? as u32;
        let candidates = (p as u64).pow(k);
        let modulus = (0..candidates)
            .map(|idx| monic_from_index(idx, k, p))
            .find(|poly| k == 1 || is_irreducible(poly, p))
            .ok_or(FieldError::NoIrreducible { p, k })?;
        let mut field = Field { p, k, order, modulus, tables: None };
        if order <= TABLE_LIMIT {
            field.tables = Some(field.build_tables());
        }
        Ok(field)
    }

    /// GF(q) for a prime power q.
    pub fn with_order(q: u64) -> Result<Field, FieldError> {
        match prime_power(q) {
            Some((p, k)) => Field::new(p, k),
            None => Err(FieldError::NotPrime(q.min(u32::MAX as u64) as u32)),
        }
    }

    fn build_tables(&self) -> Tables {
        let q = self.order as usize;
        let mut t = Tables {
            add: vec![0; q * q],
            mul: vec![0; q * q],
            neg: vec![0; q],
            inv: vec![0; q],
        };
        for a in 0..q {
            t.neg[a] = self.neg_slow(Gf(a as u32)).0 as u16;
            for b in 0..q {
                t.add[a * q + b] = self.add_slow(Gf(a as u32), Gf(b as u32)).0 as u16;
                t.mul[a * q + b] = self.mul_slow(Gf(a as u32), Gf(b as u32)).0 as u16;
            }
        }
        for a in 1..q {
            let row = &t.mul[a * q..(a + 1) * q];
            let b = row.iter().position(|&v| v == 1).expect("nonzero element has an inverse");
            t.inv[a] = b as u16;
        }
        t
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Modulus coefficients, constant term first; the last entry is 1.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Gf> + '_ {
        (0..self.order).map(Gf)
    }

    pub fn element(&self, code: u32) -> Gf {
        assert!(code < self.order, "code {code} outside GF({})", self.order);
        Gf(code)
    }

    pub fn coeffs(&self, a: Gf) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.k as usize);
        let mut rest = a.0;
        for _ in 0..self.k {
            out.push(rest % self.p);
            rest /= self.p;
        }
        out
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Gf {
        assert!(coeffs.len() <= self.k as usize);
        let code = coeffs.iter().rev().fold(0u32, |acc, &c| acc * self.p + c % self.p);
        Gf(code)
    }

    fn add_slow(&self, a: Gf, b: Gf) -> Gf {
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let sum: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % self.p).collect();
        self.from_coeffs(&sum)
    }

    fn neg_slow(&self, a: Gf) -> Gf {
        let neg: Vec<u32> = self.coeffs(a).iter().map(|&x| (self.p - x) % self.p).collect();
        self.from_coeffs(&neg)
    }

    fn mul_slow(&self, a: Gf, b: Gf) -> Gf {
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let p = self.p as u64;
        let mut prod = vec![0u32; 2 * self.k as usize];
        for (i, &x) in ca.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p) as u32;
            }
        }
        let mut r = poly_rem(&prod, &self.modulus, self.p);
        r.resize(self.k as usize, 0);
        self.from_coeffs(&r)
    }

    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        match &self.tables {
            Some(t) => Gf(t.add[(a.0 * self.order + b.0) as usize] as u32),
            None => self.add_slow(a, b),
        }
    }

    pub fn neg(&self, a: Gf) -> Gf {
        match &self.tables {
            Some(t) => Gf(t.neg[a.0 as usize] as u32),
            None => self.neg_slow(a),
        }
    }

    pub fn sub(&self, a: Gf, b: Gf) -> Gf {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        match &self.tables {
            Some(t) => Gf(t.mul[(a.0 * self.order + b.0) as usize] as u32),
            None => self.mul_slow(a, b),
        }
    }

    pub fn pow(&self, a: Gf, mut exp: u64) -> Gf {
        let (mut acc, mut base) = (Gf::ONE, a);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Gf) -> Option<Gf> {
        if a.is_zero() {
            return None;
        }
        Some(match &self.tables {
            Some(t) => Gf(t.inv[a.0 as usize] as u32),
            None => self.pow(a, self.order as u64 - 2),
        })
    }

    pub fn div(&self, a: Gf, b: Gf) -> Option<Gf> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    /// Big-endian code of a vector: first coordinate most significant.
    pub fn encode_vec(&self, v: &[Gf]) -> u64 {
        v.iter().fold(0u64, |acc, x| acc * self.order as u64 + x.0 as u64)
    }

    pub fn decode_vec(&self, mut code: u64, len: usize) -> Vec<Gf> {
        let q = self.order as u64;
        let mut out = vec![Gf::ZERO; len];
        for slot in out.iter_mut().rev() {
            *slot = Gf((code % q) as u32);
            code /= q;
        }
        out
    }

    /// Evaluates `Σ coeffs[i] x^(deg-i)` (leading coefficient first) by Horner.
    pub fn eval_poly(&self, coeffs_high_first: &[Gf], x: Gf) -> Gf {
        coeffs_high_first
            .iter()
            .fold(Gf::ZERO, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_fields_up_to(q_max: u32) -> Vec<Field> {
        (2..=q_max as u64)
            .filter_map(|q| prime_power(q).map(|(p, k)| Field::new(p, k).unwrap()))
            .collect()
    }

    #[test]
    fn gf2_has_characteristic_two() {
        let f = Field::new(2, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.add(Gf::ONE, Gf::ONE), Gf::ZERO);
    }

    #[test]
    fn gf5_is_integers_mod_five() {
        let f = Field::new(5, 1).unwrap();
        assert_eq!(f.mul(Gf(3), Gf(4)), Gf(2));
        assert_eq!(f.inv(Gf(2)), Some(Gf(3)));
    }

    #[test]
    fn gf4_nonzero_elements_are_cube_roots_of_unity() {
        let f = Field::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        for a in f.elements().skip(1) {
            assert_eq!(f.pow(a, 3), Gf::ONE);
        }
    }

    #[test]
    fn smallest_irreducible_moduli() {
        assert_eq!(Field::new(2, 3).unwrap().modulus(), &[1, 1, 0, 1]);
        assert_eq!(Field::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(Field::new(2, 4).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(Field::new(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert_eq!(Field::new(2, 0).unwrap_err(), FieldError::BadDegree(0));
        assert!(matches!(Field::new(3, 11), Err(FieldError::OrderTooLarge { .. })));
    }

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(25), Some((5, 2)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for f in all_fields_up_to(8) {
            let els: Vec<Gf> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.neg(a)), Gf::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Gf::ONE);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn multiplicative_group_order_and_frobenius() {
        for f in all_fields_up_to(16) {
            let p = f.characteristic() as u64;
            for a in f.elements() {
                if !a.is_zero() {
                    assert_eq!(f.pow(a, f.order() as u64 - 1), Gf::ONE);
                }
                for b in f.elements() {
                    let lhs = f.pow(f.add(a, b), p);
                    let rhs = f.add(f.pow(a, p), f.pow(b, p));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn tables_agree_with_coefficient_arithmetic() {
        let f = Field::new(3, 3).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b), f.mul_slow(a, b));
                assert_eq!(f.add(a, b), f.add_slow(a, b));
            }
        }
    }

    #[test]
    fn untabled_field_arithmetic() {
        // 3^6 = 729 > table limit, exercises the coefficient path
        let f = Field::new(3, 6).unwrap();
        assert!(f.tables.is_none());
        for code in [1u32, 2, 17, 300, 728] {
            let a = Gf(code);
            assert_eq!(f.mul(a, f.inv(a).unwrap()), Gf::ONE);
            assert_eq!(f.pow(a, 728), Gf::ONE);
        }
    }

    #[test]
    fn vector_codes_round_trip() {
        let f = Field::new(2, 3).unwrap();
        let v = vec![Gf(7), Gf(0), Gf(3), Gf(1)];
        let code = f.encode_vec(&v);
        assert_eq!(code, 7 * 512 + 3 * 8 + 1);
        assert_eq!(f.decode_vec(code, 4), v);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn gf16_random_triples(a in 0u32..16, b in 0u32..16, c in 0u32..16) {
            let f = Field::new(2, 4).unwrap();
            let (a, b, c) = (Gf(a), Gf(b), Gf(c));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        }

        #[test]
        fn gf_large_random_triples(a in 0u32..2401, b in 0u32..2401, c in 1u32..2401) {
            let f = Field::new(7, 4).unwrap();
            let (a, b, c) = (Gf(a), Gf(b), Gf(c));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.mul(f.div(a, c).unwrap(), c), a);
        }
    }
}
