//! Exact coefficient rings: `ℤ`, `ℚ`, `𝔽_{p^k}` (k ≤ 4), `ℤ/p^mℤ`, and the
//! internal polynomial ring `ℤ[q]` used for generic structure constants.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::fmt;

/// A commutative ring with decidable equality, given as a context object so
/// finite fields can carry their modulus data at runtime.
pub trait Ring: Clone + fmt::Debug {
    type Elem: Clone + PartialEq + Eq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    /// Multiplicative inverse, `None` when `a` is not a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// The prime `p` with `p = 0` in the ring, when there is one.
    fn char_p(&self) -> Option<u64>;
    fn is_field(&self) -> bool;
    fn fmt_elem(&self, a: &Self::Elem) -> String;
    fn parse_elem(&self, s: &str) -> Result<Self::Elem, String>;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
    fn pow(&self, a: &Self::Elem, n: u64) -> Self::Elem {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, a);
        }
        acc
    }
    /// A short name for reports, e.g. `Q`, `F3:2`, `Z2^3`.
    fn name(&self) -> String;
}

// ---------------------------------------------------------------------------
// ℤ[q]

/// Polynomial in one variable `q` over `ℤ`, little-endian coefficients,
/// no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ZPoly(pub Vec<i64>);

impl ZPoly {
    pub fn normalize(mut v: Vec<i64>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        ZPoly(v)
    }
    pub fn q_power(n: u64) -> Self {
        let mut v = vec![0i64; n as usize + 1];
        v[n as usize] = 1;
        ZPoly(v)
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    /// Exact division by `q^n`; panics when not divisible (that would mean
    /// a length-bookkeeping bug upstream).
    pub fn div_q_power(&self, n: u64) -> ZPoly {
        let n = n as usize;
        if self.is_zero() {
            return self.clone();
        }
        assert!(
            self.0.len() > n && self.0[..n].iter().all(|&c| c == 0),
            "exact division by q^{n} failed on {:?}",
            self.0
        );
        ZPoly(self.0[n..].to_vec())
    }
    pub fn eval<R: Ring>(&self, ring: &R, q: &R::Elem) -> R::Elem {
        let mut acc = ring.zero();
        for &c in self.0.iter().rev() {
            acc = ring.add(&ring.mul(&acc, q), &ring.from_i64(c));
        }
        acc
    }
}

fn iadd(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("integer overflow in ZPoly")
}
fn imul(a: i64, b: i64) -> i64 {
    a.checked_mul(b).expect("integer overflow in ZPoly")
}

/// The ring `ℤ[q]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZPolyRing;

impl Ring for ZPolyRing {
    type Elem = ZPoly;
    fn zero(&self) -> ZPoly {
        ZPoly(vec![])
    }
    fn one(&self) -> ZPoly {
        ZPoly(vec![1])
    }
    fn add(&self, a: &ZPoly, b: &ZPoly) -> ZPoly {
        let n = a.0.len().max(b.0.len());
        let mut v = vec![0i64; n];
        for (i, x) in v.iter_mut().enumerate() {
            let ca = a.0.get(i).copied().unwrap_or(0);
            let cb = b.0.get(i).copied().unwrap_or(0);
            *x = iadd(ca, cb);
        }
        ZPoly::normalize(v)
    }
    fn sub(&self, a: &ZPoly, b: &ZPoly) -> ZPoly {
        self.add(a, &self.neg(b))
    }
    fn mul(&self, a: &ZPoly, b: &ZPoly) -> ZPoly {
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        let mut v = vec![0i64; a.0.len() + b.0.len() - 1];
        for (i, &ca) in a.0.iter().enumerate() {
            for (j, &cb) in b.0.iter().enumerate() {
                v[i + j] = iadd(v[i + j], imul(ca, cb));
            }
        }
        ZPoly::normalize(v)
    }
    fn neg(&self, a: &ZPoly) -> ZPoly {
        ZPoly(a.0.iter().map(|&c| -c).collect())
    }
    fn from_i64(&self, n: i64) -> ZPoly {
        ZPoly::normalize(vec![n])
    }
    fn inv(&self, a: &ZPoly) -> Option<ZPoly> {
        if a.0 == vec![1] {
            Some(self.one())
        } else if a.0 == vec![-1] {
            Some(a.clone())
        } else {
            None
        }
    }
    fn char_p(&self) -> Option<u64> {
        None
    }
    fn is_field(&self) -> bool {
        false
    }
    fn fmt_elem(&self, a: &ZPoly) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let terms: Vec<String> = a
            .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match i {
                0 => format!("{c}"),
                1 if c == 1 => "q".into(),
                1 => format!("{c}q"),
                _ if c == 1 => format!("q^{i}"),
                _ => format!("{c}q^{i}"),
            })
            .collect();
        terms.join("+")
    }
    fn parse_elem(&self, _s: &str) -> Result<ZPoly, String> {
        Err("parsing ℤ[q] elements is not supported".into())
    }
    fn name(&self) -> String {
        "Z[q]".into()
    }
}

// ---------------------------------------------------------------------------
// ℤ

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntRing;

impl Ring for IntRing {
    type Elem = BigInt;
    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn from_i64(&self, n: i64) -> BigInt {
        BigInt::from(n)
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        if a.abs() == BigInt::one() {
            Some(a.clone())
        } else {
            None
        }
    }
    fn char_p(&self) -> Option<u64> {
        None
    }
    fn is_field(&self) -> bool {
        false
    }
    fn fmt_elem(&self, a: &BigInt) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<BigInt, String> {
        s.parse().map_err(|e| format!("bad integer {s:?}: {e}"))
    }
    fn name(&self) -> String {
        "Z".into()
    }
}

// ---------------------------------------------------------------------------
// ℚ

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatField;

impl Ring for RatField {
    type Elem = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn from_i64(&self, n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn char_p(&self) -> Option<u64> {
        None
    }
    fn is_field(&self) -> bool {
        true
    }
    fn fmt_elem(&self, a: &BigRational) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<BigRational, String> {
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
            let d: BigInt = d.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            Ok(BigRational::new(n, d))
        } else {
            let n: BigInt = s.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?;
            Ok(BigRational::from_integer(n))
        }
    }
    fn name(&self) -> String {
        "Q".into()
    }
}

// ---------------------------------------------------------------------------
// 𝔽_{p^k}

/// The field with `p^k` elements, `k ≤ 4`.  Elements are coordinate vectors
/// in `𝔽_p[x]/(m)` for the lexicographically smallest monic irreducible `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpK {
    pub p: u64,
    pub k: usize,
    /// Monic minimal polynomial, little-endian, length `k + 1`.
    pub min_poly: Vec<u64>,
}

impl FpK {
    pub fn new(p: u64, k: usize) -> Result<FpK, String> {
        if !is_prime(p) {
            return Err(format!("{p} is not prime"));
        }
        if k == 0 || k > 4 {
            return Err(format!("field degree {k} out of supported range 1..=4"));
        }
        let min_poly = if k == 1 {
            vec![0, 1]
        } else {
            find_irreducible(p, k)
        };
        Ok(FpK { p, k, min_poly })
    }

    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        // long division by the monic min_poly, then truncate to degree < k
        while v.len() > self.k {
            let d = v.len() - 1;
            let c = v[d] % self.p;
            if c != 0 {
                let shift = d - self.k;
                for (i, &m) in self.min_poly.iter().enumerate().take(self.k) {
                    let idx = i + shift;
                    let sub = (c * (m % self.p)) % self.p;
                    v[idx] = (v[idx] + self.p * self.p - sub) % self.p;
                }
            }
            v.pop();
        }
        v.resize(self.k, 0);
        for x in v.iter_mut() {
            *x %= self.p;
        }
        v
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    /// All field elements, in a fixed order. Small fields only.
    pub fn all_elems(&self) -> Vec<Vec<u64>> {
        let n = self.order();
        assert!(n <= 1 << 16, "field too large to enumerate");
        let mut out = Vec::with_capacity(n as usize);
        for mut i in 0..n {
            let mut v = vec![0u64; self.k];
            for x in v.iter_mut() {
                *x = i % self.p;
                i /= self.p;
            }
            out.push(v);
        }
        out
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn poly_is_irreducible(p: u64, f: &[u64]) -> bool {
    // no roots, and no monic factor of degree <= deg/2 (deg <= 4 here)
    let deg = f.len() - 1;
    for a in 0..p {
        let mut acc = 0u64;
        for &c in f.iter().rev() {
            acc = (acc * a + c) % p;
        }
        if acc == 0 {
            return false;
        }
    }
    if deg >= 4 {
        // check for monic quadratic factors by trial division
        for b in 0..p {
            for c in 0..p {
                if poly_divides(p, &[c, b, 1], f) {
                    return false;
                }
            }
        }
    }
    true
}

fn poly_divides(p: u64, g: &[u64], f: &[u64]) -> bool {
    let mut r: Vec<u64> = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg && r.len() > 1 {
        let lead = *r.last().unwrap() % p;
        if lead != 0 {
            let shift = r.len() - 1 - dg;
            for (i, &gc) in g.iter().enumerate() {
                let idx = i + shift;
                r[idx] = (r[idx] + p * p - (lead * (gc % p)) % p) % p;
            }
        }
        r.pop();
    }
    r.iter().all(|&c| c % p == 0)
}

fn find_irreducible(p: u64, k: usize) -> Vec<u64> {
    // smallest monic polynomial x^k + a_{k-1}x^{k-1} + ... + a_0 that is
    // irreducible, by lexicographic search over (a_0, ..., a_{k-1})
    let mut coeffs = vec![0u64; k];
    loop {
        let mut f = coeffs.clone();
        f.push(1);
        if poly_is_irreducible(p, &f) {
            return f;
        }
        let mut i = 0;
        loop {
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
            assert!(i < k, "no irreducible polynomial found (impossible)");
        }
    }
}

impl Ring for FpK {
    type Elem = Vec<u64>;
    fn zero(&self) -> Vec<u64> {
        vec![0; self.k]
    }
    fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.k];
        v[0] = 1;
        v
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x + self.p - y % self.p) % self.p)
            .collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut v = vec![0u64; 2 * self.k];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                v[i + j] = (v[i + j] + x * y) % self.p;
            }
        }
        self.reduce(v)
    }
    fn neg(&self, a: &Vec<u64>) -> Vec<u64> {
        a.iter().map(|&x| (self.p - x % self.p) % self.p).collect()
    }
    fn from_i64(&self, n: i64) -> Vec<u64> {
        let p = self.p as i64;
        let mut v = vec![0; self.k];
        v[0] = (((n % p) + p) % p) as u64;
        v
    }
    fn inv(&self, a: &Vec<u64>) -> Option<Vec<u64>> {
        if self.is_zero(a) {
            return None;
        }
        // a^(p^k - 2)
        let mut acc = self.one();
        let mut base = a.clone();
        let mut e = self.order() - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        Some(acc)
    }
    fn char_p(&self) -> Option<u64> {
        Some(self.p)
    }
    fn is_field(&self) -> bool {
        true
    }
    fn fmt_elem(&self, a: &Vec<u64>) -> String {
        if self.k == 1 {
            format!("{}", a[0])
        } else {
            a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        }
    }
    fn parse_elem(&self, s: &str) -> Result<Vec<u64>, String> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() > self.k {
            return Err(format!("too many coordinates in {s:?}"));
        }
        let mut v = vec![0u64; self.k];
        for (i, part) in parts.iter().enumerate() {
            let n: i64 = part
                .trim()
                .parse()
                .map_err(|e| format!("bad field element {s:?}: {e}"))?;
            let p = self.p as i64;
            v[i] = (((n % p) + p) % p) as u64;
        }
        Ok(v)
    }
    fn name(&self) -> String {
        if self.k == 1 {
            format!("F{}", self.p)
        } else {
            format!("F{}:{}", self.p, self.k)
        }
    }
}

// ---------------------------------------------------------------------------
// ℤ/p^mℤ

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zpm {
    pub p: u64,
    pub m: u32,
    pub modulus: u64,
}

impl Zpm {
    pub fn new(p: u64, m: u32) -> Result<Zpm, String> {
        if !is_prime(p) {
            return Err(format!("{p} is not prime"));
        }
        if m == 0 {
            return Err("exponent must be positive".into());
        }
        let modulus = p
            .checked_pow(m)
            .filter(|&x| x < (1 << 31))
            .ok_or_else(|| format!("{p}^{m} too large"))?;
        Ok(Zpm { p, m, modulus })
    }
}

impl Ring for Zpm {
    type Elem = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.modulus
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.modulus - b % self.modulus) % self.modulus
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        (a * b) % self.modulus
    }
    fn neg(&self, a: &u64) -> u64 {
        (self.modulus - a % self.modulus) % self.modulus
    }
    fn from_i64(&self, n: i64) -> u64 {
        let m = self.modulus as i64;
        (((n % m) + m) % m) as u64
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        // Euler: a^(φ(p^m) - 1)
        let phi = self.modulus / self.p * (self.p - 1);
        let mut acc = 1u64;
        let mut base = *a % self.modulus;
        let mut e = phi - 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = (acc * base) % self.modulus;
            }
            base = (base * base) % self.modulus;
            e >>= 1;
        }
        Some(acc)
    }
    fn char_p(&self) -> Option<u64> {
        Some(self.p)
    }
    fn is_field(&self) -> bool {
        self.m == 1
    }
    fn fmt_elem(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse_elem(&self, s: &str) -> Result<u64, String> {
        let n: i64 = s.trim().parse().map_err(|e| format!("bad residue {s:?}: {e}"))?;
        Ok(self.from_i64(n))
    }
    fn name(&self) -> String {
        if self.m == 1 {
            format!("F{}", self.p)
        } else {
            format!("Z{}^{}", self.p, self.m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zpoly_arithmetic() {
        let r = ZPolyRing;
        let q = ZPoly::q_power(1);
        let a = r.add(&q, &r.one()); // q + 1
        let b = r.sub(&q, &r.one()); // q - 1
        let prod = r.mul(&a, &b); // q^2 - 1
        assert_eq!(prod, ZPoly(vec![-1, 0, 1]));
        assert_eq!(prod.eval(&IntRing, &BigInt::from(3)), BigInt::from(8));
    }

    #[test]
    fn zpoly_divides_exactly() {
        let r = ZPolyRing;
        let x = r.mul(&ZPoly::q_power(2), &ZPoly(vec![5, -1]));
        assert_eq!(x.div_q_power(2), ZPoly(vec![5, -1]));
    }

    #[test]
    fn f9_is_a_field() {
        let f = FpK::new(3, 2).unwrap();
        // x^2 + 1 is the smallest monic irreducible over F_3
        assert_eq!(f.min_poly, vec![1, 0, 1]);
        for a in f.all_elems() {
            if !f.is_zero(&a) {
                let inv = f.inv(&a).unwrap();
                assert!(f.is_one(&f.mul(&a, &inv)));
            }
        }
    }

    #[test]
    fn z8_units() {
        let r = Zpm::new(2, 3).unwrap();
        assert_eq!(r.inv(&3), Some(3)); // 3*3 = 9 = 1 mod 8
        assert_eq!(r.inv(&2), None);
    }
}
