//! Arithmetic in GF(p^m).
//!
//! Elements are stored as their canonical integer encoding
//! `idx = c_0 + c_1 p + ... + c_{m-1} p^{m-1}` where `c_i` are the coefficients
//! of the polynomial representative in the residue class ring
//! GF(p)[x]/(f). A [`FieldCtx`] owns the modulus `f` and precomputed tables;
//! it is shared behind an [`Arc`] so that graphs, channels and states can refer
//! to the same field cheaply.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on the field order for which full lookup tables are built.
const MAX_ORDER: u64 = 1 << 20;
/// Below this order the addition table is precomputed as a `d x d` array.
const ADD_TABLE_LIMIT: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{m} exceeds the supported maximum of {max}")]
    TooLarge { p: u32, m: u32, max: u64 },
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("elements belong to different fields")]
    ContextMismatch,
    #[error("element has {got} coefficients, expected {expected}")]
    BadLength { got: usize, expected: usize },
    #[error("coefficient {value} is outside [0, {p})")]
    BadCoefficient { value: i64, p: u32 },
    #[error("encoding {0} is not an element of this field")]
    OutOfRange(u32),
}

/// A field element in canonical integer encoding.
///
/// The encoding alone does not identify the field; arithmetic goes through a
/// [`FieldCtx`] or through the checked [`Elem`] wrapper.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub(crate) fn from_index_unchecked(idx: u32) -> Self {
        FieldElement(idx)
    }
}

/// The JSON header describing a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub p: u32,
    pub m: u32,
    /// Modulus coefficients, low degree first, including the leading 1.
    /// When absent the default modulus from [`find_irreducible`] is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreducible: Option<Vec<u32>>,
}

/// Shared handle to a field.
pub type Field = Arc<FieldCtx>;

pub struct FieldCtx {
    p: u32,
    m: u32,
    d: u32,
    modulus: Vec<u32>,
    // exp[i] = g^i for a primitive element g, stored twice over to avoid a mod.
    exp: Vec<u32>,
    log: Vec<u32>,
    neg: Vec<u32>,
    trace: Vec<u32>,
    add_table: Option<Vec<u32>>,
    inv2: Option<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GF({}^{}; {})",
            self.p,
            self.m,
            format_poly(&self.modulus, "x")
        )
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for FieldCtx {}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2u32;
    while (k as u64) * (k as u64) <= n as u64 {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Remainder of `a` modulo the monic polynomial `b` over GF(p). Both are
/// low-degree-first coefficient vectors.
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                let t = (lead as u64 * bc as u64) % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - t) % p as u64) as u32;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible_poly(f: &[u32], p: u32) -> bool {
    let m = f.len() - 1;
    if m == 1 {
        return true;
    }
    // Trial division by every monic polynomial of degree 1..=m/2.
    for deg in 1..=m / 2 {
        let count = (p as u64).pow(deg as u32);
        for t in 0..count {
            let mut g = Vec::with_capacity(deg + 1);
            let mut k = t;
            for _ in 0..deg {
                g.push((k % p as u64) as u32);
                k /= p as u64;
            }
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The lexicographically smallest monic irreducible polynomial of degree `m`
/// over GF(p), comparing the coefficients `c_0, c_1, ...` in that order.
/// The result lists coefficients low degree first and includes the leading 1.
pub fn find_irreducible(p: u32, m: u32) -> Result<Vec<u32>, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if m == 0 {
        return Err(GfError::ZeroDegree);
    }
    let count = (p as u64).checked_pow(m).ok_or(GfError::TooLarge {
        p,
        m,
        max: MAX_ORDER,
    })?;
    for t in 0..count {
        // c_0 is the most significant digit of t so that enumeration order is
        // lexicographic with c_0 compared first.
        let mut coeffs = vec![0u32; m as usize + 1];
        let mut k = t;
        for i in (0..m as usize).rev() {
            coeffs[i] = (k % p as u64) as u32;
            k /= p as u64;
        }
        coeffs[m as usize] = 1;
        if is_irreducible_poly(&coeffs, p) {
            return Ok(coeffs);
        }
    }
    Err(GfError::InvalidModulus(format!(
        "no irreducible polynomial of degree {m} over GF({p})"
    )))
}

fn format_poly(coeffs: &[u32], var: &str) -> String {
    let mut parts = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        parts.push(match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        });
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join("+")
    }
}

impl FieldCtx {
    /// GF(p^m) with the default modulus.
    pub fn new(p: u32, m: u32) -> Result<Field, GfError> {
        let modulus = find_irreducible(p, m)?;
        Self::build(p, m, modulus)
    }

    /// GF(p^m) with a caller-chosen modulus (low degree first, monic).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Field, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if modulus.len() < 2 {
            return Err(GfError::InvalidModulus("degree must be at least 1".into()));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(GfError::InvalidModulus("polynomial is not monic".into()));
        }
        if let Some(&c) = modulus.iter().find(|&&c| c >= p) {
            return Err(GfError::BadCoefficient { value: c as i64, p });
        }
        if !is_irreducible_poly(&modulus, p) {
            return Err(GfError::InvalidModulus(format!(
                "{} is reducible over GF({p})",
                format_poly(&modulus, "x")
            )));
        }
        let m = modulus.len() as u32 - 1;
        Self::build(p, m, modulus)
    }

    pub fn from_header(h: &FieldHeader) -> Result<Field, GfError> {
        let field = match &h.irreducible {
            Some(f) => Self::with_modulus(h.p, f.clone())?,
            None => Self::new(h.p, h.m)?,
        };
        if field.m != h.m {
            return Err(GfError::InvalidModulus(format!(
                "modulus has degree {} but m = {}",
                field.m, h.m
            )));
        }
        Ok(field)
    }

    pub fn header(&self) -> FieldHeader {
        FieldHeader {
            p: self.p,
            m: self.m,
            irreducible: Some(self.modulus.clone()),
        }
    }

    fn build(p: u32, m: u32, modulus: Vec<u32>) -> Result<Field, GfError> {
        let d64 = (p as u64).checked_pow(m).unwrap_or(u64::MAX);
        if d64 > MAX_ORDER {
            return Err(GfError::TooLarge {
                p,
                m,
                max: MAX_ORDER,
            });
        }
        let d = d64 as u32;
        let digits = |mut x: u32| {
            let mut v = vec![0u32; m as usize];
            for c in v.iter_mut() {
                *c = x % p;
                x /= p;
            }
            v
        };
        let encode = |c: &[u32]| c.iter().rev().fold(0u32, |acc, &ci| acc * p + ci);
        let poly_mul = |a: u32, b: u32| -> u32 {
            let (a, b) = (digits(a), digits(b));
            let mut prod = vec![0u32; 2 * m as usize - 1];
            for (i, &ai) in a.iter().enumerate() {
                for (j, &bj) in b.iter().enumerate() {
                    prod[i + j] = ((prod[i + j] as u64 + ai as u64 * bj as u64) % p as u64) as u32;
                }
            }
            let mut r = poly_rem(&prod, &modulus, p);
            r.resize(m as usize, 0);
            encode(&r)
        };

        let neg: Vec<u32> = (0..d)
            .map(|x| encode(&digits(x).iter().map(|&c| (p - c) % p).collect::<Vec<_>>()))
            .collect();

        // Find a primitive element and build exp/log tables.
        let order = d - 1;
        let mut exp = vec![0u32; 2 * order.max(1) as usize];
        let mut log = vec![0u32; d as usize];
        if d == 2 {
            exp[0] = 1;
            exp[1] = 1;
        } else {
            let mut found = false;
            for g in 2..d {
                let mut x = 1u32;
                let mut ok = true;
                for i in 0..order {
                    exp[i as usize] = x;
                    x = poly_mul(x, g);
                    if x == 1 && i + 1 < order {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(GfError::InvalidModulus("no primitive element found".into()));
            }
            for i in 0..order as usize {
                exp[i + order as usize] = exp[i];
            }
        }
        for i in 0..order as usize {
            log[exp[i] as usize] = i as u32;
        }

        let add_digits = |a: u32, b: u32| {
            let (da, db) = (digits(a), digits(b));
            encode(
                &da.iter()
                    .zip(&db)
                    .map(|(&x, &y)| (x + y) % p)
                    .collect::<Vec<_>>(),
            )
        };
        let add_table = (d <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; (d * d) as usize];
            for a in 0..d {
                for b in 0..d {
                    t[(a * d + b) as usize] = add_digits(a, b);
                }
            }
            t
        });

        let mut ctx = FieldCtx {
            p,
            m,
            d,
            modulus,
            exp,
            log,
            neg,
            trace: Vec::new(),
            add_table,
            inv2: None,
        };
        ctx.trace = (0..d)
            .map(|x| {
                let mut acc = FieldElement::ZERO;
                let mut y = FieldElement(x);
                for _ in 0..m {
                    acc = ctx.add(acc, y);
                    y = ctx.pow(y, p as u64);
                }
                debug_assert!(acc.0 < p, "trace must lie in the prime field");
                acc.0
            })
            .collect();
        if p != 2 {
            ctx.inv2 = Some(
                ctx.inv(FieldElement(2))
                    .expect("2 is invertible for odd p")
                    .0,
            );
        }
        Ok(Arc::new(ctx))
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }
    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }
    /// Number of elements, `d = p^m`.
    #[inline]
    pub fn order(&self) -> u32 {
        self.d
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement::ZERO
    }
    pub fn one(&self) -> FieldElement {
        FieldElement::ONE
    }

    /// Embeds an integer through the prime subfield.
    pub fn from_int(&self, k: i64) -> FieldElement {
        FieldElement(k.rem_euclid(self.p as i64) as u32)
    }

    pub fn element(&self, idx: u32) -> Result<FieldElement, GfError> {
        if idx < self.d {
            Ok(FieldElement(idx))
        } else {
            Err(GfError::OutOfRange(idx))
        }
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<FieldElement, GfError> {
        if coeffs.len() != self.m as usize {
            return Err(GfError::BadLength {
                got: coeffs.len(),
                expected: self.m as usize,
            });
        }
        let mut idx = 0u32;
        for &c in coeffs.iter().rev() {
            if c < 0 || c >= self.p as i64 {
                return Err(GfError::BadCoefficient {
                    value: c,
                    p: self.p,
                });
            }
            idx = idx * self.p + c as u32;
        }
        Ok(FieldElement(idx))
    }

    pub fn coeffs(&self, x: FieldElement) -> Vec<u32> {
        let mut v = Vec::with_capacity(self.m as usize);
        let mut k = x.0;
        for _ in 0..self.m {
            v.push(k % self.p);
            k /= self.p;
        }
        v
    }

    /// All elements in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.d).map(FieldElement)
    }

    /// All elements of the prime subfield GF(p).
    pub fn prime_subfield(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.p).map(FieldElement)
    }

    pub fn is_in_prime_subfield(&self, x: FieldElement) -> bool {
        x.0 < self.p
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.p == 2 {
            return FieldElement(a.0 ^ b.0);
        }
        if self.m == 1 {
            let s = a.0 + b.0;
            return FieldElement(if s >= self.p { s - self.p } else { s });
        }
        match &self.add_table {
            Some(t) => FieldElement(t[(a.0 * self.d + b.0) as usize]),
            None => {
                let (mut x, mut y, mut scale, mut out) = (a.0, b.0, 1u32, 0u32);
                for _ in 0..self.m {
                    out += ((x % self.p + y % self.p) % self.p) * scale;
                    x /= self.p;
                    y /= self.p;
                    scale *= self.p;
                }
                FieldElement(out)
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        FieldElement(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if a.0 == 0 || b.0 == 0 {
            return FieldElement::ZERO;
        }
        FieldElement(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, GfError> {
        if a.0 == 0 {
            return Err(GfError::DivisionByZero);
        }
        let order = self.d - 1;
        let l = self.log[a.0 as usize];
        Ok(FieldElement(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FieldElement, e: u64) -> FieldElement {
        if e == 0 {
            return FieldElement::ONE;
        }
        if a.0 == 0 {
            return FieldElement::ZERO;
        }
        let order = (self.d - 1) as u64;
        let l = (self.log[a.0 as usize] as u64 * (e % order)) % order;
        FieldElement(self.exp[l as usize])
    }

    /// Multiplicative inverse of 2; `None` in characteristic 2.
    pub fn inv2(&self) -> Option<FieldElement> {
        self.inv2.map(FieldElement)
    }

    /// Absolute trace `x + x^p + ... + x^{p^{m-1}}`, returned as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, x: FieldElement) -> u32 {
        self.trace[x.0 as usize]
    }

    /// The additive character `chi(x) = exp(2 pi i tr(x) / p)`.
    ///
    /// For `p = 2` this is the sign `(-1)^{tr(x)}`, i.e. `chi_4(2x)` on the
    /// Galois ring lift.
    #[inline]
    pub fn chi(&self, x: FieldElement) -> Character {
        Character {
            exponent: self.trace(x),
            p: self.p,
        }
    }

    pub fn format(&self, x: FieldElement) -> String {
        if self.m == 1 {
            return x.0.to_string();
        }
        format_poly(&self.coeffs(x), "θ")
    }

    pub fn bind(&self, x: FieldElement) -> Elem<'_> {
        Elem {
            field: self,
            value: x,
        }
    }
}

/// A p-th root of unity `exp(2 pi i k / p)` stored by its exponent `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    exponent: u32,
    p: u32,
}

impl Character {
    pub fn one(p: u32) -> Self {
        Character { exponent: 0, p }
    }

    pub fn exponent(self) -> u32 {
        self.exponent
    }

    pub fn is_one(self) -> bool {
        self.exponent == 0
    }

    pub fn conj(self) -> Self {
        Character {
            exponent: (self.p - self.exponent) % self.p,
            p: self.p,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        root_of_unity(self.exponent, self.p)
    }
}

impl Mul for Character {
    type Output = Character;
    fn mul(self, rhs: Character) -> Character {
        assert_eq!(self.p, rhs.p, "characters of different characteristic");
        Character {
            exponent: (self.exponent + rhs.exponent) % self.p,
            p: self.p,
        }
    }
}

/// `exp(2 pi i k / n)`, exact for the quarter turns.
pub fn root_of_unity(k: u32, n: u32) -> Complex64 {
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// The Z4 character `i^k` used for qubit phases.
pub fn chi4(k: u32) -> Complex64 {
    root_of_unity(k, 4)
}

/// A field element bound to its field, with checked arithmetic.
#[derive(Clone, Copy)]
pub struct Elem<'f> {
    field: &'f FieldCtx,
    value: FieldElement,
}

impl<'f> Elem<'f> {
    pub fn value(self) -> FieldElement {
        self.value
    }

    fn same_field(self, other: Elem<'_>) -> Result<(), GfError> {
        if std::ptr::eq(self.field, other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(GfError::ContextMismatch)
        }
    }

    pub fn checked_add(self, other: Elem<'_>) -> Result<Elem<'f>, GfError> {
        self.same_field(other)?;
        Ok(self.field.bind(self.field.add(self.value, other.value)))
    }

    pub fn checked_sub(self, other: Elem<'_>) -> Result<Elem<'f>, GfError> {
        self.same_field(other)?;
        Ok(self.field.bind(self.field.sub(self.value, other.value)))
    }

    pub fn checked_mul(self, other: Elem<'_>) -> Result<Elem<'f>, GfError> {
        self.same_field(other)?;
        Ok(self.field.bind(self.field.mul(self.value, other.value)))
    }

    pub fn checked_div(self, other: Elem<'_>) -> Result<Elem<'f>, GfError> {
        self.same_field(other)?;
        Ok(self.field.bind(self.field.div(self.value, other.value)?))
    }

    pub fn inv(self) -> Result<Elem<'f>, GfError> {
        Ok(self.field.bind(self.field.inv(self.value)?))
    }

    pub fn pow(self, e: u64) -> Elem<'f> {
        self.field.bind(self.field.pow(self.value, e))
    }

    pub fn trace(self) -> u32 {
        self.field.trace(self.value)
    }

    pub fn chi(self) -> Character {
        self.field.chi(self.value)
    }
}

impl PartialEq for Elem<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(*other).is_ok() && self.value == other.value
    }
}

impl fmt::Debug for Elem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(self.value))
    }
}

impl fmt::Display for Elem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(self.value))
    }
}

// The operator impls panic on mismatched fields; use the checked_* methods
// where the fields may legitimately differ.
impl<'f> Add for Elem<'f> {
    type Output = Elem<'f>;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("field mismatch")
    }
}

impl<'f> Sub for Elem<'f> {
    type Output = Elem<'f>;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("field mismatch")
    }
}

impl<'f> Mul for Elem<'f> {
    type Output = Elem<'f>;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("field mismatch")
    }
}

impl<'f> Neg for Elem<'f> {
    type Output = Elem<'f>;
    fn neg(self) -> Self {
        self.field.bind(self.field.neg(self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, m: u32) -> Field {
        FieldCtx::new(p, m).unwrap()
    }

    /// Schoolbook polynomial multiplication, independent of the log tables.
    fn naive_mul(f: &FieldCtx, a: FieldElement, b: FieldElement) -> FieldElement {
        let (p, m) = (f.p() as u64, f.m() as usize);
        let (ca, cb) = (f.coeffs(a), f.coeffs(b));
        let mut prod = vec![0u64; 2 * m];
        for i in 0..m {
            for j in 0..m {
                prod[i + j] = (prod[i + j] + ca[i] as u64 * cb[j] as u64) % p;
            }
        }
        for k in (m..2 * m).rev() {
            let lead = prod[k];
            for (i, &c) in f.modulus().iter().enumerate() {
                prod[k - m + i] = (prod[k - m + i] + (p - lead) * c as u64) % p;
            }
        }
        f.from_coeffs(&prod[..m].iter().map(|&c| c as i64).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn small_field_examples() {
        let f3 = gf(3, 1);
        assert_eq!(f3.add(FieldElement(2), FieldElement(2)), FieldElement(1));
        assert_eq!(f3.inv(FieldElement(2)).unwrap(), FieldElement(2));
        let f4 = gf(2, 2);
        let theta = f4.from_coeffs(&[0, 1]).unwrap();
        assert_eq!(f4.mul(theta, theta), f4.from_coeffs(&[1, 1]).unwrap());
    }

    #[test]
    fn default_moduli() {
        assert_eq!(find_irreducible(2, 1).unwrap(), vec![0, 1]);
        assert_eq!(find_irreducible(2, 2).unwrap(), vec![1, 1, 1]);
        assert_eq!(find_irreducible(3, 2).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn modulus_validation() {
        assert!(matches!(
            FieldCtx::with_modulus(2, vec![1, 0, 1]),
            Err(GfError::InvalidModulus(_))
        ));
        assert!(matches!(
            FieldCtx::with_modulus(3, vec![1, 0, 2]),
            Err(GfError::InvalidModulus(_))
        ));
        assert!(FieldCtx::with_modulus(3, vec![2, 1, 1]).is_ok());
        assert!(matches!(FieldCtx::new(4, 1), Err(GfError::NotPrime(4))));
        assert!(matches!(FieldCtx::new(3, 0), Err(GfError::ZeroDegree)));
    }

    #[test]
    fn trace_examples() {
        let f3 = gf(3, 1);
        assert_eq!(f3.trace(FieldElement(2)), 2);
        let f9 = gf(3, 2);
        assert_eq!(f9.trace(f9.from_coeffs(&[0, 1]).unwrap()), 0);
        let f4 = gf(2, 2);
        assert_eq!(f4.trace(f4.from_coeffs(&[0, 1]).unwrap()), 1);
    }

    #[test]
    fn character_examples() {
        let f3 = gf(3, 1);
        assert_eq!(f3.chi(FieldElement(1)).exponent(), 1);
        let f2 = gf(2, 1);
        assert_eq!(
            f2.chi(FieldElement(1)).to_complex(),
            Complex64::new(-1.0, 0.0)
        );
        let f4 = gf(2, 2);
        assert_eq!(
            f4.chi(f4.from_coeffs(&[0, 1]).unwrap()).to_complex(),
            Complex64::new(-1.0, 0.0)
        );
    }

    #[test]
    fn qubit_character_is_z4_character_of_twice_the_lift() {
        let f2 = gf(2, 1);
        for x in f2.elements() {
            let direct = f2.chi(x).to_complex();
            assert_eq!(direct, chi4(2 * x.index()));
        }
    }

    #[test]
    fn enumeration_order() {
        let f4 = gf(2, 2);
        let names: Vec<String> = f4.elements().map(|x| f4.format(x)).collect();
        assert_eq!(names, ["0", "1", "θ", "θ+1"]);
        assert_eq!(
            gf(3, 1).elements().map(|x| x.index()).collect::<Vec<_>>(),
            [0, 1, 2]
        );
    }

    #[test]
    fn field_axioms_against_schoolbook() {
        for (p, m) in [
            (2, 1),
            (2, 2),
            (2, 3),
            (2, 4),
            (2, 5),
            (3, 1),
            (3, 2),
            (3, 3),
            (5, 1),
            (5, 2),
            (7, 1),
            (31, 1),
        ] {
            let f = gf(p, m);
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), naive_mul(&f, a, b), "GF({p}^{m}) {a:?}*{b:?}");
                    let ca = f.coeffs(a);
                    let cb = f.coeffs(b);
                    let sum: Vec<i64> = ca
                        .iter()
                        .zip(&cb)
                        .map(|(x, y)| ((x + y) % p) as i64)
                        .collect();
                    assert_eq!(f.add(a, b), f.from_coeffs(&sum).unwrap());
                    assert_eq!(f.chi(a) * f.chi(b), f.chi(f.add(a, b)));
                    assert_eq!(f.trace(f.add(a, b)), (f.trace(a) + f.trace(b)) % p);
                }
                assert_eq!(f.add(a, f.neg(a)), FieldElement::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
                }
                assert_eq!(f.trace(f.pow(a, p as u64)), f.trace(a));
                let c: Vec<i64> = f.coeffs(a).iter().map(|&c| c as i64).collect();
                assert_eq!(f.from_coeffs(&c).unwrap(), a);
            }
            assert!(f.chi(FieldElement::ZERO).is_one());
        }
    }

    #[test]
    fn trace_matches_frobenius_sum() {
        for (p, m) in [(2, 3), (3, 3), (5, 2), (2, 4)] {
            let f = gf(p, m);
            for x in f.elements() {
                let mut acc = FieldElement::ZERO;
                let mut y = x;
                for _ in 0..m {
                    acc = f.add(acc, y);
                    let base = y;
                    for _ in 1..p {
                        y = naive_mul(&f, y, base);
                    }
                }
                assert_eq!(acc.index(), f.trace(x), "GF({p}^{m})");
            }
        }
    }

    #[test]
    fn checked_wrapper() {
        let f9 = gf(3, 2);
        let other = FieldCtx::with_modulus(3, vec![2, 1, 1]).unwrap();
        let a = f9.bind(FieldElement(4));
        let b = other.bind(FieldElement(4));
        assert_eq!(a.checked_add(b), Err(GfError::ContextMismatch));
        assert_eq!(
            a.checked_div(f9.bind(FieldElement::ZERO)),
            Err(GfError::DivisionByZero)
        );
        assert_eq!((a * a.inv().unwrap()).value(), FieldElement::ONE);
        let same = FieldCtx::new(3, 2).unwrap();
        assert!(a.checked_add(same.bind(FieldElement(1))).is_ok());
    }
}
