//! Exact arithmetic in the finite field F_{p^m}.
//!
//! Elements are stored as their canonical integer code: the coefficient
//! vector `c_0 + c_1 x + ... + c_{m-1} x^{m-1}` read as a base-`p` number
//! with `c_0` least significant. For `p = 2` this is the familiar polynomial
//! bitmask, so `x^4 + x + 1` is written `0x13`.
//!
//! A [`Field`] is a cheap, shareable handle. Fields of order up to 2^16 carry
//! discrete-log/antilog tables; larger fields fall back to schoolbook
//! multiplication reduced by the modulus.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest field order for which log/antilog tables are built.
pub const TABLE_LIMIT: u64 = 1 << 16;

/// One element of a finite field, identified by its canonical code.
///
/// The code is only meaningful together with the [`Field`] that produced it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn code(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub(crate) const fn from_code(code: u64) -> Elem {
        Elem(code)
    }
}

/// Characteristic, degree and monic modulus of F_{p^m}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
    m: u32,
    /// Coefficients over Z_p, constant term first, length `m + 1`, monic.
    modulus: Vec<u64>,
}

impl FieldSpec {
    /// Validates primality of `p`, that the modulus is monic of degree `m`,
    /// that it is irreducible over Z_p and that `p^m` fits in 64 bits.
    pub fn new(p: u64, m: u32, modulus: Vec<u64>) -> Result<Self> {
        if p >= 1 << 16 {
            return Err(Error::InvalidField(format!("characteristic {p} is not below 2^16")));
        }
        if !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidField("degree must be at least 1".into()));
        }
        if p.checked_pow(m).is_none() {
            return Err(Error::InvalidField(format!("{p}^{m} does not fit in 64 bits")));
        }
        if m == 1 {
            // Prime fields never reduce; the modulus is recorded as x.
            return Ok(FieldSpec { p, m, modulus: vec![0, 1] });
        }
        if modulus.len() != m as usize + 1 {
            return Err(Error::InvalidField(format!(
                "modulus must have degree exactly {m} (got {} coefficients)",
                modulus.len()
            )));
        }
        if let Some(c) = modulus.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidField(format!("modulus coefficient {c} is not reduced mod {p}")));
        }
        if modulus[m as usize] != 1 {
            return Err(Error::InvalidField("modulus must be monic".into()));
        }
        if !is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!(
                "modulus {} is reducible over Z_{p}",
                format_modulus(p, &modulus)
            )));
        }
        Ok(FieldSpec { p, m, modulus })
    }

    /// The shipped default modulus, if any: binary fields 2^2 .. 2^8.
    pub fn default_modulus(p: u64, m: u32) -> Option<Vec<u64>> {
        let mask: u64 = match (p, m) {
            (2, 2) => 0x7,
            (2, 3) => 0xb,
            (2, 4) => 0x13,
            (2, 5) => 0x25,
            (2, 6) => 0x43,
            (2, 7) => 0x83,
            (2, 8) => 0x11d,
            _ => return None,
        };
        Some((0..=m).map(|i| (mask >> i) & 1).collect())
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.m)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.m == 1 {
            write!(f, "{}^1", self.p)
        } else {
            write!(f, "{}^{}/{}", self.p, self.m, format_modulus(self.p, &self.modulus))
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    /// Grammar: `p^m/modulus`, where the modulus is a `0x` bitmask for `p = 2`
    /// and a comma-separated coefficient list (constant term first) otherwise.
    /// The modulus may be omitted for `m = 1` and for the binary fields that
    /// ship a default. A bare prime `p` means `p^1`.
    fn from_str(s: &str) -> Result<Self> {
        let lead = s.len() - s.trim_start().len();
        let body = s.trim();
        let (head, modulus_text) = match body.find('/') {
            Some(i) => (&body[..i], Some((lead + i + 1, &body[i + 1..]))),
            None => (body, None),
        };
        let (p_text, m_text) = match head.find('^') {
            Some(i) => (&head[..i], Some((lead + i + 1, &head[i + 1..]))),
            None => (head, None),
        };
        let p: u64 = p_text
            .trim()
            .parse()
            .map_err(|_| Error::parse(lead, format!("expected a prime characteristic, found {p_text:?}")))?;
        let m: u32 = match m_text {
            Some((pos, t)) => t
                .trim()
                .parse()
                .map_err(|_| Error::parse(pos, format!("expected an extension degree, found {t:?}")))?,
            None => 1,
        };
        let modulus = match modulus_text {
            Some((pos, t)) => parse_modulus(p, t.trim(), pos)?,
            None if m == 1 => vec![0, 1],
            None => FieldSpec::default_modulus(p, m).ok_or_else(|| {
                Error::InvalidField(format!("no default modulus for {p}^{m}; write {p}^{m}/<modulus>"))
            })?,
        };
        FieldSpec::new(p, m, modulus)
    }
}

fn parse_modulus(p: u64, text: &str, pos: usize) -> Result<Vec<u64>> {
    if p == 2 {
        let hex = text
            .strip_prefix("0x")
            .or_else(|| text.strip_prefix("0X"))
            .ok_or_else(|| Error::parse(pos, "binary modulus must be a 0x bitmask"))?;
        let mask = u64::from_str_radix(hex, 16)
            .map_err(|_| Error::parse(pos, format!("invalid hex bitmask {text:?}")))?;
        if mask == 0 {
            return Err(Error::parse(pos, "modulus must be nonzero"));
        }
        let deg = 63 - mask.leading_zeros();
        Ok((0..=deg).map(|i| (mask >> i) & 1).collect())
    } else {
        let mut out = Vec::new();
        let mut offset = pos;
        for part in text.split(',') {
            let c = part
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::parse(offset, format!("invalid coefficient {part:?}")))?;
            out.push(c);
            offset += part.len() + 1;
        }
        Ok(out)
    }
}

fn format_modulus(p: u64, modulus: &[u64]) -> String {
    if p == 2 {
        let mask = modulus.iter().rev().fold(0u64, |acc, &c| (acc << 1) | c);
        format!("{mask:#x}")
    } else {
        modulus.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Discrete log / antilog tables relative to a fixed generator.
#[derive(Debug)]
pub(crate) struct Tables {
    /// `log[c]` for nonzero codes; `log[0]` is unused.
    pub(crate) log: Vec<u32>,
    /// `exp[i] = g^i` for `i < 2(q-1)` so sums of two logs need no reduction.
    pub(crate) exp: Vec<u32>,
    /// Multiplicative group order `q - 1`.
    pub(crate) group: u32,
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    label: String,
    q: u64,
    tables: Option<Tables>,
    /// Smallest non-residue by code, odd characteristic only.
    nonresidue: Option<Elem>,
}

/// Handle to F_{p^m}; cloning is cheap and the field is immutable.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.0.label)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.label)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Eq for Field {}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::new(s.parse()?)
    }
}

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let q = spec.order();
        let label = spec.to_string();
        let mut inner = Inner { spec, label, q, tables: None, nonresidue: None };
        if q <= TABLE_LIMIT {
            inner.tables = Some(build_tables(&inner));
        }
        let mut field = Field(Arc::new(inner));
        if field.characteristic() != 2 {
            let z = field
                .nonzero()
                .find(|&a| !field.euler_is_one(a))
                .expect("odd-order field has a non-residue");
            Arc::get_mut(&mut field.0).expect("fresh handle").nonresidue = Some(z);
        }
        Ok(field)
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.parse()
    }

    /// F_{2^m} with its default modulus.
    pub fn binary(m: u32) -> Result<Self> {
        let modulus = FieldSpec::default_modulus(2, m)
            .ok_or_else(|| Error::InvalidField(format!("no default modulus for 2^{m}")))?;
        Field::new(FieldSpec::new(2, m, modulus)?)
    }

    /// The prime field Z_p.
    pub fn prime(p: u64) -> Result<Self> {
        Field::new(FieldSpec::new(p, 1, vec![0, 1])?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    /// Canonical spec string, e.g. `2^4/0x13`.
    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn characteristic(&self) -> u64 {
        self.0.spec.p
    }

    pub fn degree(&self) -> u32 {
        self.0.spec.m
    }

    pub fn order(&self) -> u64 {
        self.0.q
    }

    pub(crate) fn tables(&self) -> Option<&Tables> {
        self.0.tables.as_ref()
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// Validates a code against the field order.
    pub fn elem(&self, code: u64) -> Result<Elem> {
        if code < self.0.q {
            Ok(Elem(code))
        } else {
            Err(Error::usage(format!("code {code} is not an element of {}", self.label())))
        }
    }

    pub fn contains(&self, a: Elem) -> bool {
        a.0 < self.0.q
    }

    /// Every element, ascending by code.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.0.q).map(Elem)
    }

    /// Every nonzero element, ascending by code.
    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.0.q).map(Elem)
    }

    fn digits(&self, a: Elem) -> Vec<u64> {
        let p = self.characteristic();
        let mut code = a.0;
        (0..self.degree())
            .map(|_| {
                let d = code % p;
                code /= p;
                d
            })
            .collect()
    }

    fn elem_from_digits(&self, digits: &[u64]) -> Elem {
        let p = self.characteristic();
        Elem(digits.iter().rev().fold(0, |acc, &d| acc * p + d))
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let p = self.characteristic();
        if p == 2 {
            return Elem(a.0 ^ b.0);
        }
        if self.degree() == 1 {
            return Elem((a.0 + b.0) % p);
        }
        let (mut x, mut y) = (a.0, b.0);
        let (mut out, mut place) = (0, 1);
        while x > 0 || y > 0 {
            out += ((x % p + y % p) % p) * place;
            x /= p;
            y /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let p = self.characteristic();
        if p == 2 {
            return a;
        }
        if self.degree() == 1 {
            return Elem((p - a.0) % p);
        }
        let (mut x, mut out, mut place) = (a.0, 0, 1);
        while x > 0 {
            out += ((p - x % p) % p) * place;
            x /= p;
            place *= p;
        }
        Elem(out)
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        match &self.0.tables {
            Some(t) => Elem(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize] as u64),
            None => self.mul_schoolbook(a, b),
        }
    }

    fn mul_schoolbook(&self, a: Elem, b: Elem) -> Elem {
        let p = self.characteristic();
        if self.degree() == 1 {
            return Elem(((a.0 as u128 * b.0 as u128) % p as u128) as u64);
        }
        let prod = poly_mul(&self.digits(a), &self.digits(b), p);
        let mut rem = poly_rem(prod, &self.0.spec.modulus, p);
        rem.resize(self.degree() as usize, 0);
        self.elem_from_digits(&rem)
    }

    pub fn square(&self, a: Elem) -> Elem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.0 == 0 {
            return Elem::ZERO;
        }
        if let Some(t) = &self.0.tables {
            let l = (t.log[a.0 as usize] as u128 * e as u128) % t.group as u128;
            return Elem(t.exp[l as usize] as u64);
        }
        let (mut base, mut acc) = (a, Elem::ONE);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse, `a^(q-2)`.
    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.0 == 0 {
            return Err(Error::domain("zero has no multiplicative inverse"));
        }
        Ok(self.pow(a, self.0.q - 2))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    fn euler_is_one(&self, a: Elem) -> bool {
        self.pow(a, (self.0.q - 1) / 2) == Elem::ONE
    }

    /// Whether a nonzero element is a square of a nonzero element.
    pub fn is_qr(&self, a: Elem) -> Result<bool> {
        if a.0 == 0 {
            return Err(Error::domain("quadratic residuosity is defined on nonzero elements only"));
        }
        Ok(self.characteristic() == 2 || self.euler_is_one(a))
    }

    /// Square root, or `None` for a non-residue.
    ///
    /// In odd characteristic the root with the smaller code is returned.
    pub fn sqrt(&self, a: Elem) -> Option<Elem> {
        if a.0 == 0 {
            return Some(Elem::ZERO);
        }
        let q = self.0.q;
        if self.characteristic() == 2 {
            // Frobenius is a bijection; its inverse is x -> x^(2^(m-1)).
            return Some(self.pow(a, q / 2));
        }
        if !self.euler_is_one(a) {
            return None;
        }
        // Tonelli-Shanks over the group of order q - 1 = 2^s * t.
        let s = (q - 1).trailing_zeros();
        let t = (q - 1) >> s;
        let z = self.0.nonresidue.expect("odd characteristic");
        let mut bound = s;
        let mut c = self.pow(z, t);
        let mut tt = self.pow(a, t);
        let mut r = self.pow(a, t.div_ceil(2));
        while tt != Elem::ONE {
            let mut i = 0;
            let mut probe = tt;
            while probe != Elem::ONE {
                probe = self.square(probe);
                i += 1;
            }
            let mut b = c;
            for _ in 0..bound - i - 1 {
                b = self.square(b);
            }
            bound = i;
            c = self.square(b);
            tt = self.mul(tt, c);
            r = self.mul(r, b);
        }
        let other = self.neg(r);
        Some(r.min(other))
    }

    /// Text form: `0x`-prefixed hex for binary fields, decimal otherwise.
    pub fn format_elem(&self, a: Elem) -> String {
        if self.characteristic() == 2 {
            format!("{:#x}", a.0)
        } else {
            a.0.to_string()
        }
    }

    /// Accepts `0x` hex or decimal codes in any field.
    pub fn parse_elem(&self, text: &str) -> Result<Elem> {
        let t = text.trim();
        let code = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(hex, 16),
            None => t.parse::<u64>(),
        }
        .map_err(|_| Error::parse(0, format!("invalid field element {text:?}")))?;
        if code >= self.0.q {
            return Err(Error::parse(0, format!("{text} is not an element of {}", self.label())));
        }
        Ok(Elem(code))
    }
}

fn build_tables(inner: &Inner) -> Tables {
    // Generator search runs on a table-less handle.
    let bare = Field(Arc::new(Inner {
        spec: inner.spec.clone(),
        label: inner.label.clone(),
        q: inner.q,
        tables: None,
        nonresidue: None,
    }));
    let q = inner.q;
    let group = q - 1;
    let factors = prime_factors(group);
    let generator = (1..q)
        .map(Elem)
        .find(|&g| factors.iter().all(|&r| bare.pow(g, group / r) != Elem::ONE))
        .expect("multiplicative group of a finite field is cyclic");
    let mut log = vec![0u32; q as usize];
    let mut exp = vec![0u32; 2 * group as usize];
    let mut x = Elem::ONE;
    for i in 0..group as usize {
        exp[i] = x.0 as u32;
        exp[i + group as usize] = x.0 as u32;
        log[x.0 as usize] = i as u32;
        x = bare.mul(x, generator);
    }
    Tables { log, exp, group: group as u32 }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Remainder modulo an arbitrary nonzero polynomial.
fn poly_rem(a: Vec<u64>, f: &[u64], p: u64) -> Vec<u64> {
    let f = trim(f.to_vec());
    let lead_inv = mod_pow(*f.last().expect("nonzero divisor"), p - 2, p);
    let mut r = trim(a);
    while r.len() >= f.len() {
        let shift = r.len() - f.len();
        let factor = r[r.len() - 1] * lead_inv % p;
        for (i, &c) in f.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - factor * c % p) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(a: Vec<u64>, b: Vec<u64>, p: u64) -> Vec<u64> {
    let (mut a, mut b) = (trim(a), trim(b));
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

fn poly_pow_mod(base: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1];
    let mut b = poly_rem(base.to_vec(), f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_rem(poly_mul(&acc, &b, p), f, p);
        }
        b = poly_rem(poly_mul(&b, &b, p), f, p);
        e >>= 1;
    }
    acc
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let m = f.len() - 1;
    if m <= 3 {
        // A reducible polynomial of degree <= 3 has a linear factor.
        return (0..p).all(|x| f.iter().rev().fold(0, |acc, &c| (acc * x + c) % p) != 0);
    }
    // Ben-Or: f is irreducible iff gcd(x^(p^k) - x, f) = 1 for k <= m/2.
    let mut h = vec![0, 1];
    for _ in 1..=m / 2 {
        h = poly_pow_mod(&h, p, f, p);
        let mut g = h.clone();
        g.resize(g.len().max(2), 0);
        g[1] = (g[1] + p - 1) % p;
        if poly_gcd(f.to_vec(), g, p).len() > 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f16() -> Field {
        Field::parse("2^4/0x13").unwrap()
    }

    #[test]
    fn binary_addition_is_xor() {
        let f = f16();
        assert_eq!(f.add(Elem(0x3), Elem(0x5)), Elem(0x6));
        assert_eq!(f.add(Elem(0x9), Elem::ZERO), Elem(0x9));
    }

    #[test]
    fn prime_field_addition() {
        let f = Field::prime(5).unwrap();
        assert_eq!(f.add(Elem(3), Elem(4)), Elem(2));
        assert_eq!(f.sub(Elem(1), Elem(3)), Elem(3));
    }

    #[test]
    fn beta_to_the_fourth_is_beta_plus_one() {
        let f = f16();
        let beta = Elem(0x2);
        let beta3 = f.pow(beta, 3);
        assert_eq!(f.mul(beta, beta3), Elem(0x3));
        assert_eq!(f.mul(Elem(0xd), Elem::ONE), Elem(0xd));
    }

    #[test]
    fn four_element_field_product() {
        let f = Field::binary(2).unwrap();
        assert_eq!(f.mul(Elem(0x2), Elem(0x3)), Elem(0x1));
    }

    #[test]
    fn inverses() {
        let f = f16();
        assert_eq!(f.inv(Elem::ONE).unwrap(), Elem::ONE);
        assert_eq!(f.inv(Elem(0x2)).unwrap(), Elem(0x9));
        assert_eq!(Field::prime(7).unwrap().inv(Elem(3)).unwrap(), Elem(5));
        assert!(matches!(f.inv(Elem::ZERO), Err(Error::Domain(_))));
    }

    #[test]
    fn schoolbook_agrees_with_tables() {
        for spec in ["2^4/0x13", "2^4/0x1f", "3^2/1,0,1", "2^8/0x11b", "5^2/2,0,1"] {
            let f = Field::parse(spec).unwrap();
            for a in f.elements() {
                for b in f.elements().step_by(3) {
                    assert_eq!(f.mul(a, b), f.mul_schoolbook(a, b), "{spec}: {a:?}*{b:?}");
                }
            }
        }
    }

    #[test]
    fn square_roots_in_small_prime_field() {
        let f = Field::prime(7).unwrap();
        assert_eq!(f.sqrt(Elem(3)), None);
        assert_eq!(f.sqrt(Elem(2)), Some(Elem(3)));
        assert_eq!(f.sqrt(Elem::ZERO), Some(Elem::ZERO));
        assert_eq!(f.sqrt(Elem::ONE), Some(Elem::ONE));
    }

    #[test]
    fn binary_sqrt_is_total() {
        let f = f16();
        for a in f.elements() {
            let r = f.sqrt(a).unwrap();
            assert_eq!(f.square(r), a);
        }
    }

    #[test]
    fn residues() {
        let f8 = Field::binary(3).unwrap();
        assert!(f8.nonzero().all(|a| f8.is_qr(a).unwrap()));
        let f7 = Field::prime(7).unwrap();
        assert_eq!(f7.nonzero().filter(|&a| f7.is_qr(a).unwrap()).count(), 3);
        assert!(f7.is_qr(Elem::ZERO).is_err());
    }

    #[test]
    fn qr_matches_brute_force_squares_in_f9() {
        let f = Field::parse("3^2/1,0,1").unwrap();
        let squares: std::collections::BTreeSet<_> = f.nonzero().map(|x| f.square(x)).collect();
        for a in f.nonzero() {
            assert_eq!(f.is_qr(a).unwrap(), squares.contains(&a));
        }
        assert_eq!(squares.len(), 4);
    }

    #[test]
    fn large_field_without_tables() {
        let f = Field::parse("2^20/0x100009").unwrap();
        assert!(f.tables().is_none());
        let a = f.elem(0x12345).unwrap();
        let ai = f.inv(a).unwrap();
        assert_eq!(f.mul(a, ai), Elem::ONE);
        let r = f.sqrt(a).unwrap();
        assert_eq!(f.square(r), a);
        let g = Field::parse("65521^2/3,1,1");
        // x^2 + x + 3 may or may not be irreducible mod 65521; both outcomes are typed.
        if let Ok(g) = g {
            let b = g.elem(123_456_789).unwrap();
            assert_eq!(g.mul(b, g.inv(b).unwrap()), Elem::ONE);
            let s = g.square(b);
            assert_eq!(g.square(g.sqrt(s).unwrap()), s);
        }
    }

    #[test]
    fn spec_parsing_and_display() {
        assert_eq!(Field::parse("2^4").unwrap().label(), "2^4/0x13");
        assert_eq!(Field::parse(" 7 ").unwrap().label(), "7^1");
        assert_eq!(Field::parse("3^2/2,2,1").unwrap().label(), "3^2/2,2,1");
        assert!(matches!(Field::parse("4^1"), Err(Error::InvalidField(_))));
        assert!(matches!(Field::parse("2^4/0x11"), Err(Error::InvalidField(_))));
        assert!(matches!(Field::parse("3^2"), Err(Error::InvalidField(_))));
        assert!(matches!(Field::parse("3^2/1,0,2"), Err(Error::InvalidField(_))));
        assert!(matches!(Field::parse("2^x"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(Field::parse("2^4/13"), Err(Error::Parse { pos: 4, .. })));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 has no roots but is reducible.
        assert!(matches!(Field::parse("2^4/0x15"), Err(Error::InvalidField(_))));
    }

    #[test]
    fn element_text() {
        let f = f16();
        assert_eq!(f.format_elem(Elem(9)), "0x9");
        assert_eq!(f.parse_elem("0xF").unwrap(), Elem(15));
        assert!(f.parse_elem("0x10").is_err());
        let g = Field::prime(7).unwrap();
        assert_eq!(g.format_elem(Elem(5)), "5");
    }
}
