//! Finite fields `F_q = F_p[z]/(m(z))` with Zech-logarithm tables.
//!
//! Descriptors are interned for the lifetime of the process, so elements are
//! `Copy` and carry a `&'static` reference to their field.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Mutex;

use super::{ArithError, Field, FqAlgebra, Ring, Var};

/// Largest supported field order; tables are `O(q)`.
pub const MAX_ORDER: u64 = 1 << 16;

const ZERO_LOG: u32 = u32::MAX;

static REGISTRY: Mutex<Vec<&'static FieldDescriptor>> = Mutex::new(Vec::new());

pub struct FieldDescriptor {
    p: u64,
    r: usize,
    q: u64,
    /// Monic, little-endian, reduced mod p.
    modulus: Vec<u64>,
    label: String,
    /// log -> residue index
    exp: Vec<u32>,
    /// residue index -> log
    log: Vec<u32>,
    /// n -> log(1 + g^n)
    zech: Vec<u32>,
    neg_one: u32,
}

impl FieldDescriptor {
    /// Interns the field `F_p[z]/(modulus)`. The modulus is given
    /// little-endian with integer coefficients and must be monic after
    /// reduction mod `p` and irreducible.
    pub fn new(p: u64, modulus: &[i64]) -> Result<&'static FieldDescriptor, ArithError> {
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        let mut m: Vec<u64> = modulus.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect();
        while m.last() == Some(&0) {
            m.pop();
        }
        if m.len() < 2 {
            return Err(ArithError::InvalidModulus("degree must be at least 1".into()));
        }
        if *m.last().unwrap() != 1 {
            return Err(ArithError::InvalidModulus(format!("{} is not monic", format_residue(&m, p, 'z'))));
        }
        let r = m.len() - 1;
        let q = p
            .checked_pow(r as u32)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(ArithError::FieldTooLarge(p.saturating_pow(r as u32)))?;

        let mut reg = REGISTRY.lock().unwrap();
        if let Some(d) = reg.iter().find(|d| d.p == p && d.modulus == m) {
            return Ok(d);
        }
        if r >= 2 {
            if let Some(factor) = find_factor(&m, p) {
                return Err(ArithError::InvalidModulus(format!(
                    "{} is divisible by {}",
                    format_residue(&m, p, 'z'),
                    format_residue(&factor, p, 'z')
                )));
            }
        }
        let desc = Box::leak(Box::new(build(p, r, q, m)));
        reg.push(desc);
        Ok(desc)
    }

    pub fn prime(p: u64) -> Result<&'static FieldDescriptor, ArithError> {
        Self::new(p, &[0, 1])
    }

    /// `F_4 = F_2[z]/(z^2+z+1)`; `z` is a primitive cube root of unity.
    pub fn gf4() -> &'static FieldDescriptor {
        Self::new(2, &[1, 1, 1]).expect("built-in modulus")
    }

    /// `F_8 = F_2[z]/(z^3+z+1)`.
    pub fn gf8() -> &'static FieldDescriptor {
        Self::new(2, &[1, 1, 0, 1]).expect("built-in modulus")
    }

    /// `F_9 = F_3[z]/(z^2+1)`; `z^2 = -1`.
    pub fn gf9() -> &'static FieldDescriptor {
        Self::new(3, &[1, 0, 1]).expect("built-in modulus")
    }

    /// A field of order `p^r`: the built-in modulus when there is one,
    /// otherwise the first irreducible monic polynomial in enumeration order.
    pub fn of_degree(p: u64, r: usize) -> Result<&'static FieldDescriptor, ArithError> {
        if r == 0 {
            return Err(ArithError::InvalidModulus("degree must be at least 1".into()));
        }
        if r == 1 {
            return Self::prime(p);
        }
        let builtin: Option<&[i64]> = match (p, r) {
            (2, 2) => Some(&[1, 1, 1]),
            (2, 3) => Some(&[1, 1, 0, 1]),
            (2, 4) => Some(&[1, 1, 0, 0, 1]),
            (3, 2) => Some(&[1, 0, 1]),
            (3, 3) => Some(&[1, 2, 0, 1]),
            (5, 2) => Some(&[3, 0, 1]),
            (7, 2) => Some(&[1, 0, 1]),
            _ => None,
        };
        if let Some(m) = builtin {
            return Self::new(p, m);
        }
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p));
        }
        if p.checked_pow(r as u32).is_none_or(|q| q > MAX_ORDER) {
            return Err(ArithError::FieldTooLarge(p.saturating_pow(r as u32)));
        }
        let count = p.pow(r as u32);
        for low in 0..count {
            let mut m = digits(low, p, r);
            m.push(1);
            if m[0] != 0 && find_factor(&m, p).is_none() {
                let coeffs: Vec<i64> = m.iter().map(|&c| c as i64).collect();
                return Self::new(p, &coeffs);
            }
        }
        Err(ArithError::InvalidModulus(format!("no irreducible of degree {r} over F_{p}")))
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Extension degree over the prime field.
    pub fn degree(&self) -> usize {
        self.r
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_prime_field(&self) -> bool {
        self.r == 1
    }

    /// The modulus rendered in the generator symbol, or `None` for prime fields.
    pub fn modulus_string(&self) -> Option<String> {
        (self.r > 1).then(|| format_residue(&self.modulus, self.p, 'z'))
    }

    pub fn zero(&'static self) -> Fq {
        Fq { desc: self, log: ZERO_LOG }
    }

    pub fn one(&'static self) -> Fq {
        Fq { desc: self, log: 0 }
    }

    /// The class of `z`. In a prime field this is the residue of 0.
    pub fn generator(&'static self) -> Fq {
        self.elt_at(if self.r == 1 { 0 } else { self.p as u32 })
    }

    pub fn int(&'static self, n: i64) -> Fq {
        self.elt_at(n.rem_euclid(self.p as i64) as u32)
    }

    /// Element from little-endian residue coefficients in `z`.
    pub fn from_residue(&'static self, coeffs: &[i64]) -> Fq {
        let p = self.p as i64;
        let mut poly: Vec<u64> = coeffs.iter().map(|&c| c.rem_euclid(p) as u64).collect();
        reduce(&mut poly, &self.modulus, self.p);
        self.elt_at(to_index(&poly, self.p) as u32)
    }

    fn elt_at(&'static self, idx: u32) -> Fq {
        Fq { desc: self, log: self.log[idx as usize] }
    }

    /// All elements in residue-index order (0, 1, ..., p-1, z, z+1, ...).
    pub fn elements(&'static self) -> impl Iterator<Item = Fq> {
        (0..self.q as u32).map(move |i| self.elt_at(i))
    }

    /// Elements of the prime subfield.
    pub fn prime_elements(&'static self) -> impl Iterator<Item = Fq> {
        (0..self.p as u32).map(move |i| self.elt_at(i))
    }
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.p == other.p && self.modulus == other.modulus)
    }
}

impl Eq for FieldDescriptor {}

impl fmt::Debug for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl fmt::Display for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Element of a finite field, stored as a discrete logarithm.
#[derive(Clone, Copy)]
pub struct Fq {
    desc: &'static FieldDescriptor,
    log: u32,
}

impl Fq {
    pub fn descriptor(&self) -> &'static FieldDescriptor {
        self.desc
    }

    /// Residue index `sum c_i p^i`; also the enumeration order.
    pub fn index(&self) -> u32 {
        if self.log == ZERO_LOG {
            0
        } else {
            self.desc.exp[self.log as usize]
        }
    }

    /// Little-endian residue coefficients in `z`, length `r`.
    pub fn residue(&self) -> Vec<u64> {
        digits(self.index() as u64, self.desc.p, self.desc.r)
    }

    pub fn in_prime_field(&self) -> bool {
        (self.index() as u64) < self.desc.p
    }

    fn same(&self, rhs: &Fq) -> bool {
        std::ptr::eq(self.desc, rhs.desc)
    }

    fn check(&self, rhs: &Fq) -> Result<(), ArithError> {
        if self.same(rhs) {
            Ok(())
        } else {
            Err(ArithError::DescriptorMismatch(self.desc.label.clone(), rhs.desc.label.clone()))
        }
    }

    pub fn checked_add(&self, rhs: &Fq) -> Result<Fq, ArithError> {
        self.check(rhs)?;
        Ok(Ring::add(self, rhs))
    }

    pub fn checked_sub(&self, rhs: &Fq) -> Result<Fq, ArithError> {
        self.check(rhs)?;
        Ok(Ring::sub(self, rhs))
    }

    pub fn checked_mul(&self, rhs: &Fq) -> Result<Fq, ArithError> {
        self.check(rhs)?;
        Ok(Ring::mul(self, rhs))
    }

    pub fn checked_div(&self, rhs: &Fq) -> Result<Fq, ArithError> {
        self.check(rhs)?;
        Field::div(self, rhs)
    }

    /// The unique `p`-th root (finite fields are perfect).
    pub fn pth_root(&self) -> Fq {
        if self.log == ZERO_LOG {
            return *self;
        }
        let n = self.desc.q - 1;
        let e = self.desc.q / self.desc.p;
        Fq { desc: self.desc, log: ((self.log as u64 * e) % n) as u32 }
    }
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.log == other.log && self.same(other)
    }
}

impl Eq for Fq {}

impl Hash for Fq {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.log.hash(state);
    }
}

impl PartialOrd for Fq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fq {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index().cmp(&other.index())
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_residue(&self.residue(), self.desc.p, 'z'))
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Ring for Fq {
    type Ctx = &'static FieldDescriptor;

    fn ctx(&self) -> Self::Ctx {
        self.desc
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        ctx.zero()
    }

    fn one(ctx: &Self::Ctx) -> Self {
        ctx.one()
    }

    fn characteristic(ctx: &Self::Ctx) -> u64 {
        ctx.p
    }

    fn is_zero(&self) -> bool {
        self.log == ZERO_LOG
    }

    fn is_one(&self) -> bool {
        self.log == 0
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        ctx.int(n)
    }

    fn add(&self, rhs: &Self) -> Self {
        assert!(self.same(rhs), "field descriptor mismatch");
        if self.log == ZERO_LOG {
            return *rhs;
        }
        if rhs.log == ZERO_LOG {
            return *self;
        }
        // a + b = a (1 + b/a)
        let n = self.desc.q as u32 - 1;
        let diff = (rhs.log + n - self.log) % n;
        let z = self.desc.zech[diff as usize];
        if z == ZERO_LOG {
            return self.desc.zero();
        }
        Fq { desc: self.desc, log: ((self.log as u64 + z as u64) % n as u64) as u32 }
    }

    fn mul(&self, rhs: &Self) -> Self {
        assert!(self.same(rhs), "field descriptor mismatch");
        if self.log == ZERO_LOG || rhs.log == ZERO_LOG {
            return self.desc.zero();
        }
        let n = self.desc.q - 1;
        Fq { desc: self.desc, log: ((self.log as u64 + rhs.log as u64) % n) as u32 }
    }

    fn neg(&self) -> Self {
        if self.log == ZERO_LOG {
            return *self;
        }
        let n = self.desc.q - 1;
        Fq { desc: self.desc, log: ((self.log as u64 + self.desc.neg_one as u64) % n) as u32 }
    }

    fn pow(&self, e: u64) -> Self {
        if e == 0 {
            return self.desc.one();
        }
        if self.log == ZERO_LOG {
            return *self;
        }
        let n = self.desc.q - 1;
        let log = (self.log as u128 * (e % n) as u128 % n as u128) as u32;
        Fq { desc: self.desc, log }
    }

    fn frobenius(&self) -> Self {
        self.pow(self.desc.p)
    }

    fn frobenius_power(&self, e: u32) -> Self {
        if self.log == ZERO_LOG {
            return *self;
        }
        let n = self.desc.q - 1;
        let mut log = self.log as u64;
        for _ in 0..(e as usize % self.desc.r.max(1)) {
            log = log * self.desc.p % n;
        }
        Fq { desc: self.desc, log: log as u32 }
    }
}

impl Field for Fq {
    fn inv(&self) -> Result<Self, ArithError> {
        if self.log == ZERO_LOG {
            return Err(ArithError::DivisionByZero);
        }
        let n = self.desc.q as u32 - 1;
        Ok(Fq { desc: self.desc, log: (n - self.log) % n })
    }
}

impl FqAlgebra for Fq {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor {
        ctx
    }

    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self {
        assert!(std::ptr::eq(*ctx, c.desc), "field descriptor mismatch");
        c
    }

    fn var(_ctx: &Self::Ctx, _v: Var) -> Option<Self> {
        None
    }

    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self {
        f(*self)
    }
}

pub fn is_prime(n: u64) -> bool {
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

fn digits(mut idx: u64, p: u64, r: usize) -> Vec<u64> {
    let mut out = vec![0; r];
    for d in out.iter_mut() {
        *d = idx % p;
        idx /= p;
    }
    out
}

fn to_index(poly: &[u64], p: u64) -> u64 {
    poly.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Reduces `a` in place modulo the monic `m`; leaves `len(m) - 1` digits.
fn reduce(a: &mut Vec<u64>, m: &[u64], p: u64) {
    let r = m.len() - 1;
    while a.len() > r {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let shift = a.len() - r;
            for (i, &mc) in m[..r].iter().enumerate() {
                a[shift + i] = (a[shift + i] + (p - lead) * mc) % p;
            }
        }
    }
    a.resize(r, 0);
}

fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    reduce(&mut prod, m, p);
    prod
}

fn powmod(a: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let r = m.len() - 1;
    let mut acc = vec![0u64; r];
    acc[0] = 1;
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(&acc, &base, m, p);
        }
        base = mulmod(&base, &base, m, p);
        e >>= 1;
    }
    acc
}

/// Remainder of `a` by the monic `d` over `F_p`, trimmed.
fn poly_rem(a: &[u64], d: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let dd = d.len() - 1;
    while a.len() > dd {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let shift = a.len() - dd;
            for (i, &c) in d[..dd].iter().enumerate() {
                a[shift + i] = (a[shift + i] + (p - lead) * c) % p;
            }
        }
    }
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn find_factor(m: &[u64], p: u64) -> Option<Vec<u64>> {
    let r = m.len() - 1;
    for d in 1..=r / 2 {
        for low in 0..p.pow(d as u32) {
            let mut cand = digits(low, p, d);
            cand.push(1);
            if poly_rem(m, &cand, p).is_empty() {
                return Some(cand);
            }
        }
    }
    None
}

fn build(p: u64, r: usize, q: u64, modulus: Vec<u64>) -> FieldDescriptor {
    let n = q - 1;
    let factors = prime_factors(n);
    let mut one = vec![0u64; r];
    one[0] = 1;
    let gen = (1..q)
        .map(|i| digits(i, p, r))
        .find(|g| factors.iter().all(|&l| powmod(g, n / l, &modulus, p) != one))
        .expect("irreducible modulus yields a cyclic unit group");

    let mut exp = Vec::with_capacity(n as usize);
    let mut log = vec![ZERO_LOG; q as usize];
    let mut cur = one.clone();
    for i in 0..n {
        let idx = to_index(&cur, p);
        exp.push(idx as u32);
        log[idx as usize] = i as u32;
        cur = mulmod(&cur, &gen, &modulus, p);
    }
    let zech = exp
        .iter()
        .map(|&e| {
            let mut d = digits(e as u64, p, r);
            d[0] = (d[0] + 1) % p;
            log[to_index(&d, p) as usize]
        })
        .collect();
    let neg_one = log[(p - 1) as usize];
    let label = if r == 1 { format!("F_{p}") } else { format!("F_{q}[z]/({})", format_residue(&modulus, p, 'z')) };
    FieldDescriptor { p, r, q, modulus, label, exp, log, zech, neg_one }
}

pub(crate) fn format_residue(coeffs: &[u64], _p: u64, sym: char) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = super::power(&sym.to_string(), i as u64);
        terms.push(super::term(c.to_string(), &mono));
    }
    super::join_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_addition() {
        let f3 = FieldDescriptor::prime(3).unwrap();
        assert_eq!(f3.int(2).add(&f3.int(2)), f3.int(1));
        assert_eq!(f3.int(2).neg(), f3.int(1));
    }

    #[test]
    fn zeta_squares_to_zeta_plus_one() {
        let f4 = FieldDescriptor::gf4();
        let z = f4.generator();
        let z1 = z.add(&f4.one());
        assert_eq!(z.mul(&z), z1);
        assert_eq!(z.inv().unwrap(), z1);
        assert_eq!(z.frobenius(), z1);
        assert_eq!(z.to_string(), "z");
        assert_eq!(z1.to_string(), "z+1");
    }

    #[test]
    fn reducible_modulus_rejected() {
        // z^2 + 1 = (z+1)^2 over F_2
        assert!(matches!(FieldDescriptor::new(2, &[1, 0, 1]), Err(ArithError::InvalidModulus(_))));
        // z^4 + z^2 + 1 = (z^2+z+1)^2 has no root but a quadratic factor
        assert!(FieldDescriptor::new(2, &[1, 0, 1, 0, 1]).is_err());
        assert!(matches!(FieldDescriptor::new(4, &[1, 1]), Err(ArithError::NotPrime(4))));
        assert!(FieldDescriptor::new(3, &[1, 0, 2]).is_err());
    }

    #[test]
    fn interning_returns_the_same_descriptor() {
        let a = FieldDescriptor::new(3, &[1, 0, 1]).unwrap();
        let b = FieldDescriptor::gf9();
        assert!(std::ptr::eq(a, b));
    }

    #[test]
    fn mismatched_descriptors_are_reported() {
        let a = FieldDescriptor::prime(3).unwrap().one();
        let b = FieldDescriptor::gf9().one();
        assert!(matches!(a.checked_add(&b), Err(ArithError::DescriptorMismatch(_, _))));
        assert!(matches!(a.checked_div(&a.zero_like()), Err(ArithError::DivisionByZero)));
    }

    #[test]
    fn residues_round_trip() {
        let f9 = FieldDescriptor::gf9();
        for x in f9.elements() {
            let r: Vec<i64> = x.residue().iter().map(|&c| c as i64).collect();
            assert_eq!(f9.from_residue(&r), x);
        }
        // z^2 = -1 in F_9
        assert_eq!(f9.from_residue(&[0, 0, 1]), f9.int(-1));
    }

    #[test]
    fn pth_root_inverts_frobenius() {
        for d in [FieldDescriptor::gf4(), FieldDescriptor::gf8(), FieldDescriptor::gf9()] {
            for x in d.elements() {
                assert_eq!(x.frobenius().pth_root(), x);
            }
        }
    }

    #[test]
    fn of_degree_finds_fields() {
        let f = FieldDescriptor::of_degree(5, 3).unwrap();
        assert_eq!(f.order(), 125);
        assert_eq!(FieldDescriptor::of_degree(2, 2).unwrap(), FieldDescriptor::gf4());
    }
}
