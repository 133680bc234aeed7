//! Dense univariate polynomials over a coefficient ring.

use std::fmt;

use super::fq::FieldDescriptor;
use super::{join_terms, power, term, ArithError, Field, Fq, FqAlgebra, Ring, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyCtx<C> {
    pub var: Var,
    pub base: C,
}

/// Little-endian coefficients without trailing zeros.
#[derive(Clone, PartialEq)]
pub struct Poly<F: Ring> {
    ctx: PolyCtx<F::Ctx>,
    coeffs: Vec<F>,
}

impl<F: Ring> Poly<F> {
    pub fn new(var: Var, base: F::Ctx, coeffs: Vec<F>) -> Self {
        let mut p = Poly { ctx: PolyCtx { var, base }, coeffs };
        p.trim();
        p
    }

    pub fn from_ctx(ctx: PolyCtx<F::Ctx>, coeffs: Vec<F>) -> Self {
        let mut p = Poly { ctx, coeffs };
        p.trim();
        p
    }

    pub fn constant(var: Var, c: F) -> Self {
        let base = c.ctx();
        Self::new(var, base, vec![c])
    }

    /// The variable itself.
    pub fn x(var: Var, base: F::Ctx) -> Self {
        Self::monomial(var, F::one(&base), 1)
    }

    pub fn monomial(var: Var, c: F, e: usize) -> Self {
        let base = c.ctx();
        let mut coeffs = vec![F::zero(&base); e];
        coeffs.push(c);
        Self::new(var, base, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn var(&self) -> Var {
        self.ctx.var
    }

    pub fn base(&self) -> &F::Ctx {
        &self.ctx.base
    }

    pub fn poly_ctx(&self) -> &PolyCtx<F::Ctx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).cloned().unwrap_or_else(|| F::zero(&self.ctx.base))
    }

    pub fn leading(&self) -> Option<&F> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::from_ctx(self.ctx.clone(), self.coeffs.iter().map(|a| a.mul(c)).collect())
    }

    pub fn map_coeffs<G: Ring>(&self, base: G::Ctx, f: impl Fn(&F) -> G) -> Poly<G> {
        Poly::new(self.ctx.var, base, self.coeffs.iter().map(f).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![F::zero(&self.ctx.base); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::from_ctx(self.ctx.clone(), coeffs)
    }

    pub fn eval(&self, x: &F) -> F {
        self.coeffs.iter().rev().fold(F::zero(&self.ctx.base), |acc, c| acc.mul(x).add(c))
    }

    /// Horner evaluation in another ring.
    pub fn eval_in<R: Ring>(&self, x: &R, lift: impl Fn(&F) -> R) -> R {
        let mut acc = x.zero_like();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(&lift(c));
        }
        acc
    }

    /// Formal derivative with respect to the polynomial variable.
    pub fn derivative(&self) -> Self {
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c.scale_int(i as i64)).collect();
        Self::from_ctx(self.ctx.clone(), coeffs)
    }

    fn check(&self, rhs: &Self) {
        assert!(self.ctx == rhs.ctx, "polynomial context mismatch");
    }
}

impl<F: Field> Poly<F> {
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => self.clone(),
            Some(lc) if lc.is_one() => self.clone(),
            Some(lc) => {
                let inv = lc.inv().expect("leading coefficient is non-zero");
                self.scale(&inv)
            }
        }
    }

    /// Euclidean division: `self = q * rhs + r` with `deg r < deg rhs`.
    pub fn div_rem(&self, rhs: &Self) -> Result<(Self, Self), ArithError> {
        self.check(rhs);
        let d = rhs.degree().ok_or(ArithError::DivisionByZero)?;
        let lc_inv = rhs.coeffs[d].inv()?;
        let zero = F::zero(&self.ctx.base);
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((Self::from_ctx(self.ctx.clone(), vec![]), self.clone()));
        }
        let mut quot = vec![zero.clone(); rem.len() - d];
        for i in (0..quot.len()).rev() {
            let c = rem[i + d].mul(&lc_inv);
            if c.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    rem[i + j] = rem[i + j].sub(&c.mul(b));
                }
            }
            quot[i] = c;
        }
        rem.truncate(d);
        Ok((Self::from_ctx(self.ctx.clone(), quot), Self::from_ctx(self.ctx.clone(), rem)))
    }

    pub fn rem(&self, rhs: &Self) -> Result<Self, ArithError> {
        Ok(self.div_rem(rhs)?.1)
    }

    /// Exact quotient; panics in debug builds when the remainder is non-zero.
    pub fn exact_div(&self, rhs: &Self) -> Self {
        let (q, r) = self.div_rem(rhs).expect("non-zero divisor");
        debug_assert!(r.is_zero(), "inexact division");
        q
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let mut a = self.clone();
        let mut b = rhs.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("b is non-zero");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `gcd(f, f') = 1`.
    pub fn is_separable(&self) -> bool {
        let d = self.derivative();
        !d.is_zero() && self.gcd(&d).degree() == Some(0)
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, mut e: u64, m: &Self) -> Result<Self, ArithError> {
        let mut acc = Self::constant(self.ctx.var, F::one(&self.ctx.base)).rem(m)?;
        let mut base = self.rem(m)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(m)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).rem(m)?;
            }
        }
        Ok(acc)
    }
}

impl Poly<Fq> {
    /// The `p`-th root when every exponent is divisible by `p`.
    pub fn pth_root(&self) -> Option<Self> {
        let p = self.ctx.base.characteristic() as usize;
        let mut out = Vec::with_capacity(self.coeffs.len() / p + 1);
        for (i, c) in self.coeffs.iter().enumerate() {
            if i % p == 0 {
                out.push(c.pth_root());
            } else if !c.is_zero() {
                return None;
            }
        }
        Some(Self::from_ctx(self.ctx.clone(), out))
    }

    /// Every polynomial of degree at most `d` over the constant field, in
    /// order of degree and then little-endian residue index.
    pub fn enumerate(var: Var, desc: &'static FieldDescriptor, d: usize) -> Vec<Self> {
        let q = desc.order() as usize;
        let elems: Vec<Fq> = desc.elements().collect();
        let mut out = vec![Self::new(var, desc, vec![])];
        for deg in 0..=d {
            let lower = q.pow(deg as u32);
            for lead in 1..q {
                for low in 0..lower {
                    let mut coeffs = Vec::with_capacity(deg + 1);
                    let mut rest = low;
                    for _ in 0..deg {
                        coeffs.push(elems[rest % q]);
                        rest /= q;
                    }
                    coeffs.push(elems[lead]);
                    out.push(Self::new(var, desc, coeffs));
                }
            }
        }
        out
    }

    /// Sort key matching [`Poly::enumerate`] order.
    pub fn order_key(&self) -> (i64, Vec<u32>) {
        let deg = self.degree().map_or(-1, |d| d as i64);
        (deg, self.coeffs.iter().rev().map(|c| c.index()).collect())
    }
}

impl<F: Ring> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.ctx.var.name();
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| term(c.to_string(), &power(name, i as u64)))
            .collect();
        f.write_str(&join_terms(terms))
    }
}

impl<F: Ring> fmt::Debug for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Ring> Ring for Poly<F> {
    type Ctx = PolyCtx<F::Ctx>;

    fn ctx(&self) -> Self::Ctx {
        self.ctx.clone()
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        Poly { ctx: ctx.clone(), coeffs: vec![] }
    }

    fn one(ctx: &Self::Ctx) -> Self {
        Poly { ctx: ctx.clone(), coeffs: vec![F::one(&ctx.base)] }
    }

    fn characteristic(ctx: &Self::Ctx) -> u64 {
        F::characteristic(&ctx.base)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        Self::from_ctx(ctx.clone(), vec![F::from_int(&ctx.base, n)])
    }

    fn add(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() { (self, rhs) } else { (rhs, self) };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c = c.add(s);
        }
        Self::from_ctx(self.ctx.clone(), coeffs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => a.sub(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.neg(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::from_ctx(self.ctx.clone(), coeffs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.check(rhs);
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(&self.ctx);
        }
        let zero = F::zero(&self.ctx.base);
        let mut coeffs = vec![zero; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        Self::from_ctx(self.ctx.clone(), coeffs)
    }

    fn neg(&self) -> Self {
        Poly { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    fn frobenius(&self) -> Self {
        let p = Self::characteristic(&self.ctx) as usize;
        if self.is_zero() {
            return self.clone();
        }
        let zero = F::zero(&self.ctx.base);
        let mut coeffs = vec![zero; (self.coeffs.len() - 1) * p + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * p] = c.frobenius();
        }
        Poly { ctx: self.ctx.clone(), coeffs }
    }
}

impl<F: FqAlgebra> FqAlgebra for Poly<F> {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor {
        F::constant_field(&ctx.base)
    }

    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self {
        Self::from_ctx(ctx.clone(), vec![F::from_fq(&ctx.base, c)])
    }

    fn var(ctx: &Self::Ctx, v: Var) -> Option<Self> {
        if ctx.var == v {
            Some(Self::x(v, ctx.base.clone()))
        } else {
            F::var(&ctx.base, v).map(|c| Self::from_ctx(ctx.clone(), vec![c]))
        }
    }

    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self {
        Self::from_ctx(self.ctx.clone(), self.coeffs.iter().map(|c| c.map_constants(f)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> &'static FieldDescriptor {
        FieldDescriptor::prime(3).unwrap()
    }

    fn p3(c: &[i64]) -> Poly<Fq> {
        Poly::new(Var::T, f3(), c.iter().map(|&x| f3().int(x)).collect())
    }

    #[test]
    fn gcd_is_monic() {
        // gcd(t^2 - 1, t - 1) = t + 2
        let g = p3(&[-1, 0, 1]).gcd(&p3(&[-1, 1]));
        assert_eq!(g, p3(&[2, 1]));
        assert_eq!(g.to_string(), "t+2");
    }

    #[test]
    fn char_two_square() {
        let f2 = FieldDescriptor::prime(2).unwrap();
        let x = Poly::new(Var::T, f2, vec![f2.one(), f2.one()]);
        assert_eq!(x.mul(&x).to_string(), "t^2+1");
        assert_eq!(x.frobenius(), x.mul(&x));
    }

    #[test]
    fn long_division_remainder() {
        let (q, r) = p3(&[0, 1, 0, 1]).div_rem(&p3(&[0, 0, 1])).unwrap();
        assert_eq!(r, p3(&[0, 1]));
        assert_eq!(q, p3(&[0, 1]));
        assert!(matches!(p3(&[1]).div_rem(&p3(&[])), Err(ArithError::DivisionByZero)));
    }

    #[test]
    fn freshmans_dream() {
        let x = p3(&[1, 1]);
        assert_eq!(x.pow(3), p3(&[1, 0, 0, 1]));
        assert_eq!(x.frobenius_power(0), x);
    }

    #[test]
    fn enumeration_counts_and_order() {
        let all = Poly::enumerate(Var::T, f3(), 2);
        assert_eq!(all.len(), 27);
        let keys: Vec<_> = all.iter().map(|p| p.order_key()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(keys, sorted);
        assert_eq!(all[0], p3(&[]));
    }

    #[test]
    fn pth_roots() {
        assert_eq!(p3(&[1, 0, 0, 2]).pth_root(), Some(p3(&[1, 2])));
        assert_eq!(p3(&[1, 1]).pth_root(), None);
    }
}
