//! Truncated power series `sum c_i u^i + O(u^N)` over a coefficient ring.
//!
//! A precision of `None` marks an exact (finite) series. Binary operations
//! take the smaller of the two precisions.

use std::fmt;

use super::fq::FieldDescriptor;
use super::{join_terms, power, term, Fq, FqAlgebra, Ring, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCtx<C> {
    pub var: Var,
    pub base: C,
}

#[derive(Clone, PartialEq)]
pub struct Series<F: Ring> {
    ctx: SeriesCtx<F::Ctx>,
    coeffs: Vec<F>,
    prec: Option<usize>,
}

fn min_prec(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<F: Ring> Series<F> {
    pub fn new(var: Var, base: F::Ctx, coeffs: Vec<F>, prec: Option<usize>) -> Self {
        Self::from_ctx(SeriesCtx { var, base }, coeffs, prec)
    }

    fn from_ctx(ctx: SeriesCtx<F::Ctx>, mut coeffs: Vec<F>, prec: Option<usize>) -> Self {
        if let Some(n) = prec {
            coeffs.truncate(n);
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Series { ctx, coeffs, prec }
    }

    pub fn var(var: Var, base: F::Ctx) -> Self {
        Self::new(var, base.clone(), vec![F::zero(&base), F::one(&base)], None)
    }

    pub fn constant(var: Var, c: F) -> Self {
        Self::new(var, c.ctx(), vec![c], None)
    }

    pub fn precision(&self) -> Option<usize> {
        self.prec
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).cloned().unwrap_or_else(|| F::zero(&self.ctx.base))
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    /// Drops every term of degree `>= n`.
    pub fn truncate(&self, n: usize) -> Self {
        Self::from_ctx(self.ctx.clone(), self.coeffs.clone(), min_prec(self.prec, Some(n)))
    }

    /// Index of the first non-zero coefficient; `None` when the series is
    /// zero to its precision (valuation `>= N`).
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Same as [`Series::valuation`] but returns the precision bound (or
    /// `usize::MAX` for an exact zero) instead of `None`.
    pub fn valuation_bound(&self) -> usize {
        self.valuation().unwrap_or(self.prec.unwrap_or(usize::MAX))
    }

    /// Equality of the two series below `n`.
    pub fn eq_mod(&self, other: &Self, n: usize) -> bool {
        self.truncate(n).coeffs == other.truncate(n).coeffs
    }

    pub fn map_coeffs<G: Ring>(&self, base: G::Ctx, f: impl Fn(&F) -> G) -> Series<G> {
        Series::new(self.ctx.var, base, self.coeffs.iter().map(f).collect(), self.prec)
    }
}

impl<F: Ring> fmt::Display for Series<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.ctx.var.name();
        let mut terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| term(c.to_string(), &power(name, i as u64)))
            .collect();
        if let Some(n) = self.prec {
            terms.push(format!("O({})", if n == 0 { "1".into() } else { power(name, n as u64) }));
        }
        f.write_str(&join_terms(terms))
    }
}

impl<F: Ring> fmt::Debug for Series<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Ring> Ring for Series<F> {
    type Ctx = SeriesCtx<F::Ctx>;

    fn ctx(&self) -> Self::Ctx {
        self.ctx.clone()
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        Series { ctx: ctx.clone(), coeffs: vec![], prec: None }
    }

    fn one(ctx: &Self::Ctx) -> Self {
        Series { ctx: ctx.clone(), coeffs: vec![F::one(&ctx.base)], prec: None }
    }

    fn characteristic(ctx: &Self::Ctx) -> u64 {
        F::characteristic(&ctx.base)
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        Self::from_ctx(ctx.clone(), vec![F::from_int(&ctx.base, n)], None)
    }

    fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.ctx, rhs.ctx, "series context mismatch");
        let prec = min_prec(self.prec, rhs.prec);
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&rhs.coeff(i))).collect();
        Self::from_ctx(self.ctx.clone(), coeffs, prec)
    }

    fn neg(&self) -> Self {
        Series { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect(), prec: self.prec }
    }

    fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ctx, rhs.ctx, "series context mismatch");
        let prec = min_prec(self.prec, rhs.prec);
        if self.is_zero() || rhs.is_zero() {
            return Series { ctx: self.ctx.clone(), coeffs: vec![], prec };
        }
        let mut len = self.coeffs.len() + rhs.coeffs.len() - 1;
        if let Some(n) = prec {
            len = len.min(n);
        }
        let mut coeffs = vec![F::zero(&self.ctx.base); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(len - i) {
                if !b.is_zero() {
                    coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
                }
            }
        }
        Self::from_ctx(self.ctx.clone(), coeffs, prec)
    }

    /// `u^i -> u^(pi)`, so the precision scales by `p` as well.
    fn frobenius(&self) -> Self {
        let p = Self::characteristic(&self.ctx) as usize;
        if self.is_zero() {
            return Series { ctx: self.ctx.clone(), coeffs: vec![], prec: self.prec.map(|n| n * p) };
        }
        let mut coeffs = vec![F::zero(&self.ctx.base); (self.coeffs.len() - 1) * p + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i * p] = c.frobenius();
        }
        Series { ctx: self.ctx.clone(), coeffs, prec: self.prec.map(|n| n * p) }
    }
}

impl<F: FqAlgebra> FqAlgebra for Series<F> {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor {
        F::constant_field(&ctx.base)
    }

    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self {
        Self::from_ctx(ctx.clone(), vec![F::from_fq(&ctx.base, c)], None)
    }

    fn var(ctx: &Self::Ctx, v: Var) -> Option<Self> {
        if v == ctx.var {
            Some(Self::var(v, ctx.base.clone()))
        } else {
            F::var(&ctx.base, v).map(|c| Self::from_ctx(ctx.clone(), vec![c], None))
        }
    }

    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self {
        Self::from_ctx(self.ctx.clone(), self.coeffs.iter().map(|c| c.map_constants(f)).collect(), self.prec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::RatFunc;

    type S = Series<RatFunc<Fq>>;

    fn setup() -> (S, S) {
        let f3 = FieldDescriptor::prime(3).unwrap();
        let t = RatFunc::x(Var::T, f3);
        let u = S::var(Var::U, t.ctx());
        (S::constant(Var::U, t), u)
    }

    #[test]
    fn product_at_precision_three() {
        let (_, u) = setup();
        let one = u.one_like();
        let a = one.add(&u).truncate(3);
        let b = one.sub(&u).truncate(3);
        assert_eq!(a.mul(&b), one.sub(&u.pow(2)).truncate(3));
        assert_eq!(a.mul(&b).to_string(), "1+2*u^2+O(u^3)");
    }

    #[test]
    fn truncation_and_valuation() {
        let (t, u) = setup();
        assert_eq!(u.add(&u.pow(5)).truncate(4), u.truncate(4));
        let s = u.pow(3).add(&t.mul(&u.pow(9)));
        assert_eq!(s.valuation(), Some(3));
        assert_eq!(s.to_string(), "u^3+t*u^9");
        assert_eq!(u.pow(5).truncate(4).valuation(), None);
        assert_eq!(u.pow(5).truncate(4).valuation_bound(), 4);
    }

    #[test]
    fn precision_is_minimum() {
        let (_, u) = setup();
        let s = u.truncate(5).add(&u.truncate(7));
        assert_eq!(s.precision(), Some(5));
        assert_eq!(u.truncate(4).frobenius().precision(), Some(12));
        assert_eq!(u.truncate(4).frobenius(), u.pow(3).truncate(12));
    }
}
