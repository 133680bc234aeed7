//! Sparse multivariate polynomials in named free indeterminates.
//!
//! Used to check identities "for all points" symbolically: an identity of
//! p-polynomials holds on every algebra iff the difference is the zero
//! polynomial.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::fq::FieldDescriptor;
use super::{join_terms, power, term, Fq, FqAlgebra, Ring, Var};

#[derive(Debug, Clone, PartialEq)]
pub struct MPolyCtx<C> {
    pub names: Arc<Vec<String>>,
    pub base: C,
}

impl<C: Clone> MPolyCtx<C> {
    pub fn new(base: C, names: &[&str]) -> Self {
        MPolyCtx { names: Arc::new(names.iter().map(|s| s.to_string()).collect()), base }
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }
}

#[derive(Clone, PartialEq)]
pub struct MPoly<F: Ring> {
    ctx: MPolyCtx<F::Ctx>,
    terms: BTreeMap<Vec<u32>, F>,
}

impl<F: Ring> MPoly<F> {
    /// The `i`-th indeterminate.
    pub fn gen(ctx: &MPolyCtx<F::Ctx>, i: usize) -> Self {
        let mut e = vec![0; ctx.nvars()];
        e[i] = 1;
        Self::monomial(ctx, F::one(&ctx.base), e)
    }

    /// All indeterminates, in order.
    pub fn gens(ctx: &MPolyCtx<F::Ctx>) -> Vec<Self> {
        (0..ctx.nvars()).map(|i| Self::gen(ctx, i)).collect()
    }

    pub fn constant(ctx: &MPolyCtx<F::Ctx>, c: F) -> Self {
        Self::monomial(ctx, c, vec![0; ctx.nvars()])
    }

    pub fn monomial(ctx: &MPolyCtx<F::Ctx>, c: F, exps: Vec<u32>) -> Self {
        assert_eq!(exps.len(), ctx.nvars());
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        MPoly { ctx: ctx.clone(), terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &F)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Substitutes values from another ring for every indeterminate.
    pub fn eval_in<R: Ring>(&self, values: &[R], lift: impl Fn(&F) -> R) -> R {
        assert_eq!(values.len(), self.ctx.nvars());
        let one = values.first().map(|v| v.one_like());
        let mut acc: Option<R> = None;
        for (e, c) in &self.terms {
            let mut m = lift(c);
            for (v, &k) in values.iter().zip(e) {
                if k > 0 {
                    m = m.mul(&v.pow(k as u64));
                }
            }
            acc = Some(match acc {
                Some(a) => a.add(&m),
                None => m,
            });
        }
        acc.or_else(|| one.map(|o| o.zero_like())).unwrap_or_else(|| lift(&F::zero(&self.ctx.base)))
    }

    fn check(&self, rhs: &Self) {
        assert!(Arc::ptr_eq(&self.ctx.names, &rhs.ctx.names) || self.ctx == rhs.ctx, "multivariate context mismatch");
    }
}

impl<F: Ring> fmt::Display for MPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .zip(self.ctx.names.iter())
                    .filter(|(&k, _)| k > 0)
                    .map(|(&k, n)| power(n, k as u64))
                    .collect();
                term(c.to_string(), &mono.join("*"))
            })
            .collect();
        f.write_str(&join_terms(terms))
    }
}

impl<F: Ring> fmt::Debug for MPoly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Ring> Ring for MPoly<F> {
    type Ctx = MPolyCtx<F::Ctx>;

    fn ctx(&self) -> Self::Ctx {
        self.ctx.clone()
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        MPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    fn one(ctx: &Self::Ctx) -> Self {
        Self::constant(ctx, F::one(&ctx.base))
    }

    fn characteristic(ctx: &Self::Ctx) -> u64 {
        F::characteristic(&ctx.base)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        Self::constant(ctx, F::from_int(&ctx.base, n))
    }

    fn add(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            match terms.get_mut(e) {
                Some(v) => {
                    let s = v.add(c);
                    if s.is_zero() {
                        terms.remove(e);
                    } else {
                        *v = s;
                    }
                }
                None => {
                    terms.insert(e.clone(), c.clone());
                }
            }
        }
        MPoly { ctx: self.ctx.clone(), terms }
    }

    fn neg(&self) -> Self {
        MPoly { ctx: self.ctx.clone(), terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect() }
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let mut terms: BTreeMap<Vec<u32>, F> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let c = ca.mul(cb);
                match terms.get_mut(&e) {
                    Some(v) => *v = v.add(&c),
                    None => {
                        terms.insert(e, c);
                    }
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        MPoly { ctx: self.ctx.clone(), terms }
    }

    fn frobenius(&self) -> Self {
        let p = Self::characteristic(&self.ctx) as u32;
        MPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.iter().map(|k| k * p).collect(), c.frobenius())).collect(),
        }
    }
}

impl<F: FqAlgebra> FqAlgebra for MPoly<F> {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor {
        F::constant_field(&ctx.base)
    }

    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self {
        Self::constant(ctx, F::from_fq(&ctx.base, c))
    }

    fn var(ctx: &Self::Ctx, v: Var) -> Option<Self> {
        F::var(&ctx.base, v).map(|c| Self::constant(ctx, c))
    }

    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self {
        let mut terms: BTreeMap<Vec<u32>, F> = BTreeMap::new();
        for (e, c) in &self.terms {
            let c = c.map_constants(f);
            if !c.is_zero() {
                terms.insert(e.clone(), c);
            }
        }
        MPoly { ctx: self.ctx.clone(), terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expansion_and_cancellation() {
        let f3 = FieldDescriptor::prime(3).unwrap();
        let ctx = MPolyCtx::new(f3, &["x", "y"]);
        let g = MPoly::<Fq>::gens(&ctx);
        let (x, y) = (&g[0], &g[1]);
        let s = x.add(y);
        assert_eq!(s.pow(3), x.pow(3).add(&y.pow(3)));
        assert_eq!(s.frobenius(), s.pow(3));
        let d = x.mul(y).sub(&y.mul(x));
        assert!(d.is_zero());
        assert_eq!(x.pow(2).add(&y.scale_int(2)).to_string(), "x^2+2*y");
    }

    #[test]
    fn evaluation() {
        let f3 = FieldDescriptor::prime(3).unwrap();
        let ctx = MPolyCtx::new(f3, &["x", "y"]);
        let g = MPoly::<Fq>::gens(&ctx);
        let f = g[0].mul(&g[1]).add(&g[0]);
        assert_eq!(f.eval_in(&[f3.int(2), f3.int(2)], |c| *c), f3.int(0));
    }
}
