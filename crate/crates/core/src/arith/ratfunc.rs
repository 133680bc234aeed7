//! Rational functions `num/den` in lowest terms with monic denominator.
//!
//! Because the canonical form is unique, equality is structural. The
//! coefficient field may itself be a rational function field, which is how
//! the towers `k(u)` and `k(u)(v)` are built.

use std::fmt;

use super::fq::FieldDescriptor;
use super::{ArithError, Field, Fq, FqAlgebra, Poly, PolyCtx, Ring, Var};

#[derive(Clone, PartialEq)]
pub struct RatFunc<F: Field> {
    num: Poly<F>,
    den: Poly<F>,
}

impl<F: Field> RatFunc<F> {
    /// Reduced fraction `num/den`.
    pub fn new(num: Poly<F>, den: Poly<F>) -> Result<Self, ArithError> {
        if den.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    fn normalize(num: Poly<F>, den: Poly<F>) -> Self {
        if num.is_zero() {
            let one = Poly::one(den.poly_ctx());
            return RatFunc { num, den: one };
        }
        if den.degree() == Some(0) {
            let inv = den.coeffs()[0].inv().expect("non-zero constant");
            let one = Poly::one(den.poly_ctx());
            return RatFunc { num: num.scale(&inv), den: one };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree() == Some(0) { (num, den) } else { (num.exact_div(&g), den.exact_div(&g)) };
        let lc = den.leading().expect("non-zero denominator").clone();
        if lc.is_one() {
            RatFunc { num, den }
        } else {
            let inv = lc.inv().expect("non-zero leading coefficient");
            RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
        }
    }

    pub fn from_poly(p: Poly<F>) -> Self {
        let den = Poly::one(p.poly_ctx());
        RatFunc { num: p, den }
    }

    pub fn constant(var: Var, c: F) -> Self {
        Self::from_poly(Poly::constant(var, c))
    }

    pub fn x(var: Var, base: F::Ctx) -> Self {
        Self::from_poly(Poly::x(var, base))
    }

    pub fn num(&self) -> &Poly<F> {
        &self.num
    }

    pub fn den(&self) -> &Poly<F> {
        &self.den
    }

    pub fn var(&self) -> Var {
        self.num.var()
    }

    pub fn base(&self) -> &F::Ctx {
        self.num.base()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn is_constant(&self) -> bool {
        self.is_polynomial() && self.num.is_constant()
    }

    /// The constant value, when the function is constant.
    pub fn as_constant(&self) -> Option<F> {
        self.is_constant().then(|| self.num.coeff(0))
    }

    /// Formal derivative by the quotient rule.
    pub fn derivative(&self) -> Self {
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        Self::normalize(n, self.den.mul(&self.den))
    }

    /// Value at `x`, or `None` when the reduced denominator vanishes there.
    pub fn eval(&self, x: &F) -> Option<F> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x).div(&d).expect("non-zero"))
    }

    /// Substitution into another field; `None` when the denominator maps to 0.
    pub fn eval_in<R: Field>(&self, x: &R, lift: impl Fn(&F) -> R) -> Option<R> {
        let d = self.den.eval_in(x, &lift);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_in(x, &lift).div(&d).expect("non-zero"))
    }

    /// Applies a coefficient map that is a field embedding (so the reduced
    /// form is preserved up to normalization).
    pub fn map_coeffs<G: Field>(&self, base: G::Ctx, f: impl Fn(&F) -> G) -> RatFunc<G> {
        let n = self.num.map_coeffs(base.clone(), &f);
        let d = self.den.map_coeffs(base, &f);
        RatFunc::new(n, d).expect("embedding keeps the denominator non-zero")
    }
}

impl RatFunc<Fq> {
    /// The `p`-th root in `F_q(t)`, when it exists.
    pub fn pth_root(&self) -> Option<Self> {
        Some(RatFunc { num: self.num.pth_root()?, den: self.den.pth_root()? })
    }
}

impl<F: Field> fmt::Display for RatFunc<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl<F: Field> fmt::Debug for RatFunc<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> Ring for RatFunc<F> {
    type Ctx = PolyCtx<F::Ctx>;

    fn ctx(&self) -> Self::Ctx {
        self.num.poly_ctx().clone()
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        RatFunc { num: Poly::zero(ctx), den: Poly::one(ctx) }
    }

    fn one(ctx: &Self::Ctx) -> Self {
        RatFunc { num: Poly::one(ctx), den: Poly::one(ctx) }
    }

    fn characteristic(ctx: &Self::Ctx) -> u64 {
        F::characteristic(&ctx.base)
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        Self::from_poly(Poly::from_int(ctx, n))
    }

    fn add(&self, rhs: &Self) -> Self {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            return Self::normalize(self.num.add(&rhs.num), self.den.clone());
        }
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        Self::normalize(num, self.den.mul(&rhs.den))
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero(&self.ctx());
        }
        if self.is_polynomial() && rhs.is_polynomial() {
            return Self::from_poly(self.num.mul(&rhs.num));
        }
        // cross-cancel so the products are already coprime
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        let n1 = self.num.exact_div(&g1);
        let d2 = rhs.den.exact_div(&g1);
        let n2 = rhs.num.exact_div(&g2);
        let d1 = self.den.exact_div(&g2);
        Self::normalize(n1.mul(&n2), d1.mul(&d2))
    }

    fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    fn frobenius(&self) -> Self {
        // p-th powers of coprime polynomials stay coprime; 1^p = 1 keeps monic
        RatFunc { num: self.num.frobenius(), den: self.den.frobenius() }
    }
}

impl<F: Field> Field for RatFunc<F> {
    fn inv(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Self::normalize(self.den.clone(), self.num.clone()))
    }
}

impl<F: Field + FqAlgebra> FqAlgebra for RatFunc<F> {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor {
        F::constant_field(&ctx.base)
    }

    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self {
        Self::from_poly(Poly::from_fq(ctx, c))
    }

    fn var(ctx: &Self::Ctx, v: Var) -> Option<Self> {
        <Poly<F> as FqAlgebra>::var(ctx, v).map(Self::from_poly)
    }

    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self {
        Self::normalize(self.num.map_constants(f), self.den.map_constants(f))
    }
}

/// `d/dt` on `F_q(t)`.
pub fn derive_t(x: &RatFunc<Fq>) -> RatFunc<Fq> {
    x.derivative()
}
