//! Exact arithmetic for the whole field tower: prime and extension fields,
//! dense univariate polynomials, (nestable) rational function fields,
//! étale quotient algebras, truncated power series and sparse multivariate
//! polynomials in free indeterminates.
//!
//! Every ring carries a runtime context (`Ring::Ctx`) because finite fields
//! are chosen at runtime by their modulus. Zero and one are therefore built
//! from a context rather than out of thin air.

pub mod etale;
pub mod fq;
pub mod mpoly;
pub mod parse;
pub mod poly;
pub mod ratfunc;
pub mod series;

use std::fmt;

use thiserror::Error;

pub use etale::{EtaleAlgebra, EtaleElt};
pub use fq::{FieldDescriptor, Fq};
pub use mpoly::{MPoly, MPolyCtx};
pub use poly::{Poly, PolyCtx};
pub use ratfunc::RatFunc;
pub use series::{Series, SeriesCtx};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("field descriptors differ: {0} vs {1}")]
    DescriptorMismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field of order {0} exceeds the supported table size")]
    FieldTooLarge(u64),
    #[error("modulus {0} is not separable")]
    Inseparable(String),
    #[error("algebras differ")]
    AlgebraMismatch,
    #[error("conjugation does not preserve the algebra: {0}")]
    NotStable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Polynomial variables of the tower. `t` is the transcendental of
/// `k = k0(t)`, `u` the Laurent/homotopy parameter and `v` the coordinate
/// on the projective line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    U,
    V,
    /// Generator of an étale algebra (only used to tag moduli).
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::U => "u",
            Var::V => "v",
            Var::X => "X",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Commutative ring with identity and prime characteristic.
///
/// Operations panic when the operands live in different contexts; the
/// checked entry points (`Fq::checked_add`, ...) report that as an error
/// instead.
pub trait Ring: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    type Ctx: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn characteristic(ctx: &Self::Ctx) -> u64;

    fn is_zero(&self) -> bool;
    fn add(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn is_one(&self) -> bool {
        *self == Self::one(&self.ctx())
    }

    fn zero_like(&self) -> Self {
        Self::zero(&self.ctx())
    }

    fn one_like(&self) -> Self {
        Self::one(&self.ctx())
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        let p = Self::characteristic(ctx);
        let mut k = n.rem_euclid(p as i64) as u64;
        let mut acc = Self::zero(ctx);
        let mut base = Self::one(ctx);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add(&base);
            }
            base = base.add(&base);
            k >>= 1;
        }
        acc
    }

    fn scale_int(&self, n: i64) -> Self {
        self.mul(&Self::from_int(&self.ctx(), n))
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.one_like();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `x^p`. Implementations override this with the coefficientwise
    /// formula where one exists.
    fn frobenius(&self) -> Self {
        self.pow(Self::characteristic(&self.ctx()))
    }

    /// `x^(p^e)`.
    fn frobenius_power(&self, e: u32) -> Self {
        let mut x = self.clone();
        for _ in 0..e {
            x = x.frobenius();
        }
        x
    }
}

pub trait Field: Ring {
    fn inv(&self) -> Result<Self, ArithError>;

    fn div(&self, rhs: &Self) -> Result<Self, ArithError> {
        Ok(self.mul(&rhs.inv()?))
    }
}

/// Rings that are algebras over the constant field `F_q` and may contain
/// some of the tower variables.
pub trait FqAlgebra: Ring {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor;
    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self;
    /// The element named by `v`, when the tower contains that variable.
    fn var(ctx: &Self::Ctx, v: Var) -> Option<Self>;
    /// Applies a map to every constant coefficient, fixing all variables.
    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self;

    fn scale_fq(&self, c: Fq) -> Self {
        self.mul(&Self::from_fq(&self.ctx(), c))
    }
}

/// Wraps a formatted coefficient in parentheses when it is a sum or quotient.
pub(crate) fn wrap(s: String) -> String {
    let compound = s.char_indices().any(|(i, c)| c == '+' || c == '/' || (c == '-' && i > 0));
    if compound {
        format!("({s})")
    } else {
        s
    }
}

/// Formats `coeff * monomial`, eliding unit coefficients.
pub(crate) fn term(coeff: String, monomial: &str) -> String {
    if monomial.is_empty() {
        coeff
    } else if coeff == "1" {
        monomial.to_string()
    } else {
        format!("{}*{}", wrap(coeff), monomial)
    }
}

pub(crate) fn join_terms(terms: Vec<String>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, t) in terms.into_iter().enumerate() {
        if i > 0 && !t.starts_with('-') {
            out.push('+');
        }
        out.push_str(&t);
    }
    out
}

pub(crate) fn power(name: &str, e: u64) -> String {
    match e {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}^{e}"),
    }
}
