//! Wound unipotent groups over `F_q(t)`: exact arithmetic, curve groups,
//! central extensions, `p = 2` descent, norms and R-equivalence witnesses.

pub mod arith;
pub mod central_ext;
pub mod curves;
pub mod descent;
pub mod norm;
pub mod requiv;
pub mod sample;

use thiserror::Error;

pub use arith::{ArithError, Field, FieldDescriptor, Fq, FqAlgebra, Ring, Var};

/// Polynomials in `t` over the constant field.
pub type FqPoly = arith::Poly<Fq>;
/// `k = k0(t)`.
pub type Kt = arith::RatFunc<Fq>;
/// Étale `k`-algebras and their elements.
pub type KtAlgebra = arith::EtaleAlgebra<Kt>;
pub type KtAlg = arith::EtaleElt<Kt>;
/// Truncated series in `u` over `k`.
pub type KtSeries = arith::Series<Kt>;
/// `k(u)`, and `k(u)(v)` on top of it.
pub type Ktu = arith::RatFunc<Kt>;
pub type Ktuv = arith::RatFunc<Ktu>;
/// Polynomials over `k` in free named indeterminates.
pub type KtFree = arith::MPoly<Kt>;
/// `F_q[t][v]`.
pub type FqPolyV = arith::Poly<FqPoly>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("search space of {needed} candidates exceeds the budget of {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// The field `k0(t)` over `k0`.
pub fn kt_ctx(k0: &'static FieldDescriptor) -> <Kt as Ring>::Ctx {
    Kt::x(Var::T, k0).ctx()
}

pub fn t_of(k0: &'static FieldDescriptor) -> Kt {
    Kt::x(Var::T, k0)
}

/// Search cap in candidate pairs; `WOUNDLAB_BUDGET` overrides the default.
pub fn default_budget() -> u128 {
    std::env::var("WOUNDLAB_BUDGET").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(100_000_000)
}
