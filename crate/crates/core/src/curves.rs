//! One-dimensional wound subgroups of `G_a^2` over `k = k0(t)`.
//!
//! Every variant has the shape `X = cx * X^(p^ex) + cy * Y^(p^ey)` where each
//! coefficient is a scalar of `k0` times `1` or `t`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{parse, EtaleAlgebra, Poly};
use crate::{
    config, kt_ctx, Error, Field, FieldDescriptor, Fq, FqAlgebra, FqPoly, Kt, KtAlg, KtAlgebra, Result, Ring, Var,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "rosenlicht")]
    Rosenlicht,
    #[serde(rename = "endo1")]
    Endo1,
    #[serde(rename = "endo2")]
    Endo2,
    #[serde(rename = "gabber1")]
    Gabber1,
    #[serde(rename = "gabber2")]
    Gabber2,
    #[serde(rename = "gabberV")]
    GabberV,
}

impl Variant {
    pub const ALL: [Variant; 6] =
        [Variant::Rosenlicht, Variant::Endo1, Variant::Endo2, Variant::Gabber1, Variant::Gabber2, Variant::GabberV];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Rosenlicht => "rosenlicht",
            Variant::Endo1 => "endo1",
            Variant::Endo2 => "endo2",
            Variant::Gabber1 => "gabber1",
            Variant::Gabber2 => "gabber2",
            Variant::GabberV => "gabberV",
        }
    }

    /// Gabber-type curves carry `t` on the `Y` term instead of the `X` term.
    pub fn is_gabber(self) -> bool {
        matches!(self, Variant::Gabber1 | Variant::Gabber2 | Variant::GabberV)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| config(format!("unknown variant `{s}`")))
    }
}

/// `scalar * t^t_power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Coefficient {
    pub scalar: Fq,
    pub t_power: u32,
}

impl Coefficient {
    pub fn eval<R: FqAlgebra>(&self, ctx: &R::Ctx) -> R {
        let c = R::from_fq(ctx, self.scalar);
        if self.t_power == 0 {
            return c;
        }
        let t = R::var(ctx, Var::T).expect("ambient ring must contain t");
        c.mul(&t.pow(self.t_power as u64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveSpec {
    pub variant: Variant,
    pub k0: &'static FieldDescriptor,
    pub m: u32,
    pub n: u32,
    pub a: Fq,
    pub b: Fq,
}

/// Validates the parameters of a variant. `a` and `b` are ignored (stored
/// as 1) by the variants whose equation has no free scalars.
pub fn make_spec(
    variant: Variant,
    p: u64,
    k0: &'static FieldDescriptor,
    m: u32,
    n: u32,
    a: Fq,
    b: Fq,
) -> Result<CurveSpec> {
    if k0.characteristic() != p {
        return Err(config(format!("k0 = {k0} does not have characteristic {p}")));
    }
    if m == 0 || n == 0 {
        return Err(config("m and n must be at least 1"));
    }
    let pm = p.checked_pow(m).ok_or_else(|| config("p^m overflows"))?;
    let free_scalars = matches!(variant, Variant::Rosenlicht | Variant::GabberV);
    let (a, b) = if free_scalars {
        for (name, c) in [("a", a), ("b", b)] {
            if !std::ptr::eq(c.descriptor(), k0) {
                return Err(config(format!("{name} is not an element of {k0}")));
            }
            if c.is_zero() {
                return Err(config(format!("{name} must be non-zero")));
            }
        }
        (a, b)
    } else {
        (k0.one(), k0.one())
    };
    match variant {
        Variant::Rosenlicht | Variant::GabberV if pm <= 2 => {
            return Err(config(format!("{variant} needs p^m > 2 (got p^m = {pm})")));
        }
        Variant::Endo2 if m > n => {
            return Err(config(format!("endo2 needs m <= n (got m = {m}, n = {n})")));
        }
        _ => {}
    }
    let (m, n) = match variant {
        Variant::Endo1 => (m, m),
        Variant::Gabber1 => (1, 1),
        Variant::Gabber2 => (2, 2),
        _ => (m, n),
    };
    Ok(CurveSpec { variant, k0, m, n, a, b })
}

impl CurveSpec {
    pub fn p(&self) -> u64 {
        self.k0.characteristic()
    }

    /// `(cx, ex, cy, ey)` for `X = cx X^(p^ex) + cy Y^(p^ey)`.
    pub fn equation(&self) -> (Coefficient, u32, Coefficient, u32) {
        let k0 = self.k0;
        let c = |scalar: Fq, t_power| Coefficient { scalar, t_power };
        let (one, minus) = (k0.one(), k0.int(-1));
        match self.variant {
            Variant::Rosenlicht => (c(self.a, 1), self.m, c(self.b, 0), self.n),
            Variant::Endo1 => (c(one, 1), self.m, c(one, 0), self.m),
            Variant::Endo2 => (c(minus, 1), 2 * self.m, c(one, 0), self.n),
            Variant::Gabber1 => (c(minus, 0), 1, c(minus, 1), 1),
            Variant::Gabber2 => (c(one, 0), 2, c(one, 1), 2),
            Variant::GabberV => (c(self.a, 0), self.m, c(self.b, 1), self.n),
        }
    }

    /// `p^ex`, the degree of the equation in `X`.
    pub fn x_degree(&self) -> u64 {
        self.p().pow(self.equation().1)
    }

    /// `p^ex > 2`: every k-point then has polynomial coordinates, so a
    /// polynomial search is exhaustive up to height.
    pub fn polynomial_search_suffices(&self) -> bool {
        self.x_degree() > 2
    }

    pub fn equation_string(&self) -> String {
        let (cx, ex, cy, ey) = self.equation();
        let p = self.p();
        let part = |c: Coefficient, v: &str, e: u32| {
            let mut s = match c.scalar.to_string().as_str() {
                "1" => String::new(),
                s if s == self.k0.int(-1).to_string() => "-".into(),
                s if s.contains('+') => format!("({s})*"),
                s => format!("{s}*"),
            };
            if c.t_power == 1 {
                s.push_str("t*");
            }
            format!("{s}{v}^{}", p.pow(e))
        };
        let rhs = format!("{} + {}", part(cx, "X", ex), part(cy, "Y", ey)).replace("+ -", "- ");
        format!("X = {rhs}")
    }

    /// `x - cx x^(p^ex) - cy y^(p^ey)`; zero exactly on the curve.
    pub fn residual<R: FqAlgebra>(&self, x: &R, y: &R) -> R {
        let (cx, ex, cy, ey) = self.equation();
        let ctx = x.ctx();
        let rx = cx.eval::<R>(&ctx).mul(&x.frobenius_power(ex));
        let ry = cy.eval::<R>(&ctx).mul(&y.frobenius_power(ey));
        x.sub(&rx).sub(&ry)
    }

    pub fn contains<R: FqAlgebra>(&self, pt: &CurvePoint<R>) -> bool {
        self.residual(&pt.x, &pt.y).is_zero()
    }

    /// The same curve over another constant field containing `k0`.
    pub fn with_constants(&self, k0: &'static FieldDescriptor, embed: impl Fn(Fq) -> Fq) -> Self {
        CurveSpec { k0, a: embed(self.a), b: embed(self.b), ..*self }
    }

    pub fn record(&self) -> SpecRecord {
        SpecRecord {
            variant: self.variant,
            p: self.p(),
            q_modulus: self.k0.modulus_string(),
            m: self.m,
            n: self.n,
            a: self.a.to_string(),
            b: self.b.to_string(),
            equation: self.equation_string(),
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}(t): {}", self.variant, self.k0, self.equation_string())
    }
}

/// Flat serialized form of a spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRecord {
    pub variant: Variant,
    pub p: u64,
    pub q_modulus: Option<String>,
    pub m: u32,
    pub n: u32,
    pub a: String,
    pub b: String,
    pub equation: String,
}

/// A pair of coordinates in some ambient ring. Subgroup arithmetic is
/// coordinatewise, so the same type serves every curve and `G_a^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint<R> {
    pub x: R,
    pub y: R,
}

impl<R: Ring> CurvePoint<R> {
    pub fn new(x: R, y: R) -> Self {
        CurvePoint { x, y }
    }

    pub fn zero(ctx: &R::Ctx) -> Self {
        CurvePoint { x: R::zero(ctx), y: R::zero(ctx) }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        CurvePoint { x: self.x.add(&rhs.x), y: self.y.add(&rhs.y) }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        CurvePoint { x: self.x.sub(&rhs.x), y: self.y.sub(&rhs.y) }
    }

    pub fn neg(&self) -> Self {
        CurvePoint { x: self.x.neg(), y: self.y.neg() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        CurvePoint { x: self.x.scale_int(n), y: self.y.scale_int(n) }
    }

    pub fn map<S>(&self, f: impl Fn(&R) -> S) -> CurvePoint<S> {
        CurvePoint { x: f(&self.x), y: f(&self.y) }
    }

    pub fn strings(&self) -> [String; 2] {
        [self.x.to_string(), self.y.to_string()]
    }
}

impl<R: Ring> fmt::Display for CurvePoint<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

pub(crate) fn poly_key(f: &FqPoly) -> Vec<u32> {
    f.coeffs().iter().map(|c| c.index()).collect()
}

pub(crate) fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::Budget { needed, budget })
    } else {
        Ok(())
    }
}

/// All points with coordinates in `k0[t]` of degree `<= d`.
///
/// `x - cx x^P = cy y^Q` is matched by hashing both sides, so the work is
/// linear in the number of candidates; the budget still counts pairs.
pub fn polynomial_point_search(spec: &CurveSpec, d: usize, budget: u128) -> Result<Vec<CurvePoint<Kt>>> {
    let q = spec.k0.order() as u128;
    let per_coord = q.checked_pow(d as u32 + 1).ok_or(Error::Budget { needed: u128::MAX, budget })?;
    check_budget(per_coord.saturating_mul(per_coord), budget)?;
    let cands = FqPoly::enumerate(Var::T, spec.k0, d);
    let (cx, ex, cy, ey) = spec.equation();
    let pctx = cands[0].ctx();
    let cx = cx.eval::<FqPoly>(&pctx);
    let cy = cy.eval::<FqPoly>(&pctx);
    let lhs: Vec<Vec<u32>> = cands.par_iter().map(|x| poly_key(&x.sub(&cx.mul(&x.frobenius_power(ex))))).collect();
    let rhs: Vec<Vec<u32>> = cands.par_iter().map(|y| poly_key(&cy.mul(&y.frobenius_power(ey)))).collect();
    let mut index: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for (j, key) in rhs.iter().enumerate() {
        index.entry(key.as_slice()).or_default().push(j);
    }
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (i, key) in lhs.iter().enumerate() {
        if let Some(ys) = index.get(key.as_slice()) {
            hits.extend(ys.iter().map(|&j| (j, i)));
        }
    }
    hits.sort_by(|a, b| {
        (cands[a.0].order_key(), cands[a.1].order_key()).cmp(&(cands[b.0].order_key(), cands[b.1].order_key()))
    });
    Ok(hits
        .into_iter()
        .map(|(j, i)| CurvePoint::new(Kt::from_poly(cands[i].clone()), Kt::from_poly(cands[j].clone())))
        .collect())
}

/// Points with `x = u/v` (`v` monic, coprime, both of degree `<= d`) and
/// `y` in `k`, found by extracting the `p^ey`-th root of `(x - cx x^P)/cy`.
/// Needed when `p^ex <= 2`, where non-polynomial points exist.
pub fn rational_point_search(spec: &CurveSpec, d: usize, budget: u128) -> Result<Vec<CurvePoint<Kt>>> {
    let q = spec.k0.order() as u128;
    let per = q.checked_pow(d as u32 + 1).ok_or(Error::Budget { needed: u128::MAX, budget })?;
    check_budget(per.saturating_mul(per), budget)?;
    let cands = FqPoly::enumerate(Var::T, spec.k0, d);
    let dens: Vec<&FqPoly> = cands.iter().filter(|v| v.leading().is_some_and(|c| c.is_one())).collect();
    let (cx, ex, cy, ey) = spec.equation();
    let kctx = kt_ctx(spec.k0);
    let cx = cx.eval::<Kt>(&kctx);
    let cy_inv = cy.eval::<Kt>(&kctx).inv()?;
    let mut found: Vec<CurvePoint<Kt>> = dens
        .par_iter()
        .flat_map_iter(|v| {
            let cx = &cx;
            let cy_inv = &cy_inv;
            cands.iter().filter_map(move |u| {
                if !u.gcd(v).is_one() && !u.is_zero() {
                    return None;
                }
                if u.is_zero() && v.degree() != Some(0) {
                    return None;
                }
                let x = Kt::new(u.clone(), (*v).clone()).ok()?;
                let mut y = x.sub(&cx.mul(&x.frobenius_power(ex))).mul(cy_inv);
                for _ in 0..ey {
                    y = y.pth_root()?;
                }
                Some(CurvePoint::new(x, y))
            })
        })
        .collect();
    found.sort_by_key(|pt| (rat_key(&pt.y), rat_key(&pt.x)));
    Ok(found)
}

/// Sort key on `k`: by denominator, then numerator, in enumeration order.
pub fn rat_key(x: &Kt) -> ((i64, Vec<u32>), (i64, Vec<u32>)) {
    (x.den().order_key(), x.num().order_key())
}

/// Outcome of the derivation argument for one candidate `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeCertificate {
    /// The differential identity every `x`-coordinate of a `k`-point satisfies.
    pub identity: String,
    pub residual: String,
    pub holds: bool,
    /// The degree or pole-order equation the identity would force for
    /// non-constant `x`, and whether it has a solution.
    pub argument: Option<String>,
}

/// Checks `x' = c x^P` (rosenlicht/endo) or `t x' = x - a x^P` (gabber).
pub fn ode_certificate(spec: &CurveSpec, x: &Kt) -> OdeCertificate {
    let (cx, ex, _, _) = spec.equation();
    let kctx = kt_ctx(spec.k0);
    let big_p = spec.x_degree();
    let c = Kt::from_fq(&kctx, cx.scalar);
    let xp = x.frobenius_power(ex);
    let dx = x.derivative();
    let (identity, residual) = if spec.variant.is_gabber() {
        let t = crate::t_of(spec.k0);
        (format!("t*dx/dt = x - {}*x^{big_p}", cx.scalar), t.mul(&dx).sub(&x.sub(&c.mul(&xp))))
    } else {
        (format!("dx/dt = {}*x^{big_p}", cx.scalar), dx.sub(&c.mul(&xp)))
    };
    let argument = if x.is_constant() {
        None
    } else if x.is_polynomial() {
        let d = x.num().degree().unwrap_or(0) as u64;
        Some(if spec.variant.is_gabber() {
            format!("deg: {d} = {big_p}*{d} has no solution with d >= 1")
        } else {
            format!("deg: {} = {big_p}*{d} has no solution with d >= 1", d as i64 - 1)
        })
    } else {
        let e = pole_order(x);
        let solvable = e + 1 == big_p * e;
        Some(format!(
            "pole of order {e}: {} = {big_p}*{e} {}",
            e + 1,
            if solvable { "is solvable (only possible for p^m = 2)" } else { "has no solution" }
        ))
    };
    OdeCertificate { identity, residual: residual.to_string(), holds: residual.is_zero(), argument }
}

/// Largest multiplicity of a root of the denominator over `k0`, measured by
/// repeated gcd with the derivative; an upper bound at any finite pole.
fn pole_order(x: &Kt) -> u64 {
    let mut e = 1;
    let mut d = x.den().clone();
    loop {
        let g = d.gcd(&d.derivative());
        if g.degree().unwrap_or(0) == 0 || g == d {
            return e;
        }
        d = g;
        e += 1;
    }
}

/// `K[X]/(f)` with `f` the monic form of the equation at `Y = y0`.
#[derive(Debug, Clone)]
pub struct AdjoinedPoint {
    pub algebra: Arc<KtAlgebra>,
    pub point: CurvePoint<KtAlg>,
    pub modulus: String,
    pub derivative: String,
    /// Roots of the modulus in `k` of height `<= root_bound` (degree `<= 3` only).
    pub roots: Option<Vec<String>>,
    pub root_bound: usize,
    /// `Some(true)` when the modulus is certified irreducible.
    pub irreducible: Option<bool>,
    pub certificate: String,
}

/// The monic polynomial in `X` cut out by the equation at `Y = y0`.
pub fn substituted_modulus(spec: &CurveSpec, y0: &Kt) -> Result<Poly<Kt>> {
    let (cx, _, cy, ey) = spec.equation();
    let kctx = kt_ctx(spec.k0);
    let deg = spec.x_degree() as usize;
    if deg < 2 {
        return Err(config("degenerate equation in X"));
    }
    let zero = Kt::zero(&kctx);
    let mut coeffs = vec![zero; deg + 1];
    coeffs[0] = cy.eval::<Kt>(&kctx).mul(&y0.frobenius_power(ey)).neg();
    coeffs[1] = Kt::one(&kctx);
    coeffs[deg] = cx.eval::<Kt>(&kctx).neg();
    let f = Poly::new(Var::X, kctx, coeffs);
    Ok(f.monic())
}

pub fn adjoin_point(spec: &CurveSpec, y0: &Kt, root_bound: usize) -> Result<AdjoinedPoint> {
    if !std::ptr::eq(Kt::constant_field(&y0.ctx()), spec.k0) {
        return Err(config("y0 is not an element of k0(t)"));
    }
    let f = substituted_modulus(spec, y0)?;
    let algebra = EtaleAlgebra::new(kt_ctx(spec.k0), vec![f.clone()])?;
    let point = CurvePoint::new(algebra.gen(0), algebra.from_base(y0.clone()));
    if !spec.contains(&point) {
        return Err(Error::Verification("adjoined point is not on the curve".into()));
    }
    let deg = f.degree().unwrap_or(0);
    let (roots, irreducible, certificate) = if deg <= 3 {
        let roots = bounded_roots(&f, spec.k0, root_bound);
        let strings: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
        if !roots.is_empty() {
            (Some(strings), Some(false), "modulus has a root in k; the algebra is a product".to_string())
        } else if !y0.is_zero() && spec.polynomial_search_suffices() {
            (
                Some(strings),
                Some(true),
                format!(
                    "no root of height <= {root_bound}; any root x would give a k-point (x, y0) with y0 != 0, \
                     excluded by the derivation argument, so the degree-{deg} modulus is irreducible"
                ),
            )
        } else {
            (Some(strings), None, format!("no root of height <= {root_bound} (not a proof)"))
        }
    } else {
        (None, None, "degree > 3: separability only".to_string())
    };
    Ok(AdjoinedPoint {
        modulus: algebra.moduli_strings()[0].clone(),
        derivative: f.derivative().to_string(),
        algebra,
        point,
        roots,
        root_bound,
        irreducible,
        certificate,
    })
}

/// Roots `u/v` of `f` with `deg u, deg v <= bound`.
pub fn bounded_roots(f: &Poly<Kt>, k0: &'static FieldDescriptor, bound: usize) -> Vec<Kt> {
    let cands = FqPoly::enumerate(Var::T, k0, bound);
    let mut out = Vec::new();
    for v in cands.iter().filter(|v| v.leading().is_some_and(|c| c.is_one())) {
        for u in &cands {
            if (u.is_zero() && v.degree() != Some(0)) || (!u.is_zero() && !u.gcd(v).is_one()) {
                continue;
            }
            let x = Kt::new(u.clone(), v.clone()).expect("monic denominator");
            if f.eval(&x).is_zero() {
                out.push(x);
            }
        }
    }
    out.sort_by_key(rat_key);
    out
}

/// Parses a scalar of `k0` (`z` names the generator).
pub fn parse_scalar(s: &str, k0: &'static FieldDescriptor) -> Result<Fq> {
    Ok(parse::parse_field::<Fq>(s, &k0)?)
}

pub fn parse_kt(s: &str, k0: &'static FieldDescriptor) -> Result<Kt> {
    Ok(parse::parse_field::<Kt>(s, &kt_ctx(k0))?)
}
