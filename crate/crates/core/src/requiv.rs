//! R-equivalence witnesses: rational maps from the line, links and chains,
//! bounded constancy search, the `u -> uv` homotopy with specialization,
//! and `u`-adic points by fixed-point iteration.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{parse, Poly, RatFunc, SeriesCtx};
use crate::curves::{check_budget, poly_key, CurvePoint, CurveSpec};
use crate::{
    config, kt_ctx, Error, Field, FieldDescriptor, FqAlgebra, FqPoly, FqPolyV, Kt, KtSeries, Ktu, Ktuv, Result, Ring,
    Var,
};

#[derive(Debug, Clone, Copy)]
pub enum Target {
    Ambient(usize),
    Curve(CurveSpec),
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::Ambient(d) => *d,
            Target::Curve(_) => 2,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Target::Ambient(d) => format!("A^{d}"),
            Target::Curve(s) => s.equation_string(),
        }
    }
}

/// A map `P^1 -> X` over `K`, given by coordinates in `K(v)`.
#[derive(Debug, Clone)]
pub struct RationalMap<F: Field> {
    pub target: Target,
    pub coords: Vec<RatFunc<F>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MapRecord {
    pub target: String,
    pub coords: Vec<String>,
}

impl<F: Field> RationalMap<F> {
    pub fn record(&self) -> MapRecord {
        MapRecord { target: self.target.describe(), coords: self.coords.iter().map(|c| c.to_string()).collect() }
    }

    /// The reduced denominators in `v`.
    pub fn poles(&self) -> Vec<String> {
        self.coords.iter().filter(|c| !c.is_polynomial()).map(|c| c.den().to_string()).collect()
    }
}

/// Validates the coordinates against the target; on a curve the equation
/// must hold identically in `K(v)`.
pub fn make_rational_map<F: Field + FqAlgebra>(target: Target, coords: Vec<RatFunc<F>>) -> Result<RationalMap<F>> {
    if coords.len() != target.dim() {
        return Err(config(format!("{} coordinates for a target of dimension {}", coords.len(), target.dim())));
    }
    if coords.iter().any(|c| c.var() != Var::V) {
        return Err(config("map coordinates must be functions of v"));
    }
    if let Target::Curve(spec) = &target {
        let r = spec.residual(&coords[0], &coords[1]);
        if !r.is_zero() {
            return Err(Error::Verification(format!("curve equation violated: residual {r}")));
        }
    }
    Ok(RationalMap { target, coords })
}

/// `f(v0)`, or `None` where some reduced denominator vanishes.
pub fn evaluate_map<F: Field>(f: &RationalMap<F>, v0: &F) -> Option<Vec<F>> {
    f.coords.iter().map(|c| c.eval(v0)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkReport {
    pub defined_at_0: bool,
    pub defined_at_1: bool,
    pub starts_at_x: bool,
    pub ends_at_y: bool,
    pub linked: bool,
}

pub fn check_r_link<F: Field>(f: &RationalMap<F>, x: &[F], y: &[F]) -> LinkReport {
    let ctx = f.coords.first().map(|c| c.base().clone());
    let (at0, at1) = match ctx {
        Some(base) => (evaluate_map(f, &F::zero(&base)), evaluate_map(f, &F::one(&base))),
        None => (Some(vec![]), Some(vec![])),
    };
    let starts_at_x = at0.as_deref() == Some(x);
    let ends_at_y = at1.as_deref() == Some(y);
    LinkReport {
        defined_at_0: at0.is_some(),
        defined_at_1: at1.is_some(),
        starts_at_x,
        ends_at_y,
        linked: starts_at_x && ends_at_y,
    }
}

/// Points `z_1, .., z_n` and maps `f_i` with `f_i(0) = z_i`, `f_i(1) = z_(i+1)`.
#[derive(Debug, Clone)]
pub struct RChainWitness<F: Field> {
    pub points: Vec<Vec<F>>,
    pub maps: Vec<RationalMap<F>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub links: usize,
    pub passed: bool,
    /// Index of the first failing link (0-based).
    pub failed_at: Option<usize>,
    pub reason: Option<String>,
}

pub fn check_chain<F: Field>(w: &RChainWitness<F>, x: &[F], y: &[F]) -> ChainReport {
    let links = w.maps.len();
    let fail = |i: Option<usize>, why: String| ChainReport { links, passed: false, failed_at: i, reason: Some(why) };
    if w.points.len() != links + 1 {
        return fail(None, format!("{} points for {links} maps", w.points.len()));
    }
    if w.points[0] != x {
        return fail(None, "first point is not x".into());
    }
    if w.points[links] != y {
        return fail(None, "last point is not y".into());
    }
    for (i, f) in w.maps.iter().enumerate() {
        let r = check_r_link(f, &w.points[i], &w.points[i + 1]);
        if !r.linked {
            let why = if !r.defined_at_0 {
                "undefined at 0"
            } else if !r.defined_at_1 {
                "undefined at 1"
            } else if !r.starts_at_x {
                "f(0) differs from the point"
            } else {
                "f(1) differs from the next point"
            };
            return fail(Some(i), why.into());
        }
    }
    ChainReport { links, passed: true, failed_at: None, reason: None }
}

/// One entry per point: its coordinates and, except for the last, the
/// coordinates of the map leaving it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChainRecord {
    pub map_coords: Vec<String>,
    pub points: Vec<String>,
}

pub fn chain_records<F: Field>(w: &RChainWitness<F>) -> Vec<ChainRecord> {
    w.points
        .iter()
        .enumerate()
        .map(|(i, pt)| ChainRecord {
            map_coords: w.maps.get(i).map(|f| f.coords.iter().map(|c| c.to_string()).collect()).unwrap_or_default(),
            points: pt.iter().map(|c| c.to_string()).collect(),
        })
        .collect()
}

/// Reads a chain over `k(u)` into the ambient `A^d` (`d` from the points).
pub fn chain_from_records(k0: &'static FieldDescriptor, records: &[ChainRecord]) -> Result<RChainWitness<Ktu>> {
    let uctx = u_ctx(k0);
    let vctx = Ktuv::x(Var::V, uctx.clone()).ctx();
    let dim = records.first().map_or(0, |r| r.points.len());
    let mut points = Vec::new();
    let mut maps = Vec::new();
    for (i, r) in records.iter().enumerate() {
        if r.points.len() != dim {
            return Err(config(format!("entry {i}: expected {dim} coordinates")));
        }
        points.push(r.points.iter().map(|s| parse::parse_field::<Ktu>(s, &uctx)).collect::<Result<Vec<_>, _>>()?);
        if i + 1 < records.len() {
            let coords =
                r.map_coords.iter().map(|s| parse::parse_field::<Ktuv>(s, &vctx)).collect::<Result<Vec<_>, _>>()?;
            maps.push(make_rational_map(Target::Ambient(dim), coords)?);
        } else if !r.map_coords.is_empty() {
            return Err(config("the last entry carries no map"));
        }
    }
    Ok(RChainWitness { points, maps })
}

pub fn u_ctx(k0: &'static FieldDescriptor) -> <Ktu as Ring>::Ctx {
    Ktu::x(Var::U, kt_ctx(k0)).ctx()
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstancyReport {
    pub target: String,
    pub dv: usize,
    pub dt: usize,
    /// Candidate coordinate pairs (or single coordinates for `A^1`).
    pub candidates: u128,
    pub count: usize,
    pub nonconstant: usize,
    pub zero_only: bool,
    pub constant_only: bool,
    /// Every map found on a curve; the first few non-constant ones on `A^1`.
    pub maps: Vec<Vec<String>>,
}

/// All elements of `F_q[t][v]` of bidegree `<= (dt, dv)`.
fn bidegree_polys(k0: &'static FieldDescriptor, dv: usize, dt: usize) -> Vec<FqPolyV> {
    let coeffs = FqPoly::enumerate(Var::T, k0, dt);
    let ctx = FqPolyV::x(Var::V, coeffs[0].ctx()).ctx();
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..=dv {
        out = out.into_iter().flat_map(|pre| (0..coeffs.len()).map(move |i| [pre.clone(), vec![i]].concat())).collect();
    }
    out.into_iter()
        .map(|ix| FqPolyV::from_ctx(ctx.clone(), ix.into_iter().map(|i| coeffs[i].clone()).collect()))
        .collect()
}

fn bikey(f: &FqPolyV) -> Vec<Vec<u32>> {
    f.coeffs().iter().map(poly_key).collect()
}

fn is_constant_in_v(f: &FqPolyV) -> bool {
    f.degree().is_none_or(|d| d == 0)
}

/// Maps `P^1 -> C` with coordinates in `F_q[t][v]` of bidegree `<= (dt, dv)`
/// satisfying the curve equation identically.
pub fn constancy_search(spec: &CurveSpec, dv: usize, dt: usize, budget: u128) -> Result<ConstancyReport> {
    let q = spec.k0.order() as u128;
    let per = q.checked_pow(((dt + 1) * (dv + 1)) as u32).ok_or(Error::Budget { needed: u128::MAX, budget })?;
    let pairs = per.saturating_mul(per);
    check_budget(pairs, budget)?;
    let cands = bidegree_polys(spec.k0, dv, dt);
    let ctx = cands[0].ctx();
    let (cx, ex, cy, ey) = spec.equation();
    let cx = cx.eval::<FqPolyV>(&ctx);
    let cy = cy.eval::<FqPolyV>(&ctx);
    let lhs: Vec<Vec<Vec<u32>>> = cands.par_iter().map(|x| bikey(&x.sub(&cx.mul(&x.frobenius_power(ex))))).collect();
    let rhs: Vec<Vec<Vec<u32>>> = cands.par_iter().map(|y| bikey(&cy.mul(&y.frobenius_power(ey)))).collect();
    let mut index: HashMap<&[Vec<u32>], Vec<usize>> = HashMap::new();
    for (j, k) in rhs.iter().enumerate() {
        index.entry(k.as_slice()).or_default().push(j);
    }
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (i, k) in lhs.iter().enumerate() {
        if let Some(ys) = index.get(k.as_slice()) {
            hits.extend(ys.iter().map(|&j| (i, j)));
        }
    }
    hits.sort_by_key(|&(i, j)| (j, i));
    let nonconstant =
        hits.iter().filter(|&&(i, j)| !is_constant_in_v(&cands[i]) || !is_constant_in_v(&cands[j])).count();
    let zero_only = hits.len() == 1 && cands[hits[0].0].is_zero() && cands[hits[0].1].is_zero();
    Ok(ConstancyReport {
        target: spec.equation_string(),
        dv,
        dt,
        candidates: pairs,
        count: hits.len(),
        nonconstant,
        zero_only,
        constant_only: nonconstant == 0,
        maps: hits.iter().map(|&(i, j)| vec![cands[i].to_string(), cands[j].to_string()]).collect(),
    })
}

/// The unconstrained control: every candidate is a map to `A^1`.
pub fn constancy_search_affine_line(
    k0: &'static FieldDescriptor,
    dv: usize,
    dt: usize,
    budget: u128,
) -> Result<ConstancyReport> {
    let q = k0.order() as u128;
    let per = q.checked_pow(((dt + 1) * (dv + 1)) as u32).ok_or(Error::Budget { needed: u128::MAX, budget })?;
    check_budget(per, budget)?;
    let cands = bidegree_polys(k0, dv, dt);
    let nonconst: Vec<&FqPolyV> = cands.iter().filter(|f| !is_constant_in_v(f)).collect();
    Ok(ConstancyReport {
        target: "A^1".into(),
        dv,
        dt,
        candidates: per,
        count: cands.len(),
        nonconstant: nonconst.len(),
        zero_only: false,
        constant_only: nonconst.is_empty(),
        maps: nonconst.iter().take(5).map(|f| vec![f.to_string()]).collect(),
    })
}

/// `z(0)` for `z` over `k(u)`, or an error naming the vanishing denominator.
pub fn at_u_zero(z: &[Ktu]) -> Result<Vec<Kt>> {
    z.iter()
        .map(|c| {
            let base = c.base().clone();
            c.eval(&Kt::zero(&base))
                .ok_or_else(|| config(format!("z is not defined at u = 0: denominator {} vanishes", c.den())))
        })
        .collect()
}

/// `phi'(v) = z(u v)` over `k(u)`.
pub fn homotopy_uv(target: Target, z: &[Ktu]) -> Result<RationalMap<Ktu>> {
    at_u_zero(z)?;
    let Some(first) = z.first() else {
        return Err(config("empty point"));
    };
    let uctx = first.ctx();
    let u = Ktu::x(Var::U, uctx.base.clone());
    let subst = |p: &Poly<Kt>| -> Poly<Ktu> {
        let coeffs = p
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| Ktu::constant(Var::U, c.clone()).mul(&u.pow(i as u64)))
            .collect();
        Poly::new(Var::V, uctx.clone(), coeffs)
    };
    let coords = z
        .iter()
        .map(|c| RatFunc::new(subst(c.num()), subst(c.den())).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    make_rational_map(target, coords)
}

/// The `u`-denominators that a specialization `u = u0` must avoid.
fn bad_factors(w: &RChainWitness<Ktu>) -> Vec<Poly<Kt>> {
    let mut out: Vec<Poly<Kt>> = Vec::new();
    let push_den = |c: &Ktu, out: &mut Vec<Poly<Kt>>| {
        if !c.is_polynomial() {
            out.push(c.den().clone());
        }
    };
    for pt in &w.points {
        pt.iter().for_each(|c| push_den(c, &mut out));
    }
    for f in &w.maps {
        for c in &f.coords {
            for a in c.num().coeffs().iter().chain(c.den().coeffs()) {
                push_den(a, &mut out);
            }
            let uctx = c.base().clone();
            for v0 in [Ktu::zero(&uctx), Ktu::one(&uctx)] {
                let d = c.den().eval(&v0);
                // the value of the denominator at v0 must stay non-zero
                if !d.is_zero() && !d.num().is_constant() {
                    out.push(d.num().clone());
                }
            }
        }
    }
    out
}

fn specialize(c: &Ktu, u0: &Kt) -> Kt {
    c.eval(u0).expect("u0 avoids the bad locus")
}

#[derive(Debug, Clone)]
pub struct Specialized {
    pub u0: Kt,
    pub chain: RChainWitness<Kt>,
}

/// Substitutes `u = u0` throughout a chain. Without `u0`, the first
/// element of `k0[t]` in enumeration order off the bad locus is used.
pub fn specialize_u(w: &RChainWitness<Ktu>, u0: Option<Kt>, k0: &'static FieldDescriptor) -> Result<Specialized> {
    let bad = bad_factors(w);
    let hits = |u0: &Kt| bad.iter().find(|g| g.eval(u0).is_zero());
    let u0 = match u0 {
        Some(u0) => {
            if let Some(g) = hits(&u0) {
                return Err(config(format!("u0 = {u0} lies in the bad locus: it is a root of {g}")));
            }
            u0
        }
        None => FqPoly::enumerate(Var::T, k0, 3)
            .into_iter()
            .map(Kt::from_poly)
            .find(|c| hits(c).is_none())
            .ok_or_else(|| config("no u0 of degree <= 3 avoids the bad locus"))?,
    };
    let kc = kt_ctx(k0);
    let points = w.points.iter().map(|pt| pt.iter().map(|c| specialize(c, &u0)).collect()).collect();
    let maps = w
        .maps
        .iter()
        .map(|f| {
            let coords = f
                .coords
                .iter()
                .map(|c| {
                    let n = c.num().map_coeffs(kc.clone(), |a| specialize(a, &u0));
                    let d = c.den().map_coeffs(kc.clone(), |a| specialize(a, &u0));
                    RatFunc::new(n, d).map_err(Error::from)
                })
                .collect::<Result<Vec<_>>>()?;
            make_rational_map(f.target, coords)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Specialized { u0, chain: RChainWitness { points, maps } })
}

#[derive(Debug, Clone, Serialize)]
pub struct LaurentPoint {
    pub x: String,
    pub y: String,
    pub precision: usize,
    pub iterations: usize,
    /// `u`-valuation of the defect after each iterate (starting at `x = 0`).
    pub defect_valuations: Vec<usize>,
    pub on_curve_mod_n: bool,
    pub nonzero: bool,
    #[serde(skip)]
    pub point: Option<CurvePoint<KtSeries>>,
}

/// Solves the curve equation for `x` in `k[[u]]/(u^N)` given `y0` with
/// positive valuation, iterating `x <- cx x^(p^ex) + cy y0^(p^ey)` from 0.
pub fn laurent_point(spec: &CurveSpec, y0: &KtSeries, n: usize) -> Result<LaurentPoint> {
    if n == 0 {
        return Err(config("precision must be positive"));
    }
    if y0.valuation().is_some_and(|v| v == 0) {
        return Err(config("y0 must have positive u-valuation"));
    }
    let (cx, ex, cy, ey) = spec.equation();
    if ex == 0 {
        return Err(config("the iteration does not contract when X appears to the first power"));
    }
    let sctx = SeriesCtx { var: Var::U, base: kt_ctx(spec.k0) };
    let y = y0.truncate(n);
    let cx = cx.eval::<KtSeries>(&sctx);
    let forced = cy.eval::<KtSeries>(&sctx).mul(&y.frobenius_power(ey)).truncate(n);
    let defect = |x: &KtSeries| spec.residual(x, &y).truncate(n).valuation_bound().min(n);
    let mut x = KtSeries::zero(&sctx).truncate(n);
    let mut history = vec![defect(&x)];
    while *history.last().expect("non-empty") < n {
        if history.len() > n + 1 {
            return Err(Error::Verification("fixed-point iteration did not converge".into()));
        }
        x = cx.mul(&x.frobenius_power(ex)).add(&forced).truncate(n);
        let d = defect(&x);
        if d <= *history.last().expect("non-empty") {
            return Err(Error::Verification(format!("defect valuation stalled at {d}")));
        }
        history.push(d);
    }
    let pt = CurvePoint::new(x.clone(), y.clone());
    Ok(LaurentPoint {
        x: x.to_string(),
        y: y.to_string(),
        precision: n,
        iterations: history.len() - 1,
        on_curve_mod_n: spec.residual(&pt.x, &pt.y).truncate(n).is_zero(),
        nonzero: !x.is_zero() || !y.is_zero(),
        defect_valuations: history,
        point: Some(pt),
    })
}
