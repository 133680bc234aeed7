use serde_json::{json, Value};

use woundlab::arith::{parse, RatFunc, SeriesCtx};
use woundlab::central_ext::{
    check_biadditive, check_cocycle, check_containment, check_group_laws, check_symmetry, combination, make_pairing,
    noncommutativity_witness, Pairing, PairingKind, PointPool,
};
use woundlab::curves::{
    adjoin_point, make_spec, parse_kt, parse_scalar, polynomial_point_search, rational_point_search, CurveSpec, Variant,
};
use woundlab::descent::{
    check_coboundary, check_descent_datum, check_phi_iso, check_phi_iso_with, check_twist_relation,
    check_twisted_action, descended_witness, twisted_fixed_points, DescentDatum,
};
use woundlab::norm::{check_norm_laws, norm_ga, ConstantExtension, GroupName, NormGroup};
use woundlab::requiv::{
    chain_from_records, chain_records, check_chain, constancy_search_affine_line, homotopy_uv, laurent_point,
    make_rational_map, specialize_u, u_ctx, ChainRecord, RChainWitness, Target,
};
use woundlab::{
    default_budget, kt_ctx, sample, Error, Field, FieldDescriptor, Fq, FqAlgebra, Kt, Ktu, Result, Ring, Var,
};

use crate::{Outcome, Params};

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// `z^2+z+1` or `1,1,1`, little-endian.
fn parse_modulus(s: &str, p: u64) -> Result<Vec<i64>> {
    let s = s.replace(' ', "");
    if !s.contains('z') {
        return s
            .split(',')
            .map(|c| c.parse::<i64>().map_err(|_| cfg(format!("bad modulus coefficient `{c}`"))))
            .collect();
    }
    let mut coeffs: Vec<i64> = Vec::new();
    for term in s.replace('-', "+-").split('+').filter(|t| !t.is_empty()) {
        let (c, e) = match term.split_once('z') {
            None => (term.to_string(), 0usize),
            Some((c, rest)) => {
                let c = match c.trim_end_matches('*') {
                    "" => "1".to_string(),
                    "-" => "-1".to_string(),
                    c => c.to_string(),
                };
                let e = match rest.strip_prefix('^') {
                    Some(e) => e.parse().map_err(|_| cfg(format!("bad exponent in `{term}`")))?,
                    None if rest.is_empty() => 1,
                    None => return Err(cfg(format!("bad term `{term}`"))),
                };
                (c, e)
            }
        };
        let c: i64 = c.parse().map_err(|_| cfg(format!("bad coefficient in `{term}`")))?;
        if coeffs.len() <= e {
            coeffs.resize(e + 1, 0);
        }
        coeffs[e] += c;
    }
    Ok(coeffs.into_iter().map(|c| c.rem_euclid(p as i64)).collect())
}

fn constants(params: &Params) -> Result<&'static FieldDescriptor> {
    Ok(match &params.q_modulus {
        Some(m) => FieldDescriptor::new(params.p, &parse_modulus(m, params.p)?)?,
        None => FieldDescriptor::prime(params.p)?,
    })
}

fn variant_or(params: &Params, default: &str) -> String {
    params.variant.clone().unwrap_or_else(|| default.to_string())
}

fn spec(params: &Params, default: &str) -> Result<CurveSpec> {
    let k0 = constants(params)?;
    spec_over(params, default, k0)
}

fn spec_over(params: &Params, default: &str, k0: &'static FieldDescriptor) -> Result<CurveSpec> {
    let v: Variant = variant_or(params, default).parse()?;
    let a = parse_scalar(&params.a, k0)?;
    let b = parse_scalar(&params.b, k0)?;
    make_spec(v, params.p, k0, params.m, params.n, a, b)
}

fn zeta(params: &Params) -> Result<Fq> {
    let f4 = FieldDescriptor::gf4();
    match &params.zeta {
        Some(z) => parse_scalar(z, f4),
        None => Ok(f4.generator()),
    }
}

fn pairing(params: &Params) -> Result<Pairing> {
    let kind: PairingKind = variant_or(params, "endo").parse()?;
    if kind == PairingKind::Twisted {
        if params.p != 2 {
            return Err(cfg("the twisted pairing needs --p 2"));
        }
        return make_pairing(kind, 2, FieldDescriptor::gf4(), params.m, params.n, Some(zeta(params)?));
    }
    make_pairing(kind, params.p, constants(params)?, params.m, params.n, None)
}

fn is_pairing_name(params: &Params) -> bool {
    params.variant.as_deref().is_some_and(|v| v.parse::<PairingKind>().is_ok())
}

fn points_value(pts: &[woundlab::curves::CurvePoint<Kt>]) -> Value {
    json!(pts.iter().map(|p| p.strings()).collect::<Vec<_>>())
}

pub fn run_verify_axioms(params: &Params) -> Result<Outcome> {
    if is_pairing_name(params) {
        let h = pairing(params)?;
        let laws = check_group_laws(&h, params.trials, params.seed)?;
        return Ok(Outcome {
            ok: laws.all_pass(),
            result: json!({ "pairing": h.record(), "group_laws": laws }),
            witnesses: json!({}),
        });
    }
    let k0 = constants(params)?;
    let s = spec_over(params, "rosenlicht", k0)?;
    let mut rng = sample::rng(params.seed);
    let trials = params.trials;
    let mut field = [0usize; 3];
    let mut frob = [0usize; 2];
    let mut deriv = [0usize; 2];
    for _ in 0..trials {
        let (a, b, c) = (sample::fq(&mut rng, k0), sample::fq(&mut rng, k0), sample::fq(&mut rng, k0));
        field[0] += (a.mul(&b).mul(&c) == a.mul(&b.mul(&c))) as usize;
        field[1] += (a.mul(&b.add(&c)) == a.mul(&b).add(&a.mul(&c))) as usize;
        field[2] += (a.is_zero() || a.mul(&a.inv()?).is_one()) as usize;
        let f = sample::kt(&mut rng, k0, 3, 2);
        let g = sample::kt(&mut rng, k0, 3, 2);
        frob[0] += (f.add(&g).frobenius() == f.frobenius().add(&g.frobenius())) as usize;
        frob[1] += (f.mul(&g).frobenius() == f.frobenius().mul(&g.frobenius())) as usize;
        deriv[0] += (f.mul(&g).derivative() == f.derivative().mul(&g).add(&f.mul(&g.derivative()))) as usize;
        deriv[1] += f.frobenius().derivative().is_zero() as usize;
    }
    let mut closure = 0usize;
    let pool_trials = trials.min(20);
    if pool_trials > 0 {
        let mut pool = PointPool::random(&s, &mut rng, 3)?;
        for _ in 0..pool_trials {
            let (i, j) = pool.pick(&mut rng);
            let (pi, pj) = pool.pair(i.min(j), i.max(j))?;
            let c = combination(&mut rng, params.p, &[&pi, &pj]);
            closure += (s.contains(&c) && s.contains(&c.neg())) as usize;
        }
    }
    let ok = field.iter().chain(&frob).chain(&deriv).all(|&x| x == trials) && closure == pool_trials;
    Ok(Outcome {
        ok,
        result: json!({
            "field": { "q": k0.order(), "associativity": field[0], "distributivity": field[1], "inverse": field[2] },
            "frobenius": { "additive": frob[0], "multiplicative": frob[1] },
            "derivation": { "leibniz": deriv[0], "kills_pth_powers": deriv[1] },
            "curve": { "spec": s.record(), "closure": closure, "trials": pool_trials },
            "trials": trials,
        }),
        witnesses: json!({}),
    })
}

pub fn run_search_points(params: &Params) -> Result<Outcome> {
    let s = spec(params, "rosenlicht")?;
    let (method, pts) = if s.polynomial_search_suffices() {
        ("polynomial", polynomial_point_search(&s, params.deg_bound, default_budget())?)
    } else {
        ("rational", rational_point_search(&s, params.deg_bound, default_budget())?)
    };
    let only_identity = pts.len() == 1 && pts[0].is_zero();
    Ok(Outcome {
        ok: true,
        result: json!({
            "spec": s.record(),
            "deg_bound": params.deg_bound,
            "method": method,
            "count": pts.len(),
            "only_identity": only_identity,
            "points": points_value(&pts),
        }),
        witnesses: json!({}),
    })
}

pub fn run_adjoin_point(params: &Params) -> Result<Outcome> {
    let s = spec(params, "endo1")?;
    let y0 = parse_kt(params.y0.as_deref().unwrap_or("t"), s.k0)?;
    let adj = adjoin_point(&s, &y0, params.deg_bound)?;
    let on_curve = s.contains(&adj.point);
    Ok(Outcome {
        ok: on_curve,
        result: json!({
            "spec": s.record(),
            "y0": y0.to_string(),
            "modulus": adj.modulus,
            "derivative": adj.derivative,
            "dimension": adj.algebra.dim(),
            "roots": adj.roots,
            "root_bound": adj.root_bound,
            "irreducible": adj.irreducible,
            "certificate": adj.certificate,
            "on_curve": on_curve,
        }),
        witnesses: json!({ "point": adj.point.strings() }),
    })
}

pub fn run_check_cocycle(params: &Params) -> Result<Outcome> {
    let h = pairing(params)?;
    let bi = check_biadditive(&h);
    let co = check_cocycle(&h);
    let cont = check_containment(&h, params.trials, params.seed)?;
    let sym = check_symmetry(&h, false)?;
    let witness = if sym.symmetric { Value::Null } else { to_value(&noncommutativity_witness(&h, None)?) };
    Ok(Outcome {
        ok: bi.holds && co.holds && cont.all_pass(),
        result: json!({
            "pairing": h.record(),
            "biadditive": bi,
            "cocycle": co,
            "containment": cont,
            "symmetry": { "symmetric": sym.symmetric, "difference": sym.difference },
            "summary": [
                if bi.holds { "pass" } else { "fail" },
                if co.holds { "pass" } else { "fail" },
                if cont.all_pass() { "pass" } else { "fail" },
                if sym.symmetric { "symmetric" } else { "asymmetric" },
            ],
        }),
        witnesses: json!({ "commutator": witness }),
    })
}

fn descent_entry(name: &str, m: u32, n: u32, holds: bool, residual: &str) -> Value {
    json!({ "check": name, "m": m, "n": n, "residual_zero": holds, "residual": residual })
}

pub fn run_check_descent(params: &Params) -> Result<Outcome> {
    let (m, n) = (params.m, params.n);
    let dd = DescentDatum::with_zeta(m, n, zeta(params)?)?;
    let checks = [
        check_coboundary(&dd.h_zeta.untwisted(), m, n),
        check_twist_relation(&dd.h_zeta),
        check_phi_iso(&dd),
        check_descent_datum(&dd, 1),
    ];
    let entries: Vec<Value> = checks.iter().map(|c| descent_entry(&c.check, m, n, c.holds, &c.residual)).collect();
    let sigma_id = check_descent_datum(&dd, 0);
    let f_zero = check_phi_iso_with(&dd, |g| woundlab::curves::CurvePoint::zero(&g.x.ctx()));
    let action = check_twisted_action(&dd, params.trials, params.seed)?;
    let fixed = twisted_fixed_points(&dd, params.deg_bound, default_budget())?;
    let witness = descended_witness(&dd, None)?;
    let ok = checks.iter().all(|c| c.holds) && action.iter().all(|r| r.all_pass()) && fixed.involution;
    Ok(Outcome {
        ok,
        result: json!({
            "pairing": dd.h_zeta.record(),
            "checks": entries,
            "controls": [
                descent_entry("descent_datum_sigma_identity", m, n, sigma_id.holds, &sigma_id.residual),
                descent_entry("phi_iso_f_zero", m, n, f_zero.holds, &f_zero.residual),
            ],
            "twisted_action": action,
            "fixed_points_over_k": {
                "deg_bound": fixed.deg_bound,
                "g1_points": fixed.g1_points,
                "g2_points": fixed.g2_points,
                "count": fixed.fixed.len(),
                "only_identity": fixed.only_identity,
                "involution": fixed.involution,
            },
        }),
        witnesses: json!({ "fixed": fixed.fixed, "descended_commutator": witness }),
    })
}

pub fn run_norm_check(params: &Params) -> Result<Outcome> {
    let ext_field = match &params.q_modulus {
        Some(m) => FieldDescriptor::new(params.p, &parse_modulus(m, params.p)?)?,
        None => FieldDescriptor::of_degree(params.p, 2)?,
    };
    let ext = ConstantExtension::over_prime_field(ext_field);
    let group = match variant_or(params, "ga").parse::<GroupName>()? {
        GroupName::Ga => NormGroup::Ga,
        GroupName::Ga2 => NormGroup::Ga2,
        GroupName::Curve(_) => NormGroup::curve(&ext, spec_over(params, "ga", ext_field)?)?,
    };
    let report = check_norm_laws(&group, &ext, params.trials, params.seed)?;
    let kc = kt_ctx(ext_field);
    let z = Kt::from_fq(&kc, ext_field.generator());
    let t = woundlab::t_of(ext_field);
    Ok(Outcome {
        ok: report.all_pass(),
        result: to_value(&report),
        witnesses: json!({
            "norm_of_1": norm_ga(&ext, &Kt::one(&kc)).to_string(),
            "norm_of_z": norm_ga(&ext, &z).to_string(),
            "norm_of_z_plus_t": norm_ga(&ext, &z.add(&t)).to_string(),
            "constants": ext_field.modulus_string(),
        }),
    })
}

pub fn run_constancy_search(params: &Params) -> Result<Outcome> {
    let v = variant_or(params, "endo1");
    let report = if v.eq_ignore_ascii_case("a1") {
        constancy_search_affine_line(constants(params)?, params.dv, params.dt, default_budget())?
    } else {
        woundlab::requiv::constancy_search(&spec(params, "endo1")?, params.dv, params.dt, default_budget())?
    };
    Ok(Outcome { ok: true, result: to_value(&report), witnesses: json!({}) })
}

/// `z = (u, u^2)` linked to `0` by `z(uv)`, then a constant link.
fn homotopy_chain(k0: &'static FieldDescriptor) -> Result<(RChainWitness<Ktu>, Value)> {
    let uc = u_ctx(k0);
    let u = Ktu::x(Var::U, kt_ctx(k0));
    let z = vec![u.clone(), u.pow(2)];
    let phi = homotopy_uv(Target::Ambient(2), &z)?;
    let ends = |v0: Ktu| woundlab::requiv::evaluate_map(&phi, &v0);
    let at0 = ends(Ktu::zero(&uc));
    let at1 = ends(Ktu::one(&uc));
    let z0 = woundlab::requiv::at_u_zero(&z)?;
    let z0_u: Vec<Ktu> = z0.iter().map(|c| Ktu::constant(Var::U, c.clone())).collect();
    let info = json!({
        "z": z.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "map": phi.record(),
        "at_0_is_z0": at0.as_deref() == Some(&z0_u[..]),
        "at_1_is_z": at1.as_deref() == Some(&z[..]),
    });
    let constant =
        make_rational_map(Target::Ambient(2), z.iter().map(|c| RatFunc::constant(Var::V, c.clone())).collect())?;
    let zero = vec![Ktu::zero(&uc), Ktu::zero(&uc)];
    Ok((RChainWitness { points: vec![zero, z.clone(), z], maps: vec![phi, constant] }, info))
}

fn chain_value<F: Field>(w: &RChainWitness<F>) -> Value {
    let first = w.points.first().cloned().unwrap_or_default();
    let last = w.points.last().cloned().unwrap_or_default();
    json!({ "report": check_chain(w, &first, &last), "records": chain_records(w) })
}

pub fn run_requiv_witness(params: &Params) -> Result<Outcome> {
    let descended = params.p == 2 || matches!(params.variant.as_deref(), Some("twisted") | Some("descended"));
    let (witness, ok) = if descended {
        let dd = DescentDatum::with_zeta(params.m, params.n, zeta(params)?)?;
        let w = descended_witness(&dd, None)?;
        let ok = w.nonzero && w.fixed && w.on_curves && w.matches_formula;
        (to_value(&w), ok)
    } else {
        let h = pairing(params)?;
        let w = noncommutativity_witness(&h, None)?;
        let ok = w.nonzero && w.matches_formula;
        (to_value(&w), ok)
    };
    let k0 = if descended { FieldDescriptor::prime(2)? } else { constants(params)? };
    let (chain, homotopy) = homotopy_chain(k0)?;
    let u0 = params.u0.as_deref().map(|s| parse_kt(s, k0)).transpose()?;
    let spec_chain = specialize_u(&chain, u0.clone(), k0)?;
    let mut ok = ok && homotopy["at_0_is_z0"] == json!(true) && homotopy["at_1_is_z"] == json!(true);
    let over_ku = chain_value(&chain);
    let specialized = chain_value(&spec_chain.chain);
    ok &= over_ku["report"]["passed"] == json!(true) && specialized["report"]["passed"] == json!(true);
    let file = match &params.chain {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| cfg(format!("cannot read {}: {e}", path.display())))?;
            let records: Vec<ChainRecord> =
                serde_json::from_str(&text).map_err(|e| cfg(format!("bad chain file: {e}")))?;
            let w = chain_from_records(k0, &records)?;
            let given = chain_value(&w);
            let sp = specialize_u(&w, u0, k0)?;
            let sv = chain_value(&sp.chain);
            ok &= given["report"]["passed"] == json!(true) && sv["report"]["passed"] == json!(true);
            json!({ "chain": given["report"], "u0": sp.u0.to_string(), "specialized": sv })
        }
        None => Value::Null,
    };
    Ok(Outcome {
        ok,
        result: json!({
            "group": if descended { "descended" } else { "extension" },
            "noncommutative": witness["nonzero"],
            "dimension": witness["dimension"],
            "homotopy": homotopy,
            "chain_over_ku": over_ku["report"],
            "u0": spec_chain.u0.to_string(),
            "chain_specialized": specialized["report"],
            "chain_file": file,
        }),
        witnesses: json!({
            "commutator": witness,
            "chain_over_ku": over_ku["records"],
            "chain_specialized": specialized["records"],
        }),
    })
}

pub fn run_laurent_point(params: &Params) -> Result<Outcome> {
    let s = spec(params, "endo1")?;
    let sctx = SeriesCtx { var: Var::U, base: kt_ctx(s.k0) };
    let y0 = parse::parse_series::<Kt>(params.y0.as_deref().unwrap_or("u"), &sctx)?;
    let lp = laurent_point(&s, &y0, params.precision)?;
    Ok(Outcome {
        ok: lp.on_curve_mod_n,
        result: json!({
            "spec": s.record(),
            "precision": lp.precision,
            "iterations": lp.iterations,
            "defect_valuations": lp.defect_valuations,
            "on_curve_mod_n": lp.on_curve_mod_n,
            "nonzero": lp.nonzero,
        }),
        witnesses: json!({ "x": lp.x, "y": lp.y }),
    })
}

pub fn run_theorem_scenario(params: &Params) -> Result<Outcome> {
    let k0 = constants(params)?;
    let one = k0.one();
    let budget = default_budget();
    let (m, n, d) = (params.m, params.n, params.deg_bound);
    let g1 = make_spec(Variant::Endo1, params.p, k0, m, m, one, one)?;
    let g2 = make_spec(Variant::Endo2, params.p, k0, m, n, one, one)?;
    let search = |s: &CurveSpec| -> Result<Vec<woundlab::curves::CurvePoint<Kt>>> {
        if s.polynomial_search_suffices() {
            polynomial_point_search(s, d, budget)
        } else {
            rational_point_search(s, d, budget)
        }
    };
    let (p1, p2) = (search(&g1)?, search(&g2)?);
    let trivial = |pts: &[woundlab::curves::CurvePoint<Kt>]| pts.len() == 1 && pts[0].is_zero();
    let (g_trivial, witness, nonzero) = if params.p == 2 {
        let dd = DescentDatum::new(m, n)?;
        let fixed = twisted_fixed_points(&dd, d, budget)?;
        let w = descended_witness(&dd, None)?;
        (fixed.only_identity, to_value(&w), w.nonzero && w.fixed)
    } else {
        let h = make_pairing(PairingKind::Endo, params.p, k0, m, n, None)?;
        let w = noncommutativity_witness(&h, None)?;
        (trivial(&p1) && trivial(&p2), to_value(&w), w.nonzero)
    };
    let constancy = woundlab::requiv::constancy_search(&g1, params.dv, params.dt, budget)?;
    let u = woundlab::KtSeries::var(Var::U, kt_ctx(k0));
    let lp = laurent_point(&g1, &u, params.precision)?;
    let ok =
        trivial(&p1) && trivial(&p2) && g_trivial && nonzero && constancy.zero_only && lp.on_curve_mod_n && lp.nonzero;
    Ok(Outcome {
        ok,
        result: json!({
            "g1": { "spec": g1.record(), "points": points_value(&p1), "trivial": trivial(&p1) },
            "g2": { "spec": g2.record(), "points": points_value(&p2), "trivial": trivial(&p2) },
            "g_of_k_trivial": g_trivial,
            "deg_bound": d,
            "noncommutative_over_separable_extension": nonzero,
            "constancy": { "dv": constancy.dv, "dt": constancy.dt, "zero_only": constancy.zero_only, "count": constancy.count },
            "laurent": { "precision": lp.precision, "nonzero": lp.nonzero, "on_curve_mod_n": lp.on_curve_mod_n, "defect_valuations": lp.defect_valuations },
        }),
        witnesses: json!({ "commutator": witness, "laurent_x": lp.x, "laurent_y": lp.y }),
    })
}
