use woundlab::arith::parse::parse_series;
use woundlab::arith::{Poly, RatFunc, SeriesCtx};
use woundlab::curves::{make_spec, CurveSpec, Variant};
use woundlab::requiv::{
    at_u_zero, chain_from_records, chain_records, check_chain, check_r_link, constancy_search,
    constancy_search_affine_line, evaluate_map, homotopy_uv, laurent_point, make_rational_map, specialize_u, u_ctx,
    RChainWitness, RationalMap, Target,
};
use woundlab::{kt_ctx, t_of, Error, Field, FieldDescriptor, Kt, Ktu, Ring, Var};

fn f3() -> &'static FieldDescriptor {
    FieldDescriptor::prime(3).unwrap()
}

fn endo1() -> CurveSpec {
    make_spec(Variant::Endo1, 3, f3(), 1, 1, f3().one(), f3().one()).unwrap()
}

/// `c0 + c1 v` over `k`.
fn linear(c0: &Kt, c1: &Kt) -> RatFunc<Kt> {
    RatFunc::from_poly(Poly::new(Var::V, kt_ctx(f3()), vec![c0.clone(), c1.clone()]))
}

#[test]
fn line_between_two_points() {
    let t = t_of(f3());
    let (x, y) = (vec![t.clone(), t.zero_like()], vec![t.pow(2), t.one_like()]);
    let coords = vec![linear(&x[0], &y[0].sub(&x[0])), linear(&x[1], &y[1].sub(&x[1]))];
    let f = make_rational_map(Target::Ambient(2), coords).unwrap();
    assert!(check_r_link(&f, &x, &y).linked);
    assert!(!check_r_link(&f, &y, &x).linked);
}

#[test]
fn map_validation() {
    let t = t_of(f3());
    let c = linear(&t, &t);
    assert!(matches!(make_rational_map(Target::Ambient(2), vec![c.clone()]), Err(Error::Config(_))));
    // (v, 0) is not on X = t X^3 + Y^3.
    let zero = linear(&t.zero_like(), &t.zero_like());
    let bad = make_rational_map(Target::Curve(endo1()), vec![linear(&t.zero_like(), &t.one_like()), zero.clone()]);
    assert!(matches!(bad, Err(Error::Verification(_))));
    assert!(make_rational_map(Target::Curve(endo1()), vec![zero.clone(), zero]).is_ok());
}

#[test]
fn pole_at_one_breaks_the_link() {
    let t = t_of(f3());
    let k = kt_ctx(f3());
    // 1 / (v - 1)
    let den = Poly::new(Var::V, k.clone(), vec![t.one_like().neg(), t.one_like()]);
    let f = RatFunc::new(Poly::one(den.poly_ctx()), den).unwrap();
    let map = make_rational_map(Target::Ambient(1), vec![f]).unwrap();
    assert_eq!(evaluate_map(&map, &Kt::one(&k)), None);
    let r = check_r_link(&map, &[t.one_like().neg()], &[t.zero_like()]);
    assert!(r.defined_at_0 && !r.defined_at_1 && !r.linked);

    let w = RChainWitness { points: vec![vec![t.one_like().neg()], vec![t.zero_like()]], maps: vec![map] };
    let rep = check_chain(&w, &w.points[0].clone(), &w.points[1].clone());
    assert_eq!((rep.passed, rep.failed_at), (false, Some(0)));
    assert_eq!(rep.reason.as_deref(), Some("undefined at 1"));
}

fn homotopy_chain() -> (Vec<Ktu>, RChainWitness<Ktu>) {
    let uc = u_ctx(f3());
    let u = Ktu::x(Var::U, kt_ctx(f3()));
    let z = vec![u.clone(), u.pow(2)];
    let phi = homotopy_uv(Target::Ambient(2), &z).unwrap();
    let constant =
        make_rational_map(Target::Ambient(2), z.iter().map(|c| RatFunc::constant(Var::V, c.clone())).collect())
            .unwrap();
    let zero = vec![Ktu::zero(&uc), Ktu::zero(&uc)];
    (z.clone(), RChainWitness { points: vec![zero, z.clone(), z], maps: vec![phi, constant] })
}

#[test]
fn homotopy_endpoints() {
    let (z, w) = homotopy_chain();
    let uc = u_ctx(f3());
    let phi: &RationalMap<Ktu> = &w.maps[0];
    let z0: Vec<Ktu> = at_u_zero(&z).unwrap().into_iter().map(|c| Ktu::constant(Var::U, c)).collect();
    assert_eq!(evaluate_map(phi, &Ktu::zero(&uc)), Some(z0));
    assert_eq!(evaluate_map(phi, &Ktu::one(&uc)), Some(z.clone()));
    assert!(check_chain(&w, &w.points[0].clone(), &z).passed);
}

#[test]
fn homotopy_needs_z_defined_at_zero() {
    let u = Ktu::x(Var::U, kt_ctx(f3()));
    let z = vec![u.inv().unwrap(), u.clone()];
    assert!(matches!(homotopy_uv(Target::Ambient(2), &z), Err(Error::Config(_))));
}

#[test]
fn specialization_at_several_points() {
    let (_, w) = homotopy_chain();
    let t = t_of(f3());
    for u0 in [t.one_like(), t.clone(), t.pow(2).add(&t.one_like())] {
        let s = specialize_u(&w, Some(u0.clone()), f3()).unwrap();
        let (first, last) = (s.chain.points[0].clone(), s.chain.points[2].clone());
        assert_eq!(last, vec![u0.clone(), u0.pow(2)]);
        assert!(check_chain(&s.chain, &first, &last).passed);
    }
    assert!(specialize_u(&w, None, f3()).is_ok());
}

#[test]
fn bad_locus_is_rejected() {
    let uc = u_ctx(f3());
    let u = Ktu::x(Var::U, kt_ctx(f3()));
    // z = (1/(u - 1), 0): defined at u = 0, not at u = 1.
    let z = vec![u.sub(&u.one_like()).inv().unwrap(), Ktu::zero(&uc)];
    let phi = homotopy_uv(Target::Ambient(2), &z).unwrap();
    let start: Vec<Ktu> = at_u_zero(&z).unwrap().into_iter().map(|c| Ktu::constant(Var::U, c)).collect();
    let w = RChainWitness { points: vec![start, z.clone()], maps: vec![phi] };
    let one = Kt::one(&kt_ctx(f3()));
    match specialize_u(&w, Some(one), f3()) {
        Err(Error::Config(msg)) => assert!(msg.contains("bad locus"), "{msg}"),
        other => panic!("expected a bad-locus error, got {:?}", other.map(|s| s.u0)),
    }
    let s = specialize_u(&w, None, f3()).unwrap();
    assert!(!s.u0.sub(&s.u0.one_like()).is_zero());
}

#[test]
fn chain_records_roundtrip() {
    let (_, w) = homotopy_chain();
    let records = chain_records(&w);
    assert!(records.last().unwrap().map_coords.is_empty());
    let json = serde_json::to_string(&records).unwrap();
    let back = chain_from_records(f3(), &serde_json::from_str::<Vec<_>>(&json).unwrap()).unwrap();
    assert_eq!(back.points, w.points);
    assert_eq!(chain_records(&back), records);
}

#[test]
fn constancy_on_the_curve() {
    let r = constancy_search(&endo1(), 2, 1, u128::MAX).unwrap();
    assert!(r.zero_only && r.count == 1 && r.nonconstant == 0);
    let r = constancy_search(&endo1(), 3, 2, u128::MAX).unwrap();
    assert!(r.zero_only);
}

#[test]
fn constancy_control_on_the_line() {
    let r = constancy_search_affine_line(f3(), 1, 1, u128::MAX).unwrap();
    // Every a(t) + b(t) v with b != 0: 9 * 8.
    assert_eq!(r.nonconstant, 72);
    assert!(!r.constant_only);
}

#[test]
fn constancy_budget() {
    assert!(matches!(constancy_search(&endo1(), 4, 3, 1000), Err(Error::Budget { .. })));
}

#[test]
fn laurent_point_of_endo1() {
    let sctx = SeriesCtx { var: Var::U, base: kt_ctx(f3()) };
    let y0 = parse_series::<Kt>("u", &sctx).unwrap();
    let lp = laurent_point(&endo1(), &y0, 81).unwrap();
    assert_eq!(lp.x, "u^3+t*u^9+t^4*u^27+O(u^81)");
    assert_eq!(lp.defect_valuations, vec![3, 9, 27, 81]);
    assert!(lp.on_curve_mod_n && lp.nonzero);

    let y1 = parse_series::<Kt>("u+t*u^2", &sctx).unwrap();
    let lp = laurent_point(&endo1(), &y1, 30).unwrap();
    assert!(lp.on_curve_mod_n);
    let unit = parse_series::<Kt>("1+u", &sctx).unwrap();
    assert!(laurent_point(&endo1(), &unit, 10).is_err());
}
