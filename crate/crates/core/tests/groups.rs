use woundlab::central_ext::{
    check_biadditive, check_cocycle, check_containment, check_group_laws, check_symmetry, free_points, make_pairing,
    noncommutativity_witness, Pairing, PairingKind, PairingMap,
};
use woundlab::curves::{
    adjoin_point, make_spec, ode_certificate, polynomial_point_search, rational_point_search, substituted_modulus,
    CurvePoint, CurveSpec, Variant,
};
use woundlab::descent::{
    check_coboundary, check_descent_datum, check_phi_iso, check_phi_iso_with, check_twist_relation,
    check_twisted_action, descended_witness, twisted_fixed_points, DescentDatum,
};
use woundlab::{t_of, Error, Field, FieldDescriptor, FqAlgebra, FqPoly, Kt, KtFree, Ring, Var};

fn f3() -> &'static FieldDescriptor {
    FieldDescriptor::prime(3).unwrap()
}

fn endo1(p: u64, m: u32) -> CurveSpec {
    let k0 = FieldDescriptor::prime(p).unwrap();
    make_spec(Variant::Endo1, p, k0, m, m, k0.one(), k0.one()).unwrap()
}

#[test]
fn search_matches_brute_force() {
    // Every pair of polynomials of degree <= 2 over F_3, tested directly.
    let spec = endo1(3, 1);
    let polys: Vec<Kt> = FqPoly::enumerate(Var::T, f3(), 2).into_iter().map(Kt::from_poly).collect();
    let mut brute = Vec::new();
    for x in &polys {
        for y in &polys {
            if spec.residual(x, y).is_zero() {
                brute.push((x.clone(), y.clone()));
            }
        }
    }
    let found = polynomial_point_search(&spec, 2, u128::MAX).unwrap();
    assert_eq!(brute.len(), found.len());
    assert!(found.iter().all(|p| p.is_zero()));
}

#[test]
fn rational_points_of_small_endo1() {
    // p^m = 2: X = t X^2 + Y^2 has the k-point (1/t, 0).
    let spec = endo1(2, 1);
    let pts = rational_point_search(&spec, 1, u128::MAX).unwrap();
    let f2 = FieldDescriptor::prime(2).unwrap();
    let inv_t = t_of(f2).inv().unwrap();
    assert!(pts.iter().any(|p| p.x == inv_t && p.y.is_zero()));
    assert!(pts.iter().all(|p| spec.contains(p)));
}

#[test]
fn search_budget_is_enforced() {
    let spec = endo1(3, 1);
    match rational_point_search(&spec, 6, 10) {
        Err(Error::Budget { budget, .. }) => assert_eq!(budget, 10),
        other => panic!("expected a budget error, got {other:?}"),
    }
}

#[test]
fn invalid_parameters() {
    let k0 = f3();
    assert!(make_spec(Variant::Endo2, 3, k0, 2, 1, k0.one(), k0.one()).is_err());
    assert!(make_spec(Variant::Rosenlicht, 3, k0, 1, 1, k0.zero(), k0.one()).is_err());
    assert!(make_spec(Variant::Endo1, 2, k0, 1, 1, k0.one(), k0.one()).is_err());
    let f2 = FieldDescriptor::prime(2).unwrap();
    assert!(make_spec(Variant::Rosenlicht, 2, f2, 1, 1, f2.one(), f2.one()).is_err());
}

#[test]
fn ode_rules_out_nonconstant_x() {
    let spec = endo1(3, 1);
    let t = t_of(f3());
    for x in [t.clone(), t.pow(2).add(&t), t.inv().unwrap()] {
        let cert = ode_certificate(&spec, &x);
        assert!(!cert.holds, "{x}");
        assert!(cert.argument.unwrap().contains("no solution"));
    }
}

#[test]
fn adjoined_point_at_t() {
    let spec = endo1(3, 1);
    let t = t_of(f3());
    let f = substituted_modulus(&spec, &t).unwrap();
    // X = t X^3 + t^3, made monic: X^3 - t^-1 X + t^2.
    let tinv = t.inv().unwrap();
    let expected = [t.pow(2), tinv.neg(), t.zero_like(), t.one_like()];
    assert_eq!(f.coeffs(), &expected[..]);
    let adj = adjoin_point(&spec, &t, 1).unwrap();
    assert_eq!(adj.algebra.dim(), 3);
    assert!(spec.contains(&adj.point));
    assert_eq!(adj.roots.as_deref().map(|r| r.len()), Some(0));
}

fn pairings() -> Vec<(Pairing, bool)> {
    let f2 = FieldDescriptor::prime(2).unwrap();
    let f4 = FieldDescriptor::gf4();
    vec![
        (make_pairing(PairingKind::Endo, 3, f3(), 1, 1, None).unwrap(), false),
        (make_pairing(PairingKind::Endo, 3, f3(), 1, 2, None).unwrap(), false),
        (make_pairing(PairingKind::Gabber, 3, f3(), 1, 1, None).unwrap(), false),
        (make_pairing(PairingKind::Endo, 2, f2, 1, 1, None).unwrap(), true),
        (make_pairing(PairingKind::Twisted, 2, f4, 1, 1, Some(f4.generator())).unwrap(), false),
    ]
}

#[test]
fn pairing_identities() {
    for (h, symmetric) in pairings() {
        assert!(check_biadditive(&h).holds, "{:?}", h.record());
        assert!(check_cocycle(&h).holds, "{:?}", h.record());
        assert!(check_containment(&h, 30, 1).unwrap().all_pass(), "{:?}", h.record());
        assert_eq!(check_symmetry(&h, false).unwrap().symmetric, symmetric);
    }
}

#[test]
fn group_laws_hold() {
    for (h, _) in pairings() {
        let r = check_group_laws(&h, 40, 3).unwrap();
        assert!(r.all_pass(), "{:?}: {:?}", h.record(), r.failures);
    }
}

/// `h(g, zeta . g')` with `zeta` scaling both coordinates of `g'`.
struct CoordinatewiseTwist(Pairing);

impl PairingMap for CoordinatewiseTwist {
    fn source(&self) -> &CurveSpec {
        self.0.source()
    }
    fn target(&self) -> &CurveSpec {
        self.0.target()
    }
    fn apply<R: FqAlgebra>(&self, g: &CurvePoint<R>, h: &CurvePoint<R>) -> CurvePoint<R> {
        let z = self.0.zeta.unwrap();
        self.0.untwisted().apply(g, &CurvePoint::new(h.x.scale_fq(z), h.y.scale_fq(z)))
    }
}

#[test]
fn coordinatewise_scaling_leaves_g1() {
    let f4 = FieldDescriptor::gf4();
    let h = make_pairing(PairingKind::Twisted, 2, f4, 1, 1, Some(f4.generator())).unwrap();
    let naive = CoordinatewiseTwist(h);
    assert!(check_biadditive(&naive).holds);
    let r = check_containment(&naive, 20, 0).unwrap();
    assert!(r.passed < r.trials);
}

#[test]
fn witnesses_commute_only_when_symmetric() {
    let endo = make_pairing(PairingKind::Endo, 3, f3(), 1, 1, None).unwrap();
    let w = noncommutativity_witness(&endo, None).unwrap();
    assert!(w.nonzero && w.matches_formula);
    let (g, g2, c) = w.elements.unwrap();
    assert!(endo.source().contains(&g.g2) && endo.source().contains(&g2.g2));
    assert!(c.g2.is_zero() && endo.target().contains(&c.g1));

    let f2 = FieldDescriptor::prime(2).unwrap();
    let sym = make_pairing(PairingKind::Endo, 2, f2, 1, 1, None).unwrap();
    assert!(matches!(noncommutativity_witness(&sym, None), Err(Error::Verification(_))));
}

#[test]
fn twisted_needs_primitive_cube_root() {
    let f4 = FieldDescriptor::gf4();
    assert!(make_pairing(PairingKind::Twisted, 2, f4, 1, 1, Some(f4.one())).is_err());
    assert!(make_pairing(PairingKind::Twisted, 2, f4, 2, 2, Some(f4.generator())).is_err());
    assert!(DescentDatum::new(2, 2).is_err());
    assert!(DescentDatum::new(3, 1).is_err());
}

#[test]
fn descent_identities() {
    for (m, n) in [(1, 1), (1, 2), (3, 3)] {
        let dd = DescentDatum::new(m, n).unwrap();
        assert!(check_coboundary(&dd.h_zeta.untwisted(), m, n).holds, "m={m} n={n}");
        assert!(check_twist_relation(&dd.h_zeta).holds, "m={m} n={n}");
        assert!(check_phi_iso(&dd).holds, "m={m} n={n}");
        assert!(check_descent_datum(&dd, 1).holds, "m={m} n={n}");
    }
}

#[test]
fn descent_controls_fail() {
    let dd = DescentDatum::new(1, 1).unwrap();
    // Without the Galois twist the cocycle condition breaks.
    assert!(!check_descent_datum(&dd, 0).holds);
    // phi without the f-correction is not a homomorphism.
    let zero = |g: &CurvePoint<KtFree>| CurvePoint::zero(&g.x.ctx());
    assert!(!check_phi_iso_with(&dd, zero).holds);
}

#[test]
fn descended_group_is_noncommutative() {
    let dd = DescentDatum::new(1, 1).unwrap();
    let w = descended_witness(&dd, None).unwrap();
    assert!(w.nonzero && w.fixed && w.on_curves && w.matches_formula);
    for r in check_twisted_action(&dd, 10, 5).unwrap() {
        assert!(r.all_pass(), "{}", r.check);
    }
}

#[test]
fn fixed_points_over_k() {
    let dd3 = DescentDatum::new(3, 3).unwrap();
    let r = twisted_fixed_points(&dd3, 2, u128::MAX).unwrap();
    assert!(r.only_identity && r.involution);
    // For m = 1, G1 = {X = t X^2 + Y^2} has non-trivial k-points, and
    // the fixed elements include some (g1, 0) with g1 != 0.
    let dd1 = DescentDatum::new(1, 1).unwrap();
    let r = twisted_fixed_points(&dd1, 2, u128::MAX).unwrap();
    assert!(!r.only_identity && r.involution);
    let zero = ["0".to_string(), "0".to_string()];
    assert!(r.fixed.iter().any(|g| g.g2 == zero && g.g1 != zero));
}

#[test]
fn free_point_names() {
    let g = free_points(f3(), 2);
    assert_eq!(g[1].x.to_string(), "x'");
    assert_eq!(g[0].y.to_string(), "y");
}
