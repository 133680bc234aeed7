use woundlab::curves::{make_spec, Variant};
use woundlab::norm::{
    check_norm_laws, conjugate_points, norm_ga, norm_point, sigma_conjugate, ConstantExtension, GroupName, NormGroup,
};
use woundlab::{t_of, Error, FieldDescriptor, Fq, FqPoly, Kt, Ring, Var};

/// Trace to the prime field as the trace of the multiplication matrix on
/// `1, z, .., z^(d-1)`, computed on residues with integer arithmetic.
fn trace_oracle(c: Fq) -> u64 {
    let desc = c.descriptor();
    let (p, d) = (desc.characteristic(), desc.degree());
    let modulus = desc.modulus();
    let mut res = c.residue();
    res.resize(d, 0);
    (0..d).fold(0, |acc, j| {
        let mut prod = vec![0u64; d + j];
        for (i, &a) in res.iter().enumerate() {
            prod[i + j] = a % p;
        }
        for k in (d..prod.len()).rev() {
            let lead = prod[k];
            for i in 0..d {
                prod[k - d + i] = (prod[k - d + i] + lead * (p - modulus[i] % p)) % p;
            }
            prod[k] = 0;
        }
        (acc + prod[j]) % p
    })
}

fn prime_residue(c: &Kt) -> u64 {
    let a = c.as_constant().expect("constant");
    assert!(a.in_prime_field());
    a.residue().first().copied().unwrap_or(0)
}

#[test]
fn norm_of_constants_is_the_trace() {
    for desc in [
        FieldDescriptor::gf4(),
        FieldDescriptor::gf8(),
        FieldDescriptor::gf9(),
        FieldDescriptor::of_degree(3, 3).unwrap(),
    ] {
        let e = ConstantExtension::over_prime_field(desc);
        for a in desc.elements() {
            let nu = norm_ga(&e, &Kt::constant(Var::T, a));
            assert_eq!(prime_residue(&nu), trace_oracle(a), "{a} in {desc}");
        }
    }
}

#[test]
fn norm_is_coefficientwise_on_polynomials() {
    let f9 = FieldDescriptor::gf9();
    let e = ConstantExtension::over_prime_field(f9);
    for a in f9.elements().step_by(2) {
        for b in f9.elements().step_by(3) {
            let x = Kt::from_poly(FqPoly::new(Var::T, f9, vec![b, a]));
            let nu = norm_ga(&e, &x);
            let expect = Kt::from_poly(FqPoly::new(
                Var::T,
                f9,
                vec![f9.int(trace_oracle(b) as i64), f9.int(trace_oracle(a) as i64)],
            ));
            assert_eq!(nu, expect);
        }
    }
}

#[test]
fn sigma_has_order_r() {
    let f27 = FieldDescriptor::of_degree(3, 3).unwrap();
    let e = ConstantExtension::over_prime_field(f27);
    let x = Kt::from_poly(FqPoly::new(Var::T, f27, vec![f27.generator(), f27.int(2), f27.generator().pow(5)]));
    assert_ne!(sigma_conjugate(&e, 1, &x), x);
    assert_eq!(sigma_conjugate(&e, 3, &x), x);
    assert_eq!(e.automorphisms().len(), 3);
}

#[test]
fn intermediate_base_field() {
    // F_81(t) over F_9(t).
    let f81 = FieldDescriptor::of_degree(3, 4).unwrap();
    let e = ConstantExtension::new(f81, 2).unwrap();
    assert_eq!((e.q(), e.r), (9, 2));
    assert_eq!(e.base_elements().len(), 9);
    assert!(check_norm_laws(&NormGroup::Ga, &e, 30, 4).unwrap().all_pass());
    assert!(ConstantExtension::new(f81, 3).is_err());
}

#[test]
fn laws_for_all_groups() {
    for (ext, p, m) in [(FieldDescriptor::gf9(), 3, 1), (FieldDescriptor::gf8(), 2, 1), (FieldDescriptor::gf4(), 2, 2)]
    {
        let e = ConstantExtension::over_prime_field(ext);
        let spec = make_spec(Variant::Endo1, p, ext, m, m, ext.one(), ext.one()).unwrap();
        for g in [NormGroup::Ga, NormGroup::Ga2, NormGroup::curve(&e, spec).unwrap()] {
            let r = check_norm_laws(&g, &e, 25, 9).unwrap();
            assert!(r.all_pass(), "{} over {ext}: {:?}", g.name(), r.failures);
        }
    }
}

#[test]
fn curve_norm_is_rational() {
    let f9 = FieldDescriptor::gf9();
    let e = ConstantExtension::over_prime_field(f9);
    let spec = make_spec(Variant::Endo1, 3, f9, 1, 1, f9.one(), f9.one()).unwrap();
    let t = t_of(f9);
    let y = t.mul(&Kt::constant(Var::T, f9.generator())).add(&t.pow(2));
    let cp = conjugate_points(&e, &spec, &[y]).unwrap();
    assert_eq!(cp.algebra.dim(), 9);
    let nu = norm_point(&e, &spec, &cp.perm, &cp.points[0]).unwrap();
    assert!(spec.contains(&nu));
}

#[test]
fn group_names() {
    assert_eq!("ga".parse::<GroupName>().unwrap(), GroupName::Ga);
    assert_eq!("endo1".parse::<GroupName>().unwrap(), GroupName::Curve(Variant::Endo1));
    for s in ["endo", "gabber", "twisted"] {
        assert!(matches!(s.parse::<GroupName>(), Err(Error::Config(_))));
    }
}

#[test]
fn curve_must_be_over_k() {
    let f9 = FieldDescriptor::gf9();
    let f3 = FieldDescriptor::prime(3).unwrap();
    let e = ConstantExtension::over_prime_field(f9);
    let over_f3 = make_spec(Variant::Endo1, 3, f3, 1, 1, f3.one(), f3.one()).unwrap();
    assert!(NormGroup::curve(&e, over_f3).is_err());
    let g = f9.generator();
    let twisted = make_spec(Variant::Rosenlicht, 3, f9, 1, 1, g, f9.one()).unwrap();
    assert!(NormGroup::curve(&e, twisted).is_err());
}
