//! Characteristic 2: the twisted extension `G_zeta` over `F_4(t)` and its
//! descent to `F_2(t)` along `phi(g1, g2) = (g1 + f(g2), g2)`.
//!
//! The descended group is handled through its points: `G(A)` is the set of
//! `g` in `G_zeta(A (x) F_4)` fixed by `s(g) = phi^-1(sigma(g))`.

use std::sync::Arc;

use serde::Serialize;

use crate::arith::EtaleAlgebra;
use crate::central_ext::{
    free_points, make_pairing, ExtElt, ExtGroup, ExtRecord, IdentityReport, Pairing, PairingKind, PairingMap,
    SampledReport,
};
use crate::curves::{
    adjoin_point, make_spec, polynomial_point_search, rational_point_search, CurvePoint, CurveSpec, Variant,
};
use crate::sample;
use crate::{config, kt_ctx, Error, Field, FieldDescriptor, Fq, FqAlgebra, Kt, KtAlg, KtAlgebra, KtFree, Result, Ring};

/// `f(x, y) = (x^(p^m + 1), x y^(p^(n-m)))`.
pub fn f_map<R: Ring>(m: u32, n: u32, g: &CurvePoint<R>) -> CurvePoint<R> {
    CurvePoint::new(g.x.frobenius_power(m).mul(&g.x), g.x.mul(&g.y.frobenius_power(n - m)))
}

/// `h(g, g') - (f(g + g') - f(g) - f(g'))` in six free coordinates.
pub fn check_coboundary<H: PairingMap>(h: &H, m: u32, n: u32) -> IdentityReport {
    let g = free_points(h.source().k0, 2);
    let df = f_map(m, n, &g[0].add(&g[1])).sub(&f_map(m, n, &g[0])).sub(&f_map(m, n, &g[1]));
    IdentityReport::from_residuals("coboundary", 4, &[h.apply(&g[0], &g[1]).sub(&df)])
}

/// `h_(sigma zeta) = h_zeta + h`, with `sigma` the squaring map on `F_4`.
pub fn check_twist_relation(h_zeta: &Pairing) -> IdentityReport {
    let zeta = h_zeta.zeta.expect("twisted pairing");
    let h_sigma = h_zeta.with_zeta_unchecked(zeta.frobenius());
    let h = h_zeta.untwisted();
    let g = free_points(h.source().k0, 2);
    let r = h_sigma.apply(&g[0], &g[1]).sub(&h_zeta.apply(&g[0], &g[1])).sub(&h.apply(&g[0], &g[1]));
    IdentityReport::from_residuals("twist_relation", 4, &[r])
}

pub struct DescentDatum {
    pub m: u32,
    pub n: u32,
    /// `F_2`, the constants of `k`.
    pub k: &'static FieldDescriptor,
    /// `F_4`, the constants of `k'`.
    pub kp: &'static FieldDescriptor,
    pub zeta: Fq,
    pub h_zeta: Pairing,
}

impl DescentDatum {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        Self::with_zeta(m, n, FieldDescriptor::gf4().generator())
    }

    pub fn with_zeta(m: u32, n: u32, zeta: Fq) -> Result<Self> {
        if m.is_multiple_of(2) {
            return Err(config(format!("descent needs m odd (got m = {m})")));
        }
        if m > n {
            return Err(config(format!("descent needs m <= n (got m = {m}, n = {n})")));
        }
        let kp = FieldDescriptor::gf4();
        let h_zeta = make_pairing(PairingKind::Twisted, 2, kp, m, n, Some(zeta))?;
        Ok(DescentDatum { m, n, k: FieldDescriptor::prime(2)?, kp, zeta, h_zeta })
    }

    pub fn f<R: Ring>(&self, g2: &CurvePoint<R>) -> CurvePoint<R> {
        f_map(self.m, self.n, g2)
    }

    pub fn g1_spec(&self) -> &CurveSpec {
        self.h_zeta.target()
    }

    pub fn g2_spec(&self) -> &CurveSpec {
        self.h_zeta.source()
    }

    /// The pairing twisted by `sigma^e(zeta)`.
    pub fn h_conjugate(&self, e: u32) -> Pairing {
        self.h_zeta.with_zeta_unchecked(self.zeta.frobenius_power(e))
    }

    pub fn phi<R: Ring>(&self, g: &ExtElt<R>) -> ExtElt<R> {
        ExtElt::new(g.g1.add(&self.f(&g.g2)), g.g2.clone())
    }

    pub fn phi_inv<R: Ring>(&self, g: &ExtElt<R>) -> ExtElt<R> {
        ExtElt::new(g.g1.sub(&self.f(&g.g2)), g.g2.clone())
    }

    /// `sigma^e` on constants; fixes `t` and `k`-rational structure constants.
    pub fn sigma<R: FqAlgebra>(&self, x: &R, e: u32) -> R {
        x.map_constants(&|c| c.frobenius_power(e))
    }

    pub fn sigma_elt<R: FqAlgebra>(&self, g: &ExtElt<R>, e: u32) -> ExtElt<R> {
        ExtElt::new(g.g1.map(|c| self.sigma(c, e)), g.g2.map(|c| self.sigma(c, e)))
    }

    /// `s(g) = phi^-1(sigma(g))`.
    pub fn twisted_action<R: FqAlgebra>(&self, g: &ExtElt<R>) -> ExtElt<R> {
        self.phi_inv(&self.sigma_elt(g, 1))
    }

    pub fn is_fixed<R: FqAlgebra>(&self, g: &ExtElt<R>) -> bool {
        self.twisted_action(g) == *g
    }

    pub fn group(&self) -> ExtGroup<'_, Pairing> {
        ExtGroup::new(&self.h_zeta)
    }
}

/// `phi` is a homomorphism `G_zeta -> G_(sigma zeta)` restricting to the
/// identity on `G1` and inducing the identity on `G2`.
pub fn check_phi_iso(dd: &DescentDatum) -> IdentityReport {
    check_phi_iso_with(dd, |g| f_map(dd.m, dd.n, g))
}

/// As [`check_phi_iso`] with `f` replaced.
pub fn check_phi_iso_with(dd: &DescentDatum, f: impl Fn(&CurvePoint<KtFree>) -> CurvePoint<KtFree>) -> IdentityReport {
    let pts = free_points(dd.kp, 4);
    let g = ExtElt::new(pts[0].clone(), pts[1].clone());
    let g2 = ExtElt::new(pts[2].clone(), pts[3].clone());
    let phi = |e: &ExtElt<KtFree>| ExtElt::new(e.g1.add(&f(&e.g2)), e.g2.clone());
    let src = ExtGroup::new(&dd.h_zeta);
    let h_tgt = dd.h_conjugate(1);
    let tgt = ExtGroup::new(&h_tgt);
    let lhs = phi(&src.mul(&g, &g2));
    let rhs = tgt.mul(&phi(&g), &phi(&g2));
    let zero = CurvePoint::zero(&pts[0].x.ctx());
    let on_g1 = phi(&ExtElt::new(pts[0].clone(), zero.clone()));
    IdentityReport::from_residuals(
        "phi_iso",
        8,
        &[lhs.g1.sub(&rhs.g1), lhs.g2.sub(&rhs.g2), on_g1.g1.sub(&pts[0]), on_g1.g2, phi(&g).g2.sub(&g.g2)],
    )
}

/// `sigma*(phi) o phi = id` for `sigma` the `e`-th power of Frobenius on
/// `F_4`, together with `phi: G_zeta -> G_(sigma zeta)` being a homomorphism
/// and `sigma^2 zeta = zeta`.
pub fn check_descent_datum(dd: &DescentDatum, e: u32) -> IdentityReport {
    let pts = free_points(dd.kp, 4);
    let g = ExtElt::new(pts[0].clone(), pts[1].clone());
    let g2 = ExtElt::new(pts[2].clone(), pts[3].clone());
    let src = ExtGroup::new(&dd.h_zeta);
    let h_tgt = dd.h_conjugate(e);
    let tgt = ExtGroup::new(&h_tgt);
    let hom = dd.phi(&src.mul(&g, &g2));
    let hom_rhs = tgt.mul(&dd.phi(&g), &dd.phi(&g2));
    // sigma*(phi) = sigma o phi o sigma^-1, coefficientwise on the formula
    let sigma_star_phi = |x: &ExtElt<KtFree>| dd.sigma_elt(&dd.phi(&dd.sigma_elt(x, 2 - e % 2)), e);
    let composed = sigma_star_phi(&dd.phi(&g));
    let mut report = IdentityReport::from_residuals(
        "descent_datum",
        8,
        &[hom.g1.sub(&hom_rhs.g1), hom.g2.sub(&hom_rhs.g2), composed.g1.sub(&g.g1), composed.g2.sub(&g.g2)],
    );
    let back = dd.zeta.frobenius_power(2 * e);
    if report.holds && back != dd.zeta {
        report.holds = false;
        report.residual = format!("sigma^2(zeta) - zeta = {}", back.sub(&dd.zeta));
    }
    report
}

/// Points of `G_zeta(A (x) F_4)` built over a `k`-algebra `A` presented
/// with two adjoined `G2` points and the roots `d_i` of
/// `t D^(2^m) + D + a_i = 0` needed to lift them to `s`-fixed elements.
pub struct FixedLiftAlgebra {
    pub algebra: Arc<KtAlgebra>,
    /// Dimension of `A` over `F_2(t)`.
    pub dim: u64,
    pub y_values: [Kt; 2],
    pub g2: [CurvePoint<KtAlg>; 2],
    pub lifts: [ExtElt<KtAlg>; 2],
}

fn embed_f2(kp: &'static FieldDescriptor) -> impl Fn(&Kt) -> Kt {
    let ctx = kt_ctx(kp);
    move |c: &Kt| c.map_coeffs(ctx.base, |a| kp.int(a.residue().first().copied().unwrap_or(0) as i64))
}

impl DescentDatum {
    /// Builds the lift algebra for two `y`-values in `F_2(t)`.
    pub fn lift_algebra(&self, y1: &Kt, y2: &Kt) -> Result<FixedLiftAlgebra> {
        let one = self.k.one();
        let g2_k = make_spec(Variant::Endo2, 2, self.k, self.m, self.n, one, one)?;
        let a1 = adjoin_point(&g2_k, y1, 0)?.algebra;
        let a2 = adjoin_point(&g2_k, y2, 0)?.algebra;
        let base = EtaleAlgebra::tensor(&a1, &a2)?;
        let pts = [
            CurvePoint::new(base.gen(0), base.from_base(y1.clone())),
            CurvePoint::new(base.gen(1), base.from_base(y2.clone())),
        ];
        let q = 1usize << self.m;
        let t_inv = crate::t_of(self.k).inv()?;
        let mut alg = base.clone();
        for pt in &pts {
            let a = self.f(pt).x.embed(&alg, 0)?;
            let mut coeffs = vec![alg.zero(); q + 1];
            coeffs[0] = a.mul(&alg.from_base(t_inv.clone()));
            coeffs[1] = alg.from_base(t_inv.clone());
            coeffs[q] = alg.one();
            alg = EtaleAlgebra::extend(&alg, &coeffs)?;
        }
        let dim = alg.dim();
        let embed = embed_f2(self.kp);
        let big = alg.base_change(kt_ctx(self.kp), &embed);
        let lift = |x: &KtAlg| -> Result<KtAlg> { Ok(x.embed(&alg, 0)?.base_change(&big, &embed)) };
        let zeta = big.from_base(Kt::from_fq(&kt_ctx(self.kp), self.zeta));
        let mut g2s = Vec::new();
        let mut lifts = Vec::new();
        for (i, pt) in pts.iter().enumerate() {
            let g2 = CurvePoint::new(lift(&pt.x)?, lift(&pt.y)?);
            let fp = self.f(&g2);
            let d = big.gen(2 + i);
            let g1 = CurvePoint::new(zeta.mul(&fp.x).add(&d), zeta.mul(&fp.y));
            lifts.push(ExtElt::new(g1, g2.clone()));
            g2s.push(g2);
        }
        let [g2a, g2b]: [CurvePoint<KtAlg>; 2] = g2s.try_into().expect("two points");
        let [la, lb]: [ExtElt<KtAlg>; 2] = lifts.try_into().expect("two lifts");
        Ok(FixedLiftAlgebra { algebra: big, dim, y_values: [y1.clone(), y2.clone()], g2: [g2a, g2b], lifts: [la, lb] })
    }
}

/// Non-commuting `s`-fixed elements: a witness that the descended group is
/// non-commutative over a separable `k`-algebra.
#[derive(Debug, Clone, Serialize)]
pub struct DescentWitness {
    pub algebra_moduli: Vec<String>,
    /// Over `F_2(t)`; the same presentation over `F_4(t)` after base change.
    pub dimension: u64,
    pub y_values: [String; 2],
    pub g: ExtRecord,
    pub g_prime: ExtRecord,
    pub commutator: ExtRecord,
    pub nonzero: bool,
    pub on_curves: bool,
    /// `g`, `g'` and the commutator are all fixed by `s`.
    pub fixed: bool,
    pub matches_formula: bool,
    #[serde(skip)]
    pub elements: Option<(ExtElt<KtAlg>, ExtElt<KtAlg>, ExtElt<KtAlg>)>,
}

pub fn descended_witness(dd: &DescentDatum, y_values: Option<[Kt; 2]>) -> Result<DescentWitness> {
    let [y1, y2] = y_values.unwrap_or_else(|| {
        let t = crate::t_of(dd.k);
        [t.clone(), t.add(&t.one_like())]
    });
    let la = dd.lift_algebra(&y1, &y2)?;
    let group = dd.group();
    let [g, g2] = &la.lifts;
    let c = group.commutator(g, g2);
    let on_curves = group.contains(g) && group.contains(g2) && group.contains(&c);
    let fixed = dd.is_fixed(g) && dd.is_fixed(g2) && dd.is_fixed(&c);
    let w = DescentWitness {
        algebra_moduli: la.algebra.moduli_strings(),
        dimension: la.dim,
        y_values: [y1.to_string(), y2.to_string()],
        g: g.record(),
        g_prime: g2.record(),
        commutator: c.record(),
        nonzero: !c.is_identity(),
        on_curves,
        fixed,
        matches_formula: c == group.expected_commutator(g, g2),
        elements: Some((g.clone(), g2.clone(), c.clone())),
    };
    if !w.nonzero {
        return Err(Error::Verification("lifted elements commute".into()));
    }
    Ok(w)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub deg_bound: usize,
    pub g1_points: Vec<[String; 2]>,
    pub g2_points: Vec<[String; 2]>,
    pub fixed: Vec<ExtRecord>,
    pub only_identity: bool,
    /// `s(s(g)) = g` on every enumerated element.
    pub involution: bool,
}

/// `G(k)`: the `s`-fixed elements of `G_zeta(k')` among points whose
/// coordinates have height `<= deg_bound`. `G1` is searched with rational
/// coordinates when `2^m = 2`, where it has non-polynomial points.
pub fn twisted_fixed_points(dd: &DescentDatum, deg_bound: usize, budget: u128) -> Result<FixedPointReport> {
    let g1_spec = dd.g1_spec();
    let g1 = if g1_spec.polynomial_search_suffices() {
        polynomial_point_search(g1_spec, deg_bound, budget)?
    } else {
        rational_point_search(g1_spec, deg_bound, budget)?
    };
    let g2 = polynomial_point_search(dd.g2_spec(), deg_bound, budget)?;
    let mut fixed = Vec::new();
    let mut involution = true;
    for b in &g2 {
        for a in &g1 {
            let g = ExtElt::new(a.clone(), b.clone());
            let s = dd.twisted_action(&g);
            involution &= dd.twisted_action(&s) == g;
            if s == g {
                fixed.push(g.record());
            }
        }
    }
    let zero = ["0".to_string(), "0".to_string()];
    let only_identity = fixed.len() == 1 && fixed[0].g1 == zero && fixed[0].g2 == zero;
    Ok(FixedPointReport {
        deg_bound,
        g1_points: g1.iter().map(|p| p.strings()).collect(),
        g2_points: g2.iter().map(|p| p.strings()).collect(),
        fixed,
        only_identity,
        involution,
    })
}

/// Sampled properties of `s` over a lift algebra: involution and
/// multiplicativity on random elements of `G_zeta`, closure of the fixed
/// subgroup under products and inverses.
pub fn check_twisted_action(dd: &DescentDatum, trials: usize, seed: u64) -> Result<Vec<SampledReport>> {
    let mut rng = sample::rng(seed);
    let t = crate::t_of(dd.k);
    let la = dd.lift_algebra(&t, &t.add(&t.one_like()))?;
    let group = dd.group();
    let h = &dd.h_zeta;
    let [p, q] = &la.g2;
    let zeta = dd.zeta;
    let g2_basis = [p.clone(), q.clone(), h.scalar_action(zeta, p), h.scalar_action(zeta, q)];
    let g1_basis = [la.lifts[0].g1.clone(), la.lifts[1].g1.clone(), dd.f(p), dd.f(q), h.untwisted().apply(p, q)];
    let random_elt = |rng: &mut sample::SampleRng| {
        let pick = |rng: &mut sample::SampleRng, basis: &[CurvePoint<KtAlg>]| {
            let mut acc = CurvePoint::zero(&p.x.ctx());
            for b in basis {
                if sample::small_int(rng, 2) == 1 {
                    acc = acc.add(b);
                }
            }
            acc
        };
        ExtElt::new(pick(rng, &g1_basis), pick(rng, &g2_basis))
    };
    let random_fixed = |rng: &mut sample::SampleRng| {
        let mut acc = ExtElt::identity(&p.x.ctx());
        for _ in 0..3 {
            let l = &la.lifts[sample::small_int(rng, 2) as usize];
            let l = if sample::small_int(rng, 2) == 1 { group.inv(l) } else { l.clone() };
            acc = group.mul(&acc, &l);
        }
        acc
    };
    let mut reports = Vec::new();
    for name in ["involution", "multiplicative", "fixed_closure"] {
        let mut passed = 0;
        let mut failures = Vec::new();
        for trial in 0..trials {
            let ok = match name {
                "involution" => {
                    let g = random_elt(&mut rng);
                    dd.twisted_action(&dd.twisted_action(&g)) == g && group.contains(&g)
                }
                "multiplicative" => {
                    let (a, b) = (random_elt(&mut rng), random_elt(&mut rng));
                    dd.twisted_action(&group.mul(&a, &b)) == group.mul(&dd.twisted_action(&a), &dd.twisted_action(&b))
                }
                _ => {
                    let (a, b) = (random_fixed(&mut rng), random_fixed(&mut rng));
                    dd.is_fixed(&a) && dd.is_fixed(&group.mul(&a, &b)) && dd.is_fixed(&group.inv(&a))
                }
            };
            if ok {
                passed += 1;
            } else if failures.len() < 5 {
                failures.push(format!("trial {trial}"));
            }
        }
        reports.push(SampledReport { check: name.into(), trials, passed, seed, failures });
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_values() {
        let f4 = FieldDescriptor::gf4();
        let g = free_points(f4, 1);
        let v = f_map(1, 1, &g[0]);
        assert_eq!(v.strings(), ["x^3".to_string(), "x*y".to_string()]);
        let zero = CurvePoint::new(g[0].x.zero_like(), g[0].y.clone());
        assert!(f_map(1, 1, &zero).is_zero());
    }

    #[test]
    fn even_m_rejected() {
        assert!(DescentDatum::new(2, 2).is_err());
        assert!(DescentDatum::new(3, 1).is_err());
    }
}
