//! The norm `R_(K/k)(C_K) -> C` on points, for constant extensions
//! `K = F_(q^r)(t)` of `k = F_q(t)` and commutative `C`.
//!
//! Conjugates of a `K`-point defined over `K[X]/(f)` live in
//! `K[X_0, .., X_(r-1)]/(f, sigma f, ..)`, on which `sigma` acts
//! semilinearly by `X_i -> X_(i+1)`; the norm is the sum of the conjugates.

use std::str::FromStr;

use serde::Serialize;

use crate::arith::{EtaleAlgebra, Poly};
use crate::curves::{substituted_modulus, CurvePoint, CurveSpec, Variant};
use crate::sample::{self, SampleRng};
use crate::{config, kt_ctx, Error, FieldDescriptor, Fq, FqAlgebra, FqPoly, Kt, KtAlg, Result, Ring, Var};

/// `K/k` with `K` given by its constant field `F_(p^d)` and `k` by the
/// subfield `F_(p^s)`, `s | d`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantExtension {
    pub ext: &'static FieldDescriptor,
    pub s: u32,
    pub r: u32,
}

impl ConstantExtension {
    pub fn new(ext: &'static FieldDescriptor, s: u32) -> Result<Self> {
        let d = ext.degree() as u32;
        if s == 0 || !d.is_multiple_of(s) {
            return Err(config(format!("F_p^{s} is not a subfield of F_p^{d}")));
        }
        Ok(ConstantExtension { ext, s, r: d / s })
    }

    /// `F_(p^d)(t) / F_p(t)`.
    pub fn over_prime_field(ext: &'static FieldDescriptor) -> Self {
        ConstantExtension { ext, s: 1, r: ext.degree() as u32 }
    }

    pub fn q(&self) -> u64 {
        self.ext.characteristic().pow(self.s)
    }

    /// `sigma^i` on constants, `sigma` the `q`-power Frobenius.
    pub fn sigma(&self, i: u32) -> impl Fn(Fq) -> Fq {
        let e = self.s * (i % self.r);
        move |c: Fq| c.frobenius_power(e)
    }

    /// The Galois group as Frobenius exponents over `F_p`.
    pub fn automorphisms(&self) -> Vec<u32> {
        (0..self.r).map(|i| i * self.s).collect()
    }

    pub fn in_base(&self, c: Fq) -> bool {
        c.frobenius_power(self.s) == c
    }

    pub fn base_elements(&self) -> Vec<Fq> {
        self.ext.elements().filter(|c| self.in_base(*c)).collect()
    }

    pub fn record(&self) -> ExtensionRecord {
        ExtensionRecord { q: self.q(), r: self.r }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionRecord {
    pub q: u64,
    pub r: u32,
}

/// `sigma^i` applied to the constants of `x`; `t` is fixed.
pub fn sigma_conjugate<R: FqAlgebra>(ext: &ConstantExtension, i: u32, x: &R) -> R {
    x.map_constants(&ext.sigma(i))
}

/// `sum_i sigma^i(x)` on `G_a(K)`.
pub fn norm_ga<R: FqAlgebra>(ext: &ConstantExtension, x: &R) -> R {
    (1..ext.r).fold(x.clone(), |acc, i| acc.add(&sigma_conjugate(ext, i, x)))
}

/// The commutative targets: `G_a`, `G_a^2` and the curve groups.
#[derive(Debug, Clone, Copy)]
pub enum NormGroup {
    Ga,
    Ga2,
    Curve(CurveSpec),
}

/// Names accepted for `C` besides the curve variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupName {
    Ga,
    Ga2,
    Curve(Variant),
}

impl FromStr for GroupName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ga" | "Ga" => Ok(GroupName::Ga),
            "ga2" | "Ga2" => Ok(GroupName::Ga2),
            "endo" | "gabber" | "twisted" | "extension" => {
                Err(config(format!("{s}: the norm needs a commutative group; central extensions are not")))
            }
            v => v.parse::<Variant>().map(GroupName::Curve),
        }
    }
}

impl NormGroup {
    pub fn name(&self) -> String {
        match self {
            NormGroup::Ga => "ga".into(),
            NormGroup::Ga2 => "ga2".into(),
            NormGroup::Curve(s) => s.variant.to_string(),
        }
    }

    /// A curve over `K` must be defined over `k`.
    pub fn curve(ext: &ConstantExtension, spec: CurveSpec) -> Result<Self> {
        if !std::ptr::eq(spec.k0, ext.ext) {
            return Err(config("the curve must be given over the constant field of K"));
        }
        if !ext.in_base(spec.a) || !ext.in_base(spec.b) {
            return Err(config("the curve coefficients must lie in the constants of k"));
        }
        Ok(NormGroup::Curve(spec))
    }
}

/// A `K`-point of a curve over the algebra of its conjugates.
pub struct ConjugatePoints {
    pub algebra: std::sync::Arc<crate::KtAlgebra>,
    /// `sigma` sends generator `i` to `perm[i]`.
    pub perm: Vec<usize>,
    /// One point per `y`-value, over the same algebra.
    pub points: Vec<CurvePoint<KtAlg>>,
}

/// Adjoins `x` with `(x, y)` on the curve for each `y`, together with all
/// conjugates, so that `sigma` acts on the result.
pub fn conjugate_points(ext: &ConstantExtension, spec: &CurveSpec, ys: &[Kt]) -> Result<ConjugatePoints> {
    let r = ext.r as usize;
    let mut moduli: Vec<Poly<Kt>> = Vec::new();
    let mut perm = Vec::new();
    for (j, y) in ys.iter().enumerate() {
        let f = substituted_modulus(spec, y)?;
        for i in 0..r {
            moduli.push(sigma_conjugate(ext, i as u32, &f));
            perm.push(j * r + (i + 1) % r);
        }
    }
    let algebra = EtaleAlgebra::new(kt_ctx(ext.ext), moduli)?;
    let points =
        ys.iter().enumerate().map(|(j, y)| CurvePoint::new(algebra.gen(j * r), algebra.from_base(y.clone()))).collect();
    Ok(ConjugatePoints { algebra, perm, points })
}

/// A point of `C(A)` for `A = k[X]/(f)`, viewed over `A (x) K`: `sigma`
/// acts on constants only.
pub fn rational_point(ext: &ConstantExtension, spec: &CurveSpec, y: &Kt) -> Result<ConjugatePoints> {
    if !is_k_rational(ext, y) {
        return Err(config("y is not defined over k"));
    }
    let f = substituted_modulus(spec, y)?;
    let algebra = EtaleAlgebra::new(kt_ctx(ext.ext), vec![f])?;
    let point = CurvePoint::new(algebra.gen(0), algebra.from_base(y.clone()));
    Ok(ConjugatePoints { algebra, perm: vec![0], points: vec![point] })
}

pub fn is_k_rational(ext: &ConstantExtension, y: &Kt) -> bool {
    sigma_conjugate(ext, 1, y) == *y
}

pub fn sigma_point(ext: &ConstantExtension, perm: &[usize], p: &CurvePoint<KtAlg>) -> Result<CurvePoint<KtAlg>> {
    let s = ext.sigma(1);
    Ok(CurvePoint::new(p.x.conjugate(&s, perm)?, p.y.conjugate(&s, perm)?))
}

/// `sum_i sigma^i(P)`, checked fixed by `sigma` and on the curve.
pub fn norm_point(
    ext: &ConstantExtension,
    spec: &CurveSpec,
    perm: &[usize],
    p: &CurvePoint<KtAlg>,
) -> Result<CurvePoint<KtAlg>> {
    let mut cur = p.clone();
    let mut acc = p.clone();
    for _ in 1..ext.r {
        cur = sigma_point(ext, perm, &cur)?;
        acc = acc.add(&cur);
    }
    if sigma_point(ext, perm, &acc)? != acc {
        return Err(Error::Verification("norm is not Galois-fixed".into()));
    }
    if !spec.contains(&acc) {
        return Err(Error::Verification("norm is not on the curve".into()));
    }
    Ok(acc)
}

#[derive(Debug, Clone, Serialize)]
pub struct NormLaws {
    pub additive: bool,
    pub fixed: bool,
    pub multiple_r: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub extension: ExtensionRecord,
    pub group: String,
    pub laws: NormLaws,
    pub trials: usize,
    pub seed: u64,
    pub failures: Vec<String>,
}

impl NormReport {
    pub fn all_pass(&self) -> bool {
        self.laws.additive && self.laws.fixed && self.laws.multiple_r
    }
}

fn random_k(rng: &mut SampleRng, ext: &ConstantExtension, base: &[Fq], deg: usize) -> Kt {
    let pick = |rng: &mut SampleRng| base[sample::small_int(rng, base.len() as u64) as usize];
    let num = FqPoly::new(Var::T, ext.ext, (0..=deg).map(|_| pick(rng)).collect());
    let mut den: Vec<Fq> = (0..deg.min(1)).map(|_| pick(rng)).collect();
    den.push(ext.ext.one());
    Kt::new(num, FqPoly::new(Var::T, ext.ext, den)).expect("monic denominator")
}

fn random_k_y(rng: &mut SampleRng, ext: &ConstantExtension, base: &[Fq]) -> Kt {
    loop {
        let y = random_k(rng, ext, base, 2);
        if y.is_polynomial() && !y.is_constant() {
            return y;
        }
    }
}

/// Sampled additivity, Galois-fixedness and `nu o incl = r`.
pub fn check_norm_laws(group: &NormGroup, ext: &ConstantExtension, trials: usize, seed: u64) -> Result<NormReport> {
    let mut rng = sample::rng(seed);
    let base = ext.base_elements();
    let r_int = ext.r as i64;
    let mut laws = NormLaws { additive: true, fixed: true, multiple_r: true };
    let mut failures = Vec::new();
    let mut fail = |law: &str, trial: usize, laws: &mut NormLaws| {
        match law {
            "additive" => laws.additive = false,
            "fixed" => laws.fixed = false,
            _ => laws.multiple_r = false,
        }
        if failures.len() < 5 {
            failures.push(format!("{law}: trial {trial}"));
        }
    };
    for trial in 0..trials {
        match group {
            NormGroup::Ga | NormGroup::Ga2 => {
                let dim = if matches!(group, NormGroup::Ga) { 1 } else { 2 };
                for _ in 0..dim {
                    let x = sample::kt(&mut rng, ext.ext, 3, 2);
                    let y = sample::kt(&mut rng, ext.ext, 3, 2);
                    let nx = norm_ga(ext, &x);
                    if norm_ga(ext, &x.add(&y)) != nx.add(&norm_ga(ext, &y)) {
                        fail("additive", trial, &mut laws);
                    }
                    if sigma_conjugate(ext, 1, &nx) != nx {
                        fail("fixed", trial, &mut laws);
                    }
                    let z = random_k(&mut rng, ext, &base, 3);
                    if norm_ga(ext, &z) != z.scale_int(r_int) {
                        fail("multiple_r", trial, &mut laws);
                    }
                }
            }
            NormGroup::Curve(spec) => {
                let y1 = sample::y_value(&mut rng, ext.ext, 2);
                let y2 = sample::y_value(&mut rng, ext.ext, 2);
                let cp = conjugate_points(ext, spec, &[y1, y2])?;
                let (p, q) = (&cp.points[0], &cp.points[1]);
                match (norm_point(ext, spec, &cp.perm, p), norm_point(ext, spec, &cp.perm, q)) {
                    (Ok(np), Ok(nq)) => match norm_point(ext, spec, &cp.perm, &p.add(q)) {
                        Ok(npq) if npq == np.add(&nq) => {}
                        Ok(_) => fail("additive", trial, &mut laws),
                        Err(_) => fail("fixed", trial, &mut laws),
                    },
                    _ => fail("fixed", trial, &mut laws),
                }
                let y = random_k_y(&mut rng, ext, &base);
                let rp = rational_point(ext, spec, &y)?;
                let pt = &rp.points[0];
                match norm_point(ext, spec, &rp.perm, pt) {
                    Ok(n) if n == pt.scale_int(r_int) => {}
                    _ => fail("multiple_r", trial, &mut laws),
                }
            }
        }
    }
    Ok(NormReport { extension: ext.record(), group: group.name(), laws, trials, seed, failures })
}
