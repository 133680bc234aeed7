//! Bi-additive pairings `h: G2 x G2 -> G1` and the central extension
//! `G = G1 x G2` with law `(g1 + g1' + h(g2, g2'), g2 + g2')`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::arith::{EtaleAlgebra, MPolyCtx};
use crate::curves::{adjoin_point, make_spec, CurvePoint, CurveSpec, Variant};
use crate::sample::{self, SampleRng};
use crate::{config, kt_ctx, Error, FieldDescriptor, Fq, FqAlgebra, Kt, KtAlg, KtAlgebra, KtFree, Result, Ring};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingKind {
    Endo,
    Gabber,
    Twisted,
}

impl FromStr for PairingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "endo" => Ok(PairingKind::Endo),
            "gabber" => Ok(PairingKind::Gabber),
            "twisted" => Ok(PairingKind::Twisted),
            _ => Err(config(format!("unknown pairing kind `{s}`"))),
        }
    }
}

impl fmt::Display for PairingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairingKind::Endo => "endo",
            PairingKind::Gabber => "gabber",
            PairingKind::Twisted => "twisted",
        })
    }
}

/// A map `G2 x G2 -> G1` given by polynomial formulas, evaluable in any
/// `F_q`-algebra containing `t`.
pub trait PairingMap: Sync {
    fn source(&self) -> &CurveSpec;
    fn target(&self) -> &CurveSpec;
    fn apply<R: FqAlgebra>(&self, g: &CurvePoint<R>, h: &CurvePoint<R>) -> CurvePoint<R>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pairing {
    pub kind: PairingKind,
    pub m: u32,
    pub n: u32,
    pub zeta: Option<Fq>,
    source: CurveSpec,
    target: CurveSpec,
}

pub fn make_pairing(
    kind: PairingKind,
    p: u64,
    k0: &'static FieldDescriptor,
    m: u32,
    n: u32,
    zeta: Option<Fq>,
) -> Result<Pairing> {
    let one = k0.one();
    let (source, target) = match kind {
        PairingKind::Endo | PairingKind::Twisted => {
            (make_spec(Variant::Endo2, p, k0, m, n, one, one)?, make_spec(Variant::Endo1, p, k0, m, m, one, one)?)
        }
        PairingKind::Gabber => {
            (make_spec(Variant::Gabber2, p, k0, 2, 2, one, one)?, make_spec(Variant::Gabber1, p, k0, 1, 1, one, one)?)
        }
    };
    let zeta = match kind {
        PairingKind::Twisted => {
            if p != 2 {
                return Err(config("the twisted pairing is only defined for p = 2"));
            }
            if m.is_multiple_of(2) {
                return Err(config(format!("the twisted pairing needs m odd (got m = {m})")));
            }
            let z = zeta.ok_or_else(|| config("the twisted pairing needs zeta"))?;
            if !std::ptr::eq(z.descriptor(), k0) {
                return Err(config("zeta is not an element of k0"));
            }
            if !z.mul(&z).add(&z).add(&one).is_zero() {
                return Err(config(format!("zeta = {z} is not a primitive cube root of unity")));
            }
            Some(z)
        }
        _ => None,
    };
    let (m, n) = (source.m, source.n);
    Ok(Pairing { kind, m, n, zeta, source, target })
}

impl Pairing {
    /// Same formulas with another `zeta` and no validation; used to show
    /// which identities depend on `zeta` being a primitive cube root.
    pub fn with_zeta_unchecked(&self, zeta: Fq) -> Pairing {
        Pairing { kind: PairingKind::Twisted, zeta: Some(zeta), ..self.clone() }
    }

    /// The untwisted pairing underlying a twisted one.
    pub fn untwisted(&self) -> Pairing {
        Pairing { kind: PairingKind::Endo, zeta: None, ..self.clone() }
    }

    /// `lambda . (x, y) = (lambda x, lambda^(2^-n) y)`: the `F_4`-module
    /// structure of `G2` (coordinatewise scaling leaves `G2` for odd `n`).
    pub fn scalar_action<R: FqAlgebra>(&self, lambda: Fq, g: &CurvePoint<R>) -> CurvePoint<R> {
        let r = lambda.descriptor().degree() as u32;
        let back = (r - self.n % r) % r;
        CurvePoint::new(g.x.scale_fq(lambda), g.y.scale_fq(lambda.frobenius_power(back)))
    }

    pub fn record(&self) -> PairingRecord {
        PairingRecord {
            kind: self.kind,
            p: self.source.p(),
            m: self.m,
            n: self.n,
            zeta: self.zeta.map(|z| z.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingRecord {
    pub kind: PairingKind,
    pub p: u64,
    pub m: u32,
    pub n: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<String>,
}

fn endo_formula<R: Ring>(m: u32, n: u32, g: &CurvePoint<R>, h: &CurvePoint<R>) -> CurvePoint<R> {
    let (x, y, x2, y2) = (&g.x, &g.y, &h.x, &h.y);
    let a = x.frobenius_power(m).mul(x2).sub(&x.mul(&x2.frobenius_power(m)));
    let b = x.mul(&y2.frobenius_power(n - m)).sub(&y.frobenius_power(n - m).mul(x2));
    CurvePoint::new(a, b)
}

impl PairingMap for Pairing {
    fn source(&self) -> &CurveSpec {
        &self.source
    }

    fn target(&self) -> &CurveSpec {
        &self.target
    }

    fn apply<R: FqAlgebra>(&self, g: &CurvePoint<R>, h: &CurvePoint<R>) -> CurvePoint<R> {
        match self.kind {
            PairingKind::Endo => endo_formula(self.m, self.n, g, h),
            PairingKind::Twisted => {
                let zh = self.scalar_action(self.zeta.expect("twisted pairing has zeta"), h);
                endo_formula(self.m, self.n, g, &zh)
            }
            PairingKind::Gabber => {
                let (x, y, x2, y2) = (&g.x, &g.y, &h.x, &h.y);
                let a = x.mul(&x2.frobenius()).sub(&x.frobenius().mul(x2));
                let b = x.mul(&y2.frobenius()).sub(&x2.mul(&y.frobenius()));
                CurvePoint::new(a, b)
            }
        }
    }
}

/// Element `(g1, g2)` of the extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtElt<R> {
    pub g1: CurvePoint<R>,
    pub g2: CurvePoint<R>,
}

impl<R: Ring> ExtElt<R> {
    pub fn new(g1: CurvePoint<R>, g2: CurvePoint<R>) -> Self {
        ExtElt { g1, g2 }
    }

    pub fn identity(ctx: &R::Ctx) -> Self {
        ExtElt { g1: CurvePoint::zero(ctx), g2: CurvePoint::zero(ctx) }
    }

    pub fn is_identity(&self) -> bool {
        self.g1.is_zero() && self.g2.is_zero()
    }

    pub fn record(&self) -> ExtRecord {
        ExtRecord { g1: self.g1.strings(), g2: self.g2.strings() }
    }
}

impl<R: Ring> fmt::Display for ExtElt<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.g1, self.g2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtRecord {
    pub g1: [String; 2],
    pub g2: [String; 2],
}

/// The group law of the extension defined by a pairing.
pub struct ExtGroup<'a, H: PairingMap> {
    pub pairing: &'a H,
}

impl<'a, H: PairingMap> ExtGroup<'a, H> {
    pub fn new(pairing: &'a H) -> Self {
        ExtGroup { pairing }
    }

    pub fn mul<R: FqAlgebra>(&self, a: &ExtElt<R>, b: &ExtElt<R>) -> ExtElt<R> {
        let twist = self.pairing.apply(&a.g2, &b.g2);
        ExtElt { g1: a.g1.add(&b.g1).add(&twist), g2: a.g2.add(&b.g2) }
    }

    pub fn inv<R: FqAlgebra>(&self, a: &ExtElt<R>) -> ExtElt<R> {
        let neg2 = a.g2.neg();
        let twist = self.pairing.apply(&a.g2, &neg2);
        ExtElt { g1: a.g1.neg().sub(&twist), g2: neg2 }
    }

    /// `a b a^-1 b^-1`.
    pub fn commutator<R: FqAlgebra>(&self, a: &ExtElt<R>, b: &ExtElt<R>) -> ExtElt<R> {
        let ab = self.mul(a, b);
        let ab_ai = self.mul(&ab, &self.inv(a));
        self.mul(&ab_ai, &self.inv(b))
    }

    /// `(h(g2, g2') - h(g2', g2), 0)`, the value every commutator must take.
    pub fn expected_commutator<R: FqAlgebra>(&self, a: &ExtElt<R>, b: &ExtElt<R>) -> ExtElt<R> {
        let d = self.pairing.apply(&a.g2, &b.g2).sub(&self.pairing.apply(&b.g2, &a.g2));
        let zero = CurvePoint::zero(&a.g2.x.ctx());
        ExtElt { g1: d, g2: zero }
    }

    pub fn contains<R: FqAlgebra>(&self, a: &ExtElt<R>) -> bool {
        self.pairing.target().contains(&a.g1) && self.pairing.source().contains(&a.g2)
    }
}

/// Pass/fail of an identity between polynomials in free indeterminates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub check: String,
    pub holds: bool,
    /// `(first, second)` coordinate of the first non-zero residual, or `0`.
    pub residual: String,
    pub indeterminates: usize,
}

impl IdentityReport {
    pub(crate) fn from_residuals(check: &str, nvars: usize, residuals: &[CurvePoint<KtFree>]) -> Self {
        let bad = residuals.iter().find(|r| !r.is_zero());
        IdentityReport {
            check: check.to_string(),
            holds: bad.is_none(),
            residual: bad.map_or_else(|| "0".to_string(), |r| r.to_string()),
            indeterminates: nvars,
        }
    }
}

/// `k0(t)[x, y, x', y', ...]` with `count` points of free coordinates.
pub fn free_points(k0: &'static FieldDescriptor, count: usize) -> Vec<CurvePoint<KtFree>> {
    let names: Vec<String> = (0..count)
        .flat_map(|i| {
            let primes = "'".repeat(i);
            [format!("x{primes}"), format!("y{primes}")]
        })
        .collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let ctx = MPolyCtx::new(kt_ctx(k0), &refs);
    let gens = KtFree::gens(&ctx);
    gens.chunks(2).map(|c| CurvePoint::new(c[0].clone(), c[1].clone())).collect()
}

/// Additivity in each slot, as identities in six free coordinates.
pub fn check_biadditive<H: PairingMap>(h: &H) -> IdentityReport {
    let g = free_points(h.source().k0, 3);
    let (a, b, c) = (&g[0], &g[1], &g[2]);
    let left = h.apply(&a.add(b), c).sub(&h.apply(a, c)).sub(&h.apply(b, c));
    let right = h.apply(a, &b.add(c)).sub(&h.apply(a, b)).sub(&h.apply(a, c));
    IdentityReport::from_residuals("biadditive", 6, &[left, right])
}

/// `h(g+g', g'') + h(g, g') = h(g, g'+g'') + h(g', g'')`.
///
/// Three points of two coordinates each: six indeterminates.
pub fn check_cocycle<H: PairingMap>(h: &H) -> IdentityReport {
    let g = free_points(h.source().k0, 3);
    let (a, b, c) = (&g[0], &g[1], &g[2]);
    let lhs = h.apply(&a.add(b), c).add(&h.apply(a, b));
    let rhs = h.apply(a, &b.add(c)).add(&h.apply(b, c));
    IdentityReport::from_residuals("cocycle", 6, &[lhs.sub(&rhs)])
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub symmetric: bool,
    /// `h(g, g') - h(g', g)` in free coordinates.
    pub difference: [String; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CommutatorWitness>,
}

pub fn check_symmetry<H: PairingMap>(h: &H, with_witness: bool) -> Result<SymmetryReport> {
    let g = free_points(h.source().k0, 2);
    let d = h.apply(&g[0], &g[1]).sub(&h.apply(&g[1], &g[0]));
    let symmetric = d.is_zero();
    let witness = if !symmetric && with_witness { Some(noncommutativity_witness(h, None)?) } else { None };
    Ok(SymmetryReport { symmetric, difference: d.strings(), witness })
}

/// Adjoined source points for a fixed list of `y`-values, with their
/// pairwise tensor algebras built on demand.
pub struct PointPool {
    spec: CurveSpec,
    ys: Vec<Kt>,
    singles: Vec<Arc<KtAlgebra>>,
    pairs: HashMap<(usize, usize), (CurvePoint<KtAlg>, CurvePoint<KtAlg>)>,
}

impl PointPool {
    pub fn new(spec: &CurveSpec, ys: Vec<Kt>) -> Result<Self> {
        let singles = ys.iter().map(|y| Ok(adjoin_point(spec, y, 0)?.algebra)).collect::<Result<Vec<_>>>()?;
        Ok(PointPool { spec: *spec, ys, singles, pairs: HashMap::new() })
    }

    /// `count` random non-constant `y`-values of degree `<= 2`.
    pub fn random(spec: &CurveSpec, rng: &mut SampleRng, count: usize) -> Result<Self> {
        let mut ys: Vec<Kt> = Vec::new();
        while ys.len() < count {
            let y = sample::y_value(rng, spec.k0, 2);
            if !ys.contains(&y) {
                ys.push(y);
            }
        }
        Self::new(spec, ys)
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn y(&self, i: usize) -> &Kt {
        &self.ys[i]
    }

    /// The two generic points `P_i`, `P_j` over `A_i (x) A_j`.
    pub fn pair(&mut self, i: usize, j: usize) -> Result<(CurvePoint<KtAlg>, CurvePoint<KtAlg>)> {
        if let Some(p) = self.pairs.get(&(i, j)) {
            return Ok(p.clone());
        }
        let alg = EtaleAlgebra::tensor(&self.singles[i], &self.singles[j])?;
        let p = CurvePoint::new(alg.gen(0), alg.from_base(self.ys[i].clone()));
        let q = CurvePoint::new(alg.gen(1), alg.from_base(self.ys[j].clone()));
        debug_assert!(self.spec.contains(&p) && self.spec.contains(&q));
        self.pairs.insert((i, j), (p.clone(), q.clone()));
        Ok((p, q))
    }

    /// Random pair of distinct pool indices.
    pub fn pick(&self, rng: &mut SampleRng) -> (usize, usize) {
        let v = sample_indices(rng, self.ys.len(), 2);
        (v.index(0), v.index(1))
    }
}

/// `a P + b Q` with random `a, b` in `F_p`.
pub fn combination(rng: &mut SampleRng, p: u64, pts: &[&CurvePoint<KtAlg>]) -> CurvePoint<KtAlg> {
    let mut acc = CurvePoint::zero(&pts[0].x.ctx());
    for pt in pts {
        acc = acc.add(&pt.scale_int(sample::small_int(rng, p)));
    }
    acc
}

#[derive(Debug, Clone, Serialize)]
pub struct SampledReport {
    pub check: String,
    pub trials: usize,
    pub passed: usize,
    pub seed: u64,
    pub failures: Vec<String>,
}

impl SampledReport {
    pub fn all_pass(&self) -> bool {
        self.passed == self.trials
    }
}

pub fn check_containment<H: PairingMap>(h: &H, trials: usize, seed: u64) -> Result<SampledReport> {
    check_containment_on(h, h.target(), trials, seed)
}

/// Evaluates `h` on sampled pairs of source points over tensor products of
/// adjoined-point algebras and tests membership in `target`.
pub fn check_containment_on<H: PairingMap>(
    h: &H,
    target: &CurveSpec,
    trials: usize,
    seed: u64,
) -> Result<SampledReport> {
    let mut rng = sample::rng(seed);
    let mut pool = PointPool::random(h.source(), &mut rng, 4)?;
    let p = h.source().p();
    let mut passed = 0;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let (i, j) = pool.pick(&mut rng);
        let (a, b) = pool.pair(i, j)?;
        let g = combination(&mut rng, p, &[&a, &b]);
        let g2 = combination(&mut rng, p, &[&a, &b]);
        if target.contains(&h.apply(&g, &g2)) {
            passed += 1;
        } else if failures.len() < 5 {
            failures.push(format!("trial {trial}: y-values {} and {}", pool.y(i), pool.y(j)));
        }
    }
    Ok(SampledReport { check: "containment".into(), trials, passed, seed, failures })
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupLawReport {
    pub trials: usize,
    pub seed: u64,
    pub membership: usize,
    pub associativity: usize,
    pub identity: usize,
    pub inverse: usize,
    pub commutator: usize,
    pub centrality: usize,
    pub projection: usize,
    pub failures: Vec<String>,
}

impl GroupLawReport {
    pub fn all_pass(&self) -> bool {
        [
            self.membership,
            self.associativity,
            self.identity,
            self.inverse,
            self.commutator,
            self.centrality,
            self.projection,
        ]
        .iter()
        .all(|&c| c == self.trials)
    }
}

/// Random extension elements: `g2` an `F_p`-combination of two generic
/// points, `g1` an `F_p`-combination of the `h`-values between them.
pub fn random_ext_elt<H: PairingMap>(
    h: &H,
    rng: &mut SampleRng,
    a: &CurvePoint<KtAlg>,
    b: &CurvePoint<KtAlg>,
    g1_basis: &[CurvePoint<KtAlg>],
) -> ExtElt<KtAlg> {
    let p = h.source().p();
    let g2 = combination(rng, p, &[a, b]);
    let refs: Vec<&CurvePoint<KtAlg>> = g1_basis.iter().collect();
    let g1 = combination(rng, p, &refs);
    ExtElt::new(g1, g2)
}

pub fn check_group_laws<H: PairingMap>(h: &H, trials: usize, seed: u64) -> Result<GroupLawReport> {
    let mut rng = sample::rng(seed);
    let mut pool = PointPool::random(h.source(), &mut rng, 4)?;
    let group = ExtGroup::new(h);
    let mut bases: HashMap<(usize, usize), Vec<CurvePoint<KtAlg>>> = HashMap::new();
    let mut rep = GroupLawReport {
        trials,
        seed,
        membership: 0,
        associativity: 0,
        identity: 0,
        inverse: 0,
        commutator: 0,
        centrality: 0,
        projection: 0,
        failures: Vec::new(),
    };
    for trial in 0..trials {
        let (i, j) = pool.pick(&mut rng);
        let (a, b) = pool.pair(i, j)?;
        let basis = bases.entry((i, j)).or_insert_with(|| vec![h.apply(&a, &b), h.apply(&b, &a)]).clone();
        let g = random_ext_elt(h, &mut rng, &a, &b, &basis);
        let g2 = random_ext_elt(h, &mut rng, &a, &b, &basis);
        let g3 = random_ext_elt(h, &mut rng, &a, &b, &basis);
        let e = ExtElt::identity(&a.x.ctx());
        let failures = &mut rep.failures;
        let mut fail = |name: &str, ok: bool, counter: &mut usize| {
            if ok {
                *counter += 1;
            } else if failures.len() < 10 {
                failures.push(format!("trial {trial}: {name}"));
            }
        };
        fail("membership", [&g, &g2, &g3].iter().all(|x| group.contains(x)), &mut rep.membership);
        let lhs = group.mul(&group.mul(&g, &g2), &g3);
        let rhs = group.mul(&g, &group.mul(&g2, &g3));
        fail("associativity", lhs == rhs, &mut rep.associativity);
        fail("identity", group.mul(&g, &e) == g && group.mul(&e, &g) == g, &mut rep.identity);
        let gi = group.inv(&g);
        fail("inverse", group.mul(&g, &gi).is_identity() && group.mul(&gi, &g).is_identity(), &mut rep.inverse);
        fail("commutator", group.commutator(&g, &g2) == group.expected_commutator(&g, &g2), &mut rep.commutator);
        let central = ExtElt::new(g3.g1.clone(), CurvePoint::zero(&a.x.ctx()));
        fail("centrality", group.mul(&central, &g) == group.mul(&g, &central), &mut rep.centrality);
        fail("projection", group.mul(&g, &g2).g2 == g.g2.add(&g2.g2), &mut rep.projection);
    }
    Ok(rep)
}

/// Two extension elements over an étale algebra with a non-identity
/// commutator.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorWitness {
    pub algebra_moduli: Vec<String>,
    pub dimension: u64,
    pub y_values: [String; 2],
    pub g: ExtRecord,
    pub g_prime: ExtRecord,
    pub commutator: ExtRecord,
    pub nonzero: bool,
    /// The commutator equals `(h(g2, g2') - h(g2', g2), 0)`.
    pub matches_formula: bool,
    #[serde(skip)]
    pub elements: Option<(ExtElt<KtAlg>, ExtElt<KtAlg>, ExtElt<KtAlg>)>,
}

/// Default `y`-value candidates: `t, t+1, t+2, ...` then `t^2, ...`.
pub fn default_y_values(k0: &'static FieldDescriptor) -> Vec<Kt> {
    crate::FqPoly::enumerate(crate::Var::T, k0, 2)
        .into_iter()
        .filter(|f| f.degree().unwrap_or(0) >= 1 && f.leading().is_some_and(|c| c.is_one()))
        .map(Kt::from_poly)
        .collect()
}

/// Adjoins source points at consecutive candidate `y`-values, tensors the
/// algebras and lifts with `g1 = 0`; the first non-trivial commutator wins.
pub fn noncommutativity_witness<H: PairingMap>(h: &H, y_values: Option<Vec<Kt>>) -> Result<CommutatorWitness> {
    let k0 = h.source().k0;
    let g = free_points(k0, 2);
    if h.apply(&g[0], &g[1]).sub(&h.apply(&g[1], &g[0])).is_zero() {
        return Err(Error::Verification("no witness exists: the pairing is symmetric".into()));
    }
    let ys = y_values.unwrap_or_else(|| default_y_values(k0));
    let pool_spec = *h.source();
    let mut pool = PointPool::new(&pool_spec, ys)?;
    let group = ExtGroup::new(h);
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let (a, b) = pool.pair(i, j)?;
            let ctx = a.x.ctx();
            let ga = ExtElt::new(CurvePoint::zero(&ctx), a);
            let gb = ExtElt::new(CurvePoint::zero(&ctx), b);
            let c = group.commutator(&ga, &gb);
            if c.is_identity() {
                continue;
            }
            let alg = ctx.clone();
            return Ok(CommutatorWitness {
                algebra_moduli: alg.moduli_strings(),
                dimension: alg.dim(),
                y_values: [pool.y(i).to_string(), pool.y(j).to_string()],
                g: ga.record(),
                g_prime: gb.record(),
                commutator: c.record(),
                nonzero: true,
                matches_formula: c == group.expected_commutator(&ga, &gb),
                elements: Some((ga, gb, c)),
            });
        }
    }
    Err(Error::Verification("candidate y-values exhausted without a non-commuting pair".into()))
}
