//! Étale algebras over a field `K`, presented by one generator per modulus.
//!
//! The usual case is `K[x_1,...,x_s]/(f_1(x_1),...,f_s(x_s))` with separable
//! univariate `f_i` over `K`. A generator may also be adjoined over the
//! algebra built so far (a triangular presentation), which is how roots of
//! equations with coefficients in an étale algebra are added.
//!
//! Normal form: every exponent of `x_i` is below `deg f_i`, so a monomial is
//! a mixed-radix index and an element is a sorted map index -> coefficient.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use super::fq::FieldDescriptor;
use super::{join_terms, power, term, ArithError, Field, Fq, FqAlgebra, Poly, Ring, Var};

type Sparse<F> = Vec<(usize, F)>;
/// Element given by full exponent vectors (possibly shorter than the
/// number of generators; missing entries are zero).
type Dense<F> = Vec<(Vec<usize>, F)>;
type FrobCache<F> = Mutex<BTreeMap<u32, Arc<Vec<Vec<Dense<F>>>>>>;

#[derive(Clone, PartialEq)]
enum Modulus<F: Field> {
    /// Monic polynomial over `K`.
    Base(Poly<F>),
    /// Monic polynomial whose coefficients (low to high) are normal-form
    /// elements in the earlier generators.
    Tower(Vec<BTreeMap<Vec<usize>, F>>),
}

impl<F: Field> Modulus<F> {
    fn degree(&self) -> usize {
        match self {
            Modulus::Base(f) => f.degree().unwrap(),
            Modulus::Tower(c) => c.len() - 1,
        }
    }

    /// Relabels the earlier generators by prefixing `offset` zero exponents.
    fn shifted(&self, offset: usize) -> Self {
        match self {
            Modulus::Base(f) => Modulus::Base(f.clone()),
            Modulus::Tower(cs) => Modulus::Tower(
                cs.iter()
                    .map(|c| {
                        c.iter()
                            .map(|(e, v)| {
                                let mut w = vec![0; offset];
                                w.extend_from_slice(e);
                                (w, v.clone())
                            })
                            .collect()
                    })
                    .collect(),
            ),
        }
    }

    fn map(&self, base: &F::Ctx, f: &dyn Fn(&F) -> F) -> Self {
        match self {
            Modulus::Base(p) => Modulus::Base(Poly::new(Var::X, base.clone(), p.coeffs().iter().map(f).collect())),
            Modulus::Tower(cs) => Modulus::Tower(
                cs.iter()
                    .map(|c| c.iter().map(|(e, v)| (e.clone(), f(v))).filter(|(_, v)| !v.is_zero()).collect())
                    .collect(),
            ),
        }
    }
}

pub struct EtaleAlgebra<F: Field> {
    base: F::Ctx,
    moduli: Vec<Modulus<F>>,
    names: Vec<String>,
    degs: Vec<usize>,
    strides: Vec<u64>,
    dim: u64,
    tower: bool,
    /// `red[k][e] = x_k^e mod f_k`, for untowered algebras only.
    red: Vec<Vec<Sparse<F>>>,
    /// Same table for every presentation, with full exponent vectors.
    gen_red: Vec<Vec<Dense<F>>>,
    /// `e -> [k][j] = x_k^(j p^e)` in normal form.
    frob: FrobCache<F>,
}

fn table_len(d: usize) -> usize {
    (2 * d).saturating_sub(1).max(d + 1)
}

impl<F: Field> EtaleAlgebra<F> {
    /// Builds the algebra; each modulus is made monic and must be separable.
    pub fn new(base: F::Ctx, moduli: Vec<Poly<F>>) -> Result<Arc<Self>, ArithError> {
        let names = default_names(moduli.len());
        Self::with_names(base, moduli, names)
    }

    pub fn with_names(base: F::Ctx, moduli: Vec<Poly<F>>, names: Vec<String>) -> Result<Arc<Self>, ArithError> {
        assert_eq!(moduli.len(), names.len());
        let mut monic = Vec::with_capacity(moduli.len());
        for f in moduli {
            if *f.base() != base {
                return Err(ArithError::AlgebraMismatch);
            }
            if f.degree().unwrap_or(0) == 0 {
                return Err(ArithError::InvalidModulus(format!("{f} has degree < 1")));
            }
            if !f.is_separable() {
                return Err(ArithError::Inseparable(f.to_string()));
            }
            monic.push(Modulus::Base(Poly::new(Var::X, base.clone(), f.monic().into_coeffs())));
        }
        Ok(Arc::new(Self::build(base, monic, names)))
    }

    fn build(base: F::Ctx, moduli: Vec<Modulus<F>>, names: Vec<String>) -> Self {
        let degs: Vec<usize> = moduli.iter().map(|f| f.degree()).collect();
        let mut strides = Vec::with_capacity(degs.len());
        let mut dim = 1u64;
        for &d in &degs {
            strides.push(dim);
            dim = dim.checked_mul(d as u64).expect("algebra dimension overflow");
        }
        let tower = moduli.iter().any(|m| matches!(m, Modulus::Tower(_)));
        let mut alg = EtaleAlgebra {
            base,
            moduli,
            names,
            degs,
            strides,
            dim,
            tower,
            red: vec![],
            gen_red: vec![],
            frob: Mutex::new(BTreeMap::new()),
        };
        for k in 0..alg.moduli.len() {
            let table = alg.reduction_table(k);
            if !tower {
                alg.red.push(table.iter().map(|row| row.iter().map(|(e, c)| (e[k], c.clone())).collect()).collect());
            }
            alg.gen_red.push(table);
        }
        alg
    }

    /// Powers `x_k^e` in normal form; needs the tables of earlier generators.
    fn reduction_table(&self, k: usize) -> Vec<Dense<F>> {
        let d = self.degs[k];
        let unit = |e: usize| {
            let mut v = vec![0; k + 1];
            v[k] = e;
            v
        };
        let mut top: Dense<F> = Vec::new();
        match &self.moduli[k] {
            Modulus::Base(f) => {
                for (i, c) in f.coeffs().iter().enumerate().take(d) {
                    if !c.is_zero() {
                        top.push((unit(i), c.neg()));
                    }
                }
            }
            Modulus::Tower(cs) => {
                for (i, c) in cs.iter().enumerate().take(d) {
                    for (e, v) in c {
                        let mut w = e.clone();
                        w.resize(k + 1, 0);
                        w[k] = i;
                        top.push((w, v.neg()));
                    }
                }
            }
        }
        let one = F::one(&self.base);
        let mut out: Vec<Dense<F>> = (0..d).map(|e| vec![(unit(e), one.clone())]).collect();
        out.push(top.clone());
        while out.len() < table_len(d) {
            // multiply the last row by x_k and fold x_k^d back with `top`
            let last = out.last().unwrap();
            let mut work: HashMap<Vec<usize>, F> = HashMap::new();
            for (e, c) in last {
                let mut w = e.clone();
                w[k] += 1;
                if w[k] == d {
                    w[k] = 0;
                    for (te, tc) in &top {
                        let ww: Vec<usize> = w.iter().zip(te).map(|(a, b)| a + b).collect();
                        push_wide(&mut work, ww, c.mul(tc));
                    }
                } else {
                    push_wide(&mut work, w, c.clone());
                }
            }
            let reduced = self.reduce_partial(work, k);
            out.push(
                reduced
                    .into_iter()
                    .map(|(mut e, c)| {
                        e.truncate(k + 1);
                        (e, c)
                    })
                    .collect(),
            );
        }
        out
    }

    /// Reduces generators `< k` (generator `k` must already be reduced).
    fn reduce_partial(&self, work: HashMap<Vec<usize>, F>, k: usize) -> Dense<F> {
        let n = self.moduli.len();
        let mut work: HashMap<Vec<usize>, F> = work
            .into_iter()
            .map(|(mut e, c)| {
                e.resize(n, 0);
                (e, c)
            })
            .collect();
        for j in (0..k).rev() {
            self.reduce_generator(&mut work, j);
        }
        work.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }

    fn reduce_generator(&self, work: &mut HashMap<Vec<usize>, F>, j: usize) {
        let d = self.degs[j];
        let table = &self.gen_red[j];
        let top = table.len() - 1;
        loop {
            let pending: Vec<Vec<usize>> = work.keys().filter(|e| e[j] >= d).cloned().collect();
            if pending.is_empty() {
                return;
            }
            for e in pending {
                let c = work.remove(&e).unwrap();
                if c.is_zero() {
                    continue;
                }
                let (row, rest) = if e[j] <= top { (&table[e[j]], 0) } else { (&table[top], e[j] - top) };
                for (re, rc) in row {
                    let mut w = e.clone();
                    w[j] = rest;
                    for (a, b) in w.iter_mut().zip(re) {
                        *a += b;
                    }
                    push_wide(work, w, c.mul(rc));
                }
            }
        }
    }

    fn reduce_wide(&self, mut work: HashMap<Vec<usize>, F>) -> BTreeMap<u64, F> {
        for j in (0..self.moduli.len()).rev() {
            self.reduce_generator(&mut work, j);
        }
        work.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (self.encode(&e), c)).collect()
    }

    /// The base field itself, as an algebra with no generators.
    pub fn trivial(base: F::Ctx) -> Arc<Self> {
        Self::with_names(base, vec![], vec![]).expect("no moduli to check")
    }

    /// `A ⊗_K B`: the generators of `a` followed by those of `b`.
    pub fn tensor(a: &Arc<Self>, b: &Arc<Self>) -> Result<Arc<Self>, ArithError> {
        if a.base != b.base {
            return Err(ArithError::AlgebraMismatch);
        }
        let offset = a.generators();
        let moduli: Vec<Modulus<F>> =
            a.moduli.iter().cloned().chain(b.moduli.iter().map(|m| m.shifted(offset))).collect();
        let names = default_names(moduli.len());
        Ok(Arc::new(Self::build(a.base.clone(), moduli, names)))
    }

    /// Adjoins a root of `sum coeffs[i] X^i` (monic, coefficients in `alg`).
    /// Separability is certified by requiring the derivative to be a
    /// non-zero element of `K`.
    pub fn extend(alg: &Arc<Self>, coeffs: &[EtaleElt<F>]) -> Result<Arc<Self>, ArithError> {
        let d = coeffs
            .len()
            .checked_sub(1)
            .filter(|&d| d >= 1)
            .ok_or_else(|| ArithError::InvalidModulus("adjoined polynomial has degree < 1".into()))?;
        if coeffs.iter().any(|c| !EtaleAlgebra::same(c.algebra(), alg)) {
            return Err(ArithError::AlgebraMismatch);
        }
        if !coeffs[d].is_one() {
            return Err(ArithError::InvalidModulus("adjoined polynomial must be monic".into()));
        }
        let p = F::characteristic(&alg.base);
        let deriv_const = coeffs[1].as_base().filter(|c| !c.is_zero());
        let higher_vanish = (2..=d).all(|i| (i as u64).is_multiple_of(p) || coeffs[i].is_zero());
        if deriv_const.is_none() || !higher_vanish {
            return Err(ArithError::Inseparable(
                "derivative of the adjoined polynomial is not a non-zero constant".into(),
            ));
        }
        let tower: Vec<BTreeMap<Vec<usize>, F>> =
            coeffs.iter().map(|c| c.terms().map(|(e, v)| (e, v.clone())).collect()).collect();
        let mut moduli = alg.moduli.clone();
        moduli.push(Modulus::Tower(tower));
        let names = default_names(moduli.len());
        Ok(Arc::new(Self::build(alg.base.clone(), moduli, names)))
    }

    /// Applies a field map `K -> K'` to every structure constant.
    pub fn base_change(&self, base: F::Ctx, f: &dyn Fn(&F) -> F) -> Arc<Self> {
        let moduli = self.moduli.iter().map(|m| m.map(&base, f)).collect();
        Arc::new(Self::build(base, moduli, self.names.clone()))
    }

    pub fn base(&self) -> &F::Ctx {
        &self.base
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degs
    }

    /// Dimension over the base field: the product of the moduli degrees.
    pub fn dim(&self) -> u64 {
        self.dim
    }

    pub fn generators(&self) -> usize {
        self.moduli.len()
    }

    /// The modulus of generator `k` when it has coefficients in `K`.
    pub fn base_modulus(&self, k: usize) -> Option<&Poly<F>> {
        match &self.moduli[k] {
            Modulus::Base(f) => Some(f),
            Modulus::Tower(_) => None,
        }
    }

    /// Human-readable moduli, one per generator.
    pub fn moduli_strings(&self) -> Vec<String> {
        (0..self.moduli.len()).map(|k| self.modulus_string(k)).collect()
    }

    fn modulus_string(&self, k: usize) -> String {
        let name = &self.names[k];
        let terms = match &self.moduli[k] {
            Modulus::Base(f) => f
                .coeffs()
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| term(c.to_string(), &power(name, i as u64)))
                .collect(),
            Modulus::Tower(cs) => cs
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| !c.is_empty())
                .map(|(i, c)| {
                    let coeff = self.dense_string(c.iter().map(|(e, v)| (e.as_slice(), v)));
                    term(coeff, &power(name, i as u64))
                })
                .collect(),
        };
        join_terms(terms)
    }

    fn dense_string<'a>(&self, terms: impl Iterator<Item = (&'a [usize], &'a F)>) -> String
    where
        F: 'a,
    {
        let parts = terms
            .map(|(e, c)| {
                let mono: Vec<String> =
                    e.iter().zip(&self.names).filter(|(&k, _)| k > 0).map(|(&k, n)| power(n, k as u64)).collect();
                term(c.to_string(), &mono.join("*"))
            })
            .collect();
        join_terms(parts)
    }

    pub fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || (a.base == b.base && a.moduli == b.moduli)
    }

    fn decode(&self, mut idx: u64) -> Vec<usize> {
        self.degs
            .iter()
            .map(|&d| {
                let e = (idx % d as u64) as usize;
                idx /= d as u64;
                e
            })
            .collect()
    }

    fn encode(&self, exps: &[usize]) -> u64 {
        exps.iter().zip(&self.strides).map(|(&e, &s)| e as u64 * s).sum()
    }

    fn frobenius_table(self: &Arc<Self>, e: u32) -> Arc<Vec<Vec<Dense<F>>>> {
        if let Some(t) = self.frob.lock().unwrap().get(&e) {
            return t.clone();
        }
        let p = F::characteristic(&self.base);
        let q = p.checked_pow(e).expect("Frobenius exponent overflow");
        let table: Vec<Vec<Dense<F>>> = (0..self.moduli.len())
            .map(|k| {
                let xq = if let Some(f) = self.base_modulus(k) {
                    let x = Poly::x(Var::X, self.base.clone());
                    self.from_univariate(k, &x.pow_mod(q, f).expect("monic modulus"))
                } else {
                    self.gen(k).pow(q)
                };
                let mut out = Vec::with_capacity(self.degs[k]);
                let mut cur = self.one();
                for _ in 0..self.degs[k] {
                    out.push(cur.terms().map(|(e, c)| (e, c.clone())).collect());
                    cur = cur.mul(&xq);
                }
                out
            })
            .collect();
        let table = Arc::new(table);
        self.frob.lock().unwrap().insert(e, table.clone());
        table
    }

    pub fn zero(self: &Arc<Self>) -> EtaleElt<F> {
        EtaleElt { alg: self.clone(), terms: BTreeMap::new() }
    }

    pub fn one(self: &Arc<Self>) -> EtaleElt<F> {
        self.from_base(F::one(&self.base))
    }

    pub fn from_base(self: &Arc<Self>, c: F) -> EtaleElt<F> {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        EtaleElt { alg: self.clone(), terms }
    }

    /// The class of the `k`-th generator.
    pub fn gen(self: &Arc<Self>, k: usize) -> EtaleElt<F> {
        self.from_univariate(k, &Poly::x(Var::X, self.base.clone()))
    }

    /// Reduces a polynomial in the `k`-th generator modulo its modulus.
    pub fn from_univariate(self: &Arc<Self>, k: usize, f: &Poly<F>) -> EtaleElt<F> {
        if let Some(m) = self.base_modulus(k) {
            let f = Poly::new(Var::X, self.base.clone(), f.coeffs().to_vec());
            let r = f.rem(m).expect("monic modulus");
            let mut terms = BTreeMap::new();
            for (j, c) in r.coeffs().iter().enumerate() {
                if !c.is_zero() {
                    terms.insert(j as u64 * self.strides[k], c.clone());
                }
            }
            return EtaleElt { alg: self.clone(), terms };
        }
        let mut work = HashMap::new();
        for (j, c) in f.coeffs().iter().enumerate() {
            let mut e = vec![0; self.moduli.len()];
            e[k] = j;
            push_wide(&mut work, e, c.clone());
        }
        EtaleElt { alg: self.clone(), terms: self.reduce_wide(work) }
    }
}

fn default_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["X".to_string()]
    } else {
        (1..=n).map(|i| format!("X{i}")).collect()
    }
}

fn push_wide<F: Ring>(work: &mut HashMap<Vec<usize>, F>, e: Vec<usize>, c: F) {
    match work.get_mut(&e) {
        Some(v) => *v = v.add(&c),
        None => {
            work.insert(e, c);
        }
    }
}

impl<F: Field> PartialEq for EtaleAlgebra<F> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other) || (self.base == other.base && self.moduli == other.moduli)
    }
}

impl<F: Field> fmt::Debug for EtaleAlgebra<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EtaleAlgebra[{}]", self.moduli_strings().join(", "))
    }
}

/// Element of an étale algebra.
#[derive(Clone)]
pub struct EtaleElt<F: Field> {
    alg: Arc<EtaleAlgebra<F>>,
    terms: BTreeMap<u64, F>,
}

impl<F: Field> EtaleElt<F> {
    pub fn algebra(&self) -> &Arc<EtaleAlgebra<F>> {
        &self.alg
    }

    /// `(exponents, coefficient)` pairs in index order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &F)> + '_ {
        self.terms.iter().map(|(&i, c)| (self.alg.decode(i), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// The base-field value, when the element lies in `K`.
    pub fn as_base(&self) -> Option<F> {
        match self.terms.len() {
            0 => Some(F::zero(&self.alg.base)),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    fn check(&self, rhs: &Self) {
        assert!(EtaleAlgebra::same(&self.alg, &rhs.alg), "étale algebra mismatch");
    }

    fn from_map(alg: &Arc<EtaleAlgebra<F>>, map: HashMap<u64, F>) -> Self {
        let terms = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        EtaleElt { alg: alg.clone(), terms }
    }

    fn push(acc: &mut HashMap<u64, F>, idx: u64, c: F) {
        match acc.get_mut(&idx) {
            Some(v) => *v = v.add(&c),
            None => {
                acc.insert(idx, c);
            }
        }
    }

    /// Expands `c * prod_k table[k][exps[k]]` into `acc` (untowered only).
    fn expand(alg: &EtaleAlgebra<F>, acc: &mut HashMap<u64, F>, c: F, factors: &[&Sparse<F>]) {
        let mut cur: Vec<(u64, F)> = vec![(0, c)];
        for (k, fac) in factors.iter().enumerate() {
            let stride = alg.strides[k];
            if fac.len() == 1 && fac[0].1.is_one() {
                let shift = fac[0].0 as u64 * stride;
                for (i, _) in cur.iter_mut() {
                    *i += shift;
                }
                continue;
            }
            let mut next = Vec::with_capacity(cur.len() * fac.len());
            for (i, a) in &cur {
                for (j, b) in fac.iter() {
                    next.push((i + *j as u64 * stride, a.mul(b)));
                }
            }
            cur = next;
        }
        for (i, c) in cur {
            Self::push(acc, i, c);
        }
    }

    fn from_dense(alg: &Arc<EtaleAlgebra<F>>, d: &Dense<F>) -> Self {
        let n = alg.generators();
        let terms = d
            .iter()
            .map(|(e, c)| {
                let mut w = e.clone();
                w.resize(n, 0);
                (alg.encode(&w), c.clone())
            })
            .collect();
        EtaleElt { alg: alg.clone(), terms }
    }

    /// Moves the element into `target`, sending generator `k` to `k + offset`.
    pub fn embed(&self, target: &Arc<EtaleAlgebra<F>>, offset: usize) -> Result<Self, ArithError> {
        for (k, f) in self.alg.moduli.iter().enumerate() {
            if target.moduli.get(k + offset) != Some(&f.shifted(offset)) {
                return Err(ArithError::AlgebraMismatch);
            }
        }
        let mut terms = BTreeMap::new();
        for (&i, c) in &self.terms {
            let exps = self.alg.decode(i);
            let mut full = vec![0; target.generators()];
            full[offset..offset + exps.len()].copy_from_slice(&exps);
            terms.insert(target.encode(&full), c.clone());
        }
        Ok(EtaleElt { alg: target.clone(), terms })
    }

    /// Applies a field map to the coefficients, landing in `target` (which
    /// must be the matching base change of this algebra).
    pub fn base_change(&self, target: &Arc<EtaleAlgebra<F>>, f: &dyn Fn(&F) -> F) -> Self {
        assert_eq!(target.degs, self.alg.degs, "base change target has a different shape");
        let terms = self.terms.iter().map(|(&i, c)| (i, f(c))).filter(|(_, c)| !c.is_zero()).collect();
        EtaleElt { alg: target.clone(), terms }
    }

    fn terms_vec(&self) -> Vec<(Vec<usize>, &F)> {
        self.terms.iter().map(|(&i, c)| (self.alg.decode(i), c)).collect()
    }
}

impl<F: Field + FqAlgebra> EtaleElt<F> {
    /// Semilinear conjugation: `sigma` acts on constants and generator `k`
    /// is sent to generator `perm[k]`. Requires `sigma(f_k) = f_{perm[k]}`.
    pub fn conjugate(&self, sigma: &dyn Fn(Fq) -> Fq, perm: &[usize]) -> Result<Self, ArithError> {
        let alg = &self.alg;
        if perm.len() != alg.generators() {
            return Err(ArithError::NotStable("permutation length".into()));
        }
        let base = alg.base.clone();
        for (k, f) in alg.moduli.iter().enumerate() {
            if matches!(f, Modulus::Tower(_)) && perm[k] != k {
                return Err(ArithError::NotStable("adjoined generators cannot be permuted".into()));
            }
            let image = f.map(&base, &|c: &F| c.map_constants(sigma));
            if image != alg.moduli[perm[k]] {
                return Err(ArithError::NotStable(format!("modulus {} is not sent to modulus {}", k + 1, perm[k] + 1)));
            }
        }
        let mut terms = BTreeMap::new();
        for (&i, c) in &self.terms {
            let exps = alg.decode(i);
            let mut moved = vec![0; exps.len()];
            for (k, &e) in exps.iter().enumerate() {
                moved[perm[k]] = e;
            }
            let c = c.map_constants(sigma);
            if !c.is_zero() {
                terms.insert(alg.encode(&moved), c);
            }
        }
        Ok(EtaleElt { alg: alg.clone(), terms })
    }
}

impl<F: Field> PartialEq for EtaleElt<F> {
    fn eq(&self, other: &Self) -> bool {
        EtaleAlgebra::same(&self.alg, &other.alg) && self.terms == other.terms
    }
}

impl<F: Field> fmt::Display for EtaleElt<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms_vec();
        f.write_str(&self.alg.dense_string(terms.iter().map(|(e, c)| (e.as_slice(), *c))))
    }
}

impl<F: Field> fmt::Debug for EtaleElt<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<F: Field> Ring for EtaleElt<F> {
    type Ctx = Arc<EtaleAlgebra<F>>;

    fn ctx(&self) -> Self::Ctx {
        self.alg.clone()
    }

    fn zero(ctx: &Self::Ctx) -> Self {
        ctx.zero()
    }

    fn one(ctx: &Self::Ctx) -> Self {
        ctx.one()
    }

    fn characteristic(ctx: &Self::Ctx) -> u64 {
        F::characteristic(&ctx.base)
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn from_int(ctx: &Self::Ctx, n: i64) -> Self {
        ctx.from_base(F::from_int(&ctx.base, n))
    }

    fn add(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let mut terms = self.terms.clone();
        for (i, c) in &rhs.terms {
            match terms.get_mut(i) {
                Some(v) => {
                    let s = v.add(c);
                    if s.is_zero() {
                        terms.remove(i);
                    } else {
                        *v = s;
                    }
                }
                None => {
                    terms.insert(*i, c.clone());
                }
            }
        }
        EtaleElt { alg: self.alg.clone(), terms }
    }

    fn neg(&self) -> Self {
        EtaleElt { alg: self.alg.clone(), terms: self.terms.iter().map(|(i, c)| (*i, c.neg())).collect() }
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.check(rhs);
        let alg = &self.alg;
        if self.is_zero() || rhs.is_zero() {
            return alg.zero();
        }
        if let (Some(a), Some(b)) = (self.as_base(), rhs.as_base()) {
            return alg.from_base(a.mul(&b));
        }
        // accumulate unreduced products keyed by the wide exponent vector
        let lhs = self.terms_vec();
        let rhs_terms = rhs.terms_vec();
        let mut wide: HashMap<Vec<usize>, F> = HashMap::new();
        for (ea, ca) in &lhs {
            for (eb, cb) in &rhs_terms {
                let e: Vec<usize> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                push_wide(&mut wide, e, ca.mul(cb));
            }
        }
        if alg.tower {
            return EtaleElt { alg: alg.clone(), terms: alg.reduce_wide(wide) };
        }
        let mut acc = HashMap::new();
        let mut keys: Vec<_> = wide.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        for (e, c) in keys {
            if c.is_zero() {
                continue;
            }
            let factors: Vec<&Sparse<F>> = e.iter().enumerate().map(|(k, &ek)| &alg.red[k][ek]).collect();
            Self::expand(alg, &mut acc, c, &factors);
        }
        Self::from_map(alg, acc)
    }

    fn frobenius(&self) -> Self {
        self.frobenius_power(1)
    }

    fn frobenius_power(&self, e: u32) -> Self {
        if e == 0 || self.is_zero() {
            return self.clone();
        }
        let alg = &self.alg;
        let table = alg.frobenius_table(e);
        if alg.tower {
            let mut acc = alg.zero();
            for (exps, c) in self.terms() {
                let mut m = alg.from_base(c.frobenius_power(e));
                for (k, &ek) in exps.iter().enumerate() {
                    if ek > 0 {
                        m = m.mul(&Self::from_dense(alg, &table[k][ek]));
                    }
                }
                acc = acc.add(&m);
            }
            return acc;
        }
        let sparse: Vec<Vec<Sparse<F>>> = table
            .iter()
            .enumerate()
            .map(|(k, rows)| rows.iter().map(|row| row.iter().map(|(ex, c)| (ex[k], c.clone())).collect()).collect())
            .collect();
        let mut acc = HashMap::new();
        for (exps, c) in self.terms() {
            let factors: Vec<&Sparse<F>> = exps.iter().enumerate().map(|(k, &ek)| &sparse[k][ek]).collect();
            Self::expand(alg, &mut acc, c.frobenius_power(e), &factors);
        }
        Self::from_map(alg, acc)
    }
}

impl<F: Field + FqAlgebra> FqAlgebra for EtaleElt<F> {
    fn constant_field(ctx: &Self::Ctx) -> &'static FieldDescriptor {
        F::constant_field(&ctx.base)
    }

    fn from_fq(ctx: &Self::Ctx, c: Fq) -> Self {
        ctx.from_base(F::from_fq(&ctx.base, c))
    }

    fn var(ctx: &Self::Ctx, v: Var) -> Option<Self> {
        F::var(&ctx.base, v).map(|c| ctx.from_base(c))
    }

    /// Coefficientwise; panics unless every modulus is fixed by the map.
    fn map_constants(&self, f: &dyn Fn(Fq) -> Fq) -> Self {
        let perm: Vec<usize> = (0..self.alg.generators()).collect();
        self.conjugate(f, &perm).expect("moduli must be fixed by the constant map")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::RatFunc;

    type Kt = RatFunc<Fq>;

    fn f3() -> &'static FieldDescriptor {
        FieldDescriptor::prime(3).unwrap()
    }

    fn t() -> Kt {
        Kt::x(Var::T, f3())
    }

    fn kc(n: i64) -> Kt {
        Kt::from_int(&t().ctx(), n)
    }

    /// `X^3 - t^-1 X + t^2` over `F_3(t)`.
    fn cubic() -> Poly<Kt> {
        let tinv = t().inv().unwrap();
        Poly::new(Var::X, t().ctx(), vec![t().pow(2), tinv.neg(), kc(0), kc(1)])
    }

    #[test]
    fn dimension_and_reduction() {
        let a = EtaleAlgebra::new(t().ctx(), vec![cubic()]).unwrap();
        assert_eq!(a.dim(), 3);
        let x = a.gen(0);
        let expected = x.mul(&a.from_base(t().inv().unwrap())).sub(&a.from_base(t().pow(2)));
        assert_eq!(x.pow(3), expected);
        let x3 = Poly::monomial(Var::X, kc(1), 3);
        assert_eq!(a.from_univariate(0, &x3), expected);
    }

    #[test]
    fn tensor_dimension_multiplies() {
        let a = EtaleAlgebra::new(t().ctx(), vec![cubic()]).unwrap();
        let ab = EtaleAlgebra::tensor(&a, &a).unwrap();
        assert_eq!(ab.dim(), 9);
        let x = a.gen(0);
        let left = x.embed(&ab, 0).unwrap();
        let right = x.embed(&ab, 1).unwrap();
        assert_ne!(left, right);
        assert_eq!(left.pow(3).sub(&right.pow(3)), left.sub(&right).mul(&ab.from_base(t().inv().unwrap())));
    }

    #[test]
    fn inseparable_modulus_rejected() {
        // X^3 - t has zero derivative in characteristic 3
        let f = Poly::new(Var::X, t().ctx(), vec![t().neg(), kc(0), kc(0), kc(1)]);
        assert!(matches!(EtaleAlgebra::new(t().ctx(), vec![f]), Err(ArithError::Inseparable(_))));
    }

    #[test]
    fn frobenius_matches_powering() {
        let a = EtaleAlgebra::new(t().ctx(), vec![cubic(), cubic()]).unwrap();
        let x = a.gen(0).add(&a.gen(1).mul(&a.from_base(t()))).add(&a.one());
        assert_eq!(x.frobenius(), x.pow(3));
        assert_eq!(x.frobenius_power(2), x.pow(9));
    }

    #[test]
    fn tower_generator_reduces_over_the_first() {
        // F_3(t)[x]/(x^3 - t^-1 x + t^2), then y^3 - y - x
        let a = EtaleAlgebra::new(t().ctx(), vec![cubic()]).unwrap();
        let x = a.gen(0);
        let coeffs = vec![x.neg(), a.one().neg(), a.zero(), a.one()];
        let b = EtaleAlgebra::extend(&a, &coeffs).unwrap();
        assert_eq!(b.dim(), 9);
        let xb = x.embed(&b, 0).unwrap();
        let y = b.gen(1);
        assert_eq!(y.pow(3), y.add(&xb));
        assert_eq!(y.pow(9), y.pow(3).pow(3));
        let z = y.add(&xb.mul(&y)).add(&b.from_base(t()));
        assert_eq!(z.frobenius(), z.pow(3));
        assert_eq!(z.mul(&y).mul(&xb), z.mul(&y.mul(&xb)));
        // the tower survives tensoring on the right
        let ab = EtaleAlgebra::tensor(&a, &b).unwrap();
        let y2 = y.embed(&ab, 1).unwrap();
        let x2 = xb.embed(&ab, 1).unwrap();
        assert_eq!(y2.pow(3), y2.add(&x2));
        // an inseparable adjunction is refused
        let bad = vec![x.neg(), a.zero(), a.zero(), a.one()];
        assert!(EtaleAlgebra::extend(&a, &bad).is_err());
    }

    #[test]
    fn linear_modulus() {
        let a = EtaleAlgebra::new(t().ctx(), vec![Poly::new(Var::X, t().ctx(), vec![t().neg(), kc(1)])]).unwrap();
        assert_eq!(a.dim(), 1);
        assert_eq!(a.gen(0).pow(5), a.from_base(t().pow(5)));
    }
}
