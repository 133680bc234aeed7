//! Seeded random elements for sampled verifications.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{FieldDescriptor, Fq, FqPoly, Kt, Ring, Var};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fq(rng: &mut SampleRng, k0: &'static FieldDescriptor) -> Fq {
    let q = k0.order();
    let idx = rng.gen_range(0..q) as usize;
    k0.elements().nth(idx).expect("index below q")
}

pub fn nonzero_fq(rng: &mut SampleRng, k0: &'static FieldDescriptor) -> Fq {
    loop {
        let c = fq(rng, k0);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Uniform element of `F_p` as an integer in `0..p`.
pub fn small_int(rng: &mut SampleRng, p: u64) -> i64 {
    rng.gen_range(0..p) as i64
}

pub fn poly(rng: &mut SampleRng, k0: &'static FieldDescriptor, deg: usize) -> FqPoly {
    let coeffs = (0..=deg).map(|_| fq(rng, k0)).collect();
    FqPoly::new(Var::T, k0, coeffs)
}

/// `num/den` with `deg num <= dn` and monic `den` of degree `<= dd`.
pub fn kt(rng: &mut SampleRng, k0: &'static FieldDescriptor, dn: usize, dd: usize) -> Kt {
    let num = poly(rng, k0, dn);
    let dd = rng.gen_range(0..=dd);
    let mut coeffs: Vec<Fq> = (0..dd).map(|_| fq(rng, k0)).collect();
    coeffs.push(k0.one());
    Kt::new(num, FqPoly::new(Var::T, k0, coeffs)).expect("monic denominator")
}

pub fn nonzero_kt(rng: &mut SampleRng, k0: &'static FieldDescriptor, dn: usize, dd: usize) -> Kt {
    loop {
        let x = kt(rng, k0, dn, dd);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Non-constant polynomial in `t`, used as a `y`-value for adjoined points.
pub fn y_value(rng: &mut SampleRng, k0: &'static FieldDescriptor, deg: usize) -> Kt {
    loop {
        let f = poly(rng, k0, deg.max(1));
        if f.degree().unwrap_or(0) >= 1 {
            return Kt::from_poly(f);
        }
    }
}
