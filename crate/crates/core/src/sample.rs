//! Seeded random instances for property suites.
//!
//! Coordinates and coefficients are dyadic rationals with small numerators,
//! so sums and products that stay in range are exact in `f64`.

use rand::{Rng, RngExt};

use crate::chains::{ChainBuilder, Degree, DiracChain, Point};
use crate::exterior::{KVector, MultiIndex};
use crate::forms::{Field, Form, VectorField};

/// A uniform dyadic value `i / denom` with `|i / denom| ≤ bound`.
pub fn dyadic<R: Rng + ?Sized>(rng: &mut R, bound: f64, denom: u32) -> f64 {
    let max = (bound * denom as f64) as i64;
    rng.random_range(-max..=max) as f64 / denom as f64
}

pub fn vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| dyadic(rng, 2.0, 8)).collect()
}

pub fn index<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> MultiIndex {
    let all: Vec<MultiIndex> = MultiIndex::all_of_grade(n, k).collect();
    all[rng.random_range(0..all.len())]
}

pub fn kvector<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> KVector {
    let terms: Vec<(MultiIndex, f64)> = MultiIndex::all_of_grade(n, k).map(|i| (i, dyadic(rng, 2.0, 8))).collect();
    KVector::from_terms(n, k, terms).expect("grade matches")
}

fn degree<R: Rng + ?Sized>(rng: &mut R, n: usize, max_order: usize) -> Degree {
    let order = rng.random_range(0..=max_order);
    let mut d = Degree::zero(n);
    for _ in 0..order {
        d = d.bumped(rng.random_range(1..=n));
    }
    d
}

/// A chain with up to `terms` terms. Points are drawn from a coarse dyadic
/// grid in `[-1, 1]^n` so that repeated points occur and merge.
pub fn chain<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, max_order: usize, terms: usize) -> DiracChain {
    let mut b = ChainBuilder::with_capacity(n, k, terms);
    for _ in 0..terms {
        let p: Point = (0..n).map(|_| dyadic(rng, 1.0, 4)).collect();
        b.add(p, degree(rng, n, max_order), index(rng, n, k), dyadic(rng, 2.0, 16));
    }
    b.finish()
}

/// A polynomial in `x1..xn` of total degree at most `deg`.
pub fn polynomial<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: usize, terms: usize) -> Field {
    let parts: Vec<(f64, Field)> = (0..terms)
        .map(|_| {
            let c = dyadic(rng, 2.0, 4);
            let d = rng.random_range(0..=deg);
            let monomial = Field::product((0..d).map(|_| Field::coord(rng.random_range(1..=n))));
            (c, monomial)
        })
        .collect();
    Field::linear(parts)
}

/// A `k`-form with polynomial coefficients on every basis covector.
pub fn form<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, deg: usize) -> Form {
    let pieces: Vec<(MultiIndex, Field)> =
        MultiIndex::all_of_grade(n, k).map(|i| (i, polynomial(rng, n, deg, 3))).collect();
    Form::new(n, k, pieces).expect("grade matches")
}

/// A vector field with polynomial components.
pub fn vector_field<R: Rng + ?Sized>(rng: &mut R, n: usize, deg: usize) -> VectorField {
    VectorField::new((0..n).map(|_| polynomial(rng, n, deg, 3)).collect())
}
