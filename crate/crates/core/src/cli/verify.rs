//! Randomised identity suites behind `chaincalc verify`.
//!
//! Each suite draws its samples from per-sample ChaCha streams of one seed,
//! evaluates them in parallel and reports, per identity, the worst residual
//! over all samples.

use std::collections::BTreeMap;

use clap::ValueEnum;
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::report::{Case, Report, ReportBuilder};
use crate::chains::DiracChain;
use crate::error::Result;
use crate::exterior::{KVector, MultiIndex};
use crate::forms::{FdConfig, Field, Form, SmoothMap, VectorField};
use crate::norms::{decompose, norm_bound, norm_upper, standard_dictionary, Certified, Strategy};
use crate::operators::*;
use crate::product::{cartesian_wedge, leibniz_boundary, product_form};
use crate::represent::cube_chain;
use crate::sample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Algebra,
    Duality,
    Commutators,
    Cartesian,
    Norms,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Duality => "duality",
            Suite::Commutators => "commutators",
            Suite::Cartesian => "cartesian",
            Suite::Norms => "norms",
        }
    }

    pub fn default_samples(self) -> usize {
        match self {
            Suite::Algebra => 1000,
            Suite::Duality => 300,
            Suite::Commutators => 100,
            Suite::Cartesian => 500,
            Suite::Norms => 100,
        }
    }

    pub fn default_tol(self, oracle: OracleKind) -> f64 {
        match (self, oracle) {
            (Suite::Duality, OracleKind::Fd) => 1e-5,
            (Suite::Duality, OracleKind::Analytic) => 1e-10,
            (Suite::Commutators, _) => 1e-9,
            _ => 1e-12,
        }
    }
}

/// How derivatives on the form side are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Exact symbolic derivatives.
    #[default]
    Analytic,
    /// Nested central differences of coefficient values.
    Fd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub samples: Option<usize>,
    pub oracle: OracleKind,
    pub tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 7, samples: None, oracle: OracleKind::Analytic, tol: None }
    }
}

/// The sample stream `i` of `seed`.
pub fn sample_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

type Residuals = Vec<(&'static str, f64)>;

/// Worst residual per identity, with the sample that produced it.
fn tally(per_sample: Vec<Residuals>) -> BTreeMap<&'static str, (f64, usize, usize)> {
    let mut out: BTreeMap<&'static str, (f64, usize, usize)> = BTreeMap::new();
    for (i, rs) in per_sample.into_iter().enumerate() {
        for (id, r) in rs {
            let e = out.entry(id).or_insert((0.0, i, 0));
            e.2 += 1;
            // NaN counts as the worst value.
            if (r.is_nan() && !e.0.is_nan()) || r > e.0 {
                e.0 = r;
                e.1 = i;
            }
        }
    }
    out
}

fn run_samples(n: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> Result<Residuals> + Sync) -> Result<Vec<Residuals>> {
    (0..n).into_par_iter().map(|i| f(&mut sample_rng(seed, i))).collect()
}

fn cases_from(t: BTreeMap<&'static str, (f64, usize, usize)>, tol: f64, metric: &str) -> Vec<Case> {
    t.into_iter()
        .map(|(id, (worst, at, count))| {
            Case::with_error(id, json!({"samples": count, "worst_sample": at, "metric": metric}), 0.0, worst, worst, tol)
        })
        .collect()
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    let samples = opts.samples.unwrap_or(suite.default_samples());
    let tol = opts.tol.unwrap_or(suite.default_tol(opts.oracle));
    let config = json!({"samples": samples, "tol": tol, "oracle": opts.oracle});
    let mut b = ReportBuilder::new(suite.name(), Some(opts.seed), config);
    let seed = opts.seed;
    match suite {
        Suite::Algebra => b.extend(cases_from(tally(run_samples(samples, seed, algebra_sample)?), tol, "max_abs")),
        Suite::Duality => {
            let oracle = opts.oracle;
            b.extend(cases_from(tally(run_samples(samples, seed, |r| duality_sample(r, oracle))?), tol, "relative"))
        }
        Suite::Commutators => {
            b.extend(cases_from(tally(run_samples(samples, seed, commutator_sample)?), tol, "relative_max_abs"))
        }
        Suite::Cartesian => b.extend(cases_from(tally(run_samples(samples, seed, cartesian_sample)?), tol, "max_abs")),
        Suite::Norms => {
            b.extend(norm_cases(tol)?);
            b.extend(cases_from(tally(run_samples(samples, seed, norm_sample)?), tol, "max_violation"));
        }
    }
    Ok(b.finish())
}

fn unit(n: usize, axis: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[axis - 1] = 1.0;
    e
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sum(dim: usize, grade: usize, parts: &[DiracChain]) -> Result<DiracChain> {
    DiracChain::sum(dim, grade, parts)
}

/// `{E_v, E_w†} J`, omitting the factor that would leave `Λ_0 .. Λ_n`.
fn car(v: &[f64], w: &[f64], j: &DiracChain) -> Result<DiracChain> {
    let (n, k) = (j.dim(), j.grade());
    let mut parts = Vec::new();
    if k > 0 {
        parts.push(extrude_const(v, &retract_const(w, j)?)?);
    }
    if k < n {
        parts.push(retract_const(w, &extrude_const(v, j)?)?);
    }
    sum(n, k, &parts)
}

fn algebra_sample(rng: &mut ChaCha8Rng) -> Result<Residuals> {
    let n = rng.random_range(1..=4);
    let k = rng.random_range(0..=n);
    let terms = rng.random_range(1..=4);
    let j = sample::chain(rng, n, k, 3, terms);
    let v = sample::vector(rng, n);
    let w = sample::vector(rng, n);
    let mut out = Vec::new();

    out.push(("boundary-squared", boundary(&boundary(&j)).max_abs()));
    out.push(("extrusion-retraction-anticommutator", car(&v, &w, &j)?.sub(&j.scale(dot(&v, &w)))?.max_abs()));

    // (E_v + E_v†)² splits by grade into E_vE_v, {E_v, E_v†} and E_v†E_v†.
    let mut sq = car(&v, &v, &j)?.sub(&j.scale(dot(&v, &v)))?.max_abs();
    if k + 2 <= n {
        sq = sq.max(extrude_const(&v, &extrude_const(&v, &j)?)?.max_abs());
    }
    if k >= 2 {
        sq = sq.max(retract_const(&v, &retract_const(&v, &j)?)?.max_abs());
    }
    out.push(("clifford-square", sq));

    let mut parts = Vec::new();
    if k < n {
        parts.push(boundary(&extrude_const(&v, &j)?));
    }
    if k > 0 {
        parts.push(extrude_const(&v, &boundary(&j))?);
    }
    out.push(("boundary-extrusion-anticommutator", sum(n, k, &parts)?.sub(&prederiv_const(&v, &j)?)?.max_abs()));

    // Both operators lower the grade, so their graded commutator is the
    // anticommutator.
    let rb = retract_const(&v, &boundary(&j))?.add(&boundary(&retract_const(&v, &j)?))?;
    out.push(("retraction-boundary-graded-commutator", rb.max_abs()));
    let pb = commutator(|c| prederiv_const(&v, c), |c| Ok(boundary(c)), &j)?;
    out.push(("prederivative-boundary-commutator", pb.max_abs()));

    let sign = if (k * (n - k)) % 2 == 0 { 1.0 } else { -1.0 };
    out.push(("perp-perp", perp_chain(&perp_chain(&j)).sub(&j.scale(sign))?.max_abs()));

    let alpha = sample::kvector(rng, n, k);
    let first = MultiIndex::new(&(1..=k).collect::<Vec<_>>())?;
    let e = KVector::basis(n, first)?;
    let s = e.clifford_perp().inner(&e.perp())?;
    out.push(("perp-clifford-composition", alpha.clifford_perp().sub(&alpha.perp().scale(s))?.l1()));
    let vol = KVector::basis(n, MultiIndex::full(n))?.scale(alpha.norm().powi(2));
    out.push(("perp-wedge-mass", alpha.perp().wedge(&alpha)?.sub(&vol)?.l1()));
    Ok(out)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// `ω` with every coefficient replaced by a finite-difference oracle on its
/// values.
fn fd_form(w: &Form) -> Result<Form> {
    let cfg = FdConfig { h: 1e-4, growth: 2.0, budget: 4 };
    let n = w.dim();
    let pieces = w
        .coeffs()
        .map(|(i, f)| {
            let f = f.clone();
            Field::finite_diff(n, cfg, move |p| f.value(p)).map(|g| (i, g))
        })
        .collect::<Result<Vec<_>>>()?;
    Form::new(n, w.grade(), pieces)
}

fn random_affine(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<SmoothMap> {
    let a = DMatrix::from_fn(m, n, |_, _| sample::dyadic(rng, 1.0, 4));
    let b = sample::vector(rng, m);
    SmoothMap::affine(&a, &b)
}

fn duality_sample(rng: &mut ChaCha8Rng, oracle: OracleKind) -> Result<Residuals> {
    let n = rng.random_range(1..=3);
    let k = rng.random_range(0..=n);
    let max_order = if oracle == OracleKind::Fd { 1 } else { 2 };
    let j = sample::chain(rng, n, k, max_order, 4);
    let v = sample::vector_field(rng, n, 2);
    let f = sample::polynomial(rng, n, 2, 3);
    let lift = |w: &Form| -> Result<Form> {
        match oracle {
            OracleKind::Analytic => Ok(w.clone()),
            OracleKind::Fd => fd_form(w),
        }
    };
    let mut out = Vec::new();
    let w = sample::form(rng, n, k, 3);
    if k < n {
        let w1 = sample::form(rng, n, k + 1, 3);
        out.push(("extrusion/interior", rel(lift(&w1)?.integrate(&extrude(&v, &j)?)?, w1.interior(&v)?.integrate(&j)?)));
        let j1 = sample::chain(rng, n, k + 1, max_order, 4);
        out.push(("boundary/exterior-derivative", rel(lift(&w)?.integrate(&boundary(&j1))?, w.d()?.integrate(&j1)?)));
    }
    if k > 0 {
        let w0 = sample::form(rng, n, k - 1, 3);
        out.push(("retraction/flat-wedge", rel(lift(&w0)?.integrate(&retract(&v, &j)?)?, w0.flat_wedge(&v)?.integrate(&j)?)));
    }
    out.push(("prederivative/lie-derivative", rel(lift(&w)?.integrate(&prederiv(&v, &j)?)?, w.lie(&v)?.integrate(&j)?)));
    out.push(("multiplication/field-product", rel(lift(&w)?.integrate(&mult(&f, &j)?)?, w.mul_field(&f).integrate(&j)?)));
    let wp = sample::form(rng, n, n - k, 2);
    out.push(("perp/hodge-star", rel(lift(&wp)?.integrate(&perp_chain(&j))?, wp.star().integrate(&j)?)));

    // Affine maps accept any order; nonlinear maps act on order-0 chains.
    let m = rng.random_range(n.max(k)..=3.max(n));
    let (map, chain) = if rng.random_range(0..2) == 0 {
        (random_affine(rng, n, m)?, j.clone())
    } else {
        let comps: Vec<Field> = (0..m).map(|_| sample::polynomial(rng, n, 2, 3)).collect();
        (SmoothMap::new(n, comps)?, sample::chain(rng, n, k, 0, 4))
    };
    let wm = sample::form(rng, m, k, 2);
    out.push((
        "pushforward/pullback",
        rel(lift(&wm)?.integrate(&pushforward(&map, &chain)?)?, wm.pullback(&map)?.integrate(&chain)?),
    ));
    Ok(out)
}

fn rel_chain(lhs: &DiracChain, rhs: &DiracChain) -> Result<f64> {
    Ok(lhs.sub(rhs)?.max_abs() / (1.0 + lhs.max_abs().max(rhs.max_abs())))
}

fn commutator_sample(rng: &mut ChaCha8Rng) -> Result<Residuals> {
    let n = rng.random_range(2..=3);
    let k = rng.random_range(0..n);
    let j = sample::chain(rng, n, k, 0, 3);
    let v1 = sample::vector_field(rng, n, 2);
    let v2 = sample::vector_field(rng, n, 2);
    let b12 = v1.bracket(&v2)?;
    let mut out = Vec::new();

    let ce = commutator(|c| extrude(&v2, c), |c| prederiv(&v1, c), &j)?;
    out.push(("extrusion-prederivative", rel_chain(&ce, &extrude(&b12, &j)?)?));
    let cp = commutator(|c| prederiv(&v1, c), |c| prederiv(&v2, c), &j)?;
    out.push(("prederivative-prederivative", rel_chain(&cp, &prederiv(&b12, &j)?)?));
    out.push(("prederivative-prederivative-reversed-bracket", rel_chain(&cp, &prederiv(&v2.bracket(&v1)?, &j)?)?));

    // The rotation field of the plane is Killing.
    let k2 = rng.random_range(1..=2);
    let j2 = sample::chain(rng, 2, k2, 0, 3);
    let rot = VectorField::rotation();
    let w2 = sample::vector_field(rng, 2, 2);
    let cr = commutator(|c| retract(&w2, c), |c| prederiv(&rot, c), &j2)?;
    out.push(("retraction-prederivative-killing", rel_chain(&cr, &retract(&rot.bracket(&w2)?, &j2)?)?));

    let jc = sample::chain(rng, n, k, 2, 3);
    let (a, c) = (sample::vector(rng, n), sample::vector(rng, n));
    let mut zero = commutator(|x| prederiv_const(&a, x), |x| prederiv_const(&c, x), &jc)?.max_abs();
    if k < n {
        zero = zero.max(commutator(|x| extrude_const(&a, x), |x| prederiv_const(&c, x), &jc)?.max_abs());
    }
    zero = zero.max(commutator(|x| retract_const(&a, x), |x| prederiv_const(&c, x), &jc)?.max_abs());
    out.push(("constant-fields", zero));

    let f = sample::polynomial(rng, n, 3, 3);
    let jm = sample::chain(rng, n, k + 1, 2, 4);
    let lhs = mult(&f, &boundary(&jm))?.sub(&boundary(&mult(&f, &jm)?))?;
    let mut parts = Vec::new();
    for i in 1..=n {
        parts.push(mult(&f.derive(i)?, &retract_const(&unit(n, i), &jm)?)?);
    }
    out.push(("multiplication-boundary", rel_chain(&lhs, &sum(n, k, &parts)?)?));
    Ok(out)
}

fn cartesian_sample(rng: &mut ChaCha8Rng) -> Result<Residuals> {
    let n1 = rng.random_range(1..=2);
    let n2 = rng.random_range(1..=2);
    let k = rng.random_range(0..=n1);
    let l = rng.random_range(0..=n2);
    let j = sample::chain(rng, n1, k, 1, 3);
    let kk = sample::chain(rng, n2, l, 1, 3);
    let p = cartesian_wedge(&j, &kk);
    let mut out = Vec::new();
    if k + l > 0 {
        out.push(("boundary-leibniz", boundary(&p).sub(&leibniz_boundary(&j, &kk)?)?.max_abs()));
    }
    let w = sample::form(rng, n1, k, 2);
    let e = sample::form(rng, n2, l, 2);
    let rhs = w.integrate(&j)? * e.integrate(&kk)?;
    out.push(("fubini", rel(product_form(&w, &e)?.integrate(&p)?, rhs)));
    let sp: Vec<_> = j.support().iter().flat_map(|a| kk.support().into_iter().map(move |b| a.concat(&b))).collect();
    out.push(("support", if p.support() == sp { 0.0 } else { 1.0 }));
    out.push(("nondegeneracy", if p.is_zero() == (j.is_zero() || kk.is_zero()) { 0.0 } else { 1.0 }));
    Ok(out)
}

fn unit_cube(j: usize) -> Result<DiracChain> {
    cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, j)
}

/// Deterministic norm cases on the unit-square representatives `P_j`.
pub fn norm_cases(tol: f64) -> Result<Vec<Case>> {
    let dict = vec![Certified::new("dV", Form::volume(2), 1.0)];
    let mut out = Vec::new();
    for j in 0..=10 {
        let area = Form::volume(2).integrate(&unit_cube(j)?)?;
        out.push(Case::new(format!("cube-volume/j={j:02}"), json!({"j": j}), 1.0, area, tol));
    }
    for j in 0..=8 {
        let c = unit_cube(j)?;
        for r in 0..=1 {
            let b = norm_bound(&c, r, Strategy::Pairing, &dict)?;
            let params = json!({"j": j, "r": r, "bound": b});
            out.push(Case::new(format!("cube-sandwich/r={r}/j={j:02}/lower"), params.clone(), 1.0, b.lower, tol));
            out.push(Case::new(format!("cube-sandwich/r={r}/j={j:02}/upper"), params, 1.0, b.upper, tol));
        }
        let diff = c.sub(&unit_cube(j + 1)?)?;
        let d = decompose(&diff, 1, Strategy::Pairing)?;
        let ub = norm_upper(&diff, &d)?;
        let bound = 0.5f64.powi(j as i32 - 1);
        out.push(Case::upper_bound(format!("refinement/j={j:02}"), json!({"j": j, "witness": d.summary()}), bound, ub));
    }
    let z = norm_bound(&DiracChain::zero(2, 2), 1, Strategy::Pairing, &dict)?;
    out.push(Case::new("zero-chain", json!({"bound": z}), 0.0, z.upper, tol));
    Ok(out)
}

fn norm_sample(rng: &mut ChaCha8Rng) -> Result<Residuals> {
    let n = rng.random_range(1..=3);
    let k = rng.random_range(0..=n);
    let a = sample::chain(rng, n, k, 0, 8);
    let dict = standard_dictionary(n, k);
    let mut order: f64 = 0.0;
    let mut mono: f64 = 0.0;
    let mut last = f64::INFINITY;
    for r in 0..=3 {
        let b = norm_bound(&a, r, Strategy::Pairing, &dict)?;
        order = order.max(b.lower - b.upper);
        mono = mono.max(b.upper - last);
        last = b.upper;
    }
    Ok(vec![("bound-order", order.max(0.0)), ("upper-monotone-in-r", mono.max(0.0))])
}
