//! Certified two-sided bounds for `B^r` norms of Dirac chains.
//!
//! Upper bounds come from explicit decompositions into difference chains
//! `Δ_σ(p; α)`, costed as `Π‖u_i‖ · mass(α)`. Lower bounds come from
//! pairing with forms whose norm is bounded by the caller.

use std::collections::HashMap;

use serde::Serialize;

use crate::chains::{ChainBuilder, DiracChain, Point};
use crate::error::{Error, Result};
use crate::exterior::{KVector, MultiIndex};
use crate::forms::Form;

/// Relative residual allowed when checking that a decomposition sums back to
/// its chain; the only source of error is rounding in `p + u`.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;

/// One difference chain `Δ_σ(p; c e_I)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Piece {
    pub sigma: Vec<Vec<f64>>,
    pub point: Vec<f64>,
    pub index: MultiIndex,
    pub coeff: f64,
}

impl Piece {
    pub fn cost(&self) -> f64 {
        let s: f64 = self.sigma.iter().map(|u| u.iter().map(|x| x * x).sum::<f64>().sqrt()).product();
        s * self.coeff.abs()
    }

    pub fn chain(&self, dim: usize) -> Result<DiracChain> {
        let base = DiracChain::element(&self.point, &KVector::from_terms(dim, self.index.grade(), [(self.index, self.coeff)])?)?;
        base.difference(&self.sigma)
    }

    /// Vertices of the convex hull of the support: `p + Σ_{i∈S} u_i`.
    pub fn hull_vertices(&self) -> Vec<Vec<f64>> {
        let mut out = vec![self.point.clone()];
        for u in &self.sigma {
            let shifted: Vec<Vec<f64>> = out.iter().map(|v| v.iter().zip(u).map(|(a, b)| a + b).collect()).collect();
            out.extend(shifted);
        }
        out
    }
}

/// A decomposition `A = Σ Δ_{σ_i}(p_i; α_i)` with every `|σ_i| ≤ r`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub dim: usize,
    pub grade: usize,
    pub r: usize,
    pub pieces: Vec<Piece>,
}

impl Decomposition {
    pub fn cost(&self) -> f64 {
        self.pieces.iter().map(Piece::cost).sum()
    }

    pub fn reconstruct(&self) -> Result<DiracChain> {
        let mut b = ChainBuilder::new(self.dim, self.grade);
        for p in &self.pieces {
            b.extend_scaled(&p.chain(self.dim)?, 1.0);
        }
        Ok(b.finish())
    }

    /// Checks `Σ pieces = a`, failing with the residual size.
    pub fn verify(&self, a: &DiracChain) -> Result<()> {
        if self.pieces.iter().any(|p| p.sigma.len() > self.r) {
            return Err(Error::Invalid(format!("a difference exceeds the declared depth {}", self.r)));
        }
        let residual = self.reconstruct()?.sub(a)?.max_abs();
        if residual > RECONSTRUCTION_TOL * (1.0 + a.max_abs()) {
            return Err(Error::Reconstruction { residual });
        }
        Ok(())
    }

    pub fn summary(&self) -> WitnessSummary {
        let mut by_depth = vec![0usize; self.r + 1];
        for p in &self.pieces {
            by_depth[p.sigma.len()] += 1;
        }
        WitnessSummary { pieces: self.pieces.len(), pieces_by_depth: by_depth, cost: self.cost() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub pieces: usize,
    pub pieces_by_depth: Vec<usize>,
    pub cost: f64,
}

/// Built-in decomposition strategies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Every term as an order-0 piece: the mass bound.
    Trivial,
    /// Greedy nearest-point pairing of opposite-sign terms, repeated up to
    /// depth `r`.
    Pairing,
}

/// Two-sided bracket of `‖A‖_{B^r}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBound {
    pub r: usize,
    pub lower: f64,
    pub upper: f64,
    pub upper_witness: WitnessSummary,
    pub lower_witness: Option<String>,
}

/// Builds a decomposition of an order-0 chain with the given strategy.
pub fn decompose(a: &DiracChain, r: usize, strategy: Strategy) -> Result<Decomposition> {
    if a.order() > 0 {
        return Err(Error::Unsupported("norm bounds for chains of positive order".into()));
    }
    let mut pieces: Vec<Piece> = a
        .terms()
        .iter()
        .map(|t| Piece { sigma: Vec::new(), point: t.point.coords().to_vec(), index: t.index, coeff: t.coeff })
        .collect();
    if strategy == Strategy::Pairing {
        for _ in 0..r {
            pieces = pair_once(pieces);
        }
    }
    Ok(Decomposition { dim: a.dim(), grade: a.grade(), r, pieces })
}

/// `Σ cost` of a verified decomposition.
pub fn norm_upper(a: &DiracChain, d: &Decomposition) -> Result<f64> {
    d.verify(a)?;
    Ok(d.cost())
}

/// Pairs pieces of equal `(σ, index)` and opposite sign:
/// `c Δ_σ(p) − c Δ_σ(q) = Δ_{σ∘(q−p)}(p; −c)`, kept when `‖q − p‖ < 2` so
/// the new piece is cheaper than the two it replaces.
fn pair_once(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut groups: HashMap<(Vec<Vec<u64>>, MultiIndex), Vec<Piece>> = HashMap::new();
    let mut order = Vec::new();
    for p in pieces {
        let key = (p.sigma.iter().map(|u| u.iter().map(|x| x.to_bits()).collect()).collect(), p.index);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(p);
    }
    let mut out = Vec::new();
    for key in order {
        out.extend(pair_group(groups.remove(&key).expect("present")));
    }
    out
}

fn pair_group(group: Vec<Piece>) -> Vec<Piece> {
    let (mut pos, neg): (Vec<Piece>, Vec<Piece>) = group.into_iter().partition(|p| p.coeff > 0.0);
    if pos.is_empty() || neg.is_empty() {
        return pos.into_iter().chain(neg).collect();
    }
    pos.sort_by(|a, b| Point::new(&a.point).cmp(&Point::new(&b.point)));
    let mut grid = Grid::new(&neg);
    let mut remaining: Vec<f64> = neg.iter().map(|p| -p.coeff).collect();
    let mut out = Vec::new();
    for p in pos {
        let mut left = p.coeff;
        while left > 0.0 {
            let Some((qi, dist)) = grid.nearest(&p.point, &neg, 2.0) else { break };
            let m = left.min(remaining[qi]);
            let q = &neg[qi];
            let u: Vec<f64> = q.point.iter().zip(&p.point).map(|(a, b)| a - b).collect();
            debug_assert!(dist < 2.0);
            let mut sigma = p.sigma.clone();
            sigma.push(u);
            out.push(Piece { sigma, point: p.point.clone(), index: p.index, coeff: -m });
            left -= m;
            remaining[qi] -= m;
            if remaining[qi] <= 0.0 {
                grid.remove(qi, &neg[qi].point);
            }
        }
        if left > 0.0 {
            out.push(Piece { coeff: left, ..p });
        }
    }
    for (i, q) in neg.into_iter().enumerate() {
        if remaining[i] > 0.0 {
            out.push(Piece { coeff: -remaining[i], ..q });
        }
    }
    out
}

/// Uniform bucket grid for nearest-neighbour queries among live pieces.
struct Grid {
    cell: f64,
    lo: Vec<f64>,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl Grid {
    fn new(pts: &[Piece]) -> Self {
        let n = pts[0].point.len();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for p in pts {
            for i in 0..n {
                lo[i] = lo[i].min(p.point[i]);
                hi[i] = hi[i].max(p.point[i]);
            }
        }
        let extent = (0..n).map(|i| hi[i] - lo[i]).fold(0.0, f64::max);
        let per_axis = (pts.len() as f64).powf(1.0 / n as f64).max(1.0);
        let cell = if extent > 0.0 { extent / per_axis } else { 1.0 };
        let mut g = Grid { cell, lo, buckets: HashMap::new() };
        for (i, p) in pts.iter().enumerate() {
            let k = g.key(&p.point);
            g.buckets.entry(k).or_default().push(i);
        }
        g
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().zip(&self.lo).map(|(x, l)| ((x - l) / self.cell).floor() as i64).collect()
    }

    fn remove(&mut self, i: usize, p: &[f64]) {
        let k = self.key(p);
        if let Some(b) = self.buckets.get_mut(&k) {
            b.retain(|&x| x != i);
            if b.is_empty() {
                self.buckets.remove(&k);
            }
        }
    }

    /// Nearest live point strictly closer than `max`; ties go to the lowest
    /// index, which is the lexicographically smallest point.
    fn nearest(&self, p: &[f64], pts: &[Piece], max: f64) -> Option<(usize, f64)> {
        if self.buckets.is_empty() {
            return None;
        }
        let centre = self.key(p);
        let max_ring = (max / self.cell).ceil() as i64 + 1;
        let mut best: Option<(usize, f64)> = None;
        for ring in 0..=max_ring {
            // Every point in ring `ring` is at least `(ring − 1)·cell` away.
            if let Some((_, d)) = best {
                if d <= (ring - 1) as f64 * self.cell {
                    break;
                }
            }
            for k in shell(&centre, ring) {
                if let Some(b) = self.buckets.get(&k) {
                    for &i in b {
                        let d = dist(p, &pts[i].point);
                        if d < max && best.is_none_or(|(bi, bd)| d < bd || (d == bd && i < bi)) {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Integer points at Chebyshev distance exactly `ring` from `c`.
fn shell(c: &[i64], ring: i64) -> Vec<Vec<i64>> {
    let n = c.len();
    let mut out = Vec::new();
    let side = 2 * ring + 1;
    let total = (side as usize).pow(n as u32);
    for mut id in 0..total {
        let mut k = Vec::with_capacity(n);
        let mut on_shell = false;
        for &ci in c {
            let off = (id % side as usize) as i64 - ring;
            id /= side as usize;
            on_shell |= off.abs() == ring;
            k.push(ci + off);
        }
        if on_shell || ring == 0 {
            out.push(k);
        }
    }
    out
}

/// A form with a caller-certified bound on its `B^r` norm.
#[derive(Clone, Debug)]
pub struct Certified {
    pub label: String,
    pub form: Form,
    pub bound: f64,
}

impl Certified {
    pub fn new(label: impl Into<String>, form: Form, bound: f64) -> Self {
        Certified { label: label.into(), form, bound }
    }
}

/// `max |⨍_A ω| / ‖ω‖` over the dictionary, with the maximising label.
/// An empty dictionary certifies nothing and yields 0.
pub fn norm_lower(a: &DiracChain, dict: &[Certified]) -> Result<(f64, Option<String>)> {
    let mut best = (0.0, None);
    for c in dict {
        let v = c.form.integrate(a)?.abs() / c.bound;
        if v > best.0 {
            best = (v, Some(c.label.clone()));
        }
    }
    Ok(best)
}

/// Both bounds with the given strategy.
pub fn norm_bound(a: &DiracChain, r: usize, strategy: Strategy, dict: &[Certified]) -> Result<NormBound> {
    let d = decompose(a, r, strategy)?;
    let upper = norm_upper(a, &d)?;
    let (lower, label) = norm_lower(a, dict)?;
    Ok(NormBound { r, lower, upper, upper_witness: d.summary(), lower_witness: label })
}

/// The volume form and coordinate covectors, each with norm 1.
pub fn standard_dictionary(n: usize, k: usize) -> Vec<Certified> {
    MultiIndex::all_of_grade(n, k)
        .map(|i| Certified::new(format!("dx{i}"), Form::basis(n, i).expect("in range"), 1.0))
        .collect()
}

/// A sampled estimate of `‖ω‖_{B^r}`; never certified.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FormNormEstimate {
    pub value: f64,
    pub certified: bool,
    pub samples: usize,
}

/// Max over grid points of `|∂^σ f_I(p)|` for `|σ| ≤ r`.
pub fn form_norm_estimate(w: &Form, r: usize, bbox: &crate::represent::BBox, per_axis: usize) -> Result<FormNormEstimate> {
    let n = w.dim();
    let mut degrees = vec![crate::chains::Degree::zero(n)];
    let mut frontier = degrees.clone();
    for _ in 0..r {
        let mut next: Vec<crate::chains::Degree> = frontier.iter().flat_map(|d| (1..=n).map(move |a| d.bumped(a))).collect();
        next.sort();
        next.dedup();
        degrees.extend(next.iter().cloned());
        frontier = next;
    }
    let mut value: f64 = 0.0;
    let mut samples = 0;
    let total = per_axis.pow(n as u32);
    for mut id in 0..total {
        let mut p = vec![0.0; n];
        for i in 0..n {
            let t = if per_axis == 1 { 0.5 } else { (id % per_axis) as f64 / (per_axis - 1) as f64 };
            p[i] = bbox.lo[i] + t * (bbox.hi[i] - bbox.lo[i]);
            id /= per_axis;
        }
        for (_, f) in w.coeffs() {
            for d in &degrees {
                value = value.max(f.partial(d, &p)?.abs());
                samples += 1;
            }
        }
    }
    Ok(FormNormEstimate { value, certified: false, samples })
}

/// A region tested for containing convex hulls of difference supports.
pub trait Region {
    fn dim(&self) -> usize;
    fn contains_hull(&self, vertices: &[Vec<f64>]) -> bool;
}

/// Closed axis box; convex, so vertex membership is exact.
impl Region for crate::represent::BBox {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn contains_hull(&self, vertices: &[Vec<f64>]) -> bool {
        vertices.iter().all(|v| v.iter().enumerate().all(|(i, x)| self.lo[i] <= *x && *x <= self.hi[i]))
    }
}

/// Intersection of half-spaces `a · x ≤ b`; exact.
#[derive(Clone, Debug)]
pub struct HalfSpaces(pub Vec<(Vec<f64>, f64)>);

impl Region for HalfSpaces {
    fn dim(&self) -> usize {
        self.0.first().map_or(0, |(a, _)| a.len())
    }

    fn contains_hull(&self, vertices: &[Vec<f64>]) -> bool {
        vertices.iter().all(|v| self.0.iter().all(|(a, b)| a.iter().zip(v).map(|(x, y)| x * y).sum::<f64>() <= *b))
    }
}

/// A general predicate, tested on hull vertices and on `samples + 1`
/// evenly spaced points of every segment between two vertices.
pub struct Predicate<F> {
    pub dim: usize,
    pub inside: F,
    pub samples: usize,
}

impl<F: Fn(&[f64]) -> bool> Region for Predicate<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn contains_hull(&self, vertices: &[Vec<f64>]) -> bool {
        let s = self.samples.max(1);
        for (i, a) in vertices.iter().enumerate() {
            if !(self.inside)(a) {
                return false;
            }
            for b in &vertices[i + 1..] {
                for t in 1..s {
                    let t = t as f64 / s as f64;
                    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
                    if !(self.inside)(&p) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// True iff every piece's support hull lies in the region.
pub fn inside_check(d: &Decomposition, region: &dyn Region) -> bool {
    d.pieces.iter().all(|p| region.contains_hull(&p.hull_vertices()))
}
