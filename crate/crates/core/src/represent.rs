//! Dirac-chain approximants of classical domains.
//!
//! Every constructor takes a refinement level `j` and returns a finite chain.
//! A [`ChainFamily`] packages such a constructor so that integrals can be
//! tracked across levels.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::chains::{ChainBuilder, Degree, DiracChain, Point};
use crate::error::{check_dim, Error, Result};
use crate::exterior::{perp_basis, KVector, MultiIndex};
use crate::forms::{Field, Form};
use crate::operators::{extrude_const, mult, perp_chain, prederiv_const};

type Generator = dyn Fn(usize) -> Result<DiracChain> + Send + Sync;

/// A level-indexed sequence of Dirac chains standing in for a limit chain.
#[derive(Clone)]
pub struct ChainFamily {
    dim: usize,
    grade: usize,
    class_r: usize,
    descriptor: String,
    generator: Arc<Generator>,
}

impl fmt::Debug for ChainFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainFamily({}, n={}, k={}, r={})", self.descriptor, self.dim, self.grade, self.class_r)
    }
}

impl ChainFamily {
    pub fn new(
        dim: usize,
        grade: usize,
        class_r: usize,
        descriptor: impl Into<String>,
        generator: impl Fn(usize) -> Result<DiracChain> + Send + Sync + 'static,
    ) -> Self {
        ChainFamily { dim, grade, class_r, descriptor: descriptor.into(), generator: Arc::new(generator) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn class_r(&self) -> usize {
        self.class_r
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn level(&self, j: usize) -> Result<DiracChain> {
        let c = (self.generator)(j)?;
        check_dim(self.dim, c.dim())?;
        Ok(c)
    }

    /// Applies an operator levelwise, e.g. a boundary or a pushforward.
    pub fn map(
        &self,
        dim: usize,
        grade: usize,
        class_r: usize,
        name: &str,
        op: impl Fn(&DiracChain) -> Result<DiracChain> + Send + Sync + 'static,
    ) -> ChainFamily {
        let inner = self.clone();
        ChainFamily::new(dim, grade, class_r, format!("{name}({})", self.descriptor), move |j| op(&inner.level(j)?))
    }

    /// `⨍_{level j} ω` for each requested level, computed in parallel.
    pub fn integrals(&self, omega: &Form, levels: &[usize]) -> Result<Vec<f64>> {
        levels.par_iter().map(|&j| omega.integrate(&self.level(j)?)).collect()
    }

    /// Successive ratios `|I_{j+1} − I_j| / |I_j − I_{j−1}|`.
    pub fn cauchy_ratios(&self, omega: &Form, levels: &[usize]) -> Result<Vec<f64>> {
        let v = self.integrals(omega, levels)?;
        Ok(v.windows(3).map(|w| (w[2] - w[1]).abs() / (w[1] - w[0]).abs()).collect())
    }
}

/// The `k`-cube `corner + side·[0,1]^dirs` at level `j`: `2^{kj}` midpoints,
/// each carrying `orientation · side^k · 2^{-kj} e_dirs`.
pub fn cube_chain(corner: &[f64], side: f64, dirs: MultiIndex, orientation: f64, j: usize) -> Result<DiracChain> {
    let n = corner.len();
    if dirs.max_axis() > n {
        return Err(Error::BadAxis { axis: dirs.max_axis(), dim: n });
    }
    if side <= 0.0 {
        return Err(Error::Invalid(format!("cube side must be positive, got {side}")));
    }
    let edges: Vec<Vec<f64>> = dirs
        .axes()
        .map(|a| {
            let mut e = vec![0.0; n];
            e[a - 1] = side;
            e
        })
        .collect();
    parallelepiped(corner, &edges, orientation, j, Some(dirs))
}

/// Midpoint rule for `origin + Σ t_i edge_i`, `t ∈ [0,1]^k`, at level `j`.
fn parallelepiped(origin: &[f64], edges: &[Vec<f64>], w: f64, j: usize, basis: Option<MultiIndex>) -> Result<DiracChain> {
    let n = origin.len();
    let k = edges.len();
    let cells = 1usize << j;
    let scale = w * (0.5f64).powi((k * j) as i32);
    let alpha = match basis {
        Some(idx) => KVector::basis(n, idx)?.scale(edges.iter().map(|e| e.iter().map(|x| x * x).sum::<f64>().sqrt()).product()),
        None => {
            let refs: Vec<&[f64]> = edges.iter().map(Vec::as_slice).collect();
            KVector::from_vectors(n, &refs)?
        }
    }
    .scale(scale);
    if alpha.is_zero() {
        return Ok(DiracChain::zero(n, k));
    }
    let total = cells.pow(k as u32);
    let mut b = ChainBuilder::with_capacity(n, k, total * alpha.len());
    let mut t = vec![0usize; k];
    let h = 1.0 / cells as f64;
    for _ in 0..total {
        let mut p = origin.to_vec();
        for (e, &ti) in edges.iter().zip(&t) {
            let s = (ti as f64 + 0.5) * h;
            for (pc, ec) in p.iter_mut().zip(e) {
                *pc += s * ec;
            }
        }
        let p = Point::new(&p);
        for (idx, c) in alpha.iter() {
            b.add(p.clone(), Degree::zero(n), idx, c);
        }
        for d in t.iter_mut() {
            *d += 1;
            if *d < cells {
                break;
            }
            *d = 0;
        }
    }
    Ok(b.finish())
}

/// An axis-aligned bounding box `[lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BBox {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
            return Err(Error::Invalid("empty bounding box".into()));
        }
        Ok(BBox { lo: lo.to_vec(), hi: hi.to_vec() })
    }

    pub fn cube(lo: f64, hi: f64, n: usize) -> Self {
        BBox { lo: vec![lo; n], hi: vec![hi; n] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Uniform-depth dyadic cubes of side `2^{-j}` on a grid anchored at
/// `bbox.lo`, kept when every corner and the centre satisfy `inside`.
/// Each kept cube contributes its midpoint with weight `2^{-nj} e_{1..n}`.
pub fn open_set_chain(inside: impl Fn(&[f64]) -> bool + Sync, bbox: &BBox, j: usize) -> DiracChain {
    let n = bbox.dim();
    let h = (0.5f64).powi(j as i32);
    let counts: Vec<usize> = (0..n).map(|i| ((bbox.hi[i] - bbox.lo[i]) / h).ceil() as usize).collect();
    let total: usize = counts.iter().product();
    let w = h.powi(n as i32);
    let vol = MultiIndex::full(n);
    let cell = |mut id: usize| -> Option<Vec<f64>> {
        let mut lo = vec![0.0; n];
        for i in 0..n {
            lo[i] = bbox.lo[i] + (id % counts[i]) as f64 * h;
            id /= counts[i];
        }
        for mask in 0..(1usize << n) {
            let c: Vec<f64> = (0..n).map(|i| lo[i] + if mask >> i & 1 == 1 { h } else { 0.0 }).collect();
            if !inside(&c) {
                return None;
            }
        }
        let mid: Vec<f64> = lo.iter().map(|x| x + h / 2.0).collect();
        inside(&mid).then_some(mid)
    };
    let mids: Vec<Vec<f64>> = (0..total).into_par_iter().filter_map(cell).collect();
    let mut b = ChainBuilder::with_capacity(n, n, mids.len());
    for m in mids {
        b.add(Point::new(&m), Degree::zero(n), vol, w);
    }
    b.finish()
}

/// An affine cell for [`polyhedral_chain`].
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// Vertices `v_0, ..., v_k`, oriented by `(v_1 − v_0) ∧ ... ∧ (v_k − v_0)`.
    Simplex(Vec<Vec<f64>>),
    /// `origin + Σ t_i edge_i`, `t ∈ [0,1]^k`.
    Parallelepiped { origin: Vec<f64>, edges: Vec<Vec<f64>> },
}

impl Cell {
    pub fn dim(&self) -> usize {
        match self {
            Cell::Simplex(v) => v.first().map_or(0, Vec::len),
            Cell::Parallelepiped { origin, .. } => origin.len(),
        }
    }

    pub fn grade(&self) -> usize {
        match self {
            Cell::Simplex(v) => v.len().saturating_sub(1),
            Cell::Parallelepiped { edges, .. } => edges.len(),
        }
    }

    /// The unit square `[0,1]^2` with its standard orientation, translated.
    pub fn square(origin: &[f64], side: f64) -> Cell {
        Cell::Parallelepiped { origin: origin.to_vec(), edges: vec![vec![side, 0.0], vec![0.0, side]] }
    }

    fn chain(&self, w: f64, level: usize) -> Result<DiracChain> {
        match self {
            Cell::Parallelepiped { origin, edges } => parallelepiped(origin, edges, w, level, None),
            Cell::Simplex(v) => simplex_chain(v, w, level),
        }
    }
}

/// Weighted sum of cells, each refined to `level`. Cells of rank below their
/// grade contribute nothing.
pub fn polyhedral_chain(cells: &[(f64, Cell)], level: usize) -> Result<DiracChain> {
    let Some((_, first)) = cells.first() else {
        return Err(Error::Invalid("no cells given".into()));
    };
    let (n, k) = (first.dim(), first.grade());
    let mut b = ChainBuilder::new(n, k);
    for (w, c) in cells {
        check_dim(n, c.dim())?;
        crate::error::check_grade(k, c.grade())?;
        b.extend_scaled(&c.chain(*w, level)?, 1.0);
    }
    Ok(b.finish())
}

/// Edgewise subdivision of a `k`-simplex into `m^k` congruent pieces with
/// `m = 2^level`, each represented at its barycentre.
///
/// The simplex is the affine image of `{1 ≥ x_1 ≥ ... ≥ x_k ≥ 0}` under
/// `x ↦ v_0 + Σ_r x_r (v_r − v_{r−1})`; the pieces are the Kuhn simplices of
/// the `m`-grid that lie in that ordered simplex.
fn simplex_chain(v: &[Vec<f64>], w: f64, level: usize) -> Result<DiracChain> {
    let k = v.len() - 1;
    let n = v[0].len();
    let edges: Vec<Vec<f64>> = (1..=k).map(|i| v[i].iter().zip(&v[0]).map(|(a, b)| a - b).collect()).collect();
    let refs: Vec<&[f64]> = edges.iter().map(Vec::as_slice).collect();
    let m = 1usize << level;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let alpha = KVector::from_vectors(n, &refs)?.scale(w / fact / (m as f64).powi(k as i32));
    if alpha.is_zero() {
        return Ok(DiracChain::zero(n, k));
    }
    let steps: Vec<Vec<f64>> = (1..=k).map(|r| v[r].iter().zip(&v[r - 1]).map(|(a, b)| a - b).collect()).collect();
    let perms = permutations(k);
    let mut b = ChainBuilder::with_capacity(n, k, m.pow(k as u32) * alpha.len());
    let mut a = vec![0usize; k];
    for _ in 0..m.pow(k as u32) {
        for perm in &perms {
            // rank[i] = position of coordinate i in the permutation order.
            let mut rank = vec![0usize; k];
            for (pos, &i) in perm.iter().enumerate() {
                rank[i] = pos;
            }
            let in_ordered = (0..k.saturating_sub(1)).all(|i| a[i] > a[i + 1] || (a[i] == a[i + 1] && rank[i] < rank[i + 1]));
            if !in_ordered {
                continue;
            }
            let mut p = v[0].clone();
            for i in 0..k {
                let x = (a[i] as f64 + (k - rank[i]) as f64 / (k + 1) as f64) / m as f64;
                for (pc, sc) in p.iter_mut().zip(&steps[i]) {
                    *pc += x * sc;
                }
            }
            let p = Point::new(&p);
            for (idx, c) in alpha.iter() {
                b.add(p.clone(), Degree::zero(n), idx, c);
            }
        }
        for d in a.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    Ok(b.finish())
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `(p; e_I)` as the limit of `2^{jk}` times shrinking cubes centred at `p`
/// of side `2^{-j}`, each refined once internally.
pub fn point_limit_family(p: &[f64], idx: MultiIndex) -> ChainFamily {
    let p = p.to_vec();
    let k = idx.grade();
    ChainFamily::new(p.len(), k, 1, format!("point-limit {idx}"), move |j| {
        let side = (0.5f64).powi(j as i32);
        let corner: Vec<f64> =
            p.iter().enumerate().map(|(i, x)| if idx.contains(i + 1) { x - side / 2.0 } else { *x }).collect();
        Ok(cube_chain(&corner, side, idx, 1.0, 1)?.scale((2.0f64).powi((j * k) as i32)))
    })
}

/// Stage-`m` middle-third Cantor chain in `R`: the `2^m` surviving intervals,
/// renormalised by `(3/2)^m`, each split into `2^depth` midpoint cells.
///
/// The renormalised weight of one interval is `(3/2)^m 3^{-m} = 2^{-m}`, so
/// all weights are dyadic and `⨍ dx = 1` exactly.
pub fn cantor_chain(m: usize, depth: usize) -> DiracChain {
    let cells = 1usize << depth;
    let w = (0.5f64).powi((m + depth) as i32);
    let mut b = ChainBuilder::with_capacity(1, 1, (1 << m) * cells);
    for (lo, len) in cantor_intervals(m) {
        for c in 0..cells {
            b.add(Point::new(&[lo + len * (c as f64 + 0.5) / cells as f64]), Degree::zero(1), MultiIndex::single(1), w);
        }
    }
    b.finish()
}

/// `(left end, length)` of each stage-`m` Cantor interval.
pub fn cantor_intervals(m: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 1.0)];
    for _ in 0..m {
        out = out.into_iter().flat_map(|(a, l)| [(a, l / 3.0), (a + 2.0 * l / 3.0, l / 3.0)]).collect();
    }
    out
}

/// The endpoint 0-chain `Σ (q_i; (3/2)^m) − (p_i; (3/2)^m)` of stage `m`.
pub fn cantor_endpoints(m: usize) -> DiracChain {
    let w = 1.5f64.powi(m as i32);
    let mut b = ChainBuilder::new(1, 0);
    for (a, l) in cantor_intervals(m) {
        b.add(Point::new(&[a + l]), Degree::zero(1), MultiIndex::EMPTY, w);
        b.add(Point::new(&[a]), Degree::zero(1), MultiIndex::EMPTY, -w);
    }
    b.finish()
}

/// Corners `a` and side `s` of the `3^m` stage-`m` Sierpinski triangles
/// `(a, a + s e_1, a + s e_2)` inside the unit right triangle.
pub fn sierpinski_triangles(m: usize) -> Vec<([f64; 2], f64)> {
    let mut out = vec![([0.0, 0.0], 1.0)];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|([x, y], s)| {
                let h = s / 2.0;
                [([x, y], h), ([x + h, y], h), ([x, y + h], h)]
            })
            .collect();
    }
    out
}

/// Stage-`m` Sierpinski 2-chain on `(0,0), (1,0), (0,1)` renormalised by
/// `(4/3)^m`, so `⨍ dV = 1/2` at every stage. Each triangle is refined to
/// `depth` by [`polyhedral_chain`].
pub fn sierpinski_chain(m: usize, depth: usize) -> Result<DiracChain> {
    let w = (4.0f64 / 3.0).powi(m as i32);
    let cells: Vec<(f64, Cell)> = sierpinski_triangles(m)
        .into_iter()
        .map(|([x, y], s)| (w, Cell::Simplex(vec![vec![x, y], vec![x + s, y], vec![x, y + s]])))
        .collect();
    polyhedral_chain(&cells, depth)
}

/// `X̃ = Σ_I m_{f_I} E_{e_I} ⊥ Ũ` for a `k`-vector field `X = Σ f_I e_I`.
pub fn vectorfield_chain(
    x: &[(MultiIndex, Field)],
    inside: impl Fn(&[f64]) -> bool + Sync,
    bbox: &BBox,
    level: usize,
) -> Result<DiracChain> {
    let n = bbox.dim();
    let Some(k) = x.first().map(|(i, _)| i.grade()) else {
        return Err(Error::Invalid("empty multivector field".into()));
    };
    let base = perp_chain(&open_set_chain(inside, bbox, level));
    debug_assert_eq!(perp_basis(n, MultiIndex::full(n)).0, MultiIndex::EMPTY);
    let mut b = ChainBuilder::new(n, k);
    for (idx, f) in x {
        crate::error::check_grade(k, idx.grade())?;
        let mut c = base.clone();
        for axis in idx.axes().collect::<Vec<_>>().into_iter().rev() {
            let mut e = vec![0.0; n];
            e[axis - 1] = 1.0;
            c = extrude_const(&e, &c)?;
        }
        b.extend_scaled(&mult(f, &c)?, 1.0);
    }
    Ok(b.finish())
}

/// The dipole cell `P_v σ̃`.
pub fn dipole_cell(v: &[f64], cell: &DiracChain) -> Result<DiracChain> {
    prederiv_const(v, cell)
}

/// Unit `n`-cube `[0,1]^n` as a family.
pub fn unit_cube_family(n: usize) -> ChainFamily {
    ChainFamily::new(n, n, 1, format!("unit {n}-cube"), move |j| cube_chain(&vec![0.0; n], 1.0, MultiIndex::full(n), 1.0, j))
}

/// The open unit disk in `R^2`.
pub fn unit_disk(p: &[f64]) -> bool {
    p[0] * p[0] + p[1] * p[1] < 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::boundary;

    fn vol(n: usize) -> Form {
        Form::volume(n)
    }

    #[test]
    fn cube_examples() {
        let c = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, 1).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.terms().iter().all(|t| t.coeff == 0.25));
        for j in 0..=10 {
            let c = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, j).unwrap();
            assert_eq!(vol(2).integrate(&c).unwrap(), 1.0);
        }
        let c0 = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, 0).unwrap();
        assert_eq!(c0.terms()[0].point.coords(), &[0.5, 0.5]);
        let edge = cube_chain(&[0.0, 0.25, 0.0], 0.5, MultiIndex::single(2), -1.0, 3).unwrap();
        let dy = Form::basis(3, MultiIndex::single(2)).unwrap();
        assert_eq!(dy.integrate(&edge).unwrap(), -0.5);
    }

    #[test]
    fn open_sets() {
        let sq = BBox::cube(0.0, 1.0, 2);
        let closed = |p: &[f64]| p.iter().all(|&x| (0.0..=1.0).contains(&x));
        for j in 0..6 {
            assert_eq!(vol(2).integrate(&open_set_chain(closed, &sq, j)).unwrap(), 1.0);
        }
        let open = |p: &[f64]| p.iter().all(|&x| 0.0 < x && x < 1.0);
        let v4 = vol(2).integrate(&open_set_chain(open, &sq, 4)).unwrap();
        assert_eq!(v4, (1.0 - 2.0 / 16.0f64).powi(2));
        let disk = vol(2).integrate(&open_set_chain(unit_disk, &BBox::cube(-1.0, 1.0, 2), 8)).unwrap();
        // Independent oracle: Simpson quadrature of 4∫_0^1 sqrt(1 - x^2).
        let n = 20000;
        let h = 1.0 / n as f64;
        let s: f64 = (0..=n)
            .map(|i| {
                let x = i as f64 * h;
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * (1.0 - x * x).max(0.0).sqrt()
            })
            .sum::<f64>()
            * h
            / 3.0;
        assert!((disk - 4.0 * s).abs() / (4.0 * s) < 1e-2, "{disk}");
        assert!(open_set_chain(|_| false, &sq, 3).is_zero());
        let mut last = 0.0;
        for j in 1..8 {
            let v = vol(2).integrate(&open_set_chain(unit_disk, &BBox::cube(-1.0, 1.0, 2), j)).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn polyhedra() {
        let two = polyhedral_chain(&[(1.0, Cell::square(&[0.0, 0.0], 1.0)), (1.0, Cell::square(&[1.0, 0.0], 1.0))], 3).unwrap();
        assert_eq!(vol(2).integrate(&two).unwrap(), 2.0);
        let cancel = polyhedral_chain(&[(1.0, Cell::square(&[0.0, 0.0], 1.0)), (-1.0, Cell::square(&[0.0, 0.0], 1.0))], 3).unwrap();
        assert!(cancel.is_zero());
        let tri = Cell::Simplex(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        for level in 0..6 {
            let c = polyhedral_chain(&[(1.0, tri.clone())], level).unwrap();
            assert_eq!(c.len(), 1 << (2 * level));
            assert!((vol(2).integrate(&c).unwrap() - 0.5).abs() <= 1e-15);
            // All barycentres are inside the triangle.
            assert!(c.terms().iter().all(|t| t.point[0] > 0.0 && t.point[1] > 0.0 && t.point[0] + t.point[1] < 1.0));
        }
        // Second moment converges: ∫_T x^2 = 1/12.
        let x2 = Form::new(2, 2, [(MultiIndex::full(2), crate::forms::parse_field("x1^2", 2).unwrap())]).unwrap();
        let e5 = (x2.integrate(&polyhedral_chain(&[(1.0, tri.clone())], 5).unwrap()).unwrap() - 1.0 / 12.0).abs();
        assert!(e5 < 1e-3);
        let flat = Cell::Simplex(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(polyhedral_chain(&[(1.0, flat)], 2).unwrap().is_zero());
        let tet = Cell::Simplex(vec![vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let c = polyhedral_chain(&[(1.0, tet)], 2).unwrap();
        assert_eq!(c.len(), 64);
        assert!((vol(3).integrate(&c).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn point_limits() {
        let fam = point_limit_family(&[1.0], MultiIndex::single(1));
        let dx = Form::basis(1, MultiIndex::single(1)).unwrap();
        let xdx = Form::parse(1, "dx1: x1").unwrap();
        let x2dx = Form::parse(1, "dx1: x1^2").unwrap();
        for j in 0..8 {
            let c = fam.level(j).unwrap();
            assert_eq!(dx.integrate(&c).unwrap(), 1.0);
            assert!((xdx.integrate(&c).unwrap() - 1.0).abs() <= (0.5f64).powi(j as i32));
            assert!((x2dx.integrate(&c).unwrap() - 1.0).abs() <= (0.5f64).powi(j as i32));
        }
        let vfam = point_limit_family(&[0.25, 0.5], MultiIndex::full(2));
        assert_eq!(vol(2).integrate(&vfam.level(4).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn cantor() {
        let dx = Form::basis(1, MultiIndex::single(1)).unwrap();
        let x = Form::scalar(1, Field::coord(1));
        for m in 0..=10 {
            let c = cantor_chain(m, 2);
            assert_eq!(dx.integrate(&c).unwrap(), 1.0);
            assert_eq!(x.integrate(&boundary(&c)).unwrap(), 1.0);
            assert!((x.integrate(&cantor_endpoints(m)).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sierpinski() {
        let mut last_len = 0;
        for m in 0..6 {
            let c = sierpinski_chain(m, 0).unwrap();
            assert_eq!(c.len(), 3usize.pow(m as u32));
            assert!((vol(2).integrate(&c).unwrap() - 0.5).abs() < 1e-14);
            let b = boundary(&c);
            assert!(!b.is_zero());
            if m > 0 {
                assert_eq!(b.len(), 3 * last_len);
            }
            last_len = b.len();
        }
    }

    #[test]
    fn vector_field_chains() {
        let sq = BBox::cube(0.0, 1.0, 2);
        let closed = |p: &[f64]| p.iter().all(|&x| (0.0..=1.0).contains(&x));
        let e1 = [(MultiIndex::single(1), Field::one())];
        let dx = Form::basis(2, MultiIndex::single(1)).unwrap();
        let dy = Form::basis(2, MultiIndex::single(2)).unwrap();
        let c = vectorfield_chain(&e1, closed, &sq, 4).unwrap();
        assert_eq!(dx.integrate(&c).unwrap(), 1.0);
        assert_eq!(dy.integrate(&c).unwrap(), 0.0);
        let xe1 = [(MultiIndex::single(1), Field::coord(1))];
        for j in 2..8 {
            let c = vectorfield_chain(&xe1, closed, &sq, j).unwrap();
            assert!((dx.integrate(&c).unwrap() - 0.5).abs() <= (0.5f64).powi(j as i32));
        }
    }

    #[test]
    fn dipoles() {
        let f = Form::scalar(2, crate::forms::parse_field("x1^2 * x2", 2).unwrap());
        let pt = DiracChain::element(&[0.5, 2.0], &KVector::scalar(2, 1.0)).unwrap();
        assert_eq!(f.integrate(&dipole_cell(&[1.0, 0.0], &pt).unwrap()).unwrap(), 2.0);
        let ydx = Form::parse(2, "dx1: x2").unwrap();
        for level in 1..6 {
            let seg = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::single(1), 1.0, level).unwrap();
            let d = dipole_cell(&[0.0, 1.0], &seg).unwrap();
            assert!((ydx.integrate(&d).unwrap() - 1.0).abs() <= (0.5f64).powi(level as i32));
        }
        assert!(dipole_cell(&[0.0, 0.0], &pt).unwrap().is_zero());
    }

    #[test]
    fn family_ratios() {
        let fam = unit_cube_family(2);
        let w = Form::parse(2, "dx1 dx2: x1^2 * x2").unwrap();
        let r = fam.cauchy_ratios(&w, &[1, 2, 3, 4, 5, 6]).unwrap();
        assert!(r.iter().all(|&q| q < 1.0), "{r:?}");
    }
}
