//! Chains carried by the flow of a vector field.
//!
//! Points move by RK4 on `x' = V(x)` together with the variational equation
//! `M' = DV(x) M`, so each evolved term is an exact pushforward through the
//! numerically integrated flow map.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::chains::{ChainBuilder, Degree, DiracChain, Point};
use crate::error::{check_dim, Error, Result};
use crate::exterior::KVector;
use crate::forms::{Field, Form, VectorField};
use crate::operators::{boundary, extrude, prederiv, prederiv_const};
use crate::represent::BBox;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowConfig {
    /// Maximum RK4 step.
    pub h_t: f64,
    /// Midpoint subintervals for trace chains.
    pub n_sub: usize,
    /// Trajectories leaving this box are an error.
    pub bounds: Option<BBox>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { h_t: 1e-3, n_sub: 64, bounds: None }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_t > 0.0) || self.n_sub == 0 {
            return Err(Error::Invalid(format!("flow config needs h_t > 0 and N ≥ 1, got {self:?}")));
        }
        Ok(())
    }
}

/// A vector field with its Jacobian fields prepared once.
pub struct Flow {
    v: VectorField,
    jac: Vec<Vec<Field>>,
    affine: bool,
    cfg: FlowConfig,
}

impl Flow {
    pub fn new(v: &VectorField, cfg: &FlowConfig) -> Result<Self> {
        cfg.validate()?;
        let jac = v.jacobian_fields()?;
        let affine = jac.iter().flatten().all(Field::is_constant);
        Ok(Flow { v: v.clone(), jac, affine, cfg: cfg.clone() })
    }

    pub fn field(&self) -> &VectorField {
        &self.v
    }

    pub fn config(&self) -> &FlowConfig {
        &self.cfg
    }

    /// True when `V` is affine, so the flow maps are affine too.
    pub fn is_affine(&self) -> bool {
        self.affine
    }

    fn rhs(&self, x: &[f64], m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
        let n = x.len();
        let dv = DMatrix::from_fn(n, n, |r, c| self.jac[r][c].value(x));
        (self.v.value(x), dv * m)
    }

    /// Time-`t` image of `p` and the Jacobian `Dφ_t(p)`.
    pub fn point(&self, p: &[f64], t: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.advance(p.to_vec(), DMatrix::identity(p.len(), p.len()), 0.0, t)
    }

    fn advance(&self, mut x: Vec<f64>, mut m: DMatrix<f64>, t0: f64, t1: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
        check_dim(self.v.dim(), x.len())?;
        let span = t1 - t0;
        let steps = (span.abs() / self.cfg.h_t).ceil().max(if span == 0.0 { 0.0 } else { 1.0 }) as usize;
        let dt = if steps == 0 { 0.0 } else { span / steps as f64 };
        let axpy = |x: &[f64], k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        for s in 0..steps {
            let (k1, l1) = self.rhs(&x, &m);
            let (k2, l2) = self.rhs(&axpy(&x, &k1, dt / 2.0), &(&m + &l1 * (dt / 2.0)));
            let (k3, l3) = self.rhs(&axpy(&x, &k2, dt / 2.0), &(&m + &l2 * (dt / 2.0)));
            let (k4, l4) = self.rhs(&axpy(&x, &k3, dt), &(&m + &l3 * dt));
            for i in 0..x.len() {
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            m += (l1 + l2 * 2.0 + l3 * 2.0 + l4) * (dt / 6.0);
            if let Some(b) = &self.cfg.bounds {
                if x.iter().enumerate().any(|(i, xi)| !(b.lo[i] <= *xi && *xi <= b.hi[i])) {
                    return Err(Error::LeftRegion { t: t0 + dt * (s + 1) as f64 });
                }
            }
        }
        Ok((x, m))
    }

    /// For affine `V = Ax + b`, the RK4 step is linear in the initial data,
    /// so stepping the augmented matrix `[[A, b], [0, 0]]` from the identity
    /// reproduces every trajectory at once. Returns `[[Dφ, φ(0)], [0, 1]]`
    /// at each time.
    fn affine_maps(&self, ts: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let n = self.v.dim();
        let origin = vec![0.0; n];
        let b = self.v.value(&origin);
        let a = DMatrix::from_fn(n + 1, n + 1, |r, c| match (r < n, c < n) {
            (true, true) => self.jac[r][c].value(&origin),
            (true, false) => b[r],
            _ => 0.0,
        });
        let mut g = DMatrix::identity(n + 1, n + 1);
        let mut now = 0.0;
        let mut out = Vec::with_capacity(ts.len());
        for &ti in ts {
            let span = ti - now;
            let steps = (span.abs() / self.cfg.h_t).ceil().max(if span == 0.0 { 0.0 } else { 1.0 }) as usize;
            let dt = if steps == 0 { 0.0 } else { span / steps as f64 };
            for _ in 0..steps {
                let k1 = &a * &g;
                let k2 = &a * (&g + &k1 * (dt / 2.0));
                let k3 = &a * (&g + &k2 * (dt / 2.0));
                let k4 = &a * (&g + &k3 * dt);
                g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
            now = ti;
            out.push(g.clone());
        }
        Ok(out)
    }

    /// `J_t = φ_{t*} J`. Positive-order chains are accepted for affine
    /// fields only, using `φ_* P_u = P_{Mu} φ_*`.
    pub fn evolve(&self, j: &DiracChain, t: f64) -> Result<DiracChain> {
        self.evolve_all(j, &[t]).map(|mut v| v.remove(0))
    }

    /// `J_t` at each of the increasing times `ts`, integrating each
    /// trajectory once.
    pub fn evolve_all(&self, j: &DiracChain, ts: &[f64]) -> Result<Vec<DiracChain>> {
        check_dim(self.v.dim(), j.dim())?;
        if j.order() > 0 && !self.affine {
            return Err(Error::Unsupported(format!("evolving an order-{} chain under a nonaffine flow", j.order())));
        }
        let n = j.dim();
        let push = |t: &crate::chains::ChainTerm, x: &[f64], m: &DMatrix<f64>| -> Result<DiracChain> {
            let alpha = KVector::from_terms(n, t.index.grade(), [(t.index, t.coeff)])?.linear_map(m)?;
            let mut b = ChainBuilder::new(n, j.grade());
            let q = Point::new(x);
            for (idx, c) in alpha.iter() {
                b.add(q.clone(), Degree::zero(n), idx, c);
            }
            let mut image = b.finish();
            for (axis, &count) in t.degree.slots().iter().enumerate() {
                let col: Vec<f64> = m.column(axis).iter().copied().collect();
                for _ in 0..count {
                    image = prederiv_const(&col, &image)?;
                }
            }
            Ok(image)
        };
        let per_term: Vec<Vec<DiracChain>> = if self.affine && self.cfg.bounds.is_none() {
            // One augmented map per time serves every trajectory.
            let maps = self.affine_maps(ts)?;
            j.terms()
                .par_iter()
                .map(|t| {
                    let p = t.point.coords();
                    maps.iter()
                        .map(|g| {
                            let x: Vec<f64> = (0..n).map(|r| (0..n).map(|c| g[(r, c)] * p[c]).sum::<f64>() + g[(r, n)]).collect();
                            push(t, &x, &g.view((0, 0), (n, n)).into_owned())
                        })
                        .collect()
                })
                .collect::<Result<_>>()?
        } else {
            j.terms()
                .par_iter()
                .map(|t| {
                    let mut x = t.point.coords().to_vec();
                    let mut m = DMatrix::identity(n, n);
                    let mut now = 0.0;
                    let mut out = Vec::with_capacity(ts.len());
                    for &ti in ts {
                        (x, m) = self.advance(x, m, now, ti)?;
                        now = ti;
                        out.push(push(t, &x, &m)?);
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?
        };
        Ok((0..ts.len())
            .map(|i| {
                let mut b = ChainBuilder::with_capacity(n, j.grade(), j.len());
                for chains in &per_term {
                    b.extend_scaled(&chains[i], 1.0);
                }
                b.finish()
            })
            .collect())
    }

    /// `{J_t}_a^b ≈ Σ_m Δt · J_{t_m}` at the midpoints `t_m` of `n_sub`
    /// subintervals, so `⨍ ω` over it is the midpoint rule for
    /// `∫_a^b ⨍_{J_t} ω dt`.
    pub fn trace(&self, j: &DiracChain, a: f64, b: f64) -> Result<DiracChain> {
        let n = self.cfg.n_sub;
        let dt = (b - a) / n as f64;
        let ts: Vec<f64> = (0..n).map(|m| a + (m as f64 + 0.5) * dt).collect();
        let slices = self.evolve_all(j, &ts)?;
        let mut out = ChainBuilder::new(j.dim(), j.grade());
        for s in &slices {
            out.extend_scaled(s, dt);
        }
        Ok(out.finish())
    }
}

/// `flow_point` as a free function.
pub fn flow_point(v: &VectorField, p: &[f64], t: f64, cfg: &FlowConfig) -> Result<(Vec<f64>, DMatrix<f64>)> {
    Flow::new(v, cfg)?.point(p, t)
}

pub fn evolve(j: &DiracChain, v: &VectorField, t: f64, cfg: &FlowConfig) -> Result<DiracChain> {
    Flow::new(v, cfg)?.evolve(j, t)
}

pub fn trace_chain(j: &DiracChain, v: &VectorField, a: f64, b: f64, cfg: &FlowConfig) -> Result<DiracChain> {
    Flow::new(v, cfg)?.trace(j, a, b)
}

/// Two sides of a flow identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub cfg: FlowConfig,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, f64)>,
}

impl FlowReport {
    fn new(name: &str, lhs: f64, rhs: f64, cfg: &FlowConfig) -> Self {
        FlowReport { name: name.into(), lhs, rhs, abs_err: (lhs - rhs).abs(), cfg: cfg.clone(), extra: Vec::new() }
    }
}

/// `⨍_{J_b} ω − ⨍_{J_a} ω = ⨍_{{J_t}_a^b} L_V ω`.
pub fn ftc_flow_verify(j: &DiracChain, v: &VectorField, w: &Form, a: f64, b: f64, cfg: &FlowConfig) -> Result<FlowReport> {
    let flow = Flow::new(v, cfg)?;
    let ends = flow.evolve_all(j, &[a, b])?;
    let lhs = w.integrate(&ends[1])? - w.integrate(&ends[0])?;
    let rhs = w.lie(v)?.integrate(&flow.trace(j, a, b)?)?;
    Ok(FlowReport::new("ftc-flow", lhs, rhs, cfg))
}

/// `⨍_{{J_t}_a^b} d L_V ω = ⨍_{∂J_b} ω − ⨍_{∂J_a} ω`.
pub fn stokes_flow_verify(j: &DiracChain, v: &VectorField, w: &Form, a: f64, b: f64, cfg: &FlowConfig) -> Result<FlowReport> {
    let flow = Flow::new(v, cfg)?;
    let ends = flow.evolve_all(j, &[a, b])?;
    let rhs = w.integrate(&boundary(&ends[1]))? - w.integrate(&boundary(&ends[0]))?;
    let lhs = w.lie(v)?.d()?.integrate(&flow.trace(j, a, b)?)?;
    Ok(FlowReport::new("stokes-flow", lhs, rhs, cfg))
}

/// A time-dependent form with its time derivative.
pub struct TimeForm<'a> {
    pub at: &'a (dyn Fn(f64) -> Result<Form> + Sync),
    pub dt: &'a (dyn Fn(f64) -> Result<Form> + Sync),
}

/// Central difference of `t ↦ ⨍_{J_t} ω_t` with step `h`.
fn fd_time_derivative(flow: &Flow, j: &DiracChain, w: &TimeForm<'_>, t: f64, h: f64) -> Result<f64> {
    let ends = flow.evolve_all(j, &[t - h, t + h])?;
    Ok(((w.at)(t + h)?.integrate(&ends[1])? - (w.at)(t - h)?.integrate(&ends[0])?) / (2.0 * h))
}

/// Generalized Leibniz rule for `J_t = φ_{t*} J`:
/// `d/dt ⨍_{J_t} ω_t = ⨍_{J_t} ∂_t ω_t + ⨍_{∂J_t/∂t} ω_t` with
/// `∂J_t/∂t = P_V J_t`. The difference-quotient chain
/// `(J_{t+h} − J_{t−h}) / 2h` is reported as well.
pub fn leibniz_verify(j: &DiracChain, v: &VectorField, w: &TimeForm<'_>, t: f64, h: f64, cfg: &FlowConfig) -> Result<FlowReport> {
    let flow = Flow::new(v, cfg)?;
    let lhs = fd_time_derivative(&flow, j, w, t, h)?;
    let jt = flow.evolve(j, t)?;
    let wt = (w.at)(t)?;
    let rhs = (w.dt)(t)?.integrate(&jt)? + wt.integrate(&prederiv(v, &jt)?)?;
    let ends = flow.evolve_all(j, &[t - h, t + h])?;
    let dj = ends[1].sub(&ends[0])?.scale(1.0 / (2.0 * h));
    let mut r = FlowReport::new("leibniz", lhs, rhs, cfg);
    r.extra.push(("rhs_difference_chain".into(), (w.dt)(t)?.integrate(&jt)? + wt.integrate(&dj)?));
    Ok(r)
}

/// Reynolds transport in three-term form,
/// `⨍_{J_t} ∂_t ω + ⨍_{∂J_t} i_V ω + ⨍_{E_V J_t} dω`, against the central
/// time difference; the two-term form `⨍_{J_t} ∂_t ω + ⨍_{P_V J_t} ω` is
/// reported in `extra`.
pub fn reynolds_verify(j: &DiracChain, v: &VectorField, w: &TimeForm<'_>, t: f64, h: f64, cfg: &FlowConfig) -> Result<FlowReport> {
    let flow = Flow::new(v, cfg)?;
    let jt = flow.evolve(j, t)?;
    let wt = (w.at)(t)?;
    let n = j.dim();
    let time = (w.dt)(t)?.integrate(&jt)?;
    let flux = if j.grade() > 0 { wt.interior(v)?.integrate(&boundary(&jt))? } else { 0.0 };
    let bulk = if j.grade() < n { wt.d()?.integrate(&extrude(v, &jt)?)? } else { 0.0 };
    let three = time + flux + bulk;
    let two = time + wt.integrate(&prederiv(v, &jt)?)?;
    let fd = fd_time_derivative(&flow, j, w, t, h)?;
    let mut r = FlowReport::new("reynolds", three, fd, cfg);
    r.extra = vec![
        ("time_term".into(), time),
        ("boundary_term".into(), flux),
        ("extrusion_term".into(), bulk),
        ("two_term".into(), two),
    ];
    Ok(r)
}

/// One row of an FTC refinement table over `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementRow {
    pub n_sub: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub ratio: Option<f64>,
}

/// FTC errors as `N` runs through `ns`; `ratio` is the error reduction
/// relative to the previous row.
pub fn ftc_refinement(j: &DiracChain, v: &VectorField, w: &Form, a: f64, b: f64, cfg: &FlowConfig, ns: &[usize]) -> Result<Vec<RefinementRow>> {
    let mut rows: Vec<RefinementRow> = Vec::new();
    for &n_sub in ns {
        let r = ftc_flow_verify(j, v, w, a, b, &FlowConfig { n_sub, ..cfg.clone() })?;
        let ratio = rows.last().map(|p| p.abs_err / r.abs_err);
        rows.push(RefinementRow { n_sub, lhs: r.lhs, rhs: r.rhs, abs_err: r.abs_err, ratio });
    }
    Ok(rows)
}
