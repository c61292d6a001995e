//! Convergence tables behind `chaincalc converge`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use clap::ValueEnum;
use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;

use super::report::{Case, Report, ReportBuilder};
use super::verify::sample_rng;
use crate::chains::DiracChain;
use crate::error::{Error, Result};
use crate::exterior::MultiIndex;
use crate::forms::{Form, SmoothMap};
use crate::operators::{boundary, laplace, pushforward};
use crate::represent::{cube_chain, open_set_chain, unit_disk, BBox};
use crate::sample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Stokes,
    GaussGreen,
    KelvinStokes,
    HigherDiv,
    ChangeOfVars,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::Stokes => "stokes",
            Theorem::GaussGreen => "gauss-green",
            Theorem::KelvinStokes => "kelvin-stokes",
            Theorem::HigherDiv => "higher-div",
            Theorem::ChangeOfVars => "change-of-vars",
        }
    }

    /// Default form in the mini-language and its ambient dimension.
    pub fn default_form(self) -> (usize, &'static str) {
        match self {
            Theorem::Stokes => (2, "dx2: x1"),
            // ⋆(x dx + y dy) = x dy − y dx.
            Theorem::GaussGreen => (2, "dx1: -x2; dx2: x1"),
            Theorem::KelvinStokes => (3, "dx1: -x2; dx2: x1; dx3: x1*x2"),
            Theorem::HigherDiv => (3, "random"),
            Theorem::ChangeOfVars => (2, "dx1 dx2: x1^2 + x2 + 1"),
        }
    }
}

/// The tilted plane `(u, v) ↦ (u, v, u/2 + v/4)`.
pub fn kelvin_stokes_patch() -> SmoothMap {
    let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.5, 0.25]);
    SmoothMap::affine(&m, &[0.0, 0.0, 0.0]).expect("3×2 map")
}

/// A smooth nonlinear diffeomorphism of a neighbourhood of the unit square.
pub fn change_of_vars_map() -> SmoothMap {
    SmoothMap::parse(2, &["x1 + 0.25*x2^2", "x2 + 0.125*sin(2*x1)"]).expect("valid map")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub err: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub theorem: Theorem,
    pub form: String,
    /// The classical value `err` is measured against.
    pub exact: f64,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("rows serialize");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergeOptions {
    pub levels: (usize, usize),
    pub form: Option<String>,
    pub seed: u64,
    pub samples: usize,
    /// Accepted band for successive error ratios.
    pub ratio_band: (f64, f64),
}

impl Default for ConvergeOptions {
    fn default() -> Self {
        ConvergeOptions { levels: (3, 8), form: None, seed: 7, samples: 50, ratio_band: (0.35, 0.65) }
    }
}

fn gl() -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(40).expect("nonzero"))
}

/// `∫_{[0,1]²} g` by tensor Gauss–Legendre.
fn square_quad(g: impl Fn(f64, f64) -> f64) -> f64 {
    let q = gl();
    q.integrate(0.0, 1.0, |u| q.integrate(0.0, 1.0, |v| g(u, v)))
}

/// `∫_{unit disk} g` in polar coordinates.
fn disk_quad(g: impl Fn(f64, f64) -> f64) -> f64 {
    let q = gl();
    q.integrate(0.0, 1.0, |r| q.integrate(0.0, 2.0 * PI, |t| r * g(r * t.cos(), r * t.sin())))
}

fn top_coeff(w: &Form) -> crate::forms::Field {
    w.coeff(MultiIndex::full(w.dim()))
}

fn open_square(p: &[f64]) -> bool {
    p.iter().all(|x| 0.0 < *x && *x < 1.0)
}

fn parse_form(theorem: Theorem, src: Option<&str>, grade: usize) -> Result<(Form, String)> {
    let (n, default) = theorem.default_form();
    let src = src.unwrap_or(default).to_string();
    let w = Form::parse(n, &src)?;
    if w.grade() != grade {
        return Err(Error::Invalid(format!("{} needs a {grade}-form, got grade {}", theorem.name(), w.grade())));
    }
    Ok((w, src))
}

fn with_ratios(mut rows: Vec<Row>) -> Vec<Row> {
    for i in 1..rows.len() {
        rows[i].ratio = Some(rows[i].err / rows[i - 1].err);
    }
    rows
}

/// Boundary-pairing table: `lhs = ⨍_{∂J_j} ω`, `rhs = ⨍_{J_j} dω`.
fn stokes_table(
    theorem: Theorem,
    w: Form,
    src: String,
    exact: f64,
    levels: (usize, usize),
    family: impl Fn(usize) -> Result<DiracChain>,
) -> Result<Table> {
    let dw = w.d()?;
    let rows = (levels.0..=levels.1)
        .map(|j| {
            let c = family(j)?;
            let lhs = w.integrate(&boundary(&c))?;
            let rhs = dw.integrate(&c)?;
            Ok(Row { j, lhs, rhs, err: (lhs - exact).abs(), ratio: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { theorem, form: src, exact, rows: with_ratios(rows) })
}

pub fn table(theorem: Theorem, opts: &ConvergeOptions) -> Result<Table> {
    let levels = opts.levels;
    if levels.0 > levels.1 {
        return Err(Error::Invalid(format!("empty level range {}..{}", levels.0, levels.1)));
    }
    let form = opts.form.as_deref();
    match theorem {
        Theorem::Stokes => {
            let (w, src) = parse_form(theorem, form, 1)?;
            let dw = w.d()?;
            let g = top_coeff(&dw);
            let exact = square_quad(|u, v| g.value(&[u, v]));
            let bx = BBox::cube(0.0, 1.0, 2);
            stokes_table(theorem, w, src, exact, levels, |j| Ok(open_set_chain(open_square, &bx, j)))
        }
        Theorem::GaussGreen => {
            let (w, src) = parse_form(theorem, form, 1)?;
            let dw = w.d()?;
            let g = top_coeff(&dw);
            let exact = disk_quad(|x, y| g.value(&[x, y]));
            let bx = BBox::cube(-1.0, 1.0, 2);
            stokes_table(theorem, w, src, exact, levels, |j| Ok(open_set_chain(unit_disk, &bx, j)))
        }
        Theorem::KelvinStokes => {
            let (w, src) = parse_form(theorem, form, 1)?;
            let f = kelvin_stokes_patch();
            let pulled = w.d()?.pullback(&f)?;
            let g = top_coeff(&pulled);
            let exact = square_quad(|u, v| g.value(&[u, v]));
            let bx = BBox::cube(0.0, 1.0, 2);
            stokes_table(theorem, w, src, exact, levels, |j| pushforward(&f, &open_set_chain(open_square, &bx, j)))
        }
        Theorem::ChangeOfVars => {
            let (w, src) = parse_form(theorem, form, 2)?;
            let f = change_of_vars_map();
            let pulled = w.pullback(&f)?;
            let g = top_coeff(&pulled);
            let exact = square_quad(|u, v| g.value(&[u, v]));
            let rows = (levels.0..=levels.1)
                .map(|j| {
                    let c = cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, j)?;
                    let lhs = w.integrate(&pushforward(&f, &c)?)?;
                    let rhs = pulled.integrate(&c)?;
                    Ok(Row { j, lhs, rhs, err: (lhs - exact).abs(), ratio: None })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Table { theorem, form: src, exact, rows: with_ratios(rows) })
        }
        Theorem::HigherDiv => higher_div_table(opts),
    }
}

/// Rows `j = s ∈ {1, 2}`: the worst `|⨍_{□^s J} ω − ⨍_J Δ^s ω|` over random
/// Dirac chains and polynomial forms in `R^3`.
fn higher_div_table(opts: &ConvergeOptions) -> Result<Table> {
    use rand::RngExt;
    let mut rows = Vec::new();
    for s in 1..=2usize {
        let mut worst = Row { j: s, lhs: 0.0, rhs: 0.0, err: 0.0, ratio: None };
        for i in 0..opts.samples {
            let mut rng = sample_rng(opts.seed, i);
            let n = rng.random_range(1..=3);
            let k = rng.random_range(0..=n);
            let base = sample::chain(&mut rng, n, k, 1, 3);
            let omega = sample::form(&mut rng, n, k, 2 * s + 1);
            let (mut c, mut w) = (base.clone(), omega.clone());
            for _ in 0..s {
                c = laplace(&c);
                w = w.laplace()?;
            }
            let lhs = omega.integrate(&c)?;
            let rhs = w.integrate(&base)?;
            if (lhs - rhs).abs() >= worst.err {
                worst = Row { j: s, lhs, rhs, err: (lhs - rhs).abs(), ratio: None };
            }
        }
        rows.push(worst);
    }
    Ok(Table { theorem: Theorem::HigherDiv, form: "random".into(), exact: 0.0, rows })
}

/// Pass/fail cases for a table.
pub fn cases(t: &Table, opts: &ConvergeOptions) -> Vec<Case> {
    let mut out = Vec::new();
    let key = if t.theorem == Theorem::HigherDiv { "s" } else { "j" };
    for r in &t.rows {
        let p = json!({key: r.j});
        out.push(Case::with_error(
            format!("duality/{key}={:02}", r.j),
            p.clone(),
            r.rhs,
            r.lhs,
            (r.lhs - r.rhs).abs(),
            1e-12 * (1.0 + r.rhs.abs()),
        ));
    }
    match t.theorem {
        Theorem::HigherDiv => {}
        Theorem::ChangeOfVars => {
            // At least first-order decay from the coarsest level.
            let first = &t.rows[0];
            for r in &t.rows[1..] {
                let bound = first.err * 0.5f64.powi((r.j - first.j) as i32);
                out.push(Case::upper_bound(format!("first-order/j={:02}", r.j), json!({"j": r.j}), bound, r.err));
            }
        }
        _ => {
            let (lo, hi) = opts.ratio_band;
            for r in &t.rows[1..] {
                let ratio = r.ratio.unwrap_or(f64::NAN);
                let mid = 0.5 * (lo + hi);
                out.push(Case::with_error(
                    format!("ratio/j={:02}", r.j),
                    json!({"j": r.j, "band": [lo, hi]}),
                    mid,
                    ratio,
                    (ratio - mid).abs(),
                    0.5 * (hi - lo),
                ));
            }
        }
    }
    out
}

pub fn run(theorem: Theorem, opts: &ConvergeOptions) -> Result<(Report, Table)> {
    let t = table(theorem, opts)?;
    let mut b = ReportBuilder::new(format!("converge/{}", theorem.name()), Some(opts.seed), json!(opts));
    b.extend(cases(&t, opts));
    b.details(json!({"theorem": t.theorem, "form": t.form, "exact": t.exact, "rows": t.rows}));
    Ok((b.finish(), t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(a: usize, b: usize) -> ConvergeOptions {
        ConvergeOptions { levels: (a, b), ..Default::default() }
    }

    #[test]
    fn classical_values_match_closed_forms() {
        let o = opts(2, 3);
        assert!((table(Theorem::Stokes, &o).unwrap().exact - 1.0).abs() < 1e-13);
        assert!((table(Theorem::GaussGreen, &o).unwrap().exact - 2.0 * PI).abs() < 1e-12);
        // F^*dω = (2 + v/4 − u/2) du∧dv on the patch.
        assert!((table(Theorem::KelvinStokes, &o).unwrap().exact - 1.875).abs() < 1e-13);
        let q = gl();
        let direct = q.integrate(0.0, 1.0, |x| {
            q.integrate(0.0, 1.0, |y| {
                let (u, v) = (x + 0.25 * y * y, y + 0.125 * (2.0 * x).sin());
                (u * u + v + 1.0) * (1.0 - 0.125 * y * (2.0 * x).cos())
            })
        });
        assert!((table(Theorem::ChangeOfVars, &o).unwrap().exact - direct).abs() < 1e-13);
    }

    #[test]
    fn stokes_family_is_first_order() {
        for th in [Theorem::Stokes, Theorem::GaussGreen, Theorem::KelvinStokes] {
            let o = opts(3, 6);
            let (r, t) = run(th, &o).unwrap();
            assert!(r.passed(), "{th:?}: {:?}", t.rows);
            assert!(t.to_csv().starts_with("j,lhs,rhs,err,ratio\n"));
        }
    }

    #[test]
    fn higher_div_rows_are_exact() {
        let o = ConvergeOptions { samples: 10, ..Default::default() };
        let (r, t) = run(Theorem::HigherDiv, &o).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(r.passed(), "{:?}", t.rows);
    }

    #[test]
    fn change_of_vars_decays() {
        let (r, t) = run(Theorem::ChangeOfVars, &opts(2, 6)).unwrap();
        assert!(r.passed(), "{:?}", t.rows);
    }

    #[test]
    fn bad_form_is_rejected() {
        let o = ConvergeOptions { form: Some("dx1 dx2: x1".into()), ..opts(2, 3) };
        assert!(matches!(table(Theorem::Stokes, &o), Err(Error::Invalid(_))));
        let o = ConvergeOptions { form: Some("dx2: x1 +".into()), ..opts(2, 3) };
        assert!(matches!(table(Theorem::Stokes, &o), Err(Error::Parse { .. })));
    }
}
