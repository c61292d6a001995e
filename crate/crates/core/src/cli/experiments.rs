//! `chaincalc norm` and `chaincalc flow`.

use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;

use super::report::{Case, Report, ReportBuilder};
use crate::chains::DiracChain;
use crate::error::{Error, Result};
use crate::exterior::MultiIndex;
use crate::flow::{ftc_flow_verify, ftc_refinement, leibniz_verify, reynolds_verify, stokes_flow_verify, FlowConfig, TimeForm};
use crate::forms::{Field, Form, VectorField};
use crate::norms::{norm_bound, standard_dictionary, Certified, Strategy};
use crate::represent::{cube_chain, vectorfield_chain, BBox};

/// The chain whose norm is bracketed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ChainSource {
    /// The unit-square representative `P_j`.
    Cube,
    /// `P_j − P_{j+1}`.
    Refinement,
    Zero,
    /// A chain in the text format.
    File(std::path::PathBuf),
}

impl std::str::FromStr for ChainSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "cube" => ChainSource::Cube,
            "refinement" => ChainSource::Refinement,
            "zero" => ChainSource::Zero,
            path => ChainSource::File(path.into()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Trivial,
    Pairing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormOptions {
    pub chain: ChainSource,
    pub levels: (usize, usize),
    pub r: usize,
    pub strategy: StrategyArg,
    pub tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { chain: ChainSource::Cube, levels: (0, 6), r: 1, strategy: StrategyArg::Pairing, tol: 1e-12 }
    }
}

fn square(j: usize) -> Result<DiracChain> {
    cube_chain(&[0.0, 0.0], 1.0, MultiIndex::full(2), 1.0, j)
}

pub fn run_norm(opts: &NormOptions) -> Result<Report> {
    let strategy = match opts.strategy {
        StrategyArg::Trivial => Strategy::Trivial,
        StrategyArg::Pairing => Strategy::Pairing,
    };
    let mut b = ReportBuilder::new("norm", None, json!(opts));
    let mut bounds = Vec::new();
    let levels: Vec<usize> = match opts.chain {
        ChainSource::File(_) => vec![0],
        _ => (opts.levels.0..=opts.levels.1).collect(),
    };
    for j in levels {
        let a = match &opts.chain {
            ChainSource::Cube => square(j)?,
            ChainSource::Refinement => square(j)?.sub(&square(j + 1)?)?,
            ChainSource::Zero => DiracChain::zero(2, 2),
            ChainSource::File(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?;
                DiracChain::from_text(&text)?
            }
        };
        let (n, k) = (a.dim(), a.grade());
        let dict = if k == n { vec![Certified::new("dV", Form::volume(n), 1.0)] } else { standard_dictionary(n, k) };
        let nb = norm_bound(&a, opts.r, strategy, &dict)?;
        let p = json!({"j": j, "r": opts.r, "terms": a.len()});
        let id = |s: &str| format!("j={j:02}/{s}");
        b.push(Case::upper_bound(id("lower-le-upper"), p.clone(), nb.upper, nb.lower));
        match opts.chain {
            ChainSource::Cube if opts.r <= 1 => {
                b.push(Case::new(id("sandwich-lower"), p.clone(), 1.0, nb.lower, opts.tol));
                b.push(Case::new(id("sandwich-upper"), p, 1.0, nb.upper, opts.tol));
            }
            ChainSource::Refinement if opts.r >= 1 => {
                b.push(Case::upper_bound(id("refinement-bound"), p, 0.5f64.powi(j as i32 - 1), nb.upper));
            }
            ChainSource::Zero => b.push(Case::new(id("zero"), p, 0.0, nb.upper, 0.0)),
            _ => {}
        }
        bounds.push(json!({"j": j, "r": nb.r, "lower": nb.lower, "upper": nb.upper,
            "witness_summary": nb.upper_witness, "lower_witness": nb.lower_witness}));
    }
    b.details(json!({"bounds": bounds}));
    Ok(b.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ftc,
    Stokes,
    Leibniz,
    Reynolds,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ftc => "ftc",
            Experiment::Stokes => "stokes",
            Experiment::Leibniz => "leibniz",
            Experiment::Reynolds => "reynolds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowOptions {
    pub experiment: Experiment,
    pub level: usize,
    pub cfg: FlowConfig,
    pub tol: Option<f64>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { experiment: Experiment::Ftc, level: 6, cfg: FlowConfig::default(), tol: None }
    }
}

/// Error reduction demanded per doubling of the time subintervals.
pub const FTC_MIN_RATIO: f64 = 3.5;

/// The disk of radius 1/2 about `(1/2, 0)`, carrying the unit field `e1`.
pub fn reynolds_chain(level: usize) -> Result<DiracChain> {
    vectorfield_chain(
        &[(MultiIndex::single(1), Field::one())],
        |p: &[f64]| (p[0] - 0.5).powi(2) + p[1] * p[1] < 0.25,
        &BBox::new(&[0.0, -0.5], &[1.0, 0.5])?,
        level,
    )
}

pub fn run_flow(opts: &FlowOptions) -> Result<Report> {
    let v = VectorField::rotation();
    let cfg = &opts.cfg;
    let j = square(opts.level)?;
    let mut b = ReportBuilder::new(format!("flow/{}", opts.experiment.name()), None, json!(opts));
    let p = json!({"level": opts.level, "n_sub": cfg.n_sub, "h_t": cfg.h_t});
    match opts.experiment {
        Experiment::Ftc => {
            let w = Form::parse(2, "dx1 dx2: x1")?;
            let r = ftc_flow_verify(&j, &v, &w, 0.0, 1.0, cfg)?;
            b.push(Case::new("ftc", p, r.lhs, r.rhs, opts.tol.unwrap_or(1e-3)));
            let ns = [cfg.n_sub, 2 * cfg.n_sub, 4 * cfg.n_sub];
            let table = ftc_refinement(&j, &v, &w, 0.0, 1.0, cfg, &ns)?;
            for row in &table[1..] {
                let ratio = row.ratio.unwrap_or(f64::NAN);
                let short = if ratio.is_nan() { f64::NAN } else { (FTC_MIN_RATIO - ratio).max(0.0) };
                b.push(Case::with_error(format!("refinement/N={:04}", row.n_sub), json!({"n_sub": row.n_sub}), FTC_MIN_RATIO, ratio, short, 0.0));
            }
            b.details(json!({"lhs": r.lhs, "rhs": r.rhs, "abs_err": r.abs_err, "cfg": cfg, "refinement_table": table}));
        }
        Experiment::Stokes => {
            let w = Form::parse(2, "dx1: x1*x2; dx2: x1^2")?;
            let r = stokes_flow_verify(&j, &v, &w, 0.0, 1.0, cfg)?;
            b.push(Case::new("stokes-flow", p, r.lhs, r.rhs, opts.tol.unwrap_or(1e-3)));
            b.details(json!({"lhs": r.lhs, "rhs": r.rhs, "abs_err": r.abs_err, "cfg": cfg}));
        }
        Experiment::Leibniz | Experiment::Reynolds => {
            let at = |t: f64| Form::parse(2, "dx2: x1").map(|f| f.scale(t));
            let dt = |_: f64| Form::parse(2, "dx2: x1");
            let tf = TimeForm { at: &at, dt: &dt };
            let seg = reynolds_chain(opts.level)?;
            let r = if opts.experiment == Experiment::Leibniz {
                leibniz_verify(&seg, &v, &tf, 0.5, 1e-3, cfg)?
            } else {
                reynolds_verify(&seg, &v, &tf, 0.5, 1e-3, cfg)?
            };
            b.push(Case::new(r.name.clone(), p.clone(), r.rhs, r.lhs, opts.tol.unwrap_or(1e-4)));
            if let Some((_, two)) = r.extra.iter().find(|(k, _)| k == "two_term") {
                b.push(Case::new("reynolds/two-term", p, r.lhs, *two, 1e-10 * (1.0 + r.lhs.abs())));
            }
            b.details(json!({"lhs": r.lhs, "rhs": r.rhs, "abs_err": r.abs_err, "cfg": cfg, "terms": r.extra}));
        }
    }
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_reports() {
        let r = run_norm(&NormOptions { levels: (0, 3), ..Default::default() }).unwrap();
        assert!(r.passed());
        let r = run_norm(&NormOptions { chain: ChainSource::Refinement, levels: (0, 3), ..Default::default() }).unwrap();
        assert!(r.passed());
        let r = run_norm(&NormOptions { chain: ChainSource::Zero, levels: (0, 0), ..Default::default() }).unwrap();
        assert!(r.passed());
        assert!(r.details.unwrap()["bounds"][0]["witness_summary"].is_object());
    }

    #[test]
    fn flow_reports() {
        let cfg = FlowConfig { n_sub: 16, ..Default::default() };
        for e in [Experiment::Ftc, Experiment::Stokes, Experiment::Reynolds, Experiment::Leibniz] {
            let r = run_flow(&FlowOptions { experiment: e, level: 3, cfg: cfg.clone(), tol: None }).unwrap();
            assert!(r.passed(), "{e:?}: {:?}", r.cases);
        }
    }
}
