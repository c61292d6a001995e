//! Named constructions behind `chaincalc demo`.

use std::f64::consts::PI;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;

use super::report::{Case, Report, ReportBuilder};
use crate::chains::DiracChain;
use crate::error::{Error, Result};
use crate::exterior::MultiIndex;
use crate::forms::{Field, Form};
use crate::operators::{boundary, prederiv_const};
use crate::represent::{
    cantor_chain, cantor_endpoints, cube_chain, open_set_chain, sierpinski_chain, unit_disk, vectorfield_chain, BBox,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Demo {
    Cantor,
    Sierpinski,
    SlitDisk,
    DipoleSphere,
    Vectorfield,
}

impl Demo {
    pub fn name(self) -> &'static str {
        match self {
            Demo::Cantor => "cantor",
            Demo::Sierpinski => "sierpinski",
            Demo::SlitDisk => "slit-disk",
            Demo::DipoleSphere => "dipole-sphere",
            Demo::Vectorfield => "vectorfield",
        }
    }

    pub fn default_levels(self) -> (usize, usize) {
        match self {
            Demo::Cantor => (0, 10),
            Demo::Sierpinski => (0, 6),
            Demo::SlitDisk => (8, 12),
            Demo::DipoleSphere => (3, 5),
            Demo::Vectorfield => (4, 8),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DemoOptions {
    pub levels: Option<(usize, usize)>,
    pub tol: Option<f64>,
}

/// Writes `chain` in the text format as `<dir>/<name>-<level>.txt`.
fn dump(dir: Option<&Path>, name: &str, level: usize, chain: &DiracChain) -> Result<()> {
    if let Some(d) = dir {
        let path = d.join(format!("{name}-{level:02}.txt"));
        std::fs::create_dir_all(d).and_then(|_| std::fs::write(&path, chain.to_text())).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub fn run(demo: Demo, opts: &DemoOptions, dump_dir: Option<&Path>) -> Result<Report> {
    let (lo, hi) = opts.levels.unwrap_or(demo.default_levels());
    let tol = opts.tol.unwrap_or(1e-12);
    let mut b = ReportBuilder::new(format!("demo/{}", demo.name()), None, json!({"levels": [lo, hi], "tol": tol}));
    for m in lo..=hi {
        let cases = match demo {
            Demo::Cantor => cantor(m, tol, dump_dir)?,
            Demo::Sierpinski => sierpinski(m, tol, dump_dir)?,
            Demo::SlitDisk => slit_disk(m, dump_dir)?,
            Demo::DipoleSphere => dipole_sphere(m, tol, dump_dir)?,
            Demo::Vectorfield => vectorfield(m, tol, dump_dir)?,
        };
        b.extend(cases);
    }
    Ok(b.finish())
}

/// `⨍_Γ dx = ⨍_{∂Γ} x = 1`, with the endpoint chain for comparison.
fn cantor(m: usize, tol: f64, dir: Option<&Path>) -> Result<Vec<Case>> {
    let g = cantor_chain(m, 2);
    dump(dir, "cantor", m, &g)?;
    let p = json!({"m": m, "terms": g.len()});
    let dx = Form::basis(1, MultiIndex::single(1))?;
    let x = Form::parse(1, "x1")?;
    Ok(vec![
        Case::new(format!("m={m:02}/volume"), p.clone(), 1.0, dx.integrate(&g)?, tol),
        Case::new(format!("m={m:02}/boundary"), p.clone(), 1.0, x.integrate(&boundary(&g))?, tol),
        Case::new(format!("m={m:02}/endpoints"), p, 1.0, x.integrate(&cantor_endpoints(m))?, tol),
    ])
}

/// `⨍_S dV = ⨍_{∂S} x dy = 1/2` at every stage.
fn sierpinski(m: usize, tol: f64, dir: Option<&Path>) -> Result<Vec<Case>> {
    let s = sierpinski_chain(m, 2)?;
    dump(dir, "sierpinski", m, &s)?;
    let p = json!({"m": m, "terms": s.len()});
    let xdy = Form::parse(2, "dx2: x1")?;
    Ok(vec![
        Case::new(format!("m={m:02}/area"), p.clone(), 0.5, Form::volume(2).integrate(&s)?, tol),
        Case::new(format!("m={m:02}/boundary"), p, 0.5, xdy.integrate(&boundary(&s))?, tol),
    ])
}

/// `ω₀ = min(x, 1)` on `(0,1)²` and `0` elsewhere.
fn omega0(p: &[f64]) -> f64 {
    if 0.0 < p[0] && p[0] < 1.0 && 0.0 < p[1] && p[1] < 1.0 {
        p[0].min(1.0)
    } else {
        0.0
    }
}

/// The segments `[0,1] × {±2^{-j/2}}` inside the unit disk, at level `j`,
/// against `ω₀² dx`.
///
/// Above the slit `ω₀ = x`, so the upper pairing tends to `∫₀¹ x² dx = 1/3`;
/// the case recording the value 1 is kept and fails.
fn slit_disk(j: usize, dir: Option<&Path>) -> Result<Vec<Case>> {
    let off = 0.5f64.powi((j / 2) as i32);
    let seg = |y: f64| -> Result<DiracChain> {
        Ok(cube_chain(&[0.0, y], 1.0, MultiIndex::single(1), 1.0, j)?.restrict(unit_disk))
    };
    let (up, down) = (seg(off)?, seg(-off)?);
    dump(dir, "slit-disk-upper", j, &up)?;
    dump(dir, "slit-disk-lower", j, &down)?;
    let w = Form::new(2, 1, [(MultiIndex::single(1), Field::values(2, |p| omega0(p).powi(2)))])?;
    let smooth = Form::parse(2, "dx1: x1^2")?;
    let (lp, lm) = (w.integrate(&up)?, w.integrate(&down)?);
    // Truncation at the circle and the midpoint rule.
    let tol = 2.0 * off * off + 0.25f64.powi(j as i32);
    let p = json!({"j": j, "offset": off});
    Ok(vec![
        Case::new(format!("j={j:02}/upper/recorded-value"), p.clone(), 1.0, lp, tol),
        Case::new(format!("j={j:02}/upper/limit"), p.clone(), 1.0 / 3.0, lp, tol),
        Case::new(format!("j={j:02}/lower"), p.clone(), 0.0, lm, 0.0),
        Case::new(format!("j={j:02}/smooth-form-agreement"), p, 0.0, smooth.integrate(&up)? - smooth.integrate(&down)?, 1e-12),
    ])
}

/// `P_{e3}` applied to the boundary of the unit ball, paired with
/// `ω = z² dx∧dy`: equal to `⨍_B d L_{e3} ω = 2 vol(B_j)`, which tends to
/// `8π/3`.
fn dipole_sphere(j: usize, tol: f64, dir: Option<&Path>) -> Result<Vec<Case>> {
    let ball = open_set_chain(|p| p.iter().map(|x| x * x).sum::<f64>() < 1.0, &BBox::cube(-1.0, 1.0, 3), j);
    let dip = prederiv_const(&[0.0, 0.0, 1.0], &boundary(&ball))?;
    dump(dir, "dipole-sphere", j, &dip)?;
    let w = Form::parse(3, "dx1 dx2: x3^2")?;
    let got = w.integrate(&dip)?;
    let vol = Form::volume(3).integrate(&ball)?;
    let h = 0.5f64.powi(j as i32);
    let p = json!({"j": j, "terms": dip.len()});
    // Cells within √3·h of the sphere are the only ones missing.
    let shell = 2.0 * 4.0 * PI * 3f64.sqrt() * h;
    Ok(vec![
        Case::new(format!("j={j:02}/volume-identity"), p.clone(), 2.0 * vol, got, tol * (1.0 + got.abs())),
        Case::new(format!("j={j:02}/limit"), p, 8.0 * PI / 3.0, got, shell),
    ])
}

/// `X = y e1` on the unit disk paired with `y dx`: `∫_D y² dA = π/4`.
fn vectorfield(j: usize, tol: f64, dir: Option<&Path>) -> Result<Vec<Case>> {
    let bx = BBox::cube(-1.0, 1.0, 2);
    let x = vectorfield_chain(&[(MultiIndex::single(1), Field::coord(2))], unit_disk, &bx, j)?;
    dump(dir, "vectorfield", j, &x)?;
    let w = Form::parse(2, "dx1: x2")?;
    let got = w.integrate(&x)?;
    let h = 0.5f64.powi(j as i32);
    let cells = open_set_chain(unit_disk, &bx, j);
    let direct: f64 = cells.terms().iter().map(|t| t.point[1] * t.point[1] * t.coeff.abs()).sum();
    let p = json!({"j": j, "terms": x.len()});
    Ok(vec![
        Case::new(format!("j={j:02}/cellwise"), p.clone(), direct, got, tol),
        Case::new(format!("j={j:02}/limit"), p, PI / 4.0, got, 2.0 * PI * 2f64.sqrt() * h),
    ])
}
