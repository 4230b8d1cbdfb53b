//! Module pipelines. Each runs its suites, writes bulk data into an output
//! directory and returns the report; the caller writes `report.json`.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use aklab_core::framesphere::{titeica_immersion, verify_immersion, ImmersionMesh, FRAME_CONVENTION};
use aklab_core::scalarfuncs::{profile_table, t_sweep, ConformalProfile};
use aklab_core::surfacefields::scenarios::{
    holomorphic_field, patch_polynomial, random_smooth_field, FieldScenario, Warp,
};
use aklab_core::surfacefields::{gauss_curvature, FieldState, Grid, TorusGrid};
use aklab_core::wangsolver::{solve_wang, CubicNormalization, WangProblem};
use anyhow::{Context, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    ConfigFile, FieldsParams, PhiScenario, PointmodelParams, ScalarfuncsParams, TiteicaParams, WangParams,
};
use crate::report::{Check, ModuleReport, Suite};
use crate::suites;

/// Sizes at which the surface-field criteria are evaluated.
pub const REFERENCE_N: usize = 64;
/// Grid size for the Weil-Petersson restriction suite.
pub const WP_N: usize = 32;
/// Random tangent pairs for the Weil-Petersson restriction suite.
pub const WP_PAIRS: usize = 20;
/// Samples for the moment-map suite.
pub const MOMENT_SAMPLES: usize = 200;
/// Samples for the symbol sweep.
pub const SYMBOL_SAMPLES: usize = 500;

/// Names of the module pipelines in the order `all` runs them.
pub const MODULES: [&str; 5] = ["scalarfuncs", "pointmodel", "fields", "wang", "titeica"];

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e6)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn cells(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| num(*x)).collect()
}

fn finish(module: &str, params: &impl Serialize, suites: Vec<Suite>, outputs: &[&str], tol_scale: f64) -> Result<ModuleReport> {
    let suites = suites.into_iter().map(|s| s.scaled(tol_scale)).collect();
    let outputs = outputs.iter().map(|s| s.to_string()).collect();
    Ok(ModuleReport::new(module, serde_json::to_value(params)?, suites, outputs))
}

/// Profile table for one constant plus the profile suites.
pub fn scalarfuncs(p: &ScalarfuncsParams, tol_scale: f64, dir: &Path) -> Result<ModuleReport> {
    let profile = ConformalProfile::new(p.c)?;
    let ts = t_sweep(p.samples, 1e-6, p.t_max);
    let rows = profile_table(&profile, &ts)?;
    write_csv(
        &dir.join("profile.csv"),
        &["t", "F", "F'", "f", "f'", "residual"],
        rows.iter().map(|r| cells(&[r.t, r.big_f, r.big_f_prime, r.f, r.f_prime, r.residual])),
    )?;
    let mut cs = suites::PROFILE_CONSTANTS.to_vec();
    if !cs.contains(&p.c) {
        cs.push(p.c);
    }
    let reference = suites::reference_sweep();
    let mut all = vec![suites::conformal_profile(&cs, &reference)?, suites::profile_lemmas(&cs, &reference)?];
    if ts != reference {
        let mut s = suites::conformal_profile(&[p.c], &ts)?;
        s.name = "conformal_profile_requested_sweep".into();
        s.criterion = None;
        all.push(s);
    }
    finish("scalarfuncs", p, all, &["profile.csv"], tol_scale)
}

/// Point-model suites; writes no bulk data.
pub fn pointmodel(p: &PointmodelParams, tol_scale: f64) -> Result<ModuleReport> {
    let all = vec![
        suites::pseudo_kaehler(p.c, p.seed, p.samples)?,
        suites::moment_maps(p.c, p.seed, MOMENT_SAMPLES)?,
        suites::symbol(p.c, p.seed, SYMBOL_SAMPLES)?,
    ];
    finish("pointmodel", p, all, &[], tol_scale)
}

/// Builds the configured field scenario. Returns the field, whether it is
/// Codazzi data and whether the bridge identity applies.
pub fn scenario_field(p: &FieldsParams) -> Result<(FieldState, bool, bool)> {
    Ok(match p.scenario {
        FieldScenario::Titeica => (suites::sheared(p.n)?, true, true),
        FieldScenario::PatchHolomorphic => (
            holomorphic_field(&Grid::patch(p.n, [-0.5, -0.5], 1.0)?, patch_polynomial, Warp { strength: 0.15 })?,
            true,
            true,
        ),
        FieldScenario::RandomSmooth => {
            let mut r = ChaCha8Rng::seed_from_u64(p.seed);
            (random_smooth_field(&Grid::torus(p.n)?, &mut r, 0.3)?, false, false)
        }
    })
}

/// Field scenario export plus the surface-field suites at reference sizes.
pub fn fields(p: &FieldsParams, tol_scale: f64, dir: &Path) -> Result<ModuleReport> {
    let (fs, codazzi, bridge) = scenario_field(p)?;
    let n = fs.grid().n();
    let curvature = gauss_curvature(&fs);
    let norms = fs.norm0_sq();
    write_csv(
        &dir.join("fields.csv"),
        &[
            "ix", "iy", "x", "y", "j00", "j01", "j10", "j11", "a0_00", "a0_01", "a0_10", "a0_11", "a1_00", "a1_01",
            "a1_10", "a1_11", "norm0_sq", "gauss_curvature",
        ],
        (0..fs.len()).map(|i| {
            let (x, y) = fs.grid().point(i);
            let (j, a) = (fs.j()[i], fs.a()[i]);
            let mut row = vec![(i % n).to_string(), (i / n).to_string()];
            row.extend(cells(&[x, y, j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]]));
            for m in a {
                row.extend(cells(&[m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]));
            }
            row.extend(cells(&[norms[i], curvature[i]]));
            row
        }),
    )?;
    let all = vec![
        suites::field_scenario(&fs, codazzi, bridge.then_some(p.c))?,
        suites::bridge(p.c, REFERENCE_N)?,
        suites::primitive(p.c, REFERENCE_N, p.seed)?,
        suites::codazzi_w(p.c, REFERENCE_N, p.seed)?,
        suites::weil_petersson(p.c, WP_N, p.seed, WP_PAIRS)?,
    ];
    finish("fields", p, all, &["fields.csv"], tol_scale)
}

/// Wang problem for a `wang` scenario on the given torus.
pub fn wang_phi(p: &WangParams, grid: &TorusGrid) -> Result<WangProblem> {
    let n = grid.n();
    let problem = match p.phi {
        PhiScenario::Constant => WangProblem::new(grid.clone(), vec![2.0; n * n])?,
        PhiScenario::Smooth => WangProblem::new(grid.clone(), suites::smooth_phi(n))?,
        PhiScenario::Cubic => {
            let q2: Vec<f64> = (0..n * n)
                .map(|i| {
                    let (x, y) = ((i % n) as f64 / n as f64, (i / n) as f64 / n as f64);
                    let tau = std::f64::consts::TAU;
                    Complex64::new(1.0 + 0.3 * (tau * x).cos(), 0.4 * (tau * y).sin()).norm_sqr()
                })
                .collect();
            WangProblem::from_cubic(grid.clone(), &q2, CubicNormalization::Halved)?
        }
    };
    Ok(problem.with_k0(p.k0).with_tolerance(p.tol, 30))
}

/// Solves the configured Wang problem and runs the solver suite at size `n`.
pub fn wang(p: &WangParams, tol_scale: f64, dir: &Path) -> Result<ModuleReport> {
    let grid = TorusGrid::new(p.n)?;
    let problem = wang_phi(p, &grid)?;
    let s = solve_wang(&problem, &vec![0.0; p.n * p.n])?;
    let residual = problem.residual(&s.u);
    let n = p.n;
    write_csv(
        &dir.join("u.csv"),
        &["ix", "iy", "x", "y", "phi", "u", "residual"],
        (0..n * n).map(|i| {
            let mut row = vec![(i % n).to_string(), (i / n).to_string()];
            row.extend(cells(&[(i % n) as f64 / n as f64, (i / n) as f64 / n as f64, problem.phi[i], s.u[i], residual[i]]));
            row
        }),
    )?;
    write_json(
        &dir.join("history.json"),
        &json!({
            "iterations": s.iterations,
            "residual_inf": s.residual_inf,
            "jacobian_margin": s.jacobian_margin,
            "history": s.history,
        }),
    )?;
    let solve = Suite::new(
        "requested_solve",
        None,
        vec![
            Check::at_most("residual_inf", s.residual_inf, p.tol),
            Check::at_most("newton_iterations", s.iterations as f64, 20.0),
            Check::at_most("jacobian_margin", s.jacobian_margin, 0.0),
        ],
    );
    let all = vec![solve, suites::wang(p.n, p.k0, p.seed)?];
    finish("wang", p, all, &["u.csv", "history.json"], tol_scale)
}

fn write_obj(path: &Path, mesh: &ImmersionMesh) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path).with_context(|| format!("writing {}", path.display()))?);
    writeln!(out, "# affine sphere immersion, {0}x{0} nodes, spacing {1}", mesh.side, mesh.spacing)?;
    for p in &mesh.points {
        writeln!(out, "v {} {} {}", num(p.x), num(p.y), num(p.z))?;
    }
    let s = mesh.side;
    for iy in 0..s - 1 {
        for ix in 0..s - 1 {
            let k = iy * s + ix + 1;
            writeln!(out, "f {} {} {} {}", k, k + 1, k + s + 1, k + s)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Immersion mesh for a constant cubic differential plus the frame suite.
pub fn titeica(p: &TiteicaParams, tol_scale: f64, dir: &Path) -> Result<ModuleReport> {
    let mesh = titeica_immersion(Complex64::new(p.q_re, p.q_im), p.extent, p.step)?;
    let s = mesh.side;
    write_csv(
        &dir.join("mesh.csv"),
        &["ix", "iy", "x", "y", "X", "Y", "Z", "psi"],
        (0..mesh.points.len()).map(|i| {
            let (z, pt) = (mesh.nodes[i], mesh.points[i]);
            let mut row = vec![(i % s).to_string(), (i / s).to_string()];
            row.extend(cells(&[z.re, z.im, pt.x, pt.y, pt.z, mesh.psi[i]]));
            row
        }),
    )?;
    write_obj(&dir.join("mesh.obj"), &mesh)?;
    let hooks = verify_immersion(&mesh)?;
    let reality = mesh.frames.iter().fold(0.0_f64, |m, f| m.max(f.reality_defect()));
    let drift = mesh.frames.iter().zip(&mesh.psi).fold(0.0_f64, |m, (f, psi)| m.max(f.det_drift(*psi)));
    let requested = Suite::new(
        "requested_mesh",
        None,
        vec![
            Check::at_most("hook_affine_normal_equals_position", hooks.normal_residual, 1e-5),
            Check::at_most("hook_blaschke_metric", hooks.blaschke_residual, 1e-5),
            Check::at_most("hook_conformality", hooks.conformal_residual, 1e-5),
            Check::at_most("frame_reality_defect", reality, 1e-8),
            Check::at_most("frame_determinant_drift", drift, 1e-6),
        ],
    );
    let all = vec![requested, suites::frame(p.seed)?];
    let mut report = finish("titeica", p, all, &["mesh.csv", "mesh.obj"], tol_scale)?;
    report.convention = Some(FRAME_CONVENTION.to_string());
    Ok(report)
}

/// Wall-clock seconds per module, written apart from the reports.
#[derive(Debug, Default, Serialize)]
pub struct Timings(pub std::collections::BTreeMap<String, f64>);

/// Runs one module into `dir`, writing `report.json` (or `report_path`).
pub fn run_module(
    module: &str,
    cfg: &ConfigFile,
    seed: u64,
    tol_scale: f64,
    dir: &Path,
    report_path: Option<&Path>,
    timings: &mut Timings,
) -> Result<ModuleReport> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let start = Instant::now();
    let report = match module {
        "scalarfuncs" => scalarfuncs(&ScalarfuncsParams::resolve(cfg.scalarfuncs.clone())?, tol_scale, dir),
        "pointmodel" => pointmodel(&PointmodelParams::resolve(cfg.pointmodel.clone(), seed)?, tol_scale),
        "fields" => fields(&FieldsParams::resolve(cfg.fields.clone(), seed)?, tol_scale, dir),
        "wang" => wang(&WangParams::resolve(cfg.wang.clone(), seed)?, tol_scale, dir),
        "titeica" => titeica(&TiteicaParams::resolve(cfg.titeica.clone(), seed)?, tol_scale, dir),
        other => anyhow::bail!("unknown module {other}"),
    }
    .with_context(|| format!("{module} pipeline"))?;
    timings.0.insert(module.to_string(), start.elapsed().as_secs_f64());
    let default_path = dir.join("report.json");
    write_json(report_path.unwrap_or(&default_path), &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
struct SuiteSummary<'a> {
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    criterion: Option<u8>,
    pass: bool,
    failed_checks: Vec<&'a str>,
}

#[derive(Debug, Serialize)]
struct ModuleSummary<'a> {
    module: &'a str,
    pass: bool,
    suites: Vec<SuiteSummary<'a>>,
}

/// Runs every module into `dir/<module>` and writes `summary.json`.
pub fn run_all(cfg: &ConfigFile, seed: u64, tol_scale: f64, dir: &Path, timings: &mut Timings) -> Result<Vec<ModuleReport>> {
    let reports = MODULES
        .iter()
        .map(|m| run_module(m, cfg, seed, tol_scale, &dir.join(m), None, timings))
        .collect::<Result<Vec<_>>>()?;
    let modules: Vec<ModuleSummary> = reports
        .iter()
        .map(|r| ModuleSummary {
            module: &r.module,
            pass: r.pass,
            suites: r
                .suites
                .iter()
                .map(|s| SuiteSummary {
                    name: &s.name,
                    criterion: s.criterion,
                    pass: s.pass,
                    failed_checks: s.failures().map(|c| c.name.as_str()).collect(),
                })
                .collect(),
        })
        .collect();
    let pass = reports.iter().all(|r| r.pass);
    write_json(&dir.join("summary.json"), &json!({ "seed": seed, "tol_scale": tol_scale, "modules": modules, "pass": pass }))?;
    Ok(reports)
}
