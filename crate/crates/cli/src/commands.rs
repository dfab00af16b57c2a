use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use revtone::legendre::sphere_restricted_norm;
use revtone::measures::{convergence_sweep, ConvergenceReport, NormSource};
use revtone::numerics::{CubicSpline, EndCondition};
use revtone::spectral::ebk_residual;
use revtone::{ActionEvaluator, Error, RadialSolver, SurfaceProfile, SymbolFn};

use crate::config::{Command, NormChoice, ProfileSpec, RunConfig, SymbolKind, SymbolSource};

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A run that ended with a nonzero exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_)
            | Error::RejectedProfile { .. }
            | Error::UnsupportedQuantization => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn run(cmd: Command, cfg: &RunConfig) -> Outcome {
    match cmd {
        Command::Validate => validate(cfg),
        Command::Density => density(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Converge => converge(cfg),
        Command::VerifySphere => verify_sphere(cfg),
    }
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Outcome {
    let io = |e: std::io::Error, what: &Path| Failure {
        code: EXIT_NUMERICAL,
        message: format!("{}: {e}", what.display()),
    };
    fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let target = dir.join(name);
    fs::write(&tmp, bytes).map_err(|e| io(e, &tmp))?;
    fs::rename(&tmp, &target).map_err(|e| io(e, &target))?;
    println!("wrote {}", target.display());
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Outcome {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Failure::numerical(e.to_string()))?;
    text.push('\n');
    write_atomic(dir, name, text.as_bytes())
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Outcome {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)
            .map_err(|e| Failure::numerical(e.to_string()))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::numerical(e.to_string()))?;
    write_atomic(dir, name, &bytes)
}

/// Reads a two-column numeric table. Blank lines and `#` comments are
/// skipped; columns may be separated by commas or whitespace. The first
/// column must increase strictly.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: cannot read table: {e}", path.display())))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let at = |msg: String| {
            Failure::config(format!(
                "{}:{}: row {}: {msg}",
                path.display(),
                idx + 1,
                xs.len() + 1
            ))
        };
        if fields.len() != 2 {
            return Err(at(format!("expected two columns, found {}", fields.len())));
        }
        let parse = |f: &str| f.parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(x), Some(y)) = (parse(fields[0]), parse(fields[1])) else {
            return Err(at(format!("cannot parse '{line}'")));
        };
        if let Some(&prev) = xs.last() {
            if x <= prev {
                return Err(at(format!(
                    "first column must increase strictly ({x} after {prev})"
                )));
            }
        }
        xs.push(x);
        ys.push(y);
    }
    if xs.len() < 4 {
        return Err(Failure::config(format!(
            "{}: table needs at least four rows",
            path.display()
        )));
    }
    Ok((xs, ys))
}

fn profile(spec: &ProfileSpec, gate: bool) -> Result<SurfaceProfile, Failure> {
    Ok(match spec {
        ProfileSpec::RoundSphere => SurfaceProfile::round_sphere(),
        ProfileSpec::Ellipsoid(q) => SurfaceProfile::ellipsoid(*q)?,
        ProfileSpec::Table(path) => {
            let (r, a) = read_table(path)?;
            let name = path
                .file_stem()
                .map_or("custom_table".into(), |s| s.to_string_lossy().into_owned());
            let p = SurfaceProfile::from_table_unchecked(&name, r, a)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            if gate {
                let report = p.validate();
                if let Some(c) = report.checks.iter().find(|c| !c.passed) {
                    return Err(Failure::config(format!(
                        "{}: profile rejected, {} fails (residual {:e})",
                        path.display(),
                        c.name,
                        c.residual
                    )));
                }
            }
            p
        }
    })
}

fn symbol(cfg: &RunConfig) -> Result<Option<SymbolFn>, Failure> {
    let Some(spec) = &cfg.symbol else {
        return Ok(None);
    };
    let f: Box<dyn Fn(f64) -> f64 + Send + Sync> = match &spec.source {
        SymbolSource::Expr { expr, .. } => {
            let expr = expr.clone();
            Box::new(move |x| expr.eval(x))
        }
        SymbolSource::Table(path) => {
            let (x, y) = read_table(path)?;
            let (lo, hi) = (x[0], x[x.len() - 1]);
            let spline = CubicSpline::new(x, y, EndCondition::Natural)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            Box::new(move |t| spline.eval(t.clamp(lo, hi)))
        }
    };
    Ok(Some(match spec.kind {
        SymbolKind::RadialMult => SymbolFn::radial(f),
        SymbolKind::AngularRatio => SymbolFn::angular(f),
    }))
}

fn require_ells(cfg: &RunConfig) -> Result<&[usize], Failure> {
    if cfg.ells.is_empty() {
        return Err(Failure::config("run.ells must list at least one value"));
    }
    Ok(&cfg.ells)
}

fn validate(cfg: &RunConfig) -> Outcome {
    let p = profile(&cfg.profile, false)?;
    let report = p.validate();
    write_json(&cfg.out_dir, "validation.json", &report)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("profile {} fails: {}", p.name(), failed.join(", ")),
        })
    }
}

#[derive(Serialize)]
struct DensityRow {
    c: f64,
    density_unnorm: f64,
    density_norm: f64,
    cdf: f64,
}

fn density(cfg: &RunConfig) -> Outcome {
    let p = profile(&cfg.profile, true)?;
    let ev = ActionEvaluator::new(&p, cfg.actions)?;
    let m = ev.normalization_m()?;
    let n = cfg.density_points;
    let rows = (1..n)
        .into_par_iter()
        .map(|k| {
            let c = -1.0 + 2.0 * k as f64 / n as f64;
            let d = ev.limit_density_unnorm(c)?;
            Ok(DensityRow {
                c,
                density_unnorm: d,
                density_norm: d / m,
                cdf: ev.limit_cdf(c)?,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    write_csv(&cfg.out_dir, "density.csv", &rows)
}

#[derive(Serialize)]
struct SpectrumRow {
    ell: usize,
    m: i64,
    n: usize,
    lambda: f64,
    restricted_norm: f64,
    ebk_residual: Option<f64>,
}

#[derive(Serialize)]
struct EllError {
    ell: usize,
    message: String,
}

#[derive(Serialize)]
struct ErrorLog {
    errors: Vec<EllError>,
}

fn spectrum(cfg: &RunConfig) -> Outcome {
    let ells = require_ells(cfg)?;
    let p = profile(&cfg.profile, true)?;
    let solver = RadialSolver::new(&p, cfg.spectral)?;
    let ev = ActionEvaluator::new(&p, cfg.actions)?;
    let slices: Vec<_> = ells
        .par_iter()
        .map(|&ell| (ell, solver.joint_slice(ell)))
        .collect();
    let mut errors = Vec::new();
    for (ell, slice) in slices {
        match slice {
            Ok(slice) => {
                let rows: Vec<SpectrumRow> = slice
                    .rows(Some(&ev))
                    .into_iter()
                    .map(|r| SpectrumRow {
                        ell: r.ell,
                        m: r.m,
                        n: r.n,
                        lambda: r.lambda,
                        restricted_norm: r.restricted_norm,
                        ebk_residual: r.ebk_residual,
                    })
                    .collect();
                write_csv(&cfg.out_dir, &format!("slice_{ell}.csv"), &rows)?;
            }
            Err(e) => errors.push(EllError {
                ell,
                message: e.to_string(),
            }),
        }
    }
    let failed = errors.len();
    write_json(&cfg.out_dir, "errors.json", &ErrorLog { errors })?;
    if failed > 0 {
        return Err(Failure::numerical(format!(
            "{failed} of {} slices failed, see errors.json",
            ells.len()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergeRow {
    ell: usize,
    #[serde(rename = "M_ell")]
    m_ell: Option<f64>,
    #[serde(rename = "M_ell_over_ell")]
    m_ell_over_ell: Option<f64>,
    ks_mu: Option<f64>,
    w1_mu: Option<f64>,
    ks_nu: Option<f64>,
    w1_nu: Option<f64>,
}

fn converge_rows(report: &ConvergenceReport) -> Vec<ConvergeRow> {
    report
        .records
        .iter()
        .map(|r| ConvergeRow {
            ell: r.ell,
            m_ell: r.m_ell,
            m_ell_over_ell: r.m_ell_over_ell,
            ks_mu: r.ks_mu,
            w1_mu: r.w1_mu,
            ks_nu: r.ks_nu,
            w1_nu: r.w1_nu,
        })
        .collect()
}

fn converge(cfg: &RunConfig) -> Outcome {
    let ells = require_ells(cfg)?;
    let p = profile(&cfg.profile, true)?;
    let ev = ActionEvaluator::new(&p, cfg.actions)?;
    let sym = symbol(cfg)?;
    let source = match cfg.norm_source {
        NormChoice::Solver => NormSource::Solver(cfg.spectral),
        NormChoice::Legendre => NormSource::Legendre,
    };
    let report = convergence_sweep(&ev, ells, sym.as_ref(), source)?;
    write_json(&cfg.out_dir, "converge.json", &report)?;
    write_csv(&cfg.out_dir, "converge.csv", &converge_rows(&report))?;
    let failed: Vec<String> = report
        .records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("ell {}: {e}", r.ell)))
        .collect();
    if !failed.is_empty() {
        return Err(Failure::numerical(failed.join("; ")));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(name: &str, tolerance: f64, residual: Result<f64, Error>) -> Self {
        match residual {
            Ok(r) => Self {
                name: name.into(),
                residual: Some(r),
                tolerance,
                passed: r <= tolerance,
                detail: None,
            },
            Err(e) => Self {
                name: name.into(),
                residual: None,
                tolerance,
                passed: false,
                detail: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    profile: String,
    grid_size: usize,
    checks: Vec<Check>,
    passed: bool,
}

fn max_over<I: IntoIterator<Item = Result<f64, Error>>>(it: I) -> Result<f64, Error> {
    it.into_iter().try_fold(0.0_f64, |m, v| Ok(m.max(v?)))
}

fn verify_sphere(cfg: &RunConfig) -> Outcome {
    let p = SurfaceProfile::round_sphere();
    let ev = ActionEvaluator::new(&p, cfg.actions)?;
    let solver = RadialSolver::new_unchecked(&p, cfg.spectral);
    let mut checks = Vec::new();

    let ratios: Vec<f64> = (-10..=10)
        .map(|k| 0.1 * k as f64)
        .map(|x: f64| if x.abs() > 0.95 { x.signum() * 0.99 } else { x })
        .chain([-0.95, 0.95])
        .collect();
    checks.push(Check::new(
        "action_identity",
        1e-10,
        max_over(
            ratios.iter().flat_map(|&x| {
                [0.5, 1.0, 3.0].map(|e| ev.action_i2(x * e, e).map(|i| (i - e).abs()))
            }),
        ),
    ));
    let cs: Vec<f64> = (-999..=999)
        .step_by(37)
        .map(|k| k as f64 / 1000.0)
        .chain([-0.999, 0.999])
        .collect();
    checks.push(Check::new(
        "frequency_closed_form",
        1e-9,
        max_over(cs.iter().map(|&c| {
            ev.frequencies(c)
                .map(|f| (f.omega2 - 1.0).abs().max(f.omega1.abs()))
        })),
    ));
    checks.push(Check::new(
        "density_closed_form",
        1e-8,
        max_over(cs.iter().map(|&c| {
            ev.limit_density_unnorm(c)
                .map(|d| (d * (1.0 - c * c).sqrt() - 1.0).abs())
        })),
    ));
    checks.push(Check::new(
        "normalization_m",
        1e-8,
        ev.normalization_m().map(|m| (m - PI).abs()),
    ));
    checks.push(Check::new(
        "arcsine_cdf",
        1e-8,
        max_over(
            cs.iter()
                .map(|&c| ev.limit_cdf(c).map(|f| (f - (0.5 + c.asin() / PI)).abs())),
        ),
    ));

    let slices: Vec<_> = (1..=cfg.verify_max_ell.max(cfg.verify_norm_max_ell).max(10))
        .into_par_iter()
        .map(|ell| solver.joint_slice(ell))
        .collect();
    checks.push(Check::new(
        "eigenvalues",
        1e-6,
        max_over(slices.iter().take(cfg.verify_max_ell).map(|s| {
            let s = s.as_ref().map_err(Clone::clone)?;
            let exact = (s.ell * (s.ell + 1)) as f64;
            Ok(s.modes
                .iter()
                .map(|m| (m.lambda_sq() - exact).abs() / exact)
                .fold(0.0, f64::max))
        })),
    ));
    checks.push(Check::new(
        "restricted_norms",
        1e-5,
        max_over(slices.iter().take(cfg.verify_norm_max_ell).map(|s| {
            let s = s.as_ref().map_err(Clone::clone)?;
            Ok(s.modes
                .iter()
                .zip(&s.restricted_norms)
                .map(|(m, &w)| (w - sphere_restricted_norm(s.ell, m.m)).abs())
                .fold(0.0, f64::max))
        })),
    ));
    checks.push(Check::new(
        "ebk_residual_ell_10",
        1e-6,
        slices[9].as_ref().map_err(Clone::clone).and_then(|s| {
            let want = 110f64.sqrt() - 10.5;
            max_over(
                s.modes
                    .iter()
                    .map(|m| ebk_residual(m, &ev).map(|r| (r - want).abs())),
            )
        }),
    ));

    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        profile: p.name().into(),
        grid_size: solver.config().grid_size,
        checks,
        passed,
    };
    write_json(&cfg.out_dir, "verify.json", &report)?;
    for c in &report.checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        let residual = c.residual.map_or_else(
            || c.detail.clone().unwrap_or_default(),
            |r| format!("{r:.3e}"),
        );
        println!(
            "{status} {:<24} {residual} (tolerance {:e})",
            c.name, c.tolerance
        );
    }
    if passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: "round-sphere verification failed".into(),
        })
    }
}
