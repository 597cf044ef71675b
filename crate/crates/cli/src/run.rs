//! Verbs: verification suites, profile tables, K-curves and martingale sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use symineq::capacity::{cap1, muckenhoupt_check, weight_wq, WeightCurve};
use symineq::grid::LogGrid;
use symineq::inequalities::{
    verify_aa, verify_auto3, verify_fii, verify_gn_sharp, verify_ledoux, verify_oscillation_with, verify_poincare, verify_pro1,
    VerificationReport,
};
use symineq::interpolation::{derive_oscillation_from_gn, reiteration_check, KFunctionalCurve};
use symineq::martingale::{herz_grid, herz_ratio, random_martingale, stopped_square_check, verify_herz, StoppingTime, HERZ_THRESHOLD};
use symineq::measure_space::sample_function;
use symineq::{Error, ModelSpace, ProfileSpec, SpaceSpec, TestFunction};

use crate::config::{ConfigError, InequalityId, InequalitySpec, ScenarioConfig};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;

/// Errors of a run that are not verification failures.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io(PathBuf, std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Io(p, e) => write!(f, "cannot write {}: {e}", p.display()),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

type RunResult<T> = Result<T, RunError>;

fn prepare_dir(dir: &Path) -> RunResult<()> {
    fs::create_dir_all(dir).map_err(|e| RunError::Io(dir.to_owned(), e))
}

fn write_json(path: &Path, value: &impl Serialize) -> RunResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| RunError::Io(path.to_owned(), e))
}

fn csv_writer(path: &Path) -> RunResult<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| RunError::Io(path.to_owned(), std::io::Error::other(e)))
}

fn csv_io(path: &Path) -> impl Fn(csv::Error) -> RunError + '_ {
    move |e| RunError::Io(path.to_owned(), std::io::Error::other(e))
}

/// Shortest round-trip decimal form; non-finite values print as `inf`, `-inf`, `NaN`.
fn num(x: f64) -> String {
    format!("{x}")
}

/// Outcome of one (inequality, function) pair.
enum Outcome {
    Report(VerificationReport),
    Failed(Error),
}

#[derive(Serialize)]
struct InequalitySummary {
    id: String,
    params: BTreeMap<String, serde_json::Value>,
    reports: usize,
    passed: usize,
    worst_margin: Option<f64>,
    errors: Vec<String>,
}

#[derive(Serialize)]
struct Summary {
    verb: &'static str,
    space: String,
    profile: String,
    functions: usize,
    resolution: usize,
    tol: f64,
    all_passed: bool,
    inequalities: Vec<InequalitySummary>,
}

fn exit_for(all_passed: bool, overflow: bool) -> i32 {
    if overflow {
        EXIT_OVERFLOW
    } else if all_passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

struct Context<'a> {
    space: &'a ModelSpace,
    profile: &'a ProfileSpec,
    family: &'a [TestFunction],
    resolution: usize,
    tol: f64,
    grid: Vec<f64>,
}

fn ball_dimension(space: &ModelSpace) -> usize {
    match space {
        ModelSpace::EuclideanBall { n } => *n,
        _ => 0,
    }
}

fn default_y() -> SpaceSpec {
    "lorentzq:phi=tlog:1,q=2".parse().expect("valid space")
}

/// Runs one configured inequality; one outcome per function, or one for family-level checks.
fn run_inequality(spec: &InequalitySpec, ctx: &Context) -> Vec<Outcome> {
    let q = spec.q.unwrap_or(1.0);
    let tol = spec.tol.unwrap_or(ctx.tol);
    let res = spec.resolution.unwrap_or(ctx.resolution);
    let grid = spec.grid.as_ref().map_or_else(|| ctx.grid.clone(), |g| g.points());
    let wrap = |r: symineq::Result<VerificationReport>| match r {
        Ok(r) => Outcome::Report(r),
        Err(e) => Outcome::Failed(e),
    };
    match spec.id {
        InequalityId::Poincare => {
            let x = spec.x.clone().unwrap_or(SpaceSpec::Lp(2.0));
            let y = spec.y.clone().unwrap_or_else(default_y);
            return vec![wrap(verify_poincare(ctx.space, ctx.family, res, &x, &y, ctx.profile, q, tol))];
        }
        InequalityId::Auto3 => return vec![wrap(verify_auto3(ctx.family, res, tol))],
        _ => {}
    }
    // shared per-inequality state
    let weights = match spec.id {
        InequalityId::Reod00 => Some(WeightCurve::new(ctx.profile, q)),
        _ => None,
    };
    let muck = match spec.id {
        InequalityId::Fii => Some(muckenhoupt_check(ctx.profile, q, &LogGrid::default())),
        _ => None,
    };
    symineq::par::map(ctx.family, |f| {
        let sampled = || sample_function(ctx.space, f, res);
        let r = match spec.id {
            InequalityId::Reod00 => match weights.as_ref().expect("built above") {
                Ok(w) => sampled().and_then(|g| verify_oscillation_with(&g, w, &grid, tol)),
                Err(e) => Err(e.clone()),
            },
            InequalityId::Pro1 => sampled().and_then(|g| verify_pro1(&g, ctx.profile, &grid, tol)),
            InequalityId::Aa => sampled().and_then(|g| verify_aa(&g, ctx.profile, q, &grid, tol)),
            InequalityId::Fii => match muck.as_ref().expect("built above") {
                Ok(m) => verify_fii(ctx.space, f, res, ctx.profile, m, &grid, tol),
                Err(e) => Err(e.clone()),
            },
            InequalityId::Ledoux => sampled().and_then(|g| verify_ledoux(&g, tol)),
            InequalityId::Gnlo => sampled().and_then(|g| verify_gn_sharp(&g, tol)),
            InequalityId::GnWeak | InequalityId::GnStrong => {
                derive_oscillation_from_gn(ball_dimension(ctx.space), f, res, spec.id == InequalityId::GnStrong, &grid, tol)
            }
            InequalityId::Bjc => sampled().and_then(|g| reiteration_check(&g, spec.t.unwrap_or(0.25), &grid, spec.theta.unwrap_or(0.5), tol)),
            InequalityId::Poincare | InequalityId::Auto3 => unreachable!("family-level checks return above"),
        };
        wrap(r)
    })
}

fn spec_params(spec: &InequalitySpec) -> BTreeMap<String, serde_json::Value> {
    let mut p = BTreeMap::new();
    if let Some(q) = spec.q {
        p.insert("q".into(), json!(q));
    }
    if let Some(r) = spec.resolution {
        p.insert("resolution".into(), json!(r));
    }
    if let Some(x) = &spec.x {
        p.insert("x".into(), json!(x.to_string()));
    }
    if let Some(y) = &spec.y {
        p.insert("y".into(), json!(y.to_string()));
    }
    p
}

/// `verify`: one JSON report per (inequality, function) plus `summary.json`.
pub fn verify(config: &ScenarioConfig) -> RunResult<i32> {
    config.validate()?;
    let profile = config.profile_spec()?;
    let family = config.functions()?;
    let out = &config.output;
    prepare_dir(out)?;
    let ctx = Context {
        space: &config.space,
        profile: &profile,
        family: &family,
        resolution: config.resolution,
        tol: config.tol,
        grid: config.grid.points(),
    };
    let mut summaries = Vec::new();
    let mut all_passed = true;
    let mut overflow = false;
    for (i, spec) in config.inequalities.iter().enumerate() {
        log::info!("running {} over {} functions", spec.id, family.len());
        let outcomes = run_inequality(spec, &ctx);
        let mut summary = InequalitySummary {
            id: spec.id.to_string(),
            params: spec_params(spec),
            reports: 0,
            passed: 0,
            worst_margin: None,
            errors: Vec::new(),
        };
        for (j, outcome) in outcomes.into_iter().enumerate() {
            let stem = if spec.id.is_family_level() { format!("{i:02}_{}_family", spec.id) } else { format!("{i:02}_{}_f{j:03}", spec.id) };
            match outcome {
                Outcome::Report(r) => {
                    summary.reports += 1;
                    summary.passed += usize::from(r.passed);
                    all_passed &= r.passed;
                    let m = r.min_relative_margin;
                    summary.worst_margin = Some(summary.worst_margin.map_or(m, |w| w.min(m)));
                    write_json(&out.join(format!("{stem}.json")), &r)?;
                }
                Outcome::Failed(e) => {
                    all_passed = false;
                    overflow |= matches!(e, Error::Overflow(_));
                    log::warn!("{stem}: {e}");
                    summary.errors.push(format!("{stem}: {e}"));
                }
            }
        }
        summaries.push(summary);
    }
    let summary = Summary {
        verb: "verify",
        space: config.space.name(),
        profile: profile.name.clone(),
        functions: family.len(),
        resolution: config.resolution,
        tol: config.tol,
        all_passed,
        inequalities: summaries,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(exit_for(all_passed, overflow))
}

/// `profile`: `profile.csv` with `t, I, w1, w2, cap1(t, 1/2)` on the config grid.
///
/// Rows where a column cannot be evaluated keep the value `NaN` and are
/// flagged in the `status` column.
pub fn profile(config: &ScenarioConfig) -> RunResult<i32> {
    config.validate()?;
    let profile = config.profile_spec()?;
    prepare_dir(&config.output)?;
    let path = config.output.join("profile.csv");
    write_profile_csv(&path, &profile, &config.grid.points())?;
    Ok(EXIT_OK)
}

pub fn write_profile_csv(path: &Path, profile: &ProfileSpec, grid: &[f64]) -> RunResult<()> {
    let mut w = csv_writer(path)?;
    let io = csv_io(path);
    w.write_record(["t", "I", "w1", "w2", "cap1_half", "status"]).map_err(&io)?;
    for &t in grid {
        let cap = if t < 0.5 { cap1(profile, t, 0.5) } else { cap1(profile, 0.5, t) };
        let cols = [Ok(profile.eval(t)), weight_wq(profile, 1.0, t), weight_wq(profile, 2.0, t), cap];
        let ok = cols.iter().all(|c| matches!(c, Ok(v) if v.is_finite()));
        if !ok {
            log::warn!("profile {} not finite at t = {t}", profile.name);
        }
        let mut row = vec![num(t)];
        row.extend(cols.iter().map(|c| num(*c.as_ref().unwrap_or(&f64::NAN))));
        row.push(if ok { "ok" } else { "overflow" }.into());
        w.write_record(&row).map_err(&io)?;
    }
    w.flush().map_err(|e| RunError::Io(path.to_owned(), e))
}

/// `kfunc`: one `kfunc_fNNN.csv` per function with the K-curve of `(L^1, L^∞)`.
pub fn kfunc(config: &ScenarioConfig) -> RunResult<i32> {
    config.validate()?;
    let family = config.functions()?;
    let out = &config.output;
    prepare_dir(out)?;
    let grid = config.grid.points();
    let curves = symineq::par::map(&family, |f| {
        sample_function(&config.space, f, config.resolution).and_then(|g| KFunctionalCurve::new(&g, &grid))
    });
    let mut checked = Vec::new();
    let mut all_passed = true;
    for (j, curve) in curves.into_iter().enumerate() {
        let curve = match curve {
            Ok(c) => c,
            Err(e) => {
                all_passed = false;
                checked.push(json!({ "function": j, "error": e.to_string() }));
                continue;
            }
        };
        let path = out.join(format!("kfunc_f{j:03}.csv"));
        let mut w = csv_writer(&path)?;
        let io = csv_io(&path);
        w.write_record(["t", "k", "k_over_t", "fstar", "slope"]).map_err(&io)?;
        for row in curve.rows() {
            w.write_record(row.iter().map(|v| num(*v))).map_err(&io)?;
        }
        w.flush().map_err(|e| RunError::Io(path.clone(), e))?;
        let check = curve.check(1e-10);
        all_passed &= check.is_ok();
        checked.push(json!({ "function": j, "concave_and_monotone": check.is_ok(), "error": check.err().map(|e| e.to_string()) }));
    }
    write_json(&out.join("summary.json"), &json!({ "verb": "kfunc", "functions": family.len(), "all_passed": all_passed, "curves": checked }))?;
    Ok(exit_for(all_passed, false))
}

/// `martingale`: Herz endpoint and stopped square functions over seeded random martingales.
pub fn martingale(config: &ScenarioConfig) -> RunResult<i32> {
    config.validate()?;
    let spec = config.martingale.clone().unwrap_or_else(|| serde_json::from_str("{}").expect("defaults"));
    if spec.depth == 0 || spec.depth > 20 {
        return Err(ConfigError::Invalid(format!("martingale depth must be in 1..=20, got {}", spec.depth)).into());
    }
    let threshold = spec.threshold.unwrap_or(HERZ_THRESHOLD);
    let out = &config.output;
    prepare_dir(out)?;
    let grid = herz_grid();
    let seeds: Vec<u64> = (0..spec.count as u64).map(|i| spec.seed.wrapping_add(i)).collect();
    let rows = symineq::par::map(&seeds, |&s| {
        let m = random_martingale(s, spec.depth);
        let herz = verify_herz(&m, &grid, threshold, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let nu = StoppingTime::random(spec.depth, 0.3, &mut rng);
        let tau = StoppingTime::random(spec.depth, 0.2, &mut rng);
        let stopped = stopped_square_check(&m, &nu, &tau).map(|r| r.passed).unwrap_or(false);
        (s, herz_ratio(&m, &grid), herz.passed, stopped)
    });
    let path = out.join("martingale.csv");
    let mut w = csv_writer(&path)?;
    let io = csv_io(&path);
    w.write_record(["seed", "herz_ratio", "herz_passed", "stopped_square_passed"]).map_err(&io)?;
    for (s, ratio, herz, stopped) in &rows {
        w.write_record([s.to_string(), num(*ratio), herz.to_string(), stopped.to_string()]).map_err(&io)?;
    }
    w.flush().map_err(|e| RunError::Io(path.clone(), e))?;
    let herz_passed = rows.iter().filter(|r| r.2).count();
    let stopped_passed = rows.iter().filter(|r| r.3).count();
    let sup = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let all_passed = herz_passed == rows.len() && stopped_passed == rows.len();
    write_json(
        &out.join("summary.json"),
        &json!({
            "verb": "martingale",
            "depth": spec.depth,
            "count": spec.count,
            "seed": spec.seed,
            "threshold": threshold,
            "sup_herz_ratio": sup,
            "herz_passed": herz_passed,
            "stopped_square_passed": stopped_passed,
            "all_passed": all_passed,
        }),
    )?;
    Ok(exit_for(all_passed, false))
}
