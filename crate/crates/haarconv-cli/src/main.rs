//! `haarconv`: batch experiment runner and verification driver.
//!
//! Exit codes: 0 all checks passed, 1 a check failed or the wrapped
//! operation reported failure, 2 usage error, 3 I/O error.

mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use haarconv::divisibility::{
    cp_root, embed_compound_poisson, embed_homogeneous, nth_root_abelian_dft, verify_root,
    DftRootOutcome,
};
use haarconv::io::{
    cp_from_record, measure_from_record, parse_dense_carrier, parse_grid, parse_space,
    record_from_certificate, record_from_dense, record_from_so3, record_from_sphere,
    CpSpecRecord, LoadedMeasure, MeasureRecord, SpaceHandle,
};
use haarconv::measure::{
    convolve_group, convolve_homog, energy_distance_test, s2_convolve, so3_convolve, Carrier,
    DenseMeasure, EnergyTestConfig,
};
use haarconv::rng::derive_seed;
use haarconv::semigroup::{
    decompose_semigroup, project_semigroup, semigroup_check_grid, CompoundPoissonSemigroup,
    DenseFamily, HeatSemigroupSo3,
};
use haarconv::verify::{run_suite, VerifyConfig};
use haarconv::Error as LibError;

use report::{semigroup_csv, verify_csv, SemigroupRow};

#[derive(Parser)]
#[command(name = "haarconv", version, about = "Convolution calculus on groups and homogeneous spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Seed for all randomized work (falls back to HAARCONV_SEED, then 7).
    #[arg(long)]
    seed: Option<u64>,
    /// Particle budget for empirical measures.
    #[arg(long, default_value_t = 10_000)]
    particles: usize,
    /// Tolerance override for dense checks.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Convolve two measures from JSON files.
    Convolve {
        /// Space descriptor, e.g. S3/K1 or SO3/SO2 (alternative to --group).
        #[arg(long)]
        space: Option<String>,
        /// Group name, e.g. Z12 (alternative to --space).
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        lhs: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build a semigroup family and run checks over a time grid.
    Semigroup {
        /// Family kind: cp (compound Poisson) or heat (SO(3)).
        #[arg(long)]
        kind: String,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        rate: f64,
        /// Jump measure JSON (cp kind).
        #[arg(long)]
        jump: Option<PathBuf>,
        /// Initial measure JSON (cp kind; defaults to the identity mass).
        #[arg(long)]
        initial: Option<PathBuf>,
        /// Time grid start:end:step or comma list.
        #[arg(long)]
        times: String,
        /// Comma-separated checks: semigroup, decompose, project.
        #[arg(long, default_value = "semigroup")]
        check: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Certify the embedding of a target measure into a semigroup.
    Embed {
        #[arg(long)]
        space: Option<String>,
        #[arg(long)]
        group: Option<String>,
        /// Target measure JSON; defaults to the hint family at time 1.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Compound-Poisson spec JSON {carrier, rate, jump, initial?}.
        #[arg(long)]
        hint: PathBuf,
        #[arg(long, default_value = "0:2:0.1")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Find or verify an nth convolution root.
    Root {
        #[arg(long)]
        group: String,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        n: u32,
        /// Method: dft (exhaustive branch search) or cp (canonical root from
        /// a --hint spec).
        #[arg(long)]
        method: String,
        #[arg(long)]
        hint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run a verification suite and write its report.
    Verify {
        /// One of: associativity, bijection, eq6, semigroup, decompose,
        /// project, embed, idempotent, heat, all.
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
    },
}

enum CliError {
    Usage(String),
    Io(String),
    Run(String),
}

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        match e {
            LibError::UnknownName(_) | LibError::Descriptor(_) => CliError::Usage(e.to_string()),
            other => CliError::Run(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn resolve_seed(opt: Option<u64>) -> u64 {
    opt.or_else(|| std::env::var("HAARCONV_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(7)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json_with_seed(path: &Path, value: Value, seed: u64) -> CliResult<()> {
    let mut value = value;
    if let Value::Object(map) = &mut value {
        map.insert("seed".into(), Value::from(seed));
    }
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Io(format!("serialization: {e}")))?;
    write_text(path, &(text + "\n"))
}

fn load_measure(path: &Path) -> CliResult<LoadedMeasure> {
    let record: MeasureRecord = read_json(path)?;
    Ok(measure_from_record(&record)?)
}

fn cmd_convolve(
    space: Option<String>,
    group: Option<String>,
    lhs: &Path,
    rhs: &Path,
    out: &Path,
    common: &CommonOpts,
) -> CliResult<bool> {
    let seed = resolve_seed(common.seed);
    let a = load_measure(lhs)?;
    let b = load_measure(rhs)?;
    let expected = space.or(group);
    if let Some(name) = &expected {
        if a.carrier_label() != *name || b.carrier_label() != *name {
            return Err(CliError::Usage(format!(
                "measures live on {} and {}, not on {name}",
                a.carrier_label(),
                b.carrier_label()
            )));
        }
    }
    let record = match (a, b) {
        (LoadedMeasure::Dense(x), LoadedMeasure::Dense(y)) => {
            let out_measure = match x.carrier() {
                Carrier::Group(_) => convolve_group(&x, &y)?,
                Carrier::Space(space) => convolve_homog(&x, &y, &space.section())?,
            };
            record_from_dense(&out_measure)
        }
        (LoadedMeasure::So3(x), LoadedMeasure::So3(y)) => {
            record_from_so3(&so3_convolve(&x, &y, common.particles, seed)?)
        }
        (LoadedMeasure::Sphere(x), LoadedMeasure::Sphere(y)) => {
            record_from_sphere(&s2_convolve(&x, &y, common.particles, seed)?)
        }
        (a, b) => {
            return Err(CliError::Usage(format!(
                "carrier mismatch: {} vs {}",
                a.carrier_label(),
                b.carrier_label()
            )))
        }
    };
    let value = serde_json::to_value(&record).map_err(|e| CliError::Io(e.to_string()))?;
    write_json_with_seed(out, value, seed)?;
    Ok(true)
}

fn dense_measure_from_file(path: &Path, carrier: &Carrier) -> CliResult<DenseMeasure> {
    match load_measure(path)? {
        LoadedMeasure::Dense(m) => {
            if !m.carrier().same(carrier) {
                return Err(CliError::Usage(format!(
                    "measure in {} lives on {}, expected {}",
                    path.display(),
                    m.carrier().label(),
                    carrier.label()
                )));
            }
            Ok(m)
        }
        _ => Err(CliError::Usage(format!("{} is not a dense measure", path.display()))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_semigroup(
    kind: &str,
    group: Option<String>,
    space: Option<String>,
    rate: f64,
    jump: Option<PathBuf>,
    initial: Option<PathBuf>,
    times: &str,
    check: &str,
    out: &Path,
    common: &CommonOpts,
) -> CliResult<bool> {
    let seed = resolve_seed(common.seed);
    let grid = parse_grid(times)?;
    let tol = common.tol.unwrap_or(1e-10);
    let checks: Vec<&str> = check.split(',').map(str::trim).filter(|c| !c.is_empty()).collect();
    for c in &checks {
        if !["semigroup", "decompose", "project"].contains(c) {
            return Err(CliError::Usage(format!("unknown check {c}")));
        }
    }
    let mut rows: Vec<SemigroupRow> = Vec::new();

    match kind {
        "cp" => {
            let carrier_name = group
                .or(space.clone())
                .ok_or_else(|| CliError::Usage("cp needs --group or --space".into()))?;
            let carrier = parse_dense_carrier(&carrier_name)?;
            let jump_path =
                jump.ok_or_else(|| CliError::Usage("cp needs a --jump measure".into()))?;
            let jump = dense_measure_from_file(&jump_path, &carrier)?;
            let initial = initial
                .map(|p| dense_measure_from_file(&p, &carrier))
                .transpose()?;
            let family = Arc::new(CompoundPoissonSemigroup::new(rate, jump, initial)?);

            for c in &checks {
                match *c {
                    "semigroup" => {
                        let positive: Vec<f64> =
                            grid.iter().copied().filter(|t| *t > 0.0).collect();
                        for check in semigroup_check_grid(family.as_ref(), &positive, tol)? {
                            rows.push(SemigroupRow::from(&check));
                        }
                    }
                    "decompose" => {
                        let report = decompose_semigroup(
                            family.as_ref(),
                            &grid,
                            common.tol.unwrap_or(1e-12),
                        )?;
                        for c in &report.checks {
                            rows.push(SemigroupRow::from(c));
                        }
                    }
                    "project" => {
                        let desc = space
                            .clone()
                            .ok_or_else(|| CliError::Usage("project needs --space".into()))?;
                        let SpaceHandle::Finite(space) = parse_space(&desc)? else {
                            return Err(CliError::Usage(
                                "project applies to finite spaces here; use kind=heat for the sphere"
                                    .into(),
                            ));
                        };
                        let (_, checks) = project_semigroup(
                            family.clone() as Arc<dyn DenseFamily>,
                            &space,
                            &grid,
                            tol,
                        )?;
                        for check in checks {
                            rows.push(SemigroupRow {
                                t: check.t,
                                s: check.s,
                                deviation: check.deviation,
                                test: "projected-law".into(),
                                pass: check.pass,
                            });
                        }
                    }
                    _ => unreachable!(),
                }
            }
        }
        "heat" => {
            let heat = HeatSemigroupSo3::default();
            let n = common.particles;
            for c in &checks {
                if *c != "semigroup" {
                    return Err(CliError::Usage(format!(
                        "heat supports only the semigroup check, got {c}"
                    )));
                }
                for (i, &t) in grid.iter().enumerate() {
                    if t <= 0.0 {
                        continue;
                    }
                    let s = derive_seed(seed, 0x11AA, i as u64);
                    let a = heat.sample(t, n, s)?;
                    let b = heat.sample(t, n, s ^ 0x1)?;
                    let ab = so3_convolve(&a, &b, n, s ^ 0x2)?;
                    let direct = heat.sample(2.0 * t, n, s ^ 0x3)?;
                    let res =
                        energy_distance_test(&ab, &direct, &EnergyTestConfig::default(), s)?;
                    rows.push(SemigroupRow {
                        t,
                        s: t,
                        deviation: res.statistic - res.threshold,
                        test: "law-energy".into(),
                        pass: res.pass,
                    });
                }
            }
        }
        other => return Err(CliError::Usage(format!("unknown kind {other}"))),
    }

    write_text(out, &semigroup_csv(seed, &rows))?;
    Ok(rows.iter().all(|r| r.pass))
}

fn cmd_embed(
    space: Option<String>,
    group: Option<String>,
    target: Option<PathBuf>,
    hint: &Path,
    grid: &str,
    out: &Path,
    common: &CommonOpts,
) -> CliResult<bool> {
    let seed = resolve_seed(common.seed);
    let grid = parse_grid(grid)?;
    let spec_record: CpSpecRecord = read_json(hint)?;
    let spec = cp_from_record(&spec_record)?;

    let cert = match (&space, &group) {
        (Some(desc), _) => {
            let SpaceHandle::Finite(space) = parse_space(desc)? else {
                return Err(CliError::Usage(
                    "embedding certificates are dense; SO3/SO2 is not supported here".into(),
                ));
            };
            let alpha = match target {
                Some(path) => dense_measure_from_file(&path, &Carrier::Space(space.clone()))?,
                None => haarconv::measure::project_measure(&spec.measure_at(1.0)?, &space)?,
            };
            embed_homogeneous(&alpha, &space, &spec, &grid)?
        }
        (None, Some(name)) => {
            let carrier = parse_dense_carrier(name)?;
            if !spec.jump().carrier().same(&carrier) {
                return Err(CliError::Usage(format!(
                    "hint spec lives on {}, expected {}",
                    spec.jump().carrier().label(),
                    carrier.label()
                )));
            }
            let mut cert = embed_compound_poisson(&spec, &grid)?;
            if let Some(path) = target {
                let alpha = dense_measure_from_file(&path, &carrier)?;
                let dev = haarconv::measure::tv_distance(&alpha, &cert.target)?;
                if dev > 1e-10 {
                    cert.pass = false;
                    cert.failure = Some(format!(
                        "target deviates from the family's time-1 measure by {dev:.3e}"
                    ));
                }
            }
            cert
        }
        (None, None) => return Err(CliError::Usage("embed needs --space or --group".into())),
    };

    let record = record_from_certificate(&cert);
    let value = serde_json::to_value(&record).map_err(|e| CliError::Io(e.to_string()))?;
    write_json_with_seed(out, value, seed)?;
    Ok(cert.pass)
}

fn cmd_root(
    group: &str,
    measure: &Path,
    n: u32,
    method: &str,
    hint: Option<PathBuf>,
    out: Option<PathBuf>,
    common: &CommonOpts,
) -> CliResult<bool> {
    let seed = resolve_seed(common.seed);
    let carrier = parse_dense_carrier(group)?;
    let mu = dense_measure_from_file(measure, &carrier)?;

    let (found, value) = match method {
        "dft" => match nth_root_abelian_dft(&mu, n)? {
            DftRootOutcome::Found { root, branch } => {
                let check = verify_root(&mu, &root, n, 1e-8)?;
                let root_value = serde_json::to_value(record_from_dense(&root))
                    .map_err(|e| CliError::Io(e.to_string()))?;
                (
                    check.pass,
                    serde_json::json!({
                        "method": "dft",
                        "n": n,
                        "outcome": "found",
                        "branch": branch,
                        "deviation": check.deviation,
                        "root": root_value,
                    }),
                )
            }
            DftRootOutcome::NoRoot { branches_searched } => (
                false,
                serde_json::json!({
                    "method": "dft",
                    "n": n,
                    "outcome": "no-root",
                    "branches_searched": branches_searched,
                }),
            ),
        },
        "cp" => {
            let hint_path =
                hint.ok_or_else(|| CliError::Usage("cp roots need a --hint spec".into()))?;
            let spec_record: CpSpecRecord = read_json(&hint_path)?;
            let spec = cp_from_record(&spec_record)?;
            let at_one = spec.measure_at(1.0)?;
            let match_dev = haarconv::measure::tv_distance(&at_one, &mu)?;
            if match_dev > 1e-10 {
                return Err(CliError::Run(format!(
                    "hint family's time-1 measure deviates from the target by {match_dev:.3e}"
                )));
            }
            let root = cp_root(&spec, n)?;
            let check = verify_root(&mu, &root, n, 1e-10)?;
            let root_value = serde_json::to_value(record_from_dense(&root))
                .map_err(|e| CliError::Io(e.to_string()))?;
            (
                check.pass,
                serde_json::json!({
                    "method": "cp",
                    "n": n,
                    "outcome": "found",
                    "deviation": check.deviation,
                    "root": root_value,
                }),
            )
        }
        other => return Err(CliError::Usage(format!("unknown method {other}"))),
    };

    if let Some(path) = out {
        write_json_with_seed(&path, value, seed)?;
    } else {
        println!("{}", serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?);
    }
    Ok(found)
}

fn cmd_verify(suite: &str, out: Option<PathBuf>, common: &CommonOpts) -> CliResult<bool> {
    let seed = resolve_seed(common.seed);
    let cfg = VerifyConfig { seed, particles: common.particles, tol_override: common.tol };
    let rows = match run_suite(suite, &cfg) {
        Ok(rows) => rows,
        Err(LibError::UnknownName(msg)) => return Err(CliError::Usage(msg)),
        Err(e) => return Err(CliError::Run(e.to_string())),
    };
    let csv = verify_csv(seed, &rows);
    match out {
        Some(path) => write_text(&path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(rows.iter().all(|r| r.pass))
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Convolve { space, group, lhs, rhs, out, common } => {
            cmd_convolve(space, group, &lhs, &rhs, &out, &common)
        }
        Command::Semigroup {
            kind,
            group,
            space,
            rate,
            jump,
            initial,
            times,
            check,
            out,
            common,
        } => cmd_semigroup(
            &kind, group, space, rate, jump, initial, &times, &check, &out, &common,
        ),
        Command::Embed { space, group, target, hint, grid, out, common } => {
            cmd_embed(space, group, target, &hint, &grid, &out, &common)
        }
        Command::Root { group, measure, n, method, hint, out, common } => {
            cmd_root(&group, &measure, n, &method, hint, out, &common)
        }
        Command::Verify { suite, out, common } => cmd_verify(&suite, out, &common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("i/o error: {msg}");
            ExitCode::from(3)
        }
    }
}
