//! The `twf` command line: one subcommand per experiment, each reading a
//! JSON configuration and writing a CSV file and a JSON report.
//!
//! Exit codes: 0 on success, 1 on configuration or input errors, 2 when a
//! solver behind a reported number did not converge.

pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::algebra::{NormKind, WeightFunction};
use crate::cocycles::validate_cocycle;
use crate::codec::{convergence_csv, index_number, number, to_json};
use crate::error::{Error, Result};
use crate::groups::{enumerate, Region};
use crate::multipliers::{nd_check, pd_check, schoenberg_crosscheck, DefinitenessReport, Multiplier};
use crate::operators::{bracket_norm_traced, content_lower, decay_constant_lower, ElementSampler};
use crate::summation::{run_summation, summing_net, NetKind, SummationInput};
use config::Loaded;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "TWF_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "twf", version, about = "Twisted Fourier analysis on discrete groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for outputs named after the subcommand.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// CSV output path (overrides the configuration and --out).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// JSON report path (overrides the configuration and --out).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ball and sphere sizes.
    Ball(Io),
    /// Cocycle identity, normalization and modulus defects.
    ValidateCocycle(Io),
    /// Certified bracket for the operator norm of an element.
    Norm(Io),
    /// Lower bound for the Haagerup content of a set.
    Content(Io),
    /// Positive definiteness of a multiplier.
    PdCheck(Io),
    /// Negative definiteness of a multiplier.
    NdCheck(Io),
    /// Negative definiteness of ψ against positive definiteness of e^{-tψ}.
    Schoenberg(Io),
    /// Fejér summation along a Følner net.
    Fejer(Io),
    /// Abel–Poisson summation.
    Abel(Io),
    /// Gauss summation on lattices.
    Gauss(Io),
    /// Summation with polynomially decaying kernels.
    Poly(Io),
    /// Empirical lower bound for a decay constant.
    Decay(Io),
    /// Ball sizes against content lower bounds.
    Growth(Io),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ball(_) => "ball",
            Command::ValidateCocycle(_) => "validate-cocycle",
            Command::Norm(_) => "norm",
            Command::Content(_) => "content",
            Command::PdCheck(_) => "pd-check",
            Command::NdCheck(_) => "nd-check",
            Command::Schoenberg(_) => "schoenberg",
            Command::Fejer(_) => "fejer",
            Command::Abel(_) => "abel",
            Command::Gauss(_) => "gauss",
            Command::Poly(_) => "poly",
            Command::Decay(_) => "decay",
            Command::Growth(_) => "growth",
        }
    }

    fn io(&self) -> &Io {
        match self {
            Command::Ball(io)
            | Command::ValidateCocycle(io)
            | Command::Norm(io)
            | Command::Content(io)
            | Command::PdCheck(io)
            | Command::NdCheck(io)
            | Command::Schoenberg(io)
            | Command::Fejer(io)
            | Command::Abel(io)
            | Command::Gauss(io)
            | Command::Poly(io)
            | Command::Decay(io)
            | Command::Growth(io) => io,
        }
    }
}

/// What a subcommand produced.
pub struct Outcome {
    pub csv: String,
    pub report: Value,
    pub summary: String,
    pub converged: bool,
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.converged {
                EXIT_OK
            } else {
                EXIT_NOT_CONVERGED
            }
        }
        Err(e) => {
            eprintln!("twf {}: {e}", cli.command.name());
            EXIT_CONFIG
        }
    }
}

fn threads(config_threads: Option<usize>) -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a positive integer"))),
        Err(_) => Ok(config_threads.unwrap_or(0)),
    }
}

/// Run a subcommand and write its artifacts.
pub fn execute(command: &Command) -> Result<Outcome> {
    let io = command.io();
    let loaded = Loaded::read(&io.config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads(loaded.config.threads)?)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| dispatch(command, &loaded))?;
    let name = command.name();
    let pick = |flag: &Option<PathBuf>, configured: &Option<PathBuf>, ext: &str| -> PathBuf {
        match (flag, configured) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => loaded.resolve(p),
            (None, None) => io.out.join(format!("{name}.{ext}")),
        }
    };
    let csv = pick(&io.csv, &loaded.config.output.csv, "csv");
    let report = pick(&io.report, &loaded.config.output.report, "json");
    write(&csv, &outcome.csv)?;
    write(&report, &to_json(&outcome.report)?)?;
    Ok(outcome)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn dispatch(command: &Command, cfg: &Loaded) -> Result<Outcome> {
    match command {
        Command::Ball(_) => ball(cfg),
        Command::ValidateCocycle(_) => validate(cfg),
        Command::Norm(_) => norm(cfg),
        Command::Content(_) => content(cfg),
        Command::PdCheck(_) => definiteness(cfg, true),
        Command::NdCheck(_) => definiteness(cfg, false),
        Command::Schoenberg(_) => schoenberg(cfg),
        Command::Fejer(_) | Command::Abel(_) | Command::Gauss(_) | Command::Poly(_) => summation(command, cfg),
        Command::Decay(_) => decay(cfg),
        Command::Growth(_) => growth(cfg),
    }
}

fn line(out: &mut String, fields: &[String]) {
    writeln!(out, "{}", fields.join(",")).expect("writing to a String");
}

fn ball(cfg: &Loaded) -> Result<Outcome> {
    let group = cfg.config.group;
    let radius = cfg.radius()?;
    let b = enumerate(&group, Region::Ball(radius))?;
    let mut spheres: BTreeMap<u64, usize> = BTreeMap::new();
    for g in b.iter() {
        *spheres.entry(group.length_key(g)).or_default() += 1;
    }
    let mut csv = String::from("length_key,length,sphere_size,ball_size\n");
    let mut total = 0;
    for (&k, &n) in &spheres {
        total += n;
        line(&mut csv, &[k.to_string(), number(group.key_length(k)), n.to_string(), total.to_string()]);
    }
    Ok(Outcome {
        csv,
        report: json!({
            "command": "ball",
            "group": group,
            "radius": radius,
            "size": b.len(),
            "spheres": spheres.iter().map(|(k, n)| json!({"length_key": k, "size": n})).collect::<Vec<_>>(),
        }),
        summary: format!("ball: |Ball({radius})| = {} in {group}", b.len()),
        converged: true,
    })
}

/// Defects above this are reported as a failed validation.
const COCYCLE_TOLERANCE: f64 = 1e-12;

fn validate(cfg: &Loaded) -> Result<Outcome> {
    let sigma = cfg.cocycle(None)?;
    let radius = cfg.integer_radius()?;
    let rep = validate_cocycle(&sigma, radius)?;
    let worst = rep
        .max_identity_defect
        .max(rep.max_normalization_defect)
        .max(rep.max_modulus_defect);
    let mut csv = String::from("max_identity_defect,max_normalization_defect,max_modulus_defect,triples_checked,exhaustive\n");
    line(
        &mut csv,
        &[
            number(rep.max_identity_defect),
            number(rep.max_normalization_defect),
            number(rep.max_modulus_defect),
            rep.triples_checked.to_string(),
            rep.exhaustive.to_string(),
        ],
    );
    let valid = worst <= COCYCLE_TOLERANCE;
    Ok(Outcome {
        csv,
        report: json!({
            "command": "validate-cocycle",
            "group": sigma.group(),
            "cocycle": sigma.descriptor(),
            "radius": radius,
            "tolerance": COCYCLE_TOLERANCE,
            "valid": valid,
            "defects": rep,
        }),
        summary: format!(
            "validate-cocycle: {} (largest defect {worst:.3e}, {} triples)",
            if valid { "valid" } else { "INVALID" },
            rep.triples_checked
        ),
        converged: true,
    })
}

fn norm(cfg: &Loaded) -> Result<Outcome> {
    let (f, sigma, _) = cfg.element()?;
    let schedule = match (&cfg.config.radii, cfg.config.radius) {
        (Some(r), _) => r.clone(),
        (None, Some(r)) => vec![r],
        (None, None) => return Err(Error::InvalidArgument("configuration needs `radius` or `radii`".into())),
    };
    let (bracket, trace) = bracket_norm_traced(&f, &sigma, &schedule, &cfg.config.solver)?;
    let mut csv = String::from("R,lower,upper,residual,matvecs,converged,seed\n");
    for (r, rep) in &trace {
        line(
            &mut csv,
            &[
                index_number(*r),
                number(rep.value),
                number(bracket.upper),
                number(rep.residual),
                rep.matvecs.to_string(),
                rep.converged.to_string(),
                rep.seed.to_string(),
            ],
        );
    }
    let converged = trace.iter().all(|(_, r)| r.converged);
    Ok(Outcome {
        csv,
        summary: format!(
            "norm: [{:.12}, {:.12}] at R = {} ({} terms)",
            bracket.lower,
            bracket.upper,
            bracket.lower_method.radius,
            f.len()
        ),
        report: json!({
            "command": "norm",
            "group": f.group(),
            "cocycle": sigma.descriptor(),
            "bracket": bracket,
            "trace": trace.iter().map(|(r, rep)| json!({"radius": r, "report": rep})).collect::<Vec<_>>(),
        }),
        converged,
    })
}

fn content(cfg: &Loaded) -> Result<Outcome> {
    let group = cfg.config.group;
    let set = cfg.set()?;
    let radius = cfg.radius()?;
    let opts = cfg.content_options();
    let est = content_lower(&group, &set, radius, &opts)?;
    let mut csv = String::from("word,re,im\n");
    for g in &est.set {
        let c = est.witness.coefficient(g);
        line(&mut csv, &[group.format(g), number(c.re), number(c.im)]);
    }
    Ok(Outcome {
        csv,
        summary: format!(
            "content: {:.12} ≤ c(E) ≤ {:.12} for |E| = {} at R = {radius}",
            est.lower,
            est.upper,
            est.set.len()
        ),
        report: json!({
            "command": "content",
            "group": group,
            "set": est.set.iter().map(|g| group.format(g)).collect::<Vec<_>>(),
            "lower": est.lower,
            "upper": est.upper,
            "radius": est.radius,
            "restarts": est.restarts,
            "best_restart": est.best_restart,
            "rounds": est.rounds,
            "matvecs": est.matvecs,
            "seed": est.seed,
            "options": opts,
        }),
        converged: true,
    })
}

fn report_row(out: &mut String, test: &str, t: Option<f64>, r: &DefinitenessReport) {
    line(
        out,
        &[
            test.to_string(),
            t.map(number).unwrap_or_default(),
            index_number(r.ball_radius),
            r.matrix_dim.to_string(),
            number(r.extreme_eigenvalue),
            number(r.tol),
            r.pass.to_string(),
        ],
    );
}

const DEFINITENESS_HEADER: &str = "test,t,ball_radius,matrix_dim,extreme_eigenvalue,tol,pass\n";

fn definiteness(cfg: &Loaded, positive: bool) -> Result<Outcome> {
    let phi = Multiplier::new(&cfg.config.group, cfg.multiplier()?)?;
    let radius = cfg.radius()?;
    let opts = &cfg.config.definiteness;
    let (name, rep) = if positive {
        ("pd-check", pd_check(&phi, radius, opts)?)
    } else {
        ("nd-check", nd_check(&phi, radius, opts)?)
    };
    let mut csv = String::from(DEFINITENESS_HEADER);
    report_row(&mut csv, if positive { "pd" } else { "nd" }, None, &rep);
    Ok(Outcome {
        csv,
        summary: format!(
            "{name}: {} (extreme eigenvalue {:.6e}, dimension {})",
            if rep.pass { "pass" } else { "fail" },
            rep.extreme_eigenvalue,
            rep.matrix_dim
        ),
        report: json!({
            "command": name,
            "group": phi.group(),
            "multiplier": phi.descriptor(),
            "report": rep,
        }),
        converged: true,
    })
}

fn schoenberg(cfg: &Loaded) -> Result<Outcome> {
    let psi = Multiplier::new(&cfg.config.group, cfg.multiplier()?)?;
    let radius = cfg.radius()?;
    let ts = cfg.config.ts.clone().unwrap_or_else(|| vec![0.1, 1.0, 5.0]);
    let rep = schoenberg_crosscheck(&psi, radius, &ts, &cfg.config.definiteness)?;
    let mut csv = String::from(DEFINITENESS_HEADER);
    report_row(&mut csv, "nd", None, &rep.nd);
    for p in &rep.pd {
        report_row(&mut csv, "pd", Some(p.t), &p.report);
    }
    Ok(Outcome {
        csv,
        summary: format!(
            "schoenberg: {} (n.d. {}, p.d. passes {}/{})",
            if rep.consistent { "consistent" } else { "INCONSISTENT" },
            if rep.nd.pass { "pass" } else { "fail" },
            rep.pd.iter().filter(|p| p.report.pass).count(),
            rep.pd.len()
        ),
        report: json!({
            "command": "schoenberg",
            "group": psi.group(),
            "psi": psi.descriptor(),
            "report": rep,
        }),
        converged: true,
    })
}

fn net_kind(command: &Command, cfg: &Loaded) -> Result<NetKind> {
    let c = &cfg.config;
    let schedule = c.schedule.clone();
    Ok(match command {
        Command::Fejer(_) => {
            let schedule = match schedule {
                None => match NetKind::default_fejer() {
                    NetKind::Fejer { schedule, .. } => schedule,
                    _ => unreachable!(),
                },
                Some(s) => s
                    .iter()
                    .map(|&n| {
                        if n >= 1.0 && n.fract() == 0.0 && n < 1e15 {
                            Ok(n as u64)
                        } else {
                            Err(Error::InvalidArgument(format!("Fejér index {n} must be a positive integer")))
                        }
                    })
                    .collect::<Result<_>>()?,
            };
            NetKind::Fejer {
                folner: c.folner,
                schedule,
            }
        }
        Command::Abel(_) => match schedule {
            Some(schedule) => NetKind::Abel {
                schedule,
                length: c.length,
            },
            None => match NetKind::default_abel() {
                NetKind::Abel { schedule, .. } => NetKind::Abel {
                    schedule,
                    length: c.length,
                },
                _ => unreachable!(),
            },
        },
        Command::Gauss(_) => match schedule {
            Some(schedule) => NetKind::Gauss { schedule },
            None => NetKind::default_gauss(),
        },
        Command::Poly(_) => {
            let NetKind::Poly { schedule: default, q } = NetKind::default_poly() else { unreachable!() };
            NetKind::Poly {
                schedule: schedule.unwrap_or(default),
                q: c.q.unwrap_or(q),
            }
        }
        _ => unreachable!("not a summation command"),
    })
}

fn summation(command: &Command, cfg: &Loaded) -> Result<Outcome> {
    let (f, sigma, tail_l1) = cfg.element()?;
    let radius = cfg.radius()?;
    let kind = net_kind(command, cfg)?;
    let net = summing_net(&f.group(), &kind)?;
    let input = SummationInput { element: f, tail_l1 };
    let records = run_summation(&input, &sigma, &net, radius, &cfg.config.solver)?;
    let converged = records.iter().all(|r| r.bracket.converged());
    let last = records.last().expect("schedules are nonempty");
    let name = command.name();
    Ok(Outcome {
        csv: convergence_csv(&records),
        summary: format!(
            "{name}: error in [{:.6e}, {:.6e}] at index {} ({} members, R = {radius})",
            last.error_lower(),
            last.error_upper(),
            last.index,
            records.len()
        ),
        report: json!({
            "command": name,
            "group": input.element.group(),
            "cocycle": sigma.descriptor(),
            "net": kind,
            "radius": radius,
            "tail_l1": tail_l1,
            "records": records.iter().map(|r| json!({
                "index": r.index,
                "error_lower": r.error_lower(),
                "error_upper": r.error_upper(),
                "tail_bound": r.tail_bound,
                "bracket": r.bracket,
            })).collect::<Vec<_>>(),
        }),
        converged,
    })
}

fn decay(cfg: &Loaded) -> Result<Outcome> {
    let group = cfg.config.group;
    let sigma = cfg.cocycle(None)?;
    let kappa = WeightFunction::new(&group, cfg.weight()?)?;
    let radius = cfg.radius()?;
    let s = &cfg.config.sampler;
    if s.count == 0 {
        return Err(Error::InvalidArgument("sampler.count must be positive".into()));
    }
    let samples = ElementSampler::new(&group, s.radius, s.max_terms, s.seed)?.take(s.count);
    let est = decay_constant_lower(&kappa, &sigma, &samples, radius, &cfg.config.solver)?;
    let mut csv = String::from("sample,terms,norm_lower,weighted_norm,ratio,converged\n");
    for (i, (d, f)) in est.samples.iter().zip(&samples).enumerate() {
        line(
            &mut csv,
            &[
                i.to_string(),
                f.len().to_string(),
                number(d.norm_lower),
                number(d.weighted_norm),
                number(d.ratio()),
                d.converged.to_string(),
            ],
        );
    }
    let converged = est.samples.iter().all(|d| d.converged);
    let worst = &samples[est.argmax];
    Ok(Outcome {
        csv,
        summary: format!("decay: constant ≥ {:.12} over {} samples at R = {radius}", est.lower, s.count),
        report: json!({
            "command": "decay",
            "group": group,
            "cocycle": sigma.descriptor(),
            "weight": kappa.descriptor(),
            "lower": est.lower,
            "argmax": est.argmax,
            "argmax_l2": worst.norm(&NormKind::L2),
            "radius": radius,
            "sampler": s,
            "solver": cfg.config.solver,
        }),
        converged,
    })
}

fn growth(cfg: &Loaded) -> Result<Outcome> {
    let group = cfg.config.group;
    let radius = cfg.radius()?;
    let opts = cfg.content_options();
    let mut csv = String::from("r,ball_size,sqrt_ball_size,content_lower,content_upper\n");
    let mut rows = Vec::new();
    for &r in cfg.radii()? {
        let b = enumerate(&group, Region::Ball(r))?;
        let est = content_lower(&group, b.elements(), radius, &opts)?;
        let size = b.len() as f64;
        line(
            &mut csv,
            &[index_number(r), b.len().to_string(), number(size.sqrt()), number(est.lower), number(est.upper)],
        );
        rows.push(json!({
            "r": r,
            "ball_size": b.len(),
            "content_lower": est.lower,
            "content_upper": est.upper,
            "rounds": est.rounds,
            "matvecs": est.matvecs,
        }));
    }
    Ok(Outcome {
        csv,
        summary: format!("growth: {} radii in {group}, content at R = {radius}", rows.len()),
        report: json!({
            "command": "growth",
            "group": group,
            "radius": radius,
            "options": opts,
            "rows": rows,
        }),
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_subcommand() {
        for name in [
            "ball",
            "validate-cocycle",
            "norm",
            "content",
            "pd-check",
            "nd-check",
            "schoenberg",
            "fejer",
            "abel",
            "gauss",
            "poly",
            "decay",
            "growth",
        ] {
            let cli = Cli::try_parse_from(["twf", name, "--config", "x.json"]).unwrap();
            assert_eq!(cli.command.name(), name);
        }
        assert!(Cli::try_parse_from(["twf", "norm"]).is_err());
    }

    #[test]
    fn unknown_config_fields_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"group": {"kind": "heisenberg"}, "radius": 2, "colour": 1}"#).unwrap();
        let code = run(["twf", "ball", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_CONFIG);
        std::fs::write(&path, r#"{"group": {"kind": "heisenberg"}, "radius": 2}"#).unwrap();
        let code = run(["twf", "ball", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        let csv = std::fs::read_to_string(dir.path().join("ball.csv")).unwrap();
        assert_eq!(csv.lines().next_back().unwrap().split(',').next_back().unwrap(), enumerate(&crate::groups::GroupDescriptor::heisenberg(), Region::Ball(2.0)).unwrap().len().to_string());
    }

    #[test]
    fn non_convergence_exit_code() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"group": {"kind": "free", "rank": 2}, "radius": 4,
                "element": {"terms": [{"word": "a", "re": 1, "im": 0}, {"word": "b", "re": 1, "im": 0}]},
                "solver": {"max_matvecs": 1, "tol": 1e-14, "method": "power_iteration"}}"#,
        )
        .unwrap();
        let code = run(["twf", "norm", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert_eq!(code, EXIT_NOT_CONVERGED);
    }
}
