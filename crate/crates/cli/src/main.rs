mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dplab::construction::{construct_initial_data, lemma32_lower_bound, BumpProfile, Geometry};
use dplab::experiments::report::{block_sups, write_norms_csv};
use dplab::experiments::step1::compute_e0_lower_bound;
use dplab::experiments::verify::{
    calibrations, check_picard_slope, check_transport, check_mform, verify_all, CheckResult,
};
use dplab::experiments::{inflation_experiment, inflation_monotone, run_single, NormReport};
use dplab::lp::dump::write_field;
use dplab::lp::{BesovParams, LPFilterBank};
use serde_json::json;

use config::{parse_terms, ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "dplab", version, about = "Norm-inflation experiments for the two-component DP system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the initial data and write field dumps with a sidecar.
    Construct(Overrides),
    /// Integrate one configuration and write norms.csv and report.json.
    Evolve(Overrides),
    /// Dyadic analysis of the initial data plus seeded calibrations.
    Analyze(Overrides),
    /// Run every n in `ns` and compare the inflation ratios.
    Sweep(Overrides),
    /// Run the acceptance checks; exit 0 iff all pass.
    Verify(Overrides),
}

/// Every flag overrides the config key of the same name.
#[derive(Args, Clone, Default)]
struct Overrides {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u32>,
    /// `reduced` or `paper`.
    #[arg(long)]
    geometry: Option<Geometry>,
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    /// `all`, `none` or `single:<l>`.
    #[arg(long, value_parser = parse_terms)]
    terms: Option<dplab::construction::Terms>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long)]
    max_band: Option<usize>,
    #[arg(long)]
    sharpness: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    dealias: Option<bool>,
    #[arg(long)]
    blowup_threshold: Option<f64>,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    coupling: Option<bool>,
    #[arg(long)]
    diagnostics: Option<bool>,
    /// Comma-separated n values for `sweep`.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<u32>>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    verbosity: Option<u8>,
    #[arg(long)]
    dump_fields: Option<bool>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = v.clone(); })*};
        }
        macro_rules! set_opt {
            ($($f:ident),*) => {$(if let Some(v) = &self.$f { c.$f = Some(v.clone()); })*};
        }
        set!(n, geometry, terms, max_band, sharpness, steps, dealias, blowup_threshold, cfl);
        set!(coupling, diagnostics, ns, out_dir, seed, verbosity, dump_fields);
        set_opt!(separation, amplitude, grid_points, dt, t_final, snapshot_times);
        Ok(c)
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<dplab::Error> for Failure {
    fn from(e: dplab::Error) -> Self {
        use dplab::Error as E;
        match e {
            E::InvalidGrid(_) | E::InvalidArgument(_) | E::Setup(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn write_json(path: &Path, value: &serde_json::Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

/// Creates the output directory and echoes the resolved config into it.
fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("config.toml"), cfg.to_toml())?;
    Ok(cfg.out_dir.clone())
}

fn say(cfg: &RunConfig, level: u8, msg: impl AsRef<str>) {
    if cfg.verbosity >= level {
        eprintln!("{}", msg.as_ref());
    }
}

fn construct(cfg: &RunConfig) -> Outcome {
    let spec = cfg.run_spec()?;
    let bump = BumpProfile::new();
    let data = construct_initial_data(&spec.params, &bump, spec.max_band)?;
    let bank = LPFilterBank::build(&data.layout.grid, spec.sharpness)?;
    let dir = out_dir(cfg)?;
    let mut files = write_field(&dir, "rho0", &data.rho0)?;
    files.extend(write_field(&dir, "u0", &data.u0)?);
    let g = data.layout.grid;
    let sidecar = json!({
        "config": cfg,
        "grid": {
            "num_points": g.num_points(),
            "half_length": g.half_length(),
            "carrier": g.carrier(),
            "max_band": g.max_band(),
        },
        "support": data.support,
        "norms": {
            "rho0_linf": data.rho0.linf(),
            "rho0_besov": bank.besov_norm(&data.rho0, &BesovParams::sup_l1(0.0), None)?,
            "u0_linf": data.u0.linf(),
        },
        "files": files,
    });
    write_json(&dir.join("construct.json"), &sidecar)?;
    say(cfg, 1, format!("wrote {} dumps and construct.json to {}", files.len(), dir.display()));
    Ok(())
}

fn evolve(cfg: &RunConfig) -> Outcome {
    let spec = cfg.run_spec()?;
    let bump = BumpProfile::new();
    say(cfg, 1, format!("evolving {} on {} steps", spec.run_id(), spec.solver.steps().0));
    let outcome = run_single(&spec, &bump)?;
    let dir = out_dir(cfg)?;
    write_norms_csv(&dir.join("norms.csv"), &[&outcome.report])?;
    if cfg.dump_fields {
        for (i, s) in outcome.snapshots.iter().enumerate() {
            write_field(&dir, &format!("u_snap{i}"), &s.u)?;
            write_field(&dir, &format!("rho_snap{i}"), &s.rho)?;
        }
    }
    let mut verdicts = vec![check_mform(&[&outcome]), check_picard_slope(&outcome)];
    if outcome.transport.is_some() {
        verdicts.push(check_transport(&outcome));
    }
    let manifest = json!({
        "config": cfg,
        "partial": !outcome.completed(),
        "verdicts": verdicts,
        "outcome": outcome,
    });
    write_json(&dir.join("report.json"), &manifest)?;
    for v in &verdicts {
        say(cfg, 2, v.to_string());
    }
    say(
        cfg,
        1,
        format!(
            "{}: inflation ratio {:.6e} at t = {:.6}",
            outcome.run_id,
            outcome.report.final_inflation_ratio(),
            outcome.report.records.last().map_or(0.0, |r| r.t)
        ),
    );
    match &outcome.failure {
        Some(f) => Err(Failure::Runtime(format!("run stopped early: {f}; outputs are partial"))),
        None => Ok(()),
    }
}

fn analyze(cfg: &RunConfig) -> Outcome {
    let spec = cfg.run_spec()?;
    let bump = BumpProfile::new();
    let data = construct_initial_data(&spec.params, &bump, spec.max_band)?;
    let bank = LPFilterBank::build(&data.layout.grid, spec.sharpness)?;
    let js = spec.params.index_set();
    let lemma = lemma32_lower_bound(&spec.params, &data, &bank)?;
    let e0 = compute_e0_lower_bound(&data.rho0, &bank, &js)?;
    let sq = data.rho0.product(&data.rho0)?;
    let cal = calibrations(cfg.seed)?;
    let dir = out_dir(cfg)?;
    let analysis = json!({
        "config": cfg,
        "index_set": js,
        "rho0_blocks": block_sups(&data.rho0, &bank)?,
        "rho0_sq_blocks": block_sups(&sq, &bank)?,
        "lemma": lemma,
        "e0": e0,
        "e0_ratio": if lemma.total > 0.0 { e0.value / lemma.total } else { 0.0 },
        "calibrations": cal,
    });
    write_json(&dir.join("analysis.json"), &analysis)?;
    say(
        cfg,
        1,
        format!(
            "n = {}: ||rho0^2||_B(N) / ln^2 n = {:.4e}, driving term {:.4e}",
            spec.params.n, lemma.total_over_log2, e0.value
        ),
    );
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Outcome {
    let sw = cfg.sweep()?;
    let bump = BumpProfile::new();
    say(cfg, 1, format!("sweeping n in {:?}", sw.ns));
    let (rows, outcomes) = inflation_experiment(&sw, &bump)?;
    let dir = out_dir(cfg)?;
    let reports: Vec<&NormReport> = outcomes.iter().flatten().map(|o| &o.report).collect();
    write_norms_csv(&dir.join("norms.csv"), &reports)?;
    let monotone = inflation_monotone(&rows);
    let runs: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|o| match o {
            Ok(o) => json!(o),
            Err(e) => json!({ "error": e.to_string() }),
        })
        .collect();
    write_json(
        &dir.join("report.json"),
        &json!({ "config": cfg, "rows": rows, "inflation_monotone": monotone, "runs": runs }),
    )?;
    for r in &rows {
        say(
            cfg,
            1,
            format!(
                "n = {:>2}: inflation {:.6e}, data norm {:.4e}, driving {:.4e}{}",
                r.n,
                r.inflation_ratio,
                r.data_norm,
                r.driving,
                r.failure.as_ref().map_or(String::new(), |f| format!(" [failed: {f}]"))
            ),
        );
    }
    if rows.iter().any(|r| r.failure.is_some()) {
        return Err(Failure::Runtime("some sweep rows failed".into()));
    }
    Ok(())
}

fn verify(cfg: &RunConfig) -> Outcome {
    let bump = BumpProfile::new();
    let checks: Vec<CheckResult> = verify_all(&bump)?;
    for c in &checks {
        println!("{c}");
    }
    let dir = out_dir(cfg)?;
    write_json(&dir.join("verify.json"), &json!({ "config": cfg, "checks": checks }))?;
    let failed: Vec<u8> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("failed criteria: {failed:?}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (ov, run): (&Overrides, fn(&RunConfig) -> Outcome) = match &cli.command {
        Command::Construct(o) => (o, construct),
        Command::Evolve(o) => (o, evolve),
        Command::Analyze(o) => (o, analyze),
        Command::Sweep(o) => (o, sweep),
        Command::Verify(o) => (o, verify),
    };
    let result = ov.resolve().map_err(Failure::from).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: invalid config: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
