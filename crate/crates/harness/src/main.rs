use clap::{Args, Parser, Subcommand};
use conecount::config::ExperimentKind;
use conecount::experiments::{self, constants};
use conecount::{ExperimentConfig, HarnessError, Report};
use conecount_core::lattice::{count_v, count_w, count_wo, PrimitiveMode};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "conecount", version, about = "Count integral points on quadric cones and compare with predicted constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; `.json` gives the full report, anything else CSV rows.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write runtime_ms = 0 so reports are byte-identical across runs.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by the config's `kind`.
    Run,
    /// One counting call at the largest B of the schedule.
    Count {
        #[arg(long, value_enum, default_value = "primitive")]
        mode: CountKind,
    },
    /// Predicted constants only.
    Predict,
    /// Obstruction table over the classes γΓ.
    Brauer,
    /// Exact identity suites.
    Verify,
    /// Class bias experiment.
    Bias,
    /// Leading-constant experiment for primitive points.
    Hlwo,
    /// Tamagawa experiment for 𝒩_V.
    Tamagawa,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum CountKind {
    All,
    Primitive,
    Moebius,
    V,
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let path = common.config.as_ref().ok_or_else(|| HarnessError::Config {
        field: "--config".into(),
        message: "a configuration file is required".into(),
    })?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn with_kind(mut cfg: ExperimentConfig, kind: ExperimentKind) -> ExperimentConfig {
    cfg.kind = kind;
    cfg
}

fn count(cfg: &ExperimentConfig, mode: CountKind) -> Result<Report, HarnessError> {
    let s = cfg.validate()?;
    let b = *cfg.b_schedule.last().expect("validated");
    let t = Instant::now();
    let (name, n) = match mode {
        CountKind::All => ("count-w", count_w(&s.form, &s.weight, b, &s.class)),
        CountKind::Primitive => ("count-wo", count_wo(&s.form, &s.weight, b, &s.class, PrimitiveMode::Direct)?),
        CountKind::Moebius => ("count-wo-moebius", count_wo(&s.form, &s.weight, b, &s.class, PrimitiveMode::Moebius)?),
        CountKind::V => ("count-v", count_v(&s.form, &s.weight, b, &s.class)?),
    };
    let mut report = Report::new(name);
    let g = s.class.gamma();
    report.rows.push(conecount::report::Row {
        experiment: name.into(),
        b,
        l: cfg.l,
        gamma: format!("{} {} {} {}", g[0], g[1], g[2], g[3]),
        psi: 1,
        empirical: n.weighted_sum,
        predicted: 0.0,
        ratio: n.weighted_sum.abs(),
        xi: None,
        runtime_ms: t.elapsed().as_millis() as u64,
    });
    report.constants.insert("raw_count".into(), n.raw_count as f64);
    Ok(report)
}

fn execute(cli: &Cli) -> Result<Report, HarnessError> {
    let c = &cli.common;
    match &cli.command {
        Command::Verify => Ok(experiments::identities_report(c.seed.unwrap_or(0))),
        Command::Run => experiments::run_experiment(&load(c)?),
        Command::Count { mode } => count(&load(c)?, *mode),
        Command::Predict => {
            let cfg = load(c)?;
            let s = cfg.validate()?;
            let k = constants(&cfg, &s)?;
            let mut r = Report::new("predict");
            r.constants = k.map;
            r.warnings = k.warnings;
            Ok(r)
        }
        Command::Brauer => experiments::run_experiment(&with_kind(load(c)?, ExperimentKind::ObstructionScan)),
        Command::Bias => experiments::run_experiment(&with_kind(load(c)?, ExperimentKind::Bias)),
        Command::Hlwo => experiments::run_experiment(&with_kind(load(c)?, ExperimentKind::Hlwo)),
        Command::Tamagawa => experiments::run_experiment(&with_kind(load(c)?, ExperimentKind::Tamagawa)),
    }
}

fn emit(report: &Report, out: Option<&PathBuf>) -> Result<(), HarnessError> {
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            std::fs::write(path, report.to_json() + "\n")?;
        }
        Some(path) => report.write_csv(std::fs::File::create(path)?)?,
        None => report.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = execute(&cli).and_then(|mut report| {
        if cli.common.deterministic {
            report.clear_runtimes();
        }
        emit(&report, cli.common.out.as_ref())?;
        eprint!("{}", report.summary());
        Ok(report.passed())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
