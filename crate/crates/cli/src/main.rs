use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use hetdetect_core::harness::{
    read_sample_csv, run, simulate_table, to_json, write_file, ExperimentConfig, ExperimentKind, ExperimentOutput,
    LowerboundSpec, RunOptions,
};
use hetdetect_core::lowerbound::Construction;
use hetdetect_core::statistics::{BandwidthRule, StatisticId, StatisticSpec};
use hetdetect_core::testing::{calibrate, decide, default_null_scenarios, CalibratedTest, Setting};
use hetdetect_core::{Error, Result};

#[derive(Parser)]
#[command(name = "hetdetect", version, about = "Heteroskedasticity tests and Monte Carlo experiments")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for CSV/JSON files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample of the config scenario (CSV: index,x,y).
    Simulate {
        #[arg(long)]
        n: Option<usize>,
    },
    /// Evaluate a statistic on a sample CSV and print the report as JSON.
    Stat {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        stat: StatArgs,
    },
    /// Calibrate a threshold by Monte Carlo over the null scenarios.
    Calibrate {
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        stat: StatArgs,
    },
    /// Apply a calibrated test (JSON) to a sample CSV.
    Test {
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// MSE of the statistic against its proxy over the grid, with a log-log slope.
    MseRate {
        /// Also write the per-replicate log.
        #[arg(long)]
        log_replicates: bool,
    },
    /// Empirical power along a scaled variance shape.
    PowerCurve,
    /// Held-out Type I error of calibrated tests.
    Type1,
    /// Null behaviour of the kernel statistic and the baselines on shared samples.
    BaselineCompare,
    /// Marginal gaps, χ² and risk floors of lower-bound constructions.
    LowerboundCheck {
        /// Construction kind, e.g. spiky-two-point (ignored with --config).
        #[arg(long)]
        construction: Option<String>,
        /// Construction parameter as key=value (repeatable).
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2001)]
        num_quadrature: usize,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
    },
}

#[derive(Args)]
struct StatArgs {
    /// Statistic id; defaults to the config's statistic or the setting's default.
    #[arg(long)]
    statistic: Option<String>,
    /// Fixed bandwidth.
    #[arg(long)]
    h: Option<f64>,
    /// Smoothness for the optimal bandwidth.
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    c_h: Option<f64>,
    #[arg(long)]
    setting: Option<String>,
}

enum Outcome {
    Ok,
    ExpectationFailed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ExpectationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let mut table: toml::Table = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            // Sample-level subcommands accept any experiment config for its scenario.
            table.entry("experiment").or_insert_with(|| kind.name().into());
            ExperimentConfig::from_toml(&toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?)?
        }
        None => ExperimentConfig::new(kind),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn experiment_config(cli: &Cli, kind: ExperimentKind) -> Result<ExperimentConfig> {
    let cfg = load_config(cli, kind)?;
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config is for '{}' but the subcommand runs '{}'",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    Ok(cfg)
}

fn statistic_spec(args: &StatArgs, cfg: &ExperimentConfig, n: usize) -> Result<StatisticSpec> {
    let setting = match &args.setting {
        Some(s) => Setting::parse(s)?,
        None => cfg.setting,
    };
    let beta = args.beta.or(cfg.beta);
    let c_h = args.c_h.or(cfg.c_h);
    let mut spec = match (&args.statistic, &cfg.statistic) {
        (Some(id), _) => {
            let id = StatisticId::parse(id)?;
            let mut s = StatisticSpec::new(id);
            if id.uses_bandwidth() && args.h.is_none() {
                let beta = beta.ok_or_else(|| Error::Config(format!("{id} needs --h or --beta")))?;
                s = s.with_bandwidth(match id {
                    StatisticId::Dette2002 => BandwidthRule::Undersmoothed { beta },
                    _ => match c_h {
                        Some(c_h) => BandwidthRule::Optimal { beta, c_h },
                        None => hetdetect_core::testing::default_statistic(Setting::L2, Some(beta), None, &[n])?
                            .bandwidth
                            .expect("l2 statistic has a bandwidth"),
                    },
                });
            }
            s
        }
        (None, Some(s)) => s.clone(),
        (None, None) => hetdetect_core::testing::default_statistic(setting, beta, c_h, &[n])?,
    };
    if let Some(h) = args.h {
        spec = spec.with_bandwidth(BandwidthRule::Fixed { h });
    }
    Ok(spec)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("results"))
}

fn read_sample(path: &Path) -> Result<Vec<f64>> {
    read_sample_csv(&fs::read_to_string(path)?)
}

fn emit_experiment(cli: &Cli, cfg: &ExperimentConfig, out: &ExperimentOutput) -> Result<Outcome> {
    let dir = out_dir(cli);
    let name = cfg.experiment.name();
    let csv = cfg.output.csv.clone().unwrap_or_else(|| format!("{name}.csv"));
    let json_name = cfg.output.json.clone().unwrap_or_else(|| format!("{name}.json"));
    write_file(&dir, &csv, &out.table.render())?;
    if let Some(log) = &out.replicate_log {
        write_file(&dir, &format!("{name}_replicates.csv"), &log.render())?;
    }
    let summary = to_json(&out.summary)?;
    write_file(&dir, &json_name, &summary)?;
    println!("{summary}");
    for e in &out.expectations {
        eprintln!("{} {}: {}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.detail);
    }
    Ok(if out.all_passed() { Outcome::Ok } else { Outcome::ExpectationFailed })
}

fn parse_construction(kind: &str, params: &[String]) -> Result<Construction> {
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::String(kind.into()));
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("parameter '{p}' is not key=value")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("parameter '{p}' is not numeric")))?;
        let value = if k == "q" { json!(v as u32) } else { json!(v) };
        obj.insert(k.trim().into(), value);
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| Error::Parse(format!("bad construction: {e}")))
}

fn execute(cli: Cli) -> Result<Outcome> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Simulate { n } => {
            let cfg = load_config(&cli, ExperimentKind::MseRate)?;
            let n = n.unwrap_or(cfg.n_grid[0]);
            let table = simulate_table(&cfg, n)?;
            match &cli.out {
                Some(dir) => {
                    write_file(dir, "sample.csv", &table.render())?;
                }
                None => print!("{}", table.render()),
            }
        }
        Command::Stat { input, stat } => {
            let cfg = load_config(&cli, ExperimentKind::MseRate)?;
            let y = read_sample(input)?;
            let n = y.len().saturating_sub(1);
            let report = statistic_spec(stat, &cfg, n)?.prepare(n)?.report(&y)?;
            println!("{}", to_json(&report)?);
        }
        Command::Calibrate { n, stat } => {
            let cfg = load_config(&cli, ExperimentKind::Type1)?;
            let n = n.unwrap_or(cfg.n_grid[0]);
            let spec = statistic_spec(stat, &cfg, n)?;
            let nulls = match &cfg.null_scenarios {
                Some(list) => list.iter().map(|s| s.model(n)).collect::<Result<Vec<_>>>()?,
                None => default_null_scenarios(n, cfg.alpha, cfg.hoelder_m, cfg.scenario.noise.clone())?,
            };
            let test = calibrate(&spec, cfg.setting, cfg.eta, &nulls, cfg.calibration_replicates, cfg.seed)?;
            let text = to_json(&test)?;
            if let Some(dir) = &cli.out {
                write_file(dir, "calibration.json", &text)?;
            }
            println!("{text}");
        }
        Command::Test { calibration, input } => {
            let test: CalibratedTest = serde_json::from_str(&fs::read_to_string(calibration)?)
                .map_err(|e| Error::Parse(format!("bad calibration file: {e}")))?;
            let y = read_sample(input)?;
            if y.len() != test.n + 1 {
                return Err(Error::Parse(format!(
                    "sample has {} points but the test was calibrated at n = {}",
                    y.len(),
                    test.n
                )));
            }
            println!("{}", to_json(&decide(&test, &y)?)?);
        }
        Command::MseRate { log_replicates } => {
            let cfg = experiment_config(&cli, ExperimentKind::MseRate)?;
            let out = run(&cfg, &RunOptions { log_replicates: *log_replicates })?;
            return emit_experiment(&cli, &cfg, &out);
        }
        Command::PowerCurve => {
            let cfg = experiment_config(&cli, ExperimentKind::PowerCurve)?;
            return emit_experiment(&cli, &cfg, &run(&cfg, &RunOptions::default())?);
        }
        Command::Type1 => {
            let cfg = experiment_config(&cli, ExperimentKind::Type1)?;
            return emit_experiment(&cli, &cfg, &run(&cfg, &RunOptions::default())?);
        }
        Command::BaselineCompare => {
            let cfg = experiment_config(&cli, ExperimentKind::BaselineCompare)?;
            return emit_experiment(&cli, &cfg, &run(&cfg, &RunOptions::default())?);
        }
        Command::LowerboundCheck { construction, params, n, num_quadrature, replicates } => {
            if cli.config.is_some() {
                let cfg = experiment_config(&cli, ExperimentKind::Lowerbound)?;
                return emit_experiment(&cli, &cfg, &run(&cfg, &RunOptions::default())?);
            }
            let kind = construction
                .as_deref()
                .ok_or_else(|| Error::Config("lowerbound-check needs --construction or --config".into()))?;
            let mut cfg = ExperimentConfig::new(ExperimentKind::Lowerbound);
            cfg.n_grid = vec![n.unwrap_or(256)];
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            cfg.lowerbound = Some(LowerboundSpec {
                constructions: vec![parse_construction(kind, params)?],
                num_quadrature: *num_quadrature,
                risk_replicates: *replicates,
            });
            return emit_experiment(&cli, &cfg, &run(&cfg, &RunOptions::default())?);
        }
    }
    Ok(Outcome::Ok)
}
