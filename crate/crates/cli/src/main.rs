use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use bkic::harness::{self, Command, ConfigMap, ExperimentConfig, Table};
use clap::{Args, Parser, Subcommand};

/// Known-interference cancellation experiments.
#[derive(Parser, Debug)]
#[command(name = "bkic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Rates against target power (1 to 30 dB, Pz = Px, T = 100).
    Fig3(Common),
    /// Rates against block length (Px = Pz = 20 dB).
    Fig4(Common),
    /// Single-point Monte Carlo run with analytic columns alongside.
    Simulate(Common),
    /// Analytic rates at one operating point.
    Rates(Common),
    /// Runs the invariant and equivalence suites; exits 1 on any failure.
    Validate(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat key = value file; keys are the long flag names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    px_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pz_db: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long)]
    packet_len: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["psk4", "psk8", "gauss", "qam16"])]
    zmod: Option<String>,
    #[arg(long, value_parser = ["block", "continuous"])]
    fading: Option<String>,
    #[arg(long)]
    delta_var: Option<f64>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_parser = ["2", "e"])]
    log_base: Option<String>,
    /// Comma-separated columns, e.g. r_t,r_bkic,c_u,mc_traditional_sinr.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_to: Option<f64>,
    #[arg(long)]
    sweep_step: Option<f64>,
    /// Comma-separated block lengths for fig4.
    #[arg(long)]
    block_lens: Option<String>,
    /// Comma-separated validation suites.
    #[arg(long)]
    suites: Option<String>,
}

impl Common {
    fn overrides(&self) -> ConfigMap {
        let mut m = ConfigMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("px-db", self.px_db.map(|v| v.to_string()));
        put("pz-db", self.pz_db.map(|v| v.to_string()));
        put("sigma2", self.sigma2.map(|v| v.to_string()));
        put("block-len", self.block_len.map(|v| v.to_string()));
        put("packet-len", self.packet_len.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("zmod", self.zmod.clone());
        put("fading", self.fading.clone());
        put("delta-var", self.delta_var.map(|v| v.to_string()));
        put("out", self.out.clone());
        put("log-base", self.log_base.clone());
        put("schemes", self.schemes.clone());
        put("sweep-from", self.sweep_from.map(|v| v.to_string()));
        put("sweep-to", self.sweep_to.map(|v| v.to_string()));
        put("sweep-step", self.sweep_step.map(|v| v.to_string()));
        put("block-lens", self.block_lens.clone());
        put("suites", self.suites.clone());
        m
    }
}

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn resolve(command: Command, args: &Common) -> anyhow::Result<ExperimentConfig> {
    let mut map = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            harness::parse_config_text(&text)?
        }
        None => ConfigMap::new(),
    };
    map.extend(args.overrides());
    Ok(ExperimentConfig::resolve(command, &map)?)
}

fn emit(table: &Table, out: Option<&str>) -> anyhow::Result<()> {
    let text = table.render();
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}")),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Returns whether every check passed.
fn run(cfg: &ExperimentConfig) -> anyhow::Result<bool> {
    if cfg.command == Command::Validate {
        let checks = harness::run_validation(&cfg.suites, cfg.trials, cfg.seed)?;
        let table = harness::report_table(&checks, cfg.comment_lines());
        emit(&table, cfg.out.as_deref())?;
        if cfg.out.is_some() {
            for c in &checks {
                println!("{} {} {}", if c.pass { "PASS" } else { "FAIL" }, c.name, harness::format_number(c.metric));
            }
        }
        return Ok(checks.iter().all(|c| c.pass));
    }
    emit(&harness::run_table(cfg)?, cfg.out.as_deref())?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        Sub::Fig3(a) => (Command::Fig3, a),
        Sub::Fig4(a) => (Command::Fig4, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Rates(a) => (Command::Rates, a),
        Sub::Validate(a) => (Command::Validate, a),
    };
    let cfg = match resolve(command, args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("validation failed");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
