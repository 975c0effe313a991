use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spinboson::config::RunConfig;
use spinboson::driver::{self, SweepParameter};
use spinboson::state::InitialCondition;
use spinboson::{table, Error, Result};

/// Davydov-D1 dynamics of the sub-Ohmic spin-boson model.
#[derive(Parser)]
#[command(name = "spinboson", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write its table and `.meta` sidecar.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Run one trajectory per value of a parameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// alpha, s or delta
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        values: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run the factorized and polarized variants of one config side by side.
    Compare {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Compare against exact Fock-space propagation on a small bath.
    OracleCheck {
        #[command(flatten)]
        config: ConfigArgs,
        /// Per-mode occupation cutoff.
        #[arg(long, default_value_t = 24)]
        n_max: usize,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` file, applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the 20000-mode profile.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    omega_c: Option<String>,
    #[arg(long)]
    n_modes: Option<String>,
    #[arg(long)]
    omega_max: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// factorized or polarized
    #[arg(long)]
    initial_condition: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    record_every: Option<String>,
    #[arg(long)]
    epsilon_amp: Option<String>,
    #[arg(long)]
    norm_tolerance: Option<String>,
    /// Compute the relative deviation σ(t).
    #[arg(long)]
    sigma: bool,
    /// full or running
    #[arg(long)]
    bath_average: Option<String>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = if self.full_scale {
            RunConfig::full_scale()
        } else {
            RunConfig::default()
        };
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let flags = [
            ("s", &self.s),
            ("alpha", &self.alpha),
            ("omega_c", &self.omega_c),
            ("n_modes", &self.n_modes),
            ("omega_max", &self.omega_max),
            ("delta", &self.delta),
            ("initial_condition", &self.initial_condition),
            ("dt", &self.dt),
            ("t_max", &self.t_max),
            ("record_every", &self.record_every),
            ("epsilon_amp", &self.epsilon_amp),
            ("norm_tolerance", &self.norm_tolerance),
            ("bath_average", &self.bath_average),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.sigma {
            cfg.compute_sigma = true;
        }
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }
}

fn parse_values(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| Error::Config(format!("bad sweep value `{v}`"))))
        .collect()
}

fn write_file(path: &PathBuf, body: &str, force: bool) -> Result<()> {
    let mut f = table::create(path, force)?;
    f.write_all(body.as_bytes()).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<()> {
    driver::configure_threads_from_env()?;
    match cli.command {
        Command::Run { config, output, force } => {
            let mut cfg = config.build()?;
            if output.is_some() {
                cfg.output_path = output;
            }
            let out = driver::run(&cfg, force)?;
            for w in &out.trajectory.warnings {
                eprintln!("warning: {w}");
            }
            let class = out.classification().map_or("unclassified", |c| c.as_str());
            println!(
                "wrote {} ({} records, {class}, steady p_z {:.6}, {:.2} s)",
                cfg.output_path.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
                out.trajectory.records.len(),
                out.steady_p_z(),
                out.wall_time
            );
        }
        Command::Sweep { config, param, values, out_dir, force } => {
            let cfg = config.build()?;
            let parameter: SweepParameter = param.parse()?;
            let values = parse_values(&values)?;
            let summary = driver::sweep(&cfg, parameter, &values, Some(&out_dir), force)?;
            let failed = summary.rows.iter().filter(|r| r.result.is_err()).count();
            for row in summary.rows.iter().filter(|r| r.result.is_err()) {
                eprintln!("{} = {}: {}", parameter.as_str(), row.value, row.result.as_ref().unwrap_err());
            }
            println!(
                "wrote {} ({} points, {failed} failed)",
                out_dir.join("summary.csv").display(),
                summary.rows.len()
            );
        }
        Command::Compare { config, output, force } => {
            let mut fac = config.build()?;
            fac.output_path = None;
            fac.initial_condition = InitialCondition::Factorized;
            let pol = RunConfig {
                initial_condition: InitialCondition::Polarized,
                ..fac.clone()
            };
            if output.exists() && !force {
                return Err(Error::WouldOverwrite(output.display().to_string()));
            }
            let cmp = driver::compare_initial_conditions(&fac, &pol)?;
            write_file(&output, &cmp.render(), force)?;
            println!(
                "wrote {} (max |dP_z| {:.6}, integrated {:.6}, steady p_z {:.6} vs {:.6})",
                output.display(),
                cmp.max_abs_difference,
                cmp.integrated_abs_difference,
                cmp.factorized.steady_p_z(),
                cmp.polarized.steady_p_z()
            );
        }
        Command::OracleCheck { config, n_max } => {
            let cfg = config.build()?;
            let r = driver::oracle_check(&cfg, n_max)?;
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            println!("modes = {}", r.n_modes);
            println!("n_max = {}", r.n_max);
            println!("dim = {}", r.dim);
            println!("samples = {}", r.samples);
            println!("max_p_z_difference = {:e}", r.max_p_z_difference);
            println!("max_deviation_mismatch = {:e}", r.max_deviation_mismatch);
            println!("truncation_defect = {:e}", r.truncation_defect);
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        e if e.is_numerical() => 3,
        Error::Io { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
