use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plcp_radar_cli::commands::{self, CliError, Context, Overrides};
use plcp_radar_cli::config::{ConventionSelection, EngineSelection};
use plcp_radar_cli::figures::Panel;

const UNITS: &str = "\
Config keys (TOML, all optional):
  p_dbm [dBm]  sigma_dbsm [dBsm]  alpha [-]  gt_dbi, gr_dbi [dBi]  fc_ghz [GHz]
  nd_dbm_per_hz [dBm/Hz]  w_khz [kHz]  beta_db [dB]
  lambda_l_per_m2 [1/m^2]  lambda_p_per_m [1/m]  omega_b_deg [deg, half beamwidth]  r_m [m]
  engine = analytic|mc|both  convention = campbell|paper
  rel_tol, abs_tol, max_subdivisions  r_max_m [m]  line_half_window_m [m]
  trials  seed  confidence  orientation = facing-ego|random-two-way  same_street
  sweep_axis = omega_b_deg|lambda_p|lambda_l|r_m|beta_db  sweep_values  omega_grid_deg [deg]

CSV columns: grid_value in the units of grid_axis; p_d [-]; l_avg [m]; n_r, n_d [-];
std_err [-] (MC standard error, analytic quadrature error); trials [-].

Exit codes: 0 ok, 1 i/o, 2 config or usage, 3 numerical failure, 4 validation failure.";

#[derive(Debug, Parser)]
#[command(name = "plcp-radar", version, about = "Radar interference on random street networks", after_help = UNITS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario TOML file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for Monte Carlo runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// analytic, mc or both.
    #[arg(long, global = true, value_parser = parse_engine)]
    engine: Option<EngineSelection>,
    /// Mean-length convention: campbell or paper.
    #[arg(long, global = true, value_parser = parse_convention)]
    convention: Option<ConventionSelection>,
    #[arg(long, global = true, hide = true)]
    corrupt_beta_prime: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic p_D, mean in-sector length and n_D at one operating point.
    Analytic,
    /// Monte Carlo p_D with a confidence interval at one operating point.
    Simulate,
    /// Evaluate one axis over a grid.
    Sweep {
        /// omega_b_deg, lambda_p, lambda_l, r_m or beta_db.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Option<Vec<f64>>,
    },
    /// Grid search for the half beamwidth maximizing n_D.
    Optimize,
    /// Cross-check both engines on a built-in grid.
    Validate,
    /// Regenerate figure panels (CSV + SVG).
    Figures {
        /// all, fig6, fig6a, fig6b, fig6c, fig7, fig7a, fig7b, fig8. Repeatable.
        #[arg(long = "panel", default_value = "all")]
        panels: Vec<String>,
    },
}

fn parse_engine(s: &str) -> Result<EngineSelection, String> {
    match s {
        "analytic" => Ok(EngineSelection::Analytic),
        "mc" => Ok(EngineSelection::Mc),
        "both" => Ok(EngineSelection::Both),
        _ => Err(format!("expected analytic, mc or both, got `{s}`")),
    }
}

fn parse_convention(s: &str) -> Result<ConventionSelection, String> {
    match s {
        "campbell" => Ok(ConventionSelection::Campbell),
        "paper" => Ok(ConventionSelection::Paper),
        _ => Err(format!("expected campbell or paper, got `{s}`")),
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let (axis, values) = match &cli.command {
        Command::Sweep { axis, values } => (axis.clone(), values.clone()),
        _ => (None, None),
    };
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        engine: cli.engine,
        convention: cli.convention,
        sweep_axis: axis,
        sweep_values: values,
    };
    let config = commands::load_config(cli.config.as_deref(), &overrides)?;
    let mut ctx = Context::new(config, cli.out);
    ctx.corrupt_beta_prime = cli.corrupt_beta_prime;
    let report = match cli.command {
        Command::Analytic => commands::analytic(&ctx)?,
        Command::Simulate => commands::simulate(&ctx)?,
        Command::Sweep { .. } => commands::sweep(&ctx)?,
        Command::Optimize => commands::optimize(&ctx)?,
        Command::Validate => commands::validate(&ctx)?,
        Command::Figures { panels } => {
            let mut selected = Vec::new();
            for p in &panels {
                for panel in Panel::select(p).map_err(CliError::Usage)? {
                    if !selected.contains(&panel) {
                        selected.push(panel);
                    }
                }
            }
            commands::figures_cmd(&ctx, &selected)?
        }
    };
    Ok(report.text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
