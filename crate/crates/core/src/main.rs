use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use squeezed_pairs::bb84::AttackModel;
use squeezed_pairs::commands::{self, CommandOutput};
use squeezed_pairs::config::RunConfig;
use squeezed_pairs::Result;

/// Entangled photon pairs from a chi(2) photonic crystal: photon statistics,
/// band structure, source tuning and BB84 sessions.
///
/// Exit codes: 0 success, 2 invalid input or config, 3 truncation failure,
/// 4 numerical degeneracy, 1 I/O error or failed selftest.
#[derive(Parser, Debug)]
#[command(name = "squeezed-pairs", version)]
struct Cli {
    /// TOML config; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default from config: ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Joint photon-number distribution (joint.csv) and heralded statistics (dist.json).
    Dist {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        trunc: TruncArgs,
        /// Also compare against the matrix-exponential oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// P(1,1), P1 and P(1) against r (sweep.csv) with refined maxima (sweep.json).
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        r_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        r_max: Option<f64>,
        /// Grid intervals; the CSV has steps + 1 rows.
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        trunc: TruncArgs,
    },
    /// Band diagram (bands.csv), edges, tuning and squeeze report (bands.json).
    Bands {
        #[arg(long)]
        n_bands: Option<usize>,
        #[arg(long)]
        n_k: Option<usize>,
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Signal tuning for a target group velocity (tune.json).
    Tune {
        #[command(flatten)]
        tuning: TuningArgs,
    },
    /// Monte Carlo BB84 session (bb84.json).
    Bb84 {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        n_pulses: Option<u64>,
        #[arg(long, value_enum)]
        attack: Option<AttackArg>,
        /// Fraction of each photon Eve diverts.
        #[arg(long, allow_negative_numbers = true)]
        ratio: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        z_threshold: Option<f64>,
    },
    /// Runs the acceptance suite and prints one line per criterion.
    Selftest,
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Squeeze magnitude.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
}

#[derive(Args, Debug)]
struct TruncArgs {
    /// Fixed Fock cutoff; disables automatic raising.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    tail_tolerance: Option<f64>,
}

#[derive(Args, Debug)]
struct TuningArgs {
    /// Signal band (1 is the band starting at omega = 0).
    #[arg(long)]
    band: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    target_vg_over_c: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackArg {
    None,
    BeamSplitter,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl InputArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.input.alpha, self.alpha);
        set(&mut c.input.r, self.r);
    }
}

impl TruncArgs {
    fn apply(self, c: &mut RunConfig) {
        if let Some(n) = self.n_max {
            c.truncation.n_max = n;
            c.truncation.auto = false;
        }
        set(&mut c.truncation.tail_tolerance, self.tail_tolerance);
    }
}

impl TuningArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.bands.signal_band, self.band);
        set(&mut c.bands.target_vg_over_c, self.target_vg_over_c);
    }
}

fn emit(output: CommandOutput, config: &RunConfig) -> Result<()> {
    for path in output.write_to(&config.output.dir)? {
        eprintln!("wrote {}", path.display());
    }
    print!("{}", output.summary);
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut config.output.dir, cli.out);
    set(&mut config.seed, cli.seed);
    match cli.command {
        Command::Dist {
            input,
            trunc,
            oracle,
        } => {
            input.apply(&mut config);
            trunc.apply(&mut config);
            config.validate()?;
            emit(commands::dist(&config, oracle)?, &config)?;
        }
        Command::Sweep {
            alpha,
            r_min,
            r_max,
            steps,
            trunc,
        } => {
            set(&mut config.sweep.alpha, alpha);
            set(&mut config.sweep.r_min, r_min);
            set(&mut config.sweep.r_max, r_max);
            set(&mut config.sweep.steps, steps);
            trunc.apply(&mut config);
            config.validate()?;
            emit(commands::sweep(&config)?, &config)?;
        }
        Command::Bands {
            n_bands,
            n_k,
            tuning,
        } => {
            set(&mut config.bands.n_bands, n_bands);
            set(&mut config.bands.n_k, n_k);
            tuning.apply(&mut config);
            config.validate()?;
            emit(commands::bands(&config)?, &config)?;
        }
        Command::Tune { tuning } => {
            tuning.apply(&mut config);
            config.validate()?;
            emit(commands::tune(&config)?, &config)?;
        }
        Command::Bb84 {
            input,
            n_pulses,
            attack,
            ratio,
            z_threshold,
        } => {
            input.apply(&mut config);
            set(&mut config.bb84.n_pulses, n_pulses);
            set(&mut config.bb84.z_threshold, z_threshold);
            match attack {
                Some(AttackArg::None) => config.bb84.attack = AttackModel::none(),
                Some(AttackArg::BeamSplitter) => {
                    config.bb84.attack = AttackModel::beam_splitter(ratio.unwrap_or(0.5))?
                }
                None => set(&mut config.bb84.attack.splitting_ratio, ratio),
            }
            config.validate()?;
            emit(commands::bb84_output(&config)?, &config)?;
        }
        Command::Selftest => {
            let (results, table) = commands::selftest();
            print!("{table}");
            if !results.iter().all(|r| r.passed()) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
