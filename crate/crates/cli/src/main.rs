use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use voltrack::data::DateWindow;

mod commands;
mod error;
mod output;
mod params;

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "voltrack", version, about = "Track a volatility index with its futures")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Directory holding spot.csv, futures.csv, rates.csv, expiries.csv and optionally etn.csv.
    #[arg(long)]
    pub data_dir: PathBuf,

    /// Inclusive date range START..END.
    #[arg(long)]
    pub window: Option<DateWindow>,

    /// Load even if more than 5% of days are incomplete.
    #[arg(long)]
    pub allow_drops: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Price,
    Return,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit (mu, theta, sigma) by maximum likelihood and (mu~, theta~) to the futures curve.
    Calibrate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit static sum-to-one futures portfolios for each contract subset.
    BacktestStatic {
        #[command(flatten)]
        data: DataArgs,
        /// First out-of-sample date.
        #[arg(long, default_value = "2016-01-01")]
        split: String,
        /// Subsets of maturity ranks, e.g. "1;1,2;6,7". Defaults to all subsets of {1,2,6,7}.
        #[arg(long)]
        subsets: Option<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the dynamic tracker and the linear-roll replica over loaded data.
    BacktestDynamic {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Tradable ranks i1,i2 of the two contracts.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [1, 2])]
        contracts: Vec<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Simulate the index and compare the dynamic tracker with the linear roll.
    Simulate {
        #[arg(long)]
        params: PathBuf,
        /// TOML file with s0, cycles, seed, beta, contracts, r, days_per_month, sigma.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cycles: Option<usize>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, value_delimiter = ',', num_args = 2)]
        contracts: Option<Vec<usize>>,
        /// Initial index levels; defaults to theta, theta/3 and 3 theta.
        #[arg(long, value_delimiter = ',')]
        s0: Option<Vec<f64>>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Regress rolled-futures returns on index returns by horizon and rank.
    Regress {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 5, 10, 15, 20, 30])]
        horizons: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5, 6, 7])]
        ranks: Vec<usize>,
        /// Longest horizon of the intercept curves.
        #[arg(long, default_value_t = 30)]
        max_horizon: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Write a model-generated data set in the input format.
    Synth {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 1510)]
        days: usize,
        #[arg(long, default_value = "2011-01-03")]
        start: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overnight rate in percent.
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        /// Trading days between expiries.
        #[arg(long, default_value_t = 21)]
        cycle_length: usize,
        /// Initial index level; defaults to theta.
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let exec = if cli.sequential {
        voltrack::Exec::Sequential
    } else {
        voltrack::Exec::Parallel
    };
    match cli.command {
        Command::Calibrate { data, seed, out_dir } => commands::calibrate(&data, seed, &out_dir, exec),
        Command::BacktestStatic {
            data,
            split,
            subsets,
            mode,
            out_dir,
        } => commands::backtest_static(&data, &split, subsets.as_deref(), mode, &out_dir, exec),
        Command::BacktestDynamic {
            data,
            params,
            beta,
            contracts,
            out_dir,
        } => commands::backtest_dynamic(&data, &params, beta, &contracts, &out_dir),
        Command::Simulate {
            params,
            scenario,
            seed,
            cycles,
            beta,
            contracts,
            s0,
            out_dir,
        } => commands::simulate(
            &params,
            scenario.as_deref(),
            commands::SimulateOverrides {
                seed,
                cycles,
                beta,
                contracts,
                s0,
            },
            &out_dir,
            exec,
        ),
        Command::Regress {
            data,
            horizons,
            ranks,
            max_horizon,
            out_dir,
        } => commands::regress(&data, &horizons, &ranks, max_horizon, &out_dir),
        Command::Synth {
            params,
            days,
            start,
            seed,
            rate,
            cycle_length,
            s0,
            out_dir,
        } => commands::synth(&params, days, &start, seed, rate, cycle_length, s0, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    let started = std::time::Instant::now();
    match run(cli) {
        Ok(()) => {
            log::info!("finished in {:.3} s", started.elapsed().as_secs_f64());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
