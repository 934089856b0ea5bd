use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qd_cli::{run, validate_report, CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qd", version, about = "Quasi-degradation probability sweeps for two-user NOMA over MISO Rician channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an experiment and write CSV (and SVG) output.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Skip the SVG plot.
        #[arg(long)]
        no_plots: bool,
    },
    /// Print the resolved configuration and any warnings.
    Validate {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// fig2, fig3, fig4, fig5, fig6, fig7 or custom.
    experiment: String,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set k_db=0:10:2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo samples per sweep point.
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let exp: Experiment = self.experiment.parse()?;
        let mut cfg = ExperimentConfig::preset(exp);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            cfg.apply_file(&text)?;
        }
        for pair in &self.set {
            cfg.set_pair(pair)?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.samples {
            cfg.samples = n;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, out, no_plots } => common.resolve().and_then(|mut cfg| {
            if no_plots {
                cfg.plots = false;
            }
            let o = run(&cfg, &out)?;
            println!("wrote {} ({} rows)", o.csv_path.display(), o.table.rows.len());
            if let Some(p) = o.svg_path {
                println!("wrote {}", p.display());
            }
            Ok(())
        }),
        Command::Validate { common } => common.resolve().map(|cfg| {
            let (report, _) = validate_report(&cfg);
            print!("{report}");
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
