mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wronski_core::numcore::Tolerances;

use commands::{CliError, Outcome};

#[derive(Parser, Debug)]
#[command(name = "wronski", version, about = "Nets, labelings and real solutions of the Wronski problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for random instances and solver start systems.
    #[arg(long, global = true, env = "WRONSKI_SEED", default_value_t = 0)]
    seed: u64,

    /// Print the full JSON record instead of a summary.
    #[arg(long, global = true)]
    json: bool,

    /// Also write the JSON record to this file.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Debug)]
struct TolArgs {
    #[arg(long = "tol-residual", global = true, value_name = "X")]
    residual: Option<f64>,
    #[arg(long = "tol-plucker", global = true, value_name = "X")]
    plucker: Option<f64>,
    #[arg(long = "tol-realness", global = true, value_name = "X")]
    realness: Option<f64>,
    #[arg(long = "tol-critical", global = true, value_name = "X")]
    critical: Option<f64>,
    #[arg(long = "tol-separation", global = true, value_name = "X")]
    separation: Option<f64>,
    #[arg(long = "tol-labeling", global = true, value_name = "X")]
    labeling: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, CliError> {
        let mut t = Tolerances::default();
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.residual, self.residual);
        set(&mut t.plucker_separation, self.plucker);
        set(&mut t.realness, self.realness);
        set(&mut t.critical_match, self.critical);
        set(&mut t.point_separation, self.separation);
        set(&mut t.labeling, self.labeling);
        t.validate()?;
        Ok(t)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum LabelMode {
    Lemma6,
    Lemma7,
    Interior,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the nets of degree d, optionally drawing each one.
    Nets {
        #[arg(long)]
        d: usize,
        /// Write one SVG per net (and per dual tree) into this directory.
        #[arg(long, value_name = "DIR")]
        svg_dir: Option<PathBuf>,
    },
    /// Build a labeling of a net.
    Label {
        /// The net, as pairs `1-2,3-4` or as net JSON.
        #[arg(long)]
        net: String,
        #[arg(long, value_enum, default_value_t = LabelMode::Interior)]
        mode: LabelMode,
        /// Arc subset for lemma6, e.g. `t1,t2,t4`.
        #[arg(long)]
        w: Option<String>,
        /// Decreasing chain for lemma7, subsets separated by `;`.
        #[arg(long)]
        chain: Option<String>,
    },
    /// Solve for all planes with the prescribed real critical points.
    Solve {
        #[arg(long)]
        d: usize,
        /// Comma-separated increasing points; random when omitted.
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
    },
    /// Classify the solutions stored in a `solve` record.
    Classify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Solve, classify and label one instance, checking every property.
    Roundtrip {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        points: Option<String>,
        /// Trace step for the level-set curves.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Round trips over random instances, with optional step-refinement checks.
    Verify {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        /// Also check label drift under trace steps 1e-2, 1e-3, 1e-4.
        #[arg(long)]
        drift: bool,
    },
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let tol = cli.tol.resolve()?;
    let ctx = commands::Context { seed: cli.seed, tol };
    match &cli.command {
        Command::Nets { d, svg_dir } => commands::nets(&ctx, *d, svg_dir.as_deref()),
        Command::Label { net, mode, w, chain } => {
            commands::label(&ctx, net, *mode, w.as_deref(), chain.as_deref())
        }
        Command::Solve { d, points } => commands::solve(&ctx, *d, points.as_deref()),
        Command::Classify { input } => commands::classify(&ctx, input),
        Command::Roundtrip { d, points, step } => commands::roundtrip(&ctx, *d, points.as_deref(), *step),
        Command::Verify { d, instances, drift } => commands::verify(&ctx, *d, *instances, *drift),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Nets { .. } => "nets",
        Command::Label { .. } => "label",
        Command::Solve { .. } => "solve",
        Command::Classify { .. } => "classify",
        Command::Roundtrip { .. } => "roundtrip",
        Command::Verify { .. } => "verify",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let tol = cli.tol.resolve().unwrap_or_default();
    let record = commands::envelope(command_name(&cli.command), cli.seed, &tol, &outcome);
    let text = serde_json::to_string_pretty(&record).expect("records serialize");
    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if cli.json {
        println!("{text}");
    } else {
        print!("{}", outcome.summary);
    }
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
