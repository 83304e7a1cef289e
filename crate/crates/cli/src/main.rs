use std::path::PathBuf;
use std::process::ExitCode;

use caloron_cli::commands::{self, Direction, ExpandVariant};
use caloron_cli::config::Scene;
use caloron_cli::report::RunReport;
use caloron_cli::{selftest, CliError, CliResult, EXIT_OK, EXIT_TOLERANCE};
use caloron_core::symbolic::RenderStyle;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "caloron", version, about = "Product caloron correspondence toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Forward,
    Inverse,
}

#[derive(Subcommand)]
enum Command {
    /// Print the caloron integrand for fiber dimension d and polynomial degree k.
    Expand {
        #[arg(long)]
        fiber_dim: usize,
        #[arg(long)]
        poly_degree: usize,
        #[arg(long)]
        latex: bool,
        /// Abelian double-binomial closed form.
        #[arg(long, conflicts_with_all = ["string", "closed"])]
        abelian: bool,
        /// String-class integrand (circle fiber).
        #[arg(long, conflicts_with = "closed")]
        string: bool,
        /// Low-degree nested-sum formula, uncanonicalized.
        #[arg(long)]
        closed: bool,
    },
    /// Convert between a connection on M x X and a connection/Higgs pair on M.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "forward")]
        direction: DirectionArg,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Work with link variables instead of forms.
        #[arg(long)]
        links: bool,
        /// Run both directions and require bit-exact agreement with the input.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Caloron classes of a scene file.
    Classes {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also run on the doubled grid and report residual ratios.
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        no_timings: bool,
    },
    /// Property suite of the universal-bundle model on a graph.
    Universal {
        #[arg(long, default_value = "ring:8")]
        graph: String,
        #[arg(long, default_value = "su2")]
        group: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value = "all")]
        checks: String,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        no_timings: bool,
    },
    /// Run the acceptance suite.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Comma-separated criterion numbers; all by default.
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        no_timings: bool,
    },
}

fn finish(report: RunReport, path: Option<&PathBuf>, no_timings: bool) -> CliResult<i32> {
    let code = if report.all_pass() { EXIT_OK } else { EXIT_TOLERANCE };
    commands::emit_report(report, path, !no_timings)?;
    Ok(code)
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Expand { fiber_dim, poly_degree, latex, abelian, string, closed } => {
            let variant = match (abelian, string, closed) {
                (true, _, _) => ExpandVariant::Abelian,
                (_, true, _) => ExpandVariant::String,
                (_, _, true) => ExpandVariant::Closed,
                _ => ExpandVariant::Generic,
            };
            let style = if latex { RenderStyle::Latex } else { RenderStyle::Plain };
            println!("{}", commands::expand(fiber_dim, poly_degree, variant, style)?);
            Ok(EXIT_OK)
        }
        Command::Transform { input, direction, output, links, roundtrip } => {
            let dir = match direction {
                DirectionArg::Forward => Direction::Forward,
                DirectionArg::Inverse => Direction::Inverse,
            };
            commands::transform(&input, dir, output.as_deref(), links, roundtrip)
        }
        Command::Classes { config, report, refine, no_timings } => {
            let scene = Scene::load(&config)?;
            let out = commands::classes(&scene, refine)?;
            for l in &out.lines {
                println!("{l}");
            }
            for c in out.report.failed() {
                println!("FAIL {}: {:.6e} vs {:.1e}", c.name, c.value, c.threshold);
            }
            finish(out.report, report.as_ref(), no_timings)
        }
        Command::Universal { graph, group, seed, checks, report, no_timings } => {
            let rep = commands::universal(&graph, &group, seed, &checks)?;
            for c in &rep.report.checks {
                println!("{:<28} {:.3e} (tolerance {:.0e}) {}", c.name, c.value, c.threshold, if c.pass { "ok" } else { "FAIL" });
            }
            finish(rep, report.as_ref(), no_timings)
        }
        Command::Selftest { seed, only, report, no_timings } => {
            let out = selftest::selftest(seed, &only)?;
            for r in &out.results {
                println!("{}", r.line());
            }
            println!("content hash: {}", out.report.content_hash);
            let code = if out.all_pass() { EXIT_OK } else { EXIT_TOLERANCE };
            commands::emit_report(out.report, report.as_ref(), !no_timings)?;
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("caloron: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
