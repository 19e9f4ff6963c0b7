use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use grabill::config::{Analysis, ExperimentConfig};
use grabill::export::{self, Outputs, ReportFile};
use grabill::pipeline::{self, RunOptions};
use grabill::repro;

#[derive(Parser)]
#[command(name = "grabill", version, about = "Spectral statistics of honeycomb sector billiards")]
struct Cli {
    /// Experiment config (TOML or JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Spectrum cache directory (overrides GRABILL_CACHE_DIR and the config).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the lattice (sites.csv, bonds.csv) and the Hamiltonian (MatrixMarket).
    Build,
    /// Compute or load the spectrum of every window.
    Spectrum,
    /// NNSD, Δ3 and KS distances for every window.
    Stats,
    /// Sector quantum-billiard levels, wavefunctions and band-edge matching.
    Qb {
        /// Number of billiard levels.
        #[arg(long, default_value_t = 3000)]
        count: usize,
    },
    /// Length spectra with orbit markers.
    Lengths,
    /// Side-by-side KS distances of two ks.json reports.
    Compare { a: PathBuf, b: PathBuf },
    /// Rerun a built-in figure experiment at desk scale.
    Repro {
        /// Figure id; `list` prints the available ids.
        figure: String,
        /// Output directory (default `repro/<figure>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every analysis listed in the config.
    Run,
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_deref().context("--config is required for this command")?;
    ExperimentConfig::load(path).with_context(|| format!("invalid config {}", path.display()))
}

fn with_analyses(mut config: ExperimentConfig, keep: &[Analysis], default: &[Analysis]) -> ExperimentConfig {
    config.analyses.retain(|a| keep.contains(a));
    if config.analyses.is_empty() {
        config.analyses = default.to_vec();
    }
    config
}

fn report_summary(summary: &pipeline::RunSummary) {
    for w in &summary.windows {
        let (lo, hi) = w.window;
        print!("[{lo}, {hi}] {} levels", w.levels.len());
        if let Some(r) = &w.report {
            let ks: Vec<String> = r.ks.iter().map(|(k, v)| format!("{}={v:.4}", k.name())).collect();
            print!("  KS {}  -> {}", ks.join(" "), r.verdict().label());
        }
        if let Some((spec, peaks)) = &w.lengths {
            let hit = peaks.iter().filter(|p| p.within_resolution).count();
            print!("  {} peaks ({hit} on orbits, resolution {:.3})", peaks.len(), spec.resolution);
        }
        if let Some(m) = &w.edge_matching {
            print!("  {} billiard pairs{}", m.pairs.len(), if m.partial { " (partial)" } else { "" });
        }
        println!();
    }
    println!(
        "{} files in {} ({} spectra computed, {} from cache)",
        summary.manifest.files.len(),
        summary.output_dir.display(),
        summary.computed,
        summary.cache_hits
    );
}

fn compare(a: &Path, b: &Path) -> Result<()> {
    let read = |p: &Path| -> Result<ReportFile> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
    };
    let (ra, rb) = (read(a)?.to_report()?, read(b)?.to_report()?);
    let c = grabill_core::rmtstats::compare(&ra, &rb)?;
    println!("{:<10} {:>10} {:>10} {:>10}", "reference", "A", "B", "B - A");
    for (kind, da, db) in &c.rows {
        println!("{:<10} {da:>10.4} {db:>10.4} {:>+10.4}", kind.name(), db - da);
    }
    println!("verdict    {:>10} {:>10}", c.verdict_a.label(), c.verdict_b.label());
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let opts = RunOptions { cache_dir: cli.cache_dir.clone(), svg: cli.svg };
    use Analysis::*;
    match &cli.command {
        Command::Build => {
            let m = pipeline::build(&load(&cli)?, &opts)?;
            println!("{} files written", m.files.len());
        }
        Command::Spectrum => {
            let config = load(&cli)?;
            let exp = pipeline::Experiment::prepare(&config, &opts)?;
            let mut out = Outputs::new(&config.output_dir, &config.hash())?;
            for (k, &[lo, hi]) in config.windows.iter().enumerate() {
                let r = exp.window_spectrum(lo, hi, false)?;
                export::write_spectrum(&mut out, &format!("w{k}/spectrum.csv"), &r.eigenvalues)?;
                println!("[{lo}, {hi}] {} levels", r.len());
            }
            out.finish()?;
            println!("{} spectra computed, {} from cache", exp.computed(), exp.cache_hits());
        }
        Command::Stats => report_summary(&pipeline::run(&with_analyses(load(&cli)?, &[Nnsd, Delta3, Parity], &[Nnsd, Delta3]), &opts)?),
        Command::Lengths => report_summary(&pipeline::run(&with_analyses(load(&cli)?, &[Lengths], &[Lengths]), &opts)?),
        Command::Qb { count } => {
            let config = load(&cli)?;
            let m = pipeline::quantum_billiard(&config, *count, &opts)?;
            println!("{} files written", m.files.len());
            if config.windows.iter().any(|&[lo, hi]| (lo - 3.0).abs() <= 0.05 || (hi + 3.0).abs() <= 0.05) {
                let mut sub = with_analyses(config, &[QbMatch], &[QbMatch]);
                sub.output_dir = sub.output_dir.join("match");
                report_summary(&pipeline::run(&sub, &opts)?);
            }
        }
        Command::Compare { a, b } => compare(a, b)?,
        Command::Repro { figure, out } => {
            if figure == "list" {
                for (id, what) in repro::FIGURES {
                    println!("{id:<10} {what}");
                }
                return Ok(());
            }
            let dir = out.clone().unwrap_or_else(|| Path::new("repro").join(figure));
            let Some(config) = repro::figure_config(figure, &dir) else {
                bail!("unknown figure `{figure}`; try `grabill repro list`");
            };
            report_summary(&pipeline::run(&config, &opts)?);
        }
        Command::Run => report_summary(&pipeline::run(&load(&cli)?, &opts)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
