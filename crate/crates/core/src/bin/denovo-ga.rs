use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use denovo_ga::cli::{self, Overrides, EXIT_OK, EXIT_USAGE};
use denovo_ga::Error;

/// De novo peptide sequencing with a tag-seeded genetic algorithm.
#[derive(Parser)]
#[command(name = "denovo-ga", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// key=value settings file, overridden by flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    generations: Option<usize>,
    #[arg(long, global = true)]
    population: Option<usize>,
    #[arg(long, global = true)]
    pool_size: Option<usize>,
    /// Tournament size
    #[arg(long, global = true)]
    tournament: Option<usize>,
    /// Fragment tolerance in Da
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// nterm_cterm,two_point,flip,conflict
    #[arg(long, global = true)]
    rates: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file (default stdout)
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    no_complements: bool,
    /// Fragment dropout probability for synth
    #[arg(long, global = true)]
    dropout: Option<f64>,
    /// Noise peaks per synth record
    #[arg(long, global = true)]
    noise: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise, normalize and complement-augment an MGF file
    Preprocess { input: PathBuf },
    /// Sequence every spectrum of an MGF file
    Sequence {
        input: PathBuf,
        /// Run on the spectra as given
        #[arg(long)]
        skip_preprocess: bool,
    },
    /// Score a results TSV against a ground-truth TSV
    Evaluate { results: PathBuf, truth: PathBuf },
    /// Build synthetic spectra from a peptide list
    Synth {
        peptides: PathBuf,
        /// Ground-truth TSV path (default: next to --output)
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Dump three-residue tags as TSV
    Tags { input: PathBuf },
}

impl Flags {
    fn overrides(&self) -> Result<Overrides, Error> {
        let file = match &self.config {
            Some(path) => Overrides::from_config_file(path)?,
            None => Overrides::default(),
        };
        let flags = Overrides {
            seed: self.seed,
            runs: self.runs,
            generations: self.generations,
            population: self.population,
            pool_size: self.pool_size,
            tournament: self.tournament,
            tau: self.tau,
            rates: self.rates.as_deref().map(cli::parse_rates).transpose()?,
            jobs: self.jobs,
            no_complements: self.no_complements.then_some(true),
            dropout: self.dropout,
            noise: self.noise,
        };
        Ok(file.merge(flags))
    }
}

fn create(path: &Path) -> Result<Box<dyn Write>, Error> {
    Ok(Box::new(BufWriter::new(File::create(path)?)))
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    match path {
        Some(p) => create(p),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let o = cli.flags.overrides()?;
    let tau = o.tau.unwrap_or(0.5);
    match cli.command {
        Command::Preprocess { input } => {
            let mut out = output(&cli.flags.output)?;
            cli::cmd_preprocess(&input, &o.preprocess_config(), &mut out, io::stderr().lock())?;
            out.flush()?;
        }
        Command::Sequence {
            input,
            skip_preprocess,
        } => {
            let mut opts = o.sequence_options();
            if skip_preprocess {
                opts.preprocess = None;
            }
            let mut out = output(&cli.flags.output)?;
            cli::cmd_sequence(&input, &opts, &mut out)?;
            out.flush()?;
        }
        Command::Evaluate { results, truth } => {
            let mut out = output(&cli.flags.output)?;
            cli::cmd_evaluate(&results, &truth, tau, &mut out)?;
            out.flush()?;
        }
        Command::Synth { peptides, truth } => {
            let truth = truth.or_else(|| {
                cli.flags
                    .output
                    .as_ref()
                    .map(|p| p.with_extension("truth.tsv"))
            });
            let mut mgf = output(&cli.flags.output)?;
            let mut truth_out: Box<dyn Write> = match &truth {
                Some(p) => create(p)?,
                None => Box::new(io::sink()),
            };
            let seed = o.seed.unwrap_or(0);
            cli::cmd_synth(&peptides, &o.synth_config(), seed, &mut mgf, &mut truth_out)?;
            mgf.flush()?;
            truth_out.flush()?;
        }
        Command::Tags { input } => {
            let mut out = output(&cli.flags.output)?;
            cli::cmd_tags(&input, tau, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
