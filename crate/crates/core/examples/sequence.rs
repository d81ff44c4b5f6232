//! Sequences one synthetic spectrum end to end and prints the run trace.
//!
//!     cargo run --release --example sequence -- WVALEQWFEK 3

use denovo_ga::engine::{evolve_with, run_rng, GaConfig};
use denovo_ga::eval::{synthesize_spectrum, SynthConfig};
use denovo_ga::spectrum::{preprocess, PreprocessConfig};
use denovo_ga::Scorer;

fn main() -> denovo_ga::Result<()> {
    let mut args = std::env::args().skip(1);
    let text = args.next().unwrap_or_else(|| "AMVEVFLER".to_string());
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let truth = text.parse()?;

    let cfg = GaConfig {
        seed,
        ..GaConfig::default()
    };
    let mut rng = run_rng(seed, 0, 0);
    let synth = SynthConfig {
        dropout: 0.05,
        noise_peaks: 10,
        ..SynthConfig::default()
    };
    let raw = synthesize_spectrum(&truth, &synth, &text, &mut rng)?;
    let spectrum = preprocess(&raw, &PreprocessConfig::default());
    let scorer = Scorer::new(&spectrum, cfg.tolerance)?;

    let result = evolve_with(&scorer, &cfg, &mut rng)?;
    result.write_trace(std::io::stdout().lock())?;
    let best = &result.best;
    println!();
    println!("truth     {truth}");
    println!(
        "predicted {} (fitness {:.3}, nterm {}, cterm {}, dmass {:.3} Da)",
        best.peptide,
        best.fitness(),
        best.nterm(),
        best.cterm(),
        best.delta_mass()
    );
    Ok(())
}
