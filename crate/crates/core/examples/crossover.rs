//! Rebuilds AAALAAADAR from two partially matching parents with the
//! Nterm-Cterm crossover.

use denovo_ga::engine::{nterm_cterm_crossover, GaConfig, Individual};
use denovo_ga::eval::{synthesize_spectrum, SynthConfig};
use denovo_ga::spectrum::{preprocess, PreprocessConfig};
use denovo_ga::Scorer;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(role: &str, ind: &Individual) {
    println!(
        "{role:<8} {:<12} fitness {:>6.3}  nterm {:>2}  cterm {:>2}  dmass {:>8.3}",
        ind.peptide.to_string(),
        ind.fitness(),
        ind.nterm(),
        ind.cterm(),
        ind.delta_mass()
    );
}

fn main() -> denovo_ga::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let truth: denovo_ga::Peptide = "AAALAAADAR".parse()?;
    let raw = synthesize_spectrum(&truth, &SynthConfig::default(), "aaalaaadar", &mut rng)?;
    let spectrum = preprocess(&raw, &PreprocessConfig::default());
    let scorer = Scorer::new(&spectrum, 0.5)?;
    let cfg = GaConfig::default();

    let n = Individual::evaluate("AAALAGGWR".parse()?, &scorer)?;
    let c = Individual::evaluate("NVLAAADAR".parse()?, &scorer)?;
    let h = Individual::evaluate("RGLAAADVK".parse()?, &scorer)?;
    show("nterm", &n);
    show("cterm", &c);
    show("helper", &h);
    show("child", &nterm_cterm_crossover(&n, &c, &h, &scorer, cfg.relaxed_cx_bound, &mut rng));

    let n = Individual::evaluate("AAAPEPSEQK".parse()?, &scorer)?;
    let c = Individual::evaluate("PEPSEQAR".parse()?, &scorer)?;
    let h = Individual::evaluate("RGLAAADTK".parse()?, &scorer)?;
    println!();
    show("nterm", &n);
    show("cterm", &c);
    show("helper", &h);
    // The helper window is random; count how often it fills the gap exactly.
    let mut exact = None;
    let mut hits = 0;
    for _ in 0..200 {
        let child = nterm_cterm_crossover(&n, &c, &h, &scorer, cfg.relaxed_cx_bound, &mut rng);
        if child.peptide == truth {
            hits += 1;
            exact.get_or_insert(child);
        }
    }
    println!("{hits}/200 draws rebuild {truth}");
    if let Some(child) = exact {
        show("child", &child);
    }
    Ok(())
}
