//! Compares a tag-seeded initial pool with random sequences of the same
//! lengths on the spectrum of AAALAAADAR.

use denovo_ga::eval::{synthesize_spectrum, SynthConfig};
use denovo_ga::spectrum::{preprocess, PreprocessConfig};
use denovo_ga::tags::{build_init_pool, random_init_pool, InitPool};
use denovo_ga::{Individual, Scorer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn report(name: &str, pool: &InitPool) {
    let best = pool
        .candidates
        .iter()
        .max_by(|a, b| a.fitness().total_cmp(&b.fitness()))
        .unwrap();
    let n = pool.len() as f64;
    let mean_fit = pool.candidates.iter().map(Individual::fitness).sum::<f64>() / n;
    let mean_delta = pool.candidates.iter().map(|c| c.delta_mass().abs()).sum::<f64>() / n;
    println!(
        "{name:<7} best {} (fitness {:.3}, nterm {}, cterm {})  mean fitness {mean_fit:.3}  mean |dmass| {mean_delta:.1} Da",
        best.peptide,
        best.fitness(),
        best.nterm(),
        best.cterm()
    );
}

fn main() -> denovo_ga::Result<()> {
    let peptide = "AAALAAADAR".parse()?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let raw = synthesize_spectrum(&peptide, &SynthConfig::default(), "aaalaaadar", &mut rng)?;
    let spectrum = preprocess(&raw, &PreprocessConfig::default());
    let scorer = Scorer::new(&spectrum, 0.5)?;

    let tagged = build_init_pool(&scorer, 1000, &mut rng);
    println!("{} tags, {} candidates after {} attempts", tagged.tag_count, tagged.len(), tagged.attempts);
    let lengths: Vec<usize> = tagged.candidates.iter().map(Individual::len).collect();
    let random = random_init_pool(&scorer, &lengths, &mut rng);

    report("tags", &tagged);
    report("random", &random);
    Ok(())
}
