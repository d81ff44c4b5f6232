//! Sequences a small synthetic corpus over several seeds and reports
//! accuracy per run and across runs.

use denovo_ga::cli::{sequence_spectra, synthesize_all, SequenceOptions};
use denovo_ga::eval::{aggregate_runs, compute_metrics, random_tryptic_peptide, PsmPair, SynthConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> denovo_ga::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let corpus = (0..8)
        .map(|_| {
            let len = rng.gen_range(7..=10);
            random_tryptic_peptide(len, &mut rng)
        })
        .collect::<denovo_ga::Result<Vec<_>>>()?;
    let spectra = synthesize_all(&corpus, &SynthConfig::default(), 5)?;

    let opts = SequenceOptions {
        runs: 3,
        ..SequenceOptions::default()
    };
    let records = sequence_spectra(&spectra, &opts)?;

    let mut per_run = Vec::new();
    for run in 0..opts.runs {
        let pairs: Vec<PsmPair> = records
            .iter()
            .filter(|r| r.run_index == run)
            .map(|r| PsmPair {
                predicted: Some(r.result.best.peptide.clone()),
                truth: corpus[r.spectrum_index].clone(),
            })
            .collect();
        let m = compute_metrics(&pairs, opts.ga.tolerance)?;
        println!(
            "run {run}: precision {:.3} recall {:.3} peptide recall {:.3}",
            m.precision, m.recall, m.peptide_recall
        );
        per_run.push(m);
    }
    let agg = aggregate_runs(&per_run)?;
    println!(
        "mean:  precision {:.3} ± {:.3}, recall {:.3} ± {:.3}, peptide recall {:.3} ± {:.3}",
        agg.mean.precision,
        agg.std.precision,
        agg.mean.recall,
        agg.std.recall,
        agg.mean.peptide_recall,
        agg.std.peptide_recall
    );
    Ok(())
}
