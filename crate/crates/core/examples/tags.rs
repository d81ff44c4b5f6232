//! Lists the three-residue tags read off a clean synthetic spectrum.
//!
//!     cargo run --example tags -- GYAMNADQK

use denovo_ga::eval::{synthesize_spectrum, SynthConfig};
use denovo_ga::tags::extract_tags;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> denovo_ga::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "LGVTLYK".to_string());
    let peptide = text.parse()?;
    let s = synthesize_spectrum(&peptide, &SynthConfig::default(), &text, &mut ChaCha8Rng::seed_from_u64(0))?;

    let mut tags = extract_tags(&s, 0.5);
    tags.sort_by(|a, b| a.start_mz.total_cmp(&b.start_mz).then(a.residues.cmp(&b.residues)));
    println!("{} peaks, {} tags", s.len(), tags.len());
    for t in &tags {
        println!("{:>10.4}  {}  {:?}", t.start_mz, t.sequence(), t.peak_indices);
    }
    Ok(())
}
