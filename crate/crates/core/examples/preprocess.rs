//! Builds a noisy synthetic spectrum and shows what each preprocessing stage
//! does to it.

use denovo_ga::eval::{synthesize_spectrum, IntensityProfile, SynthConfig};
use denovo_ga::spectrum::{add_complements, denoise, normalize, PreprocessConfig, Spectrum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn summary(stage: &str, s: &Spectrum) {
    let synthetic = s.peaks().iter().filter(|p| p.synthetic).count();
    let max = s.peaks().iter().map(|p| p.intensity).fold(0.0, f64::max);
    println!(
        "{stage:<12} {:>4} peaks ({synthetic} synthetic), max intensity {max:.3}",
        s.len()
    );
}

fn main() -> denovo_ga::Result<()> {
    let peptide = "AMVEVFLER".parse()?;
    let cfg = SynthConfig {
        intensity: IntensityProfile::Random { min: 1.0, max: 100.0 },
        dropout: 0.2,
        noise_peaks: 60,
        ..SynthConfig::default()
    };
    let raw = synthesize_spectrum(&peptide, &cfg, "amvevfler", &mut ChaCha8Rng::seed_from_u64(7))?;
    let pre = PreprocessConfig::default();

    summary("raw", &raw);
    let denoised = denoise(&raw, &pre);
    summary("denoised", &denoised);
    let normalized = normalize(&denoised, &pre);
    summary("normalized", &normalized);
    let full = add_complements(&normalized, &pre);
    summary("complements", &full);
    Ok(())
}
