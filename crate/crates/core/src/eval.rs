//! Accuracy metrics against ground truth, run aggregation and the synthetic
//! spectrum generator used as a test oracle.

use std::io::BufRead;

use rand::Rng;

use crate::chem::{AminoAcid, Peptide, PROTON_MASS};
use crate::error::{Error, Result};
use crate::spectrum::{Peak, Spectrum};
use crate::theo::TheoreticalSpectrum;

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthRecord {
    pub spectrum_id: String,
    pub peptide: Peptide,
}

/// Reads `spectrum_id<TAB>peptide` rows. A leading header row is skipped.
pub fn read_ground_truth<R: BufRead>(reader: R) -> Result<Vec<GroundTruthRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(id), Some(peptide)) = (cols.next(), cols.next()) else {
            return Err(Error::parse(line_no, "expected spectrum_id<TAB>peptide"));
        };
        if line_no == 1 && id == "spectrum_id" {
            continue;
        }
        let peptide = peptide
            .parse()
            .map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        out.push(GroundTruthRecord {
            spectrum_id: id.to_string(),
            peptide,
        });
    }
    Ok(out)
}

/// Counts predicted residues that line up with a truth residue: same symbol
/// and N-terminal prefix masses (up to and including the residue) within
/// `tolerance`. Each truth residue is used at most once, scanning left to
/// right.
pub fn matched_amino_acids(predicted: &[AminoAcid], truth: &[AminoAcid], tolerance: f64) -> usize {
    let prefix = |seq: &[AminoAcid]| -> Vec<f64> {
        seq.iter()
            .scan(0.0, |acc, aa| {
                *acc += aa.mass();
                Some(*acc)
            })
            .collect()
    };
    let pm = prefix(predicted);
    let tm = prefix(truth);
    let mut used = vec![false; truth.len()];
    let mut count = 0;
    for (i, aa) in predicted.iter().enumerate() {
        let aa = aa.canonical();
        let hit = (0..truth.len()).find(|&j| {
            !used[j] && truth[j].canonical() == aa && (tm[j] - pm[i]).abs() <= tolerance
        });
        if let Some(j) = hit {
            used[j] = true;
            count += 1;
        }
    }
    count
}

/// A prediction paired with its ground truth. A missing prediction counts as
/// an empty sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PsmPair {
    pub predicted: Option<Peptide>,
    pub truth: Peptide,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub peptide_recall: f64,
    /// Mean number of matched residues per spectrum.
    pub avg_len_partial_matches: f64,
    pub avg_len_predicted: f64,
    pub n_spectra: usize,
}

pub fn compute_metrics(pairs: &[PsmPair], tolerance: f64) -> Result<Metrics> {
    if pairs.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut matched = 0usize;
    let mut predicted_len = 0usize;
    let mut truth_len = 0usize;
    let mut exact = 0usize;
    for pair in pairs {
        let pred = pair.predicted.as_ref().map_or(&[][..], |p| p.residues());
        matched += matched_amino_acids(pred, pair.truth.residues(), tolerance);
        predicted_len += pred.len();
        truth_len += pair.truth.len();
        if pair.predicted.as_ref() == Some(&pair.truth) {
            exact += 1;
        }
    }
    let n = pairs.len() as f64;
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(Metrics {
        precision: ratio(matched, predicted_len),
        recall: ratio(matched, truth_len),
        peptide_recall: exact as f64 / n,
        avg_len_partial_matches: matched as f64 / n,
        avg_len_predicted: predicted_len as f64 / n,
        n_spectra: pairs.len(),
    })
}

/// Per-field mean and sample standard deviation over runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateMetrics {
    pub mean: Metrics,
    pub std: Metrics,
    pub n_runs: usize,
}

pub fn aggregate_runs(runs: &[Metrics]) -> Result<AggregateMetrics> {
    if runs.is_empty() {
        return Err(Error::EmptyResults);
    }
    let n = runs.len() as f64;
    let mean_std = |f: fn(&Metrics) -> f64| -> (f64, f64) {
        let mean = runs.iter().map(f).sum::<f64>() / n;
        let std = if runs.len() > 1 {
            (runs.iter().map(|m| (f(m) - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        (mean, std)
    };
    let (p, ps) = mean_std(|m| m.precision);
    let (r, rs) = mean_std(|m| m.recall);
    let (pr, prs) = mean_std(|m| m.peptide_recall);
    let (lp, lps) = mean_std(|m| m.avg_len_partial_matches);
    let (lpr, lprs) = mean_std(|m| m.avg_len_predicted);
    let (ns, nss) = mean_std(|m| m.n_spectra as f64);
    Ok(AggregateMetrics {
        mean: Metrics {
            precision: p,
            recall: r,
            peptide_recall: pr,
            avg_len_partial_matches: lp,
            avg_len_predicted: lpr,
            n_spectra: ns.round() as usize,
        },
        std: Metrics {
            precision: ps,
            recall: rs,
            peptide_recall: prs,
            avg_len_partial_matches: lps,
            avg_len_predicted: lprs,
            n_spectra: nss.round() as usize,
        },
        n_runs: runs.len(),
    })
}

/// Random tryptic peptide of length `len` (at least 2): interior residues
/// drawn from the canonical alphabet without `K` and `R`, then `K` or `R`.
pub fn random_tryptic_peptide<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Peptide> {
    if len < 2 {
        return Err(Error::InvalidArgument("peptide length must be at least 2".into()));
    }
    let interior: Vec<AminoAcid> = AminoAcid::CANONICAL
        .iter()
        .copied()
        .filter(|aa| !aa.is_tryptic_terminus())
        .collect();
    let mut residues: Vec<AminoAcid> = (0..len - 1)
        .map(|_| interior[rng.gen_range(0..interior.len())])
        .collect();
    residues.push(if rng.gen_bool(0.5) { AminoAcid::Lys } else { AminoAcid::Arg });
    Peptide::new(residues)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntensityProfile {
    /// Every fragment peak has intensity 1.
    Uniform,
    /// Fragment intensities drawn uniformly from `[min, max)`.
    Random { min: f64, max: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub intensity: IntensityProfile,
    pub noise_peaks: usize,
    /// Probability that a fragment ion is left out.
    pub dropout: f64,
    /// Noise peaks are kept farther than this from every true fragment.
    pub tolerance: f64,
    pub charge: u32,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            intensity: IntensityProfile::Uniform,
            noise_peaks: 0,
            dropout: 0.0,
            tolerance: 0.5,
            charge: 2,
        }
    }
}

/// Builds a spectrum of `peptide`'s b/y ladder with dropout and noise. The
/// precursor mass equals the parent mass.
pub fn synthesize_spectrum<R: Rng + ?Sized>(
    peptide: &Peptide,
    cfg: &SynthConfig,
    id: &str,
    rng: &mut R,
) -> Result<Spectrum> {
    if !(0.0..1.0).contains(&cfg.dropout) {
        return Err(Error::InvalidArgument(format!(
            "dropout must lie in [0, 1), got {}",
            cfg.dropout
        )));
    }
    if cfg.charge == 0 {
        return Err(Error::InvalidArgument("charge must be at least 1".into()));
    }
    let t = TheoreticalSpectrum::new(peptide)?;
    let ions: Vec<f64> = t.b_ions.iter().chain(&t.y_ions).copied().collect();
    let mut peaks = Vec::new();
    for &mz in &ions {
        if cfg.dropout > 0.0 && rng.gen_bool(cfg.dropout) {
            continue;
        }
        let intensity = match cfg.intensity {
            IntensityProfile::Uniform => 1.0,
            IntensityProfile::Random { min, max } => rng.gen_range(min..max),
        };
        peaks.push(Peak::new(mz, intensity));
    }

    let lo = ions.iter().copied().fold(f64::INFINITY, f64::min) - 50.0;
    let hi = ions.iter().copied().fold(0.0, f64::max) + 50.0;
    let lo = lo.max(1.0);
    let mut added = 0;
    while added < cfg.noise_peaks {
        let mz = rng.gen_range(lo..hi);
        if ions.iter().any(|&ion| (ion - mz).abs() <= cfg.tolerance) {
            continue;
        }
        peaks.push(Peak::new(mz, rng.gen_range(0.05..1.0)));
        added += 1;
    }

    let z = f64::from(cfg.charge);
    let pepmass = (peptide.parent_mass() + z * PROTON_MASS) / z;
    Spectrum::new(id, pepmass, cfg.charge, peaks)
}
