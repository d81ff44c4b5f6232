//! Theoretical fragment ladders and peptide-spectrum match scoring.

use crate::chem::{AminoAcid, Peptide, ResidueMasses, PROTON_MASS, WATER_MASS};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;

/// Mass added to a b-ion residue sum (one proton).
pub const B_ION_OFFSET: f64 = PROTON_MASS;
/// Mass added to a y-ion residue sum (water plus one proton).
pub const Y_ION_OFFSET: f64 = WATER_MASS + PROTON_MASS;

/// Singly charged fragment masses of a peptide.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoreticalSpectrum {
    /// `b_ions[j - 1]` is b_j: the first j residues plus a proton.
    pub b_ions: Vec<f64>,
    /// `y_ions[j - 1]` is y_j: the last j residues plus water and a proton.
    pub y_ions: Vec<f64>,
    /// b-type ions of every interior run of two or more residues that
    /// touches neither terminus.
    pub internal_ions: Vec<f64>,
}

impl TheoreticalSpectrum {
    pub fn new(peptide: &Peptide) -> Result<Self> {
        Self::with_masses(peptide.residues(), &ResidueMasses::standard())
    }

    pub fn with_masses(residues: &[AminoAcid], masses: &ResidueMasses) -> Result<Self> {
        let l = residues.len();
        if l < 2 {
            return Err(Error::InvalidPeptide(format!(
                "fragment ladder needs at least 2 residues, got {l}"
            )));
        }
        let m: Vec<f64> = residues.iter().map(|&aa| masses.mass(aa)).collect();

        let mut b_ions = Vec::with_capacity(l - 1);
        let mut acc = 0.0;
        for &x in &m[..l - 1] {
            acc += x;
            b_ions.push(acc + B_ION_OFFSET);
        }

        let mut y_ions = Vec::with_capacity(l - 1);
        let mut acc = 0.0;
        for &x in m[1..].iter().rev() {
            acc += x;
            y_ions.push(acc + Y_ION_OFFSET);
        }

        let mut internal_ions = Vec::new();
        for start in 1..l.saturating_sub(2) {
            let mut acc = m[start];
            for &x in &m[start + 1..l - 1] {
                acc += x;
                internal_ions.push(acc + B_ION_OFFSET);
            }
        }

        Ok(TheoreticalSpectrum {
            b_ions,
            y_ions,
            internal_ions,
        })
    }

    /// Peptide length the ladder was built from.
    pub fn peptide_len(&self) -> usize {
        self.b_ions.len() + 1
    }
}

pub fn theoretical_spectrum(peptide: &Peptide) -> Result<TheoreticalSpectrum> {
    TheoreticalSpectrum::new(peptide)
}

/// Which theoretical ions found an experimental peak.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakMatches {
    /// Sorted, distinct indices of experimental peaks hit by any ion.
    pub matched_peaks: Vec<usize>,
    /// Index of the nearest peak within tolerance for each b-ion.
    pub b_hits: Vec<Option<usize>>,
    pub y_hits: Vec<Option<usize>>,
    pub internal_hits: Vec<Option<usize>>,
}

impl PeakMatches {
    /// Number of b- and y-ions without a matching peak.
    pub fn n_unmatched(&self) -> usize {
        self.b_hits
            .iter()
            .chain(&self.y_hits)
            .filter(|h| h.is_none())
            .count()
    }

    pub fn matched_intensity(&self, spectrum: &Spectrum) -> f64 {
        self.matched_peaks
            .iter()
            .map(|&i| spectrum.peaks()[i].intensity)
            .sum()
    }
}

/// Matches every theoretical ion to its nearest experimental peak within
/// `tolerance`. A peak hit by several ions is counted once.
pub fn match_peaks(t: &TheoreticalSpectrum, s: &Spectrum, tolerance: f64) -> PeakMatches {
    let hit = |mz: &f64| s.nearest_peak(*mz, tolerance);
    let b_hits: Vec<_> = t.b_ions.iter().map(hit).collect();
    let y_hits: Vec<_> = t.y_ions.iter().map(hit).collect();
    let internal_hits: Vec<_> = t.internal_ions.iter().map(hit).collect();

    let mut matched_peaks: Vec<usize> = b_hits
        .iter()
        .chain(&y_hits)
        .chain(&internal_hits)
        .flatten()
        .copied()
        .collect();
    matched_peaks.sort_unstable();
    matched_peaks.dedup();

    PeakMatches {
        matched_peaks,
        b_hits,
        y_hits,
        internal_hits,
    }
}

/// Counts consecutive supported ions from the start of `hits`. An ion is
/// supported when it matched a peak and that peak's complement is also
/// observed within twice the tolerance. The score is the number of
/// consecutive supported pairs, i.e. one less than the run length.
fn sequential_score(hits: &[Option<usize>], s: &Spectrum, tolerance: f64) -> usize {
    let run = hits
        .iter()
        .take_while(|hit| match hit {
            Some(i) => {
                let c = s.complement_mz(s.peaks()[*i].mz);
                s.nearest_peak(c, 2.0 * tolerance).is_some()
            }
            None => false,
        })
        .count();
    run.saturating_sub(1)
}

/// Nterm and Cterm scores from precomputed matches.
pub fn terminal_scores(m: &PeakMatches, s: &Spectrum, tolerance: f64) -> (usize, usize) {
    (
        sequential_score(&m.b_hits, s, tolerance),
        sequential_score(&m.y_hits, s, tolerance),
    )
}

pub fn nterm_cterm_scores(p: &Peptide, s: &Spectrum, tolerance: f64) -> Result<(usize, usize)> {
    let t = TheoreticalSpectrum::new(p)?;
    Ok(terminal_scores(&match_peaks(&t, s, tolerance), s, tolerance))
}

/// Every term of the match score, kept separately.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchResult {
    pub matched_intensity_sum: f64,
    pub total_intensity_sum: f64,
    pub n_unmatched: usize,
    /// Precursor mass minus candidate parent mass.
    pub delta_mass: f64,
    pub precursor_mass: f64,
    pub length: usize,
    pub nterm: usize,
    pub cterm: usize,
    pub fitness: f64,
}

impl MatchResult {
    /// Assembles the score from its terms:
    /// `I_matched/I_total - |Δmass|/precursor + (nterm + cterm - unmatched)/length`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_terms(
        matched_intensity_sum: f64,
        total_intensity_sum: f64,
        delta_mass: f64,
        precursor_mass: f64,
        nterm: usize,
        cterm: usize,
        n_unmatched: usize,
        length: usize,
    ) -> Self {
        let fitness = combine_fitness(
            matched_intensity_sum / total_intensity_sum,
            delta_mass.abs() / precursor_mass,
            nterm as f64,
            cterm as f64,
            n_unmatched as f64,
            length as f64,
        );
        MatchResult {
            matched_intensity_sum,
            total_intensity_sum,
            n_unmatched,
            delta_mass,
            precursor_mass,
            length,
            nterm,
            cterm,
            fitness,
        }
    }

    pub fn intensity_fraction(&self) -> f64 {
        self.matched_intensity_sum / self.total_intensity_sum
    }

    pub fn mass_penalty(&self) -> f64 {
        self.delta_mass.abs() / self.precursor_mass
    }
}

/// The fitness formula over already-normalised intensity and mass terms.
pub fn combine_fitness(
    intensity_fraction: f64,
    mass_penalty: f64,
    nterm: f64,
    cterm: f64,
    n_unmatched: f64,
    length: f64,
) -> f64 {
    intensity_fraction - mass_penalty + (nterm + cterm - n_unmatched) / length
}

/// Scores candidate peptides against one spectrum.
#[derive(Clone, Debug)]
pub struct Scorer<'a> {
    spectrum: &'a Spectrum,
    tolerance: f64,
    total_intensity: f64,
    masses: ResidueMasses,
}

impl<'a> Scorer<'a> {
    pub fn new(spectrum: &'a Spectrum, tolerance: f64) -> Result<Self> {
        Self::with_masses(spectrum, tolerance, ResidueMasses::standard())
    }

    pub fn with_masses(spectrum: &'a Spectrum, tolerance: f64, masses: ResidueMasses) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        let total_intensity = spectrum.total_intensity();
        if !(total_intensity > 0.0) {
            return Err(Error::InvalidSpectrum(format!(
                "spectrum {:?} has zero total intensity",
                spectrum.id()
            )));
        }
        Ok(Scorer {
            spectrum,
            tolerance,
            total_intensity,
            masses,
        })
    }

    pub fn spectrum(&self) -> &'a Spectrum {
        self.spectrum
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn masses(&self) -> &ResidueMasses {
        &self.masses
    }

    pub fn precursor_mass(&self) -> f64 {
        self.spectrum.precursor_mass()
    }

    /// Precursor mass minus the candidate's parent mass.
    pub fn delta_mass(&self, residues: &[AminoAcid]) -> f64 {
        self.precursor_mass() - self.masses.parent_mass(residues)
    }

    pub fn score(&self, peptide: &Peptide) -> Result<MatchResult> {
        self.score_residues(peptide.residues())
    }

    pub fn score_residues(&self, residues: &[AminoAcid]) -> Result<MatchResult> {
        let t = TheoreticalSpectrum::with_masses(residues, &self.masses)?;
        let m = match_peaks(&t, self.spectrum, self.tolerance);
        let (nterm, cterm) = terminal_scores(&m, self.spectrum, self.tolerance);
        Ok(MatchResult::from_terms(
            m.matched_intensity(self.spectrum),
            self.total_intensity,
            self.delta_mass(residues),
            self.precursor_mass(),
            nterm,
            cterm,
            m.n_unmatched(),
            residues.len(),
        ))
    }
}

/// One-shot scoring of a peptide against a spectrum.
pub fn fitness(p: &Peptide, s: &Spectrum, tolerance: f64) -> Result<MatchResult> {
    Scorer::new(s, tolerance)?.score(p)
}
