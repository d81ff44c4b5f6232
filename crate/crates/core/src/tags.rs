//! Three-residue sequence tags and the tag-seeded initialisation pool.
//!
//! A tag is a path of four peaks whose three successive m/z gaps each match
//! a residue mass. Candidates are built by concatenating two to four random
//! tags, appending `K` or `R`, and inserting or removing residues until the
//! candidate's parent mass is within one glycine (plus tolerance) of the
//! precursor mass.

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::chem::{AminoAcid, Peptide, ResidueMasses, MAX_PEPTIDE_LEN};
use crate::engine::Individual;
use crate::spectrum::Spectrum;
use crate::theo::Scorer;

/// Iteration cap for [`adjust_mass`].
pub const MAX_ADJUST_ITERATIONS: usize = 100;
/// Attempts allowed per requested pool slot.
pub const POOL_ATTEMPTS_PER_SLOT: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct Tag {
    /// Ascending indices of the four peaks along the path.
    pub peak_indices: [usize; 4],
    pub residues: [AminoAcid; 3],
    pub start_mz: f64,
}

impl Tag {
    pub fn sequence(&self) -> String {
        self.residues.iter().map(|aa| aa.symbol()).collect()
    }
}

/// All three-residue tags in `s`, labelled with the canonical alphabet. A
/// gap that fits several residues yields one tag per label.
pub fn extract_tags(s: &Spectrum, tolerance: f64) -> Vec<Tag> {
    extract_tags_with(s, tolerance, &ResidueMasses::standard())
}

pub fn extract_tags_with(s: &Spectrum, tolerance: f64, masses: &ResidueMasses) -> Vec<Tag> {
    let peaks = s.peaks();
    let n = peaks.len();
    if n < 4 {
        return Vec::new();
    }
    let residue_masses: Vec<(AminoAcid, f64)> = AminoAcid::CANONICAL
        .iter()
        .map(|&aa| (aa, masses.mass(aa)))
        .collect();
    let max_gap = residue_masses.iter().map(|r| r.1).fold(0.0, f64::max) + tolerance;

    // edges[i]: (j, residue) for every length-one tag t(i, j).
    let mut edges: Vec<Vec<(usize, AminoAcid)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let gap = peaks[j].mz - peaks[i].mz;
            if gap > max_gap {
                break;
            }
            for &(aa, m) in &residue_masses {
                if (gap - m).abs() <= tolerance {
                    edges[i].push((j, aa));
                }
            }
        }
    }

    let mut tags = Vec::new();
    for (i, first) in edges.iter().enumerate() {
        for &(j, a) in first {
            for &(k, b) in &edges[j] {
                for &(m, c) in &edges[k] {
                    tags.push(Tag {
                        peak_indices: [i, j, k, m],
                        residues: [a, b, c],
                        start_mz: peaks[i].mz,
                    });
                }
            }
        }
    }
    tags
}

fn random_terminus<R: Rng + ?Sized>(rng: &mut R) -> AminoAcid {
    if rng.gen_bool(0.5) {
        AminoAcid::Lys
    } else {
        AminoAcid::Arg
    }
}

/// Random tryptic sequence of length 7 to 12.
pub fn random_tryptic_sequence<R: Rng + ?Sized>(rng: &mut R) -> Vec<AminoAcid> {
    let len = rng.gen_range(7..=12);
    random_tryptic_of_len(len, rng)
}

/// Random residues ending in `K` or `R`; `len` must be at least 1.
pub fn random_tryptic_of_len<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<AminoAcid> {
    let mut seq: Vec<AminoAcid> = (0..len - 1)
        .map(|_| *AminoAcid::CANONICAL.choose(rng).unwrap())
        .collect();
    seq.push(random_terminus(rng));
    seq
}

/// Concatenates 2, 3 or 4 tags drawn with replacement and appends `K` or `R`.
/// Without tags, falls back to [`random_tryptic_sequence`].
pub fn random_sequence_from_tags<R: Rng + ?Sized>(tags: &[Tag], rng: &mut R) -> Vec<AminoAcid> {
    if tags.is_empty() {
        return random_tryptic_sequence(rng);
    }
    let k = rng.gen_range(2..=4);
    let mut seq = Vec::with_capacity(3 * k + 1);
    for _ in 0..k {
        seq.extend_from_slice(&tags.choose(rng).unwrap().residues);
    }
    seq.push(random_terminus(rng));
    seq
}

#[derive(Clone, Debug, PartialEq)]
pub struct Adjusted {
    pub residues: Vec<AminoAcid>,
    /// False when the sequence was rejected or the iteration cap was hit.
    pub within_bound: bool,
}

/// Largest |Δmass| a finished candidate may have: the lightest residue plus
/// the tolerance.
pub fn mass_bound(scorer: &Scorer<'_>) -> f64 {
    scorer.masses().lightest() + scorer.tolerance()
}

/// Inserts residues into, or removes them from, the interior of `seq` until
/// its parent mass is within [`mass_bound`] of the precursor. The final
/// residue is never touched.
pub fn adjust_mass<R: Rng + ?Sized>(
    mut seq: Vec<AminoAcid>,
    scorer: &Scorer<'_>,
    rng: &mut R,
) -> Adjusted {
    let bound = mass_bound(scorer);
    let tau = scorer.tolerance();
    let masses = scorer.masses();
    let lightest = AminoAcid::CANONICAL
        .iter()
        .copied()
        .min_by(|a, b| masses.mass(*a).total_cmp(&masses.mass(*b)))
        .unwrap();

    for _ in 0..MAX_ADJUST_ITERATIONS {
        if seq.len() < 2 {
            break;
        }
        let delta = scorer.delta_mass(&seq);
        if delta.abs() < bound {
            return Adjusted {
                residues: seq,
                within_bound: true,
            };
        }
        if delta > 0.0 {
            if seq.len() >= MAX_PEPTIDE_LEN {
                break;
            }
            let fitting: Vec<AminoAcid> = AminoAcid::CANONICAL
                .iter()
                .copied()
                .filter(|&aa| masses.mass(aa) <= delta + tau)
                .collect();
            let aa = fitting.choose(rng).copied().unwrap_or(lightest);
            let pos = rng.gen_range(0..seq.len());
            seq.insert(pos, aa);
        } else {
            if seq.len() <= 2 {
                break;
            }
            let pos = rng.gen_range(0..seq.len() - 1);
            seq.remove(pos);
        }
    }
    let within_bound = seq.len() >= 2 && scorer.delta_mass(&seq).abs() < bound;
    Adjusted {
        residues: seq,
        within_bound,
    }
}

#[derive(Clone, Debug)]
pub struct InitPool {
    pub candidates: Vec<Individual>,
    pub attempts: usize,
    /// Number of tags the pool was seeded from; zero means random fallback.
    pub tag_count: usize,
}

impl InitPool {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

fn finish_candidate(residues: Vec<AminoAcid>, scorer: &Scorer<'_>) -> Option<Individual> {
    let peptide = Peptide::new(residues).ok()?;
    if peptide.len() < 2 || !peptide.is_tryptic() {
        return None;
    }
    Individual::evaluate(peptide, scorer).ok()
}

/// Builds up to `pool_size` scored candidates from the tags of the scorer's
/// spectrum. Gives up after `50 * pool_size` attempts and returns what it has.
pub fn build_init_pool<R: Rng + ?Sized>(
    scorer: &Scorer<'_>,
    pool_size: usize,
    rng: &mut R,
) -> InitPool {
    let tags = extract_tags_with(scorer.spectrum(), scorer.tolerance(), scorer.masses());
    if tags.is_empty() && pool_size > 0 {
        warn!(
            "spectrum {:?}: no tags found, seeding with random sequences",
            scorer.spectrum().id()
        );
    }
    let mut candidates = Vec::with_capacity(pool_size);
    let max_attempts = POOL_ATTEMPTS_PER_SLOT * pool_size;
    let mut attempts = 0;
    while candidates.len() < pool_size && attempts < max_attempts {
        attempts += 1;
        let seq = random_sequence_from_tags(&tags, rng);
        let adjusted = adjust_mass(seq, scorer, rng);
        if !adjusted.within_bound {
            continue;
        }
        if let Some(ind) = finish_candidate(adjusted.residues, scorer) {
            candidates.push(ind);
        }
    }
    if candidates.len() < pool_size {
        warn!(
            "spectrum {:?}: initialisation pool has {} of {} candidates after {} attempts",
            scorer.spectrum().id(),
            candidates.len(),
            pool_size,
            attempts
        );
    }
    InitPool {
        candidates,
        attempts,
        tag_count: tags.len(),
    }
}

/// Baseline pool with one random tryptic sequence per entry of `lengths`
/// and no mass adjustment.
pub fn random_init_pool<R: Rng + ?Sized>(
    scorer: &Scorer<'_>,
    lengths: &[usize],
    rng: &mut R,
) -> InitPool {
    let candidates = lengths
        .iter()
        .filter_map(|&len| finish_candidate(random_tryptic_of_len(len.max(2), rng), scorer))
        .collect();
    InitPool {
        candidates,
        attempts: lengths.len(),
        tag_count: 0,
    }
}
