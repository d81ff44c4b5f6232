//! Residue masses, peptide mass arithmetic and the conflict-mass dictionary.
//!
//! All masses are monoisotopic and in daltons. Isoleucine and leucine share a
//! mass and are treated as one residue: peptides canonicalize `I` to `L` when
//! parsed.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Monoisotopic mass of water.
pub const WATER_MASS: f64 = 18.010_564_686_3;
/// Mass of a proton.
pub const PROTON_MASS: f64 = 1.007_276_47;
/// Longest peptide accepted anywhere in the pipeline.
pub const MAX_PEPTIDE_LEN: usize = 64;

/// One of the twenty standard amino acids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AminoAcid {
    Ala,
    Cys,
    Asp,
    Glu,
    Phe,
    Gly,
    His,
    Ile,
    Lys,
    Leu,
    Met,
    Asn,
    Pro,
    Gln,
    Arg,
    Ser,
    Thr,
    Val,
    Trp,
    Tyr,
}

use AminoAcid::*;

impl AminoAcid {
    /// All twenty residues in alphabetical order of their one-letter codes.
    pub const ALL: [AminoAcid; 20] = [
        Ala, Cys, Asp, Glu, Phe, Gly, His, Ile, Lys, Leu, Met, Asn, Pro, Gln, Arg, Ser, Thr, Val,
        Trp, Tyr,
    ];

    /// The nineteen distinguishable residues (`I` folded into `L`).
    pub const CANONICAL: [AminoAcid; 19] = [
        Ala, Cys, Asp, Glu, Phe, Gly, His, Lys, Leu, Met, Asn, Pro, Gln, Arg, Ser, Thr, Val, Trp,
        Tyr,
    ];

    pub fn from_char(symbol: char) -> Result<Self> {
        Ok(match symbol {
            'A' => Ala,
            'C' => Cys,
            'D' => Asp,
            'E' => Glu,
            'F' => Phe,
            'G' => Gly,
            'H' => His,
            'I' => Ile,
            'K' => Lys,
            'L' => Leu,
            'M' => Met,
            'N' => Asn,
            'P' => Pro,
            'Q' => Gln,
            'R' => Arg,
            'S' => Ser,
            'T' => Thr,
            'V' => Val,
            'W' => Trp,
            'Y' => Tyr,
            other => return Err(Error::InvalidResidue(other)),
        })
    }

    pub fn symbol(self) -> char {
        match self {
            Ala => 'A',
            Cys => 'C',
            Asp => 'D',
            Glu => 'E',
            Phe => 'F',
            Gly => 'G',
            His => 'H',
            Ile => 'I',
            Lys => 'K',
            Leu => 'L',
            Met => 'M',
            Asn => 'N',
            Pro => 'P',
            Gln => 'Q',
            Arg => 'R',
            Ser => 'S',
            Thr => 'T',
            Val => 'V',
            Trp => 'W',
            Tyr => 'Y',
        }
    }

    /// Monoisotopic residue mass (free amino acid minus water).
    pub fn mass(self) -> f64 {
        match self {
            Ala => 71.037_113_79,
            Cys => 103.009_184_78,
            Asp => 115.026_943_03,
            Glu => 129.042_593_09,
            Phe => 147.068_413_91,
            Gly => 57.021_463_72,
            His => 137.058_911_86,
            Ile | Leu => 113.084_063_98,
            Lys => 128.094_963_02,
            Met => 131.040_484_91,
            Asn => 114.042_927_44,
            Pro => 97.052_763_85,
            Gln => 128.058_577_51,
            Arg => 156.101_111_03,
            Ser => 87.032_028_41,
            Thr => 101.047_678_47,
            Val => 99.068_413_91,
            Trp => 186.079_312_95,
            Tyr => 163.063_328_53,
        }
    }

    /// `I` maps to `L`; every other residue maps to itself.
    pub fn canonical(self) -> Self {
        if self == Ile {
            Leu
        } else {
            self
        }
    }

    /// True for the residues trypsin cleaves after.
    pub fn is_tryptic_terminus(self) -> bool {
        matches!(self, Lys | Arg)
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Residue mass for a one-letter code.
pub fn residue_mass(symbol: char) -> Result<f64> {
    AminoAcid::from_char(symbol).map(AminoAcid::mass)
}

/// Experimental peptide mass from the precursor ion m/z and charge state.
pub fn precursor_mass(pepmass: f64, charge: u32) -> Result<f64> {
    if !(pepmass > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pepmass must be positive, got {pepmass}"
        )));
    }
    if charge == 0 {
        return Err(Error::InvalidArgument("charge must be at least 1".into()));
    }
    let z = f64::from(charge);
    Ok(pepmass * z - z * PROTON_MASS)
}

/// Residue mass table with optional per-residue offsets, e.g. a fixed
/// cysteine modification. The default table carries no offsets.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidueMasses {
    offsets: [f64; 20],
}

impl Default for ResidueMasses {
    fn default() -> Self {
        Self::standard()
    }
}

impl ResidueMasses {
    pub const fn standard() -> Self {
        ResidueMasses { offsets: [0.0; 20] }
    }

    /// Adds `delta` Da to `aa`. Offsets on `I` and `L` are kept in sync.
    pub fn with_offset(mut self, aa: AminoAcid, delta: f64) -> Self {
        let aa = aa.canonical();
        self.offsets[aa.index()] += delta;
        if aa == Leu {
            self.offsets[Ile.index()] += delta;
        }
        self
    }

    pub fn mass(&self, aa: AminoAcid) -> f64 {
        aa.mass() + self.offsets[aa.index()]
    }

    pub fn is_standard(&self) -> bool {
        self.offsets.iter().all(|&o| o == 0.0)
    }

    /// Sum of residue masses plus water.
    pub fn parent_mass(&self, residues: &[AminoAcid]) -> f64 {
        residues.iter().map(|&aa| self.mass(aa)).sum::<f64>() + WATER_MASS
    }

    /// Lightest residue of the canonical alphabet under this table.
    pub fn lightest(&self) -> f64 {
        AminoAcid::CANONICAL
            .iter()
            .map(|&aa| self.mass(aa))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A non-empty residue sequence, `I` canonicalized to `L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Peptide(Vec<AminoAcid>);

impl Peptide {
    pub fn new(residues: Vec<AminoAcid>) -> Result<Self> {
        if residues.is_empty() {
            return Err(Error::InvalidPeptide("empty sequence".into()));
        }
        if residues.len() > MAX_PEPTIDE_LEN {
            return Err(Error::InvalidPeptide(format!(
                "length {} exceeds {MAX_PEPTIDE_LEN}",
                residues.len()
            )));
        }
        Ok(Peptide(residues.into_iter().map(AminoAcid::canonical).collect()))
    }

    pub fn residues(&self) -> &[AminoAcid] {
        &self.0
    }

    pub fn into_residues(self) -> Vec<AminoAcid> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> AminoAcid {
        self.0[self.0.len() - 1]
    }

    /// True if the peptide ends in `K` or `R`.
    pub fn is_tryptic(&self) -> bool {
        self.last().is_tryptic_terminus()
    }

    pub fn parent_mass(&self) -> f64 {
        ResidueMasses::standard().parent_mass(&self.0)
    }
}

impl FromStr for Peptide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let residues = s
            .trim()
            .chars()
            .map(AminoAcid::from_char)
            .collect::<Result<Vec<_>>>()?;
        Peptide::new(residues)
    }
}

impl fmt::Display for Peptide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for aa in &self.0 {
            write!(f, "{}", aa.symbol())?;
        }
        Ok(())
    }
}

/// Parent mass of a peptide given as a string of one-letter codes.
pub fn parent_mass(peptide: &str) -> Result<f64> {
    peptide.parse::<Peptide>().map(|p| p.parent_mass())
}

/// Single residues whose mass collides (at nominal precision) with a
/// di-peptide, and the di-peptides they can be swapped for.
pub fn conflict_replacements(aa: AminoAcid) -> &'static [[AminoAcid; 2]] {
    const TRP: &[[AminoAcid; 2]] = &[
        [Asp, Ala],
        [Ala, Asp],
        [Glu, Gly],
        [Gly, Glu],
        [Val, Ser],
        [Ser, Val],
    ];
    const ARG: &[[AminoAcid; 2]] = &[[Val, Gly], [Gly, Val]];
    const GLN: &[[AminoAcid; 2]] = &[[Ala, Gly], [Gly, Ala]];
    const ASN: &[[AminoAcid; 2]] = &[[Gly, Gly]];
    match aa {
        Trp => TRP,
        Arg => ARG,
        Gln => GLN,
        Asn => ASN,
        _ => &[],
    }
}

/// The residues that have an entry in the conflict dictionary.
pub const CONFLICT_RESIDUES: [AminoAcid; 4] = [Trp, Arg, Gln, Asn];
