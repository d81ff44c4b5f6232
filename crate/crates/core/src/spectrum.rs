//! Spectrum model, MGF reading/writing and the preprocessing pipeline
//! (windowed noise filtering, windowed sqrt normalization, complementary
//! peak augmentation).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::warn;

use crate::chem::{precursor_mass, PROTON_MASS};
use crate::error::{Error, Result};

/// Peaks closer than this are merged into one.
pub const MERGE_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub mz: f64,
    pub intensity: f64,
    /// Set on complementary peaks added during preprocessing.
    pub synthetic: bool,
}

impl Peak {
    pub fn new(mz: f64, intensity: f64) -> Self {
        Peak {
            mz,
            intensity,
            synthetic: false,
        }
    }
}

/// An MS/MS spectrum. Peaks are strictly increasing in m/z.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    id: String,
    pepmass: f64,
    charge: u32,
    precursor_mass: f64,
    peaks: Vec<Peak>,
}

impl Spectrum {
    pub fn new(id: impl Into<String>, pepmass: f64, charge: u32, peaks: Vec<Peak>) -> Result<Self> {
        let precursor_mass = precursor_mass(pepmass, charge)?;
        for p in &peaks {
            if !(p.mz > 0.0) || !p.mz.is_finite() {
                return Err(Error::InvalidSpectrum(format!("peak m/z {} is not positive", p.mz)));
            }
            if !(p.intensity >= 0.0) || !p.intensity.is_finite() {
                return Err(Error::InvalidSpectrum(format!(
                    "peak intensity {} is negative",
                    p.intensity
                )));
            }
        }
        Ok(Spectrum {
            id: id.into(),
            pepmass,
            charge,
            precursor_mass,
            peaks: sort_and_merge(peaks),
        })
    }

    /// Same metadata, new peak list. Peaks must already be valid.
    fn with_peaks(&self, peaks: Vec<Peak>) -> Self {
        Spectrum {
            id: self.id.clone(),
            pepmass: self.pepmass,
            charge: self.charge,
            precursor_mass: self.precursor_mass,
            peaks: sort_and_merge(peaks),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn pepmass(&self) -> f64 {
        self.pepmass
    }

    pub fn charge(&self) -> u32 {
        self.charge
    }

    pub fn precursor_mass(&self) -> f64 {
        self.precursor_mass
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn total_intensity(&self) -> f64 {
        self.peaks.iter().map(|p| p.intensity).sum()
    }

    /// Index of the peak nearest to `mz` if it lies within `tolerance`.
    /// Ties go to the lower m/z.
    pub fn nearest_peak(&self, mz: f64, tolerance: f64) -> Option<usize> {
        let i = self.peaks.partition_point(|p| p.mz < mz);
        let below = i.checked_sub(1).map(|j| (j, mz - self.peaks[j].mz));
        let above = self.peaks.get(i).map(|p| (i, p.mz - mz));
        let best = match (below, above) {
            (Some(b), Some(a)) => {
                if a.1 < b.1 {
                    a
                } else {
                    b
                }
            }
            (Some(b), None) => b,
            (None, Some(a)) => a,
            (None, None) => return None,
        };
        (best.1 <= tolerance).then_some(best.0)
    }

    /// The m/z a peak's complementary fragment would have: b- and y-ions of
    /// one cleavage sum to the precursor mass plus two protons.
    pub fn complement_mz(&self, mz: f64) -> f64 {
        self.precursor_mass + 2.0 * PROTON_MASS - mz
    }
}

fn sort_and_merge(mut peaks: Vec<Peak>) -> Vec<Peak> {
    peaks.sort_by(|a, b| a.mz.total_cmp(&b.mz));
    let mut merged: Vec<Peak> = Vec::with_capacity(peaks.len());
    for p in peaks {
        match merged.last_mut() {
            Some(last) if p.mz - last.mz < MERGE_TOLERANCE => {
                if p.intensity > last.intensity {
                    last.intensity = p.intensity;
                    last.mz = p.mz;
                }
                last.synthetic &= p.synthetic;
            }
            _ => merged.push(p),
        }
    }
    merged
}

// ---------------------------------------------------------------------------
// MGF

/// Parses MGF text. Records without peaks are skipped with a warning.
pub fn parse_mgf<R: BufRead>(reader: R) -> Result<Vec<Spectrum>> {
    struct Record {
        start: usize,
        title: Option<String>,
        pepmass: Option<f64>,
        charge: Option<u32>,
        peaks: Vec<Peak>,
    }

    let mut spectra = Vec::new();
    let mut global_charge: Option<u32> = None;
    let mut current: Option<Record> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with(['#', ';', '!', '/']) {
            continue;
        }

        if line == "BEGIN IONS" {
            if current.is_some() {
                return Err(Error::parse(line_no, "BEGIN IONS inside an open record"));
            }
            current = Some(Record {
                start: line_no,
                title: None,
                pepmass: None,
                charge: None,
                peaks: Vec::new(),
            });
            continue;
        }

        if line == "END IONS" {
            let rec = current
                .take()
                .ok_or_else(|| Error::parse(line_no, "END IONS without BEGIN IONS"))?;
            let title = rec.title.unwrap_or_else(|| format!("record_{}", rec.start));
            let pepmass = rec
                .pepmass
                .ok_or_else(|| Error::parse(line_no, format!("record {title:?} has no PEPMASS")))?;
            let charge = rec.charge.or(global_charge).ok_or_else(|| {
                Error::parse(line_no, format!("record {title:?} has no CHARGE"))
            })?;
            if rec.peaks.is_empty() {
                warn!("skipping MGF record {title:?} (line {}): no peaks", rec.start);
                continue;
            }
            let spectrum = Spectrum::new(title, pepmass, charge, rec.peaks)
                .map_err(|e| Error::parse(line_no, e.to_string()))?;
            spectra.push(spectrum);
            continue;
        }

        if let Some((key, value)) = line.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            let value = value.trim();
            match current.as_mut() {
                Some(rec) => match key.as_str() {
                    "TITLE" => rec.title = Some(value.to_string()),
                    "PEPMASS" => rec.pepmass = Some(parse_pepmass(value, line_no)?),
                    "CHARGE" => rec.charge = Some(parse_charge(value, line_no)?),
                    _ => {}
                },
                None => {
                    if key == "CHARGE" {
                        global_charge = Some(parse_charge(value, line_no)?);
                    }
                }
            }
            continue;
        }

        let Some(rec) = current.as_mut() else {
            return Err(Error::parse(line_no, format!("unexpected line outside a record: {line:?}")));
        };
        let mut fields = line.split_whitespace();
        let mz = fields.next().map(str::parse::<f64>);
        let intensity = fields.next().map(str::parse::<f64>);
        match (mz, intensity) {
            (Some(Ok(mz)), Some(Ok(intensity))) => {
                if !(mz > 0.0) || !(intensity >= 0.0) || !mz.is_finite() || !intensity.is_finite() {
                    return Err(Error::parse(line_no, format!("invalid peak {line:?}")));
                }
                rec.peaks.push(Peak::new(mz, intensity));
            }
            _ => return Err(Error::parse(line_no, format!("malformed peak line {line:?}"))),
        }
    }

    if let Some(rec) = current {
        return Err(Error::parse(rec.start, "record is missing END IONS"));
    }
    Ok(spectra)
}

pub fn parse_mgf_str(text: &str) -> Result<Vec<Spectrum>> {
    parse_mgf(text.as_bytes())
}

pub fn read_mgf_file(path: impl AsRef<Path>) -> Result<Vec<Spectrum>> {
    parse_mgf(BufReader::new(File::open(path)?))
}

fn parse_pepmass(value: &str, line: usize) -> Result<f64> {
    let first = value.split_whitespace().next().unwrap_or("");
    match first.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("invalid PEPMASS {value:?}"))),
    }
}

/// Accepts `2+`, `+2` and `2`. Lists such as `2+ and 3+` or `2+,3+` yield
/// the first charge.
fn parse_charge(value: &str, line: usize) -> Result<u32> {
    let bad = || Error::parse(line, format!("invalid CHARGE {value:?}"));
    let first = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .find(|t| !t.is_empty())
        .ok_or_else(bad)?;
    if first.contains('-') {
        return Err(bad());
    }
    let digits = first.trim_matches('+');
    match digits.parse::<u32>() {
        Ok(z) if z >= 1 => Ok(z),
        _ => Err(bad()),
    }
}

/// Writes spectra as MGF. The synthetic flag has no MGF field and is dropped.
pub fn emit_mgf<W: Write>(spectra: &[Spectrum], mut out: W) -> std::io::Result<()> {
    for s in spectra {
        writeln!(out, "BEGIN IONS")?;
        writeln!(out, "TITLE={}", s.id)?;
        writeln!(out, "PEPMASS={}", s.pepmass)?;
        writeln!(out, "CHARGE={}+", s.charge)?;
        for p in &s.peaks {
            writeln!(out, "{} {}", p.mz, p.intensity)?;
        }
        writeln!(out, "END IONS")?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn emit_mgf_string(spectra: &[Spectrum]) -> String {
    let mut buf = Vec::new();
    emit_mgf(spectra, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("MGF output is UTF-8")
}

// ---------------------------------------------------------------------------
// Preprocessing

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    pub window_count: usize,
    pub max_peaks_per_window: usize,
    /// Fragment tolerance in Da.
    pub tolerance: f64,
    pub add_complements: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            window_count: 10,
            max_peaks_per_window: 9,
            tolerance: 0.5,
            add_complements: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_count == 0 {
            return Err(Error::InvalidArgument("window_count must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Splits peak indices into `count` equal-width windows over the m/z range.
/// Windows are left-closed; the last one is also right-closed.
fn windows(peaks: &[Peak], count: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); count.max(1)];
    let (Some(first), Some(last)) = (peaks.first(), peaks.last()) else {
        return out;
    };
    let (lo, hi) = (first.mz, last.mz);
    let width = (hi - lo) / count as f64;
    for (i, p) in peaks.iter().enumerate() {
        let w = if width > 0.0 {
            (((p.mz - lo) / width) as usize).min(count - 1)
        } else {
            0
        };
        out[w].push(i);
    }
    out
}

fn intensity_bucket(intensity: f64) -> i64 {
    (intensity * 100.0).round() as i64
}

/// Most frequent intensity bucket (two decimals); ties go to the lowest.
fn modal_bucket(intensities: impl Iterator<Item = f64>) -> Option<i64> {
    let mut counts: HashMap<i64, usize> = HashMap::new();
    for i in intensities {
        *counts.entry(intensity_bucket(i)).or_default() += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(bucket, _)| bucket)
}

/// Removes, in every crowded window, the peaks below the modal intensity.
pub fn denoise(s: &Spectrum, cfg: &PreprocessConfig) -> Spectrum {
    let mut keep = vec![true; s.peaks.len()];
    for window in windows(&s.peaks, cfg.window_count) {
        if window.len() <= cfg.max_peaks_per_window {
            continue;
        }
        let Some(threshold) = modal_bucket(window.iter().map(|&i| s.peaks[i].intensity)) else {
            continue;
        };
        for &i in &window {
            if intensity_bucket(s.peaks[i].intensity) < threshold {
                keep[i] = false;
            }
        }
    }
    let peaks = s
        .peaks
        .iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect();
    s.with_peaks(peaks)
}

/// Square-roots intensities and scales each window to a maximum of 1.
/// Zero-intensity peaks carry no signal and are dropped.
pub fn normalize(s: &Spectrum, cfg: &PreprocessConfig) -> Spectrum {
    let mut peaks = s.peaks.clone();
    for window in windows(&s.peaks, cfg.window_count) {
        let max = window
            .iter()
            .map(|&i| peaks[i].intensity.sqrt())
            .fold(0.0, f64::max);
        for &i in &window {
            peaks[i].intensity = if max > 0.0 {
                peaks[i].intensity.sqrt() / max
            } else {
                0.0
            };
        }
    }
    peaks.retain(|p| p.intensity > 0.0);
    s.with_peaks(peaks)
}

/// Adds a synthetic complementary peak for every peak whose complement is
/// missing. The new peak copies the source intensity.
pub fn add_complements(s: &Spectrum, cfg: &PreprocessConfig) -> Spectrum {
    let tau = cfg.tolerance;
    let mut added: Vec<Peak> = Vec::new();
    for p in &s.peaks {
        let c = s.complement_mz(p.mz);
        if c <= 0.0 {
            continue;
        }
        if s.nearest_peak(c, tau).is_some() || added.iter().any(|q| (q.mz - c).abs() <= tau) {
            continue;
        }
        added.push(Peak {
            mz: c,
            intensity: p.intensity,
            synthetic: true,
        });
    }
    if added.is_empty() {
        return s.clone();
    }
    let mut peaks = s.peaks.clone();
    peaks.extend(added);
    s.with_peaks(peaks)
}

/// Denoise, normalize, then (unless disabled) add complementary peaks.
pub fn preprocess(s: &Spectrum, cfg: &PreprocessConfig) -> Spectrum {
    let s = normalize(&denoise(s, cfg), cfg);
    if cfg.add_complements {
        add_complements(&s, cfg)
    } else {
        s
    }
}
