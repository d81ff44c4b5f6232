//! Batch commands behind the `denovo-ga` binary.
//!
//! Settings resolve as built-in defaults, then an optional `key=value`
//! config file, then command-line flags. Every command is deterministic for
//! a fixed seed and input.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chem::Peptide;
use crate::engine::{evolve_with, run_rng, EvolutionResult, GaConfig, OperatorRates};
use crate::error::{Error, Result};
use crate::eval::{aggregate_runs, compute_metrics, read_ground_truth, synthesize_spectrum, Metrics, PsmPair, SynthConfig};
use crate::spectrum::{emit_mgf, preprocess, read_mgf_file, PreprocessConfig, Spectrum};
use crate::tags::extract_tags;
use crate::theo::Scorer;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Exit status for an error returned by one of the commands.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Optional settings from one source. Later sources win in [`Overrides::merge`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub generations: Option<usize>,
    pub population: Option<usize>,
    pub pool_size: Option<usize>,
    pub tournament: Option<usize>,
    pub tau: Option<f64>,
    pub rates: Option<OperatorRates>,
    pub jobs: Option<usize>,
    pub no_complements: Option<bool>,
    pub dropout: Option<f64>,
    pub noise: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value {value:?} for {key}")))
}

/// Parses `nterm_cterm,two_point,flip,conflict`.
pub fn parse_rates(text: &str) -> Result<OperatorRates> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| parse_value("rates", p))
        .collect::<Result<_>>()?;
    let [nterm_cterm, two_point, flip, conflict] = parts[..] else {
        return Err(Error::InvalidArgument(format!(
            "rates needs 4 comma-separated values, got {}",
            parts.len()
        )));
    };
    Ok(OperatorRates {
        nterm_cterm,
        two_point,
        flip,
        conflict,
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidArgument(format!("bad value {value:?} for {key}"))),
    }
}

impl Overrides {
    /// Parses a config file: one `key=value` per line, `#` comments. Keys use
    /// the flag names with either `-` or `_`.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut o = Overrides::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidArgument(format!(
                    "config line {}: expected key=value",
                    idx + 1
                )));
            };
            let key = key.trim().replace('-', "_");
            match key.as_str() {
                "seed" => o.seed = Some(parse_value(&key, value)?),
                "runs" => o.runs = Some(parse_value(&key, value)?),
                "generations" => o.generations = Some(parse_value(&key, value)?),
                "population" => o.population = Some(parse_value(&key, value)?),
                "pool_size" => o.pool_size = Some(parse_value(&key, value)?),
                "tournament" => o.tournament = Some(parse_value(&key, value)?),
                "tau" => o.tau = Some(parse_value(&key, value)?),
                "rates" => o.rates = Some(parse_rates(value)?),
                "jobs" => o.jobs = Some(parse_value(&key, value)?),
                "no_complements" => o.no_complements = Some(parse_bool(&key, value)?),
                "dropout" => o.dropout = Some(parse_value(&key, value)?),
                "noise" => o.noise = Some(parse_value(&key, value)?),
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "config line {}: unknown key {key:?}",
                        idx + 1
                    )))
                }
            }
        }
        Ok(o)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_config_str(&fs::read_to_string(path)?)
    }

    /// Fields set in `higher` replace those in `self`.
    pub fn merge(self, higher: Overrides) -> Overrides {
        Overrides {
            seed: higher.seed.or(self.seed),
            runs: higher.runs.or(self.runs),
            generations: higher.generations.or(self.generations),
            population: higher.population.or(self.population),
            pool_size: higher.pool_size.or(self.pool_size),
            tournament: higher.tournament.or(self.tournament),
            tau: higher.tau.or(self.tau),
            rates: higher.rates.or(self.rates),
            jobs: higher.jobs.or(self.jobs),
            no_complements: higher.no_complements.or(self.no_complements),
            dropout: higher.dropout.or(self.dropout),
            noise: higher.noise.or(self.noise),
        }
    }

    pub fn ga_config(&self) -> GaConfig {
        let mut cfg = GaConfig::default();
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.generations {
            cfg.generations = v;
        }
        if let Some(v) = self.population {
            cfg.population = v;
        }
        if let Some(v) = self.pool_size {
            cfg.pool_size = v;
        }
        if let Some(v) = self.tournament {
            cfg.tournament_k = v;
        }
        if let Some(v) = self.tau {
            cfg.tolerance = v;
        }
        if let Some(v) = self.rates {
            cfg.rates = v;
        }
        cfg
    }

    pub fn preprocess_config(&self) -> PreprocessConfig {
        PreprocessConfig {
            tolerance: self.tau.unwrap_or(0.5),
            add_complements: !self.no_complements.unwrap_or(false),
            ..PreprocessConfig::default()
        }
    }

    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            noise_peaks: self.noise.unwrap_or(0),
            dropout: self.dropout.unwrap_or(0.0),
            tolerance: self.tau.unwrap_or(0.5),
            ..SynthConfig::default()
        }
    }

    pub fn sequence_options(&self) -> SequenceOptions {
        SequenceOptions {
            ga: self.ga_config(),
            preprocess: Some(self.preprocess_config()),
            runs: self.runs.unwrap_or(1),
            jobs: self.jobs.unwrap_or(0),
        }
    }
}

// ---------------------------------------------------------------------------
// preprocess

/// Preprocesses every record of `input`, writes MGF to `out` and one
/// `id<TAB>before<TAB>after<TAB>delta` line per record to `report`.
pub fn cmd_preprocess<W: Write, E: Write>(
    input: &Path,
    cfg: &PreprocessConfig,
    mut out: W,
    mut report: E,
) -> Result<Vec<Spectrum>> {
    cfg.validate()?;
    let spectra = read_mgf_file(input)?;
    let processed: Vec<Spectrum> = spectra.iter().map(|s| preprocess(s, cfg)).collect();
    for (before, after) in spectra.iter().zip(&processed) {
        let delta = after.len() as i64 - before.len() as i64;
        writeln!(report, "{}\t{}\t{}\t{:+}", before.id(), before.len(), after.len(), delta)?;
    }
    emit_mgf(&processed, &mut out)?;
    Ok(processed)
}

// ---------------------------------------------------------------------------
// sequence

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceOptions {
    pub ga: GaConfig,
    /// `None` runs the GA on the spectra as given.
    pub preprocess: Option<PreprocessConfig>,
    pub runs: usize,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        SequenceOptions {
            ga: GaConfig::default(),
            preprocess: Some(PreprocessConfig::default()),
            runs: 1,
            jobs: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub spectrum_id: String,
    pub spectrum_index: usize,
    pub run_index: usize,
    pub result: EvolutionResult,
}

/// Runs the GA `opts.runs` times on every spectrum. Records come back in
/// (spectrum, run) order. Spectra that fail are logged and skipped.
pub fn sequence_spectra(spectra: &[Spectrum], opts: &SequenceOptions) -> Result<Vec<RunRecord>> {
    opts.ga.validate()?;
    if opts.runs == 0 {
        return Err(Error::InvalidArgument("runs must be at least 1".into()));
    }
    let prepared: Vec<Spectrum> = match &opts.preprocess {
        Some(cfg) => {
            cfg.validate()?;
            spectra.iter().map(|s| preprocess(s, cfg)).collect()
        }
        None => spectra.to_vec(),
    };
    let jobs: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|s| (0..opts.runs).map(move |r| (s, r)))
        .collect();
    let run = |&(s, r): &(usize, usize)| -> Result<RunRecord> {
        let spectrum = &prepared[s];
        let scorer = Scorer::new(spectrum, opts.ga.tolerance)?;
        let mut rng = run_rng(opts.ga.seed, s, r);
        let result = evolve_with(&scorer, &opts.ga, &mut rng)?;
        Ok(RunRecord {
            spectrum_id: spectrum.id().to_string(),
            spectrum_index: s,
            run_index: r,
            result,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start workers: {e}")))?;
    let outcomes: Vec<Result<RunRecord>> = pool.install(|| jobs.par_iter().map(run).collect());

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failed = 0;
    for ((s, r), outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failed += 1;
                warn!("spectrum {} run {r}: {e}", prepared[*s].id());
            }
        }
    }
    if records.is_empty() && failed > 0 {
        return Err(Error::InvalidSpectrum(format!("all {failed} runs failed")));
    }
    Ok(records)
}

pub fn write_results<W: Write>(records: &[RunRecord], mut out: W) -> Result<()> {
    writeln!(
        out,
        "spectrum_id\trun_index\tpredicted_peptide\tfitness\tnterm\tcterm\tdelta_mass_da\tgenerations_used"
    )?;
    for rec in records {
        let best = &rec.result.best;
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{}\t{}\t{:.6}\t{}",
            rec.spectrum_id,
            rec.run_index,
            best.peptide,
            best.fitness(),
            best.nterm(),
            best.cterm(),
            best.delta_mass(),
            rec.result.generations_used
        )?;
    }
    Ok(())
}

pub fn cmd_sequence<W: Write>(input: &Path, opts: &SequenceOptions, out: W) -> Result<Vec<RunRecord>> {
    let spectra = read_mgf_file(input)?;
    info!("{} spectra, {} runs each", spectra.len(), opts.runs);
    let records = sequence_spectra(&spectra, opts)?;
    write_results(&records, out)?;
    Ok(records)
}

// ---------------------------------------------------------------------------
// evaluate

/// One prediction row from a `sequence` results file.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub spectrum_id: String,
    pub run_index: usize,
    pub peptide: Option<Peptide>,
}

/// Reads the `spectrum_id`, `run_index` and `predicted_peptide` columns of a
/// results TSV. An empty peptide cell means no prediction.
pub fn read_results<R: BufRead>(reader: R) -> Result<Vec<Prediction>> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::EmptyResults),
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() && !line.starts_with('#') {
                    break line;
                }
            }
        }
    };
    let cols: Vec<&str> = header.split('\t').collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| c.trim() == name)
            .ok_or_else(|| Error::parse(1, format!("missing column {name}")))
    };
    let (id_col, run_col, pep_col) = (find("spectrum_id")?, find("run_index")?, find("predicted_peptide")?);

    let mut out = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        let cell = |i: usize| cells.get(i).map(|c| c.trim()).unwrap_or("");
        let run_index = cell(run_col)
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad run_index {:?}", cell(run_col))))?;
        let peptide = match cell(pep_col) {
            "" | "-" => None,
            text => Some(
                text.parse()
                    .map_err(|e: Error| Error::parse(line_no, e.to_string()))?,
            ),
        };
        out.push(Prediction {
            spectrum_id: cell(id_col).to_string(),
            run_index,
            peptide,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyResults);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    /// Metrics per run index, ascending.
    pub runs: Vec<(usize, Metrics)>,
    pub mean: Metrics,
    pub std: Metrics,
}

/// Scores every run against the truth set. Truth spectra without a
/// prediction in a run count as empty predictions; predictions for unknown
/// spectra are ignored with a warning.
pub fn evaluate_predictions(
    predictions: &[Prediction],
    truth: &[crate::eval::GroundTruthRecord],
    tolerance: f64,
) -> Result<Evaluation> {
    if predictions.is_empty() || truth.is_empty() {
        return Err(Error::EmptyResults);
    }
    let known: HashMap<&str, ()> = truth.iter().map(|t| (t.spectrum_id.as_str(), ())).collect();
    let mut by_run: BTreeMap<usize, HashMap<&str, Option<&Peptide>>> = BTreeMap::new();
    for p in predictions {
        if !known.contains_key(p.spectrum_id.as_str()) {
            warn!("prediction for unknown spectrum {:?} ignored", p.spectrum_id);
        }
        by_run
            .entry(p.run_index)
            .or_default()
            .insert(p.spectrum_id.as_str(), p.peptide.as_ref());
    }
    let mut runs = Vec::new();
    for (&run, preds) in &by_run {
        let pairs: Vec<PsmPair> = truth
            .iter()
            .map(|t| PsmPair {
                predicted: preds.get(t.spectrum_id.as_str()).copied().flatten().cloned(),
                truth: t.peptide.clone(),
            })
            .collect();
        runs.push((run, compute_metrics(&pairs, tolerance)?));
    }
    let metrics: Vec<Metrics> = runs.iter().map(|(_, m)| *m).collect();
    let agg = aggregate_runs(&metrics)?;
    Ok(Evaluation {
        runs,
        mean: agg.mean,
        std: agg.std,
    })
}

pub fn write_evaluation<W: Write>(eval: &Evaluation, mut out: W) -> Result<()> {
    writeln!(out, "# spectra without a prediction count as empty predictions")?;
    writeln!(
        out,
        "run\tprecision\trecall\tpeptide_recall\tavg_len_partial_matches\tavg_len_predicted\tn_spectra\t\
         precision_sd\trecall_sd\tpeptide_recall_sd\tavg_len_partial_matches_sd\tavg_len_predicted_sd"
    )?;
    let row = |m: &Metrics| {
        format!(
            "{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{}",
            m.precision, m.recall, m.peptide_recall, m.avg_len_partial_matches, m.avg_len_predicted, m.n_spectra
        )
    };
    for (run, m) in &eval.runs {
        writeln!(out, "{run}\t{}\t\t\t\t\t", row(m))?;
    }
    let s = &eval.std;
    writeln!(
        out,
        "mean\t{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\t{:.6}",
        row(&eval.mean),
        s.precision,
        s.recall,
        s.peptide_recall,
        s.avg_len_partial_matches,
        s.avg_len_predicted
    )?;
    Ok(())
}

pub fn cmd_evaluate<W: Write>(results: &Path, truth: &Path, tolerance: f64, out: W) -> Result<Evaluation> {
    let predictions = read_results(BufReader::new(fs::File::open(results)?))?;
    let truth = read_ground_truth(BufReader::new(fs::File::open(truth)?))?;
    let eval = evaluate_predictions(&predictions, &truth, tolerance)?;
    write_evaluation(&eval, out)?;
    Ok(eval)
}

// ---------------------------------------------------------------------------
// synth

/// Reads one peptide per line; blank lines and `#` comments are skipped.
pub fn read_peptides<R: BufRead>(reader: R) -> Result<Vec<Peptide>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        out.push(
            text.parse()
                .map_err(|e: Error| Error::parse(idx + 1, e.to_string()))?,
        );
    }
    Ok(out)
}

/// Synthesizes one spectrum per peptide, titled `synth_1`, `synth_2`, ...
pub fn synthesize_all(peptides: &[Peptide], cfg: &SynthConfig, seed: u64) -> Result<Vec<Spectrum>> {
    peptides
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            synthesize_spectrum(p, cfg, &format!("synth_{}", i + 1), &mut rng)
        })
        .collect()
}

pub fn write_ground_truth<W: Write>(spectra: &[Spectrum], peptides: &[Peptide], mut out: W) -> Result<()> {
    writeln!(out, "spectrum_id\tpeptide")?;
    for (s, p) in spectra.iter().zip(peptides) {
        writeln!(out, "{}\t{}", s.id(), p)?;
    }
    Ok(())
}

pub fn cmd_synth<M: Write, T: Write>(
    peptides: &Path,
    cfg: &SynthConfig,
    seed: u64,
    mgf_out: M,
    truth_out: T,
) -> Result<Vec<Spectrum>> {
    let peptides = read_peptides(BufReader::new(fs::File::open(peptides)?))?;
    let spectra = synthesize_all(&peptides, cfg, seed)?;
    emit_mgf(&spectra, mgf_out)?;
    write_ground_truth(&spectra, &peptides, truth_out)?;
    Ok(spectra)
}

// ---------------------------------------------------------------------------
// tags

/// Writes the tags of each record (as given, not preprocessed) sorted by
/// start m/z then residues. Returns the number of rows.
pub fn cmd_tags<W: Write>(input: &Path, tolerance: f64, mut out: W) -> Result<usize> {
    if !(tolerance > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let spectra = read_mgf_file(input)?;
    writeln!(out, "spectrum_id\tstart_mz\tresidues\tpeak_indices")?;
    let mut rows = 0;
    for s in &spectra {
        let mut tags = extract_tags(s, tolerance);
        tags.sort_by(|a, b| {
            a.start_mz
                .total_cmp(&b.start_mz)
                .then_with(|| a.residues.cmp(&b.residues))
        });
        for t in &tags {
            let idx: Vec<String> = t.peak_indices.iter().map(|i| i.to_string()).collect();
            writeln!(out, "{}\t{:.4}\t{}\t{}", s.id(), t.start_mz, t.sequence(), idx.join(","))?;
            rows += 1;
        }
    }
    Ok(rows)
}
