//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use denovo_ga::chem::{conflict_replacements, AminoAcid, Peptide, PROTON_MASS, WATER_MASS};
use denovo_ga::cli::{cmd_sequence, synthesize_all, SequenceOptions};
use denovo_ga::engine::{
    conflict_mass_mutation, evolve_with, nterm_cterm_crossover, run_rng, GaConfig, GenerationStats, Individual,
};
use denovo_ga::eval::{
    compute_metrics, random_tryptic_peptide, synthesize_spectrum, IntensityProfile, PsmPair, SynthConfig,
};
use denovo_ga::spectrum::{emit_mgf, preprocess, Peak, PreprocessConfig, Spectrum};
use denovo_ga::tags::{build_init_pool, extract_tags, random_init_pool, InitPool, Tag};
use denovo_ga::theo::{combine_fitness, theoretical_spectrum, Scorer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const TAU: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn pep(s: &str) -> Peptide {
    s.parse().unwrap()
}

fn clean_spectrum(p: &Peptide, id: &str) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = synthesize_spectrum(p, &SynthConfig::default(), id, &mut rng).unwrap();
    preprocess(&s, &PreprocessConfig::default())
}

fn random_peptide<R: Rng>(rng: &mut R, min: usize, max: usize) -> Peptide {
    let len = rng.gen_range(min..=max);
    let residues = (0..len)
        .map(|_| AminoAcid::ALL[rng.gen_range(0..AminoAcid::ALL.len())])
        .collect();
    Peptide::new(residues).unwrap()
}

/// Integer residue masses plus water.
fn nominal_mass(p: &Peptide) -> i64 {
    p.residues().iter().map(|aa| aa.mass().round() as i64).sum::<i64>() + 18
}

fn ladder_fidelity() -> Outcome {
    let start = Instant::now();
    let t = theoretical_spectrum(&pep("LGVTLYK")).unwrap();
    let b: Vec<i64> = t.b_ions.iter().map(|m| m.round() as i64).collect();
    let y: Vec<i64> = t.y_ions.iter().map(|m| m.round() as i64).collect();
    let ladder_ok = b == [114, 171, 270, 371, 484, 647] && y == [147, 310, 423, 524, 623, 680];

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_peptide(&mut rng, 2, 20);
        let t = theoretical_spectrum(&p).unwrap();
        let l = p.len();
        let target = p.parent_mass() + 2.0 * PROTON_MASS;
        for j in 1..l {
            worst = worst.max((t.b_ions[j - 1] + t.y_ions[l - j - 1] - target).abs());
        }
        let residue_sum: f64 = p.residues().iter().map(|aa| aa.mass()).sum();
        worst = worst.max((p.parent_mass() - residue_sum - WATER_MASS).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        ladder_ok && worst <= 1e-9 && secs < 1.0,
        format!("b={b:?} y={y:?} max complement error {worst:.2e} Da, {secs:.3} s"),
    )
}

fn fitness_arithmetic() -> Outcome {
    let f = combine_fitness(0.595, 0.000_003, 8.0, 8.0, 0.0, 10.0);
    outcome((f - 2.1950).abs() <= 0.0005, format!("fitness {f:.6}"))
}

fn conflict_dictionary() -> Outcome {
    use AminoAcid::*;
    let expected: [(AminoAcid, &[[AminoAcid; 2]]); 4] = [
        (Trp, &[[Asp, Ala], [Ala, Asp], [Glu, Gly], [Gly, Glu], [Val, Ser], [Ser, Val]]),
        (Arg, &[[Val, Gly], [Gly, Val]]),
        (Gln, &[[Ala, Gly], [Gly, Ala]]),
        (Asn, &[[Gly, Gly]]),
    ];
    let table_ok = expected.iter().all(|(aa, pairs)| {
        let got: BTreeSet<_> = conflict_replacements(*aa).iter().collect();
        let want: BTreeSet<_> = pairs.iter().collect();
        got == want
    }) && AminoAcid::ALL
        .iter()
        .filter(|aa| !matches!(aa, Trp | Arg | Gln | Asn))
        .all(|&aa| conflict_replacements(aa).is_empty());

    // Each application starts from a fresh random peptide holding at least
    // one conflict residue.
    let spectrum = clean_spectrum(&pep("WRQNWRQNK"), "conflict");
    let scorer = Scorer::new(&spectrum, TAU).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut drift: f64 = 0.0;
    let mut nominal_kept = 0;
    let mut applied = 0;
    while applied < 1000 {
        let p = random_peptide(&mut rng, 3, 20);
        let ind = Individual::evaluate(p, &scorer).unwrap();
        let eligible = ind.peptide.residues()[..ind.len() - 1]
            .iter()
            .any(|aa| !conflict_replacements(*aa).is_empty());
        if !eligible {
            continue;
        }
        let next = conflict_mass_mutation(&ind, &scorer, &mut rng);
        applied += 1;
        let (before, after) = (ind.peptide.parent_mass(), next.peptide.parent_mass());
        drift = drift.max((after - before).abs());
        if nominal_mass(&next.peptide) == nominal_mass(&ind.peptide) && next.len() == ind.len() + 1 {
            nominal_kept += 1;
        }
    }
    outcome(
        table_ok && drift < 0.05 && nominal_kept == applied,
        format!(
            "table matches: {table_ok}, nominal mass kept in {nominal_kept}/{applied} mutations, max drift {drift:.4} Da"
        ),
    )
}

struct RecoveryRun {
    pairs: Vec<PsmPair>,
    traces: Vec<Vec<GenerationStats>>,
}

fn recovery_corpus() -> Vec<Peptide> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..20)
        .map(|_| {
            let len = rng.gen_range(7..=12);
            random_tryptic_peptide(len, &mut rng).unwrap()
        })
        .collect()
}

fn recover(corpus: &[Peptide], synth: &SynthConfig) -> RecoveryRun {
    let cfg = GaConfig::default();
    let spectra: Vec<Spectrum> = synthesize_all(corpus, synth, 11)
        .unwrap()
        .iter()
        .map(|s| preprocess(s, &PreprocessConfig::default()))
        .collect();
    let jobs: Vec<(usize, u64)> = (0..corpus.len()).flat_map(|i| (0..5).map(move |s| (i, s))).collect();
    let results: Vec<(PsmPair, Vec<GenerationStats>)> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let scorer = Scorer::new(&spectra[i], cfg.tolerance).unwrap();
            let mut rng = run_rng(seed, i, 0);
            let run = evolve_with(&scorer, &cfg, &mut rng).unwrap();
            (
                PsmPair {
                    predicted: Some(run.best.peptide),
                    truth: corpus[i].clone(),
                },
                run.trace,
            )
        })
        .collect();
    let (pairs, traces) = results.into_iter().unzip();
    RecoveryRun { pairs, traces }
}

fn oracle_recovery(run: &RecoveryRun, secs: f64) -> Outcome {
    let m = compute_metrics(&run.pairs, TAU).unwrap();
    outcome(
        m.peptide_recall >= 0.70 && m.recall >= 0.90,
        format!(
            "peptide recall {:.3}, amino-acid recall {:.3}, precision {:.3} over {} runs, {secs:.1} s",
            m.peptide_recall,
            m.recall,
            m.precision,
            run.pairs.len()
        ),
    )
}

fn degraded_robustness(run: &RecoveryRun) -> Outcome {
    let m = compute_metrics(&run.pairs, TAU).unwrap();
    outcome(
        m.recall >= 0.60,
        format!(
            "amino-acid recall {:.3}, peptide recall {:.3} over {} runs",
            m.recall,
            m.peptide_recall,
            run.pairs.len()
        ),
    )
}

fn best_fitness(pool: &InitPool) -> f64 {
    pool.candidates.iter().map(Individual::fitness).fold(f64::NEG_INFINITY, f64::max)
}

fn mean_abs_delta(pool: &InitPool) -> f64 {
    pool.candidates.iter().map(|c| c.delta_mass().abs()).sum::<f64>() / pool.len() as f64
}

fn initialization_superiority() -> Outcome {
    let spectrum = clean_spectrum(&pep("AAALAAADAR"), "init");
    let scorer = Scorer::new(&spectrum, TAU).unwrap();
    let rows: Vec<(f64, f64, f64, f64)> = (0..30u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tagged = build_init_pool(&scorer, 1000, &mut rng);
            let lengths: Vec<usize> = tagged.candidates.iter().map(Individual::len).collect();
            let random = random_init_pool(&scorer, &lengths, &mut rng);
            (
                best_fitness(&tagged),
                best_fitness(&random),
                mean_abs_delta(&tagged),
                mean_abs_delta(&random),
            )
        })
        .collect();
    let wins = rows.iter().filter(|r| r.0 > r.1).count();
    let n = rows.len() as f64;
    let mean = |f: fn(&(f64, f64, f64, f64)) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let (tag_fit, rand_fit) = (mean(|r| r.0), mean(|r| r.1));
    let (tag_delta, rand_delta) = (mean(|r| r.2), mean(|r| r.3));
    outcome(
        wins >= 28 && tag_delta < rand_delta,
        format!(
            "tag pool wins {wins}/30 (best fitness {tag_fit:.3} vs {rand_fit:.3}), mean |dmass| {tag_delta:.2} vs {rand_delta:.2} Da"
        ),
    )
}

/// Mean fitness gain of the crossover child over its best-Nterm, best-Cterm
/// and best-fitness parents, one child per seeded pool of 1000.
fn crossover_gains(spectrum: &Spectrum) -> [f64; 3] {
    let scorer = Scorer::new(spectrum, TAU).unwrap();
    let cfg = GaConfig::default();
    let rows: Vec<[f64; 3]> = (0..30u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool = build_init_pool(&scorer, 1000, &mut rng).candidates;
            let best = |key: fn(&Individual) -> (usize, f64)| {
                pool.iter()
                    .max_by(|a, b| {
                        let (ka, fa) = key(a);
                        let (kb, fb) = key(b);
                        ka.cmp(&kb).then(fa.total_cmp(&fb))
                    })
                    .unwrap()
            };
            let n = best(|i| (i.nterm(), i.fitness()));
            let c = best(|i| (i.cterm(), i.fitness()));
            let h = best(|i| (0, i.fitness()));
            let child = nterm_cterm_crossover(n, c, h, &scorer, cfg.relaxed_cx_bound, &mut rng);
            [
                child.fitness() - n.fitness(),
                child.fitness() - c.fitness(),
                child.fitness() - h.fitness(),
            ]
        })
        .collect();
    let mut mean = [0.0; 3];
    for (k, m) in mean.iter_mut().enumerate() {
        *m = rows.iter().map(|r| r[k]).sum::<f64>() / rows.len() as f64;
    }
    mean
}

/// Judged on a measured-like spectrum: random intensities, 10% of fragments
/// missing and 20 noise peaks. The clean-ladder gains are reported alongside.
fn crossover_effectiveness() -> Outcome {
    let peptide = pep("AAALAAADAR");
    let degraded_cfg = SynthConfig {
        intensity: IntensityProfile::Random { min: 0.1, max: 1.0 },
        dropout: 0.1,
        noise_peaks: 20,
        ..SynthConfig::default()
    };
    let raw = synthesize_spectrum(&peptide, &degraded_cfg, "cx", &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let degraded = crossover_gains(&preprocess(&raw, &PreprocessConfig::default()));
    let clean = crossover_gains(&clean_spectrum(&peptide, "cx"));
    outcome(
        degraded.iter().all(|&m| m > 0.0),
        format!(
            "mean gain over Nterm/Cterm/best parent {:.3}/{:.3}/{:.3} (clean ladder {:.3}/{:.3}/{:.3})",
            degraded[0], degraded[1], degraded[2], clean[0], clean[1], clean[2]
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.mgf");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let peptides: Vec<Peptide> = (0..4).map(|_| random_tryptic_peptide(9, &mut rng).unwrap()).collect();
    let cfg = SynthConfig {
        dropout: 0.1,
        noise_peaks: 10,
        ..SynthConfig::default()
    };
    let spectra = synthesize_all(&peptides, &cfg, 8).unwrap();
    emit_mgf(&spectra, std::fs::File::create(&input).unwrap()).unwrap();

    let run = |jobs: usize| {
        let opts = SequenceOptions {
            ga: GaConfig {
                seed: 42,
                ..GaConfig::default()
            },
            runs: 3,
            jobs,
            ..SequenceOptions::default()
        };
        let mut out = Vec::new();
        cmd_sequence(&input, &opts, &mut out).unwrap();
        out
    };
    let reference = run(1);
    let repeat = run(1);
    let parallel: Vec<bool> = [2, 4, 0].iter().map(|&j| run(j) == reference).collect();
    outcome(
        reference == repeat && parallel.iter().all(|&b| b),
        format!(
            "{} bytes; repeat identical: {}, jobs 2/4/auto identical: {parallel:?}",
            reference.len(),
            reference == repeat
        ),
    )
}

fn brute_force_tags(s: &Spectrum, tau: f64) -> BTreeSet<(Vec<usize>, String)> {
    let p = s.peaks();
    let n = p.len();
    let labels = |i: usize, j: usize| -> Vec<AminoAcid> {
        AminoAcid::CANONICAL
            .iter()
            .copied()
            .filter(|aa| (p[j].mz - p[i].mz - aa.mass()).abs() <= tau)
            .collect()
    };
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    for x in labels(a, b) {
                        for y in labels(b, c) {
                            for z in labels(c, d) {
                                let seq: String = [x, y, z].iter().map(|aa| aa.symbol()).collect();
                                out.insert((vec![a, b, c, d], seq));
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn tag_key(tags: &[Tag]) -> (BTreeSet<(Vec<usize>, String)>, usize) {
    let set: BTreeSet<_> = tags.iter().map(|t| (t.peak_indices.to_vec(), t.sequence())).collect();
    (set, tags.len())
}

fn tag_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut total = 0;
    let mut mismatches = 0;
    for k in 0..50 {
        let n = rng.gen_range(0..=30);
        // Mix residue walks with uniform noise so tags actually occur.
        let mut mz = rng.gen_range(50.0..200.0);
        let mut peaks = Vec::new();
        for _ in 0..n {
            if rng.gen_bool(0.6) {
                let aa = AminoAcid::CANONICAL[rng.gen_range(0..AminoAcid::CANONICAL.len())];
                mz += aa.mass() + rng.gen_range(-0.4..0.4);
            } else {
                mz += rng.gen_range(1.0..150.0);
            }
            peaks.push(Peak::new(mz, rng.gen_range(0.1..1.0)));
        }
        let s = Spectrum::new(format!("r{k}"), 1000.0, 2, peaks).unwrap();
        let tau = if k % 2 == 0 { TAU } else { 0.02 };
        let (got, count) = tag_key(&extract_tags(&s, tau));
        let want = brute_force_tags(&s, tau);
        total += want.len();
        if got != want || count != want.len() {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0 && total > 0,
        format!("{total} tags over 50 spectra, {mismatches} mismatching spectra"),
    )
}

fn elitism_monotonicity(traces: &[&Vec<GenerationStats>]) -> Outcome {
    let broken = traces
        .iter()
        .filter(|t| t.windows(2).any(|w| w[1].best_fitness < w[0].best_fitness))
        .count();
    let full = traces.iter().all(|t| t.len() == 51);
    outcome(
        broken == 0 && full,
        format!("{} traces of 51 rows, {broken} decreasing", traces.len()),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!(
            "criterion {id:>2} {:<4} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        std::io::stdout().flush().unwrap();
        results.push((id, name, o));
    };

    report(1, "ladder fidelity", ladder_fidelity());
    report(2, "fitness arithmetic", fitness_arithmetic());
    report(3, "conflict dictionary", conflict_dictionary());

    let corpus = recovery_corpus();
    let start = Instant::now();
    let clean = recover(&corpus, &SynthConfig::default());
    report(4, "oracle recovery", oracle_recovery(&clean, start.elapsed().as_secs_f64()));
    let degraded = recover(
        &corpus,
        &SynthConfig {
            dropout: 0.1,
            noise_peaks: 20,
            ..SynthConfig::default()
        },
    );
    report(5, "degraded robustness", degraded_robustness(&degraded));

    report(6, "initialization superiority", initialization_superiority());
    report(7, "crossover effectiveness", crossover_effectiveness());
    report(8, "determinism", determinism());
    report(9, "tag oracle equivalence", tag_oracle());
    let traces: Vec<&Vec<GenerationStats>> = clean.traces.iter().chain(&degraded.traces).collect();
    report(10, "elitism monotonicity", elitism_monotonicity(&traces));

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
