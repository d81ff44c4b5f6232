//! The genetic algorithm: population, selection pools, variation operators,
//! elitism and the generational loop.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{conflict_replacements, AminoAcid, Peptide, MAX_PEPTIDE_LEN};
use crate::error::{Error, Result};
use crate::spectrum::Spectrum;
use crate::tags::{adjust_mass, build_init_pool, mass_bound};
use crate::theo::{MatchResult, Scorer};

/// Generator used for every run.
pub type RunRng = ChaCha8Rng;

/// Generator for one (spectrum, run) job. Each pair gets its own ChaCha
/// stream under the shared seed, so results do not depend on scheduling.
pub fn run_rng(seed: u64, spectrum_index: usize, run_index: usize) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((spectrum_index as u64) << 32) | (run_index as u64 & 0xffff_ffff));
    rng
}

/// A candidate peptide with its scores against the run's spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub peptide: Peptide,
    pub score: MatchResult,
}

impl Individual {
    pub fn evaluate(peptide: Peptide, scorer: &Scorer<'_>) -> Result<Self> {
        let score = scorer.score(&peptide)?;
        Ok(Individual { peptide, score })
    }

    fn from_residues(residues: Vec<AminoAcid>, scorer: &Scorer<'_>) -> Option<Self> {
        Self::evaluate(Peptide::new(residues).ok()?, scorer).ok()
    }

    pub fn fitness(&self) -> f64 {
        self.score.fitness
    }

    pub fn nterm(&self) -> usize {
        self.score.nterm
    }

    pub fn cterm(&self) -> usize {
        self.score.cterm
    }

    pub fn delta_mass(&self) -> f64 {
        self.score.delta_mass
    }

    pub fn len(&self) -> usize {
        self.peptide.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peptide.is_empty()
    }

    fn residues(&self) -> &[AminoAcid] {
        self.peptide.residues()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    NtermCtermCrossover,
    TwoPointCrossover,
    FlipMutation,
    ConflictMutation,
}

/// Probabilities of the four variation operators. They must sum to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorRates {
    pub nterm_cterm: f64,
    pub two_point: f64,
    pub flip: f64,
    pub conflict: f64,
}

impl Default for OperatorRates {
    fn default() -> Self {
        OperatorRates {
            nterm_cterm: 0.40,
            two_point: 0.35,
            flip: 0.10,
            conflict: 0.15,
        }
    }
}

impl OperatorRates {
    pub fn sum(&self) -> f64 {
        self.nterm_cterm + self.two_point + self.flip + self.conflict
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Operator {
        let x = rng.gen::<f64>() * self.sum();
        if x < self.nterm_cterm {
            Operator::NtermCtermCrossover
        } else if x < self.nterm_cterm + self.two_point {
            Operator::TwoPointCrossover
        } else if x < self.nterm_cterm + self.two_point + self.flip {
            Operator::FlipMutation
        } else {
            Operator::ConflictMutation
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaConfig {
    pub pool_size: usize,
    pub population: usize,
    pub generations: usize,
    pub tournament_k: usize,
    pub rates: OperatorRates,
    pub elitism: usize,
    /// Fragment tolerance in Da.
    pub tolerance: f64,
    /// Largest |Δmass| the Nterm-Cterm crossover accepts before repairing.
    pub relaxed_cx_bound: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            pool_size: 1000,
            population: 300,
            generations: 50,
            tournament_k: 7,
            rates: OperatorRates::default(),
            elitism: 3,
            tolerance: 0.5,
            relaxed_cx_bound: 100.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    /// Size of each selection pool: a third of the population.
    pub fn sub_pool(&self) -> usize {
        self.population / 3
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let r = &self.rates;
        if [r.nterm_cterm, r.two_point, r.flip, r.conflict]
            .iter()
            .any(|&x| !(x >= 0.0))
        {
            return bad("operator rates must be non-negative".into());
        }
        if (r.sum() - 1.0).abs() > 1e-6 {
            return bad(format!("operator rates sum to {}, not 1", r.sum()));
        }
        if self.population < 3 {
            return bad("population must be at least 3".into());
        }
        if self.elitism > 3 || self.elitism >= self.population {
            return bad(format!(
                "elitism {} must be at most 3 and below the population",
                self.elitism
            ));
        }
        if self.tournament_k == 0 {
            return bad("tournament size must be at least 1".into());
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive".into());
        }
        if !(self.relaxed_cx_bound >= 0.0) {
            return bad("relaxed crossover bound must be non-negative".into());
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Selection

/// Indices into the population for the four selection pools.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pools {
    pub helper: Vec<usize>,
    pub nterm: Vec<usize>,
    pub cterm: Vec<usize>,
    pub tournament: Vec<usize>,
}

fn by_fitness(population: &[Individual]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..population.len()).collect();
    idx.sort_by(|&a, &b| population[b].fitness().total_cmp(&population[a].fitness()));
    idx
}

fn by_terminal_score(population: &[Individual], key: fn(&Individual) -> usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..population.len()).collect();
    idx.sort_by(|&a, &b| {
        key(&population[b])
            .cmp(&key(&population[a]))
            .then(population[b].fitness().total_cmp(&population[a].fitness()))
    });
    idx
}

/// Index of the winner of a `k`-way tournament drawn with replacement.
pub fn tournament<R: Rng + ?Sized>(population: &[Individual], k: usize, rng: &mut R) -> usize {
    let mut best = rng.gen_range(0..population.len());
    for _ in 1..k {
        let c = rng.gen_range(0..population.len());
        if population[c].fitness() > population[best].fitness() {
            best = c;
        }
    }
    best
}

pub fn select_pools<R: Rng + ?Sized>(
    population: &[Individual],
    cfg: &GaConfig,
    rng: &mut R,
) -> Pools {
    let size = cfg.sub_pool();
    if population.is_empty() {
        return Pools::default();
    }
    let helper = by_fitness(population).into_iter().take(size).collect();
    let nterm = by_terminal_score(population, Individual::nterm)
        .into_iter()
        .filter(|&i| population[i].nterm() >= 1)
        .take(size)
        .collect();
    let cterm = by_terminal_score(population, Individual::cterm)
        .into_iter()
        .filter(|&i| population[i].cterm() >= 1)
        .take(size)
        .collect();
    let tournament = (0..size)
        .map(|_| tournament(population, cfg.tournament_k, rng))
        .collect();
    Pools {
        helper,
        nterm,
        cterm,
        tournament,
    }
}

// ---------------------------------------------------------------------------
// Operators

/// Appends the tail of `c_parent`, one residue at a time from its C-terminus,
/// to `prefix` until the result is no longer lighter than the precursor by
/// more than `bound`. Keeps whichever of the last two lengths is closer.
fn grow_from_tail(
    prefix: &[AminoAcid],
    c_parent: &[AminoAcid],
    scorer: &Scorer<'_>,
    bound: f64,
) -> Vec<AminoAcid> {
    let build = |t: usize| -> Vec<AminoAcid> {
        let mut s = prefix.to_vec();
        s.extend_from_slice(&c_parent[c_parent.len() - t..]);
        s
    };
    let mut prev: Option<(Vec<AminoAcid>, f64)> = None;
    for t in 1..=c_parent.len() {
        let seq = build(t);
        let delta = scorer.delta_mass(&seq);
        if delta < bound {
            return match prev {
                Some((p, pd)) if pd.abs() < delta.abs() => p,
                _ => seq,
            };
        }
        prev = Some((seq, delta));
    }
    prev.map(|(s, _)| s).unwrap_or_else(|| prefix.to_vec())
}

/// Inserts residues of a random interior window of `helper`, left to right,
/// between `prefix` and `suffix` while the sequence is lighter than the
/// precursor by more than `bound`.
fn fill_from_helper<R: Rng + ?Sized>(
    prefix: &[AminoAcid],
    suffix: &[AminoAcid],
    helper: &[AminoAcid],
    scorer: &Scorer<'_>,
    bound: f64,
    rng: &mut R,
) -> Vec<AminoAcid> {
    let mut middle = Vec::new();
    let h = helper.len();
    if h >= 3 {
        let start = rng.gen_range(1..h - 1);
        let end = rng.gen_range(start + 1..h);
        let mut delta = scorer.delta_mass(&[prefix, suffix].concat());
        for &aa in &helper[start..end] {
            if delta <= bound || prefix.len() + middle.len() + suffix.len() >= MAX_PEPTIDE_LEN {
                break;
            }
            middle.push(aa);
            delta -= scorer.masses().mass(aa);
        }
    }
    let mut seq = prefix.to_vec();
    seq.extend(middle);
    seq.extend_from_slice(suffix);
    seq
}

fn better_parent(a: &Individual, b: &Individual) -> Individual {
    if b.fitness() > a.fitness() {
        b.clone()
    } else {
        a.clone()
    }
}

/// Joins the N-terminal matched prefix of `n_parent` (nterm + 1 residues)
/// with the C-terminal matched suffix of `c_parent` (cterm + 1 residues).
/// A result far too heavy is rebuilt from the prefix and the tail of
/// `c_parent`; one far too light gets a window of `helper` inserted in the
/// middle. The mass is then trimmed with [`adjust_mass`]. If that fails the
/// fitter parent is returned.
pub fn nterm_cterm_crossover<R: Rng + ?Sized>(
    n_parent: &Individual,
    c_parent: &Individual,
    helper: &Individual,
    scorer: &Scorer<'_>,
    relaxed_bound: f64,
    rng: &mut R,
) -> Individual {
    let n_res = n_parent.residues();
    let c_res = c_parent.residues();
    let prefix_len = (n_parent.nterm() + 1).min(n_res.len().saturating_sub(1)).max(1);
    let suffix_len = (c_parent.cterm() + 1).min(c_res.len());
    let prefix = &n_res[..prefix_len.min(n_res.len())];
    let suffix = &c_res[c_res.len() - suffix_len..];

    let bound = mass_bound(scorer);
    let mut seq = prefix.to_vec();
    seq.extend_from_slice(suffix);
    let delta = scorer.delta_mass(&seq);
    if delta < -relaxed_bound {
        seq = grow_from_tail(prefix, c_res, scorer, bound);
    } else if delta > relaxed_bound {
        seq = fill_from_helper(prefix, suffix, helper.residues(), scorer, bound, rng);
    }
    if seq.len() < 2 {
        return better_parent(n_parent, c_parent);
    }
    let adjusted = adjust_mass(seq, scorer, rng);
    if !adjusted.within_bound {
        return better_parent(n_parent, c_parent);
    }
    Individual::from_residues(adjusted.residues, scorer)
        .unwrap_or_else(|| better_parent(n_parent, c_parent))
}

/// Swaps `a[a_cut.0..a_cut.1]` with `b[b_cut.0..b_cut.1]`.
pub fn two_point_splice(
    a: &[AminoAcid],
    b: &[AminoAcid],
    a_cut: (usize, usize),
    b_cut: (usize, usize),
) -> (Vec<AminoAcid>, Vec<AminoAcid>) {
    let mut x = a[..a_cut.0].to_vec();
    x.extend_from_slice(&b[b_cut.0..b_cut.1]);
    x.extend_from_slice(&a[a_cut.1..]);
    let mut y = b[..b_cut.0].to_vec();
    y.extend_from_slice(&a[a_cut.0..a_cut.1]);
    y.extend_from_slice(&b[b_cut.1..]);
    (x, y)
}

/// Two cut points `0 <= c1 < c2 <= len - 1`; the final residue is never
/// inside the segment.
fn segment_cuts<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let c1 = rng.gen_range(0..len - 1);
    let c2 = rng.gen_range(c1 + 1..len);
    (c1, c2)
}

/// Exchanges a random segment (never the final residue) between two parents.
/// Cuts are drawn independently per parent, so identical parents can still
/// produce new sequences. Parents shorter than four residues are returned
/// unchanged.
pub fn two_point_crossover<R: Rng + ?Sized>(
    p1: &Individual,
    p2: &Individual,
    scorer: &Scorer<'_>,
    rng: &mut R,
) -> (Individual, Individual) {
    if p1.len() < 4 || p2.len() < 4 {
        return (p1.clone(), p2.clone());
    }
    let a_cut = segment_cuts(p1.len(), rng);
    let b_cut = segment_cuts(p2.len(), rng);
    let (x, y) = two_point_splice(p1.residues(), p2.residues(), a_cut, b_cut);
    (
        Individual::from_residues(x, scorer).unwrap_or_else(|| p1.clone()),
        Individual::from_residues(y, scorer).unwrap_or_else(|| p2.clone()),
    )
}

/// Replaces one random non-terminal residue with a different residue.
pub fn flip_aa_mutation<R: Rng + ?Sized>(
    ind: &Individual,
    scorer: &Scorer<'_>,
    rng: &mut R,
) -> Individual {
    if ind.len() < 2 {
        return ind.clone();
    }
    let mut seq = ind.residues().to_vec();
    let pos = rng.gen_range(0..seq.len() - 1);
    let current = seq[pos];
    let choices: Vec<AminoAcid> = AminoAcid::CANONICAL
        .iter()
        .copied()
        .filter(|&aa| aa != current)
        .collect();
    seq[pos] = *choices.choose(rng).unwrap();
    Individual::from_residues(seq, scorer).unwrap_or_else(|| ind.clone())
}

/// Replaces one non-terminal residue that has a conflict-mass entry with
/// one of its di-peptides. Unchanged if no residue qualifies.
pub fn conflict_mass_mutation<R: Rng + ?Sized>(
    ind: &Individual,
    scorer: &Scorer<'_>,
    rng: &mut R,
) -> Individual {
    let res = ind.residues();
    if res.len() >= MAX_PEPTIDE_LEN {
        return ind.clone();
    }
    let eligible: Vec<usize> = (0..res.len().saturating_sub(1))
        .filter(|&i| !conflict_replacements(res[i]).is_empty())
        .collect();
    let Some(&pos) = eligible.choose(rng) else {
        return ind.clone();
    };
    let pair = *conflict_replacements(res[pos]).choose(rng).unwrap();
    let mut seq = Vec::with_capacity(res.len() + 1);
    seq.extend_from_slice(&res[..pos]);
    seq.extend_from_slice(&pair);
    seq.extend_from_slice(&res[pos + 1..]);
    Individual::from_residues(seq, scorer).unwrap_or_else(|| ind.clone())
}

// ---------------------------------------------------------------------------
// Evolution

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_peptide: Peptide,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub best: Individual,
    /// One row per generation, starting with the initial population.
    pub trace: Vec<GenerationStats>,
    pub generations_used: usize,
}

impl EvolutionResult {
    /// Writes the trace as TSV with a header row.
    pub fn write_trace<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "generation\tbest_fitness\tmean_fitness\tbest_peptide")?;
        for row in &self.trace {
            writeln!(
                out,
                "{}\t{:.6}\t{:.6}\t{}",
                row.generation, row.best_fitness, row.mean_fitness, row.best_peptide
            )?;
        }
        Ok(())
    }
}

fn best_by<F: Fn(&Individual) -> (usize, f64)>(population: &[Individual], key: F) -> usize {
    let mut best = 0;
    for i in 1..population.len() {
        let (ka, fa) = key(&population[i]);
        let (kb, fb) = key(&population[best]);
        if ka > kb || (ka == kb && fa > fb) {
            best = i;
        }
    }
    best
}

fn stats(generation: usize, population: &[Individual]) -> GenerationStats {
    let best = best_by(population, |i| (0, i.fitness()));
    GenerationStats {
        generation,
        best_fitness: population[best].fitness(),
        mean_fitness: population.iter().map(Individual::fitness).sum::<f64>() / population.len() as f64,
        best_peptide: population[best].peptide.clone(),
    }
}

/// Initial population: the top `sub_pool` candidates by fitness, by nterm
/// and by cterm (repeats allowed), topped up with the next best by fitness.
pub fn initial_population(pool: &[Individual], cfg: &GaConfig) -> Vec<Individual> {
    if pool.is_empty() {
        return Vec::new();
    }
    let size = cfg.sub_pool();
    let fit = by_fitness(pool);
    let mut population: Vec<Individual> = Vec::with_capacity(cfg.population);
    population.extend(fit.iter().take(size).map(|&i| pool[i].clone()));
    population.extend(
        by_terminal_score(pool, Individual::nterm)
            .into_iter()
            .take(size)
            .map(|i| pool[i].clone()),
    );
    population.extend(
        by_terminal_score(pool, Individual::cterm)
            .into_iter()
            .take(size)
            .map(|i| pool[i].clone()),
    );
    let mut refill = fit.iter().cycle().skip(size.min(fit.len()));
    while population.len() < cfg.population {
        population.push(pool[*refill.next().unwrap()].clone());
    }
    population.truncate(cfg.population);
    population
}

/// Produces `count` offspring from the current population.
fn breed<R: Rng + ?Sized>(
    population: &[Individual],
    pools: &Pools,
    count: usize,
    scorer: &Scorer<'_>,
    cfg: &GaConfig,
    rng: &mut R,
) -> Vec<Individual> {
    let pick = |pool: &[usize], rng: &mut R| -> usize {
        if pool.is_empty() {
            rng.gen_range(0..population.len())
        } else {
            pool[rng.gen_range(0..pool.len())]
        }
    };
    let mut offspring = Vec::with_capacity(count);
    while offspring.len() < count {
        let mut op = cfg.rates.draw(rng);
        if op == Operator::NtermCtermCrossover && (pools.nterm.is_empty() || pools.cterm.is_empty()) {
            op = Operator::TwoPointCrossover;
        }
        match op {
            Operator::NtermCtermCrossover => {
                let n = pick(&pools.nterm, rng);
                let c = pick(&pools.cterm, rng);
                let h = pick(&pools.helper, rng);
                offspring.push(nterm_cterm_crossover(
                    &population[n],
                    &population[c],
                    &population[h],
                    scorer,
                    cfg.relaxed_cx_bound,
                    rng,
                ));
            }
            Operator::TwoPointCrossover => {
                let a = pick(&pools.tournament, rng);
                let b = pick(&pools.tournament, rng);
                let (x, y) = two_point_crossover(&population[a], &population[b], scorer, rng);
                offspring.push(x);
                if offspring.len() < count {
                    offspring.push(y);
                }
            }
            Operator::FlipMutation => {
                let a = pick(&pools.tournament, rng);
                offspring.push(flip_aa_mutation(&population[a], scorer, rng));
            }
            Operator::ConflictMutation => {
                let a = pick(&pools.tournament, rng);
                offspring.push(conflict_mass_mutation(&population[a], scorer, rng));
            }
        }
    }
    offspring
}

/// Runs the GA on a preprocessed spectrum with a generator derived from
/// `cfg.seed`.
pub fn evolve(spectrum: &Spectrum, cfg: &GaConfig) -> Result<EvolutionResult> {
    let scorer = Scorer::new(spectrum, cfg.tolerance)?;
    evolve_with(&scorer, cfg, &mut run_rng(cfg.seed, 0, 0))
}

pub fn evolve_with<R: Rng + ?Sized>(
    scorer: &Scorer<'_>,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<EvolutionResult> {
    cfg.validate()?;
    let pool = build_init_pool(scorer, cfg.pool_size, rng);
    if pool.is_empty() {
        return Err(Error::EmptyInitPool(scorer.spectrum().id().to_string()));
    }
    let mut population = initial_population(&pool.candidates, cfg);
    let mut best = population[best_by(&population, |i| (0, i.fitness()))].clone();
    let mut trace = vec![stats(0, &population)];

    for generation in 1..=cfg.generations {
        let pools = select_pools(&population, cfg, rng);
        let mut next = breed(
            &population,
            &pools,
            cfg.population - cfg.elitism,
            scorer,
            cfg,
            rng,
        );
        let elites = [
            best_by(&population, |i| (0, i.fitness())),
            best_by(&population, |i| (i.nterm(), i.fitness())),
            best_by(&population, |i| (i.cterm(), i.fitness())),
        ];
        next.extend(elites.iter().take(cfg.elitism).map(|&i| population[i].clone()));
        population = next;

        let row = stats(generation, &population);
        if row.best_fitness > best.fitness() {
            best = population[best_by(&population, |i| (0, i.fitness()))].clone();
        }
        trace.push(row);
    }

    Ok(EvolutionResult {
        best,
        trace,
        generations_used: cfg.generations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::PROTON_MASS;
    use crate::spectrum::{preprocess, Peak, PreprocessConfig};
    use crate::theo::TheoreticalSpectrum;

    fn pep(s: &str) -> Peptide {
        s.parse().unwrap()
    }

    fn ladder(peptide: &str) -> Spectrum {
        let p = pep(peptide);
        let t = TheoreticalSpectrum::new(&p).unwrap();
        let peaks = t.b_ions.iter().chain(&t.y_ions).map(|&m| Peak::new(m, 1.0)).collect();
        let pepmass = (p.parent_mass() + 2.0 * PROTON_MASS) / 2.0;
        let s = Spectrum::new(peptide, pepmass, 2, peaks).unwrap();
        preprocess(&s, &PreprocessConfig::default())
    }

    fn ind(s: &str, scorer: &Scorer<'_>) -> Individual {
        Individual::evaluate(pep(s), scorer).unwrap()
    }

    fn rng(seed: u64) -> RunRng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn defaults_match_parameter_table() {
        let cfg = GaConfig::default();
        assert_eq!(cfg.pool_size, 1000);
        assert_eq!(cfg.population, 300);
        assert_eq!(cfg.sub_pool(), 100);
        assert_eq!(cfg.generations, 50);
        assert_eq!(cfg.tournament_k, 7);
        assert_eq!(cfg.elitism, 3);
        assert_eq!(cfg.tolerance, 0.5);
        assert_eq!(cfg.relaxed_cx_bound, 100.0);
        assert!((cfg.rates.sum() - 1.0).abs() < 1e-12);
        cfg.validate().unwrap();
    }

    #[test]
    fn config_validation() {
        let mut cfg = GaConfig::default();
        cfg.rates.flip = 0.5;
        assert!(cfg.validate().is_err());
        let cfg = GaConfig {
            population: 2,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn operator_draw_frequencies() {
        let rates = OperatorRates::default();
        let mut r = rng(1);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            let i = match rates.draw(&mut r) {
                Operator::NtermCtermCrossover => 0,
                Operator::TwoPointCrossover => 1,
                Operator::FlipMutation => 2,
                Operator::ConflictMutation => 3,
            };
            counts[i] += 1;
        }
        let expected = [0.40, 0.35, 0.10, 0.15];
        for (c, e) in counts.iter().zip(expected) {
            assert!((*c as f64 / n as f64 - e).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn pools_of_identical_population() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let population = vec![ind("AAALAAADAR", &scorer); 300];
        let pools = select_pools(&population, &GaConfig::default(), &mut rng(2));
        assert_eq!(pools.helper.len(), 100);
        assert_eq!(pools.nterm.len(), 100);
        assert_eq!(pools.cterm.len(), 100);
        assert_eq!(pools.tournament.len(), 100);
    }

    #[test]
    fn nterm_pool_requires_score() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let nobody = ind("WWWWK", &scorer);
        assert_eq!(nobody.nterm(), 0);
        let population = vec![nobody; 30];
        let cfg = GaConfig {
            population: 30,
            ..GaConfig::default()
        };
        let pools = select_pools(&population, &cfg, &mut rng(2));
        assert!(pools.nterm.is_empty());
        assert!(pools.cterm.is_empty());
        assert_eq!(pools.helper.len(), 10);
    }

    #[test]
    fn pools_rank_by_their_criteria() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let population: Vec<_> = ["AAALAGGWR", "NVLAAADAR", "WWWWK", "AAALAAADAR", "GGGGGK"]
            .iter()
            .map(|p| ind(p, &scorer))
            .collect();
        let cfg = GaConfig {
            population: 6,
            ..Default::default()
        };
        let pools = select_pools(&population, &cfg, &mut rng(3));
        assert_eq!(pools.helper, [3, 1]);
        assert_eq!(pools.nterm, [3, 0]);
        assert_eq!(pools.cterm, [3, 1]);
        for &t in &pools.tournament {
            assert!(t < population.len());
        }
    }

    #[test]
    fn crossover_removes_overlap() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let n = ind("AAALAGGWR", &scorer);
        let c = ind("NVLAAADAR", &scorer);
        let h = ind("RGLAAADVK", &scorer);
        assert_eq!(n.nterm(), 4);
        for seed in 0..20 {
            let child = nterm_cterm_crossover(&n, &c, &h, &scorer, 100.0, &mut rng(seed));
            assert_eq!(child.peptide.to_string(), "AAALAAADAR");
            assert!((child.fitness() - (1.0 + 16.0 / 10.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn crossover_fills_gap_from_helper() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let n = ind("AAAPEPSEQK", &scorer);
        let c = ind("PEPSEQAR", &scorer);
        let h = ind("RGLAAADTK", &scorer);
        assert!(n.nterm() >= 1 && c.cterm() >= 1);
        let bound = 57.021464 + 0.5;
        let mut exact = 0;
        for seed in 0..200 {
            let child = nterm_cterm_crossover(&n, &c, &h, &scorer, 100.0, &mut rng(seed));
            assert!(child.delta_mass().abs() < bound || child == n || child == c);
            if child.peptide.to_string() == "AAALAAADAR" {
                exact += 1;
            }
        }
        assert!(exact > 0);
    }

    #[test]
    fn crossover_of_perfect_parents() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let truth = ind("AAALAAADAR", &scorer);
        let child = nterm_cterm_crossover(&truth, &truth, &truth, &scorer, 100.0, &mut rng(0));
        assert_eq!(child.peptide, truth.peptide);
    }

    #[test]
    fn splice_mechanics() {
        let a: Vec<_> = pep("AAKR").into_residues();
        let b: Vec<_> = pep("GGGR").into_residues();
        let (x, y) = two_point_splice(&a, &b, (1, 3), (1, 3));
        assert_eq!(Peptide::new(x).unwrap().to_string(), "AGGR");
        assert_eq!(Peptide::new(y).unwrap().to_string(), "GAKR");

        let long: Vec<_> = pep("ACDEFGHK").into_residues();
        let (x, y) = two_point_splice(&long, &b, (2, 6), (1, 2));
        assert_eq!(x.len(), long.len() - 4 + 1);
        assert_eq!(y.len(), b.len() - 1 + 4);
    }

    #[test]
    fn two_point_keeps_terminus_and_handles_short_parents() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let a = ind("AAKR", &scorer);
        let b = ind("GGGGGGK", &scorer);
        let mut r = rng(5);
        for _ in 0..500 {
            let (x, y) = two_point_crossover(&a, &b, &scorer, &mut r);
            assert_eq!(x.peptide.last(), AminoAcid::Arg);
            assert_eq!(y.peptide.last(), AminoAcid::Lys);
            assert_eq!(x.len() + y.len(), a.len() + b.len());
        }
        let same = two_point_splice(a.residues(), a.residues(), (1, 3), (1, 3));
        assert_eq!(same, (a.residues().to_vec(), a.residues().to_vec()));
        let short = ind("GKR", &scorer);
        let (x, y) = two_point_crossover(&short, &a, &scorer, &mut r);
        assert_eq!((x, y), (short, a));
    }

    #[test]
    fn flip_changes_exactly_one_interior_residue() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let gr = ind("GR", &scorer);
        let mut r = rng(6);
        for _ in 0..100 {
            let m = flip_aa_mutation(&gr, &scorer, &mut r);
            assert_eq!(m.peptide.last(), AminoAcid::Arg);
            assert_ne!(m.peptide.residues()[0], AminoAcid::Gly);
        }
        let base = ind("AAALAAADAR", &scorer);
        for _ in 0..10_000 {
            let m = flip_aa_mutation(&base, &scorer, &mut r);
            let diff = m
                .peptide
                .residues()
                .iter()
                .zip(base.peptide.residues())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(diff, 1);
            assert_eq!(m.peptide.last(), AminoAcid::Arg);
            assert!(!m.peptide.residues().contains(&AminoAcid::Ile));
        }
    }

    #[test]
    fn conflict_mutation_examples() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let gwk = ind("GWK", &scorer);
        let allowed = ["GDAK", "GADK", "GEGK", "GGEK", "GVSK", "GSVK"];
        let mut r = rng(7);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..500 {
            let m = conflict_mass_mutation(&gwk, &scorer, &mut r);
            let s = m.peptide.to_string();
            assert!(allowed.contains(&s.as_str()), "{s}");
            seen.insert(s);
        }
        assert_eq!(seen.len(), 6);

        let aaak = ind("AAAK", &scorer);
        assert_eq!(conflict_mass_mutation(&aaak, &scorer, &mut r), aaak);
        // Terminal R is in the dictionary but never replaced.
        let aar = ind("AAR", &scorer);
        assert_eq!(conflict_mass_mutation(&aar, &scorer, &mut r), aar);
    }

    #[test]
    fn conflict_mutation_preserves_mass() {
        let s = ladder("AAALAAADAR");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let mut r = rng(8);
        let mut applied = 0;
        while applied < 1000 {
            let base = crate::tags::random_tryptic_sequence(&mut r);
            let base = Individual::from_residues(base, &scorer).unwrap();
            let m = conflict_mass_mutation(&base, &scorer, &mut r);
            if m.len() == base.len() {
                continue;
            }
            applied += 1;
            assert_eq!(m.len(), base.len() + 1);
            let drift = (m.peptide.parent_mass() - base.peptide.parent_mass()).abs();
            assert!(drift < 0.05, "{} -> {}: {drift}", base.peptide, m.peptide);
        }
    }

    #[test]
    fn zero_generations_returns_best_initial() {
        let s = ladder("LGVTLYK");
        let cfg = GaConfig {
            generations: 0,
            pool_size: 200,
            population: 60,
            ..Default::default()
        };
        let out = evolve(&s, &cfg).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.generations_used, 0);
        assert_eq!(out.best.fitness(), out.trace[0].best_fitness);
    }

    #[test]
    fn evolution_invariants_and_determinism() {
        let s = ladder("AAALAAADAR");
        let cfg = GaConfig {
            generations: 15,
            pool_size: 300,
            population: 90,
            seed: 17,
            ..Default::default()
        };
        let a = evolve(&s, &cfg).unwrap();
        let b = evolve(&s, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best, b.best);
        assert_eq!(a.trace.len(), 16);
        for w in a.trace.windows(2) {
            assert!(w[1].best_fitness >= w[0].best_fitness);
        }
        assert!(a.best.peptide.is_tryptic());
    }

    #[test]
    fn population_stays_tryptic_and_sized() {
        let s = ladder("LGVTLYK");
        let scorer = Scorer::new(&s, 0.5).unwrap();
        let cfg = GaConfig {
            population: 60,
            ..Default::default()
        };
        let mut r = rng(9);
        let pool = build_init_pool(&scorer, 200, &mut r);
        let mut population = initial_population(&pool.candidates, &cfg);
        assert_eq!(population.len(), 60);
        for _ in 0..10 {
            let pools = select_pools(&population, &cfg, &mut r);
            let mut next = breed(&population, &pools, cfg.population - cfg.elitism, &scorer, &cfg, &mut r);
            next.extend(population.iter().take(cfg.elitism).cloned());
            population = next;
            assert_eq!(population.len(), cfg.population);
            assert!(population.iter().all(|i| i.peptide.is_tryptic()));
        }
    }

    #[test]
    fn empty_pool_is_an_error() {
        let s = Spectrum::new("flat", 400.0, 2, vec![Peak::new(100.0, 1.0)]).unwrap();
        let cfg = GaConfig {
            pool_size: 0,
            ..Default::default()
        };
        assert!(matches!(evolve(&s, &cfg), Err(Error::EmptyInitPool(_))));
    }

    #[test]
    fn run_streams_differ() {
        let a: u64 = run_rng(1, 0, 0).gen();
        let b: u64 = run_rng(1, 0, 1).gen();
        let c: u64 = run_rng(1, 1, 0).gen();
        assert!(a != b && a != c && b != c);
        assert_eq!(a, run_rng(1, 0, 0).gen::<u64>());
    }
}
