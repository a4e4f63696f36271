//! Random population generation and the bound-quality study.
//!
//! A population is a vector of response-type fractions drawn by sorted
//! uniform cuts. Its experimental table follows exactly; an observational
//! table is drawn by sequential conditional uniforms and kept only when the
//! general relation between the two tables holds, otherwise the whole
//! population is redrawn.
//!
//! Every draw lands on a rational grid (uniform integer numerators over a
//! fixed power-of-two denominator), so the entire pipeline — generation,
//! bounds, real benefit, containment checks — stays exact and needs no
//! tolerance anywhere. Populations use per-index RNG substreams, so
//! parallel and serial runs produce identical output.

use crate::engine::{bound_benefit, EngineConfig, EngineError};
use crate::model::{
    validate, BenefitFunction, ExperimentalDistribution, ModelError, ObservationalDistribution,
    ResponseAssignment,
};
use crate::rational::{format_decimal, format_exact, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;
use std::io;
use thiserror::Error;

/// Grid denominator for uniform rational draws.
pub const DEFAULT_GRID: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("observational sampling is defined for m=2, n=3; got m={m}, n={n}")]
    UnsupportedArity { m: usize, n: usize },
    #[error("population {population} rejected {attempts} times, over the cap")]
    RejectionCapExceeded { population: usize, attempts: u64 },
    #[error("population count must be at least 1")]
    EmptyStudy,
}

/// Ground-truth probabilities of the `n^m` response types, canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationFractions {
    m: usize,
    n: usize,
    fractions: Vec<Rational>,
}

impl PopulationFractions {
    pub fn new(m: usize, n: usize, fractions: Vec<Rational>) -> Result<Self, ModelError> {
        let count = crate::model::response_type_count(m, n, usize::MAX)?;
        if fractions.len() != count {
            return Err(ModelError::WrongVectorLength {
                got: fractions.len(),
                expected: count,
            });
        }
        Ok(Self { m, n, fractions })
    }

    pub fn fractions(&self) -> &[Rational] {
        &self.fractions
    }

    pub fn by_term_index(&self, index: usize) -> &Rational {
        &self.fractions[index - 1]
    }

    pub fn get(&self, assignment: &ResponseAssignment) -> &Rational {
        self.by_term_index(assignment.term_index(self.n))
    }

    pub fn treatment_arity(&self) -> usize {
        self.m
    }

    pub fn outcome_arity(&self) -> usize {
        self.n
    }
}

/// RNG substream for one population: identical across serial and parallel
/// schedules.
pub fn population_rng(seed: u64, population: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(population);
    rng
}

fn draw_unit(rng: &mut ChaCha8Rng, grid: u64) -> Rational {
    Rational::new(BigInt::from(rng.gen_range(0..=grid)), BigInt::from(grid))
}

fn draw_between(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, grid: u64) -> Rational {
    lo + (hi - lo) * draw_unit(rng, grid)
}

/// Sorted-cuts construction: consecutive differences of the sorted cuts
/// (with 1 appended) are nonnegative and sum to exactly 1.
pub fn fractions_from_cuts(
    m: usize,
    n: usize,
    mut cuts: Vec<Rational>,
) -> Result<PopulationFractions, ModelError> {
    cuts.push(Rational::one());
    cuts.sort_unstable();
    let mut previous = Rational::zero();
    let fractions = cuts
        .into_iter()
        .map(|cut| {
            let f = &cut - &previous;
            previous = cut;
            f
        })
        .collect();
    PopulationFractions::new(m, n, fractions)
}

/// Draws one population: `n^m - 1` uniform cuts on the grid.
pub fn generate_fractions(
    m: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
    grid: u64,
) -> Result<PopulationFractions, ModelError> {
    let count = crate::model::response_type_count(m, n, usize::MAX)?;
    let cuts = (0..count - 1).map(|_| draw_unit(rng, grid)).collect();
    fractions_from_cuts(m, n, cuts)
}

/// Experimental table induced by ground-truth fractions:
/// `P(y_i | do(x_t))` sums the fractions of every response type whose
/// outcome under `x_t` is `y_i`.
pub fn derive_experimental(
    fractions: &PopulationFractions,
) -> Result<ExperimentalDistribution, ModelError> {
    let (m, n) = (fractions.treatment_arity(), fractions.outcome_arity());
    let assignments = ResponseAssignment::enumerate(m, n, usize::MAX)?;
    let mut rows = vec![vec![Rational::zero(); n]; m];
    for assignment in &assignments {
        let f = fractions.get(assignment);
        for t in 1..=m {
            rows[t - 1][assignment.outcome_under(t) - 1] += f;
        }
    }
    ExperimentalDistribution::new(rows)
}

/// Draws an observational table compatible with `exp` by sequential
/// conditional uniforms, for the two-treatment, three-outcome study shape.
/// Returns `None` when a draw range inverts or the general-relation check
/// fails; the caller then redraws the whole population.
pub fn sample_observational(
    exp: &ExperimentalDistribution,
    rng: &mut ChaCha8Rng,
    grid: u64,
) -> Result<Option<ObservationalDistribution>, SimError> {
    let (m, n) = (exp.treatment_arity(), exp.outcome_arity());
    if (m, n) != (2, 3) {
        return Err(SimError::UnsupportedArity { m, n });
    }
    let zero = Rational::zero();
    let one = Rational::one();

    let o11 = draw_between(rng, &zero, exp.causal_prob(1, 1), grid);
    let o12 = draw_between(rng, &zero, exp.causal_prob(1, 2), grid);
    let px1_low = &o11 + &o12;
    let px1_high = (&o11 + &one - exp.causal_prob(1, 1))
        .min(&o12 + &one - exp.causal_prob(2, 1));
    if px1_low > px1_high {
        return Ok(None);
    }
    let px1 = draw_between(rng, &px1_low, &px1_high, grid);
    let o13 = &px1 - &o11 - &o12;
    let px2 = &one - &px1;
    let o21 = draw_between(rng, &zero, &exp.causal_prob(2, 1).clone().min(px2.clone()), grid);
    let o22_cap = exp.causal_prob(2, 2).clone().min(&px2 - &o21);
    let o22 = draw_between(rng, &zero, &o22_cap, grid);
    let o23 = &px2 - &o21 - &o22;

    let obs = ObservationalDistribution::new(vec![vec![o11, o12, o13], vec![o21, o22, o23]])?;
    if validate(exp, &obs)?.ok() {
        Ok(Some(obs))
    } else {
        Ok(None)
    }
}

/// Expected benefit of the ground-truth population: the dot product of the
/// benefit vector with the response-type fractions.
pub fn real_benefit(
    fractions: &PopulationFractions,
    coefficients: &[Rational],
) -> Result<Rational, ModelError> {
    if coefficients.len() != fractions.fractions().len() {
        return Err(ModelError::WrongVectorLength {
            got: coefficients.len(),
            expected: fractions.fractions().len(),
        });
    }
    Ok(coefficients
        .iter()
        .zip(fractions.fractions())
        .map(|(c, f)| c * f)
        .sum())
}

/// Random jointly consistent dataset from a ground-truth canonical model:
/// draws a full joint over (response type, natural treatment), then reads
/// off both tables. The resulting pair always passes validation and always
/// admits a feasible canonical model (the generator itself).
pub fn random_consistent_tables(
    m: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
    grid: u64,
) -> Result<
    (
        PopulationFractions,
        ExperimentalDistribution,
        ObservationalDistribution,
    ),
    ModelError,
> {
    let types = crate::model::response_type_count(m, n, usize::MAX)?;
    let assignments = ResponseAssignment::enumerate(m, n, usize::MAX)?;
    let weights = loop {
        let raw: Vec<u64> = (0..types * m).map(|_| rng.gen_range(0..=grid)).collect();
        let total: u128 = raw.iter().map(|&w| w as u128).sum();
        if total > 0 {
            let total = BigInt::from(total);
            break raw
                .into_iter()
                .map(|w| Rational::new(BigInt::from(w), total.clone()))
                .collect::<Vec<_>>();
        }
    };
    let q = |r: usize, x: usize| &weights[r * m + (x - 1)];

    let mut fractions = vec![Rational::zero(); types];
    for r in 0..types {
        for x in 1..=m {
            fractions[r] += q(r, x);
        }
    }
    let mut exp_rows = vec![vec![Rational::zero(); n]; m];
    let mut obs_cells = vec![vec![Rational::zero(); n]; m];
    for (r, assignment) in assignments.iter().enumerate() {
        for t in 1..=m {
            let i = assignment.outcome_under(t);
            exp_rows[t - 1][i - 1] += &fractions[r];
            obs_cells[t - 1][i - 1] += q(r, t);
        }
    }
    let fractions = PopulationFractions::new(m, n, fractions)?;
    let exp = ExperimentalDistribution::new(exp_rows)?;
    let obs = ObservationalDistribution::new(obs_cells)?;
    Ok((fractions, exp, obs))
}

/// Study configuration. Defaults mirror the reference study: 1000
/// populations of the two-treatment, three-outcome shape.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub m: usize,
    pub n: usize,
    pub benefit: Vec<Rational>,
    pub populations: usize,
    pub seed: u64,
    pub rejection_cap: u64,
    pub grid: u64,
    pub engine: EngineConfig,
}

impl SimConfig {
    pub fn new(benefit: Vec<Rational>, seed: u64) -> Self {
        Self {
            m: 2,
            n: 3,
            benefit,
            populations: 1000,
            seed,
            rejection_cap: 100_000,
            grid: DEFAULT_GRID,
            engine: EngineConfig::default(),
        }
    }
}

/// Per-population study result. All values exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimRecord {
    pub id: usize,
    pub lower: Rational,
    pub upper: Rational,
    pub midpoint: Rational,
    pub real: Rational,
    pub gap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudySummary {
    pub count: usize,
    pub average_gap: Rational,
    /// Populations whose real benefit fell outside the computed bounds.
    pub containment_violations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StudyOutput {
    pub records: Vec<SimRecord>,
    pub summary: StudySummary,
}

/// Runs the full study: per accepted population, bounds from the engine and
/// the real benefit from the ground-truth fractions. Populations are
/// processed in parallel; records come back ordered by id and the summary
/// is a deterministic fold over them.
pub fn run_study(cfg: &SimConfig) -> Result<StudyOutput, SimError> {
    if cfg.populations == 0 {
        return Err(SimError::EmptyStudy);
    }
    let benefit = BenefitFunction::from_vector_bounded(
        cfg.m,
        cfg.n,
        cfg.benefit.clone(),
        cfg.engine.max_response_types,
    )?;
    let records = (0..cfg.populations)
        .into_par_iter()
        .map(|id| run_population(id, cfg, &benefit))
        .collect::<Result<Vec<_>, _>>()?;

    let mut total_gap = Rational::zero();
    let mut violations = 0usize;
    for record in &records {
        total_gap += &record.gap;
        if record.real < record.lower || record.real > record.upper {
            violations += 1;
        }
    }
    let average_gap = total_gap / crate::rational::integer(cfg.populations as i64);
    Ok(StudyOutput {
        records,
        summary: StudySummary {
            count: cfg.populations,
            average_gap,
            containment_violations: violations,
            seed: cfg.seed,
        },
    })
}

fn run_population(
    id: usize,
    cfg: &SimConfig,
    benefit: &BenefitFunction,
) -> Result<SimRecord, SimError> {
    let mut rng = population_rng(cfg.seed, id as u64);
    let mut attempts: u64 = 0;
    let (fractions, exp, obs) = loop {
        attempts += 1;
        if attempts > cfg.rejection_cap {
            return Err(SimError::RejectionCapExceeded {
                population: id,
                attempts: attempts - 1,
            });
        }
        let fractions = generate_fractions(cfg.m, cfg.n, &mut rng, cfg.grid)?;
        let exp = derive_experimental(&fractions)?;
        if let Some(obs) = sample_observational(&exp, &mut rng, cfg.grid)? {
            break (fractions, exp, obs);
        }
    };
    let bounds = bound_benefit(benefit, &exp, &obs, &cfg.engine)?;
    let real = real_benefit(&fractions, &cfg.benefit)?;
    Ok(SimRecord {
        id,
        lower: bounds.interval.lower().clone(),
        upper: bounds.interval.upper().clone(),
        midpoint: bounds.interval.midpoint(),
        real,
        gap: bounds.interval.width(),
    })
}

/// Writes records as CSV (`id,lower,upper,midpoint,real,gap`), decimals at
/// the given precision, up to `limit` records when set.
pub fn write_records_csv<W: io::Write>(
    out: &mut W,
    records: &[SimRecord],
    precision: usize,
    limit: Option<usize>,
) -> io::Result<()> {
    writeln!(out, "id,lower,upper,midpoint,real,gap")?;
    let shown = limit.unwrap_or(records.len()).min(records.len());
    for record in &records[..shown] {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            record.id,
            format_decimal(&record.lower, precision),
            format_decimal(&record.upper, precision),
            format_decimal(&record.midpoint, precision),
            format_decimal(&record.real, precision),
            format_decimal(&record.gap, precision),
        )?;
    }
    Ok(())
}

/// Study summary as JSON, with the average gap both exact and rounded.
pub fn summary_json(
    vector: &[Rational],
    summary: &StudySummary,
    precision: usize,
) -> serde_json::Value {
    json!({
        "vector": vector.iter().map(format_exact).collect::<Vec<_>>(),
        "count": summary.count,
        "avg_gap": format_decimal(&summary.average_gap, precision),
        "avg_gap_exact": format_exact(&summary.average_gap),
        "violations": summary.containment_violations,
        "seed": summary.seed,
    })
}
