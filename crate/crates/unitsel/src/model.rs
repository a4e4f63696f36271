//! Core domain model: response assignments, experimental and observational
//! probability tables, benefit functions, intervals, and the consistency
//! check linking the two data sources.
//!
//! Index conventions: treatments `x_1..x_m` and outcomes `y_1..y_n` are
//! 1-based everywhere in the public API. An experimental table stores
//! `P(y_i | do(x_j))` at row `j`, column `i`; an observational table stores
//! the joint `P(x_j, y_i)`. A response assignment fixes one outcome per
//! treatment; the canonical term order enumerates assignments with the last
//! treatment's outcome varying fastest.

use crate::rational::{format_exact, integer, Rational};
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Default cap on the number of response types (`n^m`). The reduction search
/// and the bound tables are exponential in `m`, so large arities must be
/// opted into explicitly.
pub const DEFAULT_MAX_RESPONSE_TYPES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("treatment arity must be at least 2, got {0}")]
    TreatmentArityTooSmall(usize),
    #[error("outcome arity must be at least 2, got {0}")]
    OutcomeArityTooSmall(usize),
    #[error("tables disagree on arities: ({m1}, {n1}) vs ({m2}, {n2})")]
    ArityMismatch {
        m1: usize,
        n1: usize,
        m2: usize,
        n2: usize,
    },
    #[error("{count} response types exceed the configured limit of {limit}")]
    TooManyResponseTypes { count: usize, limit: usize },
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedTable {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("entry ({treatment}, {outcome}) = {value} is outside [0, 1]")]
    EntryOutOfRange {
        treatment: usize,
        outcome: usize,
        value: String,
    },
    #[error("experimental row {treatment} sums to {sum}, expected exactly 1")]
    RowSumNotOne { treatment: usize, sum: String },
    #[error("observational table sums to {sum}, expected exactly 1")]
    TotalNotOne { sum: String },
    #[error("{0}")]
    ZeroTotal(String),
    #[error("assignment {0:?} is invalid for m={1}, n={2}")]
    BadAssignment(Vec<usize>, usize, usize),
    #[error("term index {index} out of range 1..={limit}")]
    TermIndexOutOfRange { index: usize, limit: usize },
    #[error("duplicate assignment {0:?} in benefit function")]
    DuplicateAssignment(Vec<usize>),
    #[error("benefit vector has {got} entries, expected {expected}")]
    WrongVectorLength { got: usize, expected: usize },
    #[error("interval lower bound {lower} exceeds upper bound {upper}")]
    InvertedInterval { lower: String, upper: String },
    #[error("{what} index {index} out of range 1..={limit}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
}

fn check_arities(m: usize, n: usize) -> Result<(), ModelError> {
    if m < 2 {
        return Err(ModelError::TreatmentArityTooSmall(m));
    }
    if n < 2 {
        return Err(ModelError::OutcomeArityTooSmall(n));
    }
    Ok(())
}

/// Number of response types `n^m`, guarded against overflow and against the
/// configured enumeration limit.
pub fn response_type_count(m: usize, n: usize, limit: usize) -> Result<usize, ModelError> {
    check_arities(m, n)?;
    let mut count: usize = 1;
    for _ in 0..m {
        count = count
            .checked_mul(n)
            .filter(|&c| c <= limit)
            .ok_or(ModelError::TooManyResponseTypes {
                count: usize::MAX,
                limit,
            })?;
    }
    Ok(count)
}

/// One response type: the outcome the individual would exhibit under each
/// treatment. `outcomes[t-1]` is the (1-based) outcome under treatment `x_t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResponseAssignment {
    outcomes: Vec<usize>,
}

impl ResponseAssignment {
    pub fn new(outcomes: Vec<usize>, m: usize, n: usize) -> Result<Self, ModelError> {
        check_arities(m, n)?;
        if outcomes.len() != m || outcomes.iter().any(|&o| o < 1 || o > n) {
            return Err(ModelError::BadAssignment(outcomes, m, n));
        }
        Ok(Self { outcomes })
    }

    /// Outcome index under treatment `x_t` (1-based).
    pub fn outcome_under(&self, t: usize) -> usize {
        self.outcomes[t - 1]
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn treatment_arity(&self) -> usize {
        self.outcomes.len()
    }

    /// Canonical 1-based position of this assignment among all `n^m`:
    /// `1 + Σ_t (i_t - 1) n^(m-t)`. The last treatment's outcome varies
    /// fastest.
    pub fn term_index(&self, n: usize) -> usize {
        let mut index = 0usize;
        for &o in &self.outcomes {
            index = index * n + (o - 1);
        }
        index + 1
    }

    /// Inverse of [`term_index`](Self::term_index).
    pub fn from_term_index(index: usize, m: usize, n: usize) -> Result<Self, ModelError> {
        let count = response_type_count(m, n, usize::MAX)?;
        if index < 1 || index > count {
            return Err(ModelError::TermIndexOutOfRange {
                index,
                limit: count,
            });
        }
        let mut rest = index - 1;
        let mut outcomes = vec![0usize; m];
        for slot in outcomes.iter_mut().rev() {
            *slot = rest % n + 1;
            rest /= n;
        }
        Ok(Self { outcomes })
    }

    /// All `n^m` assignments in canonical term order.
    pub fn enumerate(m: usize, n: usize, limit: usize) -> Result<Vec<Self>, ModelError> {
        let count = response_type_count(m, n, limit)?;
        (1..=count)
            .map(|index| Self::from_term_index(index, m, n))
            .collect()
    }
}

impl fmt::Display for ResponseAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (t, o) in self.outcomes.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "y{o}")?;
        }
        write!(f, ")")
    }
}

fn check_table_shape(rows: &[Vec<Rational>], m: usize, n: usize) -> Result<(), ModelError> {
    check_arities(m, n)?;
    for (j, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ModelError::RaggedTable {
                row: j + 1,
                got: row.len(),
                expected: n,
            });
        }
        for (i, value) in row.iter().enumerate() {
            if value < &Rational::zero() || value > &Rational::one() {
                return Err(ModelError::EntryOutOfRange {
                    treatment: j + 1,
                    outcome: i + 1,
                    value: format_exact(value),
                });
            }
        }
    }
    Ok(())
}

/// Experimental (interventional) data: the `m x n` table of causal effects
/// `P(y_i | do(x_j))`. Each treatment row sums to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentalDistribution {
    m: usize,
    n: usize,
    rows: Vec<Vec<Rational>>,
}

impl ExperimentalDistribution {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        check_table_shape(&rows, m, n)?;
        for (j, row) in rows.iter().enumerate() {
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(ModelError::RowSumNotOne {
                    treatment: j + 1,
                    sum: format_exact(&sum),
                });
            }
        }
        Ok(Self { m, n, rows })
    }

    /// Builds the table from raw counts: entry `(j, i)` becomes
    /// `count / row_total(j)`.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self, ModelError> {
        let rows = counts
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let total: u64 = row.iter().sum();
                if total == 0 {
                    return Err(ModelError::ZeroTotal(format!(
                        "experimental row {} has zero total",
                        j + 1
                    )));
                }
                Ok(row
                    .iter()
                    .map(|&c| Rational::new(c.into(), total.into()))
                    .collect())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rows)
    }

    pub fn treatment_arity(&self) -> usize {
        self.m
    }

    pub fn outcome_arity(&self) -> usize {
        self.n
    }

    /// `P(y_i | do(x_j))`, 1-based indices.
    pub fn causal_prob(&self, j: usize, i: usize) -> &Rational {
        &self.rows[j - 1][i - 1]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }
}

/// Observational data: the `m x n` joint table `P(x_j, y_i)` under natural
/// treatment choice. All entries sum to exactly 1; the treatment and outcome
/// marginals are precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationalDistribution {
    m: usize,
    n: usize,
    cells: Vec<Vec<Rational>>,
    treatment_marginals: Vec<Rational>,
    outcome_marginals: Vec<Rational>,
}

impl ObservationalDistribution {
    pub fn new(cells: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let m = cells.len();
        let n = cells.first().map_or(0, Vec::len);
        check_table_shape(&cells, m, n)?;
        let total: Rational = cells.iter().flatten().sum();
        if !total.is_one() {
            return Err(ModelError::TotalNotOne {
                sum: format_exact(&total),
            });
        }
        let treatment_marginals = cells.iter().map(|row| row.iter().sum()).collect();
        let outcome_marginals = (0..n)
            .map(|i| cells.iter().map(|row| &row[i]).sum())
            .collect();
        Ok(Self {
            m,
            n,
            cells,
            treatment_marginals,
            outcome_marginals,
        })
    }

    /// Builds the table from raw counts: entry `(j, i)` becomes
    /// `count / grand_total`.
    pub fn from_counts(counts: &[Vec<u64>]) -> Result<Self, ModelError> {
        let total: u64 = counts.iter().flatten().sum();
        if total == 0 {
            return Err(ModelError::ZeroTotal(
                "observational table has zero total".to_string(),
            ));
        }
        let cells = counts
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&c| Rational::new(c.into(), total.into()))
                    .collect()
            })
            .collect();
        Self::new(cells)
    }

    pub fn treatment_arity(&self) -> usize {
        self.m
    }

    pub fn outcome_arity(&self) -> usize {
        self.n
    }

    /// `P(x_j, y_i)`, 1-based indices.
    pub fn joint_prob(&self, j: usize, i: usize) -> &Rational {
        &self.cells[j - 1][i - 1]
    }

    /// Marginal `P(x_j)`.
    pub fn treatment_prob(&self, j: usize) -> &Rational {
        &self.treatment_marginals[j - 1]
    }

    /// Marginal `P(y_i)`.
    pub fn outcome_prob(&self, i: usize) -> &Rational {
        &self.outcome_marginals[i - 1]
    }

    pub fn cells(&self) -> &[Vec<Rational>] {
        &self.cells
    }
}

/// One weighted response type in a benefit function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenefitTerm {
    pub coefficient: Rational,
    pub assignment: ResponseAssignment,
}

/// The benefit function: a coefficient for every response type. Constructed
/// from a benefit vector it holds exactly `n^m` terms in canonical order;
/// reduced forms produced by the engine may hold fewer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenefitFunction {
    m: usize,
    n: usize,
    terms: Vec<BenefitTerm>,
}

impl BenefitFunction {
    /// Builds the canonical benefit function from a vector of `n^m`
    /// coefficients in term-index order.
    pub fn from_vector(m: usize, n: usize, coefficients: Vec<Rational>) -> Result<Self, ModelError> {
        Self::from_vector_bounded(m, n, coefficients, DEFAULT_MAX_RESPONSE_TYPES)
    }

    /// As [`from_vector`](Self::from_vector) with an explicit response-type
    /// limit.
    pub fn from_vector_bounded(
        m: usize,
        n: usize,
        coefficients: Vec<Rational>,
        limit: usize,
    ) -> Result<Self, ModelError> {
        let count = response_type_count(m, n, limit)?;
        if coefficients.len() != count {
            return Err(ModelError::WrongVectorLength {
                got: coefficients.len(),
                expected: count,
            });
        }
        let terms = coefficients
            .into_iter()
            .enumerate()
            .map(|(k, coefficient)| {
                Ok(BenefitTerm {
                    coefficient,
                    assignment: ResponseAssignment::from_term_index(k + 1, m, n)?,
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Self { m, n, terms })
    }

    /// Builds from explicit terms; assignments must be valid and distinct.
    pub fn from_terms(m: usize, n: usize, terms: Vec<BenefitTerm>) -> Result<Self, ModelError> {
        check_arities(m, n)?;
        let mut seen = std::collections::HashSet::new();
        for term in &terms {
            let a = &term.assignment;
            if a.treatment_arity() != m || a.outcomes().iter().any(|&o| o < 1 || o > n) {
                return Err(ModelError::BadAssignment(a.outcomes().to_vec(), m, n));
            }
            if !seen.insert(a.clone()) {
                return Err(ModelError::DuplicateAssignment(a.outcomes().to_vec()));
            }
        }
        Ok(Self { m, n, terms })
    }

    pub fn treatment_arity(&self) -> usize {
        self.m
    }

    pub fn outcome_arity(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[BenefitTerm] {
        &self.terms
    }

    /// Coefficients in canonical order (only meaningful for full functions).
    pub fn coefficients(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.terms.len()];
        for term in &self.terms {
            out[term.assignment.term_index(self.n) - 1] = term.coefficient.clone();
        }
        out
    }
}

/// Exact interval `[lower, upper]` on a probability or benefit value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lower: Rational,
    upper: Rational,
}

impl Interval {
    pub fn new(lower: Rational, upper: Rational) -> Result<Self, ModelError> {
        if lower > upper {
            return Err(ModelError::InvertedInterval {
                lower: format_exact(&lower),
                upper: format_exact(&upper),
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn point(value: Rational) -> Self {
        Self {
            lower: value.clone(),
            upper: value,
        }
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn midpoint(&self) -> Rational {
        (&self.upper + &self.lower) / integer(2)
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, value: &Rational) -> bool {
        &self.lower <= value && value <= &self.upper
    }

    /// True when `other` lies inside `self`.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_exact(&self.lower),
            format_exact(&self.upper)
        )
    }
}

/// Constraint kinds reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `Σ_i P(y_i | do(x_j)) = 1`
    ExperimentalRowSum,
    /// `Σ_{j,i} P(x_j, y_i) = 1`
    ObservationalTotal,
    /// `P(x_j, y_i) <= P(y_i | do(x_j))`
    LowerRelation,
    /// `P(y_i | do(x_j)) <= P(x_j, y_i) + 1 - P(x_j)`
    UpperRelation,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            Constraint::ExperimentalRowSum => "sum_i P(y_i|do(x_j)) = 1",
            Constraint::ObservationalTotal => "sum P(x,y) = 1",
            Constraint::LowerRelation => "P(x,y) <= P(y|do(x))",
            Constraint::UpperRelation => "P(y|do(x)) <= P(x,y) + 1 - P(x)",
        };
        f.write_str(text)
    }
}

/// One violated constraint with its exact slack (how far past the bound the
/// data lies).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub treatment: Option<usize>,
    pub outcome: Option<usize>,
    pub slack: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(j) = self.treatment {
            write!(f, " at x{j}")?;
        }
        if let Some(i) = self.outcome {
            write!(f, ", y{i}")?;
        }
        write!(f, ": violated by {}", format_exact(&self.slack))
    }
}

/// Outcome of [`validate`]: empty violation list means the dataset is
/// jointly usable by every bound computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the general relation `P(x,y) <= P(y|do(x)) <= P(x,y) + 1 - P(x)`
/// for every treatment/outcome pair, re-asserting the table sum invariants.
/// Every violated constraint appears once with its exact slack.
pub fn validate(
    exp: &ExperimentalDistribution,
    obs: &ObservationalDistribution,
) -> Result<ValidationReport, ModelError> {
    let (m, n) = (exp.treatment_arity(), exp.outcome_arity());
    if m != obs.treatment_arity() || n != obs.outcome_arity() {
        return Err(ModelError::ArityMismatch {
            m1: m,
            n1: n,
            m2: obs.treatment_arity(),
            n2: obs.outcome_arity(),
        });
    }
    let mut violations = Vec::new();
    for j in 1..=m {
        let row_sum: Rational = exp.rows()[j - 1].iter().sum();
        if !row_sum.is_one() {
            violations.push(Violation {
                constraint: Constraint::ExperimentalRowSum,
                treatment: Some(j),
                outcome: None,
                slack: (row_sum - Rational::one()).abs(),
            });
        }
    }
    let total: Rational = obs.cells().iter().flatten().sum();
    if !total.is_one() {
        violations.push(Violation {
            constraint: Constraint::ObservationalTotal,
            treatment: None,
            outcome: None,
            slack: (total - Rational::one()).abs(),
        });
    }
    for j in 1..=m {
        for i in 1..=n {
            let causal = exp.causal_prob(j, i);
            let joint = obs.joint_prob(j, i);
            if joint > causal {
                violations.push(Violation {
                    constraint: Constraint::LowerRelation,
                    treatment: Some(j),
                    outcome: Some(i),
                    slack: joint - causal,
                });
            }
            let reach = joint + Rational::one() - obs.treatment_prob(j);
            if causal > &reach {
                violations.push(Violation {
                    constraint: Constraint::UpperRelation,
                    treatment: Some(j),
                    outcome: Some(i),
                    slack: causal - reach,
                });
            }
        }
    }
    Ok(ValidationReport { violations })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Clinical-study tables used across the crate's tests: two treatments
    /// (vaccinated / unvaccinated), three outcomes (uninfected /
    /// asymptomatic / severe).
    pub fn vaccine() -> (ExperimentalDistribution, ObservationalDistribution) {
        let exp = ExperimentalDistribution::from_counts(&[
            vec![52, 512, 36],
            vec![329, 58, 213],
        ])
        .unwrap();
        let obs = ObservationalDistribution::from_counts(&[
            vec![14, 933, 6],
            vec![121, 65, 61],
        ])
        .unwrap();
        (exp, obs)
    }

    pub fn task1_vector() -> Vec<Rational> {
        [0, 1, 1, -1, 0, 1, -1, -1, 0]
            .iter()
            .map(|&c| integer(c))
            .collect()
    }

    pub fn task2_vector() -> Vec<Rational> {
        [0, 1, 2, -1, 0, 1, -2, -1, 0]
            .iter()
            .map(|&c| integer(c))
            .collect()
    }
}
