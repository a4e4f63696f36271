//! Independent ground truth: the canonical response-type linear program.
//!
//! A canonical model assigns a joint probability `q(r, x)` to every pair of
//! response type `r` and natural treatment choice `x`. Consistency with the
//! experimental table fixes the response-type marginals; consistency with
//! the observational table fixes the `(x, y)` cells. Minimizing and
//! maximizing a linear objective over this polytope yields the tight
//! feasible range, used to verify every closed-form bound in this crate.
//!
//! The solver is a dense two-phase exact rational simplex with Bland's
//! anti-cycling rule. Problem sizes are tiny (a few hundred variables at
//! the size guard), so exactness wins over sparse sophistication.

use crate::model::{
    BenefitFunction, ExperimentalDistribution, Interval, ModelError, ObservationalDistribution,
    ResponseAssignment,
};
use crate::pc_bounds::CounterfactualQuery;
use crate::rational::Rational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Default cap on the number of LP variables (`n^m * m`).
pub const DEFAULT_MAX_LP_VARS: usize = 16384;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("linear program would need {vars} variables, over the limit of {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("no canonical model is consistent with both tables")]
    Infeasible,
    #[error("objective is unbounded (malformed program)")]
    Unbounded,
}

/// Equality-form linear program `A q = b`, `q >= 0` over canonical model
/// variables, with a configurable linear objective.
///
/// Variable order is deterministic: response types in canonical term order,
/// and within a response type the natural treatment `x_1..x_m`.
#[derive(Debug, Clone)]
pub struct CanonicalLp {
    num_vars: usize,
    objective: Vec<Rational>,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

/// An optimal basic feasible point and its objective value. Both are exact;
/// substituting the point into every constraint reproduces the right-hand
/// side exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub objective: Rational,
    pub point: Vec<Rational>,
}

impl CanonicalLp {
    /// Program whose objective is the benefit function: coefficient
    /// `alpha_r` on every `q(r, x)`.
    pub fn for_benefit(
        f: &BenefitFunction,
        exp: &ExperimentalDistribution,
        obs: &ObservationalDistribution,
        max_vars: usize,
    ) -> Result<Self, LpError> {
        let mut lp = Self::feasibility(exp, obs, max_vars)?;
        let (m, n) = (exp.treatment_arity(), exp.outcome_arity());
        if f.treatment_arity() != m || f.outcome_arity() != n {
            return Err(ModelError::ArityMismatch {
                m1: m,
                n1: n,
                m2: f.treatment_arity(),
                n2: f.outcome_arity(),
            }
            .into());
        }
        for term in f.terms() {
            let base = (term.assignment.term_index(n) - 1) * m;
            for x in 0..m {
                lp.objective[base + x] = term.coefficient.clone();
            }
        }
        Ok(lp)
    }

    /// Program whose objective is the probability of a counterfactual query
    /// event: indicator of the response types satisfying every pair,
    /// restricted to the observed treatment slice and to slices where the
    /// realized outcome `r[x]` matches the observed outcome.
    pub fn for_query(
        query: &CounterfactualQuery,
        exp: &ExperimentalDistribution,
        obs: &ObservationalDistribution,
        max_vars: usize,
    ) -> Result<Self, LpError> {
        let mut lp = Self::feasibility(exp, obs, max_vars)?;
        let (m, n) = (exp.treatment_arity(), exp.outcome_arity());
        let assignments = ResponseAssignment::enumerate(m, n, max_vars)?;
        for r in &assignments {
            if query.pairs().iter().any(|&(j, i)| r.outcome_under(j) != i) {
                continue;
            }
            let base = (r.term_index(n) - 1) * m;
            for x in 1..=m {
                if let Some(p) = query.observed_treatment() {
                    if x != p {
                        continue;
                    }
                }
                if let Some(q) = query.observed_outcome() {
                    if r.outcome_under(x) != q {
                        continue;
                    }
                }
                lp.objective[base + x - 1] = Rational::one();
            }
        }
        Ok(lp)
    }

    /// Constraint system shared by every objective: total mass, the
    /// experimental marginals, and the observational cells.
    fn feasibility(
        exp: &ExperimentalDistribution,
        obs: &ObservationalDistribution,
        max_vars: usize,
    ) -> Result<Self, LpError> {
        let (m, n) = (exp.treatment_arity(), exp.outcome_arity());
        if m != obs.treatment_arity() || n != obs.outcome_arity() {
            return Err(ModelError::ArityMismatch {
                m1: m,
                n1: n,
                m2: obs.treatment_arity(),
                n2: obs.outcome_arity(),
            }
            .into());
        }
        let types = crate::model::response_type_count(m, n, max_vars)?;
        let num_vars = types.checked_mul(m).ok_or(LpError::TooLarge {
            vars: usize::MAX,
            limit: max_vars,
        })?;
        if num_vars > max_vars {
            return Err(LpError::TooLarge {
                vars: num_vars,
                limit: max_vars,
            });
        }
        let assignments = ResponseAssignment::enumerate(m, n, max_vars)?;

        let mut rows = Vec::with_capacity(1 + 2 * m * n);
        let mut rhs = Vec::with_capacity(1 + 2 * m * n);

        rows.push(vec![Rational::one(); num_vars]);
        rhs.push(Rational::one());

        for j in 1..=m {
            for i in 1..=n {
                let mut row = vec![Rational::zero(); num_vars];
                for r in &assignments {
                    if r.outcome_under(j) == i {
                        let base = (r.term_index(n) - 1) * m;
                        for x in 0..m {
                            row[base + x] = Rational::one();
                        }
                    }
                }
                rows.push(row);
                rhs.push(exp.causal_prob(j, i).clone());
            }
        }

        for j in 1..=m {
            for i in 1..=n {
                let mut row = vec![Rational::zero(); num_vars];
                for r in &assignments {
                    if r.outcome_under(j) == i {
                        row[(r.term_index(n) - 1) * m + (j - 1)] = Rational::one();
                    }
                }
                rows.push(row);
                rhs.push(obs.joint_prob(j, i).clone());
            }
        }

        Ok(Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            rows,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Exact residuals `A q - b`; all zero for a valid solution point.
    pub fn residuals(&self, point: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| {
                row.iter().zip(point).map(|(a, x)| a * x).sum::<Rational>() - b
            })
            .collect()
    }

    pub fn objective_coefficients(&self) -> &[Rational] {
        &self.objective
    }

    pub fn solve_min(&self) -> Result<LpSolution, LpError> {
        simplex_min(&self.rows, &self.rhs, &self.objective)
    }

    pub fn solve_max(&self) -> Result<LpSolution, LpError> {
        let negated: Vec<Rational> = self.objective.iter().map(|c| -c).collect();
        let solution = simplex_min(&self.rows, &self.rhs, &negated)?;
        Ok(LpSolution {
            objective: -solution.objective,
            point: solution.point,
        })
    }

    /// Tight feasible range of the objective: both optima with certificates.
    pub fn solve_minmax(&self) -> Result<(LpSolution, LpSolution), LpError> {
        Ok((self.solve_min()?, self.solve_max()?))
    }

    /// Tight feasible range as an interval.
    pub fn objective_range(&self) -> Result<Interval, LpError> {
        let (min, max) = self.solve_minmax()?;
        Ok(Interval::new(min.objective, max.objective)?)
    }
}

/// Tight bounds on the benefit function from the canonical LP.
pub fn oracle_benefit_bounds(
    f: &BenefitFunction,
    exp: &ExperimentalDistribution,
    obs: &ObservationalDistribution,
) -> Result<Interval, LpError> {
    CanonicalLp::for_benefit(f, exp, obs, DEFAULT_MAX_LP_VARS)?.objective_range()
}

/// Tight bounds on a counterfactual query event from the canonical LP.
pub fn oracle_query_bounds(
    query: &CounterfactualQuery,
    exp: &ExperimentalDistribution,
    obs: &ObservationalDistribution,
) -> Result<Interval, LpError> {
    CanonicalLp::for_query(query, exp, obs, DEFAULT_MAX_LP_VARS)?.objective_range()
}

/// Dense two-phase simplex minimizing `c . x` subject to `A x = b`, `x >= 0`.
/// Bland's rule (lowest eligible index enters; ratio ties leave by lowest
/// basic variable) guarantees termination.
fn simplex_min(
    a: &[Vec<Rational>],
    b: &[Rational],
    c: &[Rational],
) -> Result<LpSolution, LpError> {
    let num_vars = c.len();
    let mut tableau: Vec<Vec<Rational>> = Vec::with_capacity(a.len());
    for (row, rhs) in a.iter().zip(b) {
        let mut t: Vec<Rational> = row.clone();
        t.push(rhs.clone());
        if rhs.is_negative() {
            for v in &mut t {
                *v = -v.clone();
            }
        }
        tableau.push(t);
    }
    let num_rows = tableau.len();

    // Phase 1: one artificial variable per row, minimize their sum.
    for (i, row) in tableau.iter_mut().enumerate() {
        let rhs = row.pop().expect("rhs present");
        for k in 0..num_rows {
            row.push(if k == i {
                Rational::one()
            } else {
                Rational::zero()
            });
        }
        row.push(rhs);
    }
    let total_cols = num_vars + num_rows;
    let mut basis: Vec<usize> = (num_vars..total_cols).collect();

    // Reduced-cost row for w = sum of artificials under the artificial basis.
    let mut cost = vec![Rational::zero(); total_cols + 1];
    for row in &tableau {
        for (j, v) in row.iter().enumerate().take(num_vars) {
            cost[j] -= v;
        }
        cost[total_cols] -= &row[total_cols];
    }
    pivot_until_optimal(&mut tableau, &mut cost, &mut basis, total_cols)?;
    if !cost[total_cols].is_zero() {
        return Err(LpError::Infeasible);
    }

    // Drive leftover artificials out of the basis; a row with no real pivot
    // column is redundant and gets dropped.
    let mut i = 0;
    while i < tableau.len() {
        if basis[i] >= num_vars {
            match (0..num_vars).find(|&j| !tableau[i][j].is_zero()) {
                Some(j) => pivot(&mut tableau, &mut cost, &mut basis, i, j),
                None => {
                    tableau.swap_remove(i);
                    basis.swap_remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2: drop artificial columns, rebuild reduced costs for c.
    for row in &mut tableau {
        let rhs = row.pop().expect("rhs present");
        row.truncate(num_vars);
        row.push(rhs);
    }
    let mut cost = vec![Rational::zero(); num_vars + 1];
    cost[..num_vars].clone_from_slice(c);
    for (i, row) in tableau.iter().enumerate() {
        let basic_cost = c[basis[i]].clone();
        if basic_cost.is_zero() {
            continue;
        }
        for j in 0..=num_vars {
            let delta = &basic_cost * &row[j];
            cost[j] -= delta;
        }
    }
    pivot_until_optimal(&mut tableau, &mut cost, &mut basis, num_vars)?;

    let mut point = vec![Rational::zero(); num_vars];
    for (i, row) in tableau.iter().enumerate() {
        point[basis[i]] = row[num_vars].clone();
    }
    // The cost row's rhs holds -objective throughout.
    Ok(LpSolution {
        objective: -cost[num_vars].clone(),
        point,
    })
}

fn pivot_until_optimal(
    tableau: &mut Vec<Vec<Rational>>,
    cost: &mut [Rational],
    basis: &mut [usize],
    num_cols: usize,
) -> Result<(), LpError> {
    loop {
        let Some(entering) = (0..num_cols).find(|&j| cost[j].is_negative()) else {
            return Ok(());
        };
        let mut leaving: Option<(usize, Rational)> = None;
        for (i, row) in tableau.iter().enumerate() {
            if !row[entering].is_positive() {
                continue;
            }
            let ratio = &row[num_cols] / &row[entering];
            let better = match &leaving {
                None => true,
                Some((best_i, best)) => {
                    ratio < *best || (ratio == *best && basis[i] < basis[*best_i])
                }
            };
            if better {
                leaving = Some((i, ratio));
            }
        }
        let Some((leave_row, _)) = leaving else {
            return Err(LpError::Unbounded);
        };
        pivot(tableau, cost, basis, leave_row, entering);
    }
}

fn pivot(
    tableau: &mut [Vec<Rational>],
    cost: &mut [Rational],
    basis: &mut [usize],
    pivot_row: usize,
    pivot_col: usize,
) {
    let inv = {
        let p = &tableau[pivot_row][pivot_col];
        Rational::one() / p
    };
    for v in &mut tableau[pivot_row] {
        *v = &*v * &inv;
    }
    for i in 0..tableau.len() {
        if i == pivot_row {
            continue;
        }
        let factor = tableau[i][pivot_col].clone();
        if factor.is_zero() {
            continue;
        }
        let (pivot_vals, row) = if i < pivot_row {
            let (head, tail) = tableau.split_at_mut(pivot_row);
            (&tail[0], &mut head[i])
        } else {
            let (head, tail) = tableau.split_at_mut(i);
            (&head[pivot_row], &mut tail[0])
        };
        for (v, p) in row.iter_mut().zip(pivot_vals.iter()) {
            let delta = &factor * p;
            *v -= delta;
        }
    }
    let factor = cost[pivot_col].clone();
    if !factor.is_zero() {
        for (v, p) in cost.iter_mut().zip(tableau[pivot_row].iter()) {
            let delta = &factor * p;
            *v -= delta;
        }
    }
    basis[pivot_row] = pivot_col;
}
