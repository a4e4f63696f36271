//! Identifiability and bounds of the benefit function via exhaustive
//! exploration of equivalent rewritings.
//!
//! The `n^(m-1)` response types sharing one outcome at one treatment
//! position sum, without coefficients, to a single experimental probability.
//! A reduction exploits this: pick such a complete group and a member to
//! keep, subtract the kept coefficient from every other member, remove the
//! kept term, and add `kept_coefficient * P(y_i | do(x_r))` to a running
//! adjustment. The rewritten function plus adjustment is value-equivalent
//! to the original.
//!
//! Searching all reachable rewritings depth-first: a state whose
//! coefficients are all zero identifies the benefit value exactly; otherwise
//! every state contributes a candidate interval (coefficients paired with
//! per-response-type bounds), and the tightest combination over the
//! reachable set is the answer. States are memoized by their coefficient
//! multiset, with adjustments tracked separately so that rewriting orders
//! share cached sub-results.

use crate::model::{
    BenefitFunction, BenefitTerm, ExperimentalDistribution, Interval, ModelError,
    ObservationalDistribution, ResponseAssignment, DEFAULT_MAX_RESPONSE_TYPES,
};
use crate::pc_bounds::{BoundsEvaluator, JointBoundsTable, PcBoundsError};
use crate::rational::Rational;
use num_traits::Zero;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bounds(#[from] PcBoundsError),
    #[error("search state budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("group member slot {slot} out of range ({members} members)")]
    BadKeepSlot { slot: usize, members: usize },
}

/// Search configuration. `max_states` caps the number of distinct states the
/// search may expand; exceeding it is reported, never silently wrong.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub memoize: bool,
    pub max_states: u64,
    pub max_response_types: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            memoize: true,
            max_states: 10_000_000,
            max_response_types: DEFAULT_MAX_RESPONSE_TYPES,
        }
    }
}

/// A complete reduction group: all `n^(m-1)` present terms whose assignment
/// has `outcome` at treatment `position`. `members` are positions into the
/// term list the group was found in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionGroup {
    pub position: usize,
    pub outcome: usize,
    pub members: Vec<usize>,
}

/// One reduction along a search chain, for traces and walkthroughs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionStep {
    pub position: usize,
    pub outcome: usize,
    pub kept: ResponseAssignment,
    pub kept_coefficient: Rational,
    pub adjustment: Rational,
}

/// Outcome of the identifiability search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifiabilityResult {
    pub identifiable: bool,
    /// Exact value of the benefit function; meaningful only when
    /// `identifiable` is true.
    pub value: Rational,
    pub states_explored: u64,
    /// Reduction chain reaching the all-zero state (empty when not
    /// identifiable or when no reduction was needed).
    pub trace: Vec<ReductionStep>,
}

/// Outcome of the bounds search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenefitBounds {
    pub interval: Interval,
    /// True when the state budget stopped the search early; the interval is
    /// then valid but possibly looser than the full search would give.
    pub partial: bool,
    pub states_explored: u64,
    /// Reduction chains reaching the states whose candidates achieved the
    /// final lower and upper bounds (empty when memoization was off or the
    /// search was partial).
    pub lower_trace: Vec<ReductionStep>,
    pub upper_trace: Vec<ReductionStep>,
}

/// Finds every complete reduction group in `f`, ordered by
/// (position, outcome). Zero-coefficient terms count as present.
pub fn find_groups(f: &BenefitFunction) -> Vec<ReductionGroup> {
    let (m, n) = (f.treatment_arity(), f.outcome_arity());
    let required = full_group_size(m, n);
    let mut groups = Vec::new();
    for position in 1..=m {
        for outcome in 1..=n {
            let members: Vec<usize> = f
                .terms()
                .iter()
                .enumerate()
                .filter(|(_, term)| term.assignment.outcome_under(position) == outcome)
                .map(|(slot, _)| slot)
                .collect();
            // Assignments are distinct, so a full count means every
            // assignment with this (position, outcome) is present.
            if members.len() == required {
                groups.push(ReductionGroup {
                    position,
                    outcome,
                    members,
                });
            }
        }
    }
    groups
}

fn full_group_size(m: usize, n: usize) -> usize {
    n.pow(m as u32 - 1)
}

/// Applies one reduction: keeps `group.members[keep_slot]`, folds its
/// coefficient into the other members, removes it, and returns the rewritten
/// function together with the adjustment
/// `kept_coefficient * P(y_outcome | do(x_position))`.
pub fn reduce(
    f: &BenefitFunction,
    group: &ReductionGroup,
    keep_slot: usize,
    exp: &ExperimentalDistribution,
) -> Result<(BenefitFunction, Rational), EngineError> {
    if keep_slot >= group.members.len() {
        return Err(EngineError::BadKeepSlot {
            slot: keep_slot,
            members: group.members.len(),
        });
    }
    let keep_pos = group.members[keep_slot];
    let keep_coef = f.terms()[keep_pos].coefficient.clone();
    let adjustment = &keep_coef * exp.causal_prob(group.position, group.outcome);
    let terms: Vec<BenefitTerm> = f
        .terms()
        .iter()
        .enumerate()
        .filter(|&(slot, _)| slot != keep_pos)
        .map(|(slot, term)| {
            let mut term = term.clone();
            if group.members.contains(&slot) {
                term.coefficient -= &keep_coef;
            }
            term
        })
        .collect();
    let reduced = BenefitFunction::from_terms(f.treatment_arity(), f.outcome_arity(), terms)?;
    Ok((reduced, adjustment))
}

// --- internal search machinery ----------------------------------------------

/// Compact search state: (canonical term index, coefficient) pairs sorted by
/// term index. Assignments never change during a search, only coefficients
/// and membership.
type State = Vec<(u32, Rational)>;

struct GroupDef {
    position: usize,
    outcome: usize,
    /// Term indices of every assignment with `outcome` at `position`.
    members: Vec<u32>,
}

struct SearchCtx<'a> {
    exp: &'a ExperimentalDistribution,
    group_defs: Vec<GroupDef>,
    assignments: Vec<ResponseAssignment>,
    memoize: bool,
    max_states: u64,
    states: u64,
    budget_hit: bool,
}

impl<'a> SearchCtx<'a> {
    fn new(
        f: &BenefitFunction,
        exp: &'a ExperimentalDistribution,
        cfg: &EngineConfig,
    ) -> Result<Self, EngineError> {
        let (m, n) = (f.treatment_arity(), f.outcome_arity());
        if m != exp.treatment_arity() || n != exp.outcome_arity() {
            return Err(ModelError::ArityMismatch {
                m1: m,
                n1: n,
                m2: exp.treatment_arity(),
                n2: exp.outcome_arity(),
            }
            .into());
        }
        let assignments = ResponseAssignment::enumerate(m, n, cfg.max_response_types)?;
        let mut group_defs = Vec::with_capacity(m * n);
        for position in 1..=m {
            for outcome in 1..=n {
                let members = assignments
                    .iter()
                    .filter(|a| a.outcome_under(position) == outcome)
                    .map(|a| a.term_index(n) as u32)
                    .collect();
                group_defs.push(GroupDef {
                    position,
                    outcome,
                    members,
                });
            }
        }
        Ok(Self {
            exp,
            group_defs,
            assignments,
            memoize: cfg.memoize,
            max_states: cfg.max_states,
            states: 0,
            budget_hit: false,
        })
    }

    fn initial_state(&self, f: &BenefitFunction) -> State {
        let n = self.exp.outcome_arity();
        let mut state: State = f
            .terms()
            .iter()
            .map(|t| (t.assignment.term_index(n) as u32, t.coefficient.clone()))
            .collect();
        state.sort_unstable_by_key(|&(idx, _)| idx);
        state
    }

    fn assignment(&self, term_index: u32) -> &ResponseAssignment {
        &self.assignments[term_index as usize - 1]
    }

    /// Ordinals of group definitions whose members are all present.
    fn active_groups(&self, state: &State) -> Vec<usize> {
        self.group_defs
            .iter()
            .enumerate()
            .filter(|(_, def)| {
                let mut it = state.iter().map(|&(idx, _)| idx).peekable();
                def.members.iter().all(|&member| {
                    while let Some(&present) = it.peek() {
                        if present < member {
                            it.next();
                        } else {
                            return present == member;
                        }
                    }
                    false
                })
            })
            .map(|(ordinal, _)| ordinal)
            .collect()
    }

    /// Applies the reduction keeping `keep` (a term index inside the group),
    /// returning the child state, the adjustment, and the trace step.
    fn reduce_state(&self, state: &State, group_ordinal: usize, keep: u32) -> (State, Rational, ReductionStep) {
        let def = &self.group_defs[group_ordinal];
        let keep_coef = state
            .iter()
            .find(|&&(idx, _)| idx == keep)
            .map(|(_, c)| c.clone())
            .expect("keep is a present group member");
        let adjustment = &keep_coef * self.exp.causal_prob(def.position, def.outcome);
        let child: State = state
            .iter()
            .filter(|&&(idx, _)| idx != keep)
            .map(|(idx, coef)| {
                if def.members.binary_search(idx).is_ok() {
                    (*idx, coef - &keep_coef)
                } else {
                    (*idx, coef.clone())
                }
            })
            .collect();
        let step = ReductionStep {
            position: def.position,
            outcome: def.outcome,
            kept: self.assignment(keep).clone(),
            kept_coefficient: keep_coef,
            adjustment: adjustment.clone(),
        };
        (child, adjustment, step)
    }

    fn charge_state(&mut self) -> Result<(), ()> {
        if self.states >= self.max_states {
            self.budget_hit = true;
            return Err(());
        }
        self.states += 1;
        Ok(())
    }
}

// --- identifiability ----------------------------------------------------------

#[derive(Clone)]
struct IdentChain {
    value: Rational,
    steps: Vec<ReductionStep>,
}

/// Decides identifiability of `f` from experimental data alone. Depth-first
/// search over rewritings; the first all-zero-coefficient state yields the
/// exact value (the accumulated adjustment).
pub fn identify(
    f: &BenefitFunction,
    exp: &ExperimentalDistribution,
    cfg: &EngineConfig,
) -> Result<IdentifiabilityResult, EngineError> {
    let mut ctx = SearchCtx::new(f, exp, cfg)?;
    let mut memo: HashMap<State, Option<IdentChain>> = HashMap::new();
    let root = ctx.initial_state(f);
    let outcome = identify_search(&root, &mut ctx, &mut memo)
        .map_err(|()| EngineError::BudgetExceeded(cfg.max_states))?;
    Ok(match outcome {
        Some(chain) => IdentifiabilityResult {
            identifiable: true,
            value: chain.value,
            states_explored: ctx.states,
            trace: chain.steps,
        },
        None => IdentifiabilityResult {
            identifiable: false,
            value: Rational::zero(),
            states_explored: ctx.states,
            trace: Vec::new(),
        },
    })
}

fn identify_search(
    state: &State,
    ctx: &mut SearchCtx<'_>,
    memo: &mut HashMap<State, Option<IdentChain>>,
) -> Result<Option<IdentChain>, ()> {
    if state.iter().all(|(_, coef)| coef.is_zero()) {
        return Ok(Some(IdentChain {
            value: Rational::zero(),
            steps: Vec::new(),
        }));
    }
    if ctx.memoize {
        if let Some(hit) = memo.get(state) {
            return Ok(hit.clone());
        }
    }
    ctx.charge_state().map_err(|()| ())?;

    let mut found: Option<IdentChain> = None;
    'groups: for ordinal in ctx.active_groups(state) {
        let members = ctx.group_defs[ordinal].members.clone();
        for keep in members {
            let (child, adjustment, step) = ctx.reduce_state(state, ordinal, keep);
            if let Some(chain) = identify_search(&child, ctx, memo)? {
                let mut steps = vec![step];
                steps.extend(chain.steps);
                found = Some(IdentChain {
                    value: adjustment + chain.value,
                    steps,
                });
                break 'groups;
            }
        }
    }
    if ctx.memoize {
        memo.insert(state.clone(), found.clone());
    }
    Ok(found)
}

// --- bounds ---------------------------------------------------------------

#[derive(Clone)]
struct StateBounds {
    lower: Rational,
    upper: Rational,
    /// Reduction achieving the bound: (group ordinal, kept term index), or
    /// None when the base candidate at this state achieves it.
    lower_via: Option<(usize, u32)>,
    upper_via: Option<(usize, u32)>,
}

/// Computes bounds on `f` from both data tables: per-response-type intervals
/// feed a candidate at every reachable rewriting, combined by max (lower)
/// and min (upper). Identifiable inputs automatically collapse to a point.
pub fn bound_benefit(
    f: &BenefitFunction,
    exp: &ExperimentalDistribution,
    obs: &ObservationalDistribution,
    cfg: &EngineConfig,
) -> Result<BenefitBounds, EngineError> {
    let evaluator = BoundsEvaluator::with_options(exp, obs, cfg.memoize, cfg.max_response_types)?;
    let table = evaluator.bounds_for_all_full_joints()?;
    bound_benefit_with_table(f, exp, &table, cfg)
}

/// As [`bound_benefit`], reusing an existing per-response-type bound table.
pub fn bound_benefit_with_table(
    f: &BenefitFunction,
    exp: &ExperimentalDistribution,
    table: &JointBoundsTable,
    cfg: &EngineConfig,
) -> Result<BenefitBounds, EngineError> {
    let mut ctx = SearchCtx::new(f, exp, cfg)?;
    let mut memo: HashMap<State, StateBounds> = HashMap::new();
    let root = ctx.initial_state(f);
    let bounds = bounds_search(&root, &mut ctx, &mut memo, table);
    let partial = ctx.budget_hit;
    let (lower_trace, upper_trace) = if ctx.memoize && !partial {
        (
            replay_chain(&root, &ctx, &memo, Side::Lower),
            replay_chain(&root, &ctx, &memo, Side::Upper),
        )
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(BenefitBounds {
        interval: Interval::new(bounds.lower, bounds.upper)?,
        partial,
        states_explored: ctx.states,
        lower_trace,
        upper_trace,
    })
}

fn base_candidate(state: &State, table: &JointBoundsTable) -> (Rational, Rational) {
    let mut lower = Rational::zero();
    let mut upper = Rational::zero();
    for (idx, coef) in state {
        let interval = table.by_term_index(*idx as usize);
        if coef.is_zero() {
            continue;
        }
        if coef < &Rational::zero() {
            lower += coef * interval.upper();
            upper += coef * interval.lower();
        } else {
            lower += coef * interval.lower();
            upper += coef * interval.upper();
        }
    }
    (lower, upper)
}

fn bounds_search(
    state: &State,
    ctx: &mut SearchCtx<'_>,
    memo: &mut HashMap<State, StateBounds>,
    table: &JointBoundsTable,
) -> StateBounds {
    if ctx.memoize {
        if let Some(hit) = memo.get(state) {
            return hit.clone();
        }
    }
    let (base_lower, base_upper) = base_candidate(state, table);
    let mut bounds = StateBounds {
        lower: base_lower,
        upper: base_upper,
        lower_via: None,
        upper_via: None,
    };
    if ctx.charge_state().is_err() {
        // Budget exhausted: the base candidate alone is still a valid
        // (possibly loose) answer. Not memoized.
        return bounds;
    }
    for ordinal in ctx.active_groups(state) {
        let members = ctx.group_defs[ordinal].members.clone();
        for keep in members {
            let (child, adjustment, _) = ctx.reduce_state(state, ordinal, keep);
            let child_bounds = bounds_search(&child, ctx, memo, table);
            let lower = &adjustment + child_bounds.lower;
            let upper = adjustment + child_bounds.upper;
            if lower > bounds.lower {
                bounds.lower = lower;
                bounds.lower_via = Some((ordinal, keep));
            }
            if upper < bounds.upper {
                bounds.upper = upper;
                bounds.upper_via = Some((ordinal, keep));
            }
        }
    }
    if ctx.memoize && !ctx.budget_hit {
        memo.insert(state.clone(), bounds.clone());
    }
    bounds
}

enum Side {
    Lower,
    Upper,
}

/// Walks the recorded best-reduction chain from the root state for one side
/// of the final interval.
fn replay_chain(
    root: &State,
    ctx: &SearchCtx<'_>,
    memo: &HashMap<State, StateBounds>,
    side: Side,
) -> Vec<ReductionStep> {
    let mut steps = Vec::new();
    let mut state = root.clone();
    loop {
        let Some(bounds) = memo.get(&state) else {
            // Root may be the all-zero base case that was never memoized;
            // any gap simply ends the walkthrough.
            break;
        };
        let via = match side {
            Side::Lower => bounds.lower_via,
            Side::Upper => bounds.upper_via,
        };
        let Some((ordinal, keep)) = via else {
            break;
        };
        let (child, _, step) = ctx.reduce_state(&state, ordinal, keep);
        steps.push(step);
        state = child;
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{task1_vector, task2_vector, vaccine};
    use crate::rational::{integer, ratio};

    fn benefit(m: usize, n: usize, coefs: &[i64]) -> BenefitFunction {
        BenefitFunction::from_vector(m, n, coefs.iter().map(|&c| integer(c)).collect()).unwrap()
    }

    #[test]
    fn find_groups_enumerates_complete_groups() {
        let f = benefit(2, 3, &[0, 1, 1, -1, 0, 1, -1, -1, 0]);
        let groups = find_groups(&f);
        assert_eq!(groups.len(), 6);
        assert!(groups.iter().all(|g| g.members.len() == 3));
        // Ordered by (position, outcome).
        assert_eq!((groups[0].position, groups[0].outcome), (1, 1));
        assert_eq!((groups[5].position, groups[5].outcome), (2, 3));

        // Removing one term kills the two groups containing it.
        let (exp, _) = vaccine();
        let (reduced, _) = reduce(&f, &groups[0], 0, &exp).unwrap();
        assert_eq!(find_groups(&reduced).len(), 4);
    }

    #[test]
    fn no_groups_without_full_membership() {
        let f = BenefitFunction::from_terms(
            2,
            2,
            vec![BenefitTerm {
                coefficient: integer(1),
                assignment: ResponseAssignment::new(vec![1, 2], 2, 2).unwrap(),
            }],
        )
        .unwrap();
        assert!(find_groups(&f).is_empty());
    }

    #[test]
    fn reduce_folds_coefficients_and_accumulates_adjustment() {
        let (exp, _) = vaccine();
        let f = benefit(2, 3, &[0, 1, 1, -1, 0, 1, -1, -1, 0]);
        let groups = find_groups(&f);

        // Keeping a zero-coefficient member only removes it.
        let g11 = &groups[0];
        let keep_zero = g11
            .members
            .iter()
            .position(|&p| f.terms()[p].coefficient.is_zero())
            .unwrap();
        let (reduced, adjustment) = reduce(&f, g11, keep_zero, &exp).unwrap();
        assert_eq!(adjustment, integer(0));
        assert_eq!(reduced.terms().len(), 8);
        for term in reduced.terms() {
            let original = f
                .terms()
                .iter()
                .find(|t| t.assignment == term.assignment)
                .unwrap();
            assert_eq!(term.coefficient, original.coefficient);
        }

        // Equal coefficients zero out the rest of the group.
        let uniform = benefit(2, 3, &[5, 5, 5, 0, 0, 0, 0, 0, 0]);
        let g = find_groups(&uniform)
            .into_iter()
            .find(|g| (g.position, g.outcome) == (1, 1))
            .unwrap();
        let (reduced, adjustment) = reduce(&uniform, &g, 0, &exp).unwrap();
        assert_eq!(adjustment, integer(5) * ratio(52, 600));
        for term in reduced.terms() {
            if term.assignment.outcome_under(1) == 1 {
                assert!(term.coefficient.is_zero());
            }
        }

        assert!(matches!(
            reduce(&uniform, &g, 9, &exp),
            Err(EngineError::BadKeepSlot { .. })
        ));
    }

    #[test]
    fn identify_accepts_task2_and_rejects_task1() {
        let (exp, _) = vaccine();
        let cfg = EngineConfig::default();

        let task2 = BenefitFunction::from_vector(2, 3, task2_vector()).unwrap();
        let result = identify(&task2, &exp, &cfg).unwrap();
        assert!(result.identifiable);
        assert_eq!(result.value, ratio(-1, 6));
        assert!(!result.trace.is_empty());

        let task1 = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        let result = identify(&task1, &exp, &cfg).unwrap();
        assert!(!result.identifiable);
    }

    #[test]
    fn identify_trace_replays_to_the_identified_value() {
        let (exp, _) = vaccine();
        let cfg = EngineConfig::default();
        let task2 = BenefitFunction::from_vector(2, 3, task2_vector()).unwrap();
        let result = identify(&task2, &exp, &cfg).unwrap();

        let mut current = task2;
        let mut total = Rational::zero();
        for step in &result.trace {
            let groups = find_groups(&current);
            let group = groups
                .iter()
                .find(|g| (g.position, g.outcome) == (step.position, step.outcome))
                .expect("trace group exists");
            let keep_slot = group
                .members
                .iter()
                .position(|&p| current.terms()[p].assignment == step.kept)
                .expect("kept member present");
            let (next, adjustment) = reduce(&current, group, keep_slot, &exp).unwrap();
            assert_eq!(adjustment, step.adjustment);
            current = next;
            total += &step.adjustment;
        }
        assert!(current.terms().iter().all(|t| t.coefficient.is_zero()));
        assert_eq!(total, result.value);
    }

    #[test]
    fn identify_base_cases() {
        let (exp, _) = vaccine();
        let cfg = EngineConfig::default();
        let zero = benefit(2, 3, &[0; 9]);
        let result = identify(&zero, &exp, &cfg).unwrap();
        assert!(result.identifiable);
        assert_eq!(result.value, integer(0));
        assert!(result.trace.is_empty());
    }

    #[test]
    fn identify_binary_worked_example() {
        // 7, 2, 4, -1 rewrites to 7 P(y1|do(x1)) - 5 P(y2|do(x2)) + 4 P(y2|do(x1)).
        let exp = ExperimentalDistribution::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 4), ratio(3, 4)],
        ])
        .unwrap();
        let f = benefit(2, 2, &[7, 2, 4, -1]);
        let result = identify(&f, &exp, &EngineConfig::default()).unwrap();
        assert!(result.identifiable);
        let expected = integer(7) * ratio(1, 2) - integer(5) * ratio(3, 4) + integer(4) * ratio(1, 2);
        assert_eq!(result.value, expected);
    }

    #[test]
    fn identify_budget_is_a_distinct_error() {
        let (exp, _) = vaccine();
        let cfg = EngineConfig {
            max_states: 2,
            ..EngineConfig::default()
        };
        let task1 = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        assert!(matches!(
            identify(&task1, &exp, &cfg),
            Err(EngineError::BudgetExceeded(2))
        ));
    }

    #[test]
    fn bounds_match_published_task1_interval() {
        let (exp, obs) = vaccine();
        let f = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        let bounds = bound_benefit(&f, &exp, &obs, &EngineConfig::default()).unwrap();
        assert!(!bounds.partial);
        assert_eq!(bounds.interval.lower(), &ratio(-137, 600));
        assert_eq!(bounds.interval.upper(), &ratio(-64, 600));
    }

    #[test]
    fn bounds_collapse_to_point_for_identifiable_input() {
        let (exp, obs) = vaccine();
        let f = BenefitFunction::from_vector(2, 3, task2_vector()).unwrap();
        let bounds = bound_benefit(&f, &exp, &obs, &EngineConfig::default()).unwrap();
        assert_eq!(bounds.interval, Interval::point(ratio(-1, 6)));
    }

    #[test]
    fn bounds_trivial_vectors() {
        let (exp, obs) = vaccine();
        let cfg = EngineConfig::default();
        let zero = benefit(2, 3, &[0; 9]);
        assert_eq!(
            bound_benefit(&zero, &exp, &obs, &cfg).unwrap().interval,
            Interval::point(integer(0))
        );
        // Response types partition the population.
        let ones = benefit(2, 3, &[1; 9]);
        assert_eq!(
            bound_benefit(&ones, &exp, &obs, &cfg).unwrap().interval,
            Interval::point(integer(1))
        );
    }

    #[test]
    fn search_only_tightens_the_base_interval() {
        let (exp, obs) = vaccine();
        let f = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        let evaluator = BoundsEvaluator::new(&exp, &obs).unwrap();
        let table = evaluator.bounds_for_all_full_joints().unwrap();
        let cfg = EngineConfig::default();
        let bounds = bound_benefit_with_table(&f, &exp, &table, &cfg).unwrap();

        let root: Vec<(u32, Rational)> = f
            .terms()
            .iter()
            .map(|t| (t.assignment.term_index(3) as u32, t.coefficient.clone()))
            .collect();
        let (base_lower, base_upper) = base_candidate(&root, &table);
        let base = Interval::new(base_lower, base_upper).unwrap();
        assert!(base.encloses(&bounds.interval));
    }

    #[test]
    fn bounds_budget_returns_partial_but_valid_interval() {
        let (exp, obs) = vaccine();
        let f = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        let full = bound_benefit(&f, &exp, &obs, &EngineConfig::default()).unwrap();
        let cfg = EngineConfig {
            max_states: 3,
            ..EngineConfig::default()
        };
        let partial = bound_benefit(&f, &exp, &obs, &cfg).unwrap();
        assert!(partial.partial);
        assert!(partial.interval.encloses(&full.interval));
    }

    #[test]
    fn memoization_is_transparent() {
        let (exp, obs) = vaccine();
        let f = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        let cached = bound_benefit(&f, &exp, &obs, &EngineConfig::default()).unwrap();
        let uncached_cfg = EngineConfig {
            memoize: false,
            ..EngineConfig::default()
        };
        let uncached = bound_benefit(&f, &exp, &obs, &uncached_cfg).unwrap();
        assert_eq!(cached.interval, uncached.interval);

        let task2 = BenefitFunction::from_vector(2, 3, task2_vector()).unwrap();
        let a = identify(&task2, &exp, &EngineConfig::default()).unwrap();
        let b = identify(&task2, &exp, &uncached_cfg).unwrap();
        assert_eq!((a.identifiable, a.value), (b.identifiable, b.value));
    }

    #[test]
    fn bound_traces_replay_to_the_achieved_bounds() {
        let (exp, obs) = vaccine();
        let f = BenefitFunction::from_vector(2, 3, task1_vector()).unwrap();
        let evaluator = BoundsEvaluator::new(&exp, &obs).unwrap();
        let table = evaluator.bounds_for_all_full_joints().unwrap();
        let bounds = bound_benefit_with_table(&f, &exp, &table, &EngineConfig::default()).unwrap();

        for (trace, expected, lower_side) in [
            (&bounds.lower_trace, bounds.interval.lower(), true),
            (&bounds.upper_trace, bounds.interval.upper(), false),
        ] {
            let mut current = f.clone();
            let mut adjustment = Rational::zero();
            for step in trace.iter() {
                let groups = find_groups(&current);
                let group = groups
                    .iter()
                    .find(|g| (g.position, g.outcome) == (step.position, step.outcome))
                    .unwrap();
                let keep_slot = group
                    .members
                    .iter()
                    .position(|&p| current.terms()[p].assignment == step.kept)
                    .unwrap();
                let (next, adj) = reduce(&current, group, keep_slot, &exp).unwrap();
                adjustment += adj;
                current = next;
            }
            // The end state's base candidate achieves the bound.
            let n = current.outcome_arity();
            let state: Vec<(u32, Rational)> = current
                .terms()
                .iter()
                .map(|t| (t.assignment.term_index(n) as u32, t.coefficient.clone()))
                .collect();
            let (lo, up) = base_candidate(&state, &table);
            let achieved = adjustment + if lower_side { lo } else { up };
            assert_eq!(&achieved, expected);
        }
    }
}
