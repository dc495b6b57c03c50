//! Periodic CNF formulas over two adjacent variable blocks, their
//! compilation into stochastic games whose pure equilibria track
//! satisfiability, and a bounded-period brute-force oracle.

use serde::{Deserialize, Serialize};

use crate::cnf::CnfFormula;
use crate::rational::Rational;

use super::delta::DiscountedValue;
use super::{rps_gadget, ActionSequence, Discount, MarkovError, StochasticGame};

/// Brute-force cap on n · max_period (the oracle enumerates 2^(n·p)
/// candidate cycles).
pub const DEFAULT_MAX_PERIOD_VARS: usize = 20;

/// A literal x_i^b or its negation: variable subscript `var` in 1..=n,
/// block superscript `block` in {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PLit {
    pub var: usize,
    pub block: u8,
    pub negated: bool,
}

/// A CNF template over blocks k and k+1; instance φ(k) shifts every
/// literal's block by k. The infinite conjunction over all k ≥ 0 is the
/// satisfiability target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicFormula {
    pub n: usize,
    pub clauses: Vec<Vec<PLit>>,
}

impl PeriodicFormula {
    pub fn validate(&self) -> Result<(), MarkovError> {
        if self.n == 0 {
            return Err(MarkovError::Invalid("need n >= 1 variables".into()));
        }
        for clause in &self.clauses {
            for lit in clause {
                if lit.var == 0 || lit.var > self.n {
                    return Err(MarkovError::Invalid(format!(
                        "variable subscript {} outside 1..={}",
                        lit.var, self.n
                    )));
                }
                if lit.block > 1 {
                    return Err(MarkovError::Invalid(format!(
                        "block superscript {} outside {{0, 1}}",
                        lit.block
                    )));
                }
            }
        }
        Ok(())
    }

    /// True iff setting x_`var`^`block` to `value` satisfies some literal
    /// of the clause.
    fn assignment_touches(&self, clause: usize, var: usize, block: u8, value: bool) -> bool {
        self.clauses[clause]
            .iter()
            .any(|lit| lit.var == var && lit.block == block && value != lit.negated)
    }
}

/// The conjunction of φ(k) for k = 0..=blocks−2, as a flat CNF over
/// variables x_i^k with CNF index k·n + i. With fewer than 2 blocks there
/// is no room for any instance, so the formula is empty (trivially
/// satisfiable).
pub fn windowed_conjunction(
    formula: &PeriodicFormula,
    blocks: usize,
) -> Result<CnfFormula, MarkovError> {
    formula.validate()?;
    if blocks == 0 {
        return Err(MarkovError::Invalid("need at least one block".into()));
    }
    let n = formula.n;
    let mut clauses = Vec::new();
    for k in 0..blocks.saturating_sub(1) {
        for clause in &formula.clauses {
            clauses.push(
                clause
                    .iter()
                    .map(|lit| {
                        let var = ((k + lit.block as usize) * n + lit.var) as i64;
                        if lit.negated {
                            -var
                        } else {
                            var
                        }
                    })
                    .collect(),
            );
        }
    }
    let (cnf, _) =
        CnfFormula::new(blocks * n, clauses).map_err(|e| MarkovError::Invalid(e.to_string()))?;
    Ok(cnf)
}

/// Searches for a periodic assignment (period p ≤ max_period) whose
/// infinite extension satisfies φ(k) for every k; checking one full
/// period suffices by shift invariance. Returns the satisfying cycle as
/// a flat boolean block list. A `None` refutes only period-bounded
/// satisfiability.
pub fn periodic_sat_oracle(
    formula: &PeriodicFormula,
    max_period: usize,
) -> Result<Option<Vec<bool>>, MarkovError> {
    formula.validate()?;
    if max_period == 0 {
        return Err(MarkovError::Invalid("need max period >= 1".into()));
    }
    let n = formula.n;
    if n * max_period > DEFAULT_MAX_PERIOD_VARS {
        return Err(MarkovError::Capacity {
            count: (n * max_period) as u64,
            bound: DEFAULT_MAX_PERIOD_VARS as u64,
        });
    }
    for p in 1..=max_period {
        let cells = n * p;
        'candidate: for bits in 0u64..(1 << cells) {
            let cycle: Vec<bool> = (0..cells).map(|i| bits >> i & 1 == 1).collect();
            let value = |var: usize, block: usize| cycle[(block % p) * n + var - 1];
            for k in 0..p {
                for clause in &formula.clauses {
                    let ok = clause
                        .iter()
                        .any(|lit| value(lit.var, k + lit.block as usize) != lit.negated);
                    if !ok {
                        continue 'candidate;
                    }
                }
            }
            return Ok(Some(cycle));
        }
    }
    Ok(None)
}

/// Transcribes a periodic satisfying assignment into the boolean action
/// sequence both players follow: stage k·n + (i−1) plays the value of
/// x_i^k (action 0 = true, 1 = false).
pub fn assignment_to_strategies(
    formula: &PeriodicFormula,
    cycle: &[bool],
) -> Result<ActionSequence, MarkovError> {
    formula.validate()?;
    if cycle.is_empty() || cycle.len() % formula.n != 0 {
        return Err(MarkovError::Invalid(format!(
            "cycle length {} is not a positive multiple of n = {}",
            cycle.len(),
            formula.n
        )));
    }
    let actions = cycle.iter().map(|&b| usize::from(!b)).collect();
    ActionSequence::periodic(vec![], actions)
}

/// Action indices: 0 = t, 1 = f, 2+c = clause c.
pub fn bool_action(value: bool) -> usize {
    usize::from(!value)
}

pub fn clause_action(clause: usize) -> usize {
    2 + clause
}

struct Layout {
    n: usize,
    num_clauses: usize,
}

impl Layout {
    fn num_states(&self) -> usize {
        self.n + 2 * (2 * self.n - 1) * self.num_clauses + 1
    }

    fn s(&self, i: usize) -> usize {
        debug_assert!((1..=self.n).contains(&i));
        i - 1
    }

    /// Chain state t^j_{idx,c}, idx in 2..=2n.
    fn t(&self, j: usize, idx: usize, c: usize) -> usize {
        debug_assert!((1..=2).contains(&j) && (2..=2 * self.n).contains(&idx));
        self.n + (j - 1) * (2 * self.n - 1) * self.num_clauses + (idx - 2) * self.num_clauses + c
    }

    fn r(&self) -> usize {
        self.num_states() - 1
    }

    fn successor_s(&self, i: usize) -> usize {
        self.s((i % self.n) + 1)
    }

    /// Decode a state index into its structure.
    fn classify(&self, state: usize) -> StateKind {
        if state < self.n {
            return StateKind::S(state + 1);
        }
        if state == self.r() {
            return StateKind::R;
        }
        let rel = state - self.n;
        let per_chain = (2 * self.n - 1) * self.num_clauses;
        let j = rel / per_chain + 1;
        let rem = rel % per_chain;
        StateKind::T {
            j,
            idx: rem / self.num_clauses + 2,
            c: rem % self.num_clauses,
        }
    }
}

enum StateKind {
    S(usize),
    T { j: usize, idx: usize, c: usize },
    R,
}

enum Variant {
    /// Discounted infinite horizon, payoffs exactly as in the source
    /// construction; gadget scale ε = (1−δ)/2.
    Discounted,
    /// Undiscounted finite horizon T. The s1 clause-row payoffs are
    /// shifted down by 2 (to −1/−5) and the chain owner receives an
    /// unconditional +2 on entering their punishment chain, so a clause
    /// deviation only profits when it is punished by neither the s1 stage
    /// nor the chain — end-of-horizon deviations can no longer collect a
    /// free +1. Gadget scale ε = 1/(4T) keeps all r-phase totals below
    /// every unit gap.
    Finite { horizon: usize },
}

fn build(formula: &PeriodicFormula, variant: Variant) -> Result<StochasticGame, MarkovError> {
    formula.validate()?;
    if formula.clauses.is_empty() {
        return Err(MarkovError::Invalid("need at least one clause".into()));
    }
    let n = formula.n;
    let layout = Layout {
        n,
        num_clauses: formula.clauses.len(),
    };
    let num_actions = 2 + layout.num_clauses;
    let num_states = layout.num_states();

    let mut states = Vec::with_capacity(num_states);
    for i in 1..=n {
        states.push(format!("s{i}"));
    }
    for j in 1..=2 {
        for idx in 2..=2 * n {
            for c in 1..=layout.num_clauses {
                states.push(format!("t{j}_{idx}_c{c}"));
            }
        }
    }
    states.push("r".to_string());

    let mut actions = vec!["t".to_string(), "f".to_string()];
    for c in 1..=layout.num_clauses {
        actions.push(format!("c{c}"));
    }

    let is_bool = |a: usize| a < 2;
    let as_bool = |a: usize| a == 0;
    let as_clause = |a: usize| a - 2;

    let mut transition = vec![vec![vec![0usize; num_actions]; num_actions]; num_states];
    for state in 0..num_states {
        for a1 in 0..num_actions {
            for a2 in 0..num_actions {
                transition[state][a1][a2] = match layout.classify(state) {
                    StateKind::S(1) => match (is_bool(a1), is_bool(a2)) {
                        (true, true) => layout.successor_s(1),
                        (false, true) => layout.t(1, 2, as_clause(a1)),
                        (true, false) => layout.t(2, 2, as_clause(a2)),
                        (false, false) => layout.r(),
                    },
                    StateKind::S(i) => layout.successor_s(i),
                    StateKind::T { j, idx, c } if idx < 2 * n => layout.t(j, idx + 1, c),
                    StateKind::T { .. } | StateKind::R => layout.r(),
                };
            }
        }
    }

    let m = match variant {
        Variant::Discounted => 2 * n + 1,
        Variant::Finite { .. } => 1,
    };
    let (s1_unpunished, s1_punished) = match variant {
        Variant::Discounted => (1i64, -1i64),
        Variant::Finite { .. } => (-1, -5),
    };
    let chain_entry_bonus = match variant {
        Variant::Discounted => 0i64,
        Variant::Finite { .. } => 2,
    };
    let epsilon = match variant {
        Variant::Discounted => {
            // (1 - δ)/2: total r-phase magnitude ≤ ε/(1−δ) = 1/2
            DiscountedValue::constant(m, Rational::one())
                .sub(&DiscountedValue::delta(m))
                .scale(&Rational::new(1, 2))
        }
        Variant::Finite { horizon } => {
            if horizon == 0 {
                return Err(MarkovError::Invalid("horizon must be >= 1".into()));
            }
            DiscountedValue::constant(m, Rational::new(1, 4 * horizon as i64))
        }
    };
    let gadget = rps_gadget(num_actions, &Rational::one())?;

    // Row player's payoff from the row player's own chain perspective:
    // u2(state, a1, a2) = u1(mirror(state), a2, a1) with t-chains swapped.
    let u1 = |state: usize, a1: usize, a2: usize| -> DiscountedValue {
        let int = |v: i64| DiscountedValue::from_int(m, v);
        match layout.classify(state) {
            StateKind::S(1) => match (is_bool(a1), is_bool(a2)) {
                (true, true) => int(0),
                (false, true) => {
                    // clause against a boolean: punished iff the boolean
                    // commits x_1^0 in a way that satisfies the clause
                    if formula.assignment_touches(as_clause(a1), 1, 0, as_bool(a2)) {
                        int(s1_punished)
                    } else {
                        int(s1_unpunished)
                    }
                }
                (true, false) => int(0),
                (false, false) => int(-1),
            },
            StateKind::S(_) => int(0),
            StateKind::T { j: 1, idx, c } => {
                let k = (idx - 1) / n;
                let i = idx - k * n;
                let punished =
                    is_bool(a2) && formula.assignment_touches(c, i, k as u8, as_bool(a2));
                let base = if punished { -4 } else { 0 };
                let bonus = if idx == 2 { chain_entry_bonus } else { 0 };
                int(base + bonus)
            }
            StateKind::T { .. } => int(0),
            StateKind::R => epsilon.scale(&gadget[a1][a2]),
        }
    };

    let mirror = |state: usize| -> usize {
        match layout.classify(state) {
            StateKind::T { j, idx, c } => layout.t(3 - j, idx, c),
            _ => state,
        }
    };

    let mut payoffs = Vec::with_capacity(num_states);
    for state in 0..num_states {
        let mut per_state = Vec::with_capacity(num_actions);
        for a1 in 0..num_actions {
            let mut row = Vec::with_capacity(num_actions);
            for a2 in 0..num_actions {
                row.push((u1(state, a1, a2), u1(mirror(state), a2, a1)));
            }
            per_state.push(row);
        }
        payoffs.push(per_state);
    }

    let discount = match variant {
        Variant::Discounted => Discount::Algebraic { n },
        Variant::Finite { .. } => Discount::Rational {
            value: Rational::one(),
        },
    };
    StochasticGame::new(states, actions, transition, payoffs, discount)
}

/// Discounted construction: δ = (1/2)^(1/(2n+1)); a pure equilibrium
/// exists iff the periodic formula is satisfiable.
pub fn build_periodic_game(formula: &PeriodicFormula) -> Result<StochasticGame, MarkovError> {
    build(formula, Variant::Discounted)
}

/// Finite-horizon undiscounted variant with adjusted payoffs (see the
/// Variant docs); validated against the windowed conjunction. The
/// horizon must be a positive multiple of n.
pub fn build_periodic_game_finite(
    formula: &PeriodicFormula,
    horizon: usize,
) -> Result<StochasticGame, MarkovError> {
    if horizon == 0 || horizon % formula.n.max(1) != 0 {
        return Err(MarkovError::Invalid(format!(
            "horizon {horizon} is not a positive multiple of n = {}",
            formula.n
        )));
    }
    build(formula, Variant::Finite { horizon })
}

/// Default finite horizon: enough stages for every block to be punished,
/// rounded up to a multiple of n.
pub fn default_finite_horizon(n: usize) -> usize {
    let base = 3 * (2 * n + 1);
    base.div_ceil(n) * n
}
