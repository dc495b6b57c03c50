//! Stochastic games with deterministic transitions, invisible pure
//! strategies (eventually periodic action sequences), reductions from
//! periodic satisfiability, and exact discounted / finite-horizon
//! analysis.

pub mod delta;
mod finite;
mod infinite;
mod periodic;

pub use finite::{check_deviation_finite, find_pure_ne_finite, find_pure_ne_finite_bounded};
pub use infinite::{best_response, check_deviation_discounted, evaluate_discounted, BestResponse};
pub use periodic::{
    assignment_to_strategies, bool_action, build_periodic_game, build_periodic_game_finite,
    clause_action, default_finite_horizon, periodic_sat_oracle, windowed_conjunction, PLit,
    PeriodicFormula, DEFAULT_MAX_PERIOD_VARS,
};

use serde::Serialize;
use serde_json::json;

use crate::rational::Rational;
use delta::DiscountedValue;

pub const DEFAULT_SEQUENCE_BOUND: u64 = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum MarkovError {
    #[error("invalid construction: {0}")]
    Invalid(String),
    #[error("{count} exceeds the brute-force bound {bound}")]
    Capacity { count: u64, bound: u64 },
    #[error("operation requires an algebraic discount factor")]
    RequiresAlgebraicDiscount,
    #[error("operation requires undiscounted rational payoffs")]
    RequiresRationalPayoffs,
    #[error("sequence is not infinite (no cycle declared)")]
    NotEventuallyPeriodic,
    #[error("sequence shorter than the declared horizon {0}")]
    HorizonMismatch(usize),
}

/// Discount factor: a plain rational, or δ = (1/2)^(1/(2n+1)).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Discount {
    Rational { value: Rational },
    Algebraic { n: usize },
}

impl Discount {
    /// Ring modulus for exact value arithmetic: 2n+1 for the algebraic
    /// factor, 1 (plain rationals) otherwise.
    pub fn modulus(&self) -> usize {
        match self {
            Discount::Rational { .. } => 1,
            Discount::Algebraic { n } => 2 * n + 1,
        }
    }
}

/// A 2-player stochastic game with deterministic transitions. Stage
/// payoffs live in the value ring of the discount factor so the
/// absorbing-gadget scale (1−δ)/2 is representable exactly.
#[derive(Debug, Clone)]
pub struct StochasticGame {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    /// `transition[state][a1][a2]` = successor state.
    pub transition: Vec<Vec<Vec<usize>>>,
    /// `payoffs[state][a1][a2]` = (u1, u2).
    pub payoffs: Vec<Vec<Vec<(DiscountedValue, DiscountedValue)>>>,
    pub discount: Discount,
}

impl StochasticGame {
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        transition: Vec<Vec<Vec<usize>>>,
        payoffs: Vec<Vec<Vec<(DiscountedValue, DiscountedValue)>>>,
        discount: Discount,
    ) -> Result<Self, MarkovError> {
        let s = states.len();
        let a = actions.len();
        if s == 0 || a == 0 {
            return Err(MarkovError::Invalid("empty state or action set".into()));
        }
        let shape_ok = |t: usize| {
            transition.len() == s
                && payoffs.len() == s
                && transition
                    .iter()
                    .all(|x| x.len() == a && x.iter().all(|y| y.len() == t))
                && payoffs
                    .iter()
                    .all(|x| x.len() == a && x.iter().all(|y| y.len() == t))
        };
        if !shape_ok(a) {
            return Err(MarkovError::Invalid(
                "ragged transition/payoff table".into(),
            ));
        }
        if transition
            .iter()
            .any(|x| x.iter().any(|y| y.iter().any(|&next| next >= s)))
        {
            return Err(MarkovError::Invalid(
                "transition target out of range".into(),
            ));
        }
        let m = discount.modulus();
        if payoffs.iter().any(|x| {
            x.iter().any(|y| {
                y.iter()
                    .any(|(u1, u2)| u1.modulus() != m || u2.modulus() != m)
            })
        }) {
            return Err(MarkovError::Invalid(
                "payoff value ring does not match the discount factor".into(),
            ));
        }
        Ok(StochasticGame {
            states,
            actions,
            transition,
            payoffs,
            discount,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn successor(&self, state: usize, a1: usize, a2: usize) -> usize {
        self.transition[state][a1][a2]
    }

    pub fn payoff(&self, state: usize, a1: usize, a2: usize, player: usize) -> &DiscountedValue {
        let cell = &self.payoffs[state][a1][a2];
        if player == 0 {
            &cell.0
        } else {
            &cell.1
        }
    }

    pub fn modulus(&self) -> usize {
        self.discount.modulus()
    }

    /// JSON form: flat transition and payoff tuples; payoff values are
    /// "p/q" strings when rational, coefficient lists otherwise.
    pub fn to_json(&self) -> serde_json::Value {
        let value_json = |v: &DiscountedValue| match v.as_rational() {
            Some(r) => json!(r),
            None => json!({ "coeffs": v.coeffs() }),
        };
        let mut transitions = Vec::new();
        let mut payoffs = Vec::new();
        for s in 0..self.num_states() {
            for a1 in 0..self.num_actions() {
                for a2 in 0..self.num_actions() {
                    transitions.push(json!([s, a1, a2, self.transition[s][a1][a2]]));
                    let (u1, u2) = &self.payoffs[s][a1][a2];
                    payoffs.push(json!([s, a1, a2, value_json(u1), value_json(u2)]));
                }
            }
        }
        json!({
            "states": self.states,
            "actions": self.actions,
            "transitions": transitions,
            "payoffs": payoffs,
            "discount": self.discount,
        })
    }
}

/// An invisible pure strategy: a finite preamble, optionally followed by
/// a repeating cycle (making the sequence infinite).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ActionSequence {
    pub preamble: Vec<usize>,
    pub cycle: Option<Vec<usize>>,
}

impl ActionSequence {
    pub fn finite(preamble: Vec<usize>) -> Self {
        ActionSequence {
            preamble,
            cycle: None,
        }
    }

    pub fn periodic(preamble: Vec<usize>, cycle: Vec<usize>) -> Result<Self, MarkovError> {
        if cycle.is_empty() {
            return Err(MarkovError::Invalid("empty cycle".into()));
        }
        Ok(ActionSequence {
            preamble,
            cycle: Some(cycle),
        })
    }

    pub fn is_infinite(&self) -> bool {
        self.cycle.is_some()
    }

    pub fn action_at(&self, stage: usize) -> Option<usize> {
        if stage < self.preamble.len() {
            return Some(self.preamble[stage]);
        }
        self.cycle
            .as_ref()
            .map(|c| c[(stage - self.preamble.len()) % c.len()])
    }

    /// Number of distinct positions: preamble plus one cycle pass.
    pub(crate) fn num_positions(&self) -> usize {
        self.preamble.len() + self.cycle.as_ref().map_or(0, Vec::len)
    }

    pub(crate) fn next_position(&self, pos: usize) -> usize {
        let next = pos + 1;
        if next < self.num_positions() {
            return next;
        }
        // wrap to the start of the cycle
        debug_assert!(self.cycle.is_some());
        self.preamble.len()
    }

    pub(crate) fn action_at_position(&self, pos: usize) -> usize {
        if pos < self.preamble.len() {
            self.preamble[pos]
        } else {
            self.cycle.as_ref().expect("cycle position")[pos - self.preamble.len()]
        }
    }
}

/// Symmetric zero-sum cyclic-tournament payoff matrix (row player's
/// payoffs) with no pure equilibrium: action i beats the (a−1)/2 actions
/// preceding it cyclically. For even sizes the antipodal pair is broken
/// by index order.
pub fn rps_gadget(
    num_actions: usize,
    epsilon: &Rational,
) -> Result<Vec<Vec<Rational>>, MarkovError> {
    if num_actions < 3 {
        return Err(MarkovError::Invalid(format!(
            "cyclic tournament needs at least 3 actions, got {num_actions}; \
             every 2-action symmetric zero-sum game has a pure equilibrium"
        )));
    }
    if !epsilon.is_positive() {
        return Err(MarkovError::Invalid("gadget scale must be positive".into()));
    }
    let a = num_actions;
    let matrix = (0..a)
        .map(|i| {
            (0..a)
                .map(|j| {
                    let d = (j + a - i) % a;
                    if d == 0 {
                        Rational::zero()
                    } else if 2 * d > a || (2 * d == a && i < j) {
                        epsilon.clone()
                    } else {
                        -epsilon
                    }
                })
                .collect()
        })
        .collect();
    Ok(matrix)
}
