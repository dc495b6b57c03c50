//! Finite-horizon pure-equilibrium search over invisible strategies:
//! exact best-response dynamic programming per opponent sequence, then a
//! pair scan in integer arithmetic (payoffs scaled by their common
//! denominator).

use rayon::prelude::*;

use crate::rational::Rational;

use super::{ActionSequence, Discount, MarkovError, StochasticGame, DEFAULT_SEQUENCE_BOUND};

/// Rational payoff tensor extracted from a game; errors when any cell
/// involves the algebraic discount symbolically.
fn rational_payoffs(
    game: &StochasticGame,
) -> Result<Vec<Vec<Vec<(Rational, Rational)>>>, MarkovError> {
    game.payoffs
        .iter()
        .map(|per_state| {
            per_state
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|(u1, u2)| match (u1.as_rational(), u2.as_rational()) {
                            (Some(a), Some(b)) => Ok((a.clone(), b.clone())),
                            _ => Err(MarkovError::RequiresRationalPayoffs),
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn require_undiscounted(game: &StochasticGame) -> Result<(), MarkovError> {
    match &game.discount {
        Discount::Rational { value } if *value == Rational::one() => Ok(()),
        _ => Err(MarkovError::RequiresRationalPayoffs),
    }
}

fn actions_up_to(seq: &ActionSequence, horizon: usize) -> Result<Vec<usize>, MarkovError> {
    (0..horizon)
        .map(|k| {
            seq.action_at(k)
                .ok_or(MarkovError::HorizonMismatch(horizon))
        })
        .collect()
}

/// Best response value of `deviator` against the opponent's fixed
/// sequence, minus the deviator's realized value — always >= 0, and 0
/// exactly when the deviator has no profitable deviation. Undiscounted
/// sum over `horizon` stages from state 0.
pub fn check_deviation_finite(
    game: &StochasticGame,
    profile: &[ActionSequence; 2],
    horizon: usize,
    deviator: usize,
) -> Result<Rational, MarkovError> {
    require_undiscounted(game)?;
    let payoffs = rational_payoffs(game)?;
    let own = actions_up_to(&profile[deviator], horizon)?;
    let opp = actions_up_to(&profile[1 - deviator], horizon)?;

    let u = |state: usize, mine: usize, theirs: usize| -> &Rational {
        let (u1, u2) = if deviator == 0 {
            &payoffs[state][mine][theirs]
        } else {
            &payoffs[state][theirs][mine]
        };
        if deviator == 0 {
            u1
        } else {
            u2
        }
    };
    let succ = |state: usize, mine: usize, theirs: usize| -> usize {
        if deviator == 0 {
            game.successor(state, mine, theirs)
        } else {
            game.successor(state, theirs, mine)
        }
    };

    // realized value along the profile
    let mut state = 0usize;
    let mut realized = Rational::zero();
    for k in 0..horizon {
        realized += u(state, own[k], opp[k]).clone();
        state = succ(state, own[k], opp[k]);
    }

    // best response by backward induction over (stage, state)
    let s = game.num_states();
    let mut value = vec![Rational::zero(); s];
    for k in (0..horizon).rev() {
        let mut next = Vec::with_capacity(s);
        for state in 0..s {
            let best = (0..game.num_actions())
                .map(|a| u(state, a, opp[k]) + &value[succ(state, a, opp[k])])
                .max()
                .expect("non-empty action set");
            next.push(best);
        }
        value = next;
    }
    Ok(&value[0] - &realized)
}

/// Scaled-integer view of an undiscounted game for the pair scan.
struct ScaledGame {
    num_states: usize,
    num_actions: usize,
    /// (u1, u2) scaled by the common denominator, flat [state][a1][a2].
    payoffs: Vec<(i64, i64)>,
    transition: Vec<usize>,
}

impl ScaledGame {
    fn build(game: &StochasticGame) -> Result<Self, MarkovError> {
        let rational = rational_payoffs(game)?;
        let mut denom: i64 = 1;
        for per_state in &rational {
            for row in per_state {
                for (u1, u2) in row {
                    for u in [u1, u2] {
                        let (_, d) = u.to_i128_pair().ok_or_else(|| {
                            MarkovError::Invalid("payoff magnitude too large to scale".into())
                        })?;
                        let d = i64::try_from(d).map_err(|_| {
                            MarkovError::Invalid("payoff denominator too large".into())
                        })?;
                        denom = num_integer::lcm(denom, d);
                    }
                }
            }
        }
        let scale = |u: &Rational| -> i64 {
            let (n, d) = u.to_i128_pair().expect("checked above");
            (n * (denom as i128) / d) as i64
        };
        let s = game.num_states();
        let a = game.num_actions();
        let mut payoffs = Vec::with_capacity(s * a * a);
        let mut transition = Vec::with_capacity(s * a * a);
        for state in 0..s {
            for a1 in 0..a {
                for a2 in 0..a {
                    let (u1, u2) = &rational[state][a1][a2];
                    payoffs.push((scale(u1), scale(u2)));
                    transition.push(game.successor(state, a1, a2));
                }
            }
        }
        Ok(ScaledGame {
            num_states: s,
            num_actions: a,
            payoffs,
            transition,
        })
    }

    #[inline]
    fn cell(&self, state: usize, a1: usize, a2: usize) -> usize {
        (state * self.num_actions + a1) * self.num_actions + a2
    }

    /// Best response value of `deviator` against a fixed action list.
    fn best_response(&self, opp: &[usize], deviator: usize) -> i64 {
        let mut value = vec![0i64; self.num_states];
        for k in (0..opp.len()).rev() {
            let mut next = vec![i64::MIN; self.num_states];
            for state in 0..self.num_states {
                for a in 0..self.num_actions {
                    let idx = if deviator == 0 {
                        self.cell(state, a, opp[k])
                    } else {
                        self.cell(state, opp[k], a)
                    };
                    let u = if deviator == 0 {
                        self.payoffs[idx].0
                    } else {
                        self.payoffs[idx].1
                    };
                    let v = u + value[self.transition[idx]];
                    if v > next[state] {
                        next[state] = v;
                    }
                }
            }
            value = next;
        }
        value[0]
    }

    fn realized(&self, p1: &[usize], p2: &[usize]) -> (i64, i64) {
        let mut state = 0usize;
        let (mut v1, mut v2) = (0i64, 0i64);
        for k in 0..p1.len() {
            let idx = self.cell(state, p1[k], p2[k]);
            v1 += self.payoffs[idx].0;
            v2 += self.payoffs[idx].1;
            state = self.transition[idx];
        }
        (v1, v2)
    }
}

fn decode_sequence(mut flat: u64, base: usize, horizon: usize) -> Vec<usize> {
    let mut out = vec![0usize; horizon];
    for slot in out.iter_mut().rev() {
        *slot = (flat % base as u64) as usize;
        flat /= base as u64;
    }
    out
}

pub fn find_pure_ne_finite(
    game: &StochasticGame,
    horizon: usize,
) -> Result<Option<(ActionSequence, ActionSequence)>, MarkovError> {
    find_pure_ne_finite_bounded(game, horizon, DEFAULT_SEQUENCE_BOUND)
}

/// Scans every pair of length-`horizon` action sequences and returns the
/// first (in lexicographic order over player 1's then player 2's
/// sequence) where neither player has a profitable deviation.
pub fn find_pure_ne_finite_bounded(
    game: &StochasticGame,
    horizon: usize,
    bound: u64,
) -> Result<Option<(ActionSequence, ActionSequence)>, MarkovError> {
    require_undiscounted(game)?;
    if horizon == 0 {
        return Err(MarkovError::Invalid("horizon must be >= 1".into()));
    }
    let base = game.num_actions() as u64;
    let count = base
        .checked_pow(horizon as u32)
        .filter(|&c| c <= bound)
        .ok_or(MarkovError::Capacity {
            count: base.saturating_pow(horizon as u32),
            bound,
        })?;

    let scaled = ScaledGame::build(game)?;
    let sequences: Vec<Vec<usize>> = (0..count)
        .map(|flat| decode_sequence(flat, game.num_actions(), horizon))
        .collect();
    // best response of each player against every opponent sequence
    let br_vs: [Vec<i64>; 2] = [
        sequences
            .par_iter()
            .map(|opp| scaled.best_response(opp, 0))
            .collect(),
        sequences
            .par_iter()
            .map(|opp| scaled.best_response(opp, 1))
            .collect(),
    ];

    let witness = (0..count)
        .into_par_iter()
        .find_first(|&i| {
            let p1 = &sequences[i as usize];
            (0..count).any(|j| {
                let p2 = &sequences[j as usize];
                let (v1, v2) = scaled.realized(p1, p2);
                v1 == br_vs[0][j as usize] && v2 == br_vs[1][i as usize]
            })
        })
        .map(|i| {
            let p1 = &sequences[i as usize];
            let j = (0..count)
                .find(|&j| {
                    let (v1, v2) = scaled.realized(p1, &sequences[j as usize]);
                    v1 == br_vs[0][j as usize] && v2 == br_vs[1][i as usize]
                })
                .expect("re-scan of a hit row");
            (
                ActionSequence::finite(p1.clone()),
                ActionSequence::finite(sequences[j as usize].clone()),
            )
        });
    Ok(witness)
}
