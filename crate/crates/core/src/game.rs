//! Finite normal-form games with exact rational payoffs, mixed strategy
//! profiles, expected utility, and Nash-equilibrium verification.
//!
//! All arithmetic is exact; there is no epsilon anywhere. Ties are
//! load-bearing for the constructions built on top of this module.

use serde::{Deserialize, Serialize};

use crate::lp::{self, LpResult};
use crate::rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("profile dimensions do not match game")]
    DimensionMismatch,
    #[error("operation requires exactly 2 players, game has {0}")]
    PlayerCount(usize),
    #[error("players have unequal strategy sets ({0} vs {1})")]
    UnequalStrategySets(usize, usize),
    #[error("invalid game structure: {0}")]
    Structure(String),
    #[error("invalid mixed profile: {0}")]
    InvalidProfile(String),
    #[error("value vector is not achievable by any outcome distribution")]
    UnachievableValueVector,
}

/// A finite normal-form game: per-player strategy labels and a dense
/// payoff tensor mapping every pure profile to a per-player utility
/// vector. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    strategies: Vec<Vec<String>>,
    /// Row-major over players: flat profile index -> utility vector.
    payoffs: Vec<Vec<Rational>>,
}

impl NormalFormGame {
    pub fn from_fn<F>(strategies: Vec<Vec<String>>, mut payoff: F) -> Result<Self, GameError>
    where
        F: FnMut(&[usize]) -> Vec<Rational>,
    {
        if strategies.len() < 2 {
            return Err(GameError::Structure("need at least 2 players".into()));
        }
        if strategies.iter().any(|s| s.is_empty()) {
            return Err(GameError::Structure("empty strategy set".into()));
        }
        let players = strategies.len();
        let total: usize = strategies.iter().map(|s| s.len()).product();
        let mut payoffs = Vec::with_capacity(total);
        let mut profile = vec![0usize; players];
        for _ in 0..total {
            let u = payoff(&profile);
            if u.len() != players {
                return Err(GameError::Structure(
                    "utility vector length != player count".into(),
                ));
            }
            payoffs.push(u);
            // advance mixed-radix counter, last player fastest
            for p in (0..players).rev() {
                profile[p] += 1;
                if profile[p] < strategies[p].len() {
                    break;
                }
                profile[p] = 0;
            }
        }
        Ok(NormalFormGame {
            strategies,
            payoffs,
        })
    }

    /// 2-player constructor from separate payoff matrices.
    pub fn from_tables2(
        labels: [Vec<String>; 2],
        u1: Vec<Vec<Rational>>,
        u2: Vec<Vec<Rational>>,
    ) -> Result<Self, GameError> {
        let [l1, l2] = labels;
        let (m, n) = (l1.len(), l2.len());
        if u1.len() != m
            || u2.len() != m
            || u1.iter().any(|r| r.len() != n)
            || u2.iter().any(|r| r.len() != n)
        {
            return Err(GameError::Structure("payoff table shape mismatch".into()));
        }
        Self::from_fn(vec![l1, l2], |p| {
            vec![u1[p[0]][p[1]].clone(), u2[p[0]][p[1]].clone()]
        })
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    pub fn num_strategies(&self, player: usize) -> usize {
        self.strategies[player].len()
    }

    pub fn strategy_labels(&self, player: usize) -> &[String] {
        &self.strategies[player]
    }

    pub fn strategy_index(&self, player: usize, label: &str) -> Option<usize> {
        self.strategies[player].iter().position(|l| l == label)
    }

    fn flat_index(&self, profile: &[usize]) -> usize {
        let mut idx = 0;
        for (p, &s) in profile.iter().enumerate() {
            idx = idx * self.strategies[p].len() + s;
        }
        idx
    }

    pub fn payoff(&self, profile: &[usize]) -> &[Rational] {
        &self.payoffs[self.flat_index(profile)]
    }

    /// 2-player payoff accessor.
    pub fn payoff2(&self, i: usize, j: usize, player: usize) -> &Rational {
        &self.payoffs[i * self.strategies[1].len() + j][player]
    }

    fn require_two_players(&self) -> Result<(), GameError> {
        if self.num_players() != 2 {
            return Err(GameError::PlayerCount(self.num_players()));
        }
        Ok(())
    }

    fn check_profile(&self, profile: &MixedProfile) -> Result<(), GameError> {
        if profile.probs.len() != self.num_players() {
            return Err(GameError::DimensionMismatch);
        }
        for (p, probs) in profile.probs.iter().enumerate() {
            if probs.len() != self.num_strategies(p) {
                return Err(GameError::DimensionMismatch);
            }
        }
        Ok(())
    }

    /// Exact expected utility vector under independent draws per player.
    pub fn expected_utility(&self, profile: &MixedProfile) -> Result<Vec<Rational>, GameError> {
        self.check_profile(profile)?;
        let players = self.num_players();
        let mut out = vec![Rational::zero(); players];
        let mut pure = vec![0usize; players];
        'outer: loop {
            let mut weight = Rational::one();
            let mut zero = false;
            for p in 0..players {
                let pr = &profile.probs[p][pure[p]];
                if pr.is_zero() {
                    zero = true;
                    break;
                }
                weight *= pr.clone();
            }
            if !zero {
                let u = self.payoff(&pure);
                for p in 0..players {
                    out[p] += &weight * &u[p];
                }
            }
            for p in (0..players).rev() {
                pure[p] += 1;
                if pure[p] < self.num_strategies(p) {
                    continue 'outer;
                }
                pure[p] = 0;
                if p == 0 {
                    break 'outer;
                }
            }
        }
        Ok(out)
    }

    /// Expected utility for one player of a pure strategy against the
    /// opponent's mix (2-player).
    pub fn pure_vs_mix(&self, player: usize, pure: usize, opponent_mix: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (j, q) in opponent_mix.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let u = if player == 0 {
                self.payoff2(pure, j, 0)
            } else {
                self.payoff2(j, pure, 1)
            };
            acc += q * u;
        }
        acc
    }

    /// Checks the Nash condition by pure deviations only; mixed best
    /// responses are convex combinations of pure ones, so this is exact.
    pub fn verify_nash(&self, profile: &MixedProfile) -> Result<EquilibriumCertificate, GameError> {
        self.require_two_players()?;
        self.check_profile(profile)?;
        profile.validate()?;
        let realized = self.expected_utility(profile)?;
        let mut slacks = Vec::with_capacity(2);
        let mut witness = None;
        for player in 0..2 {
            let opp_mix = &profile.probs[1 - player];
            let mut row = Vec::with_capacity(self.num_strategies(player));
            for s in 0..self.num_strategies(player) {
                let dev = self.pure_vs_mix(player, s, opp_mix);
                let slack = &realized[player] - &dev;
                if slack.is_negative() && witness.is_none() {
                    witness = Some((player, s));
                }
                row.push(slack);
            }
            slacks.push(row);
        }
        let verdict = match witness {
            None => Verdict::Accepted,
            Some((player, strategy)) => Verdict::Rejected {
                player,
                strategy,
                label: self.strategies[player][strategy].clone(),
            },
        };
        Ok(EquilibriumCertificate {
            profile: profile.clone(),
            realized,
            slacks,
            verdict,
        })
    }

    /// Sum of expected utilities.
    pub fn social_welfare(&self, profile: &MixedProfile) -> Result<Rational, GameError> {
        Ok(self
            .expected_utility(profile)?
            .into_iter()
            .fold(Rational::zero(), |a, v| a + v))
    }

    /// True iff u1(a, b) = u2(b, a) for all pure pairs.
    pub fn is_symmetric(&self) -> Result<bool, GameError> {
        self.require_two_players()?;
        let (m, n) = (self.num_strategies(0), self.num_strategies(1));
        if m != n {
            return Err(GameError::UnequalStrategySets(m, n));
        }
        for i in 0..m {
            for j in 0..n {
                if self.payoff2(i, j, 0) != self.payoff2(j, i, 1) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// True iff no distribution over pure outcome cells weakly dominates
    /// `values` with a strict improvement somewhere. Solved as an exact
    /// LP: maximize total utility subject to each player's utility
    /// staying at or above its floor; the optimum exceeds the sum of the
    /// floors exactly when a dominating distribution exists.
    pub fn pareto_optimal(&self, values: &[Rational]) -> Result<bool, GameError> {
        let players = self.num_players();
        if values.len() != players {
            return Err(GameError::DimensionMismatch);
        }
        let cells = self.payoffs.len();
        let nvars = cells + players; // outcome weights plus per-player surplus
        let mut a = Vec::with_capacity(players + 1);
        let mut b = Vec::with_capacity(players + 1);

        let mut norm = vec![Rational::zero(); nvars];
        for v in norm.iter_mut().take(cells) {
            *v = Rational::one();
        }
        a.push(norm);
        b.push(Rational::one());

        for p in 0..players {
            let mut row = vec![Rational::zero(); nvars];
            for (cell, u) in self.payoffs.iter().enumerate() {
                row[cell] = u[p].clone();
            }
            row[cells + p] = Rational::from_int(-1);
            a.push(row);
            b.push(values[p].clone());
        }

        let mut cost = vec![Rational::zero(); nvars];
        for (cell, u) in self.payoffs.iter().enumerate() {
            cost[cell] = u.iter().fold(Rational::zero(), |acc, v| acc + v.clone());
        }

        match lp::maximize(&a, &b, &cost) {
            LpResult::Optimal(opt) => {
                let floor_sum = values
                    .iter()
                    .fold(Rational::zero(), |acc, v| acc + v.clone());
                Ok(opt == floor_sum)
            }
            LpResult::Infeasible => Err(GameError::UnachievableValueVector),
            LpResult::Unbounded => unreachable!("welfare LP over a simplex is bounded"),
        }
    }
}

/// Exact mixed strategy per player: entries nonnegative, each player's
/// entries summing to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedProfile {
    pub probs: Vec<Vec<Rational>>,
}

impl MixedProfile {
    pub fn new(probs: Vec<Vec<Rational>>) -> Result<Self, GameError> {
        let p = MixedProfile { probs };
        p.validate()?;
        Ok(p)
    }

    pub fn pure(dims: &[usize], choice: &[usize]) -> Self {
        let probs = dims
            .iter()
            .zip(choice)
            .map(|(&n, &c)| {
                let mut v = vec![Rational::zero(); n];
                v[c] = Rational::one();
                v
            })
            .collect();
        MixedProfile { probs }
    }

    pub fn validate(&self) -> Result<(), GameError> {
        for probs in &self.probs {
            let mut sum = Rational::zero();
            let mut any_positive = false;
            for v in probs {
                if v.is_negative() {
                    return Err(GameError::InvalidProfile("negative probability".into()));
                }
                any_positive |= v.is_positive();
                sum += v.clone();
            }
            if sum != Rational::one() {
                return Err(GameError::InvalidProfile(format!(
                    "probabilities sum to {sum}, not 1"
                )));
            }
            if !any_positive {
                return Err(GameError::InvalidProfile("empty support".into()));
            }
        }
        Ok(())
    }

    pub fn support(&self, player: usize) -> Vec<usize> {
        self.probs[player]
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_positive())
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected {
        player: usize,
        strategy: usize,
        label: String,
    },
}

/// Outcome of a Nash check: realized utilities plus the exact deviation
/// slack of every pure strategy. Accepted iff every slack is >= 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumCertificate {
    pub profile: MixedProfile,
    pub realized: Vec<Rational>,
    pub slacks: Vec<Vec<Rational>>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

impl EquilibriumCertificate {
    pub fn accepted(&self) -> bool {
        matches!(self.verdict, Verdict::Accepted)
    }
}

/// Shared 2-player game JSON: strategy label lists plus a payoff matrix
/// of `["p/q", "p/q"]` cells.
#[derive(Serialize, Deserialize)]
pub struct GameJson {
    pub players: usize,
    pub strategies: Vec<Vec<String>>,
    pub payoffs: Vec<Vec<(Rational, Rational)>>,
}

impl GameJson {
    pub fn from_game(game: &NormalFormGame) -> Result<Self, GameError> {
        if game.num_players() != 2 {
            return Err(GameError::PlayerCount(game.num_players()));
        }
        let (m, n) = (game.num_strategies(0), game.num_strategies(1));
        let payoffs = (0..m)
            .map(|i| {
                (0..n)
                    .map(|j| (game.payoff2(i, j, 0).clone(), game.payoff2(i, j, 1).clone()))
                    .collect()
            })
            .collect();
        Ok(GameJson {
            players: 2,
            strategies: game.strategies.clone(),
            payoffs,
        })
    }

    pub fn into_game(self) -> Result<NormalFormGame, GameError> {
        if self.players != 2 || self.strategies.len() != 2 {
            return Err(GameError::Structure(
                "game JSON must declare 2 players".into(),
            ));
        }
        let [l1, l2]: [Vec<String>; 2] = self
            .strategies
            .try_into()
            .map_err(|_| GameError::Structure("strategies must list 2 players".into()))?;
        let mut u1 = Vec::with_capacity(l1.len());
        let mut u2 = Vec::with_capacity(l1.len());
        if self.payoffs.len() != l1.len() {
            return Err(GameError::Structure("payoff row count mismatch".into()));
        }
        for row in self.payoffs {
            if row.len() != l2.len() {
                return Err(GameError::Structure("payoff column count mismatch".into()));
            }
            let (r1, r2): (Vec<_>, Vec<_>) = row.into_iter().unzip();
            u1.push(r1);
            u2.push(r2);
        }
        NormalFormGame::from_tables2([l1, l2], u1, u2)
    }
}
