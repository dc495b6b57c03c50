//! Two-player Bayesian games with exact priors, pure-strategy
//! Bayes-Nash search, a set-cover reduction whose pure equilibria exist
//! iff a small cover does, and an independent set-cover oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

pub const DEFAULT_PROFILE_BOUND: u64 = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum BayesianError {
    #[error("invalid game: {0}")]
    Invalid(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("profile shape does not match game")]
    ProfileShape,
    #[error("type has zero prior mass; interim utility undefined")]
    ZeroMassType,
    #[error("{count} pure profiles exceed the search bound {bound}")]
    Capacity { count: u64, bound: u64 },
}

/// A 2-player Bayesian game: a joint prior over type profiles and
/// type-dependent utilities over joint actions.
#[derive(Debug, Clone)]
pub struct BayesianGame {
    /// Per-player action labels.
    pub actions: [Vec<String>; 2],
    /// Joint prior, indexed `[type1][type2]`; entries >= 0, sum exactly 1.
    pub prior: Vec<Vec<Rational>>,
    /// `utilities[player][own_type][a1][a2]`.
    pub utilities: [Vec<Vec<Vec<Rational>>>; 2],
}

/// One pure action per (player, type).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PureBayesianProfile {
    pub actions: [Vec<usize>; 2],
}

impl BayesianGame {
    pub fn new(
        actions: [Vec<String>; 2],
        prior: Vec<Vec<Rational>>,
        utilities: [Vec<Vec<Vec<Rational>>>; 2],
    ) -> Result<Self, BayesianError> {
        let k1 = prior.len();
        if k1 == 0 || prior[0].is_empty() {
            return Err(BayesianError::Invalid("empty type set".into()));
        }
        let k2 = prior[0].len();
        let mut total = Rational::zero();
        for row in &prior {
            if row.len() != k2 {
                return Err(BayesianError::Invalid("ragged prior table".into()));
            }
            for p in row {
                if p.is_negative() {
                    return Err(BayesianError::Invalid("negative prior entry".into()));
                }
                total += p.clone();
            }
        }
        if total != Rational::one() {
            return Err(BayesianError::Invalid(format!(
                "prior sums to {total}, not 1"
            )));
        }
        for (player, ks) in [(0, k1), (1, k2)] {
            let u = &utilities[player];
            let ok = u.len() == ks
                && u.iter().all(|per_type| {
                    per_type.len() == actions[0].len()
                        && per_type.iter().all(|row| row.len() == actions[1].len())
                });
            if !ok {
                return Err(BayesianError::Invalid(format!(
                    "utility table shape mismatch for player {}",
                    player + 1
                )));
            }
        }
        Ok(BayesianGame {
            actions,
            prior,
            utilities,
        })
    }

    pub fn num_types(&self, player: usize) -> usize {
        if player == 0 {
            self.prior.len()
        } else {
            self.prior[0].len()
        }
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.actions[player].len()
    }

    fn check_profile(&self, profile: &PureBayesianProfile) -> Result<(), BayesianError> {
        for player in 0..2 {
            let map = &profile.actions[player];
            if map.len() != self.num_types(player)
                || map.iter().any(|&a| a >= self.num_actions(player))
            {
                return Err(BayesianError::ProfileShape);
            }
        }
        Ok(())
    }

    fn marginal(&self, player: usize, ty: usize) -> Rational {
        let mut total = Rational::zero();
        match player {
            0 => {
                for p in &self.prior[ty] {
                    total += p.clone();
                }
            }
            _ => {
                for row in &self.prior {
                    total += row[ty].clone();
                }
            }
        }
        total
    }

    /// Expected utility of playing `action` as (player, ty), conditional
    /// on own type, with the opponent following the profile's type map.
    pub fn interim_utility_of_action(
        &self,
        profile: &PureBayesianProfile,
        player: usize,
        ty: usize,
        action: usize,
    ) -> Result<Rational, BayesianError> {
        self.check_profile(profile)?;
        let mass = self.marginal(player, ty);
        if mass.is_zero() {
            return Err(BayesianError::ZeroMassType);
        }
        let opp = 1 - player;
        let mut acc = Rational::zero();
        for opp_ty in 0..self.num_types(opp) {
            let joint = if player == 0 {
                &self.prior[ty][opp_ty]
            } else {
                &self.prior[opp_ty][ty]
            };
            if joint.is_zero() {
                continue;
            }
            let opp_action = profile.actions[opp][opp_ty];
            let (a1, a2) = if player == 0 {
                (action, opp_action)
            } else {
                (opp_action, action)
            };
            acc += joint * &self.utilities[player][ty][a1][a2];
        }
        Ok(acc / mass)
    }

    /// Interim utility of the profile's own assigned action.
    pub fn interim_utility(
        &self,
        profile: &PureBayesianProfile,
        player: usize,
        ty: usize,
    ) -> Result<Rational, BayesianError> {
        self.interim_utility_of_action(profile, player, ty, profile.actions[player][ty])
    }

    /// Pure Bayes-Nash check: no (player, type) has a strictly improving
    /// action deviation. Zero-mass types are vacuously optimal.
    pub fn is_pure_bne(&self, profile: &PureBayesianProfile) -> Result<bool, BayesianError> {
        self.check_profile(profile)?;
        for player in 0..2 {
            for ty in 0..self.num_types(player) {
                if self.marginal(player, ty).is_zero() {
                    continue;
                }
                let base = self.interim_utility(profile, player, ty)?;
                for action in 0..self.num_actions(player) {
                    if action == profile.actions[player][ty] {
                        continue;
                    }
                    if self.interim_utility_of_action(profile, player, ty, action)? > base {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn profile_from_flat(game: &BayesianGame, mut flat: u64) -> PureBayesianProfile {
    // Decode with (player 2, last type) fastest, so increasing flat index
    // is lexicographic over (player, type, action index).
    let dims: Vec<(usize, usize)> = (0..2)
        .flat_map(|p| (0..game.num_types(p)).map(move |t| (p, t)))
        .collect();
    let mut actions = [
        vec![0usize; game.num_types(0)],
        vec![0usize; game.num_types(1)],
    ];
    for &(p, t) in dims.iter().rev() {
        let base = game.num_actions(p) as u64;
        actions[p][t] = (flat % base) as usize;
        flat /= base;
    }
    PureBayesianProfile { actions }
}

pub fn find_pure_bne(game: &BayesianGame) -> Result<Option<PureBayesianProfile>, BayesianError> {
    find_pure_bne_bounded(game, DEFAULT_PROFILE_BOUND)
}

/// Exhaustive scan in canonical (lexicographic) order; returns the first
/// pure Bayes-Nash profile. Parallel, but the witness is the earliest in
/// canonical order regardless of scheduling.
pub fn find_pure_bne_bounded(
    game: &BayesianGame,
    bound: u64,
) -> Result<Option<PureBayesianProfile>, BayesianError> {
    let mut count: u64 = 1;
    for player in 0..2 {
        for _ in 0..game.num_types(player) {
            count = count.saturating_mul(game.num_actions(player) as u64);
        }
    }
    if count > bound {
        return Err(BayesianError::Capacity { count, bound });
    }
    let hit = (0..count)
        .into_par_iter()
        .map(|flat| {
            let profile = profile_from_flat(game, flat);
            match game.is_pure_bne(&profile) {
                Ok(true) => Some(Ok(profile)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })
        .find_first(|r| r.is_some())
        .flatten();
    hit.transpose()
}

/// A covering problem: ground set {1..n}, subsets over it, budget k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub n: usize,
    pub subsets: Vec<Vec<usize>>,
    pub k: usize,
}

impl SetCoverInstance {
    pub fn validate(&self) -> Result<(), BayesianError> {
        if self.n == 0 {
            return Err(BayesianError::InvalidInstance("empty ground set".into()));
        }
        let m = self.subsets.len();
        if self.k == 0 || self.k > m {
            return Err(BayesianError::InvalidInstance(format!(
                "budget k = {} outside 1..={m}",
                self.k
            )));
        }
        let mut covered = vec![false; self.n];
        for subset in &self.subsets {
            for &e in subset {
                if e == 0 || e > self.n {
                    return Err(BayesianError::InvalidInstance(format!(
                        "element {e} outside ground set 1..={}",
                        self.n
                    )));
                }
                covered[e - 1] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return Err(BayesianError::InvalidInstance(
                "subsets do not cover the ground set".into(),
            ));
        }
        Ok(())
    }
}

/// Compiles a covering instance into a Bayesian game: k types per
/// player, independent uniform prior, type-independent payoffs. A pure
/// Bayes-Nash profile exists iff a cover of size <= k does.
pub fn build_setcover_game(instance: &SetCoverInstance) -> Result<BayesianGame, BayesianError> {
    instance.validate()?;
    let m = instance.subsets.len();
    let n = instance.n;
    let k = instance.k as i64;

    let mut labels = Vec::with_capacity(m + n);
    for i in 1..=m {
        labels.push(format!("S{i}"));
    }
    for e in 1..=n {
        labels.push(format!("s{e}"));
    }
    // Row player's payoff; the column player's is the transpose.
    let contains = |subset: usize, element: usize| instance.subsets[subset].contains(&element);
    let u1 = |a: usize, b: usize| -> Rational {
        let row_subset = a < m;
        let col_subset = b < m;
        match (row_subset, col_subset) {
            (true, true) => Rational::one(),
            (true, false) => {
                let e = b - m + 1;
                if contains(a, e) {
                    Rational::from_int(2)
                } else {
                    Rational::one()
                }
            }
            (false, true) => {
                let e = a - m + 1;
                if contains(b, e) {
                    Rational::from_int(-3 * k)
                } else {
                    Rational::from_int(3)
                }
            }
            (false, false) => Rational::from_int(-3 * k),
        }
    };

    let table: Vec<Vec<Rational>> = (0..m + n)
        .map(|a| (0..m + n).map(|b| u1(a, b)).collect())
        .collect();
    let transpose: Vec<Vec<Rational>> = (0..m + n)
        .map(|a| (0..m + n).map(|b| table[b][a].clone()).collect())
        .collect();

    let cell = Rational::new(1, k * k);
    let prior = vec![vec![cell; instance.k]; instance.k];
    let utilities = [vec![table; instance.k], vec![transpose; instance.k]];
    BayesianGame::new([labels.clone(), labels], prior, utilities)
}

/// True iff every (player, type) in the profile plays a subset action.
pub fn plays_only_subsets(instance: &SetCoverInstance, profile: &PureBayesianProfile) -> bool {
    let m = instance.subsets.len();
    profile.actions.iter().all(|map| map.iter().all(|&a| a < m))
}

/// Independent covering oracle: returns the lexicographically first
/// 1-based index list of size <= k whose union covers the ground set.
/// Shares no code with the game path.
pub fn solve_set_cover_bruteforce(
    instance: &SetCoverInstance,
) -> Result<Option<Vec<usize>>, BayesianError> {
    instance.validate()?;
    let m = instance.subsets.len();

    fn search(
        instance: &SetCoverInstance,
        chosen: &mut Vec<usize>,
        next: usize,
        m: usize,
    ) -> Option<Vec<usize>> {
        let mut covered = vec![false; instance.n];
        for &c in chosen.iter() {
            for &e in &instance.subsets[c - 1] {
                covered[e - 1] = true;
            }
        }
        if covered.iter().all(|&c| c) && !chosen.is_empty() {
            return Some(chosen.clone());
        }
        if chosen.len() == instance.k {
            return None;
        }
        for i in next..=m {
            chosen.push(i);
            if let Some(found) = search(instance, chosen, i + 1, m) {
                return Some(found);
            }
            chosen.pop();
        }
        None
    }

    Ok(search(instance, &mut Vec::new(), 1, m))
}
