//! Complete Nash-equilibrium enumeration for 2-player games by support
//! enumeration over exact rationals, with degeneracy detection.
//!
//! For each support pair the indifference conditions form an exact
//! linear system; unique solutions yield at most one candidate, while
//! underdetermined feasible systems are resolved by enumerating the
//! vertices of the solution polytope. Two distinct verified solutions
//! sharing one support pair witness a positive-dimensional equilibrium
//! family, which flags the game degenerate.

use rayon::prelude::*;
use serde::Serialize;

use crate::game::{GameError, MixedProfile, NormalFormGame};
use crate::linalg;
use crate::rational::Rational;

pub const DEFAULT_MAX_STRATEGIES: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum EnumError {
    #[error("strategy count {got} exceeds enumeration bound {bound}")]
    Capacity { got: usize, bound: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Candidate support sets, one per player.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportPair {
    pub t1: Vec<usize>,
    pub t2: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumerationResult {
    pub equilibria: Vec<MixedProfile>,
    pub complete: bool,
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub degenerate_witnesses: Vec<SupportPair>,
}

#[derive(Debug, Default)]
pub struct SupportSolve {
    /// Fully verified equilibrium profiles with these supports.
    pub candidates: Vec<MixedProfile>,
    /// True when a positive-dimensional family passed verification.
    pub degenerate: bool,
}

/// One player's side of a support pair: the feasible opponent mixes, and
/// whether the feasible set has positive dimension (a whole face of
/// mixes, not just isolated points, satisfies every constraint).
struct SideSolve {
    /// Feasible solutions as (full-length mix, common value).
    solutions: Vec<(Vec<Rational>, Rational)>,
    positive_dim: bool,
}

/// Opponent mixes over `own_support`'s indifference system.
fn indifference_solutions(
    game: &NormalFormGame,
    player: usize,
    own_support: &[usize],
    opp_support: &[usize],
) -> SideSolve {
    let opp = 1 - player;
    let k = opp_support.len();
    let unknowns = k + 1; // opponent probabilities, then the common value u

    // u_player(i, q) - u = 0 for each supported i; sum q = 1.
    let mut aug = Vec::with_capacity(own_support.len() + 1);
    for &i in own_support {
        let mut row = Vec::with_capacity(unknowns + 1);
        for &j in opp_support {
            let cell = if player == 0 {
                game.payoff2(i, j, 0)
            } else {
                game.payoff2(j, i, 1)
            };
            row.push(cell.clone());
        }
        row.push(Rational::from_int(-1));
        row.push(Rational::zero());
        aug.push(row);
    }
    let mut norm = vec![Rational::one(); k];
    norm.push(Rational::zero());
    norm.push(Rational::one());
    aug.push(norm);

    let empty = SideSolve {
        solutions: Vec::new(),
        positive_dim: false,
    };
    let Some(sol) = linalg::solve(aug.clone(), unknowns) else {
        return empty;
    };

    let mut raw: Vec<Vec<Rational>> = Vec::new();
    if sol.nullspace.is_empty() {
        raw.push(sol.particular);
    } else {
        // Vertices of the solution polytope: pin free-count many of the
        // probability unknowns (never u) to zero. Solving in nullspace
        // coordinates keeps each pinned system d×d: x = x0 + V·λ with
        // x[z] = 0 for z in the pinned set.
        let d = sol.nullspace.len();
        let rational_row = |z: usize| {
            let mut row: Vec<Rational> = sol.nullspace.iter().map(|v| v[z].clone()).collect();
            row.push(-&sol.particular[z]);
            row
        };
        // integer form of every pinnable row, so each subset is a d×d
        // integer solve with no per-subset conversions
        let int_rows: Option<Vec<Vec<i128>>> = (0..k)
            .map(|z| linalg::row_to_i128(&rational_row(z)))
            .collect();
        let mut scratch: Vec<Vec<i128>> = vec![vec![0; d + 1]; d];
        let mut lambda_for = |zero_set: &[usize]| -> Option<Vec<Rational>> {
            if let Some(rows) = &int_rows {
                for (slot, &z) in scratch.iter_mut().zip(zero_set) {
                    slot.copy_from_slice(&rows[z]);
                }
                match linalg::solve_square_i128(&mut scratch, d) {
                    linalg::SquareSolve::Unique(lambda) => return Some(lambda),
                    linalg::SquareSolve::Singular => return None,
                    linalg::SquareSolve::Overflow => {}
                }
            }
            let sys: Vec<Vec<Rational>> = zero_set.iter().map(|&z| rational_row(z)).collect();
            linalg::solve(sys, d)
                .filter(|s| s.nullspace.is_empty())
                .map(|s| s.particular)
        };
        for zero_set in combinations(k, d) {
            let Some(lambda) = lambda_for(&zero_set) else {
                continue;
            };
            let mut x = sol.particular.clone();
            for (t, v) in sol.nullspace.iter().enumerate() {
                if lambda[t].is_zero() {
                    continue;
                }
                for (c, slot) in x.iter_mut().enumerate() {
                    *slot = &*slot + &(&lambda[t] * &v[c]);
                }
            }
            if !raw.contains(&x) {
                raw.push(x);
            }
        }
    }

    // Every nonnegative vertex, its off-support slacks, and whether the
    // off-support conditions hold (strategies outside the support must
    // not beat the common value).
    let off: Vec<usize> = (0..game.num_strategies(player))
        .filter(|s| !own_support.contains(s))
        .collect();
    struct Vertex {
        x: Vec<Rational>,
        full: Vec<Rational>,
        value: Rational,
        /// `pure_vs_mix(s) - value` per off-support strategy; > 0 breaks
        /// feasibility, = 0 is a tight constraint.
        slack: Vec<Rational>,
        feasible: bool,
    }
    let mut verts: Vec<Vertex> = Vec::new();
    for vec in raw {
        if vec[..k].iter().any(|q| q.is_negative()) {
            continue;
        }
        let value = vec[k].clone();
        let mut full = vec![Rational::zero(); game.num_strategies(opp)];
        for (idx, &j) in opp_support.iter().enumerate() {
            full[j] = vec[idx].clone();
        }
        let slack: Vec<Rational> = off
            .iter()
            .map(|&s| &game.pure_vs_mix(player, s, &full) - &value)
            .collect();
        let feasible = slack.iter().all(|c| !c.is_positive());
        verts.push(Vertex {
            x: vec,
            full,
            value,
            slack,
            feasible,
        });
    }

    // The feasible set is positive-dimensional when some feasible vertex
    // admits a movement direction toward another vertex of the equality
    // polytope along which every constraint tight at the vertex stays
    // satisfied. Off-support ties can carve such faces strictly inside
    // the polytope edges, which is exactly how positive-dimensional
    // equilibrium families evade per-vertex enumeration.
    let positive_dim = verts.iter().filter(|v| v.feasible).any(|v| {
        verts.iter().any(|w| {
            w.x != v.x
                && v.slack
                    .iter()
                    .zip(&w.slack)
                    .all(|(cv, cw)| !cv.is_zero() || !cw.is_positive())
        })
    });

    SideSolve {
        solutions: verts
            .into_iter()
            .filter(|v| v.feasible)
            .map(|v| (v.full, v.value))
            .collect(),
        positive_dim,
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Solves one support pair exactly. Candidates are verified equilibria;
/// the degeneracy flag is set when two distinct verified profiles share
/// this pair (so a whole segment between them qualifies).
pub fn solve_support(game: &NormalFormGame, pair: &SupportPair) -> Result<SupportSolve, EnumError> {
    if game.num_players() != 2 {
        return Err(GameError::PlayerCount(game.num_players()).into());
    }
    let q_side = indifference_solutions(game, 0, &pair.t1, &pair.t2);
    if q_side.solutions.is_empty() {
        return Ok(SupportSolve::default());
    }
    let p_side = indifference_solutions(game, 1, &pair.t2, &pair.t1);

    let mut candidates = Vec::new();
    for (p, _) in &p_side.solutions {
        for (q, _) in &q_side.solutions {
            let profile = MixedProfile {
                probs: vec![p.clone(), q.clone()],
            };
            if profile.validate().is_err() {
                continue;
            }
            if !game.verify_nash(&profile)?.accepted() {
                continue;
            }
            if !candidates.contains(&profile) {
                candidates.push(profile);
            }
        }
    }
    // Degenerate when two verified profiles share the pair (the segment
    // between them is all equilibria), or when one side's feasible set is
    // positive-dimensional and at least one profile verified: crossing
    // any feasible point of that side with a verified complement stays an
    // equilibrium, so a whole family exists.
    let degenerate = candidates.len() >= 2
        || (!candidates.is_empty() && (q_side.positive_dim || p_side.positive_dim));
    Ok(SupportSolve {
        candidates,
        degenerate,
    })
}

fn support_from_mask(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

/// Per opponent-support-mask bounds used to discard support pairs
/// without solving them: at an equilibrium with supports (A, B), the
/// player's value u satisfies
///   max_r min_{b∈B} u(r, b)  ≤  u  ≤  min_{i∈A} max_{b∈B} u(i, b)
/// (left: deviating to any row r earns at least its worst supported
/// cell; right: a supported row cannot exceed its best supported cell).
struct PairBounds {
    /// `lower[mask]` = max over all rows of the row minimum within mask.
    lower: Vec<Rational>,
    /// `row_max[mask][row]` = row maximum within mask.
    row_max: Vec<Vec<Rational>>,
}

impl PairBounds {
    /// `cell(row, col)` is the player's payoff; masks range over columns.
    fn build(rows: usize, cols: usize, cell: impl Fn(usize, usize) -> Rational) -> Self {
        let size = 1usize << cols;
        let mut row_min: Vec<Vec<Rational>> = vec![Vec::new(); size];
        let mut row_max: Vec<Vec<Rational>> = vec![Vec::new(); size];
        let mut lower = vec![Rational::zero(); size];
        for mask in 1..size {
            let col = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let (mins, maxs): (Vec<Rational>, Vec<Rational>) = (0..rows)
                .map(|r| {
                    let v = cell(r, col);
                    if rest == 0 {
                        (v.clone(), v)
                    } else {
                        (
                            v.clone().min(row_min[rest][r].clone()),
                            v.max(row_max[rest][r].clone()),
                        )
                    }
                })
                .unzip();
            lower[mask] = mins.iter().max().expect("nonempty rows").clone();
            row_min[mask] = mins;
            row_max[mask] = maxs;
        }
        PairBounds { lower, row_max }
    }

    /// False when no equilibrium can have these supports.
    fn feasible(&self, own_mask: u32, opp_mask: u32) -> bool {
        let lower = &self.lower[opp_mask as usize];
        let maxs = &self.row_max[opp_mask as usize];
        let mut mask = own_mask;
        while mask != 0 {
            let row = mask.trailing_zeros() as usize;
            if &maxs[row] < lower {
                return false;
            }
            mask &= mask - 1;
        }
        true
    }
}

fn profile_sort_key(p: &MixedProfile) -> (Vec<usize>, Vec<usize>, Vec<Rational>, Vec<Rational>) {
    (
        p.support(0),
        p.support(1),
        p.probs[0].clone(),
        p.probs[1].clone(),
    )
}

pub fn enumerate_equilibria(game: &NormalFormGame) -> Result<EnumerationResult, EnumError> {
    enumerate_equilibria_bounded(game, DEFAULT_MAX_STRATEGIES)
}

/// Iterates every support pair in increasing total-size order, merging
/// per-pair results deterministically, so the output is identical
/// regardless of worker count.
pub fn enumerate_equilibria_bounded(
    game: &NormalFormGame,
    max_strategies: usize,
) -> Result<EnumerationResult, EnumError> {
    if game.num_players() != 2 {
        return Err(GameError::PlayerCount(game.num_players()).into());
    }
    let (m, n) = (game.num_strategies(0), game.num_strategies(1));
    for count in [m, n] {
        if count > max_strategies {
            return Err(EnumError::Capacity {
                got: count,
                bound: max_strategies,
            });
        }
    }

    // exact value-bound tables, player 0 over column masks, player 1 over
    // row masks
    let bounds0 = PairBounds::build(m, n, |i, j| game.payoff2(i, j, 0).clone());
    let bounds1 = PairBounds::build(n, m, |j, i| game.payoff2(i, j, 1).clone());

    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for mask1 in 1..(1u32 << m) {
        for mask2 in 1..(1u32 << n) {
            if bounds0.feasible(mask1, mask2) && bounds1.feasible(mask2, mask1) {
                pairs.push((mask1, mask2));
            }
        }
    }
    pairs.sort_by_key(|&(a, b)| (a.count_ones() + b.count_ones(), a, b));

    let solved: Vec<(SupportPair, SupportSolve)> = pairs
        .par_iter()
        .map(|&(mask1, mask2)| {
            let pair = SupportPair {
                t1: support_from_mask(mask1, m),
                t2: support_from_mask(mask2, n),
            };
            let solve = solve_support(game, &pair)?;
            Ok((pair, solve))
        })
        .collect::<Result<_, EnumError>>()?;

    let mut equilibria: Vec<MixedProfile> = Vec::new();
    let mut degenerate = false;
    let mut witnesses = Vec::new();
    for (pair, solve) in solved {
        if solve.degenerate {
            degenerate = true;
            witnesses.push(pair.clone());
        }
        for profile in solve.candidates {
            if !equilibria.contains(&profile) {
                equilibria.push(profile);
            }
        }
    }
    equilibria.sort_by(|a, b| profile_sort_key(a).cmp(&profile_sort_key(b)));

    // Equilibrium components of a two-player game are products of mix
    // polytopes, so two equilibria sharing one player's mix span a
    // segment that is all equilibria: the differing player's endpoint
    // supports are best responses to the shared mix throughout, and the
    // shared player's support stays optimal because its defining
    // inequalities are linear along the segment. Such families can evade
    // the per-pair detection when their endpoints surface under
    // different support pairs.
    for (idx, a) in equilibria.iter().enumerate() {
        for b in &equilibria[idx + 1..] {
            let Some(shared) = (0..2).find(|&p| a.probs[p] == b.probs[p]) else {
                continue;
            };
            degenerate = true;
            let moving = 1 - shared;
            let mut union = a.support(moving);
            for s in b.support(moving) {
                if !union.contains(&s) {
                    union.push(s);
                }
            }
            union.sort_unstable();
            let (t1, t2) = if moving == 0 {
                (union, a.support(1))
            } else {
                (a.support(0), union)
            };
            let witness = SupportPair { t1, t2 };
            if !witnesses.contains(&witness) {
                witnesses.push(witness);
            }
        }
    }

    Ok(EnumerationResult {
        equilibria,
        complete: !degenerate,
        degenerate,
        degenerate_witnesses: witnesses,
    })
}
