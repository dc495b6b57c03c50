//! Compiles a CNF formula into a symmetric 2-player game whose Nash
//! equilibria are exactly the satisfying assignments (played uniformly
//! over their true literals) plus one fallback equilibrium, and answers
//! existence queries over a complete equilibrium list.

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfError, CnfFormula};
use crate::enumeration::EnumerationResult;
use crate::game::{GameError, GameJson, MixedProfile, NormalFormGame};
use crate::rational::Rational;

#[derive(Debug, thiserror::Error)]
pub enum GphiError {
    #[error("assignment does not satisfy the formula")]
    NonSatisfyingAssignment,
    #[error("profile matches neither equilibrium shape: {0}")]
    InconsistentProfile(String),
    #[error("refusing to answer: enumeration is not complete")]
    IncompleteEnumeration,
    #[error("refusing to count connected sets: game flagged degenerate")]
    DegenerateGame,
    #[error("unknown strategy label {0:?}")]
    UnknownStrategy(String),
    #[error(transparent)]
    Cnf(#[from] CnfError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// What a strategy in the compiled game stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// A signed literal over the source variables.
    Literal(i64),
    /// A variable index, 1-based.
    Variable(usize),
    /// A clause index into the source formula, 0-based.
    Clause(usize),
    /// The fallback strategy.
    F,
}

impl Role {
    fn label(&self) -> String {
        match self {
            Role::Literal(l) if *l > 0 => format!("x{l}"),
            Role::Literal(l) => format!("-x{}", -l),
            Role::Variable(v) => format!("v{v}"),
            Role::Clause(c) => format!("c{}", c + 1),
            Role::F => "f".to_string(),
        }
    }
}

/// The compiled game plus the meaning of every strategy index. The two
/// players share one strategy list; the game is symmetric.
#[derive(Debug, Clone)]
pub struct GphiGame {
    pub game: NormalFormGame,
    pub roles: Vec<Role>,
    pub formula: CnfFormula,
}

/// Row player's payoff for one cell, derived entirely from the two
/// strategies' roles. Single source of truth for the payoff tensor.
pub fn role_payoff(a: &Role, b: &Role, formula: &CnfFormula) -> Rational {
    let n = formula.n as i64;
    match a {
        Role::Literal(l) => match b {
            Role::Literal(l2) if *l2 == -l => Rational::from_int(-2),
            Role::Literal(_) => Rational::one(),
            _ => Rational::from_int(-2),
        },
        Role::Variable(v) => match b {
            Role::Literal(l) if l.unsigned_abs() as usize == *v => Rational::from_int(2 - n),
            Role::Literal(_) => Rational::from_int(2),
            _ => Rational::from_int(-2),
        },
        Role::Clause(c) => match b {
            Role::Literal(l) if formula.clauses[*c].contains(l) => Rational::from_int(2 - n),
            Role::Literal(_) => Rational::from_int(2),
            _ => Rational::from_int(-2),
        },
        Role::F => match b {
            Role::F => Rational::zero(),
            _ => Rational::one(),
        },
    }
}

/// Strategy order: x1, -x1, ..., xn, -xn; variables; clauses in input
/// order; f last.
fn roles_for(formula: &CnfFormula) -> Vec<Role> {
    let mut roles = Vec::with_capacity(3 * formula.n + formula.clauses.len() + 1);
    for v in 1..=formula.n as i64 {
        roles.push(Role::Literal(v));
        roles.push(Role::Literal(-v));
    }
    for v in 1..=formula.n {
        roles.push(Role::Variable(v));
    }
    for c in 0..formula.clauses.len() {
        roles.push(Role::Clause(c));
    }
    roles.push(Role::F);
    roles
}

pub fn build_g_phi(formula: CnfFormula) -> Result<GphiGame, GphiError> {
    let roles = roles_for(&formula);
    let labels: Vec<String> = roles.iter().map(Role::label).collect();
    let game = NormalFormGame::from_fn(vec![labels.clone(), labels], |p| {
        vec![
            role_payoff(&roles[p[0]], &roles[p[1]], &formula),
            role_payoff(&roles[p[1]], &roles[p[0]], &formula),
        ]
    })?;
    debug_assert!(game.is_symmetric().unwrap());
    Ok(GphiGame {
        game,
        roles,
        formula,
    })
}

impl GphiGame {
    fn literal_index(&self, lit: i64) -> usize {
        // literals occupy the first 2n slots in x1, -x1, ... order
        let v = lit.unsigned_abs() as usize;
        2 * (v - 1) + usize::from(lit < 0)
    }

    /// Both players uniform with probability 1/n over the literals the
    /// (checked satisfying) assignment makes true.
    pub fn assignment_to_profile(&self, assignment: &[bool]) -> Result<MixedProfile, GphiError> {
        if !self.formula.evaluate(assignment)? {
            return Err(GphiError::NonSatisfyingAssignment);
        }
        let n = self.formula.n;
        let total = self.roles.len();
        let share = Rational::new(1, n as i64);
        let mut mix = vec![Rational::zero(); total];
        for (i, &val) in assignment.iter().enumerate() {
            let lit = if val { i as i64 + 1 } else { -(i as i64 + 1) };
            mix[self.literal_index(lit)] = share.clone();
        }
        Ok(MixedProfile {
            probs: vec![mix.clone(), mix],
        })
    }

    /// Reads an equilibrium profile back: the fallback equilibrium maps
    /// to `None`, a literal-uniform equilibrium to `Some(assignment)`.
    /// Anything else is an inconsistency error.
    pub fn profile_to_assignment(
        &self,
        profile: &MixedProfile,
    ) -> Result<Option<Vec<bool>>, GphiError> {
        let supports = [profile.support(0), profile.support(1)];
        let f_index = self.roles.len() - 1;
        if supports[0] == [f_index] && supports[1] == [f_index] {
            return Ok(None);
        }
        if supports[0] != supports[1] {
            return Err(GphiError::InconsistentProfile(
                "players have different supports".into(),
            ));
        }
        let n = self.formula.n;
        let share = Rational::new(1, n as i64);
        let mut assignment = vec![None; n];
        for &s in &supports[0] {
            let Role::Literal(l) = self.roles[s] else {
                return Err(GphiError::InconsistentProfile(format!(
                    "non-literal strategy {} in support",
                    self.roles[s].label()
                )));
            };
            if profile.probs[0][s] != share || profile.probs[1][s] != share {
                return Err(GphiError::InconsistentProfile(format!(
                    "literal {} not played with probability 1/{n}",
                    self.roles[s].label()
                )));
            }
            let v = l.unsigned_abs() as usize - 1;
            if assignment[v].is_some() {
                return Err(GphiError::InconsistentProfile(format!(
                    "both literals of variable {} in support",
                    v + 1
                )));
            }
            assignment[v] = Some(l > 0);
        }
        let assignment: Vec<bool> =
            assignment
                .into_iter()
                .collect::<Option<_>>()
                .ok_or_else(|| {
                    GphiError::InconsistentProfile("support does not cover every variable".into())
                })?;
        if !self.formula.evaluate(&assignment)? {
            return Err(GphiError::InconsistentProfile(
                "support literals do not satisfy the formula".into(),
            ));
        }
        Ok(Some(assignment))
    }
}

/// Existence queries over a complete equilibrium list.
#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    WelfareAtLeast(Rational),
    AllUtilitiesAtLeast(Rational),
    ExistsParetoOptimal,
    Player1UtilityAtLeast(Rational),
    MoreThanOne,
    /// Some equilibrium where player 1 gives this strategy positive weight.
    SometimesPlays(String),
    /// Some equilibrium where player 1 gives this strategy zero weight.
    NeverPlays(String),
}

pub fn query_equilibria(
    g: &GphiGame,
    result: &EnumerationResult,
    query: &Query,
) -> Result<bool, GphiError> {
    if !result.complete {
        return Err(GphiError::IncompleteEnumeration);
    }
    let resolve = |label: &str| {
        g.game
            .strategy_index(0, label)
            .ok_or_else(|| GphiError::UnknownStrategy(label.to_string()))
    };
    for e in &result.equilibria {
        let hit = match query {
            Query::WelfareAtLeast(k) => g.game.social_welfare(e)? >= *k,
            Query::AllUtilitiesAtLeast(k) => g.game.expected_utility(e)?.iter().all(|u| u >= k),
            Query::Player1UtilityAtLeast(k) => g.game.expected_utility(e)?[0] >= *k,
            Query::ExistsParetoOptimal => g.game.pareto_optimal(&g.game.expected_utility(e)?)?,
            Query::MoreThanOne => result.equilibria.len() > 1,
            Query::SometimesPlays(label) => e.probs[0][resolve(label)?].is_positive(),
            Query::NeverPlays(label) => e.probs[0][resolve(label)?].is_zero(),
        };
        if hit {
            return Ok(true);
        }
    }
    // Resolve labels even when no equilibrium matched, so typos fail loudly.
    if let Query::SometimesPlays(label) | Query::NeverPlays(label) = query {
        resolve(label)?;
    }
    Ok(false)
}

pub fn count_equilibria(result: &EnumerationResult) -> Result<usize, GphiError> {
    if !result.complete {
        return Err(GphiError::IncompleteEnumeration);
    }
    Ok(result.equilibria.len())
}

/// With all equilibria isolated, each is its own maximal connected set.
pub fn count_connected_sets(result: &EnumerationResult) -> Result<usize, GphiError> {
    if result.degenerate {
        return Err(GphiError::DegenerateGame);
    }
    count_equilibria(result)
}

/// Serialized form: the shared 2-player game JSON plus a roles array.
#[derive(Serialize, Deserialize)]
pub struct GphiJson {
    #[serde(flatten)]
    pub game: GameJson,
    pub roles: Vec<Role>,
    pub formula: CnfFormula,
}

impl GphiJson {
    pub fn from_gphi(g: &GphiGame) -> Result<Self, GphiError> {
        Ok(GphiJson {
            game: GameJson::from_game(&g.game)?,
            roles: g.roles.clone(),
            formula: g.formula.clone(),
        })
    }

    pub fn into_gphi(self) -> Result<GphiGame, GphiError> {
        let game = self.game.into_game()?;
        let rebuilt = build_g_phi(self.formula)?;
        if rebuilt.game != game || rebuilt.roles != self.roles {
            return Err(GphiError::InconsistentProfile(
                "serialized game does not match its formula".into(),
            ));
        }
        Ok(rebuilt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::enumerate_equilibria;

    fn formula(n: usize, clauses: Vec<Vec<i64>>) -> CnfFormula {
        CnfFormula::new(n, clauses).unwrap().0
    }

    fn r(v: i64) -> Rational {
        Rational::from_int(v)
    }

    #[test]
    fn strategy_count_and_order() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        assert_eq!(g.roles.len(), 5); // 2n + n + |C| + 1
        assert_eq!(g.game.strategy_labels(0), ["x1", "-x1", "v1", "c1", "f"]);
        assert!(g.game.is_symmetric().unwrap());
    }

    #[test]
    fn payoff_table_entries() {
        let f = formula(2, vec![vec![1, 2], vec![-1, 2]]);
        let g = build_g_phi(f.clone()).unwrap();
        let at = |a: &str, b: &str| {
            let i = g.game.strategy_index(0, a).unwrap();
            let j = g.game.strategy_index(1, b).unwrap();
            g.game.payoff2(i, j, 0).clone()
        };
        assert_eq!(at("x1", "-x1"), r(-2)); // opposite literals
        assert_eq!(at("x1", "x1"), r(1));
        assert_eq!(at("x1", "x2"), r(1));
        assert_eq!(at("x1", "v1"), r(-2)); // literal vs non-literal
        assert_eq!(at("v1", "x1"), r(0)); // 2 - n with n = 2
        assert_eq!(at("v1", "-x1"), r(0));
        assert_eq!(at("v1", "x2"), r(2));
        assert_eq!(at("v1", "c1"), r(-2));
        assert_eq!(at("c1", "x1"), r(0)); // x1 in clause 1: 2 - n
        assert_eq!(at("c1", "-x1"), r(2)); // -x1 not in clause 1
        assert_eq!(at("c1", "f"), r(-2));
        assert_eq!(at("f", "f"), r(0));
        assert_eq!(at("f", "x1"), r(1));

        // Rebuilding every cell from the roles reproduces the tensor.
        for (i, a) in g.roles.iter().enumerate() {
            for (j, b) in g.roles.iter().enumerate() {
                assert_eq!(*g.game.payoff2(i, j, 0), role_payoff(a, b, &f));
                assert_eq!(*g.game.payoff2(i, j, 1), role_payoff(b, a, &f));
            }
        }
    }

    #[test]
    fn assignment_profile_round_trip() {
        let g = build_g_phi(formula(2, vec![vec![1, 2]])).unwrap();
        let p = g.assignment_to_profile(&[true, true]).unwrap();
        let half = Rational::new(1, 2);
        assert_eq!(p.probs[0][0], half); // x1
        assert_eq!(p.probs[0][2], half); // x2
        assert!(g.game.verify_nash(&p).unwrap().accepted());
        assert_eq!(g.profile_to_assignment(&p).unwrap(), Some(vec![true, true]));
    }

    #[test]
    fn non_satisfying_assignment_rejected() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        assert!(matches!(
            g.assignment_to_profile(&[false]),
            Err(GphiError::NonSatisfyingAssignment)
        ));
    }

    #[test]
    fn fallback_profile_maps_to_marker() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        let f_idx = g.roles.len() - 1;
        let p = MixedProfile::pure(&[5, 5], &[f_idx, f_idx]);
        assert!(g.game.verify_nash(&p).unwrap().accepted());
        assert_eq!(g.profile_to_assignment(&p).unwrap(), None);
    }

    #[test]
    fn falsifying_pure_profile_is_rejected_by_clause_deviation() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        let neg = g.game.strategy_index(0, "-x1").unwrap();
        let p = MixedProfile::pure(&[5, 5], &[neg, neg]);
        let cert = g.game.verify_nash(&p).unwrap();
        assert!(!cert.accepted());
        assert_eq!(cert.realized, vec![r(1), r(1)]);
        // The profitable deviation is the clause strategy: it earns 2.
        match &cert.verdict {
            crate::game::Verdict::Rejected { label, .. } => assert_eq!(label, "c1"),
            _ => unreachable!(),
        }
    }

    #[test]
    fn enumeration_matches_model_count_plus_one() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        let result = enumerate_equilibria(&g.game).unwrap();
        assert!(result.complete && !result.degenerate);
        assert_eq!(count_equilibria(&result).unwrap(), 2);
        assert_eq!(count_connected_sets(&result).unwrap(), 2);

        let mut satisfying = 0;
        for e in &result.equilibria {
            match g.profile_to_assignment(e).unwrap() {
                Some(a) => {
                    assert!(g.formula.evaluate(&a).unwrap());
                    assert_eq!(g.game.expected_utility(e).unwrap(), vec![r(1), r(1)]);
                    satisfying += 1;
                }
                None => {
                    assert_eq!(g.game.expected_utility(e).unwrap(), vec![r(0), r(0)]);
                }
            }
        }
        assert_eq!(satisfying, 1);
    }

    #[test]
    fn unsatisfiable_formula_has_only_the_fallback() {
        let g = build_g_phi(formula(1, vec![vec![1], vec![-1]])).unwrap();
        let result = enumerate_equilibria(&g.game).unwrap();
        assert_eq!(count_equilibria(&result).unwrap(), 1);
        assert_eq!(
            g.profile_to_assignment(&result.equilibria[0]).unwrap(),
            None
        );
    }

    #[test]
    fn queries_on_satisfiable_formula() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        let result = enumerate_equilibria(&g.game).unwrap();
        let ask = |q: Query| query_equilibria(&g, &result, &q).unwrap();
        assert!(ask(Query::WelfareAtLeast(r(2))));
        assert!(ask(Query::AllUtilitiesAtLeast(r(1))));
        assert!(ask(Query::Player1UtilityAtLeast(r(1))));
        assert!(ask(Query::MoreThanOne));
        assert!(ask(Query::ExistsParetoOptimal));
        assert!(ask(Query::SometimesPlays("x1".into())));
        assert!(!ask(Query::SometimesPlays("-x1".into())));
        assert!(ask(Query::NeverPlays("f".into())));
    }

    #[test]
    fn queries_on_unsatisfiable_formula() {
        let g = build_g_phi(formula(1, vec![vec![1], vec![-1]])).unwrap();
        let result = enumerate_equilibria(&g.game).unwrap();
        let ask = |q: Query| query_equilibria(&g, &result, &q).unwrap();
        assert!(!ask(Query::WelfareAtLeast(r(2))));
        assert!(!ask(Query::MoreThanOne));
        assert!(!ask(Query::NeverPlays("f".into())));
        assert!(!ask(Query::ExistsParetoOptimal));
    }

    #[test]
    fn incomplete_enumeration_refused() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        let mut result = enumerate_equilibria(&g.game).unwrap();
        result.complete = false;
        assert!(matches!(
            query_equilibria(&g, &result, &Query::MoreThanOne),
            Err(GphiError::IncompleteEnumeration)
        ));
        assert!(matches!(
            count_equilibria(&result),
            Err(GphiError::IncompleteEnumeration)
        ));
    }

    #[test]
    fn unknown_strategy_label_is_an_error() {
        let g = build_g_phi(formula(1, vec![vec![1]])).unwrap();
        let result = enumerate_equilibria(&g.game).unwrap();
        assert!(matches!(
            query_equilibria(&g, &result, &Query::SometimesPlays("x9".into())),
            Err(GphiError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = build_g_phi(formula(2, vec![vec![1, -2]])).unwrap();
        let json = serde_json::to_string(&GphiJson::from_gphi(&g).unwrap()).unwrap();
        let back = serde_json::from_str::<GphiJson>(&json)
            .unwrap()
            .into_gphi()
            .unwrap();
        assert_eq!(back.game, g.game);
        assert_eq!(back.roles, g.roles);
    }
}
