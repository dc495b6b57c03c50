//! End-to-end acceptance suite. Each test prints one `criterion N: PASS`
//! line (visible with `--nocapture`); a failure panics with context.

use nash_gadgets::bayesian::{
    build_setcover_game, find_pure_bne, plays_only_subsets, solve_set_cover_bruteforce,
    SetCoverInstance,
};
use nash_gadgets::cnf::CnfFormula;
use nash_gadgets::enumeration::enumerate_equilibria;
use nash_gadgets::enumeration::EnumerationResult;
use nash_gadgets::game::{NormalFormGame, Verdict};
use nash_gadgets::gphi::{build_g_phi, query_equilibria, GphiGame, Query, Role};
use nash_gadgets::markov::delta::DiscountedValue;
use nash_gadgets::markov::{
    assignment_to_strategies, best_response, bool_action, build_periodic_game,
    build_periodic_game_finite, check_deviation_discounted, clause_action, evaluate_discounted,
    find_pure_ne_finite, periodic_sat_oracle, rps_gadget, windowed_conjunction, ActionSequence,
    BestResponse, PLit, PeriodicFormula, StochasticGame,
};
use nash_gadgets::rational::Rational;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every deduplicated CNF formula with `n` variables, up to 2 clauses of
/// 1–2 distinct non-tautological literals (clause order ignored).
fn cnf_corpus(n: usize) -> Vec<CnfFormula> {
    let lits: Vec<i64> = (1..=n as i64).flat_map(|v| [v, -v]).collect();
    let mut clauses: Vec<Vec<i64>> = lits.iter().map(|&l| vec![l]).collect();
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            if lits[i] != -lits[j] {
                clauses.push(vec![lits[i], lits[j]]);
            }
        }
    }
    let mut out = Vec::new();
    out.push(CnfFormula::new(n, vec![]).unwrap().0);
    for i in 0..clauses.len() {
        out.push(CnfFormula::new(n, vec![clauses[i].clone()]).unwrap().0);
        for j in i + 1..clauses.len() {
            out.push(
                CnfFormula::new(n, vec![clauses[i].clone(), clauses[j].clone()])
                    .unwrap()
                    .0,
            );
        }
    }
    out
}

fn full_cnf_corpus() -> Vec<CnfFormula> {
    let mut corpus = cnf_corpus(1);
    corpus.extend(cnf_corpus(2));
    corpus
}

/// Criteria 1 and 2 share the corpus enumerations; computing them once
/// keeps both inside their time budgets.
fn enumerated_corpus() -> &'static [(CnfFormula, GphiGame, EnumerationResult)] {
    static CACHE: OnceLock<Vec<(CnfFormula, GphiGame, EnumerationResult)>> = OnceLock::new();
    CACHE.get_or_init(|| {
        full_cnf_corpus()
            .into_iter()
            .map(|formula| {
                let g = build_g_phi(formula.clone()).unwrap();
                let result = enumerate_equilibria(&g.game).unwrap();
                (formula, g, result)
            })
            .collect()
    })
}

#[test]
fn criterion_1_sat_game_equilibria_are_assignments_plus_fallback() {
    for (formula, g, result) in enumerated_corpus() {
        let expected_sat = formula.satisfying_assignments().unwrap();
        let ctx = || format!("formula {:?}", formula.clauses);
        assert!(result.complete, "{}", ctx());
        assert!(!result.degenerate, "{}", ctx());
        assert_eq!(
            result.equilibria.len(),
            expected_sat.len() + 1,
            "count mismatch for {}",
            ctx()
        );

        let n = formula.n;
        let share = Rational::new(1, n as i64);
        let mut found_fallback = 0usize;
        let mut assignments: Vec<Vec<bool>> = Vec::new();
        for eq in &result.equilibria {
            let utilities = g.game.expected_utility(eq).unwrap();
            match g.profile_to_assignment(eq).unwrap() {
                None => {
                    found_fallback += 1;
                    assert_eq!(
                        utilities,
                        vec![Rational::zero(), Rational::zero()],
                        "{}",
                        ctx()
                    );
                }
                Some(assignment) => {
                    assert!(formula.evaluate(&assignment).unwrap(), "{}", ctx());
                    assert_eq!(
                        eq.probs[0],
                        eq.probs[1],
                        "asymmetric equilibrium in {}",
                        ctx()
                    );
                    let support = eq.support(0);
                    assert_eq!(support.len(), n, "{}", ctx());
                    for &s in &support {
                        assert!(matches!(g.roles[s], Role::Literal(_)), "{}", ctx());
                        assert_eq!(eq.probs[0][s], share, "non-uniform weight in {}", ctx());
                    }
                    assert_eq!(
                        utilities,
                        vec![Rational::one(), Rational::one()],
                        "{}",
                        ctx()
                    );
                    assignments.push(assignment);
                }
            }
        }
        assert_eq!(found_fallback, 1, "{}", ctx());
        let mut expected = expected_sat;
        assignments.sort();
        expected.sort();
        assert_eq!(assignments, expected, "{}", ctx());
    }
    println!("criterion 1: PASS — equilibria of the CNF game are exactly the satisfying assignments plus the fallback profile");
}

#[test]
fn criterion_2_equilibrium_queries_decide_satisfiability() {
    for (formula, g, result) in enumerated_corpus() {
        let sat_assignments = formula.satisfying_assignments().unwrap();
        let satisfiable = !sat_assignments.is_empty();
        let ask = |q: &Query| query_equilibria(g, result, q).unwrap();
        let ctx = || format!("formula {:?}", formula.clauses);

        assert_eq!(
            ask(&Query::WelfareAtLeast(Rational::from_int(2))),
            satisfiable,
            "{}",
            ctx()
        );
        assert_eq!(ask(&Query::MoreThanOne), satisfiable, "{}", ctx());
        assert_eq!(ask(&Query::ExistsParetoOptimal), satisfiable, "{}", ctx());
        assert_eq!(
            ask(&Query::NeverPlays("f".into())),
            satisfiable,
            "{}",
            ctx()
        );
        for v in 1..=formula.n as i64 {
            for lit in [v, -v] {
                let label = if lit > 0 {
                    format!("x{lit}")
                } else {
                    format!("-x{}", -lit)
                };
                let witnessed = sat_assignments
                    .iter()
                    .any(|a| a[(lit.unsigned_abs() as usize) - 1] == (lit > 0));
                assert_eq!(
                    ask(&Query::SometimesPlays(label.clone())),
                    witnessed,
                    "sometimes_plays {label} on {}",
                    ctx()
                );
            }
        }
    }
    println!("criterion 2: PASS — welfare, pareto, cardinality, and support queries decide satisfiability on the exhaustive corpus");
}

/// Every covering instance with ground set |S| ≤ 3, at most 3 distinct
/// nonempty subsets whose union covers S, budget k ≤ 2.
fn setcover_corpus() -> Vec<SetCoverInstance> {
    let mut out = Vec::new();
    for n in 1..=3usize {
        let subsets: Vec<Vec<usize>> = (1u32..1 << n)
            .map(|mask| (1..=n).filter(|e| mask >> (e - 1) & 1 == 1).collect())
            .collect();
        let full: u32 = (1 << n) - 1;
        let mask_of = |s: &[usize]| s.iter().fold(0u32, |m, e| m | 1 << (e - 1));
        let mut families: Vec<Vec<usize>> = Vec::new();
        for i in 0..subsets.len() {
            families.push(vec![i]);
            for j in i + 1..subsets.len() {
                families.push(vec![i, j]);
                for l in j + 1..subsets.len() {
                    families.push(vec![i, j, l]);
                }
            }
        }
        for family in families {
            let union = family.iter().fold(0u32, |m, &i| m | mask_of(&subsets[i]));
            if union != full {
                continue;
            }
            for k in 1..=2.min(family.len()) {
                out.push(SetCoverInstance {
                    n,
                    subsets: family.iter().map(|&i| subsets[i].clone()).collect(),
                    k,
                });
            }
        }
    }
    out
}

#[test]
fn criterion_3_pure_bne_exists_iff_cover_exists() {
    for instance in setcover_corpus() {
        let cover = solve_set_cover_bruteforce(&instance).unwrap();
        let game = build_setcover_game(&instance).unwrap();
        let bne = find_pure_bne(&game).unwrap();
        assert_eq!(
            bne.is_some(),
            cover.is_some(),
            "instance {instance:?}: bne {bne:?} vs cover {cover:?}"
        );
        if let Some(profile) = &bne {
            assert!(
                plays_only_subsets(&instance, profile),
                "instance {instance:?}: BNE {profile:?} uses an element action"
            );
        }
    }
    println!("criterion 3: PASS — pure Bayes-Nash equilibrium exists iff a size-bounded cover exists, and every equilibrium plays subset actions");
}

/// Every periodic formula over one variable (literals x1^0, x1^1 and
/// negations), 1–2 clauses of 1–2 distinct non-tautological literals.
fn periodic_corpus() -> Vec<PeriodicFormula> {
    let lits: Vec<PLit> = (0..2u8)
        .flat_map(|block| {
            [false, true].map(|negated| PLit {
                var: 1,
                block,
                negated,
            })
        })
        .collect();
    let mut clauses: Vec<Vec<PLit>> = lits.iter().map(|l| vec![l.clone()]).collect();
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            if !(lits[i].block == lits[j].block && lits[i].negated != lits[j].negated) {
                clauses.push(vec![lits[i].clone(), lits[j].clone()]);
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..clauses.len() {
        out.push(PeriodicFormula {
            n: 1,
            clauses: vec![clauses[i].clone()],
        });
        for j in i + 1..clauses.len() {
            out.push(PeriodicFormula {
                n: 1,
                clauses: vec![clauses[i].clone(), clauses[j].clone()],
            });
        }
    }
    out
}

#[test]
fn criterion_4_finite_horizon_equilibrium_iff_windowed_satisfiable() {
    let horizon = 6;
    for formula in periodic_corpus() {
        let windowed = windowed_conjunction(&formula, horizon).unwrap();
        let satisfiable = windowed.count_satisfying().unwrap() > 0;
        let game = build_periodic_game_finite(&formula, horizon).unwrap();
        let ne = find_pure_ne_finite(&game, horizon).unwrap();
        assert_eq!(
            ne.is_some(),
            satisfiable,
            "formula {:?}: equilibrium {ne:?} vs windowed satisfiability {satisfiable}",
            formula.clauses
        );
    }
    println!("criterion 4: PASS — finite-horizon pure equilibrium exists iff the windowed conjunction is satisfiable (n = 1, horizon 6)");
}

fn position_at(seq: &ActionSequence, stage: usize) -> usize {
    if stage < seq.preamble.len() {
        return stage;
    }
    let cycle = seq.cycle.as_ref().expect("infinite sequence");
    seq.preamble.len() + (stage - seq.preamble.len()) % cycle.len()
}

/// Exact value of: deviator plays `prefix`, then best-responds forever,
/// while the opponent follows `opp`.
fn prefix_then_best_response(
    game: &StochasticGame,
    opp: &ActionSequence,
    deviator: usize,
    prefix: &[usize],
    br: &BestResponse,
) -> DiscountedValue {
    let m = game.modulus();
    let mut state = 0usize;
    let mut total = DiscountedValue::zero(m);
    for (stage, &own) in prefix.iter().enumerate() {
        let o = opp.action_at(stage).unwrap();
        let (a1, a2) = if deviator == 0 { (own, o) } else { (o, own) };
        let weight = DiscountedValue::delta_pow(m, stage);
        total = total.add(&weight.mul(game.payoff(state, a1, a2, deviator)));
        state = game.successor(state, a1, a2);
    }
    let tail = DiscountedValue::delta_pow(m, prefix.len())
        .mul(br.value(state, position_at(opp, prefix.len())));
    total.add(&tail)
}

#[test]
fn criterion_5_discounted_construction_spot_checks() {
    let max_prefix = 6;
    let mut satisfiable_checked = 0usize;
    let mut unsat_checked = 0usize;
    for formula in periodic_corpus() {
        let game = build_periodic_game(&formula).unwrap();
        match periodic_sat_oracle(&formula, 4).unwrap() {
            Some(cycle) => {
                satisfiable_checked += 1;
                let seq = assignment_to_strategies(&formula, &cycle).unwrap();
                let profile = [seq.clone(), seq.clone()];
                let realized = evaluate_discounted(&game, &profile, 0).unwrap();
                assert!(
                    realized[0].is_zero() && realized[1].is_zero(),
                    "nonzero realized value for {:?}",
                    formula.clauses
                );
                for deviator in 0..2 {
                    let gain = check_deviation_discounted(&game, &profile, deviator, 0).unwrap();
                    assert!(
                        !gain.is_positive(),
                        "profitable deviation for player {deviator} in {:?}",
                        formula.clauses
                    );
                    // every explicit prefix deviation, best-response continuation
                    let br = best_response(&game, &profile[1 - deviator], deviator).unwrap();
                    let actions = game.num_actions();
                    for len in 0..=max_prefix {
                        let mut prefix = vec![0usize; len];
                        loop {
                            let v = prefix_then_best_response(
                                &game,
                                &profile[1 - deviator],
                                deviator,
                                &prefix,
                                &br,
                            );
                            assert!(
                                !v.sub(&realized[deviator]).is_positive(),
                                "prefix {prefix:?} profitable for player {deviator} in {:?}",
                                formula.clauses
                            );
                            let mut carry = true;
                            for slot in prefix.iter_mut().rev() {
                                *slot += 1;
                                if *slot < actions {
                                    carry = false;
                                    break;
                                }
                                *slot = 0;
                            }
                            if carry {
                                break;
                            }
                        }
                    }
                }
            }
            None => {
                unsat_checked += 1;
                // every short boolean cycle admits a certified profitable deviation
                for cycle in [
                    vec![true],
                    vec![false],
                    vec![true, false],
                    vec![false, true],
                ] {
                    let actions: Vec<usize> = cycle.iter().map(|&b| bool_action(b)).collect();
                    let seq = ActionSequence::periodic(vec![], actions).unwrap();
                    let profile = [seq.clone(), seq.clone()];
                    let improvable = (0..2).any(|d| {
                        check_deviation_discounted(&game, &profile, d, 0)
                            .unwrap()
                            .is_positive()
                    });
                    assert!(
                        improvable,
                        "no profitable deviation from cycle {cycle:?} in {:?}",
                        formula.clauses
                    );
                }
            }
        }
    }
    assert!(satisfiable_checked > 0 && unsat_checked > 0);

    // explicit punishing deviation on a canonical contradiction: x1^0 ∧ ¬x1^1
    let lit = |block: u8, negated: bool| PLit {
        var: 1,
        block,
        negated,
    };
    let formula = PeriodicFormula {
        n: 1,
        clauses: vec![vec![lit(0, false)], vec![lit(1, true)]],
    };
    let game = build_periodic_game(&formula).unwrap();
    let all_true = ActionSequence::periodic(vec![], vec![bool_action(true)]).unwrap();
    let profile = [all_true.clone(), all_true.clone()];
    let realized = evaluate_discounted(&game, &profile, 0).unwrap();
    // opponent keeps x1^k true, violating clause ¬x1^1: punish via clause 2
    let deviation =
        ActionSequence::periodic(vec![clause_action(1)], vec![bool_action(true)]).unwrap();
    let deviated = evaluate_discounted(&game, &[profile[0].clone(), deviation], 0).unwrap();
    assert!(deviated[1].sub(&realized[1]).is_positive());
    println!("criterion 5: PASS — satisfying profiles realize 0 with no profitable deviation (all prefixes ≤ 6 certified exactly); unsatisfiable windows admit certified profitable clause deviations");
}

#[test]
fn criterion_6_gadget_and_value_ring_sanity() {
    let e = Rational::one();
    for a in 3..=7usize {
        let g = rps_gadget(a, &e).unwrap();
        for i in 0..a {
            for j in 0..a {
                assert_eq!(g[j][i], -&g[i][j], "not symmetric zero-sum at size {a}");
            }
        }
        for i in 0..a {
            for j in 0..a {
                let p1_happy = (0..a).all(|d| g[d][j] <= g[i][j]);
                let p2_happy = (0..a).all(|d| g[d][i] <= g[j][i]);
                assert!(
                    !(p1_happy && p2_happy),
                    "pure equilibrium at ({i},{j}), size {a}"
                );
            }
        }
    }
    for n in 1..=3usize {
        let m = 2 * n + 1;
        let d = DiscountedValue::delta(m);
        let half = DiscountedValue::constant(m, Rational::new(1, 2));
        assert_eq!(d.pow(m as u32), half, "defining relation fails for n={n}");
        for k_max in 0..=10usize {
            // (1 − δ)·Σ_{k<K} δ^k + δ^K = 1
            let mut sum = DiscountedValue::zero(m);
            for k in 0..k_max {
                sum = sum.add(&DiscountedValue::delta_pow(m, k));
            }
            let one_minus = DiscountedValue::from_int(m, 1).sub(&d);
            let lhs = one_minus
                .mul(&sum)
                .add(&DiscountedValue::delta_pow(m, k_max));
            assert_eq!(
                lhs,
                DiscountedValue::from_int(m, 1),
                "geometric identity fails n={n} K={k_max}"
            );
        }
    }
    println!("criterion 6: PASS — cyclic-tournament gadgets (sizes 3–7) and the algebraic discount ring satisfy their defining identities");
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num = rng.gen_range(-4i64..=4);
    let den = rng.gen_range(1i64..=4);
    Rational::new(num, den)
}

#[test]
fn criterion_7_solver_soundness_on_random_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CAFE);
    let labels = |prefix: &str| (0..3).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    for trial in 0..100 {
        let table = |rng: &mut ChaCha8Rng| {
            (0..3)
                .map(|_| (0..3).map(|_| random_rational(rng)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        let (u1, u2) = (table(&mut rng), table(&mut rng));
        let game = NormalFormGame::from_tables2([labels("r"), labels("c")], u1, u2).unwrap();
        // ties in the small payoff pool can make a trial legitimately
        // degenerate; soundness and determinism must hold regardless
        let result = enumerate_equilibria(&game).unwrap();
        assert_eq!(result.complete, !result.degenerate, "trial {trial}");
        for eq in &result.equilibria {
            let cert = game.verify_nash(eq).unwrap();
            assert!(
                matches!(cert.verdict, Verdict::Accepted),
                "trial {trial}: rejected equilibrium {eq:?} ({:?})",
                cert.verdict
            );
        }
        if !result.degenerate {
            assert_eq!(
                result.equilibria.len() % 2,
                1,
                "trial {trial}: even equilibrium count"
            );
        }

        let serialized = serde_json::to_string(&result).unwrap();
        for threads in [1usize, 4] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            let again = pool.install(|| enumerate_equilibria(&game).unwrap());
            assert_eq!(
                serde_json::to_string(&again).unwrap(),
                serialized,
                "trial {trial}: {threads}-thread result differs"
            );
        }
    }
    println!("criterion 7: PASS — 100 seeded random games: every enumerated profile verifies, nondegenerate counts are odd, results are thread-count independent");
}
