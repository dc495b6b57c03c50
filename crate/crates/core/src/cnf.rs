//! CNF formulas: DIMACS parsing, evaluation, and brute-force
//! satisfiability/counting oracles at desk scale.

use serde::{Deserialize, Serialize};

/// Variables above this need more than brute force; everything in this
/// crate stays far below it.
pub const DEFAULT_BRUTE_FORCE_BOUND: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CnfError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("assignment length {got} does not match {expected} variables")]
    AssignmentLength { got: usize, expected: usize },
    #[error("{n} variables exceed the brute-force bound of {bound}")]
    Capacity { n: usize, bound: usize },
    #[error("invalid formula: {0}")]
    Invalid(String),
}

/// A CNF formula over variables 1..=n. Literals are signed variable
/// indices: positive for the variable, negative for its negation.
/// Clauses may be empty (the unsatisfiable empty clause); a clause never
/// contains both a literal and its negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub n: usize,
    pub clauses: Vec<Vec<i64>>,
}

/// Parse result: the formula plus any non-fatal warnings (currently only
/// duplicate-literal deduplication notices).
#[derive(Debug, Clone)]
pub struct ParsedCnf {
    pub formula: CnfFormula,
    pub warnings: Vec<String>,
}

impl CnfFormula {
    /// Validates literal ranges and rejects tautological clauses.
    /// Duplicate literals within a clause are deduplicated; the count of
    /// dropped duplicates is returned.
    pub fn new(n: usize, clauses: Vec<Vec<i64>>) -> Result<(Self, usize), CnfError> {
        if n == 0 {
            return Err(CnfError::Invalid(
                "formula must have n >= 1 variables".into(),
            ));
        }
        let mut cleaned = Vec::with_capacity(clauses.len());
        let mut dropped = 0;
        for clause in clauses {
            let mut seen = Vec::new();
            for lit in clause {
                let var = lit.unsigned_abs() as usize;
                if lit == 0 || var > n {
                    return Err(CnfError::Invalid(format!(
                        "literal {lit} out of range for {n} variables"
                    )));
                }
                if seen.contains(&-lit) {
                    return Err(CnfError::Invalid(format!(
                        "tautological clause contains both {lit} and {}",
                        -lit
                    )));
                }
                if seen.contains(&lit) {
                    dropped += 1;
                } else {
                    seen.push(lit);
                }
            }
            cleaned.push(seen);
        }
        Ok((
            CnfFormula {
                n,
                clauses: cleaned,
            },
            dropped,
        ))
    }

    /// True iff every clause contains a literal the assignment makes true.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<bool, CnfError> {
        if assignment.len() != self.n {
            return Err(CnfError::AssignmentLength {
                got: assignment.len(),
                expected: self.n,
            });
        }
        Ok(self.clauses.iter().all(|clause| {
            clause
                .iter()
                .any(|&lit| assignment[lit.unsigned_abs() as usize - 1] == (lit > 0))
        }))
    }

    /// Exact model count over all 2^n assignments.
    pub fn count_satisfying(&self) -> Result<u64, CnfError> {
        Ok(self.satisfying_assignments()?.len() as u64)
    }

    /// All satisfying assignments, in increasing binary order with
    /// variable 1 as the least significant bit.
    pub fn satisfying_assignments(&self) -> Result<Vec<Vec<bool>>, CnfError> {
        if self.n > DEFAULT_BRUTE_FORCE_BOUND {
            return Err(CnfError::Capacity {
                n: self.n,
                bound: DEFAULT_BRUTE_FORCE_BOUND,
            });
        }
        let mut out = Vec::new();
        for bits in 0u64..(1 << self.n) {
            let assignment: Vec<bool> = (0..self.n).map(|i| bits >> i & 1 == 1).collect();
            if self.evaluate(&assignment)? {
                out.push(assignment);
            }
        }
        Ok(out)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.n, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Parses standard DIMACS CNF: a `p cnf n m` header, zero-terminated
/// clauses, `c` comment lines.
pub fn parse_dimacs(text: &str) -> Result<ParsedCnf, CnfError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<i64>> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut warnings = Vec::new();
    let mut open_clause_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::Parse {
                    line: lineno,
                    message: "duplicate header".into(),
                });
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let (n, m) = match parts.as_slice() {
                ["p", "cnf", n, m] => (n.parse::<usize>().ok(), m.parse::<usize>().ok()),
                _ => (None, None),
            };
            match (n, m) {
                (Some(n), Some(m)) if n >= 1 => header = Some((n, m)),
                _ => {
                    return Err(CnfError::Parse {
                        line: lineno,
                        message: format!("malformed header {line:?}"),
                    })
                }
            }
            continue;
        }
        let Some((n, _)) = header else {
            return Err(CnfError::Parse {
                line: lineno,
                message: "clause before header".into(),
            });
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| CnfError::Parse {
                line: lineno,
                message: format!("bad token {tok:?}"),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() as usize > n {
                    return Err(CnfError::Parse {
                        line: lineno,
                        message: format!("literal {lit} out of range (n = {n})"),
                    });
                }
                if current.is_empty() {
                    open_clause_line = lineno;
                }
                current.push(lit);
            }
        }
    }

    let Some((n, m)) = header else {
        return Err(CnfError::Parse {
            line: 0,
            message: "missing header".into(),
        });
    };
    if !current.is_empty() {
        return Err(CnfError::Parse {
            line: open_clause_line,
            message: "unterminated clause (missing trailing 0)".into(),
        });
    }
    if clauses.len() != m {
        return Err(CnfError::Parse {
            line: 0,
            message: format!("header declares {m} clauses, found {}", clauses.len()),
        });
    }
    let (formula, dropped) = CnfFormula::new(n, clauses).map_err(|e| match e {
        CnfError::Invalid(message) => CnfError::Parse { line: 0, message },
        other => other,
    })?;
    if dropped > 0 {
        warnings.push(format!("deduplicated {dropped} repeated literal(s)"));
    }
    Ok(ParsedCnf { formula, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_clause() {
        let p = parse_dimacs("p cnf 1 1\n1 0\n").unwrap();
        assert_eq!(
            p.formula,
            CnfFormula {
                n: 1,
                clauses: vec![vec![1]]
            }
        );
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn parse_two_clauses() {
        let p = parse_dimacs("p cnf 2 2\n1 2 0\n-1 2 0\n").unwrap();
        assert_eq!(p.formula.n, 2);
        assert_eq!(p.formula.clauses, vec![vec![1, 2], vec![-1, 2]]);
    }

    #[test]
    fn out_of_range_literal() {
        let err = parse_dimacs("p cnf 1 1\n2 0\n").unwrap_err();
        assert!(matches!(err, CnfError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn clause_count_mismatch() {
        assert!(parse_dimacs("p cnf 1 2\n1 0\n").is_err());
    }

    #[test]
    fn malformed_header() {
        assert!(parse_dimacs("p cnf x 1\n1 0\n").is_err());
        assert!(parse_dimacs("1 0\n").is_err());
    }

    #[test]
    fn tautology_rejected() {
        assert!(parse_dimacs("p cnf 1 1\n1 -1 0\n").is_err());
    }

    #[test]
    fn duplicate_literal_warns() {
        let p = parse_dimacs("p cnf 1 1\n1 1 0\n").unwrap();
        assert_eq!(p.formula.clauses, vec![vec![1]]);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn evaluate_examples() {
        let (f, _) = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert!(f.evaluate(&[true]).unwrap());
        assert!(!f.evaluate(&[false]).unwrap());

        let (contradiction, _) = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert!(!contradiction.evaluate(&[true]).unwrap());
        assert!(!contradiction.evaluate(&[false]).unwrap());

        let (f2, _) = CnfFormula::new(2, vec![vec![1, 2], vec![-1, 2]]).unwrap();
        assert!(!f2.evaluate(&[true, false]).unwrap());
        assert!(f2.evaluate(&[true, true]).unwrap());

        assert!(matches!(
            f2.evaluate(&[true]),
            Err(CnfError::AssignmentLength { .. })
        ));
    }

    #[test]
    fn count_examples() {
        let (f, _) = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert_eq!(f.count_satisfying().unwrap(), 1);

        let (f2, _) = CnfFormula::new(2, vec![vec![1, 2], vec![-1, 2]]).unwrap();
        assert_eq!(f2.count_satisfying().unwrap(), 2);

        let (empty_clause, _) = CnfFormula::new(2, vec![vec![]]).unwrap();
        assert_eq!(empty_clause.count_satisfying().unwrap(), 0);

        // Empty formula: every assignment satisfies.
        let (empty, _) = CnfFormula::new(3, vec![]).unwrap();
        assert_eq!(empty.count_satisfying().unwrap(), 8);
    }

    #[test]
    fn capacity_bound() {
        let (f, _) = CnfFormula::new(21, vec![vec![1]]).unwrap();
        assert!(matches!(
            f.count_satisfying(),
            Err(CnfError::Capacity { n: 21, bound: 20 })
        ));
    }

    #[test]
    fn dimacs_round_trip_is_fixed_point() {
        let text = "p cnf 2 2\n1 2 0\n-1 2 0\n";
        let f = parse_dimacs(text).unwrap().formula;
        assert_eq!(f.to_dimacs(), text);
        let again = parse_dimacs(&f.to_dimacs()).unwrap().formula;
        assert_eq!(again, f);
    }
}
