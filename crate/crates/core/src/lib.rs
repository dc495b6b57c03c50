//! Exact game-theoretic reductions from satisfiability and covering
//! problems, with equilibrium solvers that certify their answers over
//! rational (and algebraic-discount) arithmetic.

pub mod bayesian;
pub mod cnf;
pub mod enumeration;
pub mod game;
pub mod gphi;
pub mod linalg;
pub mod lp;
pub mod markov;
pub mod rational;
pub mod report;
