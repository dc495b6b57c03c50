//! Exact Gaussian elimination over rationals. No pivot tolerance exists:
//! a pivot is any exactly nonzero entry.

use crate::rational::Rational;

/// Full solution set of `A x = b`: a particular solution plus a basis of
/// the homogeneous nullspace. `nullspace` empty means the solution is
/// unique.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub particular: Vec<Rational>,
    pub nullspace: Vec<Vec<Rational>>,
}

/// Solves `A x = b` given the augmented matrix `[A | b]` with `unknowns`
/// columns of `A`. Returns `None` when the system is inconsistent.
pub fn solve(aug: Vec<Vec<Rational>>, unknowns: usize) -> Option<LinearSolution> {
    match solve_i128(&aug, unknowns) {
        Some(result) => result,
        None => solve_bigrational(aug, unknowns),
    }
}

/// Fraction-free Gauss-Jordan over i128 (Montante's method): entries stay
/// integer minors of the input, so intermediate growth is bounded and
/// every division is exact. Outer `None` means the input does not fit or
/// overflowed; the caller then falls back to arbitrary precision. Pivot
/// selection matches the fallback, so both paths produce identical
/// solutions.
fn solve_i128(aug: &[Vec<Rational>], unknowns: usize) -> Option<Option<LinearSolution>> {
    let rows = aug.len();
    // clear row denominators (row scaling preserves the solution set)
    let mut m: Vec<Vec<i128>> = Vec::with_capacity(rows);
    for row in aug {
        let pairs: Vec<(i128, i128)> = row
            .iter()
            .map(Rational::to_i128_pair)
            .collect::<Option<_>>()?;
        let scale = pairs
            .iter()
            .try_fold(1i128, |acc, &(_, d)| acc.checked_mul(d / gcd(acc, d)))?;
        let ints: Vec<i128> = pairs
            .iter()
            .map(|&(n, d)| n.checked_mul(scale / d))
            .collect::<Option<_>>()?;
        m.push(ints);
    }

    let mut pivot_col_of_row = Vec::new();
    let mut prev: i128 = 1;
    let mut row = 0;
    for col in 0..unknowns {
        let Some(pr) = (row..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let pivot = m[row][col];
        for r in 0..rows {
            if r == row {
                continue;
            }
            let factor = m[r][col];
            for c in 0..=unknowns {
                let v = pivot
                    .checked_mul(m[r][c])?
                    .checked_sub(factor.checked_mul(m[row][c])?)?;
                debug_assert_eq!(v % prev, 0, "fraction-free division must be exact");
                m[r][c] = v / prev;
            }
        }
        prev = pivot;
        pivot_col_of_row.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }

    for r in row..rows {
        if m[r][unknowns] != 0 {
            return Some(None);
        }
    }

    let mut is_pivot = vec![false; unknowns];
    for &c in &pivot_col_of_row {
        is_pivot[c] = true;
    }
    let mut particular = vec![Rational::zero(); unknowns];
    for (r, &c) in pivot_col_of_row.iter().enumerate() {
        particular[c] = ratio(m[r][unknowns], m[r][c]);
    }
    let mut nullspace = Vec::new();
    for free in 0..unknowns {
        if is_pivot[free] {
            continue;
        }
        let mut vec = vec![Rational::zero(); unknowns];
        vec[free] = Rational::one();
        for (r, &c) in pivot_col_of_row.iter().enumerate() {
            vec[c] = -&ratio(m[r][free], m[r][c]);
        }
        nullspace.push(vec);
    }
    Some(Some(LinearSolution {
        particular,
        nullspace,
    }))
}

fn gcd(a: i128, b: i128) -> i128 {
    num_integer::gcd(a, b)
}

/// Scales a rational row to integers (row scaling preserves solution
/// sets). `None` when an entry does not fit in i128.
pub fn row_to_i128(row: &[Rational]) -> Option<Vec<i128>> {
    let pairs: Vec<(i128, i128)> = row
        .iter()
        .map(Rational::to_i128_pair)
        .collect::<Option<_>>()?;
    let scale = pairs
        .iter()
        .try_fold(1i128, |acc, &(_, d)| acc.checked_mul(d / gcd(acc, d)))?;
    pairs
        .iter()
        .map(|&(n, d)| n.checked_mul(scale / d))
        .collect()
}

pub enum SquareSolve {
    Unique(Vec<Rational>),
    Singular,
    Overflow,
}

/// Solves the square integer system `[A | b]` (n rows of length n+1)
/// exactly via fraction-free elimination. The rows are clobbered, letting
/// callers reuse one allocation across many solves.
pub fn solve_square_i128(m: &mut [Vec<i128>], n: usize) -> SquareSolve {
    debug_assert!(m.len() == n && m.iter().all(|r| r.len() == n + 1));
    let mut prev: i128 = 1;
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| m[r][col] != 0) else {
            return SquareSolve::Singular;
        };
        m.swap(col, pr);
        let pivot = m[col][col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r][col];
            for c in 0..=n {
                let Some(prod) = pivot
                    .checked_mul(m[r][c])
                    .and_then(|x| factor.checked_mul(m[col][c]).and_then(|y| x.checked_sub(y)))
                else {
                    return SquareSolve::Overflow;
                };
                debug_assert_eq!(prod % prev, 0, "fraction-free division must be exact");
                m[r][c] = prod / prev;
            }
        }
        prev = pivot;
    }
    SquareSolve::Unique(
        (0..n)
            .map(|i| Rational::from_i128_ratio(m[i][n], m[i][i]))
            .collect(),
    )
}

fn ratio(num: i128, den: i128) -> Rational {
    Rational::from_i128_ratio(num, den)
}

fn solve_bigrational(mut aug: Vec<Vec<Rational>>, unknowns: usize) -> Option<LinearSolution> {
    let rows = aug.len();
    debug_assert!(aug.iter().all(|r| r.len() == unknowns + 1));

    let mut pivot_col_of_row = Vec::new();
    let mut row = 0;
    for col in 0..unknowns {
        let Some(pr) = (row..rows).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, pr);
        let inv = aug[row][col].recip();
        for c in col..=unknowns {
            let v = &aug[row][c] * &inv;
            aug[row][c] = v;
        }
        for r in 0..rows {
            if r != row && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in col..=unknowns {
                    let v = &aug[r][c] - &(&factor * &aug[row][c]);
                    aug[r][c] = v;
                }
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }

    // Inconsistent if a zero row has nonzero right-hand side.
    for r in row..rows {
        if !aug[r][unknowns].is_zero() {
            return None;
        }
    }

    let mut is_pivot = vec![false; unknowns];
    for &c in &pivot_col_of_row {
        is_pivot[c] = true;
    }

    let mut particular = vec![Rational::zero(); unknowns];
    for (r, &c) in pivot_col_of_row.iter().enumerate() {
        particular[c] = aug[r][unknowns].clone();
    }

    let mut nullspace = Vec::new();
    for free in 0..unknowns {
        if is_pivot[free] {
            continue;
        }
        let mut vec = vec![Rational::zero(); unknowns];
        vec[free] = Rational::one();
        for (r, &c) in pivot_col_of_row.iter().enumerate() {
            vec[c] = -&aug[r][free];
        }
        nullspace.push(vec);
    }

    Some(LinearSolution {
        particular,
        nullspace,
    })
}
