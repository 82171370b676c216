//! Dense tableau simplex for `min c·x` subject to `A x = b`, `x >= 0`, with
//! `b >= 0` and an identity starting basis supplied by the caller. Bland's
//! rule guarantees termination; exact scalar types give exact optima.

use crate::error::{structural, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct StandardLp<S> {
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
    pub c: Vec<S>,
    /// `basis[r]` is a column equal to the unit vector `e_r`.
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub objective: S,
    /// Row prices `y` with `c_j - y·A_j >= 0` for every column at optimality.
    pub duals: Vec<S>,
    pub pivots: usize,
    /// Final basis, `basis[r]` being the column basic in row `r`.
    pub basis: Vec<usize>,
}

/// Float tableaus are rebuilt from the original rows this often.
const REFACTOR_EVERY: usize = 200;

/// Basic values down to this are clamped to zero on refactorization.
const SLACK: f64 = -1e-5;

pub fn solve<S: Scalar>(lp: &StandardLp<S>, max_pivots: usize) -> Result<LpSolution<S>> {
    solve_warm(lp, None, max_pivots)
}

/// Like [`solve`], but starts from `warm` when it is a nonsingular, primal
/// feasible basis. Otherwise the slack basis of `lp` is used.
pub fn solve_warm<S: Scalar>(lp: &StandardLp<S>, warm: Option<&[usize]>, max_pivots: usize) -> Result<LpSolution<S>> {
    let rows = lp.a.len();
    let cols = lp.c.len();
    if lp.b.len() != rows || lp.basis.len() != rows || lp.a.iter().any(|r| r.len() != cols) {
        return structural("linear program dimensions disagree");
    }
    if lp.b.iter().any(|v| v.strictly_negative()) {
        return structural("right-hand side must be non-negative");
    }
    let eps = S::tolerance();
    // Floats pivot against a slightly perturbed right-hand side, which
    // removes the degenerate vertices that make float pivoting stall or
    // cycle. The final basis is re-evaluated against the true one.
    let b: Vec<S> = if S::EXACT {
        lp.b.clone()
    } else {
        (0..rows).map(|r| lp.b[r].clone() + S::from_f64(1e-7 * (1.0 + ((r * 2_654_435_761) % 1024) as f64 / 1024.0))).collect()
    };
    let mut t = lp.a.clone();
    let mut rhs = b.clone();
    let mut basis = lp.basis.clone();
    let initial = lp.basis.clone();

    let mut red: Vec<S> = lp.c.clone();
    let mut obj = S::zero();
    for r in 0..rows {
        let cb = lp.c[basis[r]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..cols {
            red[j] = red[j].clone() - cb.clone() * t[r][j].clone();
        }
        obj = obj + cb * rhs[r].clone();
    }

    if let Some(fresh) = warm.filter(|w| w.len() == rows && w.iter().all(|&j| j < cols)).and_then(|w| refactor(lp, &b, w, SLACK)) {
        (t, rhs, red, obj, basis) = fresh;
    }

    let neg_eps = -eps.clone();
    // Floating point never pivots on entries this small.
    let pivot_eps = if S::EXACT { eps.clone() } else { S::from_f64(1e-9) };
    let mut pivots = 0;
    let mut since_refactor = 0usize;
    loop {
        if !S::EXACT && since_refactor >= REFACTOR_EVERY {
            if let Some(fresh) = refactor(lp, &b, &basis, SLACK) {
                (t, rhs, red, obj, basis) = fresh;
            }
            since_refactor = 0;
        }
        // Exact types use Bland's rule. Floats price by the most negative
        // reduced cost and break ratio ties lexicographically, which rules
        // out cycling without Bland's slow crawl through degenerate vertices.
        let enter = if S::EXACT {
            (0..cols).find(|&j| red[j] < neg_eps)
        } else {
            (0..cols).filter(|&j| red[j] < neg_eps).min_by(|&a, &b| red[a].partial_cmp(&red[b]).unwrap_or(std::cmp::Ordering::Equal))
        };
        let Some(enter) = enter else {
            // Drift can fake optimality. Reduced costs recomputed from the
            // original columns either confirm it or call for a fresh tableau.
            if !S::EXACT && since_refactor > 0 {
                let fresh = fresh_reduced_costs(lp, &t, &basis, &initial);
                if fresh.iter().any(|v| *v < neg_eps) {
                    since_refactor = REFACTOR_EVERY;
                    continue;
                }
                red = fresh;
            }
            break;
        };
        let leave = if S::EXACT {
            bland_leave(&t, &rhs, &basis, enter, &pivot_eps)
        } else {
            lex_leave(&t, &rhs, &initial, enter, pivot_eps.to_f64())
        };
        let Some(lr) = leave else {
            return Err(Error::Structural("linear program is unbounded".into()));
        };
        pivots += 1;
        since_refactor += 1;
        if pivots > max_pivots {
            return Err(Error::Budget(format!("simplex exceeded {max_pivots} pivots")));
        }

        let p = t[lr][enter].clone();
        for v in t[lr].iter_mut() {
            *v = v.clone() / p.clone();
        }
        rhs[lr] = rhs[lr].clone() / p;
        let pivot_row = t[lr].clone();
        let pivot_rhs = rhs[lr].clone();
        for r in 0..rows {
            if r == lr || t[r][enter].is_zero() {
                continue;
            }
            let f = t[r][enter].clone();
            for j in 0..cols {
                if !pivot_row[j].is_zero() {
                    t[r][j] = t[r][j].clone() - f.clone() * pivot_row[j].clone();
                }
            }
            rhs[r] = rhs[r].clone() - f * pivot_rhs.clone();
            if rhs[r].strictly_negative() && !S::EXACT {
                rhs[r] = S::zero();
            }
        }
        let f = red[enter].clone();
        for j in 0..cols {
            if !pivot_row[j].is_zero() {
                red[j] = red[j].clone() - f.clone() * pivot_row[j].clone();
            }
        }
        obj = obj + f * pivot_rhs;
        basis[lr] = enter;
    }

    if !S::EXACT {
        // Basic values for the unperturbed right-hand side, `B^-1 b`, read
        // off the columns of the initial identity.
        let floor = S::from_f64(SLACK);
        let exact: Vec<S> = (0..rows)
            .map(|r| (0..rows).fold(S::zero(), |acc, k| acc + t[r][initial[k]].clone() * lp.b[k].clone()))
            .collect();
        if exact.iter().all(|v| *v >= floor) {
            rhs = exact.into_iter().map(|v| if v.strictly_negative() { S::zero() } else { v }).collect();
            obj = (0..rows).fold(S::zero(), |acc, r| acc + lp.c[basis[r]].clone() * rhs[r].clone());
        } else if let Some((_, exact_rhs, _, exact_obj, order)) = refactor(lp, &lp.b, &basis, SLACK) {
            (rhs, obj, basis) = (exact_rhs, exact_obj, order);
        }
    }
    let mut x = vec![S::zero(); cols];
    for r in 0..rows {
        x[basis[r]] = rhs[r].clone();
    }
    let duals = (0..rows).map(|r| lp.c[initial[r]].clone() - red[initial[r]].clone()).collect();
    Ok(LpSolution { x, objective: obj, duals, pivots, basis })
}

/// `c - c_B B^-1 A` from the original columns, with `B^-1` read off the
/// tableau columns of the initial identity.
fn fresh_reduced_costs<S: Scalar>(lp: &StandardLp<S>, t: &[Vec<S>], basis: &[usize], initial: &[usize]) -> Vec<S> {
    let rows = lp.a.len();
    let y: Vec<S> = (0..rows)
        .map(|k| {
            (0..rows)
                .filter(|&r| !lp.c[basis[r]].is_zero())
                .fold(S::zero(), |acc, r| acc + lp.c[basis[r]].clone() * t[r][initial[k]].clone())
        })
        .collect();
    let mut red = lp.c.clone();
    for (k, yk) in y.iter().enumerate() {
        if yk.is_zero() {
            continue;
        }
        for (j, a) in lp.a[k].iter().enumerate() {
            if !a.is_zero() {
                red[j] = red[j].clone() - yk.clone() * a.clone();
            }
        }
    }
    red
}

type Tableau<S> = (Vec<Vec<S>>, Vec<S>, Vec<S>, S, Vec<usize>);

/// Recomputes `B^-1 A`, `B^-1 b`, the reduced costs and the objective for
/// `basis` from the original data by Gauss-Jordan elimination with partial
/// pivoting against the right-hand side `b`. Returns the basis reordered to
/// match the rows, or `None` when the basis matrix is numerically singular
/// or some basic value lies below `floor`.
fn refactor<S: Scalar>(lp: &StandardLp<S>, b: &[S], basis: &[usize], floor: f64) -> Option<Tableau<S>> {
    let rows = lp.a.len();
    let cols = lp.c.len();
    let mut t = lp.a.clone();
    let mut rhs = b.to_vec();
    let mut done = vec![false; rows];
    let mut order = vec![usize::MAX; rows];
    for &col in basis {
        let r = (0..rows)
            .filter(|&r| !done[r])
            .max_by(|&a, &b| t[a][col].to_f64().abs().total_cmp(&t[b][col].to_f64().abs()))?;
        if t[r][col].to_f64().abs() < 1e-11 {
            return None;
        }
        done[r] = true;
        order[r] = col;
        let p = t[r][col].clone();
        for v in t[r].iter_mut().filter(|v| !v.is_zero()) {
            *v = v.clone() / p.clone();
        }
        rhs[r] = rhs[r].clone() / p;
        let pivot_row = t[r].clone();
        let pivot_rhs = rhs[r].clone();
        let nonzero: Vec<usize> = (0..cols).filter(|&j| !pivot_row[j].is_zero()).collect();
        for o in 0..rows {
            if o == r || t[o][col].is_zero() {
                continue;
            }
            let f = t[o][col].clone();
            for &j in &nonzero {
                t[o][j] = t[o][j].clone() - f.clone() * pivot_row[j].clone();
            }
            rhs[o] = rhs[o].clone() - f * pivot_rhs.clone();
        }
    }
    // A basis that is infeasible beyond rounding is useless to the primal
    // simplex.
    let floor = if S::EXACT { S::zero() } else { S::from_f64(floor) };
    if rhs.iter().any(|v| *v < floor) {
        return None;
    }
    for v in rhs.iter_mut() {
        if v.strictly_negative() {
            *v = S::zero();
        }
    }
    let mut red = lp.c.clone();
    let mut obj = S::zero();
    for r in 0..rows {
        let cb = lp.c[order[r]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..cols {
            if !t[r][j].is_zero() {
                red[j] = red[j].clone() - cb.clone() * t[r][j].clone();
            }
        }
        obj = obj + cb * rhs[r].clone();
    }
    Some((t, rhs, red, obj, order))
}

fn bland_leave<S: Scalar>(t: &[Vec<S>], rhs: &[S], basis: &[usize], enter: usize, eps: &S) -> Option<usize> {
    let mut leave: Option<(usize, S)> = None;
    for r in 0..t.len() {
        if t[r][enter] > *eps {
            let ratio = rhs[r].clone() / t[r][enter].clone();
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
    }
    leave.map(|(r, _)| r)
}

/// Minimum ratio rows, ties within a small tolerance broken by the
/// lexicographically smallest row of `B^-1` scaled by the pivot. Rows of
/// `B^-1` are independent, so the choice is unique.
fn lex_leave<S: Scalar>(t: &[Vec<S>], rhs: &[S], initial: &[usize], enter: usize, pivot_eps: f64) -> Option<usize> {
    const TIE: f64 = 1e-12;
    let rows: Vec<usize> = (0..t.len()).filter(|&r| t[r][enter].to_f64() > pivot_eps).collect();
    let ratio = |r: usize| rhs[r].to_f64() / t[r][enter].to_f64();
    let best = rows.iter().map(|&r| ratio(r)).fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = rows.into_iter().filter(|&r| ratio(r) <= best + TIE).collect();
    tied.into_iter().reduce(|a, b| {
        let (pa, pb) = (t[a][enter].to_f64(), t[b][enter].to_f64());
        for &k in initial {
            let (va, vb) = (t[a][k].to_f64() / pa, t[b][k].to_f64() / pb);
            if (va - vb).abs() > TIE {
                return if va < vb { a } else { b };
            }
        }
        if pa >= pb { a } else { b }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    /// min -x - y  s.t.  x + 2y + s1 = 4,  3x + y + s2 = 6.
    fn sample<S: Scalar>() -> StandardLp<S> {
        let v = |x: f64| S::from_f64(x);
        StandardLp {
            a: vec![vec![v(1.), v(2.), v(1.), v(0.)], vec![v(3.), v(1.), v(0.), v(1.)]],
            b: vec![v(4.), v(6.)],
            c: vec![v(-1.), v(-1.), v(0.), v(0.)],
            basis: vec![2, 3],
        }
    }

    #[test]
    fn exact_optimum_and_duals() {
        let sol = solve(&sample::<Rational>(), 100).unwrap();
        // Vertex (8/5, 6/5), value -14/5; duals solve y·A_B = c_B.
        assert_eq!(sol.x[0], q(8, 5));
        assert_eq!(sol.x[1], q(6, 5));
        assert_eq!(sol.objective, q(-14, 5));
        assert_eq!(sol.duals, vec![q(-2, 5), q(-1, 5)]);
    }

    #[test]
    fn float_matches_exact() {
        let sol = solve(&sample::<f64>(), 100).unwrap();
        assert!((sol.objective + 2.8).abs() < 1e-12);
    }

    #[test]
    fn warm_start_from_the_optimal_basis_needs_no_pivot() {
        let cold = solve(&sample::<f64>(), 100).unwrap();
        let warm = solve_warm(&sample::<f64>(), Some(&cold.basis), 100).unwrap();
        assert_eq!(warm.pivots, 0);
        assert!((warm.objective - cold.objective).abs() < 1e-12);
        let exact = solve_warm(&sample::<Rational>(), Some(&[1, 0]), 100).unwrap();
        assert_eq!((exact.pivots, exact.objective), (0, q(-14, 5)));
    }

    #[test]
    fn infeasible_warm_basis_falls_back_to_slacks() {
        // Basis {x, s2} puts x = 4 and s2 = -6.
        for warm in [vec![0, 3], vec![0, 0], vec![7, 1]] {
            let sol = solve_warm(&sample::<Rational>(), Some(&warm), 100).unwrap();
            assert_eq!(sol.objective, q(-14, 5));
            let sol = solve_warm(&sample::<f64>(), Some(&warm), 100).unwrap();
            assert!((sol.objective + 2.8).abs() < 1e-9);
        }
    }

    /// `min -c·x` s.t. `A x + s = b` for a nonnegative `A`; `b` has zeros,
    /// so the slack basis is degenerate.
    fn packing<S: Scalar>(a: &[Vec<u8>], b: &[u8], c: &[u8]) -> StandardLp<S> {
        let (m, n) = (a.len(), c.len());
        let int = |v: u8| S::from_usize(v as usize);
        StandardLp {
            a: (0..m)
                .map(|r| (0..n).map(|j| int(a[r][j])).chain((0..m).map(|k| if k == r { S::one() } else { S::zero() })).collect())
                .collect(),
            b: b.iter().map(|&v| int(v)).collect(),
            c: c.iter().map(|&v| -int(v)).chain((0..m).map(|_| S::zero())).collect(),
            basis: (n..n + m).collect(),
        }
    }

    proptest::proptest! {
        #[test]
        fn float_simplex_agrees_with_exact(
            a in proptest::collection::vec(proptest::collection::vec(0u8..4, 6), 0..6),
            b in proptest::collection::vec(0u8..5, 6),
            c in proptest::collection::vec(0u8..6, 6),
        ) {
            // A row of ones keeps every instance bounded.
            let a: Vec<Vec<u8>> = a.into_iter().chain([vec![1; 6]]).collect();
            let b: Vec<u8> = b[..a.len() - 1].iter().copied().chain([9]).collect();
            let b = &b[..];
            let exact = solve(&packing::<Rational>(&a, b, &c), 10_000).unwrap();
            let float = solve(&packing::<f64>(&a, b, &c), 10_000).unwrap();
            let target = exact.objective.to_f64();
            proptest::prop_assert!((float.objective - target).abs() <= 1e-9 * (1.0 + target.abs()), "{} vs {}", float.objective, target);
            for r in 0..a.len() {
                let load: f64 = (0..c.len()).map(|j| a[r][j] as f64 * float.x[j]).sum();
                proptest::prop_assert!(load <= b[r] as f64 + 1e-9);
            }
            proptest::prop_assert!(float.x.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn detects_unbounded() {
        let lp = StandardLp { a: vec![vec![1.0, -1.0]], b: vec![1.0], c: vec![0.0, -1.0], basis: vec![0] };
        assert!(solve(&lp, 10).is_err());
    }
}
