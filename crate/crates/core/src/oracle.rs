//! Brute-force reference implementations, independent of the solver
//! machinery, used by property and acceptance tests.

use thiserror::Error;

use crate::instance::{Instance, Portfolio, QuadraticForm};
use crate::testset::{fiber_cmp, SlackSystem, TestSet};

#[derive(Debug, Clone, Copy)]
pub struct EnumerationBudget {
    pub max_points: u64,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_points: 2_000_000 }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration too large: about {estimate} points exceeds the cap {cap}")]
    TooLarge { estimate: u128, cap: u64 },
}

/// Exhaustively enumerates all non-negative integer portfolios within the
/// budget, filters by the risk cap, and returns the maximum-return point
/// (ties: lexicographically smallest) plus the number of points visited.
pub fn brute_force_optimum(
    inst: &Instance,
    q: &QuadraticForm,
    budget: EnumerationBudget,
) -> Result<(Portfolio, i64, u64), OracleError> {
    let mut estimate: u128 = 1;
    for &a in &inst.a {
        estimate = estimate.saturating_mul((inst.budget / a + 1) as u128);
        if estimate > budget.max_points as u128 {
            return Err(OracleError::TooLarge { estimate, cap: budget.max_points });
        }
    }
    let n = inst.n();
    let mut best: Option<(i64, Vec<i64>)> = None;
    let mut x = vec![0i64; n];
    let mut count = 0u64;
    dfs(inst, q, 0, inst.budget, &mut x, &mut best, &mut count);
    let (ret, point) = best.expect("zero portfolio is always feasible");
    Ok((Portfolio(point), ret, count))
}

fn dfs(
    inst: &Instance,
    q: &QuadraticForm,
    depth: usize,
    remaining: i64,
    x: &mut Vec<i64>,
    best: &mut Option<(i64, Vec<i64>)>,
    count: &mut u64,
) {
    if depth == inst.n() {
        *count += 1;
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        if q.eval(&xf) > q.cap {
            return;
        }
        let ret: i64 = inst.mu.iter().zip(x.iter()).map(|(&m, &v)| m * v).sum();
        let better = match best {
            None => true,
            Some((br, bp)) => ret > *br || (ret == *br && x.as_slice() < bp.as_slice()),
        };
        if better {
            *best = Some((ret, x.clone()));
        }
        return;
    }
    let cap = remaining / inst.a[depth];
    for k in 0..=cap {
        x[depth] = k;
        dfs(inst, q, depth + 1, remaining - k * inst.a[depth], x, best, count);
    }
    x[depth] = 0;
}

/// Enumerates the whole fiber `{ y >= 0 : A y = A p }` of a slack system and
/// returns its cost-maximal point, breaking cost ties with the test-set
/// order.  `p` is given in y-space (fiber) coordinates.
pub fn brute_force_fiber_optimum(
    sys: &SlackSystem,
    ts: &TestSet,
    p: &[i64],
    budget: EnumerationBudget,
) -> Result<Vec<i64>, OracleError> {
    let nf = sys.free.len();
    let m = sys.rows();
    // target right-hand side of this fiber
    let rhs: Vec<i64> = (0..m)
        .map(|r| sys.a[r].iter().zip(p).map(|(&c, &v)| c * v).sum())
        .collect();
    // the budget row has positive coefficients on every free column
    let limits: Vec<i64> = (0..nf).map(|j| rhs[0] / sys.a[0][j]).collect();
    let mut estimate: u128 = 1;
    for &l in &limits {
        estimate = estimate.saturating_mul((l + 1) as u128);
        if estimate > budget.max_points as u128 {
            return Err(OracleError::TooLarge { estimate, cap: budget.max_points });
        }
    }
    let mut free = vec![0i64; nf];
    let mut best: Option<Vec<i64>> = None;
    enumerate_free(sys, ts, &rhs, &limits, 0, &mut free, &mut best);
    Ok(best.expect("the fiber contains p itself"))
}

fn enumerate_free(
    sys: &SlackSystem,
    ts: &TestSet,
    rhs: &[i64],
    limits: &[i64],
    depth: usize,
    free: &mut Vec<i64>,
    best: &mut Option<Vec<i64>>,
) {
    let nf = limits.len();
    if depth == nf {
        // slacks are determined by the free part; all must be non-negative
        let mut y = free.clone();
        for (r, rhs_r) in rhs.iter().enumerate() {
            let used: i64 = sys.a[r][..nf].iter().zip(free.iter()).map(|(&c, &v)| c * v).sum();
            let slack = rhs_r - used;
            if slack < 0 {
                return;
            }
            y.push(slack);
        }
        let better = match best {
            None => true,
            // larger under the term order = smaller cost; the optimum is the
            // order-minimal fiber point
            Some(b) => fiber_cmp(ts, &y, b) == std::cmp::Ordering::Less,
        };
        if better {
            *best = Some(y);
        }
        return;
    }
    for k in 0..=limits[depth] {
        free[depth] = k;
        enumerate_free(sys, ts, rhs, limits, depth + 1, free, best);
    }
    free[depth] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Instance;
    use nalgebra::DMatrix;

    #[test]
    fn one_asset_optimum_is_the_budget_floor() {
        let inst = Instance {
            a: vec![3],
            mu: vec![5],
            omega: DMatrix::from_row_slice(1, 1, &[1.0]),
            budget: 10,
            r0_sq: 1e12,
            labels: None,
        }
        .validate()
        .unwrap();
        let q = inst.quadratic_form();
        let (p, ret, _) = brute_force_optimum(&inst, &q, EnumerationBudget::default()).unwrap();
        assert_eq!(p.0, vec![3]);
        assert_eq!(ret, 15);
    }

    #[test]
    fn tiny_risk_cap_forces_the_zero_portfolio() {
        let inst = Instance {
            a: vec![2, 3],
            mu: vec![4, 5],
            omega: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            budget: 12,
            r0_sq: 1e-6,
            labels: None,
        }
        .validate()
        .unwrap();
        let q = inst.quadratic_form();
        let (p, ret, _) = brute_force_optimum(&inst, &q, EnumerationBudget::default()).unwrap();
        assert_eq!(p.0, vec![0, 0]);
        assert_eq!(ret, 0);
    }

    #[test]
    fn overlarge_enumeration_is_rejected() {
        let inst = Instance {
            a: vec![1, 1, 1, 1],
            mu: vec![1, 1, 1, 1],
            omega: DMatrix::identity(4, 4),
            budget: 1_000_000,
            r0_sq: 1.0,
            labels: None,
        }
        .validate()
        .unwrap();
        let q = inst.quadratic_form();
        assert!(matches!(
            brute_force_optimum(&inst, &q, EnumerationBudget { max_points: 1000 }),
            Err(OracleError::TooLarge { .. })
        ));
    }
}
