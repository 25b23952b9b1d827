//! Test sets for the linear subproblem via Groebner bases of lattice ideals.
//!
//! The linear subproblem is put in slack-equality form `A y = rhs`, `y >= 0`
//! (budget row first, return ceiling second, one row per cut; lower bounds
//! are absorbed by the translation `y = x - b` so the matrix never changes).
//! The reduced Groebner basis of the lattice ideal of `ker_Z(A)` under a
//! cost-compatible term order is a test set: reducing any fiber point with
//! it yields the unique maximum-return point of its fiber.

mod buchberger;
mod matrix;
mod order;

pub use buchberger::Binomial;
pub use matrix::lattice_kernel_basis;
pub use order::TermOrder;

use std::cmp::Ordering;

use thiserror::Error;

use crate::convex::Polytope;
use crate::instance::Instance;

#[derive(Debug, Error)]
pub enum TestSetError {
    #[error("constraint matrix is rank deficient ({rank} of {rows} rows independent)")]
    RankDeficient { rank: usize, rows: usize },
    #[error("completion exceeded the pair ceiling ({pairs} pairs, basis size {basis_size})")]
    ResourceExhausted { pairs: usize, basis_size: usize },
    #[error("translated right-hand side is negative in row {0}")]
    NegativeRhs(usize),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("point of dimension {got} does not match system dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("point is not on the system fiber (row {0})")]
    NotOnFiber(usize),
}

/// The linear subproblem in slack-equality form, translated by the lower
/// bounds.  Columns: free assets first (in original index order), then one
/// slack per row in row order (budget, return ceiling, cuts).
#[derive(Debug, Clone)]
pub struct SlackSystem {
    /// `m x (n_free + m)` equality matrix with an identity slack block.
    pub a: Vec<Vec<i64>>,
    /// Translated right-hand side, length `m`.
    pub rhs: Vec<i64>,
    /// Cost vector: returns on free assets, zero on slacks.
    pub cost: Vec<i64>,
    /// Lower bounds of the free variables absorbed by `y = x - b`.
    pub translation: Vec<i64>,
    /// Original asset index of each free column.
    pub free: Vec<usize>,
    /// Variables pinned to a single value, excluded from the system.
    pub fixed: Vec<(usize, i64)>,
}

impl SlackSystem {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.free.len() + self.a.len()
    }

    /// The corner point `(b, translated rhs)` in original (x-space) extended
    /// coordinates: free variables at their lower bounds, slacks at the
    /// translated right-hand side.
    pub fn bounds_point(&self) -> Vec<i64> {
        let mut p = self.translation.clone();
        p.extend_from_slice(&self.rhs);
        p
    }

    /// Translates an x-space extended point into the non-negative y-space.
    pub fn to_fiber(&self, p: &[i64]) -> Result<Vec<i64>, TestSetError> {
        if p.len() != self.cols() {
            return Err(TestSetError::DimensionMismatch {
                got: p.len(),
                want: self.cols(),
            });
        }
        let mut y = p.to_vec();
        for (i, &b) in self.translation.iter().enumerate() {
            y[i] -= b;
        }
        for (r, row) in self.a.iter().enumerate() {
            let lhs: i128 = row.iter().zip(&y).map(|(&c, &v)| c as i128 * v as i128).sum();
            if lhs != self.rhs[r] as i128 {
                return Err(TestSetError::NotOnFiber(r));
            }
        }
        Ok(y)
    }

    /// Inverse of [`to_fiber`](Self::to_fiber).
    pub fn from_fiber(&self, y: &[i64]) -> Vec<i64> {
        let mut p = y.to_vec();
        for (i, &b) in self.translation.iter().enumerate() {
            p[i] += b;
        }
        p
    }

    /// Reassembles a full-length portfolio from the free part of an
    /// x-space extended point.
    pub fn portfolio(&self, p: &[i64], n_assets: usize) -> Vec<i64> {
        let mut x = vec![0i64; n_assets];
        for (col, &j) in self.free.iter().enumerate() {
            x[j] = p[col];
        }
        for &(j, v) in &self.fixed {
            x[j] = v;
        }
        x
    }

    /// A strictly positive integer grading under which every lattice vector
    /// of the system is homogeneous.  Row 0 (the budget row) has all-positive
    /// coefficients on the assets, so a large enough multiple of it fixes any
    /// negative cut coefficients.
    fn positive_grading(&self) -> Vec<i64> {
        let nf = self.free.len();
        let m = self.rows();
        let mut mult: i64 = 1;
        for j in 0..nf {
            let rest: i64 = (1..m).map(|r| self.a[r][j]).sum();
            let aj = self.a[0][j];
            if rest < 0 {
                mult = mult.max((-rest) / aj + 1);
            }
        }
        let mut g = vec![0i64; self.cols()];
        for j in 0..self.cols() {
            g[j] = mult * self.a[0][j] + (1..m).map(|r| self.a[r][j]).sum::<i64>();
        }
        g
    }
}

/// Builds the slack system for a polytope (budget row, return ceiling, cuts;
/// the return floor is handled inside the tree search, not here).
pub fn build_slack_system(inst: &Instance, poly: &Polytope) -> Result<SlackSystem, TestSetError> {
    let free: Vec<usize> = (0..inst.n())
        .filter(|j| !poly.fixed.iter().any(|&(f, _)| f == *j))
        .collect();
    let nf = free.len();
    let m = poly.rows.len();
    let mut a = vec![vec![0i64; nf + m]; m];
    let mut rhs = vec![0i64; m];
    for (r, row) in poly.rows.iter().enumerate() {
        let mut shifted = row.rhs as i128;
        for (col, &j) in free.iter().enumerate() {
            a[r][col] = row.normal[j];
            shifted -= row.normal[j] as i128 * poly.lower[j] as i128;
        }
        for &(j, v) in &poly.fixed {
            shifted -= row.normal[j] as i128 * v as i128;
        }
        a[r][nf + r] = 1;
        if shifted < 0 {
            return Err(TestSetError::NegativeRhs(r));
        }
        rhs[r] = i64::try_from(shifted).map_err(|_| TestSetError::Overflow("translated rhs"))?;
    }
    let mut cost = vec![0i64; nf + m];
    for (col, &j) in free.iter().enumerate() {
        cost[col] = inst.mu[j];
    }
    let translation: Vec<i64> = free.iter().map(|&j| poly.lower[j]).collect();
    Ok(SlackSystem {
        a,
        rhs,
        cost,
        translation,
        free,
        fixed: poly.fixed.clone(),
    })
}

/// An oriented test set together with its term order.
#[derive(Debug, Clone)]
pub struct TestSet {
    /// Lattice vectors oriented so that adding a vector never increases the
    /// cost; reduction subtracts them.
    pub vectors: Vec<Vec<i64>>,
    pub order: TermOrder,
}

impl TestSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Plain-text export: one vector per line, space-separated integers.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.vectors {
            let line: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str, order: TermOrder) -> Result<TestSet, std::num::ParseIntError> {
        let mut vectors = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: Result<Vec<i64>, _> = line.split_whitespace().map(str::parse).collect();
            vectors.push(v?);
        }
        Ok(TestSet { vectors, order })
    }
}

/// Default ceiling on S-pairs generated during completion.
pub const DEFAULT_PAIR_CAP: usize = 5_000_000;

/// Computes the reduced Groebner basis of the lattice ideal of `ker_Z(A)`
/// under the cost-compatible order, oriented as a reversal test set.
///
/// The completion is truncated at the grading weight of the system's own
/// fiber, so the result is a test set for that fiber and for every fiber
/// with a componentwise smaller right-hand side (which is all the solver
/// ever visits: bound tightening and fictitious bounds only shrink it).
pub fn groebner_test_set(sys: &SlackSystem, pair_cap: usize) -> Result<TestSet, TestSetError> {
    let kernel = lattice_kernel_basis(&sys.a)?;
    let grading = sys.positive_grading();
    // every fiber point y has the same grading weight; read it off the
    // corner point (free variables 0, slacks at the rhs)
    let nf = sys.free.len();
    let weight_cap: i128 = grading[nf..]
        .iter()
        .zip(&sys.rhs)
        .map(|(&g, &r)| g as i128 * r as i128)
        .sum();
    let basis =
        buchberger::lattice_groebner(&kernel, &sys.cost, nf, &grading, weight_cap, pair_cap)?;
    let order = TermOrder::CostLex {
        cost: sys.cost.clone(),
        assets: nf,
    };
    // lead - trail has non-positive cost: subtracting it (reduction) raises
    // the return, adding it (tree edge) lowers the return
    let vectors = basis.iter().map(|b| b.vector()).collect();
    Ok(TestSet { vectors, order })
}

/// Normal form of a fiber point: repeatedly subtracts applicable test
/// vectors until none applies.  The result is the unique maximum-return
/// point of the fiber (the linear subproblem optimum).
///
/// The point is given and returned in x-space extended coordinates.
pub fn reduce_point(p: &[i64], sys: &SlackSystem, ts: &TestSet) -> Result<Vec<i64>, TestSetError> {
    let mut y = sys.to_fiber(p)?;
    reduce_fiber_point(&mut y, ts);
    Ok(sys.from_fiber(&y))
}

/// In-place normal form in y-space.
pub fn reduce_fiber_point(y: &mut [i64], ts: &TestSet) {
    'outer: loop {
        for v in &ts.vectors {
            if applicable(y, v) {
                for (yi, &vi) in y.iter_mut().zip(v) {
                    *yi -= vi;
                }
                continue 'outer;
            }
        }
        return;
    }
}

/// A vector is applicable when subtracting it keeps the point non-negative.
fn applicable(y: &[i64], v: &[i64]) -> bool {
    y.iter().zip(v).all(|(&yi, &vi)| yi >= vi)
}

/// Compares two fiber points under the test-set order (used by oracles to
/// break cost ties the same way reduction does).
pub fn fiber_cmp(ts: &TestSet, u: &[i64], v: &[i64]) -> Ordering {
    ts.order.cmp(u, v)
}
