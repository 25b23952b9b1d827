//! Term orders on exponent vectors.
//!
//! The solver order ranks lower-return monomials as larger, so normal-form
//! reduction drives a fiber point towards the maximum-return point.  Ties
//! are broken lexicographically on the asset exponents read from the last
//! asset down to the first; slack exponents come after.  Within one fiber a
//! cost tie always differs in some asset exponent (the slacks are determined
//! by the assets), so the slack part of the tie-break never decides there.
//! A degree-graded tie-break would be equally correct, but on instances with
//! equal-return assets it orients the zero-cost swap direction towards the
//! slack-heavy side, whose lead divides almost nothing; the basis then keeps
//! a separate element for every swap split and grows by orders of magnitude.
//! Saturation passes use an ordinary positively-graded revlex order with a
//! chosen variable placed last.

use std::cmp::Ordering;

#[derive(Debug, Clone)]
pub enum TermOrder {
    /// `u > v` iff `cost.u < cost.v`, ties by lex on reversed assets.
    CostLex { cost: Vec<i64>, assets: usize },
    /// `u > v` iff `grading.u > grading.v`, ties by reverse lexicographic
    /// with variable `last` moved to the final position.
    GradedRevlex { grading: Vec<i64>, last: usize },
}

impl TermOrder {
    pub fn cmp(&self, u: &[i64], v: &[i64]) -> Ordering {
        match self {
            TermOrder::CostLex { cost, assets } => {
                let wu = weight(cost, u);
                let wv = weight(cost, v);
                // lower cost = larger monomial
                match wv.cmp(&wu) {
                    Ordering::Equal => rev_asset_lex(u, v, *assets),
                    ord => ord,
                }
            }
            TermOrder::GradedRevlex { grading, last } => {
                let wu = weight(grading, u);
                let wv = weight(grading, v);
                match wu.cmp(&wv) {
                    Ordering::Equal => revlex_last(u, v, *last),
                    ord => ord,
                }
            }
        }
    }
}

fn weight(w: &[i64], u: &[i64]) -> i128 {
    w.iter().zip(u).map(|(&a, &b)| a as i128 * b as i128).sum()
}

/// Lexicographic with significance x_n > ... > x_1 > z_1 > ... > z_m.
fn rev_asset_lex(u: &[i64], v: &[i64], assets: usize) -> Ordering {
    for i in (0..assets).rev().chain(assets..u.len()) {
        match u[i].cmp(&v[i]) {
            Ordering::Equal => {}
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// Reverse lexicographic with variable `last` treated as the final one.
fn revlex_last(u: &[i64], v: &[i64], last: usize) -> Ordering {
    match u[last].cmp(&v[last]) {
        Ordering::Less => return Ordering::Greater,
        Ordering::Greater => return Ordering::Less,
        Ordering::Equal => {}
    }
    for i in (0..u.len()).rev() {
        if i == last {
            continue;
        }
        match u[i].cmp(&v[i]) {
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
            Ordering::Equal => {}
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_order_ranks_lower_return_larger() {
        let order = TermOrder::CostLex {
            cost: vec![12500, 10000, 0, 0],
            assets: 2,
        };
        // (4,0,0,0) and (0,5,8775,0) have equal cost 50000; the tie-break
        // decides at the second asset exponent
        assert_eq!(order.cmp(&[0, 5, 8775, 0], &[4, 0, 0, 0]), Ordering::Greater);
        // lower cost is larger
        assert_eq!(order.cmp(&[0, 1, 0, 0], &[1, 0, 0, 0]), Ordering::Greater);
    }

    #[test]
    fn zero_cost_tie_ignores_degree() {
        let order = TermOrder::CostLex { cost: vec![0, 0, 0], assets: 3 };
        // the last asset dominates regardless of total degree
        assert_eq!(order.cmp(&[2, 0, 0], &[0, 0, 1]), Ordering::Less);
        assert_eq!(order.cmp(&[1, 0, 1], &[0, 2, 0]), Ordering::Greater);
        // equal tails fall through to earlier assets
        assert_eq!(order.cmp(&[1, 2, 3], &[5, 1, 3]), Ordering::Greater);
    }

    #[test]
    fn order_is_total_and_antisymmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let order = TermOrder::CostLex {
            cost: vec![3, 5, 0, 1],
            assets: 2,
        };
        for _ in 0..1000 {
            let u: Vec<i64> = (0..4).map(|_| rng.gen_range(0..6)).collect();
            let v: Vec<i64> = (0..4).map(|_| rng.gen_range(0..6)).collect();
            let w: Vec<i64> = (0..4).map(|_| rng.gen_range(0..6)).collect();
            assert_eq!(order.cmp(&u, &v), order.cmp(&v, &u).reverse());
            assert_eq!(order.cmp(&u, &u), Ordering::Equal);
            if order.cmp(&u, &v) == Ordering::Greater && order.cmp(&v, &w) == Ordering::Greater {
                assert_eq!(order.cmp(&u, &w), Ordering::Greater);
            }
        }
    }
}
