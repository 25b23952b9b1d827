//! Exact vertex enumeration for small polytopes with integer data.
//!
//! Every vertex lies on some choice of `d` active constraints; for the
//! handful of rows and bounds the solver produces, trying all choices with
//! exact rational elimination is cheap and gives the true maximizer of a
//! convex quadratic (which is attained at a vertex).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Constraint `normal' x <= rhs` over the reduced (free) coordinates.
#[derive(Debug, Clone)]
pub struct IneqRow {
    pub normal: Vec<i64>,
    pub rhs: i64,
}

fn rational(v: i64) -> BigRational {
    BigRational::from(BigInt::from(v))
}

/// Solves `M x = r` by fraction-free Gaussian elimination; `None` when the
/// chosen constraints are linearly dependent.
fn solve_exact(m: &[Vec<i64>], r: &[i64]) -> Option<Vec<BigRational>> {
    let d = m.len();
    let mut aug: Vec<Vec<BigRational>> = m
        .iter()
        .zip(r)
        .map(|(row, &b)| {
            row.iter()
                .map(|&x| rational(x))
                .chain(std::iter::once(rational(b)))
                .collect()
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&row| !aug[row][col].is_zero())?;
        aug.swap(col, pivot);
        let p = aug[col][col].clone();
        for row in 0..d {
            if row == col || aug[row][col].is_zero() {
                continue;
            }
            let f = &aug[row][col] / &p;
            for k in col..=d {
                let t = &aug[col][k] * &f;
                aug[row][k] -= t;
            }
        }
    }
    Some(
        (0..d)
            .map(|i| &aug[i][d] / &aug[i][i])
            .collect(),
    )
}

fn satisfies(rows: &[IneqRow], x: &[BigRational]) -> bool {
    rows.iter().all(|row| {
        let lhs: BigRational = row
            .normal
            .iter()
            .zip(x)
            .map(|(&c, xi)| rational(c) * xi)
            .sum();
        lhs <= rational(row.rhs)
    })
}

/// Enumerates all vertices of `{ x : rows }` in dimension `d`.
pub fn enumerate_vertices(rows: &[IneqRow], d: usize) -> Vec<Vec<BigRational>> {
    let mut vertices: Vec<Vec<BigRational>> = Vec::new();
    let k = rows.len();
    if k < d {
        return vertices;
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let m: Vec<Vec<i64>> = idx.iter().map(|&i| rows[i].normal.clone()).collect();
        let r: Vec<i64> = idx.iter().map(|&i| rows[i].rhs).collect();
        if let Some(x) = solve_exact(&m, &r) {
            if satisfies(rows, &x) && !vertices.contains(&x) {
                vertices.push(x);
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return vertices;
            }
            i -= 1;
            if idx[i] != i + k - d {
                idx[i] += 1;
                for j in (i + 1)..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn to_f64(x: &BigRational) -> f64 {
    let numer = x.numer();
    let denom = x.denom();
    // exact for the magnitudes seen here; fall back to string parsing for
    // pathological sizes
    let nf = bigint_to_f64(numer);
    let df = bigint_to_f64(denom);
    nf / df
}

fn bigint_to_f64(v: &BigInt) -> f64 {
    let (sign, digits) = v.to_u64_digits();
    let mut acc = 0.0f64;
    for &d in digits.iter().rev() {
        acc = acc * 1.8446744073709552e19 + d as f64;
    }
    if sign == num_bigint::Sign::Minus {
        -acc
    } else {
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_has_four_vertices() {
        let rows = vec![
            IneqRow { normal: vec![1, 0], rhs: 1 },
            IneqRow { normal: vec![0, 1], rhs: 1 },
            IneqRow { normal: vec![-1, 0], rhs: 0 },
            IneqRow { normal: vec![0, -1], rhs: 0 },
        ];
        let vs = enumerate_vertices(&rows, 2);
        assert_eq!(vs.len(), 4);
    }

    #[test]
    fn dependent_constraints_are_skipped() {
        let rows = vec![
            IneqRow { normal: vec![1, 1], rhs: 2 },
            IneqRow { normal: vec![2, 2], rhs: 4 },
            IneqRow { normal: vec![-1, 0], rhs: 0 },
            IneqRow { normal: vec![0, -1], rhs: 0 },
        ];
        let vs = enumerate_vertices(&rows, 2);
        // triangle: (0,0), (2,0), (0,2)
        assert_eq!(vs.len(), 3);
    }
}
