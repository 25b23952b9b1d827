//! Exact integer kernel of a constraint matrix via Hermite Normal Form.
//!
//! Intermediates are kept in arbitrary precision; results are converted back
//! to machine integers with an explicit overflow check.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::TestSetError;

/// Returns a basis of the integer kernel `{ v : A v = 0 }` of a full
/// row-rank integer matrix.
///
/// The transpose of `A` is brought to Hermite Normal Form by unimodular row
/// operations; the transformation rows matching zero HNF rows span the
/// kernel lattice.
pub fn lattice_kernel_basis(a: &[Vec<i64>]) -> Result<Vec<Vec<i64>>, TestSetError> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    // b = A^T, n x m
    let mut b: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..m).map(|j| BigInt::from(a[j][i])).collect())
        .collect();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                .collect()
        })
        .collect();

    let mut rank = 0usize;
    for col in 0..m {
        // gcd elimination below row `rank` in this column
        loop {
            let mut pivot: Option<usize> = None;
            for row in rank..n {
                if !b[row][col].is_zero() {
                    pivot = match pivot {
                        Some(p) if b[p][col].abs() <= b[row][col].abs() => Some(p),
                        _ => Some(row),
                    };
                }
            }
            let Some(p) = pivot else { break };
            b.swap(rank, p);
            u.swap(rank, p);
            let mut done = true;
            for row in (rank + 1)..n {
                if b[row][col].is_zero() {
                    continue;
                }
                let q = &b[row][col] / &b[rank][col];
                if !q.is_zero() {
                    for c in 0..m {
                        let t = &b[rank][c] * &q;
                        b[row][c] -= t;
                    }
                    for c in 0..n {
                        let t = &u[rank][c] * &q;
                        u[row][c] -= t;
                    }
                }
                if !b[row][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rank < n && !b[rank][col].is_zero() {
            rank += 1;
        }
    }

    if rank < m {
        return Err(TestSetError::RankDeficient { rank, rows: m });
    }

    let mut basis = Vec::with_capacity(n - rank);
    for row in rank..n {
        let mut v = Vec::with_capacity(n);
        for c in 0..n {
            let x: i64 = (&u[row][c])
                .try_into()
                .map_err(|_| TestSetError::Overflow("kernel basis entry"))?;
            v.push(x);
        }
        basis.push(v);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_vec(a: &[Vec<i64>], v: &[i64]) -> Vec<i128> {
        a.iter()
            .map(|row| row.iter().zip(v).map(|(&r, &x)| r as i128 * x as i128).sum())
            .collect()
    }

    #[test]
    fn illustrative_system_kernel() {
        // budget row then return-ceiling row, slack identity appended
        let a = vec![
            vec![6075, 3105, 1, 0],
            vec![12500, 10000, 0, 1],
        ];
        let basis = lattice_kernel_basis(&a).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(mat_vec(&a, v).iter().all(|&x| x == 0));
        }
        // the printed lattice member (-1, 1, 2970, 2500) must lie in the
        // span: solve the 2x2 integer system on the first two coordinates
        let target = [-1i64, 1, 2970, 2500];
        assert!(mat_vec(&a, &target).iter().all(|&x| x == 0));
    }

    #[test]
    fn identity_matrix_has_empty_kernel() {
        let a = vec![vec![1, 0], vec![0, 1]];
        assert!(lattice_kernel_basis(&a).unwrap().is_empty());
    }

    #[test]
    fn rank_deficient_is_reported() {
        let a = vec![vec![1, 2, 3], vec![2, 4, 6]];
        assert!(matches!(
            lattice_kernel_basis(&a),
            Err(TestSetError::RankDeficient { .. })
        ));
    }

    #[test]
    fn random_rectangular_kernel_members_annihilate() {
        let a = vec![
            vec![3, -1, 4, 1, -5, 9, 2],
            vec![6, 5, -3, 5, 8, -9, 7],
            vec![1, 0, 2, -2, 0, 3, 1],
        ];
        let basis = lattice_kernel_basis(&a).unwrap();
        assert_eq!(basis.len(), 4);
        for v in &basis {
            assert!(mat_vec(&a, v).iter().all(|&x| x == 0));
        }
    }
}
