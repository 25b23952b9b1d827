//! Problem datum and evaluation: prices, returns, covariance, budget, risk
//! cap, and the induced risk quadratic form `Q(x) = (Dx)' Omega (Dx)`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Errors raised while validating or manipulating an instance.
#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("covariance is not symmetric at ({0},{1})")]
    AsymmetricCovariance(usize, usize),
    #[error("covariance is not positive definite (Cholesky pivot {0} failed)")]
    NotPositiveDefinite(usize),
    #[error("price of asset {0} must be >= 1")]
    NonPositivePrice(usize),
    #[error("expected return of asset {0} must be >= 0")]
    NegativeReturn(usize),
    #[error("budget must be positive")]
    NegativeBudget,
    #[error("risk cap must be positive")]
    NonPositiveRisk,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

/// A portfolio: non-negative integer holdings, one entry per asset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Portfolio(pub Vec<i64>);

impl Portfolio {
    pub fn zeros(n: usize) -> Self {
        Portfolio(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The full problem datum.
#[derive(Debug, Clone)]
pub struct Instance {
    /// Unit prices, all >= 1.
    pub a: Vec<i64>,
    /// Expected returns, all >= 0.
    pub mu: Vec<i64>,
    /// Covariance matrix, symmetric positive definite.
    pub omega: DMatrix<f64>,
    /// Total budget.
    pub budget: i64,
    /// Admissible risk (variance units); the cap on `Q` is `B^2 r0_sq`.
    pub r0_sq: f64,
    /// Optional ticker labels, same order as `a`.
    pub labels: Option<Vec<String>>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// Checks all structural invariants and returns the instance unchanged.
    ///
    /// Positive definiteness is established by a Cholesky factorization with
    /// pivot tolerance `1e-14 * trace(Omega) / n`.
    pub fn validate(self) -> Result<Self, InstanceError> {
        let n = self.a.len();
        if self.mu.len() != n {
            return Err(InstanceError::DimensionMismatch(format!(
                "{} prices vs {} returns",
                n,
                self.mu.len()
            )));
        }
        if self.omega.nrows() != n || self.omega.ncols() != n {
            return Err(InstanceError::DimensionMismatch(format!(
                "{} assets vs {}x{} covariance",
                n,
                self.omega.nrows(),
                self.omega.ncols()
            )));
        }
        if let Some(labels) = &self.labels {
            if labels.len() != n {
                return Err(InstanceError::DimensionMismatch(format!(
                    "{} assets vs {} labels",
                    n,
                    labels.len()
                )));
            }
        }
        for (i, &p) in self.a.iter().enumerate() {
            if p < 1 {
                return Err(InstanceError::NonPositivePrice(i));
            }
        }
        for (i, &m) in self.mu.iter().enumerate() {
            if m < 0 {
                return Err(InstanceError::NegativeReturn(i));
            }
        }
        if self.budget <= 0 {
            return Err(InstanceError::NegativeBudget);
        }
        if !(self.r0_sq > 0.0) && self.r0_sq != 0.0 {
            return Err(InstanceError::NonPositiveRisk);
        }
        let max_abs = self.omega.amax();
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.omega[(i, j)] - self.omega[(j, i)]).abs() > 1e-12 * max_abs {
                    return Err(InstanceError::AsymmetricCovariance(i, j));
                }
            }
        }
        cholesky_pivot_check(&self.omega)?;
        Ok(self)
    }

    /// Multiplies prices, returns and the budget by `10^k`; the covariance
    /// and risk cap stay unchanged, so the feasible set of portfolios is the
    /// same instance seen in finer units.
    pub fn scale(&self, k: u32) -> Result<Instance, InstanceError> {
        let factor = 10i64
            .checked_pow(k)
            .ok_or(InstanceError::Overflow("scale factor"))?;
        let scale_vec = |v: &[i64], what: &'static str| -> Result<Vec<i64>, InstanceError> {
            v.iter()
                .map(|&x| x.checked_mul(factor).ok_or(InstanceError::Overflow(what)))
                .collect()
        };
        Ok(Instance {
            a: scale_vec(&self.a, "scaled prices")?,
            mu: scale_vec(&self.mu, "scaled returns")?,
            omega: self.omega.clone(),
            budget: self
                .budget
                .checked_mul(factor)
                .ok_or(InstanceError::Overflow("scaled budget"))?,
            r0_sq: self.r0_sq,
            labels: self.labels.clone(),
        })
    }

    /// The risk quadratic form `C = D Omega D`, `D = diag(a)`, with cap
    /// `B^2 r0_sq`.
    pub fn quadratic_form(&self) -> QuadraticForm {
        let n = self.n();
        let mut c = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                c[(i, j)] = self.a[i] as f64 * self.omega[(i, j)] * self.a[j] as f64;
            }
        }
        let cap = (self.budget as f64) * (self.budget as f64) * self.r0_sq;
        QuadraticForm { c, cap }
    }

    /// Exact integer return `mu' x`.
    pub fn return_value(&self, p: &Portfolio) -> Result<i64, InstanceError> {
        dot_checked(&self.mu, &p.0)
    }

    /// Exact integer invested budget `a' x`.
    pub fn budget_value(&self, p: &Portfolio) -> Result<i64, InstanceError> {
        dot_checked(&self.a, &p.0)
    }

    /// Full-problem feasibility: budget, risk cap and non-negativity.
    pub fn is_feasible(&self, q: &QuadraticForm, p: &Portfolio) -> Result<bool, InstanceError> {
        if p.0.iter().any(|&x| x < 0) {
            return Ok(false);
        }
        Ok(self.budget_value(p)? <= self.budget && q.risk_value(p) <= q.cap)
    }
}

/// The risk form `Q(x) = x' C x` with `C = D Omega D` and cap `B^2 r0_sq`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub c: DMatrix<f64>,
    pub cap: f64,
}

impl QuadraticForm {
    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    /// Evaluates `x' C x` at an integer portfolio.
    pub fn risk_value(&self, p: &Portfolio) -> f64 {
        let x: Vec<f64> = p.0.iter().map(|&v| v as f64).collect();
        self.eval(&x)
    }

    /// Evaluates `x' C x` at a real point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (v.transpose() * &self.c * &v)[(0, 0)]
    }

    /// Gradient `2 C x`.
    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let v = DVector::from_column_slice(x);
        2.0 * &self.c * v
    }
}

fn dot_checked(u: &[i64], v: &[i64]) -> Result<i64, InstanceError> {
    if u.len() != v.len() {
        return Err(InstanceError::DimensionMismatch(format!(
            "dot product of lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut acc: i64 = 0;
    for (&a, &b) in u.iter().zip(v) {
        let prod = a.checked_mul(b).ok_or(InstanceError::Overflow("dot product"))?;
        acc = acc.checked_add(prod).ok_or(InstanceError::Overflow("dot product"))?;
    }
    Ok(acc)
}

/// Cholesky with explicit pivot tolerance; nalgebra's factorization rejects
/// near-singular matrices but reports no pivot index.
fn cholesky_pivot_check(omega: &DMatrix<f64>) -> Result<(), InstanceError> {
    let n = omega.nrows();
    let tol = 1e-14 * omega.trace() / n as f64;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = omega[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= tol {
            return Err(InstanceError::NotPositiveDefinite(j));
        }
        l[(j, j)] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = omega[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / l[(j, j)];
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::illustrative_instance;

    #[test]
    fn illustrative_instance_is_accepted() {
        let inst = illustrative_instance();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.budget, 9_000_000);
    }

    #[test]
    fn one_asset_identity_is_accepted() {
        let inst = Instance {
            a: vec![1],
            mu: vec![1],
            omega: DMatrix::from_row_slice(1, 1, &[1.0]),
            budget: 10,
            r0_sq: 1.0,
            labels: None,
        };
        assert!(inst.validate().is_ok());
    }

    #[test]
    fn asymmetric_covariance_is_rejected() {
        let mut inst = illustrative_instance();
        inst.omega[(0, 1)] += 1.0;
        assert_eq!(
            inst.validate().unwrap_err(),
            InstanceError::AsymmetricCovariance(0, 1)
        );
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let inst = Instance {
            a: vec![1, 1],
            mu: vec![1, 1],
            omega: DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]),
            budget: 10,
            r0_sq: 1.0,
            labels: None,
        };
        assert_eq!(
            inst.validate().unwrap_err(),
            InstanceError::NotPositiveDefinite(1)
        );
    }

    #[test]
    fn printed_optimum_is_feasible_and_rounded_point_is_not() {
        let inst = illustrative_instance();
        let q = inst.quadratic_form();
        assert!((q.cap - 2.43e9).abs() < 1e-3);
        assert!(q.risk_value(&Portfolio(vec![779, 207])) <= q.cap);
        assert!(q.risk_value(&Portfolio(vec![773, 215])) > q.cap);
    }

    #[test]
    fn return_and_budget_values_match_the_worked_example() {
        let inst = illustrative_instance();
        assert_eq!(inst.return_value(&Portfolio(vec![773, 214])).unwrap(), 11_802_500);
        assert_eq!(inst.return_value(&Portfolio(vec![779, 207])).unwrap(), 11_807_500);
        assert_eq!(
            inst.budget - inst.budget_value(&Portfolio(vec![779, 207])).unwrap(),
            3_624_840
        );
        assert_eq!(inst.return_value(&Portfolio::zeros(2)).unwrap(), 0);
        assert_eq!(inst.budget_value(&Portfolio::zeros(2)).unwrap(), 0);
    }

    #[test]
    fn risk_is_zero_only_at_origin() {
        let inst = illustrative_instance();
        let q = inst.quadratic_form();
        assert_eq!(q.risk_value(&Portfolio::zeros(2)), 0.0);
        assert!(q.risk_value(&Portfolio(vec![1, 0])) > 0.0);
    }

    #[test]
    fn scaling_preserves_evaluation_ratios() {
        let inst = illustrative_instance();
        let scaled = inst.scale(2).unwrap();
        assert_eq!(scaled.a, vec![607_500, 310_500]);
        assert_eq!(scaled.budget, 900_000_000);
        // identity scaling
        let same = inst.scale(0).unwrap();
        assert_eq!(same.a, inst.a);
        assert_eq!(same.budget, inst.budget);
    }
}
