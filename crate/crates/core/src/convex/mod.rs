//! Continuous subproblems: the relaxation optimum, per-variable bound
//! tightening, convex-quadratic maximization over the polytope, tangent
//! half-space construction, and the border-risk threshold.

mod barrier;
mod vertex;

pub use barrier::Region;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, QuadraticForm};

#[derive(Debug, Error)]
pub enum ConvexError {
    #[error("continuous region is infeasible")]
    Infeasible,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("polytope has no vertices")]
    EmptyPolytope,
    #[error("half-line does not leave the risk ellipsoid")]
    NoIntersection,
    #[error("tangent normal rounded to zero (increase precision)")]
    DegenerateNormal,
    #[error("no component of C^-1 mu is positive")]
    EmptyIndexSet,
}

/// Linear inequality `normal' x <= rhs` with integer data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRow {
    pub normal: Vec<i64>,
    pub rhs: i64,
}

/// The linear outer description of the search region.
///
/// `rows[0]` is the budget row, `rows[1]` the return ceiling, later rows are
/// tangent cuts.  The return floor is kept apart: it is enforced inside the
/// tree search, not in the test-set matrix.  Lower bounds enter as the
/// translation `y = x - b`, never as rows.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub n: usize,
    pub rows: Vec<LinearRow>,
    pub return_floor: i64,
    pub lower: Vec<i64>,
    pub fixed: Vec<(usize, i64)>,
}

impl Polytope {
    /// Budget row plus return ceiling, zero lower bounds, nothing fixed.
    pub fn base(inst: &Instance, r_c_floor: i64, r_e: i64) -> Polytope {
        Polytope {
            n: inst.n(),
            rows: vec![
                LinearRow { normal: inst.a.clone(), rhs: inst.budget },
                LinearRow { normal: inst.mu.clone(), rhs: r_c_floor },
            ],
            return_floor: r_e,
            lower: vec![0; inst.n()],
            fixed: Vec::new(),
        }
    }

    pub fn cuts(&self) -> &[LinearRow] {
        &self.rows[2..]
    }

    /// Appends a cut unless an identical row is already present.
    pub fn add_cut(&mut self, cut: LinearRow) -> bool {
        if self.rows.contains(&cut) {
            return false;
        }
        self.rows.push(cut);
        true
    }
}

/// Result of the continuous relaxation.
#[derive(Debug, Clone)]
pub struct ContinuousSolution {
    pub point: Vec<f64>,
    pub objective: f64,
}

/// Maximizes `mu' x` over `{ a'x <= B, Q(x) <= cap, x >= 0 }` intersected
/// with any extra rows.
pub fn solve_max_return_continuous(
    inst: &Instance,
    q: &QuadraticForm,
    extra: &[LinearRow],
) -> Result<ContinuousSolution, ConvexError> {
    let n = inst.n();
    if q.cap <= 0.0 {
        return Ok(ContinuousSolution { point: vec![0.0; n], objective: 0.0 });
    }
    let mut rows: Vec<(DVector<f64>, f64)> = vec![(
        DVector::from_iterator(n, inst.a.iter().map(|&v| v as f64)),
        inst.budget as f64,
    )];
    for row in extra {
        rows.push((
            DVector::from_iterator(n, row.normal.iter().map(|&v| v as f64)),
            row.rhs as f64,
        ));
    }
    let region = Region {
        n,
        rows,
        quad: Some((q.c.clone(), q.cap)),
        lower: vec![0.0; n],
    };
    let c: Vec<f64> = inst.mu.iter().map(|&v| v as f64).collect();
    let (mut point, objective) = barrier::maximize_linear(&region, &c)?;
    for x in &mut point {
        if *x < 0.0 && *x > -1e-9 {
            *x = 0.0;
        }
    }
    Ok(ContinuousSolution { point, objective })
}

/// Per-variable lower and upper bounds over the continuous region
/// `{ a'x <= B, R_e <= mu'x <= floor(R_c), cuts, Q(x) <= cap, x >= 0 }`.
#[derive(Debug, Clone)]
pub struct Bounds {
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
    pub fixed: Vec<(usize, i64)>,
}

pub fn tighten_bounds(
    inst: &Instance,
    q: &QuadraticForm,
    poly: &Polytope,
    r_e: i64,
) -> Result<Bounds, ConvexError> {
    let n = inst.n();
    let mut rows: Vec<(DVector<f64>, f64)> = poly
        .rows
        .iter()
        .map(|row| {
            (
                DVector::from_iterator(n, row.normal.iter().map(|&v| v as f64)),
                row.rhs as f64,
            )
        })
        .collect();
    rows.push((
        DVector::from_iterator(n, inst.mu.iter().map(|&v| -(v as f64))),
        -(r_e as f64),
    ));
    let region = Region {
        n,
        rows,
        quad: Some((q.c.clone(), q.cap)),
        lower: vec![0.0; n],
    };
    let x0 = barrier::interior_point(&region)?;
    let mut lower = vec![0i64; n];
    let mut upper = vec![0i64; n];
    for j in 0..n {
        let mut c = vec![0.0; n];
        c[j] = -1.0;
        let (_, min_neg) = barrier::maximize_linear_from(&region, &c, x0.clone())?;
        let minimum = -min_neg;
        c[j] = 1.0;
        let (_, maximum) = barrier::maximize_linear_from(&region, &c, x0.clone())?;
        let eps_lo = 1e-6 * (1.0 + minimum.abs());
        let eps_hi = 1e-6 * (1.0 + maximum.abs());
        lower[j] = ((minimum - eps_lo).ceil() as i64).max(0);
        upper[j] = (maximum + eps_hi).floor() as i64;
        if upper[j] < lower[j] {
            upper[j] = lower[j];
        }
    }
    let fixed = (0..n)
        .filter(|&j| lower[j] == upper[j])
        .map(|j| (j, lower[j]))
        .collect();
    Ok(Bounds { lower, upper, fixed })
}

/// Maximizer of the convex risk form over the polytope.
#[derive(Debug, Clone)]
pub struct RiskMax {
    pub point: Vec<f64>,
    /// `Q` at the maximizer (absolute units, compare against `cap`).
    pub value: f64,
    /// True when obtained by exact vertex enumeration.
    pub exact: bool,
}

const EXACT_DIM_LIMIT: usize = 6;
const EXACT_ROW_LIMIT: usize = 12;

/// Maximizes `Q` over the polytope (rows, return floor, lower bounds, fixed
/// variables).  Exact by vertex enumeration on small systems, multi-start
/// linearized ascent beyond.
pub fn max_risk_over_polytope(
    q: &QuadraticForm,
    poly: &Polytope,
    seed: u64,
) -> Result<RiskMax, ConvexError> {
    let free: Vec<usize> = (0..poly.n)
        .filter(|j| !poly.fixed.iter().any(|&(f, _)| f == *j))
        .collect();
    let d = free.len();
    if d == 0 {
        let x = assemble(poly, &free, &[]);
        let value = q.eval(&x);
        return Ok(RiskMax { point: x, value, exact: true });
    }
    // reduced inequality rows over the free coordinates
    let mut rows: Vec<vertex::IneqRow> = Vec::new();
    for row in &poly.rows {
        rows.push(reduce_row(&row.normal, row.rhs, &free, &poly.fixed));
    }
    {
        let negated: Vec<i64> = (0..poly.n).map(|_| 0).collect();
        let _ = negated;
    }
    // return floor: -mu'x <= -R_e
    let mu_row = poly.rows[1].normal.clone();
    let neg_mu: Vec<i64> = mu_row.iter().map(|&v| -v).collect();
    rows.push(reduce_row(&neg_mu, -poly.return_floor, &free, &poly.fixed));
    for (col, &j) in free.iter().enumerate() {
        let mut normal = vec![0i64; d];
        normal[col] = -1;
        rows.push(vertex::IneqRow { normal, rhs: -poly.lower[j] });
    }
    let n_rows = poly.rows.len() + 1; // structural rows, bounds excluded
    if d <= EXACT_DIM_LIMIT && n_rows <= EXACT_ROW_LIMIT {
        let vertices = vertex::enumerate_vertices(&rows, d);
        if vertices.is_empty() {
            return Err(ConvexError::EmptyPolytope);
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for v in &vertices {
            let vf: Vec<f64> = v.iter().map(vertex::to_f64).collect();
            let x = assemble(poly, &free, &vf);
            let value = q.eval(&x);
            if best.as_ref().map_or(true, |(_, bv)| value > *bv) {
                best = Some((x, value));
            }
        }
        let (point, value) = best.unwrap();
        return Ok(RiskMax { point, value, exact: true });
    }

    // multi-start linearized ascent: repeatedly maximize the gradient
    // direction over the polytope (LP); a convex function only improves
    let region = lp_region(&rows, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..20 {
        let c0: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let Ok((mut x, _)) = barrier::maximize_linear(&region, &c0) else {
            return Err(ConvexError::EmptyPolytope);
        };
        for _ in 0..50 {
            let full = assemble(poly, &free, &x);
            let grad_full = q.gradient(&full);
            let grad: Vec<f64> = free.iter().map(|&j| grad_full[j]).collect();
            let Ok((next, _)) = barrier::maximize_linear(&region, &grad) else {
                break;
            };
            let old = q.eval(&assemble(poly, &free, &x));
            let new = q.eval(&assemble(poly, &free, &next));
            if new <= old * (1.0 + 1e-12) + 1e-12 {
                break;
            }
            x = next;
        }
        let full = assemble(poly, &free, &x);
        let value = q.eval(&full);
        if best.as_ref().map_or(true, |(_, bv)| value > *bv) {
            best = Some((full, value));
        }
    }
    let (point, value) = best.ok_or(ConvexError::EmptyPolytope)?;
    Ok(RiskMax { point, value, exact: false })
}

fn reduce_row(normal: &[i64], rhs: i64, free: &[usize], fixed: &[(usize, i64)]) -> vertex::IneqRow {
    let reduced: Vec<i64> = free.iter().map(|&j| normal[j]).collect();
    let mut r = rhs as i128;
    for &(j, v) in fixed {
        r -= normal[j] as i128 * v as i128;
    }
    vertex::IneqRow { normal: reduced, rhs: r as i64 }
}

fn assemble(poly: &Polytope, free: &[usize], xf: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; poly.n];
    for (col, &j) in free.iter().enumerate() {
        x[j] = xf[col];
    }
    for &(j, v) in &poly.fixed {
        x[j] = v as f64;
    }
    x
}

fn lp_region(rows: &[vertex::IneqRow], d: usize) -> Region {
    Region {
        n: d,
        rows: rows
            .iter()
            .map(|r| {
                (
                    DVector::from_iterator(d, r.normal.iter().map(|&v| v as f64)),
                    r.rhs as f64,
                )
            })
            .collect(),
        quad: None,
        lower: vec![f64::NEG_INFINITY; d],
    }
}

/// Intersection of the half-line from `p_e` towards `p_max` with the quadric
/// `Q(x) = cap`; requires `Q(p_e) <= cap < Q(p_max)`.
pub fn halfline_quadric_intersection(
    q: &QuadraticForm,
    p_e: &[f64],
    p_max: &[f64],
) -> Result<Vec<f64>, ConvexError> {
    if q.eval(p_max) <= q.cap {
        return Err(ConvexError::NoIntersection);
    }
    let pe = DVector::from_column_slice(p_e);
    let d = DVector::from_column_slice(p_max) - &pe;
    // Q(p_e + t d) = cap: (d'Cd) t^2 + 2 p_e'Cd t + (Q(p_e) - cap) = 0
    let qa = (d.transpose() * &q.c * &d)[(0, 0)];
    let qb = 2.0 * (pe.transpose() * &q.c * &d)[(0, 0)];
    let qc = q.eval(p_e) - q.cap;
    let disc = qb * qb - 4.0 * qa * qc;
    if !(qa > 0.0) || disc < 0.0 {
        return Err(ConvexError::NumericalFailure("degenerate half-line quadratic".into()));
    }
    // numerically stable positive root
    let sq = disc.sqrt();
    let t = if qb >= 0.0 {
        (2.0 * (-qc)) / (qb + sq)
    } else {
        (sq - qb) / (2.0 * qa)
    };
    let t = t.clamp(0.0, 1.0);
    let p: Vec<f64> = (0..p_e.len()).map(|i| p_e[i] + t * d[i]).collect();
    let residual = (q.eval(&p) - q.cap).abs();
    if residual > 1e-9 * q.cap.max(1.0) {
        return Err(ConvexError::NumericalFailure(format!(
            "intersection residual {residual:e}"
        )));
    }
    Ok(p)
}

/// Supporting half-space of the risk ellipsoid with integer normal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TangentCut {
    pub normal: Vec<i64>,
    pub rhs: i64,
    pub prec: u32,
}

impl TangentCut {
    pub fn row(&self) -> LinearRow {
        LinearRow { normal: self.normal.clone(), rhs: self.rhs }
    }
}

/// Rounds the tangent normal at `p_prime` to `prec` digits (after 1-norm
/// normalization) and computes the supporting value of the ellipsoid in that
/// direction, so the half-space contains every integer point of the
/// ellipsoid.
pub fn tangent_halfspace(
    q: &QuadraticForm,
    p_prime: &[f64],
    prec: u32,
) -> Result<TangentCut, ConvexError> {
    let grad = q.gradient(p_prime);
    let norm1: f64 = grad.iter().map(|v| v.abs()).sum();
    if !(norm1 > 0.0) {
        return Err(ConvexError::DegenerateNormal);
    }
    let scale = 10f64.powi(prec as i32);
    let normal: Vec<i64> = grad.iter().map(|&g| (g / norm1 * scale).round() as i64).collect();
    if normal.iter().all(|&v| v == 0) {
        return Err(ConvexError::DegenerateNormal);
    }
    // support value: c = sqrt(cap * n' C^-1 n)
    let nvec = DVector::from_iterator(normal.len(), normal.iter().map(|&v| v as f64));
    let chol = q
        .c
        .clone()
        .cholesky()
        .ok_or_else(|| ConvexError::NumericalFailure("risk form not positive definite".into()))?;
    let cinv_n = chol.solve(&nvec);
    let c = (q.cap * nvec.dot(&cinv_n)).sqrt();
    // nearest integer: never tighter than floor(c), and any integer point of
    // the ellipsoid satisfies n'x <= floor(c), so the cut stays sound
    Ok(TangentCut { normal, rhs: c.round() as i64, prec })
}

/// The border-risk threshold and the supporting index set.
#[derive(Debug, Clone)]
pub struct BorderRisk {
    pub r_b_sq: f64,
    pub indices: Vec<usize>,
    /// Set when the restricted direction still has non-positive components;
    /// the threshold is then only indicative.
    pub warning: bool,
}

/// Computes `r_b^2 = (mu_J' C_J^-1 mu_J) / (a_J' C_J^-1 mu_J)^2` where `J`
/// collects the positive components of `C^-1 mu`.  Below this risk level the
/// optimal investment leaves part of the budget uninvested; the value does
/// not depend on the budget.
pub fn border_risk(inst: &Instance) -> Result<BorderRisk, ConvexError> {
    let q = inst.quadratic_form();
    let n = inst.n();
    let mu = DVector::from_iterator(n, inst.mu.iter().map(|&v| v as f64));
    let chol = q
        .c
        .clone()
        .cholesky()
        .ok_or_else(|| ConvexError::NumericalFailure("risk form not positive definite".into()))?;
    let v = chol.solve(&mu);
    let indices: Vec<usize> = (0..n).filter(|&j| v[j] > 0.0).collect();
    if indices.is_empty() {
        return Err(ConvexError::EmptyIndexSet);
    }
    let k = indices.len();
    let mut cj = DMatrix::zeros(k, k);
    for (r, &i) in indices.iter().enumerate() {
        for (s, &j) in indices.iter().enumerate() {
            cj[(r, s)] = q.c[(i, j)];
        }
    }
    let mu_j = DVector::from_iterator(k, indices.iter().map(|&j| inst.mu[j] as f64));
    let a_j = DVector::from_iterator(k, indices.iter().map(|&j| inst.a[j] as f64));
    let cholj = cj
        .cholesky()
        .ok_or_else(|| ConvexError::NumericalFailure("restricted risk form singular".into()))?;
    let w = cholj.solve(&mu_j);
    let warning = w.iter().any(|&x| x <= 0.0);
    let num = mu_j.dot(&w);
    let den = a_j.dot(&w);
    Ok(BorderRisk { r_b_sq: num / (den * den), indices, warning })
}
