//! Small dense log-barrier interior-point solver for linear objectives over
//! linear rows plus at most one convex quadratic constraint.
//!
//! Problem sizes here are tiny (a few dozen variables, a handful of rows),
//! so a damped-Newton barrier iteration with a phase-I feasibility stage is
//! adequate and keeps the solver self-contained.

use nalgebra::{DMatrix, DVector};

use super::ConvexError;

/// Feasible region `g'x <= h` for each row, optional `x'Mx <= d`, `x >= lower`.
#[derive(Debug, Clone)]
pub struct Region {
    pub n: usize,
    pub rows: Vec<(DVector<f64>, f64)>,
    pub quad: Option<(DMatrix<f64>, f64)>,
    pub lower: Vec<f64>,
}

enum Con {
    /// g'x - h <= 0
    Lin(DVector<f64>, f64),
    /// x'Mx - d <= 0 (applied to the leading block of the variable vector)
    Quad(DMatrix<f64>, f64),
}

impl Con {
    fn value(&self, x: &DVector<f64>) -> f64 {
        match self {
            Con::Lin(g, h) => g.dot(x) - h,
            Con::Quad(m, d) => {
                let xb = x.rows(0, m.nrows());
                (xb.transpose() * m * xb)[(0, 0)] - d
            }
        }
    }

    fn gradient(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        out.fill(0.0);
        match self {
            Con::Lin(g, _) => out.rows_mut(0, g.len()).copy_from(g),
            Con::Quad(m, _) => {
                let xb = x.rows(0, m.nrows()).clone_owned();
                out.rows_mut(0, m.nrows()).copy_from(&(2.0 * m * xb));
            }
        }
    }
}

/// Normalized constraint list over `dim` variables; phase-I appends the
/// artificial margin variable as the last coordinate.
fn constraints(region: &Region, dim: usize, with_margin: bool) -> Vec<Con> {
    let mut cons = Vec::new();
    let margin = if with_margin { 1.0 } else { 0.0 };
    for (g, h) in &region.rows {
        let scale = g.amax().max(1e-12);
        let mut gg = DVector::zeros(dim);
        gg.rows_mut(0, region.n).copy_from(&(g / scale));
        if with_margin {
            gg[dim - 1] = -margin;
        }
        cons.push(Con::Lin(gg, h / scale));
    }
    for (j, &lb) in region.lower.iter().enumerate() {
        let mut gg = DVector::zeros(dim);
        gg[j] = -1.0;
        if with_margin {
            gg[dim - 1] = -margin;
        }
        cons.push(Con::Lin(gg, -lb));
    }
    if let Some((m, d)) = &region.quad {
        // margin coupling for phase-I is handled by the caller via the
        // quad_margin index
        let scale = d.max(m.amax()).max(1e-300);
        cons.push(Con::Quad(m / scale, d / scale));
    }
    cons
}

/// Minimizes the barrier objective `t * c'x - sum log(-phi_k)` by damped
/// Newton steps from a strictly feasible start.
fn newton_center(
    cons: &[Con],
    quad_margin: Option<usize>,
    c: &DVector<f64>,
    t: f64,
    x: &mut DVector<f64>,
) -> Result<(), ConvexError> {
    let dim = x.len();
    let mut grad = DVector::zeros(dim);
    let mut hess = DMatrix::zeros(dim, dim);
    let mut cg = DVector::zeros(dim);
    for _ in 0..200 {
        grad.copy_from(&(t * c));
        hess.fill(0.0);
        for (k, con) in cons.iter().enumerate() {
            let mut v = con.value(x);
            if quad_margin == Some(k) {
                v -= x[dim - 1];
            }
            if v >= 0.0 {
                return Err(ConvexError::NumericalFailure(
                    "barrier iterate left the strict interior".into(),
                ));
            }
            con.gradient(x, &mut cg);
            if quad_margin == Some(k) {
                cg[dim - 1] = -1.0;
            }
            let inv = -1.0 / v;
            grad.axpy(inv, &cg, 1.0);
            for i in 0..dim {
                if cg[i] == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    hess[(i, j)] += inv * inv * cg[i] * cg[j];
                }
            }
            if let Con::Quad(m, _) = con {
                let nb = m.nrows();
                for i in 0..nb {
                    for j in 0..nb {
                        hess[(i, j)] += inv * 2.0 * m[(i, j)];
                    }
                }
            }
        }
        // ridge fallback if the Hessian factorization fails
        let mut step = None;
        let mut ridge = 0.0;
        for _ in 0..8 {
            let mut h = hess.clone();
            if ridge > 0.0 {
                for i in 0..dim {
                    h[(i, i)] += ridge;
                }
            }
            if let Some(chol) = h.cholesky() {
                step = Some(chol.solve(&(-&grad)));
                break;
            }
            ridge = if ridge == 0.0 { 1e-10 } else { ridge * 100.0 };
        }
        let Some(dx) = step else {
            return Err(ConvexError::NumericalFailure("singular Newton system".into()));
        };
        let decrement = -grad.dot(&dx);
        if decrement < 2e-12 {
            return Ok(());
        }
        // backtracking line search staying strictly feasible
        let psi = |y: &DVector<f64>| -> Option<f64> {
            let mut val = t * c.dot(y);
            for (k, con) in cons.iter().enumerate() {
                let mut v = con.value(y);
                if quad_margin == Some(k) {
                    v -= y[dim - 1];
                }
                if v >= 0.0 {
                    return None;
                }
                val -= (-v).ln();
            }
            Some(val)
        };
        let base = psi(x).ok_or_else(|| {
            ConvexError::NumericalFailure("infeasible barrier iterate".into())
        })?;
        let mut eta = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = x.clone() + eta * &dx;
            if let Some(val) = psi(&cand) {
                if val <= base - 0.25 * eta * decrement {
                    x.copy_from(&cand);
                    moved = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !moved {
            return Ok(()); // stalled at numerical precision
        }
    }
    Ok(())
}

fn barrier_minimize(
    cons: &[Con],
    quad_margin: Option<usize>,
    c: &DVector<f64>,
    x0: DVector<f64>,
    gap_tol: f64,
    stop_early: Option<&dyn Fn(&DVector<f64>) -> bool>,
) -> Result<DVector<f64>, ConvexError> {
    let mut x = x0;
    let mut t = 1.0;
    let ncon = cons.len() as f64;
    loop {
        newton_center(cons, quad_margin, c, t, &mut x)?;
        if let Some(stop) = stop_early {
            if stop(&x) {
                return Ok(x);
            }
        }
        if ncon / t < gap_tol {
            return Ok(x);
        }
        t *= 20.0;
        if t > 1e18 {
            return Err(ConvexError::NumericalFailure("barrier parameter overflow".into()));
        }
    }
}

/// Finds a strictly feasible point of the region, or reports infeasibility.
pub fn interior_point(region: &Region) -> Result<DVector<f64>, ConvexError> {
    let n = region.n;
    let dim = n + 1;
    let cons = constraints(region, dim, true);
    let quad_margin = region.quad.as_ref().map(|_| cons.len() - 1);
    // start just above the lower bounds with a margin covering all violations
    let mut x0 = DVector::zeros(dim);
    for j in 0..n {
        x0[j] = region.lower[j] + 1.0;
    }
    let mut worst: f64 = 0.0;
    for (k, con) in cons.iter().enumerate() {
        let mut v = con.value(&x0);
        if quad_margin == Some(k) {
            v -= 0.0;
        }
        worst = worst.max(v);
    }
    x0[dim - 1] = worst + 1.0;
    let mut c = DVector::zeros(dim);
    c[dim - 1] = 1.0;
    let stop = |x: &DVector<f64>| x[x.len() - 1] < -1e-7;
    let sol = barrier_minimize(&cons, quad_margin, &c, x0, 1e-9, Some(&stop))?;
    if sol[dim - 1] >= -1e-10 {
        return Err(ConvexError::Infeasible);
    }
    Ok(sol.rows(0, n).clone_owned())
}

/// Maximizes `c'x` over the region.  Returns the maximizer and the exact
/// objective value `c'x` at it.
pub fn maximize_linear(region: &Region, c: &[f64]) -> Result<(Vec<f64>, f64), ConvexError> {
    let x0 = interior_point(region)?;
    maximize_linear_from(region, c, x0)
}

/// Same as [`maximize_linear`] but reusing a known strictly feasible point.
pub fn maximize_linear_from(
    region: &Region,
    c: &[f64],
    x0: DVector<f64>,
) -> Result<(Vec<f64>, f64), ConvexError> {
    let n = region.n;
    let cons = constraints(region, n, false);
    let scale = c.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-12);
    let cvec = DVector::from_iterator(n, c.iter().map(|&v| -v / scale));
    let sol = barrier_minimize(&cons, None, &cvec, x0, 1e-10, None)?;
    let obj = sol
        .iter()
        .zip(c)
        .map(|(&x, &ci)| x * ci)
        .sum::<f64>();
    Ok((sol.iter().copied().collect(), obj))
}
