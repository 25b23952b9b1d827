//! The discrete pipeline: initial feasible point, cut loop, best-first
//! reversal tree search with pruning, fictitious-bound restarts, and the
//! top-level driver.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::{
    self, halfline_quadric_intersection, max_risk_over_polytope, solve_max_return_continuous,
    tangent_halfspace, tighten_bounds, ConvexError, Polytope,
};
use crate::instance::{Instance, InstanceError, Portfolio, QuadraticForm};
use crate::report::{PhaseStats, SolveReport};
use crate::testset::{
    build_slack_system, groebner_test_set, reduce_fiber_point, SlackSystem, TestSet, TestSetError,
    DEFAULT_PAIR_CAP,
};

/// How the initial feasible portfolio is constructed from the continuous
/// optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxHeuristic {
    /// Round the continuous optimum and decrement coordinates until feasible.
    Repair,
    /// Fill the best return-per-unit asset first, then add the rest greedily
    /// (useful when one asset dominates, e.g. a futures contract).
    Concentrate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_cuts: usize,
    pub max_nodes: usize,
    pub tol: f64,
    pub prec: u32,
    pub alpha: f64,
    pub pair_cap: usize,
    pub seed: u64,
    pub heuristic: ApproxHeuristic,
    /// Collect per-node trace lines.
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_cuts: 4,
            max_nodes: 10_000,
            tol: 1e-4,
            prec: 3,
            alpha: 0.5,
            pair_cap: DEFAULT_PAIR_CAP,
            seed: 0,
            heuristic: ApproxHeuristic::Repair,
            trace: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Convex(#[from] ConvexError),
    #[error(transparent)]
    TestSet(#[from] TestSetError),
}

/// Report plus optional trace lines (one per generated or processed node).
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub trace: Vec<String>,
}

fn feasible(inst: &Instance, q: &QuadraticForm, x: &[i64]) -> bool {
    if x.iter().any(|&v| v < 0) {
        return false;
    }
    let spent: i128 = inst.a.iter().zip(x).map(|(&a, &v)| a as i128 * v as i128).sum();
    if spent > inst.budget as i128 {
        return false;
    }
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    q.eval(&xf) <= q.cap
}

fn return_of(inst: &Instance, x: &[i64]) -> i64 {
    inst.mu.iter().zip(x).map(|(&m, &v)| m * v).sum()
}

/// Return of the componentwise-floored continuous optimum.  This is a weaker
/// return floor than the heuristic's, but it is always achievable, and using
/// `min(g_e, floored_return)` when tightening variable bounds keeps the
/// bound region a relaxation no matter how the heuristic point was found.
pub fn floored_return(inst: &Instance, u_c: &[f64]) -> i64 {
    u_c.iter()
        .zip(&inst.mu)
        .map(|(u, &m)| ((u + 1e-9).floor().max(0.0) as i64) * m)
        .sum()
}

/// Initial feasible portfolio from the continuous optimum `u_c`, plus its
/// return.  Always succeeds: the zero portfolio is feasible.
pub fn discrete_approx(
    inst: &Instance,
    q: &QuadraticForm,
    u_c: &[f64],
    heuristic: ApproxHeuristic,
) -> (Portfolio, i64) {
    let mut x = match heuristic {
        ApproxHeuristic::Repair => {
            let mut x: Vec<i64> = u_c.iter().map(|&v| v.round().max(0.0) as i64).collect();
            repair(inst, q, &mut x);
            x
        }
        ApproxHeuristic::Concentrate => concentrate(inst, q),
    };
    greedy_improve(inst, q, &mut x);
    let r = return_of(inst, &x);
    (Portfolio(x), r)
}

/// Decrements coordinates until feasible.  Prefers a single decrement that
/// restores feasibility outright (smallest return loss first); otherwise
/// drops the coordinate with the largest marginal risk reduction per unit of
/// lost return.
fn repair(inst: &Instance, q: &QuadraticForm, x: &mut Vec<i64>) {
    while !feasible(inst, q, x) {
        let mut restore: Option<usize> = None;
        for j in 0..x.len() {
            if x[j] == 0 {
                continue;
            }
            x[j] -= 1;
            let ok = feasible(inst, q, x);
            x[j] += 1;
            if ok && restore.map_or(true, |r| inst.mu[j] < inst.mu[r]) {
                restore = Some(j);
            }
        }
        if let Some(j) = restore {
            x[j] -= 1;
            continue;
        }
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let q_now = q.eval(&xf);
        let mut pick = 0usize;
        let mut best = f64::NEG_INFINITY;
        for j in 0..x.len() {
            if x[j] == 0 {
                continue;
            }
            let mut yf = xf.clone();
            yf[j] -= 1.0;
            let drop = if q_now > q.cap {
                q_now - q.eval(&yf)
            } else {
                inst.a[j] as f64
            };
            let score = drop / (inst.mu[j].max(1) as f64);
            if score > best {
                best = score;
                pick = j;
            }
        }
        x[pick] -= 1;
    }
}

fn concentrate(inst: &Instance, q: &QuadraticForm) -> Vec<i64> {
    let n = inst.n();
    let mut x = vec![0i64; n];
    let star = (0..n)
        .max_by(|&i, &j| {
            let ri = inst.mu[i] as f64 / inst.a[i] as f64;
            let rj = inst.mu[j] as f64 / inst.a[j] as f64;
            ri.partial_cmp(&rj).unwrap().then(j.cmp(&i))
        })
        .unwrap();
    let by_budget = inst.budget / inst.a[star];
    let by_risk = (q.cap / q.c[(star, star)]).sqrt().floor() as i64;
    x[star] = by_budget.min(by_risk).max(0);
    while x[star] > 0 && !feasible(inst, q, &x) {
        x[star] -= 1;
    }
    x
}

/// Applies unit increments while they keep the point feasible, best return
/// gain first, until no single coordinate can be raised.
fn greedy_improve(inst: &Instance, q: &QuadraticForm, x: &mut Vec<i64>) {
    loop {
        let mut pick: Option<usize> = None;
        for j in 0..x.len() {
            if inst.mu[j] == 0 {
                continue;
            }
            x[j] += 1;
            let ok = feasible(inst, q, x);
            x[j] -= 1;
            if ok && pick.map_or(true, |p| inst.mu[j] > inst.mu[p]) {
                pick = Some(j);
            }
        }
        match pick {
            Some(j) => x[j] += 1,
            None => return,
        }
    }
}

/// `b' = b + floor(alpha (p_e - b))` componentwise.
pub fn fictitious_bounds(b: &[i64], p_e: &[i64], alpha: f64) -> Vec<i64> {
    b.iter()
        .zip(p_e)
        .map(|(&bj, &pj)| bj + (alpha * (pj - bj) as f64).floor() as i64)
        .collect()
}

/// One pass of the cut loop: while the maximum relative risk over the
/// polytope exceeds `r0^2 + tol` and the cut budget allows, adds the tangent
/// half-space at the point where the segment from `p_e` to the risk maximizer
/// leaves the ellipsoid.  Returns the last maximum relative risk.
pub fn new_polytope(
    inst: &Instance,
    q: &QuadraticForm,
    poly: &mut Polytope,
    p_e: &[i64],
    cfg: &SolverConfig,
) -> Result<f64, ConvexError> {
    let b_sq = (inst.budget as f64) * (inst.budget as f64);
    let pe: Vec<f64> = p_e.iter().map(|&v| v as f64).collect();
    loop {
        let rm = max_risk_over_polytope(q, poly, cfg.seed)?;
        let r_m_sq = rm.value / b_sq;
        // the excess is judged relative to the risk cap: risk units vary
        // wildly between instances, an absolute test would be meaningless
        if r_m_sq <= inst.r0_sq * (1.0 + cfg.tol) || poly.cuts().len() >= cfg.max_cuts {
            return Ok(r_m_sq);
        }
        let p_prime = halfline_quadric_intersection(q, &pe, &rm.point)?;
        match tangent_halfspace(q, &p_prime, cfg.prec) {
            Ok(mut cut) => {
                // a cut that excluded the lower-bound corner would leave the
                // slack system without its start point; raising the bound to
                // the corner keeps the corner feasible and the cut sound (the
                // half-space only grows)
                let corner: i64 = cut
                    .normal
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| {
                        let xj = poly
                            .fixed
                            .iter()
                            .find(|&&(f, _)| f == j)
                            .map_or(poly.lower[j], |&(_, v)| v);
                        c * xj
                    })
                    .sum();
                cut.rhs = cut.rhs.max(corner);
                if !poly.add_cut(cut.row()) {
                    // same cut again: no further progress possible
                    return Ok(r_m_sq);
                }
            }
            Err(ConvexError::DegenerateNormal) => return Ok(r_m_sq),
            Err(e) => return Err(e),
        }
    }
}

struct TreeOutcome {
    sw_num_nodes: bool,
    sw_improve: bool,
    /// Best point found, in fiber (y-space) coordinates.
    best: Option<Vec<i64>>,
    nodes: usize,
}

fn fmt_point(y: &[i64]) -> String {
    let parts: Vec<String> = y.iter().map(|v| v.to_string()).collect();
    parts.join(",")
}

/// Best-first search of the fiber tree spanned by the reversal test set,
/// starting from the linear optimum `p_ini` (y-space).  Orders the frontier
/// by `delta1` (the return-ceiling slack) ascending with lexicographic
/// tie-break; the first risk-feasible node popped is the best reachable
/// improvement, so the search stops there.
#[allow(clippy::too_many_arguments)]
fn tree_search(
    p_ini: &[i64],
    sys: &SlackSystem,
    ts: &TestSet,
    inst: &Instance,
    q: &QuadraticForm,
    delta_e: i64,
    cfg: &SolverConfig,
    trace: &mut Vec<String>,
) -> TreeOutcome {
    let nf = sys.free.len();
    let d1 = nf + 1; // slack of the return-ceiling row
    let mut out = TreeOutcome {
        sw_num_nodes: false,
        sw_improve: false,
        best: None,
        nodes: 0,
    };
    let risk_ok = |y: &[i64]| -> bool {
        let p = sys.from_fiber(y);
        let x = sys.portfolio(&p, inst.n());
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        q.eval(&xf) <= q.cap
    };
    let root_delta = p_ini[d1];
    if root_delta >= delta_e {
        if cfg.trace {
            trace.push(format!("node {} delta1={root_delta} action=pruned-gap", fmt_point(p_ini)));
        }
        return out;
    }
    if risk_ok(p_ini) {
        if cfg.trace {
            trace.push(format!(
                "node {} delta1={root_delta} action=feasible-improve",
                fmt_point(p_ini)
            ));
        }
        out.sw_improve = true;
        out.best = Some(p_ini.to_vec());
        return out;
    }
    let mut frontier: BinaryHeap<Reverse<(i64, Vec<i64>)>> = BinaryHeap::new();
    let mut visited: HashSet<Vec<i64>> = HashSet::new();
    if cfg.trace {
        trace.push(format!("node {} delta1={root_delta} action=new", fmt_point(p_ini)));
    }
    visited.insert(p_ini.to_vec());
    frontier.push(Reverse((root_delta, p_ini.to_vec())));
    while let Some(Reverse((delta, y))) = frontier.pop() {
        if out.nodes >= cfg.max_nodes {
            out.sw_num_nodes = true;
            return out;
        }
        out.nodes += 1;
        if risk_ok(&y) {
            if cfg.trace {
                trace.push(format!("node {} delta1={delta} action=feasible-improve", fmt_point(&y)));
            }
            out.sw_improve = true;
            out.best = Some(y);
            return out;
        }
        for v in &ts.vectors {
            let child: Vec<i64> = y.iter().zip(v).map(|(&yi, &vi)| yi + vi).collect();
            let cd = child[d1];
            if child.iter().any(|&c| c < 0) {
                if cfg.trace {
                    trace.push(format!("node {} delta1={cd} action=pruned-bound", fmt_point(&child)));
                }
                continue;
            }
            if cd >= delta_e {
                if cfg.trace {
                    trace.push(format!("node {} delta1={cd} action=pruned-gap", fmt_point(&child)));
                }
                continue;
            }
            if visited.contains(&child) {
                if cfg.trace {
                    trace.push(format!("node {} delta1={cd} action=duplicate", fmt_point(&child)));
                }
                continue;
            }
            if cfg.trace {
                trace.push(format!("node {} delta1={cd} action=new", fmt_point(&child)));
            }
            visited.insert(child.clone());
            frontier.push(Reverse((cd, child)));
        }
    }
    out
}

/// The full driver: continuous optimum, discrete approximation, then rounds
/// of bound tightening, cut generation, test-set completion, reduction and
/// tree search, with fictitious-bound restarts when the node cap is hit
/// without improvement.
pub fn discrete_optimum(inst: &Instance, cfg: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    let n = inst.n();
    let q = inst.quadratic_form();
    let mut trace: Vec<String> = Vec::new();
    let mut phases: Vec<PhaseStats> = Vec::new();
    let r_b_sq = convex::border_risk(inst).ok().map(|b| b.r_b_sq);

    if q.cap <= 0.0 {
        // only the zero portfolio has zero risk
        return Ok(finish(inst, &q, Portfolio::zeros(n), true, None, r_b_sq, phases, trace, cfg));
    }

    let t0 = Instant::now();
    let cont = solve_max_return_continuous(inst, &q, &[])?;
    let floor_rc = (cont.objective + 1e-6).floor() as i64;
    let g_floor = floored_return(inst, &cont.point);
    let (mut p_e, mut g_e) = discrete_approx(inst, &q, &cont.point, cfg.heuristic);
    phases.push(PhaseStats {
        name: "continuous".into(),
        cuts: 0,
        basis: 0,
        nodes: 0,
        seconds: t0.elapsed().as_secs_f64(),
    });

    let mut proven = false;
    let mut sw_eop = false;
    let mut sw_fict = false;
    let mut r_max_sq: Option<f64> = None;
    let mut b = vec![0i64; n];
    let mut fixed: Vec<(usize, i64)> = Vec::new();

    let mut outer_rounds = 0;
    while !sw_eop {
        outer_rounds += 1;
        if outer_rounds > 64 {
            break; // defensive: report best-found rather than spin
        }
        if floor_rc <= g_e {
            // no integer return strictly between g_e and R_c exists
            proven = true;
            break;
        }
        let mut poly = Polytope::base(inst, floor_rc, g_e);
        if !sw_fict {
            match tighten_bounds(inst, &q, &poly, g_e.min(g_floor)) {
                Ok(bounds) => {
                    b = bounds.lower;
                    fixed = bounds.fixed;
                }
                Err(ConvexError::Infeasible) | Err(ConvexError::NumericalFailure(_)) => {
                    b = vec![0; n];
                    fixed = Vec::new();
                }
                Err(e) => return Err(e.into()),
            }
        }
        poly.lower = b.clone();
        poly.fixed = fixed.clone();

        let mut sw_improve = false;
        let mut sw_num = false;
        let mut cached: Option<(usize, TestSet)> = None;
        while !(sw_eop || sw_improve || sw_num) {
            let t = Instant::now();
            r_max_sq = Some(new_polytope(inst, &q, &mut poly, &p_e.0, cfg)?);
            let sys = match build_slack_system(inst, &poly) {
                Ok(sys) => sys,
                Err(TestSetError::NegativeRhs(_)) if sw_fict => {
                    // fictitious bounds pushed a cut row past its rhs; the
                    // restart region is empty, keep the incumbent
                    sw_eop = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            };
            let ts = match &cached {
                // fictitious bounds only re-translate the rhs; the matrix and
                // hence the test set are unchanged unless cuts were added
                Some((rows, ts)) if *rows == poly.rows.len() => ts.clone(),
                _ => {
                    let ts = groebner_test_set(&sys, cfg.pair_cap)?;
                    cached = Some((poly.rows.len(), ts.clone()));
                    ts
                }
            };
            let mut y = sys.to_fiber(&sys.bounds_point())?;
            reduce_fiber_point(&mut y, &ts);
            let delta_e = floor_rc - g_e;
            let out = tree_search(&y, &sys, &ts, inst, &q, delta_e, cfg, &mut trace);
            phases.push(PhaseStats {
                name: format!("search-{}", phases.len()),
                cuts: poly.cuts().len(),
                basis: ts.len(),
                nodes: out.nodes,
                seconds: t.elapsed().as_secs_f64(),
            });
            sw_improve = out.sw_improve;
            sw_num = out.sw_num_nodes;
            let adopt = |best: &Vec<i64>, p_e: &mut Portfolio, g_e: &mut i64| {
                let p = sys.from_fiber(best);
                let x = sys.portfolio(&p, n);
                *g_e = return_of(inst, &x);
                *p_e = Portfolio(x);
            };
            if sw_fict {
                if !sw_improve {
                    sw_eop = true; // restart exhausted: incumbent is best-found
                } else {
                    adopt(out.best.as_ref().unwrap(), &mut p_e, &mut g_e);
                    sw_fict = false;
                }
            } else if !sw_num {
                if sw_improve {
                    adopt(out.best.as_ref().unwrap(), &mut p_e, &mut g_e);
                }
                sw_eop = true;
                proven = true;
            } else if !sw_improve {
                let b2 = fictitious_bounds(&b, &p_e.0, cfg.alpha);
                if b2 == b {
                    sw_eop = true; // bounds cannot shrink further
                } else {
                    b = b2;
                    poly.lower = b.clone();
                    sw_fict = true;
                }
            } else {
                // node cap hit after an improvement: adopt and rebuild
                adopt(out.best.as_ref().unwrap(), &mut p_e, &mut g_e);
            }
        }
    }

    Ok(finish(inst, &q, p_e, proven, r_max_sq, r_b_sq, phases, trace, cfg))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    q: &QuadraticForm,
    p_e: Portfolio,
    proven: bool,
    r_max_sq: Option<f64>,
    r_b_sq: Option<f64>,
    phases: Vec<PhaseStats>,
    trace: Vec<String>,
    cfg: &SolverConfig,
) -> SolveOutcome {
    let invested: i64 = inst.a.iter().zip(&p_e.0).map(|(&a, &x)| a * x).sum();
    let report = SolveReport {
        return_value: return_of(inst, &p_e.0),
        risk_value: q.risk_value(&p_e),
        optimum: p_e.0,
        labels: inst.labels.clone(),
        r_max_sq,
        invested,
        uninvested: inst.budget - invested,
        proven,
        r_b_sq,
        phases,
        config: cfg.clone(),
    };
    SolveOutcome { report, trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::illustrative_instance;

    #[test]
    fn approx_repairs_the_rounded_continuous_optimum() {
        let inst = illustrative_instance();
        let q = inst.quadratic_form();
        let (p_e, r_e) = discrete_approx(
            &inst,
            &q,
            &[772.754778, 215.028056],
            ApproxHeuristic::Repair,
        );
        assert_eq!(p_e.0, vec![773, 214]);
        assert_eq!(r_e, 11_802_500);
    }

    #[test]
    fn approx_keeps_a_feasible_integral_point() {
        let inst = illustrative_instance();
        let q = inst.quadratic_form();
        let (p_e, _) = discrete_approx(&inst, &q, &[779.0, 207.0], ApproxHeuristic::Repair);
        assert!(feasible(&inst, &q, &p_e.0));
    }

    #[test]
    fn fictitious_bounds_move_halfway() {
        let b = fictitious_bounds(&[753, 191], &[773, 214], 0.5);
        assert_eq!(b, vec![763, 202]);
        let same = fictitious_bounds(&[5, 5], &[5, 5], 0.5);
        assert_eq!(same, vec![5, 5]);
    }

    #[test]
    fn driver_solves_the_illustrative_instance_without_cuts() {
        let inst = illustrative_instance();
        let cfg = SolverConfig {
            max_cuts: 0,
            trace: true,
            ..SolverConfig::default()
        };
        let out = discrete_optimum(&inst, &cfg).unwrap();
        assert_eq!(out.report.optimum, vec![779, 207]);
        assert_eq!(out.report.return_value, 11_807_500);
        assert!(out.report.proven);
        assert_eq!(out.report.uninvested, 3_624_840);
    }

    #[test]
    fn driver_solves_the_illustrative_instance_with_cuts() {
        let inst = illustrative_instance();
        let cfg = SolverConfig {
            max_cuts: 2,
            ..SolverConfig::default()
        };
        let out = discrete_optimum(&inst, &cfg).unwrap();
        assert_eq!(out.report.optimum, vec![779, 207]);
        assert!(out.report.proven);
    }

    #[test]
    fn zero_risk_cap_yields_the_zero_portfolio() {
        let mut inst = illustrative_instance();
        inst.r0_sq = 0.0;
        let out = discrete_optimum(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(out.report.optimum, vec![0, 0]);
        assert!(out.report.proven);
    }
}
