//! Machine-readable solve reports.

use serde::{Deserialize, Serialize};

use crate::search::SolverConfig;

/// One solver phase: the continuous stage or one tree-search pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub name: String,
    /// Cuts present in the polytope during this phase.
    pub cuts: usize,
    /// Test-set size used by this phase (0 for the continuous stage).
    pub basis: usize,
    /// Tree nodes processed.
    pub nodes: usize,
    pub seconds: f64,
}

/// The full outcome of a solve, serializable as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub optimum: Vec<i64>,
    pub labels: Option<Vec<String>>,
    pub return_value: i64,
    /// `Q` at the optimum, absolute units (compare against `B^2 r0^2`).
    pub risk_value: f64,
    /// Last maximum of `Q/B^2` over the cut polytope, when computed.
    pub r_max_sq: Option<f64>,
    pub invested: i64,
    pub uninvested: i64,
    /// True when the final tree search exhausted its frontier under the node
    /// cap with the real (not fictitious) bounds; false means best-found.
    pub proven: bool,
    pub r_b_sq: Option<f64>,
    pub phases: Vec<PhaseStats>,
    pub config: SolverConfig,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::ApproxHeuristic;

    #[test]
    fn json_round_trip_is_field_identical() {
        let report = SolveReport {
            optimum: vec![779, 207],
            labels: Some(vec!["A".into(), "B".into()]),
            return_value: 11_807_500,
            risk_value: 2.4e9,
            r_max_sq: Some(3.1e-5),
            invested: 5_375_160,
            uninvested: 3_624_840,
            proven: true,
            r_b_sq: Some(1.93e-5),
            phases: vec![PhaseStats {
                name: "search-1".into(),
                cuts: 2,
                basis: 7,
                nodes: 0,
                seconds: 0.25,
            }],
            config: SolverConfig {
                heuristic: ApproxHeuristic::Concentrate,
                ..SolverConfig::default()
            },
        };
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: SolveReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
}
