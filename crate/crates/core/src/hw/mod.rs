//! Structural model of the interpolation hardware.
//!
//! The datapath that produces interpolation points and thresholds is built
//! as an expression DAG with full structural sharing, and its operators are
//! counted under a fixed convention (see [`count_ops`]). Index assignment is
//! modeled as seven threshold comparators feeding a priority encoder.

mod dag;

pub use dag::{
    build_interpolation_dag, evaluate_tables, DagOutput, DagScale, DagTable, Domain, ExprDag, Node, NodeId, OutputKind,
};

use std::collections::HashSet;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatapathVariant {
    /// Seven-interval linear scale plus log-linear, both unshifted.
    LinearWithDividers,
    /// Power-of-two revised linear scale plus log-linear, both unshifted.
    RevisedLinear,
    /// Revised linear plus log-linear, computed relative to the minimum.
    RevisedLinearShifted,
}

impl DatapathVariant {
    pub const ALL: [DatapathVariant; 3] =
        [DatapathVariant::LinearWithDividers, DatapathVariant::RevisedLinear, DatapathVariant::RevisedLinearShifted];

    /// Reference operator counts for this datapath, used as comparison
    /// targets by reports.
    pub const fn reference_counts(self) -> OpCount {
        match self {
            DatapathVariant::LinearWithDividers => OpCount { dividers: 12, multipliers: 20, adders: 26 },
            DatapathVariant::RevisedLinear => OpCount { dividers: 0, multipliers: 18, adders: 19 },
            DatapathVariant::RevisedLinearShifted => OpCount { dividers: 0, multipliers: 5, adders: 2 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct OpCount {
    pub dividers: usize,
    pub multipliers: usize,
    pub adders: usize,
}

impl OpCount {
    /// True when every category is at most `other`'s.
    pub fn dominated_by(&self, other: &OpCount) -> bool {
        self.dividers <= other.dividers && self.multipliers <= other.multipliers && self.adders <= other.adders
    }
}

/// Operator census of the nodes reachable from the outputs.
///
/// Adds and subtracts count as adders, multiplication by a constant that is
/// not a power of two as a multiplier, division by such a constant as a
/// divider. Shifts, inputs, constants and multiplexers are free.
pub fn count_ops(dag: &ExprDag) -> OpCount {
    let mut seen = HashSet::new();
    let mut stack: Vec<NodeId> = dag.outputs().iter().map(|o| o.root).collect();
    let mut count = OpCount::default();
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        match dag.node(id) {
            Node::InputMax | Node::InputMin | Node::Zero => {}
            Node::Sub(a, b) | Node::Add(a, b) => {
                count.adders += 1;
                stack.extend([*a, *b]);
            }
            Node::MulConst(a, k) => {
                if !k.is_power_of_two() {
                    count.multipliers += 1;
                }
                stack.push(*a);
            }
            Node::DivConst(a, d) => {
                if !d.is_power_of_two() {
                    count.dividers += 1;
                }
                stack.push(*a);
            }
            Node::ShiftLeft(a, _) | Node::ShiftRight(a, _) => stack.push(*a),
            Node::Select(inputs) => stack.extend(inputs.iter().copied()),
        }
    }
    count
}

/// Index of the highest asserted comparator plus one, or 0 if none is set.
/// `compare[i]` is `x' > th_{i+1}`.
pub fn priority_encode(compare: [bool; 7]) -> u8 {
    compare.iter().rposition(|&b| b).map_or(0, |i| i as u8 + 1)
}

/// The comparator bank in front of the priority encoder.
pub fn compare_thresholds(shifted: i64, thresholds: &[i64; 7]) -> [bool; 7] {
    thresholds.map(|th| shifted > th)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{build_table, ScaleKind};

    #[test]
    fn shifted_census() {
        let dag = build_interpolation_dag(DatapathVariant::RevisedLinearShifted);
        assert_eq!(count_ops(&dag), OpCount { dividers: 0, multipliers: 5, adders: 2 });
        assert_eq!(dag.multiples().into_iter().collect::<Vec<_>>(), vec![3, 5, 7, 9, 11]);
        let subs = dag.nodes().iter().filter(|n| matches!(n, Node::Sub(..))).count();
        assert_eq!(subs, 1);
    }

    #[test]
    fn unshifted_census() {
        let revised = count_ops(&build_interpolation_dag(DatapathVariant::RevisedLinear));
        assert_eq!(revised, OpCount { dividers: 0, multipliers: 18, adders: 19 });
        let linear = count_ops(&build_interpolation_dag(DatapathVariant::LinearWithDividers));
        assert_eq!(linear, OpCount { dividers: 12, multipliers: 21, adders: 25 });
        let shifted = count_ops(&build_interpolation_dag(DatapathVariant::RevisedLinearShifted));
        assert!(shifted.dominated_by(&revised));
        assert!(revised.dominated_by(&linear));
    }

    #[test]
    fn dag_matches_tables_at_fixture() {
        for variant in [DatapathVariant::RevisedLinear, DatapathVariant::RevisedLinearShifted] {
            let tables = evaluate_tables(&build_interpolation_dag(variant), 0, 96);
            for (scale, kind) in
                [(DagScale::RevisedLinear, ScaleKind::RevisedLinear), (DagScale::LogLinear, ScaleKind::LogLinear)]
            {
                let t = build_table(kind, 0i64, 96).unwrap();
                assert_eq!(tables[&scale].points, t.points, "{variant:?} {kind:?}");
                assert_eq!(tables[&scale].thresholds, t.thresholds, "{variant:?} {kind:?}");
            }
        }
        let tables = evaluate_tables(&build_interpolation_dag(DatapathVariant::LinearWithDividers), 0, 96);
        let t = build_table(ScaleKind::LogLinear, 0i64, 96).unwrap();
        assert_eq!(tables[&DagScale::LogLinear].points, t.points);
        assert_eq!(tables[&DagScale::Linear].points, [0, 13, 27, 41, 54, 68, 82, 96]);
    }

    #[test]
    fn degenerate_range() {
        for variant in DatapathVariant::ALL {
            for table in evaluate_tables(&build_interpolation_dag(variant), -7, -7).values() {
                assert_eq!(table.points, [-7; 8]);
                assert_eq!(table.thresholds, [0; 7]);
            }
        }
    }

    #[test]
    fn priority_encoder() {
        assert_eq!(priority_encode([true, true, true, true, true, false, false]), 5);
        assert_eq!(priority_encode([false; 7]), 0);
        assert_eq!(priority_encode([true; 7]), 7);
        assert_eq!(compare_thresholds(10, &[1, 3, 5, 7, 9, 11, 14]), [true, true, true, true, true, false, false]);
    }
}
