//! Hash-consed expression graph of the interpolation datapath.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::DatapathVariant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    InputMax,
    InputMin,
    Zero,
    Sub(NodeId, NodeId),
    /// Operands are stored in ascending id order.
    Add(NodeId, NodeId),
    MulConst(NodeId, u32),
    ShiftLeft(NodeId, u32),
    /// Arithmetic shift, i.e. floor division by a power of two.
    ShiftRight(NodeId, u32),
    /// Floor division by a constant that is not a power of two.
    DivConst(NodeId, u32),
    /// Multiplexer; the input is picked per evaluated output.
    Select(Vec<NodeId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DagScale {
    Linear,
    RevisedLinear,
    LogLinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Point,
    Threshold,
}

/// Whether an output is an absolute value or relative to the minimum endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Absolute,
    Shifted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DagOutput {
    pub scale: DagScale,
    pub kind: OutputKind,
    /// Point index `0..8` or threshold index `1..8`.
    pub index: usize,
    pub root: NodeId,
    /// Input of the (single) select node routed to `root` for this output.
    pub select: Option<usize>,
    pub domain: Domain,
}

#[derive(Debug, Clone, Default)]
pub struct ExprDag {
    nodes: Vec<Node>,
    interned: HashMap<Node, NodeId>,
    outputs: Vec<DagOutput>,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl ExprDag {
    fn intern(&mut self, node: Node) -> NodeId {
        let node = match node {
            Node::Add(a, b) if b < a => Node::Add(b, a),
            other => other,
        };
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(node.clone());
        self.interned.insert(node, id);
        id
    }

    /// `x · k` with powers of two turned into left shifts.
    fn times(&mut self, x: NodeId, k: u32) -> NodeId {
        match k {
            1 => x,
            k if k.is_power_of_two() => self.intern(Node::ShiftLeft(x, k.trailing_zeros())),
            k => self.intern(Node::MulConst(x, k)),
        }
    }

    /// `floor(x / d)` with powers of two turned into right shifts.
    fn over(&mut self, x: NodeId, d: u32) -> NodeId {
        match d {
            1 => x,
            d if d.is_power_of_two() => self.intern(Node::ShiftRight(x, d.trailing_zeros())),
            d => self.intern(Node::DivConst(x, d)),
        }
    }

    /// `floor((a·m + b·M) / d)` in lowest terms, written directly in the
    /// endpoints.
    fn blend(&mut self, a: u32, b: u32, d: u32) -> NodeId {
        let g = gcd(gcd(a, b), d);
        let (a, b, d) = (a / g, b / g, d / g);
        let (min, max) = (self.intern(Node::InputMin), self.intern(Node::InputMax));
        let sum = match (a, b) {
            (0, 0) => self.intern(Node::Zero),
            (a, 0) => self.times(min, a),
            (0, b) => self.times(max, b),
            (a, b) => {
                let (x, y) = (self.times(min, a), self.times(max, b));
                self.intern(Node::Add(x, y))
            }
        };
        self.over(sum, d)
    }

    /// `floor(k·R / d)` in lowest terms.
    fn fraction_of(&mut self, range: NodeId, k: u32, d: u32) -> NodeId {
        if k == 0 {
            return self.intern(Node::Zero);
        }
        let g = gcd(k, d);
        let scaled = self.times(range, k / g);
        self.over(scaled, d / g)
    }

    fn output(&mut self, scale: DagScale, kind: OutputKind, index: usize, root: NodeId, domain: Domain) {
        self.outputs.push(DagOutput { scale, kind, index, root, select: None, domain });
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn outputs(&self) -> &[DagOutput] {
        &self.outputs
    }

    /// Constants of all non-power-of-two multiplications.
    pub fn multiples(&self) -> BTreeSet<u32> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::MulConst(_, k) => Some(*k),
                _ => None,
            })
            .collect()
    }

    /// Evaluates every output at endpoints `(min, max)` with floor semantics.
    pub fn evaluate(&self, min: i64, max: i64) -> Vec<i64> {
        // Nodes are topologically ordered by construction; only the select
        // node depends on the output being evaluated.
        let mut base = vec![0i64; self.nodes.len()];
        let mut select_at = None;
        for (i, node) in self.nodes.iter().enumerate() {
            base[i] = match *node {
                Node::Select(_) => {
                    select_at = Some(i);
                    0
                }
                ref n => eval_node(n, &base, min, max),
            };
        }
        self.outputs
            .iter()
            .map(|out| match (out.select, select_at) {
                (Some(pick), Some(at)) => {
                    let mut vals = base.clone();
                    let Node::Select(inputs) = &self.nodes[at] else { unreachable!() };
                    vals[at] = vals[inputs[pick].0];
                    for i in at + 1..=out.root.0 {
                        vals[i] = eval_node(&self.nodes[i], &vals, min, max);
                    }
                    vals[out.root.0]
                }
                _ => base[out.root.0],
            })
            .collect()
    }
}

fn eval_node(node: &Node, vals: &[i64], min: i64, max: i64) -> i64 {
    match *node {
        Node::InputMax => max,
        Node::InputMin => min,
        Node::Zero => 0,
        Node::Sub(a, b) => vals[a.0] - vals[b.0],
        Node::Add(a, b) => vals[a.0] + vals[b.0],
        Node::MulConst(a, k) => vals[a.0] * i64::from(k),
        Node::ShiftLeft(a, s) => vals[a.0] << s,
        Node::ShiftRight(a, s) => vals[a.0] >> s,
        Node::DivConst(a, d) => vals[a.0].div_euclid(i64::from(d)),
        Node::Select(_) => unreachable!("select is resolved per output"),
    }
}

/// `(numerator, denominator)` of shifted points and thresholds.
const REVISED_POINTS: [(u32, u32); 8] = [(0, 1), (1, 8), (2, 8), (3, 8), (4, 8), (5, 8), (6, 8), (1, 1)];
const LOG_POINTS: [(u32, u32); 8] = [(0, 1), (1, 32), (1, 16), (3, 32), (1, 8), (1, 4), (1, 2), (1, 1)];
const REVISED_THRESHOLDS: [(u32, u32); 7] = [(1, 16), (3, 16), (5, 16), (7, 16), (9, 16), (11, 16), (7, 8)];
const LOG_THRESHOLDS: [(u32, u32); 7] = [(1, 64), (3, 64), (5, 64), (7, 64), (3, 16), (3, 8), (3, 4)];

/// A scale with its point and threshold fractions.
type ScaleFractions = (DagScale, [(u32, u32); 8], [(u32, u32); 7]);

fn linear_points() -> [(u32, u32); 8] {
    std::array::from_fn(|i| (i as u32, 7))
}

fn linear_thresholds() -> [(u32, u32); 7] {
    std::array::from_fn(|i| (2 * i as u32 + 1, 14))
}

/// Builds the datapath that produces all points and thresholds of the two
/// scales used by `variant`.
///
/// Unshifted variants evaluate each value as `(a·m + b·M) / d` directly.
/// The shifted variant forms the range `R = M − m` once, derives every
/// shifted value as a shift of `R` or of an odd multiple of `R`, and restores
/// absolute points with a single adder behind the point multiplexer.
pub fn build_interpolation_dag(variant: DatapathVariant) -> ExprDag {
    let mut dag = ExprDag::default();
    let scales: [ScaleFractions; 2] = match variant {
        DatapathVariant::LinearWithDividers => [
            (DagScale::Linear, linear_points(), linear_thresholds()),
            (DagScale::LogLinear, LOG_POINTS, LOG_THRESHOLDS),
        ],
        DatapathVariant::RevisedLinear | DatapathVariant::RevisedLinearShifted => [
            (DagScale::RevisedLinear, REVISED_POINTS, REVISED_THRESHOLDS),
            (DagScale::LogLinear, LOG_POINTS, LOG_THRESHOLDS),
        ],
    };
    match variant {
        DatapathVariant::LinearWithDividers | DatapathVariant::RevisedLinear => {
            for (scale, points, thresholds) in scales {
                for (i, (k, d)) in points.into_iter().enumerate() {
                    let root = dag.blend(d - k, k, d);
                    dag.output(scale, OutputKind::Point, i, root, Domain::Absolute);
                }
                for (i, (k, d)) in thresholds.into_iter().enumerate() {
                    let root = dag.blend(d - k, k, d);
                    dag.output(scale, OutputKind::Threshold, i + 1, root, Domain::Absolute);
                }
            }
        }
        DatapathVariant::RevisedLinearShifted => {
            let max = dag.intern(Node::InputMax);
            let min = dag.intern(Node::InputMin);
            let range = dag.intern(Node::Sub(max, min));
            let mut shifted = Vec::new();
            for (scale, points, thresholds) in scales {
                for (i, (k, d)) in points.into_iter().enumerate() {
                    shifted.push((scale, i, dag.fraction_of(range, k, d)));
                }
                for (i, (k, d)) in thresholds.into_iter().enumerate() {
                    let root = dag.fraction_of(range, k, d);
                    dag.output(scale, OutputKind::Threshold, i + 1, root, Domain::Shifted);
                }
            }
            let select = dag.intern(Node::Select(shifted.iter().map(|&(_, _, id)| id).collect()));
            let restore = dag.intern(Node::Add(min, select));
            for (pick, (scale, i, _)) in shifted.into_iter().enumerate() {
                dag.outputs.push(DagOutput {
                    scale,
                    kind: OutputKind::Point,
                    index: i,
                    root: restore,
                    select: Some(pick),
                    domain: Domain::Absolute,
                });
            }
        }
    }
    dag
}

/// Point and shifted-threshold values of one scale as produced by a DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagTable {
    pub points: [i64; 8],
    pub thresholds: [i64; 7],
}

/// Evaluates `dag` and regroups the outputs per scale, with thresholds moved
/// into the shifted domain.
pub fn evaluate_tables(dag: &ExprDag, min: i64, max: i64) -> HashMap<DagScale, DagTable> {
    let values = dag.evaluate(min, max);
    let mut tables: HashMap<DagScale, DagTable> = HashMap::new();
    for (out, v) in dag.outputs().iter().zip(values) {
        let t = tables.entry(out.scale).or_insert(DagTable { points: [0; 8], thresholds: [0; 7] });
        match out.kind {
            OutputKind::Point => t.points[out.index] = v,
            OutputKind::Threshold => {
                t.thresholds[out.index - 1] = match out.domain {
                    Domain::Absolute => v - min,
                    Domain::Shifted => v,
                }
            }
        }
    }
    tables
}
