//! The stretching process on open intervals and boxes.
//!
//! Starting from a finite open interval ]a,b[ and a strictly decreasing
//! schedule of positive reals ε_0 > ε_1 > …, step n produces one interval per
//! sign string j = σ_0…σ_n:
//!
//! ```text
//! X_n^j = ] a - Σ_{i: σ_i=-} ε_i ,  b + Σ_{i: σ_i=+} ε_i [
//! ```
//!
//! Boxes stretch every coordinate with the same sign string. All endpoint
//! sums run in ascending index order so results are deterministic doubles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::index_algebra::{self, SignString};
use crate::{Error, Result, DEFAULT_STEP_CAP};

/// Finite open interval ]lo, hi[. Infinite endpoints are rejected: an
/// unbounded interval is not stretchable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("interval", format!("endpoints must be finite, got ]{lo}, {hi}[")));
        }
        if lo >= hi {
            return Err(Error::invalid("interval", format!("requires lo < hi, got ]{lo}, {hi}[")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    /// Componentwise containment: self ⊆ other.
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }
}

/// Product of open intervals, one per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenBox {
    sides: Vec<Interval>,
}

impl OpenBox {
    pub fn new(sides: Vec<Interval>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::invalid("open box", "dimension must be at least 1"));
        }
        Ok(OpenBox { sides })
    }

    pub fn from_interval(side: Interval) -> Self {
        OpenBox { sides: vec![side] }
    }

    pub fn sides(&self) -> &[Interval] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume(&self) -> f64 {
        self.sides.iter().map(Interval::length).product()
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && self.sides.iter().zip(p).all(|(s, &x)| s.contains_point(x))
    }

    pub fn subset_of(&self, other: &OpenBox) -> bool {
        self.dim() == other.dim() && self.sides.iter().zip(&other.sides).all(|(a, b)| a.subset_of(b))
    }

    pub fn strict_subset_of(&self, other: &OpenBox) -> bool {
        self.subset_of(other) && self != other
    }
}

#[derive(Serialize, Deserialize)]
struct BoxRepr {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Serialize for OpenBox {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        BoxRepr {
            lo: self.sides.iter().map(|s| s.lo).collect(),
            hi: self.sides.iter().map(|s| s.hi).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OpenBox {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = BoxRepr::deserialize(deserializer)?;
        if repr.lo.len() != repr.hi.len() {
            return Err(serde::de::Error::custom("lo and hi must have equal length"));
        }
        let sides = repr
            .lo
            .into_iter()
            .zip(repr.hi)
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        OpenBox::new(sides).map_err(serde::de::Error::custom)
    }
}

/// Finite prefix ε_0 > ε_1 > … > ε_N > 0 of the stretching schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EpsilonSchedule {
    eps: Vec<f64>,
}

impl EpsilonSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::invalid("epsilon schedule", "must contain at least one term"));
        }
        if eps.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::invalid("epsilon schedule", "all terms must be strictly positive and finite"));
        }
        if eps.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::invalid("epsilon schedule", "terms must be strictly decreasing"));
        }
        Ok(EpsilonSchedule { eps })
    }

    pub fn terms(&self) -> &[f64] {
        &self.eps
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }
}

impl<'de> Deserialize<'de> for EpsilonSchedule {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let eps = Vec::<f64>::deserialize(deserializer)?;
        EpsilonSchedule::new(eps).map_err(serde::de::Error::custom)
    }
}

/// Stretches one interval by the sign string j: minus positions widen the
/// left endpoint, plus positions widen the right.
pub fn stretched_interval(base: &Interval, eps: &EpsilonSchedule, j: &SignString) -> Result<Interval> {
    if j.step() >= eps.len() {
        return Err(Error::domain(format!(
            "schedule has {} terms but sign string {j} is at step {}",
            eps.len(),
            j.step()
        )));
    }
    let (plus, minus) = index_algebra::sign_partition(j);
    // Ascending index order keeps the floating-point sums deterministic.
    let left: f64 = minus.iter().map(|&i| eps.terms()[i]).sum();
    let right: f64 = plus.iter().map(|&i| eps.terms()[i]).sum();
    Interval::new(base.lo - left, base.hi + right)
}

/// Applies `stretched_interval` with the same sign string to every side.
pub fn stretched_box(base: &OpenBox, eps: &EpsilonSchedule, j: &SignString) -> Result<OpenBox> {
    let sides = base
        .sides()
        .iter()
        .map(|side| stretched_interval(side, eps, j))
        .collect::<Result<Vec<_>>>()?;
    OpenBox::new(sides)
}

/// The expansion tree: all stretched boxes X_n^j for step(j) ≤ depth.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTree {
    base: OpenBox,
    schedule: EpsilonSchedule,
    depth: usize,
    nodes: BTreeMap<SignString, OpenBox>,
}

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    sign_string: SignString,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TreeRepr {
    base: OpenBox,
    eps: Vec<f64>,
    depth: usize,
    nodes: Vec<NodeRepr>,
}

impl Serialize for ExpansionTree {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TreeRepr {
            base: self.base.clone(),
            eps: self.schedule.terms().to_vec(),
            depth: self.depth,
            nodes: self
                .nodes
                .iter()
                .map(|(j, b)| NodeRepr {
                    sign_string: j.clone(),
                    lo: b.sides().iter().map(Interval::lo).collect(),
                    hi: b.sides().iter().map(Interval::hi).collect(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExpansionTree {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = TreeRepr::deserialize(deserializer)?;
        let schedule = EpsilonSchedule::new(repr.eps).map_err(serde::de::Error::custom)?;
        let mut nodes = BTreeMap::new();
        for node in repr.nodes {
            if node.lo.len() != node.hi.len() {
                return Err(serde::de::Error::custom("node lo and hi must have equal length"));
            }
            let sides = node
                .lo
                .into_iter()
                .zip(node.hi)
                .map(|(lo, hi)| Interval::new(lo, hi))
                .collect::<Result<Vec<_>>>()
                .map_err(serde::de::Error::custom)?;
            let b = OpenBox::new(sides).map_err(serde::de::Error::custom)?;
            nodes.insert(node.sign_string, b);
        }
        Ok(ExpansionTree {
            base: repr.base,
            schedule,
            depth: repr.depth,
            nodes,
        })
    }
}

impl ExpansionTree {
    pub fn base(&self) -> &OpenBox {
        &self.base
    }

    pub fn schedule(&self) -> &EpsilonSchedule {
        &self.schedule
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn nodes(&self) -> &BTreeMap<SignString, OpenBox> {
        &self.nodes
    }

    pub fn node(&self, j: &SignString) -> Option<&OpenBox> {
        self.nodes.get(j)
    }

    /// All nodes at the given step, in enumeration order.
    pub fn level(&self, n: usize) -> impl Iterator<Item = (&SignString, &OpenBox)> {
        self.nodes.iter().filter(move |(j, _)| j.step() == n)
    }

    /// Replaces one node box. Intended for ingesting external tree data and
    /// for fault-injection tests; `build_tree` is the normal constructor.
    pub fn set_node(&mut self, j: SignString, node: OpenBox) -> Result<()> {
        if j.step() > self.depth {
            return Err(Error::domain(format!("node {j} is beyond tree depth {}", self.depth)));
        }
        self.nodes.insert(j, node);
        Ok(())
    }
}

/// Builds the expansion tree of all stretched boxes with step ≤ depth.
pub fn build_tree(base: OpenBox, schedule: EpsilonSchedule, depth: usize) -> Result<ExpansionTree> {
    build_tree_with_cap(base, schedule, depth, DEFAULT_STEP_CAP)
}

pub fn build_tree_with_cap(
    base: OpenBox,
    schedule: EpsilonSchedule,
    depth: usize,
    cap: usize,
) -> Result<ExpansionTree> {
    if depth > cap {
        return Err(Error::StepCapExceeded { requested: depth, cap });
    }
    if depth >= schedule.len() {
        return Err(Error::domain(format!(
            "depth {depth} requires {} schedule terms, got {}",
            depth + 1,
            schedule.len()
        )));
    }
    let mut nodes = BTreeMap::new();
    for n in 0..=depth {
        for j in index_algebra::enumerate_lambda_with_cap(n, cap)? {
            let b = stretched_box(&base, &schedule, &j)?;
            nodes.insert(j, b);
        }
    }
    Ok(ExpansionTree {
        base,
        schedule,
        depth,
        nodes,
    })
}

/// Smallest box containing the union of all level-n nodes.
pub fn union_extent(tree: &ExpansionTree, n: usize) -> Result<OpenBox> {
    if n > tree.depth {
        return Err(Error::domain(format!("step {n} exceeds tree depth {}", tree.depth)));
    }
    let dim = tree.base.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for (_, b) in tree.level(n) {
        for (k, side) in b.sides().iter().enumerate() {
            lo[k] = lo[k].min(side.lo());
            hi[k] = hi[k].max(side.hi());
        }
    }
    let sides = lo
        .into_iter()
        .zip(hi)
        .map(|(l, h)| Interval::new(l, h))
        .collect::<Result<Vec<_>>>()?;
    OpenBox::new(sides)
}

/// Total volume of the disjoint (tagged) union at step n: Σ_j vol(X_n^j).
pub fn coproduct_measure(tree: &ExpansionTree, n: usize) -> Result<f64> {
    if n > tree.depth {
        return Err(Error::domain(format!("step {n} exceeds tree depth {}", tree.depth)));
    }
    Ok(tree.level(n).map(|(_, b)| b.volume()).sum())
}

/// Outcome of one stretching condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub description: String,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Pass/fail per stretching condition, with a counterexample node on failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StretchingReport {
    pub checks: Vec<ConditionCheck>,
}

impl StretchingReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

const LENGTH_TOL: f64 = 1e-12;

fn lengths_match(a: &OpenBox, b: &OpenBox) -> bool {
    a.dim() == b.dim()
        && a.sides().iter().zip(b.sides()).all(|(x, y)| {
            let scale = x.length().abs().max(y.length().abs()).max(1.0);
            (x.length() - y.length()).abs() <= LENGTH_TOL * scale
        })
}

/// Checks the five conditions that make the stretched family a fractal
/// family: cardinality growth, valid spaces, congruent level members, unique
/// parent containment, and child existence.
pub fn verify_stretching_axioms(tree: &ExpansionTree) -> Result<StretchingReport> {
    if tree.depth < 1 {
        return Err(Error::domain("stretching verification requires depth >= 1".to_string()));
    }
    let mut checks = Vec::new();

    // 1. |Λ_n| = 2^{n+1} and strictly growing.
    {
        let mut pass = true;
        let mut witness = None;
        for n in 0..=tree.depth {
            let count = tree.level(n).count();
            if count != 1 << (n + 1) {
                pass = false;
                witness = Some(format!("level {n} has {count} nodes, expected {}", 1 << (n + 1)));
                break;
            }
        }
        checks.push(ConditionCheck {
            condition: 1,
            description: "level cardinalities are 2^(n+1), strictly growing".into(),
            pass,
            witness,
        });
    }

    // 2. Every node is a valid open box of the base dimension.
    {
        let bad = tree
            .nodes
            .iter()
            .find(|(_, b)| b.dim() != tree.base.dim() || b.sides().iter().any(|s| !(s.lo() < s.hi())));
        checks.push(ConditionCheck {
            condition: 2,
            description: "every node is a valid open box".into(),
            pass: bad.is_none(),
            witness: bad.map(|(j, _)| j.to_string()),
        });
    }

    // 3. Within a level all boxes are congruent (equal side lengths).
    {
        let mut pass = true;
        let mut witness = None;
        'outer: for n in 0..=tree.depth {
            let mut level = tree.level(n);
            if let Some((_, first)) = level.next() {
                for (j, b) in level {
                    if !lengths_match(first, b) {
                        pass = false;
                        witness = Some(j.to_string());
                        break 'outer;
                    }
                }
            }
        }
        checks.push(ConditionCheck {
            condition: 3,
            description: "level members share side lengths".into(),
            pass,
            witness,
        });
    }

    // 4. Every non-root node contains exactly one previous-level node, and it
    //    is the parent string's node.
    {
        let mut pass = true;
        let mut witness = None;
        'outer4: for n in 1..=tree.depth {
            for (j, b) in tree.level(n) {
                let containing: Vec<&SignString> =
                    tree.level(n - 1).filter(|(_, p)| p.subset_of(b)).map(|(p, _)| p).collect();
                let expected = index_algebra::parent(j)?;
                if containing.len() != 1 || *containing[0] != expected {
                    pass = false;
                    witness = Some(j.to_string());
                    break 'outer4;
                }
            }
        }
        checks.push(ConditionCheck {
            condition: 4,
            description: "unique parent contained in each node".into(),
            pass,
            witness,
        });
    }

    // 5. Both children exist and contain their parent.
    {
        let mut pass = true;
        let mut witness = None;
        'outer5: for n in 0..tree.depth {
            for (j, b) in tree.level(n) {
                let (cp, cm) = index_algebra::children(j)?;
                for child in [&cp, &cm] {
                    match tree.node(child) {
                        Some(cb) if b.strict_subset_of(cb) => {}
                        _ => {
                            pass = false;
                            witness = Some(child.to_string());
                            break 'outer5;
                        }
                    }
                }
            }
        }
        checks.push(ConditionCheck {
            condition: 5,
            description: "both children exist and strictly contain the parent".into(),
            pass,
            witness,
        });
    }

    Ok(StretchingReport { checks })
}
