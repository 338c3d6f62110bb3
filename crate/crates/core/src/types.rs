//! Shared domain types: the latent graph, the transmission tree, the observed
//! epidemic, the network order and the scalar parameters.
//!
//! All in-memory indices are 0-based; node `0` is the initial infective.
//! File formats and the command line use 1-based labels and convert at the
//! boundary (see [`crate::io`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Undirected simple graph on `m` nodes with a dense adjacency matrix and
/// adjacency lists kept in sync.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    m: usize,
    adj: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    edge_count: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("m", &self.m)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

impl Graph {
    /// Empty graph on `m` nodes.
    pub fn empty(m: usize) -> Self {
        Self {
            m,
            adj: vec![false; m * m],
            neighbors: vec![Vec::new(); m],
            edge_count: 0,
        }
    }

    pub fn complete(m: usize) -> Self {
        let mut g = Self::empty(m);
        for i in 0..m {
            for j in i + 1..m {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from an edge list. Self-loops are rejected and repeated
    /// pairs are collapsed.
    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(m);
        for &(i, j) in edges {
            if i >= m || j >= m {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range for m = {m}")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.m + j]
    }

    /// Sets the pair `{i, j}`; returns `true` if the graph changed.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) -> bool {
        assert!(i != j, "self-loops are not representable");
        if self.has_edge(i, j) == present {
            return false;
        }
        self.adj[i * self.m + j] = present;
        self.adj[j * self.m + i] = present;
        if present {
            self.neighbors[i].push(j);
            self.neighbors[j].push(i);
            self.edge_count += 1;
        } else {
            remove_value(&mut self.neighbors[i], j);
            remove_value(&mut self.neighbors[j], i);
            self.edge_count -= 1;
        }
        true
    }

    /// Neighbours of `i` in no particular order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    /// Present edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).flat_map(move |i| {
            (i + 1..self.m).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    /// Edge count recounted from the adjacency matrix.
    pub fn recount_edges(&self) -> usize {
        self.edges().count()
    }

    pub fn is_connected(&self) -> bool {
        if self.m <= 1 {
            return true;
        }
        let mut sets = DisjointSets::new(self.m);
        let mut components = self.m;
        for (i, j) in self.edges() {
            if sets.union(i, j) {
                components -= 1;
            }
        }
        components == 1
    }

    /// Graph with node `v` renamed to `map[v]`.
    pub fn relabel(&self, map: &[usize]) -> Graph {
        let mut g = Graph::empty(self.m);
        for (i, j) in self.edges() {
            g.set_edge(map[i], map[j], true);
        }
        g
    }
}

fn remove_value(v: &mut Vec<usize>, x: usize) {
    if let Some(k) = v.iter().position(|&y| y == x) {
        v.swap_remove(k);
    }
}

/// Union-find with path halving.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns `false` if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Who-infected-whom, rooted at node 0. `infector[j]` is `None` only for the
/// root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransmissionTree {
    infector: Vec<Option<usize>>,
}

impl TransmissionTree {
    /// Checked constructor: node 0 has no infector and every other node is
    /// infected by a node with a smaller label.
    pub fn new(infector: Vec<Option<usize>>) -> Result<Self> {
        let tree = Self { infector };
        let problems = tree.problems();
        if problems.is_empty() {
            Ok(tree)
        } else {
            Err(Error::Validation(ValidationReport { violations: problems }))
        }
    }

    /// Stores the parent vector as given; use [`validate_dataset`] to audit it.
    pub fn from_infectors_unchecked(infector: Vec<Option<usize>>) -> Self {
        Self { infector }
    }

    pub fn m(&self) -> usize {
        self.infector.len()
    }

    pub fn infector(&self, j: usize) -> Option<usize> {
        self.infector[j]
    }

    pub fn infectors(&self) -> &[Option<usize>] {
        &self.infector
    }

    /// Tree edges as `(infector, infectee)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.infector
            .iter()
            .enumerate()
            .filter_map(|(j, p)| p.map(|i| (i, j)))
    }

    /// Whether `{i, j}` is a tree edge (in either direction).
    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (s, t) = if i < j { (i, j) } else { (j, i) };
        self.infector[t] == Some(s)
    }

    /// Number of nodes each node infected.
    pub fn offspring_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m()];
        for (i, _) in self.edges() {
            counts[i] += 1;
        }
        counts
    }

    fn problems(&self) -> Vec<Violation> {
        let m = self.infector.len();
        let mut out = Vec::new();
        if m == 0 {
            out.push(Violation::Empty);
            return out;
        }
        if let Some(i) = self.infector[0] {
            out.push(Violation::RootHasInfector { infector: i });
        }
        for j in 1..m {
            match self.infector[j] {
                None => out.push(Violation::MissingInfector { node: j }),
                Some(i) if i >= j => out.push(Violation::InfectorNotEarlier { node: j, infector: i }),
                Some(_) => {}
            }
        }
        if out.is_empty() {
            let mut sets = DisjointSets::new(m);
            for (i, j) in self.edges() {
                if !sets.union(i, j) {
                    out.push(Violation::TreeNotSpanning);
                    break;
                }
            }
        }
        out
    }
}

/// Partial observation of the latent graph: pairs absent from the map are
/// unknown.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnownEdges {
    pairs: BTreeMap<(usize, usize), bool>,
}

impl KnownEdges {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, i: usize, j: usize, present: bool) {
        self.pairs.insert(ordered(i, j), present);
    }

    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        self.pairs.get(&ordered(i, j)).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), bool)> + '_ {
        self.pairs.iter().map(|(&k, &v)| (k, v))
    }
}

#[inline]
pub(crate) fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Observed epidemic: shifted infection times, the transmission tree and any
/// known part of the graph. Labels are in infection order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicData {
    pub times: Vec<f64>,
    pub tree: TransmissionTree,
    pub known_edges: KnownEdges,
}

impl EpidemicData {
    /// Validated constructor.
    pub fn new(times: Vec<f64>, tree: TransmissionTree, known_edges: KnownEdges) -> Result<Self> {
        let data = Self { times, tree, known_edges };
        let report = validate_dataset(&data);
        if report.is_pass() {
            Ok(data)
        } else {
            Err(Error::Validation(report))
        }
    }

    pub fn m(&self) -> usize {
        self.times.len()
    }

    /// Time of the last infection.
    pub fn span(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Raw records with 1-based string ids, suitable for re-normalization.
    pub fn to_records(&self) -> Vec<RawRecord> {
        (0..self.m())
            .map(|j| RawRecord {
                id: (j + 1).to_string(),
                time: self.times[j],
                infector: self.tree.infector(j).map(|i| (i + 1).to_string()),
            })
            .collect()
    }
}

/// A single problem found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    LengthMismatch { times: usize, tree: usize },
    FirstTimeNotZero { time: f64 },
    TimesNotIncreasing { index: usize },
    NonFiniteTime { index: usize },
    RootHasInfector { infector: usize },
    MissingInfector { node: usize },
    InfectorNotEarlier { node: usize, infector: usize },
    TreeNotSpanning,
    KnownEdgeOutOfRange { i: usize, j: usize },
    TreeEdgeMarkedAbsent { infector: usize, infectee: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "dataset is empty"),
            Violation::LengthMismatch { times, tree } => {
                write!(f, "{times} infection times but the tree has {tree} nodes")
            }
            Violation::FirstTimeNotZero { time } => write!(f, "first infection time is {time}, expected 0"),
            Violation::TimesNotIncreasing { index } => {
                write!(f, "infection times not strictly increasing at node {}", index + 1)
            }
            Violation::NonFiniteTime { index } => write!(f, "non-finite time at node {}", index + 1),
            Violation::RootHasInfector { infector } => {
                write!(f, "node 1 has infector {}", infector + 1)
            }
            Violation::MissingInfector { node } => write!(f, "node {} has no infector", node + 1),
            Violation::InfectorNotEarlier { node, infector } => write!(
                f,
                "node {} is infected by node {} which is not earlier",
                node + 1,
                infector + 1
            ),
            Violation::TreeNotSpanning => write!(f, "transmission tree is not a spanning tree"),
            Violation::KnownEdgeOutOfRange { i, j } => {
                write!(f, "known edge ({}, {}) is out of range", i + 1, j + 1)
            }
            Violation::TreeEdgeMarkedAbsent { infector, infectee } => write!(
                f,
                "tree edge {} -> {} is marked absent in the known edges",
                infector + 1,
                infectee + 1
            ),
        }
    }
}

/// Outcome of [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "pass");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks ordering of times, the tree structure and consistency of the known
/// edges with the tree. Never fails; problems are collected in the report.
pub fn validate_dataset(d: &EpidemicData) -> ValidationReport {
    let mut violations = Vec::new();
    let m = d.times.len();
    if m == 0 {
        violations.push(Violation::Empty);
        return ValidationReport { violations };
    }
    if d.tree.m() != m {
        violations.push(Violation::LengthMismatch { times: m, tree: d.tree.m() });
    }
    for (k, t) in d.times.iter().enumerate() {
        if !t.is_finite() {
            violations.push(Violation::NonFiniteTime { index: k });
        }
    }
    if d.times[0] != 0.0 {
        violations.push(Violation::FirstTimeNotZero { time: d.times[0] });
    }
    for k in 1..m {
        if !(d.times[k] > d.times[k - 1]) {
            violations.push(Violation::TimesNotIncreasing { index: k });
        }
    }
    violations.extend(d.tree.problems());
    for ((i, j), present) in d.known_edges.iter() {
        if i >= m || j >= m || i == j {
            violations.push(Violation::KnownEdgeOutOfRange { i, j });
        } else if !present && j < d.tree.m() && d.tree.infector(j) == Some(i) {
            violations.push(Violation::TreeEdgeMarkedAbsent { infector: i, infectee: j });
        }
    }
    ValidationReport { violations }
}

/// One row of raw epidemic input: an arbitrary id, an absolute time and the
/// id of the infector (`None` for the initial case).
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub id: String,
    pub time: f64,
    pub infector: Option<String>,
}

/// Sorts records by time, relabels them `0..m` in that order, shifts times so
/// the first infection is at 0 and remaps infector references.
pub fn normalize_and_relabel(raw: &[RawRecord]) -> Result<EpidemicData> {
    if raw.is_empty() {
        return Err(Error::invalid("no records"));
    }
    let roots = raw.iter().filter(|r| r.infector.is_none()).count();
    if roots != 1 {
        return Err(Error::invalid(format!("expected exactly one record without an infector, found {roots}")));
    }
    if let Some(r) = raw.iter().find(|r| !r.time.is_finite()) {
        return Err(Error::invalid(format!("non-finite infection time for id {:?}", r.id)));
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[a].time.total_cmp(&raw[b].time));
    for w in order.windows(2) {
        if raw[w[0]].time == raw[w[1]].time {
            return Err(Error::invalid(format!(
                "ids {:?} and {:?} share infection time {}",
                raw[w[0]].id, raw[w[1]].id, raw[w[0]].time
            )));
        }
    }
    let mut label: HashMap<&str, usize> = HashMap::with_capacity(raw.len());
    for (new, &old) in order.iter().enumerate() {
        if label.insert(raw[old].id.as_str(), new).is_some() {
            return Err(Error::invalid(format!("duplicate id {:?}", raw[old].id)));
        }
    }
    let origin = raw[order[0]].time;
    let mut times = Vec::with_capacity(raw.len());
    let mut infector = Vec::with_capacity(raw.len());
    for &old in &order {
        let r = &raw[old];
        times.push(r.time - origin);
        infector.push(match &r.infector {
            None => None,
            Some(id) => Some(*label.get(id.as_str()).ok_or_else(|| {
                Error::invalid(format!("id {:?} references unknown infector {:?}", r.id, id))
            })?),
        });
    }
    EpidemicData::new(times, TransmissionTree::from_infectors_unchecked(infector), KnownEdges::new())
}

/// Order in which nodes entered the network: `order[k]` is the node that
/// entered `k`-th.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl NetworkOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut position = vec![usize::MAX; m];
        for (k, &v) in order.iter().enumerate() {
            if v >= m || position[v] != usize::MAX {
                return Err(Error::invalid(format!("{order:?} is not a permutation of 0..{m}")));
            }
            position[v] = k;
        }
        Ok(Self { order, position })
    }

    pub fn identity(m: usize) -> Self {
        Self { order: (0..m).collect(), position: (0..m).collect() }
    }

    pub fn m(&self) -> usize {
        self.order.len()
    }

    /// Node that entered at position `k`.
    #[inline]
    pub fn node_at(&self, k: usize) -> usize {
        self.order[k]
    }

    /// Entry position of `node`.
    #[inline]
    pub fn position_of(&self, node: usize) -> usize {
        self.position[node]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Takes the element at position `from` out and reinserts it at `to`.
    pub fn insert_move(&mut self, from: usize, to: usize) {
        if from == to {
            return;
        }
        let v = self.order.remove(from);
        self.order.insert(to, v);
        let (lo, hi) = if from < to { (from, to) } else { (to, from) };
        for k in lo..=hi {
            self.position[self.order[k]] = k;
        }
    }
}

/// Scalar model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamState {
    /// Infection rate per edge per unit time.
    pub beta: f64,
    /// Censored-Poisson parameter for the number of new edges.
    pub mu: f64,
    /// Mixing weight between degree and recency attachment.
    pub gamma: f64,
}

impl ParamState {
    pub fn new(beta: f64, mu: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0) || !(mu > 0.0) || !(0.0..=1.0).contains(&gamma) {
            return Err(Error::invalid(format!(
                "parameters out of range: beta = {beta}, mu = {mu}, gamma = {gamma}"
            )));
        }
        Ok(Self { beta, mu, gamma })
    }
}

/// Gamma(shape, rate) priors for the infection rate and the edge-count
/// parameter; the mixing weight is uniform on [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Priors {
    pub a_beta: f64,
    pub b_beta: f64,
    pub a_mu: f64,
    pub b_mu: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self { a_beta: 1.0, b_beta: 0.001, a_mu: 1.0, b_mu: 0.001 }
    }
}

impl Priors {
    pub fn new(a_beta: f64, b_beta: f64, a_mu: f64, b_mu: f64) -> Result<Self> {
        let p = Self { a_beta, b_beta, a_mu, b_mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.a_beta, self.b_beta, self.a_mu, self.b_mu].iter().all(|&v| v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid(format!("prior hyperparameters must be positive: {self:?}")))
        }
    }
}

/// Bernoulli random graph baseline: edge probability and its Beta prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrgParams {
    pub p: f64,
    pub a_p: f64,
    pub b_p: f64,
}

impl BrgParams {
    pub fn new(p: f64, a_p: f64, b_p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) || !(a_p > 0.0) || !(b_p > 0.0) {
            return Err(Error::invalid(format!("invalid BRG parameters p = {p}, a = {a_p}, b = {b_p}")));
        }
        Ok(Self { p, a_p, b_p })
    }
}

impl Default for BrgParams {
    fn default() -> Self {
        Self { p: 0.5, a_p: 1.0, b_p: 1.0 }
    }
}

/// What happened when the node at entry position `step` joined the network.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    /// Entry position of the joining node (0-based, so the first recorded
    /// step is 2).
    pub step: usize,
    /// Number of new edges drawn from the censored Poisson.
    pub new_edges: usize,
    /// Entry positions chosen, in draw order.
    pub selected: Vec<usize>,
    /// Attachment weights over positions `0..step` at the time of the draw.
    pub weights: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, time: f64, infector: Option<&str>) -> RawRecord {
        RawRecord { id: id.into(), time, infector: infector.map(Into::into) }
    }

    fn tree(parents: &[Option<usize>]) -> TransmissionTree {
        TransmissionTree::from_infectors_unchecked(parents.to_vec())
    }

    #[test]
    fn minimal_dataset_passes() {
        let d = EpidemicData {
            times: vec![0.0, 1.0, 2.0],
            tree: tree(&[None, Some(0), Some(0)]),
            known_edges: KnownEdges::new(),
        };
        assert!(validate_dataset(&d).is_pass());
    }

    #[test]
    fn decreasing_times_fail() {
        let d = EpidemicData {
            times: vec![0.0, 2.0, 1.0],
            tree: tree(&[None, Some(0), Some(0)]),
            known_edges: KnownEdges::new(),
        };
        let r = validate_dataset(&d);
        assert_eq!(r.violations, vec![Violation::TimesNotIncreasing { index: 2 }]);
    }

    #[test]
    fn tree_edge_marked_absent_fails() {
        let mut known = KnownEdges::new();
        known.insert(1, 0, false);
        let d = EpidemicData {
            times: vec![0.0, 1.0, 2.0],
            tree: tree(&[None, Some(0), Some(0)]),
            known_edges: known,
        };
        let r = validate_dataset(&d);
        assert_eq!(r.violations, vec![Violation::TreeEdgeMarkedAbsent { infector: 0, infectee: 1 }]);
    }

    #[test]
    fn late_infector_fails() {
        let d = EpidemicData {
            times: vec![0.0, 1.0, 2.0],
            tree: tree(&[None, Some(2), Some(0)]),
            known_edges: KnownEdges::new(),
        };
        let r = validate_dataset(&d);
        assert!(r.violations.contains(&Violation::InfectorNotEarlier { node: 1, infector: 2 }));
    }

    #[test]
    fn normalize_shifts_times() {
        let d = normalize_and_relabel(&[rec("a", 5.0, None), rec("b", 7.5, Some("a"))]).unwrap();
        assert_eq!(d.m(), 2);
        assert_eq!(d.times, vec![0.0, 2.5]);
        assert_eq!(d.tree.infector(1), Some(0));
    }

    #[test]
    fn normalize_sorts_by_time() {
        let d = normalize_and_relabel(&[
            rec("c", 9.0, Some("a")),
            rec("a", 1.0, None),
            rec("b", 4.0, Some("a")),
        ])
        .unwrap();
        assert_eq!(d.times, vec![0.0, 3.0, 8.0]);
        assert_eq!(d.tree.infectors(), &[None, Some(0), Some(0)]);
    }

    #[test]
    fn normalize_rejects_ties_and_bad_refs() {
        assert!(normalize_and_relabel(&[
            rec("a", 1.0, None),
            rec("b", 7.5, Some("a")),
            rec("c", 7.5, Some("a")),
        ])
        .is_err());
        assert!(normalize_and_relabel(&[rec("a", 1.0, None), rec("b", 2.0, Some("z"))]).is_err());
        assert!(normalize_and_relabel(&[rec("a", 1.0, None), rec("b", 2.0, None)]).is_err());
    }

    #[test]
    fn normalize_is_idempotent() {
        let d = normalize_and_relabel(&[
            rec("x", 3.0, None),
            rec("y", 3.5, Some("x")),
            rec("z", 4.25, Some("y")),
            rec("w", 6.0, Some("x")),
        ])
        .unwrap();
        let again = normalize_and_relabel(&d.to_records()).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn graph_symmetry_and_counts() {
        let mut g = Graph::empty(4);
        assert!(g.set_edge(0, 1, true));
        assert!(!g.set_edge(1, 0, true));
        g.set_edge(2, 3, true);
        assert!(g.has_edge(1, 0) && g.has_edge(3, 2));
        assert_eq!(g.edge_count(), 2);
        assert!(!g.is_connected());
        g.set_edge(1, 2, true);
        assert!(g.is_connected());
        g.set_edge(0, 1, false);
        assert_eq!(g.edge_count(), g.recount_edges());
        assert!(!g.has_edge(1, 0));
    }

    #[test]
    fn insertion_move_matches_definition() {
        // (1,2,3,4,5) with i = 2, j = 4 (1-based) gives (1,3,4,2,5).
        let mut s = NetworkOrder::new(vec![1, 2, 3, 4, 5].into_iter().map(|v| v - 1).collect()).unwrap();
        s.insert_move(1, 3);
        assert_eq!(s.as_slice(), &[0, 2, 3, 1, 4]);
        for k in 0..5 {
            assert_eq!(s.position_of(s.node_at(k)), k);
        }
    }

    #[test]
    fn network_order_rejects_non_permutation() {
        assert!(NetworkOrder::new(vec![0, 0, 1]).is_err());
        assert!(NetworkOrder::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn tree_must_span() {
        assert!(TransmissionTree::new(vec![None, Some(0), Some(1)]).is_ok());
        assert!(TransmissionTree::new(vec![None, None, Some(1)]).is_err());
    }
}
