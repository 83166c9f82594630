//! The keyed unicast network: a DAG multigraph with a source `S`, a key node
//! `K` and a terminal `T`, all edges of unit capacity.
//!
//! Edges are identified by their position in the edge list, so parallel edges
//! are simply repeated entries.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Source,
    Key,
    Terminal,
}

impl Role {
    fn keyword(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Key => "key",
            Role::Terminal => "terminal",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("cycle detected through node {0}")]
    Cycle(String),
    #[error("duplicate {0} declaration")]
    DuplicateRole(Role),
    #[error("missing {0} declaration")]
    MissingRole(Role),
    #[error("{0} and {1} must be distinct nodes, both are {2}")]
    RoleConflict(Role, Role, String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("invalid node id {0:?}")]
    InvalidId(String),
    #[error("unrecognised statement {0:?}")]
    Syntax(String),
    #[error("empty augmentation")]
    EmptyAugmentation,
}

/// A [`NetworkError`] tagged with the 1-based line it was raised on, when known.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}{kind}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ParseError {
    pub line: Option<usize>,
    pub kind: NetworkError,
}

impl ParseError {
    fn at(line: usize, kind: NetworkError) -> Self {
        Self {
            line: Some(line),
            kind,
        }
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Validated keyed unicast network. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRepr", into = "NetworkRepr")]
pub struct Network {
    names: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    key: usize,
    terminal: usize,
    topo: Vec<usize>,
}

/// Name-based wire form used in code files.
#[derive(Serialize, Deserialize)]
struct NetworkRepr {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    source: String,
    key: String,
    terminal: String,
}

impl From<Network> for NetworkRepr {
    fn from(n: Network) -> Self {
        NetworkRepr {
            edges: n
                .edges
                .iter()
                .map(|e| (n.names[e.tail].clone(), n.names[e.head].clone()))
                .collect(),
            source: n.names[n.source].clone(),
            key: n.names[n.key].clone(),
            terminal: n.names[n.terminal].clone(),
            nodes: n.names,
        }
    }
}

impl TryFrom<NetworkRepr> for Network {
    type Error = NetworkError;

    fn try_from(r: NetworkRepr) -> Result<Self, Self::Error> {
        let mut index = HashMap::new();
        for (i, name) in r.nodes.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return Err(NetworkError::DuplicateNode(name.clone()));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| NetworkError::UnknownNode(name.to_string()))
        };
        let edges = r
            .edges
            .iter()
            .map(|(t, h)| {
                Ok(Edge {
                    tail: lookup(t)?,
                    head: lookup(h)?,
                })
            })
            .collect::<Result<Vec<_>, NetworkError>>()?;
        let (s, k, t) = (lookup(&r.source)?, lookup(&r.key)?, lookup(&r.terminal)?);
        Network::new(r.nodes.clone(), edges, s, k, t)
    }
}

impl Network {
    /// Builds a network from node names and edges given as node indices.
    pub fn new(
        names: Vec<String>,
        edges: Vec<Edge>,
        source: usize,
        key: usize,
        terminal: usize,
    ) -> Result<Self, NetworkError> {
        let n = names.len();
        for &role in &[source, key, terminal] {
            if role >= n {
                return Err(NetworkError::UnknownNode(format!("#{role}")));
            }
        }
        for e in &edges {
            if e.tail >= n || e.head >= n {
                return Err(NetworkError::UnknownNode(format!(
                    "#{}",
                    e.tail.max(e.head)
                )));
            }
        }
        let pairs = [
            (Role::Source, source, Role::Key, key),
            (Role::Source, source, Role::Terminal, terminal),
            (Role::Key, key, Role::Terminal, terminal),
        ];
        for (ra, a, rb, b) in pairs {
            if a == b {
                return Err(NetworkError::RoleConflict(ra, rb, names[a].clone()));
            }
        }
        let topo = topological_order(n, &edges).map_err(|v| NetworkError::Cycle(names[v].clone()))?;
        Ok(Self {
            names,
            edges,
            source,
            key,
            terminal,
            topo,
        })
    }

    /// Parses the line-oriented network format:
    ///
    /// ```text
    /// # comment
    /// node <id>
    /// edge <tail> <head>
    /// source <id>
    /// key <id>
    /// terminal <id>
    /// ```
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_lines = Vec::new();
        let mut roles: [Option<(String, usize)>; 3] = [None, None, None];

        let mut declare = |id: &str, names: &mut Vec<String>| -> usize {
            *index.entry(id.to_string()).or_insert_with(|| {
                names.push(id.to_string());
                names.len() - 1
            })
        };

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let words: Vec<&str> = line.split_whitespace().collect();
            for w in &words[1..] {
                if !valid_id(w) {
                    return Err(ParseError::at(lineno, NetworkError::InvalidId(w.to_string())));
                }
            }
            match words.as_slice() {
                ["node", id] => {
                    declare(id, &mut names);
                }
                ["edge", tail, head] => {
                    let t = declare(tail, &mut names);
                    let h = declare(head, &mut names);
                    edges.push(Edge { tail: t, head: h });
                    edge_lines.push(lineno);
                }
                [kw @ ("source" | "key" | "terminal"), id] => {
                    let (slot, role) = match *kw {
                        "source" => (0, Role::Source),
                        "key" => (1, Role::Key),
                        _ => (2, Role::Terminal),
                    };
                    if roles[slot].is_some() {
                        return Err(ParseError::at(lineno, NetworkError::DuplicateRole(role)));
                    }
                    roles[slot] = Some((id.to_string(), lineno));
                }
                _ => return Err(ParseError::at(lineno, NetworkError::Syntax(line.to_string()))),
            }
        }

        let mut resolved = [0usize; 3];
        for (slot, role) in [Role::Source, Role::Key, Role::Terminal].into_iter().enumerate() {
            let Some((id, lineno)) = &roles[slot] else {
                return Err(ParseError {
                    line: None,
                    kind: NetworkError::MissingRole(role),
                });
            };
            resolved[slot] = match names.iter().position(|n| n == id) {
                Some(v) => v,
                None => {
                    return Err(ParseError::at(*lineno, NetworkError::UnknownNode(id.clone())))
                }
            };
        }

        let n = names.len();
        if let Err(stuck) = topological_order(n, &edges) {
            let line = cycle_edge(n, &edges, stuck).map(|e| edge_lines[e]);
            return Err(ParseError {
                line,
                kind: NetworkError::Cycle(names[stuck].clone()),
            });
        }

        Network::new(names, edges, resolved[0], resolved[1], resolved[2]).map_err(|kind| {
            let line = match &kind {
                NetworkError::RoleConflict(a, _, _) => roles[match a {
                    Role::Source => 0,
                    Role::Key => 1,
                    Role::Terminal => 2,
                }]
                .as_ref()
                .map(|(_, l)| *l),
                _ => None,
            };
            ParseError { line, kind }
        })
    }

    /// Renders the network in the text format accepted by [`Network::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            let _ = writeln!(out, "node {name}");
        }
        for e in &self.edges {
            let _ = writeln!(out, "edge {} {}", self.names[e.tail], self.names[e.head]);
        }
        let _ = writeln!(out, "source {}", self.names[self.source]);
        let _ = writeln!(out, "key {}", self.names[self.key]);
        let _ = writeln!(out, "terminal {}", self.names[self.terminal]);
        out
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn node(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn key(&self) -> usize {
        self.key
    }

    pub fn terminal(&self) -> usize {
        self.terminal
    }

    /// Nodes in topological order, ties broken by declaration order.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    /// Indices of edges entering `v`, ascending.
    pub fn in_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].head == v).collect()
    }

    /// Indices of edges leaving `v`, ascending.
    pub fn out_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].tail == v).collect()
    }

    pub fn with_edge(&self, edge: Edge) -> Result<Network, NetworkError> {
        let mut edges = self.edges.clone();
        edges.push(edge);
        Network::new(self.names.clone(), edges, self.source, self.key, self.terminal)
    }

    /// Maximum number of edge-disjoint paths from the set `sources` to `sink`,
    /// i.e. the size of a minimum cut separating them.
    pub fn mincut(&self, sources: &[usize], sink: usize) -> usize {
        if sources.contains(&sink) {
            return 0;
        }
        let n = self.names.len();
        let mut flow = FlowGraph::new(n + 1);
        let super_source = n;
        for e in &self.edges {
            flow.add_arc(e.tail, e.head, 1);
        }
        for &s in sources {
            flow.add_arc(super_source, s, usize::MAX / 4);
        }
        flow.max_flow(super_source, sink)
    }

    pub fn cut_capacities(&self) -> CutCapacities {
        let (s, k, t) = (self.source, self.key, self.terminal);
        CutCapacities {
            c_ks: self.mincut(&[k], s),
            c_kt: self.mincut(&[k], t),
            c_st: self.mincut(&[s], t),
            c_kst: self.mincut(&[k, s], t),
        }
    }

    /// Random DAG with `nodes` nodes and `edges` edges (parallel edges allowed).
    ///
    /// Nodes are named `v0..`; a random hidden order fixes the edge directions,
    /// and the roles are three distinct nodes placed so that `K` precedes `S`
    /// which precedes `T` in that order.
    pub fn random<R: Rng + ?Sized>(nodes: usize, edges: usize, rng: &mut R) -> Network {
        assert!(nodes >= 3, "need at least three nodes for K, S, T");
        let mut order: Vec<usize> = (0..nodes).collect();
        order.shuffle(rng);
        let mut list = Vec::with_capacity(edges);
        for _ in 0..edges {
            let a = rng.gen_range(0..nodes);
            let mut b = rng.gen_range(0..nodes - 1);
            if b >= a {
                b += 1;
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            list.push(Edge {
                tail: order[lo],
                head: order[hi],
            });
        }
        let mut picks = rand::seq::index::sample(rng, nodes, 3).into_vec();
        picks.sort_unstable();
        let names = (0..nodes).map(|i| format!("v{i}")).collect();
        Network::new(names, list, order[picks[1]], order[picks[0]], order[picks[2]])
            .expect("edges follow a fixed order")
    }

    /// Adds the auxiliary terminal `T*` fed by `rate + keys` parallel edges
    /// from the source.
    pub fn augment_star(&self, rate: usize, keys: usize) -> Result<AugmentedNetwork, NetworkError> {
        let width = rate + keys;
        if width == 0 {
            return Err(NetworkError::EmptyAugmentation);
        }
        let mut name = String::from("T_star");
        while self.names.contains(&name) {
            name.push('_');
        }
        let mut names = self.names.clone();
        names.push(name);
        let star = names.len() - 1;
        let mut edges = self.edges.clone();
        let first = edges.len();
        edges.extend((0..width).map(|_| Edge {
            tail: self.source,
            head: star,
        }));
        let augmented = Network::new(names, edges, self.source, self.key, self.terminal)?;
        Ok(AugmentedNetwork {
            base: self.clone(),
            augmented,
            star_terminal: star,
            star_edges: first..first + width,
        })
    }
}

/// Kahn's algorithm with a min-heap on node index. On failure returns a node
/// that lies on or downstream of a cycle.
fn topological_order(n: usize, edges: &[Edge]) -> Result<Vec<usize>, usize> {
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        indegree[e.head] += 1;
        out[e.tail].push(e.head);
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.insert(w);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&v| indegree[v] > 0).expect("some node is stuck"))
    }
}

/// Finds an edge on a cycle reachable backwards from `start`, preferring the
/// lowest edge index on that cycle.
fn cycle_edge(n: usize, edges: &[Edge], start: usize) -> Option<usize> {
    // Nodes Kahn's algorithm cannot release; each has a stuck predecessor,
    // so walking backwards from one must revisit a node.
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        indegree[e.head] += 1;
        out[e.tail].push(e.head);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    while let Some(v) = queue.pop_front() {
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    let stuck: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
    let mut seen_at = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut v = start;
    loop {
        if seen_at[v] != usize::MAX {
            return path[seen_at[v]..].iter().copied().min();
        }
        seen_at[v] = path.len();
        let e = edges.iter().position(|e| e.head == v && stuck[e.tail])?;
        path.push(e);
        v = edges[e].tail;
    }
}

/// Residual graph for unit-capacity max-flow by BFS augmenting paths.
struct FlowGraph {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<usize>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_arc(&mut self, u: usize, v: usize, c: usize) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut via = vec![usize::MAX; n];
            let mut visited = vec![false; n];
            visited[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if self.cap[a] > 0 && !visited[v] {
                        visited[v] = true;
                        via[v] = a;
                        queue.push_back(v);
                    }
                }
            }
            if !visited[t] {
                return total;
            }
            let mut bottleneck = usize::MAX;
            let mut v = t;
            while v != s {
                let a = via[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = via[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck;
        }
    }
}

/// The four cut values that determine the capacity-security region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CutCapacities {
    /// min-cut from `K` to `S`
    pub c_ks: usize,
    /// min-cut from `K` to `T`
    pub c_kt: usize,
    /// min-cut from `S` to `T`
    pub c_st: usize,
    /// min-cut from `{K, S}` to `T`
    pub c_kst: usize,
}

impl CutCapacities {
    pub fn new(c_ks: usize, c_kt: usize, c_st: usize, c_kst: usize) -> Self {
        Self {
            c_ks,
            c_kt,
            c_st,
            c_kst,
        }
    }
}

/// `G*`: the base network plus `T*` and `R + z` parallel edges `S → T*`.
///
/// The star edges are appended after the base edges, so base edge indices are
/// unchanged in the augmented network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedNetwork {
    base: Network,
    augmented: Network,
    star_terminal: usize,
    star_edges: std::ops::Range<usize>,
}

impl AugmentedNetwork {
    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn network(&self) -> &Network {
        &self.augmented
    }

    pub fn star_terminal(&self) -> usize {
        self.star_terminal
    }

    pub fn star_edges(&self) -> std::ops::Range<usize> {
        self.star_edges.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const LINE: &str = "edge K S\nedge S T\nsource S\nkey K\nterminal T\n";

    /// Smallest number of edges whose removal leaves no `sources → sink` path.
    fn brute_force_cut(net: &Network, sources: &[usize], sink: usize) -> usize {
        let m = net.edge_count();
        assert!(m <= 16);
        let reachable = |removed: u32| -> bool {
            let mut seen = vec![false; net.node_count()];
            let mut stack: Vec<usize> = sources.to_vec();
            for &s in sources {
                seen[s] = true;
            }
            while let Some(u) = stack.pop() {
                for (i, e) in net.edges().iter().enumerate() {
                    if removed & (1 << i) == 0 && e.tail == u && !seen[e.head] {
                        seen[e.head] = true;
                        stack.push(e.head);
                    }
                }
            }
            seen[sink]
        };
        (0u32..1 << m)
            .filter(|&mask| !reachable(mask))
            .map(|mask| mask.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn parses_line() {
        let net = Network::parse(LINE).unwrap();
        assert_eq!(net.edge_count(), 2);
        assert_eq!(net.node_count(), 3);
        let names: Vec<&str> = net.topo_order().iter().map(|&v| net.name(v)).collect();
        assert_eq!(names, ["K", "S", "T"]);
        assert_eq!(net.cut_capacities(), CutCapacities::new(1, 1, 1, 1));
        assert_eq!(net.mincut(&[net.key()], net.terminal()), 1);
    }

    #[test]
    fn parse_errors() {
        let cases = [
            ("edge S S\nedge K S\nsource S\nkey K\nterminal T\nnode T", Some(1)),
            ("edge K S\nedge S T\nedge T K\nsource S\nkey K\nterminal T", Some(1)),
            ("edge K S\nsource S\nsource K\nkey K\nterminal S", Some(3)),
            ("edge K S\nsource S\nkey S\nterminal K", Some(2)),
            ("edge K S\nsource S\nkey K\nterminal X", Some(4)),
            ("edge K S\nsource S\nkey K", None),
            ("edge K S-1\n", Some(1)),
            ("link K S\n", Some(1)),
        ];
        for (text, line) in cases {
            let err = Network::parse(text).unwrap_err();
            assert_eq!(err.line, line, "{text:?} -> {err}");
        }
        assert!(matches!(
            Network::parse(cases[0].0).unwrap_err().kind,
            NetworkError::Cycle(_)
        ));
        assert!(matches!(
            Network::parse(cases[3].0).unwrap_err().kind,
            NetworkError::RoleConflict(Role::Source, Role::Key, _)
        ));
    }

    #[test]
    fn comments_and_order_insensitivity() {
        let a = Network::parse("# header\nterminal T\nkey K # inline\n\nsource S\nedge K S\nedge S T\n")
            .unwrap();
        let b = Network::parse(LINE).unwrap();
        assert_eq!(a.cut_capacities(), b.cut_capacities());
        assert_eq!(a.edge_count(), 2);
    }

    #[test]
    fn diamond_topo_order() {
        let net = Network::parse(
            "edge K a\nedge K b\nedge a S\nedge b S\nedge S T\nsource S\nkey K\nterminal T",
        )
        .unwrap();
        let order = net.topo_order();
        assert_eq!(order.first(), Some(&net.key()));
        assert_eq!(order[order.len() - 2], net.source());
    }

    #[test]
    fn parallel_edges_add_up() {
        let net = Network::parse("edge S T\nedge S T\nnode K\nsource S\nkey K\nterminal T").unwrap();
        assert_eq!(net.mincut(&[net.source()], net.terminal()), 2);
        // K and S feed T over disjoint paths, no K→S path
        let net = Network::parse("edge K a\nedge a T\nedge S T\nsource S\nkey K\nterminal T").unwrap();
        let caps = net.cut_capacities();
        assert_eq!(caps.c_ks, 0);
        assert_eq!(caps, CutCapacities::new(0, 1, 1, 2));
    }

    #[test]
    fn butterfly_fixture() {
        let text = include_str!("../../../docs/examples/butterfly.net");
        let net = Network::parse(text).unwrap();
        assert_eq!(net.node_count(), 7);
        assert_eq!(net.edge_count(), 10);
        let (k, s, t) = (net.key(), net.source(), net.terminal());
        let brute = CutCapacities::new(
            brute_force_cut(&net, &[k], s),
            brute_force_cut(&net, &[k], t),
            brute_force_cut(&net, &[s], t),
            brute_force_cut(&net, &[k, s], t),
        );
        assert_eq!(brute, CutCapacities::new(2, 2, 2, 3));
        assert_eq!(net.cut_capacities(), brute);
    }

    #[test]
    fn star_augmentation_cuts() {
        let net = Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap();
        let caps = net.cut_capacities();
        for (r, z) in [(1, 0), (1, 1), (2, 1), (1, 2), (3, 4)] {
            let aug = net.augment_star(r, z).unwrap();
            let g = aug.network();
            let (k, s, t, ts) = (g.key(), g.source(), g.terminal(), aug.star_terminal());
            assert_eq!(g.mincut(&[s], ts), r + z);
            assert_eq!(g.mincut(&[k], ts), (r + z).min(caps.c_ks));
            assert_eq!(g.mincut(&[k, s], t), caps.c_kst);
            assert_eq!(g.mincut(&[k, s], ts), r + z);
            assert_eq!(g.mincut(&[k], t), caps.c_kt);
            assert_eq!(g.mincut(&[s], t), caps.c_st);
            assert_eq!(aug.base(), &net);
            assert_eq!(aug.star_edges().len(), r + z);
            for e in aug.star_edges() {
                assert_eq!(g.edge(e), Edge { tail: s, head: ts });
            }
        }
        assert_eq!(net.augment_star(0, 0).unwrap_err(), NetworkError::EmptyAugmentation);
    }

    #[test]
    fn json_roundtrip() {
        let net = Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap();
        let json = serde_json::to_string(&net).unwrap();
        let back: Network = serde_json::from_str(&json).unwrap();
        assert_eq!(back, net);
        assert_eq!(Network::parse(&net.to_text()).unwrap(), net);
    }

    proptest! {
        #[test]
        fn mincut_matches_brute_force(seed in any::<u64>(), nodes in 3usize..7, edges in 0usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Network::random(nodes, edges, &mut rng);
            let (k, s, t) = (net.key(), net.source(), net.terminal());
            for (src, sink) in [(vec![k], s), (vec![k], t), (vec![s], t), (vec![k, s], t)] {
                prop_assert_eq!(net.mincut(&src, sink), brute_force_cut(&net, &src, sink));
            }
            let caps = net.cut_capacities();
            prop_assert!(caps.c_kst >= caps.c_kt.max(caps.c_st));
            prop_assert!(caps.c_kst <= caps.c_kt + caps.c_st);
        }

        #[test]
        fn topo_order_respects_edges(seed in any::<u64>(), nodes in 3usize..9, edges in 0usize..14) {
            let net = Network::random(nodes, edges, &mut ChaCha8Rng::seed_from_u64(seed));
            let order = net.topo_order();
            let mut pos = vec![usize::MAX; net.node_count()];
            for (i, &v) in order.iter().enumerate() {
                prop_assert_eq!(pos[v], usize::MAX);
                pos[v] = i;
            }
            prop_assert!(pos.iter().all(|&p| p != usize::MAX));
            for e in net.edges() {
                prop_assert!(pos[e.tail] < pos[e.head]);
            }
        }

        #[test]
        fn adding_edges_never_shrinks_cuts(seed in any::<u64>(), nodes in 3usize..7, edges in 0usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Network::random(nodes, edges, &mut rng);
            let order = net.topo_order().to_vec();
            let i = rng.gen_range(0..nodes - 1);
            let j = rng.gen_range(i + 1..nodes);
            let bigger = net.with_edge(Edge { tail: order[i], head: order[j] }).unwrap();
            for u in 0..nodes {
                for v in 0..nodes {
                    if u != v {
                        prop_assert!(bigger.mincut(&[u], v) >= net.mincut(&[u], v));
                    }
                }
            }
        }
    }
}
