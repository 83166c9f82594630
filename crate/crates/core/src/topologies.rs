//! Exhaustive enumeration of small keyed DAGs.
//!
//! Nodes `K`, `S`, `T` are labelled; the remaining nodes are anonymous, so
//! two edge multisets that differ only by a relabelling of anonymous nodes
//! describe the same topology and are emitted once.

use crate::network::{Edge, Network};

/// All weakly connected DAG multigraphs with between 1 and `max_edges` edges
/// and at most `max_nodes` nodes, containing distinct `K`, `S` and `T`.
///
/// The output order is deterministic: by node count, then edge count, then
/// lexicographically by edge list.
pub fn connected_dags(max_edges: usize, max_nodes: usize) -> Vec<Network> {
    let mut out = Vec::new();
    for nodes in 3..=max_nodes.min(max_edges + 1) {
        let perms = free_permutations(nodes);
        let pairs: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|u| (0..nodes).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        for edges in nodes - 1..=max_edges {
            let mut choice = vec![0usize; edges];
            loop {
                let list: Vec<(usize, usize)> = choice.iter().map(|&i| pairs[i]).collect();
                if connected(nodes, &list) && acyclic(nodes, &list) && canonical(nodes, &list, &perms) {
                    out.push(build(nodes, &list));
                }
                if !next_multiset(&mut choice, pairs.len()) {
                    break;
                }
            }
        }
    }
    out
}

/// Advances a non-decreasing index vector; false when exhausted.
fn next_multiset(choice: &mut [usize], alphabet: usize) -> bool {
    let k = choice.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if choice[i] + 1 < alphabet {
            let v = choice[i] + 1;
            for c in &mut choice[i..] {
                *c = v;
            }
            return true;
        }
    }
    false
}

fn free_permutations(nodes: usize) -> Vec<Vec<usize>> {
    fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v);
            rec(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut (3..nodes).collect(), &mut vec![0, 1, 2], &mut out);
    out
}

fn connected(nodes: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = nodes;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components == 1
}

fn acyclic(nodes: usize, edges: &[(usize, usize)]) -> bool {
    let mut indegree = vec![0usize; nodes];
    for &(_, v) in edges {
        indegree[v] += 1;
    }
    let mut ready: Vec<usize> = (0..nodes).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(u) = ready.pop() {
        seen += 1;
        for &(a, b) in edges {
            if a == u {
                indegree[b] -= 1;
                if indegree[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen == nodes
}

/// The edge list is the lexicographically smallest among its relabellings.
fn canonical(nodes: usize, edges: &[(usize, usize)], perms: &[Vec<usize>]) -> bool {
    let mut original: Vec<usize> = edges.iter().map(|&(u, v)| u * nodes + v).collect();
    original.sort_unstable();
    let mut mapped = Vec::with_capacity(edges.len());
    for p in perms.iter().skip(1) {
        mapped.clear();
        mapped.extend(edges.iter().map(|&(u, v)| p[u] * nodes + p[v]));
        mapped.sort_unstable();
        if mapped < original {
            return false;
        }
    }
    true
}

fn build(nodes: usize, edges: &[(usize, usize)]) -> Network {
    let names = (0..nodes)
        .map(|i| match i {
            0 => "K".to_string(),
            1 => "S".to_string(),
            2 => "T".to_string(),
            _ => format!("v{i}"),
        })
        .collect();
    let edges = edges.iter().map(|&(tail, head)| Edge { tail, head }).collect();
    Network::new(names, edges, 1, 0, 2).expect("acyclic with distinct roles")
}
