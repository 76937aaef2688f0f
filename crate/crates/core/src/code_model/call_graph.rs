use std::collections::{BTreeSet, VecDeque};

use super::{CallSite, Callable, TypeDecl};

/// Static call graph over the callables of a single type.
///
/// Nodes are indices into `TypeDecl::callables`; edges only connect members
/// of the same declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCallGraph {
    owner: String,
    keys: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl ClassCallGraph {
    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn key(&self, node: usize) -> &str {
        &self.keys[node]
    }

    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.keys.iter().position(|k| k == key)
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    /// Edges as `(caller key, callee key)` pairs.
    pub fn edge_keys(&self) -> Vec<(&str, &str)> {
        self.edges.iter().map(|(a, b)| (self.keys[*a].as_str(), self.keys[*b].as_str())).collect()
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((node, 0)..(node + 1, 0)).map(|(_, to)| *to)
    }

    /// Nodes reachable from `from` through at least one edge.
    pub fn reachable_from(&self, from: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.successors(from).collect();
        while let Some(n) = queue.pop_front() {
            if seen.insert(n) {
                queue.extend(self.successors(n));
            }
        }
        seen
    }

    /// Shortest path `from -> ... -> to` (inclusive), BFS in node order.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.keys.len()];
        let mut visited = vec![false; self.keys.len()];
        let mut queue = VecDeque::from([from]);
        visited[from] = true;
        while let Some(n) = queue.pop_front() {
            for next in self.successors(n) {
                if next == to {
                    let mut path = vec![to, n];
                    let mut cur = n;
                    while cur != from {
                        cur = prev[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                if !visited[next] {
                    visited[next] = true;
                    prev[next] = n;
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// Resolve a call site to a member of `decl`: by name, then arity, then
/// declaration order.
pub(crate) fn resolve_intra(decl: &TypeDecl, cs: &CallSite) -> Option<usize> {
    let own_static = cs.is_static_call
        && cs.target_type.as_ref().is_some_and(|t| t.qualified_name == decl.qualified_name);
    if cs.is_constructor_call || !(cs.is_self_call() || own_static) {
        return None;
    }
    let named: Vec<(usize, &Callable)> = decl
        .callables
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_constructor() && c.name == cs.callee_name)
        .collect();
    named
        .iter()
        .find(|(_, c)| c.arity() == cs.arg_count)
        .or_else(|| named.first())
        .map(|(i, _)| *i)
}

pub fn build_class_call_graph(decl: &TypeDecl) -> ClassCallGraph {
    let keys = decl.callables.iter().map(Callable::key).collect();
    let mut edges = BTreeSet::new();
    for (i, callable) in decl.callables.iter().enumerate() {
        for cs in &callable.call_sites {
            if let Some(j) = resolve_intra(decl, cs) {
                edges.insert((i, j));
            }
        }
    }
    ClassCallGraph { owner: decl.qualified_name.clone(), keys, edges }
}
