//! Tree-shaped mixed graphs: a directed tree rooted at node 0 plus a set of
//! bidirected edges.
//!
//! Each non-root node `i` owns exactly one directed parameter, the coefficient
//! of the edge `parent[i] -> i`. Error variances (the diagonal of the
//! bidirected parameter matrix) are implicit for every node.

use std::collections::BTreeSet;
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Node identifier, dense in `0..=n`.
pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeScm {
    n: usize,
    parent: Vec<Option<NodeId>>,
    bidirected: BTreeSet<(NodeId, NodeId)>,
    topo: Vec<NodeId>,
    depth: Vec<usize>,
}

/// A bidirected edge absent from the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MissingEdge {
    /// `{0, node}` is missing; yields a linear equation in the node's parameter.
    Root { node: NodeId },
    /// `{i, j}` with `1 <= i < j`; `p` and `q` are the parents of `i` and `j`.
    Pair { i: NodeId, j: NodeId, p: NodeId, q: NodeId },
}

impl MissingEdge {
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        match *self {
            MissingEdge::Root { node } => (0, node),
            MissingEdge::Pair { i, j, .. } => (i, j),
        }
    }
}

impl fmt::Display for MissingEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.endpoints();
        write!(f, "{{{a},{b}}}")
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    n: usize,
    parent: Vec<Option<usize>>,
    #[serde(default)]
    bidirected: Vec<[usize; 2]>,
}

impl TreeScm {
    /// Builds and validates a model. `parent[0]` must be `None`; every other
    /// entry must be `Some`.
    pub fn new(
        n: usize,
        parent: Vec<Option<NodeId>>,
        bidirected: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, ModelError> {
        if parent.len() != n + 1 {
            return Err(ModelError::ParentLength {
                expected: n + 1,
                found: parent.len(),
            });
        }
        if parent[0].is_some() {
            return Err(ModelError::RootHasParent);
        }
        for (node, p) in parent.iter().enumerate().skip(1) {
            match p {
                None => return Err(ModelError::MissingParent { node }),
                Some(p) if *p > n => return Err(ModelError::IndexOutOfRange { index: *p, n }),
                Some(p) if *p == node => return Err(ModelError::NotATree { node }),
                _ => {}
            }
        }

        let mut set = BTreeSet::new();
        for (a, b) in bidirected {
            for x in [a, b] {
                if x > n {
                    return Err(ModelError::IndexOutOfRange { index: x, n });
                }
            }
            if a == b {
                return Err(ModelError::SelfLoop { node: a });
            }
            let key = (a.min(b), a.max(b));
            if !set.insert(key) {
                return Err(ModelError::DuplicateBidirected { i: key.0, j: key.1 });
            }
        }

        // BFS from the root over child lists; anything not reached sits on a
        // directed cycle.
        let mut children = vec![Vec::new(); n + 1];
        for (node, p) in parent.iter().enumerate().skip(1) {
            children[p.unwrap()].push(node);
        }
        let mut topo = Vec::with_capacity(n + 1);
        let mut depth = vec![usize::MAX; n + 1];
        depth[0] = 0;
        topo.push(0);
        let mut head = 0;
        while head < topo.len() {
            let u = topo[head];
            head += 1;
            for &c in &children[u] {
                depth[c] = depth[u] + 1;
                topo.push(c);
            }
        }
        if let Some(node) = (0..=n).find(|&v| depth[v] == usize::MAX) {
            return Err(ModelError::NotATree { node });
        }

        Ok(Self {
            n,
            parent,
            bidirected: set,
            topo,
            depth,
        })
    }

    /// Parses the JSON document `{"n": .., "parent": [null, ..], "bidirected": [[i,j], ..]}`.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let doc: ModelDoc =
            serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        Self::new(doc.n, doc.parent, doc.bidirected.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            n: self.n,
            parent: self.parent.clone(),
            bidirected: self.bidirected.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&doc).expect("model serialization cannot fail")
    }

    /// Imports a DOT graph. `a -> b` defines `parent[b] = a`; `a -- b` and
    /// `a -> b [dir=both]` define bidirected edges. Node ids must be integers.
    pub fn from_dot(text: &str) -> Result<Self, ModelError> {
        let edge = Regex::new(r"(\d+)\s*(->|--)\s*(\d+)\s*(\[[^\]]*\])?").unwrap();
        let both = Regex::new(r"dir\s*=\s*\x22?both").unwrap();
        let node = Regex::new(r"(?m)^\s*(\d+)\s*(\[[^\]]*\])?\s*;?\s*$").unwrap();

        let body = strip_dot_comments(text);
        let mut directed = Vec::new();
        let mut bidirected = Vec::new();
        let mut max_id = 0usize;
        let parse_id = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| ModelError::Malformed(format!("bad node id {s}")))
        };
        for cap in edge.captures_iter(&body) {
            let a = parse_id(&cap[1])?;
            let b = parse_id(&cap[3])?;
            max_id = max_id.max(a).max(b);
            let is_both = cap.get(4).is_some_and(|m| both.is_match(m.as_str()));
            if &cap[2] == "--" || is_both {
                bidirected.push((a, b));
            } else {
                directed.push((a, b));
            }
        }
        for cap in node.captures_iter(&body) {
            max_id = max_id.max(parse_id(&cap[1])?);
        }
        if directed.is_empty() && bidirected.is_empty() && !body.contains('{') {
            return Err(ModelError::Malformed("no DOT graph body found".into()));
        }
        let n = max_id;
        let mut parent = vec![None; n + 1];
        for (a, b) in directed {
            if b == 0 {
                return Err(ModelError::RootHasParent);
            }
            if parent[b].replace(a).is_some() {
                return Err(ModelError::NotATree { node: b });
            }
        }
        Self::new(n, parent, bidirected)
    }

    /// Parses either format, sniffing for a DOT header.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let head = text.trim_start();
        if head.starts_with("digraph") || head.starts_with("graph") || head.starts_with("strict") {
            Self::from_dot(text)
        } else {
            Self::from_json(text)
        }
    }

    /// Largest node index; nodes are `0..=n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        self.parent[node]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    /// Parent of a non-root node. Panics on the root.
    pub fn parent_of(&self, node: NodeId) -> NodeId {
        self.parent[node].expect("root has no parent")
    }

    pub fn bidirected(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.bidirected.iter().copied()
    }

    pub fn bidirected_count(&self) -> usize {
        self.bidirected.len()
    }

    pub fn has_bidirected(&self, a: NodeId, b: NodeId) -> bool {
        self.bidirected.contains(&(a.min(b), a.max(b)))
    }

    /// Nodes in breadth-first order from the root; parents precede children.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    pub fn depth(&self, node: NodeId) -> usize {
        self.depth[node]
    }

    /// Directed edges `(parent, child)` in child order.
    pub fn directed_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (1..=self.n).map(move |c| (self.parent_of(c), c))
    }

    /// Path from the root down to `node`, inclusive at both ends.
    pub fn root_path(&self, node: NodeId) -> Vec<NodeId> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// All missing edges in lexicographic order of their endpoint pairs.
    pub fn missing_edges(&self) -> Vec<MissingEdge> {
        let mut out = Vec::new();
        for a in 0..=self.n {
            for b in (a + 1)..=self.n {
                if self.has_bidirected(a, b) {
                    continue;
                }
                out.push(if a == 0 {
                    MissingEdge::Root { node: b }
                } else {
                    MissingEdge::Pair {
                        i: a,
                        j: b,
                        p: self.parent_of(a),
                        q: self.parent_of(b),
                    }
                });
            }
        }
        out
    }

    /// Root-incident missing edges only.
    pub fn root_missing(&self) -> Vec<NodeId> {
        (1..=self.n).filter(|&v| !self.has_bidirected(0, v)).collect()
    }

    /// Non-root missing edges only.
    pub fn pair_missing(&self) -> Vec<MissingEdge> {
        self.missing_edges()
            .into_iter()
            .filter(|e| matches!(e, MissingEdge::Pair { .. }))
            .collect()
    }
}

fn strip_dot_comments(text: &str) -> String {
    let block = Regex::new(r"(?s)/\*.*?\*/").unwrap();
    let line = Regex::new(r"(?m)//.*$|(?m)^\s*#.*$").unwrap();
    let s = block.replace_all(text, "");
    line.replace_all(&s, "").into_owned()
}
