//! Exhaustive simple-cycle enumeration for small directed graphs.

use crate::error::OracleError;

/// Largest node count accepted by the enumeration.
pub const CYCLE_GUARD: usize = 12;

/// Calls `visit` once per simple directed cycle, given as a node list that
/// starts at its smallest node. Enumeration stops early when `visit` returns
/// `false`. `adj[u]` lists the heads of edges leaving `u`.
pub fn for_each_simple_cycle(
    adj: &[Vec<usize>],
    mut visit: impl FnMut(&[usize]) -> bool,
) -> Result<(), OracleError> {
    let n = adj.len();
    if n > CYCLE_GUARD {
        return Err(OracleError::SizeGuard {
            what: "component size",
            value: n,
            limit: CYCLE_GUARD,
        });
    }
    let mut path = Vec::with_capacity(n);
    let mut on_path = vec![false; n];
    for start in 0..n {
        path.clear();
        path.push(start);
        on_path[start] = true;
        // explicit DFS: stack of next-neighbour cursors
        let mut cursor = vec![0usize];
        while let Some(c) = cursor.last_mut() {
            let u = *path.last().expect("path tracks cursor");
            if *c >= adj[u].len() {
                cursor.pop();
                on_path[u] = false;
                path.pop();
                continue;
            }
            let v = adj[u][*c];
            *c += 1;
            if v == start {
                if !visit(&path) {
                    return Ok(());
                }
            } else if v > start && !on_path[v] {
                on_path[v] = true;
                path.push(v);
                cursor.push(0);
            }
        }
    }
    Ok(())
}

/// All simple cycles, each as a node list starting at its smallest node.
pub fn enumerate_simple_cycles(adj: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, OracleError> {
    let mut out = Vec::new();
    for_each_simple_cycle(adj, |c| {
        out.push(c.to_vec());
        true
    })?;
    Ok(out)
}
