//! Greedy root aggregation of the nodal connectivity graph.

use super::AmgError;

/// Undirected adjacency over nodal blocks, with sorted neighbor lists.
#[derive(Debug, Clone)]
pub struct NodeGraph {
    adjacency: Vec<Vec<usize>>,
}

impl NodeGraph {
    pub fn new(n_nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(a, b) in edges {
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for l in adjacency.iter_mut() {
            l.sort_unstable();
            l.dedup();
        }
        Self { adjacency }
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

/// Node-to-aggregate assignment.
#[derive(Debug, Clone)]
pub struct Aggregates {
    pub node_to_aggregate: Vec<usize>,
    pub n_aggregates: usize,
}

/// Deterministic greedy root aggregation. Nodes are visited in `seed_order`;
/// an unaggregated node becomes a root and absorbs its unaggregated
/// neighbors. A root left as a singleton joins the aggregate of its
/// lowest-numbered aggregated neighbor, so singleton aggregates only remain
/// for isolated nodes.
pub fn aggregate(graph: &NodeGraph, seed_order: &[usize]) -> Result<Aggregates, AmgError> {
    let n = graph.n_nodes();
    if n == 0 {
        return Err(AmgError::EmptyGraph);
    }
    assert_eq!(seed_order.len(), n, "seed order must cover every node");
    const UNSET: usize = usize::MAX;
    let mut assign = vec![UNSET; n];
    let mut n_agg = 0usize;
    for &v in seed_order {
        if assign[v] != UNSET {
            continue;
        }
        let mut absorbed = false;
        for &u in graph.neighbors(v) {
            if assign[u] == UNSET {
                if !absorbed {
                    assign[v] = n_agg;
                }
                assign[u] = n_agg;
                absorbed = true;
            }
        }
        if absorbed {
            n_agg += 1;
        } else if let Some(&u) = graph.neighbors(v).iter().find(|&&u| assign[u] != UNSET) {
            assign[v] = assign[u];
        } else {
            // Isolated node keeps its own aggregate.
            assign[v] = n_agg;
            n_agg += 1;
        }
    }
    Ok(Aggregates {
        node_to_aggregate: assign,
        n_aggregates: n_agg,
    })
}
