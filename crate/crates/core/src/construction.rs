//! The construction problem: produce one history consistent with a public
//! state, or report that none exists, via integral maximum flow.
//!
//! The network has one vertex per suit and one per holder row. Source
//! edges carry the per-suit unknown pool sizes, sink edges the per-row
//! unknown-card requirements, and a suit connects to a row unless the row
//! is void in it. A maximum flow saturating the sink edges is exactly a
//! suit-length assignment.

use rand::Rng;

use crate::assignment::{sample_deal_in, SuitLengthMatrix};
use crate::error::{Error, Result};
use crate::game::History;
use crate::observation::{
    extract_constraints, history_with_deal, verify_consistency, ConstraintSummary, PublicState,
};
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
}

/// Layered flow network over source, suit vertices, row vertices, sink.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    pub num_suits: usize,
    pub num_rows: usize,
    pub edges: Vec<FlowEdge>,
    pub source: usize,
    pub sink: usize,
    num_vertices: usize,
}

impl FlowNetwork {
    pub fn suit_vertex(&self, suit: usize) -> usize {
        1 + suit
    }

    pub fn row_vertex(&self, row: usize) -> usize {
        1 + self.num_suits + row
    }

    /// Flow on the suit-to-row edges as a row-major grid.
    pub fn middle_grid(&self, result: &MaxFlowResult) -> Vec<Vec<u32>> {
        let mut grid = vec![vec![0u32; self.num_suits]; self.num_rows];
        for (edge, &flow) in self.edges.iter().zip(&result.flow) {
            if edge.from != self.source && edge.to != self.sink {
                let suit = edge.from - 1;
                let row = edge.to - 1 - self.num_suits;
                grid[row][suit] = flow as u32;
            }
        }
        grid
    }
}

#[derive(Debug, Clone)]
pub struct MaxFlowResult {
    pub flow_value: u64,
    /// Flow per edge, indexed as in `FlowNetwork::edges`.
    pub flow: Vec<u64>,
}

/// Build the constraint network. The suit-to-row capacity is the total
/// number of unknown cards, an effective infinity.
pub fn build_flow_network(c: &ConstraintSummary) -> FlowNetwork {
    let num_suits = usize::from(c.config.num_suits);
    let num_rows = c.num_rows();
    let source = 0usize;
    let sink = 1 + num_suits + num_rows;
    let total_unknown = c.total_unknown() as u64;

    let mut edges = Vec::new();
    for (suit, pool) in c.unknown_pool.iter().enumerate() {
        edges.push(FlowEdge {
            from: source,
            to: 1 + suit,
            capacity: pool.len() as u64,
        });
    }
    for suit in 0..num_suits {
        for row in 0..num_rows {
            if !c.void_mask[row][suit] {
                edges.push(FlowEdge {
                    from: 1 + suit,
                    to: 1 + num_suits + row,
                    capacity: total_unknown,
                });
            }
        }
    }
    for (row, &need) in c.unknown_per_row.iter().enumerate() {
        edges.push(FlowEdge {
            from: 1 + num_suits + row,
            to: sink,
            capacity: need as u64,
        });
    }
    FlowNetwork {
        num_suits,
        num_rows,
        edges,
        source,
        sink,
        num_vertices: sink + 1,
    }
}

/// Edmonds-Karp: repeatedly augment along a shortest path found by BFS in
/// the residual graph. Deterministic for a fixed edge order.
pub fn max_flow(net: &FlowNetwork) -> MaxFlowResult {
    let n = net.num_vertices;
    let m = net.edges.len();
    // Residual slots: 2e forward, 2e+1 backward.
    let mut residual = vec![0u64; 2 * m];
    let mut target = vec![0usize; 2 * m];
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, edge) in net.edges.iter().enumerate() {
        residual[2 * e] = edge.capacity;
        target[2 * e] = edge.to;
        target[2 * e + 1] = edge.from;
        adjacency[edge.from].push(2 * e);
        adjacency[edge.to].push(2 * e + 1);
    }

    let mut flow_value = 0u64;
    let mut parent = vec![usize::MAX; n];
    loop {
        parent.fill(usize::MAX);
        parent[net.source] = usize::MAX - 1;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(net.source);
        'bfs: while let Some(u) = queue.pop_front() {
            for &slot in &adjacency[u] {
                let v = target[slot];
                if residual[slot] > 0 && parent[v] == usize::MAX {
                    parent[v] = slot;
                    if v == net.sink {
                        break 'bfs;
                    }
                    queue.push_back(v);
                }
            }
        }
        if parent[net.sink] == usize::MAX {
            break;
        }
        // Bottleneck along the path.
        let mut bottleneck = u64::MAX;
        let mut v = net.sink;
        while v != net.source {
            let slot = parent[v];
            bottleneck = bottleneck.min(residual[slot]);
            v = target[slot ^ 1];
        }
        let mut v = net.sink;
        while v != net.source {
            let slot = parent[v];
            residual[slot] -= bottleneck;
            residual[slot ^ 1] += bottleneck;
            v = target[slot ^ 1];
        }
        flow_value += bottleneck;
    }

    let flow = (0..m).map(|e| net.edges[e].capacity - residual[2 * e]).collect();
    MaxFlowResult { flow_value, flow }
}

/// Assignment extracted from a saturating max flow.
pub fn assignment_from_flow(
    c: &ConstraintSummary,
    net: &FlowNetwork,
    result: &MaxFlowResult,
) -> SuitLengthMatrix {
    SuitLengthMatrix {
        entries: net.middle_grid(result),
        row_sums: c.unknown_per_row.iter().map(|&n| n as u32).collect(),
        col_sums: c.pool_sizes().iter().map(|&n| n as u32).collect(),
        void_mask: c.void_mask.clone(),
    }
}

/// Solve construction for `s`: one consistent history, or `None` when the
/// belief state is empty. A provably inconsistent observation sequence is
/// also an empty belief state, not an error.
pub fn construct_history<R: Rng>(
    s: &PublicState,
    policy: &dyn Policy,
    rng: &mut R,
) -> Result<Option<History>> {
    let constraints = match extract_constraints(s) {
        Ok(c) => c,
        Err(Error::InconsistentPublicState(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match construct_deal(&constraints, rng)? {
        Some(deal) => {
            let history = history_with_deal(s, deal);
            if !verify_consistency(s, &history, policy) {
                return Err(Error::Internal(
                    "constructed history failed verification".into(),
                ));
            }
            Ok(Some(history))
        }
        None => Ok(None),
    }
}

/// Flow-based core of construction, reusable once constraints are known.
pub fn construct_deal<R: Rng>(
    constraints: &ConstraintSummary,
    rng: &mut R,
) -> Result<Option<crate::game::Deal>> {
    let demand: u64 = constraints.unknown_per_row.iter().map(|&n| n as u64).sum();
    let net = build_flow_network(constraints);
    let result = max_flow(&net);
    if result.flow_value < demand {
        return Ok(None);
    }
    let assignment = assignment_from_flow(constraints, &net, &result);
    debug_assert!(assignment.is_valid());
    Ok(Some(sample_deal_in(&assignment, constraints, rng)))
}
