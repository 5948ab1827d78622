//! Object stage topology: which goal placements block which, and the order in
//! which objects are finalized.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geometry::{discs_overlap, tunnel_intersects_disc};
use crate::motion::tunnel_for;
use crate::scene::{ObjectId, Scene};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("goal dependency graph has a cycle through {involved:?}")]
    CycleDetected { involved: Vec<ObjectId> },
}

/// Edge `(blocked, blocker)`: `blocker`'s goal obstructs placing `blocked`,
/// so `blocked` has to reach its goal first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyGraph {
    pub n: usize,
    pub edges: BTreeSet<(ObjectId, ObjectId)>,
}

impl DependencyGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Adds `blocked -> blocker`. Self-edges are ignored.
    pub fn add_edge(&mut self, blocked: ObjectId, blocker: ObjectId) {
        if blocked != blocker {
            self.edges.insert((blocked, blocker));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageOrder {
    pub order: Vec<ObjectId>,
}

impl StageOrder {
    /// Stage index of each object.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, o) in self.order.iter().enumerate() {
            pos[o.index()] = i;
        }
        pos
    }
}

/// Pairwise goal blocking, with every other object ignored: `o_i` blocks
/// `o_j` when `o_i`'s goal disc touches `o_j`'s goal placing tunnel or
/// overlaps `o_j`'s goal disc.
pub fn build_dependency_graph(scene: &Scene) -> DependencyGraph {
    let n = scene.num_objects();
    let mut g = DependencyGraph::new(n);
    for j in scene.objects() {
        let goal_j = scene.goal.get(j);
        let Ok(place_j) = tunnel_for(scene, goal_j) else {
            continue;
        };
        let disc_j = scene.disc_at(goal_j);
        for i in scene.objects().filter(|&i| i != j) {
            let disc_i = scene.disc_at(scene.goal.get(i));
            if tunnel_intersects_disc(&place_j, &disc_i) || discs_overlap(&disc_i, &disc_j) {
                g.add_edge(j, i);
            }
        }
    }
    g
}

/// Kahn's algorithm. Among ready objects the one whose goal lies deepest
/// (largest y) goes first; equal depths fall back to the smaller id.
pub fn stage_order(g: &DependencyGraph, scene: &Scene) -> Result<StageOrder, TopologyError> {
    let n = g.n;
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<ObjectId>> = vec![Vec::new(); n];
    for &(u, v) in &g.edges {
        indegree[v.index()] += 1;
        out[u.index()].push(v);
    }
    let depth = |o: ObjectId| scene.goal.get(o).y;

    let mut ready: Vec<ObjectId> = (0..n).map(ObjectId).filter(|o| indegree[o.index()] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !ready.is_empty() {
        let best = ready
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                depth(a)
                    .partial_cmp(&depth(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(b.cmp(&a))
            })
            .map(|(i, _)| i)
            .expect("ready is non-empty");
        let next = ready.swap_remove(best);
        order.push(next);
        for &v in &out[next.index()] {
            indegree[v.index()] -= 1;
            if indegree[v.index()] == 0 {
                ready.push(v);
            }
        }
    }
    if order.len() < n {
        let involved = (0..n)
            .map(ObjectId)
            .filter(|o| indegree[o.index()] > 0)
            .collect();
        return Err(TopologyError::CycleDetected { involved });
    }
    Ok(StageOrder { order })
}
