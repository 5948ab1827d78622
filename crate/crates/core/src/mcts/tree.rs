//! Arena-backed search tree with UCB selection and back-propagation.

use crate::geometry::EPS;
use crate::motion::Action;
use crate::scene::Arrangement;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub arrangement: Arrangement,
    /// Action linking the parent to this node; `None` only at the root.
    pub incoming: Option<Action>,
    pub visits: u32,
    pub total_reward: f64,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
    pub depth: usize,
    /// Displacement accumulated along the path from the root.
    pub path_cost: f64,
    pub expanded: bool,
    /// Expansion found nothing below this node, or every child is dead.
    pub dead: bool,
}

impl SearchNode {
    pub fn mean_reward(&self) -> f64 {
        if self.visits == 0 {
            0.0
        } else {
            self.total_reward / f64::from(self.visits)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<SearchNode>,
}

impl SearchTree {
    pub const ROOT: NodeId = 0;

    pub fn new(root: Arrangement) -> Self {
        Self {
            nodes: vec![SearchNode {
                arrangement: root,
                incoming: None,
                visits: 0,
                total_reward: 0.0,
                children: Vec::new(),
                parent: None,
                depth: 0,
                path_cost: 0.0,
                expanded: false,
                dead: false,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut SearchNode {
        &mut self.nodes[id]
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[Self::ROOT]
    }

    /// Appends a child reached from `parent` by `action`.
    pub fn add_child(&mut self, parent: NodeId, action: Action) -> NodeId {
        let p = &self.nodes[parent];
        let mut arrangement = p.arrangement.clone();
        arrangement.set(action.object, action.to);
        let child = SearchNode {
            arrangement,
            incoming: Some(action),
            visits: 0,
            total_reward: 0.0,
            children: Vec::new(),
            parent: Some(parent),
            depth: p.depth + 1,
            path_cost: p.path_cost + action.displacement(),
            expanded: false,
            dead: false,
        };
        let id = self.nodes.len();
        self.nodes.push(child);
        self.nodes[parent].children.push(id);
        id
    }

    /// Marks `id` dead and walks up, killing every ancestor whose children
    /// are now all dead.
    pub fn mark_dead(&mut self, id: NodeId) {
        let mut cur = Some(id);
        while let Some(n) = cur {
            let node = &self.nodes[n];
            let all_dead = node.children.iter().all(|&c| self.nodes[c].dead);
            if n != id && !(node.expanded && all_dead) {
                break;
            }
            self.nodes[n].dead = true;
            cur = self.nodes[n].parent;
        }
    }

    /// Actions from the root down to `id`.
    pub fn action_chain(&self, id: NodeId) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.nodes[id].depth);
        let mut cur = id;
        while let Some(parent) = self.nodes[cur].parent {
            out.push(self.nodes[cur].incoming.expect("non-root node has an action"));
            cur = parent;
        }
        out.reverse();
        out
    }
}

/// UCB score of each live child of `parent`, in child order. Mean rewards are
/// min-max normalized over the visited siblings; unvisited children score
/// `+inf`.
pub fn ucb_scores(tree: &SearchTree, parent: NodeId, c: f64) -> Vec<(NodeId, f64)> {
    let p = tree.node(parent);
    let live: Vec<NodeId> = p
        .children
        .iter()
        .copied()
        .filter(|&ch| !tree.node(ch).dead)
        .collect();
    let (lo, hi) = live
        .iter()
        .map(|&ch| tree.node(ch))
        .filter(|n| n.visits > 0)
        .map(SearchNode::mean_reward)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| {
            (lo.min(q), hi.max(q))
        });
    let ln_parent = f64::from(p.visits.max(1)).ln();
    live.into_iter()
        .map(|ch| {
            let n = tree.node(ch);
            if n.visits == 0 {
                return (ch, f64::INFINITY);
            }
            let q = if hi - lo > EPS {
                (n.mean_reward() - lo) / (hi - lo)
            } else {
                1.0
            };
            (ch, q + c * (ln_parent / f64::from(n.visits)).sqrt())
        })
        .collect()
}

/// Descends from the root by maximal UCB (first child wins ties), skipping
/// dead children, and returns the leaf reached.
pub fn select(tree: &SearchTree, c: f64) -> NodeId {
    let mut cur = SearchTree::ROOT;
    loop {
        let mut best: Option<(NodeId, f64)> = None;
        for (ch, score) in ucb_scores(tree, cur, c) {
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((ch, score));
            }
        }
        match best {
            Some((ch, _)) => cur = ch,
            None => return cur,
        }
    }
}

/// Adds one visit and `reward` to every node from `id` up to the root.
pub fn backpropagate(tree: &mut SearchTree, id: NodeId, reward: f64) {
    let mut cur = Some(id);
    while let Some(n) = cur {
        let node = tree.node_mut(n);
        node.visits += 1;
        node.total_reward += reward;
        cur = node.parent;
    }
}
