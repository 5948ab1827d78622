//! Single-stage Monte Carlo tree search: drive one focus object to its goal
//! while only objects not yet finalized may move.

mod expand;
mod rollout;
mod tree;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::motion::Action;
use crate::scene::{Arrangement, ObjectId, Scene};
use crate::topology::StageOrder;

pub use expand::{expand, get_blocking_objects, new_region, propose_actions, stage_complete};
pub use rollout::simulate;
pub use tree::{backpropagate, select, ucb_scores, NodeId, SearchNode, SearchTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StageError {
    #[error("stage search ran out of wall-clock time")]
    Timeout,
    #[error("stage search hit its iteration limit of {0}")]
    IterationLimit(usize),
    #[error("no expandable nodes remain")]
    Exhausted,
    #[error("node has no valid relocation to propose")]
    ExpansionExhausted,
}

/// Search limits and tuning knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBudget {
    /// Iterations allowed per stage.
    pub max_iterations: usize,
    /// Wall-clock limit for a whole planning run; `None` disables it.
    pub wall_clock_limit: Option<Duration>,
    /// Maximum regions proposed per buffer search (`m`).
    pub expansion_width: usize,
    /// Depth past which expansion considers every accessible object.
    /// `None` means `3 * n`.
    pub stuck_depth_threshold: Option<usize>,
    /// Rollout step cap. `None` means `4 * n`.
    pub rollout_step_cap: Option<usize>,
    pub exploration_constant: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            wall_clock_limit: Some(Duration::from_secs(30)),
            expansion_width: 5,
            stuck_depth_threshold: None,
            rollout_step_cap: None,
            exploration_constant: 1.414,
            seed: 0,
        }
    }
}

impl SearchBudget {
    pub fn stuck_depth(&self, n: usize) -> usize {
        self.stuck_depth_threshold.unwrap_or(3 * n)
    }

    pub fn rollout_cap(&self, n: usize) -> usize {
        self.rollout_step_cap.unwrap_or(4 * n)
    }

    pub fn without_timeout(mut self) -> Self {
        self.wall_clock_limit = None;
        self
    }
}

/// Who may move during one stage.
#[derive(Debug, Clone)]
pub struct StageContext<'a> {
    pub scene: &'a Scene,
    pub focus: ObjectId,
    /// Objects already finalized at their goals.
    pub static_set: Vec<ObjectId>,
    /// Objects still free to move, in stage order; the focus comes first.
    pub movable: Vec<ObjectId>,
    pub goal: &'a Arrangement,
    is_static: Vec<bool>,
    position: Vec<usize>,
}

impl<'a> StageContext<'a> {
    /// Context for stage `stage` of `order`: earlier objects are static.
    pub fn new(scene: &'a Scene, order: &StageOrder, stage: usize) -> Self {
        let static_set = order.order[..stage].to_vec();
        let movable = order.order[stage..].to_vec();
        Self::from_sets(scene, static_set, movable)
    }

    /// `movable[0]` becomes the focus.
    pub fn from_sets(scene: &'a Scene, static_set: Vec<ObjectId>, movable: Vec<ObjectId>) -> Self {
        let n = scene.num_objects();
        let mut is_static = vec![false; n];
        for o in &static_set {
            is_static[o.index()] = true;
        }
        let mut position = vec![usize::MAX; n];
        for (i, o) in movable.iter().enumerate() {
            position[o.index()] = i;
        }
        Self {
            scene,
            focus: movable[0],
            static_set,
            movable,
            goal: &scene.goal,
            is_static,
            position,
        }
    }

    pub fn goal_of(&self, o: ObjectId) -> crate::geometry::Point {
        self.goal.get(o)
    }

    pub fn is_static(&self, o: ObjectId) -> bool {
        self.is_static[o.index()]
    }

    /// Index of a movable object in stage order.
    pub fn stage_position(&self, o: ObjectId) -> usize {
        self.position[o.index()]
    }
}

/// Statistics from one stage search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageStats {
    pub iterations: usize,
    pub nodes: usize,
}

/// Runs select / expand / simulate / back-propagate until a node satisfies
/// the stage objective and returns the root-to-node actions.
pub fn solve_stage(
    ctx: &StageContext<'_>,
    start: &Arrangement,
    budget: &SearchBudget,
) -> Result<Vec<Action>, StageError> {
    let deadline = budget.wall_clock_limit.map(|d| Instant::now() + d);
    solve_stage_until(ctx, start, budget, deadline, budget.seed).map(|(plan, _)| plan)
}

pub fn solve_stage_until(
    ctx: &StageContext<'_>,
    start: &Arrangement,
    budget: &SearchBudget,
    deadline: Option<Instant>,
    seed: u64,
) -> Result<(Vec<Action>, StageStats), StageError> {
    let mut stats = StageStats::default();
    if stage_complete(ctx, start) {
        return Ok((Vec::new(), stats));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = SearchTree::new(start.clone());
    let c = budget.exploration_constant;

    for iter in 0..budget.max_iterations {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(StageError::Timeout);
        }
        if tree.root().dead {
            return Err(StageError::Exhausted);
        }
        stats.iterations = iter + 1;
        let leaf = select(&tree, c);
        let leaf_node = tree.node(leaf);
        let rollout_from = if leaf_node.visits > 0 || leaf == SearchTree::ROOT {
            let first_new = tree.node(leaf).children.len();
            match expand(ctx, &mut tree, leaf, budget) {
                Ok(child) => {
                    let created = tree.node(leaf).children[first_new..].to_vec();
                    if let Some(&done) = created
                        .iter()
                        .find(|&&ch| stage_complete(ctx, &tree.node(ch).arrangement))
                    {
                        stats.nodes = tree.len();
                        return Ok((tree.action_chain(done), stats));
                    }
                    child
                }
                Err(StageError::ExpansionExhausted) => continue,
                Err(e) => return Err(e),
            }
        } else {
            leaf
        };
        let reward = simulate(ctx, &tree, rollout_from, budget, &mut rng);
        backpropagate(&mut tree, rollout_from, reward);
    }
    if tree.root().dead {
        return Err(StageError::Exhausted);
    }
    Err(StageError::IterationLimit(budget.max_iterations))
}
