//! Random single-branch rollouts used to score freshly reached nodes.

use rand::Rng;

use crate::motion::apply;

use super::expand::{get_blocking_objects, propose_actions, stage_complete};
use super::tree::{NodeId, SearchTree};
use super::{SearchBudget, StageContext};

/// Rolls out from `node` by repeatedly picking one of the expansion
/// proposals uniformly at random, until the stage objective holds or the
/// step cap is reached.
///
/// The reward is the negated total displacement from the stage root. A
/// rollout that gives up is additionally charged the remaining straight-line
/// distance of the focus plus one workspace diagonal per unresolved blocker.
pub fn simulate<R: Rng + ?Sized>(
    ctx: &StageContext<'_>,
    tree: &SearchTree,
    node: NodeId,
    budget: &SearchBudget,
    rng: &mut R,
) -> f64 {
    let start = tree.node(node);
    let mut a = start.arrangement.clone();
    let mut cost = start.path_cost;
    if stage_complete(ctx, &a) {
        return -cost;
    }
    let cap = budget.rollout_cap(ctx.scene.num_objects());
    for depth in (start.depth..).take(cap) {
        let moves = propose_actions(ctx, &a, depth, budget);
        if moves.is_empty() {
            break;
        }
        let mv = moves[rng.gen_range(0..moves.len())];
        apply(&mut a, &mv);
        cost += mv.displacement();
        if stage_complete(ctx, &a) {
            return -cost;
        }
    }
    let remaining = a.get(ctx.focus).distance(ctx.goal_of(ctx.focus));
    let unresolved = get_blocking_objects(ctx, &a).len() as f64;
    -(cost + remaining + unresolved * ctx.scene.workspace.diagonal())
}
