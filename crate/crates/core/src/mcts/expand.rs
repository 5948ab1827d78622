//! Subgoal-focused expansion: find what keeps the focus object from reaching
//! its goal and propose relocations that clear it.

use crate::geometry::{discs_overlap, tunnel_intersects_disc, Disc, Point, Tunnel, EPS};
use crate::motion::{action_valid, tunnel_for, Action};
use crate::scene::{Arrangement, ObjectId};

use super::tree::{NodeId, SearchTree};
use super::{SearchBudget, StageContext, StageError};

fn tunnel(ctx: &StageContext<'_>, p: Point) -> Option<Tunnel> {
    tunnel_for(ctx.scene, p).ok()
}

fn hits(t: &Option<Tunnel>, d: &Disc) -> bool {
    t.as_ref().is_some_and(|t| tunnel_intersects_disc(t, d))
}

/// Movable objects other than the focus whose pick tunnel would be cut by
/// the focus sitting at its goal.
pub(crate) fn access_blockers(ctx: &StageContext<'_>, a: &Arrangement) -> Vec<ObjectId> {
    let goal_disc = ctx.scene.disc_at(ctx.goal_of(ctx.focus));
    ctx.movable
        .iter()
        .copied()
        .filter(|&o| o != ctx.focus)
        .filter(|&o| hits(&tunnel(ctx, a.get(o)), &goal_disc))
        .collect()
}

/// Movable objects (never the focus) that sit in the focus's pick tunnel, sit
/// in or on its goal placing tunnel, or whose own pick tunnel the focus would
/// cut once placed at its goal. Returned in stage order.
pub fn get_blocking_objects(ctx: &StageContext<'_>, a: &Arrangement) -> Vec<ObjectId> {
    let focus_pick = tunnel(ctx, a.get(ctx.focus));
    let goal = ctx.goal_of(ctx.focus);
    let focus_place = tunnel(ctx, goal);
    let goal_disc = ctx.scene.disc_at(goal);
    ctx.movable
        .iter()
        .copied()
        .filter(|&o| o != ctx.focus)
        .filter(|&o| {
            let d = ctx.scene.disc_at(a.get(o));
            hits(&focus_pick, &d)
                || hits(&focus_place, &d)
                || discs_overlap(&goal_disc, &d)
                || hits(&tunnel(ctx, a.get(o)), &goal_disc)
        })
        .collect()
}

/// Whether the focus is at its goal and leaves every other movable object
/// reachable.
pub fn stage_complete(ctx: &StageContext<'_>, a: &Arrangement) -> bool {
    a.get(ctx.focus).approx_eq(ctx.goal_of(ctx.focus), EPS) && access_blockers(ctx, a).is_empty()
}

/// Up to `m` buffer regions for `o_i`, nearest to its current region first.
///
/// A candidate is accepted when its disc clears every other object, the
/// focus's pick and goal placing tunnels, and the current pick tunnels of
/// `deps`, and when the placing tunnel to it clears every other object. For
/// objects other than the focus that tunnel must also clear the focus's goal
/// disc, or the object would stay cut off once the focus lands.
pub fn new_region(
    ctx: &StageContext<'_>,
    o_i: ObjectId,
    deps: &[ObjectId],
    a: &Arrangement,
    m: usize,
) -> Vec<Point> {
    let scene = ctx.scene;
    let current = a.get(o_i);
    let focus_pick = tunnel(ctx, a.get(ctx.focus));
    let focus_place = tunnel(ctx, ctx.goal_of(ctx.focus));
    let focus_goal = (o_i != ctx.focus).then(|| scene.disc_at(ctx.goal_of(ctx.focus)));
    let dep_picks: Vec<Tunnel> = deps
        .iter()
        .filter(|&&d| d != o_i)
        .filter_map(|&d| tunnel(ctx, a.get(d)))
        .collect();
    let others: Vec<Disc> = a
        .objects()
        .filter(|&o| o != o_i)
        .map(|o| scene.disc_at(a.get(o)))
        .collect();

    let mut order: Vec<(f64, usize)> = scene
        .candidates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.distance(current), i))
        .collect();
    order.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));

    let mut accepted = Vec::new();
    if m == 0 {
        return accepted;
    }
    for (dist, idx) in order {
        if dist <= EPS {
            continue;
        }
        let p = scene.candidates[idx];
        let disc = scene.disc_at(p);
        if others.iter().any(|o| discs_overlap(&disc, o))
            || hits(&focus_pick, &disc)
            || hits(&focus_place, &disc)
            || dep_picks.iter().any(|t| tunnel_intersects_disc(t, &disc))
        {
            continue;
        }
        let Some(place) = tunnel(ctx, p) else {
            continue;
        };
        if others.iter().any(|o| tunnel_intersects_disc(&place, o))
            || focus_goal.is_some_and(|g| tunnel_intersects_disc(&place, &g))
        {
            continue;
        }
        accepted.push(p);
        if accepted.len() == m {
            break;
        }
    }
    accepted
}

/// Pick tunnel of `o` clear of every other object, static ones included.
fn pick_clear(ctx: &StageContext<'_>, a: &Arrangement, o: ObjectId) -> bool {
    let Some(t) = tunnel(ctx, a.get(o)) else {
        return false;
    };
    a.objects()
        .filter(|&x| x != o)
        .all(|x| !tunnel_intersects_disc(&t, &ctx.scene.disc_at(a.get(x))))
}

/// Movable objects with a clear pick tunnel, used to break out of stuck
/// nodes.
fn feasible_objects(ctx: &StageContext<'_>, a: &Arrangement) -> Vec<ObjectId> {
    ctx.movable
        .iter()
        .copied()
        .filter(|&o| pick_clear(ctx, a, o))
        .collect()
}

struct Proposals<'a> {
    a: &'a Arrangement,
    ctx: &'a StageContext<'a>,
    actions: Vec<Action>,
}

impl Proposals<'_> {
    fn push(&mut self, object: ObjectId, to: Point) {
        let act = Action::new(object, self.a.get(object), to);
        let dup = self
            .actions
            .iter()
            .any(|x| x.object == object && x.to.approx_eq(to, EPS));
        if !dup && action_valid(self.ctx.scene, self.a, &act) {
            self.actions.push(act);
        }
    }

    /// Buffer regions for `o`, relaxing the stage-order prefix whose pick
    /// tunnels must stay clear until some candidate turns up.
    fn relocate(&mut self, o: ObjectId, extra_dep: Option<ObjectId>, m: usize) {
        let pos = self.ctx.stage_position(o);
        let prefixes: Vec<usize> = if pos == 0 {
            vec![0]
        } else {
            (1..=pos).rev().collect()
        };
        for k in prefixes {
            let mut deps: Vec<ObjectId> = self.ctx.movable[..k].to_vec();
            if let Some(d) = extra_dep {
                if d != o && !deps.contains(&d) {
                    deps.push(d);
                }
            }
            let regions = new_region(self.ctx, o, &deps, self.a, m);
            if !regions.is_empty() {
                for p in regions {
                    self.push(o, p);
                }
                break;
            }
        }
    }
}

/// `Valid(a^g[o_i], o_k)`: the goal disc of `o` stays out of both focus tunnels.
fn goal_clear_of_focus(ctx: &StageContext<'_>, a: &Arrangement, o: ObjectId) -> bool {
    let disc = ctx.scene.disc_at(ctx.goal_of(o));
    !hits(&tunnel(ctx, a.get(ctx.focus)), &disc)
        && !hits(&tunnel(ctx, ctx.goal_of(ctx.focus)), &disc)
}

/// One pass over `blockers`. Returns the proposed actions and the objects
/// that were themselves inaccessible.
fn expansion_round(
    ctx: &StageContext<'_>,
    a: &Arrangement,
    blockers: &[ObjectId],
    m: usize,
) -> (Vec<Action>, Vec<ObjectId>) {
    let mut out = Proposals {
        a,
        ctx,
        actions: Vec::new(),
    };
    let mut next = Vec::new();
    for &o_i in blockers {
        let Some(pick_i) = tunnel(ctx, a.get(o_i)) else {
            continue;
        };
        let in_pick: Vec<ObjectId> = a
            .objects()
            .filter(|&x| x != o_i)
            .filter(|&x| tunnel_intersects_disc(&pick_i, &ctx.scene.disc_at(a.get(x))))
            .collect();
        if in_pick.iter().any(|&x| ctx.is_static(x)) {
            // Only movable objects can be cleared away.
            continue;
        }
        if in_pick.is_empty() {
            let goal = ctx.goal_of(o_i);
            let to_goal = Action::new(o_i, a.get(o_i), goal);
            if o_i != ctx.focus
                && !a.get(o_i).approx_eq(goal, EPS)
                && action_valid(ctx.scene, a, &to_goal)
                && goal_clear_of_focus(ctx, a, o_i)
            {
                out.push(o_i, goal);
            } else {
                out.relocate(o_i, None, m);
            }
        } else {
            for o_j in in_pick {
                if pick_clear(ctx, a, o_j) {
                    out.relocate(o_j, Some(o_i), m);
                } else if !next.contains(&o_j) {
                    next.push(o_j);
                }
            }
        }
    }
    (out.actions, next)
}

/// Candidate relocations from `a` at tree depth `depth`: the body of the
/// expansion step without the tree bookkeeping. Every returned action is
/// valid from `a`. Empty means the arrangement is a dead end.
pub fn propose_actions(
    ctx: &StageContext<'_>,
    a: &Arrangement,
    depth: usize,
    budget: &SearchBudget,
) -> Vec<Action> {
    let focus = ctx.focus;
    let at_goal = a.get(focus).approx_eq(ctx.goal_of(focus), EPS);
    let blockers = if at_goal {
        access_blockers(ctx, a)
    } else {
        get_blocking_objects(ctx, a)
    };
    if blockers.is_empty() {
        if at_goal {
            return Vec::new();
        }
        let act = Action::new(focus, a.get(focus), ctx.goal_of(focus));
        return if action_valid(ctx.scene, a, &act) {
            vec![act]
        } else {
            Vec::new()
        };
    }

    let m = budget.expansion_width;
    let stuck = depth > budget.stuck_depth(ctx.scene.num_objects());
    let mut reset = stuck;
    let mut current = if stuck {
        feasible_objects(ctx, a)
    } else {
        blockers
    };
    let mut seen: Vec<Vec<ObjectId>> = Vec::new();
    loop {
        let (actions, next) = expansion_round(ctx, a, &current, m);
        if !actions.is_empty() {
            return actions;
        }
        seen.push(current);
        if !next.is_empty() && !seen.contains(&next) {
            current = next;
            continue;
        }
        if reset {
            return Vec::new();
        }
        reset = true;
        current = feasible_objects(ctx, a);
        if current.is_empty() || seen.contains(&current) {
            return Vec::new();
        }
    }
}

/// Adds every proposed child below `node` and returns the first one. A node
/// with nothing to propose is marked dead.
pub fn expand(
    ctx: &StageContext<'_>,
    tree: &mut SearchTree,
    node: NodeId,
    budget: &SearchBudget,
) -> Result<NodeId, StageError> {
    let n = tree.node(node);
    let actions = propose_actions(ctx, &n.arrangement, n.depth, budget);
    tree.node_mut(node).expanded = true;
    if actions.is_empty() {
        tree.mark_dead(node);
        return Err(StageError::ExpansionExhausted);
    }
    let mut first = None;
    for act in actions {
        let id = tree.add_child(node, act);
        first.get_or_insert(id);
    }
    Ok(first.expect("at least one child"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Workspace;
    use crate::scene::{generate_scene, Scene, SceneConfig};

    fn scene_with(start: &[(f64, f64)], goal: &[(f64, f64)], tunnel_width: f64) -> Scene {
        let pts = |v: &[(f64, f64)]| Arrangement::new(v.iter().map(|&(x, y)| Point::new(x, y)).collect());
        Scene::new(
            Workspace {
                width: 20.0,
                depth: 20.0,
            },
            1.0,
            Point::new(10.0, -3.0),
            tunnel_width,
            1.0,
            pts(start),
            pts(goal),
        )
        .unwrap()
    }

    fn scene(start: &[(f64, f64)], goal: &[(f64, f64)]) -> Scene {
        scene_with(start, goal, 4.0)
    }

    fn ctx(scene: &Scene) -> StageContext<'_> {
        StageContext::from_sets(scene, Vec::new(), scene.objects().collect())
    }

    #[test]
    fn lone_focus_has_no_blockers() {
        let s = scene(&[(3.0, 3.0)], &[(12.0, 15.0)]);
        let c = ctx(&s);
        assert!(get_blocking_objects(&c, &s.start).is_empty());
        let props = propose_actions(&c, &s.start, 0, &SearchBudget::default());
        assert_eq!(props, vec![Action::new(ObjectId(0), Point::new(3.0, 3.0), Point::new(12.0, 15.0))]);
    }

    #[test]
    fn object_on_goal_tunnel_blocks() {
        let s = scene(&[(3.0, 3.0), (10.0, 5.0)], &[(10.0, 10.0), (16.0, 16.0)]);
        assert_eq!(get_blocking_objects(&ctx(&s), &s.start), vec![ObjectId(1)]);
    }

    #[test]
    fn object_behind_goal_blocks() {
        // Placing the focus at (10, 8) would cut off the object at (10, 15).
        let s = scene(&[(3.0, 3.0), (10.0, 15.0)], &[(10.0, 8.0), (16.0, 16.0)]);
        let c = ctx(&s);
        let focus_place = tunnel_for(&s, Point::new(10.0, 8.0)).unwrap();
        assert!(!tunnel_intersects_disc(&focus_place, &s.disc_at(Point::new(10.0, 15.0))));
        assert_eq!(get_blocking_objects(&c, &s.start), vec![ObjectId(1)]);
    }

    #[test]
    fn nearest_region_first() {
        let s = scene(&[(17.0, 3.0), (3.0, 15.0)], &[(17.0, 5.0), (3.0, 10.0)]);
        let got = new_region(&ctx(&s), ObjectId(1), &[ObjectId(0)], &s.start, 1);
        assert_eq!(got, vec![Point::new(3.0, 14.0)]);
    }

    #[test]
    fn wide_dependency_tunnels_reject_everything() {
        let s = scene_with(&[(3.0, 3.0), (15.0, 15.0), (6.0, 12.0)], &[(3.0, 3.0), (15.0, 15.0), (6.0, 12.0)], 40.0);
        let c = StageContext::from_sets(&s, Vec::new(), vec![ObjectId(0), ObjectId(1), ObjectId(2)]);
        assert!(new_region(&c, ObjectId(1), &[ObjectId(2)], &s.start, 5).is_empty());
    }

    #[test]
    fn regions_pass_action_valid() {
        for seed in 0..20 {
            let s = generate_scene(&SceneConfig::with_objects(3, seed)).unwrap();
            let c = ctx(&s);
            // Buffers are only sought for objects that can be picked.
            for o in [ObjectId(1), ObjectId(2)].into_iter().filter(|&o| pick_clear(&c, &s.start, o)) {
                let deps = [ObjectId(0)];
                for p in new_region(&c, o, &deps, &s.start, 5) {
                    let act = Action::new(o, s.start.get(o), p);
                    assert!(action_valid(&s, &s.start, &act), "seed {seed} {o} -> {p:?}");
                }
            }
        }
    }

    #[test]
    fn expansion_only_moves_the_blocker() {
        let s = scene(&[(3.0, 3.0), (10.0, 5.0)], &[(10.0, 10.0), (16.0, 16.0)]);
        let c = ctx(&s);
        let mut tree = SearchTree::new(s.start.clone());
        expand(&c, &mut tree, SearchTree::ROOT, &SearchBudget::default()).unwrap();
        let kids = tree.root().children.clone();
        assert!(!kids.is_empty());
        for k in kids {
            let n = tree.node(k);
            assert_eq!(n.incoming.unwrap().object, ObjectId(1));
            assert_eq!(n.arrangement.get(ObjectId(0)), s.start.get(ObjectId(0)));
            assert!(action_valid(&s, &s.start, &n.incoming.unwrap()));
        }
    }

    #[test]
    fn focus_steps_aside_for_its_own_blocker() {
        // The blocker sits on the focus's goal tunnel and the focus sits in
        // the blocker's pick tunnel, so the focus has to move out first.
        let s = scene(&[(10.0, 4.0), (10.0, 9.0)], &[(10.0, 14.0), (4.0, 17.0)]);
        let c = ctx(&s);
        let props = propose_actions(&c, &s.start, 0, &SearchBudget::default());
        assert!(props
            .iter()
            .any(|a| a.object == ObjectId(0) && !a.to.approx_eq(Point::new(10.0, 14.0), EPS)));
        for a in &props {
            assert!(action_valid(&s, &s.start, a));
        }
    }

    #[test]
    fn dead_end_is_marked() {
        // Static object in the focus's pick tunnel: nothing can be proposed.
        let s = scene(&[(10.0, 12.0), (10.0, 4.0)], &[(3.0, 15.0), (10.0, 4.0)]);
        let c = StageContext::from_sets(&s, vec![ObjectId(1)], vec![ObjectId(0)]);
        let mut tree = SearchTree::new(s.start.clone());
        assert_eq!(
            expand(&c, &mut tree, SearchTree::ROOT, &SearchBudget::default()),
            Err(StageError::ExpansionExhausted)
        );
        assert!(tree.root().dead);
    }
}
