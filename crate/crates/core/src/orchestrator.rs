//! Multi-stage planning: one stage search per object in stage order, then
//! two plan-shortening passes and a final replay check.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::EPS;
use crate::mcts::{solve_stage_until, SearchBudget, StageContext, StageError};
use crate::motion::{action_valid, apply, Action};
use crate::scene::{Arrangement, Scene};
use crate::topology::{build_dependency_graph, stage_order};

/// Per-coordinate tolerance for the terminal goal check.
pub const GOAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("input plan is invalid at step {step}")]
    InvalidInputPlan { step: usize },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub actions: Vec<Action>,
    pub total_displacement: f64,
    pub steps: usize,
}

impl Plan {
    pub fn new(actions: Vec<Action>) -> Self {
        let total_displacement = actions.iter().map(Action::displacement).sum();
        Self {
            steps: actions.len(),
            actions,
            total_displacement,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    Timeout,
    StageExhausted,
    TopologyCycle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub success: bool,
    pub plan: Option<Plan>,
    /// Seconds.
    pub wall_time: f64,
    pub failure_kind: Option<FailureKind>,
    /// Length of the concatenated stage plans before optimization.
    pub raw_steps: usize,
}

impl PlanReport {
    fn failure(kind: FailureKind, started: Instant, raw_steps: usize) -> Self {
        Self {
            success: false,
            plan: None,
            wall_time: started.elapsed().as_secs_f64(),
            failure_kind: Some(kind),
            raw_steps,
        }
    }
}

/// Replays `actions` from `start`, returning the final arrangement or the
/// index of the first invalid action.
pub fn replay(scene: &Scene, start: &Arrangement, actions: &[Action]) -> Result<Arrangement, usize> {
    let mut a = start.clone();
    for (i, act) in actions.iter().enumerate() {
        if !action_valid(scene, &a, act) {
            return Err(i);
        }
        apply(&mut a, act);
    }
    Ok(a)
}

pub fn plan(scene: &Scene, budget: &SearchBudget) -> PlanReport {
    let started = Instant::now();
    let deadline = budget.wall_clock_limit.map(|d| started + d);

    let graph = build_dependency_graph(scene);
    let order = match stage_order(&graph, scene) {
        Ok(o) => o,
        Err(_) => return PlanReport::failure(FailureKind::TopologyCycle, started, 0),
    };

    let n = order.order.len();
    let mut current = scene.start.clone();
    let mut actions = Vec::new();
    for stage in 0..n {
        let ctx = StageContext::new(scene, &order, stage);
        // Remaining time is shared evenly by the stages still to run.
        let stage_deadline = deadline.map(|d| {
            let now = Instant::now();
            now + d.saturating_duration_since(now) / (n - stage) as u32
        });
        let seed = budget
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(stage as u64);
        match solve_stage_until(&ctx, &current, budget, stage_deadline, seed) {
            Ok((sub, _)) => {
                for act in &sub {
                    apply(&mut current, act);
                }
                actions.extend(sub);
            }
            Err(StageError::Timeout | StageError::IterationLimit(_)) => {
                return PlanReport::failure(FailureKind::Timeout, started, actions.len())
            }
            Err(StageError::Exhausted | StageError::ExpansionExhausted) => {
                return PlanReport::failure(FailureKind::StageExhausted, started, actions.len())
            }
        }
    }

    let raw = Plan::new(actions);
    let raw_steps = raw.steps;
    let optimized = match optimize_plan(&raw, scene) {
        Ok(p) => p,
        Err(_) => return PlanReport::failure(FailureKind::StageExhausted, started, raw_steps),
    };
    if !validate_plan(scene, &optimized).valid {
        return PlanReport::failure(FailureKind::StageExhausted, started, raw_steps);
    }
    PlanReport {
        success: true,
        plan: Some(optimized),
        wall_time: started.elapsed().as_secs_f64(),
        failure_kind: None,
        raw_steps,
    }
}

/// Collapses each maximal run of consecutive same-object actions into a
/// single action from the run's first source to its last destination.
/// Runs that end where they began disappear.
pub fn merge_consecutive(actions: &[Action]) -> Vec<Action> {
    let mut out: Vec<Action> = Vec::with_capacity(actions.len());
    let mut i = 0;
    while i < actions.len() {
        let first = actions[i];
        let mut j = i;
        while j + 1 < actions.len() && actions[j + 1].object == first.object {
            j += 1;
        }
        let last = actions[j];
        if !first.from.approx_eq(last.to, EPS) {
            out.push(Action::new(first.object, first.from, last.to));
        }
        i = j + 1;
    }
    out
}

/// Merges one non-adjacent same-object pair per object per sweep, widest gap
/// first, keeping a merge only if the whole plan still replays validly.
fn merge_distant(scene: &Scene, mut actions: Vec<Action>) -> Vec<Action> {
    loop {
        let mut changed = false;
        for obj in scene.objects() {
            let occurrences: Vec<usize> = actions
                .iter()
                .enumerate()
                .filter(|(_, a)| a.object == obj)
                .map(|(i, _)| i)
                .collect();
            let mut pairs: Vec<(usize, usize)> = occurrences
                .windows(2)
                .map(|w| (w[0], w[1]))
                .filter(|(t, u)| u - t >= 2)
                .collect();
            pairs.sort_by(|x, y| (y.1 - y.0).cmp(&(x.1 - x.0)).then(x.0.cmp(&y.0)));
            for (t, u) in pairs {
                let mut candidate = actions.clone();
                let merged = Action::new(obj, actions[t].from, actions[u].to);
                candidate.remove(u);
                if merged.from.approx_eq(merged.to, EPS) {
                    candidate.remove(t);
                } else {
                    candidate[t] = merged;
                }
                if replay(scene, &scene.start, &candidate).is_ok() {
                    actions = candidate;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return actions;
        }
    }
}

/// Shortens a plan that replays validly from the scene start. The result
/// replays validly, reaches the same final arrangement, and is never longer
/// in steps or displacement.
pub fn optimize_plan(plan: &Plan, scene: &Scene) -> Result<Plan, OptimizeError> {
    replay(scene, &scene.start, &plan.actions)
        .map_err(|step| OptimizeError::InvalidInputPlan { step })?;
    let pass1 = merge_consecutive(&plan.actions);
    let pass2 = merge_distant(scene, pass1);
    let out = merge_consecutive(&pass2);
    debug_assert!(replay(scene, &scene.start, &out).is_ok());
    Ok(Plan::new(out))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// First invalid action, or `steps` when every action is valid but the
    /// goal is not reached.
    pub failing_step: Option<usize>,
    pub reason: Option<String>,
}

/// Independent replay of `plan` from the scene start: every action must be
/// valid and the final arrangement must match the goal.
pub fn validate_plan(scene: &Scene, plan: &Plan) -> ValidationReport {
    match replay(scene, &scene.start, &plan.actions) {
        Err(step) => ValidationReport {
            valid: false,
            failing_step: Some(step),
            reason: Some(format!(
                "action {step} ({}) collides or does not start at the object's region",
                plan.actions[step].object
            )),
        },
        Ok(end) if !end.approx_eq(&scene.goal, GOAL_TOLERANCE) => ValidationReport {
            valid: false,
            failing_step: Some(plan.actions.len()),
            reason: Some("final arrangement does not match the goal".into()),
        },
        Ok(_) => ValidationReport {
            valid: true,
            failing_step: None,
            reason: None,
        },
    }
}

/// On-disk plan layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub actions: Vec<Action>,
    pub steps: usize,
    pub total_displacement: f64,
    pub wall_time: f64,
}

impl PlanFile {
    pub fn new(plan: &Plan, wall_time: f64) -> Self {
        Self {
            actions: plan.actions.clone(),
            steps: plan.steps,
            total_displacement: plan.total_displacement,
            wall_time,
        }
    }

    pub fn into_plan(self) -> Plan {
        Plan::new(self.actions)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Workspace};
    use crate::scene::ObjectId;

    fn scene(start: Vec<Point>, goal: Vec<Point>) -> Scene {
        Scene::new(
            Workspace {
                width: 20.0,
                depth: 20.0,
            },
            1.0,
            Point::new(10.0, -3.0),
            4.0,
            1.0,
            Arrangement::new(start),
            Arrangement::new(goal),
        )
        .unwrap()
    }

    fn mv(o: usize, from: (f64, f64), to: (f64, f64)) -> Action {
        Action::new(ObjectId(o), Point::new(from.0, from.1), Point::new(to.0, to.1))
    }

    #[test]
    fn single_object_plan() {
        let s = scene(vec![Point::new(3.0, 4.0)], vec![Point::new(15.0, 9.0)]);
        let r = plan(&s, &SearchBudget::default());
        assert!(r.success);
        let p = r.plan.unwrap();
        assert_eq!(p.steps, 1);
        assert!((p.total_displacement - 13.0).abs() < 1e-9);
    }

    #[test]
    fn start_equals_goal() {
        let pts = vec![Point::new(3.0, 4.0), Point::new(15.0, 9.0)];
        let s = scene(pts.clone(), pts);
        let r = plan(&s, &SearchBudget::default());
        assert!(r.success);
        assert_eq!(r.plan.unwrap().steps, 0);
    }

    #[test]
    fn pass_one_collapses_runs() {
        let acts = vec![mv(1, (2.0, 2.0), (5.0, 2.0)), mv(1, (5.0, 2.0), (9.0, 2.0))];
        assert_eq!(merge_consecutive(&acts), vec![mv(1, (2.0, 2.0), (9.0, 2.0))]);
        let back = vec![mv(1, (2.0, 2.0), (5.0, 2.0)), mv(1, (5.0, 2.0), (2.0, 2.0))];
        assert!(merge_consecutive(&back).is_empty());
    }

    #[test]
    fn optimize_merges_run() {
        let s = scene(
            vec![Point::new(2.0, 2.0), Point::new(18.0, 18.0)],
            vec![Point::new(9.0, 2.0), Point::new(18.0, 18.0)],
        );
        let p = Plan::new(vec![mv(0, (2.0, 2.0), (5.0, 2.0)), mv(0, (5.0, 2.0), (9.0, 2.0))]);
        let out = optimize_plan(&p, &s).unwrap();
        assert_eq!(out.actions, vec![mv(0, (2.0, 2.0), (9.0, 2.0))]);
        assert!((out.total_displacement - 7.0).abs() < 1e-12);
    }

    #[test]
    fn distinct_objects_untouched() {
        let s = scene(
            vec![Point::new(2.0, 2.0), Point::new(18.0, 2.0)],
            vec![Point::new(2.0, 10.0), Point::new(18.0, 10.0)],
        );
        let p = Plan::new(vec![mv(0, (2.0, 2.0), (2.0, 10.0)), mv(1, (18.0, 2.0), (18.0, 10.0))]);
        assert_eq!(optimize_plan(&p, &s).unwrap(), p);
    }

    #[test]
    fn distant_merge_rejected_when_it_collides() {
        // o0 parks at (3,5), o1 moves out, o0 goes to (10,12). Merging o0's
        // two moves would place it through o1's original spot at (10,5).
        let s = scene(
            vec![Point::new(1.0, 10.0), Point::new(10.0, 5.0)],
            vec![Point::new(10.0, 12.0), Point::new(17.0, 3.0)],
        );
        let p = Plan::new(vec![
            mv(0, (1.0, 10.0), (3.0, 5.0)),
            mv(1, (10.0, 5.0), (17.0, 3.0)),
            mv(0, (3.0, 5.0), (10.0, 12.0)),
        ]);
        assert!(validate_plan(&s, &p).valid);
        let merged = Action::new(ObjectId(0), Point::new(1.0, 10.0), Point::new(10.0, 12.0));
        assert!(!action_valid(&s, &s.start, &merged));
        assert_eq!(optimize_plan(&p, &s).unwrap(), p);
    }

    #[test]
    fn distant_merge_accepted_when_clear() {
        let s = scene(
            vec![Point::new(3.0, 15.0), Point::new(17.0, 5.0)],
            vec![Point::new(5.0, 17.0), Point::new(17.0, 12.0)],
        );
        let p = Plan::new(vec![
            mv(0, (3.0, 15.0), (3.0, 8.0)),
            mv(1, (17.0, 5.0), (17.0, 12.0)),
            mv(0, (3.0, 8.0), (5.0, 17.0)),
        ]);
        assert!(validate_plan(&s, &p).valid);
        let out = optimize_plan(&p, &s).unwrap();
        assert_eq!(out.steps, 2);
        assert!(validate_plan(&s, &out).valid);
        assert!(out.total_displacement <= p.total_displacement);
    }

    #[test]
    fn invalid_input_rejected() {
        let s = scene(vec![Point::new(3.0, 4.0)], vec![Point::new(15.0, 9.0)]);
        let p = Plan::new(vec![mv(0, (4.0, 4.0), (15.0, 9.0))]);
        assert_eq!(
            optimize_plan(&p, &s),
            Err(OptimizeError::InvalidInputPlan { step: 0 })
        );
    }

    #[test]
    fn validation_reports() {
        let s = scene(vec![Point::new(3.0, 4.0)], vec![Point::new(15.0, 9.0)]);
        let empty = validate_plan(&s, &Plan::default());
        assert!(!empty.valid);
        assert_eq!(empty.failing_step, Some(0));
        let wrong_from = Plan::new(vec![
            mv(0, (3.0, 4.0), (8.0, 8.0)),
            mv(0, (9.0, 9.0), (15.0, 9.0)),
        ]);
        let r = validate_plan(&s, &wrong_from);
        assert!(!r.valid);
        assert_eq!(r.failing_step, Some(1));
        let ok = Plan::new(vec![mv(0, (3.0, 4.0), (15.0, 9.0))]);
        assert!(validate_plan(&s, &ok).valid);
    }

    #[test]
    fn plan_file_layout() {
        let p = Plan::new(vec![mv(2, (3.0, 4.0), (15.0, 9.0))]);
        let v = serde_json::to_value(PlanFile::new(&p, 0.25)).unwrap();
        assert_eq!(v["actions"][0]["object"], 2);
        assert_eq!(v["actions"][0]["from"], serde_json::json!([3.0, 4.0]));
        assert_eq!(v["steps"], 1);
        assert_eq!(v["total_displacement"], 13.0);
        assert_eq!(v["wall_time"], 0.25);
    }
}
