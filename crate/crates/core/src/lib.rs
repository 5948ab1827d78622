//! Multi-stage Monte Carlo tree search for prehensile object rearrangement
//! in a confined planar workspace that is only reachable through its front.
//!
//! The pipeline:
//!
//! 1. [`topology`] orders the objects so that goals deep in the workspace
//!    are filled before the goals in front of them.
//! 2. [`mcts`] runs one search per object in that order, moving only objects
//!    that are not yet finalized, until the focus object rests at its goal.
//! 3. [`orchestrator`] concatenates the stage plans, shortens them and
//!    replays the result against the collision model in [`motion`].
//!
//! ```
//! use msmcts::{generate_scene, plan, validate_plan, SceneConfig, SearchBudget};
//!
//! let scene = generate_scene(&SceneConfig::with_objects(4, 7)).unwrap();
//! let report = plan(&scene, &SearchBudget::default());
//! if let Some(p) = &report.plan {
//!     assert!(validate_plan(&scene, p).valid);
//! }
//! ```

pub mod geometry;
pub mod harness;
pub mod mcts;
pub mod motion;
pub mod orchestrator;
pub mod scene;
pub mod topology;

pub use geometry::{
    disc_in_workspace, discs_overlap, tunnel_intersects_disc, tunnel_to, Disc, GeometryError,
    Point, Tunnel, Workspace,
};
pub use mcts::{solve_stage, SearchBudget, StageContext, StageError};
pub use motion::{action_valid, collision_objs, swept_volume, Action, SweptVolume};
pub use orchestrator::{
    optimize_plan, plan, replay, validate_plan, FailureKind, OptimizeError, Plan, PlanFile,
    PlanReport, ValidationReport,
};
pub use scene::{
    arrangement_valid, candidate_grid, generate_scene, Arrangement, ObjectId, Scene, SceneConfig,
    SceneError, SceneFile,
};
pub use topology::{build_dependency_graph, stage_order, DependencyGraph, StageOrder, TopologyError};
