//! Problem instances: objects, start/goal arrangements, placement candidates
//! and the seeded random scene generator.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{disc_in_workspace, discs_overlap, Disc, Point, Workspace, EPS};

/// Rejection rounds allowed per arrangement before giving up.
pub const MAX_REJECTION_ROUNDS: usize = 10_000;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("no placement candidate fits a radius-{radius} disc in a {width}x{depth} workspace")]
    EmptyGrid { width: f64, depth: f64, radius: f64 },
    #[error("invalid scene configuration: {0}")]
    InvalidConfig(String),
    #[error("could not sample a valid {which} arrangement of {n} objects in {rounds} rounds")]
    GenerationFailure {
        which: &'static str,
        n: usize,
        rounds: usize,
    },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub usize);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

/// Region of every object at one step, indexed by [`ObjectId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Arrangement(pub Vec<Point>);

impl Arrangement {
    pub fn new(regions: Vec<Point>) -> Self {
        Self(regions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: ObjectId) -> Point {
        self.0[id.0]
    }

    pub fn set(&mut self, id: ObjectId, p: Point) {
        self.0[id.0] = p;
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.0.len()).map(ObjectId)
    }

    pub fn regions(&self) -> &[Point] {
        &self.0
    }

    /// Coordinate-wise match within `tol`.
    pub fn approx_eq(&self, other: &Arrangement, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .0
                .iter()
                .zip(&other.0)
                .all(|(a, b)| a.approx_eq(*b, tol))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub workspace: Workspace,
    pub object_radius: f64,
    pub robot_home: Point,
    pub tunnel_width: f64,
    pub grid_resolution: f64,
    pub start: Arrangement,
    pub goal: Arrangement,
    pub candidates: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub workspace: Workspace,
    pub n_objects: usize,
    pub object_radius: f64,
    pub min_center_separation: f64,
    pub tunnel_width: f64,
    pub grid_resolution: f64,
    /// `None` places the robot at `(width / 2, -3)`.
    pub robot_home: Option<Point>,
    pub rng_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            workspace: Workspace {
                width: 20.0,
                depth: 20.0,
            },
            n_objects: 4,
            object_radius: 1.0,
            min_center_separation: 4.0,
            tunnel_width: 4.0,
            grid_resolution: 1.0,
            robot_home: None,
            rng_seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn with_objects(n_objects: usize, rng_seed: u64) -> Self {
        Self {
            n_objects,
            rng_seed,
            ..Self::default()
        }
    }
}

pub fn default_robot_home(workspace: &Workspace) -> Point {
    Point::new(workspace.width / 2.0, -3.0)
}

/// Grid points with pitch `resolution`, starting at `object_radius` on each
/// axis, whose disc fits the workspace. Row-major (y outer, x inner).
pub fn candidate_grid(
    workspace: &Workspace,
    object_radius: f64,
    resolution: f64,
) -> Result<Vec<Point>, SceneError> {
    let empty = || SceneError::EmptyGrid {
        width: workspace.width,
        depth: workspace.depth,
        radius: object_radius,
    };
    if !resolution.is_finite() || resolution <= 0.0 {
        return Err(SceneError::InvalidConfig(format!(
            "grid resolution must be positive, got {resolution}"
        )));
    }
    let steps = |extent: f64| -> Option<usize> {
        let span = extent - 2.0 * object_radius;
        if span < -EPS {
            None
        } else {
            Some(((span.max(0.0) + EPS) / resolution).floor() as usize + 1)
        }
    };
    let (nx, ny) = match (steps(workspace.width), steps(workspace.depth)) {
        (Some(nx), Some(ny)) => (nx, ny),
        _ => return Err(empty()),
    };
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(Point::new(
                object_radius + i as f64 * resolution,
                object_radius + j as f64 * resolution,
            ));
        }
    }
    if out.is_empty() {
        return Err(empty());
    }
    Ok(out)
}

fn sample_arrangement(
    rng: &mut ChaCha8Rng,
    candidates: &[Point],
    n: usize,
    min_sep: f64,
    which: &'static str,
) -> Result<Arrangement, SceneError> {
    let mut regions = Vec::with_capacity(n);
    for _ in 0..MAX_REJECTION_ROUNDS {
        regions.clear();
        regions.extend((0..n).map(|_| *candidates.choose(rng).expect("non-empty grid")));
        let ok = (0..n).all(|i| {
            (i + 1..n).all(|j| regions[i].distance(regions[j]) >= min_sep - EPS)
        });
        if ok {
            return Ok(Arrangement(regions));
        }
    }
    Err(SceneError::GenerationFailure {
        which,
        n,
        rounds: MAX_REJECTION_ROUNDS,
    })
}

/// Samples independent start and goal arrangements over the candidate grid.
/// Each arrangement is drawn whole and rejected unless every pair of centres
/// is at least `min_center_separation` apart.
pub fn generate_scene(config: &SceneConfig) -> Result<Scene, SceneError> {
    if config.n_objects == 0 {
        return Err(SceneError::InvalidConfig("n_objects must be at least 1".into()));
    }
    if config.min_center_separation < 2.0 * config.object_radius - EPS {
        return Err(SceneError::InvalidConfig(format!(
            "min_center_separation {} is below the object diameter {}",
            config.min_center_separation,
            2.0 * config.object_radius
        )));
    }
    let candidates = candidate_grid(
        &config.workspace,
        config.object_radius,
        config.grid_resolution,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let n = config.n_objects;
    let sep = config.min_center_separation;
    let start = sample_arrangement(&mut rng, &candidates, n, sep, "start")?;
    let goal = sample_arrangement(&mut rng, &candidates, n, sep, "goal")?;
    let scene = Scene {
        workspace: config.workspace,
        object_radius: config.object_radius,
        robot_home: config
            .robot_home
            .unwrap_or_else(|| default_robot_home(&config.workspace)),
        tunnel_width: config.tunnel_width,
        grid_resolution: config.grid_resolution,
        start,
        goal,
        candidates,
    };
    scene.check()?;
    Ok(scene)
}

/// Every disc inside the workspace and no pair overlapping.
pub fn arrangement_valid(a: &Arrangement, scene: &Scene) -> bool {
    if a.len() != scene.start.len() {
        return false;
    }
    let discs: Vec<Disc> = a.0.iter().map(|&p| scene.disc_at(p)).collect();
    discs.iter().all(|d| d.center.is_finite() && disc_in_workspace(d, &scene.workspace))
        && discs
            .iter()
            .enumerate()
            .all(|(i, a)| discs[i + 1..].iter().all(|b| !discs_overlap(a, b)))
}

impl Scene {
    /// Builds a scene from explicit arrangements, deriving the candidate grid.
    pub fn new(
        workspace: Workspace,
        object_radius: f64,
        robot_home: Point,
        tunnel_width: f64,
        grid_resolution: f64,
        start: Arrangement,
        goal: Arrangement,
    ) -> Result<Self, SceneError> {
        let candidates = candidate_grid(&workspace, object_radius, grid_resolution)?;
        let scene = Scene {
            workspace,
            object_radius,
            robot_home,
            tunnel_width,
            grid_resolution,
            start,
            goal,
            candidates,
        };
        scene.check()?;
        Ok(scene)
    }

    pub fn num_objects(&self) -> usize {
        self.start.len()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.start.len()).map(ObjectId)
    }

    pub fn disc_at(&self, p: Point) -> Disc {
        Disc::new(p, self.object_radius)
    }

    fn check(&self) -> Result<(), SceneError> {
        let bad = |msg: String| Err(SceneError::InvalidScene(msg));
        if !(self.workspace.width > 0.0 && self.workspace.depth > 0.0) {
            return bad("workspace dimensions must be positive".into());
        }
        if self.object_radius.is_nan()
            || self.object_radius <= 0.0
            || self.tunnel_width.is_nan()
            || self.tunnel_width <= 0.0
        {
            return bad("object radius and tunnel width must be positive".into());
        }
        if self.start.len() != self.goal.len() {
            return bad(format!(
                "start has {} objects but goal has {}",
                self.start.len(),
                self.goal.len()
            ));
        }
        if self.robot_home.y.is_nan() || self.robot_home.y >= 0.0 {
            return bad("robot home must lie in front of the opening (y < 0)".into());
        }
        if !arrangement_valid(&self.start, self) {
            return bad("start arrangement overlaps or leaves the workspace".into());
        }
        if !arrangement_valid(&self.goal, self) {
            return bad("goal arrangement overlaps or leaves the workspace".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, SceneError> {
        Ok(serde_json::to_string_pretty(&SceneFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self, SceneError> {
        let file: SceneFile = serde_json::from_str(s)?;
        file.into_scene()
    }
}

/// On-disk scene layout. Candidates are rebuilt from `grid_resolution`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub workspace: Workspace,
    pub object_radius: f64,
    pub robot_home: Point,
    pub tunnel_width: f64,
    pub grid_resolution: f64,
    pub start: Arrangement,
    pub goal: Arrangement,
}

impl From<&Scene> for SceneFile {
    fn from(s: &Scene) -> Self {
        SceneFile {
            workspace: s.workspace,
            object_radius: s.object_radius,
            robot_home: s.robot_home,
            tunnel_width: s.tunnel_width,
            grid_resolution: s.grid_resolution,
            start: s.start.clone(),
            goal: s.goal.clone(),
        }
    }
}

impl SceneFile {
    pub fn into_scene(self) -> Result<Scene, SceneError> {
        Scene::new(
            self.workspace,
            self.object_radius,
            self.robot_home,
            self.tunnel_width,
            self.grid_resolution,
            self.start,
            self.goal,
        )
    }
}
