//! Linear motion planner abstraction: every relocation is a straight pick
//! motion from the robot home and a straight place motion from the home,
//! each modelled as a tunnel.

use serde::{Deserialize, Serialize};

use crate::geometry::{
    disc_in_workspace, discs_overlap, tunnel_intersects_disc, tunnel_to, GeometryError, Point,
    Tunnel, EPS,
};
use crate::scene::{Arrangement, ObjectId, Scene};

/// One pick-and-place relocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub object: ObjectId,
    pub from: Point,
    pub to: Point,
}

impl Action {
    pub fn new(object: ObjectId, from: Point, to: Point) -> Self {
        Self { object, from, to }
    }

    pub fn displacement(&self) -> f64 {
        self.from.distance(self.to)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweptVolume {
    pub pick: Tunnel,
    pub place: Tunnel,
}

impl SweptVolume {
    pub fn tunnels(&self) -> [Tunnel; 2] {
        [self.pick, self.place]
    }
}

/// Tunnel from the robot home to `target` with the scene's radius and width.
pub fn tunnel_for(scene: &Scene, target: Point) -> Result<Tunnel, GeometryError> {
    tunnel_to(
        target,
        scene.robot_home,
        scene.object_radius,
        scene.tunnel_width,
    )
}

pub fn swept_volume(scene: &Scene, action: &Action) -> Result<SweptVolume, GeometryError> {
    Ok(SweptVolume {
        pick: tunnel_for(scene, action.from)?,
        place: tunnel_for(scene, action.to)?,
    })
}

/// Whether `action` can be executed from arrangement `a`: both tunnels clear
/// every other object, and the destination is in bounds and overlaps nothing.
/// The moved object itself never counts as an obstacle.
pub fn action_valid(scene: &Scene, a: &Arrangement, action: &Action) -> bool {
    let idx = action.object.index();
    if idx >= a.len() || !a.get(action.object).approx_eq(action.from, EPS) {
        return false;
    }
    if action.from.approx_eq(action.to, EPS) {
        return false;
    }
    let Ok(volume) = swept_volume(scene, action) else {
        return false;
    };
    let dest = scene.disc_at(action.to);
    if !disc_in_workspace(&dest, &scene.workspace) {
        return false;
    }
    a.objects().filter(|&o| o != action.object).all(|o| {
        let d = scene.disc_at(a.get(o));
        !tunnel_intersects_disc(&volume.pick, &d)
            && !tunnel_intersects_disc(&volume.place, &d)
            && !discs_overlap(&dest, &d)
    })
}

/// Objects from `candidates` whose current disc intersects `tunnel`, in the
/// order given.
pub fn collision_objs(
    scene: &Scene,
    a: &Arrangement,
    candidates: impl IntoIterator<Item = ObjectId>,
    tunnel: &Tunnel,
) -> Vec<ObjectId> {
    candidates
        .into_iter()
        .filter(|&o| tunnel_intersects_disc(tunnel, &scene.disc_at(a.get(o))))
        .collect()
}

/// Applies `action` in place, without checking it.
pub fn apply(a: &mut Arrangement, action: &Action) {
    a.set(action.object, action.to);
}
