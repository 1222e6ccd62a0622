//! Simulated range scan around the robot and the signed line-of-sight
//! reachability score derived from it.
//!
//! The visible region is the star-shaped polygon whose vertices are the
//! endpoints of `ray_count` evenly spaced rays, each stopped by the nearest
//! occluder or clamped to the observable range. A human's reachability is
//! its signed distance to that polygon's boundary: positive inside, negative
//! outside.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::config::FrameworkConfig;
use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, ray_disc_hit, ray_segment_hit, Segment, Vec2};
use crate::leader::GroupAssignment;
use crate::scene::{AgentId, AgentState, Scene};

/// Circular occluder (an agent's planning disc).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Vec2, radius: f64) -> Self {
        Disc { center, radius }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.distance(self.center) < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleRegion {
    pub origin: Vec2,
    /// Ray endpoints ordered by angle, starting at angle zero.
    pub boundary: Vec<Vec2>,
    pub max_range: f64,
}

impl VisibleRegion {
    pub fn ray_count(&self) -> usize {
        self.boundary.len()
    }

    /// Point-in-polygon test exploiting the star shape: only the boundary
    /// edge of the angular sector containing `p` matters.
    pub fn contains(&self, p: Vec2) -> bool {
        let rel = p - self.origin;
        if rel == Vec2::ZERO {
            return true;
        }
        let n = self.boundary.len();
        let step = TAU / n as f64;
        let mut angle = rel.angle();
        if angle < 0.0 {
            angle += TAU;
        }
        let k = ((angle / step).floor() as usize) % n;
        let v0 = self.boundary[k] - self.origin;
        let v1 = self.boundary[(k + 1) % n] - self.origin;
        let edge = v1 - v0;
        if edge.norm_squared() == 0.0 {
            return rel.norm() <= v0.norm();
        }
        // origin side of the edge is inside
        let side_p = edge.cross(rel - v0);
        let side_o = edge.cross(-v0);
        if side_o == 0.0 {
            // edge passes through the origin (robot touching a wall)
            return false;
        }
        side_p == 0.0 || side_p.signum() == side_o.signum()
    }

    /// Unsigned distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        let n = self.boundary.len();
        (0..n)
            .map(|k| point_segment_distance(self.boundary[k], self.boundary[(k + 1) % n], p))
            .fold(f64::INFINITY, f64::min)
    }
}

fn ray_directions(ray_count: usize) -> impl Iterator<Item = Vec2> {
    let step = TAU / ray_count as f64;
    (0..ray_count).map(move |k| Vec2::from_angle(k as f64 * step))
}

fn check_scan_args(range: f64, ray_count: usize) -> Result<()> {
    if ray_count < 8 {
        return Err(Error::InvalidConfig("ray_count must be at least 8".into()));
    }
    if !(range > 0.0 && range.is_finite()) {
        return Err(Error::InvalidConfig("observable range must be positive".into()));
    }
    Ok(())
}

/// Cast `ray_count` rays from `robot`, stopping each at the nearest occluder
/// and clamping to `range`.
pub fn build_visible_region(
    robot: Vec2,
    occluder_discs: &[Disc],
    obstacle_segments: &[Segment],
    range: f64,
    ray_count: usize,
) -> Result<VisibleRegion> {
    check_scan_args(range, ray_count)?;
    if let Some(d) = occluder_discs.iter().find(|d| d.contains(robot)) {
        return Err(Error::DegeneratePose(format!(
            "robot at ({:.3}, {:.3}) lies inside occluder at ({:.3}, {:.3})",
            robot.x, robot.y, d.center.x, d.center.y
        )));
    }
    let boundary = ray_directions(ray_count)
        .map(|dir| {
            let mut t = range;
            for d in occluder_discs {
                if let Some(hit) = ray_disc_hit(robot, dir, d.center, d.radius) {
                    t = t.min(hit);
                }
            }
            for s in obstacle_segments {
                if let Some(hit) = ray_segment_hit(robot, dir, s.a, s.b) {
                    t = t.min(hit);
                }
            }
            robot + dir * t
        })
        .collect();
    Ok(VisibleRegion {
        origin: robot,
        boundary,
        max_range: range,
    })
}

/// Signed distance to the region boundary: positive inside, negative outside.
pub fn reach_score(human: Vec2, region: &VisibleRegion) -> f64 {
    let d = region.boundary_distance(human);
    if region.contains(human) {
        d
    } else {
        -d
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reachability {
    pub reachable: bool,
    pub score: f64,
}

/// Reachability of one human. Its own disc is left out of the occluders;
/// every other human (group-mates included) and every wall occludes.
///
/// `groups` is accepted for interface symmetry with leader selection; group
/// courtesy is applied when picking the subgoal, not here.
pub fn is_reachable(
    human_id: AgentId,
    robot: &AgentState,
    all_humans: &[(AgentId, Vec2)],
    scene: &Scene,
    _groups: &GroupAssignment,
    config: &FrameworkConfig,
) -> Result<Reachability> {
    let target = all_humans
        .iter()
        .find(|(id, _)| *id == human_id)
        .map(|(_, p)| *p)
        .ok_or(Error::UnknownAgent(human_id))?;
    let discs: Vec<Disc> = all_humans
        .iter()
        .filter(|(id, _)| *id != human_id)
        .map(|(_, p)| Disc::new(*p, config.agent_radius))
        .collect();
    let region = build_visible_region(
        robot.position,
        &discs,
        &scene.obstacles,
        config.observable_range,
        config.ray_count,
    )?;
    let score = reach_score(target, &region);
    Ok(Reachability {
        reachable: score >= config.tau_reach,
        score,
    })
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    t: f64,
    owner: Option<usize>,
}

/// One sweep shared by every candidate of a tick.
///
/// Keeps, per ray, the nearest hit and the nearest hit of a different owner,
/// so the region with any single disc removed can be produced without
/// re-casting. Discs containing the origin are ignored.
#[derive(Debug, Clone)]
pub struct OcclusionScan {
    origin: Vec2,
    range: f64,
    dirs: Vec<Vec2>,
    best: Vec<Hit>,
    second: Vec<Hit>,
}

impl OcclusionScan {
    pub fn new(
        origin: Vec2,
        discs: &[Disc],
        segments: &[Segment],
        range: f64,
        ray_count: usize,
    ) -> Result<Self> {
        check_scan_args(range, ray_count)?;
        let dirs: Vec<Vec2> = ray_directions(ray_count).collect();
        let relevant: Vec<(usize, &Disc)> = discs
            .iter()
            .enumerate()
            .filter(|(_, d)| {
                !d.contains(origin) && d.center.distance(origin) - d.radius <= range
            })
            .collect();
        let mut best = Vec::with_capacity(ray_count);
        let mut second = Vec::with_capacity(ray_count);
        for &dir in &dirs {
            let mut b = Hit { t: range, owner: None };
            let mut s = Hit { t: range, owner: None };
            for s_ in segments {
                if let Some(t) = ray_segment_hit(origin, dir, s_.a, s_.b) {
                    b.t = b.t.min(t);
                }
            }
            // walls are never excluded, so they cap both slots
            s.t = b.t;
            for &(i, d) in &relevant {
                if let Some(t) = ray_disc_hit(origin, dir, d.center, d.radius) {
                    if t < b.t {
                        s = b;
                        b = Hit { t, owner: Some(i) };
                    } else if t < s.t {
                        s = Hit { t, owner: Some(i) };
                    }
                }
            }
            best.push(b);
            second.push(s);
        }
        Ok(OcclusionScan {
            origin,
            range,
            dirs,
            best,
            second,
        })
    }

    /// Visible region with disc `excluded` (index into the constructor's
    /// slice) removed from the occluders.
    pub fn region_excluding(&self, excluded: Option<usize>) -> VisibleRegion {
        let boundary = self
            .dirs
            .iter()
            .zip(self.best.iter().zip(&self.second))
            .map(|(&dir, (b, s))| {
                let t = if excluded.is_some() && b.owner == excluded { s.t } else { b.t };
                self.origin + dir * t
            })
            .collect();
        VisibleRegion {
            origin: self.origin,
            boundary,
            max_range: self.range,
        }
    }
}
