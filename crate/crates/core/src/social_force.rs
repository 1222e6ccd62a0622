//! Holonomic social-force integration, the base planner for the robot and
//! for optional reactive crowd agents.

use crate::config::SfParams;
use crate::error::{Error, Result};
use crate::geometry::{Segment, Vec2};
use crate::scene::AgentState;

/// A circular neighbour: centre and radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbour {
    pub position: Vec2,
    pub radius: f64,
}

impl Neighbour {
    pub fn new(position: Vec2, radius: f64) -> Self {
        Neighbour { position, radius }
    }
}

/// Relaxation towards `v_max` along the goal direction. Zero inside the
/// arrival radius.
pub fn goal_force(state: &AgentState, goal: Vec2, v_max: f64, params: &SfParams) -> Vec2 {
    let to_goal = goal - state.position;
    if to_goal.norm() <= params.arrival_radius {
        return Vec2::ZERO;
    }
    let desired = to_goal.normalized().map(|u| u * v_max).unwrap_or(Vec2::ZERO);
    (desired - state.velocity) * (1.0 / params.relaxation_time)
}

/// Exponential push away from one neighbour.
pub fn neighbour_force(
    position: Vec2,
    radius: f64,
    other: &Neighbour,
    params: &SfParams,
) -> Result<Vec2> {
    let away = position - other.position;
    let d = away.norm();
    let dir = away
        .normalized()
        .ok_or_else(|| Error::DegeneratePose("agent coincides with a neighbour".into()))?;
    let magnitude =
        params.repulsion_strength * ((radius + other.radius - d) / params.repulsion_range).exp();
    Ok(dir * magnitude)
}

/// Exponential push away from the closest point of a wall.
pub fn obstacle_force(position: Vec2, radius: f64, wall: &Segment, params: &SfParams) -> Vec2 {
    let closest = wall.closest_point(position);
    let away = position - closest;
    let Some(dir) = away.normalized() else {
        // exactly on the wall; no defined direction
        return Vec2::ZERO;
    };
    let magnitude = params.obstacle_strength * ((radius - away.norm()) / params.obstacle_range).exp();
    dir * magnitude
}

/// One explicit Euler step: accumulate forces, update and clamp the
/// velocity, then move.
#[allow(clippy::too_many_arguments)]
pub fn sf_step(
    state: &AgentState,
    radius: f64,
    goal: Vec2,
    v_max: f64,
    neighbours: &[Neighbour],
    obstacles: &[Segment],
    params: &SfParams,
    dt: f64,
) -> Result<AgentState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    let mut force = goal_force(state, goal, v_max, params);
    for n in neighbours {
        force += neighbour_force(state.position, radius, n, params)?;
    }
    for wall in obstacles {
        force += obstacle_force(state.position, radius, wall, params);
    }
    let velocity = (state.velocity + force * dt).clamp_length(v_max);
    let position = state.position + velocity * dt;
    AgentState::new(position, velocity)
}
