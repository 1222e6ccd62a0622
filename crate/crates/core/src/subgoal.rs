//! Subgoal placement behind the chosen leader and the matching speed limit.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::config::FrameworkConfig;
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::leader::GroupAssignment;
use crate::scene::{AgentId, AgentState};

/// Clearances closer than this are considered equal.
pub const CLEARANCE_TIE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgoalCandidate {
    /// Rotation applied to the leader-to-robot offset.
    pub theta: f64,
    pub point: Vec2,
    /// Distance to the nearest other human, capped at the observable range.
    pub clearance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderDecision {
    pub leader: Option<AgentId>,
    /// Group member actually followed (the leader itself when ungrouped).
    pub effective_leader: Option<AgentId>,
    pub subgoal: Vec2,
    pub speed_limit: f64,
    pub candidates: Vec<SubgoalCandidate>,
}

impl LeaderDecision {
    /// Plan straight for `goal` at the full speed limit.
    pub fn fallback(goal: Vec2, config: &FrameworkConfig) -> Self {
        LeaderDecision {
            leader: None,
            effective_leader: None,
            subgoal: goal,
            speed_limit: config.robot_speed_limit,
            candidates: Vec::new(),
        }
    }
}

/// The member of the leader's group nearest the robot (ties to the lower id),
/// so the robot never plans into the middle of a group.
pub fn effective_leader(
    leader: AgentId,
    groups: &GroupAssignment,
    robot_pos: Vec2,
    positions: &[(AgentId, Vec2)],
) -> AgentId {
    let Some(members) = groups.members_of(leader) else {
        return leader;
    };
    if members.len() < 2 {
        return leader;
    }
    let mut best: Option<(f64, AgentId)> = None;
    for &m in members {
        let Some(p) = positions.iter().find(|(id, _)| *id == m).map(|(_, p)| *p) else {
            continue;
        };
        let d = p.distance(robot_pos);
        best = match best {
            Some((bd, bid)) if bd < d || (bd == d && bid < m) => Some((bd, bid)),
            _ => Some((d, m)),
        };
    }
    best.map(|(_, id)| id).unwrap_or(leader)
}

/// Number of arc samples for a given angular step.
pub fn candidate_count(delta_theta: f64) -> usize {
    (FRAC_PI_2 / delta_theta - 1e-9).ceil() as usize + 1
}

/// Points on the circle of radius `follow_distance` about the leader, on the
/// robot-facing side, spanning ±π/4 around the leader-robot axis.
///
/// The last angle is capped at π/4 when the step does not divide the span.
pub fn sample_candidates(
    robot_pos: Vec2,
    leader_pos: Vec2,
    follow_distance: f64,
    delta_theta: f64,
) -> Result<Vec<(f64, Vec2)>> {
    let axis = (leader_pos - robot_pos).normalized().ok_or_else(|| {
        Error::DegeneratePose("robot and leader positions coincide".into())
    })?;
    if !(delta_theta > 0.0 && delta_theta <= FRAC_PI_2) {
        return Err(Error::InvalidConfig("delta_theta must lie in (0, pi/2]".into()));
    }
    let out = (0..candidate_count(delta_theta))
        .map(|m| {
            let theta = (-FRAC_PI_4 + m as f64 * delta_theta).min(FRAC_PI_4);
            (theta, leader_pos - axis.rotated(theta) * follow_distance)
        })
        .collect();
    Ok(out)
}

/// Index of the candidate farthest from its nearest other human.
///
/// Clearances are capped at `max_clearance`; near-ties (within
/// [`CLEARANCE_TIE_TOLERANCE`]) go to the smallest |θ|, then the lower index.
pub fn choose_subgoal(
    candidates: &[(f64, Vec2)],
    other_humans: &[Vec2],
    max_clearance: f64,
) -> Result<(usize, Vec<f64>)> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no subgoal candidates".into()));
    }
    let clearances: Vec<f64> = candidates
        .iter()
        .map(|(_, p)| {
            other_humans
                .iter()
                .map(|h| h.distance(*p))
                .fold(f64::INFINITY, f64::min)
                .min(max_clearance)
        })
        .collect();
    let best = clearances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut chosen: Option<usize> = None;
    for (m, c) in clearances.iter().enumerate() {
        if *c < best - CLEARANCE_TIE_TOLERANCE {
            continue;
        }
        chosen = match chosen {
            Some(k) if candidates[k].0.abs() <= candidates[m].0.abs() => Some(k),
            _ => Some(m),
        };
    }
    Ok((chosen.expect("at least one candidate attains the maximum"), clearances))
}

/// Match the leader's speed when close, catch up when far. Never below the
/// configured floor or above the robot's limit.
pub fn adapt_speed(robot_pos: Vec2, leader: &AgentState, config: &FrameworkConfig) -> f64 {
    let v = if robot_pos.distance(leader.position) <= config.tau_catchup {
        leader.speed()
    } else {
        config.v_catchup
    };
    v.clamp(config.min_speed_limit, config.robot_speed_limit)
}

/// Subgoal and speed limit for this tick. Without a leader the robot plans
/// for its global goal directly.
pub fn decide(
    robot: &AgentState,
    leader: Option<AgentId>,
    groups: &GroupAssignment,
    humans: &[(AgentId, AgentState)],
    config: &FrameworkConfig,
    global_goal: Vec2,
) -> Result<LeaderDecision> {
    let Some(leader) = leader else {
        return Ok(LeaderDecision::fallback(global_goal, config));
    };
    let positions: Vec<(AgentId, Vec2)> = humans.iter().map(|(id, s)| (*id, s.position)).collect();
    let followed = effective_leader(leader, groups, robot.position, &positions);
    let followed_state = humans
        .iter()
        .find(|(id, _)| *id == followed)
        .map(|(_, s)| *s)
        .ok_or(Error::UnknownAgent(followed))?;

    let candidates = sample_candidates(
        robot.position,
        followed_state.position,
        config.follow_distance,
        config.delta_theta,
    )?;
    let others: Vec<Vec2> = humans
        .iter()
        .filter(|(id, s)| {
            *id != followed && s.position.distance(robot.position) <= config.observable_range
        })
        .map(|(_, s)| s.position)
        .collect();
    let (index, clearances) = choose_subgoal(&candidates, &others, config.observable_range)?;
    Ok(LeaderDecision {
        leader: Some(leader),
        effective_leader: Some(followed),
        subgoal: candidates[index].1,
        speed_limit: adapt_speed(robot.position, &followed_state, config),
        candidates: candidates
            .iter()
            .zip(clearances)
            .map(|(&(theta, point), clearance)| SubgoalCandidate {
                theta,
                point,
                clearance,
            })
            .collect(),
    })
}
