//! Leader selection: group detection, reachability filtering, scoring and
//! previous-leader hysteresis.

mod groups;
mod scoring;

use serde::{Deserialize, Serialize};

pub use groups::{detect_groups, GroupAssignment};
pub use scoring::{score_heading, score_position, score_speed, weighted_score};

use crate::config::FrameworkConfig;
use crate::error::Result;
use crate::geometry::Vec2;
use crate::scene::{history_mean_speed, history_mean_velocity, AgentId, AgentState, Scene, Track};
use crate::visibility::{reach_score, Disc, OcclusionScan};

/// What the robot knows about one human at the current tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HumanObservation {
    pub id: AgentId,
    pub state: AgentState,
    /// Mean of the recent finite-difference velocities.
    pub mean_velocity: Vec2,
    /// Mean of the recent speeds (not the norm of `mean_velocity`).
    pub mean_speed: f64,
}

impl HumanObservation {
    /// Summarise the history of `track` up to `frame`.
    pub fn from_track(
        id: AgentId,
        state: AgentState,
        track: &Track,
        frame: u64,
        window: usize,
        rate: f64,
    ) -> Result<Self> {
        Ok(HumanObservation {
            id,
            state,
            mean_velocity: history_mean_velocity(id, track, frame, window, rate)?,
            mean_speed: history_mean_speed(id, track, frame, window, rate)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderScore {
    pub id: AgentId,
    pub s_head: f64,
    pub s_vel: f64,
    pub s_pos: f64,
    /// Weighted score before the incumbent bonus.
    pub raw_total: f64,
    /// `raw_total` plus the bonus when this human is the qualified incumbent.
    pub total: f64,
    pub reachable: bool,
    pub reach_value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LeaderSelection {
    pub leader: Option<AgentId>,
    /// One entry per observed human, sorted by id.
    pub scores: Vec<LeaderScore>,
    pub groups: GroupAssignment,
}

/// Humans within the observable range of the robot, in input order.
pub fn observed<'a>(
    robot: &AgentState,
    humans: &'a [HumanObservation],
    range: f64,
) -> impl Iterator<Item = &'a HumanObservation> + 'a {
    let origin = robot.position;
    humans
        .iter()
        .filter(move |h| h.state.position.distance(origin) <= range)
}

/// Pick this tick's leader, if any.
///
/// Every human in `humans` occludes; only those within the observable range
/// are grouped and scored. Discs that contain the robot itself (a collision
/// in progress) are ignored as occluders.
pub fn select_leader(
    robot: &AgentState,
    humans: &[HumanObservation],
    scene: &Scene,
    previous_leader: Option<AgentId>,
    config: &FrameworkConfig,
) -> Result<LeaderSelection> {
    let range = config.observable_range;
    let mut seen: Vec<&HumanObservation> = observed(robot, humans, range).collect();
    seen.sort_by_key(|h| h.id);

    let group_input: Vec<(AgentId, AgentState)> = seen.iter().map(|h| (h.id, h.state)).collect();
    let groups = detect_groups(&group_input, config.tau_group_dis, config.tau_group_vel);

    let discs: Vec<Disc> = humans
        .iter()
        .map(|h| Disc::new(h.state.position, config.agent_radius))
        .collect();
    let scan = OcclusionScan::new(
        robot.position,
        &discs,
        &scene.obstacles,
        range,
        config.ray_count,
    )?;

    let weights = config.weights();
    let mut scores = Vec::with_capacity(seen.len());
    for h in &seen {
        let idx = humans.iter().position(|o| o.id == h.id);
        let region = scan.region_excluding(idx);
        let reach_value = reach_score(h.state.position, &region);
        let reachable = reach_value >= config.tau_reach;
        let s_head = score_heading(h.mean_velocity, h.state.position, scene.goal);
        let s_vel = score_speed(h.mean_speed, config.v_pref);
        let s_pos = score_position(h.state.position, robot.position, scene.goal, range);
        let raw_total = weighted_score(weights, s_head, s_vel, s_pos);
        let bonus = if reachable && previous_leader == Some(h.id) {
            config.leader_bonus
        } else {
            0.0
        };
        scores.push(LeaderScore {
            id: h.id,
            s_head,
            s_vel,
            s_pos,
            raw_total,
            total: raw_total + bonus,
            reachable,
            reach_value,
        });
    }

    let leader = best_candidate(&scores)
        .filter(|s| s.total >= config.tau_leader)
        .map(|s| s.id);
    Ok(LeaderSelection {
        leader,
        scores,
        groups,
    })
}

/// Highest total among reachable humans; ties go to the lower id.
fn best_candidate(scores: &[LeaderScore]) -> Option<&LeaderScore> {
    let mut best: Option<&LeaderScore> = None;
    for s in scores.iter().filter(|s| s.reachable) {
        best = match best {
            Some(b) if b.total > s.total || (b.total == s.total && b.id < s.id) => Some(b),
            _ => Some(s),
        };
    }
    best
}
