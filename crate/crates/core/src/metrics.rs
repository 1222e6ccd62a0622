//! Collision counts, travel time and path length over recorded runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{OrientedRect, Segment, Vec2};
use crate::scene::{AgentId, AgentKind, Footprint};
use crate::sim::{RunRecord, RunStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Every agent is a disc of the configured agent radius.
    Uniform,
    /// Bicycles and cars are oriented rectangles of their real dimensions.
    Realistic,
}

/// Does the robot disc overlap one agent's footprint?
pub fn overlaps(
    robot: Vec2,
    robot_radius: f64,
    agent: Vec2,
    agent_radius: f64,
    footprint: Footprint,
    heading: Vec2,
) -> bool {
    match footprint {
        Footprint::Disc => robot.distance(agent) < robot_radius + agent_radius,
        Footprint::OrientedRect { length, width } => {
            let rect = OrientedRect {
                center: agent,
                axis: heading,
                length,
                width,
            };
            rect.distance_to(robot) < robot_radius
        }
    }
}

fn footprint_for(kind: AgentKind, regime: Regime) -> Footprint {
    match regime {
        Regime::Uniform => Footprint::Disc,
        Regime::Realistic => Footprint::realistic(kind),
    }
}

/// Per tick, which agents the robot overlaps. Rectangles follow the agent's
/// velocity, keeping the last nonzero heading while it stands still (+x
/// before it has ever moved).
pub fn colliding_agents(record: &RunRecord, regime: Regime) -> Vec<Vec<AgentId>> {
    let mut heading: BTreeMap<AgentId, Vec2> = BTreeMap::new();
    record
        .ticks
        .iter()
        .map(|t| {
            let mut hits = Vec::new();
            for (id, s) in &t.humans {
                let h = heading.entry(*id).or_insert(Vec2::new(1.0, 0.0));
                if let Some(u) = s.velocity.normalized() {
                    *h = u;
                }
                let kind = record.kinds.get(id).copied().unwrap_or(AgentKind::Pedestrian);
                if overlaps(
                    t.robot.position,
                    record.robot_radius,
                    s.position,
                    record.agent_radius,
                    footprint_for(kind, regime),
                    *h,
                ) {
                    hits.push(*id);
                }
            }
            hits
        })
        .collect()
}

/// One flag per tick: does the robot overlap any agent?
pub fn collision_flags(record: &RunRecord, regime: Regime) -> Vec<bool> {
    colliding_agents(record, regime)
        .into_iter()
        .map(|hits| !hits.is_empty())
        .collect()
}

/// Ticks in which the robot disc touches a wall.
pub fn wall_contacts(record: &RunRecord, obstacles: &[Segment]) -> usize {
    record
        .ticks
        .iter()
        .filter(|t| {
            obstacles
                .iter()
                .any(|w| w.distance_to(t.robot.position) < record.robot_radius)
        })
        .count()
}

/// Summed robot displacement between consecutive ticks.
pub fn path_length(record: &RunRecord) -> f64 {
    record
        .ticks
        .windows(2)
        .map(|w| w[1].robot.position.distance(w[0].robot.position))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub seed: u64,
    pub tcc_uniform: usize,
    pub tcc_realistic: usize,
    pub tcc_pairwise_uniform: usize,
    pub tcc_pairwise_realistic: usize,
    /// Seconds to arrival, or the full time budget on timeout.
    pub time: f64,
    pub distance: f64,
    pub timeout: bool,
    pub wall_contact: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tcc_uniform: f64,
    pub tcc_realistic: f64,
    pub t_avg: f64,
    pub d_avg: f64,
    pub per_trial: Vec<TrialMetrics>,
    pub trial_count: usize,
    pub tcc_pairwise_uniform: f64,
    pub tcc_pairwise_realistic: f64,
    pub timeouts: usize,
    pub wall_contact: f64,
}

pub fn trial_metrics(record: &RunRecord, obstacles: &[Segment]) -> TrialMetrics {
    let uniform = colliding_agents(record, Regime::Uniform);
    let realistic = colliding_agents(record, Regime::Realistic);
    let timeout = record.status == RunStatus::Timeout;
    let ticks = if timeout {
        record.max_ticks
    } else {
        record.final_tick()
    };
    TrialMetrics {
        seed: record.seed,
        tcc_uniform: uniform.iter().filter(|h| !h.is_empty()).count(),
        tcc_realistic: realistic.iter().filter(|h| !h.is_empty()).count(),
        tcc_pairwise_uniform: uniform.iter().map(Vec::len).sum(),
        tcc_pairwise_realistic: realistic.iter().map(Vec::len).sum(),
        time: ticks as f64 * record.dt,
        distance: path_length(record),
        timeout,
        wall_contact: wall_contacts(record, obstacles),
    }
}

/// Order-independent mean: values are summed in sorted order.
fn mean(mut values: Vec<f64>) -> f64 {
    let n = values.len() as f64;
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / n
}

/// Aggregate a batch of runs.
pub fn summarize(records: &[RunRecord], obstacles: &[Segment]) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("cannot summarise an empty batch".into()));
    }
    let per_trial: Vec<TrialMetrics> = records.iter().map(|r| trial_metrics(r, obstacles)).collect();
    let avg = |f: &dyn Fn(&TrialMetrics) -> f64| mean(per_trial.iter().map(f).collect());
    Ok(MetricsReport {
        tcc_uniform: avg(&|t| t.tcc_uniform as f64),
        tcc_realistic: avg(&|t| t.tcc_realistic as f64),
        t_avg: avg(&|t| t.time),
        d_avg: avg(&|t| t.distance),
        tcc_pairwise_uniform: avg(&|t| t.tcc_pairwise_uniform as f64),
        tcc_pairwise_realistic: avg(&|t| t.tcc_pairwise_realistic as f64),
        timeouts: per_trial.iter().filter(|t| t.timeout).count(),
        wall_contact: avg(&|t| t.wall_contact as f64),
        trial_count: per_trial.len(),
        per_trial,
    })
}
