use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::leader::LeaderScore;
use crate::metrics::{colliding_agents, Regime};
use crate::scene::{AgentId, AgentKind, AgentState};

use super::Mode;

pub const RECORD_HEADER: [&str; 12] = [
    "tick",
    "agent_id",
    "kind",
    "x",
    "y",
    "vx",
    "vy",
    "is_robot",
    "leader_id",
    "subgoal_x",
    "subgoal_y",
    "collision_flag",
];

pub const SCORES_HEADER: [&str; 9] = [
    "tick",
    "agent_id",
    "s_head",
    "s_vel",
    "s_pos",
    "raw_total",
    "total",
    "reachable",
    "reach_value",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Reached,
    Timeout,
}

/// Everything observed and decided at one tick.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub robot: AgentState,
    /// Active crowd agents, sorted by id.
    pub humans: Vec<(AgentId, AgentState)>,
    pub leader: Option<AgentId>,
    pub effective_leader: Option<AgentId>,
    /// The point the robot steered towards to reach this tick.
    pub subgoal: Option<Vec2>,
    pub speed_limit: Option<f64>,
    pub scores: Vec<LeaderScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub mode: Mode,
    pub dt: f64,
    pub goal: Vec2,
    pub robot_radius: f64,
    pub agent_radius: f64,
    pub max_ticks: u64,
    pub kinds: BTreeMap<AgentId, AgentKind>,
    pub ticks: Vec<TickRecord>,
    pub status: RunStatus,
}

/// Run parameters the CSV form does not carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordMeta {
    pub seed: u64,
    pub mode: Mode,
    pub dt: f64,
    pub goal: Vec2,
    pub robot_radius: f64,
    pub agent_radius: f64,
    pub arrival_radius: f64,
    pub max_ticks: u64,
}

fn opt_id(id: Option<AgentId>) -> String {
    id.map_or_else(|| "-1".to_string(), |i| i.0.to_string())
}

fn opt_f(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl RunRecord {
    pub fn final_tick(&self) -> u64 {
        self.ticks.last().map_or(0, |t| t.tick)
    }

    /// One row per tick per agent, robot first with id -1. Collision flags
    /// use the uniform regime; the robot row flags any overlap.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(RECORD_HEADER)?;
        let hits = colliding_agents(self, Regime::Uniform);
        for (t, hit) in self.ticks.iter().zip(&hits) {
            let tick = t.tick.to_string();
            let leader = opt_id(t.leader);
            let sx = opt_f(t.subgoal.map(|p| p.x));
            let sy = opt_f(t.subgoal.map(|p| p.y));
            let mut row = |id: String, kind: AgentKind, s: &AgentState, robot: bool, flag: bool| {
                w.write_record([
                    tick.as_str(),
                    &id,
                    kind.as_str(),
                    &s.position.x.to_string(),
                    &s.position.y.to_string(),
                    &s.velocity.x.to_string(),
                    &s.velocity.y.to_string(),
                    if robot { "1" } else { "0" },
                    &leader,
                    &sx,
                    &sy,
                    if flag { "1" } else { "0" },
                ])
            };
            row("-1".into(), AgentKind::Robot, &t.robot, true, !hit.is_empty())?;
            for (id, s) in &t.humans {
                let kind = self.kinds.get(id).copied().unwrap_or(AgentKind::Pedestrian);
                row(id.0.to_string(), kind, s, false, hit.contains(id))?;
            }
        }
        w.flush().map_err(|e| Error::io("<record>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Per-tick leader score table.
    pub fn write_scores_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SCORES_HEADER)?;
        for t in &self.ticks {
            for s in &t.scores {
                w.write_record([
                    t.tick.to_string(),
                    s.id.0.to_string(),
                    s.s_head.to_string(),
                    s.s_vel.to_string(),
                    s.s_pos.to_string(),
                    s.raw_total.to_string(),
                    s.total.to_string(),
                    u8::from(s.reachable).to_string(),
                    s.reach_value.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<scores>", e))?;
        Ok(())
    }

    /// Rebuild a record from its CSV form. Scores and speed limits are not
    /// stored there; the status is reached iff the last robot position lies
    /// within the arrival radius of the goal.
    pub fn read_csv<R: Read>(input: R, source: &str, meta: &RecordMeta) -> Result<RunRecord> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(RECORD_HEADER.iter().copied()) {
            return Err(Error::Data {
                path: source.into(),
                line: 1,
                message: format!("expected header {}", RECORD_HEADER.join(",")),
            });
        }
        let mut kinds = BTreeMap::new();
        let mut ticks: Vec<TickRecord> = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let line = i as u64 + 2;
            let row = row?;
            let bad = |message: String| Error::Data {
                path: source.into(),
                line,
                message,
            };
            let num = |k: usize| -> Result<f64> {
                row[k]
                    .parse::<f64>()
                    .map_err(|_| bad(format!("{}: not a number: {:?}", RECORD_HEADER[k], &row[k])))
            };
            let opt_num = |k: usize| -> Result<Option<f64>> {
                if row[k].is_empty() {
                    Ok(None)
                } else {
                    num(k).map(Some)
                }
            };
            let tick: u64 = row[0].parse().map_err(|_| bad(format!("bad tick {:?}", &row[0])))?;
            let id: i64 = row[1].parse().map_err(|_| bad(format!("bad agent_id {:?}", &row[1])))?;
            let kind: AgentKind = row[2].parse().map_err(|e: Error| bad(e.to_string()))?;
            let state = AgentState::new(Vec2::new(num(3)?, num(4)?), Vec2::new(num(5)?, num(6)?))
                .map_err(|e| bad(e.to_string()))?;
            let leader: i64 = row[8].parse().map_err(|_| bad(format!("bad leader_id {:?}", &row[8])))?;
            let subgoal = match (opt_num(9)?, opt_num(10)?) {
                (Some(x), Some(y)) => Some(Vec2::new(x, y)),
                _ => None,
            };
            if row[7] == *"1" {
                if ticks.last().is_some_and(|t| t.tick >= tick) {
                    return Err(bad(format!("tick {tick} is out of order")));
                }
                ticks.push(TickRecord {
                    tick,
                    robot: state,
                    leader: u32::try_from(leader).ok().map(AgentId),
                    subgoal,
                    ..TickRecord::default()
                });
            } else {
                let current = ticks
                    .last_mut()
                    .filter(|t| t.tick == tick)
                    .ok_or_else(|| bad(format!("agent row for tick {tick} precedes its robot row")))?;
                let id = u32::try_from(id).map_err(|_| bad(format!("bad agent_id {id}")))?;
                kinds.insert(AgentId(id), kind);
                current.humans.push((AgentId(id), state));
            }
        }
        if ticks.is_empty() {
            return Err(Error::Data {
                path: source.into(),
                line: 1,
                message: "record has no rows".into(),
            });
        }
        let last = ticks.last().expect("nonempty").robot.position;
        let status = if last.distance(meta.goal) <= meta.arrival_radius {
            RunStatus::Reached
        } else {
            RunStatus::Timeout
        };
        Ok(RunRecord {
            seed: meta.seed,
            mode: meta.mode,
            dt: meta.dt,
            goal: meta.goal,
            robot_radius: meta.robot_radius,
            agent_radius: meta.agent_radius,
            max_ticks: meta.max_ticks,
            kinds,
            ticks,
            status,
        })
    }
}
