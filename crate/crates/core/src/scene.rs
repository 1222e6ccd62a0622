//! Core domain types: agents, their states, the static scene and recorded
//! crowd trajectories.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Bounds, Segment, Vec2};

/// Recorded speeds above this are treated as annotation errors.
pub const MAX_RECORDED_SPEED: f64 = 15.0;

/// Realistic bicycle footprint (length, width) in metres.
pub const BICYCLE_DIMENSIONS: (f64, f64) = (1.9, 1.0);
/// Realistic car footprint (length, width) in metres.
pub const CAR_DIMENSIONS: (f64, f64) = (4.5, 1.9);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Position and velocity of one agent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
}

impl AgentState {
    pub fn new(position: Vec2, velocity: Vec2) -> Result<Self> {
        position.ensure_finite("agent position")?;
        velocity.ensure_finite("agent velocity")?;
        Ok(AgentState { position, velocity })
    }

    pub fn at_rest(position: Vec2) -> Result<Self> {
        Self::new(position, Vec2::ZERO)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Pedestrian,
    Bicycle,
    Car,
    Robot,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Pedestrian => "pedestrian",
            AgentKind::Bicycle => "bicycle",
            AgentKind::Car => "car",
            AgentKind::Robot => "robot",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pedestrian" => Ok(AgentKind::Pedestrian),
            "bicycle" => Ok(AgentKind::Bicycle),
            "car" => Ok(AgentKind::Car),
            "robot" => Ok(AgentKind::Robot),
            other => Err(Error::InvalidAgent(format!("unknown agent kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Footprint {
    Disc,
    OrientedRect { length: f64, width: f64 },
}

impl Footprint {
    /// Footprint under the realistic-dimension collision regime.
    pub fn realistic(kind: AgentKind) -> Footprint {
        match kind {
            AgentKind::Bicycle => Footprint::OrientedRect {
                length: BICYCLE_DIMENSIONS.0,
                width: BICYCLE_DIMENSIONS.1,
            },
            AgentKind::Car => Footprint::OrientedRect {
                length: CAR_DIMENSIONS.0,
                width: CAR_DIMENSIONS.1,
            },
            AgentKind::Pedestrian | AgentKind::Robot => Footprint::Disc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub kind: AgentKind,
    pub radius: f64,
    pub footprint: Footprint,
}

impl Agent {
    pub fn new(id: AgentId, kind: AgentKind, radius: f64, footprint: Footprint) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidAgent(format!("agent {id}: radius must be positive")));
        }
        if let Footprint::OrientedRect { length, width } = footprint {
            if !(width > 0.0 && length >= width && length.is_finite()) {
                return Err(Error::InvalidAgent(format!(
                    "agent {id}: rectangle needs length >= width > 0"
                )));
            }
        }
        Ok(Agent {
            id,
            kind,
            radius,
            footprint,
        })
    }

    /// Agent with the realistic footprint of its kind.
    pub fn with_kind(id: AgentId, kind: AgentKind, radius: f64) -> Result<Self> {
        Self::new(id, kind, radius, Footprint::realistic(kind))
    }
}

/// Static environment: walls, the robot's start and its global goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub obstacles: Vec<Segment>,
    pub goal: Vec2,
    pub robot_start: AgentState,
    pub bounds: Bounds,
}

impl Scene {
    pub fn new(
        obstacles: Vec<Segment>,
        goal: Vec2,
        robot_start: AgentState,
        bounds: Bounds,
    ) -> Result<Self> {
        goal.ensure_finite("goal")?;
        if !bounds.contains(goal) {
            return Err(Error::InvalidScene("goal lies outside the scene bounds".into()));
        }
        if !bounds.contains(robot_start.position) {
            return Err(Error::InvalidScene("robot start lies outside the scene bounds".into()));
        }
        for seg in &obstacles {
            if seg.a == seg.b {
                return Err(Error::InvalidScene("obstacle segment has zero length".into()));
            }
        }
        Ok(Scene {
            obstacles,
            goal,
            robot_start,
            bounds,
        })
    }

    /// Open scene with generous bounds around start and goal.
    pub fn open(robot_start: Vec2, goal: Vec2) -> Result<Self> {
        let margin = 50.0;
        let bounds = Bounds::new(
            Vec2::new(robot_start.x.min(goal.x) - margin, robot_start.y.min(goal.y) - margin),
            Vec2::new(robot_start.x.max(goal.x) + margin, robot_start.y.max(goal.y) + margin),
        )?;
        Scene::new(Vec::new(), goal, AgentState::at_rest(robot_start)?, bounds)
    }
}

/// One agent's recorded path: strictly increasing frames with positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub kind: AgentKind,
    samples: Vec<(u64, Vec2)>,
}

impl Track {
    pub fn new(kind: AgentKind, samples: Vec<(u64, Vec2)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidLog("track has no samples".into()));
        }
        for (_, p) in &samples {
            p.ensure_finite("trajectory sample")?;
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidLog(format!(
                    "frames must be strictly increasing (frame {} follows {})",
                    w[1].0, w[0].0
                )));
            }
        }
        Ok(Track { kind, samples })
    }

    pub fn samples(&self) -> &[(u64, Vec2)] {
        &self.samples
    }

    pub fn first_frame(&self) -> u64 {
        self.samples[0].0
    }

    pub fn last_frame(&self) -> u64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn is_active(&self, frame: u64) -> bool {
        frame >= self.first_frame() && frame <= self.last_frame()
    }

    /// Position at a (possibly fractional) frame by linear interpolation.
    /// Recorded frames return their sample exactly.
    pub fn position_at(&self, frame: f64) -> Option<Vec2> {
        let first = self.first_frame() as f64;
        let last = self.last_frame() as f64;
        if frame < first || frame > last {
            return None;
        }
        let idx = self.samples.partition_point(|(f, _)| (*f as f64) < frame);
        let (f1, p1) = self.samples[idx];
        if f1 as f64 == frame {
            return Some(p1);
        }
        let (f0, p0) = self.samples[idx - 1];
        let s = (frame - f0 as f64) / (f1 as f64 - f0 as f64);
        Some(p0 + (p1 - p0) * s)
    }

    /// Finite-difference velocity at an integer frame: backward difference,
    /// forward at the first frame, zero for single-sample tracks.
    pub fn velocity_at(&self, frame: u64, rate: f64) -> Option<Vec2> {
        let here = self.position_at(frame as f64)?;
        if frame > self.first_frame() {
            let prev = self.position_at((frame - 1) as f64)?;
            Some((here - prev) * rate)
        } else if frame < self.last_frame() {
            let next = self.position_at((frame + 1) as f64)?;
            Some((next - here) * rate)
        } else {
            Some(Vec2::ZERO)
        }
    }

    /// Finite-difference velocities between consecutive samples at or before
    /// `frame`, most recent first.
    pub fn recent_velocities(&self, frame: u64, rate: f64) -> impl Iterator<Item = Vec2> + '_ {
        let end = self.samples.partition_point(|(f, _)| *f <= frame);
        self.samples[..end].windows(2).rev().map(move |w| {
            let (f0, p0) = w[0];
            let (f1, p1) = w[1];
            (p1 - p0) * (rate / (f1 - f0) as f64)
        })
    }

    fn has_sample_at_or_before(&self, frame: u64) -> bool {
        self.first_frame() <= frame
    }
}

/// Average of the `window` most recent finite-difference velocities at or
/// before `frame` (fewer if the history is shorter; zero with a single
/// sample).
pub fn history_mean_velocity(
    id: AgentId,
    track: &Track,
    frame: u64,
    window: usize,
    rate: f64,
) -> Result<Vec2> {
    if !track.has_sample_at_or_before(frame) {
        return Err(Error::NoHistory(id));
    }
    let mut sum = Vec2::ZERO;
    let mut n = 0usize;
    for v in track.recent_velocities(frame, rate).take(window) {
        sum += v;
        n += 1;
    }
    Ok(if n == 0 { Vec2::ZERO } else { sum * (1.0 / n as f64) })
}

/// Average of the speeds over the same window as [`history_mean_velocity`].
pub fn history_mean_speed(
    id: AgentId,
    track: &Track,
    frame: u64,
    window: usize,
    rate: f64,
) -> Result<f64> {
    if !track.has_sample_at_or_before(frame) {
        return Err(Error::NoHistory(id));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in track.recent_velocities(frame, rate).take(window) {
        sum += v.norm();
        n += 1;
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Recorded crowd: one track per agent id at a fixed frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    frame_rate: f64,
    tracks: BTreeMap<AgentId, Track>,
}

impl TrajectoryLog {
    pub fn new(frame_rate: f64, tracks: BTreeMap<AgentId, Track>) -> Result<Self> {
        if !(frame_rate > 0.0 && frame_rate.is_finite()) {
            return Err(Error::InvalidLog("frame rate must be positive".into()));
        }
        for (id, track) in &tracks {
            for w in track.samples.windows(2) {
                let dt = (w[1].0 - w[0].0) as f64 / frame_rate;
                let speed = w[1].1.distance(w[0].1) / dt;
                if speed > MAX_RECORDED_SPEED {
                    return Err(Error::InvalidLog(format!(
                        "agent {id} moves at {speed:.2} m/s between frames {} and {} \
                         (limit {MAX_RECORDED_SPEED} m/s)",
                        w[0].0, w[1].0
                    )));
                }
            }
        }
        Ok(TrajectoryLog { frame_rate, tracks })
    }

    pub fn empty(frame_rate: f64) -> Self {
        TrajectoryLog {
            frame_rate,
            tracks: BTreeMap::new(),
        }
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn tracks(&self) -> &BTreeMap<AgentId, Track> {
        &self.tracks
    }

    pub fn track(&self, id: AgentId) -> Option<&Track> {
        self.tracks.get(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    /// Resample every track onto the dense frame grid of `target_rate` by
    /// linear interpolation in time. Grid points that coincide with recorded
    /// samples reproduce them exactly.
    pub fn resample(&self, target_rate: f64) -> Result<TrajectoryLog> {
        if !(target_rate > 0.0 && target_rate.is_finite()) {
            return Err(Error::InvalidLog("target rate must be positive".into()));
        }
        let mut tracks = BTreeMap::new();
        for (&id, track) in &self.tracks {
            let ratio = self.frame_rate / target_rate;
            let t0 = track.first_frame() as f64 / self.frame_rate;
            let t1 = track.last_frame() as f64 / self.frame_rate;
            let k0 = (t0 * target_rate - 1e-9).ceil().max(0.0) as u64;
            let k1 = (t1 * target_rate + 1e-9).floor() as u64;
            let mut samples = Vec::new();
            for k in k0..=k1 {
                let mut src = k as f64 * ratio;
                // snap onto recorded frames when within rounding
                if (src - src.round()).abs() < 1e-9 {
                    src = src.round();
                }
                let src = src.clamp(track.first_frame() as f64, track.last_frame() as f64);
                if let Some(p) = track.position_at(src) {
                    samples.push((k, p));
                }
            }
            if samples.is_empty() {
                log::warn!("agent {id} has no samples on the {target_rate} Hz grid; dropped");
                continue;
            }
            tracks.insert(id, Track::new(track.kind, samples)?);
        }
        TrajectoryLog::new(target_rate, tracks)
    }
}
