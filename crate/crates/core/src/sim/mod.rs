//! Fixed-step loop: crowd playback, leader and subgoal selection, then one
//! social-force step for the robot.

mod record;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use record::{RecordMeta, RunRecord, RunStatus, TickRecord, RECORD_HEADER, SCORES_HEADER};

use crate::config::{FrameworkConfig, SfParams};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::leader::{select_leader, HumanObservation, LeaderScore};
use crate::scene::{AgentId, AgentKind, AgentState, Scene, TrajectoryLog};
use crate::social_force::{sf_step, Neighbour};
use crate::subgoal::{decide, LeaderDecision};

/// Neighbours closer than this are treated as coincident and skipped.
const COINCIDENT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Leader selection and subgoal placement feed the base planner.
    Framework,
    /// The base planner heads straight for the global goal.
    RawSf,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "framework" => Ok(Mode::Framework),
            "raw-sf" | "raw_sf" => Ok(Mode::RawSf),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode {other:?} (expected framework or raw-sf)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Framework => "framework",
            Mode::RawSf => "raw-sf",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationState {
    pub tick: u64,
    pub robot: AgentState,
    /// Active crowd agents only.
    pub humans: BTreeMap<AgentId, AgentState>,
    pub previous_leader: Option<AgentId>,
    pub finished: bool,
    pub rng_seed: u64,
}

/// Tick budget when none is configured: three times the straight-line time
/// at the speed limit.
pub fn default_max_ticks(scene: &Scene, config: &FrameworkConfig) -> u64 {
    let dist = scene.goal.distance(scene.robot_start.position);
    ((3.0 * dist / config.robot_speed_limit / config.dt).ceil() as u64).max(1)
}

/// A reactive stand-in for a logged agent: enters and leaves with its track
/// but walks to the track's end under social force.
#[derive(Debug, Clone)]
struct ReactiveAgent {
    goal: Vec2,
    speed: f64,
}

pub struct Simulation<'a> {
    scene: &'a Scene,
    log: TrajectoryLog,
    config: FrameworkConfig,
    sf: SfParams,
    mode: Mode,
    rng: ChaCha8Rng,
    noise: Option<Normal<f64>>,
    reactive: BTreeMap<AgentId, ReactiveAgent>,
    state: SimulationState,
    max_ticks: u64,
    ticks: Vec<TickRecord>,
    reached: bool,
}

impl<'a> Simulation<'a> {
    /// The log is resampled to the simulation rate so that tick `k` reads
    /// frame `k`.
    pub fn new(
        scene: &'a Scene,
        log: &TrajectoryLog,
        config: &FrameworkConfig,
        mode: Mode,
        seed: u64,
    ) -> Result<Self> {
        let config = config.clone().validated()?;
        let log = log.resample(1.0 / config.dt)?;
        let noise = if config.noise_sigma > 0.0 {
            Some(Normal::new(0.0, config.noise_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?)
        } else {
            None
        };
        let reactive = if config.reactive_agents {
            log.tracks()
                .iter()
                .map(|(&id, t)| {
                    let samples = t.samples();
                    let length: f64 = samples.windows(2).map(|w| w[1].1.distance(w[0].1)).sum();
                    let duration = (t.last_frame() - t.first_frame()) as f64 * config.dt;
                    let speed = if duration > 0.0 { length / duration } else { 0.0 };
                    let goal = samples[samples.len() - 1].1;
                    (id, ReactiveAgent { goal, speed: speed.max(0.1) })
                })
                .collect()
        } else {
            BTreeMap::new()
        };
        let max_ticks = config.max_ticks.unwrap_or_else(|| default_max_ticks(scene, &config));
        let mut sim = Simulation {
            scene,
            sf: config.sf_params(),
            config,
            log,
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise,
            reactive,
            state: SimulationState {
                tick: 0,
                robot: scene.robot_start,
                humans: BTreeMap::new(),
                previous_leader: None,
                finished: false,
                rng_seed: seed,
            },
            max_ticks,
            ticks: Vec::new(),
            reached: false,
        };
        sim.state.humans = sim.humans_at(0, &BTreeMap::new(), scene.robot_start)?;
        sim.ticks.push(TickRecord {
            tick: 0,
            robot: sim.state.robot,
            humans: sim.state.humans.iter().map(|(i, s)| (*i, *s)).collect(),
            ..TickRecord::default()
        });
        Ok(sim)
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn max_ticks(&self) -> u64 {
        self.max_ticks
    }

    /// Crowd states at `frame`. Playback agents take their logged position
    /// plus seeded noise (drawn in id order) and their clean logged velocity.
    fn humans_at(
        &mut self,
        frame: u64,
        previous: &BTreeMap<AgentId, AgentState>,
        robot: AgentState,
    ) -> Result<BTreeMap<AgentId, AgentState>> {
        let rate = 1.0 / self.config.dt;
        let mut out = BTreeMap::new();
        for (&id, track) in self.log.tracks() {
            if !track.is_active(frame) {
                continue;
            }
            if let Some(agent) = self.reactive.get(&id) {
                let state = match previous.get(&id) {
                    Some(prev) => {
                        let mut neighbours: Vec<Neighbour> = previous
                            .iter()
                            .filter(|(other, _)| **other != id)
                            .map(|(_, s)| Neighbour::new(s.position, self.config.agent_radius))
                            .collect();
                        neighbours.push(Neighbour::new(robot.position, self.config.robot_radius));
                        neighbours.retain(|n| n.position.distance(prev.position) > COINCIDENT);
                        sf_step(
                            prev,
                            self.config.agent_radius,
                            agent.goal,
                            agent.speed,
                            &neighbours,
                            &self.scene.obstacles,
                            &self.sf,
                            self.config.dt,
                        )?
                    }
                    None => AgentState::at_rest(track.samples()[0].1)?,
                };
                out.insert(id, state);
                continue;
            }
            let clean = track.position_at(frame as f64).expect("active track has a position");
            let velocity = track.velocity_at(frame, rate).unwrap_or(Vec2::ZERO);
            let position = match &self.noise {
                Some(n) => clean + Vec2::new(n.sample(&mut self.rng), n.sample(&mut self.rng)),
                None => clean,
            };
            out.insert(id, AgentState::new(position, velocity)?);
        }
        Ok(out)
    }

    fn observations(&self, frame: u64) -> Result<Vec<HumanObservation>> {
        let rate = 1.0 / self.config.dt;
        self.state
            .humans
            .iter()
            .map(|(&id, &state)| {
                if self.reactive.contains_key(&id) {
                    return Ok(HumanObservation {
                        id,
                        state,
                        mean_velocity: state.velocity,
                        mean_speed: state.speed(),
                    });
                }
                let track = self.log.track(id).ok_or(Error::UnknownAgent(id))?;
                HumanObservation::from_track(id, state, track, frame, self.config.history_window, rate)
            })
            .collect()
    }

    fn plan(&self, frame: u64) -> Result<(LeaderDecision, Vec<LeaderScore>)> {
        if self.mode == Mode::RawSf {
            return Ok((LeaderDecision::fallback(self.scene.goal, &self.config), Vec::new()));
        }
        let obs = self.observations(frame)?;
        let selection = select_leader(
            &self.state.robot,
            &obs,
            self.scene,
            self.state.previous_leader,
            &self.config,
        )?;
        let humans: Vec<(AgentId, AgentState)> =
            self.state.humans.iter().map(|(i, s)| (*i, *s)).collect();
        let decision = match decide(
            &self.state.robot,
            selection.leader,
            &selection.groups,
            &humans,
            &self.config,
            self.scene.goal,
        ) {
            Ok(d) => d,
            Err(e) => {
                log::warn!("tick {frame}: subgoal selection failed ({e}); heading for the goal");
                LeaderDecision {
                    leader: selection.leader,
                    ..LeaderDecision::fallback(self.scene.goal, &self.config)
                }
            }
        };
        Ok((decision, selection.scores))
    }

    /// Advance one tick.
    pub fn step(&mut self) -> Result<&TickRecord> {
        if self.state.finished {
            return Err(Error::Finished);
        }
        let next = self.state.tick + 1;
        let previous = std::mem::take(&mut self.state.humans);
        self.state.humans = self.humans_at(next, &previous, self.state.robot)?;

        let (decision, scores) = self.plan(next)?;

        let robot = self.state.robot;
        let neighbours: Vec<Neighbour> = self
            .state
            .humans
            .values()
            .filter(|s| s.position.distance(robot.position) > COINCIDENT)
            .map(|s| Neighbour::new(s.position, self.config.agent_radius))
            .collect();
        let mut moved = sf_step(
            &robot,
            self.config.robot_radius,
            decision.subgoal,
            decision.speed_limit,
            &neighbours,
            &self.scene.obstacles,
            &self.sf,
            self.config.dt,
        )?;

        // arrival: snap when the goal lies within this tick's travel, or stop
        // once inside the arrival radius and no longer closing in
        let goal = self.scene.goal;
        let before = goal.distance(robot.position);
        let after = goal.distance(moved.position);
        if before <= moved.position.distance(robot.position) {
            moved.position = goal;
            self.reached = true;
        } else if after <= self.config.arrival_radius && after >= before {
            self.reached = true;
        }

        self.state.robot = moved;
        self.state.tick = next;
        self.state.previous_leader = decision.leader;
        if self.reached {
            self.state.finished = true;
        } else if next >= self.max_ticks {
            self.state.finished = true;
            self.reached = after <= self.config.arrival_radius;
        }

        self.ticks.push(TickRecord {
            tick: next,
            robot: moved,
            humans: self.state.humans.iter().map(|(i, s)| (*i, *s)).collect(),
            leader: decision.leader,
            effective_leader: decision.effective_leader,
            subgoal: Some(decision.subgoal),
            speed_limit: Some(decision.speed_limit),
            scores,
        });
        Ok(self.ticks.last().expect("just pushed"))
    }

    /// Step until finished and hand over the record.
    pub fn run_to_end(mut self) -> Result<RunRecord> {
        while !self.state.finished {
            self.step()?;
        }
        Ok(self.into_record())
    }

    /// The record so far; a run cut short counts as a timeout.
    pub fn into_record(self) -> RunRecord {
        let kinds = self.log.tracks().iter().map(|(id, t)| (*id, t.kind)).collect();
        RunRecord {
            seed: self.state.rng_seed,
            mode: self.mode,
            dt: self.config.dt,
            goal: self.scene.goal,
            robot_radius: self.config.robot_radius,
            agent_radius: self.config.agent_radius,
            max_ticks: self.max_ticks,
            kinds,
            ticks: self.ticks,
            status: if self.reached {
                RunStatus::Reached
            } else {
                RunStatus::Timeout
            },
        }
    }
}

/// One complete run.
pub fn run(
    scene: &Scene,
    log: &TrajectoryLog,
    config: &FrameworkConfig,
    mode: Mode,
    seed: u64,
) -> Result<RunRecord> {
    Simulation::new(scene, log, config, mode, seed)?.run_to_end()
}

/// `trials` independent runs with seeds `base_seed + k`, in trial order.
pub fn run_batch(
    scene: &Scene,
    log: &TrajectoryLog,
    config: &FrameworkConfig,
    mode: Mode,
    trials: usize,
    base_seed: u64,
) -> Result<Vec<RunRecord>> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    (0..trials as u64)
        .into_par_iter()
        .map(|k| run(scene, log, config, mode, base_seed.wrapping_add(k)))
        .collect()
}

/// Kinds of the logged agents, for callers that only hold a log.
pub fn agent_kinds(log: &TrajectoryLog) -> BTreeMap<AgentId, AgentKind> {
    log.tracks().iter().map(|(id, t)| (*id, t.kind)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Track;

    fn walker(start: Vec2, vel: Vec2, frames: u64) -> TrajectoryLog {
        let samples = (0..=frames).map(|f| (f, start + vel * (f as f64 / 30.0))).collect();
        let mut tracks = BTreeMap::new();
        tracks.insert(AgentId(1), Track::new(AgentKind::Pedestrian, samples).unwrap());
        TrajectoryLog::new(30.0, tracks).unwrap()
    }

    fn open20() -> Scene {
        Scene::open(Vec2::ZERO, Vec2::new(20.0, 0.0)).unwrap()
    }

    #[test]
    fn free_space_run_finishes_in_time() {
        let rec = run(&open20(), &TrajectoryLog::empty(30.0), &FrameworkConfig::default(), Mode::Framework, 0)
            .unwrap();
        assert_eq!(rec.status, RunStatus::Reached);
        let t = rec.final_tick();
        assert!((300..=330).contains(&t), "{t}");
        assert_eq!(rec.ticks.last().unwrap().robot.position, Vec2::new(20.0, 0.0));
    }

    #[test]
    fn max_ticks_one_truncates() {
        let cfg = FrameworkConfig {
            max_ticks: Some(1),
            ..FrameworkConfig::default()
        };
        let rec = run(&open20(), &TrajectoryLog::empty(30.0), &cfg, Mode::Framework, 0).unwrap();
        assert_eq!(rec.ticks.len(), 2);
        assert_eq!(rec.status, RunStatus::Timeout);
    }

    #[test]
    fn finished_simulation_rejects_steps() {
        let cfg = FrameworkConfig {
            max_ticks: Some(1),
            ..FrameworkConfig::default()
        };
        let scene = open20();
        let log = TrajectoryLog::empty(30.0);
        let mut sim = Simulation::new(&scene, &log, &cfg, Mode::RawSf, 0).unwrap();
        sim.step().unwrap();
        assert!(sim.state().finished);
        assert!(matches!(sim.step(), Err(Error::Finished)));
    }

    #[test]
    fn same_seed_same_record() {
        let scene = open20();
        let log = walker(Vec2::new(3.0, 0.0), Vec2::new(1.2, 0.0), 300);
        let cfg = FrameworkConfig::default();
        let a = run(&scene, &log, &cfg, Mode::Framework, 7).unwrap();
        let b = run(&scene, &log, &cfg, Mode::Framework, 7).unwrap();
        assert_eq!(a, b);
        let c = run(&scene, &log, &cfg, Mode::Framework, 8).unwrap();
        assert_ne!(a.ticks, c.ticks);
    }

    #[test]
    fn zero_noise_ignores_seed_and_replays_exactly() {
        let scene = open20();
        let log = walker(Vec2::new(3.0, 0.0), Vec2::new(1.2, 0.0), 300);
        let cfg = FrameworkConfig {
            noise_sigma: 0.0,
            ..FrameworkConfig::default()
        };
        let a = run(&scene, &log, &cfg, Mode::Framework, 1).unwrap();
        let b = run(&scene, &log, &cfg, Mode::Framework, 99).unwrap();
        assert_eq!(a.ticks, b.ticks);
        let track = log.track(AgentId(1)).unwrap();
        for t in &a.ticks {
            if let Some((_, s)) = t.humans.first() {
                assert_eq!(s.position, track.position_at(t.tick as f64).unwrap());
            }
        }
    }

    #[test]
    fn leader_is_followed() {
        let scene = open20();
        let log = walker(Vec2::new(3.0, 0.0), Vec2::new(1.2, 0.0), 300);
        let rec = run(&scene, &log, &FrameworkConfig::default(), Mode::Framework, 0).unwrap();
        assert_eq!(rec.ticks[1].leader, Some(AgentId(1)));
        let t = &rec.ticks[1];
        let subgoal = t.subgoal.unwrap();
        assert!((subgoal.distance(t.humans[0].1.position) - 0.8).abs() < 1e-9);
    }

    #[test]
    fn robot_speed_bounded_every_tick() {
        let scene = open20();
        let log = walker(Vec2::new(3.0, 0.5), Vec2::new(1.2, 0.0), 400);
        let cfg = FrameworkConfig::default();
        for mode in [Mode::Framework, Mode::RawSf] {
            let rec = run(&scene, &log, &cfg, mode, 3).unwrap();
            for w in rec.ticks.windows(2) {
                let step = w[1].robot.position.distance(w[0].robot.position);
                assert!(step <= cfg.robot_speed_limit * cfg.dt + 1e-9);
            }
        }
    }

    #[test]
    fn agents_appear_and_leave_with_their_track() {
        let samples = (30..=60).map(|f| (f, Vec2::new(5.0, 3.0 + f as f64 * 0.01))).collect();
        let mut tracks = BTreeMap::new();
        tracks.insert(AgentId(4), Track::new(AgentKind::Bicycle, samples).unwrap());
        let log = TrajectoryLog::new(30.0, tracks).unwrap();
        let rec = run(&open20(), &log, &FrameworkConfig::default(), Mode::RawSf, 0).unwrap();
        for t in &rec.ticks {
            assert_eq!(!t.humans.is_empty(), (30..=60).contains(&t.tick), "tick {}", t.tick);
        }
    }

    #[test]
    fn batch_is_ordered_and_matches_single_runs() {
        let scene = open20();
        let log = walker(Vec2::new(3.0, 0.0), Vec2::new(1.2, 0.0), 300);
        let cfg = FrameworkConfig::default();
        let batch = run_batch(&scene, &log, &cfg, Mode::Framework, 4, 10).unwrap();
        for (k, rec) in batch.iter().enumerate() {
            assert_eq!(rec, &run(&scene, &log, &cfg, Mode::Framework, 10 + k as u64).unwrap());
        }
        assert!(run_batch(&scene, &log, &cfg, Mode::Framework, 0, 0).is_err());
    }

    #[test]
    fn reactive_agents_move_under_social_force() {
        let scene = open20();
        let log = walker(Vec2::new(10.0, 0.0), Vec2::new(-1.0, 0.0), 300);
        let cfg = FrameworkConfig {
            reactive_agents: true,
            ..FrameworkConfig::default()
        };
        let rec = run(&scene, &log, &cfg, Mode::RawSf, 0).unwrap();
        let playback = run(&scene, &log, &FrameworkConfig::default(), Mode::RawSf, 0).unwrap();
        assert_ne!(rec.ticks[40].humans, playback.ticks[40].humans);
    }
}
