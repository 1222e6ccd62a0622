//! Shared fixtures for the planning benchmarks.

use std::collections::BTreeMap;

use leadnav::{AgentId, AgentKind, AgentState, HumanObservation, Track, TrajectoryLog, Vec2};

/// `n` walkers on a loose grid ahead of the origin, all heading +x.
pub fn crowd(n: usize) -> Vec<HumanObservation> {
    (0..n)
        .map(|i| {
            let pos = Vec2::new(2.0 + (i % 6) as f64 * 1.3, -4.0 + (i / 6) as f64 * 1.7);
            let vel = Vec2::new(1.0 + (i % 3) as f64 * 0.2, 0.0);
            HumanObservation {
                id: AgentId(i as u32),
                state: AgentState::new(pos, vel).expect("finite"),
                mean_velocity: vel,
                mean_speed: vel.norm(),
            }
        })
        .collect()
}

/// The same crowd as a 30 Hz log lasting `frames` frames.
pub fn crowd_log(n: usize, frames: u64) -> TrajectoryLog {
    let mut tracks = BTreeMap::new();
    for h in crowd(n) {
        let samples = (0..=frames)
            .map(|f| (f, h.state.position + h.state.velocity * (f as f64 / 30.0)))
            .collect();
        tracks.insert(h.id, Track::new(AgentKind::Pedestrian, samples).expect("valid track"));
    }
    TrajectoryLog::new(30.0, tracks).expect("valid log")
}
