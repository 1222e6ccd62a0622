//! Scenario documents (TOML).
//!
//! ```toml
//! mode = "framework"          # or "raw-sf"
//! trials = 100
//! base_seed = 0
//!
//! [scene]
//! robot_start = [0.0, 0.0]
//! goal = [20.0, 0.0]
//! bounds = [[-10.0, -10.0], [30.0, 10.0]]   # optional
//! obstacles = [[[9.5, -3.0], [9.5, 3.0]]]   # wall segments, optional
//!
//! [trajectories]              # optional; empty crowd when absent
//! path = "crowd.csv"          # relative to this file
//! scale = 0.036               # metres per pixel
//! frame_rate = 30.0
//!
//! [config]                    # any planner key, see `FrameworkConfig`
//! noise_sigma = 0.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::FrameworkConfig;
use crate::error::{Error, Result};
use crate::geometry::{Bounds, Segment, Vec2};
use crate::scene::{AgentState, Scene, TrajectoryLog};
use crate::sim::Mode;

use super::trajectory::ingest_trajectories;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub robot_start: [f64; 2],
    pub goal: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[[f64; 2]; 2]>,
    #[serde(default)]
    pub obstacles: Vec<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySource {
    pub path: PathBuf,
    pub scale: f64,
    pub frame_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub scene: SceneSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<TrajectorySource>,
    #[serde(default)]
    pub config: FrameworkConfig,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_mode() -> Mode {
    Mode::Framework
}

fn default_trials() -> usize {
    1
}

/// A scenario with its scene built and its crowd loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub scene: Scene,
    pub log: TrajectoryLog,
    pub config: FrameworkConfig,
    pub mode: Mode,
    pub trials: usize,
    pub base_seed: u64,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<ScenarioFile> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    pub fn build_scene(&self) -> Result<Scene> {
        let start = Vec2::from(self.scene.robot_start);
        let goal = Vec2::from(self.scene.goal);
        let obstacles = self
            .scene
            .obstacles
            .iter()
            .map(|[a, b]| Segment::new(Vec2::from(*a), Vec2::from(*b)))
            .collect::<Result<Vec<_>>>()?;
        let bounds = match self.scene.bounds {
            Some([lo, hi]) => Bounds::new(lo.into(), hi.into())?,
            None => Scene::open(start, goal)?.bounds,
        };
        Scene::new(obstacles, goal, AgentState::at_rest(start)?, bounds)
    }

    /// Build the scene and load the crowd; relative trajectory paths resolve
    /// against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Scenario> {
        if self.trials == 0 {
            return Err(Error::Scenario("trials must be at least 1".into()));
        }
        let config = self.config.clone().validated()?;
        let scene = self.build_scene()?;
        let log = match &self.trajectories {
            Some(src) => {
                if !(src.scale > 0.0 && src.scale.is_finite()) {
                    return Err(Error::Scenario("trajectories.scale must be positive".into()));
                }
                if !(src.frame_rate > 0.0 && src.frame_rate.is_finite()) {
                    return Err(Error::Scenario("trajectories.frame_rate must be positive".into()));
                }
                let path = base_dir.join(&src.path);
                ingest_trajectories(&path, src.scale, src.frame_rate, 1.0 / config.dt)?
            }
            None => TrajectoryLog::empty(1.0 / config.dt),
        };
        Ok(Scenario {
            scene,
            log,
            config,
            mode: self.mode,
            trials: self.trials,
            base_seed: self.base_seed,
        })
    }
}

/// Read, parse and resolve a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file = ScenarioFile::parse(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.resolve(base)
}
