//! File formats: crowd trajectories, scenarios and SVG plots.

pub mod scenario;
pub mod svg;
pub mod trajectory;

pub use scenario::{load_scenario, Scenario, ScenarioFile, SceneSpec, TrajectorySource};
pub use svg::render_svg;
pub use trajectory::{
    ingest_trajectories, parse_kind, read_trajectories, write_trajectories, TRAJECTORY_HEADER,
};
