//! Leader-following navigation through crowds.
//!
//! Each tick the robot picks a human to follow ([`leader::select_leader`]),
//! places a subgoal just behind them ([`subgoal::decide`]) and steers there
//! with a social-force planner ([`social_force::sf_step`]). The [`sim`]
//! module runs that loop over recorded crowds and [`metrics`] scores the
//! resulting runs.

pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod leader;
pub mod metrics;
pub mod scene;
pub mod sim;
pub mod social_force;
pub mod subgoal;
pub mod visibility;

pub use config::{load_config, FrameworkConfig, SfParams};
pub use error::{Error, Result};
pub use geometry::{Bounds, OrientedRect, Segment, Vec2};
pub use leader::{select_leader, GroupAssignment, HumanObservation, LeaderScore, LeaderSelection};
pub use metrics::{collision_flags, summarize, MetricsReport, Regime, TrialMetrics};
pub use scene::{Agent, AgentId, AgentKind, AgentState, Footprint, Scene, Track, TrajectoryLog};
pub use sim::{run, run_batch, Mode, RecordMeta, RunRecord, RunStatus, Simulation, SimulationState, TickRecord};
pub use social_force::{sf_step, Neighbour};
pub use subgoal::{choose_subgoal, decide, sample_candidates, LeaderDecision};
pub use visibility::{build_visible_region, reach_score, Disc, VisibleRegion};
