//! Every tunable of the planner and the simulation in one flat document.
//!
//! | key | default | unit |
//! |---|---|---|
//! | `v_pref` | 1.4 | m/s |
//! | `observable_range` | 10.0 | m |
//! | `follow_distance` | 0.8 | m |
//! | `robot_speed_limit` | 2.0 | m/s |
//! | `dt` | 1/30 | s |
//! | `history_window` | 30 | frames |
//! | `tau_group_dis` | 1.5 | m |
//! | `tau_group_vel` | 0.5 | m/s |
//! | `tau_reach` | 0.5 | m |
//! | `tau_leader` | 0.2 | score |
//! | `tau_catchup` | 2.0 | m |
//! | `v_catchup` | 1.8 | m/s |
//! | `w_head`, `w_vel`, `w_pos` | 0.5, 0.25, 0.25 | normalised to sum 1 |
//! | `leader_bonus` | 0.1 | score |
//! | `delta_theta` | π/8 | rad |
//! | `ray_count` | 720 | rays |
//! | `sf_relaxation_time` | 0.5 | s |
//! | `sf_repulsion_strength` | 2.0 | m/s² |
//! | `sf_repulsion_range` | 0.35 | m |
//! | `sf_obstacle_strength` | 3.0 | m/s² |
//! | `sf_obstacle_range` | 0.25 | m |
//! | `robot_radius`, `agent_radius` | 0.5 | m |
//! | `arrival_radius` | 0.2 | m |
//! | `min_speed_limit` | 0.05 | m/s |
//! | `noise_sigma` | 0.02 | m |
//! | `max_ticks` | 3× straight-line time | ticks |
//! | `reactive_agents` | false | |

use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SfParams {
    pub relaxation_time: f64,
    pub repulsion_strength: f64,
    pub repulsion_range: f64,
    pub obstacle_strength: f64,
    pub obstacle_range: f64,
    /// Goal attraction is switched off inside this distance.
    pub arrival_radius: f64,
}

impl Default for SfParams {
    fn default() -> Self {
        SfParams {
            relaxation_time: 0.5,
            repulsion_strength: 2.0,
            repulsion_range: 0.35,
            obstacle_strength: 3.0,
            obstacle_range: 0.25,
            arrival_radius: 0.2,
        }
    }
}

impl SfParams {
    pub fn validate(&self) -> Result<()> {
        positive("sf_relaxation_time", self.relaxation_time)?;
        positive("sf_repulsion_strength", self.repulsion_strength)?;
        positive("sf_repulsion_range", self.repulsion_range)?;
        positive("sf_obstacle_strength", self.obstacle_strength)?;
        positive("sf_obstacle_range", self.obstacle_range)?;
        positive("arrival_radius", self.arrival_radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameworkConfig {
    pub v_pref: f64,
    pub observable_range: f64,
    pub follow_distance: f64,
    pub robot_speed_limit: f64,
    pub dt: f64,
    pub history_window: usize,
    pub tau_group_dis: f64,
    pub tau_group_vel: f64,
    pub tau_reach: f64,
    pub tau_leader: f64,
    pub tau_catchup: f64,
    pub v_catchup: f64,
    pub w_head: f64,
    pub w_vel: f64,
    pub w_pos: f64,
    pub leader_bonus: f64,
    pub delta_theta: f64,
    pub ray_count: usize,
    pub sf_relaxation_time: f64,
    pub sf_repulsion_strength: f64,
    pub sf_repulsion_range: f64,
    pub sf_obstacle_strength: f64,
    pub sf_obstacle_range: f64,
    pub robot_radius: f64,
    pub agent_radius: f64,
    pub arrival_radius: f64,
    pub min_speed_limit: f64,
    pub noise_sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ticks: Option<u64>,
    pub reactive_agents: bool,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        let sf = SfParams::default();
        FrameworkConfig {
            v_pref: 1.4,
            observable_range: 10.0,
            follow_distance: 0.8,
            robot_speed_limit: 2.0,
            dt: 1.0 / 30.0,
            history_window: 30,
            tau_group_dis: 1.5,
            tau_group_vel: 0.5,
            tau_reach: 0.5,
            tau_leader: 0.2,
            tau_catchup: 2.0,
            v_catchup: 1.8,
            w_head: 0.5,
            w_vel: 0.25,
            w_pos: 0.25,
            leader_bonus: 0.1,
            delta_theta: FRAC_PI_8,
            ray_count: 720,
            sf_relaxation_time: sf.relaxation_time,
            sf_repulsion_strength: sf.repulsion_strength,
            sf_repulsion_range: sf.repulsion_range,
            sf_obstacle_strength: sf.obstacle_strength,
            sf_obstacle_range: sf.obstacle_range,
            robot_radius: 0.5,
            agent_radius: 0.5,
            arrival_radius: sf.arrival_radius,
            min_speed_limit: 0.05,
            noise_sigma: 0.02,
            max_ticks: None,
            reactive_agents: false,
        }
    }
}

fn positive(key: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{key} must be positive")))
    }
}

fn non_negative(key: &str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{key} must be non-negative")))
    }
}

fn finite(key: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{key} must be finite")))
    }
}

/// Parse a flat key-value document. Missing keys take their defaults,
/// unknown keys are rejected and the score weights are normalised.
pub fn load_config(text: &str) -> Result<FrameworkConfig> {
    let cfg: FrameworkConfig =
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.message().to_string()))?;
    cfg.validated()
}

impl FrameworkConfig {
    /// Check every invariant and normalise the weights.
    pub fn validated(mut self) -> Result<FrameworkConfig> {
        positive("v_pref", self.v_pref)?;
        positive("observable_range", self.observable_range)?;
        positive("follow_distance", self.follow_distance)?;
        positive("robot_speed_limit", self.robot_speed_limit)?;
        positive("dt", self.dt)?;
        if self.history_window == 0 {
            return Err(Error::InvalidConfig("history_window must be positive".into()));
        }
        positive("tau_group_dis", self.tau_group_dis)?;
        positive("tau_group_vel", self.tau_group_vel)?;
        finite("tau_reach", self.tau_reach)?;
        finite("tau_leader", self.tau_leader)?;
        positive("tau_catchup", self.tau_catchup)?;
        positive("v_catchup", self.v_catchup)?;
        non_negative("w_head", self.w_head)?;
        non_negative("w_vel", self.w_vel)?;
        non_negative("w_pos", self.w_pos)?;
        non_negative("leader_bonus", self.leader_bonus)?;
        if !(self.delta_theta > 0.0 && self.delta_theta <= FRAC_PI_2) {
            return Err(Error::InvalidConfig("delta_theta must lie in (0, pi/2]".into()));
        }
        if self.ray_count < 8 {
            return Err(Error::InvalidConfig("ray_count must be at least 8".into()));
        }
        self.sf_params().validate()?;
        positive("robot_radius", self.robot_radius)?;
        positive("agent_radius", self.agent_radius)?;
        positive("min_speed_limit", self.min_speed_limit)?;
        if self.min_speed_limit > self.robot_speed_limit {
            return Err(Error::InvalidConfig(
                "min_speed_limit must not exceed robot_speed_limit".into(),
            ));
        }
        non_negative("noise_sigma", self.noise_sigma)?;
        if self.max_ticks == Some(0) {
            return Err(Error::InvalidConfig("max_ticks must be positive".into()));
        }

        let sum = self.w_head + self.w_vel + self.w_pos;
        if sum <= 0.0 {
            return Err(Error::InvalidConfig("score weights must not all be zero".into()));
        }
        // leave already-normalised weights bit-identical so documents round-trip
        if (sum - 1.0).abs() > 1e-12 {
            self.w_head /= sum;
            self.w_vel /= sum;
            self.w_pos /= sum;
        }
        Ok(self)
    }

    pub fn sf_params(&self) -> SfParams {
        SfParams {
            relaxation_time: self.sf_relaxation_time,
            repulsion_strength: self.sf_repulsion_strength,
            repulsion_range: self.sf_repulsion_range,
            obstacle_strength: self.sf_obstacle_strength,
            obstacle_range: self.sf_obstacle_range,
            arrival_radius: self.arrival_radius,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    pub fn weights(&self) -> (f64, f64, f64) {
        (self.w_head, self.w_vel, self.w_pos)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = load_config("").unwrap();
        assert_eq!(cfg, FrameworkConfig::default());
        assert_eq!(cfg.v_pref, 1.4);
        assert_eq!(cfg.observable_range, 10.0);
        assert_eq!(cfg.follow_distance, 0.8);
        assert_eq!(cfg.robot_speed_limit, 2.0);
        assert_eq!(cfg.agent_radius, 0.5);
    }

    #[test]
    fn negative_v_pref_names_the_key() {
        let err = load_config("v_pref = -1").unwrap_err();
        assert_eq!(err.to_string(), "v_pref must be positive");
    }

    #[test]
    fn weights_are_normalised() {
        let cfg = load_config("w_head = 2\nw_vel = 1\nw_pos = 1").unwrap();
        assert_eq!(cfg.weights(), (0.5, 0.25, 0.25));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(load_config("v_preff = 1.0"), Err(Error::ConfigParse(_))));
    }

    #[test]
    fn delta_theta_bounds() {
        assert!(load_config("delta_theta = 0.0").is_err());
        assert!(load_config("delta_theta = 1.6").is_err());
        assert!(load_config(&format!("delta_theta = {}", FRAC_PI_2)).is_ok());
    }

    proptest! {
        #[test]
        fn serialised_config_reparses_identically(
            v_pref in 0.1f64..3.0,
            range in 1.0f64..30.0,
            w in (0.0f64..5.0, 0.0f64..5.0, 0.01f64..5.0),
            window in 1usize..120,
            bonus in 0.0f64..0.5,
            dtheta in 0.05f64..1.5,
            max_ticks in proptest::option::of(1u64..100_000),
        ) {
            let doc = format!(
                "v_pref = {v_pref:?}\nobservable_range = {range:?}\nw_head = {:?}\nw_vel = {:?}\n\
                 w_pos = {:?}\nhistory_window = {window}\nleader_bonus = {bonus:?}\ndelta_theta = {dtheta:?}\n{}",
                w.0, w.1, w.2,
                max_ticks.map(|m| format!("max_ticks = {m}")).unwrap_or_default(),
            );
            let cfg = load_config(&doc).unwrap();
            let again = load_config(&cfg.to_toml()).unwrap();
            prop_assert_eq!(cfg, again);
        }
    }
}
