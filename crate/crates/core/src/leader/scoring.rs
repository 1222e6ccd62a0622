//! Per-human leader scores. Each lies in [-1, 1]; -1 marks a disqualifying
//! configuration rather than a merely poor one.

use std::f64::consts::FRAC_PI_4;

use crate::geometry::Vec2;

/// Cosine between the mean velocity and the direction to the goal, or -1 when
/// that angle exceeds π/4 or the human has not moved.
pub fn score_heading(mean_velocity: Vec2, human_pos: Vec2, goal: Vec2) -> f64 {
    let to_goal = goal - human_pos;
    let denom = mean_velocity.norm() * to_goal.norm();
    if denom <= 0.0 {
        return -1.0;
    }
    let cos = (mean_velocity.dot(to_goal) / denom).clamp(-1.0, 1.0);
    let limit = FRAC_PI_4.cos();
    // exactly 45 degrees can round to one ulp below the limit
    if cos >= limit - 1e-12 {
        cos.max(limit)
    } else {
        -1.0
    }
}

/// Peaks at 1 for walking at `v_pref`; slower walkers are penalised linearly
/// down towards -1, faster ones decay to 0.
pub fn score_speed(mean_speed: f64, v_pref: f64) -> f64 {
    let rel = (mean_speed - v_pref) / v_pref;
    if mean_speed < v_pref {
        rel
    } else {
        (1.0 - rel).max(0.0)
    }
}

/// Favours humans between the robot and its goal, closer ones more.
pub fn score_position(human_pos: Vec2, robot_pos: Vec2, goal: Vec2, range: f64) -> f64 {
    let to_human = human_pos - robot_pos;
    let to_goal = goal - robot_pos;
    if to_human.dot(to_goal) > 0.0 {
        (1.0 - to_human.norm() / range).max(0.0)
    } else {
        -1.0
    }
}

pub fn weighted_score(weights: (f64, f64, f64), s_head: f64, s_vel: f64, s_pos: f64) -> f64 {
    weights.0 * s_head + weights.1 * s_vel + weights.2 * s_pos
}
