//! Deterministic SVG rendering of a run: one polyline per agent plus the
//! robot, dots shaded from early (blue) to late (red), a glow on the leader
//! and a marker on each subgoal.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::geometry::{Segment, Vec2};
use crate::scene::AgentId;
use crate::sim::RunRecord;
use crate::visibility::VisibleRegion;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 20.0;
/// Aim for roughly this many time dots per trajectory.
const DOTS: usize = 40;

struct Frame {
    min: Vec2,
    scale: f64,
    height: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = Vec2>) -> Frame {
        let (mut lo, mut hi) = (Vec2::new(f64::MAX, f64::MAX), Vec2::new(f64::MIN, f64::MIN));
        for p in points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if lo.x > hi.x {
            lo = Vec2::ZERO;
            hi = Vec2::new(1.0, 1.0);
        }
        let span_x = (hi.x - lo.x).max(1.0);
        let span_y = (hi.y - lo.y).max(1.0);
        let scale = (WIDTH - 2.0 * MARGIN) / span_x;
        Frame {
            min: lo,
            scale,
            height: span_y * scale + 2.0 * MARGIN,
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            self.height - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }
}

fn gradient(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let r = (255.0 * s).round() as u8;
    let b = (255.0 * (1.0 - s)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

fn points(frame: &Frame, path: &[Vec2]) -> String {
    let mut out = String::new();
    for (i, p) in path.iter().enumerate() {
        let (x, y) = frame.map(*p);
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.2},{y:.2}");
    }
    out
}

/// Render `record`, optionally with walls and one visible region.
pub fn render_svg(record: &RunRecord, obstacles: &[Segment], region: Option<&VisibleRegion>) -> String {
    let robot: Vec<Vec2> = record.ticks.iter().map(|t| t.robot.position).collect();
    let mut agents: BTreeMap<AgentId, Vec<(u64, Vec2)>> = BTreeMap::new();
    for t in &record.ticks {
        for (id, s) in &t.humans {
            agents.entry(*id).or_default().push((t.tick, s.position));
        }
    }

    let frame = Frame::fit(
        robot
            .iter()
            .copied()
            .chain(agents.values().flatten().map(|(_, p)| *p))
            .chain(std::iter::once(record.goal))
            .chain(obstacles.iter().flat_map(|s| [s.a, s.b])),
    );
    let last = record.final_tick().max(1) as f64;
    let stride = (record.ticks.len() / DOTS).max(1);
    let px = |m: f64| m * frame.scale;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{:.0}\" viewBox=\"0 0 {WIDTH:.0} {:.2}\">",
        frame.height, frame.height
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    if let Some(r) = region {
        let _ = writeln!(
            svg,
            "<polygon class=\"region\" points=\"{}\" fill=\"#9ecae1\" fill-opacity=\"0.3\" stroke=\"none\"/>",
            points(&frame, &r.boundary)
        );
    }
    for s in obstacles {
        let (x1, y1) = frame.map(s.a);
        let (x2, y2) = frame.map(s.b);
        let _ = writeln!(
            svg,
            "<line class=\"wall\" x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"black\" stroke-width=\"3\"/>"
        );
    }

    // leader glows, drawn under the trajectories
    for t in record.ticks.iter().step_by(stride) {
        let Some(lead) = t.effective_leader.or(t.leader) else {
            continue;
        };
        if let Some((_, s)) = t.humans.iter().find(|(id, _)| *id == lead) {
            let (x, y) = frame.map(s.position);
            let _ = writeln!(
                svg,
                "<circle class=\"leader\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{:.2}\" fill=\"gold\" fill-opacity=\"0.35\"/>",
                px(record.agent_radius * 1.6)
            );
        }
    }

    for (id, path) in &agents {
        let ps: Vec<Vec2> = path.iter().map(|(_, p)| *p).collect();
        let kind = record.kinds.get(id).map_or("pedestrian", |k| k.as_str());
        let _ = writeln!(
            svg,
            "<polyline class=\"agent {kind}\" data-id=\"{id}\" points=\"{}\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>",
            points(&frame, &ps)
        );
        for (tick, p) in path.iter().step_by(stride) {
            let (x, y) = frame.map(*p);
            let _ = writeln!(
                svg,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2\" fill=\"{}\"/>",
                gradient(*tick as f64 / last)
            );
        }
    }

    let _ = writeln!(
        svg,
        "<polyline class=\"robot\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
        points(&frame, &robot)
    );
    for t in record.ticks.iter().step_by(stride) {
        let (x, y) = frame.map(t.robot.position);
        let _ = writeln!(
            svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{}\"/>",
            gradient(t.tick as f64 / last)
        );
        if let (Some(g), Some(_)) = (t.subgoal, t.leader) {
            let (x, y) = frame.map(g);
            let _ = writeln!(
                svg,
                "<rect class=\"subgoal\" x=\"{:.2}\" y=\"{:.2}\" width=\"4\" height=\"4\" fill=\"green\"/>",
                x - 2.0,
                y - 2.0
            );
        }
    }

    let (gx, gy) = frame.map(record.goal);
    let _ = writeln!(
        svg,
        "<circle class=\"goal\" cx=\"{gx:.2}\" cy=\"{gy:.2}\" r=\"6\" fill=\"none\" stroke=\"green\" stroke-width=\"2\"/>"
    );
    svg.push_str("</svg>\n");
    svg
}
