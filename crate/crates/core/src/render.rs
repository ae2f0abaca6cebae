//! SVG frames of a bend sequence.
//!
//! One SVG unit is one model unit and the y axis points up. Each frame draws
//! the fixed part of the chain, the moving part (highlighted), and the arcs
//! its vertices trace over the whole current bend (dashed).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{Chain, Direction, FoldPlan, JointSet};
use crate::geometry::{Aabb, Arc, Point};
use crate::planner::{PlanError, Planner};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("plan fails at step {step}: joint {joint} cannot be bent")]
    InfeasiblePlan { step: usize, joint: usize },
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("frames per bend must be at least 1")]
    NoFrames,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    /// Frames per non-trivial bend.
    pub frames: usize,
    pub stroke_width: f64,
    /// Margin around the drawing, in model units.
    pub padding: f64,
    pub highlight_moving: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec { frames: 24, stroke_width: 0.03, padding: 0.25, highlight_moving: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Frame {
    /// Index into the plan's order.
    pub step: usize,
    /// Joint bending in this frame; `None` for the single frame of a plan
    /// with nothing to move.
    pub joint: Option<usize>,
    pub angle: f64,
    pub vertices: Vec<Point<f64>>,
    #[serde(skip)]
    pub svg: String,
}

struct Bend {
    step: usize,
    joint: usize,
    /// Joints straight during the bend, excluding `joint`.
    straight: JointSet,
    from: f64,
    to: f64,
}

/// Renders `plan` in its own direction. Straight joints produce no frames;
/// if nothing moves at all, one frame of the initial shape is returned.
pub fn render_plan(chain: &Chain<f64>, plan: &FoldPlan, spec: &RenderSpec) -> Result<Vec<Frame>, RenderError> {
    if spec.frames == 0 {
        return Err(RenderError::NoFrames);
    }
    let replay = Planner::new(chain).verify_permutation(plan)?;
    if !replay.found {
        let step = replay.trace.len() - 1;
        let joint = replay.trace[step].joint;
        let step = match plan.direction {
            Direction::Straighten => step,
            Direction::Form => chain.joint_count() - 1 - step,
        };
        return Err(RenderError::InfeasiblePlan { step, joint });
    }

    let n = chain.joint_count();
    let pi = std::f64::consts::PI;
    let mut bends = Vec::new();
    let mut straight = match plan.direction {
        Direction::Straighten => JointSet::empty(n),
        Direction::Form => JointSet::full(n),
    };
    for (step, &joint) in plan.order.iter().enumerate() {
        let theta = chain.angle(joint);
        straight.remove(joint);
        if theta != pi {
            let (from, to) = match plan.direction {
                Direction::Straighten => (theta, pi),
                Direction::Form => (pi, theta),
            };
            bends.push(Bend { step, joint, straight: straight.clone(), from, to });
        }
        if plan.direction == Direction::Straighten {
            straight.insert(joint);
        }
    }

    let mut frames = Vec::new();
    if bends.is_empty() {
        let vertices = chain.state_embedding(&straight).embedding;
        frames.push(Frame { step: 0, joint: None, angle: pi, vertices, svg: String::new() });
    }
    for bend in &bends {
        for k in 1..=spec.frames {
            let f = k as f64 / spec.frames as f64;
            let angle = if k == spec.frames { bend.to } else { bend.from + (bend.to - bend.from) * f };
            let vertices = chain.state_at_angle(&bend.straight, bend.joint, angle).expect("angle inside (0, 2pi)");
            frames.push(Frame { step: bend.step, joint: Some(bend.joint), angle, vertices, svg: String::new() });
        }
    }

    let view = frames
        .iter()
        .map(|f| Aabb::of_points(&f.vertices))
        .reduce(|a, b| a.union(b))
        .expect("at least one frame")
        .inflate(spec.padding);
    for frame in &mut frames {
        let bend = bends.iter().find(|b| Some(b.joint) == frame.joint && b.step == frame.step);
        frame.svg = draw(frame, bend, chain, &view, spec);
    }
    Ok(frames)
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn polyline(pts: &[Point<f64>], class: &str) -> String {
    let coords: Vec<String> = pts.iter().map(|p| format!("{},{}", num(p.x), num(p.y))).collect();
    format!("<polyline class=\"{class}\" points=\"{}\"/>", coords.join(" "))
}

fn arc_path(arc: &Arc<f64>) -> String {
    let a = arc.start_point();
    let b = arc.end_point();
    let large = u8::from(arc.sweep.abs() > std::f64::consts::PI);
    let sweep = u8::from(arc.sweep > 0.0);
    let r = num(arc.radius);
    format!(
        "<path class=\"swept\" d=\"M {} {} A {r} {r} 0 {large} {sweep} {} {}\"/>",
        num(a.x),
        num(a.y),
        num(b.x),
        num(b.y)
    )
}

fn draw(frame: &Frame, bend: Option<&Bend>, chain: &Chain<f64>, view: &Aabb<f64>, spec: &RenderSpec) -> String {
    let (w, h) = (view.max.x - view.min.x, view.max.y - view.min.y);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"{} {} {} {}\">",
        num(w),
        num(h),
        num(view.min.x),
        num(-view.max.y),
        num(w),
        num(h)
    );
    let moving_color = if spec.highlight_moving { "#d62728" } else { "#333333" };
    let sw = num(spec.stroke_width);
    let _ = writeln!(
        s,
        "<style>polyline{{fill:none;stroke-width:{sw};stroke-linejoin:round;stroke-linecap:round}} \
.fixed{{stroke:#333333}} .moving{{stroke:{moving_color}}} \
.swept{{fill:none;stroke:#1f77b4;stroke-width:{};stroke-dasharray:{} {}}} .pivot{{fill:#333333}}</style>",
        num(spec.stroke_width / 2.0),
        num(spec.stroke_width * 3.0),
        num(spec.stroke_width * 2.0)
    );
    s.push_str("<g transform=\"scale(1,-1)\">\n");
    match (bend, frame.joint) {
        (Some(bend), Some(joint)) => {
            let pivot = frame.vertices[joint];
            let start = chain.state_at_angle(&bend.straight, joint, bend.from).expect("valid angle");
            // the moving part turns one way by the opposite of the angle change
            let rotation = bend.from - bend.to;
            for &p in &start[joint + 1..] {
                if p.dist(pivot) > 0.0 {
                    let _ = writeln!(s, "{}", arc_path(&Arc::traced_by(pivot, p, rotation)));
                }
            }
            let _ = writeln!(s, "{}", polyline(&frame.vertices[..=joint], "fixed"));
            let _ = writeln!(s, "{}", polyline(&frame.vertices[joint..], "moving"));
            let _ = writeln!(
                s,
                "<circle class=\"pivot\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                num(pivot.x),
                num(pivot.y),
                num(spec.stroke_width * 1.5)
            );
        }
        _ => {
            let _ = writeln!(s, "{}", polyline(&frame.vertices, "fixed"));
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}
