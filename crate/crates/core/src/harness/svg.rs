//! Static SVG traces of a plan: workspace outline, start and goal discs,
//! numbered displacement arrows and the first action's tunnels.

use std::fmt::Write;

use thiserror::Error;

use crate::geometry::Point;
use crate::motion::swept_volume;
use crate::orchestrator::{validate_plan, Plan};
use crate::scene::Scene;

const SCALE: f64 = 20.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvgError {
    #[error("plan does not validate: {0}")]
    InvalidPlan(String),
}

struct Frame {
    min_x: f64,
    max_y: f64,
}

impl Frame {
    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min_x) * SCALE,
            MARGIN + (self.max_y - p.y) * SCALE,
        )
    }
}

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

pub fn render_svg(scene: &Scene, plan: &Plan) -> Result<String, SvgError> {
    let report = validate_plan(scene, plan);
    if !report.valid {
        return Err(SvgError::InvalidPlan(report.reason.unwrap_or_default()));
    }
    let ws = scene.workspace;
    let home = scene.robot_home;
    let min_x = home.x.min(0.0) - 1.0;
    let max_x = home.x.max(ws.width) + 1.0;
    let min_y = home.y.min(0.0) - 1.0;
    let max_y = ws.depth + 1.0;
    let frame = Frame { min_x, max_y };
    let width = (max_x - min_x) * SCALE + 2.0 * MARGIN;
    let height = (max_y - min_y) * SCALE + 2.0 * MARGIN;
    let r = scene.object_radius * SCALE;

    let mut s = String::new();
    let _ = writeln!(s, r##"<?xml version="1.0" encoding="UTF-8"?>"##);
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"##
    );
    let _ = writeln!(
        s,
        r##"<defs><marker id="head" markerWidth="8" markerHeight="8" refX="7" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="#333"/></marker></defs>"##
    );

    let (x0, y0) = frame.map(Point::new(0.0, ws.depth));
    let _ = writeln!(
        s,
        r##"<rect class="workspace" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000" stroke-width="2"/>"##,
        ws.width * SCALE,
        ws.depth * SCALE
    );

    if let Some(first) = plan.actions.first() {
        if let Ok(vol) = swept_volume(scene, first) {
            for (class, tunnel, fill) in [("tunnel pick", vol.pick, "#3b6fd6"), ("tunnel place", vol.place, "#d63b3b")] {
                let pts: Vec<String> = tunnel
                    .corners()
                    .iter()
                    .map(|&c| {
                        let (x, y) = frame.map(c);
                        format!("{x:.2},{y:.2}")
                    })
                    .collect();
                let _ = writeln!(
                    s,
                    r##"<polygon class="{class}" points="{}" fill="{fill}" fill-opacity="0.2" stroke="none"/>"##,
                    pts.join(" ")
                );
            }
        }
    }

    for (i, &p) in scene.goal.regions().iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            s,
            r##"<circle class="goal" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="none" stroke="{}" stroke-width="2" stroke-dasharray="4 2"/>"##,
            color(i)
        );
    }
    for (i, &p) in scene.start.regions().iter().enumerate() {
        let (x, y) = frame.map(p);
        let _ = writeln!(
            s,
            r##"<circle class="start" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{}"/>"##,
            color(i)
        );
        let _ = writeln!(
            s,
            r##"<text class="object-label" x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle" fill="#fff">{i}</text>"##,
            y + 3.5
        );
    }

    for (k, act) in plan.actions.iter().enumerate() {
        let (x1, y1) = frame.map(act.from);
        let (x2, y2) = frame.map(act.to);
        let _ = writeln!(
            s,
            r##"<line class="arrow" x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{}" stroke-width="1.5" marker-end="url(#head)"/>"##,
            color(act.object.index())
        );
        let _ = writeln!(
            s,
            r##"<text class="step" x="{:.2}" y="{:.2}" font-size="11" fill="#000">{}</text>"##,
            (x1 + x2) / 2.0 + 3.0,
            (y1 + y2) / 2.0 - 3.0,
            k + 1
        );
    }

    let (hx, hy) = frame.map(home);
    let _ = writeln!(
        s,
        r##"<rect class="robot" x="{:.2}" y="{:.2}" width="10" height="10" fill="#444"/>"##,
        hx - 5.0,
        hy - 5.0
    );
    s.push_str("</svg>\n");
    Ok(s)
}
