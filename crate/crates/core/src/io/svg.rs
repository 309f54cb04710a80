//! Static SVG boxplots.
//!
//! One panel per (scenario, sampler). Inside a panel the boxes are grouped by
//! budget, one box per estimator, with a shared legend mapping fill colors to
//! estimators. The mean is a green dot, the median a red bar, and the true
//! baseline a black dashed line over each box. The y-axis always spans
//! accuracy 0..1 with a tick every 0.1.

use std::fmt::Write;

use super::records::{Summary, SummaryGroup};
use super::IoError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutOptions {
    pub box_width: f64,
    pub box_gap: f64,
    pub group_gap: f64,
    /// Height of the plotting area of one panel.
    pub plot_height: f64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        Self { box_width: 18.0, box_gap: 6.0, group_gap: 22.0, plot_height: 260.0 }
    }
}

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 24.0;
const PANEL_TITLE: f64 = 28.0;
const AXIS_LABELS: f64 = 26.0;
const LEGEND_ROW: f64 = 16.0;
const PANEL_GAP: f64 = 18.0;
const MIN_PANEL_WIDTH: f64 = 360.0;

const PALETTE: [&str; 8] = ["#9ecae1", "#fdd0a2", "#c7e9c0", "#dadaeb", "#fcbba1", "#d9d9d9", "#c6dbef", "#fee391"];

struct Panel<'a> {
    scenario: &'a str,
    sampler: &'a str,
    /// Budgets in order of appearance, each with its groups.
    budgets: Vec<(usize, Vec<&'a SummaryGroup>)>,
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn panels(summary: &Summary) -> Vec<Panel<'_>> {
    let mut panels: Vec<Panel> = Vec::new();
    for g in &summary.groups {
        let idx = match panels.iter().position(|p| p.scenario == g.scenario && p.sampler == g.sampler) {
            Some(i) => i,
            None => {
                panels.push(Panel { scenario: &g.scenario, sampler: &g.sampler, budgets: Vec::new() });
                panels.len() - 1
            }
        };
        let panel = &mut panels[idx];
        match panel.budgets.iter_mut().find(|(b, _)| *b == g.budget) {
            Some((_, groups)) => groups.push(g),
            None => panel.budgets.push((g.budget, vec![g])),
        }
    }
    panels
}

pub fn render_boxplots_svg(summary: &Summary, layout: &LayoutOptions) -> Result<String, IoError> {
    if summary.groups.is_empty() {
        return Err(IoError::EmptyPlot);
    }
    let mut estimators: Vec<&str> = Vec::new();
    for g in &summary.groups {
        if !estimators.contains(&g.estimator.as_str()) {
            estimators.push(&g.estimator);
        }
    }
    let color = |name: &str| PALETTE[estimators.iter().position(|e| *e == name).unwrap() % PALETTE.len()];

    let panels = panels(summary);
    let slot = layout.box_width + layout.box_gap;
    let panel_width = |p: &Panel| {
        let inner: f64 = p.budgets.iter().map(|(_, gs)| gs.len() as f64 * slot + layout.group_gap).sum();
        (MARGIN_LEFT + inner + MARGIN_RIGHT).max(MIN_PANEL_WIDTH)
    };
    let width = panels.iter().map(panel_width).fold(0.0, f64::max);
    let legend_height = estimators.len() as f64 * LEGEND_ROW + 8.0;
    let panel_height = PANEL_TITLE + layout.plot_height + AXIS_LABELS + legend_height;
    let height = panels.len() as f64 * (panel_height + PANEL_GAP);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{width:.0}" height="{height:.0}" fill="white"/>"#).unwrap();

    for (pi, panel) in panels.iter().enumerate() {
        let top = pi as f64 * (panel_height + PANEL_GAP);
        let plot_top = top + PANEL_TITLE;
        let plot_bottom = plot_top + layout.plot_height;
        let y = |v: f64| plot_bottom - v.clamp(0.0, 1.0) * layout.plot_height;
        let right = panel_width(panel) - MARGIN_RIGHT;

        writeln!(s, r#"<g class="panel">"#).unwrap();
        writeln!(
            s,
            r#"<text x="{MARGIN_LEFT:.1}" y="{:.1}" font-size="13" font-weight="bold">{} / {}</text>"#,
            top + 18.0,
            escape(panel.scenario),
            escape(panel.sampler)
        )
        .unwrap();

        for tick in 0..=10 {
            let v = tick as f64 / 10.0;
            let ty = y(v);
            writeln!(s, r##"<line x1="{MARGIN_LEFT:.1}" y1="{ty:.2}" x2="{right:.1}" y2="{ty:.2}" stroke="#eeeeee"/>"##).unwrap();
            writeln!(s, r##"<line x1="{:.1}" y1="{ty:.2}" x2="{MARGIN_LEFT:.1}" y2="{ty:.2}" stroke="black"/>"##, MARGIN_LEFT - 4.0)
                .unwrap();
            writeln!(s, r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, MARGIN_LEFT - 6.0, ty + 4.0).unwrap();
        }
        writeln!(
            s,
            r#"<line x1="{MARGIN_LEFT:.1}" y1="{plot_top:.2}" x2="{MARGIN_LEFT:.1}" y2="{plot_bottom:.2}" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<line x1="{MARGIN_LEFT:.1}" y1="{plot_bottom:.2}" x2="{right:.1}" y2="{plot_bottom:.2}" stroke="black"/>"#
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">accuracy</text>"#,
            (plot_top + plot_bottom) / 2.0,
            (plot_top + plot_bottom) / 2.0
        )
        .unwrap();

        let mut x = MARGIN_LEFT + layout.group_gap / 2.0;
        for (budget, groups) in &panel.budgets {
            let group_start = x;
            for g in groups {
                draw_box(&mut s, g, x, layout.box_width, color(&g.estimator), &y);
                x += slot;
            }
            let centre = (group_start + x - layout.box_gap) / 2.0;
            writeln!(s, r#"<text x="{centre:.2}" y="{:.2}" text-anchor="middle">B={budget}</text>"#, plot_bottom + 16.0).unwrap();
            x += layout.group_gap;
        }

        let legend_top = plot_bottom + AXIS_LABELS;
        for (i, name) in estimators.iter().enumerate() {
            let ly = legend_top + i as f64 * LEGEND_ROW;
            writeln!(
                s,
                r#"<rect x="{MARGIN_LEFT:.1}" y="{ly:.2}" width="10" height="10" fill="{}" stroke="black"/>"#,
                color(name)
            )
            .unwrap();
            writeln!(s, r#"<text x="{:.1}" y="{:.2}">{}</text>"#, MARGIN_LEFT + 16.0, ly + 9.0, escape(name)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn draw_box(s: &mut String, g: &SummaryGroup, x: f64, w: f64, fill: &str, y: &impl Fn(f64) -> f64) {
    let e = &g.estimate;
    let cx = x + w / 2.0;
    writeln!(s, r#"<g class="box"><title>{} B={}</title>"#, escape(&g.estimator), g.budget).unwrap();
    for (a, b) in [(e.whisker_low, e.q25), (e.q75, e.whisker_high)] {
        writeln!(s, r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#, y(a), y(b)).unwrap();
    }
    for v in [e.whisker_low, e.whisker_high] {
        writeln!(s, r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#, x + w * 0.25, y(v), x + w * 0.75, y(v))
            .unwrap();
    }
    writeln!(
        s,
        r#"<rect x="{x:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{fill}" stroke="black"/>"#,
        y(e.q75),
        y(e.q25) - y(e.q75)
    )
    .unwrap();
    writeln!(s, r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="red" stroke-width="2"/>"#, y(e.median), x + w, y(e.median))
        .unwrap();
    writeln!(s, r#"<circle cx="{cx:.2}" cy="{:.2}" r="3" fill="green"/>"#, y(e.mean)).unwrap();
    let tb = y(g.true_baseline.mean);
    writeln!(
        s,
        r#"<line x1="{:.2}" y1="{tb:.2}" x2="{:.2}" y2="{tb:.2}" stroke="black" stroke-dasharray="4 3"/>"#,
        x - 3.0,
        x + w + 3.0
    )
    .unwrap();
    writeln!(s, "</g>").unwrap();
}
