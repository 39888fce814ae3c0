//! Static SVG rendering of contour sets.
//!
//! Output is plain text assembled with fixed number formatting, so a given
//! (contour set, options) pair always renders to identical bytes; plots are
//! diffable in tests.

use std::fmt::Write as _;

use crate::engine::ContourSet;
use crate::ingest::Player;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Original,
    Standardized,
}

#[derive(Debug, Clone)]
pub struct PlotOptions {
    pub width: u32,
    pub height: u32,
    pub title: String,
    pub units: Units,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { width: 800, height: 560, title: String::new(), units: Units::Original }
    }
}

fn player_color(p: Player) -> &'static str {
    match p {
        Player::Federer => "#d62728",
        Player::Djokovic => "#1f77b4",
        Player::Nadal => "#2ca02c",
    }
}

const DASHES: [&str; 4] = ["none", "6,3", "2,2", "9,3,2,3"];

const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 52.0;

struct Frame {
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
    px: f64,
    py: f64,
    pw: f64,
    ph: f64,
}

impl Frame {
    fn to_screen(&self, p: [f64; 2]) -> (f64, f64) {
        let sx = self.px + (p[0] - self.xmin) / (self.xmax - self.xmin) * self.pw;
        let sy = self.py + (1.0 - (p[1] - self.ymin) / (self.ymax - self.ymin)) * self.ph;
        (sx, sy)
    }
}

fn nice_ticks(min: f64, max: f64) -> Vec<f64> {
    let range = (max - min).max(1e-12);
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    } * mag;
    let mut t = (min / step).ceil() * step;
    let mut out = Vec::new();
    while t <= max + 1e-9 * range {
        out.push(t);
        t += step;
    }
    out
}

fn tick_label(v: f64, step_hint: f64) -> String {
    if step_hint >= 1.0 {
        format!("{v:.0}")
    } else if step_hint >= 0.1 {
        format!("{v:.1}")
    } else if step_hint >= 0.01 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

/// Renders one contour set: polygon outline per profile, color per player,
/// dash pattern per within-player variant, legend, labelled axes. Empty
/// regions get a legend marker instead of a path.
pub fn render_contours(set: &ContourSet, opts: &PlotOptions) -> String {
    let polys: Vec<&crate::geometry::Polygon> = set
        .profiles
        .iter()
        .map(|p| match opts.units {
            Units::Original => &p.polygon_orig,
            Units::Standardized => &p.polygon_std,
        })
        .collect();

    // Data range over non-empty polygons, with padding.
    let mut xmin = f64::MAX;
    let mut xmax = f64::MIN;
    let mut ymin = f64::MAX;
    let mut ymax = f64::MIN;
    for poly in &polys {
        for v in poly.vertices() {
            xmin = xmin.min(v[0]);
            xmax = xmax.max(v[0]);
            ymin = ymin.min(v[1]);
            ymax = ymax.max(v[1]);
        }
    }
    if xmin > xmax {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let d = (hi - lo).max(1e-9) * 0.08;
        (lo - d, hi + d)
    };
    (xmin, xmax) = pad(xmin, xmax);
    (ymin, ymax) = pad(ymin, ymax);

    let w = opts.width as f64;
    let h = opts.height as f64;
    let frame = Frame {
        xmin,
        xmax,
        ymin,
        ymax,
        px: MARGIN_LEFT,
        py: MARGIN_TOP,
        pw: w - MARGIN_LEFT - MARGIN_RIGHT,
        ph: h - MARGIN_TOP - MARGIN_BOTTOM,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(svg, r#"<rect width="{}" height="{}" fill="white"/>"#, opts.width, opts.height);

    if !opts.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            frame.px + frame.pw / 2.0,
            escape(&opts.title)
        );
    }

    // Axes box.
    let _ = writeln!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333" stroke-width="1"/>"##,
        frame.px, frame.py, frame.pw, frame.ph
    );

    // Ticks and grid.
    let xticks = nice_ticks(xmin, xmax);
    let xstep = if xticks.len() >= 2 { xticks[1] - xticks[0] } else { 1.0 };
    for t in &xticks {
        let (sx, _) = frame.to_screen([*t, ymin]);
        let y0 = frame.py + frame.ph;
        let _ = writeln!(
            svg,
            r##"<line x1="{sx:.2}" y1="{:.2}" x2="{sx:.2}" y2="{:.2}" stroke="#333" stroke-width="1"/>"##,
            y0,
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{sx:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 18.0,
            tick_label(*t, xstep)
        );
    }
    let yticks = nice_ticks(ymin, ymax);
    let ystep = if yticks.len() >= 2 { yticks[1] - yticks[0] } else { 1.0 };
    for t in &yticks {
        let (_, sy) = frame.to_screen([xmin, *t]);
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{sy:.2}" x2="{:.2}" y2="{sy:.2}" stroke="#333" stroke-width="1"/>"##,
            frame.px - 5.0,
            frame.px
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            frame.px - 8.0,
            sy + 4.0,
            tick_label(*t, ystep)
        );
    }

    // Axis labels.
    let (xlabel, ylabel) = match opts.units {
        Units::Original => ("relative points won", "minutes"),
        Units::Standardized => ("relative points won (standardized)", "minutes (standardized)"),
    };
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{xlabel}</text>"#,
        frame.px + frame.pw / 2.0,
        h - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        frame.py + frame.ph / 2.0,
        frame.py + frame.ph / 2.0
    );

    // Contours: color per player, dash per within-player variant.
    let mut variant_counts: std::collections::BTreeMap<&str, usize> =
        std::collections::BTreeMap::new();
    let mut legend: Vec<(String, &'static str, &'static str, bool)> = Vec::new();
    for (profile, poly) in set.profiles.iter().zip(&polys) {
        let color = player_color(profile.profile.player);
        let count = variant_counts.entry(player_color(profile.profile.player)).or_insert(0);
        let dash = DASHES[*count % DASHES.len()];
        *count += 1;
        legend.push((profile.name.clone(), color, dash, profile.empty));
        if profile.empty || poly.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (i, v) in poly.vertices().iter().enumerate() {
            let (sx, sy) = frame.to_screen(*v);
            let _ = write!(d, "{}{sx:.2} {sy:.2}", if i == 0 { "M " } else { " L " });
        }
        d.push_str(" Z");
        let dash_attr = if dash == "none" {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            svg,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#
        );
    }

    // Legend.
    let lx = w - MARGIN_RIGHT + 16.0;
    let mut ly = frame.py + 10.0;
    for (name, color, dash, empty) in &legend {
        let dash_attr = if *dash == "none" {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{dash}""#)
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.8"{dash_attr}/>"#,
            ly - 4.0,
            lx + 26.0,
            ly - 4.0
        );
        let suffix = if *empty { " (empty region)" } else { "" };
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" font-family="sans-serif" font-size="11">{}{suffix}</text>"#,
            lx + 32.0,
            escape(name)
        );
        ly += 16.0;
    }

    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{CovariateProfile, ScalingParams};
    use crate::engine::{ContourSet, ProfileContour};
    use crate::geometry::Polygon;

    fn square_set() -> ContourSet {
        let square = Polygon::rect(0.0, 0.0, 1.0, 1.0);
        ContourSet {
            manifest: None,
            tau: 0.25,
            scaling: ScalingParams::identity(),
            data_fingerprint: "test".into(),
            profiles: vec![ProfileContour {
                name: "federer_loss".into(),
                profile: CovariateProfile::reference(Player::Federer),
                polygon_std: square.clone(),
                polygon_orig: square,
                empty: false,
            }],
        }
    }

    #[test]
    fn unit_square_renders_one_closed_path_with_four_vertices() {
        let svg = render_contours(&square_set(), &PlotOptions::default());
        let paths: Vec<&str> = svg.matches("<path").collect();
        assert_eq!(paths.len(), 1);
        let d_start = svg.find("d=\"M ").unwrap();
        let d_end = svg[d_start..].find(" Z\"").unwrap() + d_start;
        let d = &svg[d_start..d_end];
        assert_eq!(d.matches(" L ").count(), 3, "4 vertices = M + 3 L: {d}");
        assert!(svg.contains("relative points won"));
        assert!(svg.contains(">minutes<"));
    }

    #[test]
    fn two_profiles_two_colors_and_legend_entries() {
        let mut set = square_set();
        let tri = Polygon::new(vec![[0.2, 0.2], [0.8, 0.2], [0.5, 0.9]]);
        set.profiles.push(ProfileContour {
            name: "nadal_loss".into(),
            profile: CovariateProfile::reference(Player::Nadal),
            polygon_std: tri.clone(),
            polygon_orig: tri,
            empty: false,
        });
        let svg = render_contours(&set, &PlotOptions::default());
        assert!(svg.contains("#d62728"));
        assert!(svg.contains("#2ca02c"));
        assert!(svg.contains("federer_loss"));
        assert!(svg.contains("nadal_loss"));
    }

    #[test]
    fn rendering_is_byte_deterministic() {
        let set = square_set();
        let a = render_contours(&set, &PlotOptions::default());
        let b = render_contours(&set, &PlotOptions::default());
        assert_eq!(a, b);
    }

    #[test]
    fn empty_region_gets_legend_marker_and_no_path() {
        let mut set = square_set();
        set.profiles[0].polygon_std = Polygon::empty();
        set.profiles[0].polygon_orig = Polygon::empty();
        set.profiles[0].empty = true;
        let svg = render_contours(&set, &PlotOptions::default());
        assert!(!svg.contains("<path"));
        assert!(svg.contains("federer_loss (empty region)"));
    }
}
