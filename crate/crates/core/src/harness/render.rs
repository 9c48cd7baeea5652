use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{cis, Point, StarDomain};
use crate::solver::{fd_polar_harmonic_measure, SolverError};
use crate::velling::VellingInstance;

/// Scalar field drawn under the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldLayer {
    #[default]
    None,
    /// `g(·, 0, D°)`.
    BasicGreen,
    /// `ω(·, I₀, D)`.
    VellingMeasure,
    /// `u = φ - g(·, 0, D°)`.
    Comparison,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderOptions {
    pub field: FieldLayer,
    pub show_basic: bool,
    pub show_polygon: bool,
    /// Image width and height in pixels.
    pub size: u32,
    /// Heatmap cells per axis.
    pub resolution: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            field: FieldLayer::None,
            show_basic: true,
            show_polygon: false,
            size: 640,
            resolution: 120,
        }
    }
}

const EXTENT: f64 = 1.1;
const ARC_SAMPLES: usize = 96;
const PALETTE: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];
const ARC_COLOURS: [&str; 2] = ["#d62728", "#1f77b4"];

struct Canvas {
    size: f64,
    out: String,
}

impl Canvas {
    fn x(&self, p: Point) -> f64 {
        (p.re + EXTENT) / (2.0 * EXTENT) * self.size
    }

    fn y(&self, p: Point) -> f64 {
        (EXTENT - p.im) / (2.0 * EXTENT) * self.size
    }

    fn path(&self, pts: &[Point], closed: bool) -> String {
        let mut d = String::new();
        for (i, &p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { 'M' } else { 'L' }, self.x(p), self.y(p));
        }
        if closed {
            d.push('Z');
        }
        d
    }

    fn polyline(&mut self, pts: &[Point], closed: bool, style: &str) {
        let d = self.path(pts, closed);
        let _ = writeln!(self.out, r#"<path d="{d}" {style}/>"#);
    }
}

fn colour(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (PALETTE.len() - 1) as f64;
    let i = (t.floor() as usize).min(PALETTE.len() - 2);
    let f = t - i as f64;
    let (a, b) = (PALETTE[i], PALETTE[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn outline(d: &StarDomain, t0: f64, t1: f64) -> Vec<Point> {
    (0..=ARC_SAMPLES)
        .map(|i| d.boundary_point(t0 + (t1 - t0) * i as f64 / ARC_SAMPLES as f64))
        .collect()
}

fn heatmap(inst: &VellingInstance, layer: FieldLayer, res: usize, c: &mut Canvas) -> Result<(), SolverError> {
    let (domain, eval): (&StarDomain, Box<dyn Fn(Point) -> Result<f64, SolverError> + '_>) = match layer {
        FieldLayer::None => return Ok(()),
        FieldLayer::BasicGreen => {
            let f = inst.green_dcirc()?;
            (inst.basic_domain(), Box::new(move |z| f.value_at(z)))
        }
        FieldLayer::VellingMeasure => {
            let f = fd_polar_harmonic_measure(inst.velling_domain(), &[0], &inst.options().log_polar)?;
            (inst.velling_domain(), Box::new(move |z| f.value_at(z)))
        }
        FieldLayer::Comparison => (inst.basic_domain(), Box::new(move |z| inst.u_at(z).map(|u| u.0))),
    };
    let step = 2.0 / res as f64;
    let mut cells = Vec::new();
    for i in 0..res {
        for j in 0..res {
            let z = Point::new(-1.0 + (i as f64 + 0.5) * step, -1.0 + (j as f64 + 0.5) * step);
            if z.norm() < 0.5 * step || !domain.contains(z) {
                continue;
            }
            if let Ok(v) = eval(z) {
                cells.push((z, v));
            }
        }
    }
    if cells.is_empty() {
        return Ok(());
    }
    // Green functions blow up at the pole: scale to the 98th percentile.
    let mut sorted: Vec<f64> = cells.iter().map(|c| c.1).collect();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[0];
    let hi = sorted[((sorted.len() - 1) as f64 * 0.98) as usize].max(lo + 1e-12);
    let px = step / (2.0 * EXTENT) * c.size;
    for (z, v) in cells {
        let corner = z + Point::new(-0.5 * step, 0.5 * step);
        let _ = writeln!(
            c.out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            c.x(corner),
            c.y(corner),
            px + 0.3,
            px + 0.3,
            colour((v - lo) / (hi - lo))
        );
    }
    let (x0, y0, w, h) = (c.size - 36.0, 20.0, 14.0, 160.0);
    for k in 0..32 {
        let t = 1.0 - k as f64 / 31.0;
        let _ = writeln!(
            c.out,
            r#"<rect x="{x0:.1}" y="{:.2}" width="{w}" height="{:.2}" fill="{}"/>"#,
            y0 + h * k as f64 / 32.0,
            h / 32.0 + 0.3,
            colour(t)
        );
    }
    let _ = writeln!(
        c.out,
        r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{hi:.3}</text><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{lo:.3}</text>"#,
        x0 - 4.0,
        y0 + 10.0,
        x0 - 4.0,
        y0 + h
    );
    Ok(())
}

/// SVG drawing of an instance: the unit circle, arcs `L_k`, shaded lenses
/// between `L_k` and the geodesics `I_k`, optionally the basic domain `D°`,
/// the inscribed polygon and a field heatmap with a colour legend. The
/// output is a pure function of its inputs.
pub fn svg_string(inst: &VellingInstance, opts: &RenderOptions) -> Result<String, SolverError> {
    let mut c = Canvas {
        size: opts.size as f64,
        out: String::new(),
    };
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{0}" viewBox="0 0 {0} {0}">"#,
        opts.size
    );
    let _ = writeln!(c.out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    heatmap(inst, opts.field, opts.resolution, &mut c)?;

    let p = inst.partition();
    let d = inst.velling_domain();
    for arc in p.arcs() {
        let (t0, t1) = (arc.center - arc.half_opening, arc.center + arc.half_opening);
        let mut lens: Vec<Point> = (0..=ARC_SAMPLES)
            .map(|i| cis(t0 + (t1 - t0) * i as f64 / ARC_SAMPLES as f64))
            .collect();
        lens.extend(outline(d, t0, t1).into_iter().rev());
        c.polyline(&lens, true, r##"fill="#9e9e9e" fill-opacity="0.35" stroke="none""##);
        c.polyline(&outline(d, t0, t1), false, r##"fill="none" stroke="#333333" stroke-width="1.5""##);
    }
    let circle: Vec<Point> = (0..=4 * ARC_SAMPLES)
        .map(|i| cis(TAU * i as f64 / (4 * ARC_SAMPLES) as f64))
        .collect();
    c.polyline(&circle, true, r##"fill="none" stroke="#777777" stroke-width="1""##);
    for (k, arc) in p.arcs().iter().enumerate() {
        let (t0, t1) = (arc.center - arc.half_opening, arc.center + arc.half_opening);
        let pts: Vec<Point> = (0..=ARC_SAMPLES)
            .map(|i| cis(t0 + (t1 - t0) * i as f64 / ARC_SAMPLES as f64))
            .collect();
        let style = format!(r#"fill="none" stroke="{}" stroke-width="3""#, ARC_COLOURS[k % 2]);
        c.polyline(&pts, false, &style);
    }
    if opts.show_basic {
        let b = inst.basic_domain();
        let pts = outline(b, 0.0, TAU);
        c.polyline(&pts, true, r##"fill="none" stroke="#ff7f0e" stroke-width="1.5" stroke-dasharray="6,4""##);
    }
    if opts.show_polygon {
        let pts: Vec<Point> = p.arcs().iter().map(|a| cis(a.center - a.half_opening)).collect();
        c.polyline(&pts, true, r##"fill="none" stroke="#2ca02c" stroke-width="1.5""##);
    }
    let o = c.x(Point::new(0.0, 0.0));
    let _ = writeln!(c.out, r#"<circle cx="{o:.2}" cy="{o:.2}" r="2.5" fill="black"/>"#);
    c.out.push_str("</svg>\n");
    Ok(c.out)
}

/// Writes [`svg_string`] to `path`.
pub fn render_svg(inst: &VellingInstance, opts: &RenderOptions, path: &Path) -> Result<(), HarnessError> {
    let svg = svg_string(inst, opts)?;
    fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ArcPartition;
    use crate::velling::CheckOptions;

    fn inst(n: usize) -> VellingInstance {
        VellingInstance::geodesic(ArcPartition::equal(n).unwrap(), CheckOptions::default(), 0).unwrap()
    }

    #[test]
    fn deterministic_output() {
        let i = inst(4);
        let o = RenderOptions::default();
        assert_eq!(svg_string(&i, &o).unwrap(), svg_string(&i, &o).unwrap());
    }

    #[test]
    fn draws_one_lens_per_arc() {
        let svg = svg_string(&inst(5), &RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("fill-opacity=\"0.35\"").count(), 5);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn heatmap_and_legend() {
        let opts = RenderOptions {
            field: FieldLayer::BasicGreen,
            resolution: 30,
            ..Default::default()
        };
        let i = VellingInstance::geodesic(
            ArcPartition::equal(3).unwrap(),
            CheckOptions::default(),
            0,
        )
        .unwrap();
        let svg = svg_string(&i, &opts).unwrap();
        assert!(svg.matches("<rect").count() > 100);
        assert!(svg.contains("<text"));
    }

    #[test]
    fn unwritable_path() {
        let r = render_svg(&inst(3), &RenderOptions::default(), Path::new("/nonexistent/dir/x.svg"));
        assert!(matches!(r, Err(HarnessError::Io(_))));
    }
}
