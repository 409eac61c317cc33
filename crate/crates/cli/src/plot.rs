//! Minimal SVG overlay of specific-heat curves.

use std::fmt::Write as _;

use multibarrier::thermo::{GridSpacing, ThermoCurve};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        let (v, lo, hi) = if self.log {
            (v.ln(), self.lo.ln(), self.hi.ln())
        } else {
            (v, self.lo, self.hi)
        };
        let f = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        from + f * (to - from)
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().ceil() as i32, self.hi.log10().floor() as i32);
            return (a..=b).map(|p| 10f64.powi(p)).collect();
        }
        let span = self.hi - self.lo;
        if !(span > 0.0) {
            return vec![self.lo];
        }
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|i| i as f64 * step).collect()
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// One polyline per curve over `C_h(T)`, with a legend on the right.
pub fn overlay_svg(curves: &[ThermoCurve], spacing: GridSpacing) -> String {
    let temps = curves.iter().flat_map(|c| c.samples.iter().map(|s| s.temperature));
    let (t_lo, t_hi) = temps.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)));
    let c_max = curves
        .iter()
        .flat_map(|c| c.samples.iter().map(|s| s.specific_heat))
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let x = Axis {
        lo: t_lo,
        hi: t_hi,
        log: spacing == GridSpacing::Log,
    };
    let y = Axis {
        lo: 0.0,
        hi: if c_max > 0.0 { c_max * 1.05 } else { 1.0 },
        log: false,
    };
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    if t_lo.is_finite() {
        for t in x.ticks() {
            let px = x.map(t, x0, x1);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.1}" stroke="black"/><text x="{px:.2}" y="{:.1}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                tick_label(t)
            );
        }
    }
    for v in y.ticks() {
        let py = y.map(v, y0, y1);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">T</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">C_h</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let legend_step = ((y0 - y1) / curves.len().max(1) as f64).min(16.0);
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = c
            .samples
            .iter()
            .filter(|p| p.specific_heat.is_finite())
            .map(|p| format!("{:.2},{:.2}", x.map(p.temperature, x0, x1), y.map(p.specific_heat, y0, y1)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = y1 + 8.0 + i as f64 * legend_step;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.2}" x2="{:.1}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.2}">{}</text>"#,
            x1 + 12.0,
            x1 + 32.0,
            x1 + 38.0,
            ly + 4.0,
            c.label
        );
    }
    s.push_str("</svg>\n");
    s
}
