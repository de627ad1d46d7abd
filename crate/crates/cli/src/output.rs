//! CSV tables and minimal SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use crate::config::{usage, UsageError};

/// 17 significant digits, enough to round-trip an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct OutDir {
    root: PathBuf,
    plot: bool,
}

impl OutDir {
    pub fn new(root: impl Into<PathBuf>, plot: bool) -> Result<Self, UsageError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| usage(format!("`out-dir`: cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root,
            plot,
        })
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), UsageError> {
        let path = self.root.join(name);
        let io = |e: csv::Error| usage(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        for r in rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }

    pub fn svg(&mut self, name: &str, plot: &Plot) -> Result<(), UsageError> {
        if !self.plot {
            return Ok(());
        }
        let path = self.root.join(name);
        fs::write(&path, plot.render()).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<(String, Vec<(f64, f64)>)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.log_y = true;
        self
    }

    pub fn with(mut self, name: &str, pts: Vec<(f64, f64)>) -> Self {
        self.series.push((name.into(), pts));
        self
    }

    fn map(&self, (x, y): (f64, f64)) -> Option<(f64, f64)> {
        let x = if self.log_x { x.log10() } else { x };
        let y = if self.log_y { y.log10() } else { y };
        (x.is_finite() && y.is_finite()).then_some((x, y))
    }

    pub fn render(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|(_, s)| s.iter().filter_map(|&p| self.map(p)).collect())
            .collect();
        let all = pts.iter().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
        let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
        let tick = |v: f64, log: bool| if log { format!("1e{v:.1}") } else { format!("{v:.3e}") };

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15" font-family="sans-serif">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(
            s,
            r#"<path d="M{PAD} {PAD} V{} H{}" fill="none" stroke="black"/>"#,
            H - PAD,
            W - PAD
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12" font-family="sans-serif">{}</text>"#, W / 2.0, H - 18.0, esc(&self.x_label));
        let _ = writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" font-size="12" font-family="sans-serif" transform="rotate(-90 16 {})">{}</text>"#, H / 2.0, H / 2.0, esc(&self.y_label));
        for (v, anchor, x, y) in [
            (x0, "start", PAD, H - PAD + 16.0),
            (x1, "end", W - PAD, H - PAD + 16.0),
        ] {
            let _ = writeln!(s, r#"<text x="{x}" y="{y}" text-anchor="{anchor}" font-size="10" font-family="sans-serif">{}</text>"#, tick(v, self.log_x));
        }
        for (v, y) in [(y0, H - PAD), (y1, PAD)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="10" font-family="sans-serif">{}</text>"#, PAD - 4.0, tick(v, self.log_y));
        }
        for (i, ((name, _), p)) in self.series.iter().zip(&pts).enumerate() {
            let color = COLORS[i % COLORS.len()];
            if !p.is_empty() {
                let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
            }
            let ly = PAD + 14.0 * i as f64;
            let _ = writeln!(s, r#"<text x="{}" y="{ly}" font-size="11" font-family="sans-serif" fill="{color}">{}</text>"#, W - PAD - 120.0, esc(name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
    }

    #[test]
    fn svg_is_well_formed() {
        let p = Plot::new("t<1>", "x", "y")
            .log_y()
            .with("a", vec![(1.0, 1.0), (2.0, 0.1)])
            .with("empty", vec![(1.0, 0.0)]);
        let out = p.render();
        assert!(out.starts_with("<svg") && out.trim_end().ends_with("</svg>"));
        assert!(out.contains("t&lt;1&gt;"));
        assert_eq!(out.matches("<polyline").count(), 1);
    }
}
