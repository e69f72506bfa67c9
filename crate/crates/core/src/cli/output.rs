use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::analysis::{Check, DecaySeries, RateFit};
use crate::cli::config::{Emit, ExperimentConfig, ExperimentKind};
use crate::error::Result;
use crate::solver::Moments;

/// A recorded curve, written as one CSV file with columns
/// `(abscissa, mean, stderr)` or `(abscissa, value)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    /// Column-major data, one vector per column.
    pub data: Vec<Vec<f64>>,
}

impl Series {
    /// `t, mean, stderr`.
    pub fn timed(name: impl Into<String>, times: &[f64], mean: &[f64], stderr: &[f64]) -> Self {
        Self::with_columns(name, ["t", "mean", "stderr"], vec![times.to_vec(), mean.to_vec(), stderr.to_vec()])
    }

    pub fn from_moments(name: impl Into<String>, times: &[f64], m: &Moments) -> Self {
        Self::timed(name, times, &m.mean, &m.stderr)
    }

    pub fn from_decay(name: impl Into<String>, s: &DecaySeries) -> Self {
        Self::timed(name, s.times(), s.values(), s.stderr())
    }

    pub fn with_columns<const K: usize>(name: impl Into<String>, columns: [&str; K], data: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(data.len(), K);
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), data }
    }

    pub fn rows(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    /// CSV text: a `# config_hash=` comment line, the header, then each value
    /// with 17 significant digits so that parsing restores it exactly.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = format!("# config_hash={config_hash}\n{}\n", self.columns.join(","));
        for r in 0..self.rows() {
            let row: Vec<String> = self.data.iter().map(|c| format!("{:.16e}", c[r])).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Log-log plot of the second column against the first, skipping
    /// nonpositive points. `None` when fewer than two points remain.
    pub fn to_svg(&self, config_hash: &str) -> Option<String> {
        let pts: Vec<(f64, f64)> = self.data[0]
            .iter()
            .zip(&self.data[1])
            .filter(|(x, y)| **x > 0.0 && **y > 0.0)
            .map(|(x, y)| (x.log10(), y.log10()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let (w, h, pad) = (640.0, 420.0, 50.0);
        let bounds = |f: fn(&(f64, f64)) -> f64| {
            let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x0, x1) = bounds(|p| p.0);
        let (y0, y1) = bounds(|p| p.1);
        let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
        let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
        let mut svg = String::new();
        let _ = writeln!(svg, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">");
        let _ = writeln!(svg, "<!-- config_hash={config_hash} -->");
        let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<rect x=\"{pad}\" y=\"{pad}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
            w - 2.0 * pad,
            h - 2.0 * pad
        );
        let line: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>",
            line.join(" ")
        );
        let label = |v: f64| format!("1e{v:.2}");
        let _ = writeln!(svg, "<text x=\"{pad}\" y=\"{}\" font-size=\"11\">{}</text>", h - pad + 16.0, label(x0));
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            w - pad,
            h - pad + 16.0,
            label(x1)
        );
        let _ = writeln!(svg, "<text x=\"4\" y=\"{}\" font-size=\"11\">{}</text>", h - pad, label(y0));
        let _ = writeln!(svg, "<text x=\"4\" y=\"{}\" font-size=\"11\">{}</text>", pad + 4.0, label(y1));
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"20\" font-size=\"13\" text-anchor=\"middle\">{} ({} vs {}, log-log)</text>",
            w / 2.0,
            self.name,
            self.columns[1],
            self.columns[0]
        );
        svg.push_str("</svg>\n");
        Some(svg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub name: String,
    pub exponent: f64,
    /// 95% confidence half-width.
    pub ci: f64,
    pub window: [f64; 2],
    pub points: usize,
}

impl FitRecord {
    pub fn new(name: impl Into<String>, fit: &RateFit) -> Self {
        Self {
            name: name.into(),
            exponent: fit.exponent,
            ci: fit.ci_halfwidth,
            window: [fit.window.0, fit.window.1],
            points: fit.points,
        }
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub verdicts: Vec<Check>,
    pub fits: Vec<FitRecord>,
    pub metadata: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl Report {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            config_hash: config.hash(),
            config: config.clone(),
            verdicts: Vec::new(),
            fits: Vec::new(),
            metadata: BTreeMap::new(),
            series: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|c| c.pass)
    }

    pub fn check(&mut self, check: Check) {
        self.verdicts.push(check);
    }

    pub fn meta(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("metadata is serializable");
        self.metadata.insert(key.to_string(), v);
    }

    pub fn verdict(&self, name: &str) -> Option<&Check> {
        self.verdicts.iter().find(|c| c.name == name)
    }

    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// Writes the requested files into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let emit = &self.config.emit;
        let mut written = Vec::new();
        let mut put = |name: String, text: &str| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, text)?;
            written.push(path);
            Ok(())
        };
        for s in &self.series {
            if emit.contains(&Emit::Csv) {
                put(format!("{}.csv", s.name), &s.to_csv(&self.config_hash))?;
            }
            if emit.contains(&Emit::Svg) {
                if let Some(svg) = s.to_svg(&self.config_hash) {
                    put(format!("{}.svg", s.name), &svg)?;
                }
            }
        }
        if emit.contains(&Emit::Json) {
            put("verdicts.json".into(), &self.to_json())?;
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_exactly() {
        let t = [0.0, 0.1, 1.0 / 3.0];
        let v = [std::f64::consts::PI, 1e-300, 123_456_789.123_456_78];
        let s = Series::timed("x", &t, &v, &[0.0; 3]);
        let csv = s.to_csv("abc");
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# config_hash=abc"));
        assert_eq!(lines.next(), Some("t,mean,stderr"));
        for (k, line) in lines.enumerate() {
            let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cols, vec![t[k], v[k], 0.0]);
        }
    }

    #[test]
    fn svg_skips_nonpositive_points() {
        let s = Series::timed("d", &[0.0, 1.0, 2.0, 4.0], &[1.0, 0.5, 0.25, 0.0], &[0.0; 4]);
        let svg = s.to_svg("h").unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("config_hash=h"));
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 2);
        assert!(Series::timed("z", &[0.0, 1.0], &[0.0, 0.0], &[0.0; 2]).to_svg("h").is_none());
    }
}
