//! TSV series files and the `run.meta` sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};

/// One two-column data series, written as `<metric>_<algo>_<tag>.tsv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub metric: String,
    pub algo: String,
    pub tag: String,
    pub points: Vec<(f64, f64)>,
    /// Some `y` value hit the dB or rate clip.
    pub clipped: bool,
}

impl Series {
    pub fn new(metric: &str, algo: &str, tag: &str) -> Self {
        Self {
            metric: metric.into(),
            algo: algo.into(),
            tag: tag.into(),
            points: Vec::new(),
            clipped: false,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}_{}.tsv", self.metric, self.algo, self.tag)
    }

    pub fn push(&mut self, x: f64, y: f64, clipped: bool) {
        self.points.push((x, y));
        self.clipped |= clipped;
    }

    pub fn y_at(&self, x: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (x, y) in &self.points {
            let _ = writeln!(out, "{}\t{}", fmt_g(*x), fmt_g(*y));
        }
        out
    }

    /// Trailing moving average over `window` points.
    pub fn smoothed(&self, metric: &str, window: usize) -> Self {
        let mut s = Self::new(metric, &self.algo, &self.tag);
        s.clipped = self.clipped;
        for i in 0..self.points.len() {
            let lo = (i + 1).saturating_sub(window);
            let part = &self.points[lo..=i];
            let mean = part.iter().map(|p| p.1).sum::<f64>() / part.len() as f64;
            s.points.push((self.points[i].0, mean));
        }
        s
    }
}

/// `printf("%.6g")`: six significant digits, trailing zeros trimmed,
/// exponent form outside `[1e-4, 1e6)`.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.5e}");
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Result of one subcommand: series plus free-form sidecar entries.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub series: Vec<Series>,
    pub meta: Vec<(String, String)>,
}

impl RunOutput {
    pub fn find(&self, metric: &str, algo: &str, tag: &str) -> Option<&Series> {
        self.series
            .iter()
            .find(|s| s.metric == metric && s.algo == algo && s.tag == tag)
    }

    pub fn meta_text(&self, command: &str, scenario_hash: &str, seed: u64) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command\t{command}");
        let _ = writeln!(out, "scenario_hash\t{scenario_hash}");
        let _ = writeln!(out, "seed\t{seed}");
        for (k, v) in &self.meta {
            let _ = writeln!(out, "{k}\t{v}");
        }
        let clipped: Vec<String> = self
            .series
            .iter()
            .filter(|s| s.clipped)
            .map(Series::file_name)
            .collect();
        let _ = writeln!(out, "clipped_files\t{}", clipped.len());
        for f in clipped {
            let _ = writeln!(out, "clipped\t{f}");
        }
        out
    }

    /// Write every series and the sidecar into `dir`.
    pub fn write(&self, dir: &Path, command: &str, scenario_hash: &str, seed: u64) -> Result<Vec<PathBuf>> {
        let io = |p: &Path, e: std::io::Error| HarnessError::Io(format!("{}: {e}", p.display()));
        fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let mut written = Vec::new();
        for s in &self.series {
            let path = dir.join(s.file_name());
            fs::write(&path, s.to_tsv()).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        let meta = dir.join("run.meta");
        fs::write(&meta, self.meta_text(command, scenario_hash, seed)).map_err(|e| io(&meta, e))?;
        written.push(meta);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-15.0), "-15");
        assert_eq!(fmt_g(6.65821148275179), "6.65821");
        assert_eq!(fmt_g(123456.7), "123457");
        assert_eq!(fmt_g(1234567.0), "1.23457e+06");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(0.00001234), "1.234e-05");
        assert_eq!(fmt_g(-160.0), "-160");
        assert_eq!(fmt_g(999999.9), "1e+06");
        assert_eq!(fmt_g(0.5), "0.5");
    }

    #[test]
    fn moving_average_is_trailing() {
        let mut s = Series::new("srinr", "rls", "t");
        for k in 1..=6 {
            s.push(k as f64, k as f64, false);
        }
        let m = s.smoothed("srinr-smoothed", 5);
        let ys: Vec<f64> = m.points.iter().map(|p| p.1).collect();
        assert_eq!(ys, vec![1.0, 1.5, 2.0, 2.5, 3.0, 4.0]);
    }
}
