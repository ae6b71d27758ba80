//! Scenario description and its flat `key = value` file format.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use sic_core::basis::BasisSet;
use sic_core::canceller::AlgorithmId;
use sic_core::decoder::DecodeMode;

use crate::error::{HarnessError, Result};

/// Coherence time in frames; `Static` means the transition factor is one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coherence {
    Frames(f64),
    Static,
}

impl Coherence {
    pub fn frames(self) -> f64 {
        match self {
            Coherence::Frames(f) => f,
            Coherence::Static => f64::INFINITY,
        }
    }
}

impl fmt::Display for Coherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coherence::Frames(v) => write!(f, "{v}"),
            Coherence::Static => f.write_str("inf"),
        }
    }
}

impl FromStr for Coherence {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "inf" | "static" => Ok(Coherence::Static),
            _ => {
                let v: f64 = s.parse().map_err(|_| format!("invalid coherence `{s}`"))?;
                if v.is_infinite() && v > 0.0 {
                    Ok(Coherence::Static)
                } else if v > 0.0 {
                    Ok(Coherence::Frames(v))
                } else {
                    Err(format!("coherence must be positive, got {v}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Goes into every output file name; letters, digits and `-` only.
    pub tag: String,
    pub frame_len: usize,
    pub frame_shift: usize,
    pub basis: BasisSet,
    pub soi_power: f64,
    /// Input SINR points in dB.
    pub sinr_db: Vec<f64>,
    /// Receiver noise power in dB relative to the SoI power.
    pub noise_db: f64,
    pub coherence_w: Coherence,
    pub coherence_a: Coherence,
    /// Coherences of the time-variant half of the decoding study.
    pub tv_coherence_w: Coherence,
    pub tv_coherence_a: Coherence,
    /// Power of the nonlinear coefficients `a_1..` in dB.
    pub coeff_power_db: f64,
    pub orthogonalize: bool,
    pub decode: DecodeMode,
    pub algorithms: Vec<AlgorithmId>,
    pub nlms_step: f64,
    /// `None` derives the forgetting factor from the channel coherence.
    pub rls_lambda: Option<f64>,
    pub rls_delta: f64,
    pub frames: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    /// Frames used to estimate the orthogonalization transform.
    pub pilot_frames: usize,
    /// Share of final frames averaged for converged metrics.
    pub tail_fraction: f64,
    pub complexity_l: Vec<usize>,
    pub complexity_r: Vec<usize>,
    pub complexity_n: Vec<usize>,
    /// Fixed `R` for the `L` and `N` grids, fixed `L` for the `R` grid.
    pub complexity_base_r: usize,
    pub complexity_base_l: usize,
    pub complexity_frames: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            tag: "convergence".into(),
            frame_len: 64,
            frame_shift: 56,
            basis: BasisSet::default(),
            soi_power: 1.0,
            sinr_db: vec![-15.0],
            noise_db: -35.0,
            coherence_w: Coherence::Static,
            coherence_a: Coherence::Static,
            tv_coherence_w: Coherence::Frames(1e3),
            tv_coherence_a: Coherence::Frames(1e4),
            coeff_power_db: -10.0,
            orthogonalize: false,
            decode: DecodeMode::None,
            algorithms: vec![
                AlgorithmId::KalmanCascadeExact,
                AlgorithmId::KalmanCascadeApprox,
                AlgorithmId::KalmanParallelSub,
                AlgorithmId::Nlms,
                AlgorithmId::Rls,
            ],
            nlms_step: 1e-2,
            rls_lambda: None,
            rls_delta: 1e-2,
            frames: 400,
            realizations: 64,
            seed: 1,
            workers: 0,
            pilot_frames: 10_000,
            tail_fraction: 0.25,
            complexity_l: vec![8, 16, 32],
            complexity_r: vec![8, 24, 56, 120, 248],
            complexity_n: vec![2, 3, 4, 6],
            complexity_base_r: 56,
            complexity_base_l: 8,
            complexity_frames: 4,
        }
    }
}

const KEYS: &[&str] = &[
    "tag",
    "frame_len",
    "frame_shift",
    "basis",
    "soi_power",
    "sinr_db",
    "noise_db",
    "coherence_w",
    "coherence_a",
    "tv_coherence_w",
    "tv_coherence_a",
    "coeff_power_db",
    "orthogonalize",
    "decode",
    "algorithms",
    "nlms_step",
    "rls_lambda",
    "rls_delta",
    "frames",
    "realizations",
    "seed",
    "workers",
    "pilot_frames",
    "tail_fraction",
    "complexity_l",
    "complexity_r",
    "complexity_n",
    "complexity_base_r",
    "complexity_base_l",
    "complexity_frames",
];

fn parse_num<T: FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("invalid value `{v}` for `{key}`"))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> std::result::Result<Vec<T>, String> {
    let out: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<std::result::Result<_, _>>()?;
    if out.is_empty() {
        return Err(format!("`{key}` needs at least one value"));
    }
    Ok(out)
}

/// Comma list, or `start:step:stop` with the stop included when hit.
fn parse_grid(key: &str, v: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    if parts.len() == 1 {
        return parse_list(key, v);
    }
    if parts.len() != 3 {
        return Err(format!("`{key}` range must be start:step:stop"));
    }
    let start: f64 = parse_num(key, parts[0])?;
    let step: f64 = parse_num(key, parts[1])?;
    let stop: f64 = parse_num(key, parts[2])?;
    if !(step > 0.0) || stop < start {
        return Err(format!("`{key}` range must increase"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

fn parse_bool(key: &str, v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(format!("invalid boolean `{v}` for `{key}`")),
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

impl Scenario {
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        match key {
            "tag" => {
                if v.is_empty() || !v.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                    return Err(format!("tag `{v}` may only contain letters, digits and `-`"));
                }
                self.tag = v.to_string();
            }
            "frame_len" => self.frame_len = parse_num(key, v)?,
            "frame_shift" => self.frame_shift = parse_num(key, v)?,
            "basis" => self.basis = v.parse().map_err(|e| format!("{e}"))?,
            "soi_power" => self.soi_power = parse_num(key, v)?,
            "sinr_db" => self.sinr_db = parse_grid(key, v)?,
            "noise_db" => self.noise_db = parse_num(key, v)?,
            "coherence_w" => self.coherence_w = v.parse()?,
            "coherence_a" => self.coherence_a = v.parse()?,
            "tv_coherence_w" => self.tv_coherence_w = v.parse()?,
            "tv_coherence_a" => self.tv_coherence_a = v.parse()?,
            "coeff_power_db" => self.coeff_power_db = parse_num(key, v)?,
            "orthogonalize" => self.orthogonalize = parse_bool(key, v)?,
            "decode" => self.decode = v.parse().map_err(|e| format!("{e}"))?,
            "algorithms" => {
                self.algorithms = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<AlgorithmId>().map_err(|e| format!("{e}")))
                    .collect::<std::result::Result<_, _>>()?;
            }
            "nlms_step" => self.nlms_step = parse_num(key, v)?,
            "rls_lambda" => {
                self.rls_lambda = if v == "auto" { None } else { Some(parse_num(key, v)?) }
            }
            "rls_delta" => self.rls_delta = parse_num(key, v)?,
            "frames" => self.frames = parse_num(key, v)?,
            "realizations" => self.realizations = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "workers" => self.workers = parse_num(key, v)?,
            "pilot_frames" => self.pilot_frames = parse_num(key, v)?,
            "tail_fraction" => self.tail_fraction = parse_num(key, v)?,
            "complexity_l" => self.complexity_l = parse_list(key, v)?,
            "complexity_r" => self.complexity_r = parse_list(key, v)?,
            "complexity_n" => self.complexity_n = parse_list(key, v)?,
            "complexity_base_r" => self.complexity_base_r = parse_num(key, v)?,
            "complexity_base_l" => self.complexity_base_l = parse_num(key, v)?,
            "complexity_frames" => self.complexity_frames = parse_num(key, v)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Parse on top of the defaults. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| HarnessError::Scenario {
                line: line_no,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) && KEYS.contains(&key) {
                return Err(HarnessError::Scenario {
                    line: line_no,
                    msg: format!("duplicate key `{key}`"),
                });
            }
            s.set(key, value.trim())
                .map_err(|msg| HarnessError::Scenario { line: line_no, msg })?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Scenario { line: 0, msg });
        if self.frame_shift == 0 || self.frame_shift >= self.frame_len {
            return bad(format!(
                "need 0 < frame_shift < frame_len, got R={} M={}",
                self.frame_shift, self.frame_len
            ));
        }
        if !(self.soi_power > 0.0) {
            return bad("soi_power must be positive".into());
        }
        if self.sinr_db.is_empty() || self.sinr_db.windows(2).any(|w| w[1] <= w[0]) {
            return bad("sinr_db must be a nonempty increasing list".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.frames == 0 || self.realizations == 0 {
            return bad("frames and realizations must be positive".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return bad("tail_fraction must be in (0, 1]".into());
        }
        if !(self.nlms_step > 0.0) || !(self.rls_delta > 0.0) {
            return bad("nlms_step and rls_delta must be positive".into());
        }
        if let Some(l) = self.rls_lambda {
            if !(l > 0.0 && l <= 1.0) {
                return bad("rls_lambda must be in (0, 1]".into());
            }
        }
        if self.orthogonalize && self.pilot_frames == 0 {
            return bad("orthogonalization needs pilot frames".into());
        }
        if self.complexity_frames == 0 {
            return bad("complexity_frames must be positive".into());
        }
        Ok(())
    }

    pub fn l(&self) -> usize {
        self.frame_len - self.frame_shift
    }

    /// Number of final frames entering converged metrics.
    pub fn tail_frames(&self) -> usize {
        ((self.frames as f64 * self.tail_fraction).round() as usize).clamp(1, self.frames)
    }

    pub fn noise_power(&self) -> f64 {
        self.soi_power * 10f64.powf(self.noise_db / 10.0)
    }

    /// SHA-256 over the canonical rendering, seed included.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_string().as_bytes()))
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "convergence" => include_str!("../presets/convergence.scn"),
            "sweep" => include_str!("../presets/sweep.scn"),
            "sweep-ortho" => include_str!("../presets/sweep-ortho.scn"),
            "decoding" => include_str!("../presets/decoding.scn"),
            "complexity" => include_str!("../presets/complexity.scn"),
            _ => return Err(HarnessError::Config(format!("unknown preset `{name}`"))),
        };
        Self::parse(text)
    }
}

/// Canonical rendering: every key, fixed order; parses back to the same value.
impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let algos: Vec<&str> = self.algorithms.iter().map(AlgorithmId::as_str).collect();
        writeln!(f, "tag = {}", self.tag)?;
        writeln!(f, "frame_len = {}", self.frame_len)?;
        writeln!(f, "frame_shift = {}", self.frame_shift)?;
        writeln!(f, "basis = {}", self.basis)?;
        writeln!(f, "soi_power = {}", self.soi_power)?;
        writeln!(f, "sinr_db = {}", join(&self.sinr_db))?;
        writeln!(f, "noise_db = {}", self.noise_db)?;
        writeln!(f, "coherence_w = {}", self.coherence_w)?;
        writeln!(f, "coherence_a = {}", self.coherence_a)?;
        writeln!(f, "tv_coherence_w = {}", self.tv_coherence_w)?;
        writeln!(f, "tv_coherence_a = {}", self.tv_coherence_a)?;
        writeln!(f, "coeff_power_db = {}", self.coeff_power_db)?;
        writeln!(f, "orthogonalize = {}", self.orthogonalize)?;
        writeln!(f, "decode = {}", self.decode)?;
        writeln!(f, "algorithms = {}", algos.join(", "))?;
        writeln!(f, "nlms_step = {}", self.nlms_step)?;
        match self.rls_lambda {
            Some(l) => writeln!(f, "rls_lambda = {l}")?,
            None => writeln!(f, "rls_lambda = auto")?,
        }
        writeln!(f, "rls_delta = {}", self.rls_delta)?;
        writeln!(f, "frames = {}", self.frames)?;
        writeln!(f, "realizations = {}", self.realizations)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "workers = {}", self.workers)?;
        writeln!(f, "pilot_frames = {}", self.pilot_frames)?;
        writeln!(f, "tail_fraction = {}", self.tail_fraction)?;
        writeln!(f, "complexity_l = {}", join(&self.complexity_l))?;
        writeln!(f, "complexity_r = {}", join(&self.complexity_r))?;
        writeln!(f, "complexity_n = {}", join(&self.complexity_n))?;
        writeln!(f, "complexity_base_r = {}", self.complexity_base_r)?;
        writeln!(f, "complexity_base_l = {}", self.complexity_base_l)?;
        writeln!(f, "complexity_frames = {}", self.complexity_frames)
    }
}
