//! Subcommand drivers: Monte-Carlo loops and ensemble reductions.

use rayon::prelude::*;
use sic_core::canceller::AlgorithmId;
use sic_core::decoder::DecodeMode;
use sic_core::metrics::{complexity_report, rate, ratio_db};
use sic_core::ortho::OrthoTransform;

use crate::error::{HarnessError, Result};
use crate::output::{RunOutput, Series};
use crate::scenario::{Coherence, Scenario};
use crate::sim::{
    canceller_setup, measure_ops, pilot_transform, run_algorithm, Environment, RunRecord, Scaling,
    UnitWorld,
};

/// Records indexed `[realization][sinr point][algorithm]`.
type Records = Vec<Vec<Vec<RunRecord>>>;

fn pool(s: &Scenario) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| HarnessError::Config(format!("thread pool: {e}")))
}

fn ortho_for(s: &Scenario) -> Result<Option<OrthoTransform<f64>>> {
    if s.orthogonalize {
        Ok(Some(pilot_transform(s)?))
    } else {
        Ok(None)
    }
}

/// All realizations of one environment and decode mode. Realizations run in
/// parallel; the collected order is the realization index.
fn simulate(
    s: &Scenario,
    env: &Environment,
    mode: DecodeMode,
    ortho: Option<&OrthoTransform<f64>>,
) -> Result<Records> {
    let setups = s
        .sinr_db
        .iter()
        .map(|&sinr| {
            let scaling = Scaling::new(s, sinr);
            Ok((scaling, canceller_setup(s, env, &scaling, ortho, mode)?))
        })
        .collect::<Result<Vec<_>>>()?;
    pool(s)?.install(|| {
        (0..s.realizations as u64)
            .into_par_iter()
            .map(|r| {
                let world = UnitWorld::generate(s, env, r, ortho)?;
                setups
                    .iter()
                    .map(|(scaling, setup)| {
                        s.algorithms
                            .iter()
                            .map(|&id| run_algorithm(&world, scaling, setup, id, mode, ortho))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    })
}

/// Ensemble sums over realizations of one SINR point and algorithm.
struct Ensemble<'a> {
    runs: Vec<&'a RunRecord>,
}

impl<'a> Ensemble<'a> {
    fn new(records: &'a Records, point: usize, algo: usize) -> Self {
        Self {
            runs: records.iter().map(|r| &r[point][algo]).collect(),
        }
    }

    fn frames(&self) -> usize {
        self.runs[0].frames.len()
    }

    fn sum<F: Fn(&crate::sim::FrameStats) -> f64>(&self, frames: std::ops::Range<usize>, f: F) -> f64 {
        self.runs
            .iter()
            .map(|r| r.frames[frames.clone()].iter().map(&f).sum::<f64>())
            .sum()
    }

    fn srinr(&self, frames: std::ops::Range<usize>) -> (f64, bool) {
        let d = ratio_db(self.sum(frames.clone(), |f| f.signal), self.sum(frames, |f| f.residual));
        (d.value, d.clipped)
    }

    fn sysdist_w(&self, frames: std::ops::Range<usize>) -> (f64, bool) {
        let d = ratio_db(self.sum(frames.clone(), |f| f.w_err), self.sum(frames, |f| f.w_norm));
        (d.value, d.clipped)
    }

    fn sysdist_a(&self, i: usize, frames: std::ops::Range<usize>) -> (f64, bool) {
        let d = ratio_db(
            self.sum(frames.clone(), |f| f.a_err[i]),
            self.sum(frames, |f| f.a_norm[i]),
        );
        (d.value, d.clipped)
    }

    /// Rate of each realization from its tail residual, averaged.
    fn rate(&self, p_d: f64, tail: usize) -> Result<(f64, bool)> {
        let mut total = 0.0;
        let mut clipped = false;
        for r in &self.runs {
            let (v, c) = rate(p_d, r.h_energy, r.tail_residual_power(tail))?;
            total += v;
            clipped |= c;
        }
        Ok((total / self.runs.len() as f64, clipped))
    }

    fn fallbacks(&self) -> u64 {
        self.runs.iter().map(|r| r.ops.fallbacks).sum()
    }
}

fn point_tag(s: &Scenario, sinr: f64) -> String {
    if s.sinr_db.len() == 1 {
        s.tag.clone()
    } else {
        format!("{}-sinr{}", s.tag, sinr)
    }
}

fn environment(s: &Scenario) -> Result<Environment> {
    Environment::new(s.coherence_w, s.coherence_a, s.basis.n())
}

fn common_meta(s: &Scenario, out: &mut RunOutput) {
    out.meta.push(("realizations".into(), s.realizations.to_string()));
    out.meta.push(("frames".into(), s.frames.to_string()));
    out.meta.push(("tail_frames".into(), s.tail_frames().to_string()));
    out.meta.push(("orthogonalize".into(), s.orthogonalize.to_string()));
}

/// Ensemble-averaged per-frame metrics.
pub fn run_convergence(s: &Scenario) -> Result<RunOutput> {
    let env = environment(s)?;
    let ortho = ortho_for(s)?;
    let records = simulate(s, &env, s.decode, ortho.as_ref())?;
    let mut out = RunOutput::default();
    common_meta(s, &mut out);
    for (p, &sinr) in s.sinr_db.iter().enumerate() {
        let tag = point_tag(s, sinr);
        for (k, id) in s.algorithms.iter().enumerate() {
            let algo = id.as_str();
            let ens = Ensemble::new(&records, p, k);
            let mut srinr = Series::new("srinr", algo, &tag);
            let mut dw = Series::new("sysdist-w", algo, &tag);
            let n_a = ens.runs[0].frames[0].a_err.len();
            let mut da: Vec<Series> = (1..=n_a)
                .map(|i| Series::new(&format!("sysdist-a{i}"), algo, &tag))
                .collect();
            for f in 0..ens.frames() {
                let kappa = (f + 1) as f64;
                let (v, c) = ens.srinr(f..f + 1);
                srinr.push(kappa, v, c);
                let (v, c) = ens.sysdist_w(f..f + 1);
                dw.push(kappa, v, c);
                for (i, series) in da.iter_mut().enumerate() {
                    let (v, c) = ens.sysdist_a(i, f..f + 1);
                    series.push(kappa, v, c);
                }
            }
            out.meta.push((format!("fallbacks_{algo}_{tag}"), ens.fallbacks().to_string()));
            let mut all = vec![srinr, dw];
            all.extend(da);
            for series in all {
                let smooth = series.smoothed(&format!("{}-smoothed", series.metric), 5);
                out.series.push(series);
                out.series.push(smooth);
            }
        }
    }
    Ok(out)
}

/// Converged-tail metrics per SINR for one environment and decode mode.
fn sweep_series(
    s: &Scenario,
    env: &Environment,
    mode: DecodeMode,
    ortho: Option<&OrthoTransform<f64>>,
    tag: &str,
    out: &mut RunOutput,
) -> Result<Records> {
    let records = simulate(s, env, mode, ortho)?;
    let frames = s.frames;
    let tail = s.tail_frames();
    for (k, id) in s.algorithms.iter().enumerate() {
        let algo = id.as_str();
        let mut srinr = Series::new("srinr", algo, tag);
        let mut dw = Series::new("sysdist-w", algo, tag);
        let mut rt = Series::new("rate", algo, tag);
        let mut fallbacks = 0;
        for (p, &sinr) in s.sinr_db.iter().enumerate() {
            let ens = Ensemble::new(&records, p, k);
            let (v, c) = ens.srinr(frames - tail..frames);
            srinr.push(sinr, v, c);
            let (v, c) = ens.sysdist_w(frames - tail..frames);
            dw.push(sinr, v, c);
            let (v, c) = ens.rate(s.soi_power, tail)?;
            rt.push(sinr, v, c);
            fallbacks += ens.fallbacks();
        }
        out.meta.push((format!("fallbacks_{algo}_{tag}"), fallbacks.to_string()));
        out.series.extend([srinr, dw, rt]);
    }
    Ok(records)
}

/// Capacity with the receiver noise as the only impairment.
fn capacity_series(s: &Scenario, records: &Records, tag: &str) -> Result<Series> {
    let mut cap = Series::new("capacity", "reference", tag);
    let noise = s.noise_power();
    let caps = records
        .iter()
        .map(|r| rate(s.soi_power, r[0][0].h_energy, noise))
        .collect::<sic_core::Result<Vec<_>>>()?;
    let mean = caps.iter().map(|c| c.0).sum::<f64>() / caps.len() as f64;
    let clipped = caps.iter().any(|c| c.1);
    for &sinr in &s.sinr_db {
        cap.push(sinr, mean, clipped);
    }
    Ok(cap)
}

pub fn run_sweep(s: &Scenario) -> Result<RunOutput> {
    let env = environment(s)?;
    let ortho = ortho_for(s)?;
    let mut out = RunOutput::default();
    common_meta(s, &mut out);
    let records = sweep_series(s, &env, s.decode, ortho.as_ref(), &s.tag, &mut out)?;

    let snr = ratio_db(s.soi_power, s.noise_power());
    let mut ceiling = Series::new("snr-ceiling", "reference", &s.tag);
    let mut min_srinr = Series::new("min-srinr", "reference", &s.tag);
    let mut tin = Series::new("tin", "reference", &s.tag);
    for &sinr in &s.sinr_db {
        ceiling.push(sinr, snr.value, snr.clipped);
        // Cancelling everything, SoI included, leaves residual = SoI.
        min_srinr.push(sinr, 0.0, false);
        tin.push(sinr, sinr, false);
    }
    out.series.extend([ceiling, min_srinr, tin, capacity_series(s, &records, &s.tag)?]);
    Ok(out)
}

/// Rate and SRINR for {static, time-variant} x {no decoding, perfect decoding}.
pub fn run_decoding(s: &Scenario) -> Result<RunOutput> {
    let ortho = ortho_for(s)?;
    let mut out = RunOutput::default();
    common_meta(s, &mut out);
    let n = s.basis.n();
    let envs = [
        ("static", Environment::new(Coherence::Static, Coherence::Static, n)?),
        ("tv", Environment::new(s.tv_coherence_w, s.tv_coherence_a, n)?),
    ];
    let mut cap = None;
    for (env_name, env) in &envs {
        for mode in [DecodeMode::None, DecodeMode::Perfect] {
            let tag = format!("{}-{}-{}", s.tag, env_name, mode);
            let records = sweep_series(s, env, mode, ortho.as_ref(), &tag, &mut out)?;
            if cap.is_none() {
                cap = Some(capacity_series(s, &records, &s.tag)?);
            }
        }
    }
    out.series.extend(cap);
    Ok(out)
}

/// Per-sample operation counts over the `L`, `R` and `N` grids.
pub fn run_complexity(s: &Scenario) -> Result<RunOutput> {
    let mut out = RunOutput::default();
    out.meta.push(("complexity_frames".into(), s.complexity_frames.to_string()));
    let n0 = s.basis.n();
    let grids: [(&str, Vec<(f64, usize, usize, usize)>); 3] = [
        (
            "vs-l",
            s.complexity_l
                .iter()
                .map(|&l| (l as f64, l + s.complexity_base_r, s.complexity_base_r, n0))
                .collect(),
        ),
        (
            "vs-r",
            s.complexity_r
                .iter()
                .map(|&r| (r as f64, r + s.complexity_base_l, r, n0))
                .collect(),
        ),
        (
            "vs-n",
            s.complexity_n
                .iter()
                .map(|&n| (n as f64, s.complexity_base_l + s.complexity_base_r, s.complexity_base_r, n))
                .collect(),
        ),
    ];
    let jobs: Vec<(usize, AlgorithmId, usize)> = s
        .algorithms
        .iter()
        .enumerate()
        .flat_map(|(a, &id)| (0..grids.len()).map(move |g| (a, id, g)))
        .collect();
    let results = pool(s)?.install(|| {
        jobs.par_iter()
            .map(|&(_, id, g)| {
                grids[g]
                    .1
                    .iter()
                    .map(|&(x, m, r, n)| {
                        let (ops, samples) = measure_ops(id, m, r, n, s.complexity_frames, s.seed)?;
                        Ok((x, complexity_report(&ops, samples)?, ops.arithmetic() as f64 / samples as f64))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for (&(_, id, g), pts) in jobs.iter().zip(&results) {
        let tag = format!("{}-{}", s.tag, grids[g].0);
        let mut total = Series::new("ops", id.as_str(), &tag);
        let mut arith = Series::new("ops-arith", id.as_str(), &tag);
        for &(x, t, a) in pts {
            total.push(x, t, false);
            arith.push(x, a, false);
        }
        out.series.extend([total, arith]);
    }
    Ok(out)
}
