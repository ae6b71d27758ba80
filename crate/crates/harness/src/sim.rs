//! One Monte-Carlo realization: world generation and canceller runs.
//!
//! Every random stream of a realization is drawn at unit power and scaled
//! afterwards, so all SINR points and algorithms see the same draws.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sic_core::basis::{BasisFrame, BasisSet};
use sic_core::canceller::{build, AlgorithmId, CancellerSetup, FrameInput};
use sic_core::channel::{
    cascade_si, coherence_to_transition, fir_filter, gen_source, CascadeChannelState, MarkovParams,
    WirelessChannel,
};
use sic_core::decoder::DecodeMode;
use sic_core::dft::FrameConfig;
use sic_core::kalman::ObservationNoiseModel;
use sic_core::linalg::CMatrix;
use sic_core::metrics::sysdist_terms;
use sic_core::ops::OpCounter;
use sic_core::ortho::{compute_transform, estimate_basis_autocorr, OrthoTransform};

use crate::error::Result;
use crate::scenario::{Coherence, Scenario};

pub type C = Complex<f64>;

/// Transmit signal power; the basis moments are evaluated at this power.
pub const TX_POWER: f64 = 1.0;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one random stream of one realization.
pub fn derive_seed(master: u64, realization: u64, stream: Stream) -> u64 {
    splitmix(splitmix(master ^ splitmix(realization)) ^ stream as u64)
}

#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    Input = 1,
    Soi = 2,
    Noise = 3,
    SiChannel = 4,
    SiDrift = 5,
    Wireless = 6,
    Pilot = 7,
    Complexity = 8,
}

fn rng_for(master: u64, realization: u64, stream: Stream) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, realization, stream))
}

/// Markov transition factors of one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub a_w: f64,
    pub a_a: Vec<f64>,
}

impl Environment {
    pub fn new(coh_w: Coherence, coh_a: Coherence, n: usize) -> Result<Self> {
        let a_w = coherence_to_transition(coh_w.frames())?;
        let a = coherence_to_transition(coh_a.frames())?;
        let mut a_a = vec![a; n];
        a_a[0] = 1.0;
        Ok(Self { a_w, a_a })
    }

    pub fn is_static(&self) -> bool {
        self.a_w == 1.0 && self.a_a.iter().all(|&a| a == 1.0)
    }
}

/// Coefficient second moments: one for the linear path, the configured
/// power for the rest.
pub fn coefficient_powers(s: &Scenario) -> Vec<f64> {
    let p = 10f64.powf(s.coeff_power_db / 10.0);
    (0..s.basis.n()).map(|i| if i == 0 { 1.0 } else { p }).collect()
}

/// Expected SI power per unit of linear channel energy.
pub fn si_gain(basis: &BasisSet, ra: &[f64]) -> f64 {
    ra.iter()
        .enumerate()
        .map(|(i, r)| r * basis.gaussian_power(i, TX_POWER))
        .sum()
}

/// SI power at the receiver for an input SINR in dB.
pub fn si_power(s: &Scenario, sinr_db: f64) -> f64 {
    s.soi_power / 10f64.powf(sinr_db / 10.0)
}

/// Whitening transform estimated from pilot transmit frames.
pub fn pilot_transform(s: &Scenario) -> Result<OrthoTransform<f64>> {
    let m = s.frame_len;
    let mut rng = rng_for(s.seed, u64::MAX, Stream::Pilot);
    let x: Vec<C> = gen_source(TX_POWER, m * s.pilot_frames, &mut rng)?;
    let frames: Vec<CMatrix<f64>> = x
        .chunks(m)
        .map(|c| CMatrix::from_columns(&s.basis.expand(c).columns))
        .collect();
    Ok(compute_transform(&estimate_basis_autocorr(&frames)?)?)
}

/// Realization data at unit scale: unit-energy linear channel, unit-power
/// SoI at the receiver and unit-power noise.
#[derive(Debug, Clone)]
pub struct UnitWorld {
    pub cfg: FrameConfig,
    /// Basis frames seen by the cancellers (transformed when orthogonalizing).
    pub basis: Vec<BasisFrame<f64>>,
    /// SI on the valid samples per frame for the unit channel.
    pub x_si: Vec<Vec<C>>,
    pub dh: Vec<Vec<C>>,
    pub noise: Vec<Vec<C>>,
    /// True unit-energy taps and coefficients per frame.
    pub w: Vec<Vec<C>>,
    pub a: Vec<Vec<C>>,
    pub h_energy: f64,
}

impl UnitWorld {
    pub fn generate(
        s: &Scenario,
        env: &Environment,
        realization: u64,
        ortho: Option<&OrthoTransform<f64>>,
    ) -> Result<Self> {
        let cfg = FrameConfig::new(s.frame_len, s.frame_shift)?;
        let (m, r, l) = (cfg.m(), cfg.r(), cfg.l());
        let frames = s.frames;
        let len = l + frames * r;
        let seed = s.seed;

        let x: Vec<C> = gen_source(TX_POWER, len, &mut rng_for(seed, realization, Stream::Input))?;
        let d: Vec<C> = gen_source(1.0, len, &mut rng_for(seed, realization, Stream::Soi))?;
        let n: Vec<C> = gen_source(1.0, len, &mut rng_for(seed, realization, Stream::Noise))?;
        let h = WirelessChannel::<f64>::draw(l, &mut rng_for(seed, realization, Stream::Wireless));
        let dh_all = fir_filter(&h.h, &d);

        let ra = coefficient_powers(s);
        let params = MarkovParams::new(m, env.a_w, env.a_a.clone(), m as f64, ra)?;
        let mut state =
            CascadeChannelState::<f64>::draw(&params, l, &mut rng_for(seed, realization, Stream::SiChannel));
        let mut drift = rng_for(seed, realization, Stream::SiDrift);

        let mut world = Self {
            cfg,
            basis: Vec::with_capacity(frames),
            x_si: Vec::with_capacity(frames),
            dh: Vec::with_capacity(frames),
            noise: Vec::with_capacity(frames),
            w: Vec::with_capacity(frames),
            a: Vec::with_capacity(frames),
            h_energy: h.energy(),
        };
        for k in 0..frames {
            let start = k * r;
            let b = s.basis.expand(&x[start..start + m]);
            world.x_si.push(cascade_si(&b, &state, cfg)?);
            world.dh.push(dh_all[start + l..start + m].to_vec());
            world.noise.push(n[start + l..start + m].to_vec());
            world.w.push(state.w.clone());
            world.a.push(state.a.clone());
            world.basis.push(match ortho {
                Some(t) => t.apply(&b)?,
                None => b,
            });
            if !env.is_static() {
                state.evolve(&params, &mut drift);
            }
        }
        Ok(world)
    }
}

/// Physical scaling of a unit world for one SINR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    /// Amplitude applied to the unit linear channel.
    pub w_gain: f64,
    pub soi_amp: f64,
    pub noise_amp: f64,
    pub soi_power: f64,
    pub noise_power: f64,
    /// Expected linear channel energy `E ||w||^2`.
    pub w_energy: f64,
}

impl Scaling {
    pub fn new(s: &Scenario, sinr_db: f64) -> Self {
        let w_energy = si_power(s, sinr_db) / si_gain(&s.basis, &coefficient_powers(s));
        let noise_power = s.noise_power();
        Self {
            w_gain: w_energy.sqrt(),
            soi_amp: s.soi_power.sqrt(),
            noise_amp: noise_power.sqrt(),
            soi_power: s.soi_power,
            noise_power,
            w_energy,
        }
    }
}

/// Canceller construction parameters for one scenario point, expressed in
/// the basis the canceller sees.
pub fn canceller_setup(
    s: &Scenario,
    env: &Environment,
    scaling: &Scaling,
    ortho: Option<&OrthoTransform<f64>>,
    mode: DecodeMode,
) -> Result<CancellerSetup> {
    let cfg = FrameConfig::new(s.frame_len, s.frame_shift)?;
    let ra = coefficient_powers(s);
    let (tr, ra) = match ortho {
        Some(t) => {
            let mapped = t.map_second_moments(&ra)?;
            let a0 = mapped[0];
            (a0 * scaling.w_energy, mapped.iter().map(|v| v / a0).collect())
        }
        None => (scaling.w_energy, ra),
    };
    Ok(CancellerSetup {
        cfg,
        params: MarkovParams::new(cfg.m(), env.a_w, env.a_a.clone(), cfg.m() as f64 * tr, ra)?,
        noise: ObservationNoiseModel::for_mode(cfg, scaling.soi_power, scaling.noise_power, mode),
        nlms_step: s.nlms_step,
        rls_lambda: s.rls_lambda,
        rls_delta: s.rls_delta,
    })
}

/// Per-frame quantities summed over realizations later.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameStats {
    /// `sum |d^h|^2` over the valid samples.
    pub signal: f64,
    /// `sum |e - d^h|^2` over the valid samples.
    pub residual: f64,
    pub w_err: f64,
    pub w_norm: f64,
    /// Entries for coefficients `1..N`.
    pub a_err: Vec<f64>,
    pub a_norm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub frames: Vec<FrameStats>,
    pub h_energy: f64,
    /// Valid samples per frame.
    pub shift: usize,
    pub ops: OpCounter,
}

impl RunRecord {
    /// Mean per-sample power of `e - d^h` over the last `tail` frames.
    pub fn tail_residual_power(&self, tail: usize) -> f64 {
        let start = self.frames.len() - tail.min(self.frames.len());
        let frames = &self.frames[start..];
        let samples = (frames.len() * self.shift) as f64;
        frames.iter().map(|f| f.residual).sum::<f64>() / samples
    }
}

/// Run one algorithm over a scaled world.
pub fn run_algorithm(
    world: &UnitWorld,
    scaling: &Scaling,
    setup: &CancellerSetup,
    id: AlgorithmId,
    mode: DecodeMode,
    ortho: Option<&OrthoTransform<f64>>,
) -> Result<RunRecord> {
    let mut canceller = build::<f64>(id, setup)?;
    let r = world.cfg.r();
    let mut frames = Vec::with_capacity(world.basis.len());
    let mut y = vec![C::default(); r];
    let mut dh = vec![C::default(); r];
    for k in 0..world.basis.len() {
        for j in 0..r {
            dh[j] = world.dh[k][j] * scaling.soi_amp;
            y[j] = world.x_si[k][j] * scaling.w_gain + dh[j] + world.noise[k][j] * scaling.noise_amp;
        }
        let input = FrameInput {
            basis: &world.basis[k],
            y: &y,
            dh: Some(&dh),
        };
        let out = canceller.process(&input, mode)?;
        let mut st = FrameStats::default();
        for (e, d) in out.e.iter().zip(&dh) {
            st.signal += d.norm_sqr();
            st.residual += (e - d).norm_sqr();
        }

        let w_true: Vec<C> = world.w[k].iter().map(|v| v * scaling.w_gain).collect();
        let (w_true, a_true) = match ortho {
            Some(t) => t.map_true_parameters(&w_true, &world.a[k])?,
            None => (w_true, world.a[k].clone()),
        };
        let est = canceller.estimates()?;
        let (we, wn) = sysdist_terms(&w_true, &est.w)?;
        st.w_err = we;
        st.w_norm = wn;
        for i in 1..a_true.len() {
            st.a_err.push((a_true[i] - est.a[i]).norm_sqr());
            st.a_norm.push(a_true[i].norm_sqr());
        }
        frames.push(st);
    }
    Ok(RunRecord {
        frames,
        h_energy: world.h_energy,
        shift: r,
        ops: canceller.ops(),
    })
}

/// Per-sample cost of `frames` frames of random data.
pub fn measure_ops(
    id: AlgorithmId,
    m: usize,
    r: usize,
    n: usize,
    frames: usize,
    seed: u64,
) -> Result<(OpCounter, u64)> {
    let s = Scenario {
        frame_len: m,
        frame_shift: r,
        basis: BasisSet::with_order(n)?,
        sinr_db: vec![0.0],
        frames,
        seed,
        ..Scenario::default()
    };
    let env = Environment::new(Coherence::Static, Coherence::Static, n)?;
    let scaling = Scaling::new(&s, 0.0);
    let setup = canceller_setup(&s, &env, &scaling, None, DecodeMode::None)?;
    let world = UnitWorld::generate(&s, &env, Stream::Complexity as u64, None)?;
    let rec = run_algorithm(&world, &scaling, &setup, id, DecodeMode::None, None)?;
    Ok((rec.ops, (frames * r) as u64))
}
