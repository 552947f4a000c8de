use std::fmt::Write;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::normalize::{normalize_power, preamble_window};
use super::{ExperimentConfig, Manifest, Method};
use crate::channel::{realize, unit_noise, AntennaConfig, ChannelRealization, PowerDelayProfile};
use crate::cpofdm::{ofdm_ls_estimate, OfdmPreamble};
use crate::estimator::{
    iam_estimate, icm_estimate, mimo_iam_estimate, mimo_pop_estimate, mimo_pseudo_pilot_matrices,
    nmse, pop_estimate, pseudo_pilots, CfrEstimate, SparseSolver,
};
use crate::fbcore::{
    oqam_stagger, BasebandSignal, ComplexGrid, FilterBank, FrameGrid, PrototypeFilter,
};
use crate::interference::{InterferenceKernel, InterferenceTable};
use crate::linalg::CMatrix;
use crate::preamble::{
    generate, ExtendedLayout, Family, IamVariant, PreambleSpec, SparseLayout, StructuredSource,
    SymbolSource,
};
use crate::{Error, Result};

/// Independent random streams drawn per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedPurpose {
    Channel = 0,
    Noise = 1,
    Data = 2,
    Preamble = 3,
}

/// Seed for one purpose of one trial: the first output of ChaCha8 keyed by
/// the master seed on stream `8 * trial + purpose`.
pub fn derive_seed(master: u64, trial: u64, purpose: SeedPurpose) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial * 8 + purpose as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub method: Method,
    pub snr_db: f64,
    pub nmse_mean: f64,
    pub nmse_stderr: f64,
    /// Trials that produced an estimate.
    pub trials: usize,
    /// Subcarriers left out of the NMSE, summed over trials.
    pub excluded: usize,
    /// Trials where the estimator failed outright.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// `(snr_db, nmse_mean)` pairs of one method in grid order.
    pub fn curve(&self, method: Method) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.method == method)
            .map(|p| (p.snr_db, p.nmse_mean))
            .collect()
    }

    pub fn point(&self, method: Method, snr_db: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.method == method && p.snr_db == snr_db)
    }

    /// CSV with columns `method, snr_db, nmse_mean, nmse_stderr, trials,
    /// excluded`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,snr_db,nmse_mean,nmse_stderr,trials,excluded\n");
        for p in &self.points {
            writeln!(
                out,
                "{},{},{:.12e},{:.12e},{},{}",
                p.method, p.snr_db, p.nmse_mean, p.nmse_stderr, p.trials, p.excluded
            )
            .unwrap();
        }
        out
    }

    pub fn manifest(&self) -> Manifest {
        Manifest::new(&self.config)
    }
}

/// SNR at which the low-SNR asymptote (fitted through the first two grid
/// points in dB) meets the floor (the last point). `None` when the curve
/// has fewer than three points or no noise-limited slope.
pub fn floor_onset(curve: &[(f64, f64)]) -> Option<f64> {
    if curve.len() < 3 {
        return None;
    }
    let db = |v: f64| 10.0 * v.log10();
    let (s0, n0) = (curve[0].0, db(curve[0].1));
    let (s1, n1) = (curve[1].0, db(curve[1].1));
    let slope = (n1 - n0) / (s1 - s0);
    if !(slope < 0.0) {
        return None;
    }
    let floor = db(curve[curve.len() - 1].1);
    Some(s0 + (floor - n0) / slope)
}

/// Shared, read-only state of a sweep.
struct Context<'a> {
    cfg: &'a ExperimentConfig,
    bank: FilterBank,
    table: InterferenceTable,
    kernel: InterferenceKernel,
    pdp: PowerDelayProfile,
    sparse: Option<SparseLayout>,
}

/// What a method's receiver needs beyond the analysis output.
enum Receiver {
    Pop(FrameGrid),
    MimoPop(Vec<FrameGrid>),
    Iam(Vec<Complex64>),
    MimoIam {
        instants: Vec<usize>,
        pilots: Vec<CMatrix>,
    },
    Icm {
        frame: FrameGrid,
        q: usize,
    },
    Sparse(SparseSolver),
}

impl Context<'_> {
    fn spec(&self, method: Method, seed: u64) -> Result<PreambleSpec> {
        let cfg = self.cfg;
        let nt = cfg.transmit_antennas;
        let iam = |v: IamVariant| {
            if nt == 1 {
                Family::Iam(v)
            } else {
                Family::MimoIam(v)
            }
        };
        let family = match method {
            Method::Pop if nt == 1 => Family::Pop,
            Method::Pop => Family::MimoPop {
                receive_antennas: cfg.receive_antennas,
                seed,
            },
            Method::IamR => iam(IamVariant::Real),
            Method::IamI => iam(IamVariant::Imaginary(SymbolSource::Seeded(seed))),
            Method::IamC => iam(IamVariant::Complex),
            Method::EIamC => iam(IamVariant::Extended(ExtendedLayout::for_table(&self.table))),
            Method::IcmA => Family::IcmA,
            Method::IcmB => Family::IcmB,
            Method::IcmC => Family::IcmC(StructuredSource::Seeded(seed)),
            Method::IcmD => Family::IcmD,
            Method::Sparse => {
                Family::MimoSparse(self.sparse.clone().expect("sparse layout prepared"))
            }
            Method::CpOfdm => {
                return Err(Error::Unsupported(
                    "CP-OFDM has no filter bank preamble".into(),
                ))
            }
        };
        Ok(PreambleSpec::new(family, cfg.subcarriers).with_antennas(nt))
    }

    fn receiver(
        &self,
        method: Method,
        spec: &PreambleSpec,
        frames: Vec<FrameGrid>,
    ) -> Result<Receiver> {
        let nt = self.cfg.transmit_antennas;
        Ok(match method {
            Method::Pop if nt == 1 => Receiver::Pop(frames.into_iter().next().unwrap()),
            Method::Pop => Receiver::MimoPop(frames),
            m if m.is_iam() && nt == 1 => {
                Receiver::Iam(pseudo_pilots(&self.kernel, &frames[0], 1)?)
            }
            m if m.is_iam() => {
                let instants = spec.pilot_symbols();
                let pilots = mimo_pseudo_pilot_matrices(&self.kernel, &frames, &instants)?;
                Receiver::MimoIam { instants, pilots }
            }
            m if m.is_icm() => Receiver::Icm {
                q: spec.pilot_symbols()[0],
                frame: frames.into_iter().next().unwrap(),
            },
            Method::Sparse => Receiver::Sparse(SparseSolver::new(
                &frames,
                self.sparse.as_ref().unwrap(),
                1,
            )?),
            other => {
                return Err(Error::Unsupported(format!(
                    "no filter bank receiver for {other}"
                )))
            }
        })
    }
}

impl Receiver {
    fn estimate(&self, y: &[ComplexGrid], kernel: &InterferenceKernel) -> Result<CfrEstimate> {
        match self {
            Receiver::Pop(f) => pop_estimate(y, f),
            Receiver::MimoPop(f) => mimo_pop_estimate(y, f),
            Receiver::Iam(c) => iam_estimate(y, 1, c),
            Receiver::MimoIam { instants, pilots } => mimo_iam_estimate(y, instants, pilots),
            Receiver::Icm { frame, q } => icm_estimate(y, frame, *q, kernel),
            Receiver::Sparse(solver) => solver.estimate(y),
        }
    }
}

/// Per-method, per-SNR outcome of one trial.
type TrialOutcome = Vec<Vec<Option<(f64, usize)>>>;

fn qpsk_data(m: usize, symbols: usize, antennas: usize, seed: u64) -> Vec<FrameGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let scale = (antennas as f64).sqrt().recip();
    (0..antennas)
        .map(|_| {
            let qam = ComplexGrid::from_fn(m, symbols / 2, |_, _| {
                Complex64::new(
                    if rng.random() { h } else { -h },
                    if rng.random() { h } else { -h },
                )
            });
            let mut f = oqam_stagger(&qam);
            f.scale(scale);
            f
        })
        .collect()
}

fn add_noise(clean: &[ComplexGrid], noise: &[ComplexGrid], sigma: f64) -> Vec<ComplexGrid> {
    clean
        .iter()
        .zip(noise)
        .map(|(c, w)| {
            let mut y = c.clone();
            y.add_scaled(w, sigma);
            y
        })
        .collect()
}

fn run_filter_bank_method(
    ctx: &Context,
    method: Method,
    trial: u64,
    channel: &ChannelRealization,
    data: &[FrameGrid],
    noise: &[BasebandSignal],
) -> Result<Vec<Option<(f64, usize)>>> {
    let cfg = ctx.cfg;
    let m = cfg.subcarriers;
    let spec = ctx.spec(method, derive_seed(cfg.seed, trial, SeedPurpose::Preamble))?;
    let mut frames = generate(&spec)?;
    let n_pre = spec.symbol_count();
    let filter_len = ctx.bank.filter().len();
    let mut pre_signals = Vec::with_capacity(frames.len());
    let mut data_signals = Vec::with_capacity(frames.len());
    for (f, d) in frames.iter().zip(data) {
        pre_signals.push(ctx.bank.synthesize(f)?);
        data_signals.push(ctx.bank.synthesize(&FrameGrid::new(m, n_pre).concat(d)?)?);
    }
    let window = preamble_window(n_pre, m, filter_len);
    let energy: f64 = frames.iter().map(FrameGrid::energy).sum();
    let a = normalize_power(
        &pre_signals,
        &data_signals,
        window,
        energy,
        cfg.normalization,
    )?;
    let mut tx = data_signals;
    for (s, p) in tx.iter_mut().zip(&pre_signals) {
        s.add_scaled(p, Complex64::new(a, 0.0));
    }
    frames.iter_mut().for_each(|f| f.scale(a));
    let received = channel.convolve(&tx)?;
    let clean = received
        .iter()
        .map(|r| ctx.bank.analyze(r, n_pre))
        .collect::<Result<Vec<_>>>()?;
    let noise = noise
        .iter()
        .map(|w| ctx.bank.analyze(w, n_pre))
        .collect::<Result<Vec<_>>>()?;
    let receiver = ctx.receiver(method, &spec, frames)?;
    cfg.snr_db
        .iter()
        .map(|&snr| {
            let y = add_noise(&clean, &noise, 10f64.powf(-snr / 20.0));
            Ok(match receiver.estimate(&y, &ctx.kernel) {
                Ok(est) => {
                    let out = nmse(channel, &est)?;
                    Some((out.value, out.excluded))
                }
                Err(Error::DegeneratePilot { .. } | Error::Singular { .. } | Error::Config(_)) => {
                    None
                }
                Err(e) => return Err(e),
            })
        })
        .collect()
}

fn run_cp_ofdm(
    ctx: &Context,
    trial: u64,
    channel: &ChannelRealization,
    noise: &[BasebandSignal],
) -> Result<Vec<Option<(f64, usize)>>> {
    let cfg = ctx.cfg;
    let cp = ctx.pdp.channel_len() - 1;
    let mut pre = OfdmPreamble::new(
        cfg.subcarriers,
        cfg.transmit_antennas,
        cp,
        derive_seed(cfg.seed, trial, SeedPurpose::Preamble),
    )?;
    let power = crate::channel::transmit_power(&pre.modulate()?);
    pre.set_amplitude(power.sqrt().recip());
    let received = channel.convolve(&pre.modulate()?)?;
    let clean = pre.demodulate(&received)?;
    let noise = pre.demodulate(noise)?;
    cfg.snr_db
        .iter()
        .map(|&snr| {
            let sigma = 10f64.powf(-snr / 20.0);
            let y: Vec<Vec<Vec<Complex64>>> = clean
                .iter()
                .zip(&noise)
                .map(|(c, w)| {
                    c.iter()
                        .zip(w)
                        .map(|(cs, ws)| cs.iter().zip(ws).map(|(a, b)| a + b * sigma).collect())
                        .collect()
                })
                .collect();
            let est = ofdm_ls_estimate(&y, &pre)?;
            let out = nmse(channel, &est)?;
            Ok(Some((out.value, out.excluded)))
        })
        .collect()
}

fn run_trial(ctx: &Context, trial: u64) -> Result<TrialOutcome> {
    let cfg = ctx.cfg;
    let m = cfg.subcarriers;
    let antennas = AntennaConfig {
        transmit: cfg.transmit_antennas,
        receive: cfg.receive_antennas,
        rho_t: cfg.rho_t,
        rho_r: cfg.rho_r,
    };
    let channel = realize(
        &ctx.pdp,
        antennas,
        m,
        derive_seed(cfg.seed, trial, SeedPurpose::Channel),
    )?;
    let data = qpsk_data(
        m,
        cfg.data_symbols,
        cfg.transmit_antennas,
        derive_seed(cfg.seed, trial, SeedPurpose::Data),
    );
    // Long enough for the longest filter bank preamble and the OFDM preamble.
    let filter_len = ctx.bank.filter().len();
    let longest = 3 * cfg.transmit_antennas.max(cfg.receive_antennas) + 3;
    let noise_len = preamble_window(longest, m, filter_len)
        .max(cfg.transmit_antennas * (m + ctx.pdp.channel_len()));
    let noise = unit_noise(
        cfg.receive_antennas,
        noise_len,
        derive_seed(cfg.seed, trial, SeedPurpose::Noise),
    );
    cfg.methods
        .iter()
        .map(|&method| match method {
            Method::CpOfdm => run_cp_ofdm(ctx, trial, &channel, &noise),
            _ => run_filter_bank_method(ctx, method, trial, &channel, &data, &noise),
        })
        .collect()
}

/// Runs every method over the SNR grid with paired draws per trial.
/// Trials run in parallel; results are merged in trial order so the output
/// is independent of scheduling.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let filter = PrototypeFilter::design(cfg.subcarriers, cfg.overlap)?;
    let table = InterferenceTable::from_filter(&filter)?;
    let pdp = cfg.pdp()?;
    let sparse = if cfg.methods.contains(&Method::Sparse) {
        Some(SparseLayout::hadamard(
            cfg.sparse_channel_len()?,
            cfg.transmit_antennas,
        )?)
    } else {
        None
    };
    let ctx = Context {
        cfg,
        kernel: InterferenceKernel::extended(&filter),
        bank: FilterBank::new(filter),
        table,
        pdp,
        sparse,
    };
    let outcomes = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(&ctx, t))
        .collect::<Result<Vec<_>>>()?;

    let mut points = Vec::with_capacity(cfg.methods.len() * cfg.snr_db.len());
    for (mi, &method) in cfg.methods.iter().enumerate() {
        for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
            let (mut vals, mut excluded, mut failures) = (Vec::with_capacity(cfg.trials), 0, 0);
            for o in &outcomes {
                match o[mi][si] {
                    Some((v, e)) => {
                        vals.push(v);
                        excluded += e;
                    }
                    None => failures += 1,
                }
            }
            let n = vals.len();
            let mean = if n > 0 {
                vals.iter().sum::<f64>() / n as f64
            } else {
                f64::NAN
            };
            let stderr = if n > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64 / n as f64)
                    .sqrt()
            } else {
                0.0
            };
            points.push(SweepPoint {
                method,
                snr_db,
                nmse_mean: mean,
                nmse_stderr: stderr,
                trials: n,
                excluded,
                failures,
            });
        }
    }
    Ok(SweepResult {
        config: cfg.clone(),
        points,
    })
}
