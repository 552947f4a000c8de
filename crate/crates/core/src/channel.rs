//! Tapped-delay-line Rayleigh channels with Kronecker spatial correlation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::fbcore::BasebandSignal;
use crate::linalg::{symmetric_sqrt, CMatrix};
use crate::{Error, Result};

const PDP_TABLE: &str = include_str!("../data/itu_vehicular.toml");

/// Default sampling rate used to map tap delays onto samples.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 10e6;

#[derive(Debug, Clone, Deserialize)]
struct ProfileEntry {
    name: String,
    sample_rate_hz: f64,
    taps: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
struct ProfileFile {
    profile: Vec<ProfileEntry>,
}

/// Tap delays in samples with linear powers summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    pub name: String,
    delays: Vec<usize>,
    powers: Vec<f64>,
}

impl PowerDelayProfile {
    /// Builds a profile from `(delay_ns, power_db)` pairs. Delays are rounded
    /// to the nearest sample; taps landing on the same sample are merged.
    pub fn from_table(name: &str, sample_rate_hz: f64, taps: &[(f64, f64)]) -> Result<Self> {
        if taps.is_empty() || !(sample_rate_hz > 0.0) {
            return Err(Error::Parameter(format!(
                "profile {name} needs taps and a positive sample rate"
            )));
        }
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for &(delay_ns, power_db) in taps {
            if !(delay_ns >= 0.0) || !power_db.is_finite() {
                return Err(Error::Parameter(format!(
                    "profile {name}: bad tap ({delay_ns} ns, {power_db} dB)"
                )));
            }
            let delay = (delay_ns * 1e-9 * sample_rate_hz).round() as usize;
            let power = 10f64.powf(power_db / 10.0);
            match merged.iter_mut().find(|(d, _)| *d == delay) {
                Some(slot) => slot.1 += power,
                None => merged.push((delay, power)),
            }
        }
        merged.sort_by_key(|&(d, _)| d);
        let total: f64 = merged.iter().map(|t| t.1).sum();
        let shift = merged[0].0;
        Ok(Self {
            name: name.to_string(),
            delays: merged.iter().map(|t| t.0 - shift).collect(),
            powers: merged.iter().map(|t| t.1 / total).collect(),
        })
    }

    /// A named profile from the embedded table (`veh-a`, `veh-b`), or
    /// `flat` for a single unit tap.
    pub fn builtin(name: &str, sample_rate_hz: Option<f64>) -> Result<Self> {
        let key = name.to_ascii_lowercase().replace('_', "-");
        if key == "flat" {
            return Self::single_tap();
        }
        let file: ProfileFile =
            toml::from_str(PDP_TABLE).map_err(|e| Error::Config(e.to_string()))?;
        let entry = file
            .profile
            .into_iter()
            .find(|p| p.name == key)
            .ok_or_else(|| Error::Config(format!("unknown power delay profile {name:?}")))?;
        Self::from_table(
            &entry.name,
            sample_rate_hz.unwrap_or(entry.sample_rate_hz),
            &entry.taps,
        )
    }

    pub fn single_tap() -> Result<Self> {
        Ok(Self {
            name: "flat".into(),
            delays: vec![0],
            powers: vec![1.0],
        })
    }

    pub fn delays(&self) -> &[usize] {
        &self.delays
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// `L_h`: last delay plus one.
    pub fn channel_len(&self) -> usize {
        self.delays.last().map_or(0, |d| d + 1)
    }
}

/// Exponential correlation matrix with entries `rho^|a-b|`.
pub fn exponential_correlation(n: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |a, b| rho.powi(a.abs_diff(b) as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub transmit: usize,
    pub receive: usize,
    pub rho_t: f64,
    pub rho_r: f64,
}

impl AntennaConfig {
    pub fn siso() -> Self {
        Self {
            transmit: 1,
            receive: 1,
            rho_t: 0.0,
            rho_r: 0.0,
        }
    }
}

/// One block-fading channel draw: impulse responses and their CFRs.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// `taps[l]` is the `N_r x N_t` matrix of tap `l`.
    taps: Vec<CMatrix>,
    /// `cfr[p]` is the `N_r x N_t` matrix at subcarrier `p`.
    cfr: Vec<CMatrix>,
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws a Kronecker-correlated Rayleigh channel and its `m`-point CFR.
pub fn realize(
    pdp: &PowerDelayProfile,
    antennas: AntennaConfig,
    m: usize,
    seed: u64,
) -> Result<ChannelRealization> {
    let AntennaConfig {
        transmit: nt,
        receive: nr,
        rho_t,
        rho_r,
    } = antennas;
    for rho in [rho_t, rho_r] {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Parameter(format!(
                "correlation coefficient {rho} outside [0, 1)"
            )));
        }
    }
    if nt == 0 || nr == 0 {
        return Err(Error::Parameter("antenna counts must be positive".into()));
    }
    let lh = pdp.channel_len();
    if lh > m {
        return Err(Error::Parameter(format!(
            "channel length {lh} exceeds M = {m}"
        )));
    }
    let rt = crate::linalg::to_complex(&symmetric_sqrt(&exponential_correlation(nt, rho_t)));
    let rr = crate::linalg::to_complex(&symmetric_sqrt(&exponential_correlation(nr, rho_r)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taps = vec![CMatrix::zeros(nr, nt); lh];
    for (&delay, &power) in pdp.delays.iter().zip(&pdp.powers) {
        let hw = CMatrix::from_fn(nr, nt, |_, _| gaussian(&mut rng));
        taps[delay] = &rr * hw * &rt * Complex64::new(power.sqrt(), 0.0);
    }
    ChannelRealization::from_taps(taps, m)
}

impl ChannelRealization {
    /// Builds a realization from explicit taps, computing the CFR by an
    /// `m`-point DFT.
    pub fn from_taps(taps: Vec<CMatrix>, m: usize) -> Result<Self> {
        let first = taps
            .first()
            .ok_or_else(|| Error::Parameter("channel needs at least one tap".into()))?;
        let (nr, nt) = first.shape();
        if taps.iter().any(|t| t.shape() != (nr, nt)) {
            return Err(Error::Dimension("taps differ in shape".into()));
        }
        if taps.len() > m {
            return Err(Error::Parameter(format!(
                "channel length {} exceeds M = {m}",
                taps.len()
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(m);
        let mut cfr = vec![CMatrix::zeros(nr, nt); m];
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..nr {
            for i in 0..nt {
                buf.fill(Complex64::new(0.0, 0.0));
                for (l, t) in taps.iter().enumerate() {
                    buf[l] = t[(j, i)];
                }
                fft.process(&mut buf);
                for (p, h) in cfr.iter_mut().enumerate() {
                    h[(j, i)] = buf[p];
                }
            }
        }
        Ok(Self { taps, cfr })
    }

    pub fn receive_antennas(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn transmit_antennas(&self) -> usize {
        self.taps[0].ncols()
    }

    pub fn subcarriers(&self) -> usize {
        self.cfr.len()
    }

    pub fn taps(&self) -> &[CMatrix] {
        &self.taps
    }

    pub fn cfr(&self) -> &[CMatrix] {
        &self.cfr
    }

    /// Convolves each transmit signal with its taps and superposes per
    /// receive antenna. Output length is the longest input plus `L_h - 1`.
    pub fn convolve(&self, signals: &[BasebandSignal]) -> Result<Vec<BasebandSignal>> {
        if signals.len() != self.transmit_antennas() {
            return Err(Error::Dimension(format!(
                "{} transmit signals for a channel with {} transmit antennas",
                signals.len(),
                self.transmit_antennas()
            )));
        }
        let len = signals.iter().map(BasebandSignal::len).max().unwrap_or(0) + self.taps.len() - 1;
        let active: Vec<usize> = (0..self.taps.len())
            .filter(|&l| self.taps[l].iter().any(|h| h.norm_sqr() > 0.0))
            .collect();
        let mut out = Vec::with_capacity(self.receive_antennas());
        for j in 0..self.receive_antennas() {
            let mut y = vec![Complex64::new(0.0, 0.0); len];
            for (i, s) in signals.iter().enumerate() {
                for &l in &active {
                    let h = self.taps[l][(j, i)];
                    for (k, &x) in s.samples().iter().enumerate() {
                        y[k + l] += h * x;
                    }
                }
            }
            out.push(BasebandSignal::new(y));
        }
        Ok(out)
    }
}

/// Unit-variance circular white Gaussian noise, one sequence per antenna.
pub fn unit_noise(antennas: usize, len: usize, seed: u64) -> Vec<BasebandSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..antennas)
        .map(|_| BasebandSignal::new((0..len).map(|_| gaussian(&mut rng)).collect()))
        .collect()
}

/// Mean power summed over transmit antennas, measured over the whole
/// signals.
pub fn transmit_power(signals: &[BasebandSignal]) -> f64 {
    signals.iter().map(|s| s.mean_power(0..s.len())).sum()
}

/// Passes the transmit signals through the channel and adds AWGN whose
/// variance is set from the measured transmit power and `snr_db`.
pub fn apply(
    signals: &[BasebandSignal],
    ch: &ChannelRealization,
    snr_db: f64,
    seed: u64,
) -> Result<Vec<BasebandSignal>> {
    let power = transmit_power(signals);
    if !(power > 0.0) {
        return Err(Error::Undefined(
            "SNR is undefined for a zero-power signal".into(),
        ));
    }
    let mut out = ch.convolve(signals)?;
    if snr_db.is_infinite() && snr_db > 0.0 {
        return Ok(out);
    }
    let sigma = (power * 10f64.powf(-snr_db / 10.0)).sqrt();
    let len = out[0].len();
    for (y, w) in out
        .iter_mut()
        .zip(unit_noise(ch.receive_antennas(), len, seed))
    {
        y.add_scaled(&w, Complex64::new(sigma, 0.0));
    }
    Ok(out)
}
