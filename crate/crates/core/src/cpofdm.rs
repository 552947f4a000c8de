//! Cyclic-prefix OFDM baseline with least-squares preamble estimation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::estimator::{CfrEstimate, DEGENERATE_THRESHOLD};
use crate::fbcore::BasebandSignal;
use crate::linalg::{hadamard, CMatrix};
use crate::{Error, Result};

/// Modulates OFDM symbols with a unitary IDFT and a cyclic prefix of `cp`
/// samples each.
pub fn ofdm_modulate(symbols: &[Vec<Complex64>], cp: usize) -> Result<BasebandSignal> {
    let m = symbols.first().map_or(0, Vec::len);
    if m == 0 || symbols.iter().any(|s| s.len() != m) {
        return Err(Error::Dimension(
            "OFDM symbols must share a nonzero length".into(),
        ));
    }
    if cp > m {
        return Err(Error::Parameter(format!(
            "cyclic prefix {cp} longer than the symbol {m}"
        )));
    }
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    let scale = (m as f64).sqrt().recip();
    let mut out = Vec::with_capacity(symbols.len() * (m + cp));
    for s in symbols {
        let mut buf: Vec<Complex64> = s.iter().map(|x| x * scale).collect();
        ifft.process(&mut buf);
        out.extend_from_slice(&buf[m - cp..]);
        out.extend_from_slice(&buf);
    }
    Ok(BasebandSignal::new(out))
}

/// Removes the prefixes of `count` symbols and applies the unitary DFT.
pub fn ofdm_demodulate(
    signal: &BasebandSignal,
    m: usize,
    cp: usize,
    count: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let need = count * (m + cp);
    if signal.len() < need {
        return Err(Error::Parameter(format!(
            "signal has {} samples, {need} needed",
            signal.len()
        )));
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    let scale = (m as f64).sqrt().recip();
    Ok((0..count)
        .map(|k| {
            let start = k * (m + cp) + cp;
            let mut buf: Vec<Complex64> = signal.samples()[start..start + m]
                .iter()
                .map(|x| x * scale)
                .collect();
            fft.process(&mut buf);
            buf
        })
        .collect())
}

/// Single-symbol QPSK preamble, repeated over `N_t` symbols with Hadamard
/// signs for MIMO.
#[derive(Debug, Clone)]
pub struct OfdmPreamble {
    base: Vec<Complex64>,
    signs: nalgebra::DMatrix<f64>,
    cp: usize,
    amplitude: f64,
}

impl OfdmPreamble {
    /// `cp` is normally the channel order `L_h - 1`.
    pub fn new(m: usize, transmit_antennas: usize, cp: usize, seed: u64) -> Result<Self> {
        if m == 0 || cp > m {
            return Err(Error::Parameter(format!(
                "invalid OFDM size M = {m}, CP = {cp}"
            )));
        }
        let signs = hadamard(transmit_antennas)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let base = (0..m)
            .map(|_| {
                Complex64::new(
                    if rng.random() { h } else { -h },
                    if rng.random() { h } else { -h },
                )
            })
            .collect();
        Ok(Self {
            base,
            signs,
            cp,
            amplitude: 1.0,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.base.len()
    }

    pub fn transmit_antennas(&self) -> usize {
        self.signs.nrows()
    }

    pub fn cyclic_prefix(&self) -> usize {
        self.cp
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn set_amplitude(&mut self, a: f64) {
        self.amplitude = a;
    }

    /// Whether the prefix absorbs a channel of `channel_len` taps.
    pub fn covers(&self, channel_len: usize) -> bool {
        self.cp + 1 >= channel_len
    }

    /// Pilot of antenna `i` on symbol `k` at subcarrier `p`.
    pub fn pilot(&self, i: usize, k: usize, p: usize) -> Complex64 {
        self.base[p] * self.signs[(i, k)] * self.amplitude
    }

    /// Number of OFDM symbols in the preamble.
    pub fn symbols(&self) -> usize {
        self.transmit_antennas()
    }

    /// One baseband signal per transmit antenna.
    pub fn modulate(&self) -> Result<Vec<BasebandSignal>> {
        (0..self.transmit_antennas())
            .map(|i| {
                let syms: Vec<Vec<Complex64>> = (0..self.symbols())
                    .map(|k| {
                        (0..self.subcarriers())
                            .map(|p| self.pilot(i, k, p))
                            .collect()
                    })
                    .collect();
                ofdm_modulate(&syms, self.cp)
            })
            .collect()
    }

    /// Demodulates each receive antenna's preamble symbols.
    pub fn demodulate(&self, received: &[BasebandSignal]) -> Result<Vec<Vec<Vec<Complex64>>>> {
        received
            .iter()
            .map(|r| ofdm_demodulate(r, self.subcarriers(), self.cp, self.symbols()))
            .collect()
    }
}

/// Least-squares CFR: `H_p = Y_p X_p^{-1}` with `X_p = x_p A`.
///
/// `y[j][k][p]` is receive antenna `j`, OFDM symbol `k`, subcarrier `p`.
pub fn ofdm_ls_estimate(y: &[Vec<Vec<Complex64>>], preamble: &OfdmPreamble) -> Result<CfrEstimate> {
    let (m, nt) = (preamble.subcarriers(), preamble.transmit_antennas());
    if y.is_empty()
        || y.iter()
            .any(|r| r.len() < nt || r.iter().any(|s| s.len() != m))
    {
        return Err(Error::Dimension(format!(
            "need {nt} demodulated symbols of {m} subcarriers per antenna"
        )));
    }
    let h = (0..m)
        .map(|p| {
            let x = preamble.base[p] * preamble.amplitude;
            if x.norm() < DEGENERATE_THRESHOLD {
                return Err(Error::DegeneratePilot {
                    subcarrier: p,
                    magnitude: x.norm(),
                });
            }
            // A is symmetric orthogonal with A A^T = N_t I.
            let inv = CMatrix::from_fn(nt, nt, |k, i| {
                Complex64::new(preamble.signs[(i, k)], 0.0) / (x * nt as f64)
            });
            let yp = CMatrix::from_fn(y.len(), nt, |j, k| y[j][k][p]);
            Ok(Some(yp * inv))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CfrEstimate::new("cp-ofdm", h))
}
