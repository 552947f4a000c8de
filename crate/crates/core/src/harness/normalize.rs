use num_complex::Complex64;

use super::Normalization;
use crate::fbcore::BasebandSignal;
use crate::{Error, Result};

/// Length of the preamble span: `(N_pre - 1) M / 2 + L_g` samples.
pub fn preamble_window(preamble_symbols: usize, m: usize, filter_len: usize) -> usize {
    preamble_symbols.saturating_sub(1) * m / 2 + filter_len
}

/// Mean powers over the preamble window, summed across transmit antennas:
/// preamble alone, preamble-data cross term, data alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerms {
    pub preamble: f64,
    pub cross: f64,
    pub data: f64,
}

impl PowerTerms {
    pub fn measure(preamble: &[BasebandSignal], data: &[BasebandSignal], window: usize) -> Self {
        let at = |s: &BasebandSignal, l: usize| s.samples().get(l).copied().unwrap_or_default();
        let (mut pp, mut pd, mut dd) = (0.0, Complex64::new(0.0, 0.0), 0.0);
        for (i, p) in preamble.iter().enumerate() {
            let d = data.get(i);
            for l in 0..window {
                let x = at(p, l);
                let y = d.map_or(Complex64::new(0.0, 0.0), |d| at(d, l));
                pp += x.norm_sqr();
                pd += x.conj() * y;
                dd += y.norm_sqr();
            }
        }
        let w = window as f64;
        Self {
            preamble: pp / w,
            cross: pd.re / w,
            data: dd / w,
        }
    }
}

/// Preamble scale factor `a` so the transmitted preamble span has unit
/// mean power.
///
/// `SfbOutput` solves `a^2 P_pp + 2 a P_pd + P_dd = 1` on the measured
/// synthesis output, data-tail leakage included. `SfbInput` instead sets
/// `a^2 sum|d|^2 / window = 1` on the symbols fed to the bank.
pub fn normalize_power(
    preamble: &[BasebandSignal],
    data: &[BasebandSignal],
    window: usize,
    input_energy: f64,
    mode: Normalization,
) -> Result<f64> {
    if window == 0 {
        return Err(Error::Parameter("empty normalisation window".into()));
    }
    match mode {
        Normalization::SfbInput => {
            if !(input_energy > 0.0) {
                return Err(Error::Undefined("preamble carries no energy".into()));
            }
            Ok((window as f64 / input_energy).sqrt())
        }
        Normalization::SfbOutput => {
            let t = PowerTerms::measure(preamble, data, window);
            if !(t.preamble > 0.0) {
                return Err(Error::Undefined("preamble carries no energy".into()));
            }
            if t.data >= 1.0 {
                return Err(Error::Config(format!(
                    "data leakage power {} already exceeds the reference",
                    t.data
                )));
            }
            let disc = t.cross * t.cross - t.preamble * (t.data - 1.0);
            Ok((-t.cross + disc.sqrt()) / t.preamble)
        }
    }
}
