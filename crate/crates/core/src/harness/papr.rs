use serde::Serialize;

use crate::fbcore::{BasebandSignal, FilterBank, FrameGrid};
use crate::{Error, Result};

/// Instantaneous power trace of a preamble signal and its peak-to-average
/// ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaprProfile {
    pub power: Vec<f64>,
    pub mean: f64,
    pub peak: f64,
    pub papr: f64,
}

impl PaprProfile {
    pub fn papr_db(&self) -> f64 {
        10.0 * self.papr.log10()
    }
}

/// Power summed over transmit antennas, sample by sample.
pub fn papr_profile_signals(signals: &[BasebandSignal]) -> Result<PaprProfile> {
    let len = signals.iter().map(BasebandSignal::len).max().unwrap_or(0);
    let mut power = vec![0.0; len];
    for s in signals {
        for (p, x) in power.iter_mut().zip(s.samples()) {
            *p += x.norm_sqr();
        }
    }
    let mean = power.iter().sum::<f64>() / len.max(1) as f64;
    if !(mean > 0.0) {
        return Err(Error::Undefined("PAPR of a silent signal".into()));
    }
    let peak = power.iter().cloned().fold(0.0, f64::max);
    Ok(PaprProfile {
        power,
        mean,
        peak,
        papr: peak / mean,
    })
}

/// Synthesises each antenna's frames and profiles the sum.
pub fn papr_profile(frames: &[FrameGrid], bank: &FilterBank) -> Result<PaprProfile> {
    let signals = frames
        .iter()
        .map(|f| bank.synthesize(f))
        .collect::<Result<Vec<_>>>()?;
    papr_profile_signals(&signals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn constant_envelope_has_unit_papr() {
        let s = BasebandSignal::new(
            (0..32)
                .map(|l| Complex64::from_polar(2.0, l as f64))
                .collect(),
        );
        let p = papr_profile_signals(&[s]).unwrap();
        assert!((p.papr - 1.0).abs() < 1e-12);
        assert!(p.papr_db().abs() < 1e-10);
    }

    #[test]
    fn silence_is_rejected() {
        assert!(papr_profile_signals(&[BasebandSignal::zeros(4)]).is_err());
    }
}
