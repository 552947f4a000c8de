use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Frequency-domain samples of the frequency-sampling prototype, indexed by
/// overlap factor. Only the non-negative half is listed; the pulse uses
/// `2K - 1` symmetric samples.
const FREQ_SAMPLES_K3: [f64; 3] = [1.0, 0.911_438, 0.411_438];
const FREQ_SAMPLES_K4: [f64; 4] = [1.0, 0.971_960, std::f64::consts::FRAC_1_SQRT_2, 0.235_147];

/// Real, symmetric, unit-energy prototype pulse of length `K * M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    coefficients: Vec<f64>,
    m: usize,
    k: usize,
}

impl PrototypeFilter {
    /// Frequency-sampling design with `2K - 1` nonzero frequency samples,
    /// centred at `(L_g - 1) / 2` so that `g[l] = g[L_g - 1 - l]`.
    pub fn design(m: usize, k: usize) -> Result<Self> {
        check_subcarriers(m)?;
        if m < 8 {
            return Err(Error::Parameter(format!(
                "M = {m} is below the minimum of 8"
            )));
        }
        let samples: &[f64] = match k {
            3 => &FREQ_SAMPLES_K3,
            4 => &FREQ_SAMPLES_K4,
            _ => {
                return Err(Error::Parameter(format!(
                    "unsupported overlap factor K = {k}"
                )))
            }
        };
        let len = k * m;
        let centre = (len as f64 - 1.0) / 2.0;
        let coefficients = (0..len)
            .map(|l| {
                let t = l as f64 - centre;
                samples[0]
                    + samples
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, h)| 2.0 * h * (2.0 * PI * i as f64 * t / len as f64).cos())
                        .sum::<f64>()
            })
            .collect();
        Self::from_coefficients(coefficients, m)
    }

    /// Wraps arbitrary coefficients, normalising them to unit energy.
    ///
    /// The length must be a positive multiple of `M` and the pulse must be
    /// symmetric to within `1e-12` (after normalisation).
    pub fn from_coefficients(mut coefficients: Vec<f64>, m: usize) -> Result<Self> {
        check_subcarriers(m)?;
        if coefficients.is_empty() || coefficients.len() % m != 0 {
            return Err(Error::Parameter(format!(
                "filter length {} is not a positive multiple of M = {m}",
                coefficients.len()
            )));
        }
        let energy: f64 = coefficients.iter().map(|c| c * c).sum();
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::Parameter(
                "prototype filter has zero or non-finite energy".into(),
            ));
        }
        let scale = energy.sqrt().recip();
        coefficients.iter_mut().for_each(|c| *c *= scale);
        let len = coefficients.len();
        for l in 0..len / 2 {
            if (coefficients[l] - coefficients[len - 1 - l]).abs() > 1e-12 {
                return Err(Error::Parameter(format!(
                    "prototype filter is not symmetric at tap {l}"
                )));
            }
        }
        Ok(Self {
            k: len / m,
            coefficients,
            m,
        })
    }

    /// Unit-energy rectangular pulse of length `M` (`K = 1`), a degenerate
    /// test pulse.
    pub fn rectangular(m: usize) -> Result<Self> {
        Self::from_coefficients(vec![1.0; m], m)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn subcarriers(&self) -> usize {
        self.m
    }

    pub fn overlap(&self) -> usize {
        self.k
    }

    /// `L_g = K * M`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Symmetry centre `(L_g - 1) / 2` used in the modulation phase.
    pub fn centre(&self) -> f64 {
        (self.len() as f64 - 1.0) / 2.0
    }

    /// Sign relating the atom of subcarrier `m + M` to that of `m`.
    ///
    /// The modulation phase is referenced to a half-integer centre when `L_g`
    /// is even, so subcarriers are only `M`-periodic up to
    /// `(-1)^(L_g - 1 + M/2)`.
    pub fn wrap_sign(&self) -> f64 {
        if (self.len() - 1 + self.m / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// One coefficient per line with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 25);
        for c in &self.coefficients {
            let _ = writeln!(out, "{c:.16e}");
        }
        out
    }
}

fn check_subcarriers(m: usize) -> Result<()> {
    if m == 0 || m % 2 != 0 {
        return Err(Error::Parameter(format!(
            "number of subcarriers M = {m} must be even and nonzero"
        )));
    }
    Ok(())
}
