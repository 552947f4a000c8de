use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::frame::phase_factor;
use super::{FrameGrid, PrototypeFilter};
use crate::{Error, Result};

/// Complex baseband samples; symbol `n` starts at sample `n * M / 2`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BasebandSignal {
    samples: Vec<Complex64>,
}

impl BasebandSignal {
    pub fn new(samples: Vec<Complex64>) -> Self {
        Self { samples }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            samples: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// Mean `|s(l)|^2` over `range`, with samples past the end counted as zero.
    pub fn mean_power(&self, range: std::ops::Range<usize>) -> f64 {
        if range.is_empty() {
            return 0.0;
        }
        let len = range.len();
        let end = range.end.min(self.samples.len());
        let start = range.start.min(end);
        self.samples[start..end]
            .iter()
            .map(|s| s.norm_sqr())
            .sum::<f64>()
            / len as f64
    }

    pub fn scale(&mut self, factor: f64) {
        self.samples.iter_mut().for_each(|s| *s *= factor);
    }

    /// `self += factor * other`, growing `self` if `other` is longer.
    pub fn add_scaled(&mut self, other: &BasebandSignal, factor: Complex64) {
        if other.len() > self.len() {
            self.samples.resize(other.len(), Complex64::new(0.0, 0.0));
        }
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += factor * b;
        }
    }
}

/// Dense `M x N` complex grid, typically the analysis filter bank output
/// `y_{p,q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            data: vec![Complex64::new(0.0, 0.0); m * n],
        }
    }

    pub fn from_fn(m: usize, n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(m * n);
        for p in 0..m {
            for q in 0..n {
                data.push(f(p, q));
            }
        }
        Self { m, n, data }
    }

    pub fn subcarriers(&self) -> usize {
        self.m
    }

    pub fn symbols(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        assert!(p < self.m && q < self.n);
        self.data[p * self.n + q]
    }

    pub fn set(&mut self, p: usize, q: usize, v: Complex64) {
        assert!(p < self.m && q < self.n);
        self.data[p * self.n + q] = v;
    }

    pub fn add_scaled(&mut self, other: &ComplexGrid, factor: f64) {
        assert_eq!((self.m, self.n), (other.m, other.n));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * factor;
        }
    }
}

fn signal_len(n: usize, filter: &PrototypeFilter) -> usize {
    if n == 0 {
        0
    } else {
        (n - 1) * filter.subcarriers() / 2 + filter.len()
    }
}

/// FFT-based synthesis/analysis filter bank pair for one prototype filter.
///
/// Each OQAM symbol costs one `M`-point FFT plus `L_g` multiply-adds.
#[derive(Clone)]
pub struct FilterBank {
    filter: PrototypeFilter,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `e^{-j 2 pi m (L_g - 1)/2 / M}`
    centre_rot: Vec<Complex64>,
}

impl std::fmt::Debug for FilterBank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FilterBank")
            .field("filter", &self.filter)
            .finish_non_exhaustive()
    }
}

impl FilterBank {
    pub fn new(filter: PrototypeFilter) -> Self {
        let m = filter.subcarriers();
        let mut planner = FftPlanner::new();
        let c = filter.centre();
        let centre_rot = (0..m)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 * c / m as f64))
            .collect();
        Self {
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
            filter,
            centre_rot,
        }
    }

    pub fn filter(&self) -> &PrototypeFilter {
        &self.filter
    }

    pub fn synthesize(&self, frame: &FrameGrid) -> Result<BasebandSignal> {
        let m = self.filter.subcarriers();
        if frame.subcarriers() != m {
            return Err(Error::Dimension(format!(
                "frame has {} subcarriers, filter expects {m}",
                frame.subcarriers()
            )));
        }
        let g = self.filter.coefficients();
        let mut out = BasebandSignal::zeros(signal_len(frame.symbols(), &self.filter));
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for n in 0..frame.symbols() {
            let mut any = false;
            for (k, slot) in buf.iter_mut().enumerate() {
                let x = frame.symbol(k, n);
                if x.re != 0.0 || x.im != 0.0 {
                    any = true;
                }
                let sign = if (k * n) % 2 == 0 { 1.0 } else { -1.0 };
                *slot = x * phase_factor(k as i64, n as i64) * self.centre_rot[k] * sign;
            }
            if !any {
                continue;
            }
            self.inverse.process(&mut buf);
            let start = n * m / 2;
            for (l, &gl) in g.iter().enumerate() {
                out.samples[start + l] += buf[l % m] * gl;
            }
        }
        Ok(out)
    }

    pub fn analyze(&self, signal: &BasebandSignal, n: usize) -> Result<ComplexGrid> {
        let m = self.filter.subcarriers();
        let need = signal_len(n, &self.filter);
        if signal.len() < need {
            return Err(Error::Parameter(format!(
                "signal of {} samples is too short for {n} symbols ({need} needed)",
                signal.len()
            )));
        }
        let g = self.filter.coefficients();
        let mut out = ComplexGrid::zeros(m, n);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for q in 0..n {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            let start = q * m / 2;
            for (l, &gl) in g.iter().enumerate() {
                buf[l % m] += signal.samples[start + l] * gl;
            }
            self.forward.process(&mut buf);
            for (p, &v) in buf.iter().enumerate() {
                let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
                let rot = (phase_factor(p as i64, q as i64) * self.centre_rot[p]).conj();
                out.set(p, q, v * rot * sign);
            }
        }
        Ok(out)
    }
}

/// Synthesis filter bank output `s(l) = sum_m sum_n d_{m,n} g_{m,n}(l)`.
pub fn synthesize(frame: &FrameGrid, filter: &PrototypeFilter) -> Result<BasebandSignal> {
    FilterBank::new(filter.clone()).synthesize(frame)
}

/// Analysis filter bank output `y_{p,q} = sum_l s(l) g*_{p,q}(l)` for the
/// first `n` symbols.
pub fn analyze(signal: &BasebandSignal, filter: &PrototypeFilter, n: usize) -> Result<ComplexGrid> {
    FilterBank::new(filter.clone()).analyze(signal, n)
}

/// Atom `g_{m,n}(l)` evaluated at absolute sample `l`.
pub(crate) fn atom(filter: &PrototypeFilter, m: i64, n: usize, l: usize) -> Complex64 {
    let mm = filter.subcarriers();
    let start = n * mm / 2;
    if l < start || l >= start + filter.len() {
        return Complex64::new(0.0, 0.0);
    }
    let arg = 2.0 * PI * m as f64 * (l as f64 - filter.centre()) / mm as f64;
    Complex64::from_polar(filter.coefficients()[l - start], arg) * phase_factor(m, n as i64)
}

/// Direct evaluation of the synthesis sum, `O(M N L_g)`. Reference for the
/// FFT path.
pub fn synthesize_direct(frame: &FrameGrid, filter: &PrototypeFilter) -> Result<BasebandSignal> {
    let m = filter.subcarriers();
    if frame.subcarriers() != m {
        return Err(Error::Dimension(
            "frame and filter subcarrier counts differ".into(),
        ));
    }
    let mut out = BasebandSignal::zeros(signal_len(frame.symbols(), filter));
    for n in 0..frame.symbols() {
        for k in 0..m {
            let x = frame.symbol(k, n);
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            let start = n * m / 2;
            for l in start..start + filter.len() {
                out.samples[l] += x * atom(filter, k as i64, n, l);
            }
        }
    }
    Ok(out)
}

/// Direct evaluation of the analysis inner products, `O(M N L_g)`.
pub fn analyze_direct(
    signal: &BasebandSignal,
    filter: &PrototypeFilter,
    n: usize,
) -> Result<ComplexGrid> {
    let m = filter.subcarriers();
    let need = signal_len(n, filter);
    if signal.len() < need {
        return Err(Error::Parameter(format!(
            "signal of {} samples is too short for {n} symbols",
            signal.len()
        )));
    }
    Ok(ComplexGrid::from_fn(m, n, |p, q| {
        let start = q * m / 2;
        (start..start + filter.len())
            .map(|l| signal.samples[l] * atom(filter, p as i64, q, l).conj())
            .sum()
    }))
}
