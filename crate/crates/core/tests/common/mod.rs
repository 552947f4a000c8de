#![allow(dead_code)]

use num_complex::Complex64;
use oqam_chest::channel::ChannelRealization;
use oqam_chest::fbcore::{ComplexGrid, FilterBank, FrameGrid};
use oqam_chest::linalg::CMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Circular complex Gaussian with variance `var`.
pub fn cgauss(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| cgauss(rng, 1.0))
}

pub fn flat_channel(h: CMatrix, m: usize) -> ChannelRealization {
    ChannelRealization::from_taps(vec![h], m).unwrap()
}

/// Synthesis, channel, analysis of `n` symbols, no noise.
pub fn receive(
    bank: &FilterBank,
    frames: &[FrameGrid],
    ch: &ChannelRealization,
    n: usize,
) -> Vec<ComplexGrid> {
    let tx: Vec<_> = frames.iter().map(|f| bank.synthesize(f).unwrap()).collect();
    ch.convolve(&tx)
        .unwrap()
        .iter()
        .map(|r| bank.analyze(r, n).unwrap())
        .collect()
}

/// Largest entrywise error over the estimated subcarriers.
pub fn max_error(ch: &ChannelRealization, est: &oqam_chest::estimator::CfrEstimate) -> f64 {
    ch.cfr()
        .iter()
        .zip(est.values())
        .filter_map(|(h, e)| e.as_ref().map(|e| (h - e).camax()))
        .fold(0.0, f64::max)
}
