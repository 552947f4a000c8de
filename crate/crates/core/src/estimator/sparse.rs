use std::f64::consts::PI;

use num_complex::Complex64;

use super::{check_grids, CfrEstimate};
use crate::fbcore::{ComplexGrid, FrameGrid};
use crate::linalg::{CMatrix, CVector};
use crate::preamble::SparseLayout;
use crate::{Error, Result};

fn twiddle(k: usize, l: usize, m: usize) -> Complex64 {
    Complex64::from_polar(1.0, -2.0 * PI * ((k * l) % m) as f64 / m as f64)
}

/// System matrix mapping the stacked impulse responses `[h_1; ...; h_Nt]`
/// of one receive antenna onto the pilot tones of all sets. Rows are
/// ordered by set then tone, columns by antenna then delay.
pub fn sparse_system_matrix(
    frames: &[FrameGrid],
    layout: &SparseLayout,
    q: usize,
) -> Result<CMatrix> {
    let nt = frames.len();
    let m = frames
        .first()
        .ok_or_else(|| Error::Dimension("no transmit frames".into()))?
        .subcarriers();
    crate::preamble::validate_sparse(layout, m, nt)?;
    let (lh, spacing) = (layout.channel_len, layout.spacing(m));
    Ok(CMatrix::from_fn(nt * lh, nt * lh, |row, col| {
        let (r, k) = (row / lh, row % lh);
        let (i, l) = (col / lh, col % lh);
        let tone = layout.starts[r] + k * spacing;
        twiddle(tone, l, m) * frames[i].value(tone, q)
    }))
}

/// Least-squares solver for one sparse preamble, reusable across noise
/// realisations.
#[derive(Debug, Clone)]
pub struct SparseSolver {
    layout: SparseLayout,
    q: usize,
    m: usize,
    transmit: usize,
    pinv: CMatrix,
}

impl SparseSolver {
    pub fn new(frames: &[FrameGrid], layout: &SparseLayout, q: usize) -> Result<Self> {
        let c = sparse_system_matrix(frames, layout, q)?;
        let svd = c.svd(true, true);
        let s = &svd.singular_values;
        let max = s.iter().cloned().fold(0.0, f64::max);
        let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(max > 0.0) || min <= max * 1e-12 {
            return Err(Error::Config(
                "sparse least-squares system is rank deficient".into(),
            ));
        }
        let pinv = svd
            .pseudo_inverse(max * 1e-14)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self {
            layout: layout.clone(),
            q,
            m: frames[0].subcarriers(),
            transmit: frames.len(),
            pinv,
        })
    }

    /// Impulse responses: `taps[l]` is `N_r x N_t`.
    pub fn impulse_response(&self, y: &[ComplexGrid]) -> Result<Vec<CMatrix>> {
        check_grids(y, self.m, self.q + 1)?;
        let (lh, nt) = (self.layout.channel_len, self.transmit);
        let spacing = self.layout.spacing(self.m);
        let mut taps = vec![CMatrix::zeros(y.len(), nt); lh];
        for (j, g) in y.iter().enumerate() {
            let rhs = CVector::from_fn(nt * lh, |row, _| {
                g.get(self.layout.starts[row / lh] + (row % lh) * spacing, self.q)
            });
            let h = &self.pinv * rhs;
            for (idx, v) in h.iter().enumerate() {
                taps[idx % lh][(j, idx / lh)] = *v;
            }
        }
        Ok(taps)
    }

    /// CFR from the impulse response via an `M`-point DFT.
    pub fn estimate(&self, y: &[ComplexGrid]) -> Result<CfrEstimate> {
        let taps = self.impulse_response(y)?;
        let h = (0..self.m)
            .map(|p| {
                let mut acc = CMatrix::zeros(taps[0].nrows(), taps[0].ncols());
                for (l, t) in taps.iter().enumerate() {
                    acc += t * twiddle(p, l, self.m);
                }
                Some(acc)
            })
            .collect();
        Ok(CfrEstimate::new("sparse-ls", h))
    }
}

/// Least-squares impulse responses: `taps[l]` is `N_r x N_t`.
pub fn sparse_impulse_response(
    y: &[ComplexGrid],
    frames: &[FrameGrid],
    layout: &SparseLayout,
    q: usize,
) -> Result<Vec<CMatrix>> {
    SparseSolver::new(frames, layout, q)?.impulse_response(y)
}

/// Sparse least-squares CFR estimate.
pub fn sparse_ls_estimate(
    y: &[ComplexGrid],
    frames: &[FrameGrid],
    layout: &SparseLayout,
    q: usize,
) -> Result<CfrEstimate> {
    SparseSolver::new(frames, layout, q)?.estimate(y)
}
