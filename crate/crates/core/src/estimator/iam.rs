use num_complex::Complex64;

use super::{check_grids, CfrEstimate, DEGENERATE_THRESHOLD};
use crate::fbcore::{ComplexGrid, FrameGrid};
use crate::interference::InterferenceKernel;
use crate::linalg::{inverse, CMatrix};
use crate::{Error, Result};

/// Pseudo-pilots of every subcarrier at symbol `q`.
pub fn pseudo_pilots(
    kernel: &InterferenceKernel,
    frame: &FrameGrid,
    q: usize,
) -> Result<Vec<Complex64>> {
    (0..frame.subcarriers())
        .map(|p| kernel.pseudo_pilot(frame, p, q))
        .collect()
}

/// `H_p = y_{p,q} / c_p` for each receive antenna.
pub fn iam_estimate(y: &[ComplexGrid], q: usize, c: &[Complex64]) -> Result<CfrEstimate> {
    check_grids(y, c.len(), q + 1)?;
    let h = c
        .iter()
        .enumerate()
        .map(|(p, &cp)| {
            if cp.norm() < DEGENERATE_THRESHOLD {
                return Err(Error::DegeneratePilot {
                    subcarrier: p,
                    magnitude: cp.norm(),
                });
            }
            Ok(Some(CMatrix::from_fn(y.len(), 1, |j, _| {
                y[j].get(p, q) / cp
            })))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CfrEstimate::new("iam", h))
}

/// Per-subcarrier `N_t x N_t` pseudo-pilot matrices: entry `(i, k)` is the
/// pseudo-pilot of antenna `i` at instant `instants[k]`.
pub fn mimo_pseudo_pilot_matrices(
    kernel: &InterferenceKernel,
    frames: &[FrameGrid],
    instants: &[usize],
) -> Result<Vec<CMatrix>> {
    let m = frames
        .first()
        .ok_or_else(|| Error::Dimension("no transmit frames".into()))?
        .subcarriers();
    (0..m)
        .map(|p| {
            let mut c = CMatrix::zeros(frames.len(), instants.len());
            for (i, f) in frames.iter().enumerate() {
                for (k, &q) in instants.iter().enumerate() {
                    c[(i, k)] = kernel.pseudo_pilot(f, p, q)?;
                }
            }
            Ok(c)
        })
        .collect()
}

/// `H_p = [y_{p,t_1} ... y_{p,t_Nt}] C_p^{-1}`; singular `C_p` leaves the
/// subcarrier unestimated.
pub fn mimo_iam_estimate(
    y: &[ComplexGrid],
    instants: &[usize],
    c: &[CMatrix],
) -> Result<CfrEstimate> {
    let last = instants
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::Dimension("no pilot instants".into()))?;
    check_grids(y, c.len(), last + 1)?;
    let h = c
        .iter()
        .enumerate()
        .map(|(p, cp)| {
            if cp.nrows() != instants.len() || cp.ncols() != instants.len() {
                return Err(Error::Dimension(format!(
                    "pseudo-pilot matrix at {p} is {:?}",
                    cp.shape()
                )));
            }
            let yp = CMatrix::from_fn(y.len(), instants.len(), |j, k| y[j].get(p, instants[k]));
            Ok(inverse(cp).map(|ci| yp * ci))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CfrEstimate::new("mimo-iam", h))
}
