use num_complex::Complex64;

use super::{check_grids, CfrEstimate, DEGENERATE_THRESHOLD};
use crate::fbcore::{CellRole, ComplexGrid, FrameGrid};
use crate::interference::InterferenceKernel;
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// Fills the gaps of a circular sequence by linear interpolation between
/// the nearest known neighbours on either side.
pub fn interpolate_circular(values: &[Option<Complex64>]) -> Result<Vec<Complex64>> {
    let m = values.len();
    let known: Vec<usize> = (0..m).filter(|&p| values[p].is_some()).collect();
    let Some(&first) = known.first() else {
        return Err(Error::Parameter("nothing to interpolate from".into()));
    };
    let mut out: Vec<Complex64> = values.iter().map(|v| v.unwrap_or_default()).collect();
    for (idx, &lo) in known.iter().enumerate() {
        let hi = known.get(idx + 1).copied().unwrap_or(first + m);
        let (a, b) = (out[lo], out[hi % m]);
        let span = (hi - lo) as f64;
        for k in lo + 1..hi {
            let t = (k - lo) as f64 / span;
            out[k % m] = a * (1.0 - t) + b * t;
        }
    }
    Ok(out)
}

/// Point division at the pilot cells of symbol `q` followed by circular
/// linear interpolation across the remaining subcarriers. Unknown
/// neighbours are assumed to cancel and only known cells enter the
/// pseudo-pilot.
pub fn icm_estimate(
    y: &[ComplexGrid],
    frame: &FrameGrid,
    q: usize,
    kernel: &InterferenceKernel,
) -> Result<CfrEstimate> {
    let m = frame.subcarriers();
    check_grids(y, m, q + 1)?;
    let pilots: Vec<usize> = (0..m)
        .filter(|&p| frame.role(p, q) == CellRole::Pilot)
        .collect();
    let mut pseudo = Vec::with_capacity(pilots.len());
    for &p in &pilots {
        let c = kernel.known_part(frame, p, q)?;
        if c.norm() < DEGENERATE_THRESHOLD {
            return Err(Error::DegeneratePilot {
                subcarrier: p,
                magnitude: c.norm(),
            });
        }
        pseudo.push(c);
    }
    let mut h = vec![CMatrix::zeros(y.len(), 1); m];
    for (j, g) in y.iter().enumerate() {
        let mut sparse = vec![None; m];
        for (&p, &c) in pilots.iter().zip(&pseudo) {
            sparse[p] = Some(g.get(p, q) / c);
        }
        for (p, v) in interpolate_circular(&sparse)?.into_iter().enumerate() {
            h[p][(j, 0)] = v;
        }
    }
    Ok(CfrEstimate::new("icm", h.into_iter().map(Some).collect()))
}
