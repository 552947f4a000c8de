use num_complex::Complex64;

use super::{check_grids, CfrEstimate, DEGENERATE_THRESHOLD};
use crate::fbcore::{ComplexGrid, FrameGrid};
use crate::linalg::{inverse, right_inverse, CMatrix};
use crate::{Error, Result};

/// Pairs-of-pilots estimate from symbols 0 (pilots) and 1 (zeros):
/// `H_p = Im(y0* y1) / (j d_{p,0} y1*)`.
pub fn pop_estimate(y: &[ComplexGrid], frame: &FrameGrid) -> Result<CfrEstimate> {
    let m = frame.subcarriers();
    check_grids(y, m, 2)?;
    let h = (0..m)
        .map(|p| {
            let d = frame.value(p, 0);
            if d.abs() < DEGENERATE_THRESHOLD {
                return Err(Error::DegeneratePilot {
                    subcarrier: p,
                    magnitude: d.abs(),
                });
            }
            let mut hp = CMatrix::zeros(y.len(), 1);
            for (j, g) in y.iter().enumerate() {
                let (y0, y1) = (g.get(p, 0), g.get(p, 1));
                let den = (y0.conj() * y1).im;
                if den.abs() < DEGENERATE_THRESHOLD || y1.norm() < DEGENERATE_THRESHOLD {
                    return Ok(None);
                }
                hp[(j, 0)] = den / (Complex64::new(0.0, d) * y1.conj());
            }
            Ok(Some(hp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CfrEstimate::new("pop", h))
}

/// MIMO extension: `[W_R W_I] = D_p Y_p^{-1}`, `W = W_R + j W_I`, and the
/// CFR is the right inverse of `W`.
pub fn mimo_pop_estimate(y: &[ComplexGrid], frames: &[FrameGrid]) -> Result<CfrEstimate> {
    let nt = frames.len();
    let nr = y.len();
    if nt == 0 || nr < nt {
        return Err(Error::Parameter(format!(
            "MIMO POP needs N_r >= N_t >= 1, got N_r = {nr}, N_t = {nt}"
        )));
    }
    let m = frames[0].subcarriers();
    let n = 2 * nr;
    if frames.iter().any(|f| f.symbols() < n) {
        return Err(Error::Dimension(format!(
            "MIMO POP needs {n} pilot symbols per antenna"
        )));
    }
    check_grids(y, m, n)?;
    let h = (0..m)
        .map(|p| {
            let yp = CMatrix::from_fn(n, n, |r, q| {
                let v = if r < nr {
                    y[r].get(p, q).re
                } else {
                    -y[r - nr].get(p, q).im
                };
                Complex64::new(v, 0.0)
            });
            let dp = CMatrix::from_fn(nt, n, |i, q| Complex64::new(frames[i].value(p, q), 0.0));
            let w = inverse(&yp).map(|yi| {
                let ri = dp * yi;
                CMatrix::from_fn(nt, nr, |i, j| {
                    ri[(i, j)] + Complex64::new(0.0, 1.0) * ri[(i, j + nr)]
                })
            });
            w.and_then(|w| right_inverse(&w))
        })
        .collect();
    Ok(CfrEstimate::new("mimo-pop", h))
}
