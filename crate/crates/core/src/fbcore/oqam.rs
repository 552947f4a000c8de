use num_complex::Complex64;

use super::{CellRole, ComplexGrid, FrameGrid};
use crate::{Error, Result};

/// Maps each QAM symbol to two consecutive real OQAM instants: real part at
/// `2t`, imaginary part at `2t + 1`.
pub fn oqam_stagger(qam: &ComplexGrid) -> FrameGrid {
    let mut frame = FrameGrid::new(qam.subcarriers(), 2 * qam.symbols());
    for m in 0..qam.subcarriers() {
        for t in 0..qam.symbols() {
            let x = qam.get(m, t);
            frame.set(m, 2 * t, x.re, CellRole::Data);
            frame.set(m, 2 * t + 1, x.im, CellRole::Data);
        }
    }
    frame
}

/// Inverse of [`oqam_stagger`].
pub fn oqam_destagger(frame: &FrameGrid) -> Result<ComplexGrid> {
    if frame.symbols() % 2 != 0 {
        return Err(Error::Parameter(format!(
            "cannot destagger an odd number of OQAM symbols ({})",
            frame.symbols()
        )));
    }
    Ok(ComplexGrid::from_fn(
        frame.subcarriers(),
        frame.symbols() / 2,
        |m, t| Complex64::new(frame.value(m, 2 * t), frame.value(m, 2 * t + 1)),
    ))
}
