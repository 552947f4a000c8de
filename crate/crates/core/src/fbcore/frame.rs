use num_complex::Complex64;

use crate::{Error, Result};

/// Role of a time-frequency cell in a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum CellRole {
    /// Guard null, always exactly zero.
    #[default]
    Null,
    Pilot,
    /// Payload unknown to the receiver.
    Data,
    /// Payload constrained to cancel interference at nearby pilots; still
    /// unknown to the receiver.
    StructuredData,
}

impl CellRole {
    /// Whether the receiver knows the value carried by the cell.
    pub fn is_known(self) -> bool {
        matches!(self, CellRole::Null | CellRole::Pilot)
    }
}

/// `e^{j phi_{m,n}}` with `phi_{m,n} = (m + n) pi/2 - m n pi`, evaluated exactly.
pub fn phase_factor(m: i64, n: i64) -> Complex64 {
    let quarter = match (m + n).rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    if (m * n).rem_euclid(2) == 0 {
        quarter
    } else {
        -quarter
    }
}

/// One antenna's `M x N` grid of real OQAM symbols.
///
/// Cells hold real values. A cell may carry a quarter-period flag, in which
/// case the transmitted symbol is `j * value`; this represents the imaginary
/// pilots of the non-OQAM IAM-I and IAM-C style preambles.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGrid {
    m: usize,
    n: usize,
    values: Vec<f64>,
    imaginary: Vec<bool>,
    roles: Vec<CellRole>,
}

impl FrameGrid {
    /// All-null grid.
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            values: vec![0.0; m * n],
            imaginary: vec![false; m * n],
            roles: vec![CellRole::Null; m * n],
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.m
    }

    pub fn symbols(&self) -> usize {
        self.n
    }

    fn index(&self, m: usize, n: usize) -> usize {
        assert!(
            m < self.m && n < self.n,
            "cell ({m}, {n}) outside {}x{} grid",
            self.m,
            self.n
        );
        m * self.n + n
    }

    /// Sets a real-valued cell. Null cells are forced to zero.
    pub fn set(&mut self, m: usize, n: usize, value: f64, role: CellRole) {
        let i = self.index(m, n);
        self.values[i] = if role == CellRole::Null { 0.0 } else { value };
        self.imaginary[i] = false;
        self.roles[i] = role;
    }

    /// Sets a cell carrying `j * value`.
    pub fn set_imaginary(&mut self, m: usize, n: usize, value: f64, role: CellRole) {
        self.set(m, n, value, role);
        let i = self.index(m, n);
        self.imaginary[i] = role != CellRole::Null;
    }

    /// Sets a cell from a complex symbol that must be purely real or purely
    /// imaginary.
    pub fn set_symbol(
        &mut self,
        m: usize,
        n: usize,
        symbol: Complex64,
        role: CellRole,
    ) -> Result<()> {
        if symbol.im == 0.0 {
            self.set(m, n, symbol.re, role);
        } else if symbol.re == 0.0 {
            self.set_imaginary(m, n, symbol.im, role);
        } else {
            return Err(Error::Parameter(format!(
                "cell ({m}, {n}) symbol {symbol} is neither real nor imaginary"
            )));
        }
        Ok(())
    }

    pub fn value(&self, m: usize, n: usize) -> f64 {
        self.values[self.index(m, n)]
    }

    pub fn is_imaginary(&self, m: usize, n: usize) -> bool {
        self.imaginary[self.index(m, n)]
    }

    pub fn role(&self, m: usize, n: usize) -> CellRole {
        self.roles[self.index(m, n)]
    }

    /// Transmitted symbol before the `e^{j phi}` phase is applied.
    pub fn symbol(&self, m: usize, n: usize) -> Complex64 {
        let i = self.index(m, n);
        if self.imaginary[i] {
            Complex64::new(0.0, self.values[i])
        } else {
            Complex64::new(self.values[i], 0.0)
        }
    }

    /// Multiplies every cell by a real factor.
    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Sum of `|d|^2` over all cells.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Appends the symbols of `other` after the last symbol of `self`.
    pub fn concat(&self, other: &FrameGrid) -> Result<FrameGrid> {
        if other.m != self.m {
            return Err(Error::Dimension(format!(
                "cannot join grids with {} and {} subcarriers",
                self.m, other.m
            )));
        }
        let mut out = FrameGrid::new(self.m, self.n + other.n);
        for m in 0..self.m {
            for (src, offset) in [(self, 0), (other, self.n)] {
                for n in 0..src.n {
                    let i = src.index(m, n);
                    let j = out.index(m, n + offset);
                    out.values[j] = src.values[i];
                    out.imaginary[j] = src.imaginary[i];
                    out.roles[j] = src.roles[i];
                }
            }
        }
        Ok(out)
    }

    /// Copy of symbols `range` as a new grid.
    pub fn slice_symbols(&self, range: std::ops::Range<usize>) -> FrameGrid {
        let mut out = FrameGrid::new(self.m, range.len());
        for m in 0..self.m {
            for (k, n) in range.clone().enumerate() {
                let i = self.index(m, n);
                let j = out.index(m, k);
                out.values[j] = self.values[i];
                out.imaginary[j] = self.imaginary[i];
                out.roles[j] = self.roles[i];
            }
        }
        out
    }
}
