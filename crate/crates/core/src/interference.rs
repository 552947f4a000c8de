//! Intrinsic interference between OQAM time-frequency atoms.
//!
//! The weight `<g>^{p,q}_{m,n}` is the imaginary part of the inner product
//! `sum_l g_{m,n}(l) g*_{p,q}(l)` between a neighbouring atom `(m, n)` and the
//! target atom `(p, q)`. For the first-order `5 x 3` neighbourhood these
//! weights collapse to four scalars `beta`, `gamma`, `delta`, `epsilon` with a
//! fixed sign pattern that depends only on the parity of the target
//! subcarrier:
//!
//! ```text
//!            dq = -1     dq = 0    dq = +1
//! dp = -2     s*eps        0       -s*eps
//! dp = -1     s*delta    -beta      s*delta
//! dp =  0    -s*gamma     (d)       s*gamma
//! dp = +1     s*delta    +beta      s*delta
//! dp = +2     s*eps        0       -s*eps        s = (-1)^p
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fbcore::{atom, FrameGrid, PrototypeFilter};
use crate::{Error, Result};

const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Closed-form first-order interference weights of a prototype filter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct InterferenceTable {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
}

/// `5 x 3` weight matrix, rows `dp = -2..=2`, columns `dq = -1..=1`. The
/// centre entry (the target itself) is zero.
pub type Neighborhood = [[f64; 3]; 5];

impl InterferenceTable {
    pub fn new(beta: f64, gamma: f64, delta: f64, epsilon: f64) -> Self {
        Self {
            beta,
            gamma,
            delta,
            epsilon,
        }
    }

    /// Evaluates the four closed-form sums for `filter`.
    pub fn from_filter(filter: &PrototypeFilter) -> Result<Self> {
        closed_form_weights(filter)
    }

    /// Signed weights around a target on subcarrier `m`.
    pub fn neighborhood(&self, m: usize) -> Neighborhood {
        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
        let (b, g, d, e) = (self.beta, self.gamma, self.delta, self.epsilon);
        [
            [s * e, 0.0, -s * e],
            [s * d, -b, s * d],
            [-s * g, 0.0, s * g],
            [s * d, b, s * d],
            [s * e, 0.0, -s * e],
        ]
    }

    /// Weight at offset `(dp, dq)` from a target on subcarrier `m`; zero
    /// outside the `5 x 3` window.
    pub fn weight(&self, m: usize, dp: i64, dq: i64) -> f64 {
        if !(-2..=2).contains(&dp) || !(-1..=1).contains(&dq) {
            return 0.0;
        }
        self.neighborhood(m)[(dp + 2) as usize][(dq + 1) as usize]
    }

    /// Whether the preferred E-IAM-C layout for this filter is the
    /// `epsilon >= 0` one.
    pub fn epsilon_non_negative(&self) -> bool {
        self.epsilon >= 0.0
    }
}

/// Closed-form weights. Each sum must come out real to within `1e-10`; the
/// imaginary residue is then dropped.
pub fn closed_form_weights(filter: &PrototypeFilter) -> Result<InterferenceTable> {
    let g = filter.coefficients();
    let m = filter.subcarriers();
    let len = filter.len();
    let w = 2.0 * PI / m as f64;
    let centre_rot = Complex64::from_polar(1.0, -w * filter.centre());

    let beta = centre_rot
        * g.iter()
            .enumerate()
            .map(|(l, gl)| Complex64::from_polar(gl * gl, w * l as f64))
            .sum::<Complex64>();

    // Products g(l) g(l - M/2) over l = M/2 .. L_g - 1; empty when the
    // pulse is shorter than half a symbol.
    let half = m / 2;
    let lagged = |l: usize| g[l] * g[l - half];
    let range = half..len.max(half);

    let gamma: f64 = range.clone().map(lagged).sum();
    let delta = Complex64::new(0.0, -1.0)
        * centre_rot
        * range
            .clone()
            .map(|l| Complex64::from_polar(lagged(l), w * l as f64))
            .sum::<Complex64>();
    let epsilon = Complex64::from_polar(1.0, -w * (len as f64 - 1.0))
        * range
            .map(|l| Complex64::from_polar(lagged(l), 2.0 * w * l as f64))
            .sum::<Complex64>();

    for (name, v) in [("beta", beta), ("delta", delta), ("epsilon", epsilon)] {
        if v.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::Parameter(format!(
                "{name} has imaginary residue {:e}; prototype is not real symmetric",
                v.im
            )));
        }
    }
    Ok(InterferenceTable {
        beta: beta.re,
        gamma,
        delta: delta.re,
        epsilon: epsilon.re,
    })
}

/// `sum_l g_{m,n}(l) g*_{p,q}(l)` by direct summation.
///
/// Subcarrier indices may be negative or exceed `M`; atoms are evaluated
/// from their defining formula without reduction modulo `M`.
pub fn inner_product_bruteforce(
    filter: &PrototypeFilter,
    (m, n): (i64, usize),
    (p, q): (i64, usize),
) -> Complex64 {
    let half = filter.subcarriers() / 2;
    let start = n.max(q) * half;
    let end = n.min(q) * half + filter.len();
    (start..end.max(start))
        .map(|l| atom(filter, m, n, l) * atom(filter, p, q, l).conj())
        .sum()
}

/// How neighbours across the band edge (subcarrier `-1` vs `M - 1`) relate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    /// Frequency axis treated as exactly `M`-periodic.
    Periodic,
    /// The filter bank's own relation: wrapped atoms pick up
    /// [`PrototypeFilter::wrap_sign`].
    FilterBank(f64),
}

impl Boundary {
    pub fn of(filter: &PrototypeFilter) -> Self {
        Boundary::FilterBank(filter.wrap_sign())
    }

    fn sign(self) -> f64 {
        match self {
            Boundary::Periodic => 1.0,
            Boundary::FilterBank(s) => s,
        }
    }
}

/// Complex coupling factors from neighbouring symbols into a target's
/// analysis output, for both target parities.
///
/// A symbol `x` at offset `(dp, dq)` contributes `tap(dp, dq) * x` to the
/// target's pseudo-pilot; `tap(0, 0)` is the target's own gain.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceKernel {
    m: usize,
    freq_reach: i64,
    time_reach: i64,
    boundary: Boundary,
    taps: [Vec<Complex64>; 2],
}

#[derive(Debug, Clone, Copy)]
enum Unknown {
    Refuse,
    Skip,
    Include,
}

impl InterferenceKernel {
    /// First-order `5 x 3` kernel built from the closed-form table.
    pub fn first_order(table: &InterferenceTable, m: usize, boundary: Boundary) -> Self {
        let taps = [0usize, 1].map(|parity| {
            let mut v = Vec::with_capacity(15);
            for dp in -2..=2i64 {
                for dq in -1..=1i64 {
                    v.push(if dp == 0 && dq == 0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, table.weight(parity, dp, dq))
                    });
                }
            }
            v
        });
        Self {
            m,
            freq_reach: 2,
            time_reach: 1,
            boundary,
            taps,
        }
    }

    /// Kernel measured by brute-force inner products over
    /// `|dp| <= freq_reach`, `|dq| <= time_reach`.
    pub fn bruteforce(
        filter: &PrototypeFilter,
        freq_reach: usize,
        time_reach: usize,
        boundary: Boundary,
    ) -> Self {
        let (fr, tr) = (freq_reach as i64, time_reach as i64);
        let base_q = time_reach;
        let taps = [0i64, 1].map(|parity| {
            // Any target with the right parity works; the result does not
            // depend on the symbol index.
            let target = (parity, base_q);
            let mut v = Vec::with_capacity(((2 * fr + 1) * (2 * tr + 1)) as usize);
            for dp in -fr..=fr {
                for dq in -tr..=tr {
                    let nb = (parity + dp, (base_q as i64 + dq) as usize);
                    v.push(inner_product_bruteforce(filter, nb, target));
                }
            }
            v
        });
        Self {
            m: filter.subcarriers(),
            freq_reach: fr,
            time_reach: tr,
            boundary,
            taps,
        }
    }

    /// Kernel used by the receivers: reaches three symbols and three
    /// subcarriers in each direction, with the filter bank's band-edge sign.
    pub fn extended(filter: &PrototypeFilter) -> Self {
        Self::bruteforce(filter, 3, 3, Boundary::of(filter))
    }

    pub fn subcarriers(&self) -> usize {
        self.m
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn tap(&self, target_subcarrier: usize, dp: i64, dq: i64) -> Complex64 {
        if dp.abs() > self.freq_reach || dq.abs() > self.time_reach {
            return Complex64::new(0.0, 0.0);
        }
        let width = 2 * self.time_reach + 1;
        let idx = (dp + self.freq_reach) * width + (dq + self.time_reach);
        self.taps[target_subcarrier % 2][idx as usize]
    }

    fn accumulate(
        &self,
        frame: &FrameGrid,
        p: usize,
        q: usize,
        unknown: Unknown,
    ) -> Result<Complex64> {
        if frame.subcarriers() != self.m {
            return Err(Error::Dimension(format!(
                "frame has {} subcarriers, kernel built for {}",
                frame.subcarriers(),
                self.m
            )));
        }
        if p >= self.m || q >= frame.symbols() {
            return Err(Error::Parameter(format!(
                "target ({p}, {q}) outside the frame"
            )));
        }
        let m = self.m as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for dq in -self.time_reach..=self.time_reach {
            let n = q as i64 + dq;
            if n < 0 || n >= frame.symbols() as i64 {
                continue;
            }
            let n = n as usize;
            for dp in -self.freq_reach..=self.freq_reach {
                let tap = self.tap(p, dp, dq);
                if tap == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let raw = p as i64 + dp;
                let k = raw.rem_euclid(m) as usize;
                let role = frame.role(k, n);
                match (unknown, role.is_known()) {
                    (_, true) | (Unknown::Include, false) => {}
                    (Unknown::Skip, false) => continue,
                    (Unknown::Refuse, false) => {
                        return Err(Error::UnknownNeighbour {
                            subcarrier: p,
                            symbol: q,
                            nb_subcarrier: k,
                            nb_symbol: n,
                        })
                    }
                }
                let sign = if raw == k as i64 {
                    1.0
                } else {
                    self.boundary.sign()
                };
                acc += tap * frame.symbol(k, n) * sign;
            }
        }
        Ok(acc)
    }

    /// Pseudo-pilot `c_{p,q}`: the target symbol plus the interference from
    /// known neighbours. Fails if a neighbour within reach carries data the
    /// receiver does not know. Neighbours outside the frame's time span are
    /// not modelled.
    pub fn pseudo_pilot(&self, frame: &FrameGrid, p: usize, q: usize) -> Result<Complex64> {
        self.accumulate(frame, p, q, Unknown::Refuse)
    }

    /// Same sum as [`Self::pseudo_pilot`] but using every cell's value
    /// regardless of whether the receiver could know it.
    pub fn virtual_symbol(&self, frame: &FrameGrid, p: usize, q: usize) -> Result<Complex64> {
        self.accumulate(frame, p, q, Unknown::Include)
    }

    /// Contribution of the known cells only. Used by receivers whose
    /// preamble arranges the unknown neighbours to cancel.
    pub fn known_part(&self, frame: &FrameGrid, p: usize, q: usize) -> Result<Complex64> {
        self.accumulate(frame, p, q, Unknown::Skip)
    }
}

/// First-order pseudo-pilot with a periodic frequency axis:
/// `c_{p,q} = d_{p,q} + j sum_{Omega} d_{m,n} <g>^{p,q}_{m,n}`.
pub fn pseudo_pilot(
    frame: &FrameGrid,
    table: &InterferenceTable,
    p: usize,
    q: usize,
) -> Result<Complex64> {
    InterferenceKernel::first_order(table, frame.subcarriers(), Boundary::Periodic)
        .pseudo_pilot(frame, p, q)
}
