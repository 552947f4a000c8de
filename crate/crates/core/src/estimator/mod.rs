//! Channel estimators operating on analysis filter bank outputs.
//!
//! Every estimator takes one analysis grid per receive antenna and returns
//! the CFR as an `N_r x N_t` matrix per subcarrier. Subcarriers where an
//! estimator cannot produce a finite value are left as `None` and counted as
//! excluded by [`nmse`].

mod iam;
mod icm;
mod pop;
mod sparse;

pub use iam::{iam_estimate, mimo_iam_estimate, mimo_pseudo_pilot_matrices, pseudo_pilots};
pub use icm::{icm_estimate, interpolate_circular};
pub use pop::{mimo_pop_estimate, pop_estimate};
pub use sparse::{sparse_impulse_response, sparse_ls_estimate, sparse_system_matrix, SparseSolver};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::fbcore::ComplexGrid;
use crate::linalg::CMatrix;
use crate::{Error, Result};

/// Smallest pilot or denominator magnitude an estimator will divide by.
pub const DEGENERATE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CfrEstimate {
    pub method: String,
    h: Vec<Option<CMatrix>>,
}

impl CfrEstimate {
    pub fn new(method: impl Into<String>, h: Vec<Option<CMatrix>>) -> Self {
        Self {
            method: method.into(),
            h,
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.h.len()
    }

    pub fn get(&self, p: usize) -> Option<&CMatrix> {
        self.h[p].as_ref()
    }

    pub fn values(&self) -> &[Option<CMatrix>] {
        &self.h
    }

    pub fn excluded(&self) -> usize {
        self.h.iter().filter(|h| h.is_none()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NmseOutcome {
    pub value: f64,
    pub excluded: usize,
}

/// `||H - H_hat||_F^2 / ||H||_F^2` over the subcarriers the estimate covers.
pub fn nmse(truth: &ChannelRealization, est: &CfrEstimate) -> Result<NmseOutcome> {
    let cfr = truth.cfr();
    if cfr.len() != est.subcarriers() {
        return Err(Error::Dimension(format!(
            "truth has {} subcarriers, estimate {}",
            cfr.len(),
            est.subcarriers()
        )));
    }
    let (mut err, mut norm) = (0.0, 0.0);
    for (h, e) in cfr.iter().zip(est.values()) {
        let Some(e) = e else { continue };
        if e.shape() != h.shape() {
            return Err(Error::Dimension(format!(
                "estimate is {:?}, truth {:?}",
                e.shape(),
                h.shape()
            )));
        }
        err += (h - e).norm_squared();
        norm += h.norm_squared();
    }
    if !(norm > 0.0) {
        return Err(Error::Undefined(
            "NMSE is undefined for a zero channel".into(),
        ));
    }
    Ok(NmseOutcome {
        value: err / norm,
        excluded: est.excluded(),
    })
}

fn check_grids(y: &[ComplexGrid], m: usize, symbols: usize) -> Result<()> {
    if y.is_empty() {
        return Err(Error::Dimension("no receive antennas".into()));
    }
    for g in y {
        if g.subcarriers() != m || g.symbols() < symbols {
            return Err(Error::Dimension(format!(
                "analysis grid is {}x{}, need {m} subcarriers and {symbols} symbols",
                g.subcarriers(),
                g.symbols()
            )));
        }
    }
    Ok(())
}
