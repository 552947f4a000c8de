//! Preamble generators for every training family, SISO and MIMO.
//!
//! Grids follow the subcarrier-major layout of the frame module: row `m` is a
//! subcarrier, column `n` an OQAM symbol. Periodic layouts (IAM-R, IAM-C,
//! E-IAM-C, ICM-A, ICM-C) repeat with period four along frequency and so
//! require `M` to be a multiple of four.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fbcore::{CellRole, FrameGrid};
use crate::interference::InterferenceTable;
use crate::linalg::{condition_number, hadamard};
use crate::{Error, Result};

/// Where the free BPSK symbols of a preamble come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SymbolSource {
    Seeded(u64),
    Explicit(Vec<f64>),
}

/// Sign layout of the extended IAM-C side columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtendedLayout {
    EpsilonNonNegative,
    EpsilonNegative,
}

impl ExtendedLayout {
    /// Layout matching the sign of a filter's `epsilon` (zero counts as
    /// non-negative).
    pub fn for_table(table: &InterferenceTable) -> Self {
        if table.epsilon_non_negative() {
            ExtendedLayout::EpsilonNonNegative
        } else {
            ExtendedLayout::EpsilonNegative
        }
    }
}

/// The interference-approximation preamble variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IamVariant {
    /// Real pilots, `d_{p+1} = -d_{p-1}`.
    Real,
    /// Triplets `(a, -j a, -a)` with independently drawn `a`.
    Imaginary(SymbolSource),
    /// IAM-R with the odd subcarriers multiplied by `j`.
    Complex,
    /// IAM-C middle symbol plus nonzero side symbols.
    Extended(ExtendedLayout),
}

/// Structured data of the pairwise-cancellation layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StructuredSource {
    Seeded(u64),
    /// `a`, `b`, `c` are the three cells of subcarrier `M - 1`; `side[k]` is
    /// the data on both sides of the pilot at subcarrier `2k`.
    Explicit {
        a: f64,
        b: f64,
        c: f64,
        side: Vec<f64>,
    },
}

/// Optimal sparse MIMO layout: `N_t` pilot sets `p_i + k N`, `k < L_h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseLayout {
    pub channel_len: usize,
    pub starts: Vec<usize>,
    /// `D[r][i]`: pilot of antenna `i` on set `r`.
    pub pilots: Vec<Vec<f64>>,
}

impl SparseLayout {
    /// Layout with `p_i = 2 i` and a normalised Hadamard `D`.
    pub fn hadamard(channel_len: usize, antennas: usize) -> Result<Self> {
        let h = hadamard(antennas)?;
        let norm = (antennas as f64).sqrt().recip();
        Ok(Self {
            channel_len,
            starts: (0..antennas).map(|i| 2 * i).collect(),
            pilots: (0..antennas)
                .map(|r| (0..antennas).map(|i| h[(r, i)] * norm).collect())
                .collect(),
        })
    }

    /// Subcarrier spacing `N = M / L_h` between pilots of one set.
    pub fn spacing(&self, m: usize) -> usize {
        m / self.channel_len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Family {
    /// Pairs of pilots: `(-1)^p` followed by an all-zero symbol.
    Pop,
    Iam(IamVariant),
    /// Pilots on even subcarriers, nulls on odd ones.
    IcmA,
    /// Alternating-sign pilots whose adjacent-subcarrier interference cancels.
    IcmB,
    /// Pilots on even subcarriers surrounded by pairwise-cancelling data.
    IcmC(StructuredSource),
    /// A single alternating-sign pilot symbol.
    IcmD,
    /// Hadamard-coded repetition of a SISO IAM preamble.
    MimoIam(IamVariant),
    MimoSparse(SparseLayout),
    /// `2 N_r` symbols of well-conditioned BPSK.
    MimoPop {
        receive_antennas: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreambleSpec {
    pub family: Family,
    pub subcarriers: usize,
    pub transmit_antennas: usize,
    pub amplitude: f64,
}

impl PreambleSpec {
    pub fn new(family: Family, subcarriers: usize) -> Self {
        Self {
            family,
            subcarriers,
            transmit_antennas: 1,
            amplitude: 1.0,
        }
    }

    pub fn with_antennas(mut self, n: usize) -> Self {
        self.transmit_antennas = n;
        self
    }

    /// Number of OQAM symbols the preamble occupies.
    pub fn symbol_count(&self) -> usize {
        let nt = self.transmit_antennas;
        match &self.family {
            Family::Pop => 2,
            Family::Iam(_)
            | Family::IcmA
            | Family::IcmB
            | Family::IcmC(_)
            | Family::MimoSparse(_) => 3,
            Family::IcmD => 1,
            Family::MimoIam(IamVariant::Extended(_)) => 3 * nt,
            Family::MimoIam(_) => 2 * nt + 1,
            Family::MimoPop {
                receive_antennas, ..
            } => 2 * receive_antennas,
        }
    }

    /// Symbols at which the estimator reads the analysis output.
    pub fn pilot_symbols(&self) -> Vec<usize> {
        let nt = self.transmit_antennas;
        match &self.family {
            Family::Pop => vec![0, 1],
            Family::IcmD => vec![0],
            Family::MimoIam(IamVariant::Extended(_)) => (0..nt).map(|k| 3 * k + 1).collect(),
            Family::MimoIam(_) => (0..nt).map(|k| 2 * k + 1).collect(),
            Family::MimoPop {
                receive_antennas, ..
            } => (0..2 * receive_antennas).collect(),
            _ => vec![1],
        }
    }
}

fn require_period4(m: usize, what: &str) -> Result<()> {
    if m < 8 || m % 4 != 0 {
        return Err(Error::Parameter(format!(
            "{what} needs M to be a multiple of 4 and at least 8, got {m}"
        )));
    }
    Ok(())
}

fn bpsk(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

/// Generates one grid per transmit antenna.
pub fn generate(spec: &PreambleSpec) -> Result<Vec<FrameGrid>> {
    let m = spec.subcarriers;
    let nt = spec.transmit_antennas;
    if nt == 0 {
        return Err(Error::Parameter(
            "at least one transmit antenna is required".into(),
        ));
    }
    if !(spec.amplitude > 0.0) || !spec.amplitude.is_finite() {
        return Err(Error::Parameter(format!(
            "pilot amplitude {} must be positive",
            spec.amplitude
        )));
    }
    if m < 8 || m % 2 != 0 {
        return Err(Error::Parameter(format!(
            "M = {m} must be even and at least 8"
        )));
    }
    let d = spec.amplitude;
    let siso = |what: &str| -> Result<()> {
        if nt != 1 {
            return Err(Error::Parameter(format!(
                "{what} is a single-antenna preamble"
            )));
        }
        Ok(())
    };
    let mut frames = match &spec.family {
        Family::Pop => {
            siso("POP")?;
            let mut f = FrameGrid::new(m, 2);
            for p in 0..m {
                f.set(p, 0, alt(p) * d, CellRole::Pilot);
            }
            vec![f]
        }
        Family::Iam(variant) => {
            siso("SISO IAM")?;
            vec![iam_frame(variant, m, d)?]
        }
        Family::IcmA => {
            siso("ICM-A")?;
            require_period4(m, "ICM-A")?;
            let mut f = FrameGrid::new(m, 3);
            for p in (0..m).step_by(2) {
                f.set(p, 1, alt(p / 2) * d, CellRole::Pilot);
            }
            vec![f]
        }
        Family::IcmB => {
            siso("ICM-B")?;
            let mut f = FrameGrid::new(m, 3);
            for p in 0..m {
                f.set(p, 1, alt(p) * d, CellRole::Pilot);
            }
            vec![f]
        }
        Family::IcmC(source) => {
            siso("ICM-C")?;
            vec![icm_c_frame(source, m, d)?]
        }
        Family::IcmD => {
            siso("ICM-D")?;
            let mut f = FrameGrid::new(m, 1);
            for p in 0..m {
                f.set(p, 0, alt(p) * d, CellRole::Pilot);
            }
            vec![f]
        }
        Family::MimoIam(variant) => mimo_iam_frames(variant, m, nt, d)?,
        Family::MimoSparse(layout) => sparse_frames(layout, m, nt, d)?,
        Family::MimoPop {
            receive_antennas,
            seed,
        } => mimo_pop_frames(m, nt, *receive_antennas, *seed, d)?,
    };
    debug_assert!(frames.iter().all(|f| f.symbols() == spec.symbol_count()));
    frames.shrink_to_fit();
    Ok(frames)
}

fn alt(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Middle-column symbols of IAM-R (`1, -1, -1, 1, ...`).
fn iam_r_symbol(p: usize) -> f64 {
    [1.0, -1.0, -1.0, 1.0][p % 4]
}

/// Middle-column symbols of IAM-C (`1, -j, -1, j, ...`).
fn iam_c_symbol(p: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ][p % 4]
}

/// Side columns (left, right) of extended IAM-C.
fn extended_side_symbols(layout: ExtendedLayout, p: usize) -> (Complex64, Complex64) {
    let j = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let left = match layout {
        // Each quadruple of the middle column in reverse order.
        ExtendedLayout::EpsilonNonNegative => [j, -one, -j, one][p % 4],
        ExtendedLayout::EpsilonNegative => [-one, -j, -one, -j][p % 4],
    };
    (left, -left)
}

/// Middle column of an IAM-I preamble: triplets `(a, -j a, -a)` starting at
/// subcarrier 0. When `M mod 3 = 2` the last triplet wraps onto subcarrier 0
/// and its seed is forced; when `M mod 3 = 1` the last subcarrier carries a
/// lone real pilot.
fn iam_i_column(source: &SymbolSource, m: usize) -> Result<Vec<Complex64>> {
    let full = m / 3;
    let free = full + usize::from(m % 3 == 1);
    let seeds: Vec<f64> = match source {
        SymbolSource::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..free).map(|_| bpsk(&mut rng)).collect()
        }
        SymbolSource::Explicit(v) => {
            if v.len() != free {
                return Err(Error::Parameter(format!(
                    "IAM-I with M = {m} needs {free} triplet symbols, got {}",
                    v.len()
                )));
            }
            v.clone()
        }
    };
    let mut col = vec![Complex64::new(0.0, 0.0); m];
    for (t, &a) in seeds.iter().take(full).enumerate() {
        col[3 * t] = Complex64::new(a, 0.0);
        col[3 * t + 1] = Complex64::new(0.0, -a);
        col[3 * t + 2] = Complex64::new(-a, 0.0);
    }
    match m % 3 {
        2 => {
            let a = -col[0].re;
            col[m - 2] = Complex64::new(a, 0.0);
            col[m - 1] = Complex64::new(0.0, -a);
        }
        1 => col[m - 1] = Complex64::new(seeds[full], 0.0),
        _ => {}
    }
    Ok(col)
}

fn set_symbol(f: &mut FrameGrid, p: usize, n: usize, x: Complex64, role: CellRole) {
    f.set_symbol(p, n, x, role)
        .expect("preamble symbols are real or imaginary");
}

/// Three columns `(left, middle, right)` of a SISO IAM preamble.
fn iam_columns(variant: &IamVariant, m: usize) -> Result<[Vec<Complex64>; 3]> {
    let zero = vec![Complex64::new(0.0, 0.0); m];
    Ok(match variant {
        IamVariant::Real => {
            require_period4(m, "IAM-R")?;
            [
                zero.clone(),
                (0..m)
                    .map(|p| Complex64::new(iam_r_symbol(p), 0.0))
                    .collect(),
                zero,
            ]
        }
        IamVariant::Imaginary(source) => [zero.clone(), iam_i_column(source, m)?, zero],
        IamVariant::Complex => {
            require_period4(m, "IAM-C")?;
            [zero.clone(), (0..m).map(iam_c_symbol).collect(), zero]
        }
        IamVariant::Extended(layout) => {
            require_period4(m, "E-IAM-C")?;
            let sides: Vec<_> = (0..m).map(|p| extended_side_symbols(*layout, p)).collect();
            [
                sides.iter().map(|s| s.0).collect(),
                (0..m).map(iam_c_symbol).collect(),
                sides.iter().map(|s| s.1).collect(),
            ]
        }
    })
}

fn iam_frame(variant: &IamVariant, m: usize, d: f64) -> Result<FrameGrid> {
    let cols = iam_columns(variant, m)?;
    let mut f = FrameGrid::new(m, 3);
    for (n, col) in cols.iter().enumerate() {
        for (p, &x) in col.iter().enumerate() {
            if x != Complex64::new(0.0, 0.0) {
                set_symbol(&mut f, p, n, x * d, CellRole::Pilot);
            }
        }
    }
    Ok(f)
}

fn icm_c_frame(source: &StructuredSource, m: usize, d: f64) -> Result<FrameGrid> {
    require_period4(m, "ICM-C")?;
    let pilots = m / 2;
    let (a, b, c, side) = match source {
        StructuredSource::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let a = bpsk(&mut rng);
            let b = bpsk(&mut rng);
            let c = bpsk(&mut rng);
            (
                a,
                b,
                c,
                (0..pilots).map(|_| bpsk(&mut rng)).collect::<Vec<_>>(),
            )
        }
        StructuredSource::Explicit { a, b, c, side } => {
            if side.len() != pilots {
                return Err(Error::Parameter(format!(
                    "ICM-C with M = {m} needs {pilots} side symbols"
                )));
            }
            (*a, *b, *c, side.clone())
        }
    };
    let mut f = FrameGrid::new(m, 3);
    for p in 0..m {
        if p % 2 == 0 {
            f.set(p, 0, side[p / 2] * d, CellRole::StructuredData);
            f.set(p, 1, d, CellRole::Pilot);
            f.set(p, 2, side[p / 2] * d, CellRole::StructuredData);
        } else {
            // Row p sits below pilot p - 1 as (-a, b, -c) and above pilot
            // p + 1 as (a, b, c); the outer entries alternate in sign.
            let s = alt((p + 1) / 2);
            f.set(p, 0, s * a * d, CellRole::StructuredData);
            f.set(p, 1, b * d, CellRole::StructuredData);
            f.set(p, 2, s * c * d, CellRole::StructuredData);
        }
    }
    Ok(f)
}

fn mimo_iam_frames(variant: &IamVariant, m: usize, nt: usize, d: f64) -> Result<Vec<FrameGrid>> {
    let a = hadamard(nt).map_err(|_| {
        Error::Parameter(format!(
            "MIMO IAM needs a power-of-two number of transmit antennas, got {nt}"
        ))
    })?;
    let cols = iam_columns(variant, m)?;
    let extended = matches!(variant, IamVariant::Extended(_));
    let n = if extended { 3 * nt } else { 2 * nt + 1 };
    let mut frames = Vec::with_capacity(nt);
    for i in 0..nt {
        let mut f = FrameGrid::new(m, n);
        for k in 0..nt {
            let sign = a[(i, k)];
            let placement: Vec<(usize, &Vec<Complex64>)> = if extended {
                (0..3).map(|c| (3 * k + c, &cols[c])).collect()
            } else {
                vec![(2 * k + 1, &cols[1])]
            };
            for (q, col) in placement {
                for (p, &x) in col.iter().enumerate() {
                    if x != Complex64::new(0.0, 0.0) {
                        set_symbol(&mut f, p, q, x * sign * d, CellRole::Pilot);
                    }
                }
            }
        }
        frames.push(f);
    }
    Ok(frames)
}

/// Checks the sparse-layout feasibility conditions.
pub fn validate_sparse(layout: &SparseLayout, m: usize, nt: usize) -> Result<()> {
    let lh = layout.channel_len;
    if lh == 0 || m % lh != 0 {
        return Err(Error::Parameter(format!(
            "M = {m} is not a multiple of L_h = {lh}"
        )));
    }
    let spacing = m / lh;
    if spacing < 2 * nt {
        return Err(Error::Parameter(format!(
            "pilot spacing N = {spacing} is below 2 N_t = {}",
            2 * nt
        )));
    }
    if layout.starts.len() != nt
        || layout.pilots.len() != nt
        || layout.pilots.iter().any(|r| r.len() != nt)
    {
        return Err(Error::Parameter(format!(
            "sparse layout needs {nt} starts and an {nt}x{nt} pilot matrix"
        )));
    }
    for (i, &pi) in layout.starts.iter().enumerate() {
        if pi >= spacing {
            return Err(Error::Parameter(format!(
                "start {pi} is outside 0..{spacing}"
            )));
        }
        for &pj in &layout.starts[i + 1..] {
            let gap = pi.abs_diff(pj);
            if gap.min(spacing - gap) < 2 {
                return Err(Error::Parameter(format!(
                    "pilot sets {pi} and {pj} need a null subcarrier between them"
                )));
            }
        }
    }
    // D D^T must be a multiple of the identity.
    let gram = |r: usize, s: usize| -> f64 {
        (0..nt)
            .map(|i| layout.pilots[r][i] * layout.pilots[s][i])
            .sum()
    };
    let scale = gram(0, 0);
    if !(scale > 0.0) {
        return Err(Error::Parameter("pilot matrix has a zero row".into()));
    }
    for r in 0..nt {
        for s in 0..nt {
            let expect = if r == s { scale } else { 0.0 };
            if (gram(r, s) - expect).abs() > 1e-12 * scale {
                return Err(Error::Parameter(
                    "pilot matrix D is not unitary up to scale".into(),
                ));
            }
        }
    }
    Ok(())
}

fn sparse_frames(layout: &SparseLayout, m: usize, nt: usize, d: f64) -> Result<Vec<FrameGrid>> {
    validate_sparse(layout, m, nt)?;
    let spacing = layout.spacing(m);
    let mut frames = vec![FrameGrid::new(m, 3); nt];
    for (i, f) in frames.iter_mut().enumerate() {
        for (r, &start) in layout.starts.iter().enumerate() {
            for k in 0..layout.channel_len {
                f.set(
                    start + k * spacing,
                    1,
                    layout.pilots[r][i] * d,
                    CellRole::Pilot,
                );
            }
        }
    }
    Ok(frames)
}

/// Maximum condition number accepted for a per-subcarrier MIMO POP pilot
/// matrix.
pub const POP_MAX_CONDITION: f64 = 10.0;

fn mimo_pop_frames(m: usize, nt: usize, nr: usize, seed: u64, d: f64) -> Result<Vec<FrameGrid>> {
    if nr < nt {
        return Err(Error::Parameter(format!(
            "MIMO POP needs N_r >= N_t, got N_r = {nr}, N_t = {nt}"
        )));
    }
    let n = 2 * nr;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frames = vec![FrameGrid::new(m, n); nt];
    for p in 0..m {
        let block = loop {
            let candidate = nalgebra::DMatrix::from_fn(nt, n, |_, _| bpsk(&mut rng));
            if condition_number(&candidate) < POP_MAX_CONDITION {
                break candidate;
            }
        };
        for (i, f) in frames.iter_mut().enumerate() {
            for q in 0..n {
                f.set(p, q, block[(i, q)] * d, CellRole::Pilot);
            }
        }
    }
    Ok(frames)
}

/// Analytic pseudo-pilot magnitude per subcarrier for the SISO IAM
/// families.
pub fn predicted_magnitudes(spec: &PreambleSpec, table: &InterferenceTable) -> Result<Vec<f64>> {
    let m = spec.subcarriers;
    let d = spec.amplitude;
    let (b, g, e) = (table.beta, table.gamma, table.epsilon);
    let variant = match &spec.family {
        Family::Iam(v) if spec.transmit_antennas == 1 => v,
        other => {
            return Err(Error::Unsupported(format!(
                "no magnitude formula for {other:?}"
            )))
        }
    };
    match variant {
        IamVariant::Real => Ok(vec![d * (1.0 + 4.0 * b * b).sqrt(); m]),
        IamVariant::Complex => Ok(vec![d * (1.0 + 2.0 * b); m]),
        IamVariant::Extended(ExtendedLayout::EpsilonNonNegative) => {
            Ok(vec![d * (1.0 + 2.0 * (b + g + 2.0 * e)).abs(); m])
        }
        IamVariant::Extended(ExtendedLayout::EpsilonNegative) => {
            Ok(vec![
                d * ((1.0 + 2.0 * b).powi(2)
                    + 4.0 * (g - 2.0 * e).powi(2))
                .sqrt();
                m
            ])
        }
        IamVariant::Imaginary(source) => {
            let col = iam_i_column(source, m)?;
            let imag = |k: usize| col[k].im != 0.0;
            Ok((0..m)
                .map(|p| {
                    let (lo, hi) = ((p + m - 1) % m, (p + 1) % m);
                    match (imag(p), imag(lo), imag(hi)) {
                        // Triplet centre, or a real pilot flanked by two centres.
                        (true, _, _) | (false, true, true) => d * (1.0 + 2.0 * b),
                        (false, true, false) | (false, false, true) => {
                            d * ((1.0 + b).powi(2) + b * b).sqrt()
                        }
                        (false, false, false) => {
                            // Lone pilot between two real pilots.
                            let u = b * (col[hi].re - col[lo].re);
                            d * (col[p].re.powi(2) + u * u).sqrt()
                        }
                    }
                })
                .collect())
        }
    }
}
