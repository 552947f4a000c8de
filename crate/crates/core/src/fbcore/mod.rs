//! Prototype filter, OQAM frame grid and the synthesis/analysis filter banks.

mod bank;
mod filter;
mod frame;
mod oqam;

pub(crate) use bank::atom;
pub use bank::{
    analyze, analyze_direct, synthesize, synthesize_direct, BasebandSignal, ComplexGrid, FilterBank,
};
pub use filter::PrototypeFilter;
pub use frame::{phase_factor, CellRole, FrameGrid};
pub use oqam::{oqam_destagger, oqam_stagger};
