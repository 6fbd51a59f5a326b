//! Split-step Fourier simulation of dual-polarization WDM transmission:
//! root-raised-cosine shaping, Manakov propagation, EDFA chains with seeded
//! ASE, and a data-aided coherent receiver producing effective-SNR and GMI
//! measurements.

pub mod edfa;
pub mod error;
pub mod fiber;
pub mod grid;
pub mod rrc;
pub mod rx;
pub mod sim;
pub mod wdm;

pub use edfa::edfa;
pub use error::{Error, Result};
pub use fiber::propagate_span;
pub use grid::SignalGrid;
pub use rx::{rx_chain, RxResult};
pub use sim::{estimated_fft_work, run_transmission, sim_from_config, SimConfig};
pub use wdm::{build_wdm, DualPolSymbols};
