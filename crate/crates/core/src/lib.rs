//! Mutual-information based waveform design for MIMO-OFDM integrated sensing
//! and communication.
//!
//! The crate synthesizes spatially and spectrally correlated channels,
//! evaluates sensing and communication mutual information, solves the three
//! optimal power-allocation problems (sensing-only, communication-only and
//! their normalized weighted sum) and runs Monte Carlo sweeps over them.
//!
//! ```
//! use isac_waveform::channel::{sensing_correlation_matrix, SystemDims, TapSet};
//! use isac_waveform::optimizer::{eig_sensing, waterfill};
//!
//! let dims = SystemDims { n_subcarriers: 8, ..SystemDims::default() };
//! let taps = TapSet::uniform(4, dims.n_tx, 0.5).unwrap();
//! let sigma = sensing_correlation_matrix(&taps, &dims).unwrap();
//! let eig = eig_sensing(sigma.full()).unwrap();
//! let alloc = waterfill(eig.eigenvalues(), 100.0, dims.noise_var).unwrap();
//! assert!((alloc.total() - 100.0).abs() < 1e-9);
//! ```

pub mod channel;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod mi;
pub mod optimizer;
pub mod oracle;
pub mod simulator;

pub use error::{IsacError, Result};
