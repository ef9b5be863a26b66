//! Metered complex QR decompositions, parallel Givens scheduling and
//! QRD-based MIMO detection.
//!
//! * [`linalg`]: complex matrices and MUL-cost metering.
//! * [`qrd`]: Gram-Schmidt, Householder and Givens factorizations.
//! * [`schedule`]: round-based Givens schedule and pipe simulation.
//! * [`complexity`]: closed-form MUL counts versus metered runs.
//! * [`detect`]: ZF, MMSE, SIC, sphere decoding, QRD-M and ML.
//! * [`channel`]: Rayleigh channels, QPSK and the BER driver.

pub mod channel;
pub mod complexity;
pub mod detect;
pub mod linalg;
pub mod qrd;
pub mod schedule;

pub use linalg::{ComplexMatrix, ComplexScalar, CostLedger};
pub use qrd::{QrFactorization, QrdError, QrdMethod};
