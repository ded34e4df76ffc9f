//! Hybrid quantum-classical binary classification on a built-in
//! statevector simulator.
//!
//! The pieces, bottom-up:
//!
//! - [`qstate`]: dense statevectors and gate application.
//! - [`circuits`]: parameterized templates (six built-in families) and
//!   angle embedding.
//! - [`gradients`]: parameter-shift Jacobians of `⟨Z⟩` outputs.
//! - [`expressibility`]: KL distance of a template's fidelity distribution
//!   from the Haar law.
//! - [`nn`]: dense layers, softmax cross-entropy, SGD and Adam.
//! - [`hybrid`]: the dressed classifier (dense → VQC → dense) and training.
//! - [`metrics`]: accuracy, ROC/AUC, precision–recall, reliability curves.
//! - [`data`] and [`cli`]: CSV datasets, synthetic generators, and the
//!   command-line pipeline.

pub mod circuits;
pub mod cli;
pub mod data;
pub mod error;
pub mod expressibility;
pub mod gradients;
pub mod hybrid;
pub mod metrics;
pub mod nn;
pub mod qstate;
pub mod seeding;

pub use error::{Error, Result};
