//! Variational Quantum Harmonizer core: chords encoded as QUBO problems,
//! solved by a simulated VQE loop whose per-iteration marginals are
//! rendered as sound.

pub mod config;
pub mod optim;
pub mod qubo;
pub mod sonify;
pub mod statevector;
pub mod vqe;
