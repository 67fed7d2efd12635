//! Simulation of classical logic gates on a driven trapped-ion spin chain:
//! Toffoli, CNOT and Half-Adder programs with dynamical decoupling, their
//! outcome tables and classical fidelities, a Pauli-transfer-matrix noise
//! analysis of the gate-decomposed Half-Adder, and a microwave control-energy
//! model with an experiment-style energy ledger.

pub mod dynamics;
pub mod math;
pub mod metrics;
pub mod pulse;
