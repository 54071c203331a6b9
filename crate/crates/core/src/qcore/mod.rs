//! Exact finite-dimensional quantum mechanics on small dense registers.

mod gate;
mod noise;
mod ops;
mod rng;
mod state;

pub use gate::Gate;
pub use noise::NoiseKind;
pub use ops::{
    apply_gate, haar_random_qubit, measure_probabilities, measure_qubit, partial_trace, tensor, Measurement,
    QuantumState,
};
pub use rng::SimRng;
pub use state::{fidelity, Complex, DensityOp, PureState, StateRef, ALGEBRAIC_TOL};
