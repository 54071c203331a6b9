//! Brute-force reference for the operational attack metric.
//!
//! Builds the whole five-qubit picture `(bob_1, kept, forwarded, ancilla,
//! bob_2)` with explicit Kronecker products and evaluates the two SWAP-test
//! acceptances as the symmetric-subspace projectors `(I + SWAP)/2`. Nothing
//! here goes through the circuit simulator, the cloner tables or the
//! measurement code, so it can check them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C;

use crate::error::Result;

use super::cloner::asymmetric_weights;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleProbabilities {
    /// Eve's clone passes and Alice's returned qubit passes.
    pub both_pass: f64,
    pub clone_pass: f64,
    pub forwarded_pass: f64,
}

fn ket(bits: &[usize]) -> DVector<C> {
    bits.iter().fold(DVector::from_element(1, C::new(1.0, 0.0)), |acc, &b| {
        let mut e = DVector::zeros(2);
        e[b] = C::new(1.0, 0.0);
        acc.kronecker(&e)
    })
}

fn bell_plus() -> DVector<C> {
    (ket(&[0, 0]) + ket(&[1, 1])) * C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

fn psi_plus() -> DVector<C> {
    (ket(&[0, 1]) + ket(&[1, 0])) * C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

fn isometry(columns: [DVector<C>; 2]) -> DMatrix<C> {
    DMatrix::from_columns(&columns)
}

/// Symmetric machine written out from its defining map.
pub fn symmetric_isometry() -> DMatrix<C> {
    let big = C::new((2.0f64 / 3.0).sqrt(), 0.0);
    let small = C::new((1.0f64 / 3.0).sqrt(), 0.0);
    let v0 = ket(&[0, 0, 1]) * big + psi_plus().kronecker(&ket(&[0])) * small;
    let v1 = ket(&[1, 1, 0]) * big + psi_plus().kronecker(&ket(&[1])) * small;
    isometry([v0, v1])
}

/// Asymmetric machine; qubit order `(kept, forwarded, ancilla)`.
pub fn asymmetric_isometry(t: f64) -> Result<DMatrix<C>> {
    let (a, b) = asymmetric_weights(t)?;
    let col = |j: usize| {
        // a |j>_fwd |Phi+>_(kept,anc): permute (fwd, kept, anc) -> (kept, fwd, anc)
        let fwd_first = ket(&[j]).kronecker(&bell_plus());
        let identity_route = permute_qubits(&fwd_first, &[1, 0, 2]);
        let swap_route = ket(&[j]).kronecker(&bell_plus());
        identity_route * C::new(a, 0.0) + swap_route * C::new(b, 0.0)
    };
    Ok(isometry([col(0), col(1)]))
}

/// Reorder tensor factors: output qubit `i` is input qubit `order[i]`.
fn permute_qubits(v: &DVector<C>, order: &[usize]) -> DVector<C> {
    let n = order.len();
    let mut out = DVector::zeros(v.len());
    for x in 0..v.len() {
        let bits: Vec<usize> = (0..n).map(|q| (x >> (n - 1 - q)) & 1).collect();
        let y = order.iter().fold(0, |acc, &src| acc << 1 | bits[src]);
        out[y] = v[x];
    }
    out
}

fn swap_operator(n: usize, a: usize, b: usize) -> DMatrix<C> {
    let order: Vec<usize> = (0..n).map(|q| if q == a { b } else if q == b { a } else { q }).collect();
    let d = 1 << n;
    let mut m = DMatrix::zeros(d, d);
    for x in 0..d {
        let e = DVector::from_fn(d, |i, _| if i == x { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) });
        m.set_column(x, &permute_qubits(&e, &order));
    }
    m
}

fn symmetric_projector(n: usize, a: usize, b: usize) -> DMatrix<C> {
    (DMatrix::identity(1 << n, 1 << n) + swap_operator(n, a, b)) * C::new(0.5, 0.0)
}

/// Acceptance probabilities when `input` is cloned and each clone is
/// SWAP-tested against a fresh copy of `input`.
pub fn clone_test_probabilities(v: &DMatrix<C>, input: [C; 2]) -> OracleProbabilities {
    let phi = DVector::from_column_slice(&input);
    let out = v * &phi;
    let full = phi.kronecker(&out).kronecker(&phi);
    let rho = &full * full.adjoint();
    let p_clone = symmetric_projector(5, 0, 1);
    let p_fwd = symmetric_projector(5, 2, 4);
    let expect = |op: &DMatrix<C>| (op * &rho).trace().re;
    OracleProbabilities {
        both_pass: expect(&(&p_clone * &p_fwd)),
        clone_pass: expect(&p_clone),
        forwarded_pass: expect(&p_fwd),
    }
}

/// Single-qubit operational success of the symmetric machine (input `|0>`;
/// the machine is universal, so any input gives the same value).
pub fn symmetric_operational_success() -> f64 {
    clone_test_probabilities(&symmetric_isometry(), [C::new(1.0, 0.0), C::new(0.0, 0.0)]).both_pass
}
