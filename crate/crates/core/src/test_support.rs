//! Deterministic random matrices for unit tests.

use crate::hilbert::{CMatrix, C64};
use crate::linalg;

pub(crate) struct XorShift(u64);

impl XorShift {
    pub(crate) fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    /// Uniform in `[-0.5, 0.5)`.
    pub(crate) fn next(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

/// Hermitian with unit trace, not necessarily positive.
pub(crate) fn random_hermitian(d: usize, seed: u64) -> CMatrix {
    let mut rng = XorShift::new(seed);
    let m = CMatrix::from_fn(d, d, |_, _| C64::new(rng.next(), rng.next()));
    let h = linalg::hermitian_part(&m);
    let tr = h.trace();
    h + CMatrix::identity(d, d) * ((C64::from(1.0) - tr) / d as f64)
}

/// A full-rank density matrix `GG† / tr(GG†)`.
pub(crate) fn random_density(d: usize, seed: u64) -> CMatrix {
    let mut rng = XorShift::new(seed);
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.next(), rng.next()));
    let m = &g * g.adjoint();
    let tr = m.trace();
    m / tr
}
