//! Scalar figures of merit evaluated on a density matrix.
//!
//! Quantities that are undefined for a given state (a photon correlation of
//! an empty cavity, a ratio over a vanishing excited population) are `None`.

use nalgebra::Matrix4;

use crate::hilbert::{atomic_sigma, expectation, CMatrix, DensityMatrix, C64};
use crate::linalg;

/// Below this photon number `g⁽²⁾(0)` is reported as undefined.
pub const G2_PHOTON_THRESHOLD: f64 = 1e-12;
/// Below this excited population the photon ratio is reported as undefined.
pub const RATIO_P33_THRESHOLD: f64 = 1e-14;
/// Projected weight below which the concurrence is reported as zero.
pub const CONCURRENCE_TRACE_THRESHOLD: f64 = 1e-10;

/// `⟨a†a⟩`.
pub fn photon_number(rho: &DensityMatrix) -> f64 {
    rho.photon_distribution()
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// `⟨σ₃₃⟩`.
pub fn excited_population(rho: &DensityMatrix) -> f64 {
    let s33 = atomic_sigma(3, 3, rho.spec()).expect("level 3 exists");
    expectation(rho, &s33).expect("same space").re
}

/// `⟨a†²a²⟩ = Σ n(n−1) P(n)`.
pub fn second_factorial_moment(rho: &DensityMatrix) -> f64 {
    rho.photon_distribution()
        .iter()
        .enumerate()
        .map(|(n, p)| (n as f64) * (n as f64 - 1.0) * p)
        .sum()
}

/// Equal-time correlation `⟨a†²a²⟩/⟨a†a⟩²`.
pub fn g2_zero(rho: &DensityMatrix) -> Option<f64> {
    let n = photon_number(rho);
    (n >= G2_PHOTON_THRESHOLD).then(|| second_factorial_moment(rho) / (n * n))
}

/// `⟨a†a⟩/⟨σ₃₃⟩`.
pub fn photon_ratio(rho: &DensityMatrix) -> Option<f64> {
    let p33 = excited_population(rho);
    (p33 >= RATIO_P33_THRESHOLD).then(|| photon_number(rho) / p33)
}

/// Concurrence together with the weight of the state inside the two-qubit
/// subspace it was evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceReport {
    pub concurrence: f64,
    pub projected_trace: f64,
}

/// Wootters concurrence of the block of `ρ` on `{|1⟩,|2⟩} ⊗ {|0⟩,|1⟩}`,
/// renormalized by its trace.
///
/// The qubit basis is ordered `|1,0⟩, |1,1⟩, |2,0⟩, |2,1⟩` and complex
/// conjugation is taken in that product basis.
pub fn concurrence_report(rho: &DensityMatrix) -> ConcurrenceReport {
    let spec = rho.spec();
    let idx = [
        spec.index(1, 0).unwrap(),
        spec.index(1, 1).unwrap(),
        spec.index(2, 0).unwrap(),
        spec.index(2, 1).unwrap(),
    ];
    let block = Matrix4::from_fn(|i, j| rho.matrix()[(idx[i], idx[j])]);
    let projected_trace = block.trace().re;
    if projected_trace < CONCURRENCE_TRACE_THRESHOLD {
        return ConcurrenceReport {
            concurrence: 0.0,
            projected_trace,
        };
    }
    let block = block / C64::from(projected_trace);
    ConcurrenceReport {
        concurrence: wootters(&block),
        projected_trace,
    }
}

pub fn concurrence_2x2(rho: &DensityMatrix) -> f64 {
    concurrence_report(rho).concurrence
}

/// `max(0, λ₁−λ₂−λ₃−λ₄)` with `λᵢ` the decreasing square roots of the
/// spectrum of `ρ(σ_y⊗σ_y)ρ*(σ_y⊗σ_y)`.
///
/// With `ρ = Σ vᵢvᵢ†` over subnormalized eigenvectors, the `λᵢ` are the
/// singular values of `τᵢⱼ = vᵢᵀ(σ_y⊗σ_y)vⱼ`. Working with `τ` keeps the
/// rounding error of nearly separable states at machine precision instead of
/// its square root.
pub fn wootters(rho: &Matrix4<C64>) -> f64 {
    let r = CMatrix::from_fn(4, 4, |i, j| rho[(i, j)]);
    // σ_y⊗σ_y is real: antidiagonal (−1, 1, 1, −1).
    let yy = CMatrix::from_fn(4, 4, |i, j| match (i, j) {
        (0, 3) | (3, 0) => C64::new(-1.0, 0.0),
        (1, 2) | (2, 1) => C64::new(1.0, 0.0),
        _ => C64::new(0.0, 0.0),
    });
    let (values, vectors) = linalg::hermitian_eigen(&r);
    let v = CMatrix::from_fn(4, 4, |i, j| vectors[(i, j)] * values[j].max(0.0).sqrt());
    let tau = v.transpose() * yy * &v;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Every observable the sweep tools know how to report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableSet {
    pub n_photon: f64,
    pub p33: f64,
    pub g2_zero: Option<f64>,
    pub ratio: Option<f64>,
    pub concurrence: f64,
    pub projected_trace: f64,
}

impl ObservableSet {
    pub fn evaluate(rho: &DensityMatrix) -> Self {
        let c = concurrence_report(rho);
        ObservableSet {
            n_photon: photon_number(rho),
            p33: excited_population(rho).clamp(0.0, 1.0),
            g2_zero: g2_zero(rho),
            ratio: photon_ratio(rho),
            concurrence: c.concurrence,
            projected_trace: c.projected_trace,
        }
    }
}
