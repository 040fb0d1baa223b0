//! Analytics for a ground-state drive much stronger than `g` and `Ω₂₃`.
//!
//! The drive `V` splits the ground states into `|±⟩ = (|1⟩ ± |2⟩)/√2` at
//! energies `±Ω₁₂`. Eliminating the far-detuned excited state leaves, in the
//! frame rotating with `V`,
//!
//! ```text
//! H_eff = (δ a†a + θ + λ(a + a†)) σ₊₊ − (δ a†a + θ − λ(a + a†)) σ₋₋
//! δ = g²/2Ω₁₂,  θ = Ω₂₃²/2Ω₁₂,  λ = gΩ₂₃/2Ω₁₂
//! ```
//!
//! Each branch is a displaced, detuned oscillator, so a vacuum start gives
//! coherent states `α± = ±(Ω₂₃/g)(e^{∓iδt} − 1)` carrying a branch phase
//! `∓(Ω₂₃/g)² sin δt`, and cavity damping at field rate `κ` relaxes each
//! branch to `β± = −i gΩ₂₃ / (2Ω₁₂κ ± i g²)`.
//!
//! The sign in front of each branch follows from second-order elimination
//! under the Hamiltonian in [`crate::model`]: the `|+⟩` branch lies above the
//! excited state and is pushed up.
//!
//! Exact-model states are compared after undoing the drive rotation with
//! [`drive_frame`].

use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::hilbert::{annihilation, atomic_sigma, CMatrix, CVector, HilbertSpec, Operator, StateVector, C64};
use crate::linalg;
use crate::model::SystemParams;

/// Tail weight a truncated coherent state may lose before it is rejected.
pub const COHERENT_TAIL: f64 = 1e-10;

/// `(δ, θ, λ)` of the strong-drive effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongConstants {
    pub delta: f64,
    pub theta: f64,
    pub lambda: f64,
}

impl StrongConstants {
    pub fn new(p: &SystemParams) -> Result<Self> {
        if !(p.omega12 > 0.0) {
            return Err(Error::DriveVanishes);
        }
        let w = 2.0 * p.omega12;
        Ok(StrongConstants {
            delta: p.g * p.g / w,
            theta: p.omega23 * p.omega23 / w,
            lambda: p.g * p.omega23 / w,
        })
    }
}

/// Rotation angle `θ_rot = g²t/2Ω₁₂` reached at time `t`.
pub fn rotation_angle(t: f64, p: &SystemParams) -> Result<f64> {
    Ok(StrongConstants::new(p)?.delta * t)
}

/// Time at which the rotation angle reaches `theta_rot`.
pub fn time_for_angle(theta_rot: f64, p: &SystemParams) -> Result<f64> {
    let c = StrongConstants::new(p)?;
    if c.delta == 0.0 {
        return Err(Error::Singular("g = 0 gives no phase-space rotation"));
    }
    Ok(theta_rot / c.delta)
}

/// `|±⟩⟨±|` on the atom, identity on the cavity.
pub fn sigma_pm(sign: f64, spec: HilbertSpec) -> Operator {
    let s = |k, l| atomic_sigma(k, l, spec).expect("levels 1 and 2 exist");
    (s(1, 1) + s(2, 2) + (s(1, 2) + s(2, 1)) * sign) * 0.5
}

/// Effective Hamiltonian of the strong-drive regime, in the frame rotating
/// with the ground-state drive.
pub fn eff_hamiltonian_strong(p: &SystemParams, spec: HilbertSpec) -> Result<Operator> {
    let c = StrongConstants::new(p)?;
    let a = annihilation(spec);
    let n = a.adjoint().compose(&a)?;
    let quad = a.clone() + a.adjoint();
    let id = Operator::identity(spec);
    let plus = n.scale(c.delta) + id.scale(c.theta) + quad.scale(c.lambda);
    let minus = n.scale(c.delta) + id.scale(c.theta) - quad.scale(c.lambda);
    Ok(&plus * &sigma_pm(1.0, spec) - &minus * &sigma_pm(-1.0, spec))
}

/// `e^{iVt}`: maps a state of the full model into the frame of
/// [`eff_hamiltonian_strong`].
pub fn drive_frame(p: &SystemParams, t: f64, spec: HilbertSpec) -> Operator {
    let s = |k, l| atomic_sigma(k, l, spec).expect("valid level");
    let (sin, cos) = (p.omega12 * t).sin_cos();
    (s(1, 1) + s(2, 2)) * cos + (s(1, 2) + s(2, 1)) * C64::new(0.0, sin) + s(3, 3)
}

/// Closed-form cat state at one instant, starting from `|1,0⟩` without
/// dissipation.
///
/// The state is `(e^{iφ}|+⟩|α₊⟩ + e^{−iφ}|−⟩|α₋⟩)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatSnapshot {
    pub t: f64,
    pub theta_rot: f64,
    /// Branch phase `−(Ω₂₃/g)² sin θ_rot`. To first order in `θ_rot` its
    /// magnitude is `Ω₂₃²t/2Ω₁₂`.
    pub phi: f64,
    pub alpha_plus: C64,
    pub alpha_minus: C64,
}

pub fn cat_state(t: f64, p: &SystemParams) -> Result<CatSnapshot> {
    let c = StrongConstants::new(p)?;
    if !(p.g > 0.0) {
        return Err(Error::Singular("cat amplitudes need g > 0"));
    }
    let ratio = p.omega23 / p.g;
    let theta_rot = c.delta * t;
    let rot = C64::from_polar(1.0, -theta_rot);
    Ok(CatSnapshot {
        t,
        theta_rot,
        phi: -ratio * ratio * theta_rot.sin(),
        alpha_plus: (rot - 1.0) * ratio,
        alpha_minus: -(rot.conj() - 1.0) * ratio,
    })
}

impl CatSnapshot {
    /// The full atom-cavity state on `spec`.
    pub fn state_vector(&self, spec: HilbertSpec) -> Result<StateVector> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::from(s), C64::from(s), C64::from(0.0)];
        let minus = [C64::from(s), C64::from(-s), C64::from(0.0)];
        let a = coherent_embed(self.alpha_plus, plus, spec)?.scale(C64::from_polar(s, self.phi));
        let b = coherent_embed(self.alpha_minus, minus, spec)?.scale(C64::from_polar(s, -self.phi));
        a.add(&b)
    }

    /// Cavity states left after finding the atom in `|1⟩` and `|2⟩`:
    /// `(e^{iφ}|α₊⟩ ± e^{−iφ}|α₋⟩)`, normalized, with their probabilities.
    pub fn measured_cats(&self, spec: HilbertSpec) -> Result<[(f64, CVector); 2]> {
        let p = coherent_amplitudes(self.alpha_plus, spec)? * C64::from_polar(1.0, self.phi);
        let m = coherent_amplitudes(self.alpha_minus, spec)? * C64::from_polar(1.0, -self.phi);
        let overlap = coherent_overlap(self.alpha_plus, self.alpha_minus) * C64::from_polar(1.0, -2.0 * self.phi);
        let mut out = [(0.0, CVector::zeros(0)), (0.0, CVector::zeros(0))];
        for (slot, sign) in out.iter_mut().zip([1.0, -1.0]) {
            // ‖e^{iφ}|α₊⟩ ± e^{−iφ}|α₋⟩‖² = 2 ± 2 Re(e^{−2iφ}⟨α₊|α₋⟩).
            let norm2 = 2.0 + 2.0 * sign * overlap.re;
            let v = (&p + &m * C64::from(sign)) / C64::from(norm2.max(f64::MIN_POSITIVE).sqrt());
            *slot = (norm2 / 4.0, v);
        }
        Ok(out)
    }
}

/// Closed-form `⟨α|β⟩ = exp(−|α|²/2 − |β|²/2 + α*β)` of untruncated
/// coherent states.
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    (-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + alpha.conj() * beta).exp()
}

/// Fock amplitudes of `|α⟩` on the cavity factor, renormalized after
/// truncation. Fails when the discarded tail exceeds [`COHERENT_TAIL`].
pub fn coherent_amplitudes(alpha: C64, spec: HilbertSpec) -> Result<CVector> {
    let f = spec.fock_dim();
    let mut v = CVector::zeros(f);
    let mut c = C64::from((-0.5 * alpha.norm_sqr()).exp());
    for n in 0..f {
        if n > 0 {
            c *= alpha / (n as f64).sqrt();
        }
        v[n] = c;
    }
    let tail = (1.0 - v.norm_squared()).max(0.0);
    if tail > COHERENT_TAIL {
        return Err(Error::TruncationTail {
            alpha: alpha.norm(),
            n_max: spec.n_max(),
            tail,
        });
    }
    let norm = v.norm();
    Ok(v / C64::from(norm))
}

/// `atom ⊗ |α⟩` with the atomic amplitudes supplied by the caller.
pub fn coherent_embed(alpha: C64, atom: [C64; 3], spec: HilbertSpec) -> Result<StateVector> {
    let field = coherent_amplitudes(alpha, spec)?;
    let f = spec.fock_dim();
    let amps = CVector::from_fn(spec.dim(), |i, _| atom[i / f] * field[i % f]);
    StateVector::from_amplitudes(spec, amps)
}

/// Steady coherent amplitudes of the two drive branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyAmplitudes {
    pub beta_plus: C64,
    pub beta_minus: C64,
}

pub fn steady_amplitudes(p: &SystemParams) -> Result<SteadyAmplitudes> {
    let damping = C64::from(2.0 * p.omega12 * p.kappa);
    let shift = C64::new(0.0, p.g * p.g);
    if damping.re == 0.0 && shift.im == 0.0 {
        return Err(Error::Singular("both 2*omega12*kappa and g^2 vanish"));
    }
    let num = C64::new(0.0, -p.g * p.omega23);
    Ok(SteadyAmplitudes {
        beta_plus: num / (damping + shift),
        beta_minus: num / (damping - shift),
    })
}

impl SteadyAmplitudes {
    /// `½(|β₊⟩⟨β₊| + |β₋⟩⟨β₋|)` on the cavity factor.
    pub fn mixture(&self, spec: HilbertSpec) -> Result<CMatrix> {
        let p = coherent_amplitudes(self.beta_plus, spec)?;
        let m = coherent_amplitudes(self.beta_minus, spec)?;
        Ok((&p * p.adjoint() + &m * m.adjoint()) * C64::from(0.5))
    }

    /// Uhlmann fidelity between the atom-traced `rho` and [`Self::mixture`].
    pub fn fidelity_with(&self, rho: &DensityMatrix) -> Result<f64> {
        let target = self.mixture(rho.spec())?;
        Ok(linalg::uhlmann_fidelity(&rho.cavity_reduced(), &target))
    }
}
