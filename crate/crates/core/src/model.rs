//! Interaction-picture Hamiltonian and Lindblad generator.
//!
//! `H = H₀ + V` with
//!
//! ```text
//! H₀ = (g a σ₃₁ + Ω₂₃ σ₃₂ + h.c.) − (Δ − Δ₁₂ − Δ₂₃) a†a + Δ₂₃ σ₃₃ − Δ₁₂ σ₁₁
//! V  = Ω₁₂ σ₂₁ + h.c.
//! ```
//!
//! and the master equation
//!
//! ```text
//! ρ̇ = −i[H, ρ] + κ(2aρa† − a†aρ − ρa†a) + Σₘ Γ₃ₘ(2σₘ₃ρσ₃ₘ − σ₃₃ρ − ρσ₃₃)
//! ```
//!
//! Note the cavity term carries prefactor κ on `2aρa†`, so the photon number
//! decays at rate 2κ. Drive amplitudes are the half Rabi frequencies Ω; no
//! factors of two are inserted anywhere.
//!
//! Superoperators act on column-stacked density matrices,
//! `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`. nalgebra stores matrices column-major, so
//! `vec(ρ)` is simply `ρ.as_slice()`.

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, atomic_sigma, number, CMatrix, CVector, DensityMatrix, HilbertSpec, Operator, C64};
use crate::linalg;

/// Physical parameters of one simulation run, all in units of κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Atom-cavity coupling.
    pub g: f64,
    /// Ground-state drive amplitude Ω₁₂.
    pub omega12: f64,
    /// Control drive amplitude Ω₂₃.
    pub omega23: f64,
    pub delta12: f64,
    pub delta23: f64,
    /// Cavity-transition detuning Δ; `None` means Δ₁₂ + Δ₂₃.
    pub delta: Option<f64>,
    pub kappa: f64,
    pub gamma31: f64,
    pub gamma32: f64,
    pub n_max: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            g: 10.0,
            omega12: 0.1,
            omega23: 3.0,
            delta12: 0.0,
            delta23: 0.0,
            delta: None,
            kappa: 1.0,
            gamma31: 0.5,
            gamma32: 0.5,
            n_max: 8,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g", self.g),
            ("omega12", self.omega12),
            ("omega23", self.omega23),
            ("kappa", self.kappa),
            ("gamma31", self.gamma31),
            ("gamma32", self.gamma32),
        ];
        for (name, value) in rates {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("delta12", self.delta12),
            ("delta23", self.delta23),
            ("delta", self.cavity_detuning()),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {value}")));
            }
        }
        HilbertSpec::new(self.n_max)?;
        Ok(())
    }

    /// Δ, falling back to Δ₁₂ + Δ₂₃.
    pub fn cavity_detuning(&self) -> f64 {
        self.delta.unwrap_or(self.delta12 + self.delta23)
    }

    pub fn spec(&self) -> Result<HilbertSpec> {
        HilbertSpec::new(self.n_max)
    }

    pub fn with_n_max(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }

    /// No decay channels at all.
    pub fn closed(self) -> Self {
        Self {
            kappa: 0.0,
            gamma31: 0.0,
            gamma32: 0.0,
            ..self
        }
    }
}

fn validated(p: &SystemParams) -> Result<HilbertSpec> {
    p.validate()?;
    p.spec()
}

fn sigma(k: usize, l: usize, spec: HilbertSpec) -> Operator {
    atomic_sigma(k, l, spec).expect("levels are in range")
}

pub fn hamiltonian_h0(p: &SystemParams) -> Result<Operator> {
    let spec = validated(p)?;
    let a = annihilation(spec);
    let coupling = (&a * &sigma(3, 1, spec)) * p.g + sigma(3, 2, spec) * p.omega23;
    let detuning_photon = p.cavity_detuning() - p.delta12 - p.delta23;
    Ok(
        coupling.clone() + coupling.adjoint() - number(spec) * detuning_photon + sigma(3, 3, spec) * p.delta23
            - sigma(1, 1, spec) * p.delta12,
    )
}

pub fn hamiltonian_v(p: &SystemParams) -> Result<Operator> {
    let spec = validated(p)?;
    let drive = sigma(2, 1, spec) * p.omega12;
    Ok(drive.clone() + drive.adjoint())
}

pub fn hamiltonian(p: &SystemParams) -> Result<Operator> {
    Ok(hamiltonian_h0(p)? + hamiltonian_v(p)?)
}

/// A decay channel `rate · (2CρC† − C†Cρ − ρC†C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollapseChannel {
    pub rate: f64,
    pub op: Operator,
}

pub fn collapse_channels(p: &SystemParams) -> Result<Vec<CollapseChannel>> {
    let spec = validated(p)?;
    Ok(vec![
        CollapseChannel {
            rate: p.kappa,
            op: annihilation(spec),
        },
        CollapseChannel {
            rate: p.gamma31,
            op: sigma(1, 3, spec),
        },
        CollapseChannel {
            rate: p.gamma32,
            op: sigma(2, 3, spec),
        },
    ])
}

/// `−i[H, ρ] + Σ rate (2CρC† − C†Cρ − ρC†C)` evaluated with matrix products.
pub fn lindblad_rhs(h: &Operator, channels: &[CollapseChannel], rho: &CMatrix) -> CMatrix {
    let hm = h.matrix();
    let mut out = (hm * rho - rho * hm) * C64::new(0.0, -1.0);
    for ch in channels.iter().filter(|c| c.rate != 0.0) {
        let c = ch.op.matrix();
        let cd = c.adjoint();
        let cdc = &cd * c;
        out += (c * rho * &cd * C64::from(2.0) - &cdc * rho - rho * &cdc) * C64::from(ch.rate);
    }
    out
}

/// Dense generator acting on column-stacked density matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    spec: HilbertSpec,
    matrix: CMatrix,
}

fn nonzeros(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if z != C64::new(0.0, 0.0) {
                out.push((i, j, z));
            }
        }
    }
    out
}

/// `l += factor · (A ⊗ B)`, touching only structural nonzeros.
fn add_kron(l: &mut CMatrix, a: &CMatrix, b: &CMatrix, factor: C64) {
    let (rb, cb) = b.shape();
    let bz = nonzeros(b);
    for (i, j, x) in nonzeros(a) {
        let x = x * factor;
        for &(k, m, y) in &bz {
            l[(i * rb + k, j * cb + m)] += x * y;
        }
    }
}

impl Superoperator {
    pub fn from_generator(h: &Operator, channels: &[CollapseChannel]) -> Result<Self> {
        let spec = h.spec();
        for ch in channels {
            spec.ensure_same(&ch.op.spec())?;
        }
        let d = spec.dim();
        let id = CMatrix::identity(d, d);
        let hm = h.matrix();
        let mut l = CMatrix::zeros(d * d, d * d);
        // vec(Hρ) = (I ⊗ H) vec ρ, vec(ρH) = (Hᵀ ⊗ I) vec ρ
        add_kron(&mut l, &id, hm, C64::new(0.0, -1.0));
        add_kron(&mut l, &hm.transpose(), &id, C64::new(0.0, 1.0));
        for ch in channels.iter().filter(|c| c.rate != 0.0) {
            let c = ch.op.matrix();
            let cdc = c.adjoint() * c;
            let rate = C64::from(ch.rate);
            // vec(CρC†) = (C̄ ⊗ C) vec ρ
            add_kron(&mut l, &c.map(|z| z.conj()), c, rate * 2.0);
            add_kron(&mut l, &id, &cdc, -rate);
            add_kron(&mut l, &cdc.transpose(), &id, -rate);
        }
        Ok(Self { spec, matrix: l })
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius_norm(&self.matrix)
    }

    /// `Lρ` for an arbitrary `dim × dim` matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.spec.dim();
        assert_eq!(
            (rho.nrows(), rho.ncols()),
            (d, d),
            "matrix shape does not match superoperator"
        );
        let v = CVector::from_column_slice(rho.as_slice());
        let out = &self.matrix * v;
        CMatrix::from_column_slice(d, d, out.as_slice())
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        self.spec.ensure_same(&rho.spec())?;
        Ok(self.apply(rho.matrix()))
    }

    /// Largest `|tr(L E)|` over the canonical matrix units `E = |i⟩⟨j|`.
    /// Zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.spec.dim();
        (0..d * d)
            .map(|col| (0..d).map(|i| self.matrix[(i * d + i, col)]).sum::<C64>().norm())
            .fold(0.0, f64::max)
    }
}

/// The generator of the master equation for `p`.
pub fn liouvillian(p: &SystemParams) -> Result<Superoperator> {
    Superoperator::from_generator(&hamiltonian(p)?, &collapse_channels(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_ket, expectation, DensityMatrix};
    use crate::test_support::random_hermitian;
    use approx::assert_abs_diff_eq;

    fn weak_drive() -> SystemParams {
        SystemParams {
            n_max: 4,
            ..SystemParams::default()
        }
    }

    #[test]
    fn matched_detuning_removes_photon_term() {
        let p = SystemParams {
            delta12: 1.5,
            delta23: -0.4,
            ..weak_drive()
        };
        let spec = p.spec().unwrap();
        let h0 = hamiltonian_h0(&p).unwrap();
        // Photon-number dependence only via the coupling terms: diagonal
        // entries of |1,n⟩ are −Δ₁₂ for every n.
        for n in 0..=spec.n_max() {
            let i = spec.index(1, n).unwrap();
            assert_abs_diff_eq!(h0.matrix()[(i, i)].re, -1.5, epsilon = 1e-15);
            let i3 = spec.index(3, n).unwrap();
            assert_abs_diff_eq!(h0.matrix()[(i3, i3)].re, -0.4, epsilon = 1e-15);
        }
        let shifted = hamiltonian_h0(&SystemParams { delta: Some(2.1), ..p }).unwrap();
        let i = spec.index(2, 3).unwrap();
        assert_abs_diff_eq!(shifted.matrix()[(i, i)].re, -(2.1 - 1.1) * 3.0, epsilon = 1e-14);
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let p = SystemParams {
            delta12: 0.7,
            delta23: -2.0,
            delta: Some(0.3),
            ..weak_drive()
        };
        assert!(hamiltonian_h0(&p).unwrap().hermiticity_error() < 1e-14);
        assert!(hamiltonian_v(&p).unwrap().hermiticity_error() < 1e-14);
    }

    #[test]
    fn ground_drive_matrix_elements() {
        let p = weak_drive();
        let spec = p.spec().unwrap();
        let v = hamiltonian_v(&p).unwrap();
        for n in 0..=spec.n_max() {
            let el = v
                .matrix_element(&basis_ket(2, n, spec).unwrap(), &basis_ket(1, n, spec).unwrap())
                .unwrap();
            assert_abs_diff_eq!(el.re, 0.1, epsilon = 1e-15);
        }
        let zero = hamiltonian_v(&SystemParams { omega12: 0.0, ..p }).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let n_op = number(spec);
        assert_eq!(v.commutator(&n_op).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn superoperator_matches_matrix_form() {
        let p = SystemParams {
            delta12: 0.3,
            n_max: 3,
            ..SystemParams::default()
        };
        let l = liouvillian(&p).unwrap();
        let h = hamiltonian(&p).unwrap();
        let ch = collapse_channels(&p).unwrap();
        let d = p.spec().unwrap().dim();
        for seed in 0..5 {
            let rho = random_hermitian(d, seed);
            let direct = lindblad_rhs(&h, &ch, &rho);
            assert!(linalg::max_abs_diff(&l.apply(&rho), &direct) < 1e-12);
        }
    }

    #[test]
    fn trace_preservation_and_hermiticity() {
        let l = liouvillian(&weak_drive()).unwrap();
        assert!(l.trace_defect() < 1e-12);
        let d = l.spec().dim();
        for seed in 0..20 {
            let rho = random_hermitian(d, 100 + seed);
            let out = l.apply(&rho);
            assert!(out.trace().norm() < 1e-12);
            assert!(linalg::max_abs_diff(&out, &out.adjoint()) < 1e-12);
        }
    }

    #[test]
    fn linearity() {
        let l = liouvillian(&weak_drive()).unwrap();
        let d = l.spec().dim();
        let (r1, r2) = (random_hermitian(d, 7), random_hermitian(d, 8));
        let alpha = C64::from(0.37);
        let combo = l.apply(&(&r1 * alpha + &r2 * (C64::from(1.0) - alpha)));
        let separate = l.apply(&r1) * alpha + l.apply(&r2) * (C64::from(1.0) - alpha);
        assert!(linalg::max_abs_diff(&combo, &separate) < 1e-12);
    }

    #[test]
    fn decay_only_vacuum_is_fixed() {
        let p = SystemParams {
            g: 0.0,
            omega12: 0.0,
            omega23: 0.0,
            ..weak_drive()
        };
        let l = liouvillian(&p).unwrap();
        let rho = DensityMatrix::basis(1, 0, l.spec()).unwrap();
        assert!(linalg::frobenius_norm(&l.apply_density(&rho).unwrap()) < 1e-12);
    }

    #[test]
    fn photon_number_decays_at_twice_kappa() {
        let p = SystemParams {
            g: 0.0,
            omega12: 0.0,
            omega23: 0.0,
            ..weak_drive()
        };
        let spec = p.spec().unwrap();
        let l = liouvillian(&p).unwrap();
        let rho = DensityMatrix::basis(1, 1, spec).unwrap();
        let drho = l.apply_density(&rho).unwrap();
        let rate = (drho * number(spec).matrix()).trace();
        assert_abs_diff_eq!(rate.re, -2.0 * p.kappa, epsilon = 1e-14);
        assert_abs_diff_eq!(expectation(&rho, &number(spec)).unwrap().re, 1.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(SystemParams {
            g: -1.0,
            ..weak_drive()
        }
        .validate()
        .is_err());
        assert!(SystemParams {
            n_max: 0,
            ..weak_drive()
        }
        .validate()
        .is_err());
        assert!(SystemParams {
            gamma31: f64::NAN,
            ..weak_drive()
        }
        .validate()
        .is_err());
        assert!(hamiltonian(&SystemParams {
            kappa: -0.1,
            ..weak_drive()
        })
        .is_err());
    }
}
