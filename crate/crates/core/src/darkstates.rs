//! Analytic ladder of dark states of `H₀` at zero detuning.
//!
//! ```text
//! |Ψ₀⁰⟩ = |1,0⟩
//! |Ψₙ⁰⟩ = Qₙ|1,n⟩ − Rₙ|2,n−1⟩,   Qₙ = Ω₂₃/√(g²n + Ω₂₃²),  Rₙ = g√n/√(g²n + Ω₂₃²)
//! ```
//!
//! Weak ground-state driving couples neighbouring rungs with strength
//! `−Ω₁₂ QₙRₙ₊₁` (taking `Q₀ = 1`), and cavity decay moves population one
//! rung down at rate `Γₙ⁰ = nκ(Ω₂₃² + g²(n−1))/(Ω₂₃² + g²n)`.
//!
//! Populations reported by [`dark_populations`] are raw `⟨Ψₙ⁰|ρ|Ψₙ⁰⟩`,
//! normalized over the full space rather than over the dark subspace.

use crate::error::{Error, Result};
use crate::hilbert::{basis_ket, DensityMatrix, HilbertSpec, Operator, StateVector, C64};
use crate::model::SystemParams;

/// `(Qₙ, Rₙ)` for `n ≥ 1`.
pub fn qn_rn(n: usize, g: f64, omega23: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::IndexOutOfRange {
            what: "dark-state coefficient",
            value: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let norm = (g * g * n as f64 + omega23 * omega23).sqrt();
    if norm == 0.0 {
        return Err(Error::CouplingsVanish);
    }
    Ok((omega23 / norm, g * (n as f64).sqrt() / norm))
}

/// Like [`qn_rn`] but with the ground rung convention `(Q₀, R₀) = (1, 0)`.
fn ladder_coefficients(n: usize, g: f64, omega23: f64) -> Result<(f64, f64)> {
    if n == 0 {
        Ok((1.0, 0.0))
    } else {
        qn_rn(n, g, omega23)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarkStateVector {
    pub n: usize,
    pub q: f64,
    pub r: f64,
    pub vector: StateVector,
}

pub fn dark_state(n: usize, p: &SystemParams, spec: HilbertSpec) -> Result<DarkStateVector> {
    if n > spec.n_max() {
        return Err(Error::IndexOutOfRange {
            what: "dark state",
            value: n,
            min: 0,
            max: spec.n_max(),
        });
    }
    let (q, r) = ladder_coefficients(n, p.g, p.omega23)?;
    let vector = if n == 0 {
        basis_ket(1, 0, spec)?
    } else {
        basis_ket(1, n, spec)?
            .scale(q)
            .add(&basis_ket(2, n - 1, spec)?.scale(-r))?
    };
    Ok(DarkStateVector { n, q, r, vector })
}

/// `⟨Ψₙ₊₁⁰|H_eff|Ψₙ⁰⟩ = −Ω₁₂ QₙRₙ₊₁`.
pub fn ladder_coupling(n: usize, p: &SystemParams) -> Result<f64> {
    let (q, _) = ladder_coefficients(n, p.g, p.omega23)?;
    let (_, r_next) = qn_rn(n + 1, p.g, p.omega23)?;
    Ok(-p.omega12 * q * r_next)
}

/// Weak-drive effective Hamiltonian
/// `−Ω₁₂ Σ_{n<n_max} QₙRₙ₊₁ |Ψₙ₊₁⁰⟩⟨Ψₙ⁰| + h.c.` on the full space.
pub fn eff_hamiltonian_weak(p: &SystemParams, spec: HilbertSpec) -> Result<Operator> {
    let ladder = (0..=spec.n_max())
        .map(|n| dark_state(n, p, spec).map(|s| s.vector))
        .collect::<Result<Vec<_>>>()?;
    let mut m = crate::hilbert::CMatrix::zeros(spec.dim(), spec.dim());
    for n in 0..spec.n_max() {
        let c = ladder_coupling(n, p)?;
        let up = ladder[n + 1].amplitudes() * ladder[n].amplitudes().adjoint();
        m += &up * C64::from(c) + up.adjoint() * C64::from(c);
    }
    Operator::from_matrix(spec, m)
}

/// Cavity-induced decay rate `Γₙ⁰` of `|Ψₙ⁰⟩` into `|Ψₙ₋₁⁰⟩`.
pub fn dark_decay_rate(n: usize, p: &SystemParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::IndexOutOfRange {
            what: "decaying dark state",
            value: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let (g2, w2, nf) = (p.g * p.g, p.omega23 * p.omega23, n as f64);
    let den = w2 + g2 * nf;
    if den == 0.0 {
        return Err(Error::CouplingsVanish);
    }
    Ok(nf * p.kappa * (w2 + g2 * (nf - 1.0)) / den)
}

/// Bright-state energies `±√(ng² + Ω₂₃²)` of the `n`-excitation manifold.
pub fn bright_energies(n: usize, p: &SystemParams) -> (f64, f64) {
    let e = (n as f64 * p.g * p.g + p.omega23 * p.omega23).sqrt();
    (e, -e)
}

/// `Pₙ⁰ = ⟨Ψₙ⁰|ρ|Ψₙ⁰⟩` for `n = 0..=n_upto`.
pub fn dark_populations(rho: &DensityMatrix, p: &SystemParams, n_upto: usize) -> Result<Vec<f64>> {
    let spec = rho.spec();
    (0..=n_upto)
        .map(|n| {
            let s = dark_state(n, p, spec)?;
            Ok(rho.overlap(&s.vector)?.clamp(0.0, 1.0))
        })
        .collect()
}

/// Population outside every dark state, `1 − Σₙ Pₙ⁰`.
pub fn bright_population(rho: &DensityMatrix, p: &SystemParams) -> Result<f64> {
    let dark: f64 = dark_populations(rho, p, rho.spec().n_max())?.iter().sum();
    Ok(1.0 - dark)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{annihilation, number};
    use crate::linalg;
    use crate::model::{hamiltonian_h0, hamiltonian_v};
    use approx::assert_abs_diff_eq;

    fn fig(n_max: usize) -> SystemParams {
        SystemParams {
            n_max,
            ..SystemParams::default()
        }
    }

    #[test]
    fn first_rung_coefficients() {
        let (q, r) = qn_rn(1, 10.0, 3.0).unwrap();
        assert_abs_diff_eq!(q, 3.0 / 109f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r, 10.0 / 109f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(q, 0.287348, epsilon = 1e-6);
        assert_abs_diff_eq!(r, 0.957826, epsilon = 1e-6);
        for n in 1..=10 {
            let (q, r) = qn_rn(n, 10.0, 3.0).unwrap();
            assert_abs_diff_eq!(q * q + r * r, 1.0, epsilon = 1e-12);
        }
        let (q, r) = qn_rn(3, 1e-9, 3.0).unwrap();
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r, 0.0, epsilon = 1e-9);
        assert_eq!(qn_rn(1, 0.0, 0.0), Err(Error::CouplingsVanish));
        assert!(qn_rn(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn dark_state_vectors() {
        let p = fig(6);
        let spec = p.spec().unwrap();
        assert_eq!(dark_state(0, &p, spec).unwrap().vector, basis_ket(1, 0, spec).unwrap());
        let one = dark_state(1, &p, spec).unwrap();
        assert_abs_diff_eq!(one.vector.amplitude(1, 1).unwrap().re, 0.287348, epsilon = 1e-6);
        assert_abs_diff_eq!(one.vector.amplitude(2, 0).unwrap().re, -0.957826, epsilon = 1e-6);
        for n in 0..=5 {
            let a = dark_state(n, &p, spec).unwrap();
            assert_abs_diff_eq!(a.q * a.q + a.r * a.r, 1.0, epsilon = 1e-12);
            for m in 0..=5 {
                let b = dark_state(m, &p, spec).unwrap();
                let expected = if n == m { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(a.vector.inner(&b.vector).unwrap().norm(), expected, epsilon = 1e-14);
            }
            for k in 0..=spec.n_max() {
                assert_eq!(a.vector.amplitude(3, k).unwrap(), C64::new(0.0, 0.0));
            }
        }
        assert!(dark_state(7, &p, spec).is_err());
    }

    #[test]
    fn dark_states_are_annihilated_by_h0() {
        let p = SystemParams {
            delta: Some(0.0),
            ..fig(7)
        };
        let spec = p.spec().unwrap();
        let h0 = hamiltonian_h0(&p).unwrap();
        for n in 0..spec.n_max() {
            let v = dark_state(n, &p, spec).unwrap().vector;
            assert!(h0.apply(&v).unwrap().norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn effective_coupling_matches_ground_drive() {
        let p = fig(6);
        let spec = p.spec().unwrap();
        let v = hamiltonian_v(&p).unwrap();
        let heff = eff_hamiltonian_weak(&p, spec).unwrap();
        for n in 0..spec.n_max() {
            let lo = dark_state(n, &p, spec).unwrap().vector;
            let hi = dark_state(n + 1, &p, spec).unwrap().vector;
            let exact = v.matrix_element(&hi, &lo).unwrap();
            let eff = heff.matrix_element(&hi, &lo).unwrap();
            let closed = ladder_coupling(n, &p).unwrap();
            assert_abs_diff_eq!(exact.re, closed, epsilon = 1e-12);
            assert_abs_diff_eq!(exact.im, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(eff.re, closed, epsilon = 1e-12);
        }
        let first = heff
            .matrix_element(
                &dark_state(1, &p, spec).unwrap().vector,
                &dark_state(0, &p, spec).unwrap().vector,
            )
            .unwrap();
        assert_abs_diff_eq!(first.re, -0.1 * 0.957826, epsilon = 1e-6);
    }

    #[test]
    fn strong_cavity_limit_of_couplings() {
        let p = SystemParams {
            g: 100.0,
            omega23: 1.0,
            omega12: 0.1,
            ..fig(8)
        };
        for n in 1..8 {
            let approx = -p.omega12 * p.omega23 / (p.g * (n as f64).sqrt());
            let exact = ladder_coupling(n, &p).unwrap();
            assert!(((exact - approx) / approx).abs() < 0.01, "n = {n}: {exact} vs {approx}");
        }
    }

    #[test]
    fn heff_ignores_bright_sector() {
        let p = fig(5);
        let spec = p.spec().unwrap();
        let heff = eff_hamiltonian_weak(&p, spec).unwrap();
        // |3,n⟩ and the bright combination Rₙ|1,n⟩ + Qₙ|2,n−1⟩ are orthogonal
        // to every dark state.
        for n in 0..=spec.n_max() {
            assert!(heff.apply(&basis_ket(3, n, spec).unwrap()).unwrap().norm() < 1e-14);
        }
        for n in 1..=spec.n_max() {
            let (q, r) = qn_rn(n, p.g, p.omega23).unwrap();
            let bright = basis_ket(1, n, spec)
                .unwrap()
                .scale(r)
                .add(&basis_ket(2, n - 1, spec).unwrap().scale(q))
                .unwrap();
            assert!(heff.apply(&bright).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn decay_rates() {
        let p = fig(8);
        assert_abs_diff_eq!(dark_decay_rate(1, &p).unwrap(), 9.0 / 109.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dark_decay_rate(1, &p).unwrap(), 0.08257, epsilon = 1e-5);
        assert_abs_diff_eq!(dark_decay_rate(2, &p).unwrap(), 2.0 * 109.0 / 209.0, epsilon = 1e-14);
        assert_abs_diff_eq!(dark_decay_rate(2, &p).unwrap(), 1.0431, epsilon = 1e-4);
        assert_eq!(dark_decay_rate(1, &SystemParams { omega23: 0.0, ..p }).unwrap(), 0.0);
        // Matrix element of √κ a between neighbouring rungs.
        let spec = p.spec().unwrap();
        let a = annihilation(spec).scale(p.kappa.sqrt());
        for n in 1..=6 {
            let lo = dark_state(n - 1, &p, spec).unwrap().vector;
            let hi = dark_state(n, &p, spec).unwrap().vector;
            let el = a.matrix_element(&lo, &hi).unwrap().norm_sqr();
            assert_abs_diff_eq!(el, dark_decay_rate(n, &p).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn decay_rates_increase_up_the_ladder() {
        let p = fig(8);
        let rates: Vec<f64> = (1..=10).map(|n| dark_decay_rate(n, &p).unwrap()).collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bright_energies_match_h0_spectrum() {
        let p = SystemParams {
            delta: Some(0.0),
            ..fig(6)
        };
        assert_eq!(
            bright_energies(
                1,
                &SystemParams {
                    g: 0.0,
                    omega23: 0.0,
                    ..p
                }
            ),
            (0.0, -0.0)
        );
        let (ep, em) = bright_energies(1, &p);
        assert_abs_diff_eq!(ep, 10.4403, epsilon = 1e-4);
        assert_abs_diff_eq!(em, -10.4403, epsilon = 1e-4);

        // Diagonalise H₀ inside the n-excitation manifold {|1,n⟩, |2,n−1⟩, |3,n−1⟩}.
        let spec = p.spec().unwrap();
        let h0 = hamiltonian_h0(&p).unwrap();
        for n in 1..=spec.n_max() {
            let idx = [
                spec.index(1, n).unwrap(),
                spec.index(2, n - 1).unwrap(),
                spec.index(3, n - 1).unwrap(),
            ];
            let block = crate::hilbert::CMatrix::from_fn(3, 3, |i, j| h0.matrix()[(idx[i], idx[j])]);
            let eig = linalg::hermitian_eigenvalues(&block);
            let (ep, em) = bright_energies(n, &p);
            assert_abs_diff_eq!(eig[0], em, epsilon = 1e-10);
            assert_abs_diff_eq!(eig[1], 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(eig[2], ep, epsilon = 1e-10);
        }
    }

    #[test]
    fn populations_of_vacuum() {
        let p = fig(4);
        let rho = DensityMatrix::basis(1, 0, p.spec().unwrap()).unwrap();
        let pops = dark_populations(&rho, &p, 4).unwrap();
        assert_eq!(pops[0], 1.0);
        assert!(pops[1..].iter().all(|&x| x == 0.0));
        assert_abs_diff_eq!(bright_population(&rho, &p).unwrap(), 0.0);
    }

    #[test]
    fn cavity_decay_stays_in_dark_subspace() {
        let p = fig(6);
        let spec = p.spec().unwrap();
        let a = annihilation(spec);
        let mut rho = crate::hilbert::CMatrix::zeros(spec.dim(), spec.dim());
        let weights = [0.4, 0.3, 0.2, 0.1];
        for (n, w) in weights.iter().enumerate() {
            rho += dark_state(n, &p, spec).unwrap().vector.projector() * C64::from(*w);
        }
        let coh = dark_state(1, &p, spec).unwrap().vector.amplitudes()
            * dark_state(2, &p, spec).unwrap().vector.amplitudes().adjoint();
        rho += (&coh + coh.adjoint()) * C64::from(0.05);
        let jumped = a.matrix() * &rho * a.matrix().adjoint() * C64::from(2.0);
        let mut dark = 0.0;
        for n in 0..=spec.n_max() {
            let v = dark_state(n, &p, spec).unwrap().vector;
            dark += v.amplitudes().dotc(&(&jumped * v.amplitudes())).re;
        }
        let total = jumped.trace().re;
        assert!((total - dark).abs() < 1e-12, "bright population {}", total - dark);
        let _ = number(spec);
    }
}
