//! Operators and states on the truncated atom ⊗ cavity space.
//!
//! The atom has three levels (1, 2 ground; 3 excited) and the cavity keeps
//! Fock states `0..=n_max`. Basis ordering is atom-major:
//! `index(k, n) = (k - 1) * (n_max + 1) + n`. Every other module goes through
//! [`HilbertSpec::index`] / [`basis_ket`] instead of computing raw offsets.
//!
//! All rates and energies are in units of the cavity field decay rate κ.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ATOM_LEVELS: usize = 3;

/// Truncation of the cavity ladder together with the derived dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    n_max: usize,
}

impl HilbertSpec {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidSpec(format!("n_max must be at least 1, got {n_max}")));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Number of retained Fock states, `n_max + 1`.
    pub fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        ATOM_LEVELS * self.fock_dim()
    }

    /// Flat index of `|k, n⟩` with `k` in `1..=3`.
    pub fn index(&self, k: usize, n: usize) -> Result<usize> {
        check_level(k)?;
        if n > self.n_max {
            return Err(Error::IndexOutOfRange {
                what: "photon number",
                value: n,
                min: 0,
                max: self.n_max,
            });
        }
        Ok((k - 1) * self.fock_dim() + n)
    }

    /// Inverse of [`HilbertSpec::index`].
    pub fn decode(&self, index: usize) -> Result<(usize, usize)> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange {
                what: "basis",
                value: index,
                min: 0,
                max: self.dim() - 1,
            });
        }
        Ok((index / self.fock_dim() + 1, index % self.fock_dim()))
    }

    pub(crate) fn ensure_same(&self, other: &HilbertSpec) -> Result<()> {
        if self != other {
            return Err(Error::SpecMismatch {
                left: self.n_max,
                right: other.n_max,
            });
        }
        Ok(())
    }
}

fn check_level(k: usize) -> Result<()> {
    if !(1..=ATOM_LEVELS).contains(&k) {
        return Err(Error::IndexOutOfRange {
            what: "atomic level",
            value: k,
            min: 1,
            max: ATOM_LEVELS,
        });
    }
    Ok(())
}

/// Dense complex operator on the full space.
///
/// Arithmetic through `+`, `-`, `*` panics on mismatched specs, like nalgebra
/// does on mismatched shapes; use [`Operator::compose`] for a checked product.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    spec: HilbertSpec,
    matrix: CMatrix,
}

impl Operator {
    pub fn from_matrix(spec: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != spec.dim() || matrix.ncols() != spec.dim() {
            return Err(Error::InvalidSpec(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                spec.dim(),
                spec.dim()
            )));
        }
        Ok(Self { spec, matrix })
    }

    pub fn zeros(spec: HilbertSpec) -> Self {
        Self {
            spec,
            matrix: CMatrix::zeros(spec.dim(), spec.dim()),
        }
    }

    pub fn identity(spec: HilbertSpec) -> Self {
        Self {
            spec,
            matrix: CMatrix::identity(spec.dim(), spec.dim()),
        }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            spec: self.spec,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: impl Into<C64>) -> Operator {
        Operator {
            spec: self.spec,
            matrix: &self.matrix * factor.into(),
        }
    }

    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.spec.ensure_same(&other.spec)?;
        Ok(Operator {
            spec: self.spec,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        Ok(self.compose(other)? - other.compose(self)?)
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.spec.ensure_same(&v.spec)?;
        Ok(StateVector {
            spec: self.spec,
            amplitudes: &self.matrix * &v.amplitudes,
        })
    }

    /// `⟨bra|A|ket⟩`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<C64> {
        bra.inner(&self.apply(ket)?)
    }

    /// Largest elementwise deviation from hermiticity, `max |A - A†|`.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs_diff(&self.matrix, &self.matrix.adjoint())
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        assert_eq!(self.spec, rhs.spec, "operator spec mismatch");
        Operator {
            spec: self.spec,
            matrix: self.matrix + rhs.matrix,
        }
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        assert_eq!(self.spec, rhs.spec, "operator spec mismatch");
        Operator {
            spec: self.spec,
            matrix: self.matrix - rhs.matrix,
        }
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator {
            spec: self.spec,
            matrix: -self.matrix,
        }
    }
}

impl Mul<&Operator> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs).expect("operator spec mismatch")
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator {
            spec: self.spec,
            matrix: self.matrix * C64::from(rhs),
        }
    }
}

impl Mul<C64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator {
            spec: self.spec,
            matrix: self.matrix * rhs,
        }
    }
}

/// Ket on the full space. Not necessarily normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: HilbertSpec,
    amplitudes: CVector,
}

impl StateVector {
    pub fn from_amplitudes(spec: HilbertSpec, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != spec.dim() {
            return Err(Error::InvalidSpec(format!(
                "state has {} amplitudes, expected {}",
                amplitudes.len(),
                spec.dim()
            )));
        }
        Ok(Self { spec, amplitudes })
    }

    pub fn zeros(spec: HilbertSpec) -> Self {
        Self {
            spec,
            amplitudes: CVector::zeros(spec.dim()),
        }
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize, n: usize) -> Result<C64> {
        Ok(self.amplitudes[self.spec.index(k, n)?])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() < 1e-12
    }

    pub fn normalized(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParams("cannot normalize the zero vector".into()));
        }
        Ok(self.scale(1.0 / norm))
    }

    pub fn scale(&self, factor: impl Into<C64>) -> StateVector {
        StateVector {
            spec: self.spec,
            amplitudes: &self.amplitudes * factor.into(),
        }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.spec.ensure_same(&other.spec)?;
        Ok(StateVector {
            spec: self.spec,
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.spec.ensure_same(&other.spec)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|⟨self|other⟩|²` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `|self⟩⟨self|` without validation.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// Pure-state density matrix; the vector must be normalized.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(self.spec, self.projector())
    }
}

/// `|k, n⟩` as a unit vector.
pub fn basis_ket(k: usize, n: usize, spec: HilbertSpec) -> Result<StateVector> {
    let mut v = StateVector::zeros(spec);
    v.amplitudes[spec.index(k, n)?] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Cavity lowering operator `I₃ ⊗ a` with `⟨n-1|a|n⟩ = √n`.
pub fn annihilation(spec: HilbertSpec) -> Operator {
    let mut m = CMatrix::zeros(spec.dim(), spec.dim());
    for k in 1..=ATOM_LEVELS {
        for n in 1..=spec.n_max() {
            let row = spec.index(k, n - 1).expect("in range");
            let col = spec.index(k, n).expect("in range");
            m[(row, col)] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    Operator { spec, matrix: m }
}

pub fn creation(spec: HilbertSpec) -> Operator {
    annihilation(spec).adjoint()
}

/// `a†a`, diagonal.
pub fn number(spec: HilbertSpec) -> Operator {
    let mut m = CMatrix::zeros(spec.dim(), spec.dim());
    for i in 0..spec.dim() {
        let (_, n) = spec.decode(i).expect("in range");
        m[(i, i)] = C64::new(n as f64, 0.0);
    }
    Operator { spec, matrix: m }
}

/// Atomic transition operator `σ_kl = |k⟩⟨l| ⊗ I_cav`.
pub fn atomic_sigma(k: usize, l: usize, spec: HilbertSpec) -> Result<Operator> {
    check_level(k)?;
    check_level(l)?;
    let mut m = CMatrix::zeros(spec.dim(), spec.dim());
    for n in 0..=spec.n_max() {
        m[(spec.index(k, n)?, spec.index(l, n)?)] = C64::new(1.0, 0.0);
    }
    Ok(Operator { spec, matrix: m })
}

/// Tolerances used when validating a [`DensityMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityTolerances {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl DensityTolerances {
    /// Bounds for states produced by direct construction or linear solves.
    pub const STRICT: DensityTolerances = DensityTolerances {
        hermiticity: 1e-10,
        trace: 1e-10,
        min_eigenvalue: -1e-8,
    };

    /// Bounds for states produced by numerical time integration.
    pub const INTEGRATED: DensityTolerances = DensityTolerances {
        hermiticity: 1e-8,
        trace: 1e-8,
        min_eigenvalue: -1e-6,
    };
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: HilbertSpec,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(spec: HilbertSpec, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(spec, matrix, DensityTolerances::STRICT)
    }

    pub fn with_tolerances(spec: HilbertSpec, matrix: CMatrix, tol: DensityTolerances) -> Result<Self> {
        if matrix.nrows() != spec.dim() || matrix.ncols() != spec.dim() {
            return Err(Error::NotDensityMatrix(format!(
                "shape {}x{}, expected {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                spec.dim(),
                spec.dim()
            )));
        }
        let herm = linalg::max_abs_diff(&matrix, &matrix.adjoint());
        if !(herm <= tol.hermiticity) {
            return Err(Error::NotDensityMatrix(format!("hermiticity error {herm:e}")));
        }
        let trace = matrix.trace();
        if !((trace.re - 1.0).abs() <= tol.trace && trace.im.abs() <= tol.trace) {
            return Err(Error::NotDensityMatrix(format!("trace {trace}")));
        }
        let min_eig = linalg::min_hermitian_eigenvalue(&matrix);
        if !(min_eig >= tol.min_eigenvalue) {
            return Err(Error::NotDensityMatrix(format!("smallest eigenvalue {min_eig:e}")));
        }
        Ok(Self { spec, matrix })
    }

    pub fn pure(v: &StateVector) -> Result<Self> {
        v.to_density()
    }

    /// `|k, n⟩⟨k, n|`.
    pub fn basis(k: usize, n: usize, spec: HilbertSpec) -> Result<Self> {
        basis_ket(k, n, spec)?.to_density()
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// `⟨k, n|ρ|k, n⟩`.
    pub fn population(&self, k: usize, n: usize) -> Result<f64> {
        let i = self.spec.index(k, n)?;
        Ok(self.matrix[(i, i)].re)
    }

    /// Photon-number distribution `P(n)` summed over atomic levels.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let spec = self.spec;
        (0..=spec.n_max())
            .map(|n| {
                (1..=ATOM_LEVELS)
                    .map(|k| self.matrix[(spec.index(k, n).unwrap(), spec.index(k, n).unwrap())].re)
                    .sum()
            })
            .collect()
    }

    /// Partial trace over the atom; an `(n_max+1)`-square matrix.
    pub fn cavity_reduced(&self) -> CMatrix {
        let spec = self.spec;
        let f = spec.fock_dim();
        CMatrix::from_fn(f, f, |n, m| {
            (1..=ATOM_LEVELS)
                .map(|k| self.matrix[(spec.index(k, n).unwrap(), spec.index(k, m).unwrap())])
                .sum()
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_hermitian_eigenvalue(&self.matrix)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap(&self, v: &StateVector) -> Result<f64> {
        self.spec.ensure_same(&v.spec)?;
        Ok(v.amplitudes.dotc(&(&self.matrix * &v.amplitudes)).re)
    }

    /// Trace distance `½‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.spec.ensure_same(&other.spec)?;
        Ok(linalg::trace_distance(&self.matrix, &other.matrix))
    }

    /// `U ρ U†` for a unitary `U`.
    pub fn transformed(&self, unitary: &Operator) -> Result<DensityMatrix> {
        self.spec.ensure_same(&unitary.spec)?;
        DensityMatrix::new(self.spec, &unitary.matrix * &self.matrix * unitary.matrix.adjoint())
    }
}

/// `tr(ρA)`.
pub fn expectation(rho: &DensityMatrix, a: &Operator) -> Result<C64> {
    rho.spec.ensure_same(&a.spec)?;
    Ok((&rho.matrix * &a.matrix).trace())
}

pub fn adjoint(a: &Operator) -> Operator {
    a.adjoint()
}

pub fn apply(a: &Operator, v: &StateVector) -> Result<StateVector> {
    a.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(n: usize) -> HilbertSpec {
        HilbertSpec::new(n).unwrap()
    }

    #[test]
    fn dimension_is_three_times_fock() {
        assert_eq!(spec(2).dim(), 9);
        assert_eq!(spec(5).fock_dim(), 6);
        assert!(HilbertSpec::new(0).is_err());
    }

    #[test]
    fn lowering_operator_matrix_elements() {
        let s = spec(2);
        let a = annihilation(s);
        for k in 1..=3 {
            let el = a
                .matrix_element(&basis_ket(k, 1, s).unwrap(), &basis_ket(k, 2, s).unwrap())
                .unwrap();
            assert_abs_diff_eq!(el.re, 2f64.sqrt(), epsilon = 1e-15);
            let vac = a.apply(&basis_ket(k, 0, s).unwrap()).unwrap();
            assert_eq!(vac.norm(), 0.0);
        }
    }

    #[test]
    fn number_operator_is_diagonal_ladder() {
        let s = spec(5);
        let a = annihilation(s);
        let n = &a.adjoint() * &a;
        assert!(linalg::max_abs_diff(n.matrix(), number(s).matrix()) < 1e-14);
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                let expected = if i == j { (i % 6) as f64 } else { 0.0 };
                assert_abs_diff_eq!(n.matrix()[(i, j)].re, expected, epsilon = 1e-14);
                assert_eq!(n.matrix()[(i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn canonical_commutator_below_truncation() {
        let s = spec(6);
        let a = annihilation(s);
        let comm = a.commutator(&a.adjoint()).unwrap();
        for i in 0..s.dim() {
            let (_, n) = s.decode(i).unwrap();
            if n >= s.n_max() {
                continue;
            }
            for j in 0..s.dim() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm.matrix()[(i, j)].re, expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn sigma_algebra() {
        let s = spec(3);
        let sig = |k, l| atomic_sigma(k, l, s).unwrap();
        assert_eq!(&sig(3, 1) * &sig(1, 3), sig(3, 3));
        let total = sig(1, 1) + sig(2, 2) + sig(3, 3);
        assert_eq!(total, Operator::identity(s));
        for k in 1..=3 {
            for l in 1..=3 {
                for m in 1..=3 {
                    for n in 1..=3 {
                        let prod = &sig(k, l) * &sig(m, n);
                        let expected = if l == m { sig(k, n) } else { Operator::zeros(s) };
                        assert_eq!(prod, expected);
                    }
                }
            }
        }
        assert!(atomic_sigma(0, 1, s).is_err());
        assert!(atomic_sigma(1, 4, s).is_err());
    }

    #[test]
    fn sigma21_raises_level_one_to_two() {
        let s = spec(4);
        let sig21 = atomic_sigma(2, 1, s).unwrap();
        for n in 0..=4 {
            let out = sig21.apply(&basis_ket(1, n, s).unwrap()).unwrap();
            assert_eq!(out, basis_ket(2, n, s).unwrap());
        }
        let el = sig21
            .matrix_element(&basis_ket(2, 1, s).unwrap(), &basis_ket(1, 1, s).unwrap())
            .unwrap();
        assert_eq!(el, C64::new(1.0, 0.0));
    }

    #[test]
    fn basis_index_convention() {
        let s = spec(4);
        assert_eq!(s.index(1, 0).unwrap(), 0);
        assert_eq!(s.index(3, 4).unwrap(), s.dim() - 1);
        assert_eq!(s.index(2, 0).unwrap(), 5);
        for i in 0..s.dim() {
            let (k, n) = s.decode(i).unwrap();
            assert_eq!(s.index(k, n).unwrap(), i);
        }
        assert!(s.index(1, 5).is_err());
        assert!(s.index(4, 0).is_err());
        assert!(basis_ket(3, 5, s).is_err());
        assert!(s.decode(s.dim()).is_err());
    }

    #[test]
    fn expectation_basics() {
        let s = spec(3);
        let vac = DensityMatrix::basis(1, 0, s).unwrap();
        assert_eq!(expectation(&vac, &number(s)).unwrap(), C64::new(0.0, 0.0));
        assert_abs_diff_eq!(expectation(&vac, &Operator::identity(s)).unwrap().re, 1.0);
        let other = HilbertSpec::new(4).unwrap();
        assert!(matches!(
            expectation(&vac, &number(other)),
            Err(Error::SpecMismatch { .. })
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let s = spec(1);
        let mut m = CMatrix::zeros(6, 6);
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(s, m.clone()).is_err());
        m[(1, 1)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(s, m.clone()).is_ok());
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(s, m.clone()).is_err());
        m[(1, 0)] = C64::new(0.0, -0.1);
        assert!(DensityMatrix::new(s, m.clone()).is_ok());
        m[(0, 0)] = C64::new(1.5, 0.0);
        m[(1, 1)] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::new(s, m).is_err());
    }

    #[test]
    fn cavity_reduction_traces_out_atom() {
        let s = spec(2);
        let a = basis_ket(1, 0, s).unwrap();
        let b = basis_ket(2, 1, s).unwrap();
        let bell = a.add(&b).unwrap().normalized().unwrap();
        let reduced = bell.to_density().unwrap().cavity_reduced();
        assert_abs_diff_eq!(reduced[(0, 0)].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(reduced[(1, 1)].re, 0.5, epsilon = 1e-15);
        assert_eq!(reduced[(0, 1)].norm(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_operator(s: HilbertSpec) -> impl Strategy<Value = Operator> {
            proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), s.dim() * s.dim()).prop_map(move |v| {
                let m = CMatrix::from_iterator(s.dim(), s.dim(), v.into_iter().map(|(r, i)| C64::new(r, i)));
                Operator::from_matrix(s, m).unwrap()
            })
        }

        proptest! {
            #[test]
            fn adjoint_is_an_involution(op in arb_operator(HilbertSpec::new(2).unwrap())) {
                prop_assert_eq!(op.adjoint().adjoint(), op);
            }

            #[test]
            fn basis_index_round_trips(n_max in 1usize..30, k in 1usize..=3, frac in 0.0..1.0f64) {
                let s = HilbertSpec::new(n_max).unwrap();
                let n = ((n_max as f64) * frac).floor() as usize;
                let idx = s.index(k, n).unwrap();
                prop_assert_eq!(s.decode(idx).unwrap(), (k, n));
                let ket = basis_ket(k, n, s).unwrap();
                prop_assert_eq!(ket.amplitudes()[idx], C64::new(1.0, 0.0));
                prop_assert!(ket.is_normalized());
            }
        }
    }
}
