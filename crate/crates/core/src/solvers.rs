//! Steady states and time evolution of the master equation.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, CVector, DensityMatrix, DensityTolerances, HilbertSpec, Operator, StateVector, C64};
use crate::linalg;
use crate::model::{liouvillian, Superoperator, SystemParams};

/// Pivots of the bordered system smaller than this (relative to the largest)
/// mean the generator has more than one stationary state.
const DEGENERACY_PIVOT_RATIO: f64 = 1e-12;
/// Required `‖Lρ‖₂ / ‖L‖_F` of a returned steady state.
const RESIDUAL_BOUND: f64 = 1e-10;

/// Real coordinates of a Hermitian `d × d` matrix: the `d` diagonal entries
/// followed by `(Re ρᵢⱼ, Im ρᵢⱼ)` for every `i < j`.
struct HermitianCoords {
    d: usize,
    pairs: Vec<(usize, usize)>,
}

impl HermitianCoords {
    fn new(d: usize) -> Self {
        let pairs = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        Self { d, pairs }
    }

    fn len(&self) -> usize {
        self.d * self.d
    }

    /// Column-stacked position of entry `(row, col)`.
    fn vec_index(&self, row: usize, col: usize) -> usize {
        col * self.d + row
    }

    /// Real coordinates of a column-stacked Hermitian matrix.
    fn project(&self, v: &[C64], out: &mut [f64]) {
        let d = self.d;
        for i in 0..d {
            out[i] = v[self.vec_index(i, i)].re;
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let z = v[self.vec_index(i, j)];
            out[d + 2 * p] = z.re;
            out[d + 2 * p + 1] = z.im;
        }
    }

    fn assemble(&self, x: &[f64]) -> CMatrix {
        let d = self.d;
        let mut m = CMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = C64::new(x[i], 0.0);
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let z = C64::new(x[d + 2 * p], x[d + 2 * p + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
        m
    }
}

/// The unique unit-trace null vector of `l`.
///
/// `L` maps Hermitian matrices to Hermitian matrices, so it is solved as a
/// real `d² × d²` system in [`HermitianCoords`]. The first population
/// equation is redundant (trace preservation) and is replaced by `tr ρ = 1`.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let spec = l.spec();
    let coords = HermitianCoords::new(spec.dim());
    let n = coords.len();
    let lm = l.matrix();
    let d = spec.dim();

    let mut system = Mat::<f64>::zeros(n, n);
    let mut image = vec![C64::new(0.0, 0.0); n];
    let mut real = vec![0.0; n];
    let mut write_column = |system: &mut Mat<f64>, col: usize, image: &[C64]| {
        coords.project(image, &mut real);
        for (row, &x) in real.iter().enumerate().skip(1) {
            system[(row, col)] = x;
        }
    };
    let i = C64::new(0.0, 1.0);
    for k in 0..d {
        let src = lm.column(coords.vec_index(k, k));
        image.iter_mut().zip(src.iter()).for_each(|(o, s)| *o = *s);
        write_column(&mut system, k, &image);
        system[(0, k)] = 1.0;
    }
    for (p, &(a, b)) in coords.pairs.iter().enumerate() {
        let ab = lm.column(coords.vec_index(a, b));
        let ba = lm.column(coords.vec_index(b, a));
        image
            .iter_mut()
            .zip(ab.iter().zip(ba.iter()))
            .for_each(|(o, (x, y))| *o = x + y);
        write_column(&mut system, d + 2 * p, &image);
        image
            .iter_mut()
            .zip(ab.iter().zip(ba.iter()))
            .for_each(|(o, (x, y))| *o = i * (x - y));
        write_column(&mut system, d + 2 * p + 1, &image);
    }

    let lu = system.partial_piv_lu();
    let u = lu.U();
    let (mut min_pivot, mut max_pivot) = (f64::INFINITY, 0.0f64);
    for k in 0..n {
        let p = u[(k, k)].abs();
        min_pivot = min_pivot.min(p);
        max_pivot = max_pivot.max(p);
    }
    let pivot_ratio = if max_pivot > 0.0 { min_pivot / max_pivot } else { 0.0 };
    if !(pivot_ratio > DEGENERACY_PIVOT_RATIO) {
        return Err(Error::DegenerateSteadyState { pivot_ratio });
    }
    let mut rhs = Mat::<f64>::zeros(n, 1);
    rhs[(0, 0)] = 1.0;
    let x = lu.solve(&rhs);
    let xs: Vec<f64> = (0..n).map(|k| x[(k, 0)]).collect();
    let rho = coords.assemble(&xs);

    let residual = linalg::frobenius_norm(&l.apply(&rho));
    let bound = RESIDUAL_BOUND * l.frobenius_norm();
    if !(residual < bound) {
        return Err(Error::SteadyStateResidual { residual, bound });
    }
    DensityMatrix::new(spec, rho)
}

/// Smallest truncation tried by [`auto_truncate`].
pub const TRUNCATION_START: usize = 8;
pub const TRUNCATION_STEP: usize = 4;
pub const TRUNCATION_CAP: usize = 40;
/// Allowed steady-state population in the two highest Fock levels.
pub const TRUNCATION_TAIL: f64 = 1e-8;

/// Population of the two highest retained Fock levels.
pub fn truncation_tail(rho: &DensityMatrix) -> f64 {
    let dist = rho.photon_distribution();
    dist[dist.len() - 2..].iter().sum()
}

/// Steady state at the smallest converged truncation, together with the
/// parameters (carrying that `n_max`) it was solved for.
pub fn steady_state_auto(p: &SystemParams) -> Result<(SystemParams, DensityMatrix)> {
    let mut n_max = TRUNCATION_START;
    while n_max <= TRUNCATION_CAP {
        let trial = p.with_n_max(n_max);
        let rho = steady_state(&liouvillian(&trial)?)?;
        if truncation_tail(&rho) < TRUNCATION_TAIL {
            return Ok((trial, rho));
        }
        n_max += TRUNCATION_STEP;
    }
    Err(Error::TruncationCapExceeded { cap: TRUNCATION_CAP })
}

/// Smallest `n_max` in `8, 12, …, 40` whose steady state keeps less than
/// `1e-8` population in its top two Fock levels.
pub fn auto_truncate(p: &SystemParams) -> Result<usize> {
    steady_state_auto(p).map(|(q, _)| q.n_max)
}

/// Output times `t0, t0 + Δt, …, t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_steps: usize) -> Result<Self> {
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidParams(format!(
                "time grid needs t1 > t0, got [{t0}, {t1}]"
            )));
        }
        if n_steps < 1 {
            return Err(Error::InvalidParams("time grid needs at least one step".into()));
        }
        Ok(Self { t0, t1, n_steps })
    }

    pub fn times(&self) -> Vec<f64> {
        let dt = (self.t1 - self.t0) / self.n_steps as f64;
        (0..=self.n_steps)
            .map(|k| {
                if k == self.n_steps {
                    self.t1
                } else {
                    self.t0 + dt * k as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

/// Compressed-row copy of a superoperator for fast repeated products.
struct SparseGenerator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseGenerator {
    fn new(l: &CMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(l.nrows() + 1);
        let (mut cols, mut vals) = (Vec::new(), Vec::new());
        row_ptr.push(0);
        for r in 0..l.nrows() {
            for c in 0..l.ncols() {
                let z = l[(r, c)];
                if z != C64::new(0.0, 0.0) {
                    cols.push(c);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { row_ptr, cols, vals }
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let range = self.row_ptr[r]..self.row_ptr[r + 1];
            *o = self.cols[range.clone()]
                .iter()
                .zip(&self.vals[range])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    fn max_row_sum(&self) -> f64 {
        (0..self.row_ptr.len() - 1)
            .map(|r| {
                self.vals[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|z| z.norm())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Integrator<'a> {
    gen: &'a SparseGenerator,
    opts: EvolveOptions,
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    next: Vec<C64>,
    steps: usize,
}

impl<'a> Integrator<'a> {
    fn new(gen: &'a SparseGenerator, n: usize, opts: EvolveOptions) -> Self {
        Self {
            gen,
            opts,
            k: vec![vec![C64::new(0.0, 0.0); n]; 7],
            stage: vec![C64::new(0.0, 0.0); n],
            next: vec![C64::new(0.0, 0.0); n],
            steps: 0,
        }
    }

    /// Advances `y` from `t` to `t_end`; `h` carries the step-size proposal
    /// between calls.
    // Stage and component loops index several arrays in lockstep.
    #[allow(clippy::needless_range_loop)]
    fn advance(&mut self, y: &mut [C64], t: &mut f64, t_end: f64, h: &mut f64) -> Result<()> {
        let mut fresh = true;
        while *t < t_end {
            let remaining = t_end - *t;
            let clipped = remaining <= *h;
            let step = if clipped { remaining } else { *h };
            let h_min = 1e-14 * t.abs().max(1.0);
            if step < h_min && !clipped {
                return Err(Error::StepSizeUnderflow { t: *t, h: step });
            }
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepSizeUnderflow { t: *t, h: step });
            }
            if fresh {
                self.gen.apply(y, &mut self.k[0]);
                fresh = false;
            }
            for s in 1..7 {
                for (i, st) in self.stage.iter_mut().enumerate() {
                    let mut acc = y[i];
                    for (j, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += self.k[j][i] * (step * a);
                        }
                    }
                    *st = acc;
                }
                self.gen.apply(&self.stage, &mut self.k[s]);
            }
            // Stage 7 is evaluated at the fifth-order solution (FSAL).
            self.next.copy_from_slice(&self.stage);
            let mut err: f64 = 0.0;
            for i in 0..y.len() {
                let mut e = C64::new(0.0, 0.0);
                for (j, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += self.k[j][i] * w;
                    }
                }
                let scale = self.opts.atol + self.opts.rtol * y[i].norm().max(self.next[i].norm());
                err = err.max((e * step).norm() / scale);
            }
            self.steps += 1;
            if err <= 1.0 {
                *t = if clipped { t_end } else { *t + step };
                y.copy_from_slice(&self.next);
                self.k.swap(0, 6);
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !clipped || factor < 1.0 {
                    *h = step * factor;
                }
            } else {
                *h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        Ok(())
    }
}

/// Integrates `ρ̇ = Lρ` with an adaptive Dormand–Prince 5(4) pair and hands
/// the state at every grid time to `visit`, starting with `rho0` itself at
/// `grid.t0`.
///
/// Each state is checked against [`DensityTolerances::INTEGRATED`]; drift is
/// reported, never corrected. On error the states visited so far remain
/// valid.
pub fn evolve_visit(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: EvolveOptions,
    mut visit: impl FnMut(f64, &DensityMatrix),
) -> Result<()> {
    let spec = l.spec();
    spec.ensure_same(&rho0.spec())?;
    let d = spec.dim();
    let gen = SparseGenerator::new(l.matrix());
    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let mut integrator = Integrator::new(&gen, y.len(), opts);
    let times = grid.times();
    let mut h = 0.05 / gen.max_row_sum().max(1e-12);
    let mut t = grid.t0;
    visit(t, rho0);
    for &target in &times[1..] {
        integrator.advance(&mut y, &mut t, target, &mut h)?;
        let m = CMatrix::from_column_slice(d, d, &y);
        let rho =
            DensityMatrix::with_tolerances(spec, m, DensityTolerances::INTEGRATED).map_err(|e| Error::StateDrift {
                t,
                reason: e.to_string(),
            })?;
        visit(target, &rho);
    }
    Ok(())
}

/// [`evolve_visit`] collecting every state, `rho0` first.
pub fn evolve_with(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    opts: EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    let mut out = Vec::with_capacity(grid.n_steps + 1);
    evolve_visit(l, rho0, grid, opts, |_, rho| out.push(rho.clone()))?;
    Ok(out)
}

/// [`evolve_with`] for the generator of `p` and default tolerances.
pub fn evolve(p: &SystemParams, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Vec<DensityMatrix>> {
    evolve_with(&liouvillian(p)?, rho0, grid, EvolveOptions::default())
}

/// Exact closed-system evolution `e^{-iHt}|ψ₀⟩` at the given times, through
/// one diagonalisation of `H`.
pub fn propagate_pure(h: &Operator, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    let spec: HilbertSpec = h.spec();
    spec.ensure_same(&psi0.spec())?;
    let (energies, vectors) = linalg::hermitian_eigen(h.matrix());
    let coeffs = vectors.adjoint() * psi0.amplitudes();
    times
        .iter()
        .map(|&t| {
            let phased = CVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(energies.iter())
                    .map(|(c, e)| c * C64::from_polar(1.0, -e * t)),
            );
            StateVector::from_amplitudes(spec, &vectors * phased)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_ket, expectation, number};
    use crate::observables;
    use approx::assert_abs_diff_eq;

    fn decay_only(n_max: usize) -> SystemParams {
        SystemParams {
            g: 0.0,
            omega12: 0.0,
            omega23: 0.0,
            n_max,
            ..SystemParams::default()
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let coords = HermitianCoords::new(3);
        let m = crate::test_support::random_hermitian(3, 11);
        let mut x = vec![0.0; 9];
        coords.project(m.as_slice(), &mut x);
        assert!(linalg::max_abs_diff(&coords.assemble(&x), &m) < 1e-15);
    }

    #[test]
    fn all_couplings_zero_is_degenerate() {
        let l = liouvillian(&decay_only(3)).unwrap();
        assert!(matches!(steady_state(&l), Err(Error::DegenerateSteadyState { .. })));
    }

    #[test]
    fn closed_system_is_degenerate() {
        let p = SystemParams::default().with_n_max(3).closed();
        assert!(matches!(
            steady_state(&liouvillian(&p).unwrap()),
            Err(Error::DegenerateSteadyState { .. })
        ));
    }

    #[test]
    fn ground_drive_alone_is_degenerate() {
        // Ω₁₂ alone rotates within {|1,0⟩, |2,0⟩} with nothing to damp it, so
        // both of its eigenstates are stationary.
        let p = SystemParams {
            omega12: 0.3,
            ..decay_only(3)
        };
        assert!(steady_state(&liouvillian(&p).unwrap()).is_err());
    }

    #[test]
    fn resonant_point_produces_photons_without_excitation() {
        let p = SystemParams::default();
        let l = liouvillian(&p).unwrap();
        let rho = steady_state(&l).unwrap();
        let spec = rho.spec();
        let n = expectation(&rho, &number(spec)).unwrap().re;
        let p33 = observables::excited_population(&rho);
        assert!(n > 1e-3, "photon number {n}");
        assert!(n / p33 > 50.0, "ratio {}", n / p33);
        let residual = linalg::frobenius_norm(&l.apply(rho.matrix()));
        assert!(residual < 1e-10 * l.frobenius_norm());
    }

    #[test]
    fn detuned_two_photon_line_is_empty() {
        let p = SystemParams {
            delta12: 5.0,
            delta23: -5.0,
            ..SystemParams::default()
        };
        let rho = steady_state(&liouvillian(&p).unwrap()).unwrap();
        assert!(observables::photon_number(&rho) < 1e-3);
        assert!(observables::excited_population(&rho) < 1e-3);
    }

    #[test]
    fn auto_truncation_floor_for_vacuum() {
        // Without the ground-state drive |1,0⟩ is the unique attractor.
        let p = SystemParams {
            omega12: 0.0,
            ..SystemParams::default()
        };
        assert_eq!(auto_truncate(&p).unwrap(), TRUNCATION_START);
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        let g = TimeGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn photon_decay_is_exponential() {
        let p = decay_only(3);
        let spec = p.spec().unwrap();
        let rho0 = DensityMatrix::basis(1, 1, spec).unwrap();
        let traj = evolve(&p, &rho0, &TimeGrid::new(0.0, 1.0, 4).unwrap()).unwrap();
        for (rho, t) in traj.iter().zip(TimeGrid::new(0.0, 1.0, 4).unwrap().times()) {
            assert_abs_diff_eq!(observables::photon_number(rho), (-2.0 * t).exp(), epsilon = 1e-6);
        }
    }

    #[test]
    fn ground_state_rabi_oscillation() {
        let p = SystemParams {
            g: 0.0,
            omega23: 0.0,
            omega12: 0.7,
            n_max: 2,
            ..SystemParams::default()
        }
        .closed();
        let spec = p.spec().unwrap();
        let rho0 = DensityMatrix::basis(1, 0, spec).unwrap();
        let grid = TimeGrid::new(0.0, 3.0, 12).unwrap();
        let traj = evolve(&p, &rho0, &grid).unwrap();
        for (rho, t) in traj.iter().zip(grid.times()) {
            // Rabi frequency 2Ω₁₂ ⇒ P₂ = sin²(Ω₁₂ t).
            assert_abs_diff_eq!(rho.population(2, 0).unwrap(), (0.7 * t).sin().powi(2), epsilon = 1e-8);
        }
    }

    #[test]
    fn pure_propagation_matches_integrator() {
        let p = SystemParams {
            n_max: 3,
            ..SystemParams::default()
        }
        .closed();
        let spec = p.spec().unwrap();
        let psi0 = basis_ket(1, 0, spec).unwrap();
        let times = [0.0, 0.4, 1.3];
        let states = propagate_pure(&crate::model::hamiltonian(&p).unwrap(), &psi0, &times).unwrap();
        let traj = evolve(&p, &psi0.to_density().unwrap(), &TimeGrid::new(0.0, 1.3, 1).unwrap()).unwrap();
        let last = traj.last().unwrap();
        assert_abs_diff_eq!(last.overlap(&states[2]).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(states[0].fidelity(&psi0).unwrap(), 1.0, epsilon = 1e-14);
    }
}
