//! Closed-form tables: the dark-state ladder and the strong-drive cat scan.

use super::config::{RunConfig, Truncation};
use super::table::{Cell, Table};
use crate::darkstates::{bright_energies, dark_decay_rate, ladder_coupling, qn_rn};
use crate::error::{Error, Result};
use crate::hilbert::{basis_ket, HilbertSpec, C64};
use crate::model::{hamiltonian, SystemParams};
use crate::solvers::{propagate_pure, TRUNCATION_CAP, TRUNCATION_START, TRUNCATION_STEP};
use crate::strongdrive::{cat_state, coherent_amplitudes, drive_frame, eff_hamiltonian_strong, time_for_angle};

/// One row per rung `n = 0..=n_max`: `Qₙ`, `Rₙ`, decay rate `Γₙ⁰`, bright
/// energies `E±` and the drive coupling to rung `n + 1`.
///
/// Rung 0 uses `(Q₀, R₀) = (1, 0)` and does not decay.
pub fn run_darkstate_report(p: &SystemParams, n_max: usize, metadata: Vec<String>) -> Result<Table> {
    let header = ["n", "q", "r", "decay_rate", "e_plus", "e_minus", "ladder_coupling"];
    let mut table = Table::new(metadata, header.iter().map(|s| s.to_string()).collect());
    for n in 0..=n_max {
        let (q, r, rate) = if n == 0 {
            (1.0, 0.0, 0.0)
        } else {
            let (q, r) = qn_rn(n, p.g, p.omega23)?;
            (q, r, dark_decay_rate(n, p)?)
        };
        let (e_plus, e_minus) = bright_energies(n, p);
        table.rows.push(vec![
            Cell::Int(n),
            q.into(),
            r.into(),
            rate.into(),
            e_plus.into(),
            e_minus.into(),
            ladder_coupling(n, p)?.into(),
        ]);
    }
    Ok(table)
}

/// Smallest truncation on the automatic ladder that holds the largest cat
/// amplitude `2Ω₂₃/g`.
pub fn cat_truncation(p: &SystemParams) -> Result<usize> {
    let alpha = C64::from(2.0 * p.omega23 / p.g);
    let mut n = TRUNCATION_START;
    while n <= TRUNCATION_CAP {
        if coherent_amplitudes(alpha, HilbertSpec::new(n)?).is_ok() {
            return Ok(n);
        }
        n += TRUNCATION_STEP;
    }
    Err(Error::TruncationCapExceeded { cap: TRUNCATION_CAP })
}

/// Closed-system evolution from `|1,0⟩` sampled at `points` rotation angles
/// in `[0, π]`, compared with the analytic cat state.
///
/// `fidelity_effective` evolves under the strong-drive effective
/// Hamiltonian; `fidelity_exact` evolves under the full Hamiltonian and
/// removes the fast ground-state rotation before comparing. Decay rates in
/// the config are ignored.
pub fn run_catscan(cfg: &RunConfig) -> Result<Table> {
    let p = cfg.params.closed();
    let n_max = match cfg.truncation {
        Truncation::Auto => cat_truncation(&p)?,
        Truncation::Fixed(n) => n,
    };
    let p = p.with_n_max(n_max);
    let spec = p.spec()?;
    let last = (cfg.catscan_points - 1) as f64;
    let angles: Vec<f64> = (0..cfg.catscan_points)
        .map(|i| std::f64::consts::PI * i as f64 / last)
        .collect();
    let times = angles
        .iter()
        .map(|&a| time_for_angle(a, &p))
        .collect::<Result<Vec<_>>>()?;

    let psi0 = basis_ket(1, 0, spec)?;
    let effective = propagate_pure(&eff_hamiltonian_strong(&p, spec)?, &psi0, &times)?;
    let exact = propagate_pure(&hamiltonian(&p)?, &psi0, &times)?;

    let header = [
        "theta_rot",
        "t",
        "phi",
        "alpha_plus_re",
        "alpha_plus_im",
        "alpha_minus_re",
        "alpha_minus_im",
        "fidelity_effective",
        "fidelity_exact",
    ];
    let mut metadata = cfg.resolved_lines();
    metadata.pop();
    metadata.push(format!("catscan.points = {}", cfg.catscan_points));
    let mut table = Table::new(metadata, header.iter().map(|s| s.to_string()).collect());
    for (i, (&theta, &t)) in angles.iter().zip(&times).enumerate() {
        let cat = cat_state(t, &p)?;
        let target = cat.state_vector(spec)?;
        let rotated = drive_frame(&p, t, spec).apply(&exact[i])?;
        table.rows.push(vec![
            theta.into(),
            t.into(),
            cat.phi.into(),
            cat.alpha_plus.re.into(),
            cat.alpha_plus.im.into(),
            cat.alpha_minus.re.into(),
            cat.alpha_minus.im.into(),
            target.fidelity(&effective[i])?.into(),
            target.fidelity(&rotated)?.into(),
        ]);
    }
    Ok(table)
}
