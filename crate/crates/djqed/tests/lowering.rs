//! Schedule-level checks: every compiled entangling-gate schedule,
//! integrated as a closed system, must reproduce the qutrit embedding of
//! its source gate.

use num_complex::Complex64 as C64;

use djqed::linalg::{state_fidelity, ComplexMatrix, DensityMatrix, StateVector};
use djqed::lindblad::{default_dt, evolve_segment, run_joint_op, HilbertSpace, SimConfig};
use djqed::params::{CouplingParams, NoiseParams};
use djqed::pulse::Schedule;
use djqed::synth::{gate_matrix_qutrit, GateOp};
use djqed::JointOpId;

const FIDELITY_TOL: f64 = 1e-9;
const VACUUM_TOL: f64 = 1e-9;

fn closed_params() -> CouplingParams {
    CouplingParams::default().without_spurious()
}

/// Every computational basis state with distinct amplitude, cavity in
/// vacuum, so any wrong diagonal phase shows up in the fidelity.
fn probe_state(space: &HilbertSpace) -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); space.dim()];
    let norm: f64 = (1..=8).map(|w| (w * w) as f64).sum::<f64>();
    for m in 0..8usize {
        amps[space.index([m >> 2 & 1, m >> 1 & 1, m & 1], 0)] =
            C64::new((m + 1) as f64 / norm.sqrt(), 0.0);
    }
    StateVector::new(amps).unwrap()
}

fn run_closed(schedule: &Schedule, space: &HilbertSpace, start: &StateVector) -> ComplexMatrix {
    let params = closed_params();
    let dt = default_dt(&params) / 8.0;
    let mut rho = start.outer();
    for segment in schedule.segments() {
        evolve_segment(&mut rho, segment, &params, &NoiseParams::zero(), space, dt).unwrap();
    }
    rho
}

fn vacuum_population(rho: &ComplexMatrix, space: &HilbertSpace) -> f64 {
    (0..27).map(|q| rho.get(q * space.cavity_dim(), q * space.cavity_dim()).re).sum()
}

fn check_gate_schedule(schedule: &Schedule, gate: &GateOp) {
    let space = HilbertSpace::new(3).unwrap();
    let start = probe_state(&space);
    let rho = run_closed(schedule, &space, &start);
    let embedded = gate_matrix_qutrit(gate).tensor(&ComplexMatrix::identity(space.cavity_dim()));
    let expected = start.apply(&embedded);
    let fidelity = state_fidelity(&expected, &DensityMatrix::new_unchecked(rho.clone())).unwrap();
    assert!(
        fidelity > 1.0 - FIDELITY_TOL,
        "{}: fidelity {fidelity} below tolerance",
        schedule.source
    );
    let vacuum = vacuum_population(&rho, &space);
    assert!(
        vacuum > 1.0 - VACUUM_TOL,
        "{}: cavity vacuum population {vacuum}",
        schedule.source
    );
}

#[test]
fn every_controlled_phase_schedule_realizes_its_gate() {
    let p = closed_params();
    for control in 1..=3usize {
        for target in 1..=3usize {
            if control == target {
                continue;
            }
            let schedule = djqed::compile_cp(control, target, p.g01, p.g12).unwrap();
            check_gate_schedule(&schedule, &GateOp::Cp { control, target });
        }
    }
}

#[test]
fn every_two_target_schedule_realizes_its_gate() {
    let p = closed_params();
    for (control, targets) in [(1, (2, 3)), (2, (1, 3)), (3, (1, 2))] {
        let schedule = djqed::compile_two_target(control, targets.0, targets.1, p.g01, p.g12).unwrap();
        check_gate_schedule(&schedule, &GateOp::TwoTargetCp { control, targets });
    }
}

#[test]
fn photon_cutoff_three_is_exact() {
    // three excitations can never make a fourth photon, so raising the
    // cutoff must not change anything, closed or lossy
    let closed = closed_params();
    let dt = default_dt(&closed);
    let with_noise = CouplingParams::default();
    let noisy_dt = default_dt(&with_noise);
    for (params, noise, dt) in [
        (closed, NoiseParams::zero(), dt),
        (with_noise, NoiseParams::default(), noisy_dt),
    ] {
        let at = |cutoff| {
            let config = SimConfig { photon_cutoff: cutoff, dt_override: Some(dt) };
            run_joint_op(JointOpId::U3, &params, &noise, &config).unwrap().fidelity
        };
        let f3 = at(3);
        let f4 = at(4);
        assert!((f3 - f4).abs() < 1e-12, "cutoff 3 vs 4: {f3} vs {f4}");
    }
}
