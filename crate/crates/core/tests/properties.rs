use proptest::prelude::*;
use squeezeprep::evolve::{self, AdiabaticFidelity, EvolveOptions, Observer, Schedule};
use squeezeprep::states::{self, SpinZeroModes};
use squeezeprep::*;

fn residual(m: &CMatrix<f64>, v: &CVector<f64>) -> f64 {
    (m * v).norm()
}

fn spin(j: u32) -> LadderRep<f64> {
    spin_ladder(SpinMagnitude::integer(j).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn squeezed_vacuum_solves_bogoliubov(theta in -1.3f64..0.0) {
        let (mu, nu) = states::bogoliubov_coeffs(theta).unwrap();
        prop_assert!((mu * mu - nu * nu - 1.0).abs() < 1e-12);
        let rep = osc_ladder::<f64>(300).unwrap();
        let phi = states::squeezed_vacuum(mu, nu, 300).unwrap();
        let k = rep.lowering();
        let op = k.map(|z| z * mu) + rep.raising().map(|z| z * nu);
        prop_assert!(residual(&op, &phi) < 1e-10);
        let (_, vx, _, vp) = states::quadrature_moments(&rep, &phi);
        prop_assert!((vx * vp - 1.0).abs() < 1e-9);
    }

    #[test]
    fn intelligent_state_is_zero_mode(j in 1u32..16, ratio in 0.01f64..0.49) {
        let rep = spin(j);
        let p = CouplingPoint::new(1.0, ratio).unwrap();
        let ansatz = states::zero_product_state(&rep, &p).unwrap();
        let h = build_interaction(&rep, &p);
        prop_assert!(residual(&h, ansatz.joint.amplitudes()) < 1e-10 * (2.0 * j as f64).sqrt());
    }

    #[test]
    fn super_state_is_zero_mode(j in 1u32..16, ratio in 0.5f64..5.0) {
        let rep = spin(j);
        let p = CouplingPoint::new(1.0, ratio).unwrap();
        let modes = SpinZeroModes::new(&rep).unwrap();
        let ansatz = modes.product_state(&p).unwrap();
        let h = build_interaction(&rep, &p);
        prop_assert!(residual(&h, ansatz.joint.amplitudes()) < 1e-10 * ratio * j as f64);
    }

    #[test]
    fn spectrum_is_paired(twice_j in 1u32..24, u in 0.0f64..1.0) {
        let rep = spin_ladder::<f64>(SpinMagnitude::from_twice(twice_j).unwrap()).unwrap();
        let pt = spectrum_point(&rep, &InteractionParts::new(&rep), CouplingPoint::from_u(1.0, u).unwrap(), 5).unwrap();
        prop_assert!(pt.pairing_residual <= 1e-10 * pt.spectral_radius);
        if twice_j % 2 == 0 {
            prop_assert!(pt.has_zero_mode());
        }
    }

    #[test]
    fn rx_commutes_with_hamiltonian(j in 1u32..12, u in 0.0f64..1.0) {
        let rep = spin(j);
        let rx = symmetry_op(&rep, SymmetryKind::Rx).unwrap();
        let h = build_interaction(&rep, &CouplingPoint::from_u(1.0, u).unwrap());
        let c = &h * &rx - &rx * &h;
        prop_assert!(c.iter().all(|z| z.norm() < 1e-11));
    }

    #[test]
    fn snapshot_round_trip(seed in proptest::collection::vec(-1.0f64..1.0, 16), t in 0.0f64..100.0) {
        let amps = CVector::from_fn(8, |i, _| Cx::new(seed[2 * i], seed[2 * i + 1] + 1e-3));
        let state = JointState::from_amplitudes(amps, 4).unwrap();
        let snap = evolve::Snapshot { step: 7, t, u: t / 100.0, state };
        let mut buf = Vec::new();
        evolve::write_snapshot(&mut buf, &snap).unwrap();
        let back: evolve::Snapshot<f64> = evolve::read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(back.t, snap.t);
        prop_assert_eq!(back.state.amplitudes(), snap.state.amplitudes());
    }
}

#[test]
fn reference_continuity_converges_at_the_boundary() {
    let rep = spin(10);
    let modes = SpinZeroModes::new(&rep).unwrap();
    let overlap = |eps: f64| {
        let a = modes.adiabatic_reference(&CouplingPoint::new(1.0, 0.5 - eps).unwrap()).unwrap();
        let b = modes.adiabatic_reference(&CouplingPoint::new(1.0, 0.5 + eps).unwrap()).unwrap();
        fidelity(&a, &b).unwrap().sqrt()
    };
    let gaps: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&e| 1.0 - overlap(e)).collect();
    for w in gaps.windows(2) {
        assert!(w[1] < w[0] / 5.0, "{gaps:?}");
    }
    assert!(gaps[3] < 1e-5, "{gaps:?}");
    let critical = modes.adiabatic_reference(&CouplingPoint::new(1.0, 0.5).unwrap()).unwrap();
    let below = modes.adiabatic_reference(&CouplingPoint::new(1.0, 0.5 - 1e-6).unwrap()).unwrap();
    assert!(fidelity(&critical, &below).unwrap() > 1.0 - 1e-5);
}

#[test]
fn half_integer_gap_grows_with_drive() {
    let rep = spin_ladder::<f64>(SpinMagnitude::from_ratio(9, 2).unwrap()).unwrap();
    let parts = InteractionParts::new(&rep);
    let gap = |u: f64| {
        spectrum_point(&rep, &parts, CouplingPoint::from_u(1.0, u).unwrap(), 3)
            .unwrap()
            .zero_mode_gap
    };
    let gaps: Vec<f64> = [0.1, 0.3, 0.5, 0.7].iter().map(|&u| gap(u)).collect();
    assert!(gaps.windows(2).all(|w| w[1] > w[0]), "{gaps:?}");
    assert!(gaps[0] > 0.0);
}

#[test]
fn single_precision_matches_double() {
    let r32 = osc_ladder::<f32>(40).unwrap();
    let r64 = osc_ladder::<f64>(40).unwrap();
    let p32 = CouplingPoint::new(1.0f32, 0.3).unwrap();
    let p64 = CouplingPoint::new(1.0f64, 0.3).unwrap();
    let e32 = eig_herm(&build_interaction(&r32, &p32)).unwrap();
    let e64 = eig_herm(&build_interaction(&r64, &p64)).unwrap();
    for (a, b) in e32.values.iter().zip(e64.values.iter()) {
        assert!((*a as f64 - b).abs() < 1e-4 * (1.0 + b.abs()));
    }

    let sched = Schedule::Ramp(RampSchedule::new(1.0f32, 5.0).unwrap());
    let traj = evolve::propagate(&r32, &sched, &evolve::ground_start(&r32), &EvolveOptions::new(0.01f32), &mut []).unwrap();
    assert!(traj.max_norm_drift < 1e-4);
    let sched64 = Schedule::Ramp(RampSchedule::new(1.0f64, 5.0).unwrap());
    let traj64 = evolve::propagate(&r64, &sched64, &evolve::ground_start(&r64), &EvolveOptions::new(0.01f64), &mut []).unwrap();
    let (a, b) = (traj.rho_gg.last().unwrap(), traj64.rho_gg.last().unwrap());
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn krylov_and_spectral_propagators_agree() {
    let rep = spin(5);
    let sched = Schedule::Ramp(RampSchedule::new(1.0, 50.0).unwrap());
    let start = evolve::ground_start(&rep);
    let k = evolve::propagate(&rep, &sched, &start, &EvolveOptions::new(0.01), &mut []).unwrap();
    let opts = EvolveOptions::new(0.01).propagator(Propagator::Spectral);
    let s = evolve::propagate(&rep, &sched, &start, &opts, &mut []).unwrap();
    let f = fidelity(&k.final_state, &s.final_state).unwrap();
    assert!(1.0 - f < 1e-11, "{}", 1.0 - f);
}

fn min_reference_fidelity(duration: f64) -> f64 {
    let rep = spin(10);
    let sched = Schedule::Ramp(RampSchedule::new(1.0, duration).unwrap());
    let mut obs: Vec<Box<dyn Observer<f64>>> = vec![Box::new(AdiabaticFidelity::new(&rep).unwrap())];
    let traj = evolve::propagate(&rep, &sched, &evolve::ground_start(&rep), &EvolveOptions::new(0.01).decimation(1000), &mut obs).unwrap();
    let f = traj.series("fidelity_adiabatic").unwrap();
    traj.u
        .iter()
        .zip(f)
        .filter(|(u, _)| (**u - 0.5).abs() >= 0.01)
        .map(|(_, f)| *f)
        .fold(1.0, f64::min)
}

/// Slow: about 80 s in the test profile.
#[test]
#[ignore]
fn slower_ramps_track_the_reference_better() {
    let f: Vec<f64> = [5000.0, 10000.0, 20000.0].iter().map(|&t| min_reference_fidelity(t)).collect();
    assert!(f[0] < f[1] && f[1] < f[2], "{f:?}");
}
