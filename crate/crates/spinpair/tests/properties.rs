//! Property tests for algebraic, propagation and oracle invariants.

use std::f64::consts::PI;

use proptest::prelude::*;
use spinpair::analytics::*;
use spinpair::hamiltonian::h_free;
use spinpair::propagate::*;
use spinpair::sequences::*;
use spinpair::spincore::*;
use spinpair::{Complex64, SpinSystem};

fn pair() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4).prop_filter("distinct levels", |(r, s)| r != s)
}

fn axis() -> impl Strategy<Value = Axis> {
    prop_oneof![Just(Axis::X), Just(Axis::Y), Just(Axis::Z)]
}

fn system() -> impl Strategy<Value = SpinSystem> {
    (10.0..500.0f64, -60.0..60.0f64, -300.0..300.0f64)
        .prop_map(|(j, d, s)| SpinSystem::new(j, d).with_offset_sum(s))
}

fn event() -> impl Strategy<Value = Event> {
    prop_oneof![
        (0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(f, p)| Event::pulse(f, p)),
        (0.0..2e5f64, 0.0..2.0 * PI, 0.0..5e-3f64).prop_map(|(w, p, d)| Event::fpulse(w, p, d)),
        (0.0..0.05f64).prop_map(Event::delay),
    ]
}

fn sequence() -> impl Strategy<Value = Sequence> {
    prop::collection::vec(event(), 1..10).prop_map(|ev| Sequence::from_events("random", ev))
}

fn hermitian() -> impl Strategy<Value = Operator> {
    prop::collection::vec(-1.0..1.0f64, 16).prop_map(|v| {
        let mut a = Operator::zero();
        for r in 1..=4 {
            for s in r..=4 {
                let k = 4 * (r - 1) + (s - 1);
                let (re, im) = if r == s { (v[k], 0.0) } else { (v[k], v[4 * (s - 1) + (r - 1)]) };
                a += Operator::ket_bra(r, s).unwrap() * Complex64::new(re, im);
                if r != s {
                    a += Operator::ket_bra(s, r).unwrap() * Complex64::new(re, -im);
                }
            }
        }
        a
    })
}

fn trace_powers(a: &Operator) -> [Complex64; 4] {
    let mut p = *a;
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for o in out.iter_mut() {
        *o = p.trace();
        p = p * *a;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn single_transition_su2_algebra((r, s) in pair()) {
        let (x, y, z) = (ist(r, s, Axis::X), ist(r, s, Axis::Y), ist(r, s, Axis::Z));
        let i = Complex64::new(0.0, 1.0);
        prop_assert!(x.commutator(&y).max_abs_diff(&(z * i)) < 1e-15);
        prop_assert!(y.commutator(&z).max_abs_diff(&(x * i)) < 1e-15);
        prop_assert!(z.commutator(&x).max_abs_diff(&(y * i)) < 1e-15);
    }

    #[test]
    fn rotations_are_4pi_periodic((r, s) in pair(), ax in axis(), beta in -10.0..10.0f64) {
        let a = rotation_op(r, s, ax, beta).unwrap();
        let b = rotation_op(r, s, ax, beta + 4.0 * PI).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
        let c = rotation_op(r, s, ax, beta + 2.0 * PI).unwrap();
        prop_assert!(a.max_abs_diff(&c) > 0.5);
    }

    #[test]
    fn cycle_operator_is_axis_independent((r, s) in pair(), ax in axis()) {
        let c = cycle_op(r, s).unwrap();
        prop_assert!(rotation_op(r, s, ax, 2.0 * PI).unwrap().max_abs_diff(&c) < 1e-14);
    }

    #[test]
    fn bracket_is_unitarily_invariant(a in hermitian(), b in hermitian(), seq in sequence(), sys in system()) {
        let u = sequence_propagator(&seq, &sys).unwrap();
        let lhs = liouville_bracket(&a.sandwich(&u), &b.sandwich(&u)).unwrap();
        let rhs = liouville_bracket(&a, &b).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-11);
    }

    #[test]
    fn free_hamiltonian_structure(sys in system()) {
        let h = h_free(&sys);
        prop_assert!(h.trace().norm() < 1e-9);
        prop_assert!(h.hermiticity_error() < 1e-12);
        let m = [0, 1, 0, -1];
        for r in 1..=4 {
            for s in 1..=4 {
                if m[r - 1] != m[s - 1] {
                    prop_assert_eq!(h.el(r, s), Complex64::new(0.0, 0.0));
                }
            }
        }
        let sigma = h_free(&SpinSystem::new(0.0, 0.0).with_offset_sum(sys.offset_sum_hz));
        let rest = h_free(&SpinSystem::new(sys.j_hz, sys.delta_hz));
        prop_assert!(sigma.commutator(&rest).max_abs() < 1e-6);
    }

    #[test]
    fn propagation_preserves_unitarity_and_spectrum(seq in sequence(), sys in system(), rho in hermitian(), eps in -0.1..0.1f64) {
        let u = sequence_propagator_with_error(&seq, &sys, eps).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12);
        let out = evolve_with_error(&rho, &seq, &sys, eps).unwrap();
        prop_assert!(out.hermiticity_error() < 1e-12);
        for (a, b) in trace_powers(&rho).iter().zip(trace_powers(&out).iter()) {
            prop_assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn delays_split(sys in system(), a in 0.0..0.05f64, b in 0.0..0.05f64) {
        let whole = Sequence::from_events("d", vec![Event::delay(a + b)]);
        let split = Sequence::from_events("d", vec![Event::delay(a), Event::delay(b)]);
        let (u, v) = (sequence_propagator(&whole, &sys).unwrap(), sequence_propagator(&split, &sys).unwrap());
        prop_assert!(u.max_abs_diff(&v) < 1e-11);
    }

    #[test]
    fn slic_pulse_splits(n1 in 1usize..15, n2 in 1usize..15) {
        let sys = SpinSystem::reference_pair();
        let wj = sys.omega_j();
        let whole = Sequence::from_events("s", vec![Event::fpulse(wj, 0.0, (n1 + n2) as f64 * sys.tau_j())]);
        let split = Sequence::from_events("s", vec![
            Event::fpulse(wj, 0.0, n1 as f64 * sys.tau_j()),
            Event::fpulse(wj, 0.0, n2 as f64 * sys.tau_j()),
        ]);
        let (u, v) = (sequence_propagator(&whole, &sys).unwrap(), sequence_propagator(&split, &sys).unwrap());
        prop_assert!(u.max_abs_diff(&v) < 1e-10);
    }

    #[test]
    fn zfilter_is_idempotent(rho in hermitian()) {
        let once = apply_zfilter(&rho);
        prop_assert_eq!(apply_zfilter(&once), once);
    }

    #[test]
    fn dqf_is_invariant_under_global_phase(phi in 0.0..2.0 * PI, n in 10usize..25) {
        let sys = SpinSystem::reference_pair();
        let (exc, rec) = slic_b_pair(&sys, n).unwrap();
        let cycle = PhaseCycleSpec::standard();
        let a = dqf_amplitude(&exc, &rec, &cycle, &sys).unwrap().magnitude;
        let b = dqf_amplitude(&exc.phase_shifted(phi), &rec.phase_shifted(phi), &cycle, &sys).unwrap().magnitude;
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn text_format_round_trips(seq in sequence()) {
        let back = Sequence::from_text("random", &seq.to_text()).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn amplitudes_are_bounded(t in 0.0..0.5f64, th in 0.0..1.5f64, eps in -0.5..0.5f64, alpha in 0.5..1.0f64) {
        let sys = SpinSystem::reference_pair();
        let w12 = omega_nut12_r431(&sys);
        let p = cslic_params_finite(eps, alpha).unwrap();
        let all = [
            a_dq_inadequate(th, sys.omega_j(), t),
            a_dq_pulsepol(t, w12),
            a_dq_slic_a(&sys, t),
            a_dq_slic_b(&sys, t),
            a_dq_cslic(&sys, t, &p),
        ];
        for a in all {
            prop_assert!(a.norm() <= 1.0 + 1e-12);
        }
        prop_assert!((a_dqf_inadequate(th, sys.omega_j(), t) - all[0].norm_sqr()).abs() < 1e-14);
        prop_assert!((a_dqf_pulsepol(t, w12) - all[1].norm_sqr()).abs() < 1e-14);
        prop_assert!((a_dqf_slic_b(&sys, t) - all[3].norm_sqr()).abs() < 1e-14);
        prop_assert!((a_dqf_cslic(&sys, t, &p) - all[4].norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn spinor_oracles_are_4pi_periodic(beta in 0.0..8.0 * PI) {
        let sys = SpinSystem::reference_pair();
        let w12 = omega_nut12_r431(&sys);
        let a = a_dq_pulsepol(beta / w12, w12);
        let b = a_dq_pulsepol((beta + 4.0 * PI) / w12, w12);
        prop_assert!((a - b).norm() < 1e-12);
        // a_dq_slic_b at integer τ_J, where the fast factor is 1
        let n = (beta / (KAPPA_SLIC * sys.omega_delta() * sys.tau_j())).round();
        let t = n * sys.tau_j();
        let t4 = t + 4.0 * PI / (KAPPA_SLIC * sys.omega_delta());
        let env = |t: f64| (0.25 * beta12_slic(&sys, t)).sin().powi(2);
        prop_assert!((a_dq_slic_b(&sys, t).im - env(t)).abs() < 1e-9);
        prop_assert!((env(t) - env(t4)).abs() < 1e-12);
    }

    #[test]
    fn slic_error_form_reduces_at_zero_error(t in 0.0..0.2f64) {
        let sys = SpinSystem::reference_pair();
        prop_assert!((a_dq_slic_a_with_error(&sys, t, 0.0) - a_dq_slic_a(&sys, t)).norm() < 1e-12);
    }

    #[test]
    fn finite_cslic_params_reduce_at_unit_alpha(eps in -0.5..0.5f64) {
        let (f, p) = (cslic_params_finite(eps, 1.0).unwrap(), cslic_params(eps));
        prop_assert!((f.theta_eps - p.theta_eps).abs() < 1e-12);
        prop_assert!((f.kappa_prime - p.kappa_prime).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cslic_approaches_slic_for_strong_compensation(n in 5usize..25) {
        let sys = SpinSystem::reference_pair();
        let iz = total_spin(Axis::Z);
        let slic = evolve(&iz, &slic_b(&sys, n).unwrap(), &sys).unwrap();
        let comp = evolve(&iz, &cslic(&sys, n, 100.0 * sys.omega_j()).unwrap(), &sys).unwrap();
        let (a, b) = (dq_excitation_amplitude(&slic), dq_excitation_amplitude(&comp));
        prop_assert!((a - b).norm() < 0.05, "n = {} slic {} cslic {}", n, a, b);
    }
}

#[test]
fn basis_change_is_unitary() {
    let v = basis_change();
    let eye = nalgebra::Matrix4::<Complex64>::identity();
    assert!((v.adjoint() * v - eye).iter().all(|c| c.norm() < 1e-15));
}
