//! Numeric results against independent oracles: a series matrix exponential,
//! closed forms at fixed parameters, and diagonalization for spectra.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinpair::analytics::*;
use spinpair::experiments::*;
use spinpair::hamiltonian::{h_free, h_rf, RfParams};
use spinpair::propagate::*;
use spinpair::sequences::*;
use spinpair::spincore::*;
use spinpair::{Complex64, SpinSystem};

type M4 = Matrix4<Complex64>;

/// exp(A) by scaling and squaring of a degree-18 Taylor polynomial.
fn expm_oracle(a: &M4) -> M4 {
    let norm: f64 = a.iter().map(|c| c.norm()).sum();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a / Complex64::new(2f64.powi(s), 0.0);
    let mut term = M4::identity();
    let mut sum = M4::identity();
    for k in 1..=18 {
        term = term * b / Complex64::new(k as f64, 0.0);
        sum += term;
    }
    for _ in 0..s {
        sum = sum * sum;
    }
    sum
}

#[test]
fn propagator_matches_series_exponential() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let sys = SpinSystem::new(rng.gen_range(10.0..500.0), rng.gen_range(-50.0..50.0))
            .with_offset_sum(rng.gen_range(-300.0..300.0));
        let rf = RfParams::new(2.0 * PI * rng.gen_range(0.0..2000.0), rng.gen_range(0.0..2.0 * PI));
        let t = rng.gen_range(0.0..5e-3);
        for h in [h_free(&sys), h_rf(&sys, &rf)] {
            let u = propagator(&h, t).unwrap();
            let want = expm_oracle(&(h.mat * Complex64::new(0.0, -t)));
            let diff = (u.mat - want).iter().map(|c| c.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "difference {diff}");
        }
    }
}

#[test]
fn free_hamiltonian_eigenvalues_match_single_transition_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let sys = SpinSystem::new(rng.gen_range(1.0..500.0), rng.gen_range(-100.0..100.0))
            .with_offset_sum(rng.gen_range(-300.0..300.0));
        let (wj, ws, wst) = (sys.omega_j(), sys.omega_sigma(), sys.omega_st());
        let mut want = [0.25 * wj + 0.5 * ws, 0.25 * wj - 0.5 * ws, -0.25 * wj + 0.5 * wst, -0.25 * wj - 0.5 * wst];
        let h = h_free(&sys).mat;
        let herm = nalgebra::Matrix4::from_fn(|r, c| h[(r, c)]);
        let mut got: Vec<f64> = nalgebra::SymmetricEigen::new(herm).eigenvalues.iter().cloned().collect();
        got.sort_by(f64::total_cmp);
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12 * wj.abs().max(1.0) * 10.0, "{g} vs {w}");
        }
    }
}

#[test]
fn bracket_of_iz_with_itself() {
    let iz = total_spin(Axis::Z);
    assert!((liouville_bracket(&iz, &iz).unwrap() - 2.0).norm() < 1e-15);
}

#[test]
fn inadequate_at_tabulated_delay() {
    let sys = SpinSystem::reference_pair();
    let (exc, rec) = refocused_inadequate(0.145).unwrap();
    let num = dqf_amplitude(&exc, &rec, &PhaseCycleSpec::standard(), &sys).unwrap().magnitude;
    let want = a_dqf_inadequate(sys.theta_st().unwrap(), sys.omega_j(), 0.145);
    assert!((num - want).abs() < 1e-6);
}

#[test]
fn inadequate_band_at_quarter_j() {
    // the value oscillates with Ω_ST τ1 along the line; the band claim is about its maximum
    let j = 255.94;
    let vals: Vec<f64> = (0..=2990)
        .map(|k| a_dqf_inadequate((75.0 + 0.005 * k as f64).to_radians(), 2.0 * PI * j, 0.25 / j))
        .collect();
    assert!(vals.iter().cloned().fold(0.0, f64::max) > 0.95);
}

#[test]
fn geodq_ideal_gives_minus_i() {
    let rho = evolve(&total_spin(Axis::Z), &geodq_ideal(), &SpinSystem::reference_pair()).unwrap();
    assert!((dq_excitation_amplitude(&rho) - Complex64::new(0.0, -1.0)).norm() < 1e-12);
}

#[test]
fn pulsepol_at_nine_cycles() {
    let sys = SpinSystem::reference_pair();
    let s = Scheme::pulsepol(9).sequences(&sys).unwrap();
    assert!((s.exc.total_duration() - 0.10549).abs() < 1e-4);
    let num = dqf_amplitude(&s.exc, &s.rec, &s.cycle, &sys).unwrap().magnitude;
    let want = a_dqf_pulsepol(27.0 * sys.tau_j(), omega_nut12_r431(&sys));
    assert!((num - want).abs() < 0.01, "{num} vs {want}");
}

#[test]
fn slic_variants_at_integer_tau_j() {
    let sys = SpinSystem::reference_pair();
    let iz = total_spin(Axis::Z);
    for n in [5usize, 12, 20, 25] {
        let t = n as f64 * sys.tau_j();
        let a = dq_excitation_amplitude(&evolve(&iz, &slic_a(&sys, t).unwrap(), &sys).unwrap());
        assert!(a.norm() < 0.05);
        let b = dq_excitation_amplitude(&evolve(&iz, &slic_b(&sys, n).unwrap(), &sys).unwrap());
        assert!((b - a_dq_slic_b(&sys, t)).norm() < 0.05, "n = {n}: {b} vs {}", a_dq_slic_b(&sys, t));
    }
}

#[test]
fn cslic_matches_closed_form_under_rf_error() {
    let sys = SpinSystem::reference_pair();
    let ws = 2.0 * PI * 25_000.0;
    let alpha = cslic_alpha(&sys, ws);
    for eps in [-0.03, -0.01, 0.0, 0.02] {
        let seq = cslic(&sys, 20, ws).unwrap();
        let rho = evolve_with_error(&total_spin(Axis::Z), &seq, &sys, eps).unwrap();
        let want = a_dq_cslic(&sys, 20.0 * sys.tau_j(), &cslic_params_finite(eps, alpha).unwrap());
        assert!((dq_excitation_amplitude(&rho) - want).norm() < 0.03, "eps {eps}");
    }
}

#[test]
fn cslic_closed_form_is_flat() {
    let sys = SpinSystem::reference_pair();
    let t = 20.0 * sys.tau_j();
    let f0 = a_dqf_cslic(&sys, t, &cslic_params(0.0));
    for eps in [-0.02, 0.02] {
        let f = a_dqf_cslic(&sys, t, &cslic_params(eps));
        assert!((f - f0).abs() / f0 < 0.05);
    }
}

#[test]
fn finite_pulse_kappa_near_unit_alpha() {
    let p = cslic_params_finite(0.0, 0.99).unwrap();
    assert!((p.kappa_prime - FRAC_1_SQRT_2).abs() / FRAC_1_SQRT_2 < 0.02);
}

#[test]
fn incomplete_cycle_six_elements() {
    let c = incomplete_cycle_rf_phase(4, 1, 6).unwrap();
    assert!((c.phase.rem_euclid(2.0 * PI) - PI).abs() < 1e-12);
    assert!(c.dq_sign_flip);
}

#[test]
fn slic_expansion_holds_through_third_order() {
    // residual after k orders is O(ζ^(k+1)) for k ≤ 3
    let slope = spinpair::experiments::validate::slic_residual_slope(255.94, &[0.025, 0.05, 0.1], 3).unwrap();
    assert!((slope - 4.0).abs() < 0.1, "slope {slope}");
    let slope2 = spinpair::experiments::validate::slic_residual_slope(255.94, &[0.025, 0.05, 0.1], 2).unwrap();
    assert!((slope2 - 3.0).abs() < 0.1, "two orders: slope {slope2}");
}

#[test]
fn equivalent_pair_fid_is_constant() {
    let sys = SpinSystem::new(255.94, 0.0);
    let fid = detect_fid(&total_spin(Axis::X), &sys, 1e-3, 64).unwrap();
    for s in fid {
        assert!((s - 2.0).norm() < 1e-12);
    }
}

fn peaks(points: &[(f64, Complex64)], n: usize) -> Vec<f64> {
    let mag: Vec<f64> = points.iter().map(|p| p.1.norm()).collect();
    let mut idx: Vec<usize> = (1..mag.len() - 1).filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1]).collect();
    idx.sort_by(|a, b| mag[*b].total_cmp(&mag[*a]));
    idx.into_iter().take(n).map(|k| points[k].0).collect()
}

#[test]
fn pulse_acquire_single_line_for_equivalent_pair() {
    let sys = SpinSystem::new(255.94, 0.0).with_mean_offset(100.0);
    let acq = Acquisition { dwell: 1.0 / 2000.0, npoints: 4096, lb_hz: 1.0 };
    let spec = synth_spectrum(&SpectrumSource::PulseAcquire, &sys, &acq).unwrap();
    let df = 1.0 / (acq.npoints as f64 * acq.dwell);
    let p = peaks(&spec.points, 1);
    assert!((p[0] - 100.0).abs() <= df);
}

#[test]
fn pulse_acquire_ab_quartet() {
    // an AB system with resolvable outer lines
    let sys = SpinSystem::new(20.0, 50.0);
    let acq = Acquisition { dwell: 1.0 / 500.0, npoints: 8192, lb_hz: 0.2 };
    let spec = synth_spectrum(&SpectrumSource::PulseAcquire, &sys, &acq).unwrap();
    let df = 1.0 / (acq.npoints as f64 * acq.dwell);
    let h = h_free(&sys).mat;
    let e = nalgebra::SymmetricEigen::new(nalgebra::Matrix4::from_fn(|r, c| h[(r, c)]));
    let ip = i_plus().mat;
    // allowed transitions of I+ between eigenstates, at (E_s - E_r)/2π
    let v = e.eigenvectors;
    let mut lines = Vec::new();
    for r in 0..4 {
        for s in 0..4 {
            let amp = (v.column(s).adjoint() * ip * v.column(r))[(0, 0)].norm();
            if amp > 1e-6 && r != s {
                lines.push((e.eigenvalues[s] - e.eigenvalues[r]) / (2.0 * PI));
            }
        }
    }
    assert_eq!(lines.len(), 4);
    for p in peaks(&spec.points, 4) {
        assert!(lines.iter().any(|l| (l - p).abs() <= df), "peak {p} not in {lines:?}");
    }
}

#[test]
fn quartet_at_default_parameters() {
    let sys = SpinSystem::reference_pair();
    let acq = Acquisition { dwell: 1.0 / 2000.0, npoints: 65536, lb_hz: 0.0 };
    let spec = synth_spectrum(&SpectrumSource::PulseAcquire, &sys, &acq).unwrap();
    let df = 1.0 / (acq.npoints as f64 * acq.dwell);
    let inner = 0.5 * (sys.omega_st() - sys.omega_j()) / (2.0 * PI);
    let p = peaks(&spec.points, 2);
    for want in [-inner, inner] {
        assert!(p.iter().any(|x| (x - want).abs() <= df), "{p:?} vs ±{inner}");
    }
}

#[test]
fn null_excitation_gives_empty_dqf_spectrum() {
    let sys = SpinSystem::reference_pair();
    let exc = Sequence::from_events("null", vec![Event::pulse(PI / 2.0, PI / 2.0)]);
    let rec = reconversion(&exc);
    let acq = Acquisition::default();
    let s = dqf_spectrum(&exc, &rec, &PhaseCycleSpec::standard(), &sys, &acq).unwrap();
    assert!(s.points.iter().all(|p| p.1.norm() < 1e-9));
    let dq = synth_spectrum(&SpectrumSource::Dqf(Scheme::SlicB { n_j: 20 }), &sys, &acq).unwrap();
    assert!(dq.points.iter().map(|p| p.1.norm()).fold(0.0, f64::max) > 1.0);
}

#[test]
fn sweeps_do_not_depend_on_thread_count() {
    let sys = SpinSystem::reference_pair();
    let spec = SweepSpec::new(Scheme::SlicB { n_j: 20 }, Swept::EpsRf, LinRange::new(-0.04, 0.04, 41).unwrap());
    let many = sweep(&spec, &sys).unwrap().to_csv_string().unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let one = pool.install(|| sweep(&spec, &sys).unwrap().to_csv_string().unwrap());
    assert_eq!(many, one);
}

#[test]
fn validation_report_is_byte_stable() {
    let sys = SpinSystem::reference_pair();
    assert_eq!(validate_report(&sys).to_text(), validate_report(&sys).to_text());
}

#[test]
fn kappa_check_rejects_a_wrong_reference() {
    let sys = SpinSystem::reference_pair();
    assert!(spinpair::experiments::validate::check_kappa_against(&sys, kappa_r431()).pass);
    assert!(!spinpair::experiments::validate::check_kappa_against(&sys, 0.55).pass);
}
