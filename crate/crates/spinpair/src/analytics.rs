//! Closed-form amplitudes, scaling factors and average-Hamiltonian terms.
//!
//! Every function takes raw parameters so it can be checked against the
//! numerical propagation independently of the sequence builders.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::SpinSystem;
use crate::spincore::{ist, total_spin, Axis, Mat4, Operator};

/// SLIC scaling factor 2^{-1/2}.
pub const KAPPA_SLIC: f64 = FRAC_1_SQRT_2;

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// INADEQUATE DQ amplitude for ideal pulses.
pub fn a_dq_inadequate(theta_st: f64, omega_j: f64, tau1: f64) -> Complex64 {
    let (s, c) = theta_st.sin_cos();
    let omega_st = omega_j / c;
    let re = 0.0;
    let im = c * (omega_st * tau1).sin() * (omega_j * tau1).cos()
        - (s * s + c * c * (omega_st * tau1).cos()) * (omega_j * tau1).sin();
    Complex64::new(re, im)
}

pub fn a_dqf_inadequate(theta_st: f64, omega_j: f64, tau1: f64) -> f64 {
    a_dq_inadequate(theta_st, omega_j, tau1).norm_sqr()
}

/// `κ = (-1)^p (√2 N / πn) sin²(πn / 2N)` with `p = (n-ν)/N - 1/2`.
pub fn kappa_scaling(n_big: i64, n: i64, nu: i64) -> Result<f64> {
    let invalid = Error::InvalidSymmetry { n_big, n, nu };
    if n_big <= 0 || n == 0 {
        return Err(invalid);
    }
    // p integer  <=>  2(n - ν) - N divisible by 2N
    let num = 2 * (n - nu) - n_big;
    if num % (2 * n_big) != 0 {
        return Err(invalid);
    }
    let p = num / (2 * n_big);
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    let (nb, nf) = (n_big as f64, n as f64);
    Ok(sign * SQRT_2 * nb / (PI * nf) * (PI * nf / (2.0 * nb)).sin().powi(2))
}

/// `2(1+√2)/(3π) ≈ 0.512` for R4₃¹.
pub fn kappa_r431() -> f64 {
    2.0 * (1.0 + SQRT_2) / (3.0 * PI)
}

/// Effective {1,2} nutation frequency of R4₃¹, `κ ωΔ`.
pub fn omega_nut12_r431(sys: &SpinSystem) -> f64 {
    kappa_r431() * sys.omega_delta()
}

pub fn a_dq_pulsepol(t: f64, omega_nut12: f64) -> Complex64 {
    Complex64::new(0.0, -(0.25 * omega_nut12 * t).sin().powi(2))
}

pub fn a_dqf_pulsepol(t: f64, omega_nut12: f64) -> f64 {
    a_dq_pulsepol(t, omega_nut12).norm_sqr()
}

/// Average-Hamiltonian term with its order in ζ.
#[derive(Debug, Clone, PartialEq)]
pub struct AHTerm {
    pub order: u32,
    pub operator: Operator,
    pub label: String,
}

/// `-κ ωΔ I_x^{12} - ε ωJ I_z`.
pub fn slic_avham_first_order(sys: &SpinSystem, eps_rf: f64) -> Operator {
    -(ist(1, 2, Axis::X) * (KAPPA_SLIC * sys.omega_delta()))
        - total_spin(Axis::Z) * (eps_rf * sys.omega_j())
}

/// Higher-order SLIC average-Hamiltonian terms in ζ = Δ/(√2 J), k in 2..=4,
/// in the published operator forms.
pub fn slic_avham_term(sys: &SpinSystem, k: u32) -> Result<AHTerm> {
    let z = sys.zeta();
    let wj = sys.omega_j();
    let (op, label) = match k {
        2 => (
            (ist(2, 4, Axis::X) - ist(1, 4, Axis::Z)) * (wj * z.powi(2) / 4.0),
            "(wJ z^2/4)(Ix24 - Iz14)",
        ),
        3 => (
            (ist(1, 2, Axis::X) + ist(1, 4, Axis::X)) * (wj * z.powi(3) / 16.0),
            "(wJ z^3/16)(Ix12 + Ix14)",
        ),
        4 => (
            (ist(1, 2, Axis::Z) * 4.0 - ist(1, 4, Axis::Z) - ist(2, 4, Axis::X) * 8.0
                + ist(2, 4, Axis::Y) * PI)
                * (wj * z.powi(4) / 256.0),
            "(wJ z^4/256)(4Iz12 - Iz14 - 8Ix24 + pi Iy24)",
        ),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "average-Hamiltonian order {k} outside 2..=4"
            )))
        }
    };
    Ok(AHTerm { order: k, operator: op, label: label.into() })
}

/// First-order term at ε = 0 plus the published terms up to order `kmax`.
pub fn slic_avham_sum(sys: &SpinSystem, kmax: u32) -> Result<Operator> {
    let mut h = slic_avham_first_order(sys, 0.0);
    for k in 2..=kmax {
        h += slic_avham_term(sys, k)?.operator;
    }
    Ok(h)
}

/// Principal logarithm of a unitary, eigenphases taken in (-π, π].
pub fn log_unitary(u: &Operator) -> Result<Operator> {
    let (q, t) = Schur::new(u.mat).unpack();
    let mut d = Mat4::zeros();
    for k in 0..4 {
        let lam = t[(k, k)];
        if (lam.arg().abs() - PI).abs() < 1e-9 {
            return Err(Error::LogBranchCut);
        }
        d[(k, k)] = lam.ln();
    }
    Ok(Operator { mat: q * d * q.adjoint(), basis: u.basis })
}

/// Traceless effective Hamiltonian `(i/τ) log M` for `M = exp(-i H τ)`.
pub fn effective_hamiltonian(m: &Operator, tau: f64) -> Result<Operator> {
    let h = log_unitary(m)?.scale(Complex64::new(0.0, 1.0 / tau));
    let tr = h.trace() / 4.0;
    Ok(h - Operator::identity().scale(tr))
}

/// SLIC effective Hamiltonian over one period τ_J from the exact propagator
/// `u_period`, taken in the J-coupling and rf interaction frame.
///
/// The frame propagator at τ_J is `-i R_y(-π/2)`, so the interaction-frame
/// propagator is `R_y(-π/2)† (i U) R_y(-π/2)`.
pub fn slic_effective_hamiltonian(u_period: &Operator, tau_j: f64) -> Result<Operator> {
    let w = crate::spincore::collective_rotation(-PI / 2.0, PI / 2.0);
    let m = w.adjoint() * u_period.scale(Complex64::new(0.0, 1.0)) * w;
    effective_hamiltonian(&m, tau_j)
}

/// β¹² = -κ ωΔ T.
pub fn beta12_slic(sys: &SpinSystem, t: f64) -> f64 {
    -KAPPA_SLIC * sys.omega_delta() * t
}

pub fn a_dq_slic_a(sys: &SpinSystem, t: f64) -> Complex64 {
    let b = beta12_slic(sys, t);
    Complex64::new(0.0, (sys.omega_j() * t).sin() * (b / 4.0).sin().powi(2))
}

pub fn a_dq_slic_b(sys: &SpinSystem, t: f64) -> Complex64 {
    let b = beta12_slic(sys, t);
    Complex64::new(0.0, (sys.omega_j() * t).cos() * (b / 4.0).sin().powi(2))
}

pub fn a_dqf_slic_b(sys: &SpinSystem, t: f64) -> f64 {
    a_dq_slic_b(sys, t).norm_sqr()
}

/// SLIC variant (a) amplitude with rf amplitude error.
pub fn a_dq_slic_a_with_error(sys: &SpinSystem, t: f64, eps_rf: f64) -> Complex64 {
    let wj = sys.omega_j();
    let gamma = (SQRT_2 * eps_rf * sys.j_hz / sys.delta_hz).atan();
    let omega12 = FRAC_1_SQRT_2 * sys.omega_delta() / gamma.cos();
    let half = 0.5 * wj * (2.0 + eps_rf) * t;
    let val = (wj * (1.0 + eps_rf) * t).sin()
        - half.sin() * (0.5 * omega12 * t).cos()
        - half.cos() * (0.5 * omega12 * t).sin() * gamma.sin();
    Complex64::new(0.0, 0.5 * val)
}

/// Effective cSLIC parameters under rf error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslicEffectiveParams {
    pub theta_eps: f64,
    pub kappa_prime: f64,
    pub f_plus: f64,
    pub f_minus: f64,
}

/// Short compensating pulse limit. `θ = 2 arctan(ε/(2+ε))` and
/// `κ' = κ sinc(πε) sec(θ/2)`, which keeps `κ' cos(θ/2) = κ sinc(f+)`.
pub fn cslic_params(eps_rf: f64) -> CslicEffectiveParams {
    let f_plus = PI * eps_rf;
    let f_minus = PI * (2.0 + eps_rf);
    let theta_eps = 2.0 * (eps_rf / (2.0 + eps_rf)).atan();
    let kappa_prime = KAPPA_SLIC * sinc(f_plus) / (0.5 * theta_eps).cos();
    CslicEffectiveParams { theta_eps, kappa_prime, f_plus, f_minus }
}

/// Finite compensating pulse, `0 < α <= 1`. The arctangent gives the half
/// angle θ/2, consistent with [`cslic_params`] at α = 1.
pub fn cslic_params_finite(eps_rf: f64, alpha: f64) -> Result<CslicEffectiveParams> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} outside (0, 1]")));
    }
    let f_plus = PI * eps_rf;
    let f_minus = PI * (2.0 + eps_rf);
    let num = (PI + alpha * f_plus) * (PI - f_minus) * sinc(alpha * f_minus);
    let den = (PI - alpha * f_minus) * (PI + f_plus) * sinc(alpha * f_plus);
    let theta_eps = 2.0 * (num / den).atan();
    let a = (PI + f_plus).powi(2) * sinc(alpha * f_plus).powi(2) / (PI + alpha * f_plus).powi(2);
    let b = (PI - f_minus).powi(2) * sinc(alpha * f_minus).powi(2) / (PI - alpha * f_minus).powi(2);
    let kappa_prime = alpha * (0.5 * (a + b)).sqrt();
    Ok(CslicEffectiveParams { theta_eps, kappa_prime, f_plus, f_minus })
}

/// `+i cos θ sin²(κ' ωΔ T / 4)`.
pub fn a_dq_cslic(sys: &SpinSystem, t: f64, p: &CslicEffectiveParams) -> Complex64 {
    let s = (0.25 * p.kappa_prime * sys.omega_delta() * t).sin();
    Complex64::new(0.0, p.theta_eps.cos() * s * s)
}

pub fn a_dqf_cslic(sys: &SpinSystem, t: f64, p: &CslicEffectiveParams) -> f64 {
    a_dq_cslic(sys, t, p).norm_sqr()
}

/// `cos²θ sin⁴((π/2) κ'/κ)`, the cSLIC efficiency at the nominal duration √2/Δ.
pub fn cslic_butterfly(eps_rf: f64, alpha: f64) -> Result<f64> {
    let p = cslic_params_finite(eps_rf, alpha)?;
    Ok(p.theta_eps.cos().powi(2) * (0.5 * PI * p.kappa_prime / KAPPA_SLIC).sin().powi(4))
}

/// Residual rf z-phase after `n_r` bare R-elements of an `RN_n^ν` train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncompleteCycle {
    /// `-2π n_r ν / N`, reduced to (-4π, 0] or [0, 4π).
    pub phase: f64,
    /// Phase is an odd multiple of π: the DQ coherence changes sign.
    pub dq_sign_flip: bool,
}

pub fn incomplete_cycle_rf_phase(n_big: i64, nu: i64, n_r: i64) -> Result<IncompleteCycle> {
    if n_big <= 0 || n_r < 0 {
        return Err(Error::UnsupportedTruncation(format!("N = {n_big}, n_R = {n_r}")));
    }
    let half = n_big / 2;
    let ok = n_r % 2 == 0 || (n_big % 2 == 0 && n_r % half == 0 && (n_r / half) % 2 == 1);
    if !ok {
        return Err(Error::UnsupportedTruncation(format!(
            "n_R = {n_r} is neither even nor an odd multiple of N/2"
        )));
    }
    // exact integer arithmetic in units of π/N
    let units = -2 * n_r * nu;
    let reduced = units % (4 * n_big);
    let phase = PI * reduced as f64 / n_big as f64;
    let dq_sign_flip = units % n_big == 0 && (units / n_big) % 2 != 0;
    Ok(IncompleteCycle { phase, dq_sign_flip })
}

/// Near-equivalence optimum durations, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalDurations {
    pub inadequate: f64,
    pub geodq: f64,
    pub pulsepol: f64,
    pub slic: f64,
}

pub fn optimal_t_table(sys: &SpinSystem) -> Result<OptimalDurations> {
    let d = sys.delta_hz.abs();
    if d == 0.0 {
        return Err(Error::InvalidParameter("optimal durations diverge for Δ = 0".into()));
    }
    Ok(OptimalDurations {
        inadequate: sys.j_hz.abs() / (d * d),
        geodq: PI / (2.0 * d),
        pulsepol: 1.0 / (kappa_r431() * d),
        slic: SQRT_2 / d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_at_zero() {
        assert_eq!(sinc(0.0), 1.0);
        assert!((sinc(PI)).abs() < 1e-16);
        assert!((sinc(1e-9) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn inadequate_limits() {
        let wj = 2.0 * PI * 100.0;
        assert_eq!(a_dq_inadequate(0.3, wj, 0.0), Complex64::new(0.0, 0.0));
        let t = 1.7e-3;
        let a = a_dq_inadequate(PI / 2.0 - 1e-12, wj, t);
        assert!((a.im + (wj * t).sin()).abs() < 1e-6);
    }

    #[test]
    fn kappa_values() {
        assert!((kappa_scaling(4, 3, 1).unwrap() - kappa_r431()).abs() < 1e-15);
        assert!((kappa_r431() - 0.51231).abs() < 1e-5);
        assert!(kappa_scaling(4, 3, 2).is_err());
        assert!(kappa_scaling(4, 2, 1).is_err());
    }

    #[test]
    fn table_optima() {
        let t = optimal_t_table(&SpinSystem::reference_pair()).unwrap();
        assert!((t.inadequate / 0.80800 - 1.0).abs() < 5e-3);
        assert!((t.geodq / 0.08825 - 1.0).abs() < 5e-3);
        assert!((t.pulsepol / 0.10966 - 1.0).abs() < 5e-3);
        assert!((t.slic / 0.07944 - 1.0).abs() < 5e-3);
        assert!(optimal_t_table(&SpinSystem::new(255.94, 0.0)).is_err());
    }

    #[test]
    fn incomplete_cycle_examples() {
        let full = incomplete_cycle_rf_phase(4, 1, 4).unwrap();
        assert_eq!((full.phase / (2.0 * PI)).fract(), 0.0);
        assert!(!full.dq_sign_flip);
        let half = incomplete_cycle_rf_phase(4, 1, 2).unwrap();
        assert!(half.dq_sign_flip);
        let six = incomplete_cycle_rf_phase(4, 1, 6).unwrap();
        assert!((six.phase + 3.0 * PI).abs() < 1e-15);
        assert!(six.dq_sign_flip);
        assert!(incomplete_cycle_rf_phase(4, 1, 3).is_err());
        assert!(incomplete_cycle_rf_phase(6, 1, 3).is_ok());
    }

    #[test]
    fn slic_ah_terms_vanish_at_zero_zeta() {
        let sys = SpinSystem::new(255.94, 0.0);
        for k in 2..=4 {
            assert_eq!(slic_avham_term(&sys, k).unwrap().operator.max_abs(), 0.0);
        }
        assert!(slic_avham_term(&sys, 5).is_err());
        assert!(slic_avham_term(&sys, 1).is_err());
    }

    #[test]
    fn odd_orders_are_shift_operators() {
        let sys = SpinSystem::reference_pair();
        let h3 = slic_avham_term(&sys, 3).unwrap().operator;
        for r in 1..=4 {
            assert_eq!(h3.el(r, r).norm(), 0.0);
        }
        assert_eq!(h3.el(2, 4).norm(), 0.0);
        assert!(h3.el(1, 2).norm() > 0.0 && h3.el(1, 4).norm() > 0.0);
    }

    #[test]
    fn log_of_exp_round_trip() {
        let sys = SpinSystem::reference_pair();
        let h = crate::hamiltonian::h_free(&sys);
        let u = crate::propagate::propagator(&h, 1e-4).unwrap();
        let back = effective_hamiltonian(&u, 1e-4).unwrap();
        let tr = h.trace() / 4.0;
        let h0 = h - Operator::identity().scale(tr);
        assert!(back.max_abs_diff(&h0) < 1e-6 * h0.max_abs());
    }

    #[test]
    fn cslic_params_at_zero_error() {
        let p = cslic_params(0.0);
        assert_eq!(p.theta_eps, 0.0);
        assert!((p.kappa_prime - KAPPA_SLIC).abs() < 1e-15);
        let f = cslic_params_finite(0.0, 1.0).unwrap();
        assert!(f.theta_eps.abs() < 1e-15);
        assert!((f.kappa_prime - KAPPA_SLIC).abs() < 1e-15);
        assert!(cslic_params_finite(0.0, 0.0).is_err());
        assert!(cslic_params_finite(0.0, 1.5).is_err());
    }
}
