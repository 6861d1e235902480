//! Rotating-frame Hamiltonians of the spin pair.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::spincore::{spin_op, total_spin, Axis, Operator};

/// Larmor frequency of 19F at 14.1 T, used for ppb to Hz conversion.
pub const LARMOR_19F_14T1_MHZ: f64 = 564.5;

/// Physical parameters of the pair. Inputs are stored in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSystem {
    pub j_hz: f64,
    pub delta_hz: f64,
    /// ω_Σ/2π in Hz: the sum of the two resonance offsets.
    pub offset_sum_hz: f64,
}

impl SpinSystem {
    pub fn new(j_hz: f64, delta_hz: f64) -> Self {
        Self { j_hz, delta_hz, offset_sum_hz: 0.0 }
    }

    /// Chemical-shift difference given in ppb at Larmor frequency `larmor_mhz`.
    pub fn from_ppb(j_hz: f64, delta_ppb: f64, larmor_mhz: f64) -> Self {
        Self::new(j_hz, larmor_mhz * 1e6 * delta_ppb * 1e-9)
    }

    /// Parameters of the fluorinated compound used throughout the examples.
    pub fn reference_pair() -> Self {
        Self::new(255.94, 17.8)
    }

    pub fn with_offset_sum(mut self, hz: f64) -> Self {
        self.offset_sum_hz = hz;
        self
    }

    /// Sets the offset of the mean shift, Δω/2π = ω_Σ/4π.
    pub fn with_mean_offset(mut self, hz: f64) -> Self {
        self.offset_sum_hz = 2.0 * hz;
        self
    }

    pub fn mean_offset_hz(&self) -> f64 {
        self.offset_sum_hz / 2.0
    }

    pub fn omega_j(&self) -> f64 {
        2.0 * PI * self.j_hz
    }

    pub fn omega_delta(&self) -> f64 {
        2.0 * PI * self.delta_hz
    }

    pub fn omega_sigma(&self) -> f64 {
        2.0 * PI * self.offset_sum_hz
    }

    pub fn omega_st(&self) -> f64 {
        self.omega_j().hypot(self.omega_delta())
    }

    pub fn theta_st(&self) -> Result<f64> {
        mixing_angle(self.j_hz, self.delta_hz)
    }

    pub fn tau_j(&self) -> f64 {
        1.0 / self.j_hz.abs()
    }

    pub fn zeta(&self) -> f64 {
        self.delta_hz / (SQRT_2 * self.j_hz)
    }
}

/// Rf field during a finite pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfParams {
    /// ω_nut in rad/s.
    pub nutation: f64,
    pub phase: f64,
}

impl RfParams {
    pub fn new(nutation: f64, phase: f64) -> Self {
        Self { nutation, phase }
    }

    /// SLIC-matched field with fractional amplitude error `eps`.
    pub fn slic(sys: &SpinSystem, eps: f64) -> Self {
        Self::new(sys.omega_j() * (1.0 + eps), 0.0)
    }

    pub fn epsilon_rf(&self, sys: &SpinSystem) -> f64 {
        (self.nutation - sys.omega_j()) / sys.omega_j()
    }

    pub fn zeta(&self, sys: &SpinSystem) -> f64 {
        sys.zeta()
    }
}

/// `H_Σ + H_Δ + H_J`.
pub fn h_free(sys: &SpinSystem) -> Operator {
    let (i1, i2) = (|a| spin_op(1, a), |a| spin_op(2, a));
    let iz = total_spin(Axis::Z);
    let h_sigma = iz * (0.5 * sys.omega_sigma());
    let h_delta = (i1(Axis::Z) - i2(Axis::Z)) * (0.5 * sys.omega_delta());
    let coupling = i1(Axis::X) * i2(Axis::X) + i1(Axis::Y) * i2(Axis::Y) + i1(Axis::Z) * i2(Axis::Z);
    h_sigma + h_delta + coupling * sys.omega_j()
}

/// Rf term `ω_nut (I_x cos φ + I_y sin φ)`.
pub fn h_rf_term(rf: &RfParams) -> Operator {
    total_spin(Axis::X) * (rf.nutation * rf.phase.cos())
        + total_spin(Axis::Y) * (rf.nutation * rf.phase.sin())
}

pub fn h_rf(sys: &SpinSystem, rf: &RfParams) -> Operator {
    h_free(sys) + h_rf_term(rf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingRegime {
    Weak,
    Strong,
    NearEquivalent,
}

/// θ_ST = arctan(Δ/J).
pub fn mixing_angle(j_hz: f64, delta_hz: f64) -> Result<f64> {
    if j_hz == 0.0 {
        return Err(Error::InvalidParameter("mixing angle undefined for J = 0".into()));
    }
    Ok((delta_hz / j_hz).atan())
}

pub fn coupling_regime(theta_st: f64) -> CouplingRegime {
    let deg = theta_st.abs().to_degrees();
    if deg >= 70.0 {
        CouplingRegime::Weak
    } else if deg <= 30.0 {
        CouplingRegime::NearEquivalent
    } else {
        CouplingRegime::Strong
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spincore::{ist, rotation_op, unit_op};

    #[test]
    fn equivalent_pair_eigenvalues() {
        let sys = SpinSystem::new(100.0, 0.0);
        let h = h_free(&sys);
        let wj = sys.omega_j();
        let want = Operator::diag([-0.75 * wj, 0.25 * wj, 0.25 * wj, 0.25 * wj]);
        assert!(h.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn single_transition_form() {
        let sys = SpinSystem::new(255.94, 17.8).with_offset_sum(31.0);
        let th = sys.theta_st().unwrap();
        let r = rotation_op(1, 3, Axis::Y, th).unwrap();
        let form = -(ist(1, 3, Axis::Z).sandwich(&r.adjoint())) * sys.omega_st()
            + ist(2, 4, Axis::Z) * sys.omega_sigma()
            + (unit_op(2, 4).unwrap() - unit_op(1, 3).unwrap()) * (0.25 * sys.omega_j());
        assert!(h_free(&sys).max_abs_diff(&form) < 1e-10);
    }

    #[test]
    fn reference_mixing_angle() {
        let th = mixing_angle(255.94, 17.8).unwrap();
        assert!((th - 0.0695).abs() < 1e-3);
        assert_eq!(coupling_regime(th), CouplingRegime::NearEquivalent);
        assert_eq!(coupling_regime(mixing_angle(1.0, 1.0).unwrap()), CouplingRegime::Strong);
        assert_eq!(coupling_regime(mixing_angle(1.0, 0.0).unwrap()), CouplingRegime::NearEquivalent);
        assert!(mixing_angle(0.0, 1.0).is_err());
    }

    #[test]
    fn ppb_conversion() {
        let sys = SpinSystem::from_ppb(255.9, 32.0, LARMOR_19F_14T1_MHZ);
        assert!((sys.delta_hz - 18.064).abs() < 1e-9);
    }

    #[test]
    fn rf_phase_pi_flips_sign() {
        let sys = SpinSystem::reference_pair();
        let a = h_rf(&sys, &RfParams::new(1000.0, PI));
        let b = h_free(&sys) - total_spin(Axis::X) * 1000.0;
        assert!(a.max_abs_diff(&b) < 1e-12);
        let rf = RfParams::slic(&sys, 0.0);
        assert_eq!(rf.epsilon_rf(&sys), 0.0);
    }
}
