//! Four-level singlet/triplet state space and the operators living on it.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Mat4 = Matrix4<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    SingletTriplet,
    Zeeman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Basis state labels; `index()` is the 1-based number used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisState {
    S0,
    TPlus,
    T0,
    TMinus,
}

impl BasisState {
    pub const ALL: [BasisState; 4] = [Self::S0, Self::TPlus, Self::T0, Self::TMinus];

    pub fn index(self) -> usize {
        match self {
            Self::S0 => 1,
            Self::TPlus => 2,
            Self::T0 => 3,
            Self::TMinus => 4,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i.wrapping_sub(1)).copied()
    }

    /// Total magnetic quantum number M.
    pub fn magnetic_number(self) -> i32 {
        match self {
            Self::TPlus => 1,
            Self::TMinus => -1,
            _ => 0,
        }
    }

    /// Components in the Zeeman product basis (aa, ab, ba, bb).
    pub fn zeeman_components(self) -> [f64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            Self::S0 => [0.0, h, -h, 0.0],
            Self::TPlus => [1.0, 0.0, 0.0, 0.0],
            Self::T0 => [0.0, h, h, 0.0],
            Self::TMinus => [0.0, 0.0, 0.0, 1.0],
        }
    }
}

/// Unitary whose columns are the singlet/triplet states in the Zeeman basis.
pub fn basis_change() -> Mat4 {
    Mat4::from_fn(|r, c| {
        let st = BasisState::ALL[c].zeeman_components();
        Complex64::new(st[r], 0.0)
    })
}

/// A 4x4 complex operator tagged with the basis it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator {
    pub mat: Mat4,
    pub basis: Basis,
}

impl Operator {
    pub fn new(mat: Mat4) -> Self {
        Self { mat, basis: Basis::SingletTriplet }
    }

    pub fn zeeman(mat: Mat4) -> Self {
        Self { mat, basis: Basis::Zeeman }
    }

    pub fn zero() -> Self {
        Self::new(Mat4::zeros())
    }

    pub fn identity() -> Self {
        Self::new(Mat4::identity())
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut m = Mat4::zeros();
        for (k, v) in d.iter().enumerate() {
            m[(k, k)] = Complex64::new(*v, 0.0);
        }
        Self::new(m)
    }

    /// `|r><s|` with 1-based indices.
    pub fn ket_bra(r: usize, s: usize) -> Result<Self> {
        check_index(r)?;
        check_index(s)?;
        let mut m = Mat4::zeros();
        m[(r - 1, s - 1)] = ONE;
        Ok(Self::new(m))
    }

    /// Matrix element `<r|A|s>` with 1-based indices.
    pub fn el(&self, r: usize, s: usize) -> Complex64 {
        self.mat[(r - 1, s - 1)]
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint(), basis: self.basis }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `U A U†`.
    pub fn sandwich(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Spectral (largest singular value) norm.
    pub fn spectral_norm(&self) -> f64 {
        self.mat.singular_values().max()
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn unitarity_error(&self) -> f64 {
        let p = self.adjoint() * *self;
        p.max_abs_diff(&Self { mat: Mat4::identity(), basis: self.basis })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { mat: self.mat * c, basis: self.basis }
    }

    pub fn to_st(&self) -> Self {
        match self.basis {
            Basis::SingletTriplet => *self,
            Basis::Zeeman => {
                let v = basis_change();
                Self::new(v.adjoint() * self.mat * v)
            }
        }
    }

    pub fn to_zeeman(&self) -> Self {
        match self.basis {
            Basis::Zeeman => *self,
            Basis::SingletTriplet => {
                let v = basis_change();
                Self::zeeman(v * self.mat * v.adjoint())
            }
        }
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        debug_assert_eq!(self.basis, rhs.basis);
        Operator { mat: self.mat + rhs.mat, basis: self.basis }
    }
}

impl AddAssign for Operator {
    fn add_assign(&mut self, rhs: Operator) {
        debug_assert_eq!(self.basis, rhs.basis);
        self.mat += rhs.mat;
    }
}

impl Sub for Operator {
    type Output = Operator;
    fn sub(self, rhs: Operator) -> Operator {
        debug_assert_eq!(self.basis, rhs.basis);
        Operator { mat: self.mat - rhs.mat, basis: self.basis }
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator { mat: -self.mat, basis: self.basis }
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        debug_assert_eq!(self.basis, rhs.basis);
        Operator { mat: self.mat * rhs.mat, basis: self.basis }
    }
}

impl Mul<f64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator { mat: self.mat * Complex64::new(rhs, 0.0), basis: self.basis }
    }
}

impl Mul<Operator> for f64 {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        rhs * self
    }
}

impl Mul<Complex64> for Operator {
    type Output = Operator;
    fn mul(self, rhs: Complex64) -> Operator {
        self.scale(rhs)
    }
}

fn fmt_entry(z: Complex64) -> String {
    // 6 significant digits; negative zero printed as zero so golden files are stable
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    format!("{:>13.5e}{:+.5e}i", clean(z.re), clean(z.im))
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.basis {
            Basis::SingletTriplet => "ST",
            Basis::Zeeman => "Zeeman",
        };
        writeln!(f, "[{tag}]")?;
        for r in 0..4 {
            let row: Vec<String> = (0..4).map(|c| fmt_entry(self.mat[(r, c)])).collect();
            writeln!(f, "{}", row.join("  "))?;
        }
        Ok(())
    }
}

fn check_index(r: usize) -> Result<()> {
    if (1..=4).contains(&r) {
        Ok(())
    } else {
        Err(Error::InvalidIndex(r, r))
    }
}

fn check_pair(r: usize, s: usize) -> Result<()> {
    if r == s || !(1..=4).contains(&r) || !(1..=4).contains(&s) {
        return Err(Error::InvalidIndex(r, s));
    }
    Ok(())
}

/// Single-transition operator `I_axis^{rs}`.
pub fn single_transition_op(r: usize, s: usize, axis: Axis) -> Result<Operator> {
    check_pair(r, s)?;
    let (r0, s0) = (r - 1, s - 1);
    let mut m = Mat4::zeros();
    match axis {
        Axis::X => {
            m[(r0, s0)] = Complex64::new(0.5, 0.0);
            m[(s0, r0)] = Complex64::new(0.5, 0.0);
        }
        Axis::Y => {
            m[(r0, s0)] = Complex64::new(0.0, -0.5);
            m[(s0, r0)] = Complex64::new(0.0, 0.5);
        }
        Axis::Z => {
            m[(r0, r0)] = Complex64::new(0.5, 0.0);
            m[(s0, s0)] = Complex64::new(-0.5, 0.0);
        }
    }
    Ok(Operator::new(m))
}

/// Shorthand for [`single_transition_op`] on indices known to be valid.
pub fn ist(r: usize, s: usize, axis: Axis) -> Operator {
    single_transition_op(r, s, axis).expect("valid single-transition indices")
}

/// Subspace unit operator `1^{rs} = |r><r| + |s><s|`.
pub fn unit_op(r: usize, s: usize) -> Result<Operator> {
    check_pair(r, s)?;
    let mut m = Mat4::zeros();
    m[(r - 1, r - 1)] = ONE;
    m[(s - 1, s - 1)] = ONE;
    Ok(Operator::new(m))
}

/// `R_axis^{rs}(angle) = exp(-i angle I_axis^{rs})`, built in closed form.
pub fn rotation_op(r: usize, s: usize, axis: Axis, angle: f64) -> Result<Operator> {
    let op = single_transition_op(r, s, axis)?;
    let unit = unit_op(r, s)?;
    let rest = Operator::identity() - unit;
    let (c, sn) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    Ok(rest + unit * c + op.scale(Complex64::new(0.0, -2.0 * sn)))
}

/// Cycle operator `C^{rs} = R^{rs}(2π)`: sign flip on the {r, s} subspace.
pub fn cycle_op(r: usize, s: usize) -> Result<Operator> {
    let unit = unit_op(r, s)?;
    Ok(Operator::identity() - unit * 2.0)
}

fn pauli(axis: Axis) -> Matrix2<Complex64> {
    let h = Complex64::new(0.5, 0.0);
    match axis {
        Axis::X => Matrix2::new(ZERO, h, h, ZERO),
        Axis::Y => Matrix2::new(ZERO, -I * 0.5, I * 0.5, ZERO),
        Axis::Z => Matrix2::new(h, ZERO, ZERO, -h),
    }
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Spin operator of spin 1 or 2, in the singlet/triplet basis.
pub fn spin_op(spin: u8, axis: Axis) -> Operator {
    let e = Matrix2::identity();
    let m = match spin {
        1 => kron(&pauli(axis), &e),
        2 => kron(&e, &pauli(axis)),
        _ => panic!("spin index must be 1 or 2"),
    };
    Operator::zeeman(m).to_st()
}

/// Collective spin operator `I_axis = I_{1,axis} + I_{2,axis}`.
pub fn total_spin(axis: Axis) -> Operator {
    spin_op(1, axis) + spin_op(2, axis)
}

pub fn i_plus() -> Operator {
    total_spin(Axis::X) + total_spin(Axis::Y).scale(I)
}

pub fn i_minus() -> Operator {
    total_spin(Axis::X) - total_spin(Axis::Y).scale(I)
}

/// `exp(-i flip (I_x cos φ + I_y sin φ))`, exact from single-spin rotations.
pub fn collective_rotation(flip: f64, phase: f64) -> Operator {
    let (c, s) = ((flip / 2.0).cos(), (flip / 2.0).sin());
    let n = pauli(Axis::X) * Complex64::new(phase.cos(), 0.0)
        + pauli(Axis::Y) * Complex64::new(phase.sin(), 0.0);
    let single = Matrix2::identity() * Complex64::new(c, 0.0) + n * Complex64::new(0.0, -2.0 * s);
    Operator::zeeman(kron(&single, &single)).to_st()
}

/// Collective z-rotation `exp(-i angle I_z)`; diagonal in the ST basis.
pub fn z_rotation(angle: f64) -> Operator {
    let mut m = Mat4::zeros();
    for st in BasisState::ALL {
        let k = st.index() - 1;
        m[(k, k)] = Complex64::from_polar(1.0, -angle * st.magnetic_number() as f64);
    }
    Operator::new(m)
}

/// Liouville-space inner product `(A|B) = Tr{A† B}`.
pub fn liouville_bracket(a: &Operator, b: &Operator) -> Result<Complex64> {
    if a.basis != b.basis {
        return Err(Error::BasisMismatch);
    }
    Ok((a.mat.adjoint() * b.mat).trace())
}

/// `<A -> B> = (B|U A U†)/(B|B)`.
pub fn transformation_amplitude(a: &Operator, b: &Operator, u: &Operator) -> Result<Complex64> {
    let norm = liouville_bracket(b, b)?;
    if norm.norm() == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(liouville_bracket(b, &a.sandwich(u))? / norm)
}

/// Names accepted by [`named_operator`].
pub const OPERATOR_NAMES: &[&str] = &[
    "E", "Ix", "Iy", "Iz", "Iplus", "Iminus", "I1x", "I1y", "I1z", "I2x", "I2y", "I2z",
    "P1", "P2", "P3", "P4", "Q_DQP", "geo_precursor", "spinor_precursor",
    "DQy_precursor_rotated", "Rz13_pi", "C12",
];

/// Catalog of frequently used operators, all in the ST basis.
pub fn named_operator(name: &str) -> Result<Operator> {
    let s2 = std::f64::consts::SQRT_2;
    let prod = |a: Axis, b: Axis| spin_op(1, a) * spin_op(2, b) * 2.0;
    let op = match name {
        "E" => Operator::identity(),
        "Ix" => total_spin(Axis::X),
        "Iy" => total_spin(Axis::Y),
        "Iz" => total_spin(Axis::Z),
        "Iplus" => i_plus(),
        "Iminus" => i_minus(),
        "I1x" => spin_op(1, Axis::X),
        "I1y" => spin_op(1, Axis::Y),
        "I1z" => spin_op(1, Axis::Z),
        "I2x" => spin_op(2, Axis::X),
        "I2y" => spin_op(2, Axis::Y),
        "I2z" => spin_op(2, Axis::Z),
        "P1" | "P2" | "P3" | "P4" => {
            let k: usize = name[1..].parse().unwrap();
            Operator::ket_bra(k, k)?
        }
        "Q_DQP" => (ist(3, 4, Axis::X) - ist(2, 3, Axis::X)) * s2,
        "geo_precursor" => prod(Axis::Y, Axis::Z) + prod(Axis::Z, Axis::Y),
        "spinor_precursor" => -(prod(Axis::X, Axis::Z) + prod(Axis::Z, Axis::X)),
        "DQy_precursor_rotated" => prod(Axis::X, Axis::Y) + prod(Axis::Y, Axis::X),
        "Rz13_pi" => rotation_op(1, 3, Axis::Z, PI)?,
        "C12" => cycle_op(1, 2)?,
        _ => return Err(Error::UnknownName(name.to_string())),
    };
    Ok(op)
}
