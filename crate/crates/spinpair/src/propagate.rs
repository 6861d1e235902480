//! Event lists, exact propagation, z-filters, phase cycling and detection.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hamiltonian::{h_free, h_rf, RfParams, SpinSystem};
use crate::spincore::{
    collective_rotation, i_plus, named_operator, total_spin, z_rotation, Axis, BasisState, Mat4,
    Operator,
};

/// One element of a pulse sequence. Angles in radians, nutation in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// Ideal δ-pulse.
    HardPulse { flip: f64, phase: f64 },
    /// Rectangular pulse evolving under `h_rf`.
    FinitePulse { nutation: f64, phase: f64, duration: f64 },
    Delay { duration: f64 },
    ZFilter,
    /// Fixed unitary; `name` keys it in the text format.
    IdealUnitary { name: String, op: Operator, duration: f64 },
}

impl Event {
    pub fn pulse(flip: f64, phase: f64) -> Self {
        Self::HardPulse { flip, phase }
    }

    pub fn fpulse(nutation: f64, phase: f64, duration: f64) -> Self {
        Self::FinitePulse { nutation, phase, duration }
    }

    pub fn delay(duration: f64) -> Self {
        Self::Delay { duration }
    }

    /// Unitary from the operator catalog, with zero nominal duration.
    pub fn ideal(name: &str) -> Result<Self> {
        let op = named_operator(name)?;
        if op.unitarity_error() > 1e-12 {
            return Err(Error::InvalidParameter(format!("`{name}` is not unitary")));
        }
        Ok(Self::IdealUnitary { name: name.to_string(), op, duration: 0.0 })
    }

    pub fn duration(&self) -> f64 {
        match self {
            Self::FinitePulse { duration, .. }
            | Self::Delay { duration }
            | Self::IdealUnitary { duration, .. } => *duration,
            Self::HardPulse { .. } | Self::ZFilter => 0.0,
        }
    }

    /// The same event with its rf phase advanced by `dphi`. Ideal unitaries
    /// are conjugated by the matching z-rotation.
    pub fn phase_shifted(&self, dphi: f64) -> Self {
        match self {
            Self::HardPulse { flip, phase } => Self::HardPulse { flip: *flip, phase: phase + dphi },
            Self::FinitePulse { nutation, phase, duration } => Self::FinitePulse {
                nutation: *nutation,
                phase: phase + dphi,
                duration: *duration,
            },
            Self::IdealUnitary { name, op, duration } => Self::IdealUnitary {
                name: name.clone(),
                op: op.sandwich(&z_rotation(dphi)),
                duration: *duration,
            },
            other => other.clone(),
        }
    }

    /// Propagator of a unitary event; `None` for a z-filter. The rf error
    /// `eps` scales every pulse amplitude and hard-pulse flip by `1 + eps`.
    pub fn propagator(&self, sys: &SpinSystem, eps: f64) -> Result<Option<Operator>> {
        let u = match self {
            Self::HardPulse { flip, phase } => collective_rotation(flip * (1.0 + eps), *phase),
            Self::FinitePulse { nutation, phase, duration } => {
                let rf = RfParams::new(nutation * (1.0 + eps), *phase);
                propagator(&h_rf(sys, &rf), *duration)?
            }
            Self::Delay { duration } => propagator(&h_free(sys), *duration)?,
            Self::IdealUnitary { op, .. } => *op,
            Self::ZFilter => return Ok(None),
        };
        Ok(Some(u))
    }
}

/// An ordered list of events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sequence {
    pub events: Vec<Event>,
    pub label: String,
}

impl Sequence {
    pub fn new(label: &str) -> Self {
        Self { events: Vec::new(), label: label.to_string() }
    }

    pub fn from_events(label: &str, events: Vec<Event>) -> Self {
        Self { events, label: label.to_string() }
    }

    pub fn push(&mut self, ev: Event) -> &mut Self {
        self.events.push(ev);
        self
    }

    pub fn extend(&mut self, other: &Sequence) -> &mut Self {
        self.events.extend(other.events.iter().cloned());
        self
    }

    pub fn then(mut self, ev: Event) -> Self {
        self.events.push(ev);
        self
    }

    pub fn repeated(&self, n: usize) -> Sequence {
        let mut events = Vec::with_capacity(self.events.len() * n);
        for _ in 0..n {
            events.extend(self.events.iter().cloned());
        }
        Sequence { events, label: self.label.clone() }
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(Event::duration).sum()
    }

    pub fn phase_shifted(&self, dphi: f64) -> Sequence {
        Sequence {
            events: self.events.iter().map(|e| e.phase_shifted(dphi)).collect(),
            label: self.label.clone(),
        }
    }

    /// Events up to time `t`; a timed event straddling `t` is shortened.
    /// Zero-duration events sitting at `t` are kept, with a picosecond slack
    /// against rounding in the accumulated time.
    pub fn truncated(&self, t: f64) -> Sequence {
        let slack = 1e-12 * t.abs().max(1.0);
        let mut out = Sequence::new(&self.label);
        let mut now = 0.0;
        for ev in &self.events {
            let d = ev.duration();
            if d == 0.0 {
                if now <= t + slack {
                    out.events.push(ev.clone());
                }
                continue;
            }
            if now >= t - slack {
                break;
            }
            let left = t - now;
            if d <= left + slack {
                out.events.push(ev.clone());
            } else {
                match ev {
                    Event::FinitePulse { nutation, phase, .. } => {
                        out.events.push(Event::fpulse(*nutation, *phase, left))
                    }
                    Event::Delay { .. } => out.events.push(Event::delay(left)),
                    // an ideal unitary is all-or-nothing
                    _ => {}
                }
            }
            now += d;
        }
        out
    }

    pub fn has_zfilter(&self) -> bool {
        self.events.iter().any(|e| matches!(e, Event::ZFilter))
    }

    /// Line-oriented text form, one event per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ev in &self.events {
            match ev {
                Event::HardPulse { flip, phase } => {
                    writeln!(out, "pulse {} {}", deg_field(*flip), deg_field(*phase)).unwrap()
                }
                Event::FinitePulse { nutation, phase, duration } => writeln!(
                    out,
                    "fpulse {} {} {}",
                    hz_field(*nutation),
                    deg_field(*phase),
                    duration
                )
                .unwrap(),
                Event::Delay { duration } => writeln!(out, "delay {duration}").unwrap(),
                Event::ZFilter => out.push_str("zfilter\n"),
                Event::IdealUnitary { name, duration, .. } => {
                    if *duration == 0.0 {
                        writeln!(out, "ideal {name}").unwrap()
                    } else {
                        writeln!(out, "ideal {name} {duration}").unwrap()
                    }
                }
            }
        }
        out
    }

    /// Parses [`Sequence::to_text`] output. Blank lines and `#` comments are skipped.
    /// Angles are degrees unless suffixed `rad`; nutations are Hz unless suffixed `rad/s`.
    /// Ideal unitaries are looked up by name, so phase-shifted ones do not round-trip.
    pub fn from_text(label: &str, text: &str) -> Result<Sequence> {
        let mut seq = Sequence::new(label);
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Parse { line: k + 1, msg: msg.to_string() };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<f64> {
                toks.get(i)
                    .ok_or_else(|| err("missing field"))?
                    .parse::<f64>()
                    .map_err(|_| err(&format!("bad number `{}`", toks[i])))
            };
            let angle = |i: usize| -> Result<f64> {
                match toks.get(i).and_then(|t| t.strip_suffix("rad")) {
                    Some(v) => v.parse::<f64>().map_err(|_| err(&format!("bad angle `{}`", toks[i]))),
                    None => Ok(num(i)?.to_radians()),
                }
            };
            let nutation = |i: usize| -> Result<f64> {
                match toks.get(i).and_then(|t| t.strip_suffix("rad/s")) {
                    Some(v) => v.parse::<f64>().map_err(|_| err(&format!("bad nutation `{}`", toks[i]))),
                    None => Ok(num(i)? * 2.0 * PI),
                }
            };
            let want = |n: usize| -> Result<()> {
                if toks.len() == n { Ok(()) } else { Err(err("wrong number of fields")) }
            };
            let ev = match toks[0] {
                "pulse" => {
                    want(3)?;
                    Event::pulse(angle(1)?, angle(2)?)
                }
                "fpulse" => {
                    want(4)?;
                    let dur = num(3)?;
                    if dur < 0.0 {
                        return Err(err("negative duration"));
                    }
                    Event::fpulse(nutation(1)?, angle(2)?, dur)
                }
                "delay" => {
                    want(2)?;
                    let dur = num(1)?;
                    if dur < 0.0 {
                        return Err(err("negative duration"));
                    }
                    Event::delay(dur)
                }
                "zfilter" => {
                    want(1)?;
                    Event::ZFilter
                }
                "ideal" => {
                    if toks.len() != 2 && toks.len() != 3 {
                        return Err(err("wrong number of fields"));
                    }
                    let mut ev = Event::ideal(toks[1]).map_err(|e| err(&e.to_string()))?;
                    if toks.len() == 3 {
                        if let Event::IdealUnitary { duration, .. } = &mut ev {
                            *duration = num(2)?;
                        }
                    }
                    ev
                }
                other => return Err(err(&format!("unknown event `{other}`"))),
            };
            seq.events.push(ev);
        }
        Ok(seq)
    }
}

/// Decimal `y = fwd(x)`, nudged by a few ulps so that `back(y) == x`.
/// None when `x` is not in the image of `back`.
fn invertible_repr(x: f64, fwd: impl Fn(f64) -> f64, back: impl Fn(f64) -> f64) -> Option<f64> {
    let y = fwd(x);
    let (mut up, mut down) = (y, y);
    for _ in 0..8 {
        if back(up) == x {
            return Some(up);
        }
        if back(down) == x {
            return Some(down);
        }
        up = up.next_up();
        down = down.next_down();
    }
    None
}

fn deg_field(rad: f64) -> String {
    match invertible_repr(rad, f64::to_degrees, f64::to_radians) {
        Some(d) => d.to_string(),
        None => format!("{rad}rad"),
    }
}

fn hz_field(w: f64) -> String {
    match invertible_repr(w, |v| v / (2.0 * PI), |v| v * 2.0 * PI) {
        Some(h) => h.to_string(),
        None => format!("{w}rad/s"),
    }
}

/// Four-step phase cycle acting on the excitation (A) and reconversion (B) blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCycleSpec {
    pub phi_a: Vec<f64>,
    pub phi_b: Vec<f64>,
    pub phi_rec: Vec<f64>,
    pub extra_b_shift: f64,
}

impl PhaseCycleSpec {
    /// Φ_A = 0, Φ_B = {0, π/2, π, 3π/2}, Φ_rec = {0, 3π/2, π, π/2}.
    pub fn standard() -> Self {
        Self {
            phi_a: vec![0.0; 4],
            phi_b: vec![0.0, PI / 2.0, PI, 1.5 * PI],
            phi_rec: vec![0.0, 1.5 * PI, PI, PI / 2.0],
            extra_b_shift: 0.0,
        }
    }

    pub fn with_extra_b_shift(mut self, shift: f64) -> Self {
        self.extra_b_shift = shift;
        self
    }

    pub fn len(&self) -> usize {
        self.phi_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi_a.is_empty()
    }

    fn validate(&self) -> Result<()> {
        let (a, b, r) = (self.phi_a.len(), self.phi_b.len(), self.phi_rec.len());
        if a != b || b != r || a == 0 {
            return Err(Error::CycleLengthMismatch(a, b, r));
        }
        Ok(())
    }
}

/// `exp(-i H t)` by Hermitian eigendecomposition.
pub fn propagator(h: &Operator, t: f64) -> Result<Operator> {
    let herm = h.hermiticity_error();
    if herm > 1e-9 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian(herm));
    }
    let sym = (h.mat + h.mat.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let v = eig.eigenvectors;
    let phases = Mat4::from_diagonal(&eig.eigenvalues.map(|w| Complex64::from_polar(1.0, -w * t)));
    Ok(Operator { mat: v * phases * v.adjoint(), basis: h.basis })
}

/// Applies the events of `seq` to `rho` in order, with rf error `eps`.
pub fn evolve_with_error(
    rho: &Operator,
    seq: &Sequence,
    sys: &SpinSystem,
    eps: f64,
) -> Result<Operator> {
    let mut out = *rho;
    for ev in &seq.events {
        out = match ev.propagator(sys, eps)? {
            Some(u) => out.sandwich(&u),
            None => apply_zfilter(&out),
        };
    }
    Ok(out)
}

pub fn evolve(rho: &Operator, seq: &Sequence, sys: &SpinSystem) -> Result<Operator> {
    evolve_with_error(rho, seq, sys, 0.0)
}

pub fn sequence_propagator_with_error(seq: &Sequence, sys: &SpinSystem, eps: f64) -> Result<Operator> {
    let mut u = Operator::identity();
    for ev in &seq.events {
        let p = ev.propagator(sys, eps)?.ok_or(Error::NonUnitarySequence)?;
        u = p * u;
    }
    Ok(u)
}

pub fn sequence_propagator(seq: &Sequence, sys: &SpinSystem) -> Result<Operator> {
    sequence_propagator_with_error(seq, sys, 0.0)
}

/// Drops every element between states of different total M.
pub fn apply_zfilter(rho: &Operator) -> Operator {
    let mut out = *rho;
    for r in BasisState::ALL {
        for s in BasisState::ALL {
            if r.magnetic_number() != s.magnetic_number() {
                out.mat[(r.index() - 1, s.index() - 1)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// `<2|rho|4>`.
pub fn dq_excitation_amplitude(rho: &Operator) -> Complex64 {
    rho.el(2, 4)
}

/// Phase-cycled filtered signal, normalized to a single 90° readout of I_z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqfResult {
    /// Complex ratio before taking the magnitude; its sign depends on the
    /// reconversion block.
    pub signal: Complex64,
    pub magnitude: f64,
}

/// Simulates the phase-cycled double-quantum-filtered experiment.
///
/// Each step shifts `exc` by Φ_A and `rec` plus a final 90° readout (phase 0)
/// by Φ_B + extra shift, detects `Tr{I+ rho}` and weights it by `exp(-iΦ_rec)`.
pub fn dqf_amplitude(
    exc: &Sequence,
    rec: &Sequence,
    cycle: &PhaseCycleSpec,
    sys: &SpinSystem,
) -> Result<DqfResult> {
    dqf_amplitude_with_error(exc, rec, cycle, sys, 0.0)
}

/// Final density operator of every cycle step, paired with its receiver phase.
pub fn phase_cycled_states(
    exc: &Sequence,
    rec: &Sequence,
    cycle: &PhaseCycleSpec,
    sys: &SpinSystem,
    eps: f64,
) -> Result<Vec<(Operator, f64)>> {
    cycle.validate()?;
    let iz = total_spin(Axis::Z);
    let mut block_b = rec.clone();
    block_b.push(Event::pulse(PI / 2.0, 0.0));
    (0..cycle.len())
        .map(|k| {
            let rho = evolve_with_error(&iz, &exc.phase_shifted(cycle.phi_a[k]), sys, eps)?;
            let shift_b = cycle.phi_b[k] + cycle.extra_b_shift;
            let rho = evolve_with_error(&rho, &block_b.phase_shifted(shift_b), sys, eps)?;
            Ok((rho, cycle.phi_rec[k]))
        })
        .collect()
}

/// Signal of a single 90° readout of I_z, the normalization of [`dqf_amplitude`].
pub fn reference_signal(sys: &SpinSystem) -> Result<Complex64> {
    let read = Sequence::from_events("readout", vec![Event::pulse(PI / 2.0, 0.0)]);
    Ok((i_plus() * evolve(&total_spin(Axis::Z), &read, sys)?).trace())
}

pub fn dqf_amplitude_with_error(
    exc: &Sequence,
    rec: &Sequence,
    cycle: &PhaseCycleSpec,
    sys: &SpinSystem,
    eps: f64,
) -> Result<DqfResult> {
    let ip = i_plus();
    let states = phase_cycled_states(exc, rec, cycle, sys, eps)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (rho, phi_rec) in &states {
        acc += (ip * *rho).trace() * Complex64::from_polar(1.0, -phi_rec);
    }
    acc /= states.len() as f64;
    let signal = acc / reference_signal(sys)?;
    Ok(DqfResult { signal, magnitude: signal.norm() })
}

/// Free-precession signal `s(k dwell) = Tr{I+ rho(k dwell)}`.
pub fn detect_fid(rho: &Operator, sys: &SpinSystem, dwell: f64, npoints: usize) -> Result<Vec<Complex64>> {
    if npoints < 2 || dwell <= 0.0 {
        return Err(Error::InvalidParameter("need npoints >= 2 and dwell > 0".into()));
    }
    let u = propagator(&h_free(sys), dwell)?;
    let ip = i_plus();
    let mut cur = *rho;
    let mut out = Vec::with_capacity(npoints);
    for _ in 0..npoints {
        out.push((ip * cur).trace());
        cur = cur.sandwich(&u);
    }
    Ok(out)
}

/// Centered discrete spectrum of an FID after exponential line broadening
/// `lb_hz`. Returns `(frequency in Hz, value)` pairs in ascending frequency.
pub fn spectrum(fid: &[Complex64], dwell: f64, lb_hz: f64) -> Vec<(f64, Complex64)> {
    let n = fid.len();
    let mut buf: Vec<Complex64> = fid
        .iter()
        .enumerate()
        .map(|(k, s)| s * (-PI * lb_hz * k as f64 * dwell).exp())
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dwell);
    let half = n / 2;
    // bins half..n hold negative frequencies
    (half..n)
        .map(|k| ((k as f64 - n as f64) * df, buf[k]))
        .chain((0..half).map(|k| (k as f64 * df, buf[k])))
        .collect()
}

pub const DEFAULT_LINE_BROADENING_HZ: f64 = 1.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spincore::ist;

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let u = propagator(&Operator::zero(), 1.3).unwrap();
        assert!(u.max_abs_diff(&Operator::identity()) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = Operator::ket_bra(1, 2).unwrap();
        assert!(matches!(propagator(&a, 1.0), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn zfilter_examples() {
        assert_eq!(apply_zfilter(&(ist(2, 4, Axis::Y) * 2.0)).max_abs(), 0.0);
        assert_eq!(apply_zfilter(&total_spin(Axis::X)).max_abs(), 0.0);
        let zq = ist(1, 3, Axis::X) + total_spin(Axis::Z);
        assert_eq!(apply_zfilter(&zq), zq);
    }

    #[test]
    fn dq_element_examples() {
        let y = ist(2, 4, Axis::Y) * 2.0;
        assert!((dq_excitation_amplitude(&y) - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let x = ist(2, 4, Axis::X) * 2.0;
        assert!((dq_excitation_amplitude(&x) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn zfilter_in_propagator_is_an_error() {
        let seq = Sequence::from_events("z", vec![Event::ZFilter]);
        assert_eq!(sequence_propagator(&seq, &SpinSystem::reference_pair()), Err(Error::NonUnitarySequence));
    }

    #[test]
    fn cycle_length_mismatch() {
        let mut c = PhaseCycleSpec::standard();
        c.phi_rec.pop();
        let seq = Sequence::new("empty");
        let r = dqf_amplitude(&seq, &seq, &c, &SpinSystem::reference_pair());
        assert_eq!(r, Err(Error::CycleLengthMismatch(4, 4, 3)));
    }

    #[test]
    fn text_round_trip() {
        let seq = Sequence::from_events(
            "t",
            vec![
                Event::pulse(PI / 2.0, 0.75 * PI),
                Event::delay(1.4075e-3),
                Event::fpulse(2.0 * PI * 25_000.0, PI, 3.7e-5),
                Event::ZFilter,
                Event::ideal("Rz13_pi").unwrap(),
                Event::pulse(0.1234567, -2.0),
            ],
        );
        let text = seq.to_text();
        let back = Sequence::from_text("t", &text).unwrap();
        assert_eq!(back, seq);
        assert_eq!(back.to_text(), text);
        assert!(text.starts_with("pulse 90 135\n"));
    }

    #[test]
    fn text_errors() {
        assert!(matches!(Sequence::from_text("x", "pulse 90"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Sequence::from_text("x", "\nwobble 1"), Err(Error::Parse { line: 2, .. })));
        assert!(Sequence::from_text("x", "delay -1").is_err());
        assert!(Sequence::from_text("x", "ideal nothing").is_err());
    }
}
