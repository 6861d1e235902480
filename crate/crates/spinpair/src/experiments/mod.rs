//! Parameter sweeps, excitation trajectories and idealized spectra.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{
    a_dq_cslic, a_dq_inadequate, a_dq_pulsepol, a_dq_slic_a_with_error, a_dq_slic_b,
    beta12_slic, cslic_params_finite, omega_nut12_r431,
};
use crate::error::{Error, Result};
use crate::hamiltonian::SpinSystem;
use crate::propagate::{
    detect_fid, dq_excitation_amplitude, dqf_amplitude_with_error, evolve_with_error,
    phase_cycled_states, sequence_propagator, spectrum, Event, PhaseCycleSpec, Sequence,
    DEFAULT_LINE_BROADENING_HZ,
};
use crate::sequences::{
    cslic_alpha, cslic_pair, geodq_ideal_pair, geodq_train, pulsepol_excitation, r431_tau2,
    r_basic_element, r_symmetry_elements, reconversion, refocused_inadequate, slic_a, slic_b_pair,
    R4Params,
};
use crate::spincore::{named_operator, total_spin, transformation_amplitude, Axis};

pub mod validate;

pub use validate::{validate_report, Check, Report};

/// A DQ excitation scheme with its fixed parameters. Times in s, frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub enum Scheme {
    Inadequate { tau1: f64 },
    GeodqIdeal,
    GeodqTrain { tau1g: f64, tau2g: f64, n: usize },
    /// R4₃¹ excitation truncated after `half_cycles` half cycles.
    Pulsepol { half_cycles: usize },
    SlicA { t: f64 },
    SlicB { n_j: usize },
    Cslic { n_j: usize, omega_strong: f64 },
}

/// Excitation block, reconversion block and the phase cycle that filters them.
#[derive(Debug, Clone)]
pub struct SchemeSequences {
    pub exc: Sequence,
    pub rec: Sequence,
    pub cycle: PhaseCycleSpec,
}

impl Scheme {
    pub fn pulsepol(m: usize) -> Self {
        Scheme::Pulsepol { half_cycles: 2 * m }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Inadequate { .. } => "inadequate",
            Scheme::GeodqIdeal => "geodq",
            Scheme::GeodqTrain { .. } => "geodq_train",
            Scheme::Pulsepol { .. } => "pulsepol",
            Scheme::SlicA { .. } => "slic_a",
            Scheme::SlicB { .. } => "slic_b",
            Scheme::Cslic { .. } => "cslic",
        }
    }

    pub fn sequences(&self, sys: &SpinSystem) -> Result<SchemeSequences> {
        let standard = PhaseCycleSpec::standard();
        let (exc, rec, cycle) = match self {
            Scheme::Inadequate { tau1 } => {
                let (e, r) = refocused_inadequate(*tau1)?;
                (e, r, standard)
            }
            Scheme::GeodqIdeal => {
                let (e, r) = geodq_ideal_pair();
                (e, r, standard)
            }
            Scheme::GeodqTrain { tau1g, tau2g, n } => {
                let e = geodq_train(*tau1g, *tau2g, *n)?;
                let r = reconversion(&e);
                (e, r, standard)
            }
            Scheme::Pulsepol { half_cycles } => {
                if *half_cycles == 0 {
                    return Err(Error::InvalidParameter("PulsePol needs at least one half cycle".into()));
                }
                let e = pulsepol_excitation(&R4Params::half_cycles(sys, *half_cycles))?;
                let r = reconversion(&e);
                // the mirrored train ends on 90_y instead of 90_x
                (e, r, standard.with_extra_b_shift(PI))
            }
            Scheme::SlicA { t } => {
                let e = slic_a(sys, *t)?;
                let r = reconversion(&e);
                (e, r, standard)
            }
            Scheme::SlicB { n_j } => {
                let (e, r) = slic_b_pair(sys, *n_j)?;
                (e, r, standard)
            }
            Scheme::Cslic { n_j, omega_strong } => {
                let (e, r) = cslic_pair(sys, *n_j, *omega_strong)?;
                (e, r, standard)
            }
        };
        Ok(SchemeSequences { exc, rec, cycle })
    }

    /// Nominal excitation time, excluding hard pulses.
    pub fn duration(&self, sys: &SpinSystem) -> f64 {
        match self {
            Scheme::Inadequate { tau1 } => 2.0 * tau1,
            Scheme::GeodqIdeal => 0.0,
            Scheme::GeodqTrain { tau1g, tau2g, n } => *n as f64 * (2.0 * tau1g + tau2g),
            Scheme::Pulsepol { half_cycles } => 4.0 * r431_tau2(sys) * *half_cycles as f64,
            Scheme::SlicA { t } => *t,
            Scheme::SlicB { n_j } | Scheme::Cslic { n_j, .. } => *n_j as f64 * sys.tau_j(),
        }
    }

    /// Same scheme snapped to the allowed duration nearest `t`. The flag is
    /// set when the snapped R4₃¹ train ends on a half cycle.
    pub fn at_duration(&self, sys: &SpinSystem, t: f64) -> Result<(Scheme, bool)> {
        let snap = |step: f64| -> Result<usize> {
            let k = (t / step).round();
            if k < 1.0 {
                return Err(Error::InvalidParameter(format!("T = {t} s is shorter than one step")));
            }
            Ok(k as usize)
        };
        Ok(match self {
            Scheme::Inadequate { .. } => (Scheme::Inadequate { tau1: t / 2.0 }, false),
            Scheme::GeodqIdeal => {
                return Err(Error::InvalidParameter("ideal GeoDQ has no duration".into()))
            }
            Scheme::GeodqTrain { tau1g, tau2g, .. } => {
                let n = snap(2.0 * tau1g + tau2g)?;
                (Scheme::GeodqTrain { tau1g: *tau1g, tau2g: *tau2g, n }, false)
            }
            Scheme::Pulsepol { .. } => {
                let h = snap(4.0 * r431_tau2(sys))?;
                (Scheme::Pulsepol { half_cycles: h }, h % 2 == 1)
            }
            Scheme::SlicA { .. } => (Scheme::SlicA { t }, false),
            Scheme::SlicB { .. } => (Scheme::SlicB { n_j: snap(sys.tau_j())? }, false),
            Scheme::Cslic { omega_strong, .. } => {
                let n_j = snap(sys.tau_j())?;
                (Scheme::Cslic { n_j, omega_strong: *omega_strong }, false)
            }
        })
    }

    /// Closed-form a_DQ. Only SLIC(a) and cSLIC model rf error, and only the
    /// ideal GeoDQ is independent of the resonance offset.
    pub fn analytic(&self, sys: &SpinSystem, eps_rf: f64) -> Result<Complex64> {
        let unsupported = |what: &str| {
            Err(Error::InvalidParameter(format!("no closed form for {} with {what}", self.name())))
        };
        if let Scheme::GeodqIdeal = self {
            return Ok(Complex64::new(0.0, -1.0));
        }
        if sys.offset_sum_hz != 0.0 {
            return unsupported("a resonance offset");
        }
        let rf_error_modelled = matches!(self, Scheme::SlicA { .. } | Scheme::Cslic { .. });
        if eps_rf != 0.0 && !rf_error_modelled {
            return unsupported("rf error");
        }
        match self {
            Scheme::Inadequate { tau1 } => Ok(a_dq_inadequate(sys.theta_st()?, sys.omega_j(), *tau1)),
            Scheme::Pulsepol { .. } => Ok(a_dq_pulsepol(self.duration(sys), omega_nut12_r431(sys))),
            Scheme::SlicA { t } => Ok(a_dq_slic_a_with_error(sys, *t, eps_rf)),
            Scheme::SlicB { .. } => Ok(a_dq_slic_b(sys, self.duration(sys))),
            Scheme::Cslic { omega_strong, .. } => {
                let p = cslic_params_finite(eps_rf, cslic_alpha(sys, *omega_strong))?;
                Ok(a_dq_cslic(sys, self.duration(sys), &p))
            }
            _ => unsupported("this sequence"),
        }
    }

    fn has_oracle(&self, swept: &Swept) -> bool {
        match swept {
            Swept::Duration => !matches!(self, Scheme::GeodqTrain { .. } | Scheme::GeodqIdeal),
            Swept::EpsRf => matches!(self, Scheme::SlicA { .. } | Scheme::Cslic { .. }),
            Swept::Offset => matches!(self, Scheme::GeodqIdeal),
            Swept::Alpha => matches!(self, Scheme::Cslic { .. }),
            Swept::ThetaTau1 { .. } => matches!(self, Scheme::Inadequate { .. }),
        }
    }
}

/// Evenly spaced grid including both end points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LinRange {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let r = Self { start, stop, count };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 || !(self.start < self.stop) {
            return Err(Error::InvalidParameter(format!(
                "range needs count >= 2 and start < stop, got [{}, {}] x {}",
                self.start, self.stop, self.count
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + i as f64 * step })
            .collect()
    }
}

/// Swept quantity. Offsets are Δω/ω_J; the grid sweep runs θ_ST in degrees
/// against τ1 in seconds.
#[derive(Debug, Clone, PartialEq)]
pub enum Swept {
    Duration,
    EpsRf,
    Offset,
    Alpha,
    ThetaTau1 { tau1: LinRange },
}

impl Swept {
    pub fn name(&self) -> &'static str {
        match self {
            Swept::Duration => "T",
            Swept::EpsRf => "eps_rf",
            Swept::Offset => "offset",
            Swept::Alpha => "alpha",
            Swept::ThetaTau1 { .. } => "theta_tau1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    ADqNumeric,
    ADqAnalytic,
    ADqfNumeric,
    ADqfAnalytic,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::ADqNumeric,
        Observable::ADqAnalytic,
        Observable::ADqfNumeric,
        Observable::ADqfAnalytic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::ADqNumeric => "a_dq_numeric",
            Observable::ADqAnalytic => "a_dq_analytic",
            Observable::ADqfNumeric => "a_dqf_numeric",
            Observable::ADqfAnalytic => "a_dqf_analytic",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }

    fn columns(self) -> Vec<String> {
        match self {
            Observable::ADqNumeric | Observable::ADqAnalytic => {
                vec![format!("{}_re", self.name()), format!("{}_im", self.name())]
            }
            _ => vec![self.name().to_string()],
        }
    }

    fn is_analytic(self) -> bool {
        matches!(self, Observable::ADqAnalytic | Observable::ADqfAnalytic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scheme: Scheme,
    pub swept: Swept,
    pub range: LinRange,
    pub observables: Vec<Observable>,
    /// rf amplitude error used when it is not the swept quantity.
    pub eps_rf: f64,
}

impl SweepSpec {
    /// Defaults to every observable available for this scheme and sweep.
    pub fn new(scheme: Scheme, swept: Swept, range: LinRange) -> Self {
        let oracle = scheme.has_oracle(&swept);
        let observables = Observable::ALL.iter().copied().filter(|o| oracle || !o.is_analytic()).collect();
        Self { scheme, swept, range, observables, eps_rf: 0.0 }
    }

    pub fn with_observables(mut self, obs: &[Observable]) -> Self {
        self.observables = obs.to_vec();
        self
    }

    fn validate(&self) -> Result<()> {
        self.range.validate()?;
        if self.observables.is_empty() {
            return Err(Error::InvalidParameter("no observables requested".into()));
        }
        let scheme_ok = match (&self.swept, &self.scheme) {
            (Swept::Duration, Scheme::GeodqIdeal) => false,
            (Swept::Alpha, s) => matches!(s, Scheme::Cslic { .. }),
            (Swept::ThetaTau1 { tau1 }, s) => {
                tau1.validate()?;
                matches!(s, Scheme::Inadequate { .. })
            }
            _ => true,
        };
        if !scheme_ok {
            return Err(Error::InvalidParameter(format!(
                "cannot sweep {} for {}",
                self.swept.name(),
                self.scheme.name()
            )));
        }
        if self.observables.iter().any(|o| o.is_analytic()) && !self.scheme.has_oracle(&self.swept) {
            return Err(Error::InvalidParameter(format!(
                "no closed form for {} over {}; request numeric observables only",
                self.scheme.name(),
                self.swept.name()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub scheme: String,
    pub swept: String,
    pub j_hz: f64,
    pub delta_hz: f64,
    pub offset_sum_hz: f64,
    pub eps_rf: f64,
    pub timestamp: Option<String>,
    pub version: String,
}

impl SweepMetadata {
    fn new(scheme: &str, swept: &str, sys: &SpinSystem, eps_rf: f64) -> Self {
        Self {
            scheme: scheme.to_string(),
            swept: swept.to_string(),
            j_hz: sys.j_hz,
            delta_hz: sys.delta_hz,
            offset_sum_hz: sys.offset_sum_hz,
            eps_rf,
            timestamp: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    pub row: usize,
    pub param: f64,
    pub message: String,
}

/// Tabular sweep output. Failed points keep their row with NaN observables
/// and get an entry in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub errors: Vec<RowError>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Complex column assembled from its `_re`/`_im` pair.
    pub fn complex_column(&self, name: &str) -> Option<Vec<Complex64>> {
        let re = self.column(&format!("{name}_re"))?;
        let im = self.column(&format!("{name}_im"))?;
        Some(re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
    }

    pub fn file_stem(&self) -> String {
        match &self.metadata.timestamp {
            Some(ts) => format!("{}_{}_{}", self.metadata.scheme, self.metadata.swept, ts),
            None => format!("{}_{}", self.metadata.scheme, self.metadata.swept),
        }
    }

    /// Header `param,...`; floats in shortest round-trip form.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidParameter(format!("json: {e}")))
    }
}

struct Point {
    scheme: Scheme,
    sys: SpinSystem,
    eps: f64,
    params: Vec<f64>,
    sign_flip: Option<bool>,
}

fn build_point(spec: &SweepSpec, sys: &SpinSystem, x: f64, y: Option<f64>) -> Result<Point> {
    let mut p = Point {
        scheme: spec.scheme.clone(),
        sys: *sys,
        eps: spec.eps_rf,
        params: vec![x],
        sign_flip: None,
    };
    match &spec.swept {
        Swept::Duration => {
            let (s, flip) = spec.scheme.at_duration(sys, x)?;
            p.params[0] = s.duration(sys);
            if matches!(s, Scheme::Pulsepol { .. }) {
                p.sign_flip = Some(flip);
            }
            p.scheme = s;
        }
        Swept::EpsRf => p.eps = x,
        Swept::Offset => p.sys = sys.with_mean_offset(x * sys.j_hz),
        Swept::Alpha => {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidParameter(format!("alpha = {x} outside (0, 1)")));
            }
            if let Scheme::Cslic { n_j, .. } = spec.scheme {
                let omega_strong = x * sys.omega_j() / (1.0 - x);
                p.scheme = Scheme::Cslic { n_j, omega_strong };
            }
        }
        Swept::ThetaTau1 { .. } => {
            let tau1 = y.expect("grid sweep carries τ1");
            p.sys = SpinSystem { delta_hz: sys.j_hz * x.to_radians().tan(), ..*sys };
            p.scheme = Scheme::Inadequate { tau1 };
            p.params.push(tau1);
        }
    }
    Ok(p)
}

fn evaluate(p: &Point, observables: &[Observable]) -> Result<Vec<f64>> {
    let seqs = p.scheme.sequences(&p.sys)?;
    let mut out = Vec::new();
    for o in observables {
        match o {
            Observable::ADqNumeric => {
                let rho = evolve_with_error(&total_spin(Axis::Z), &seqs.exc, &p.sys, p.eps)?;
                let a = dq_excitation_amplitude(&rho);
                out.extend([a.re, a.im]);
            }
            Observable::ADqAnalytic => {
                let a = p.scheme.analytic(&p.sys, p.eps)?;
                out.extend([a.re, a.im]);
            }
            Observable::ADqfNumeric => {
                let r = dqf_amplitude_with_error(&seqs.exc, &seqs.rec, &seqs.cycle, &p.sys, p.eps)?;
                out.push(r.magnitude);
            }
            Observable::ADqfAnalytic => out.push(p.scheme.analytic(&p.sys, p.eps)?.norm_sqr()),
        }
    }
    Ok(out)
}

/// Runs a sweep. Points are evaluated in parallel; rows come back in grid order.
pub fn sweep(spec: &SweepSpec, sys: &SpinSystem) -> Result<SweepResult> {
    spec.validate()?;
    let grid: Vec<(f64, Option<f64>)> = match &spec.swept {
        Swept::ThetaTau1 { tau1 } => spec
            .range
            .values()
            .into_iter()
            .flat_map(|th| tau1.values().into_iter().map(move |t| (th, Some(t))))
            .collect(),
        _ => spec.range.values().into_iter().map(|x| (x, None)).collect(),
    };

    let mut columns = vec!["param".to_string()];
    if let Swept::ThetaTau1 { .. } = spec.swept {
        columns.push("param2".into());
    }
    let n_obs_cols: usize = spec.observables.iter().map(|o| o.columns().len()).sum();
    columns.extend(spec.observables.iter().flat_map(|o| o.columns()));
    let flag_rows = matches!((&spec.swept, &spec.scheme), (Swept::Duration, Scheme::Pulsepol { .. }));
    if flag_rows {
        columns.push("sign_flip".into());
    }

    let evaluated: Vec<(Vec<f64>, Option<String>)> = grid
        .par_iter()
        .map(|&(x, y)| {
            let mut row = vec![x];
            row.extend(y);
            let res = build_point(spec, sys, x, y).and_then(|p| {
                let vals = evaluate(&p, &spec.observables)?;
                Ok((p, vals))
            });
            match res {
                Ok((p, vals)) => {
                    row[..p.params.len()].copy_from_slice(&p.params);
                    row.extend(vals);
                    if flag_rows {
                        row.push(if p.sign_flip == Some(true) { 1.0 } else { 0.0 });
                    }
                    (row, None)
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(f64::NAN, n_obs_cols + flag_rows as usize));
                    (row, Some(e.to_string()))
                }
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(evaluated.len());
    let mut errors = Vec::new();
    for (i, (row, err)) in evaluated.into_iter().enumerate() {
        if let Some(message) = err {
            errors.push(RowError { row: i, param: row[0], message });
        }
        rows.push(row);
    }
    Ok(SweepResult {
        metadata: SweepMetadata::new(spec.scheme.name(), spec.swept.name(), sys, spec.eps_rf),
        columns,
        rows,
        errors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryScheme {
    /// ⟨I_x → Q_DQP⟩ along an R4₃¹ train.
    Pulsepol,
    /// ⟨2|ρ|4⟩ under a SLIC pulse starting from I_z.
    SlicA,
}

impl TrajectoryScheme {
    pub fn name(self) -> &'static str {
        match self {
            TrajectoryScheme::Pulsepol => "pulsepol",
            TrajectoryScheme::SlicA => "slic_a",
        }
    }
}

/// Numeric amplitude, average-Hamiltonian envelope and envelope times the
/// fast oscillation, each as a re/im pair, at every time in `t_grid`.
pub fn trajectory(scheme: TrajectoryScheme, sys: &SpinSystem, t_grid: &[f64]) -> Result<SweepResult> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter("trajectory times must be non-negative".into()));
    }
    let t_max = t_grid.iter().cloned().fold(0.0, f64::max);
    let wj = sys.omega_j();
    let ix = total_spin(Axis::X);
    let iz = total_spin(Axis::Z);
    let q = named_operator("Q_DQP")?;
    let tau2 = r431_tau2(sys);
    let basic = r_basic_element(tau2);
    let elem_len = basic.events.len();
    let n_elements = (t_max / (2.0 * tau2)).ceil() as usize + 1;
    let train = match scheme {
        TrajectoryScheme::Pulsepol => r_symmetry_elements(4, 3, 1, &basic, true, n_elements)?,
        TrajectoryScheme::SlicA => Sequence::from_events("slic_a", vec![Event::fpulse(wj, 0.0, t_max)]),
    };
    // Whole R-elements up to t, then the running element cut at t. Cutting the
    // train directly would also pick up the next element's opening pulse.
    let upto = |t: f64| -> Sequence {
        match scheme {
            TrajectoryScheme::Pulsepol => {
                let slack = 1e-12 * t.max(1.0);
                let full = ((t + slack) / (2.0 * tau2)).floor() as usize;
                let rem = t - full as f64 * 2.0 * tau2;
                let mut seq = Sequence::from_events("r431", train.events[..full * elem_len].to_vec());
                if rem > slack {
                    let running = &train.events[full * elem_len..(full + 1) * elem_len];
                    seq.extend(&Sequence::from_events("running", running.to_vec()).truncated(rem));
                }
                seq
            }
            TrajectoryScheme::SlicA => train.truncated(t),
        }
    };
    let w12 = omega_nut12_r431(sys);

    let rows: Result<Vec<Vec<f64>>> = t_grid
        .par_iter()
        .map(|&t| {
            let u = sequence_propagator(&upto(t), sys)?;
            let (num, env, fast) = match scheme {
                TrajectoryScheme::Pulsepol => {
                    let num = transformation_amplitude(&ix, &q, &u)?;
                    let env = Complex64::new((0.25 * w12 * t).sin().powi(2), 0.0);
                    (num, env, (wj * t / 3.0).cos())
                }
                TrajectoryScheme::SlicA => {
                    let num = dq_excitation_amplitude(&iz.sandwich(&u));
                    let env = Complex64::new(0.0, (0.25 * beta12_slic(sys, t)).sin().powi(2));
                    (num, env, (wj * t).sin())
                }
            };
            let prod = env * fast;
            Ok(vec![t, num.re, num.im, env.re, env.im, prod.re, prod.im])
        })
        .collect();

    let columns = ["param", "numeric_re", "numeric_im", "ah_re", "ah_im", "ah_fast_re", "ah_fast_im"];
    Ok(SweepResult {
        metadata: SweepMetadata::new(scheme.name(), "trajectory", sys, 0.0),
        columns: columns.iter().map(|s| s.to_string()).collect(),
        rows: rows?,
        errors: Vec::new(),
    })
}

/// Detection grid for synthetic spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub dwell: f64,
    pub npoints: usize,
    pub lb_hz: f64,
}

impl Default for Acquisition {
    fn default() -> Self {
        Self { dwell: 1.0 / 2000.0, npoints: 4096, lb_hz: DEFAULT_LINE_BROADENING_HZ }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumSource {
    PulseAcquire,
    Dqf(Scheme),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub label: String,
    pub fid: Vec<Complex64>,
    /// `(frequency in Hz, value)`, ascending in frequency.
    pub points: Vec<(f64, Complex64)>,
}

impl Spectrum {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
        w.write_record(["freq_hz", "re", "im"]).map_err(io)?;
        for (f, v) in &self.points {
            w.write_record([format!("{f:?}"), format!("{:?}", v.re), format!("{:?}", v.im)])
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Relaxation-free spectrum after a 90° pulse or a full DQ filter.
pub fn synth_spectrum(source: &SpectrumSource, sys: &SpinSystem, acq: &Acquisition) -> Result<Spectrum> {
    match source {
        SpectrumSource::PulseAcquire => {
            let read = Sequence::from_events("pulse_acquire", vec![Event::pulse(PI / 2.0, PI / 2.0)]);
            let rho = evolve_with_error(&total_spin(Axis::Z), &read, sys, 0.0)?;
            let fid = detect_fid(&rho, sys, acq.dwell, acq.npoints)?;
            let points = spectrum(&fid, acq.dwell, acq.lb_hz);
            Ok(Spectrum { label: "pulse_acquire".into(), fid, points })
        }
        SpectrumSource::Dqf(scheme) => {
            let s = scheme.sequences(sys)?;
            let mut out = dqf_spectrum(&s.exc, &s.rec, &s.cycle, sys, acq)?;
            out.label = format!("dqf_{}", scheme.name());
            Ok(out)
        }
    }
}

/// Receiver-phase weighted average of the FIDs of every cycle step.
pub fn dqf_spectrum(
    exc: &Sequence,
    rec: &Sequence,
    cycle: &PhaseCycleSpec,
    sys: &SpinSystem,
    acq: &Acquisition,
) -> Result<Spectrum> {
    let states = phase_cycled_states(exc, rec, cycle, sys, 0.0)?;
    let mut fid = vec![Complex64::new(0.0, 0.0); acq.npoints];
    for (rho, phi_rec) in &states {
        let w = Complex64::from_polar(1.0 / states.len() as f64, -phi_rec);
        for (acc, s) in fid.iter_mut().zip(detect_fid(rho, sys, acq.dwell, acq.npoints)?) {
            *acc += w * s;
        }
    }
    let points = spectrum(&fid, acq.dwell, acq.lb_hz);
    Ok(Spectrum { label: "dqf".into(), fid, points })
}
