//! Figure presets: fixed sweeps written as one table per curve.

use anyhow::Result;
use spinpair::analytics::cslic_butterfly;
use spinpair::experiments::{
    sweep, trajectory, LinRange, RowError, Scheme, SweepMetadata, SweepResult, SweepSpec, Swept,
    TrajectoryScheme,
};
use spinpair::sequences::{m_optimal, n_j_optimal, t_slic_a_condition};
use spinpair::SpinSystem;

use crate::config::CSLIC_STRONG_HZ;
use crate::output::Sink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// INADEQUATE |a_DQ|² over mixing angle and τ1
    Fig1,
    /// DQ-filtered signal against duration
    Fig5,
    /// PulsePol excitation trajectory
    Fig8a,
    /// SLIC excitation trajectory
    Fig8b,
    /// rf-error dependence of SLIC and cSLIC
    Fig9,
    /// offset dependence
    Fig10,
    /// finite-pulse cSLIC efficiency over rf error and α
    Butterfly,
}

impl Figure {
    fn prefix(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1_",
            Figure::Fig5 => "fig5_",
            Figure::Fig8a => "fig8a_",
            Figure::Fig8b => "fig8b_",
            Figure::Fig9 => "fig9_",
            Figure::Fig10 => "fig10_",
            Figure::Butterfly => "butterfly_",
        }
    }
}

fn strong() -> f64 {
    2.0 * std::f64::consts::PI * CSLIC_STRONG_HZ
}

fn tables(fig: Figure, sys: &SpinSystem) -> Result<Vec<SweepResult>> {
    let tj = sys.tau_j();
    let run = |scheme: Scheme, swept: Swept, range: LinRange| sweep(&SweepSpec::new(scheme, swept, range), sys);
    Ok(match fig {
        Figure::Fig1 => {
            let tau1 = LinRange::new(1.0 / (50.0 * sys.j_hz), 1.0 / sys.j_hz, 50)?;
            vec![run(Scheme::Inadequate { tau1: 0.0 }, Swept::ThetaTau1 { tau1 }, LinRange::new(0.9, 89.1, 50)?)?]
        }
        Figure::Fig5 => {
            let half = Scheme::Pulsepol { half_cycles: 1 }.duration(sys);
            vec![
                run(Scheme::Inadequate { tau1: 0.0 }, Swept::Duration, LinRange::new(5e-3, 0.6, 120)?)?,
                run(Scheme::pulsepol(1), Swept::Duration, LinRange::new(half, 40.0 * half, 40)?)?,
                run(Scheme::SlicB { n_j: 1 }, Swept::Duration, LinRange::new(tj, 50.0 * tj, 50)?)?,
                run(Scheme::Cslic { n_j: 1, omega_strong: strong() }, Swept::Duration, LinRange::new(tj, 50.0 * tj, 50)?)?,
            ]
        }
        Figure::Fig8a => {
            let t = LinRange::new(0.0, 36.0 * tj, 721)?.values();
            vec![trajectory(TrajectoryScheme::Pulsepol, sys, &t)?]
        }
        Figure::Fig8b => {
            let t = LinRange::new(0.0, 40.0 * tj, 1601)?.values();
            vec![trajectory(TrajectoryScheme::SlicA, sys, &t)?]
        }
        Figure::Fig9 => {
            let eps = LinRange::new(-0.04, 0.04, 81)?;
            vec![
                run(Scheme::SlicA { t: t_slic_a_condition(sys, 20, true) }, Swept::EpsRf, eps)?,
                run(Scheme::Cslic { n_j: 20, omega_strong: strong() }, Swept::EpsRf, eps)?,
            ]
        }
        Figure::Fig10 => {
            let off = LinRange::new(-0.5, 0.5, 201)?;
            let n_j = n_j_optimal(sys)?;
            vec![
                run(Scheme::SlicA { t: t_slic_a_condition(sys, 20, true) }, Swept::Offset, off)?,
                run(Scheme::SlicB { n_j }, Swept::Offset, off)?,
                run(Scheme::Cslic { n_j, omega_strong: strong() }, Swept::Offset, off)?,
                run(Scheme::pulsepol(m_optimal(sys)?), Swept::Offset, off)?,
            ]
        }
        Figure::Butterfly => vec![butterfly(sys)?],
    })
}

/// cos²θ sin⁴(π κ'/2κ) on an rf-error × α grid.
fn butterfly(sys: &SpinSystem) -> Result<SweepResult> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for eps in LinRange::new(-0.1, 0.1, 81)?.values() {
        for alpha in LinRange::new(0.8, 1.0, 81)?.values() {
            let v = cslic_butterfly(eps, alpha).unwrap_or_else(|e| {
                errors.push(RowError { row: rows.len(), param: eps, message: e.to_string() });
                f64::NAN
            });
            rows.push(vec![eps, alpha, v]);
        }
    }
    Ok(SweepResult {
        metadata: SweepMetadata {
            scheme: "cslic".into(),
            swept: "eps_rf_alpha".into(),
            j_hz: sys.j_hz,
            delta_hz: sys.delta_hz,
            offset_sum_hz: sys.offset_sum_hz,
            eps_rf: 0.0,
            timestamp: None,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        columns: vec!["param".into(), "param2".into(), "efficiency".into()],
        rows,
        errors,
    })
}

pub fn run(fig: Figure, sys: &SpinSystem, sink: &Sink) -> Result<()> {
    for t in tables(fig, sys)? {
        sink.table(fig.prefix(), t)?;
    }
    Ok(())
}
