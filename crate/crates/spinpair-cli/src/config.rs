//! Run configuration: `[section]` key = value files plus command-line overrides.
//!
//! Angles are degrees, durations take s/ms/us suffixes (bare numbers are
//! seconds), frequencies take Hz/kHz (bare numbers are Hz).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;
use spinpair::experiments::{LinRange, Observable, Scheme, Swept};
use spinpair::sequences::{m_optimal, n_j_optimal, t_slic_a_condition};
use spinpair::SpinSystem;

pub type Section = BTreeMap<String, String>;

fn split_unit(s: &str) -> (f64, &str) {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| c.is_alphabetic() && !(matches!(c, 'e' | 'E') && is_exponent(s, i)) || c == 'µ')
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    (s[..end].trim().parse().unwrap_or(f64::NAN), s[end..].trim())
}

fn is_exponent(s: &str, i: usize) -> bool {
    i > 0 && s[i + 1..].chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+')
}

fn number_with(s: &str, what: &str, units: &[(&str, f64)]) -> Result<f64> {
    let (x, unit) = split_unit(s);
    if x.is_nan() {
        bail!("cannot read {what} from {s:?}");
    }
    let scale = units
        .iter()
        .find(|(u, _)| u.eq_ignore_ascii_case(unit))
        .map(|(_, f)| *f)
        .ok_or_else(|| anyhow!("unknown unit {unit:?} in {what} {s:?}"))?;
    Ok(x * scale)
}

/// Duration in seconds.
pub fn duration(s: &str) -> Result<f64> {
    number_with(s, "duration", &[("", 1.0), ("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("µs", 1e-6)])
}

/// Frequency in Hz.
pub fn frequency(s: &str) -> Result<f64> {
    number_with(s, "frequency", &[("", 1.0), ("hz", 1.0), ("khz", 1e3)])
}

/// Angle in degrees.
pub fn angle_deg(s: &str) -> Result<f64> {
    number_with(s, "angle", &[("", 1.0), ("deg", 1.0)])
}

pub fn plain(s: &str) -> Result<f64> {
    number_with(s, "number", &[("", 1.0)])
}

pub fn count(s: &str) -> Result<usize> {
    s.trim().parse().with_context(|| format!("expected a non-negative integer, got {s:?}"))
}

/// Parsed config file, one map per section.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub system: Section,
    pub scheme: Section,
    pub sweep: Section,
    pub output: Section,
    pub acquisition: Section,
}

const SYSTEM_KEYS: &[&str] = &["j_hz", "delta_hz", "delta_ppb", "larmor_mhz", "offset_hz"];
const SCHEME_KEYS: &[&str] =
    &["name", "tau1", "m", "half_cycles", "t", "n_j", "omega_strong", "tau1g", "tau2g", "n", "eps_rf"];
const SWEEP_KEYS: &[&str] =
    &["swept", "start", "stop", "count", "observables", "tau1_start", "tau1_stop", "tau1_count"];
const OUTPUT_KEYS: &[&str] = &["directory", "formats"];
const ACQUISITION_KEYS: &[&str] = &["dwell", "npoints", "lb_hz"];

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| anyhow!("config syntax: {e}"))?;
        let mut out = ConfigFile::default();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    bail!("keys before the first [section]");
                }
                continue;
            };
            let (target, allowed) = match name {
                "system" => (&mut out.system, SYSTEM_KEYS),
                "scheme" => (&mut out.scheme, SCHEME_KEYS),
                "sweep" => (&mut out.sweep, SWEEP_KEYS),
                "output" => (&mut out.output, OUTPUT_KEYS),
                "acquisition" => (&mut out.acquisition, ACQUISITION_KEYS),
                other => bail!("unknown section [{other}]"),
            };
            for (k, v) in props.iter() {
                if !allowed.contains(&k) {
                    bail!("unknown key {k:?} in [{name}]");
                }
                target.insert(k.to_string(), v.to_string());
            }
        }
        Ok(out)
    }
}

/// Spin system from `[system]`. Without a config the defaults are J = 255.94 Hz, Δ = 17.8 Hz.
pub fn spin_system(sec: &Section) -> Result<SpinSystem> {
    let j = sec.get("j_hz").map(|s| frequency(s)).transpose()?.unwrap_or(255.94);
    let sys = match (sec.get("delta_hz"), sec.get("delta_ppb"), sec.get("larmor_mhz")) {
        (Some(d), None, None) => SpinSystem::new(j, frequency(d)?),
        (None, Some(ppb), Some(mhz)) => SpinSystem::from_ppb(j, plain(ppb)?, plain(mhz)?),
        (None, Some(_), None) => bail!("delta_ppb needs larmor_mhz"),
        (None, None, None) if sec.is_empty() => SpinSystem::new(j, 17.8),
        (None, None, _) => bail!("[system] needs delta_hz, or delta_ppb with larmor_mhz"),
        _ => bail!("give either delta_hz or delta_ppb with larmor_mhz, not both"),
    };
    let offset = sec.get("offset_hz").map(|s| frequency(s)).transpose()?.unwrap_or(0.0);
    if !(sys.j_hz.is_finite() && sys.delta_hz.is_finite() && offset.is_finite()) || sys.j_hz == 0.0 {
        bail!("spin system parameters must be finite with J != 0");
    }
    Ok(sys.with_mean_offset(offset))
}

fn allowed_scheme_keys(name: &str) -> Result<&'static [&'static str]> {
    Ok(match name {
        "inadequate" => &["tau1"],
        "geodq" => &[],
        "geodq_train" => &["tau1g", "tau2g", "n"],
        "pulsepol" => &["m", "half_cycles"],
        "slic_a" => &["t"],
        "slic_b" => &["n_j"],
        "cslic" => &["n_j", "omega_strong"],
        other => bail!(
            "unknown scheme {other:?}; expected inadequate, geodq, geodq_train, pulsepol, slic_a, slic_b or cslic"
        ),
    })
}

/// Default compensating-pulse amplitude for cSLIC.
pub const CSLIC_STRONG_HZ: f64 = 25_000.0;

/// Scheme from its name and keyword parameters. Missing optional parameters
/// fall back to the optimum for `sys`.
pub fn scheme(sec: &Section, sys: &SpinSystem) -> Result<Scheme> {
    let name = sec.get("name").ok_or_else(|| anyhow!("no scheme given (set [scheme] name or --scheme)"))?;
    let allowed = allowed_scheme_keys(name)?;
    for k in sec.keys() {
        if k != "name" && k != "eps_rf" && !allowed.contains(&k.as_str()) {
            bail!("parameter {k:?} does not apply to {name}");
        }
    }
    let need = |k: &str| sec.get(k).ok_or_else(|| anyhow!("{name} needs {k}"));
    let n_j = || -> Result<usize> {
        match sec.get("n_j") {
            Some(s) => count(s),
            None => Ok(n_j_optimal(sys)?),
        }
    };
    Ok(match name.as_str() {
        "inadequate" => Scheme::Inadequate { tau1: duration(need("tau1")?)? },
        "geodq" => Scheme::GeodqIdeal,
        "geodq_train" => Scheme::GeodqTrain {
            tau1g: duration(need("tau1g")?)?,
            tau2g: duration(need("tau2g")?)?,
            n: count(need("n")?)?,
        },
        "pulsepol" => match (sec.get("m"), sec.get("half_cycles")) {
            (Some(_), Some(_)) => bail!("give m or half_cycles, not both"),
            (Some(m), None) => Scheme::pulsepol(count(m)?),
            (None, Some(h)) => Scheme::Pulsepol { half_cycles: count(h)? },
            (None, None) => Scheme::pulsepol(m_optimal(sys)?),
        },
        "slic_a" => Scheme::SlicA {
            t: match sec.get("t") {
                Some(s) => duration(s)?,
                None => t_slic_a_condition(sys, 20, true),
            },
        },
        "slic_b" => Scheme::SlicB { n_j: n_j()? },
        "cslic" => {
            let hz = sec.get("omega_strong").map(|s| frequency(s)).transpose()?.unwrap_or(CSLIC_STRONG_HZ);
            Scheme::Cslic { n_j: n_j()?, omega_strong: 2.0 * PI * hz }
        }
        _ => unreachable!("checked by allowed_scheme_keys"),
    })
}

pub fn eps_rf(sec: &Section) -> Result<f64> {
    sec.get("eps_rf").map(|s| plain(s)).transpose().map(|e| e.unwrap_or(0.0))
}

/// Swept quantity, its range and the requested observables.
pub fn sweep_axes(sec: &Section) -> Result<(Swept, LinRange, Option<Vec<Observable>>)> {
    let name = sec.get("swept").ok_or_else(|| anyhow!("no swept quantity (set [sweep] swept or --swept)"))?;
    let need = |k: &str| sec.get(k).ok_or_else(|| anyhow!("sweep needs {k}"));
    let parse: fn(&str) -> Result<f64> = match name.as_str() {
        "T" => duration,
        "theta_tau1" => angle_deg,
        "eps_rf" | "offset" | "alpha" => plain,
        other => bail!("unknown swept quantity {other:?}; expected T, eps_rf, offset, alpha or theta_tau1"),
    };
    let range = LinRange::new(parse(need("start")?)?, parse(need("stop")?)?, count(need("count")?)?)?;
    let swept = match name.as_str() {
        "T" => Swept::Duration,
        "eps_rf" => Swept::EpsRf,
        "offset" => Swept::Offset,
        "alpha" => Swept::Alpha,
        _ => Swept::ThetaTau1 {
            tau1: LinRange::new(
                duration(need("tau1_start")?)?,
                duration(need("tau1_stop")?)?,
                count(need("tau1_count")?)?,
            )?,
        },
    };
    let observables = sec
        .get("observables")
        .map(|s| {
            s.split(',')
                .map(|o| Observable::from_name(o.trim()).map_err(anyhow::Error::from))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok((swept, range, observables))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "both" => Ok(Format::Both),
            other => bail!("unknown format {other:?}; expected csv, json or both"),
        }
    }

    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

pub fn output_dir(sec: &Section, flag: Option<&PathBuf>) -> PathBuf {
    flag.cloned()
        .or_else(|| sec.get("directory").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn format(sec: &Section, flag: Option<Format>) -> Result<Format> {
    match flag {
        Some(f) => Ok(f),
        None => sec.get("formats").map(|s| Format::parse(s)).unwrap_or(Ok(Format::Csv)),
    }
}

/// Overlays command-line values on a config section.
pub fn merge(mut base: Section, overrides: impl IntoIterator<Item = (&'static str, Option<String>)>) -> Section {
    for (k, v) in overrides {
        if let Some(v) = v {
            base.insert(k.to_string(), v);
        }
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units() {
        assert_eq!(duration("145ms").unwrap(), 0.145);
        assert_eq!(duration("926 us").unwrap(), 926e-6);
        assert_eq!(duration("0.29").unwrap(), 0.29);
        assert_eq!(duration("1e-3 s").unwrap(), 1e-3);
        assert_eq!(duration("2.5e-1ms").unwrap(), 2.5e-4);
        assert_eq!(frequency("25kHz").unwrap(), 25_000.0);
        assert_eq!(frequency("255.94 Hz").unwrap(), 255.94);
        assert_eq!(angle_deg("90deg").unwrap(), 90.0);
        assert!(duration("3 fortnights").is_err());
        assert!(frequency("fast").is_err());
    }

    #[test]
    fn delta_sources_are_exclusive() {
        let both = ConfigFile::parse("[system]\nj_hz = 255.94\ndelta_hz = 17.8\ndelta_ppb = 31\nlarmor_mhz = 564.5\n")
            .unwrap();
        assert!(spin_system(&both.system).is_err());
        let ppb = ConfigFile::parse("[system]\nj_hz = 255.94\ndelta_ppb = 31.53\nlarmor_mhz = 564.5\n").unwrap();
        assert!((spin_system(&ppb.system).unwrap().delta_hz - 17.8).abs() < 0.01);
        let none = ConfigFile::parse("[system]\nj_hz = 255.94\n").unwrap();
        assert!(spin_system(&none.system).is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::parse("[system]\nj = 1\n").is_err());
        assert!(ConfigFile::parse("[extra]\n").is_err());
    }

    #[test]
    fn scheme_defaults_and_conflicts() {
        let sys = SpinSystem::reference_pair();
        let mut sec = Section::new();
        sec.insert("name".into(), "pulsepol".into());
        assert_eq!(scheme(&sec, &sys).unwrap(), Scheme::pulsepol(9));
        sec.insert("n_j".into(), "3".into());
        assert!(scheme(&sec, &sys).is_err());
        let sec = merge(Section::new(), [("name", Some("cslic".into()))]);
        assert_eq!(scheme(&sec, &sys).unwrap(), Scheme::Cslic { n_j: 20, omega_strong: 2.0 * PI * 25_000.0 });
    }
}
