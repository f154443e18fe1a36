//! Experiment manifests: one TOML table per experiment, flat keys only.
//!
//! ```toml
//! [fig1]
//! rabi_hz = [6.3, 5.5, 4.8]   # drive amplitudes ω₁/2π
//! sweep = "t12"               # "t12" | "omega1"
//! sweep_min = "5ms"
//! sweep_max = "80ms"
//! sweep_points = 1501
//! ```
//!
//! Keys (all optional unless noted):
//!
//! | key | meaning |
//! |-----|---------|
//! | `description` | free text |
//! | `larmor_hz` | ω₀/2π, default 400 MHz |
//! | `s_eq` | equilibrium polarization, default 1 |
//! | `rabi_hz` | list of drive amplitudes ω₁/2π; omit for ω₁ sweeps |
//! | `t12` | list of common relaxation times, or give `t1` and `t2` lists |
//! | `concentration_mm` | sample labels, one per relaxation time |
//! | `sweep`, `sweep_min`, `sweep_max`, `sweep_points`, `sweep_scale` | sweep axis; times for `t12`, Hz for `omega1`; scale `linear` or `log` |
//! | `output` | file stem, default the experiment id |
//! | `seed`, `noise_sigma` | additive noise for simulated acquisitions (σ in units of s_eq) |
//! | `method`, `tolerance`, `max_step` | integrator: `dopri5` or `rk4` |
//! | `numeric` | also run the time-domain cross-check |
//!
//! Times are numbers in seconds or strings with an `ms`/`s` suffix.
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::dynamics::{IntegratorConfig, Method};
use crate::params::{hz_to_rad, SystemParams};
use crate::sr_analysis::{linspace, logspace};

use super::{parse_time, IoError};

/// Canned manifests, by name.
pub const BUILTIN_MANIFESTS: &[(&str, &str)] = &[
    ("fig1", include_str!("../../manifests/fig1.toml")),
    ("fig2", include_str!("../../manifests/fig2.toml")),
    ("table1", include_str!("../../manifests/table1.toml")),
];

const DEFAULT_LARMOR_HZ: f64 = 400e6;
const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    T12,
    Omega1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepScale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MethodName {
    Dopri5,
    Rk4,
}

/// Sweep axis in internal units (s or rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    pub fn grid(&self) -> Vec<f64> {
        match self.scale {
            SweepScale::Linear => linspace(self.min, self.max, self.points),
            SweepScale::Log => logspace(self.min, self.max, self.points),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentManifest {
    pub id: String,
    pub description: Option<String>,
    /// Validated parameter sets, drive amplitudes outermost.
    pub params: Vec<SystemParams>,
    /// File-name label per parameter set.
    pub labels: Vec<String>,
    pub concentrations_mm: Option<Vec<f64>>,
    pub sweep: Option<SweepSpec>,
    pub output: String,
    pub integrator: IntegratorConfig,
    pub seed: Option<u64>,
    pub noise_sigma: f64,
    pub numeric: bool,
}

impl ExperimentManifest {
    /// Output file name for parameter set `i`, with an optional suffix
    /// before the extension.
    pub fn file_name(&self, i: usize, suffix: &str) -> String {
        if self.params.len() == 1 {
            format!("{}{suffix}.csv", self.output)
        } else {
            format!("{}_{}{suffix}.csv", self.output, self.labels[i])
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum TimeValue {
    Seconds(f64),
    Text(String),
}

impl TimeValue {
    fn seconds(&self) -> Result<f64, String> {
        match self {
            TimeValue::Seconds(s) => Ok(*s),
            TimeValue::Text(t) => parse_time(t),
        }
    }

    fn hz(&self) -> Result<f64, String> {
        match self {
            TimeValue::Seconds(x) => Ok(*x),
            TimeValue::Text(t) => Err(format!("expected a frequency in Hz, found `{t}`")),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    description: Option<String>,
    larmor_hz: Option<f64>,
    s_eq: Option<f64>,
    rabi_hz: Option<Vec<f64>>,
    t12: Option<Vec<TimeValue>>,
    t1: Option<Vec<TimeValue>>,
    t2: Option<Vec<TimeValue>>,
    concentration_mm: Option<Vec<f64>>,
    sweep: Option<SweepKind>,
    sweep_min: Option<TimeValue>,
    sweep_max: Option<TimeValue>,
    sweep_points: Option<usize>,
    sweep_scale: Option<SweepScale>,
    output: Option<String>,
    seed: Option<u64>,
    noise_sigma: Option<f64>,
    method: Option<MethodName>,
    tolerance: Option<f64>,
    max_step: Option<TimeValue>,
    numeric: Option<bool>,
}

fn times(field: &str, list: &[TimeValue], problems: &mut Vec<String>) -> Vec<f64> {
    list.iter()
        .enumerate()
        .filter_map(|(i, v)| match v.seconds() {
            Ok(s) => Some(s),
            Err(e) => {
                problems.push(format!("{field}[{i}]: {e}"));
                None
            }
        })
        .collect()
}

fn fmt_label(x: f64) -> String {
    format!("{x:.1}")
}

fn build(id: &str, raw: RawExperiment) -> Result<ExperimentManifest, IoError> {
    let mut problems = Vec::new();
    let omega0 = hz_to_rad(raw.larmor_hz.unwrap_or(DEFAULT_LARMOR_HZ));
    let s_eq = raw.s_eq.unwrap_or(1.0);

    let sweep = match raw.sweep {
        None => {
            for (k, present) in [
                ("sweep_min", raw.sweep_min.is_some()),
                ("sweep_max", raw.sweep_max.is_some()),
                ("sweep_points", raw.sweep_points.is_some()),
            ] {
                if present {
                    problems.push(format!("{k}: given without `sweep`"));
                }
            }
            None
        }
        Some(kind) => {
            let bound = |name: &str, v: &Option<TimeValue>, problems: &mut Vec<String>| {
                let parsed = match v {
                    None => Err("missing".to_string()),
                    Some(v) if kind == SweepKind::T12 => v.seconds(),
                    Some(v) => v.hz().map(hz_to_rad),
                };
                parsed.map_err(|e| problems.push(format!("{name}: {e}"))).ok()
            };
            let min = bound("sweep_min", &raw.sweep_min, &mut problems);
            let max = bound("sweep_max", &raw.sweep_max, &mut problems);
            let points = raw.sweep_points.unwrap_or(1001);
            if points < 3 {
                problems.push(format!("sweep_points: need at least 3, got {points}"));
            }
            match (min, max) {
                (Some(lo), Some(hi)) if lo > 0.0 && hi > lo => Some(SweepSpec {
                    kind,
                    min: lo,
                    max: hi,
                    points,
                    scale: raw.sweep_scale.unwrap_or_default(),
                }),
                (Some(lo), Some(hi)) => {
                    problems.push(format!("sweep range: need 0 < sweep_min < sweep_max, got [{lo}, {hi}]"));
                    None
                }
                _ => None,
            }
        }
    };

    // Relaxation-time pairs.
    let mut pairs: Vec<(f64, f64)> = match (&raw.t12, &raw.t1, &raw.t2) {
        (Some(t12), None, None) => times("t12", t12, &mut problems).into_iter().map(|t| (t, t)).collect(),
        (None, Some(t1), Some(t2)) => {
            let (a, b) = (times("t1", t1, &mut problems), times("t2", t2, &mut problems));
            if a.len() != b.len() {
                problems.push(format!("t1/t2: lists differ in length ({} vs {})", a.len(), b.len()));
            }
            a.into_iter().zip(b).collect()
        }
        (None, None, None) => Vec::new(),
        _ => {
            problems.push("t12/t1/t2: give either `t12` or both `t1` and `t2`".into());
            Vec::new()
        }
    };
    let mut rabi = raw.rabi_hz.clone().unwrap_or_default();

    match sweep.map(|s| s.kind) {
        Some(SweepKind::T12) => {
            if !pairs.is_empty() {
                problems.push("t12: relaxation times are the swept axis; remove the list".into());
            }
            // Stand-in times for validation; each sweep overwrites them.
            let lo = sweep.map(|s| s.min).unwrap_or(1.0);
            pairs = vec![(lo, lo)];
        }
        Some(SweepKind::Omega1) => {
            if !rabi.is_empty() {
                problems.push("rabi_hz: the drive is the swept axis; remove the list".into());
            }
            rabi = vec![0.0];
        }
        None => {}
    }
    if rabi.is_empty() {
        rabi.push(0.0);
    }
    if pairs.is_empty() && problems.is_empty() {
        problems.push("t12: no relaxation times given".into());
    }
    if let Some(c) = &raw.concentration_mm {
        if c.len() != pairs.len() {
            problems.push(format!(
                "concentration_mm: {} entries for {} relaxation times",
                c.len(),
                pairs.len()
            ));
        }
    }

    let mut params = Vec::new();
    let mut labels = Vec::new();
    for (ri, &hz) in rabi.iter().enumerate() {
        for (ti, &(t1, t2)) in pairs.iter().enumerate() {
            match SystemParams::resonant(omega0, hz_to_rad(hz), t1, t2, s_eq) {
                Ok(p) => params.push(p),
                Err(e) => problems.push(format!("set {} (rabi_hz[{ri}], times[{ti}]): {e}", params.len())),
            }
            let label = match sweep.map(|s| s.kind) {
                Some(SweepKind::T12) => format!("rabi_{}Hz", fmt_label(hz)),
                Some(SweepKind::Omega1) if t1 == t2 => format!("t12_{}ms", fmt_label(t1 * 1e3)),
                Some(SweepKind::Omega1) => format!("t1_{}ms_t2_{}ms", fmt_label(t1 * 1e3), fmt_label(t2 * 1e3)),
                None => format!("set{}", labels.len()),
            };
            labels.push(label);
        }
    }

    let noise_sigma = raw.noise_sigma.unwrap_or(0.0);
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        problems.push(format!("noise_sigma: must be non-negative, got {noise_sigma}"));
    }
    let tolerance = raw.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let mut integrator = match raw.method.unwrap_or(MethodName::Dopri5) {
        MethodName::Dopri5 => IntegratorConfig::adaptive(tolerance),
        MethodName::Rk4 => IntegratorConfig {
            method: Method::Rk4,
            ..IntegratorConfig::adaptive(tolerance)
        },
    };
    if let Some(ms) = &raw.max_step {
        match ms.seconds() {
            Ok(h) => integrator.max_step = h,
            Err(e) => problems.push(format!("max_step: {e}")),
        }
    }
    if let Err(e) = integrator.validate() {
        problems.push(format!("integrator: {e}"));
    }

    if !problems.is_empty() {
        return Err(IoError::ValidationFailed {
            experiment: id.to_string(),
            fields: problems,
        });
    }
    Ok(ExperimentManifest {
        id: id.to_string(),
        description: raw.description,
        params,
        labels,
        concentrations_mm: raw.concentration_mm,
        sweep,
        output: raw.output.unwrap_or_else(|| id.to_string()),
        integrator,
        seed: raw.seed,
        noise_sigma,
        numeric: raw.numeric.unwrap_or(false),
    })
}

/// Parses every experiment table in `text`, in id order.
pub fn parse_manifest(text: &str) -> Result<Vec<ExperimentManifest>, IoError> {
    let raw: BTreeMap<String, RawExperiment> = toml::from_str(text).map_err(|e| IoError::ConfigParse(e.to_string()))?;
    if raw.is_empty() {
        return Err(IoError::ConfigParse("manifest defines no experiments".into()));
    }
    raw.into_iter().map(|(id, r)| build(&id, r)).collect()
}

pub fn load_manifest(path: &Path) -> Result<Vec<ExperimentManifest>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_manifest(&text).map_err(|e| match e {
        IoError::ConfigParse(m) => IoError::ConfigParse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// One of the canned experiments `fig1`, `fig2` or `table1`.
pub fn builtin_manifest(name: &str) -> Option<ExperimentManifest> {
    let (_, text) = BUILTIN_MANIFESTS.iter().find(|(n, _)| *n == name)?;
    let mut all = parse_manifest(text).expect("built-in manifests are valid");
    let i = all.iter().position(|m| m.id == name)?;
    Some(all.swap_remove(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table1() {
        let m = builtin_manifest("table1").unwrap();
        let t12: Vec<f64> = m.params.iter().map(|p| (p.t1 * 1e4).round() / 10.0).collect();
        assert_eq!(t12, [45.5, 36.5, 28.5, 25.0, 18.0]);
        assert!(m.params.iter().all(|p| p.t1 == p.t2));
        assert_eq!(
            m.concentrations_mm.as_deref(),
            Some(&[40.0, 50.0, 60.0, 75.0, 100.0][..])
        );
        assert!(m.sweep.is_none());
        assert!(m.seed.is_some());
    }

    #[test]
    fn builtin_figures() {
        let f1 = builtin_manifest("fig1").unwrap();
        assert_eq!(f1.params.len(), 3);
        assert_eq!(f1.labels, ["rabi_6.3Hz", "rabi_5.5Hz", "rabi_4.8Hz"]);
        let s = f1.sweep.unwrap();
        assert_eq!((s.kind, s.min, s.max), (SweepKind::T12, 5e-3, 80e-3));
        assert_eq!(f1.file_name(0, ""), "fig1_rabi_6.3Hz.csv");

        let f2 = builtin_manifest("fig2").unwrap();
        assert_eq!(f2.labels, ["t12_18.0ms", "t12_28.5ms", "t12_45.5ms"]);
        assert_eq!(f2.sweep.unwrap().kind, SweepKind::Omega1);
        assert!(builtin_manifest("fig3").is_none());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_manifest("[x]\nt12 = [\"10ms\"]\ncolour = 3\n").unwrap_err();
        match err {
            IoError::ConfigParse(m) => assert!(m.contains("colour"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn t2_bound_fails_validation() {
        let err = parse_manifest("[bad]\nt1 = [\"10ms\"]\nt2 = [\"25ms\"]\n").unwrap_err();
        match err {
            IoError::ValidationFailed { experiment, fields } => {
                assert_eq!(experiment, "bad");
                assert_eq!(fields.len(), 1);
                assert!(fields[0].contains("exceeds 2·t1"), "{fields:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn field_diagnostics() {
        let text = r#"
[e]
t12 = ["10 minutes"]
sweep_points = 10
noise_sigma = -1.0
"#;
        let IoError::ValidationFailed { fields, .. } = parse_manifest(text).unwrap_err() else {
            panic!()
        };
        let joined = fields.join("\n");
        assert!(joined.contains("t12[0]"));
        assert!(joined.contains("sweep_points"));
        assert!(joined.contains("noise_sigma"));
        assert!(matches!(
            parse_manifest("[e]\nsweep = \"t3\"\n"),
            Err(IoError::ConfigParse(_))
        ));
        assert!(matches!(parse_manifest("not toml ["), Err(IoError::ConfigParse(_))));
        assert!(matches!(parse_manifest(""), Err(IoError::ConfigParse(_))));
    }

    #[test]
    fn sweep_ranges_and_units() {
        let m = parse_manifest(
            "[w]\nt1 = [0.05]\nt2 = [\"20ms\"]\nsweep = \"omega1\"\nsweep_min = 1\nsweep_max = 10\nsweep_points = 10\nsweep_scale = \"log\"\nmethod = \"rk4\"\nmax_step = \"1ms\"\n",
        )
        .unwrap()
        .remove(0);
        let g = m.sweep.unwrap().grid();
        assert!((g[0] - hz_to_rad(1.0)).abs() < 1e-12 && (g[9] - hz_to_rad(10.0)).abs() < 1e-12);
        assert_eq!(m.labels, ["t1_50.0ms_t2_20.0ms"]);
        assert_eq!(m.integrator.method, Method::Rk4);
        assert_eq!(m.integrator.max_step, 1e-3);
        assert_eq!(m.file_name(0, "_numeric"), "w_numeric.csv");

        let bad = parse_manifest("[w]\nt12 = [0.05]\nsweep = \"omega1\"\nsweep_min = \"1ms\"\nsweep_max = 10\n");
        assert!(matches!(bad, Err(IoError::ValidationFailed { .. })));
        let bad = parse_manifest("[w]\nrabi_hz = [5]\nsweep = \"t12\"\nsweep_min = \"9ms\"\nsweep_max = \"8ms\"\n");
        assert!(matches!(bad, Err(IoError::ValidationFailed { .. })));
    }

    #[test]
    fn several_experiments_per_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        std::fs::write(
            &path,
            "[b]\nt12 = [0.02]\n\n[a]\nt12 = [0.03, 0.04]\nrabi_hz = [1, 2]\n",
        )
        .unwrap();
        let all = load_manifest(&path).unwrap();
        assert_eq!(all.iter().map(|m| m.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(all[0].params.len(), 4);
        assert!(matches!(
            load_manifest(&dir.path().join("none.toml")),
            Err(IoError::IoFailure { .. })
        ));
        std::fs::write(&path, "[a]\nt12 = [0.02]\n[a]\nt12 = [0.03]\n").unwrap();
        assert!(matches!(load_manifest(&path), Err(IoError::ConfigParse(_))));
    }
}
