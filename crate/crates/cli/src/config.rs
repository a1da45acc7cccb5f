//! Run configuration: strict JSON, unknown keys rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use semitoric::critical::ScanOptions;
use semitoric::nodal::NodalOptions;
use semitoric::systems::{system_by_name, MomentMapSystem, ScanRegion};

use crate::Failure;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: String,
    /// Charts to scan; defaults to the system's scan charts.
    #[serde(default)]
    pub charts: Option<Vec<String>>,
    /// Per-axis `[min, max]` in chart coordinates `(x_1..x_n, xi_1..xi_n)`.
    #[serde(default)]
    pub region: Option<Vec<[f64; 2]>>,
    /// Per-axis grid step.
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub nodal: NodalOptions,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub rank: f64,
    pub residual: f64,
    pub dedup_radius: f64,
    pub classify: f64,
    pub max_iterations: usize,
    /// Distance at which two strata count as adjacent.
    pub closure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = ScanOptions::default();
        Tolerances {
            rank: s.rank_tol,
            residual: s.residual_tol,
            dedup_radius: s.dedup_radius,
            classify: s.classify_tol,
            max_iterations: s.max_iterations,
            closure: 0.25,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub dir: Option<String>,
    pub csv: String,
    pub strata: String,
    pub nodal: String,
    pub svg: String,
    pub report: String,
    /// Value-space axis plotted against `f_1`; the last one by default.
    pub svg_axis: Option<usize>,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            dir: None,
            csv: "points.csv".into(),
            strata: "strata.json".into(),
            nodal: "nodal.json".into(),
            svg: "nodal.svg".into(),
            report: "report.json".into(),
            svg_axis: None,
        }
    }
}

impl RunConfig {
    pub fn for_system(name: &str) -> Self {
        RunConfig {
            system: name.to_string(),
            charts: None,
            region: None,
            grid: None,
            tolerances: Tolerances::default(),
            seed: 0,
            outputs: Outputs::default(),
            nodal: NodalOptions::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    pub fn system(&self) -> Result<MomentMapSystem, Failure> {
        system_by_name(&self.system).map_err(|e| Failure::Config(e.to_string()))
    }

    pub fn scan_options(&self) -> ScanOptions {
        let t = &self.tolerances;
        ScanOptions {
            rank_tol: t.rank,
            residual_tol: t.residual,
            dedup_radius: t.dedup_radius,
            classify_tol: t.classify,
            max_iterations: t.max_iterations,
            seed: self.seed,
        }
    }

    /// Scan region with defaults filled in from the system, validated.
    pub fn region(&self, sys: &MomentMapSystem) -> Result<ScanRegion, Failure> {
        let d = 2 * sys.n();
        let mut region = sys.default_region();
        if let Some(c) = &self.charts {
            region.charts = c.clone();
        }
        if let Some(r) = &self.region {
            if r.len() != d {
                return Err(Failure::Config(format!("region has {} axes, {} needs {d}", r.len(), sys.name())));
            }
            region.min = r.iter().map(|b| b[0]).collect();
            region.max = r.iter().map(|b| b[1]).collect();
        }
        if let Some(g) = &self.grid {
            if g.len() != d {
                return Err(Failure::Config(format!("grid has {} steps, {} needs {d}", g.len(), sys.name())));
            }
            region.step = g.clone();
        }
        if region.step.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Failure::Config("grid steps must be positive".into()));
        }
        if region.min.iter().zip(&region.max).any(|(a, b)| !(a <= b)) {
            return Err(Failure::Config("region axes need min <= max".into()));
        }
        let known = sys.chart_ids();
        if let Some(c) = region.charts.iter().find(|c| !known.contains(c)) {
            return Err(Failure::Config(format!("{} has no chart {c:?}; charts are {known:?}", sys.name())));
        }
        let t = &self.tolerances;
        if [t.rank, t.residual, t.dedup_radius, t.classify, t.closure].iter().any(|v| !(*v > 0.0)) {
            return Err(Failure::Config("tolerances must be positive".into()));
        }
        let n = &self.nodal;
        if !(n.step > 0.0) || n.qmax < 1 || !(n.isolation_radius > 0.0) {
            return Err(Failure::Config("nodal step, qmax and isolation radius must be positive".into()));
        }
        if self.outputs.svg_axis.is_some_and(|a| a >= sys.n()) {
            return Err(Failure::Config("svg_axis is not a value-space axis".into()));
        }
        Ok(region)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"system": "spin-oscillator", "tolerance": {}}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let bad = r#"{"system": "spin-oscillator", "tolerances": {"rnak": 1e-7}}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
        let ok = r#"{"system": "spin-oscillator", "tolerances": {"rank": 1e-6}, "seed": 3}"#;
        let c: RunConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(c.tolerances.rank, 1e-6);
        assert_eq!(c.tolerances.residual, ScanOptions::default().residual_tol);
    }

    #[test]
    fn region_validation() {
        let mut c = RunConfig::for_system("toric-oscillator:2");
        let sys = c.system().unwrap();
        assert_eq!(c.region(&sys).unwrap().charts, vec!["R".to_string()]);
        c.grid = Some(vec![0.2, 0.0, 0.2, 0.2]);
        assert!(c.region(&sys).is_err());
        c.grid = Some(vec![0.2; 3]);
        assert!(c.region(&sys).is_err());
        c.grid = None;
        c.region = Some(vec![[1.0, -1.0]; 4]);
        assert!(c.region(&sys).is_err());
        c.region = None;
        c.charts = Some(vec!["Q".into()]);
        assert!(c.region(&sys).is_err());
        assert!(RunConfig::for_system("nope").system().is_err());
    }
}
