//! TOML run configuration: one optional table per command plus shared
//! settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qmeter_core::measurement::CoarseGraining;
use qmeter_core::metrics::ObservableBasis;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub single: Option<SingleSection>,
    pub sequence: Option<SequenceSection>,
    pub rotation: Option<RotationSection>,
    pub thermal: Option<ThermalSection>,
    pub scaling: Option<ScalingSection>,
    pub compare: Option<CompareSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Slack on every link of the information hierarchy.
    pub hierarchy_slack: f64,
    /// Threshold all figures of merit must reach for N*.
    pub threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hierarchy_slack: qmeter_core::metrics::HIERARCHY_SLACK,
            threshold: 0.999,
        }
    }
}

/// A real grid: a single value, an explicit list or an inclusive range.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Value(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Grid::Value(x) => vec![*x],
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) || *step <= 0.0 {
                    return Err(CliError::config(format!(
                        "{name}: range needs finite bounds and a positive step"
                    )));
                }
                if stop < start {
                    return Err(CliError::config(format!("{name}: stop < start")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        };
        if v.is_empty() {
            return Err(CliError::config(format!("{name}: empty grid")));
        }
        if let Some(x) = v.iter().find(|x| !x.is_finite()) {
            return Err(CliError::config(format!("{name}: non-finite value {x}")));
        }
        Ok(v)
    }
}

/// An integer grid, used for sequence lengths.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntGrid {
    Value(u64),
    List(Vec<u64>),
    Range { start: u64, stop: u64, step: u64 },
}

impl IntGrid {
    pub fn values(&self, name: &str) -> Result<Vec<u64>, CliError> {
        let v = match self {
            IntGrid::Value(x) => vec![*x],
            IntGrid::List(v) => v.clone(),
            IntGrid::Range { start, stop, step } => {
                if *step == 0 || stop < start {
                    return Err(CliError::config(format!("{name}: invalid range")));
                }
                (*start..=*stop).step_by(*step as usize).collect()
            }
        };
        if v.is_empty() {
            return Err(CliError::config(format!("{name}: empty grid")));
        }
        if v.contains(&0) {
            return Err(CliError::config(format!("{name}: sequence lengths start at 1")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoarseSpec {
    Named(String),
    Cuts { cuts: Vec<usize> },
    Modulo { modulo: usize },
    Bins {
        bins: BTreeMap<String, Vec<usize>>,
        rest: Option<String>,
    },
}

impl Default for CoarseSpec {
    fn default() -> Self {
        CoarseSpec::Named("none".into())
    }
}

impl CoarseSpec {
    pub fn resolve(&self) -> Result<CoarseGraining, CliError> {
        let cg = match self {
            CoarseSpec::Named(s) => match s.as_str() {
                "none" => CoarseGraining::Singletons,
                "photodiode" => CoarseGraining::Photodiode,
                other => {
                    return Err(CliError::config(format!(
                        "coarse_graining: unknown value {other:?}"
                    )))
                }
            },
            CoarseSpec::Cuts { cuts } => CoarseGraining::Intervals(cuts.clone()),
            CoarseSpec::Modulo { modulo } => CoarseGraining::Modulo(*modulo),
            CoarseSpec::Bins { bins, rest } => CoarseGraining::Explicit {
                bins: bins.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
                rest: rest.clone(),
            },
        };
        cg.validate()
            .map_err(|e| CliError::config(format!("coarse_graining: {e}")))?;
        Ok(cg)
    }
}

/// How ᾱ is chosen for each ε: a grid of its own, or a multiple of ε.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pairing {
    pub alpha_bar: Option<Grid>,
    pub alpha_ratio: Option<Grid>,
}

/// One (ᾱ, ε) cell together with the grid row it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub row: usize,
    pub alpha_bar: f64,
    pub epsilon: f64,
}

fn pairs(
    alpha_bar: &Option<Grid>,
    alpha_ratio: &Option<Grid>,
    epsilon: &[f64],
) -> Result<(Vec<f64>, bool, Vec<Cell>), CliError> {
    let (outer, ratio) = match (alpha_bar, alpha_ratio) {
        (Some(g), None) => (g.values("alpha_bar")?, false),
        (None, Some(g)) => (g.values("alpha_ratio")?, true),
        (None, None) => (vec![1.0], true),
        (Some(_), Some(_)) => {
            return Err(CliError::config(
                "set either alpha_bar or alpha_ratio, not both",
            ))
        }
    };
    let mut cells = Vec::with_capacity(outer.len() * epsilon.len());
    for (row, &a) in outer.iter().enumerate() {
        for &e in epsilon {
            cells.push(Cell {
                row,
                alpha_bar: if ratio { a * e } else { a },
                epsilon: e,
            });
        }
    }
    Ok((outer, ratio, cells))
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[default]
    SigmaZ,
    SigmaX,
}

impl From<Basis> for ObservableBasis {
    fn from(b: Basis) -> Self {
        match b {
            Basis::SigmaZ => ObservableBasis::SigmaZ,
            Basis::SigmaX => ObservableBasis::SigmaX,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PlotStyle {
    #[default]
    Lines,
    Heatmap,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSection {
    pub epsilon: Grid,
    pub alpha_bar: Option<Grid>,
    pub alpha_ratio: Option<Grid>,
    #[serde(default)]
    pub coarse_graining: CoarseSpec,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub omega_a: f64,
    #[serde(default)]
    pub phi: f64,
    /// βω_a of a thermal pointer; vacuum when absent.
    pub beta_omega: Option<f64>,
    #[serde(default)]
    pub basis: Basis,
    /// CSV column drawn in the SVG.
    pub plot: Option<String>,
    #[serde(default)]
    pub plot_style: PlotStyle,
}

impl SingleSection {
    pub fn cells(&self) -> Result<(Vec<f64>, bool, Vec<Cell>), CliError> {
        pairs(&self.alpha_bar, &self.alpha_ratio, &self.epsilon.values("epsilon")?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSection {
    pub epsilon: Grid,
    pub alpha_bar: Option<Grid>,
    pub alpha_ratio: Option<Grid>,
    pub n_steps: IntGrid,
    #[serde(default = "one")]
    pub beta: f64,
    /// Adds Monte Carlo estimates with this many trajectories per cell.
    pub monte_carlo_samples: Option<usize>,
    pub plot: Option<String>,
}

impl SequenceSection {
    pub fn cells(&self) -> Result<(Vec<f64>, bool, Vec<Cell>), CliError> {
        pairs(&self.alpha_bar, &self.alpha_ratio, &self.epsilon.values("epsilon")?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationSection {
    #[serde(default)]
    pub alpha_bar: f64,
    pub epsilon: f64,
    pub theta: Grid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalSection {
    pub epsilon: Grid,
    pub alpha_bar: Option<Grid>,
    pub alpha_ratio: Option<Grid>,
    pub beta_omega: Option<Grid>,
    #[serde(default)]
    pub coarse_graining: CoarseSpec,
    #[serde(default = "one")]
    pub beta: f64,
}

impl ThermalSection {
    pub fn cells(&self) -> Result<(Vec<f64>, bool, Vec<Cell>), CliError> {
        pairs(&self.alpha_bar, &self.alpha_ratio, &self.epsilon.values("epsilon")?)
    }

    pub fn beta_omegas(&self) -> Result<Vec<f64>, CliError> {
        let v = match &self.beta_omega {
            Some(g) => g.values("beta_omega")?,
            None => vec![3.0],
        };
        if v.iter().any(|&b| b <= 0.0) {
            return Err(CliError::config("beta_omega must be positive"));
        }
        Ok(v)
    }
}

fn two() -> u32 {
    2
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub epsilon: Grid,
    pub alpha_bar: Option<f64>,
    pub alpha_ratio: Option<f64>,
    #[serde(default = "one")]
    pub beta: f64,
    /// Weak-limit per-step entropy; H(Poisson(ᾱ²)) at the smallest ε when
    /// absent.
    pub h0: Option<f64>,
    #[serde(default = "two")]
    pub k_outcomes: u32,
    #[serde(default = "one_u32")]
    pub l_exponent: u32,
    #[serde(default = "one")]
    pub sigma0: f64,
}

impl ScalingSection {
    pub fn cells(&self) -> Result<Vec<Cell>, CliError> {
        let eps = self.epsilon.values("epsilon")?;
        Ok(pairs(
            &self.alpha_bar.map(Grid::Value),
            &self.alpha_ratio.map(Grid::Value),
            &eps,
        )?
        .2)
    }
}

fn strong_default() -> f64 {
    1.5
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub epsilon_weak: Grid,
    pub alpha_bar: Option<f64>,
    pub alpha_ratio: Option<f64>,
    #[serde(default = "strong_default")]
    pub epsilon_strong: f64,
    /// ᾱ of the strong measurement; equal to ε_strong when absent.
    pub alpha_bar_strong: Option<f64>,
    #[serde(default = "one")]
    pub beta: f64,
}

impl CompareSection {
    pub fn cells(&self) -> Result<Vec<Cell>, CliError> {
        let eps = self.epsilon_weak.values("epsilon_weak")?;
        Ok(pairs(
            &self.alpha_bar.map(Grid::Value),
            &self.alpha_ratio.map(Grid::Value),
            &eps,
        )?
        .2)
    }
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    let t = cfg.tolerances;
    if !(t.hierarchy_slack >= 0.0 && t.threshold > 0.0 && t.threshold < 1.0) {
        return Err(CliError::config("tolerances out of range"));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_includes_stop() {
        let g = Grid::Range {
            start: 0.0,
            stop: 3.0,
            step: 0.05,
        };
        let v = g.values("e").unwrap();
        assert_eq!(v.len(), 61);
        assert!((v[60] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn grids_parse_in_every_form() {
        let cfg = parse(
            r#"
            [single]
            epsilon = { start = 0.0, stop = 1.0, step = 0.5 }
            alpha_bar = [0.0, 2.0]
            coarse_graining = "photodiode"
            "#,
        )
        .unwrap();
        let s = cfg.single.unwrap();
        let (outer, ratio, cells) = s.cells().unwrap();
        assert_eq!(outer, vec![0.0, 2.0]);
        assert!(!ratio);
        assert_eq!(cells.len(), 6);
        assert_eq!(s.coarse_graining.resolve().unwrap(), CoarseGraining::Photodiode);
    }

    #[test]
    fn ratio_pairs_follow_epsilon() {
        let (_, _, cells) = pairs(&None, &Some(Grid::List(vec![2.0])), &[0.1, 0.3]).unwrap();
        assert_eq!(cells[1].alpha_bar, 0.6);
    }

    #[test]
    fn bad_grids_are_config_errors() {
        assert!(Grid::List(vec![]).values("x").is_err());
        assert!(Grid::Range {
            start: 1.0,
            stop: 0.0,
            step: 0.1
        }
        .values("x")
        .is_err());
        assert!(parse("[single]\nepsilon = 1.0\nfoo = 2").is_err());
        assert!(parse("[single]\nepsilon = 1.0\ncoarse_graining = \"odd\"")
            .unwrap()
            .single
            .unwrap()
            .coarse_graining
            .resolve()
            .is_err());
        assert!(IntGrid::List(vec![0, 1]).values("n").is_err());
    }

    #[test]
    fn custom_bins() {
        let cfg = parse(
            r#"
            [thermal]
            epsilon = 0.5
            coarse_graining = { bins = { low = [0, 1] }, rest = "high" }
            "#,
        )
        .unwrap();
        let cg = cfg.thermal.unwrap().coarse_graining.resolve().unwrap();
        assert!(matches!(cg, CoarseGraining::Explicit { .. }));
    }
}
