//! Run configuration: command, inputs, ladder and quadrature settings.
use std::path::{Path, PathBuf};

use meancount_core::counting::LadderSpec;
use meancount_core::QuadratureSpec;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Eval,
    Zeros,
    Jessen,
    Counting,
    MeanCounting,
    Stanton,
    Hs,
    Profile,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Zeros => "zeros",
            Command::Jessen => "jessen",
            Command::Counting => "counting",
            Command::MeanCounting => "mean-counting",
            Command::Stanton => "stanton",
            Command::Hs => "hs",
            Command::Profile => "profile",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Ladder overrides. `None` keeps the default for the input series.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderOverrides {
    pub t0: Option<f64>,
    pub steps: Option<usize>,
    pub growth: Option<f64>,
    pub sigma_ladder: Option<Vec<f64>>,
    pub rel_target: Option<f64>,
    pub bound_tolerance: Option<f64>,
}

impl LadderOverrides {
    pub fn apply(&self, mut l: LadderSpec) -> LadderSpec {
        if let Some(v) = self.t0 {
            l.t0 = v;
        }
        if let Some(v) = self.steps {
            l.steps = v;
        }
        if let Some(v) = self.growth {
            l.growth = v;
        }
        if let Some(v) = &self.sigma_ladder {
            l.sigma_ladder = v.clone();
        }
        if let Some(v) = self.rel_target {
            l.rel_target = v;
        }
        if let Some(v) = self.bound_tolerance {
            l.bound_tolerance = v;
        }
        l
    }

    /// Later settings win.
    fn merge(&mut self, other: &LadderOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(t0, steps, growth, sigma_ladder, rel_target, bound_tolerance);
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub cubature_rel_tol: Option<f64>,
    pub max_cells: Option<usize>,
    pub max_depth: Option<u32>,
    pub torus_nodes: Option<usize>,
    pub max_torus_points: Option<usize>,
    pub torus_tol: Option<f64>,
    pub torus_accept: Option<f64>,
    pub validation_points: Option<usize>,
    pub validation_min_per_dim: Option<usize>,
    pub validation_tol: Option<f64>,
    pub boundary_tol: Option<f64>,
    pub singular_radius: Option<f64>,
    pub seed: Option<u64>,
}

impl QuadratureOverrides {
    pub fn apply(&self, mut q: QuadratureSpec) -> QuadratureSpec {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { q.$f = v; } )* };
        }
        set!(
            abs_tol,
            rel_tol,
            cubature_rel_tol,
            max_cells,
            max_depth,
            torus_nodes,
            max_torus_points,
            torus_tol,
            torus_accept,
            validation_points,
            validation_min_per_dim,
            validation_tol,
            boundary_tol,
            singular_radius,
            seed
        );
        q
    }
}

/// Contents of a `--config` file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub ladder: LadderOverrides,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Everything a command needs. The ladder is completed per input series by
/// [`RunConfig::ladder_for`], since its default height depends on the series.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub input_paths: Vec<PathBuf>,
    pub ladder: LadderOverrides,
    pub quadrature: QuadratureSpec,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(
        command: Command,
        file: Option<ConfigFile>,
        flags: LadderOverrides,
        tol: Option<f64>,
        seed: Option<u64>,
    ) -> Result<Self, CliError> {
        let file = file.unwrap_or_default();
        let mut ladder = file.ladder.clone();
        ladder.merge(&flags);
        let mut quadrature = file.quadrature.apply(QuadratureSpec::default());
        if let Some(t) = tol {
            quadrature.abs_tol = t;
            quadrature.rel_tol = t;
        }
        if let Some(s) = seed {
            quadrature.seed = s;
        }
        quadrature
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        // Validate the ladder fields against a neutral base so errors surface before dispatch.
        ladder
            .apply(LadderSpec::default())
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Self {
            command,
            input_paths: Vec::new(),
            ladder,
            quadrature,
            output_path: None,
            format: Format::Csv,
        })
    }

    pub fn ladder_for(&self, f: &meancount_core::DirichletPolynomial) -> LadderSpec {
        self.ladder.apply(LadderSpec::for_series(f))
    }
}

/// Settings echoed into every output.
pub fn metadata(cfg: &RunConfig, ladder: Option<&LadderSpec>) -> Map<String, Value> {
    let q = &cfg.quadrature;
    let mut m = Map::new();
    m.insert("command".into(), json!(cfg.command.name()));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert(
        "inputs".into(),
        json!(cfg
            .input_paths
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>()),
    );
    if let Some(l) = ladder {
        m.insert(
            "ladder".into(),
            json!({
                "t0": l.t0, "steps": l.steps, "growth": l.growth, "sigma_ladder": l.sigma_ladder,
                "rel_target": l.rel_target, "bound_tolerance": l.bound_tolerance,
            }),
        );
    }
    m.insert(
        "quadrature".into(),
        json!({
            "abs_tol": q.abs_tol, "rel_tol": q.rel_tol, "cubature_rel_tol": q.cubature_rel_tol,
            "max_cells": q.max_cells, "max_depth": q.max_depth, "torus_nodes": q.torus_nodes,
            "max_torus_points": q.max_torus_points, "torus_tol": q.torus_tol, "torus_accept": q.torus_accept,
            "validation_points": q.validation_points, "validation_min_per_dim": q.validation_min_per_dim,
            "validation_tol": q.validation_tol, "boundary_tol": q.boundary_tol,
            "singular_radius": q.singular_radius, "seed": q.seed,
        }),
    );
    m
}
