//! Config-driven runs and parameter sweeps with CSV and VTK output.

mod sweep;

pub use sweep::{
    expand_axis, run_sweep, Axis, ParamKey, ParamValue, SweepPoint, SweepResult, SweepSection,
    DEFAULT_SWEEP_CAP,
};

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::elastic::{deform_linear_elastic, LinearElasticConfig};
use crate::error::{Error, Result};
use crate::io::{export_vtk, write_element_metrics, CellField};
use crate::mesh::QuadMesh;
use crate::problem::{
    build_problem, motion_for_problem, MotionSpec, PrescribedMotion, ProblemSpec, TestCase,
};
use crate::quality::{quality_report, QualityReport};
use crate::spring::{deform_spring, SpringConfig};
use crate::stiffening::{identify_layers, LayerAssignment};
use crate::yeoh::{deform_hyperelastic, YeohConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Spring,
    LinearElastic,
    Yeoh,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Spring, Model::LinearElastic, Model::Yeoh];

    pub fn name(self) -> &'static str {
        match self {
            Model::Spring => "spring",
            Model::LinearElastic => "linear_elastic",
            Model::Yeoh => "yeoh",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `[problem]`: a named case plus optional geometry overrides.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub case: Option<TestCase>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub channel_width: Option<f64>,
    pub channel_height: Option<f64>,
    pub structure_length: Option<f64>,
    pub structure_thickness: Option<f64>,
    pub structure_x: Option<f64>,
    pub structure_y: Option<f64>,
    pub hole_width: Option<f64>,
    pub hole_height: Option<f64>,
    /// Uniform refinement of the cell counts.
    pub refine: Option<usize>,
}

impl ProblemSection {
    pub fn case(&self) -> TestCase {
        self.case.unwrap_or(TestCase::Beam)
    }

    pub fn spec(&self) -> ProblemSpec {
        let mut s = self.case().problem();
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        if let Some(n) = self.nx {
            s.nx = n;
        }
        if let Some(n) = self.ny {
            s.ny = n;
        }
        set(&mut s.channel_width, self.channel_width);
        set(&mut s.channel_height, self.channel_height);
        set(&mut s.structure_length, self.structure_length);
        set(&mut s.structure_thickness, self.structure_thickness);
        set(&mut s.structure_x, self.structure_x);
        set(&mut s.structure_y, self.structure_y);
        set(&mut s.hole_width, self.hole_width);
        set(&mut s.hole_height, self.hole_height);
        match self.refine {
            Some(f) => s.refined(f),
            None => s,
        }
    }
}

/// `[stiffening]`: factors shared by every model, overriding each model's own
/// `layer_factors` when present.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StiffeningSection {
    pub factors: Option<Vec<f64>>,
    /// Rings numbered in the `layer_index` output; defaults to the number of factors.
    pub report_layers: Option<usize>,
}

/// A whole config file. Each model section that is present selects that model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemSection,
    pub motion: Option<MotionSpec>,
    pub spring: Option<SpringConfig>,
    pub linear_elastic: Option<LinearElasticConfig>,
    pub yeoh: Option<YeohConfig>,
    pub stiffening: StiffeningSection,
    pub sweep: Option<SweepSection>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Reads a config; relative motion file paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::Parse {
                path: path.to_path_buf(),
                msg,
            },
            e => e,
        })?;
        if let Some(MotionSpec::FromFile { path: p }) = &mut cfg.motion {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Models with a section in the file, in a fixed order.
    pub fn models(&self) -> Vec<Model> {
        let mut m = Vec::new();
        if self.spring.is_some() {
            m.push(Model::Spring);
        }
        if self.linear_elastic.is_some() {
            m.push(Model::LinearElastic);
        }
        if self.yeoh.is_some() {
            m.push(Model::Yeoh);
        }
        m
    }

    /// Model settings with the shared stiffening applied.
    pub fn model_settings(&self) -> ModelSettings {
        let mut s = ModelSettings {
            spring: self.spring.clone().unwrap_or_default(),
            linear_elastic: self.linear_elastic.clone().unwrap_or_default(),
            yeoh: self.yeoh.clone().unwrap_or_default(),
        };
        if let Some(f) = &self.stiffening.factors {
            s.set_layer_factors(f.clone());
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let settings = self.model_settings();
        settings.spring.validate()?;
        settings.linear_elastic.validate()?;
        settings.yeoh.validate()?;
        self.problem.spec().validate()?;
        if let Some(sw) = &self.sweep {
            sw.validate()?;
        }
        Ok(())
    }

    /// Builds the mesh and motion described by `[problem]` and `[motion]`.
    pub fn prepare(&self) -> Result<Prepared> {
        let case = self.problem.case();
        let spec = self.problem.spec();
        spec.validate()?;
        let mesh = build_problem(&spec)?;
        let motion_spec = self.motion.clone().unwrap_or_else(|| case.motion());
        let motion = motion_for_problem(&spec, &mesh, &motion_spec)?;
        let n_layers = self
            .stiffening
            .report_layers
            .or(self.stiffening.factors.as_ref().map(Vec::len))
            .unwrap_or(0);
        let layers = if n_layers == 0 {
            LayerAssignment::unlayered(mesh.n_elements())
        } else {
            identify_layers(&mesh, mesh.interface(), n_layers)?
        };
        Ok(Prepared {
            label: case.name().to_string(),
            mesh,
            motion,
            layers,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelSettings {
    pub spring: SpringConfig,
    pub linear_elastic: LinearElasticConfig,
    pub yeoh: YeohConfig,
}

impl ModelSettings {
    pub fn set_layer_factors(&mut self, factors: Vec<f64>) {
        self.spring.layer_factors = factors.clone();
        self.linear_elastic.layer_factors = factors.clone();
        self.yeoh.layer_factors = factors;
    }

    pub fn layer_factors(&self, model: Model) -> &[f64] {
        match model {
            Model::Spring => &self.spring.layer_factors,
            Model::LinearElastic => &self.linear_elastic.layer_factors,
            Model::Yeoh => &self.yeoh.layer_factors,
        }
    }

    /// `key=value` pairs describing `model`'s settings, for the run CSV.
    pub fn describe(&self, model: Model) -> String {
        let factors = |f: &[f64]| {
            f.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        match model {
            Model::Spring => {
                let c = &self.spring;
                format!(
                    "n_steps={};strategy={};gsc={};tsc={};trial_fraction={};layer_factors=[{}]",
                    c.n_steps,
                    c.strategy.name(),
                    c.geometric_scale,
                    c.torsional_scale,
                    c.trial_fraction,
                    factors(&c.layer_factors)
                )
            }
            Model::LinearElastic => {
                let c = &self.linear_elastic;
                format!(
                    "modulus={};poisson={};iterations={};layer_factors=[{}]",
                    c.modulus,
                    c.poisson,
                    c.iterations,
                    factors(&c.layer_factors)
                )
            }
            Model::Yeoh => {
                let c = &self.yeoh;
                format!(
                    "a10={};a20={};a30={};kappa={};increments={};layer_factors=[{}]",
                    c.a10,
                    c.a20,
                    c.a30,
                    c.kappa,
                    c.increments,
                    factors(&c.layer_factors)
                )
            }
        }
    }
}

/// Reference mesh, interface motion and reporting layers of one problem.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub label: String,
    pub mesh: QuadMesh,
    pub motion: PrescribedMotion,
    pub layers: LayerAssignment,
}

impl Prepared {
    pub fn from_case(case: TestCase) -> Result<Self> {
        let (mesh, motion) = case.build()?;
        let layers = LayerAssignment::unlayered(mesh.n_elements());
        Ok(Prepared {
            label: case.name().to_string(),
            mesh,
            motion,
            layers,
        })
    }
}

/// Deforms the prepared mesh with `model`.
pub fn deform(prepared: &Prepared, model: Model, settings: &ModelSettings) -> Result<QuadMesh> {
    let (mesh, motion) = (&prepared.mesh, &prepared.motion);
    match model {
        Model::Spring => deform_spring(mesh, motion, &settings.spring),
        Model::LinearElastic => deform_linear_elastic(mesh, motion, &settings.linear_elastic),
        Model::Yeoh => deform_hyperelastic(mesh, motion, &settings.yeoh).map(|(m, _)| m),
    }
}

/// Outcome of one model evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub model: Model,
    pub outcome: std::result::Result<(QuadMesh, QualityReport), String>,
    pub wall_time_s: f64,
}

impl Evaluation {
    pub fn report(&self) -> Option<&QualityReport> {
        self.outcome.as_ref().ok().map(|(_, r)| r)
    }

    pub fn min_skewness(&self) -> Option<f64> {
        self.report().map(|r| r.min_skewness)
    }

    pub fn status(&self) -> String {
        match &self.outcome {
            Ok(_) => "ok".to_string(),
            Err(msg) => format!("error: {msg}"),
        }
    }
}

/// Deforms and measures; solver failures are captured, not returned.
pub fn evaluate(prepared: &Prepared, model: Model, settings: &ModelSettings) -> Evaluation {
    let start = Instant::now();
    let outcome = deform(prepared, model, settings)
        .and_then(|m| {
            let r = quality_report(&m, &prepared.mesh, None)?;
            Ok((m, r))
        })
        .map_err(|e| e.to_string());
    Evaluation {
        model,
        outcome,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

pub const METRIC_COLUMNS: [&str; 6] = [
    "status",
    "min_skewness",
    "min_area_ratio",
    "max_area_ratio",
    "inverted_count",
    "wall_time_s",
];

pub(crate) fn metric_fields(e: &Evaluation) -> Vec<String> {
    let mut v = vec![e.status()];
    match e.report() {
        Some(r) => v.extend([
            r.min_skewness.to_string(),
            r.min_area_ratio.to_string(),
            r.max_area_ratio.to_string(),
            r.inverted_count().to_string(),
        ]),
        None => v.extend(std::iter::repeat_n(String::new(), 4)),
    }
    v.push(format!("{:.6}", e.wall_time_s));
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Vtk,
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    pub fn vtk(self) -> bool {
        matches!(self, OutputFormat::Vtk | OutputFormat::Both)
    }
}

/// Per-element skewness, area ratio and layer index of a deformed mesh.
pub fn element_fields(report: &QualityReport, layers: &LayerAssignment) -> Vec<CellField> {
    vec![
        CellField::new("skewness", report.per_element_skewness.clone()),
        CellField::new("area_ratio", report.per_element_area_ratio.clone()),
        CellField::new(
            "layer_index",
            layers.layer_of_element.iter().map(|&l| l as f64).collect(),
        ),
    ]
}

/// Result of [`run_case`].
#[derive(Clone, Debug)]
pub struct CaseResult {
    pub problem: String,
    pub motion: String,
    pub rows: Vec<(Evaluation, String)>,
}

impl CaseResult {
    /// `problem,motion,model,parameters,status,...,wall_time_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["problem", "motion", "model", "parameters"];
        header.extend(METRIC_COLUMNS);
        w.write_record(&header)?;
        for (e, params) in &self.rows {
            let mut rec = vec![
                self.problem.clone(),
                self.motion.clone(),
                e.model.name().to_string(),
                params.clone(),
            ];
            rec.extend(metric_fields(e));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn evaluation(&self, model: Model) -> Option<&Evaluation> {
        self.rows.iter().map(|(e, _)| e).find(|e| e.model == model)
    }
}

/// Runs every model selected by `config` on its problem. Only configuration
/// problems are errors; solver failures become rows with an error status.
pub fn run_case(config: &Config) -> Result<CaseResult> {
    config.validate()?;
    let models = config.models();
    if models.is_empty() {
        return Err(Error::InvalidConfig(
            "no model section ([spring], [linear_elastic] or [yeoh]) in config".into(),
        ));
    }
    let prepared = config.prepare()?;
    let settings = config.model_settings();
    let rows = models
        .iter()
        .map(|&m| (evaluate(&prepared, m, &settings), settings.describe(m)))
        .collect();
    Ok(CaseResult {
        problem: prepared.label.clone(),
        motion: prepared.motion.mode.name().to_string(),
        rows,
    })
}

/// Writes `metrics.csv` and, per `format`, per-element CSVs and VTK meshes for
/// each successful model. Returns the files written.
pub fn write_case_outputs(
    config: &Config,
    result: &CaseResult,
    out_dir: &Path,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let prepared = config.prepare()?;
    let mut written = Vec::new();
    let path = out_dir.join("metrics.csv");
    result.write_csv(fs::File::create(&path)?)?;
    written.push(path);
    for (e, _) in &result.rows {
        let Ok((mesh, report)) = &e.outcome else {
            continue;
        };
        let stem = format!("{}_{}", result.problem, e.model.name());
        if format.csv() {
            let path = out_dir.join(format!("{stem}_elements.csv"));
            write_element_metrics(
                fs::File::create(&path)?,
                report,
                Some(&prepared.layers.layer_of_element),
            )?;
            written.push(path);
        }
        if format.vtk() {
            let path = out_dir.join(format!("{stem}.vtk"));
            export_vtk(&path, mesh, &element_fields(report, &prepared.layers))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Removes the trailing `wall_time_s` field from every data row, for comparing
/// reruns.
pub fn strip_wall_time(csv_text: &str) -> String {
    csv_text
        .lines()
        .map(|l| {
            if l.starts_with('#') {
                return l.to_string();
            }
            match l.rfind(',') {
                Some(i) => l[..i].to_string(),
                None => l.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(case: &str, models: &str) -> Config {
        Config::from_toml(&format!(
            "[problem]\ncase = \"{case}\"\nnx = 30\nny = 10\n{models}"
        ))
        .unwrap()
    }

    #[test]
    fn zero_motion_case_is_perfect() {
        let mut cfg = small(
            "foil_translation",
            "[spring]\nn_steps = 2\n[linear_elastic]\n[yeoh]\n",
        );
        cfg.motion = Some(MotionSpec::Translation { dx: 0.0, dy: 0.0 });
        let r = run_case(&cfg).unwrap();
        assert_eq!(r.rows.len(), 3);
        for (e, _) in &r.rows {
            let rep = e.report().unwrap();
            assert_eq!(rep.min_skewness, 1.0);
            assert_eq!(rep.min_area_ratio, 1.0);
            assert_eq!(rep.max_area_ratio, 1.0);
        }
    }

    #[test]
    fn rerun_is_identical_apart_from_timing() {
        let cfg = small("beam", "[spring]\nn_steps = 3\n[linear_elastic]\n");
        let csv = |c: &Config| {
            let mut buf = Vec::new();
            run_case(c).unwrap().write_csv(&mut buf).unwrap();
            strip_wall_time(&String::from_utf8(buf).unwrap())
        };
        assert_eq!(csv(&cfg), csv(&cfg));
    }

    #[test]
    fn config_errors_are_errors() {
        assert!(Config::from_toml("[spring]\nbogus = 1\n").is_err());
        let cfg = Config::from_toml("[problem]\ncase = \"beam\"\n").unwrap();
        assert!(matches!(run_case(&cfg), Err(Error::InvalidConfig(_))));
        let cfg = Config::from_toml("[spring]\nn_steps = 0\n").unwrap();
        assert!(run_case(&cfg).is_err());
    }

    #[test]
    fn solver_failure_becomes_a_row() {
        let mut cfg = small(
            "foil_translation",
            "[yeoh]\nmax_iters = 1\nincrements = 1\n",
        );
        cfg.motion = Some(MotionSpec::Translation { dx: 0.0, dy: -0.3 });
        let r = run_case(&cfg).unwrap();
        assert!(r.rows[0].0.status().starts_with("error"));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("error"));
    }

    #[test]
    fn shared_stiffening_overrides_model_factors() {
        let cfg = Config::from_toml(
            "[spring]\nlayer_factors = [3.0]\n[yeoh]\n[stiffening]\nfactors = [2.2, 1.3]\n",
        )
        .unwrap();
        let s = cfg.model_settings();
        for m in Model::ALL {
            assert_eq!(s.layer_factors(m), &[2.2, 1.3]);
        }
        assert_eq!(cfg.prepare().unwrap().layers.max_layer(), 2);
    }

    #[test]
    fn outputs_follow_format() {
        let cfg = small("foil_rotation", "[linear_elastic]\n");
        let r = run_case(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_case_outputs(&cfg, &r, dir.path(), OutputFormat::Both).unwrap();
        let names: Vec<_> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        assert_eq!(
            names,
            [
                "metrics.csv",
                "foil_rotation_linear_elastic_elements.csv",
                "foil_rotation_linear_elastic.vtk"
            ]
        );
        let (mesh, fields) = crate::io::read_vtk(&files[2]).unwrap();
        assert_eq!(mesh.n_elements(), cfg.prepare().unwrap().mesh.n_elements());
        assert_eq!(fields.len(), 3);
    }
}
