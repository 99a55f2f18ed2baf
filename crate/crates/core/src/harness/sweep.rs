use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    evaluate, metric_fields, Config, Evaluation, Model, ModelSettings, Prepared, METRIC_COLUMNS,
};
use crate::error::{Error, Result};
use crate::spring::DiagonalStrategy;

pub const DEFAULT_SWEEP_CAP: usize = 10_000;

/// Swept parameter. Layer factors are addressed as `layer1`, `layer2`, ...
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamKey {
    Layer(usize),
    NSteps,
    Strategy,
    Gsc,
    Tsc,
    TrialFraction,
    Modulus,
    Poisson,
    Iterations,
    A10,
    A20,
    A30,
    Kappa,
    Increments,
}

impl ParamKey {
    fn applies_to(self, model: Model) -> bool {
        use ParamKey::*;
        match self {
            Layer(_) => true,
            NSteps | Strategy | Gsc | Tsc | TrialFraction => model == Model::Spring,
            Modulus | Poisson | Iterations => model == Model::LinearElastic,
            A10 | A20 | A30 | Kappa | Increments => model == Model::Yeoh,
        }
    }

    fn is_integer(self) -> bool {
        matches!(
            self,
            ParamKey::NSteps | ParamKey::Iterations | ParamKey::Increments
        )
    }
}

impl FromStr for ParamKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use ParamKey::*;
        Ok(match s {
            "n_steps" => NSteps,
            "strategy" => Strategy,
            "gsc" => Gsc,
            "tsc" => Tsc,
            "trial_fraction" => TrialFraction,
            "modulus" => Modulus,
            "poisson" => Poisson,
            "iterations" => Iterations,
            "a10" => A10,
            "a20" => A20,
            "a30" => A30,
            "kappa" => Kappa,
            "increments" => Increments,
            _ => match s.strip_prefix("layer").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => Layer(k),
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown sweep parameter {s:?}"
                    )))
                }
            },
        })
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParamKey::*;
        let s = match self {
            Layer(k) => return write!(f, "layer{k}"),
            NSteps => "n_steps",
            Strategy => "strategy",
            Gsc => "gsc",
            Tsc => "tsc",
            TrialFraction => "trial_fraction",
            Modulus => "modulus",
            Poisson => "poisson",
            Iterations => "iterations",
            A10 => "a10",
            A20 => "a20",
            A30 => "a30",
            Kappa => "kappa",
            Increments => "increments",
        };
        f.write_str(s)
    }
}

impl Serialize for ParamKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParamKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Strategy(DiagonalStrategy),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(v) => write!(f, "{v}"),
            ParamValue::Strategy(s) => f.write_str(s.name()),
        }
    }
}

/// One swept dimension: explicit `values`, or `from..=to` in steps of `step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: ParamKey,
    #[serde(default)]
    pub values: Option<Vec<ParamValue>>,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
}

impl Axis {
    pub fn range(param: ParamKey, from: f64, to: f64, step: f64) -> Self {
        Axis {
            param,
            values: None,
            from: Some(from),
            to: Some(to),
            step: Some(step),
        }
    }

    pub fn values(param: ParamKey, values: Vec<ParamValue>) -> Self {
        Axis {
            param,
            values: Some(values),
            from: None,
            to: None,
            step: None,
        }
    }
}

/// Grid values of `axis`, validated against the parameter's type.
pub fn expand_axis(axis: &Axis) -> Result<Vec<ParamValue>> {
    let bad = |m: String| Err(Error::InvalidConfig(format!("axis {}: {m}", axis.param)));
    let values = match (&axis.values, axis.from, axis.to, axis.step) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(from), Some(to), Some(step)) => {
            if !(step > 0.0) || !step.is_finite() {
                return bad(format!("step must be positive, got {step}"));
            }
            if !(to >= from) {
                return bad(format!("empty range {from}..{to}"));
            }
            let n = ((to - from) / step + 1e-9).floor() as usize + 1;
            (0..n)
                .map(|i| ParamValue::Number(round12(from + i as f64 * step)))
                .collect()
        }
        _ => return bad("give either values or from, to and step".into()),
    };
    if values.is_empty() {
        return bad("no values".into());
    }
    for v in &values {
        match (axis.param, v) {
            (ParamKey::Strategy, ParamValue::Strategy(_)) => {}
            (ParamKey::Strategy, _) => return bad(format!("{v} is not a strategy")),
            (_, ParamValue::Strategy(_)) => return bad(format!("{v} is not a number")),
            (p, ParamValue::Number(x)) if p.is_integer() && (x.fract() != 0.0 || *x < 1.0) => {
                return bad(format!("{x} is not a positive integer"));
            }
            _ => {}
        }
    }
    Ok(values)
}

/// Drops the last few bits of range arithmetic so `1 + 3 * 0.05` prints as `1.15`.
fn round12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(12 - x.abs().log10().ceil() as i32);
    (x * scale).round() / scale
}

/// `[sweep]`: the model to run and the grid axes, outermost first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub model: Model,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(rename = "axis", default)]
    pub axes: Vec<Axis>,
}

fn default_cap() -> usize {
    DEFAULT_SWEEP_CAP
}

impl SweepSection {
    pub fn new(model: Model, axes: Vec<Axis>) -> Self {
        SweepSection {
            model,
            cap: DEFAULT_SWEEP_CAP,
            axes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, a) in self.axes.iter().enumerate() {
            if !a.param.applies_to(self.model) {
                return Err(Error::InvalidConfig(format!(
                    "{} does not apply to model {}",
                    a.param, self.model
                )));
            }
            if self.axes[..i].iter().any(|b| b.param == a.param) {
                return Err(Error::InvalidConfig(format!("{} swept twice", a.param)));
            }
            expand_axis(a)?;
        }
        Ok(())
    }

    /// All grid points in row-major order (last axis fastest). Fails before
    /// building anything large when the grid exceeds the cap.
    pub fn grid(&self) -> Result<Vec<Vec<ParamValue>>> {
        self.validate()?;
        let axes = self
            .axes
            .iter()
            .map(expand_axis)
            .collect::<Result<Vec<_>>>()?;
        let points = axes
            .iter()
            .try_fold(1usize, |n, a| n.checked_mul(a.len()))
            .unwrap_or(usize::MAX);
        if points > self.cap {
            return Err(Error::SweepTooLarge {
                points,
                cap: self.cap,
            });
        }
        let mut grid = vec![Vec::new()];
        for values in &axes {
            grid = grid
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect();
        }
        Ok(grid)
    }
}

/// Applies one grid point on top of `base`.
fn settings_at(
    base: &ModelSettings,
    model: Model,
    keys: &[ParamKey],
    values: &[ParamValue],
) -> ModelSettings {
    let mut s = base.clone();
    for (&k, &v) in keys.iter().zip(values) {
        let x = match v {
            ParamValue::Number(x) => x,
            ParamValue::Strategy(st) => {
                s.spring.strategy = st;
                continue;
            }
        };
        match k {
            ParamKey::Layer(layer) => {
                let mut f = s.layer_factors(model).to_vec();
                if f.len() < layer {
                    f.resize(layer, 1.0);
                }
                f[layer - 1] = x;
                match model {
                    Model::Spring => s.spring.layer_factors = f,
                    Model::LinearElastic => s.linear_elastic.layer_factors = f,
                    Model::Yeoh => s.yeoh.layer_factors = f,
                }
            }
            ParamKey::NSteps => s.spring.n_steps = x as usize,
            ParamKey::Gsc => s.spring.geometric_scale = x,
            ParamKey::Tsc => s.spring.torsional_scale = x,
            ParamKey::TrialFraction => s.spring.trial_fraction = x,
            ParamKey::Modulus => s.linear_elastic.modulus = x,
            ParamKey::Poisson => s.linear_elastic.poisson = x,
            ParamKey::Iterations => s.linear_elastic.iterations = x as usize,
            ParamKey::A10 => s.yeoh.a10 = x,
            ParamKey::A20 => s.yeoh.a20 = x,
            ParamKey::A30 => s.yeoh.a30 = x,
            ParamKey::Kappa => s.yeoh.kappa = x,
            ParamKey::Increments => s.yeoh.increments = x as usize,
            ParamKey::Strategy => unreachable!("strategy values are handled above"),
        }
    }
    s
}

#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub values: Vec<ParamValue>,
    pub evaluation: Evaluation,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub problem: String,
    pub motion: String,
    pub model: Model,
    pub keys: Vec<ParamKey>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Point with the highest min skewness; the first one in grid order on ties.
    pub fn best(&self) -> Option<&SweepPoint> {
        let mut best: Option<(&SweepPoint, f64)> = None;
        for p in &self.points {
            if let Some(s) = p.evaluation.min_skewness() {
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((p, s));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    pub fn failed(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.evaluation.outcome.is_err())
            .count()
    }

    /// Long-form table, one row per grid point, then `#` summary lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let mut header = vec!["problem".to_string(), "motion".into(), "model".into()];
            header.extend(self.keys.iter().map(|k| k.to_string()));
            header.extend(METRIC_COLUMNS.iter().map(|c| c.to_string()));
            w.write_record(&header)?;
            for p in &self.points {
                let mut rec = vec![
                    self.problem.clone(),
                    self.motion.clone(),
                    self.model.name().to_string(),
                ];
                rec.extend(p.values.iter().map(|v| v.to_string()));
                rec.extend(metric_fields(&p.evaluation));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        writeln!(out, "# points,{}", self.points.len())?;
        writeln!(out, "# failed,{}", self.failed())?;
        if let Some(b) = self.best() {
            let r = b.evaluation.report().expect("best point has a report");
            writeln!(out, "# best_min_skewness,{}", r.min_skewness)?;
            for (k, v) in self.keys.iter().zip(&b.values) {
                writeln!(out, "# best_{k},{v}")?;
            }
        }
        Ok(())
    }
}

/// Evaluates every grid point of the sweep on `prepared`. Points run in
/// parallel on the current rayon pool; results keep grid order.
pub fn run_sweep(config: &Config, prepared: &Prepared) -> Result<SweepResult> {
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("missing [sweep] section".into()))?;
    config.validate()?;
    let grid = sweep.grid()?;
    let base = config.model_settings();
    let keys: Vec<ParamKey> = sweep.axes.iter().map(|a| a.param).collect();
    let points = grid
        .into_par_iter()
        .map(|values| {
            let s = settings_at(&base, sweep.model, &keys, &values);
            let evaluation = match validate_settings(&s, sweep.model) {
                Ok(()) => evaluate(prepared, sweep.model, &s),
                Err(e) => Evaluation {
                    model: sweep.model,
                    outcome: Err(e.to_string()),
                    wall_time_s: 0.0,
                },
            };
            SweepPoint { values, evaluation }
        })
        .collect();
    Ok(SweepResult {
        problem: prepared.label.clone(),
        motion: prepared.motion.mode.name().to_string(),
        model: sweep.model,
        keys,
        points,
    })
}

fn validate_settings(s: &ModelSettings, model: Model) -> Result<()> {
    match model {
        Model::Spring => s.spring.validate(),
        Model::LinearElastic => s.linear_elastic.validate(),
        Model::Yeoh => s.yeoh.validate(),
    }
}
