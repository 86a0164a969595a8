//! Flat `key = value` experiment files.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are
//! rejected. Command-line overrides use the same keys and win over the
//! file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::problems::SynthSpec;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    DaI,
    DaII,
    Gd,
    AdagradDa,
    SgdDa,
    AdamDa,
    AdagradNorm,
    Polyak,
    Fixed,
    /// Plain diagonal AdaGrad with a tuned learning rate.
    Adagrad,
}

impl Algorithm {
    pub const ALL: [Algorithm; 10] = [
        Algorithm::DaI,
        Algorithm::DaII,
        Algorithm::Gd,
        Algorithm::AdagradDa,
        Algorithm::SgdDa,
        Algorithm::AdamDa,
        Algorithm::AdagradNorm,
        Algorithm::Polyak,
        Algorithm::Fixed,
        Algorithm::Adagrad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DaI => "da_I",
            Algorithm::DaII => "da_II",
            Algorithm::Gd => "gd",
            Algorithm::AdagradDa => "adagrad_da",
            Algorithm::SgdDa => "sgd_da",
            Algorithm::AdamDa => "adam_da",
            Algorithm::AdagradNorm => "adagrad_norm",
            Algorithm::Polyak => "polyak",
            Algorithm::Fixed => "fixed",
            Algorithm::Adagrad => "adagrad",
        }
    }

    /// Learning-rate-free methods driven by a `d` estimate.
    pub fn is_dadapt(self) -> bool {
        matches!(
            self,
            Algorithm::DaI
                | Algorithm::DaII
                | Algorithm::Gd
                | Algorithm::AdagradDa
                | Algorithm::SgdDa
                | Algorithm::AdamDa
        )
    }

    /// Methods returning a weighted average with a convex-case guarantee.
    pub fn is_convex_dadapt(self) -> bool {
        matches!(self, Algorithm::DaI | Algorithm::DaII | Algorithm::Gd | Algorithm::AdagradDa)
    }

    /// Whether the `lr` key scales the step.
    pub fn uses_lr(self) -> bool {
        matches!(self, Algorithm::AdagradNorm | Algorithm::Fixed | Algorithm::Adagrad)
    }

    /// Whether a non-flat schedule may be layered on top.
    pub fn accepts_schedule(self) -> bool {
        !matches!(self, Algorithm::DaI | Algorithm::DaII | Algorithm::Gd | Algorithm::Polyak)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::config(format!("unknown algorithm '{s}' (expected one of {})", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Abs,
    Piecewise {
        dim: usize,
        active: usize,
        inactive: usize,
        scale: f64,
        instance_seed: u64,
    },
    Synth(SynthSpec),
    Libsvm(PathBuf),
}

impl ProblemSpec {
    pub fn is_dataset(&self) -> bool {
        matches!(self, ProblemSpec::Synth(_) | ProblemSpec::Libsvm(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GModeSpec {
    None,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub problem: ProblemSpec,
    pub batch_size: usize,
    /// Every coordinate of `x0`.
    pub x0: f64,
    pub algorithm: Algorithm,
    pub d0: f64,
    pub g_mode: GModeSpec,
    /// Overrides the problem's `G`.
    pub lipschitz: Option<f64>,
    /// Overrides the problem's `G∞`.
    pub lipschitz_inf: Option<f64>,
    /// Overrides `D = ‖x0 − x*‖` for baselines that need it.
    pub distance: Option<f64>,
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub decay: f64,
    pub lr: f64,
    pub schedule: Schedule,
    pub steps: Option<usize>,
    pub epochs: Option<usize>,
    pub seeds: Vec<u64>,
    pub record_every: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".to_string(),
            problem: ProblemSpec::Abs,
            batch_size: 16,
            x0: 0.0,
            algorithm: Algorithm::DaI,
            d0: 1e-6,
            g_mode: GModeSpec::None,
            lipschitz: None,
            lipschitz_inf: None,
            distance: None,
            beta: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            decay: 0.0,
            lr: 1.0,
            schedule: Schedule::Flat,
            steps: None,
            epochs: None,
            seeds: vec![0],
            record_every: None,
            output: None,
        }
    }
}

/// Keys that only affect where results go, not what is computed.
const NON_IDENTITY_KEYS: [&str; 3] = ["name", "seeds", "output"];

/// Keys that determine the problem instance and the sampling stream.
const SAMPLING_KEYS: [&str; 12] = [
    "problem", "data", "dim", "samples", "margin", "noise", "data_seed", "active", "inactive",
    "scale", "instance_seed", "batch_size",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value '{value}' for key '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// Parses `key = value` lines into a map. Later lines override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty key".to_string(),
            });
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key=value` overrides on top of this config.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut map = self.to_map();
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override '{o}' is not key=value")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let get = |k: &str| map.get(k).map(String::as_str);
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::config(format!("unknown config key '{key}'")));
            }
        }
        if let Some(v) = get("name") {
            c.name = v.to_string();
        }
        let opt_f = |k: &str| -> Result<Option<f64>> { get(k).map(|v| parse_value(k, v)).transpose() };
        let opt_u = |k: &str| -> Result<Option<usize>> { get(k).map(|v| parse_value(k, v)).transpose() };
        let opt_u64 = |k: &str| -> Result<Option<u64>> { get(k).map(|v| parse_value(k, v)).transpose() };

        c.problem = match get("problem").unwrap_or("abs") {
            "abs" => ProblemSpec::Abs,
            "piecewise" => ProblemSpec::Piecewise {
                dim: opt_u("dim")?.unwrap_or(10),
                active: opt_u("active")?.unwrap_or(4),
                inactive: opt_u("inactive")?.unwrap_or(4),
                scale: opt_f("scale")?.unwrap_or(1.0),
                instance_seed: opt_u64("instance_seed")?.unwrap_or(0),
            },
            "synth" => ProblemSpec::Synth(SynthSpec {
                seed: opt_u64("data_seed")?.unwrap_or(0),
                n: opt_u("samples")?.unwrap_or(1000),
                dim: opt_u("dim")?.unwrap_or(20),
                margin: opt_f("margin")?.unwrap_or(0.5),
                noise: opt_f("noise")?.unwrap_or(0.05),
            }),
            "libsvm" => ProblemSpec::Libsvm(PathBuf::from(
                get("data").ok_or_else(|| Error::config("problem = libsvm needs a 'data' path"))?,
            )),
            other => {
                return Err(Error::config(format!(
                    "unknown problem '{other}' (expected abs, piecewise, synth or libsvm)"
                )))
            }
        };
        if let Some(v) = opt_u("batch_size")? {
            c.batch_size = v;
        }
        if let Some(v) = opt_f("x0")? {
            c.x0 = v;
        }
        if let Some(v) = get("algorithm") {
            c.algorithm = v.parse()?;
        }
        if let Some(v) = opt_f("d0")? {
            c.d0 = v;
        }
        c.g_mode = match get("g_mode").unwrap_or("none") {
            "none" => GModeSpec::None,
            "fixed" => GModeSpec::Fixed,
            other => return Err(Error::config(format!("g_mode must be none or fixed, got '{other}'"))),
        };
        c.lipschitz = opt_f("lipschitz")?;
        c.lipschitz_inf = opt_f("lipschitz_inf")?;
        c.distance = opt_f("distance")?;
        for (key, slot) in [
            ("beta", &mut c.beta),
            ("beta1", &mut c.beta1),
            ("beta2", &mut c.beta2),
            ("eps", &mut c.eps),
            ("decay", &mut c.decay),
            ("lr", &mut c.lr),
        ] {
            if let Some(v) = get(key) {
                *slot = parse_value(key, v)?;
            }
        }
        if let Some(v) = get("schedule") {
            c.schedule = v.parse()?;
        }
        c.steps = opt_u("steps")?;
        c.epochs = opt_u("epochs")?;
        if let Some(v) = get("seeds") {
            c.seeds = parse_list("seeds", v)?;
        }
        c.record_every = opt_u("record_every")?;
        c.output = get("output").map(PathBuf::from);
        c.validate()?;
        Ok(c)
    }

    /// Every key with its effective value.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("name", self.name.clone());
        match &self.problem {
            ProblemSpec::Abs => put("problem", "abs".into()),
            ProblemSpec::Piecewise {
                dim,
                active,
                inactive,
                scale,
                instance_seed,
            } => {
                put("problem", "piecewise".into());
                put("dim", dim.to_string());
                put("active", active.to_string());
                put("inactive", inactive.to_string());
                put("scale", scale.to_string());
                put("instance_seed", instance_seed.to_string());
            }
            ProblemSpec::Synth(s) => {
                put("problem", "synth".into());
                put("data_seed", s.seed.to_string());
                put("samples", s.n.to_string());
                put("dim", s.dim.to_string());
                put("margin", s.margin.to_string());
                put("noise", s.noise.to_string());
            }
            ProblemSpec::Libsvm(p) => {
                put("problem", "libsvm".into());
                put("data", p.display().to_string());
            }
        }
        put("batch_size", self.batch_size.to_string());
        put("x0", self.x0.to_string());
        put("algorithm", self.algorithm.to_string());
        put("d0", self.d0.to_string());
        put(
            "g_mode",
            match self.g_mode {
                GModeSpec::None => "none",
                GModeSpec::Fixed => "fixed",
            }
            .into(),
        );
        for (k, v) in [
            ("lipschitz", self.lipschitz),
            ("lipschitz_inf", self.lipschitz_inf),
            ("distance", self.distance),
        ] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        put("beta", self.beta.to_string());
        put("beta1", self.beta1.to_string());
        put("beta2", self.beta2.to_string());
        put("eps", self.eps.to_string());
        put("decay", self.decay.to_string());
        put("lr", self.lr.to_string());
        put("schedule", self.schedule.to_string());
        if let Some(v) = self.steps {
            put("steps", v.to_string());
        }
        if let Some(v) = self.epochs {
            put("epochs", v.to_string());
        }
        put(
            "seeds",
            self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        );
        if let Some(v) = self.record_every {
            put("record_every", v.to_string());
        }
        if let Some(p) = &self.output {
            put("output", p.display().to_string());
        }
        m
    }

    /// The config as a `key = value` file that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.to_map()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    fn canonical(&self, keys: impl Fn(&str) -> bool) -> String {
        self.to_map()
            .iter()
            .filter(|(k, _)| keys(k))
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// Identity of one (config, seed) run: a hex digest over every key that
    /// affects the computation, plus the seed.
    pub fn run_id(&self, seed: u64) -> String {
        let text = self.canonical(|k| !NON_IDENTITY_KEYS.contains(&k));
        let digest = Sha256::digest(format!("{text}seed={seed}\n").as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Master key of the sampling stream. Only the problem and batching keys
    /// enter it, so optimizer variants see the same mini-batch order.
    pub fn sampling_key(&self) -> u64 {
        let text = self.canonical(|k| SAMPLING_KEYS.contains(&k));
        let digest = Sha256::digest(text.as_bytes());
        u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("d0", self.d0)?;
        positive("lr", self.lr)?;
        positive("eps", self.eps)?;
        for (name, v) in [
            ("lipschitz", self.lipschitz),
            ("lipschitz_inf", self.lipschitz_inf),
            ("distance", self.distance),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::config(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::config("beta1 must lie in [0, 1) and beta2 in (0, 1)"));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(Error::config("decay must be non-negative"));
        }
        if !self.x0.is_finite() {
            return Err(Error::config("x0 must be finite"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be positive"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        if self.steps == Some(0) || self.epochs == Some(0) || self.record_every == Some(0) {
            return Err(Error::config("steps, epochs and record_every must be positive"));
        }
        if self.epochs.is_some() && !self.problem.is_dataset() {
            return Err(Error::config("epochs only applies to dataset problems; use steps"));
        }
        self.schedule.validate()?;
        if self.schedule != Schedule::Flat && !self.algorithm.accepts_schedule() {
            return Err(Error::config(format!(
                "{} does not take a schedule multiplier",
                self.algorithm
            )));
        }
        if let ProblemSpec::Piecewise { dim, active, scale, .. } = &self.problem {
            if *dim == 0 || *active < 2 {
                return Err(Error::config("piecewise needs dim >= 1 and active >= 2"));
            }
            positive("scale", *scale)?;
        }
        Ok(())
    }
}

const KNOWN_KEYS: [&str; 32] = [
    "name", "problem", "data", "dim", "samples", "margin", "noise", "data_seed", "active",
    "inactive", "scale", "instance_seed", "batch_size", "x0", "algorithm", "d0", "g_mode",
    "lipschitz", "lipschitz_inf", "distance", "beta", "beta1", "beta2", "eps", "decay", "lr",
    "schedule", "steps", "epochs", "seeds", "record_every", "output",
];

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "\
# toy problem
name = toy
problem = abs
x0 = 1
d0 = 0.1
algorithm = da_I
steps = 200   # gradient evaluations
seeds = 0, 1
";

    #[test]
    fn parses_file() {
        let c = ExperimentConfig::parse(TOY).unwrap();
        assert_eq!(c.problem, ProblemSpec::Abs);
        assert_eq!(c.x0, 1.0);
        assert_eq!(c.d0, 0.1);
        assert_eq!(c.steps, Some(200));
        assert_eq!(c.seeds, vec![0, 1]);
        assert_eq!(c.algorithm, Algorithm::DaI);
    }

    #[test]
    fn text_round_trip() {
        let mut c = ExperimentConfig::parse(TOY).unwrap();
        c.schedule = Schedule::tenthing();
        c.algorithm = Algorithm::AdagradDa;
        c.problem = ProblemSpec::Synth(SynthSpec {
            seed: 3,
            n: 50,
            dim: 4,
            margin: 0.25,
            noise: 0.1,
        });
        c.epochs = Some(3);
        c.steps = None;
        c.lipschitz = Some(2.5);
        let back = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_win() {
        let c = ExperimentConfig::parse(TOY).unwrap();
        let o = c.with_overrides(&["d0=0.5", "algorithm = gd"]).unwrap();
        assert_eq!(o.d0, 0.5);
        assert_eq!(o.algorithm, Algorithm::Gd);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse("bogus = 1").is_err());
        assert!(ExperimentConfig::parse("d0 = -1").is_err());
        assert!(ExperimentConfig::parse("d0 = abc").is_err());
        assert!(ExperimentConfig::parse("algorithm = sgd").is_err());
        assert!(ExperimentConfig::parse("just text").is_err());
        assert!(ExperimentConfig::parse("algorithm = da_I\nschedule = cosine").is_err());
        assert!(ExperimentConfig::parse("epochs = 3").is_err());
        assert!(ExperimentConfig::parse("problem = libsvm").is_err());
    }

    #[test]
    fn identity_ignores_output_and_seed_list() {
        let a = ExperimentConfig::parse(TOY).unwrap();
        let b = a.with_overrides(&["output=/tmp/x", "seeds=7", "name=other"]).unwrap();
        assert_eq!(a.run_id(3), b.run_id(3));
        assert_ne!(a.run_id(3), a.run_id(4));
        let c = a.with_overrides(&["d0=0.2"]).unwrap();
        assert_ne!(a.run_id(3), c.run_id(3));
        assert_eq!(a.sampling_key(), c.sampling_key());
    }
}
