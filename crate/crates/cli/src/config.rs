use std::path::Path;

use kamtree::fixtures;
use kamtree::modes::{parse_potential, Extension, Frequency, ScalarSeries, WeightSequence};
use kamtree::smalldiv::{sample_frequency, DiophantineParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    /// Constant `h` on `|j| ≤ half`, `+∞` outside.
    Window {
        half: u32,
        h: f64,
    },
    /// `(log(1+⟨j⟩))^σ` on `|j| ≤ half`, `+∞` outside.
    WindowLogPower {
        half: u32,
        sigma: f64,
    },
    LogPower {
        sigma: f64,
    },
    Polynomial {
        alpha: f64,
    },
    /// `h_j = values[|j|]`, `+∞` beyond the table.
    Table {
        values: Vec<f64>,
    },
}

impl WeightSpec {
    pub fn build(&self) -> Result<WeightSequence, String> {
        let w = match self {
            WeightSpec::Window { half, h } => WeightSequence::window_constant(*half, *h),
            WeightSpec::WindowLogPower { half, sigma } => {
                WeightSequence::log_power(*sigma).map(|w| WeightSequence::window(*half, w))
            }
            WeightSpec::LogPower { sigma } => WeightSequence::log_power(*sigma),
            WeightSpec::Polynomial { alpha } => WeightSequence::polynomial(*alpha),
            WeightSpec::Table { values } => {
                WeightSequence::table(values.clone(), Extension::Infinite)
            }
        };
        w.map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencySpec {
    /// `ω_j` for `j = −J…J`.
    Explicit { values: Vec<f64> },
    /// Uniform in `Π_j [−ρ⟨j⟩^{−q}, ρ⟨j⟩^{−q}]` on `|j| ≤ half`.
    Sampled { half: u32, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Inline { text: String },
    File { path: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub weights: WeightSpec,
    pub frequency: FrequencySpec,
    pub potential: PotentialSpec,
    pub s: f64,
    pub s2: f64,
    pub q: f64,
    pub rho: f64,
    pub gamma: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// Growth exponent of the β⋆ lower bound used for thresholds.
    pub sigma: f64,
    /// Upper end of the `(K₁, K₂)` calibration range.
    pub n_cal: f64,
    pub c0: f64,
    pub k: usize,
    pub tree_k: usize,
    /// Order of the residual-scaling check.
    pub residual_k: usize,
    pub cancel_k: usize,
    pub counting_k: usize,
    pub dump_k: usize,
    pub epsilons: Vec<f64>,
    pub engine: String,
    pub m_max: u32,
    /// Optional cut of the scale ladder at `n_max`.
    pub n_max: Option<usize>,
    /// `N` of the Diophantine check.
    pub dioph_n: f64,
    /// `N` of the measure estimate.
    pub measure_n: f64,
    pub samples: usize,
    pub tree_cap: u64,
    pub frontier_cap: usize,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            weights: WeightSpec::Window { half: 1, h: 1.0 },
            frequency: FrequencySpec::Explicit {
                values: fixtures::fix_a_frequency().values().to_vec(),
            },
            potential: PotentialSpec::Inline {
                text: fixtures::FIX_A_POTENTIAL.to_string(),
            },
            s: fixtures::FIX_A_S,
            s2: 0.25,
            q: fixtures::FIX_A_Q,
            rho: 1.0,
            gamma: 0.1,
            mu1: 2.5,
            mu2: 1.5,
            sigma: 6.0,
            n_cal: 1024.0,
            c0: 1.0,
            k: 8,
            tree_k: 6,
            residual_k: 6,
            cancel_k: 4,
            counting_k: 5,
            dump_k: 3,
            epsilons: vec![1e-3],
            engine: "recursion".into(),
            m_max: 10,
            n_max: None,
            dioph_n: 64.0,
            measure_n: 4.0,
            samples: 2000,
            tree_cap: kamtree::trees::DEFAULT_TREE_CAP,
            frontier_cap: 1 << 20,
            dt: 1e-3,
            t_end: 100.0,
            stride: 100,
            seed: 1,
        }
    }
}

/// Parses `key=value`; the value is read as JSON, falling back to a string.
pub fn parse_override(arg: &str) -> Result<(String, Value), String> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| format!("override `{arg}` is not key=value"))?;
    let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
    Ok((k.trim().to_string(), value))
}

/// Default config, then the file, then the overrides; dotted keys reach into objects.
pub fn load(path: Option<&Path>, overrides: &[(String, Value)]) -> Result<RunConfig, String> {
    let mut value = serde_json::to_value(RunConfig::default()).expect("serializable");
    if let Some(p) = path {
        let text =
            std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
        let file: Value =
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?;
        let Value::Object(map) = file else {
            return Err(format!("{}: config must be a JSON object", p.display()));
        };
        for (k, v) in map {
            value[k] = v;
        }
    }
    for (key, v) in overrides {
        let mut slot = &mut value;
        for part in key.split('.') {
            if !slot.is_object() {
                return Err(format!("override `{key}` does not name a config field"));
            }
            slot = &mut slot[part];
        }
        *slot = v.clone();
    }
    let cfg: RunConfig = serde_json::from_value(value).map_err(|e| format!("config: {e}"))?;
    cfg.validate()?;
    Ok(cfg)
}

/// The built model objects.
pub struct Model {
    pub w: WeightSequence,
    pub om: Frequency,
    pub f: ScalarSeries,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("s", self.s),
            ("rho", self.rho),
            ("gamma", self.gamma),
            ("n_cal", self.n_cal),
            ("c0", self.c0),
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("dioph_n", self.dioph_n),
            ("measure_n", self.measure_n),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(0.0 < self.s2 && self.s2 < self.s) {
            return Err(format!(
                "need 0 < s2 < s, got s = {}, s2 = {}",
                self.s, self.s2
            ));
        }
        if !(self.sigma > 2.0) {
            return Err(format!("sigma must exceed 2, got {}", self.sigma));
        }
        DiophantineParams::new(self.gamma, self.mu1, self.mu2, self.q)
            .map_err(|e| e.to_string())?;
        if self.k < 1
            || self.tree_k < 1
            || self.residual_k < 1
            || self.cancel_k < 1
            || self.counting_k < 1
            || self.dump_k < 1
        {
            return Err("every order setting must be at least 1".into());
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !e.is_finite()) {
            return Err("epsilons must be a nonempty list of finite numbers".into());
        }
        if self.samples == 0 || self.stride == 0 {
            return Err("samples and stride must be positive".into());
        }
        self.engine
            .parse::<kamtree::torus::Engine>()
            .map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn diophantine(&self) -> DiophantineParams {
        DiophantineParams::new(self.gamma, self.mu1, self.mu2, self.q).expect("validated")
    }

    pub fn model(&self) -> Result<Model, String> {
        let w = self.weights.build()?;
        let values = match &self.frequency {
            FrequencySpec::Explicit { values } => values.clone(),
            FrequencySpec::Sampled { half, seed } => {
                sample_frequency(*seed, *half, self.q, self.rho).map_err(|e| e.to_string())?
            }
        };
        let om = Frequency::new(values, self.q).map_err(|e| e.to_string())?;
        let text = match &self.potential {
            PotentialSpec::Inline { text } => text.clone(),
            PotentialSpec::File { path } => {
                std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?
            }
        };
        let f = parse_potential(&text).map_err(|e| e.to_string())?;
        if let Some(m) = f.modes().find(|m| !om.window().covers(m)) {
            return Err(format!("potential mode {m} leaves the frequency window"));
        }
        Ok(Model { w, om, f })
    }
}
