use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use asymclone_core::elements::FresnelPlate;
use asymclone_core::imperfections::ImperfectionParams;
use asymclone_core::theory::ideal_sbs_reflectances;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Setup {
    #[default]
    Sbs,
    Hybrid,
}

/// `Ideal` uses lossless filters and the design reflectances; `Realistic`
/// uses tilted Fresnel plates and the measured reflectances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Ideal,
    Realistic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Inclusive linear grid written `start:end:n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, n: usize) -> Self {
        Self { start, end, n }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.start];
        }
        let step = (self.end - self.start) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        ensure!(parts.len() == 3, "grid must be start:end:n, got {s:?}");
        let start: f64 = parts[0]
            .trim()
            .parse()
            .with_context(|| format!("grid start in {s:?}"))?;
        let end: f64 = parts[1]
            .trim()
            .parse()
            .with_context(|| format!("grid end in {s:?}"))?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .with_context(|| format!("grid count in {s:?}"))?;
        ensure!(n >= 1, "grid count must be at least 1");
        ensure!(
            start.is_finite() && end.is_finite(),
            "grid bounds must be finite"
        );
        Ok(Self { start, end, n })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.n)
    }
}

impl TryFrom<String> for Grid {
    type Error = anyhow::Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> Self {
        g.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImperfectionSpec {
    pub overlap_s: f64,
    pub residual_phase: f64,
    pub ancilla_theta: f64,
    pub ancilla_phi: f64,
}

impl Default for ImperfectionSpec {
    fn default() -> Self {
        let p = ImperfectionParams::default();
        Self {
            overlap_s: p.overlap_s,
            residual_phase: p.residual_phase,
            ancilla_theta: p.ancilla_theta,
            ancilla_phi: p.ancilla_phi,
        }
    }
}

impl ImperfectionSpec {
    pub fn params(&self) -> ImperfectionParams {
        ImperfectionParams {
            overlap_s: self.overlap_s,
            residual_phase: self.residual_phase,
            ancilla_theta: self.ancilla_theta,
            ancilla_phi: self.ancilla_phi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlateSpec {
    pub refractive_index: f64,
    pub plates_per_filter: u32,
    pub passes_per_plate: u32,
}

impl Default for PlateSpec {
    fn default() -> Self {
        let p = FresnelPlate::default();
        Self {
            refractive_index: p.refractive_index,
            plates_per_filter: p.plates_per_filter,
            passes_per_plate: p.passes_per_plate,
        }
    }
}

impl PlateSpec {
    pub fn plate(&self) -> FresnelPlate {
        FresnelPlate {
            refractive_index: self.refractive_index,
            plates_per_filter: self.plates_per_filter,
            passes_per_plate: self.passes_per_plate,
            ..FresnelPlate::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSpec {
    /// Pairs per second reaching the cloner.
    pub pair_rate: Option<f64>,
    /// Seconds per repetition.
    pub duration: Option<f64>,
    pub repetitions: u32,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            pair_rate: None,
            duration: None,
            repetitions: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomSpec {
    pub reflectance: f64,
    pub s_grid: Option<Grid>,
}

impl Default for HomSpec {
    fn default() -> Self {
        Self {
            reflectance: 0.5,
            s_grid: None,
        }
    }
}

/// Everything that determines a command's output.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub setup: Setup,
    pub mode: Mode,
    pub q: Option<f64>,
    pub q_grid: Option<Grid>,
    /// Reflectances; `None` picks the mode's default for the setup.
    pub r_v: Option<f64>,
    pub r_h: Option<f64>,
    pub r_fc: Option<f64>,
    pub imperfections: ImperfectionSpec,
    pub plate: PlateSpec,
    pub sampling: SamplingSpec,
    pub hom: HomSpec,
    pub format: Format,
    pub seed: u64,
}

/// Reflectances measured on the two setups.
pub const MEASURED_SBS: (f64, f64) = (0.758, 0.179);
pub const MEASURED_HYBRID: (f64, f64) = (0.509, 0.466);

impl RunSpec {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn reflectances(&self) -> (f64, f64) {
        let default = match (self.setup, self.mode) {
            (Setup::Sbs, Mode::Ideal) => ideal_sbs_reflectances(),
            (Setup::Sbs, Mode::Realistic) => MEASURED_SBS,
            (Setup::Hybrid, Mode::Ideal) => (0.5, 0.5),
            (Setup::Hybrid, Mode::Realistic) => MEASURED_HYBRID,
        };
        (self.r_v.unwrap_or(default.0), self.r_h.unwrap_or(default.1))
    }

    pub fn coupler_reflectance(&self) -> f64 {
        self.r_fc.unwrap_or(0.5)
    }

    /// Asymmetries to evaluate: `q` wins over `q_grid`, else `default`.
    pub fn q_values(&self, default: Grid) -> Vec<f64> {
        match (self.q, self.q_grid) {
            (Some(q), _) => vec![q],
            (None, Some(g)) => g.values(),
            (None, None) => default.values(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |name: &str, x: f64| -> Result<()> {
            ensure!(x > 0.0 && x < 1.0, "{name} must lie in (0, 1), got {x}");
            Ok(())
        };
        if let Some(q) = self.q {
            open_unit("q", q)?;
        }
        if let Some(g) = self.q_grid {
            for q in g.values() {
                open_unit("q_grid value", q)?;
            }
        }
        for (name, r) in [("r_v", self.r_v), ("r_h", self.r_h), ("r_fc", self.r_fc)] {
            if let Some(r) = r {
                ensure!(
                    (0.0..=1.0).contains(&r),
                    "{name} must lie in [0, 1], got {r}"
                );
            }
        }
        ensure!(
            (0.0..=1.0).contains(&self.hom.reflectance),
            "hom reflectance must lie in [0, 1]"
        );
        if let Some(g) = self.hom.s_grid {
            for s in g.values() {
                ensure!((0.0..=1.0).contains(&s), "s_grid value {s} outside [0, 1]");
            }
        }
        if let Some(rate) = self.sampling.pair_rate {
            ensure!(
                rate > 0.0 && rate.is_finite(),
                "pair_rate must be positive, got {rate}"
            );
        }
        if let Some(d) = self.sampling.duration {
            ensure!(
                d > 0.0 && d.is_finite(),
                "duration must be positive, got {d}"
            );
        }
        ensure!(
            self.sampling.repetitions >= 1,
            "repetitions must be at least 1"
        );
        ensure!(
            self.plate.refractive_index > 1.0,
            "refractive index must exceed 1"
        );
        if let Err(e) = self.imperfections.params().validate() {
            bail!("imperfections: {e}");
        }
        Ok(())
    }
}
