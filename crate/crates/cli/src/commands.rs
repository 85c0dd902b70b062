use anyhow::{ensure, Context, Result};
use asymclone_core::cloner::{equator_scan, Cloner, EquatorScan, HybridConfig, SbsConfig};
use asymclone_core::elements::{tilt_for_ratio, FilterAmplitudes, PlateOrientation};
use asymclone_core::imperfections::{hom_coincidence, hom_coincidence_closed_form};
use asymclone_core::theory::{
    hybrid_filter_settings, hybrid_success, pc_fidelities, sbs_filter_settings, sbs_success,
    universal_fidelities, FilterSettings,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sampling::{draw_counts, estimate, Counts};
use crate::spec::{Grid, Mode, RunSpec, Setup};

fn frontier_grid() -> Grid {
    Grid::new(0.0, 1.0, 21)
}

fn table_grid() -> Grid {
    Grid::new(0.05, 0.95, 19)
}

fn single_q() -> Grid {
    Grid::new(0.5, 0.5, 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierRow {
    pub q: f64,
    pub f1_pc: f64,
    pub f2_pc: f64,
    pub p: f64,
    pub f1_univ: f64,
    pub f2_univ: f64,
}

/// Both optimal frontiers; the universal cloner uses `p = q`.
pub fn frontier(spec: &RunSpec) -> Result<Vec<FrontierRow>> {
    spec.q_values(frontier_grid())
        .into_iter()
        .map(|q| {
            let pc = pc_fidelities(q)?;
            let univ = universal_fidelities(q)?;
            Ok(FrontierRow {
                q,
                f1_pc: pc.f1,
                f2_pc: pc.f2,
                p: q,
                f1_univ: univ.f1,
                f2_univ: univ.f2,
            })
        })
        .collect()
}

fn settings(spec: &RunSpec, q: f64) -> Result<FilterSettings> {
    let (r_v, r_h) = spec.reflectances();
    Ok(match spec.setup {
        Setup::Sbs => sbs_filter_settings(q, r_v, r_h)?,
        Setup::Hybrid => hybrid_filter_settings(q, r_v, r_h)?,
    })
}

fn orientation_name(o: PlateOrientation) -> &'static str {
    match o {
        PlateOrientation::AttenuateV => "attenuate-v",
        PlateOrientation::AttenuateH => "attenuate-h",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRow {
    pub q: f64,
    pub sigma_eta: f64,
    pub sigma_nu: f64,
    pub inv_sigma_nu: f64,
    pub feasible: bool,
    pub eta_orientation: String,
    pub nu_orientation: String,
    /// Plate tilt in degrees; empty when the plates cannot reach the ratio.
    pub eta_tilt_deg: Option<f64>,
    pub nu_tilt_deg: Option<f64>,
}

pub fn filters(spec: &RunSpec) -> Result<Vec<FilterRow>> {
    let plate = spec.plate.plate();
    spec.q_values(table_grid())
        .into_iter()
        .map(|q| {
            let s = settings(spec, q)?;
            let tilt = |sigma: f64| {
                tilt_for_ratio(sigma.min(1.0 / sigma), &plate)
                    .ok()
                    .map(f64::to_degrees)
            };
            let (eta, nu) = s.ideal_amplitudes()?;
            Ok(FilterRow {
                q,
                sigma_eta: s.sigma_eta,
                sigma_nu: s.sigma_nu,
                inv_sigma_nu: 1.0 / s.sigma_nu,
                feasible: s.feasible,
                eta_orientation: orientation_name(eta.orientation).into(),
                nu_orientation: orientation_name(nu.orientation).into(),
                eta_tilt_deg: tilt(s.sigma_eta),
                nu_tilt_deg: tilt(s.sigma_nu),
            })
        })
        .collect()
}

/// A configured cloner for one asymmetry.
pub enum Machine {
    Sbs(SbsConfig),
    Hybrid(HybridConfig),
}

impl Machine {
    pub fn build(spec: &RunSpec, q: f64) -> Result<Self> {
        let s = settings(spec, q)?;
        let (eta_favored, nu_favored) = favored_amplitudes(spec, &s)?;
        let (r_v, r_h) = spec.reflectances();
        let params = spec.imperfections.params();
        Ok(match spec.setup {
            Setup::Sbs => Machine::Sbs(params.apply_sbs(&SbsConfig {
                sigma_eta: s.sigma_eta,
                sigma_nu: s.sigma_nu,
                eta_favored,
                nu_favored,
                ..SbsConfig::new(r_v, r_h)
            })?),
            Setup::Hybrid => Machine::Hybrid(params.apply_hybrid(&HybridConfig {
                r_fc: spec.coupler_reflectance(),
                sigma_eta: s.sigma_eta,
                sigma_nu: s.sigma_nu,
                eta_favored,
                nu_favored,
                ..HybridConfig::new(r_v, r_h)
            })?),
        })
    }

    pub fn scan(&self) -> Result<EquatorScan> {
        Ok(match self {
            Machine::Sbs(c) => equator_scan(c)?,
            Machine::Hybrid(c) => equator_scan(c)?,
        })
    }

    pub fn run(&self, phi: f64) -> Result<asymclone_core::cloner::CloningOutcome> {
        let psi = asymclone_core::state::PolarizationQubit::equatorial(phi);
        Ok(match self {
            Machine::Sbs(c) => c.run(&psi)?,
            Machine::Hybrid(c) => c.run(&psi)?,
        })
    }
}

/// Favored-polarization amplitudes: 1 for ideal filters, the TM plate
/// transmission at the required tilt for realistic ones.
fn favored_amplitudes(spec: &RunSpec, s: &FilterSettings) -> Result<(f64, f64)> {
    match spec.mode {
        Mode::Ideal => Ok((1.0, 1.0)),
        Mode::Realistic => {
            let plate = spec.plate.plate();
            let eta = FilterAmplitudes::from_plates(s.sigma_eta, &plate)
                .with_context(|| format!("eta plates at q={}", s.q))?;
            let nu = FilterAmplitudes::from_plates(s.sigma_nu, &plate)
                .with_context(|| format!("nu plates at q={}", s.q))?;
            Ok((eta.favored(), nu.favored()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneRow {
    pub q: f64,
    /// Equator index `k` with `φ = kπ/4`; empty on the per-`q` mean row.
    pub k: Option<i32>,
    pub phi: Option<f64>,
    pub f1: f64,
    pub f2: f64,
    pub p_succ: f64,
    pub c_pp: Option<f64>,
    pub c_pm: Option<f64>,
    pub c_mp: Option<f64>,
    pub c_mm: Option<f64>,
    /// Sample standard deviation across the scan; mean row only.
    pub f1_std: Option<f64>,
    pub f2_std: Option<f64>,
    pub f1_theory: f64,
    pub f2_theory: f64,
}

pub fn clone(spec: &RunSpec) -> Result<Vec<CloneRow>> {
    let mut rows = Vec::new();
    for q in spec.q_values(single_q()) {
        let machine = Machine::build(spec, q)?;
        let theory = pc_fidelities(q)?;
        let scan = machine.scan()?;
        let mut p_mean = 0.0;
        for r in &scan.rows {
            let out = machine.run(r.phi)?;
            p_mean += out.p_succ / scan.rows.len() as f64;
            rows.push(CloneRow {
                q,
                k: Some(r.k),
                phi: Some(r.phi),
                f1: out.f1,
                f2: out.f2,
                p_succ: out.p_succ,
                c_pp: Some(out.c_pp),
                c_pm: Some(out.c_pm),
                c_mp: Some(out.c_mp),
                c_mm: Some(out.c_mm),
                f1_std: None,
                f2_std: None,
                f1_theory: theory.f1,
                f2_theory: theory.f2,
            });
        }
        rows.push(CloneRow {
            q,
            k: None,
            phi: None,
            f1: scan.mean.f1,
            f2: scan.mean.f2,
            p_succ: p_mean,
            c_pp: None,
            c_pm: None,
            c_mp: None,
            c_mm: None,
            f1_std: Some(scan.std_dev.f1),
            f2_std: Some(scan.std_dev.f2),
            f1_theory: theory.f1,
            f2_theory: theory.f2,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsuccRow {
    pub q: f64,
    /// Equator-scan mean of the simulated success probability.
    pub p_succ: f64,
    /// Closed form with the same filter amplitudes and no imperfections.
    pub p_succ_closed_form: f64,
}

pub fn psucc(spec: &RunSpec) -> Result<Vec<PsuccRow>> {
    let (r_v, r_h) = spec.reflectances();
    spec.q_values(table_grid())
        .into_iter()
        .map(|q| {
            let machine = Machine::build(spec, q)?;
            let scan = machine.scan()?;
            let p_succ = scan.rows.iter().map(|r| r.p_succ).sum::<f64>() / scan.rows.len() as f64;
            let (eta, nu) = favored_amplitudes(spec, &settings(spec, q)?)?;
            let p_succ_closed_form = match spec.setup {
                Setup::Sbs => sbs_success(q, r_v, r_h, eta, nu)?,
                Setup::Hybrid => hybrid_success(q, spec.coupler_reflectance(), r_v, r_h, eta, nu)?,
            };
            Ok(PsuccRow {
                q,
                p_succ,
                p_succ_closed_form,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub q: f64,
    pub k: i32,
    pub phi: f64,
    /// Repetition index; empty on the per-state summary row.
    pub repetition: Option<u32>,
    pub n_pp: Option<u64>,
    pub n_pm: Option<u64>,
    pub n_mp: Option<u64>,
    pub n_mm: Option<u64>,
    /// Fidelity estimate; on the summary row, the mean over repetitions.
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub f1_std: Option<f64>,
    pub f2_std: Option<f64>,
}

pub fn sample_counts(spec: &RunSpec) -> Result<Vec<SampleRow>> {
    let rate = spec
        .sampling
        .pair_rate
        .context("sample-counts needs a pair rate")?;
    let duration = spec
        .sampling
        .duration
        .context("sample-counts needs a duration")?;
    ensure!(rate > 0.0, "pair rate must be positive");
    ensure!(duration > 0.0, "duration must be positive");
    let pairs = rate * duration;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::new();
    for q in spec.q_values(single_q()) {
        let machine = Machine::build(spec, q)?;
        for (k, phi) in asymclone_core::cloner::equator_phases() {
            let out = machine.run(phi)?;
            let mut estimates = Vec::new();
            for repetition in 0..spec.sampling.repetitions {
                let c: Counts = draw_counts(&out, pairs, &mut rng)?;
                let fid = estimate(&c);
                if let Some(f) = fid {
                    estimates.push(f);
                }
                rows.push(SampleRow {
                    q,
                    k,
                    phi,
                    repetition: Some(repetition),
                    n_pp: Some(c.pp),
                    n_pm: Some(c.pm),
                    n_mp: Some(c.mp),
                    n_mm: Some(c.mm),
                    f1: fid.map(|f| f.0),
                    f2: fid.map(|f| f.1),
                    f1_std: None,
                    f2_std: None,
                });
            }
            let stats = |pick: fn(&(f64, f64)) -> f64| -> (Option<f64>, Option<f64>) {
                let v: Vec<f64> = estimates.iter().map(pick).collect();
                if v.is_empty() {
                    return (None, None);
                }
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let std = if v.len() > 1 {
                    Some((v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
                } else {
                    None
                };
                (Some(mean), std)
            };
            let (f1, f1_std) = stats(|f| f.0);
            let (f2, f2_std) = stats(|f| f.1);
            rows.push(SampleRow {
                q,
                k,
                phi,
                repetition: None,
                n_pp: None,
                n_pm: None,
                n_mp: None,
                n_mm: None,
                f1,
                f2,
                f1_std,
                f2_std,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomRow {
    pub s: f64,
    pub coincidence: f64,
    pub closed_form: f64,
}

pub fn hom(spec: &RunSpec) -> Result<Vec<HomRow>> {
    let r = spec.hom.reflectance;
    spec.hom
        .s_grid
        .unwrap_or(Grid::new(0.0, 1.0, 11))
        .values()
        .into_iter()
        .map(|s| {
            Ok(HomRow {
                s,
                coincidence: hom_coincidence(r, s)?,
                closed_form: hom_coincidence_closed_form(r, s),
            })
        })
        .collect()
}
