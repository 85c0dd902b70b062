//! Imperfection models: partial wavepacket overlap, a residual phase on the
//! splitter output, and an ancilla tilted off the pole.
//!
//! Overlap is modeled by a second temporal bin: the ancilla occupies
//! `s|bin0⟩ + √(1−s²)|bin1⟩` while the signal stays in bin 0, and detection
//! sums over bins.

use crate::cloner::{equator_scan, Cloner, CloningOutcome, HybridConfig, SbsConfig};
use crate::elements::beam_splitter;
use crate::error::{check_range, Error, Result};
use crate::state::{Arm, ModeSet, Photon, PolarizationQubit, TwoPhotonState};
use crate::theory::FidelityPair;

/// Golden-section stopping width on `s`.
pub const OVERLAP_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImperfectionParams {
    pub overlap_s: f64,
    pub residual_phase: f64,
    pub ancilla_theta: f64,
    pub ancilla_phi: f64,
}

impl Default for ImperfectionParams {
    fn default() -> Self {
        Self {
            overlap_s: 1.0,
            residual_phase: 0.0,
            ancilla_theta: 0.0,
            ancilla_phi: 0.0,
        }
    }
}

impl ImperfectionParams {
    pub fn validate(&self) -> Result<()> {
        check_range("overlap_s", self.overlap_s, 0.0, 1.0, "[0, 1]")?;
        check_range(
            "ancilla_theta",
            self.ancilla_theta,
            0.0,
            std::f64::consts::PI,
            "[0, pi]",
        )?;
        if !self.residual_phase.is_finite() || !self.ancilla_phi.is_finite() {
            return Err(Error::OutOfRange {
                name: "phase",
                value: f64::NAN,
                range: "finite",
            });
        }
        Ok(())
    }

    pub fn ancilla(&self) -> Result<PolarizationQubit> {
        PolarizationQubit::new(self.ancilla_theta, self.ancilla_phi)
    }

    pub fn apply_sbs(&self, cfg: &SbsConfig) -> Result<SbsConfig> {
        self.validate()?;
        Ok(SbsConfig {
            overlap_s: self.overlap_s,
            residual_phase: self.residual_phase,
            ancilla: self.ancilla()?,
            ..cfg.clone()
        })
    }

    /// The hybrid setup has no free-space splitter output to carry a
    /// residual phase, so a nonzero one is rejected.
    pub fn apply_hybrid(&self, cfg: &HybridConfig) -> Result<HybridConfig> {
        self.validate()?;
        if self.residual_phase != 0.0 {
            return Err(Error::OutOfRange {
                name: "residual_phase",
                value: self.residual_phase,
                range: "0 for the hybrid setup",
            });
        }
        Ok(HybridConfig {
            overlap_s: self.overlap_s,
            ancilla: self.ancilla()?,
            ..cfg.clone()
        })
    }
}

pub fn run_with_overlap<C: Cloner>(
    cloner: &C,
    input: &PolarizationQubit,
    s: f64,
) -> Result<CloningOutcome> {
    cloner.with_overlap(s)?.run(input)
}

/// Replaces the ancilla by `cos(θ/2)|V⟩ + e^{iφ} sin(θ/2)|H⟩`.
pub fn apply_ancilla_offset<C: Cloner>(cloner: &C, theta: f64, phi: f64) -> Result<C> {
    Ok(cloner.with_ancilla(PolarizationQubit::new(theta, phi)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomPoint {
    pub s: f64,
    pub coincidence: f64,
}

/// Coincidence probability of two `V` photons on a splitter of reflectance
/// `r` with overlap `s`, by simulation.
pub fn hom_coincidence(r: f64, s: f64) -> Result<f64> {
    check_range("overlap_s", s, 0.0, 1.0, "[0, 1]")?;
    let modes = ModeSet::two_arm(2);
    let v = PolarizationQubit::vertical();
    let state = TwoPhotonState::product_state(
        &Photon::new(v, Arm(0)),
        &Photon::new(v, Arm(1)).with_overlap(s)?,
        &modes,
    )?;
    let out = state.apply_element(&beam_splitter(r, (Arm(0), Arm(1)))?)?;
    Ok(out.project(|a, b| a.arm != b.arm).norm_sqr())
}

/// `s²(1−2R)² + (1−s²)(R² + T²)`.
pub fn hom_coincidence_closed_form(r: f64, s: f64) -> f64 {
    let t = 1.0 - r;
    s * s * (1.0 - 2.0 * r).powi(2) + (1.0 - s * s) * (r * r + t * t)
}

pub fn hom_dip_curve(r: f64, s_grid: &[f64]) -> Result<Vec<HomPoint>> {
    s_grid
        .iter()
        .map(|&s| {
            Ok(HomPoint {
                s,
                coincidence: hom_coincidence(r, s)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapFit {
    pub s: f64,
    /// Squared error `(F1 − m1)² + (F2 − m2)²` at `s`.
    pub residual: f64,
    /// The minimum sits on an end of `[0, 1]` rather than inside it.
    pub at_boundary: bool,
}

/// Equator-scan mean fidelities of `cloner` with overlap `s`.
pub fn scan_mean_at_overlap<C: Cloner>(cloner: &C, s: f64) -> Result<FidelityPair> {
    Ok(equator_scan(&cloner.with_overlap(s)?)?.mean)
}

/// Golden-section estimate of the overlap that best reproduces `measured`
/// equator-mean fidelities.
pub fn fit_overlap<C: Cloner>(measured: FidelityPair, cloner: &C) -> Result<OverlapFit> {
    check_range("F1", measured.f1, 0.0, 1.0, "[0, 1]")?;
    check_range("F2", measured.f2, 0.0, 1.0, "[0, 1]")?;
    let objective = |s: f64| -> Result<f64> {
        let f = scan_mean_at_overlap(cloner, s)?;
        Ok((f.f1 - measured.f1).powi(2) + (f.f2 - measured.f2).powi(2))
    };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    while b - a > OVERLAP_TOLERANCE {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d)?;
        }
    }
    let (s, residual) = if fc < fd { (c, fc) } else { (d, fd) };
    for edge in [0.0, 1.0] {
        if (s - edge).abs() <= OVERLAP_TOLERANCE {
            let at_edge = objective(edge)?;
            if at_edge <= residual {
                return Ok(OverlapFit {
                    s: edge,
                    residual: at_edge,
                    at_boundary: true,
                });
            }
        }
    }
    Ok(OverlapFit {
        s,
        residual,
        at_boundary: false,
    })
}

/// Joint fit `F_i(φ) = a_i + A_i cos(φ − φ0)` with one shared `φ0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSinusoid {
    pub offsets: [f64; 2],
    /// Signed amplitudes; the shared maximum is at `φ0` when both are
    /// positive.
    pub amplitudes: [f64; 2],
    pub phase: f64,
    /// Root-mean-square residual over all points of both sequences.
    pub rms_residual: f64,
}

fn fit_fixed_phase(phis: &[f64], values: &[f64], phase: f64) -> (f64, f64, f64) {
    let n = phis.len() as f64;
    let x: Vec<f64> = phis.iter().map(|p| (p - phase).cos()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x
        .iter()
        .zip(values)
        .map(|(xi, yi)| (xi - mx) * (yi - my))
        .sum();
    let amp = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let offset = my - amp * mx;
    let ssr = x
        .iter()
        .zip(values)
        .map(|(xi, yi)| (yi - offset - amp * xi).powi(2))
        .sum();
    (offset, amp, ssr)
}

pub fn fit_joint_sinusoid(phis: &[f64], f1: &[f64], f2: &[f64]) -> Result<JointSinusoid> {
    if phis.len() < 3 || f1.len() != phis.len() || f2.len() != phis.len() {
        return Err(Error::ZeroCount("sinusoid samples"));
    }
    let total =
        |phase: f64| fit_fixed_phase(phis, f1, phase).2 + fit_fixed_phase(phis, f2, phase).2;
    // signed amplitudes make the objective π-periodic in the phase
    let steps = 3600;
    let step = std::f64::consts::PI / steps as f64;
    let best = (0..steps)
        .map(|i| i as f64 * step)
        .min_by(|x, y| total(*x).total_cmp(&total(*y)))
        .unwrap_or(0.0);
    let (mut a, mut b) = (best - step, best + step);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-12 {
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if total(c) < total(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let mut phase = 0.5 * (a + b);
    let (mut o1, mut a1, ss1) = fit_fixed_phase(phis, f1, phase);
    let (mut o2, mut a2, ss2) = fit_fixed_phase(phis, f2, phase);
    if a1 + a2 < 0.0 {
        phase += std::f64::consts::PI;
        a1 = -a1;
        a2 = -a2;
        o1 = fit_fixed_phase(phis, f1, phase).0;
        o2 = fit_fixed_phase(phis, f2, phase).0;
    }
    let phase = crate::state::wrap_phase(phase);
    Ok(JointSinusoid {
        offsets: [o1, o2],
        amplitudes: [a1, a2],
        phase,
        rms_residual: ((ss1 + ss2) / (2 * phis.len()) as f64).sqrt(),
    })
}

/// Peak-to-peak spread of each fidelity across the equator scan.
pub fn scan_oscillation<C: Cloner>(cloner: &C) -> Result<FidelityPair> {
    let scan = equator_scan(cloner)?;
    let spread = |f: fn(&crate::cloner::ScanRow) -> f64| {
        let (lo, hi) = scan
            .rows
            .iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    };
    Ok(FidelityPair::new(spread(|r| r.f1), spread(|r| r.f2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloner::{coincidence_probability, equator_phases};

    #[test]
    fn hom_dip_limits() {
        assert!(hom_coincidence(0.5, 1.0).unwrap().abs() < 1e-12);
        assert!((hom_coincidence(0.5, 0.0).unwrap() - 0.5).abs() < 1e-12);
        let p = hom_coincidence(0.509, 1.0).unwrap();
        assert!((p - (2.0 * 0.509 - 1.0f64).powi(2)).abs() < 1e-12);
        for s in [0.0, 0.3, 0.77, 1.0] {
            for r in [0.2, 0.5, 0.9] {
                let sim = hom_coincidence(r, s).unwrap();
                assert!((sim - hom_coincidence_closed_form(r, s)).abs() < 1e-12);
            }
        }
        let curve = hom_dip_curve(0.5, &[0.0, 0.5, 1.0]).unwrap();
        assert!((curve[1].coincidence - 0.375).abs() < 1e-12);
        assert!(hom_coincidence(0.5, 1.2).is_err());
    }

    #[test]
    fn full_overlap_reproduces_ideal_run() {
        let cfg = SbsConfig::for_asymmetry(0.6, 0.758, 0.179).unwrap();
        let psi = PolarizationQubit::equatorial(0.7);
        let a = cfg.run(&psi).unwrap();
        let b = run_with_overlap(&cfg, &psi, 1.0).unwrap();
        assert!((a.f1 - b.f1).abs() < 1e-12 && (a.f2 - b.f2).abs() < 1e-12);
        assert!((a.p_succ - b.p_succ).abs() < 1e-12);
    }

    #[test]
    fn two_bin_embedding_matches_single_bin() {
        let psi = PolarizationQubit::equatorial(1.1);
        let anc = PolarizationQubit::new(0.4, 0.2).unwrap();
        let bs = crate::elements::pol_beam_splitter(0.758, 0.179, (Arm(0), Arm(1))).unwrap();
        let evolve = |modes: &ModeSet| {
            let a = Photon::new(anc, Arm(1)).with_overlap(1.0).unwrap();
            TwoPhotonState::product_state(&Photon::new(psi, Arm(0)), &a, modes)
                .unwrap()
                .apply_element(&bs)
                .unwrap()
        };
        let one = evolve(&ModeSet::two_arm(1));
        let two = evolve(&ModeSet::two_arm(2));
        assert_eq!(two.dim(), 36);
        assert!((one.norm_sqr() - two.norm_sqr()).abs() < 1e-12);
        for (a, b, amp) in one.components() {
            assert!((two.amplitude_of_pair(&a, &b).unwrap() - amp).norm() < 1e-12);
        }
    }

    #[test]
    fn bin_traced_rates_account_for_full_norm() {
        let cfg = SbsConfig::ideal_symmetric().with_overlap(0.6).unwrap();
        let psi = PolarizationQubit::equatorial(0.2);
        let out = cfg.run(&psi).unwrap();
        assert_eq!(out.postselected_state.dim(), 36);
        assert!((out.c_sum() - out.p_succ).abs() < 1e-12);
        let p = coincidence_probability(&out.postselected_state, cfg.arms());
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_fit_recovers_planted_value() {
        let cfg = SbsConfig::ideal_symmetric();
        let planted = scan_mean_at_overlap(&cfg, 0.9).unwrap();
        let fit = fit_overlap(planted, &cfg).unwrap();
        assert!((fit.s - 0.9).abs() < 1e-4);
        assert!(!fit.at_boundary);
        let ideal = FidelityPair::new(0.853_553_390_593_273_8, 0.853_553_390_593_273_8);
        let fit = fit_overlap(ideal, &cfg).unwrap();
        assert_eq!(fit.s, 1.0);
        assert!(fit.at_boundary && fit.residual < 1e-20);
    }

    #[test]
    fn ancilla_offset() {
        let cfg = SbsConfig::ideal_symmetric();
        assert_eq!(apply_ancilla_offset(&cfg, 0.0, 0.0).unwrap(), cfg);
        let tilted = apply_ancilla_offset(&cfg, 0.15, 0.0).unwrap();
        assert!((tilted.ancilla.theta() - 0.15).abs() < 1e-15);
        let osc = scan_oscillation(&tilted).unwrap();
        assert!(osc.f1 > 1e-3);
    }

    #[test]
    fn sinusoid_fit_is_exact_on_sinusoids() {
        let phis: Vec<f64> = equator_phases().map(|(_, p)| p).collect();
        let f1: Vec<f64> = phis.iter().map(|p| 0.8 + 0.05 * (p - 0.3).cos()).collect();
        let f2: Vec<f64> = phis.iter().map(|p| 0.7 + 0.02 * (p - 0.3).cos()).collect();
        let fit = fit_joint_sinusoid(&phis, &f1, &f2).unwrap();
        assert!((fit.phase - 0.3).abs() < 1e-9);
        assert!((fit.amplitudes[0] - 0.05).abs() < 1e-9);
        assert!((fit.offsets[1] - 0.7).abs() < 1e-9);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn params_apply() {
        let p = ImperfectionParams {
            overlap_s: 0.8,
            residual_phase: 0.1,
            ancilla_theta: 0.2,
            ancilla_phi: 0.0,
        };
        let sbs = p.apply_sbs(&SbsConfig::ideal_symmetric()).unwrap();
        assert_eq!(sbs.overlap_s, 0.8);
        assert_eq!(sbs.residual_phase, 0.1);
        assert!(p.apply_hybrid(&HybridConfig::new(0.5, 0.5)).is_err());
        let p = ImperfectionParams {
            residual_phase: 0.0,
            ..p
        };
        assert_eq!(
            p.apply_hybrid(&HybridConfig::new(0.5, 0.5))
                .unwrap()
                .overlap_s,
            0.8
        );
        assert!(ImperfectionParams {
            overlap_s: 2.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
