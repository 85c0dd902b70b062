//! Closed-form cloning fidelities, the filter-ratio solvers for both setups
//! and their success probabilities.
//!
//! Transmittance ratios are intensity ratios `Σ = (t_V / t_H)²` of a filter's
//! amplitude transmittances. `Σ_η` belongs to the filter in front of the
//! `η` plate pair and `Σ_ν` to the `ν` pair; which clone each one sits on is
//! fixed by the setup (see [`crate::cloner`]).

use crate::elements::FilterAmplitudes;
use crate::error::{check_range, Error, Result};

/// Smallest `|2R_V − 1|` the special-splitter solver accepts.
pub const SPLITTER_SINGULARITY: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPair {
    pub f1: f64,
    pub f2: f64,
}

impl FidelityPair {
    pub fn new(f1: f64, f2: f64) -> Self {
        Self { f1, f2 }
    }

    /// `(2F1 − 1)² + (2F2 − 1)²`, equal to one on the optimal
    /// phase-covariant frontier.
    pub fn frontier_radius_sqr(&self) -> f64 {
        (2.0 * self.f1 - 1.0).powi(2) + (2.0 * self.f2 - 1.0).powi(2)
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.f2, self.f1)
    }
}

/// Optimal asymmetric phase-covariant fidelities for asymmetry `q`.
pub fn pc_fidelities(q: f64) -> Result<FidelityPair> {
    check_range("q", q, 0.0, 1.0, "[0, 1]")?;
    Ok(FidelityPair::new(
        0.5 * (1.0 + (1.0 - q).sqrt()),
        0.5 * (1.0 + q.sqrt()),
    ))
}

/// Optimal asymmetric universal-cloner fidelities for asymmetry `p`.
pub fn universal_fidelities(p: f64) -> Result<FidelityPair> {
    check_range("p", p, 0.0, 1.0, "[0, 1]")?;
    let denom = 2.0 * (1.0 - p + p * p);
    Ok(FidelityPair::new(
        1.0 - (1.0 - p).powi(2) / denom,
        1.0 - p * p / denom,
    ))
}

/// Splitting ratios of the special beam splitter that clones symmetrically
/// without any filtering: `R_V = (1 + 1/√3)/2`, `R_H = 1 − R_V`.
pub fn ideal_sbs_reflectances() -> (f64, f64) {
    let r_v = 0.5 * (1.0 + 1.0 / 3f64.sqrt());
    (r_v, 1.0 - r_v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetupKind {
    Sbs,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSettings {
    pub q: f64,
    pub sigma_eta: f64,
    pub sigma_nu: f64,
    /// True when the nominal plate orientations suffice. For the special
    /// splitter that is `η` attenuating V (`Σ_η ≤ 1`) and `ν` attenuating H
    /// (`Σ_ν ≥ 1`). The hybrid setup fixes only `η` (`Σ_η ≤ 1`); its `ν`
    /// plates serve either polarization.
    pub feasible: bool,
}

impl FilterSettings {
    fn sbs(q: f64, sigma_eta: f64, sigma_nu: f64) -> Self {
        Self {
            q,
            sigma_eta,
            sigma_nu,
            feasible: sigma_eta <= 1.0 && sigma_nu >= 1.0,
        }
    }

    fn hybrid(q: f64, sigma_eta: f64, sigma_nu: f64) -> Self {
        Self {
            q,
            sigma_eta,
            sigma_nu,
            feasible: sigma_eta <= 1.0,
        }
    }

    /// Filter amplitudes with each favored polarization transmitted fully.
    pub fn ideal_amplitudes(&self) -> Result<(FilterAmplitudes, FilterAmplitudes)> {
        Ok((
            FilterAmplitudes::from_ratio(self.sigma_eta, 1.0)?,
            FilterAmplitudes::from_ratio(self.sigma_nu, 1.0)?,
        ))
    }
}

fn check_open_q(q: f64) -> Result<()> {
    check_range("q", q, 0.0, 1.0, "(0, 1)")?;
    if q == 0.0 || q == 1.0 {
        return Err(Error::InfiniteRatio(q));
    }
    Ok(())
}

fn check_reflectances(r_v: f64, r_h: f64) -> Result<()> {
    check_range("R_V", r_v, 0.0, 1.0, "[0, 1]")?;
    check_range("R_H", r_h, 0.0, 1.0, "[0, 1]")
}

/// Filter ratios that turn the special-beam-splitter setup into the optimal
/// asymmetric cloner:
/// `Σ_η = R_V R_H / ((2R_V − 1)² q)`,
/// `Σ_ν = (1 − R_V)(1 − R_H) / ((2R_V − 1)² (1 − q))`.
pub fn sbs_filter_settings(q: f64, r_v: f64, r_h: f64) -> Result<FilterSettings> {
    check_reflectances(r_v, r_h)?;
    if (2.0 * r_v - 1.0).abs() < SPLITTER_SINGULARITY {
        return Err(Error::SingularSplitter(r_v));
    }
    check_open_q(q)?;
    let contrast = (2.0 * r_v - 1.0).powi(2);
    Ok(FilterSettings::sbs(
        q,
        r_v * r_h / (contrast * q),
        (1.0 - r_v) * (1.0 - r_h) / (contrast * (1.0 - q)),
    ))
}

/// Filter ratios for the fiber-coupler setup:
/// `Σ_η = (R_H/R_V) / (4(1 − q))`,
/// `Σ_ν = R_V(1 − R_H) / (R_H(1 − R_V)) · (1 − q)/q`.
pub fn hybrid_filter_settings(q: f64, r_v: f64, r_h: f64) -> Result<FilterSettings> {
    check_reflectances(r_v, r_h)?;
    for (name, value) in [("R_V", r_v), ("R_H", r_h)] {
        if value == 0.0 || value == 1.0 {
            return Err(Error::OutOfRange {
                name,
                value,
                range: "(0, 1)",
            });
        }
    }
    check_open_q(q)?;
    Ok(FilterSettings::hybrid(
        q,
        r_h / r_v / (4.0 * (1.0 - q)),
        r_v * (1.0 - r_h) / (r_h * (1.0 - r_v)) * (1.0 - q) / q,
    ))
}

/// `P = η_V² ν_V² (r_V² − t_V²)²` with filters set for asymmetry `q`.
///
/// `eta_favored` and `nu_favored` are the absolute amplitude transmittances
/// of each filter's favored polarization (1 for ideal filters).
pub fn sbs_success(q: f64, r_v: f64, r_h: f64, eta_favored: f64, nu_favored: f64) -> Result<f64> {
    let settings = sbs_filter_settings(q, r_v, r_h)?;
    let eta = FilterAmplitudes::from_ratio(settings.sigma_eta, eta_favored)?;
    let nu = FilterAmplitudes::from_ratio(settings.sigma_nu, nu_favored)?;
    Ok(sbs_success_from_amplitudes(r_v, eta.t_v, nu.t_v))
}

/// Success probability of the special-splitter setup given the filters'
/// absolute V amplitudes.
pub fn sbs_success_from_amplitudes(r_v: f64, eta_v: f64, nu_v: f64) -> f64 {
    (eta_v * nu_v * (2.0 * r_v - 1.0)).powi(2)
}

/// `P = (2 r t η_V² t_V r_V ν_V)²` with filters set for asymmetry `q`.
pub fn hybrid_success(
    q: f64,
    r_fc: f64,
    r_v: f64,
    r_h: f64,
    eta_favored: f64,
    nu_favored: f64,
) -> Result<f64> {
    check_range("R_fc", r_fc, 0.0, 1.0, "[0, 1]")?;
    let settings = hybrid_filter_settings(q, r_v, r_h)?;
    let eta = FilterAmplitudes::from_ratio(settings.sigma_eta, eta_favored)?;
    let nu = FilterAmplitudes::from_ratio(settings.sigma_nu, nu_favored)?;
    Ok(hybrid_success_from_amplitudes(r_fc, r_v, eta.t_v, nu.t_v))
}

pub fn hybrid_success_from_amplitudes(r_fc: f64, r_v: f64, eta_v: f64, nu_v: f64) -> f64 {
    let rt = (r_fc * (1.0 - r_fc)).sqrt();
    let tv_rv = (r_v * (1.0 - r_v)).sqrt();
    (2.0 * rt * eta_v * eta_v * tv_rv * nu_v).powi(2)
}

/// Interval of asymmetries reachable with a given filter capability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRange {
    Empty,
    Interval { lo: f64, hi: f64 },
}

impl QRange {
    pub fn contains(&self, q: f64) -> bool {
        match *self {
            QRange::Empty => false,
            QRange::Interval { lo, hi } => q >= lo && q <= hi,
        }
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.contains(lo) && self.contains(hi)
    }

    fn intersect(self, lo: f64, hi: f64) -> Self {
        match self {
            QRange::Empty => QRange::Empty,
            QRange::Interval { lo: a, hi: b } => {
                let (lo, hi) = (a.max(lo), b.min(hi));
                if lo <= hi {
                    QRange::Interval { lo, hi }
                } else {
                    QRange::Empty
                }
            }
        }
    }
}

/// Asymmetries `q ∈ (0, 1)` for which both filter ratios lie within
/// `[max_attenuation, 1/max_attenuation]`. A capability of `0` means
/// unlimited filters.
pub fn feasible_q_range(
    kind: SetupKind,
    r_v: f64,
    r_h: f64,
    max_attenuation: f64,
) -> Result<QRange> {
    check_range("max_attenuation", max_attenuation, 0.0, 1.0, "[0, 1)")?;
    if max_attenuation == 1.0 {
        return Err(Error::OutOfRange {
            name: "max_attenuation",
            value: max_attenuation,
            range: "[0, 1)",
        });
    }
    check_reflectances(r_v, r_h)?;
    let m = max_attenuation;
    let full = QRange::Interval { lo: 0.0, hi: 1.0 };
    // Bounds are open at 0 and 1 for unlimited filters; the division by
    // m = 0 yields inf which the clamps absorb.
    let range = match kind {
        SetupKind::Sbs => {
            if (2.0 * r_v - 1.0).abs() < SPLITTER_SINGULARITY {
                return Err(Error::SingularSplitter(r_v));
            }
            let contrast = (2.0 * r_v - 1.0).powi(2);
            let a = r_v * r_h / contrast;
            let b = (1.0 - r_v) * (1.0 - r_h) / contrast;
            // m ≤ a/q ≤ 1/m and m ≤ b/(1−q) ≤ 1/m
            full.intersect(a * m, a / m)
                .intersect(1.0 - b / m, 1.0 - b * m)
        }
        SetupKind::Hybrid => {
            let c = r_h / (4.0 * r_v);
            let d = r_v * (1.0 - r_h) / (r_h * (1.0 - r_v));
            // m ≤ c/(1−q) ≤ 1/m and m ≤ d(1−q)/q ≤ 1/m
            let upper_nu = if m == 0.0 { 1.0 } else { d / (m + d) };
            let lower_nu = d * m / (1.0 + d * m);
            full.intersect(1.0 - c / m, 1.0 - c * m)
                .intersect(lower_nu, upper_nu)
        }
    };
    Ok(range)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SBS_MEASURED: (f64, f64) = (0.758, 0.179);
    const HYB_MEASURED: (f64, f64) = (0.509, 0.466);

    #[test]
    fn phase_covariant_examples() {
        let sym = pc_fidelities(0.5).unwrap();
        assert!((sym.f1 - 0.853_553_390_593_273_8).abs() < 1e-15);
        assert_eq!(sym.f1, sym.f2);
        assert_eq!(pc_fidelities(1.0).unwrap(), FidelityPair::new(0.5, 1.0));
        let f = pc_fidelities(0.93).unwrap();
        assert!((f.f2 - 0.982_182_538_0).abs() < 1e-9);
        assert!((f.f1 - 0.632_287_565_6).abs() < 1e-9);
        assert!(pc_fidelities(1.01).is_err());
        assert!(pc_fidelities(-0.01).is_err());
    }

    #[test]
    fn universal_examples() {
        let sym = universal_fidelities(0.5).unwrap();
        assert!((sym.f1 - 5.0 / 6.0).abs() < 1e-15);
        assert!((sym.f2 - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(
            universal_fidelities(0.0).unwrap(),
            FidelityPair::new(0.5, 1.0)
        );
        assert!(universal_fidelities(2.0).is_err());
    }

    #[test]
    fn frontier_identity_and_exchange_symmetry() {
        for k in 0..=1000 {
            let q = k as f64 / 1000.0;
            let f = pc_fidelities(q).unwrap();
            assert!((f.frontier_radius_sqr() - 1.0).abs() < 1e-12);
            assert_eq!(f.f1, pc_fidelities(1.0 - q).unwrap().f2);
        }
    }

    #[test]
    fn ideal_splitter_needs_no_filters_when_symmetric() {
        let (r_v, r_h) = ideal_sbs_reflectances();
        assert!((r_v - 0.788_675).abs() < 1e-6);
        let s = sbs_filter_settings(0.5, r_v, r_h).unwrap();
        assert!((s.sigma_eta - 1.0).abs() < 1e-12);
        assert!((s.sigma_nu - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sbs_settings_measured_splitter() {
        let (r_v, r_h) = SBS_MEASURED;
        let s = sbs_filter_settings(0.93, r_v, r_h).unwrap();
        assert!((s.sigma_eta - 0.548).abs() < 5e-4);
        assert!((1.0 / s.sigma_nu - 0.094).abs() < 5e-4);
        assert!(s.feasible);
        let s = sbs_filter_settings(0.51, r_v, r_h).unwrap();
        assert!((s.sigma_eta - 1.00).abs() < 5e-3);
        assert!((1.0 / s.sigma_nu - 0.66).abs() < 5e-3);
        let k = sbs_filter_settings(0.2, r_v, r_h).unwrap().sigma_eta * 0.2;
        for q in [0.1, 0.4, 0.77] {
            let s = sbs_filter_settings(q, r_v, r_h).unwrap();
            assert!((s.sigma_eta * q - k).abs() < 1e-12);
        }
    }

    #[test]
    fn sbs_settings_errors() {
        assert_eq!(
            sbs_filter_settings(0.5, 0.5, 0.3),
            Err(Error::SingularSplitter(0.5))
        );
        assert_eq!(
            sbs_filter_settings(0.0, 0.758, 0.179),
            Err(Error::InfiniteRatio(0.0))
        );
        assert_eq!(
            sbs_filter_settings(1.0, 0.758, 0.179),
            Err(Error::InfiniteRatio(1.0))
        );
    }

    #[test]
    fn hybrid_settings_examples() {
        let (r_v, r_h) = HYB_MEASURED;
        let s = hybrid_filter_settings(0.75, r_v, r_h).unwrap();
        assert!((s.sigma_nu - 0.396).abs() < 5e-4);
        assert!((s.sigma_eta - 0.9155).abs() < 5e-4);
        assert!(s.feasible);
        assert!(!hybrid_filter_settings(0.8, r_v, r_h).unwrap().feasible);
        let s = hybrid_filter_settings(0.5, r_v, r_h).unwrap();
        assert!((s.sigma_nu - 1.188).abs() < 5e-4);
        let s = hybrid_filter_settings(0.75, 0.5, 0.5).unwrap();
        assert!((s.sigma_eta - 1.0).abs() < 1e-12);
        assert!(hybrid_filter_settings(1.0, r_v, r_h).is_err());
    }

    #[test]
    fn success_probabilities() {
        let (r_v, r_h) = ideal_sbs_reflectances();
        assert!((sbs_success(0.5, r_v, r_h, 1.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let hyb = hybrid_success(0.5, 0.5, 0.5, 0.5, 1.0, 1.0).unwrap();
        assert!((hyb - 1.0 / 16.0).abs() < 1e-12);
        assert!(hyb < 1.0 / 3.0);
    }

    #[test]
    fn sbs_success_falls_off_with_asymmetry() {
        let (r_v, r_h) = ideal_sbs_reflectances();
        let p = |q: f64| sbs_success(q, r_v, r_h, 1.0, 1.0).unwrap();
        for k in 1..50 {
            let q = 0.5 + k as f64 / 100.0;
            assert!(p(q) < p(q - 0.01) + 1e-15);
            assert!(p(1.0 - q) < p(1.01 - q) + 1e-15);
        }
    }

    /// Oracle: scan a fine q grid and check both ratios against the bounds.
    fn brute_force_range(kind: SetupKind, r_v: f64, r_h: f64, m: f64) -> Option<(f64, f64)> {
        let ok = |q: f64| {
            let s = match kind {
                SetupKind::Sbs => sbs_filter_settings(q, r_v, r_h),
                SetupKind::Hybrid => hybrid_filter_settings(q, r_v, r_h),
            }
            .unwrap();
            let within = |x: f64| x >= m && x <= 1.0 / m;
            within(s.sigma_eta) && within(s.sigma_nu)
        };
        let grid: Vec<f64> = (1..100_000).map(|k| k as f64 / 100_000.0).collect();
        let inside: Vec<f64> = grid.into_iter().filter(|&q| ok(q)).collect();
        Some((*inside.first()?, *inside.last()?))
    }

    #[test]
    fn feasible_range_matches_grid_scan() {
        for (kind, (r_v, r_h)) in [
            (SetupKind::Sbs, SBS_MEASURED),
            (SetupKind::Hybrid, HYB_MEASURED),
        ] {
            for m in [0.05, 0.2, 0.39, 0.6, 0.9] {
                let range = feasible_q_range(kind, r_v, r_h, m).unwrap();
                match (range, brute_force_range(kind, r_v, r_h, m)) {
                    (QRange::Interval { lo, hi }, Some((a, b))) => {
                        assert!(
                            (lo - a).abs() < 2e-5 && (hi - b).abs() < 2e-5,
                            "{kind:?} {m}"
                        );
                    }
                    (QRange::Empty, None) => {}
                    (r, b) => panic!("{kind:?} {m}: {r:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn unlimited_filters_reach_everything() {
        for kind in [SetupKind::Sbs, SetupKind::Hybrid] {
            let range = feasible_q_range(kind, 0.758, 0.179, 0.0).unwrap();
            assert_eq!(range, QRange::Interval { lo: 0.0, hi: 1.0 });
        }
    }

    #[test]
    fn capability_windows_for_measured_setups() {
        let (r_v, r_h) = HYB_MEASURED;
        let hyb = feasible_q_range(SetupKind::Hybrid, r_v, r_h, 0.39).unwrap();
        assert!(hyb.covers(0.50, 0.75));
        let (r_v, r_h) = SBS_MEASURED;
        // q = 0.93 needs Σ_ν⁻¹ = 0.0938
        let sbs = feasible_q_range(SetupKind::Sbs, r_v, r_h, 0.093).unwrap();
        assert!(sbs.covers(0.51, 0.93));
        let tight = feasible_q_range(SetupKind::Sbs, r_v, r_h, 0.094).unwrap();
        assert!(!tight.contains(0.93) && tight.contains(0.929));
    }
}
