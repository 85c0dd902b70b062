//! End-to-end models of the two cloning setups.
//!
//! Both setups start from the product of a signal photon in arm 0 and an
//! ancilla photon in arm 1 and finish with coincidence postselection (one
//! photon per output arm) followed by projective polarization analysis of
//! each clone in the `{ψ, ψ⊥}` basis of the input state.
//!
//! Special beam splitter (SBS): the photons interfere on an unbalanced,
//! polarization-dependent splitter. Clone 1 leaves in arm 0, where the
//! signal is transmitted, behind the `ν` plates; clone 2 leaves in arm 1
//! behind the `η` plates. The `−t_V t_H` amplitude of the splitter flips the
//! sign of one clone's coherence; the analysis frame of that clone carries a
//! fixed π phase to undo it.
//!
//! Hybrid: a fiber coupler bunches the photons; both must leave through the
//! upper fiber (arm 1). The `η` plates filter that common beam, a bulk
//! splitter divides it into arm 0 (reflected, clone 1) and arm 1
//! (transmitted, clone 2), and the `ν` plates filter clone 2.
//!
//! All probabilities are per input pair.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::elements::{
    beam_splitter, phase_shifter, pol_beam_splitter, FilterAmplitudes, OpticalElement,
};
use crate::error::{check_range, Error, Result};
use crate::state::{Arm, ModeLabel, ModeSet, Photon, PolarizationQubit, TwoPhotonState};
use crate::theory::{
    hybrid_filter_settings, ideal_sbs_reflectances, sbs_filter_settings, FidelityPair,
};

/// Amplitudes below this are treated as zero.
pub const ZERO_AMPLITUDE: f64 = 1e-10;

const SIGNAL_ARM: Arm = Arm(0);
const ANCILLA_ARM: Arm = Arm(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CloneArms {
    pub first: Arm,
    pub second: Arm,
}

/// Unit-norm postselected two-clone state and the probability of getting it.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonerOutput {
    pub state: TwoPhotonState,
    pub p_succ: f64,
    pub arms: CloneArms,
}

/// Conditional coincidence rates; `pm` is clone 1 found in `ψ` and clone 2
/// in `ψ⊥`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceRates {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl CoincidenceRates {
    pub fn sum(&self) -> f64 {
        self.pp + self.pm + self.mp + self.mm
    }

    /// `F1 = (C++ + C+−)/C_sum`, `F2 = (C++ + C−+)/C_sum`.
    pub fn fidelities(&self) -> FidelityPair {
        let sum = self.sum();
        FidelityPair::new((self.pp + self.pm) / sum, (self.pp + self.mp) / sum)
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            pp: self.pp * k,
            pm: self.pm * k,
            mp: self.mp * k,
            mm: self.mm * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloningOutcome {
    /// Absolute coincidence probabilities per input pair.
    pub c_pp: f64,
    pub c_pm: f64,
    pub c_mp: f64,
    pub c_mm: f64,
    pub f1: f64,
    pub f2: f64,
    pub p_succ: f64,
    pub postselected_state: TwoPhotonState,
}

impl CloningOutcome {
    pub fn c_sum(&self) -> f64 {
        self.c_pp + self.c_pm + self.c_mp + self.c_mm
    }

    pub fn fidelities(&self) -> FidelityPair {
        FidelityPair::new(self.f1, self.f2)
    }
}

/// A cloning setup that can be run on a signal polarization.
pub trait Cloner {
    /// Postselected output before polarization analysis.
    fn output(&self, input: &PolarizationQubit) -> Result<ClonerOutput>;

    fn overlap(&self) -> f64;

    fn with_overlap(&self, s: f64) -> Result<Self>
    where
        Self: Sized;

    fn ancilla(&self) -> PolarizationQubit;

    fn with_ancilla(&self, ancilla: PolarizationQubit) -> Self
    where
        Self: Sized;

    fn run(&self, input: &PolarizationQubit) -> Result<CloningOutcome> {
        let out = self.output(input)?;
        Ok(analyze(out, input))
    }
}

fn analyze(out: ClonerOutput, psi: &PolarizationQubit) -> CloningOutcome {
    let rates = coincidence_rates(&out.state, psi, out.arms);
    let fid = rates.fidelities();
    let abs = rates.scaled(out.p_succ);
    CloningOutcome {
        c_pp: abs.pp,
        c_pm: abs.pm,
        c_mp: abs.mp,
        c_mm: abs.mm,
        f1: fid.f1,
        f2: fid.f2,
        p_succ: out.p_succ,
        postselected_state: out.state,
    }
}

/// Keeps the components with one photon in each of `arms` and renormalizes.
/// Returns the state and the probability of the projection.
pub fn coincidence_project(
    state: &TwoPhotonState,
    arms: CloneArms,
) -> Result<(TwoPhotonState, f64)> {
    let projected = coincidence_part(state, arms);
    let p = projected.norm_sqr();
    if p < ZERO_AMPLITUDE * ZERO_AMPLITUDE {
        return Err(Error::DegenerateOutcome);
    }
    let (unit, _) = projected.normalize()?;
    Ok((unit, p))
}

/// Probability that `state` has one photon in each of `arms`; zero allowed.
pub fn coincidence_probability(state: &TwoPhotonState, arms: CloneArms) -> f64 {
    coincidence_part(state, arms).norm_sqr()
}

fn coincidence_part(state: &TwoPhotonState, arms: CloneArms) -> TwoPhotonState {
    state.project(|a, b| {
        (a.arm == arms.first && b.arm == arms.second)
            || (a.arm == arms.second && b.arm == arms.first)
    })
}

/// Coincidence amplitudes `A[(pol1, bin1)][(pol2, bin2)]` between clone arms.
fn clone_amplitudes(
    state: &TwoPhotonState,
    arms: CloneArms,
) -> Vec<(ModeLabel, ModeLabel, Complex64)> {
    state
        .components()
        .filter_map(|(a, b, amp)| {
            if a.arm == arms.first && b.arm == arms.second {
                Some((a, b, amp))
            } else if a.arm == arms.second && b.arm == arms.first {
                Some((b, a, amp))
            } else {
                None
            }
        })
        .collect()
}

/// Projects clone 1 and clone 2 onto `{ψ, ψ⊥}`, summing over temporal bins.
/// For a unit-norm coincidence state the four rates sum to one.
pub fn coincidence_rates(
    state: &TwoPhotonState,
    psi: &PolarizationQubit,
    arms: CloneArms,
) -> CoincidenceRates {
    let bins = state.modes().bins();
    let basis = [psi.jones(), psi.orthogonal().jones()];
    let comps = clone_amplitudes(state, arms);
    let mut rates = [[0.0f64; 2]; 2];
    for &b1 in &bins {
        for &b2 in &bins {
            for (x, bx) in basis.iter().enumerate() {
                for (y, by) in basis.iter().enumerate() {
                    let amp: Complex64 = comps
                        .iter()
                        .filter(|(m1, m2, _)| m1.bin == b1 && m2.bin == b2)
                        .map(|(m1, m2, a)| {
                            bx[m1.pol.index()].conj() * by[m2.pol.index()].conj() * a
                        })
                        .sum();
                    rates[x][y] += amp.norm_sqr();
                }
            }
        }
    }
    CoincidenceRates {
        pp: rates[0][0],
        pm: rates[0][1],
        mp: rates[1][0],
        mm: rates[1][1],
    }
}

/// Reduced polarization density matrix (in `(H, V)` order) of the photon in
/// `arm`, tracing out the other clone and all temporal bins. Normalized by
/// the coincidence weight.
pub fn reduced_polarization(
    state: &TwoPhotonState,
    arm: Arm,
    arms: CloneArms,
) -> [[Complex64; 2]; 2] {
    let comps = clone_amplitudes(state, arms);
    let other_is_second = arm == arms.first;
    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut weight = 0.0;
    for (i, ci) in comps.iter().enumerate() {
        weight += ci.2.norm_sqr();
        for cj in &comps[i..] {
            let (keep_i, env_i) = if other_is_second {
                (ci.0, ci.1)
            } else {
                (ci.1, ci.0)
            };
            let (keep_j, env_j) = if other_is_second {
                (cj.0, cj.1)
            } else {
                (cj.1, cj.0)
            };
            if env_i != env_j || keep_i.bin != keep_j.bin {
                continue;
            }
            let term = ci.2 * cj.2.conj();
            rho[keep_i.pol.index()][keep_j.pol.index()] += term;
            if !std::ptr::eq(ci, cj) {
                rho[keep_j.pol.index()][keep_i.pol.index()] += term.conj();
            }
        }
    }
    for row in rho.iter_mut() {
        for z in row.iter_mut() {
            *z /= weight;
        }
    }
    rho
}

/// `⟨ψ|ρ|ψ⟩` for the clone in `arm`.
pub fn clone_fidelity(
    state: &TwoPhotonState,
    arm: Arm,
    arms: CloneArms,
    psi: &PolarizationQubit,
) -> f64 {
    let rho = reduced_polarization(state, arm, arms);
    let v = psi.jones();
    let mut f = Complex64::new(0.0, 0.0);
    for p in 0..2 {
        for p2 in 0..2 {
            f += v[p].conj() * rho[p][p2] * v[p2];
        }
    }
    f.re
}

fn modes_for(overlap_s: f64) -> ModeSet {
    ModeSet::two_arm(if overlap_s < 1.0 { 2 } else { 1 })
}

fn input_state(
    input: &PolarizationQubit,
    ancilla: &PolarizationQubit,
    overlap_s: f64,
) -> Result<TwoPhotonState> {
    let modes = modes_for(overlap_s);
    let signal = Photon::new(*input, SIGNAL_ARM);
    let ancilla = Photon::new(*ancilla, ANCILLA_ARM).with_overlap(overlap_s)?;
    TwoPhotonState::product_state(&signal, &ancilla, &modes)
}

fn apply_all(mut state: TwoPhotonState, elements: &[OpticalElement]) -> Result<TwoPhotonState> {
    for e in elements {
        state = state.apply_element(e)?;
    }
    Ok(state)
}

fn check_ratio(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "(0, inf)",
        })
    }
}

/// Special-beam-splitter setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SbsConfig {
    pub r_v: f64,
    pub r_h: f64,
    pub sigma_eta: f64,
    pub sigma_nu: f64,
    /// Absolute amplitude transmittance of the `η` filter's favored
    /// polarization.
    pub eta_favored: f64,
    pub nu_favored: f64,
    /// Extra `H` phase on clone 1 left uncompensated by the analysis optics.
    pub residual_phase: f64,
    pub ancilla: PolarizationQubit,
    pub overlap_s: f64,
}

impl SbsConfig {
    /// Unfiltered splitter with the given reflectances.
    pub fn new(r_v: f64, r_h: f64) -> Self {
        Self {
            r_v,
            r_h,
            sigma_eta: 1.0,
            sigma_nu: 1.0,
            eta_favored: 1.0,
            nu_favored: 1.0,
            residual_phase: 0.0,
            ancilla: PolarizationQubit::vertical(),
            overlap_s: 1.0,
        }
    }

    pub fn ideal_symmetric() -> Self {
        let (r_v, r_h) = ideal_sbs_reflectances();
        Self::new(r_v, r_h)
    }

    /// Ideal filters set for asymmetry `q`.
    pub fn for_asymmetry(q: f64, r_v: f64, r_h: f64) -> Result<Self> {
        let s = sbs_filter_settings(q, r_v, r_h)?;
        Ok(Self {
            sigma_eta: s.sigma_eta,
            sigma_nu: s.sigma_nu,
            ..Self::new(r_v, r_h)
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_range("R_V", self.r_v, 0.0, 1.0, "[0, 1]")?;
        check_range("R_H", self.r_h, 0.0, 1.0, "[0, 1]")?;
        check_ratio("sigma_eta", self.sigma_eta)?;
        check_ratio("sigma_nu", self.sigma_nu)?;
        check_range("eta_favored", self.eta_favored, 0.0, 1.0, "[0, 1]")?;
        check_range("nu_favored", self.nu_favored, 0.0, 1.0, "[0, 1]")?;
        check_range("overlap_s", self.overlap_s, 0.0, 1.0, "[0, 1]")?;
        if !self.residual_phase.is_finite() {
            return Err(Error::OutOfRange {
                name: "residual_phase",
                value: self.residual_phase,
                range: "finite",
            });
        }
        Ok(())
    }

    pub fn arms(&self) -> CloneArms {
        CloneArms {
            first: SIGNAL_ARM,
            second: ANCILLA_ARM,
        }
    }

    pub fn eta_filter(&self) -> Result<FilterAmplitudes> {
        FilterAmplitudes::from_ratio(self.sigma_eta, self.eta_favored)
    }

    pub fn nu_filter(&self) -> Result<FilterAmplitudes> {
        FilterAmplitudes::from_ratio(self.sigma_nu, self.nu_favored)
    }

    /// Elements after the splitter, in order.
    fn output_optics(&self) -> Result<Vec<OpticalElement>> {
        let arms = self.arms();
        // sign of (r_V² − t_V²) decides which clone's coherence is flipped
        let frame = if self.r_v > 0.5 {
            vec![phase_shifter(PI, arms.first)]
        } else if self.r_v < 0.5 {
            vec![phase_shifter(PI, arms.second)]
        } else {
            vec![]
        };
        let mut optics = frame;
        if self.residual_phase != 0.0 {
            optics.push(phase_shifter(self.residual_phase, arms.first));
        }
        optics.push(self.nu_filter()?.element(arms.first)?);
        optics.push(self.eta_filter()?.element(arms.second)?);
        Ok(optics)
    }
}

impl Cloner for SbsConfig {
    fn output(&self, input: &PolarizationQubit) -> Result<ClonerOutput> {
        self.validate()?;
        let arms = self.arms();
        let mut optics = vec![pol_beam_splitter(
            self.r_v,
            self.r_h,
            (SIGNAL_ARM, ANCILLA_ARM),
        )?];
        optics.extend(self.output_optics()?);
        let out = apply_all(input_state(input, &self.ancilla, self.overlap_s)?, &optics)?;
        let (state, p_succ) = coincidence_project(&out, arms)?;
        Ok(ClonerOutput {
            state,
            p_succ,
            arms,
        })
    }

    fn overlap(&self) -> f64 {
        self.overlap_s
    }

    fn with_overlap(&self, s: f64) -> Result<Self> {
        check_range("overlap_s", s, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            overlap_s: s,
            ..self.clone()
        })
    }

    fn ancilla(&self) -> PolarizationQubit {
        self.ancilla
    }

    fn with_ancilla(&self, ancilla: PolarizationQubit) -> Self {
        Self {
            ancilla,
            ..self.clone()
        }
    }
}

/// Fiber-coupler plus bulk-splitter setup.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub r_fc: f64,
    pub r_v: f64,
    pub r_h: f64,
    pub sigma_eta: f64,
    pub sigma_nu: f64,
    pub eta_favored: f64,
    pub nu_favored: f64,
    pub ancilla: PolarizationQubit,
    pub overlap_s: f64,
}

/// The fiber output both photons must share.
const UPPER_FIBER: Arm = Arm(1);

impl HybridConfig {
    pub fn new(r_v: f64, r_h: f64) -> Self {
        Self {
            r_fc: 0.5,
            r_v,
            r_h,
            sigma_eta: 1.0,
            sigma_nu: 1.0,
            eta_favored: 1.0,
            nu_favored: 1.0,
            ancilla: PolarizationQubit::vertical(),
            overlap_s: 1.0,
        }
    }

    /// Ideal filters set for asymmetry `q`.
    pub fn for_asymmetry(q: f64, r_v: f64, r_h: f64) -> Result<Self> {
        let s = hybrid_filter_settings(q, r_v, r_h)?;
        Ok(Self {
            sigma_eta: s.sigma_eta,
            sigma_nu: s.sigma_nu,
            ..Self::new(r_v, r_h)
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_range("R_fc", self.r_fc, 0.0, 1.0, "[0, 1]")?;
        check_range("R_V", self.r_v, 0.0, 1.0, "[0, 1]")?;
        check_range("R_H", self.r_h, 0.0, 1.0, "[0, 1]")?;
        check_ratio("sigma_eta", self.sigma_eta)?;
        check_ratio("sigma_nu", self.sigma_nu)?;
        check_range("eta_favored", self.eta_favored, 0.0, 1.0, "[0, 1]")?;
        check_range("nu_favored", self.nu_favored, 0.0, 1.0, "[0, 1]")?;
        check_range("overlap_s", self.overlap_s, 0.0, 1.0, "[0, 1]")
    }

    pub fn arms(&self) -> CloneArms {
        CloneArms {
            first: Arm(0),
            second: Arm(1),
        }
    }

    pub fn eta_filter(&self) -> Result<FilterAmplitudes> {
        FilterAmplitudes::from_ratio(self.sigma_eta, self.eta_favored)
    }

    pub fn nu_filter(&self) -> Result<FilterAmplitudes> {
        FilterAmplitudes::from_ratio(self.sigma_nu, self.nu_favored)
    }

    /// Probability that both photons leave the coupler through the upper
    /// fiber, and the corresponding sub-normalized state.
    pub fn bunch(&self, input: &PolarizationQubit) -> Result<(TwoPhotonState, f64)> {
        let coupler = beam_splitter(self.r_fc, (SIGNAL_ARM, ANCILLA_ARM))?;
        let out = input_state(input, &self.ancilla, self.overlap_s)?.apply_element(&coupler)?;
        let bunched = out.project(|a, b| a.arm == UPPER_FIBER && b.arm == UPPER_FIBER);
        let p = bunched.norm_sqr();
        Ok((bunched, p))
    }
}

impl Cloner for HybridConfig {
    fn output(&self, input: &PolarizationQubit) -> Result<ClonerOutput> {
        self.validate()?;
        let arms = self.arms();
        let (bunched, p_fc) = self.bunch(input)?;
        if p_fc < ZERO_AMPLITUDE * ZERO_AMPLITUDE {
            return Err(Error::DegenerateOutcome);
        }
        let optics = [
            self.eta_filter()?.element(UPPER_FIBER)?,
            pol_beam_splitter(self.r_v, self.r_h, (arms.first, arms.second))?,
            self.nu_filter()?.element(arms.second)?,
        ];
        let out = apply_all(bunched, &optics)?;
        let (state, p_succ) = coincidence_project(&out, arms)?;
        Ok(ClonerOutput {
            state,
            p_succ,
            arms,
        })
    }

    fn overlap(&self) -> f64 {
        self.overlap_s
    }

    fn with_overlap(&self, s: f64) -> Result<Self> {
        check_range("overlap_s", s, 0.0, 1.0, "[0, 1]")?;
        Ok(Self {
            overlap_s: s,
            ..self.clone()
        })
    }

    fn ancilla(&self) -> PolarizationQubit {
        self.ancilla
    }

    fn with_ancilla(&self, ancilla: PolarizationQubit) -> Self {
        Self {
            ancilla,
            ..self.clone()
        }
    }
}

pub fn run_sbs(input: &PolarizationQubit, cfg: &SbsConfig) -> Result<CloningOutcome> {
    cfg.run(input)
}

pub fn run_hybrid(input: &PolarizationQubit, cfg: &HybridConfig) -> Result<CloningOutcome> {
    cfg.run(input)
}

/// Mean clone fidelities of the twirled cloner: the input gets
/// `U(ϑ) = |V⟩⟨V| + e^{iϑ}|H⟩⟨H|`, both clones get `U(−ϑ)`, and `ϑ` runs
/// over `n_phases` equally spaced values in `[0, 2π)`.
pub fn twirl<C: Cloner>(
    cloner: &C,
    input: &PolarizationQubit,
    n_phases: usize,
) -> Result<FidelityPair> {
    if n_phases == 0 {
        return Err(Error::ZeroCount("n_phases"));
    }
    let (mut f1, mut f2) = (0.0, 0.0);
    for k in 0..n_phases {
        let vartheta = 2.0 * PI * k as f64 / n_phases as f64;
        let out = cloner.output(&input.phase_shifted(vartheta))?;
        let undo = [
            phase_shifter(-vartheta, out.arms.first),
            phase_shifter(-vartheta, out.arms.second),
        ];
        let state = apply_all(out.state, &undo)?;
        let fid = coincidence_rates(&state, input, out.arms).fidelities();
        f1 += fid.f1;
        f2 += fid.f2;
    }
    let n = n_phases as f64;
    Ok(FidelityPair::new(f1 / n, f2 / n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub k: i32,
    pub phi: f64,
    pub f1: f64,
    pub f2: f64,
    pub p_succ: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquatorScan {
    pub rows: Vec<ScanRow>,
    pub mean: FidelityPair,
    /// Sample standard deviation across rows.
    pub std_dev: FidelityPair,
}

/// The nine equatorial inputs `φ_k = kπ/4`, `k = −4..=4`.
pub fn equator_phases() -> impl Iterator<Item = (i32, f64)> {
    (-4..=4).map(|k| (k, k as f64 * PI / 4.0))
}

pub fn equator_scan<C: Cloner>(cloner: &C) -> Result<EquatorScan> {
    let rows = equator_phases()
        .map(|(k, phi)| {
            let out = cloner.run(&PolarizationQubit::equatorial(phi))?;
            Ok(ScanRow {
                k,
                phi,
                f1: out.f1,
                f2: out.f2,
                p_succ: out.p_succ,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (m1, s1) = mean_and_std(rows.iter().map(|r| r.f1));
    let (m2, s2) = mean_and_std(rows.iter().map(|r| r.f2));
    Ok(EquatorScan {
        rows,
        mean: FidelityPair::new(m1, m2),
        std_dev: FidelityPair::new(s1, s2),
    })
}

pub(crate) fn mean_and_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Polarization;
    use crate::theory::pc_fidelities;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn vv_state(modes: &ModeSet) -> TwoPhotonState {
        let v = PolarizationQubit::vertical();
        TwoPhotonState::product_state(&Photon::new(v, Arm(0)), &Photon::new(v, Arm(1)), modes)
            .unwrap()
    }

    fn pol_mode(arm: Arm, pol: Polarization) -> ModeLabel {
        ModeLabel::new(arm, pol, 0)
    }

    const ARMS: CloneArms = CloneArms {
        first: Arm(0),
        second: Arm(1),
    };

    #[test]
    fn hom_dip_postselection_is_degenerate() {
        let modes = ModeSet::two_arm(1);
        let out = vv_state(&modes)
            .apply_element(&beam_splitter(0.5, (Arm(0), Arm(1))).unwrap())
            .unwrap();
        assert_eq!(
            coincidence_project(&out, ARMS),
            Err(Error::DegenerateOutcome)
        );
    }

    #[test]
    fn distinguishable_photons_split_half_the_time() {
        // Classical routing: 2 photons independently reflect or transmit;
        // coincidence when both transmit or both reflect = 1/2.
        let modes = ModeSet::two_arm(2);
        let v = PolarizationQubit::vertical();
        let anc = Photon::new(v, Arm(1)).with_overlap(0.0).unwrap();
        let s = TwoPhotonState::product_state(&Photon::new(v, Arm(0)), &anc, &modes).unwrap();
        let out = s
            .apply_element(&beam_splitter(0.5, (Arm(0), Arm(1))).unwrap())
            .unwrap();
        let (_, p) = coincidence_project(&out, ARMS).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coincidence_supported_state_is_unchanged() {
        let modes = ModeSet::two_arm(1);
        let s = vv_state(&modes);
        let (proj, p) = coincidence_project(&s, ARMS).unwrap();
        assert_eq!(proj, s);
        assert!((p - 1.0).abs() < 1e-15);
    }

    fn product(psi1: PolarizationQubit, psi2: PolarizationQubit) -> TwoPhotonState {
        TwoPhotonState::product_state(
            &Photon::new(psi1, Arm(0)),
            &Photon::new(psi2, Arm(1)),
            &ModeSet::two_arm(1),
        )
        .unwrap()
    }

    #[test]
    fn rates_of_product_states() {
        let psi = PolarizationQubit::new(1.2, 0.4).unwrap();
        let r = coincidence_rates(&product(psi, psi), &psi, ARMS);
        assert!((r.pp - 1.0).abs() < 1e-12 && r.pm.abs() < 1e-12 && r.mp.abs() < 1e-12);
        let perp = psi.orthogonal();
        let r = coincidence_rates(&product(perp, perp), &psi, ARMS);
        assert!((r.mm - 1.0).abs() < 1e-12 && r.sum() - 1.0 < 1e-12);
        let r = coincidence_rates(&product(psi, perp), &psi, ARMS);
        assert!((r.pm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_symmetric_sbs() {
        let cfg = SbsConfig::ideal_symmetric();
        let out = run_sbs(&PolarizationQubit::equatorial(0.0), &cfg).unwrap();
        let target = 0.5 * (1.0 + FRAC_1_SQRT_2);
        assert!((out.f1 - target).abs() < 1e-12);
        assert!((out.f2 - target).abs() < 1e-12);
        assert!((out.p_succ - 1.0 / 3.0).abs() < 1e-12);
        assert!((out.c_sum() - out.p_succ).abs() < 1e-12);
        let rates = coincidence_rates(
            &out.postselected_state,
            &PolarizationQubit::equatorial(0.0),
            cfg.arms(),
        );
        assert!((rates.pp + rates.pm - target).abs() < 1e-12);
    }

    #[test]
    fn measured_sbs_at_q093_matches_closed_form() {
        let cfg = SbsConfig::for_asymmetry(0.93, 0.758, 0.179).unwrap();
        let out = run_sbs(&PolarizationQubit::equatorial(0.0), &cfg).unwrap();
        let expected = pc_fidelities(0.93).unwrap();
        assert!((out.f1 - expected.f1).abs() < 1e-9);
        assert!((out.f2 - expected.f2).abs() < 1e-9);
        assert!((out.f1 - 0.632).abs() < 1e-3);
    }

    #[test]
    fn vertical_input_is_copied_perfectly() {
        let v = PolarizationQubit::vertical();
        for cfg in [
            SbsConfig::ideal_symmetric(),
            SbsConfig::for_asymmetry(0.8, 0.758, 0.179).unwrap(),
        ] {
            let out = run_sbs(&v, &cfg).unwrap();
            assert!((out.f1 - 1.0).abs() < 1e-12 && (out.f2 - 1.0).abs() < 1e-12);
        }
        let out = run_hybrid(&v, &HybridConfig::for_asymmetry(0.6, 0.509, 0.466).unwrap()).unwrap();
        assert!((out.f1 - 1.0).abs() < 1e-12 && (out.f2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_postselected_state_is_the_cloning_map() {
        // |H>|V> -> sqrt(q)|V>|H> + sqrt(1-q)|H>|V>
        let q = 0.7;
        for out in [
            SbsConfig::for_asymmetry(q, 0.758, 0.179)
                .unwrap()
                .output(&PolarizationQubit::horizontal())
                .unwrap(),
            HybridConfig::for_asymmetry(q, 0.509, 0.466)
                .unwrap()
                .output(&PolarizationQubit::horizontal())
                .unwrap(),
        ] {
            let (a, b) = (out.arms.first, out.arms.second);
            let s = &out.state;
            let vh = s
                .amplitude_of_pair(&pol_mode(a, Polarization::V), &pol_mode(b, Polarization::H))
                .unwrap();
            let hv = s
                .amplitude_of_pair(&pol_mode(a, Polarization::H), &pol_mode(b, Polarization::V))
                .unwrap();
            let phase = vh / vh.norm();
            assert!((vh / phase - Complex64::new(q.sqrt(), 0.0)).norm() < 1e-12);
            assert!((hv / phase - Complex64::new((1.0 - q).sqrt(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn ideal_hybrid_symmetric() {
        let mut cfg = HybridConfig::new(0.5, 0.5);
        cfg.sigma_eta = 0.5;
        let out = run_hybrid(&PolarizationQubit::equatorial(1.0), &cfg).unwrap();
        let target = 0.5 * (1.0 + FRAC_1_SQRT_2);
        assert!((out.f1 - target).abs() < 1e-12 && (out.f2 - target).abs() < 1e-12);
        assert!((out.p_succ - 1.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn measured_hybrid_at_q075() {
        let cfg = HybridConfig::for_asymmetry(0.75, 0.509, 0.466).unwrap();
        let out = run_hybrid(&PolarizationQubit::equatorial(0.3), &cfg).unwrap();
        assert!((out.f1 - 0.75).abs() < 1e-9);
        assert!((out.f2 - 0.5 * (1.0 + 0.75f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn bunching_probability_is_half_for_balanced_coupler() {
        // indistinguishable photons always bunch; each output equally likely
        let cfg = HybridConfig::new(0.5, 0.5);
        let (_, p) = cfg.bunch(&PolarizationQubit::vertical()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_estimators_match_reduced_states() {
        let anc = PolarizationQubit::new(0.3, 1.0).unwrap();
        let sbs = SbsConfig {
            residual_phase: 0.4,
            overlap_s: 0.8,
            ..SbsConfig::for_asymmetry(0.6, 0.758, 0.179).unwrap()
        }
        .with_ancilla(anc);
        let hyb = HybridConfig::for_asymmetry(0.65, 0.509, 0.466)
            .unwrap()
            .with_ancilla(anc)
            .with_overlap(0.7)
            .unwrap();
        for phi in [0.0, 0.9, 2.5] {
            let psi = PolarizationQubit::equatorial(phi);
            for out in [sbs.output(&psi).unwrap(), hyb.output(&psi).unwrap()] {
                let fid = coincidence_rates(&out.state, &psi, out.arms).fidelities();
                let f1 = clone_fidelity(&out.state, out.arms.first, out.arms, &psi);
                let f2 = clone_fidelity(&out.state, out.arms.second, out.arms, &psi);
                assert!((fid.f1 - f1).abs() < 1e-12);
                assert!((fid.f2 - f2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_phase_pi_mirrors_clone_one() {
        let base = SbsConfig::for_asymmetry(0.7, 0.758, 0.179).unwrap();
        let flipped = SbsConfig {
            residual_phase: PI,
            ..base.clone()
        };
        let a = equator_scan(&base).unwrap();
        let b = equator_scan(&flipped).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert!(((2.0 * ra.f1 - 1.0) + (2.0 * rb.f1 - 1.0)).abs() < 1e-12);
            assert!((ra.f2 - rb.f2).abs() < 1e-12);
        }
    }

    #[test]
    fn twirl_of_covariant_cloner_is_unchanged() {
        let cfg = SbsConfig::for_asymmetry(0.6, 0.758, 0.179).unwrap();
        let psi = PolarizationQubit::equatorial(0.4);
        let plain = cfg.run(&psi).unwrap();
        let tw = twirl(&cfg, &psi, 7).unwrap();
        assert!((tw.f1 - plain.f1).abs() < 1e-12 && (tw.f2 - plain.f2).abs() < 1e-12);
        assert_eq!(twirl(&cfg, &psi, 0), Err(Error::ZeroCount("n_phases")));
    }

    #[test]
    fn equator_scan_of_ideal_cloner_is_flat() {
        let scan = equator_scan(&SbsConfig::ideal_symmetric()).unwrap();
        assert_eq!(scan.rows.len(), 9);
        for r in &scan.rows {
            assert!((r.f1 - scan.rows[0].f1).abs() < 1e-10);
            assert!((r.f2 - scan.rows[0].f2).abs() < 1e-10);
            assert!((r.p_succ - scan.rows[0].p_succ).abs() < 1e-10);
        }
        assert!(scan.std_dev.f1 < 1e-10);
    }

    #[test]
    fn horizontal_signal_is_allowed() {
        let out = run_sbs(
            &PolarizationQubit::horizontal(),
            &SbsConfig::ideal_symmetric(),
        )
        .unwrap();
        assert!(out.f1 > 0.0 && out.f1 <= 1.0 && out.f2 <= 1.0);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SbsConfig::ideal_symmetric();
        cfg.sigma_eta = 0.0;
        assert!(run_sbs(&PolarizationQubit::vertical(), &cfg).is_err());
        let mut hyb = HybridConfig::new(0.5, 0.5);
        hyb.overlap_s = 1.5;
        assert!(run_hybrid(&PolarizationQubit::vertical(), &hyb).is_err());
        assert!(cfg.with_overlap(-0.1).is_err());
    }
}
