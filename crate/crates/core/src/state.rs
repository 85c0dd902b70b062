//! Two-photon Fock states over a labeled set of optical modes.
//!
//! A state is stored as a complex amplitude vector over every occupation
//! vector `n` with `Σ n_i = 2`. Occupations are ordered lexicographically
//! from `(2, 0, …, 0)` downwards, which is the same as ordering the occupied
//! mode pairs `(i, j)` with `i ≤ j` ascending.
//!
//! Linear-optical evolution substitutes every creation operator
//! `a†_i → Σ_j M_ji a†_j`. For two photons the transition amplitude between
//! occupations `n` and `n'` is `per(M[n'|n]) / √(Π n_i! Π n'_j!)`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::elements::OpticalElement;
use crate::error::{check_range, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    /// Position inside a Jones vector, which is always ordered `(H, V)`.
    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// Spatial arm identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arm(pub u8);

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "arm{}", self.0)
    }
}

/// A spatial arm together with a polarization, independent of timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub arm: Arm,
    pub pol: Polarization,
}

impl Channel {
    pub fn new(arm: Arm, pol: Polarization) -> Self {
        Self { arm, pol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub arm: Arm,
    pub pol: Polarization,
    /// Temporal bin; photons in different bins never interfere.
    pub bin: u8,
}

impl ModeLabel {
    pub fn new(arm: Arm, pol: Polarization, bin: u8) -> Self {
        Self { arm, pol, bin }
    }

    pub fn channel(&self) -> Channel {
        Channel::new(self.arm, self.pol)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{:?}@{}", self.arm, self.pol, self.bin)
    }
}

/// Ordered, duplicate-free list of modes. The order defines basis indexing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet {
    labels: Vec<ModeLabel>,
}

impl ModeSet {
    pub fn new(labels: Vec<ModeLabel>) -> Result<Self> {
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(Error::DuplicateMode(label.to_string()));
            }
        }
        Ok(Self { labels })
    }

    /// Two arms times two polarizations per temporal bin, ordered
    /// `(arm0_H, arm0_V, arm1_H, arm1_V)` within each bin and bin-major
    /// across bins, so the first four modes always form the single-bin set.
    pub fn two_arm(bins: u8) -> Self {
        let mut labels = Vec::with_capacity(4 * bins as usize);
        for bin in 0..bins.max(1) {
            for arm in [Arm(0), Arm(1)] {
                for pol in Polarization::BOTH {
                    labels.push(ModeLabel::new(arm, pol, bin));
                }
            }
        }
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &ModeLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn require(&self, label: &ModeLabel) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::ModeNotFound(label.to_string()))
    }

    /// Distinct temporal bins, ascending.
    pub fn bins(&self) -> Vec<u8> {
        let mut bins: Vec<u8> = self.labels.iter().map(|l| l.bin).collect();
        bins.sort_unstable();
        bins.dedup();
        bins
    }

    pub fn has_arm(&self, arm: Arm) -> bool {
        self.labels.iter().any(|l| l.arm == arm)
    }

    /// Number of two-photon occupation vectors, `C(m + 1, 2)`.
    pub fn basis_size(&self) -> usize {
        let m = self.len();
        m * (m + 1) / 2
    }

    pub fn basis_index(&self, occupation: &[u8]) -> Result<usize> {
        let m = self.len();
        let invalid = || Error::InvalidOccupation {
            occupation: occupation.to_vec(),
            modes: m,
        };
        if occupation.len() != m || occupation.iter().map(|&n| n as u32).sum::<u32>() != 2 {
            return Err(invalid());
        }
        let mut occupied = occupation
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize));
        let i = occupied.next().ok_or_else(invalid)?;
        let j = occupied.next().ok_or_else(invalid)?;
        Ok(pair_index(m, i, j))
    }

    pub fn occupation_of(&self, index: usize) -> Result<Vec<u8>> {
        let dim = self.basis_size();
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let (i, j) = pair_of(self.len(), index);
        let mut occupation = vec![0u8; self.len()];
        occupation[i] += 1;
        occupation[j] += 1;
        Ok(occupation)
    }
}

/// Index of the occupation with photons in modes `i ≤ j`.
pub(crate) fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows before i hold m, m-1, ..., m-i+1 entries
    i * m - i * i.saturating_sub(1) / 2 + (j - i)
}

pub(crate) fn pair_of(m: usize, index: usize) -> (usize, usize) {
    let mut start = 0;
    for i in 0..m {
        let row = m - i;
        if index < start + row {
            return (i, i + index - start);
        }
        start += row;
    }
    unreachable!("index checked against basis size")
}

/// Polarization state `cos(θ/2)|V⟩ + e^{iφ} sin(θ/2)|H⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationQubit {
    theta: f64,
    phi: f64,
}

impl PolarizationQubit {
    /// `theta ∈ [0, π]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, PI, "[0, pi]")?;
        if !phi.is_finite() {
            return Err(Error::OutOfRange {
                name: "phi",
                value: phi,
                range: "finite",
            });
        }
        Ok(Self {
            theta,
            phi: wrap_phase(phi),
        })
    }

    pub fn vertical() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn horizontal() -> Self {
        Self {
            theta: PI,
            phi: 0.0,
        }
    }

    /// `(|V⟩ + e^{iφ}|H⟩)/√2`.
    pub fn equatorial(phi: f64) -> Self {
        Self {
            theta: PI / 2.0,
            phi: wrap_phase(phi),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn is_equatorial(&self) -> bool {
        self.theta == PI / 2.0
    }

    pub fn amplitude_v(&self) -> Complex64 {
        Complex64::new((self.theta / 2.0).cos(), 0.0)
    }

    pub fn amplitude_h(&self) -> Complex64 {
        Complex64::from_polar((self.theta / 2.0).sin(), self.phi)
    }

    /// Jones vector in `(H, V)` order.
    pub fn jones(&self) -> [Complex64; 2] {
        [self.amplitude_h(), self.amplitude_v()]
    }

    /// The orthogonal state `sin(θ/2)|V⟩ − e^{iφ} cos(θ/2)|H⟩`.
    pub fn orthogonal(&self) -> Self {
        Self {
            theta: PI - self.theta,
            phi: wrap_phase(self.phi + PI),
        }
    }

    /// Applies `|V⟩⟨V| + e^{iδ}|H⟩⟨H|`.
    pub fn phase_shifted(&self, delta: f64) -> Self {
        Self {
            theta: self.theta,
            phi: wrap_phase(self.phi + delta),
        }
    }
}

pub(crate) fn wrap_phase(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(TAU);
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// A single photon: polarization, spatial arm and temporal-bin amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Photon {
    pub qubit: PolarizationQubit,
    pub arm: Arm,
    temporal: Vec<(u8, f64)>,
}

impl Photon {
    pub fn new(qubit: PolarizationQubit, arm: Arm) -> Self {
        Self {
            qubit,
            arm,
            temporal: vec![(0, 1.0)],
        }
    }

    /// Puts the photon into `s|bin0⟩ + √(1−s²)|bin1⟩`.
    pub fn with_overlap(mut self, s: f64) -> Result<Self> {
        check_range("overlap_s", s, 0.0, 1.0, "[0, 1]")?;
        self.temporal = if s == 1.0 {
            vec![(0, 1.0)]
        } else {
            vec![(0, s), (1, (1.0 - s * s).sqrt())]
        };
        Ok(self)
    }

    pub fn temporal(&self) -> &[(u8, f64)] {
        &self.temporal
    }

    /// Coefficients of this photon's creation operator over `modes`.
    pub fn creation_vector(&self, modes: &ModeSet) -> Result<Vec<Complex64>> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); modes.len()];
        let jones = self.qubit.jones();
        for &(bin, weight) in &self.temporal {
            if weight == 0.0 {
                continue;
            }
            for pol in Polarization::BOTH {
                let amp = jones[pol.index()] * weight;
                let label = ModeLabel::new(self.arm, pol, bin);
                match modes.index_of(&label) {
                    Some(i) => coeffs[i] += amp,
                    None if amp.norm_sqr() == 0.0 => {}
                    None => return Err(Error::ModeNotFound(label.to_string())),
                }
            }
        }
        Ok(coeffs)
    }
}

/// Complex amplitudes over the two-photon sector of a [`ModeSet`].
///
/// The squared norm may drop below one after lossy elements or projections;
/// it is then the probability of the surviving branch.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    modes: ModeSet,
    amps: Vec<Complex64>,
}

impl TwoPhotonState {
    pub fn zero(modes: ModeSet) -> Self {
        let dim = modes.basis_size();
        Self {
            modes,
            amps: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn from_amplitudes(modes: ModeSet, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != modes.basis_size() {
            return Err(Error::DimensionMismatch {
                rows: amps.len(),
                cols: 1,
                modes: modes.len(),
            });
        }
        Ok(Self { modes, amps })
    }

    /// `a†_α a†_β |vac⟩` for creation-operator coefficient vectors α, β.
    /// Not normalized: the squared norm is `|α|²|β|² + |⟨α|β⟩|²`.
    pub fn from_creation_pair(
        modes: ModeSet,
        alpha: &[Complex64],
        beta: &[Complex64],
    ) -> Result<Self> {
        let m = modes.len();
        if alpha.len() != m || beta.len() != m {
            return Err(Error::DimensionMismatch {
                rows: alpha.len().max(beta.len()),
                cols: 1,
                modes: m,
            });
        }
        let mut state = Self::zero(modes);
        for i in 0..m {
            for j in i..m {
                let amp = if i == j {
                    alpha[i] * beta[i] * std::f64::consts::SQRT_2
                } else {
                    alpha[i] * beta[j] + alpha[j] * beta[i]
                };
                state.amps[pair_index(m, i, j)] = amp;
            }
        }
        Ok(state)
    }

    /// Normalized `a†_sig a†_anc |vac⟩` for photons in distinct arms.
    pub fn product_state(signal: &Photon, ancilla: &Photon, modes: &ModeSet) -> Result<Self> {
        if signal.arm == ancilla.arm {
            return Err(Error::SameArm);
        }
        for arm in [signal.arm, ancilla.arm] {
            if !modes.has_arm(arm) {
                return Err(Error::ModeNotFound(arm.to_string()));
            }
        }
        let alpha = signal.creation_vector(modes)?;
        let beta = ancilla.creation_vector(modes)?;
        let state = Self::from_creation_pair(modes.clone(), &alpha, &beta)?;
        Ok(state.normalize()?.0)
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Result<Complex64> {
        Ok(self.amps[self.modes.basis_index(occupation)?])
    }

    /// Amplitude of the occupation with one photon in each of the two given
    /// modes (or two photons when both labels coincide).
    pub fn amplitude_of_pair(&self, a: &ModeLabel, b: &ModeLabel) -> Result<Complex64> {
        let i = self.modes.require(a)?;
        let j = self.modes.require(b)?;
        Ok(self.amps[pair_index(self.modes.len(), i, j)])
    }

    /// Nonzero components as `(first mode, second mode, amplitude)` with the
    /// first mode index not exceeding the second.
    pub fn components(&self) -> impl Iterator<Item = (ModeLabel, ModeLabel, Complex64)> + '_ {
        let m = self.modes.len();
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(move |(idx, &a)| {
                let (i, j) = pair_of(m, idx);
                (self.modes.labels[i], self.modes.labels[j], a)
            })
    }

    pub fn apply_element(&self, element: &OpticalElement) -> Result<Self> {
        let matrix = element.embed(&self.modes)?;
        self.apply_matrix(&matrix)
    }

    /// Evolves the state under a full `m × m` mode-scattering matrix whose
    /// entry `(j, i)` is the amplitude for input mode `i` to exit in mode `j`.
    pub fn apply_matrix(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        let m = self.modes.len();
        if u.nrows() != m || u.ncols() != m {
            return Err(Error::DimensionMismatch {
                rows: u.nrows(),
                cols: u.ncols(),
                modes: m,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (idx_in, &amp) in self.amps.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let (i, j) = pair_of(m, idx_in);
            for (idx_out, slot) in out.iter_mut().enumerate() {
                let (k, l) = pair_of(m, idx_out);
                *slot += amp * transition_amplitude(u, (i, j), (k, l));
            }
        }
        Ok(Self {
            modes: self.modes.clone(),
            amps: out,
        })
    }

    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(Error::ModeSetMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy plus the norm that was divided out.
    pub fn normalize(&self) -> Result<(Self, f64)> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateOutcome);
        }
        let amps = self.amps.iter().map(|a| a / norm).collect();
        Ok((
            Self {
                modes: self.modes.clone(),
                amps,
            },
            norm,
        ))
    }

    /// Zeroes every component whose mode pair fails `keep`.
    pub fn project<F>(&self, keep: F) -> Self
    where
        F: Fn(&ModeLabel, &ModeLabel) -> bool,
    {
        let m = self.modes.len();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(idx, &a)| {
                let (i, j) = pair_of(m, idx);
                if keep(&self.modes.labels[i], &self.modes.labels[j]) {
                    a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self {
            modes: self.modes.clone(),
            amps,
        }
    }
}

fn permanent2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    a * d + b * c
}

/// `⟨k l| U |i j⟩` in the occupation basis.
fn transition_amplitude(
    u: &DMatrix<Complex64>,
    (i, j): (usize, usize),
    (k, l): (usize, usize),
) -> Complex64 {
    let per = permanent2(u[(k, i)], u[(k, j)], u[(l, i)], u[(l, j)]);
    let fact_in: f64 = if i == j { 2.0 } else { 1.0 };
    let fact_out = if k == l { 2.0 } else { 1.0 };
    per / (fact_in * fact_out).sqrt()
}
