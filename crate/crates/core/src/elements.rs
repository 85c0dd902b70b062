//! Optical elements as mode-scattering matrices, and the Fresnel model of
//! tilted glass-plate polarization filters.
//!
//! An element acts on a list of [`Channel`]s (arm × polarization) and is
//! applied identically in every temporal bin of the state it acts on.
//! Matrix entry `(j, i)` is the amplitude for a photon entering channel `i`
//! to leave in channel `j`. Entries may be sub-unitary (filtering loss) but
//! never amplify.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::state::{Arm, Channel, ModeLabel, ModeSet, Polarization};

const GAIN_TOLERANCE: f64 = 1e-12;
const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    channels: Vec<Channel>,
    matrix: DMatrix<Complex64>,
    unitary: bool,
}

impl OpticalElement {
    pub fn new(channels: Vec<Channel>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = channels.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                modes: n,
            });
        }
        for (i, ch) in channels.iter().enumerate() {
            if channels[..i].contains(ch) {
                return Err(Error::DuplicateMode(format!("{}_{:?}", ch.arm, ch.pol)));
            }
        }
        let largest = largest_singular_value(&matrix);
        if largest > 1.0 + GAIN_TOLERANCE {
            return Err(Error::Gain(largest));
        }
        let unitary = is_unitary(&matrix);
        Ok(Self {
            channels,
            matrix,
            unitary,
        })
    }

    pub fn identity(channels: Vec<Channel>) -> Self {
        let n = channels.len();
        Self {
            channels,
            matrix: DMatrix::identity(n, n),
            unitary: true,
        }
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn largest_singular_value(&self) -> f64 {
        largest_singular_value(&self.matrix)
    }

    /// Full `m × m` matrix over `modes`, identity on channels the element
    /// does not touch, replicated across every temporal bin.
    pub fn embed(&self, modes: &ModeSet) -> Result<DMatrix<Complex64>> {
        let m = modes.len();
        let mut full = DMatrix::identity(m, m);
        for bin in modes.bins() {
            let idx = self
                .channels
                .iter()
                .map(|ch| modes.require(&ModeLabel::new(ch.arm, ch.pol, bin)))
                .collect::<Result<Vec<_>>>()?;
            for (a, &row) in idx.iter().enumerate() {
                for (b, &col) in idx.iter().enumerate() {
                    full[(row, col)] = self.matrix[(a, b)];
                }
            }
        }
        Ok(full)
    }

    /// Matrix over `channels` (a superset of this element's channels).
    fn embed_channels(&self, channels: &[Channel]) -> DMatrix<Complex64> {
        let n = channels.len();
        let mut full = DMatrix::identity(n, n);
        let idx: Vec<usize> = self
            .channels
            .iter()
            .map(|ch| channels.iter().position(|c| c == ch).expect("superset"))
            .collect();
        for (a, &row) in idx.iter().enumerate() {
            for (b, &col) in idx.iter().enumerate() {
                full[(row, col)] = self.matrix[(a, b)];
            }
        }
        full
    }
}

/// `second` applied after `first`, over the union of their channels.
pub fn compose(first: &OpticalElement, second: &OpticalElement) -> OpticalElement {
    let mut channels = first.channels.clone();
    for ch in &second.channels {
        if !channels.contains(ch) {
            channels.push(*ch);
        }
    }
    let matrix = second.embed_channels(&channels) * first.embed_channels(&channels);
    OpticalElement {
        channels,
        matrix,
        unitary: first.unitary && second.unitary,
    }
}

fn largest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn is_unitary(m: &DMatrix<Complex64>) -> bool {
    let gram = m.adjoint() * m;
    let n = m.nrows();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let target = if i == j { 1.0 } else { 0.0 };
            (gram[(i, j)] - Complex64::new(target, 0.0)).norm() <= UNITARY_TOLERANCE
        })
    })
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn arm_channels(arm: Arm) -> Vec<Channel> {
    vec![
        Channel::new(arm, Polarization::H),
        Channel::new(arm, Polarization::V),
    ]
}

/// Beam splitter with polarization-dependent intensity reflectances.
///
/// Each polarization block is `[[t, r], [r, −t]]` on `(arms.0, arms.1)`, with
/// `r = √R` and `t = √(1 − R)`: transmission keeps the arm index.
pub fn pol_beam_splitter(r_v: f64, r_h: f64, arms: (Arm, Arm)) -> Result<OpticalElement> {
    check_range("R_V", r_v, 0.0, 1.0, "[0, 1]")?;
    check_range("R_H", r_h, 0.0, 1.0, "[0, 1]")?;
    if arms.0 == arms.1 {
        return Err(Error::SameArm);
    }
    let channels = vec![
        Channel::new(arms.0, Polarization::H),
        Channel::new(arms.0, Polarization::V),
        Channel::new(arms.1, Polarization::H),
        Channel::new(arms.1, Polarization::V),
    ];
    let mut m = DMatrix::zeros(4, 4);
    for (pol, reflectance) in [(0usize, r_h), (1usize, r_v)] {
        let r = reflectance.sqrt();
        let t = (1.0 - reflectance).sqrt();
        let (a, b) = (pol, 2 + pol);
        m[(a, a)] = real(t);
        m[(b, a)] = real(r);
        m[(a, b)] = real(r);
        m[(b, b)] = real(-t);
    }
    OpticalElement::new(channels, m)
}

/// Polarization-independent splitter with intensity reflectance `r`.
pub fn beam_splitter(r: f64, arms: (Arm, Arm)) -> Result<OpticalElement> {
    pol_beam_splitter(r, r, arms)
}

/// Diagonal filter with amplitude transmittances `t_h`, `t_v` on one arm.
pub fn pol_filter(t_h: f64, t_v: f64, arm: Arm) -> Result<OpticalElement> {
    check_range("t_H", t_h, 0.0, 1.0, "[0, 1]")?;
    check_range("t_V", t_v, 0.0, 1.0, "[0, 1]")?;
    let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![real(t_h), real(t_v)]));
    OpticalElement::new(arm_channels(arm), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavePlateKind {
    Half,
    Quarter,
}

impl WavePlateKind {
    pub fn retardance(self) -> f64 {
        match self {
            WavePlateKind::Half => PI,
            WavePlateKind::Quarter => FRAC_PI_2,
        }
    }
}

/// Retarder with its fast axis at `angle`, measured from the vertical axis
/// towards horizontal. The Jones matrix has unit determinant.
pub fn wave_plate(kind: WavePlateKind, angle: f64, arm: Arm) -> OpticalElement {
    let half = kind.retardance() / 2.0;
    let (s, c) = angle.sin_cos();
    // In the (V, H) frame: R(α) diag(e^{-iΓ/2}, e^{iΓ/2}) R(-α).
    let fast = Complex64::from_polar(1.0, -half);
    let slow = Complex64::from_polar(1.0, half);
    let vv = fast * c * c + slow * s * s;
    let hh = fast * s * s + slow * c * c;
    let vh = (fast - slow) * s * c;
    // reorder to the (H, V) channel order
    let m = DMatrix::from_row_slice(2, 2, &[hh, vh, vh, vv]);
    OpticalElement {
        channels: arm_channels(arm),
        matrix: m,
        unitary: true,
    }
}

/// `e^{iδ}|H⟩⟨H| + |V⟩⟨V|` on one arm.
pub fn phase_shifter(delta: f64, arm: Arm) -> OpticalElement {
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::from_polar(1.0, delta),
            real(0.0),
            real(0.0),
            real(1.0),
        ],
    );
    OpticalElement {
        channels: arm_channels(arm),
        matrix: m,
        unitary: true,
    }
}

/// Stack of identical tilted glass plates acting as a partial polarizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelPlate {
    pub refractive_index: f64,
    /// Angle of incidence in radians.
    pub tilt: f64,
    pub plates_per_filter: u32,
    /// Air–glass interfaces crossed per plate.
    pub passes_per_plate: u32,
}

impl Default for FresnelPlate {
    fn default() -> Self {
        Self {
            refractive_index: 1.5,
            tilt: 0.0,
            plates_per_filter: 2,
            passes_per_plate: 2,
        }
    }
}

impl FresnelPlate {
    pub fn with_tilt(self, tilt: f64) -> Self {
        Self { tilt, ..self }
    }

    fn interfaces(&self) -> i32 {
        (self.plates_per_filter * self.passes_per_plate) as i32
    }

    fn validate(&self) -> Result<()> {
        if !(self.refractive_index.is_finite() && self.refractive_index >= 1.0) {
            return Err(Error::OutOfRange {
                name: "refractive_index",
                value: self.refractive_index,
                range: "[1, inf)",
            });
        }
        if self.interfaces() == 0 {
            return Err(Error::ZeroCount("plates_per_filter * passes_per_plate"));
        }
        Ok(())
    }

    /// Infimum of `T_TE / T_TM`, approached at grazing incidence.
    pub fn min_ratio(&self) -> f64 {
        self.refractive_index.powi(-2 * self.interfaces())
    }

    /// Brewster angle `arctan(n)`.
    pub fn brewster_angle(&self) -> f64 {
        self.refractive_index.atan()
    }
}

/// Intensity transmittances `(T_TE, T_TM)` of one air–glass interface.
///
/// Uses `T = (n cos θ_t / cos θ_i)|t|²`, which stays accurate near grazing
/// incidence where `1 − |r|²` cancels badly. Glass–air exit interfaces have
/// the same transmittance.
pub fn interface_transmittance(n: f64, incidence: f64) -> (f64, f64) {
    let cos_i = incidence.cos().max(0.0);
    let sin_t = incidence.sin() / n;
    let cos_t = (1.0 - sin_t * sin_t).sqrt();
    let te = 4.0 * n * cos_i * cos_t / (cos_i + n * cos_t).powi(2);
    let tm = 4.0 * n * cos_i * cos_t / (n * cos_i + cos_t).powi(2);
    (te, tm)
}

/// Intensity transmittances `(T_TE, T_TM)` of the whole filter.
pub fn fresnel_plate(plate: &FresnelPlate) -> Result<(f64, f64)> {
    plate.validate()?;
    if !(plate.tilt >= 0.0 && plate.tilt < FRAC_PI_2) {
        return Err(Error::OutOfRange {
            name: "tilt",
            value: plate.tilt,
            range: "[0, pi/2)",
        });
    }
    let (te, tm) = interface_transmittance(plate.refractive_index, plate.tilt);
    let k = plate.interfaces();
    Ok((te.powi(k), tm.powi(k)))
}

fn plate_ratio(plate: &FresnelPlate, tilt: f64) -> f64 {
    // T_TE/T_TM per interface, written without the common factor
    let n = plate.refractive_index;
    let cos_i = tilt.cos().max(0.0);
    let sin_t = tilt.sin() / n;
    let cos_t = (1.0 - sin_t * sin_t).sqrt();
    ((n * cos_i + cos_t) / (cos_i + n * cos_t)).powi(2 * plate.interfaces())
}

/// Tilt at which `T_TE / T_TM` equals `target`, by bisection on `[0, π/2)`.
pub fn tilt_for_ratio(target: f64, plate: &FresnelPlate) -> Result<f64> {
    plate.validate()?;
    check_range("target ratio", target, f64::MIN_POSITIVE, 1.0, "(0, 1]")?;
    if target == 1.0 {
        return Ok(0.0);
    }
    let minimum = plate.min_ratio();
    if target <= minimum {
        return Err(Error::InfeasibleRatio { target, minimum });
    }
    let (mut lo, mut hi) = (0.0_f64, FRAC_PI_2);
    // ratio decreases monotonically with tilt
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if plate_ratio(plate, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which polarization a glass-plate filter attenuates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateOrientation {
    AttenuateV,
    AttenuateH,
}

/// Per-polarization amplitude transmittances of one filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterAmplitudes {
    pub t_h: f64,
    pub t_v: f64,
    pub orientation: PlateOrientation,
    /// Plate tilt realizing the ratio; `None` for the idealized filter.
    pub tilt: Option<f64>,
}

impl FilterAmplitudes {
    /// Filter with `(t_V/t_H)² = sigma` whose favored polarization has
    /// amplitude `favored`.
    pub fn from_ratio(sigma: f64, favored: f64) -> Result<Self> {
        check_range("sigma", sigma, f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
        check_range("favored amplitude", favored, 0.0, 1.0, "[0, 1]")?;
        Ok(if sigma <= 1.0 {
            Self {
                t_h: favored,
                t_v: favored * sigma.sqrt(),
                orientation: PlateOrientation::AttenuateV,
                tilt: None,
            }
        } else {
            Self {
                t_h: favored / sigma.sqrt(),
                t_v: favored,
                orientation: PlateOrientation::AttenuateH,
                tilt: None,
            }
        })
    }

    /// Glass-plate filter realizing `(t_V/t_H)² = sigma` with Fresnel losses
    /// on both polarizations.
    pub fn from_plates(sigma: f64, plate: &FresnelPlate) -> Result<Self> {
        check_range("sigma", sigma, f64::MIN_POSITIVE, f64::MAX, "(0, inf)")?;
        let ratio = sigma.min(1.0 / sigma);
        let tilt = tilt_for_ratio(ratio, plate)?;
        let (te, tm) = fresnel_plate(&plate.with_tilt(tilt))?;
        let (favored, attenuated) = (tm.sqrt(), te.sqrt());
        Ok(if sigma <= 1.0 {
            Self {
                t_h: favored,
                t_v: attenuated,
                orientation: PlateOrientation::AttenuateV,
                tilt: Some(tilt),
            }
        } else {
            Self {
                t_h: attenuated,
                t_v: favored,
                orientation: PlateOrientation::AttenuateH,
                tilt: Some(tilt),
            }
        })
    }

    /// Amplitude of the less attenuated polarization.
    pub fn favored(&self) -> f64 {
        self.t_h.max(self.t_v)
    }

    pub fn element(&self, arm: Arm) -> Result<OpticalElement> {
        pol_filter(self.t_h, self.t_v, arm)
    }
}
