#![allow(dead_code)]

use asymclone_core::state::{ModeSet, TwoPhotonState};
use asymclone_core::Complex64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian_complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            r[(i, i)] / r[(i, i)].norm()
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    q * phases
}

pub fn random_state<R: Rng>(modes: &ModeSet, rng: &mut R) -> TwoPhotonState {
    let amps = (0..modes.basis_size())
        .map(|_| gaussian_complex(rng))
        .collect();
    let state = TwoPhotonState::from_amplitudes(modes.clone(), amps).unwrap();
    state.normalize().unwrap().0
}

/// Two-photon evolution by substituting `a†_k → Σ_m U_mk a†_m` into the
/// symmetric coefficient matrix of the creation polynomial.
pub fn substitution_oracle(state: &TwoPhotonState, u: &DMatrix<Complex64>) -> Vec<Complex64> {
    let modes = state.modes();
    let m = modes.len();
    let pair = |index: usize| -> (usize, usize) {
        let occ = modes.occupation_of(index).unwrap();
        let occupied: Vec<usize> = occ
            .iter()
            .enumerate()
            .flat_map(|(mode, &n)| std::iter::repeat_n(mode, n as usize))
            .collect();
        (occupied[0], occupied[1])
    };
    let mut a = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for (index, &c) in state.amplitudes().iter().enumerate() {
        let (i, j) = pair(index);
        if i == j {
            a[(i, i)] += c / 2f64.sqrt();
        } else {
            a[(i, j)] += c / 2.0;
            a[(j, i)] += c / 2.0;
        }
    }
    let evolved = u * a * u.transpose();
    (0..modes.basis_size())
        .map(|index| {
            let (i, j) = pair(index);
            if i == j {
                evolved[(i, i)] * 2f64.sqrt()
            } else {
                evolved[(i, j)] * 2.0
            }
        })
        .collect()
}

pub fn max_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
