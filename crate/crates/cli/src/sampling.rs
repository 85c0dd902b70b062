//! Synthetic coincidence counts with independent Poisson arrivals per
//! outcome channel.

use anyhow::{Context, Result};
use asymclone_core::cloner::CloningOutcome;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
}

impl Counts {
    pub fn total(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm
    }
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).with_context(|| format!("Poisson mean {mean}"))?;
    Ok(dist.sample(rng) as u64)
}

/// Draws the four coincidence counts for `pairs` input pairs. Channels are
/// sampled in the fixed order `++, +−, −+, −−`.
pub fn draw_counts<R: Rng>(out: &CloningOutcome, pairs: f64, rng: &mut R) -> Result<Counts> {
    Ok(Counts {
        pp: poisson(pairs * out.c_pp, rng)?,
        pm: poisson(pairs * out.c_pm, rng)?,
        mp: poisson(pairs * out.c_mp, rng)?,
        mm: poisson(pairs * out.c_mm, rng)?,
    })
}

/// `(F1, F2)` estimated from counts; `None` without coincidences.
pub fn estimate(c: &Counts) -> Option<(f64, f64)> {
    let total = c.total();
    if total == 0 {
        return None;
    }
    let t = total as f64;
    Some(((c.pp + c.pm) as f64 / t, (c.pp + c.mp) as f64 / t))
}
