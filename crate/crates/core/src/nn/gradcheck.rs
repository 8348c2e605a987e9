//! Central finite-difference gradient checking — the oracle every
//! hand-derived backward pass in this crate is tested against.

use super::params::ParamSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of a gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Largest relative error over the checked coordinates.
    pub max_rel_err: f64,
    /// Block-qualified name of the worst coordinate.
    pub worst: Option<String>,
    /// Analytic and numeric gradient at the worst coordinate.
    pub worst_pair: (f64, f64),
    /// How many coordinates were checked.
    pub checked: usize,
    /// The tolerance compared against.
    pub tol: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err < self.tol
    }
}

/// Compares `analytic` against central finite differences of `f` around
/// `params`: numeric = (f(p+ε) − f(p−ε)) / 2ε per coordinate, relative error
/// |a − n| / max(|a|, |n|, 1e-6).
///
/// The 1e-6 denominator floor keeps the check meaningful for near-zero
/// gradients: central differences of an O(1) loss carry ~1e-11 of f64
/// cancellation noise, so sub-1e-6 gradients are compared absolutely (at
/// tol·1e-6) instead of drowning in that noise — still tight enough that a
/// missing gradient term of any visible size fails.
///
/// `sample` limits the check to `count` coordinates chosen without
/// replacement by a generator seeded with `seed`; `None` checks everything.
pub fn grad_check<P: ParamSet + Clone>(
    mut f: impl FnMut(&P) -> f64,
    params: &P,
    analytic: &P,
    eps: f64,
    tol: f64,
    sample: Option<(usize, u64)>,
) -> GradCheckReport {
    let n = params.param_count();
    let grad_flat = analytic.to_flat();
    debug_assert_eq!(grad_flat.len(), n, "gradient shape mismatch");
    let coords: Vec<usize> = match sample {
        Some((count, seed)) if count < n => {
            let mut all: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            all.shuffle(&mut rng);
            all.truncate(count);
            all
        }
        _ => (0..n).collect(),
    };
    let mut max_rel_err = 0.0f64;
    let mut worst = None;
    let mut worst_pair = (0.0, 0.0);
    for &idx in &coords {
        let mut plus = params.clone();
        plus.nudge(idx, eps);
        let fp = f(&plus);
        let mut minus = params.clone();
        minus.nudge(idx, -eps);
        let fm = f(&minus);
        let numeric = (fp - fm) / (2.0 * eps);
        let a = grad_flat[idx];
        let denom = a.abs().max(numeric.abs()).max(1e-6);
        let rel = (a - numeric).abs() / denom;
        if rel > max_rel_err {
            max_rel_err = rel;
            worst = Some(params.locate(idx));
            worst_pair = (a, numeric);
        }
    }
    GradCheckReport {
        max_rel_err,
        worst,
        worst_pair,
        checked: coords.len(),
        tol,
    }
}
