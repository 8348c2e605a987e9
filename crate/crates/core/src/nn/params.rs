//! The `ParamSet` abstraction: anything made of named float blocks. One
//! trait powers SGD updates, global-norm clipping, checkpoint IO, and the
//! flattened view the gradient checker perturbs.

use super::NnError;

/// A container of named parameter blocks. Implementations must visit blocks
/// in a fixed, documented order — flattening, checkpoints, and paired
/// traversal all rely on it.
pub trait ParamSet {
    /// Visits every block as `(name, shape, data)`.
    fn visit(&self, f: &mut dyn FnMut(&str, &[usize], &[f64]));

    /// Mutable visit in the same order as [`ParamSet::visit`].
    fn visit_mut(&mut self, f: &mut dyn FnMut(&str, &[usize], &mut [f64]));

    /// Pairs this container's blocks with `other`'s, failing on any shape
    /// difference. Visit order must match `visit`.
    fn zip_mut(
        &mut self,
        other: &Self,
        f: &mut dyn FnMut(&mut [f64], &[f64]),
    ) -> Result<(), NnError>;

    /// Total number of scalar parameters.
    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, _, data| n += data.len());
        n
    }

    /// All parameters concatenated in visit order.
    fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        self.visit(&mut |_, _, data| flat.extend_from_slice(data));
        flat
    }

    /// Adds `delta` to the scalar at flat index `idx`.
    fn nudge(&mut self, idx: usize, delta: f64) {
        let mut offset = 0usize;
        self.visit_mut(&mut |_, _, data| {
            if idx >= offset && idx < offset + data.len() {
                data[idx - offset] += delta;
            }
            offset += data.len();
        });
    }

    /// Name and within-block index for a flat coordinate, for diagnostics.
    fn locate(&self, idx: usize) -> String {
        let mut offset = 0usize;
        let mut found = String::from("<out of range>");
        self.visit(&mut |name, _, data| {
            if idx >= offset && idx < offset + data.len() {
                found = format!("{name}[{}]", idx - offset);
            }
            offset += data.len();
        });
        found
    }
}

/// Euclidean norm over every block of a gradient container.
pub fn global_grad_norm<P: ParamSet + ?Sized>(grads: &P) -> f64 {
    let mut sq = 0.0;
    grads.visit(&mut |_, _, data| {
        for g in data {
            sq += g * g;
        }
    });
    sq.sqrt()
}

/// One SGD update `p ← p − lr·g`. When `clip` is set and the global gradient
/// norm exceeds it, the whole gradient is rescaled to norm `clip` first.
pub fn sgd_step<P: ParamSet>(
    params: &mut P,
    grads: &P,
    lr: f64,
    clip: Option<f64>,
) -> Result<(), NnError> {
    let mut scale = 1.0;
    if let Some(c) = clip {
        debug_assert!(c > 0.0, "clip must be positive");
        let norm = global_grad_norm(grads);
        if norm > c {
            scale = c / norm;
        }
    }
    let step = lr * scale;
    params.zip_mut(grads, &mut |p, g| {
        for (pv, gv) in p.iter_mut().zip(g) {
            *pv -= step * gv;
        }
    })
}
