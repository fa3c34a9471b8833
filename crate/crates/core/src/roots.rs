//! Thin wrapper around Brent's method from the `roots` crate.

use roots::{find_root_brent, SearchError, SimpleConvergency};

/// Root of `f` on `[lo, hi]`, or `None` when the endpoints do not bracket one.
pub(crate) fn bracketed_root(lo: f64, hi: f64, f: impl FnMut(f64) -> f64) -> Option<f64> {
    let scale = lo.abs().max(hi.abs()).max(1.0);
    let mut conv = SimpleConvergency {
        eps: 4.0 * f64::EPSILON * scale,
        max_iter: 400,
    };
    match find_root_brent(lo, hi, f, &mut conv) {
        Ok(x) => Some(x),
        Err(SearchError::NoBracketing) => None,
        // Brent halves the bracket at worst, so 400 steps exhaust f64 precision;
        // treat the rare stall like a missing bracket rather than guessing.
        Err(_) => None,
    }
}
