use crate::error::{Error, Result};

/// Largest `t` in `[lo, hi]` for which a monotone (true-then-false)
/// predicate holds, to within `tol`.
///
/// Returns exactly `hi` when `predicate(hi)` is true. The returned value
/// always satisfies the predicate; `value + tol` lies past the last
/// evaluated true point.
pub fn bisect_max<F>(mut predicate: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(tol > 0.0) || !(lo <= hi) {
        return Err(Error::InvalidParameter(format!(
            "bisection needs lo <= hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})"
        )));
    }
    if !predicate(lo)? {
        return Err(Error::NotEvenLo { lo });
    }
    if predicate(hi)? {
        return Ok(hi);
    }
    let (mut good, mut bad) = (lo, hi);
    while bad - good > tol {
        let mid = 0.5 * (good + bad);
        if predicate(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}
