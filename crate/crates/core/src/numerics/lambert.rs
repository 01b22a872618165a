use crate::{Error, Real, Result};

const MAX_ITERATIONS: usize = 64;

/// Lower real branch `W₋₁` of the Lambert W function.
///
/// Returns the `w ≤ -1` solving `w eʷ = x` for `x ∈ [-1/e, 0)`. Starting
/// values come from the branch-point expansion within `1e-4` of `-1/e` and
/// from `ln(-x) - ln(-ln(-x))` elsewhere; Halley's iteration refines them.
/// Inputs within a few ulps below `-1/e` are treated as the branch point.
pub fn lambert_w_m1<T: Real>(x: T) -> Result<T> {
    let e = T::E();
    let branch = -e.recip();
    let slack = T::lit(8.0) * T::epsilon() * branch.abs();
    if !x.is_finite() || x >= T::zero() || x < branch - slack {
        return Err(Error::domain("lambert_w_m1", x.as_f64(), "-1/e <= x < 0"));
    }
    // 1 + e·x measures the distance to the branch point
    let dist = T::one() + e * x;
    if dist <= T::zero() {
        return Ok(-T::one());
    }

    let mut w = if dist < T::lit(1e-4) * e {
        let s = (T::lit(2.0) * dist).sqrt();
        -T::one() - s - s * s / T::lit(3.0) - T::lit(11.0 / 72.0) * s * s * s
    } else {
        let l1 = (-x).ln();
        l1 - (-l1).ln()
    };

    let two = T::lit(2.0);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + T::one();
        if wp1 == T::zero() {
            break;
        }
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = (w - step).min(-T::one());
        let done = (next - w).abs() <= T::lit(4.0) * T::epsilon() * w.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}
