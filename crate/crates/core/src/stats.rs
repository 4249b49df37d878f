//! Small descriptive statistics used by the surrogate and search summaries.

use crate::scalar::Scalar;

pub fn mean<T: Scalar>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::from_count(xs.len())
}

/// Mean squared difference between two equally long slices.
pub fn mse<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "mse of unequal lengths");
    if a.is_empty() {
        return T::zero();
    }
    let s: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    s / T::from_count(a.len())
}

/// Pearson correlation; 0 when either side has zero variance. Clamped to
/// `[-1, 1]` against rounding.
pub fn pearson<T: Scalar>(a: &[T], b: &[T]) -> T {
    assert_eq!(a.len(), b.len(), "pearson of unequal lengths");
    if a.len() < 2 {
        return T::zero();
    }
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = T::zero();
    let mut saa = T::zero();
    let mut sbb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return T::zero();
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    r.max(-T::one()).min(T::one())
}

/// Quantile with linear interpolation between order statistics (the
/// "type 7" rule). `q` in `[0, 1]`; `None` for an empty sample.
pub fn quantile<T: Scalar>(xs: &[T], q: f64) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let mut s = xs.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let h = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = T::lit(h - lo as f64);
    Some(s[lo] + (s[hi] - s[lo]) * frac)
}

pub fn median<T: Scalar>(xs: &[T]) -> Option<T> {
    quantile(xs, 0.5)
}
