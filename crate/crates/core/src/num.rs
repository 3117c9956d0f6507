//! Small numeric helpers that `core` does not provide.

/// `base^exp` by repeated squaring.
pub(crate) fn powi(base: f64, exp: usize) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    result
}

/// Tolerance scaled by the magnitude of the reference value.
#[inline]
pub(crate) fn scaled(tol: f64, reference: f64) -> f64 {
    tol * reference.abs().max(1.0)
}

/// Pairwise (tree) summation of `slices`, element-wise.
///
/// Every slice must have length `len`. Returns zeros for an empty input.
pub(crate) fn pairwise_sum<'a, F>(count: usize, len: usize, get: &F) -> alloc::vec::Vec<f64>
where
    F: Fn(usize) -> &'a [f64],
{
    fn rec<'a, F: Fn(usize) -> &'a [f64]>(lo: usize, hi: usize, out: &mut [f64], get: &F) {
        match hi - lo {
            0 => {}
            1 => out.copy_from_slice(get(lo)),
            2 => {
                for ((o, a), b) in out.iter_mut().zip(get(lo)).zip(get(lo + 1)) {
                    *o = a + b;
                }
            }
            n => {
                let mid = lo + n / 2;
                let mut right = alloc::vec![0.0; out.len()];
                rec(lo, mid, out, get);
                rec(mid, hi, &mut right, get);
                for (o, r) in out.iter_mut().zip(&right) {
                    *o += r;
                }
            }
        }
    }
    let mut out = alloc::vec![0.0; len];
    rec(0, count, &mut out, get);
    out
}

pub(crate) fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
