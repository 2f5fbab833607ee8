//! One-dimensional maximization by golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// Returns the best point evaluated, endpoints included, so the result is
/// never worse than either end of the bracket even when `f` is not
/// unimodal there.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let mut best = (lo, f(lo));
    let consider = |x: f64, fx: f64, best: &mut (f64, f64)| {
        // ties go to the earlier point
        if fx > best.1 || (fx == best.1 && x < best.0) {
            *best = (x, fx);
        }
    };
    if hi <= lo {
        return best;
    }
    let f_hi = f(hi);
    consider(hi, f_hi, &mut best);

    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            consider(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            consider(d, fd, &mut best);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3141).powi(2), -1.0, 2.0, 1e-9);
        assert!((x - 0.3141).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }

    #[test]
    fn monotone_function_returns_endpoint() {
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-6);
        assert_eq!(x, 1.0);
        let (x, _) = golden_section_max(|x| -x, 0.0, 1.0, 1e-6);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn degenerate_bracket() {
        let (x, fx) = golden_section_max(|x| x * 2.0, 3.0, 3.0, 1e-6);
        assert_eq!((x, fx), (3.0, 6.0));
    }
}
