use crate::error::LinalgError;
use crate::real::Real;

/// Evaluates a polynomial given by ascending coefficients (Horner).
pub fn poly_eval<T: Real>(coeffs: &[T], x: &T) -> T {
    let mut it = coeffs.iter().rev();
    let mut acc = it.next().expect("empty polynomial").clone();
    for c in it {
        acc = acc * x + c;
    }
    acc
}

/// Evaluates `(p(x), p'(x))` in one pass.
pub fn poly_eval_with_derivative<T: Real>(coeffs: &[T], x: &T) -> (T, T) {
    let mut it = coeffs.iter().rev();
    let mut p = it.next().expect("empty polynomial").clone();
    let mut dp = T::zero(x.precision().max(p.precision()));
    for c in it {
        dp = dp * x + &p;
        p = p * x + c;
    }
    (p, dp)
}

/// Locates every real root in `(0, 1]` of a polynomial whose roots are all
/// simple and lie in that interval, returning them in ascending order.
///
/// Roots are bracketed by sign changes on a uniform grid, narrowed by
/// bisection and then polished by Newton's method at the working precision
/// of the coefficients. The grid extends one cell past 1 so a root sitting
/// exactly on the right endpoint is still bracketed.
pub fn poly_roots_real<T: Real>(coeffs: &[T]) -> Result<Vec<T>, LinalgError> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Ok(Vec::new());
    }
    let prec = coeffs.iter().map(Real::precision).max().unwrap_or(53);
    let cells = 64 * degree * degree + 64;
    let cells_t = T::from_i64(cells as i64, prec);
    let grid = |i: usize| T::from_i64(i as i64, prec) / &cells_t;

    let mut brackets = Vec::new();
    let mut prev_x = grid(0);
    let mut prev_p = poly_eval(coeffs, &prev_x);
    for i in 1..=cells + 1 {
        let x = grid(i);
        let p = poly_eval(coeffs, &x);
        if p.is_zero() {
            brackets.push((x.clone(), x.clone()));
        } else if !prev_p.is_zero() && sign(&p) != sign(&prev_p) {
            brackets.push((prev_x.clone(), x.clone()));
        }
        prev_x = x;
        prev_p = p;
    }

    let one = T::one(prec);
    let mut roots: Vec<T> = brackets
        .into_iter()
        .map(|(lo, hi)| polish(coeffs, lo, hi, prec))
        .filter(|r| r.to_f64() > 0.0 && r.to_f64() <= 1.0 + 1e-9)
        .map(|r| r.min_of(one.clone()))
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots.dedup_by(|a, b| (a.clone() - &*b).abs().to_f64() < 1e-12);

    if roots.len() != degree {
        return Err(LinalgError::RootCountMismatch {
            expected: degree,
            found: roots.len(),
        });
    }
    Ok(roots)
}

fn sign<T: Real>(x: &T) -> bool {
    x.to_f64() > 0.0
}

fn polish<T: Real>(coeffs: &[T], mut lo: T, mut hi: T, prec: u32) -> T {
    let two = T::from_i64(2, prec);
    if lo == hi {
        return lo;
    }
    let p_lo = sign(&poly_eval(coeffs, &lo));
    for _ in 0..48 {
        let mid = (lo.clone() + &hi) / &two;
        let p = poly_eval(coeffs, &mid);
        if p.is_zero() {
            return mid;
        }
        if sign(&p) == p_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = (lo + &hi) / &two;
    let eps = T::epsilon(prec);
    let mut last_step: Option<T> = None;
    for _ in 0..200 {
        let (p, dp) = poly_eval_with_derivative(coeffs, &x);
        if p.is_zero() || dp.is_zero() {
            break;
        }
        let step = p / &dp;
        x -= &step;
        let size = step.abs();
        if size <= eps.clone() * &x.abs() {
            break;
        }
        // Corrections stopped shrinking: we are at the roundoff floor.
        if last_step.as_ref().is_some_and(|prev| size >= *prev) {
            break;
        }
        last_step = Some(size);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::MpFloat;

    #[test]
    fn linear_root_at_one() {
        let r = poly_roots_real(&[-1.0f64, 1.0]).unwrap();
        assert_eq!(r, vec![1.0]);
    }

    #[test]
    fn quadratic_matches_formula() {
        // 3x^2 - 4x + 1
        let r = poly_roots_real(&[1.0f64, -4.0, 3.0]).unwrap();
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((r[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_radau_nodes_at_extended_precision() {
        // d^2/dx^2 [x^2 (x-1)^3] = 20x^3 - 36x^2 + 18x - 2
        let prec = 256;
        let c: Vec<MpFloat> = [-2, 18, -36, 20]
            .iter()
            .map(|&k| MpFloat::from_i64(k, prec))
            .collect();
        let r = poly_roots_real(&c).unwrap();
        let s6 = MpFloat::from_i64(6, prec).sqrt();
        let ten = MpFloat::from_i64(10, prec);
        let four = MpFloat::from_i64(4, prec);
        let exact = [
            (four.clone() - &s6) / &ten,
            (four + &s6) / &ten,
            MpFloat::one(prec),
        ];
        for (got, want) in r.iter().zip(&exact) {
            let err = (got.clone() - want).abs().to_f64();
            assert!(err < 2f64.powi(-245), "{err:e}");
        }
    }

    #[test]
    fn missing_roots_are_reported() {
        // x^2 + 1 has no real roots.
        assert!(matches!(
            poly_roots_real(&[1.0f64, 0.0, 1.0]),
            Err(LinalgError::RootCountMismatch { expected: 2, found: 0 })
        ));
    }
}
