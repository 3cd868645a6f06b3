//! Radau IIA tableaus derived from the collocation conditions.
//!
//! The nodes are the roots of `d^(s-1)/dx^(s-1) [x^(s-1) (x-1)^s]`, whose
//! integer coefficients are expanded exactly. With `V[i][j] = c[i]^j` and
//! `Q[i][j] = c[i]^(j+1) / (j+1)` the coefficient matrix is `a = Q · V⁻¹`
//! and the weights are its last row.
//!
//! The embedded weights add a node at `t_n` carrying the weight `1/γ`, with
//! `γ` the real eigenvalue of `a⁻¹`; the stage weights `b̃` then solve the
//! first `s` moment conditions. Without that extra node the moment system has
//! the main weights `b` as its unique solution and the error estimate would
//! vanish identically.
//!
//! Stage counts above 13 work but the Vandermonde systems lose roughly
//! `2s` bits of accuracy; pair them with extended precision.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, RwLock};

use crate::error::TableauError;
use crate::linalg::{mat_inverse, poly_roots_real, solve, Matrix};
use crate::real::{MpFloat, Real};
use crate::spectral::{transform_from_inverse, SpectralTransform};

/// Largest stage count used by the default order range (order 25).
pub const DEFAULT_MAX_STAGES: usize = 13;

#[derive(Clone, Debug)]
pub struct RadauTableau<T> {
    pub stages: usize,
    pub c: Vec<T>,
    pub a: Matrix<T>,
    pub a_inv: Matrix<T>,
    pub b: Vec<T>,
    /// Embedded stage weights.
    pub b_tilde: Vec<T>,
    /// Embedded weight on `f(t_n, y_n)`.
    pub b_tilde_0: T,
    pub precision_bits: u32,
}

impl<T: Real> RadauTableau<T> {
    pub fn order(&self) -> usize {
        2 * self.stages - 1
    }
}

/// A tableau together with the transform used by the Newton solver and the
/// error-estimate coefficients `(b - b̃)ᵀ · a⁻¹` that act on stage increments.
#[derive(Clone, Debug)]
pub struct RadauMethod<T> {
    pub tableau: RadauTableau<T>,
    pub transform: SpectralTransform<T>,
    pub error_coeffs: Vec<T>,
}

pub fn stages_for_order(order: usize) -> usize {
    order.div_ceil(2)
}

pub fn order_for_stages(stages: usize) -> usize {
    2 * stages - 1
}

fn check_args(s: usize, prec: u32) -> Result<(), TableauError> {
    if s == 0 || s % 2 == 0 {
        return Err(TableauError::InvalidStages(s));
    }
    if prec < 53 {
        return Err(TableauError::InvalidPrecision(prec));
    }
    Ok(())
}

/// Ascending integer coefficients of `d^(s-1)/dx^(s-1) [x^(s-1) (x-1)^s]`.
pub fn radau_polynomial(s: usize) -> Vec<i128> {
    let mut binom = 1i128;
    (0..=s)
        .map(|k| {
            if k > 0 {
                binom = binom * (s - k + 1) as i128 / k as i128;
            }
            // x^(s-1+k) differentiated s-1 times gives (s-1+k)!/k! x^k.
            let falling: i128 = ((k + 1)..=(s - 1 + k)).map(|m| m as i128).product();
            let sign = if (s - k) % 2 == 0 { 1 } else { -1 };
            sign * binom * falling
        })
        .collect()
}

pub fn radau_nodes<T: Real>(s: usize, prec: u32) -> Result<Vec<T>, TableauError> {
    check_args(s, prec)?;
    let coeffs: Vec<T> = radau_polynomial(s)
        .iter()
        .map(|k| T::parse(&k.to_string(), prec).expect("integer literal"))
        .collect();
    let mut c = poly_roots_real(&coeffs)?;
    // x = 1 is an exact root; pin it.
    c[s - 1] = T::one(prec);
    Ok(c)
}

/// Solves `Σⱼ b̃ⱼ cⱼ^(k-1) = 1/k - b̃₀·[k = 1]` for `k = 1..s`, where `b̃₀` is
/// the weight placed on the left endpoint. With `b̃₀ = 0` this is the plain
/// interpolatory quadrature on the nodes `c`.
pub fn embedded_weights<T: Real>(c: &[T], b_tilde_0: &T) -> Result<Vec<T>, TableauError> {
    let s = c.len();
    let prec = c.iter().map(Real::precision).max().unwrap_or(53);
    let vt = Matrix::from_fn(s, s, |k, j| c[j].powi(k as i32));
    let mut rhs: Vec<T> = (1..=s)
        .map(|k| T::one(prec) / &T::from_i64(k as i64, prec))
        .collect();
    rhs[0] -= b_tilde_0;
    Ok(solve(&vt, &rhs)?)
}

/// Extra bits carried through the derivation. The Vandermonde solves lose
/// about `2s` bits and the error estimate relies on moment cancellations in
/// the rounded coefficients.
pub fn guard_bits(s: usize) -> u32 {
    64 + 8 * s as u32
}

/// Builds the tableau and its spectral transform, derived with
/// [`guard_bits`] extra precision and rounded once to `prec` bits.
pub fn build_method<T: Real>(s: usize, prec: u32) -> Result<RadauMethod<T>, TableauError> {
    check_args(s, prec)?;
    let wide = derive_method::<MpFloat>(s, prec + guard_bits(s))?;
    Ok(round_method(&wide, prec))
}

fn round_vec<T: Real>(v: &[MpFloat], prec: u32) -> Vec<T> {
    v.iter().map(|x| T::from_mp(x, prec)).collect()
}

fn round_matrix<T: Real>(m: &Matrix<MpFloat>, prec: u32) -> Matrix<T> {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| T::from_mp(&m[(i, j)], prec))
}

fn round_method<T: Real>(m: &RadauMethod<MpFloat>, prec: u32) -> RadauMethod<T> {
    let tab = &m.tableau;
    let tr = &m.transform;
    RadauMethod {
        tableau: RadauTableau {
            stages: tab.stages,
            c: round_vec(&tab.c, prec),
            a: round_matrix(&tab.a, prec),
            a_inv: round_matrix(&tab.a_inv, prec),
            b: round_vec(&tab.b, prec),
            b_tilde: round_vec(&tab.b_tilde, prec),
            b_tilde_0: T::from_mp(&tab.b_tilde_0, prec),
            precision_bits: prec,
        },
        transform: SpectralTransform {
            stages: tr.stages,
            gamma: T::from_mp(&tr.gamma, prec),
            pairs: tr
                .pairs
                .iter()
                .map(|(a, b)| (T::from_mp(a, prec), T::from_mp(b, prec)))
                .collect(),
            t: round_matrix(&tr.t, prec),
            t_inv: round_matrix(&tr.t_inv, prec),
        },
        error_coeffs: round_vec(&m.error_coeffs, prec),
    }
}

/// Derivation at the working precision of `T`.
fn derive_method<T: Real>(s: usize, prec: u32) -> Result<RadauMethod<T>, TableauError> {
    let c = radau_nodes::<T>(s, prec)?;
    let c_powers = Matrix::from_fn(s, s, |i, j| c[i].powi(j as i32));
    let c_q = Matrix::from_fn(s, s, |i, j| {
        c_powers[(i, j)].clone() * &c[i] / &T::from_i64(j as i64 + 1, prec)
    });
    let a = c_q.matmul(&mat_inverse(&c_powers)?)?;
    let a_inv = mat_inverse(&a)?;
    let b = a.row(s - 1).to_vec();

    let transform = transform_from_inverse(&a_inv)?;
    let b_tilde_0 = T::one(prec) / &transform.gamma;
    let b_tilde = embedded_weights(&c, &b_tilde_0)?;

    let diff: Vec<T> = b
        .iter()
        .zip(&b_tilde)
        .map(|(x, y)| x.clone() - y)
        .collect();
    let error_coeffs = a_inv.transpose().mul_vec(&diff)?;

    Ok(RadauMethod {
        tableau: RadauTableau {
            stages: s,
            c,
            a,
            a_inv,
            b,
            b_tilde,
            b_tilde_0,
            precision_bits: prec,
        },
        transform,
        error_coeffs,
    })
}

pub fn build_tableau<T: Real>(s: usize, prec: u32) -> Result<RadauTableau<T>, TableauError> {
    Ok(build_method(s, prec)?.tableau)
}

/// Stability function `R(z) = 1 + z·bᵀ(I - z·a)⁻¹·𝟙` at `z = re + i·im`,
/// returned as `(Re R, Im R)`.
pub fn stability_function<T: Real>(tab: &RadauTableau<T>, re: &T, im: &T) -> Result<(T, T), TableauError> {
    let s = tab.stages;
    let prec = tab.precision_bits;
    // (I - z a)(u + i w) = 1  in real form [[P, -Q], [Q, P]] with P = I - re·a, Q = -im·a.
    let mut m = Matrix::zeros(2 * s, 2 * s, prec);
    for i in 0..s {
        for j in 0..s {
            let mut p = -(re.clone() * &tab.a[(i, j)]);
            if i == j {
                p += &T::one(prec);
            }
            let q = -(im.clone() * &tab.a[(i, j)]);
            m[(i, j)] = p.clone();
            m[(s + i, s + j)] = p;
            m[(i, s + j)] = -q.clone();
            m[(s + i, j)] = q;
        }
    }
    let mut rhs = vec![T::one(prec); s];
    rhs.extend(vec![T::zero(prec); s]);
    let x = solve(&m, &rhs)?;
    let mut u = T::zero(prec);
    let mut w = T::zero(prec);
    for j in 0..s {
        u += &(tab.b[j].clone() * &x[j]);
        w += &(tab.b[j].clone() * &x[s + j]);
    }
    let r_re = T::one(prec) + &(re.clone() * &u) - &(im.clone() * &w);
    let r_im = re.clone() * &w + &(im.clone() * &u);
    Ok((r_re, r_im))
}

/// Process-wide store of derived methods keyed by `(stages, precision)`.
///
/// Concurrent readers share the lock; two threads racing on the first build
/// of a key may both build, and the first insertion wins.
pub struct TableauCache<T> {
    entries: RwLock<HashMap<(usize, u32), Arc<RadauMethod<T>>>>,
    builds: AtomicUsize,
}

impl<T: Real> Default for TableauCache<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> TableauCache<T> {
    pub fn new() -> Self {
        TableauCache {
            entries: RwLock::new(HashMap::new()),
            builds: AtomicUsize::new(0),
        }
    }

    pub fn get_or_build(&self, s: usize, prec: u32) -> Result<Arc<RadauMethod<T>>, TableauError> {
        if let Some(m) = self.get(s, prec) {
            return Ok(m);
        }
        let built = Arc::new(build_method::<T>(s, prec)?);
        self.builds.fetch_add(1, Ordering::Relaxed);
        let mut map = self.entries.write().expect("tableau cache poisoned");
        Ok(map.entry((s, prec)).or_insert(built).clone())
    }

    pub fn get(&self, s: usize, prec: u32) -> Option<Arc<RadauMethod<T>>> {
        self.entries
            .read()
            .expect("tableau cache poisoned")
            .get(&(s, prec))
            .cloned()
    }

    /// Builds the tableaus for the given method orders ahead of time.
    pub fn prewarm(&self, orders: &[usize], prec: u32) -> Result<(), TableauError> {
        for &p in orders {
            self.get_or_build(stages_for_order(p), prec)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("tableau cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of tableau derivations performed so far.
    pub fn build_count(&self) -> usize {
        self.builds.load(Ordering::Relaxed)
    }
}

/// Shorthand for `cache.get_or_build(s, prec)`.
pub fn cache_get_or_build<T: Real>(
    cache: &TableauCache<T>,
    s: usize,
    prec: u32,
) -> Result<Arc<RadauMethod<T>>, TableauError> {
    cache.get_or_build(s, prec)
}

#[cfg(test)]
mod tests {
    use super::*;


    #[test]
    fn polynomial_coefficients() {
        assert_eq!(radau_polynomial(1), vec![-1, 1]);
        assert_eq!(radau_polynomial(2), vec![1, -4, 3]);
        assert_eq!(radau_polynomial(3), vec![-2, 18, -36, 20]);
    }

    #[test]
    fn nodes_small_cases() {
        assert_eq!(radau_nodes::<f64>(1, 53).unwrap(), vec![1.0]);
        let c = radau_nodes::<f64>(3, 53).unwrap();
        let s6 = 6f64.sqrt();
        assert!((c[0] - (4.0 - s6) / 10.0).abs() < 1e-15);
        assert!((c[1] - (4.0 + s6) / 10.0).abs() < 1e-15);
        assert_eq!(c[2], 1.0);
    }

    #[test]
    fn five_nodes_are_roots() {
        let c = radau_nodes::<MpFloat>(5, 128).unwrap();
        assert_eq!(c.len(), 5);
        let coeffs: Vec<MpFloat> = radau_polynomial(5)
            .iter()
            .map(|&k| MpFloat::from_i64(k as i64, 128))
            .collect();
        for (i, x) in c.iter().enumerate() {
            assert!(x.to_f64() > 0.0 && x.to_f64() <= 1.0);
            if i > 0 {
                assert!(*x > c[i - 1]);
            }
            let r = crate::linalg::poly_eval(&coeffs, x).abs().to_f64();
            assert!(r < 1e-30, "{r:e}");
        }
    }

    #[test]
    fn invalid_arguments() {
        assert_eq!(
            radau_nodes::<f64>(2, 53).unwrap_err(),
            TableauError::InvalidStages(2)
        );
        assert_eq!(
            build_tableau::<f64>(3, 24).unwrap_err(),
            TableauError::InvalidPrecision(24)
        );
    }

    #[test]
    fn backward_euler() {
        let t = build_tableau::<f64>(1, 53).unwrap();
        assert_eq!(t.a, Matrix::from_f64_rows(&[&[1.0]], 53));
        assert_eq!(t.b, vec![1.0]);
        assert_eq!(t.c, vec![1.0]);
        // explicit Euler is the embedded partner
        assert_eq!(t.b_tilde_0, 1.0);
        assert_eq!(t.b_tilde, vec![0.0]);
    }

    #[test]
    fn three_stage_coefficients() {
        let t = build_tableau::<f64>(3, 53).unwrap();
        let s6 = 6f64.sqrt();
        let exact = [
            [(88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0, (-2.0 + 3.0 * s6) / 225.0],
            [(296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0, (-2.0 - 3.0 * s6) / 225.0],
            [(16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((t.a[(i, j)] - exact[i][j]).abs() < 1e-14);
            }
        }
        assert_eq!(t.b.as_slice(), t.a.row(2));
    }

    #[test]
    fn embedded_weights_plain_quadrature() {
        let w = embedded_weights(&[1.0f64], &0.0).unwrap();
        assert_eq!(w, vec![1.0]);
        let w = embedded_weights(&[1.0f64 / 3.0, 1.0], &0.0).unwrap();
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn embedded_weights_satisfy_moments() {
        let t = build_tableau::<f64>(3, 53).unwrap();
        for k in 1..=3 {
            let mut m = if k == 1 { t.b_tilde_0 } else { 0.0 };
            for j in 0..3 {
                m += t.b_tilde[j] * t.c[j].powi(k - 1);
            }
            assert!((m - 1.0 / k as f64).abs() < 10.0 * f64::EPSILON);
        }
        // genuinely lower order
        let m4: f64 = (0..3).map(|j| t.b_tilde[j] * t.c[j].powi(3)).sum();
        assert!((m4 - 0.25).abs() > 1e-3);
    }

    #[test]
    fn cache_semantics() {
        let cache = TableauCache::<MpFloat>::new();
        let a = cache.get_or_build(3, 53).unwrap();
        assert_eq!(cache.build_count(), 1);
        let b = cache.get_or_build(3, 53).unwrap();
        assert_eq!(cache.build_count(), 1);
        assert!(Arc::ptr_eq(&a, &b));
        cache.get_or_build(3, 256).unwrap();
        assert_eq!(cache.len(), 2);

        let warm = TableauCache::<f64>::new();
        warm.prewarm(&[5, 9, 13], 53).unwrap();
        assert_eq!(warm.len(), 3);
        assert!(warm.get(7, 53).is_some());
    }

    #[test]
    fn stability_spot_values() {
        let t = build_tableau::<f64>(3, 53).unwrap();
        let (re, im) = stability_function(&t, &-1e8, &0.0).unwrap();
        assert!(re.hypot(im) < 1e-6);
        let (re, im) = stability_function(&t, &0.0, &10.0).unwrap();
        assert!(re.hypot(im) <= 1.0 + 1e-10);
        // R(z) ≈ e^z near the origin
        let (re, _) = stability_function(&t, &-0.01, &0.0).unwrap();
        assert!((re - (-0.01f64).exp()).abs() < 1e-14);
    }
}
