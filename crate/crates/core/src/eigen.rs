//! Dense eigendecomposition of small complex matrices.
//!
//! [`eig_general`] reduces the matrix to upper Hessenberg form with
//! Householder reflections, runs single-shift complex QR (Wilkinson shifts,
//! Givens rotations) to a Schur form `H = Z T Z^H`, and recovers eigenvectors
//! by back substitution on `T`. [`eig2_closed_form`] is the independent
//! two-level formula `(ε1 + ε2)/2 ± Z`.
//!
//! For complex-symmetric matrices the natural pairing between eigenvectors
//! is the c-product `φᵀψ` (no conjugation); [`c_normalize`] rescales each
//! vector so that `φᵀφ = 1`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub const DEFAULT_TOL_RESID: f64 = 1e-10;
pub const DEFAULT_TOL_DEFECT: f64 = 1e-8;

/// QR sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_VALUE: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    #[error("matrix must be square with at least one row, got {rows}x{cols}")]
    Shape { rows: usize, cols: usize },
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("eigensolver did not converge (worst relative residual {worst_residual:e})")]
    NoConvergence { worst_residual: f64 },
    #[error("eigenvector {0} is zero")]
    ZeroVector(usize),
}

/// Eigenvalues with right eigenvectors; for `H = Hᵀ` these are also the left
/// eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<Complex64>,
    pub vectors: Vec<DVector<Complex64>>,
    /// Per vector: whether `φᵀφ = 1` was achieved.
    pub c_norms_ok: Vec<bool>,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Reorders states so that new state `i` is old state `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> EigenSystem {
        EigenSystem {
            values: order.iter().map(|&k| self.values[k]).collect(),
            vectors: order.iter().map(|&k| self.vectors[k].clone()).collect(),
            c_norms_ok: order.iter().map(|&k| self.c_norms_ok[k]).collect(),
        }
    }
}

/// Result of the two-level closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevel {
    /// `[(ε1 + ε2)/2 + Z, (ε1 + ε2)/2 − Z]`
    pub values: [Complex64; 2],
    pub z: Complex64,
}

/// Square root with the branch fixed to `Re ≥ 0`, and `Im ≥ 0` when `Re = 0`.
pub fn branch_sqrt(w: Complex64) -> Complex64 {
    let s = w.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}

/// `c-product` φᵀψ.
pub fn c_product(phi: &DVector<Complex64>, psi: &DVector<Complex64>) -> Complex64 {
    phi.iter().zip(psi.iter()).map(|(a, b)| a * b).sum()
}

/// Eigenvalues of `[[ε1, ω], [ω, ε2]]` as `(ε1 + ε2)/2 ± Z` with
/// `Z = ½·√((ε1 − ε2)² + 4ω²)`.
pub fn eig2_closed_form(h: &[[Complex64; 2]; 2]) -> TwoLevel {
    let (e1, e2) = (h[0][0], h[1][1]);
    let diff = e1 - e2;
    let z = 0.5 * branch_sqrt(diff * diff + 4.0 * h[0][1] * h[1][0]);
    let mean = 0.5 * (e1 + e2);
    TwoLevel {
        values: [mean + z, mean - z],
        z,
    }
}

/// Same as [`eig2_closed_form`] for a 2×2 `DMatrix`.
pub fn eig2_closed_form_matrix(h: &DMatrix<Complex64>) -> TwoLevel {
    eig2_closed_form(&[[h[(0, 0)], h[(0, 1)]], [h[(1, 0)], h[(1, 1)]]])
}

fn ascending(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Full eigendecomposition of a dense complex matrix.
///
/// Eigenvalues come back in ascending order of real part (ties: imaginary
/// part). Vectors have unit Hermitian norm and `c_norms_ok` is all `false`;
/// pass the result through [`c_normalize`] for the c-product convention.
/// Every pair satisfies `‖Hφ − 𝓔φ‖ ≤ tol_resid·‖H‖_F`.
pub fn eig_general(h: &DMatrix<Complex64>, tol_resid: f64) -> Result<EigenSystem, EigenError> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(EigenError::Shape {
            rows: h.nrows(),
            cols: h.ncols(),
        });
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let norm = h.norm();

    let mut t = h.clone();
    let mut q = DMatrix::<Complex64>::identity(n, n);
    hessenberg(&mut t, &mut q);
    schur_qr(&mut t, &mut q, norm)?;

    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vectors = triangular_eigenvectors(&t, &q);

    let mut worst = 0.0f64;
    for (k, v) in vectors.iter_mut().enumerate() {
        let mut res = relative_residual(h, values[k], v, norm);
        if res > tol_resid {
            inverse_iteration(h, values[k], v, norm);
            res = relative_residual(h, values[k], v, norm);
        }
        worst = worst.max(res);
    }
    if !(worst <= tol_resid) {
        return Err(EigenError::NoConvergence { worst_residual: worst });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ascending(&values[a], &values[b]));
    Ok(EigenSystem {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: order.iter().map(|&k| vectors[k].clone()).collect(),
        c_norms_ok: vec![false; n],
    })
}

/// `‖Hφ − λφ‖ / ‖H‖_F` (absolute when `H = 0`).
pub fn relative_residual(h: &DMatrix<Complex64>, lambda: Complex64, v: &DVector<Complex64>, norm: f64) -> f64 {
    let r = (h * v - v * lambda).norm();
    if norm > 0.0 {
        r / norm
    } else {
        r
    }
}

/// Householder reduction to upper Hessenberg form; `q` accumulates the
/// unitary similarity so that `A = Q H Q^H`.
fn hessenberg(a: &mut DMatrix<Complex64>, q: &mut DMatrix<Complex64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n - 2 {
        let xnorm = (k + 1..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        let tail = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum::<f64>();
        if xnorm == 0.0 || tail == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A ← P A with P = I − 2 v v^H acting on rows k+1..n
        for j in 0..n {
            let dot: Complex64 = v.iter().enumerate().map(|(r, vr)| vr.conj() * a[(k + 1 + r, j)]).sum();
            for (r, vr) in v.iter().enumerate() {
                a[(k + 1 + r, j)] -= 2.0 * vr * dot;
            }
        }
        // A ← A P, Q ← Q P
        for m in [&mut *a, &mut *q] {
            for i in 0..n {
                let dot: Complex64 = v.iter().enumerate().map(|(r, vr)| m[(i, k + 1 + r)] * vr).sum();
                for (r, vr) in v.iter().enumerate() {
                    m[(i, k + 1 + r)] -= 2.0 * dot * vr.conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = zero;
        }
    }
}

/// Rotation `G = [[c, s], [−s̄, c]]` with `G·[a, b]ᵀ = [r, 0]ᵀ`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r)
}

/// Eigenvalue of the trailing 2×2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = 0.5 * (a - d);
    let disc = (half * half + b * c).sqrt();
    let mean = 0.5 * (a + d);
    let (l1, l2) = (mean + disc, mean - disc);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Shifted QR on an upper Hessenberg matrix, reducing it to upper triangular
/// form in place and accumulating the transformations into `z`.
fn schur_qr(t: &mut DMatrix<Complex64>, z: &mut DMatrix<Complex64>, norm: f64) -> Result<(), EigenError> {
    let n = t.nrows();
    let zero = Complex64::new(0.0, 0.0);
    let eps = f64::EPSILON;
    let budget = MAX_SWEEPS_PER_VALUE * n;
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    let mut rotations: Vec<(f64, Complex64)> = Vec::with_capacity(n);

    while hi > 0 {
        // start of the active unreduced block
        let mut lo = hi;
        while lo > 0 {
            let mut scale = t[(lo - 1, lo - 1)].norm() + t[(lo, lo)].norm();
            if scale == 0.0 {
                scale = norm;
            }
            if t[(lo, lo - 1)].norm() <= eps * scale {
                t[(lo, lo - 1)] = zero;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            since_deflation = 0;
            continue;
        }

        total += 1;
        since_deflation += 1;
        if total > budget {
            let worst = (1..n).map(|i| t[(i, i - 1)].norm()).fold(0.0, f64::max);
            return Err(EigenError::NoConvergence {
                worst_residual: if norm > 0.0 { worst / norm } else { worst },
            });
        }

        let shift = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            t[(hi, hi)] + Complex64::new(0.75 * t[(hi, hi - 1)].norm(), 0.25 * t[(hi, hi - 1)].norm())
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };

        for k in lo..=hi {
            t[(k, k)] -= shift;
        }
        rotations.clear();
        for k in lo..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            for j in k..n {
                let (x, y) = (t[(k, j)], t[(k + 1, j)]);
                t[(k, j)] = c * x + s * y;
                t[(k + 1, j)] = -s.conj() * x + c * y;
            }
            t[(k + 1, k)] = zero;
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = lo + offset;
            let last = (k + 1).min(hi);
            for i in 0..=last {
                let (x, y) = (t[(i, k)], t[(i, k + 1)]);
                t[(i, k)] = c * x + s.conj() * y;
                t[(i, k + 1)] = -s * x + c * y;
            }
            for i in 0..n {
                let (x, y) = (z[(i, k)], z[(i, k + 1)]);
                z[(i, k)] = c * x + s.conj() * y;
                z[(i, k + 1)] = -s * x + c * y;
            }
        }
        for k in lo..=hi {
            t[(k, k)] += shift;
        }
    }
    Ok(())
}

/// Right eigenvectors from the Schur form `T` (upper triangular) and the
/// accumulated unitary `Z`, each normalized to unit Hermitian norm.
fn triangular_eigenvectors(t: &DMatrix<Complex64>, z: &DMatrix<Complex64>) -> Vec<DVector<Complex64>> {
    let n = t.nrows();
    let tnorm = t.norm();
    let small = (f64::EPSILON * tnorm).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut x = DVector::<Complex64>::zeros(n);
        x[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let sum: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * x[j]).sum();
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            x[i] = -sum / d;
            let big = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
            if big > 1e100 {
                x /= Complex64::new(big, 0.0);
            }
        }
        let mut v = z * x;
        let vn = v.norm();
        v /= Complex64::new(vn, 0.0);
        out.push(v);
    }
    out
}

/// Two steps of inverse iteration with a slightly perturbed shift.
fn inverse_iteration(h: &DMatrix<Complex64>, lambda: Complex64, v: &mut DVector<Complex64>, norm: f64) {
    let n = h.nrows();
    let delta = (f64::EPSILON * norm.max(1.0)) * 16.0;
    let shifted = h - DMatrix::<Complex64>::identity(n, n) * (lambda + Complex64::new(delta, delta));
    let lu = shifted.lu();
    for _ in 0..2 {
        match lu.solve(v) {
            Some(y) if y.iter().all(|c| c.re.is_finite() && c.im.is_finite()) && y.norm() > 0.0 => {
                let yn = y.norm();
                *v = y / Complex64::new(yn, 0.0);
            }
            _ => return,
        }
    }
}

/// Rescales every vector to `φᵀφ = 1` and fixes its sign so that the
/// largest-modulus component has argument in `(−π/2, π/2]`.
///
/// Vectors with `|φᵀφ| < tol_defect` (after unit Hermitian normalization)
/// are self-orthogonal to working precision; they are left at unit Hermitian
/// norm and flagged `c_norms_ok = false`.
pub fn c_normalize(system: &EigenSystem, tol_defect: f64) -> Result<EigenSystem, EigenError> {
    let mut vectors = Vec::with_capacity(system.len());
    let mut flags = Vec::with_capacity(system.len());
    for (k, v) in system.vectors.iter().enumerate() {
        let hn = v.norm();
        if !(hn > 0.0) {
            return Err(EigenError::ZeroVector(k));
        }
        let unit = v / Complex64::new(hn, 0.0);
        let s = c_product(&unit, &unit);
        if s.norm() < tol_defect {
            vectors.push(unit);
            flags.push(false);
            continue;
        }
        let mut phi = unit / s.sqrt();
        let lead = phi
            .iter()
            .enumerate()
            .fold((0usize, -1.0f64), |(bi, bm), (i, c)| if c.norm() > bm { (i, c.norm()) } else { (bi, bm) })
            .0;
        let p = phi[lead];
        if !(p.re > 0.0 || (p.re == 0.0 && p.im > 0.0)) {
            phi = -phi;
        }
        vectors.push(phi);
        flags.push(true);
    }
    Ok(EigenSystem {
        values: system.values.clone(),
        vectors,
        c_norms_ok: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn closed_form_symmetric_two_level() {
        let r = eig2_closed_form(&[[c(0.0, 0.0), c(0.2, 0.0)], [c(0.2, 0.0), c(0.0, 0.0)]]);
        assert!(close(r.z, c(0.2, 0.0), 1e-16));
        assert!(close(r.values[0], c(0.2, 0.0), 1e-16));
        assert!(close(r.values[1], c(-0.2, 0.0), 1e-16));
    }

    #[test]
    fn closed_form_exact_coalescence() {
        // (ε1 − ε2)² = (−0.4i)² = −0.16 cancels 4ω² = 0.16
        let e = 0.7;
        let r = eig2_closed_form(&[[c(e, -0.5), c(0.2, 0.0)], [c(0.2, 0.0), c(e, -0.1)]]);
        assert!(r.z.norm() < 1e-8, "{:?}", r.z);
        for v in r.values {
            assert!(close(v, c(e, -0.3), 1e-8));
        }
    }

    #[test]
    fn closed_form_decoupled() {
        let r = eig2_closed_form(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]);
        assert_eq!(r.z, c(1.0, 0.0));
        assert_eq!(r.values, [c(1.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn branch_convention() {
        assert_eq!(branch_sqrt(c(-4.0, 0.0)), c(0.0, 2.0));
        assert_eq!(branch_sqrt(c(-4.0, -0.0)), c(0.0, 2.0));
        let s = branch_sqrt(c(-1.0, -1e-3));
        assert!(s.re > 0.0);
    }

    #[test]
    fn diagonal_input_gives_basis() {
        let d = [c(0.3, -0.1), c(-1.0, 0.0), c(2.0, 0.5), c(0.3, -0.2)];
        let h = DMatrix::from_diagonal(&DVector::from_vec(d.to_vec()));
        let sys = eig_general(&h, DEFAULT_TOL_RESID).unwrap();
        let mut expected = d.to_vec();
        expected.sort_by(ascending);
        assert_eq!(sys.values, expected);
        for (v, lambda) in sys.vectors.iter().zip(&sys.values) {
            let k = d.iter().position(|x| x == lambda).unwrap();
            for i in 0..4 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!(close(v[i], c(want, 0.0), 1e-15));
            }
        }
    }

    #[test]
    fn one_by_one_and_zero_matrix() {
        let h = DMatrix::from_element(1, 1, c(0.5, -0.25));
        let sys = eig_general(&h, DEFAULT_TOL_RESID).unwrap();
        assert_eq!(sys.values, vec![c(0.5, -0.25)]);

        let zero = DMatrix::<Complex64>::zeros(3, 3);
        let sys = eig_general(&zero, DEFAULT_TOL_RESID).unwrap();
        assert!(sys.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            eig_general(&DMatrix::<Complex64>::zeros(2, 3), 1e-10),
            Err(EigenError::Shape { .. })
        ));
        let mut h = DMatrix::<Complex64>::zeros(2, 2);
        h[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(eig_general(&h, 1e-10), Err(EigenError::NonFinite));
    }

    #[test]
    fn jordan_block_converges() {
        // exactly defective: [[1, 1], [0, 1]]
        let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let sys = eig_general(&h, DEFAULT_TOL_RESID).unwrap();
        for v in &sys.values {
            assert!(close(*v, c(1.0, 0.0), 1e-12));
        }
    }

    #[test]
    fn sorted_by_real_then_imaginary() {
        let h = DMatrix::from_row_slice(
            3,
            3,
            &[c(1.0, -0.3), c(0.2, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(0.0, -0.1), c(0.2, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(0.5, -0.6)],
        );
        let sys = eig_general(&h, DEFAULT_TOL_RESID).unwrap();
        for w in sys.values.windows(2) {
            assert_ne!(ascending(&w[0], &w[1]), Ordering::Greater);
        }
    }

    #[test]
    fn c_normalize_leaves_real_orthonormal_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sys = EigenSystem {
            values: vec![c(-1.0, 0.0), c(1.0, 0.0)],
            vectors: vec![DVector::from_vec(vec![c(s, 0.0), c(-s, 0.0)]), DVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])],
            c_norms_ok: vec![false, false],
        };
        let out = c_normalize(&sys, DEFAULT_TOL_DEFECT).unwrap();
        assert_eq!(out.c_norms_ok, vec![true, true]);
        for (a, b) in out.vectors.iter().zip(&sys.vectors) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn c_normalize_flags_self_orthogonal_vector() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = DVector::from_vec(vec![c(s, 0.0), c(0.0, s)]);
        let sys = EigenSystem {
            values: vec![c(0.0, 0.0)],
            vectors: vec![v.clone()],
            c_norms_ok: vec![false],
        };
        let out = c_normalize(&sys, DEFAULT_TOL_DEFECT).unwrap();
        assert_eq!(out.c_norms_ok, vec![false]);
        assert!((&out.vectors[0] - v).norm() < 1e-15);
    }

    #[test]
    fn c_normalize_rejects_zero_vector() {
        let sys = EigenSystem {
            values: vec![c(0.0, 0.0)],
            vectors: vec![DVector::zeros(2)],
            c_norms_ok: vec![false],
        };
        assert_eq!(c_normalize(&sys, DEFAULT_TOL_DEFECT), Err(EigenError::ZeroVector(0)));
    }

    #[test]
    fn c_normalize_sign_convention() {
        let v = DVector::from_vec(vec![c(-0.9, 0.0), c(0.1, 0.3)]);
        let sys = EigenSystem {
            values: vec![c(0.0, 0.0)],
            vectors: vec![v],
            c_norms_ok: vec![false],
        };
        let out = c_normalize(&sys, DEFAULT_TOL_DEFECT).unwrap();
        let phi = &out.vectors[0];
        assert!(close(c_product(phi, phi), c(1.0, 0.0), 1e-14));
        assert!(phi[0].re > 0.0);
    }
}
