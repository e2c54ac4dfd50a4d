//! Dense real symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by implicit QL with
//! Wilkinson-type shifts (the EISPACK `tred2`/`tql2` pair). Deflation uses a
//! local test `|e_m| <= ε (|d_m| + |d_{m+1}|)` so that small eigenvalues of
//! strongly graded matrices keep their relative accuracy.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative asymmetry accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-11;

const MAX_QL_SWEEPS: usize = 60;

/// Where a solution came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub g: f64,
    pub lambda: f64,
    pub l: usize,
    pub order: usize,
    pub alpha: f64,
    pub r_max: f64,
}

/// Ascending eigenvalues and column eigenvectors of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    pub meta: Option<Provenance>,
}

impl EigenSolution {
    /// Eigenvalues `E` in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvalues doubled, the convention of the reference tables.
    pub fn two_e(&self) -> Vec<f64> {
        self.values.iter().map(|e| 2.0 * e).collect()
    }

    /// Orthonormal eigenvectors, one per column, matching [`Self::values`].
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k).iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_meta(mut self, meta: Provenance) -> Self {
        self.meta = Some(meta);
        self
    }
}

/// Largest `|H - Hᵀ|` relative to the largest `|H|`.
pub fn symmetry_defect(h: &DMatrix<f64>) -> f64 {
    let scale = h.amax();
    if scale == 0.0 {
        return 0.0;
    }
    let n = h.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            defect = defect.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    defect / scale
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Each eigenvector is signed so that its largest-magnitude component is
/// positive (first such component on ties).
pub fn eigh_symmetric(h: &DMatrix<f64>) -> Result<EigenSolution> {
    assert!(h.is_square(), "eigh_symmetric needs a square matrix");
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let defect = symmetry_defect(h);
    if defect > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { defect });
    }
    let n = h.nrows();
    if n == 0 {
        return Ok(EigenSolution {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
            meta: None,
        });
    }

    let mut v = DMatrix::from_fn(n, n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    for mut col in vectors.column_iter_mut() {
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }

    Ok(EigenSolution {
        values,
        vectors,
        meta: None,
    })
}

/// Householder tridiagonalization; on return `v` holds the accumulated
/// orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tred2(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal matrix from [`tred2`].
fn tql2(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= eps * (d[m].abs() + d[m + 1].abs()) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::EigenConvergence { index: l });
            }

            let mut g = d[l];
            let mut p = (d[l + 1] - g) / (2.0 * e[l]);
            let mut r = p.hypot(1.0);
            if p < 0.0 {
                r = -r;
            }
            // Shift by the eigenvalue of the leading 2x2 block closest to d[l].
            g = d[m] - g + e[l] / (p + r);
            let mut s = 1.0;
            let mut c = 1.0;
            p = 0.0;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let t = v[(k, i + 1)];
                    v[(k, i + 1)] = s * v[(k, i)] + c * t;
                    v[(k, i)] = c * v[(k, i)] - s * t;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Number of eigenvalues of symmetric `a` strictly below `x`.
///
/// Reads the inertia of `a - xI` off a Bunch–Parlett factorization: 1×1
/// pivots where a diagonal entry is large enough, otherwise 2×2 pivots,
/// which always carry one negative and one positive eigenvalue.
pub fn count_below(a: &DMatrix<f64>, x: f64) -> usize {
    const ALPHA: f64 = 0.640_388_203_202_208; // (1 + √17) / 8
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= x;
    }
    let mut live: Vec<usize> = (0..m.nrows()).collect();
    let mut negative = 0;
    while !live.is_empty() {
        let (mut mu0, mut pq) = (0.0f64, (live[0], live[0]));
        let (mut mu1, mut p1) = (0.0f64, live[0]);
        for (k, &i) in live.iter().enumerate() {
            if m[(i, i)].abs() > mu1 {
                mu1 = m[(i, i)].abs();
                p1 = i;
            }
            for &j in &live[..=k] {
                if m[(i, j)].abs() > mu0 {
                    mu0 = m[(i, j)].abs();
                    pq = (i, j);
                }
            }
        }
        if mu0 == 0.0 {
            break;
        }
        if mu1 >= ALPHA * mu0 {
            let d = m[(p1, p1)];
            if d < 0.0 {
                negative += 1;
            }
            live.retain(|&i| i != p1);
            for &i in &live {
                for &j in &live {
                    m[(i, j)] -= m[(i, p1)] * m[(p1, j)] / d;
                }
            }
        } else {
            let (p, q) = pq;
            let (e11, e12, e22) = (m[(p, p)], m[(p, q)], m[(q, q)]);
            let det = e11 * e22 - e12 * e12;
            negative += 1;
            live.retain(|&i| i != p && i != q);
            for &i in &live {
                let (ip, iq) = (m[(i, p)], m[(i, q)]);
                let u = (e22 * ip - e12 * iq) / det;
                let v = (e11 * iq - e12 * ip) / det;
                for &j in &live {
                    m[(i, j)] -= u * m[(p, j)] + v * m[(q, j)];
                }
            }
        }
    }
    negative
}

/// Ascending eigenvalues of a small symmetric matrix by bisection on
/// [`count_below`], independent of [`eigh_symmetric`].
pub fn bisection_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let radius = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| a[(i, j)].abs())
                .sum::<f64>()
        })
        .collect::<Vec<_>>();
    let lo = (0..n)
        .map(|i| a[(i, i)] - radius[i])
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let hi = (0..n)
        .map(|i| a[(i, i)] + radius[i])
        .fold(f64::NEG_INFINITY, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            let (mut a_lo, mut a_hi) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a_lo + a_hi);
                if mid <= a_lo || mid >= a_hi {
                    break;
                }
                if count_below(a, mid) > k {
                    a_hi = mid;
                } else {
                    a_lo = mid;
                }
            }
            0.5 * (a_lo + a_hi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(h: &DMatrix<f64>, sol: &EigenSolution) -> f64 {
        let norm = h.amax();
        (0..sol.len())
            .map(|k| {
                let v = sol.vectors().column(k);
                (h * v - v * sol.values()[k]).amax() / norm
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_matrix() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![5.0, 1.0, 3.0]));
        let sol = eigh_symmetric(&h).unwrap();
        assert_eq!(sol.values(), &[1.0, 3.0, 5.0]);
        assert_eq!(sol.vector(0), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn two_by_two() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let sol = eigh_symmetric(&h).unwrap();
        assert!((sol.values()[0] + 1.0).abs() < 1e-15);
        assert!((sol.values()[1] - 1.0).abs() < 1e-15);
        assert!(residual(&h, &sol) < 1e-15);
    }

    #[test]
    fn one_by_one_and_empty() {
        let sol = eigh_symmetric(&DMatrix::from_element(1, 1, -2.5)).unwrap();
        assert_eq!(sol.values(), &[-2.5]);
        assert_eq!(sol.vector(0), vec![1.0]);
        assert!(eigh_symmetric(&DMatrix::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn rejects_asymmetric_and_nonfinite() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.1, 1.0]);
        match eigh_symmetric(&h) {
            Err(Error::NotSymmetric { defect }) => assert!((defect - 0.1 / 2.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let h = DMatrix::from_row_slice(2, 2, &[1.0, f64::NAN, f64::NAN, 1.0]);
        assert!(matches!(eigh_symmetric(&h), Err(Error::NonFinite)));
    }

    #[test]
    fn tridiagonal_laplacian() {
        // Eigenvalues 2 - 2cos(kπ/(n+1)).
        let n = 50;
        let h = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        });
        let sol = eigh_symmetric(&h).unwrap();
        for k in 0..n {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((sol.values()[k] - exact).abs() < 1e-13);
        }
        let vtv = sol.vectors().transpose() * sol.vectors();
        assert!((vtv - DMatrix::identity(n, n)).amax() < 1e-13);
        assert!(residual(&h, &sol) < 1e-14);
    }

    #[test]
    fn sign_convention() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let sol = eigh_symmetric(&h).unwrap();
        for k in 0..3 {
            let v = sol.vector(k);
            let big = v
                .iter()
                .copied()
                .fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn bisection_matches_known_spectrum() {
        let h = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let r = std::f64::consts::SQRT_2;
        let got = bisection_eigenvalues(&h);
        for (g, e) in got.iter().zip([2.0 - r, 2.0, 2.0 + r]) {
            assert!((g - e).abs() < 1e-14);
        }
        assert_eq!(count_below(&h, 0.0), 0);
        assert_eq!(count_below(&h, 2.5), 2);
        assert_eq!(count_below(&h, 10.0), 3);
    }
}
