//! Dense complex linear algebra sized for small composite Hilbert spaces.
//!
//! Everything is stored row-major in a flat buffer. The kernels are written
//! for dimensions up to a few hundred (two-level system tensored with a few
//! truncated bosonic modes); no sparsity or blocking is attempted.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap on the dimension of any constructed operator.
pub const MAX_DIM: usize = 4096;

/// Tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

const EXPM_TAYLOR_ORDER: usize = 16;
const EXPM_MAX_SQUARINGS: usize = 32;
const EXPM_REFINE_TOL: f64 = 1e-12;

/// Dense square matrix of complex numbers.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix(dim={})", self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|c| format!("{:+.4}{:+.4}i", self[(r, c)].re, self[(r, c)].im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        ComplexMatrix {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    /// Build a 2x2 matrix from real entries, row by row.
    pub fn two_by_two(a: f64, b: f64, c: f64, d: f64) -> Self {
        let mut m = Self::zeros(2);
        m[(0, 0)] = a.into();
        m[(0, 1)] = b.into();
        m[(1, 0)] = c.into();
        m[(1, 1)] = d.into();
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add_scaled(&mut self, other: &Self, factor: Complex64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b * factor;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[r * n..(r + 1) * n];
                for (d, b) in dst.iter_mut().zip(row.iter()) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(self.dim, v.len());
        let n = self.dim;
        let mut out = vec![Complex64::ZERO; n];
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            out[r] = row.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Deviation from Hermiticity, max over entries of |M - M†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Replace the matrix by its Hermitian part `(M + M†)/2`.
    pub fn hermitize(&mut self) {
        for r in 0..self.dim {
            for c in (r + 1)..self.dim {
                let avg = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
                self[(r, c)] = avg;
                self[(c, r)] = avg.conj();
            }
            let d = self[(r, r)];
            self[(r, r)] = Complex64::new(d.re, 0.0);
        }
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.dim).map(|r| self[(r, c)]).collect()
    }

    pub(crate) fn data(&self) -> &[Complex64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        debug_assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product with index convention `(i_a * dim_b + i_b)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = a.dim() * b.dim();
    if dim > MAX_DIM {
        return Err(Error::DimensionCap {
            requested: dim,
            max: MAX_DIM,
        });
    }
    let (na, nb) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(dim);
    for ra in 0..na {
        for ca in 0..na {
            let f = a[(ra, ca)];
            if f == Complex64::ZERO {
                continue;
            }
            for rb in 0..nb {
                for cb in 0..nb {
                    out[(ra * nb + rb, ca * nb + cb)] = f * b[(rb, cb)];
                }
            }
        }
    }
    Ok(out)
}

/// Commutator `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch {
            context: "commutator",
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(&a.matmul(b) - &b.matmul(a))
}

/// Anticommutator `ab + ba`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch {
            context: "anticommutator",
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(&a.matmul(b) + &b.matmul(a))
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matrix whose columns are
/// the corresponding orthonormal eigenvectors.
pub fn hermitian_eigensystem(h: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NonHermitian {
            deviation: dev,
            tolerance: HERMITIAN_TOL,
        });
    }
    let n = h.dim();
    let mut a = h.clone();
    a.hermitize();
    let mut v = ComplexMatrix::identity(n);

    if n == 1 {
        return Ok((vec![a[(0, 0)].re], v));
    }

    let scale = a.max_abs().max(1.0);
    let target = 1e-14 * scale;
    let max_sweeps = 100;
    let mut converged = false;
    let mut last_off = f64::INFINITY;

    for _sweep in 0..max_sweeps {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        last_off = off;
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= target * 1e-2 {
                    continue;
                }
                // Phase factor turning the 2x2 block real, then a real
                // Jacobi rotation on that block.
                let u = apq / b;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let jpp = u * c;
                let jpq = -u * s;
                let jqp = Complex64::new(s, 0.0);
                let jqq = Complex64::new(c, 0.0);

                // A <- J† A J: column update, then row update.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    if !converged {
        return Err(Error::NonConvergence {
            kernel: "jacobi eigensolver",
            residual: last_off,
            iterations: max_sweeps,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| eigs[i].partial_cmp(&eigs[j]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// Matrix exponential by scaling and squaring with a fixed-order series.
///
/// The result at squaring depth `s` is validated against one extra
/// refinement level; if the two disagree beyond the residual contract the
/// depth is increased, up to a hard cap.
pub fn matrix_exponential(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.data()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::invalid("matrix", "non-finite entries"));
    }
    let norm = inf_norm(a);
    let mut s = 0usize;
    while norm / (1u64 << s) as f64 > 0.25 && s < EXPM_MAX_SQUARINGS {
        s += 1;
    }

    let mut current = expm_fixed(a, s);
    loop {
        let refined = expm_fixed(a, s + 1);
        let residual = current.max_abs_diff(&refined) / refined.max_abs().max(1.0);
        if residual <= EXPM_REFINE_TOL {
            return Ok(refined);
        }
        s += 1;
        if s + 1 > EXPM_MAX_SQUARINGS {
            return Err(Error::NonConvergence {
                kernel: "matrix exponential",
                residual,
                iterations: s,
            });
        }
        current = refined;
    }
}

fn inf_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    (0..n)
        .map(|r| (0..n).map(|c| a[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn expm_fixed(a: &ComplexMatrix, squarings: usize) -> ComplexMatrix {
    let n = a.dim();
    let scaled = a.scale_re(1.0 / (1u64 << squarings) as f64);

    // Horner evaluation of the order-16 Taylor polynomial.
    let mut result = ComplexMatrix::identity(n);
    for k in (1..=EXPM_TAYLOR_ORDER).rev() {
        result = result.scale_re(1.0 / k as f64);
        result = scaled.matmul(&result);
        for i in 0..n {
            result[(i, i)] += Complex64::ONE;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn assert_close(m: &ComplexMatrix, expected: &ComplexMatrix, tol: f64, what: &str) {
        let d = m.max_abs_diff(expected);
        assert!(d <= tol, "{what}: max deviation {d:.3e} > {tol:.1e}");
    }

    fn ladder() -> (ComplexMatrix, ComplexMatrix) {
        // index 0 = |g>, 1 = |e>; a|e> = |g>
        let a = ComplexMatrix::two_by_two(0.0, 1.0, 0.0, 0.0);
        let adag = a.adjoint();
        (a, adag)
    }

    fn pseudo_random_matrix(dim: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        ComplexMatrix::from_fn(dim, |_, _| Complex64::new(next(), next()))
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        let k = kron(&i2, &i2).unwrap();
        assert_close(&k, &ComplexMatrix::identity(4), 0.0, "kron(I2, I2)");
    }

    #[test]
    fn kron_diagonal_case() {
        let d = ComplexMatrix::two_by_two(1.0, 0.0, 0.0, -1.0);
        let k = kron(&d, &ComplexMatrix::identity(2)).unwrap();
        let mut expected = ComplexMatrix::identity(4);
        expected[(2, 2)] = (-1.0).into();
        expected[(3, 3)] = (-1.0).into();
        assert_close(&k, &expected, 0.0, "kron(diag(1,-1), I2)");
    }

    #[test]
    fn kron_ladder_with_identity_lowers_the_system_index() {
        // a ⊗ I3 applied to |e>⊗|1> (index 1*3+1 = 4) gives |g>⊗|1> (index 1).
        let (a, _) = ladder();
        let k = kron(&a, &ComplexMatrix::identity(3)).unwrap();
        let mut v = vec![Complex64::ZERO; 6];
        v[4] = Complex64::ONE;
        let out = k.mul_vec(&v);
        for (i, z) in out.iter().enumerate() {
            let expect = if i == 1 { 1.0 } else { 0.0 };
            assert!(
                (z - Complex64::new(expect, 0.0)).norm() < 1e-15,
                "component {i} was {z}"
            );
        }
    }

    #[test]
    fn kron_dimension_cap() {
        let mid = ComplexMatrix::identity(64);
        let at_cap = kron(&mid, &mid).unwrap();
        assert_eq!(at_cap.dim(), MAX_DIM);
        let err = kron(&at_cap, &ComplexMatrix::identity(2));
        assert!(matches!(err, Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn kron_is_associative() {
        // Exact for entries whose products round-trip in binary floating
        // point; within one rounding otherwise.
        let a = ComplexMatrix::two_by_two(1.0, -0.5, 2.0, 0.25);
        let b = ComplexMatrix::from_fn(3, |r, c| Complex64::new((r + 2 * c) as f64, -1.0));
        let c = ComplexMatrix::two_by_two(0.5, 4.0, -8.0, 1.0);
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        assert_close(&left, &right, 0.0, "kron associativity (dyadic entries)");

        let a = pseudo_random_matrix(2, 11);
        let b = pseudo_random_matrix(3, 22);
        let c = pseudo_random_matrix(2, 33);
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        assert_close(&left, &right, 1e-15, "kron associativity (random entries)");
    }

    #[test]
    fn commutator_of_matrix_with_itself_vanishes() {
        let m = pseudo_random_matrix(4, 7);
        let c = commutator(&m, &m).unwrap();
        assert!(c.max_abs() < 1e-14);
    }

    #[test]
    fn commutator_ladder_algebra() {
        let (a, adag) = ladder();
        let n = adag.matmul(&a);
        let c = commutator(&n, &a).unwrap();
        assert_close(&c, &a.scale_re(-1.0), 1e-15, "[a†a, a] = -a");
    }

    #[test]
    fn commutator_of_quadratures_on_two_level_space() {
        // For the two-level ladder operators, [a+a†, a†-a] = 2(aa† - a†a),
        // which is 2·diag(1,-1) in the (g,e) basis rather than 2·I.
        let (a, adag) = ladder();
        let x = &a + &adag;
        let y = &adag - &a;
        let c = commutator(&x, &y).unwrap();
        let expected = ComplexMatrix::two_by_two(2.0, 0.0, 0.0, -2.0);
        assert_close(&c, &expected, 1e-15, "[a+a†, a†-a]");
    }

    #[test]
    fn commutator_shape_error() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn commutator_trace_vanishes() {
        let a = pseudo_random_matrix(5, 1);
        let b = pseudo_random_matrix(5, 2);
        let c = commutator(&a, &b).unwrap();
        assert!(c.trace().norm() < 1e-12);
    }

    #[test]
    fn eigensystem_of_diagonal_matrix() {
        let h = ComplexMatrix::two_by_two(0.0, 0.0, 0.0, 1.0);
        let (vals, vecs) = hermitian_eigensystem(&h).unwrap();
        assert!((vals[0] - 0.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        assert!((vecs[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((vecs[(1, 1)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigensystem_of_symmetric_offdiagonal() {
        let lambda = 0.37;
        let h = ComplexMatrix::two_by_two(0.0, lambda, lambda, 0.0);
        let (vals, _) = hermitian_eigensystem(&h).unwrap();
        assert!((vals[0] + lambda).abs() < 1e-14);
        assert!((vals[1] - lambda).abs() < 1e-14);
    }

    #[test]
    fn eigensystem_of_driven_two_level_hamiltonian() {
        // H = [[0, 0.05], [0.05, 1]]: eigenvalues (1 ± sqrt(1 + 4·0.05²))/2.
        let h = ComplexMatrix::two_by_two(0.0, 0.05, 0.05, 1.0);
        let (vals, _) = hermitian_eigensystem(&h).unwrap();
        let root = (1.0f64 + 4.0 * 0.05 * 0.05).sqrt();
        assert!((vals[0] - (1.0 - root) / 2.0).abs() < 1e-12);
        assert!((vals[1] - (1.0 + root) / 2.0).abs() < 1e-12);
        assert!((vals[0] + 0.00249378).abs() < 1e-6);
        assert!((vals[1] - 1.00249378).abs() < 1e-6);
    }

    #[test]
    fn eigensystem_rejects_non_hermitian_input() {
        let m = ComplexMatrix::two_by_two(0.0, 1.0, 0.0, 0.0);
        assert!(matches!(
            hermitian_eigensystem(&m),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn eigensystem_reconstructs_random_hermitian_matrix() {
        let r = pseudo_random_matrix(9, 42);
        let mut h = &r + &r.adjoint();
        h.hermitize();
        let (vals, vecs) = hermitian_eigensystem(&h).unwrap();
        let max_eig = vals.iter().fold(0.0f64, |m, &v| m.max(v.abs()));

        // Reconstruction: sum_i lambda_i v_i v_i†.
        let n = h.dim();
        let mut rec = ComplexMatrix::zeros(n);
        for (i, &lam) in vals.iter().enumerate() {
            let col = vecs.column(i);
            for r in 0..n {
                for c in 0..n {
                    rec[(r, c)] += col[r] * col[c].conj() * lam;
                }
            }
        }
        assert!(rec.max_abs_diff(&h) <= 1e-9 * max_eig.max(1.0));

        // Orthonormality of the eigenvector columns.
        let gram = vecs.adjoint().matmul(&vecs);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);

        // Residual per eigenpair.
        for (i, &lam) in vals.iter().enumerate() {
            let col = vecs.column(i);
            let hv = h.mul_vec(&col);
            let res: f64 = hv
                .iter()
                .zip(col.iter())
                .map(|(a, b)| (a - b * lam).norm())
                .fold(0.0, f64::max);
            assert!(
                res <= 1e-9 * max_eig.max(1.0),
                "residual {res:.2e} for pair {i}"
            );
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = ComplexMatrix::zeros(3);
        let e = matrix_exponential(&z).unwrap();
        assert_close(&e, &ComplexMatrix::identity(3), 1e-15, "exp(0)");
    }

    #[test]
    fn expm_of_diagonal_matrix() {
        let theta = 0.83;
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 0)] = Complex64::new(0.0, theta);
        m[(1, 1)] = Complex64::new(0.0, -theta);
        let e = matrix_exponential(&m).unwrap();
        let mut expected = ComplexMatrix::zeros(2);
        expected[(0, 0)] = Complex64::from_polar(1.0, theta);
        expected[(1, 1)] = Complex64::from_polar(1.0, -theta);
        assert_close(&e, &expected, 1e-14, "exp(i theta diag(1,-1))");
    }

    #[test]
    fn expm_of_pauli_x_quarter_turn() {
        // exp(i (pi/2) sigma_x) = i sigma_x, from cos + i sin sigma_x.
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = Complex64::new(0.0, FRAC_PI_2);
        m[(1, 0)] = Complex64::new(0.0, FRAC_PI_2);
        let e = matrix_exponential(&m).unwrap();
        let mut expected = ComplexMatrix::zeros(2);
        expected[(0, 1)] = Complex64::new(0.0, 1.0);
        expected[(1, 0)] = Complex64::new(0.0, 1.0);
        assert_close(&e, &expected, 1e-13, "exp(i pi/2 sigma_x)");
    }

    #[test]
    fn expm_of_anti_hermitian_is_unitary() {
        let r = pseudo_random_matrix(6, 99);
        let ah = &r - &r.adjoint(); // anti-Hermitian
        let u = matrix_exponential(&ah.scale_re(PI / 3.0)).unwrap();
        let gram = u.adjoint().matmul(&u);
        assert!(gram.max_abs_diff(&ComplexMatrix::identity(6)) <= 1e-10);
    }

    #[test]
    fn expm_rejects_non_finite_entries() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matrix_exponential(&m).is_err());
    }
}
