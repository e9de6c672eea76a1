//! Complex vectors and Hermitian forms.
//!
//! Convention used throughout the crate: a Hermitian form with Gram matrix `G`
//! evaluates as
//!
//! ```text
//! evaluate(G, v, w) = Σ_jk v_j · G_jk · conj(w_k)
//! ```
//!
//! i.e. it is linear in the first slot and antilinear in the second. Note that
//! `evaluate(G, v, v) = x^H G x` with `x = conj(v)`, so Rayleigh quotients and
//! spectra agree with the textbook `x^H G x` convention.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

const HERMITIAN_TOL: f64 = 1e-12;
const EIGEN_EPS: f64 = 1e-12;

/// Gram matrix of a Hermitian form on `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianForm {
    gram: CMatrix,
}

impl HermitianForm {
    /// Validates that `gram` is square and Hermitian to `1e-12` relative
    /// tolerance, then symmetrizes it.
    pub fn new(gram: CMatrix) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::DimensionMismatch {
                expected: gram.nrows(),
                found: gram.ncols(),
            });
        }
        if gram.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "Hermitian form".into(),
            });
        }
        let scale = gram.norm().max(f64::MIN_POSITIVE);
        let deviation = (&gram - gram.adjoint()).norm() / scale;
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(gram))
    }

    /// Replaces `gram` by `(gram + gram^H) / 2` without checking; used after
    /// numerical constructions whose round-off breaks exact Hermiticity.
    pub fn symmetrized(gram: CMatrix) -> Self {
        assert_eq!(gram.nrows(), gram.ncols(), "Gram matrix must be square");
        let sym = (&gram + gram.adjoint()).unscale(2.0);
        HermitianForm { gram: sym }
    }

    pub fn identity(n: usize) -> Self {
        HermitianForm {
            gram: CMatrix::identity(n, n),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut gram = CMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            gram[(i, i)] = C64::new(*d, 0.0);
        }
        HermitianForm { gram }
    }

    /// Block-diagonal direct sum of the given forms.
    pub fn block_diagonal(blocks: &[HermitianForm]) -> Self {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut gram = CMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            let k = b.dim();
            gram.view_mut((off, off), (k, k)).copy_from(&b.gram);
            off += k;
        }
        HermitianForm { gram }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn into_gram(self) -> CMatrix {
        self.gram
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HermitianForm {
            gram: self.gram.scale(factor),
        }
    }

    pub fn add(&self, other: &HermitianForm) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(HermitianForm {
            gram: &self.gram + &other.gram,
        })
    }

    /// `Σ_jk v_j G_jk conj(w_k)`.
    pub fn evaluate(&self, v: &[C64], w: &[C64]) -> Result<C64> {
        check_dim(self.dim(), v.len())?;
        check_dim(self.dim(), w.len())?;
        Ok(self.evaluate_unchecked(v, w))
    }

    pub(crate) fn evaluate_unchecked(&self, v: &[C64], w: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (j, vj) in v.iter().enumerate() {
            let row: C64 = w.iter().enumerate().map(|(k, wk)| self.gram[(j, k)] * wk.conj()).sum();
            acc += vj * row;
        }
        acc
    }

    /// Real part of `evaluate(v, v)`; the imaginary part vanishes for a
    /// Hermitian Gram matrix.
    pub fn quadratic(&self, v: &[C64]) -> f64 {
        self.evaluate_unchecked(v, v).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = hermitian_eigen(&self.gram);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("non-empty form")
    }

    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.dim() > 0 && self.min_eigenvalue() > tol
    }

    /// Ratio of extreme eigenvalues; infinite when the form is not PD.
    pub fn condition_number(&self) -> f64 {
        let ev = self.eigenvalues();
        let lo = ev[0];
        let hi = ev[ev.len() - 1];
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn invert(&self) -> Result<Self> {
        let min = self.min_eigenvalue();
        let tol = EIGEN_EPS * self.max_eigenvalue().abs();
        if min <= tol {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let chol = Cholesky::new(self.gram.clone()).ok_or(Error::NotPositiveDefinite { min_eigenvalue: min })?;
        Ok(Self::symmetrized(chol.inverse()))
    }

    /// Pullback `A^* H`, defined by `evaluate(out, u, v) = evaluate(H, A u, A v)`.
    /// `A` may be rectangular (target dim × source dim).
    pub fn congruence(&self, a: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), a.nrows())?;
        // (Au)^T G conj(Av) = u^T (A^T G conj(A)) conj(v)
        let out = a.transpose() * &self.gram * a.map(|z| z.conj());
        Ok(Self::symmetrized(out))
    }

    /// Frobenius distance relative to `‖reference‖`.
    pub fn relative_error(&self, reference: &HermitianForm) -> f64 {
        (&self.gram - &reference.gram).norm() / reference.gram.norm()
    }

    /// Extreme values of `quadratic_self(v) / quadratic_base(v)` over `v ≠ 0`.
    pub fn relative_spectrum(&self, base: &HermitianForm) -> Result<(f64, f64)> {
        check_dim(base.dim(), self.dim())?;
        let l = lower_cholesky(base)?;
        let linv = l
            .clone()
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
        let c = &linv * &self.gram * linv.adjoint();
        let ev = Self::symmetrized(c).eigenvalues();
        Ok((ev[0], ev[ev.len() - 1]))
    }

    /// Matrix of the same form in the `x^H P x` convention (`P = conj(G)`).
    pub fn standard_matrix(&self) -> CMatrix {
        self.gram.map(|z| z.conj())
    }

    pub fn from_standard_matrix(p: CMatrix) -> Self {
        Self::symmetrized(p.map(|z| z.conj()))
    }
}

/// Lower Cholesky factor `L` with `G = L L^H`.
pub fn lower_cholesky(form: &HermitianForm) -> Result<CMatrix> {
    Cholesky::new(form.gram.clone())
        .map(|c| c.l())
        .ok_or_else(|| Error::NotPositiveDefinite {
            min_eigenvalue: form.min_eigenvalue(),
        })
}

fn hermitian_eigen(m: &CMatrix) -> SymmetricEigen<C64, nalgebra::Dyn> {
    SymmetricEigen::try_new(m.clone(), EIGEN_EPS, 0).expect("Hermitian eigensolver iterates until convergence")
}

impl Serialize for HermitianForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(&self.gram).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let m = rows_to_matrix(&rows).map_err(serde::de::Error::custom)?;
        HermitianForm::new(m).map_err(serde::de::Error::custom)
    }
}

/// Row-major `[re, im]` pairs.
pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    let mut m = CMatrix::zeros(nr, nc);
    for (i, row) in rows.iter().enumerate() {
        check_dim(nc, row.len())?;
        for (j, [re, im]) in row.iter().enumerate() {
            m[(i, j)] = C64::new(*re, *im);
        }
    }
    Ok(m)
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Bilinear pairing `θ(v) = Σ θ_j v_j` between `C^n` and its dual.
pub fn pairing(theta: &[C64], v: &[C64]) -> C64 {
    theta.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn mat_vec(a: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum())
        .collect()
}

/// Helpers for drawing random test objects.
pub mod random {
    use super::*;

    pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> CMatrix {
        CMatrix::from_fn(n, m, |_, _| complex_gaussian(rng))
    }

    /// Uniform point on the unit sphere of `C^n`.
    pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
        loop {
            let v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
            let r = norm2(&v);
            if r > 1e-12 {
                return v.into_iter().map(|z| z / r).collect();
            }
        }
    }

    /// Haar-distributed unitary matrix (QR of a Ginibre matrix with phase fix).
    pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let g = gaussian_matrix(n, n, rng);
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            };
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    /// `U diag(λ) U^H` with `λ` log-uniform in `[1, condition]`, endpoints included.
    pub fn pd_form<R: Rng + ?Sized>(n: usize, condition: f64, rng: &mut R) -> HermitianForm {
        let u = unitary(n, rng);
        let mut eig: Vec<f64> = (0..n).map(|_| condition.powf(rng.random::<f64>())).collect();
        if n > 1 {
            eig[0] = 1.0;
            eig[n - 1] = condition;
        }
        let scale = 0.5 + rng.random::<f64>();
        let d = CMatrix::from_diagonal(&DVector::from_iterator(n, eig.iter().map(|e| C64::new(e * scale, 0.0))));
        HermitianForm::symmetrized(&u * d * u.adjoint())
    }

    /// Invertible matrix `U diag(s) V` with singular values in `[1/sqrt(c), sqrt(c)]`.
    pub fn invertible<R: Rng + ?Sized>(n: usize, condition: f64, rng: &mut R) -> CMatrix {
        let u = unitary(n, rng);
        let v = unitary(n, rng);
        let s = DVector::from_iterator(
            n,
            (0..n).map(|_| C64::new(condition.powf(rng.random::<f64>() - 0.5), 0.0)),
        );
        u * CMatrix::from_diagonal(&s) * v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluate_examples() {
        let id = HermitianForm::identity(2);
        let e1 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e2 = [c(0.0, 0.0), c(1.0, 0.0)];
        assert_eq!(id.evaluate(&e1, &e2).unwrap(), c(0.0, 0.0));
        let v = [c(1.0, 0.0), c(0.0, 1.0)];
        assert!((id.evaluate(&v, &v).unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        let d = HermitianForm::from_real_diagonal(&[4.0, 1.0]);
        let ones = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!((d.evaluate(&ones, &ones).unwrap() - c(5.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn evaluate_is_antilinear_in_second_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random::pd_form(3, 10.0, &mut rng);
        let v = random::unit_vector(3, &mut rng);
        let w = random::unit_vector(3, &mut rng);
        let a = c(0.3, -1.2);
        let aw: Vec<C64> = w.iter().map(|z| a * z).collect();
        let av: Vec<C64> = v.iter().map(|z| a * z).collect();
        let base = h.evaluate(&v, &w).unwrap();
        assert!((h.evaluate(&v, &aw).unwrap() - a.conj() * base).norm() < 1e-12);
        assert!((h.evaluate(&av, &w).unwrap() - a * base).norm() < 1e-12);
    }

    #[test]
    fn evaluate_dimension_mismatch() {
        let id = HermitianForm::identity(2);
        let v = [c(1.0, 0.0)];
        assert!(matches!(id.evaluate(&v, &v), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(HermitianForm::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn quadratic_is_real_on_random_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random::pd_form(3, 50.0, &mut rng);
        for _ in 0..1000 {
            let v: Vec<C64> = (0..3).map(|_| random::complex_gaussian(&mut rng)).collect();
            let q = h.evaluate(&v, &v).unwrap();
            assert!(q.im.abs() <= 1e-12 * q.re.abs().max(1.0));
        }
    }

    #[test]
    fn invert_examples() {
        let id = HermitianForm::identity(3);
        assert!(id.invert().unwrap().relative_error(&id) < 1e-15);
        let d = HermitianForm::from_real_diagonal(&[0.25, 1.0]);
        let want = HermitianForm::from_real_diagonal(&[4.0, 1.0]);
        assert!(d.invert().unwrap().relative_error(&want) < 1e-14);
    }

    #[test]
    fn invert_rejects_singular_and_indefinite() {
        let sing = HermitianForm::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(sing.invert(), Err(Error::NotPositiveDefinite { .. })));
        let indef = HermitianForm::from_real_diagonal(&[1.0, -1.0]);
        assert!(indef.invert().is_err());
    }

    #[test]
    fn invert_is_involution_and_true_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=4 {
            for _ in 0..20 {
                let h = random::pd_form(n, 100.0, &mut rng);
                let inv = h.invert().unwrap();
                let prod = inv.gram() * h.gram();
                assert!((prod - CMatrix::identity(n, n)).norm() < 1e-10);
                assert!(inv.invert().unwrap().relative_error(&h) < 1e-9);
            }
        }
    }

    #[test]
    fn positive_definite_examples() {
        assert!(HermitianForm::identity(2).is_positive_definite(1e-9));
        assert!(!HermitianForm::from_real_diagonal(&[1.0, 0.0]).is_positive_definite(1e-9));
        assert!(!HermitianForm::from_real_diagonal(&[1.0, -1.0]).is_positive_definite(1e-9));
    }

    #[test]
    fn congruence_examples() {
        let id = HermitianForm::identity(2);
        let a = CMatrix::identity(2, 2);
        assert!(id.congruence(&a).unwrap().relative_error(&id) < 1e-15);
        let a = CMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0, 0.0), c(1.0, 0.0)]));
        let want = HermitianForm::from_real_diagonal(&[4.0, 1.0]);
        assert!(id.congruence(&a).unwrap().relative_error(&want) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = random::unitary(3, &mut rng);
        let i3 = HermitianForm::identity(3);
        assert!(i3.congruence(&u).unwrap().relative_error(&i3) < 1e-12);
    }

    #[test]
    fn congruence_matches_pullback_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random::pd_form(3, 20.0, &mut rng);
        let a = random::gaussian_matrix(3, 2, &mut rng);
        let out = h.congruence(&a).unwrap();
        assert_eq!(out.dim(), 2);
        let u = random::unit_vector(2, &mut rng);
        let v = random::unit_vector(2, &mut rng);
        let lhs = out.evaluate(&u, &v).unwrap();
        let rhs = h.evaluate(&mat_vec(&a, &u), &mat_vec(&a, &v)).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn congruence_round_trip_with_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let h = random::pd_form(3, 30.0, &mut rng);
            let a = random::invertible(3, 10.0, &mut rng);
            let ainv = a.clone().try_inverse().unwrap();
            let back = h.congruence(&a).unwrap().congruence(&ainv).unwrap();
            assert!(back.relative_error(&h) < 1e-9);
        }
    }

    #[test]
    fn relative_spectrum_of_scaled_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random::pd_form(3, 30.0, &mut rng);
        let (lo, hi) = h.scaled(2.5).relative_spectrum(&h).unwrap();
        assert!((lo - 2.5).abs() < 1e-10 && (hi - 2.5).abs() < 1e-10);
    }

    #[test]
    fn serde_rows_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random::pd_form(2, 5.0, &mut rng);
        let s = serde_json::to_string(&h).unwrap();
        let back: HermitianForm = serde_json::from_str(&s).unwrap();
        assert!(back.relative_error(&h) < 1e-15);
        assert!(s.starts_with("[[["));
    }
}
