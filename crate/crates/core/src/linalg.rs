//! Dense and sparse complex linear algebra used by the physics modules.

use nalgebra::{DMatrix, DVector, Normed, SymmetricEigen};

use crate::scalar::{cx, re, Cx, Real};

pub type CMatrix<T> = DMatrix<Cx<T>>;
pub type CVector<T> = DVector<Cx<T>>;

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
}

/// `max|M - M†| / max(|M|, 1)`.
pub fn hermitian_residual<T: Real>(m: &CMatrix<T>) -> T {
    let n = m.nrows();
    let mut worst = T::zero();
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst / max_abs(m).max(T::one())
}

/// Replaces `m` with `(m + m†)/2`.
pub fn symmetrize<T: Real>(m: &mut CMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        m[(i, i)] = re(m[(i, i)].re);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()).scale(half);
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::identity(n, n)
}

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: DVector<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    /// `V f(E) V†`.
    pub fn map(&self, f: impl Fn(T) -> Cx<T>) -> CMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let w = f(self.values[k]);
            for i in 0..n {
                scaled[(i, k)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Diagonalizes a Hermitian matrix without validating hermiticity.
///
/// Matrices whose entries are all real go through the real symmetric solver,
/// which is several times faster and is the common case here (Fock and Dicke
/// representations are real).
pub fn eigh_unchecked<T: Real>(m: &CMatrix<T>) -> HermitianEigen<T> {
    let n = m.nrows();
    let is_real = m.iter().all(|z| z.im == T::zero());
    let (values, vectors) = if is_real {
        let real = DMatrix::from_fn(n, n, |i, j| m[(i, j)].re);
        let eig = SymmetricEigen::new(real);
        (eig.eigenvalues, eig.eigenvectors.map(re))
    } else {
        let eig = SymmetricEigen::new(m.clone());
        (eig.eigenvalues, eig.eigenvectors)
    };
    sort_eigenpairs(values, vectors)
}

fn sort_eigenpairs<T: Real>(values: DVector<T>, vectors: CMatrix<T>) -> HermitianEigen<T> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted_values = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
    let sorted_vectors = CMatrix::from_fn(vectors.nrows(), n, |i, k| vectors[(i, order[k])]);
    HermitianEigen {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// `exp(-i·s·G)` for Hermitian `G`, by spectral decomposition.
pub fn expm_hermitian<T: Real>(generator: &CMatrix<T>, s: T) -> CMatrix<T> {
    let eig = eigh_unchecked(generator);
    eig.map(|e| {
        let phase = -(s * e);
        cx(phase.cos(), phase.sin())
    })
}

/// Vector inner product `⟨a|b⟩`.
pub fn inner<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Cx<T> {
    let (mut sr, mut si) = (T::zero(), T::zero());
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        sr += x.re * y.re + x.im * y.im;
        si += x.re * y.im - x.im * y.re;
    }
    Cx::new(sr, si)
}

/// `y += c·x`.
fn axpy<T: Real>(c: Cx<T>, x: &CVector<T>, y: &mut CVector<T>) {
    for (yi, xi) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        yi.re += c.re * xi.re - c.im * xi.im;
        yi.im += c.re * xi.im + c.im * xi.re;
    }
}

/// Compressed sparse row matrix, used for the `O(nnz)` matrix-vector products
/// of the propagator.
#[derive(Clone, Debug)]
pub struct SparseMatrix<T: Real> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Cx<T>>,
}

impl<T: Real> SparseMatrix<T> {
    /// Keeps every exactly nonzero entry of a square dense matrix.
    pub fn from_dense(m: &CMatrix<T>) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                if z.re != T::zero() || z.im != T::zero() {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `y += alpha · M x`.
    pub fn mul_add(&self, alpha: T, x: &CVector<T>, y: &mut CVector<T>) {
        for i in 0..self.n {
            let mut acc = Cx::new(T::zero(), T::zero());
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] += acc.scale(alpha);
        }
    }
}

/// Outcome of one Krylov exponential application.
#[derive(Clone, Copy, Debug)]
pub struct KrylovStats {
    pub dimension: usize,
    pub error_estimate: f64,
}

/// Computes `exp(-i·dt·H) v` with a Lanczos basis of adaptive size.
///
/// `apply(x, y)` must overwrite `y` with `H x` for Hermitian `H`. Each new
/// vector is reorthogonalized against the full basis; growth stops once the a-posteriori estimate
/// `β_m |e_mᵀ exp(-i dt T_m) e_1|` drops below `tol`, or on breakdown.
pub fn lanczos_expm<T: Real, F>(
    apply: F,
    v: &CVector<T>,
    dt: T,
    tol: T,
    max_dim: usize,
) -> (CVector<T>, KrylovStats)
where
    F: Fn(&CVector<T>, &mut CVector<T>),
{
    let n = v.len();
    let beta0 = v.norm();
    if beta0 == T::zero() {
        return (
            v.clone(),
            KrylovStats {
                dimension: 0,
                error_estimate: 0.0,
            },
        );
    }
    let max_dim = max_dim.min(n).max(1);
    let mut basis: Vec<CVector<T>> = Vec::with_capacity(max_dim);
    basis.push(v.unscale(beta0));
    let mut alpha: Vec<T> = Vec::with_capacity(max_dim);
    let mut beta: Vec<T> = Vec::with_capacity(max_dim);
    let mut w = CVector::zeros(n);
    let breakdown = T::default_epsilon() * T::lit(64.0);
    let mut leading = T::one();

    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        let a = inner(&basis[j], &w).re;
        alpha.push(a);
        axpy(re(-a), &basis[j], &mut w);
        if j > 0 {
            axpy(re(-beta[j - 1]), &basis[j - 1], &mut w);
        }
        // one pass of full reorthogonalization against the whole basis
        for q in &basis {
            let c = inner(q, &w);
            axpy(-c, q, &mut w);
        }
        let b = w.norm();
        let m = alpha.len();
        // leading Taylor term of e_mᵀ exp(-i dt T_m) e_1 screens the exact check
        if m > 1 {
            leading *= dt.abs() * beta[m - 2] / T::from_usize_lossy(m - 1);
        }
        let broke_down = b <= breakdown * (a.abs() + T::one());
        if b * leading <= tol || broke_down || m >= max_dim {
            let y = small_expm_first_column(&alpha, &beta, dt);
            let estimate = b * y[m - 1].norm();
            if estimate <= tol || broke_down || m >= max_dim {
                let mut out = CVector::zeros(n);
                for (k, q) in basis.iter().enumerate() {
                    axpy(y[k].scale(beta0), q, &mut out);
                }
                return (
                    out,
                    KrylovStats {
                        dimension: m,
                        error_estimate: estimate.as_f64(),
                    },
                );
            }
        }
        beta.push(b);
        basis.push(w.unscale(b));
    }
}

/// First column of `exp(-i dt T)` for the real symmetric tridiagonal `T`.
fn small_expm_first_column<T: Real>(alpha: &[T], beta: &[T], dt: T) -> Vec<Cx<T>> {
    let m = alpha.len();
    let mut t = DMatrix::<T>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|i| {
            let mut acc = Cx::new(T::zero(), T::zero());
            for k in 0..m {
                let phase = -(dt * eig.eigenvalues[k]);
                let w = eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)];
                acc += cx(phase.cos(), phase.sin()).scale(w);
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix<f64> {
        let mut state = seed;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let mut m = CMatrix::from_fn(n, n, |_, _| Cx::new(next(), next()));
        m = &m + m.adjoint();
        m
    }

    #[test]
    fn eigh_reconstructs_complex_matrix() {
        let h = random_hermitian(12, 3);
        let eig = eigh_unchecked(&h);
        let rebuilt = eig.map(re);
        assert!(max_abs(&(rebuilt - &h)) < 1e-12);
        for k in 1..12 {
            assert!(eig.values[k - 1] <= eig.values[k]);
        }
    }

    #[test]
    fn expm_is_unitary() {
        let h = random_hermitian(8, 11);
        let u = expm_hermitian(&h, 0.7);
        let defect = &u * u.adjoint() - identity::<f64>(8);
        assert!(max_abs(&defect) < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense_exponential() {
        let h = random_hermitian(30, 5);
        let sparse = SparseMatrix::from_dense(&h);
        let v = CVector::from_fn(30, |i, _| Cx::new((i as f64).sin(), (i as f64 * 0.3).cos()));
        let v = v.normalize();
        let dt = 0.05;
        let (got, stats) = lanczos_expm(
            |x, y| {
                y.fill(Cx::new(0.0, 0.0));
                sparse.mul_add(1.0, x, y);
            },
            &v,
            dt,
            1e-15,
            30,
        );
        let want = expm_hermitian(&h, dt) * &v;
        assert!((got - want).norm() < 1e-13);
        assert!(stats.dimension < 30);
    }

    #[test]
    fn symmetrize_removes_antihermitian_part() {
        let mut m = CMatrix::from_fn(3, 3, |i, j| Cx::new((i + 2 * j) as f64, (i * j) as f64));
        symmetrize(&mut m);
        assert_eq!(hermitian_residual(&m), 0.0);
    }
}
