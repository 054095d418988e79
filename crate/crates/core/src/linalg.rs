//! Shared linear-algebra machinery: a symmetric-operator trait, CSR storage,
//! dense symmetric eigensolves, Lanczos with full reorthogonalization for the
//! large sparse path, and principal-angle comparisons between subspaces.
//!
//! Operators up to [`DENSE_EIGEN_LIMIT`] are materialized and solved densely;
//! above that the iterative path is used, with deflation when more than one
//! eigenpair is needed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Dimension at or below which operators are materialized and solved densely.
pub const DENSE_EIGEN_LIMIT: usize = 512;

/// Largest dimension for which sparse operators are materialized to CSR.
pub const MATERIALIZE_LIMIT: usize = 100_000;

/// A real symmetric linear operator given by its matrix-vector product.
pub trait SymOp {
    fn dim(&self) -> usize;

    /// y = A x. Implementations must be symmetric: `<x, Ay> = <Ax, y>`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// A cheap upper bound on the operator norm.
    fn norm_upper(&self) -> f64;
}

/// Compressed sparse row storage for a symmetric matrix (all entries stored).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Build from unsorted triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if prev == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                prev = Some((i, j));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[idx])] += self.values[idx];
            }
        }
        m
    }
}

impl SymOp for Csr {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[idx] * x[self.col_idx[idx]];
            }
            *yi = acc;
        }
    }

    fn norm_upper(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.n {
            let row: f64 = (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|idx| self.values[idx].abs())
                .sum();
            best = best.max(row);
        }
        best.max(0.0)
    }
}

impl SymOp for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.nrows() {
            let mut acc = 0.0;
            for j in 0..self.ncols() {
                acc += self[(i, j)] * x[j];
            }
            y[i] = acc;
        }
    }

    fn norm_upper(&self) -> f64 {
        (0..self.nrows())
            .map(|i| (0..self.ncols()).map(|j| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    }
}

/// Sum of two operators of the same dimension.
pub struct SumOp<'a>(pub &'a dyn SymOp, pub &'a dyn SymOp);

impl SymOp for SumOp<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply(x, y);
        let mut t = vec![0.0; self.1.dim()];
        self.1.apply(x, &mut t);
        for (yi, ti) in y.iter_mut().zip(t.iter()) {
            *yi += ti;
        }
    }

    fn norm_upper(&self) -> f64 {
        self.0.norm_upper() + self.1.norm_upper()
    }
}

/// A - shift, useful for gap computations on `A(G) - e`.
pub struct ShiftedOp<'a> {
    pub op: &'a dyn SymOp,
    pub shift: f64,
}

impl SymOp for ShiftedOp<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.op.apply(x, y);
        for (yi, xi) in y.iter_mut().zip(x.iter()) {
            *yi -= self.shift * xi;
        }
    }

    fn norm_upper(&self) -> f64 {
        self.op.norm_upper() + self.shift.abs()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Materialize an operator column by column.
pub fn materialize(op: &dyn SymOp) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    // exact symmetry for downstream solvers
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Full eigendecomposition of a dense symmetric matrix, ascending eigenvalues
/// with matched eigenvector columns.
pub fn dense_symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = a.clone().symmetric_eigen();
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        vectors.set_column(new, &se.eigenvectors.column(old));
    }
    (values, vectors)
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: 1e-12,
            max_iter: 600,
            seed: 0x5EED_0001,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenpair by Lanczos with full reorthogonalization.
///
/// Residual-based stopping: `|beta_m * y_m| <= tol * max(1, |theta|)` where
/// theta is the current smallest Ritz value.
pub fn lanczos_smallest(op: &dyn SymOp, opts: LanczosOptions) -> Result<EigenPair> {
    deflated_lanczos_smallest(op, &[], opts)
}

/// Smallest eigenpair orthogonal to the given (orthonormal) deflation set.
pub(crate) fn deflated_lanczos_smallest(
    op: &dyn SymOp,
    deflate: &[Vec<f64>],
    opts: LanczosOptions,
) -> Result<EigenPair> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let effective_dim = n - deflate.len();
    if effective_dim == 0 {
        return Err(Error::InternalInvariant(
            "deflation set spans the whole space".into(),
        ));
    }
    let m_max = opts.max_iter.min(effective_dim);

    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    project_out(&mut v, deflate);
    let nv = norm(&v);
    if nv < 1e-300 {
        return Err(Error::InternalInvariant(
            "degenerate Lanczos start vector".into(),
        ));
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
    let mut betas: Vec<f64> = Vec::with_capacity(m_max);
    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut w = vec![0.0; n];
    let mut best: Option<(f64, Vec<f64>, f64)> = None;

    for j in 0..m_max {
        op.apply(&basis[j], &mut w);
        project_out(&mut w, deflate);
        if j > 0 {
            let b = betas[j - 1];
            for i in 0..n {
                w[i] -= b * basis[j - 1][i];
            }
        }
        let a = dot(&w, &basis[j]);
        alphas.push(a);
        for i in 0..n {
            w[i] -= a * basis[j][i];
        }
        // two full reorthogonalization passes
        for _ in 0..2 {
            for prev in &basis {
                let p = dot(&w, prev);
                for i in 0..n {
                    w[i] -= p * prev[i];
                }
            }
            project_out(&mut w, deflate);
        }
        let b_next = norm(&w);

        let check_now = b_next < 1e-14 || j + 1 == m_max || (j + 1) % 5 == 0;
        if check_now {
            let (theta, y) = tridiag_smallest(&alphas, &betas);
            let resid = b_next * y.last().copied().unwrap_or(1.0).abs();
            let scale = theta.abs().max(1.0);
            if resid <= opts.tol * scale || b_next < 1e-14 {
                let mut vec = vec![0.0; n];
                for (c, base) in y.iter().zip(basis.iter()) {
                    for i in 0..n {
                        vec[i] += c * base[i];
                    }
                }
                let nv = norm(&vec);
                vec.iter_mut().for_each(|x| *x /= nv);
                return Ok(EigenPair {
                    value: theta,
                    vector: vec,
                    residual: resid,
                    iterations: j + 1,
                });
            }
            best = Some((theta, y, resid));
        }

        if j + 1 < m_max {
            betas.push(b_next);
            let next: Vec<f64> = w.iter().map(|x| x / b_next).collect();
            basis.push(next);
        }
    }

    let (_, _, resid) = best.ok_or(Error::SolverNoConvergence {
        iterations: m_max,
        residual: f64::NAN,
        tolerance: opts.tol,
    })?;
    Err(Error::SolverNoConvergence {
        iterations: m_max,
        residual: resid,
        tolerance: opts.tol,
    })
}

fn project_out(w: &mut [f64], directions: &[Vec<f64>]) {
    for d in directions {
        let p = dot(w, d);
        for (wi, di) in w.iter_mut().zip(d.iter()) {
            *wi -= p * di;
        }
    }
}

/// Smallest eigenvalue/eigenvector of the symmetric tridiagonal (alphas, betas).
fn tridiag_smallest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i + 1 < m {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let (vals, vecs) = dense_symmetric_eigen(&t);
    (vals[0], vecs.column(0).iter().copied().collect())
}

/// Smallest eigenpair, dense below [`DENSE_EIGEN_LIMIT`], Lanczos above.
pub fn smallest_eigenpair(op: &dyn SymOp, opts: LanczosOptions) -> Result<EigenPair> {
    if op.dim() <= DENSE_EIGEN_LIMIT {
        let (vals, vecs) = dense_symmetric_eigen(&materialize(op));
        Ok(EigenPair {
            value: vals[0],
            vector: vecs.column(0).iter().copied().collect(),
            residual: 0.0,
            iterations: 0,
        })
    } else {
        lanczos_smallest(op, opts)
    }
}

/// The `count` smallest eigenpairs (ascending), via dense solve or repeated
/// deflated Lanczos runs.
pub fn smallest_eigenpairs(
    op: &dyn SymOp,
    count: usize,
    opts: LanczosOptions,
) -> Result<Vec<EigenPair>> {
    let n = op.dim();
    let count = count.min(n);
    if n <= DENSE_EIGEN_LIMIT {
        let (vals, vecs) = dense_symmetric_eigen(&materialize(op));
        return Ok((0..count)
            .map(|i| EigenPair {
                value: vals[i],
                vector: vecs.column(i).iter().copied().collect(),
                residual: 0.0,
                iterations: 0,
            })
            .collect());
    }
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
    let mut deflate: Vec<Vec<f64>> = Vec::with_capacity(count);
    for k in 0..count {
        let pair = deflated_lanczos_smallest(
            op,
            &deflate,
            LanczosOptions {
                seed: opts.seed.wrapping_add(k as u64),
                ..opts
            },
        )?;
        deflate.push(pair.vector.clone());
        pairs.push(pair);
    }
    Ok(pairs)
}

// ---------------------------------------------------------------------------
// Complex-vector helpers. Hamiltonians stay real symmetric; only state vectors
// are complex, so complex arithmetic is confined to these utilities.
// ---------------------------------------------------------------------------

/// y = A x for a real symmetric operator and complex x.
pub fn apply_complex(op: &dyn SymOp, x: &[Complex64]) -> Vec<Complex64> {
    let n = op.dim();
    let re: Vec<f64> = x.iter().map(|c| c.re).collect();
    let im: Vec<f64> = x.iter().map(|c| c.im).collect();
    let mut yre = vec![0.0; n];
    let mut yim = vec![0.0; n];
    op.apply(&re, &mut yre);
    op.apply(&im, &mut yim);
    yre.into_iter()
        .zip(yim)
        .map(|(r, i)| Complex64::new(r, i))
        .collect()
}

pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Max deviation of the Gram matrix from the identity.
pub fn orthonormality_defect(vectors: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let g = cdot(a, b);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - target).norm());
        }
    }
    worst
}

pub fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// Sines of the principal angles from the span of `v` to the span of `u`
/// (both orthonormal), one per vector of `v`, sorted descending.
///
/// Built from the explicit residuals `v_j - P_U v_j`, whose Gram eigenvalues
/// are the squared sines; going through residuals rather than `1 - cos^2`
/// keeps tiny angles accurate at machine precision instead of sqrt(eps). The
/// Hermitian Gram is diagonalized through its real symmetric embedding so
/// only the real dense solver is needed.
pub fn principal_sines(u: &[Vec<Complex64>], v: &[Vec<Complex64>]) -> Vec<f64> {
    let m = v.len();
    if m == 0 {
        return Vec::new();
    }
    let n = v[0].len();
    let mut residuals: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for vj in v {
        let mut r = vj.clone();
        for ui in u {
            let p = cdot(ui, vj);
            for (ri, &uii) in r.iter_mut().zip(ui.iter()) {
                *ri -= p * uii;
            }
        }
        debug_assert_eq!(r.len(), n);
        residuals.push(r);
    }
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for a in 0..m {
        for b in 0..m {
            gram[a][b] = cdot(&residuals[a], &residuals[b]);
        }
    }
    // real symmetric embedding [[Re, -Im], [Im, Re]]; eigenvalues are those of
    // the Hermitian Gram, doubled
    let mut embed = DMatrix::zeros(2 * m, 2 * m);
    for a in 0..m {
        for b in 0..m {
            embed[(a, b)] = gram[a][b].re;
            embed[(a, b + m)] = -gram[a][b].im;
            embed[(a + m, b)] = gram[a][b].im;
            embed[(a + m, b + m)] = gram[a][b].re;
        }
    }
    let (vals, _) = dense_symmetric_eigen(&embed);
    // every second eigenvalue (each appears twice), descending sines
    let mut sines: Vec<f64> = (0..m).map(|i| vals[2 * i].clamp(0.0, 1.0).sqrt()).collect();
    sines.sort_by(|a, b| b.total_cmp(a));
    sines
}

/// Largest principal-angle sine between two equally sized orthonormal spans.
pub fn span_residual(u: &[Vec<Complex64>], v: &[Vec<Complex64>]) -> f64 {
    if u.len() != v.len() {
        return 1.0;
    }
    principal_sines(u, v).first().copied().unwrap_or(0.0)
}
