//! Elimination kernels shared by every module: echelon forms, rank, nullspace,
//! inverses, hermitian inertia, complex subspaces and principal angles.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, Matrix};
use crate::scalar::{Complex, Rational, Real, Scalar, DEFAULT_TOL};

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon<T> {
    pub reduced: Matrix<T>,
    pub pivots: Vec<usize>,
}

/// Pivot threshold used by the float domain: `tol` scaled by the largest entry.
fn pivot_threshold<T: Scalar>(m: &Matrix<T>, tol: f64) -> f64 {
    if T::EXACT {
        0.0
    } else {
        tol * m.max_abs()
    }
}

/// Gauss-Jordan elimination. Exact entries pivot on the first nonzero;
/// float entries use partial pivoting and treat magnitudes at or below
/// `tol * max|m|` as zero.
pub fn rref<T: Scalar>(m: &Matrix<T>, tol: f64) -> Echelon<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<T>> = (0..rows).map(|r| m.row(r)).collect();
    let thresh = pivot_threshold(m, tol);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pick = if T::EXACT {
            (r..rows).find(|&i| !a[i][c].negligible(0.0))
        } else {
            (r..rows)
                .map(|i| (i, a[i][c].magnitude()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .filter(|&(_, mag)| mag > thresh)
                .map(|(i, _)| i)
        };
        let Some(p) = pick else {
            if !T::EXACT {
                for row in a.iter_mut().skip(r) {
                    row[c] = T::zero();
                }
            }
            continue;
        };
        a.swap(r, p);
        let inv = T::one() / a[r][c].clone();
        for x in a[r][c + 1..cols].iter_mut() {
            if !x.negligible(0.0) {
                *x = x.mul_ref(&inv);
            }
        }
        a[r][c] = T::one();
        let pivot_row = a[r].clone();
        let support: Vec<usize> = (c + 1..cols).filter(|&j| !pivot_row[j].negligible(0.0)).collect();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].negligible(0.0) {
                continue;
            }
            let f = row[c].clone();
            for &j in &support {
                row[j].sub_mul_assign(&f, &pivot_row[j]);
            }
            row[c] = T::zero();
        }
        pivots.push(c);
        r += 1;
    }
    let data = a.into_iter().flatten().collect();
    Echelon {
        reduced: Matrix::from_vec(rows, cols, data).expect("shape preserved"),
        pivots,
    }
}

/// Basis of `{v : Mv = 0}`, one vector per free column.
pub fn nullspace<T: Scalar>(m: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let ech = rref(m, tol);
    let cols = m.cols();
    let mut is_pivot = vec![false; cols];
    for &p in &ech.pivots {
        is_pivot[p] = true;
    }
    (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (k, &p) in ech.pivots.iter().enumerate() {
                v[p] = -ech.reduced[(k, f)].clone();
            }
            v
        })
        .collect()
}

/// One solution of `a x = b`, or `None` when the system is inconsistent.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T], tol: f64) -> Option<Vec<T>> {
    let aug = a.hstack(&Matrix::from_cols(a.rows(), &[b.to_vec()])).ok()?;
    let ech = rref(&aug, tol);
    if ech.pivots.last() == Some(&a.cols()) {
        return None;
    }
    let mut x = vec![T::zero(); a.cols()];
    for (k, &p) in ech.pivots.iter().enumerate() {
        x[p] = ech.reduced[(k, a.cols())].clone();
    }
    Some(x)
}

/// Indices of a maximal set of independent columns, greedily in index order.
pub fn independent_columns<T: Scalar>(m: &Matrix<T>, tol: f64) -> Vec<usize> {
    rref(m, tol).pivots
}

/// Row rank. Exact entries go through fraction-free integer elimination;
/// float entries count singular values above `tol * sigma_max`.
pub fn rank<T: Scalar>(m: &Matrix<T>, tol: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    if T::EXACT {
        let parts: Vec<(Rational, Rational)> = m
            .entries()
            .iter()
            .map(|x| x.rational_parts().expect("exact entry"))
            .collect();
        let (rows, cols) = (m.rows(), m.cols());
        if parts.iter().all(|(_, im)| im.is_zero()) {
            let re = (0..rows).map(|r| (0..cols).map(|c| parts[r * cols + c].0.clone()).collect());
            fraction_free_rank(re.collect())
        } else {
            // rank over C of A + iB is half the real rank of [[A, -B], [B, A]]
            let mut big = vec![vec![Rational::zero(); 2 * cols]; 2 * rows];
            for r in 0..rows {
                for c in 0..cols {
                    let (re, im) = &parts[r * cols + c];
                    big[r][c] = re.clone();
                    big[r][c + cols] = -im.clone();
                    big[r + rows][c] = im.clone();
                    big[r + rows][c + cols] = re.clone();
                }
            }
            fraction_free_rank(big) / 2
        }
    } else {
        let sv = to_nalgebra(m).singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > tol * top).count()
    }
}

/// Integer row reduction without fractions: rows are cleared of denominators,
/// combined by gcd-reduced multipliers and divided by their content.
fn fraction_free_rank(rows: Vec<Vec<Rational>>) -> usize {
    // rank mod a prime never exceeds the rank over Q, so a full modular rank
    // is already exact
    let full = rows.len().min(rows.first().map_or(0, Vec::len));
    if modular_rank(&rows) == Some(full) {
        return full;
    }
    let mut a: Vec<Vec<BigInt>> = rows
        .into_iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
            row.iter()
                .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .filter(|row: &Vec<BigInt>| row.iter().any(|x| !x.is_zero()))
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        if rank == a.len() {
            break;
        }
        let pick = (rank..a.len())
            .filter(|&i| !a[i][c].is_zero())
            .min_by_key(|&i| a[i][c].bits());
        let Some(p) = pick else { continue };
        a.swap(rank, p);
        let (head, tail) = a.split_at_mut(rank + 1);
        let prow = &head[rank];
        for row in tail.iter_mut() {
            if row[c].is_zero() {
                continue;
            }
            let g = prow[c].gcd(&row[c]);
            let mp = &row[c] / &g;
            let mr = &prow[c] / &g;
            let mut content = BigInt::zero();
            for j in c..cols {
                let v = &row[j] * &mr - &prow[j] * &mp;
                content = content.gcd(&v);
                row[j] = v;
            }
            if !content.is_zero() && !content.is_one() {
                for x in row.iter_mut().skip(c) {
                    *x = &*x / &content;
                }
            }
        }
        rank += 1;
    }
    rank
}

const MOD_P: u64 = (1 << 61) - 1;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD_P as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a);
        }
        a = mul_mod(a, a);
        e >>= 1;
    }
    acc
}

fn reduce_mod(x: &BigInt) -> u64 {
    let p = BigInt::from(MOD_P);
    let r = ((x % &p) + &p) % &p;
    u64::try_from(r).expect("reduced below the modulus")
}

/// Rank modulo `2^61 - 1`; `None` when a denominator vanishes there.
fn modular_rank(rows: &[Vec<Rational>]) -> Option<usize> {
    let mut a: Vec<Vec<u64>> = Vec::with_capacity(rows.len());
    for row in rows {
        let mut out = Vec::with_capacity(row.len());
        for x in row {
            let d = reduce_mod(x.denom());
            if d == 0 {
                return None;
            }
            out.push(mul_mod(reduce_mod(x.numer()), pow_mod(d, MOD_P - 2)));
        }
        a.push(out);
    }
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        let inv = pow_mod(a[rank][c], MOD_P - 2);
        let (head, tail) = a.split_at_mut(rank + 1);
        let prow = &head[rank];
        for row in tail.iter_mut() {
            if row[c] == 0 {
                continue;
            }
            let f = mul_mod(row[c], inv);
            for j in c..cols {
                if prow[j] != 0 {
                    row[j] = (row[j] + MOD_P - mul_mod(f, prow[j])) % MOD_P;
                }
            }
        }
        rank += 1;
        if rank == a.len() {
            break;
        }
    }
    Some(rank)
}

fn to_nalgebra<T: Scalar>(m: &Matrix<T>) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)].to_c64())
}

/// Inverse by Gauss-Jordan on `[M | Id]`.
pub fn inverse<T: Scalar>(m: &Matrix<T>, tol: f64) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let n = m.rows();
    let aug = m.hstack(&Matrix::identity(n))?;
    let ech = rref(&aug, tol);
    if ech.pivots.len() < n || ech.pivots[n - 1] != n - 1 {
        return Err(Error::Singular);
    }
    Ok(ech.reduced.submatrix(0, n, n, n))
}

/// Determinant by elimination.
pub fn determinant<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let n = m.rows();
    let mut a: Vec<Vec<T>> = (0..n).map(|r| m.row(r)).collect();
    let mut det = T::one();
    for c in 0..n {
        let pick = if T::EXACT {
            (c..n).find(|&i| !a[i][c].negligible(0.0))
        } else {
            (c..n)
                .max_by(|&x, &y| a[x][c].magnitude().total_cmp(&a[y][c].magnitude()))
                .filter(|&i| !a[i][c].negligible(0.0))
        };
        let Some(p) = pick else { return Ok(T::zero()) };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det = det.mul_ref(&a[c][c]);
        let inv = T::one() / a[c][c].clone();
        let (head, tail) = a.split_at_mut(c + 1);
        let prow = &head[c];
        for row in tail.iter_mut() {
            if row[c].negligible(0.0) {
                continue;
            }
            let f = row[c].mul_ref(&inv);
            for j in c..n {
                row[j].sub_mul_assign(&f, &prow[j]);
            }
        }
    }
    Ok(det)
}

/// Signature counts of a hermitian form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
    Degenerate,
}

impl Inertia {
    pub fn definiteness(&self) -> Definiteness {
        if self.positive > 0 && self.negative > 0 {
            Definiteness::Indefinite
        } else if self.zero > 0 {
            Definiteness::Degenerate
        } else if self.negative == 0 {
            Definiteness::Positive
        } else {
            Definiteness::Negative
        }
    }
}

pub fn is_hermitian<T: Real>(h: &CMatrix<T>, tol: f64) -> bool {
    let scale = if T::EXACT { 0.0 } else { tol * h.max_abs().max(1.0) };
    h.is_square() && h.approx_eq(&h.conj_transpose(), scale)
}

/// Inertia of a hermitian matrix: congruence diagonalization in the exact
/// domain, eigenvalue signs in the float domain.
pub fn hermitian_inertia<T: Real>(h: &CMatrix<T>, tol: f64) -> Result<Inertia> {
    if !is_hermitian(h, tol) {
        return Err(Error::NotHermitian);
    }
    if T::EXACT {
        Ok(congruence_inertia(h))
    } else {
        Ok(eigen_inertia(h, tol))
    }
}

pub fn hermitian_definiteness<T: Real>(h: &CMatrix<T>, tol: f64) -> Result<Definiteness> {
    Ok(hermitian_inertia(h, tol)?.definiteness())
}

/// Symmetric Gaussian elimination `H -> P H P^*`. When every remaining
/// diagonal entry vanishes, row `i += h_ij * row j` creates the diagonal
/// entry `2|h_ij|^2`.
#[allow(clippy::needless_range_loop)]
fn congruence_inertia<T: Real>(h: &CMatrix<T>) -> Inertia {
    let m = h.rows();
    let mut a: Vec<Vec<Complex<T>>> = (0..m).map(|r| h.row(r)).collect();
    let mut inertia = Inertia {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    let is_zero = |z: &Complex<T>| z.negligible(0.0);
    for k in 0..m {
        let diag = (k..m).find(|&i| !is_zero(&a[i][i]));
        let piv = match diag {
            Some(i) => i,
            None => {
                let off = (k..m)
                    .flat_map(|i| (k..m).map(move |j| (i, j)))
                    .find(|&(i, j)| i != j && !is_zero(&a[i][j]));
                let Some((i, j)) = off else {
                    inertia.zero += m - k;
                    break;
                };
                let c = a[i][j].clone();
                let cc = c.conj();
                for col in 0..m {
                    let v = a[j][col].mul_ref(&c);
                    a[i][col] = a[i][col].add_ref(&v);
                }
                for row in a.iter_mut() {
                    let v = row[j].mul_ref(&cc);
                    row[i] = row[i].add_ref(&v);
                }
                i
            }
        };
        if piv != k {
            a.swap(piv, k);
            for row in a.iter_mut() {
                row.swap(piv, k);
            }
        }
        let d = a[k][k].re.clone();
        match d.sign(0.0) {
            1 => inertia.positive += 1,
            _ => inertia.negative += 1,
        }
        let inv = Complex::new(T::one() / d, T::zero());
        for i in k + 1..m {
            if is_zero(&a[i][k]) {
                continue;
            }
            let f = a[i][k].mul_ref(&inv);
            for j in k + 1..m {
                let akj = a[k][j].clone();
                a[i][j].sub_mul_assign(&f, &akj);
            }
        }
        for i in k + 1..m {
            a[i][k] = Complex::zero();
            a[k][i] = Complex::zero();
        }
    }
    inertia
}

/// Eigenvalues of the real symmetric embedding `[[A, -B], [B, A]]`, where each
/// eigenvalue of `A + iB` appears twice.
fn eigen_inertia<T: Real>(h: &CMatrix<T>, tol: f64) -> Inertia {
    let m = h.rows();
    let emb = DMatrix::from_fn(2 * m, 2 * m, |r, c| {
        let z = h[(r % m, c % m)].to_c64();
        match (r < m, c < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let emb = (&emb + emb.transpose()) * 0.5;
    let eig = SymmetricEigen::new(emb).eigenvalues;
    let scale = eig.iter().fold(1.0_f64, |a, &x| a.max(x.abs()));
    let thresh = tol * scale;
    let count = |f: &dyn Fn(f64) -> bool| eig.iter().filter(|&&x| f(x)).count() / 2;
    Inertia {
        positive: count(&|x| x > thresh),
        negative: count(&|x| x < -thresh),
        zero: count(&|x| x.abs() <= thresh),
    }
}

/// A complex subspace of `C^ambient` stored by an independent column basis.
#[derive(Clone, Debug)]
pub struct SubspaceC<T = Rational> {
    basis: CMatrix<T>,
    tol: f64,
}

impl<T: Real> SubspaceC<T> {
    /// Rejects dependent or zero columns.
    pub fn new(basis: CMatrix<T>, tol: f64) -> Result<Self> {
        if rank(&basis, tol) != basis.cols() {
            return Err(Error::DegenerateBasis);
        }
        Ok(Self { basis, tol })
    }

    pub fn exact(basis: CMatrix<T>) -> Result<Self> {
        Self::new(basis, DEFAULT_TOL)
    }

    /// Column span of an arbitrary spanning matrix.
    pub fn span_of(m: &CMatrix<T>, tol: f64) -> Self {
        let idx = independent_columns(m, tol);
        Self {
            basis: m.select_cols(&idx),
            tol,
        }
    }

    /// `U = W + iW` for the real column span `W` of `m`.
    pub fn complexified(m: &Matrix<T>, tol: f64) -> Self {
        Self::span_of(&m.to_complex(), tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &CMatrix<T> {
        &self.basis
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn contains_vector(&self, v: &[Complex<T>]) -> bool {
        let col = Matrix::from_cols(v.len(), &[v.to_vec()]);
        match self.basis.hstack(&col) {
            Ok(stack) => rank(&stack, self.tol) == self.dim(),
            Err(_) => false,
        }
    }

    /// Every column of `other` lies in `self`.
    pub fn contains(&self, other: &Self) -> bool {
        if other.ambient_dim() != self.ambient_dim() {
            return false;
        }
        let stack = self.basis.hstack(&other.basis).expect("same ambient");
        rank(&stack, self.tol) == self.dim()
    }

    /// Equality by mutual containment.
    pub fn equals(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.contains(other)
    }

    /// `dim_R (U ∩ R^m)`. For columns `A + iB` the real points are the real
    /// combinations `(x, y)` with `Bx + Ay = 0`.
    pub fn real_points_dimension(&self) -> usize {
        let re = self.basis.re();
        let im = self.basis.im();
        let system = im.hstack(&re).expect("same rows");
        2 * self.dim() - rank(&system, self.tol)
    }

    /// Real basis of `U ∩ R^m` (columns).
    pub fn real_points(&self) -> Matrix<T> {
        let re = self.basis.re();
        let im = self.basis.im();
        let system = im.hstack(&re).expect("same rows");
        let k = self.dim();
        let vecs: Vec<Vec<T>> = nullspace(&system, self.tol)
            .into_iter()
            .map(|xy| {
                let x = &xy[..k];
                let y = &xy[k..];
                (0..self.ambient_dim())
                    .map(|r| {
                        (0..k).fold(T::zero(), |acc, j| {
                            acc.add_ref(&re[(r, j)].mul_ref(&x[j]))
                                .sub_ref(&im[(r, j)].mul_ref(&y[j]))
                        })
                    })
                    .collect()
            })
            .collect();
        Matrix::from_cols(self.ambient_dim(), &vecs)
    }

    /// Image under a real linear map.
    pub fn image(&self, g: &Matrix<T>) -> Result<Self> {
        Self::new(g.to_complex().matmul(&self.basis)?, self.tol)
    }

    pub fn to_float(&self) -> SubspaceC<f64> {
        SubspaceC {
            basis: self.basis.map(|z| Complex::new(z.re.to_f64(), z.im.to_f64())),
            tol: self.tol,
        }
    }
}

/// Principal angles between equal-dimensional subspaces, nonincreasing.
/// Cosines come from the singular values of `Q1^* Q2`, sines from those of
/// `(Id - Q1 Q1^*) Q2`, so small angles keep full precision.
pub fn principal_angles<T: Real>(u1: &SubspaceC<T>, u2: &SubspaceC<T>) -> Result<Vec<f64>> {
    if T::EXACT {
        return Err(Error::DomainMismatch);
    }
    if u1.ambient_dim() != u2.ambient_dim() || u1.dim() != u2.dim() {
        return Err(Error::DimensionMismatch(
            "principal angles need equal dimensions".into(),
        ));
    }
    let k = u1.dim();
    if k == 0 {
        return Ok(Vec::new());
    }
    let q1 = to_nalgebra(&u1.basis).qr().q();
    let q2 = to_nalgebra(&u2.basis).qr().q();
    let cross = q1.adjoint() * &q2;
    let resid = &q2 - &q1 * &cross;
    let mut cos: Vec<f64> = cross.singular_values().iter().map(|&c| c.min(1.0)).collect();
    let mut sin: Vec<f64> = resid.singular_values().iter().map(|&s| s.min(1.0)).collect();
    cos.sort_by(f64::total_cmp);
    sin.sort_by(|a, b| b.total_cmp(a));
    sin.resize(k, 0.0);
    let mut angles: Vec<f64> = cos.iter().zip(&sin).map(|(&c, &s)| s.atan2(c)).collect();
    angles.sort_by(|a, b| b.total_cmp(a));
    Ok(angles)
}
