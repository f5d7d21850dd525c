//! Representations of the algebras `H(eps) = <i, j | i^2 = -1, j^2 = eps, ij + ji = 0>`
//! on `R^{4n}`: standard forms, verification, classification of generator
//! pairs, the trace form and adapted bases for the nilpotent case.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{matrix_from_json, matrix_to_json, JsonScalar};
use crate::linalg::{hermitian_inertia, inverse, nullspace, rank, Inertia};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Real, Scalar};

/// A representation of `H(eps)`: complex structure `I`, second generator `B`
/// with `B^2 = b_square * Id`, and `K = IB`.
///
/// Generators recovered from a pair of points are generally not normalized
/// (`b_square` is then any scalar of the right sign), since the exact domain
/// has no square roots.
#[derive(Clone, Debug)]
pub struct AlgebraRep<T = Rational> {
    epsilon: i32,
    n: usize,
    k: Option<usize>,
    i: Matrix<T>,
    b: Matrix<T>,
    k_mat: Matrix<T>,
    b_square: T,
    tol: f64,
}

/// Which algebra relations a candidate pair satisfies.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepReport {
    pub shape: bool,
    pub i_square: bool,
    pub b_square: bool,
    pub anticommute: bool,
    pub faithful: bool,
}

impl RepReport {
    pub fn ok(&self) -> bool {
        self.shape && self.i_square && self.b_square && self.anticommute && self.faithful
    }
}

/// Classification of a pair of complex structures spanning a line.
#[derive(Clone, Debug)]
pub struct PairClassification<T = Rational> {
    pub alpha: T,
    pub epsilon: i32,
    pub i: Matrix<T>,
    pub b_raw: Matrix<T>,
    /// `b_raw^2 = c * Id` with `c = alpha^2 - 1`.
    pub c: T,
}

/// Signature counts of the trace pairing on `span<I, B, K>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

impl From<Inertia> for Signature {
    fn from(i: Inertia) -> Self {
        Self {
            positive: i.positive,
            negative: i.negative,
            null: i.zero,
        }
    }
}

pub fn check_epsilon(epsilon: i32) -> Result<()> {
    if (-1..=1).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::BadEpsilon(epsilon))
    }
}

/// Default comparison tolerance for a domain: zero when exact.
pub fn domain_tol<T: Scalar>(tol: f64) -> f64 {
    if T::EXACT {
        0.0
    } else {
        tol
    }
}

fn is_minus_identity<T: Real>(m: &Matrix<T>, tol: f64) -> bool {
    m.near(&Matrix::scalar(m.rows(), -T::one()), tol)
}

fn is_zero_rel<T: Real>(m: &Matrix<T>, scale: f64, tol: f64) -> bool {
    if T::EXACT {
        m.is_zero(0.0)
    } else {
        m.is_zero(tol * scale.max(1.0))
    }
}

/// Checks `I^2 = -Id`, `B^2 = eps * Id`, `IB + BI = 0`, and `B != 0` for
/// `eps = 0`.
pub fn verify_rep<T: Real>(i: &Matrix<T>, b: &Matrix<T>, epsilon: i32, tol: f64) -> RepReport {
    let d = i.rows();
    let shape = i.is_square() && b.is_square() && b.rows() == d && d > 0 && d.is_multiple_of(4);
    if !shape {
        return RepReport {
            shape,
            i_square: false,
            b_square: false,
            anticommute: false,
            faithful: false,
        };
    }
    let tol = domain_tol::<T>(tol);
    let scale = i.max_abs().max(b.max_abs());
    RepReport {
        shape,
        i_square: is_minus_identity(&(i * i), tol),
        b_square: (b * b).near(&Matrix::scalar(d, T::from_i64(epsilon as i64)), tol),
        anticommute: is_zero_rel(&i.anticommutator(b), scale * scale, tol),
        faithful: epsilon != 0 || !is_zero_rel(b, 1.0, tol),
    }
}

fn block_rot<T: Real>(m: usize) -> Matrix<T> {
    // [[0, -1_m], [1_m, 0]]
    Matrix::from_fn(2 * m, 2 * m, |r, c| {
        if r < m && c == r + m {
            -T::one()
        } else if r >= m && c + m == r {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// Standard block matrices for `H(eps)` on `R^{4n}`. For `eps = 0` the basis is
/// `Im N + W + U` with blocks of sizes `2k, 2l, 2k`, `l = 2(n - k)`.
pub fn standard_rep<T: Real>(epsilon: i32, n: usize, k: Option<usize>) -> Result<AlgebraRep<T>> {
    check_epsilon(epsilon)?;
    if n == 0 {
        return Err(Error::BadK { k: k.unwrap_or(0), n });
    }
    let (i, b, kk) = match epsilon {
        -1 => {
            let r = block_rot::<T>(n);
            let j = Matrix::block_diag(&[&r, &(-&r)]);
            (block_rot::<T>(2 * n), j, None)
        }
        1 => {
            let one = Matrix::<T>::identity(2 * n);
            (block_rot::<T>(2 * n), Matrix::block_diag(&[&one, &(-&one)]), None)
        }
        _ => {
            let k = k.ok_or(Error::BadK { k: 0, n })?;
            if k == 0 || k > n {
                return Err(Error::BadK { k, n });
            }
            let l = 2 * (n - k);
            let rk = block_rot::<T>(k);
            let i = Matrix::block_diag(&[&(-&rk), &block_rot::<T>(l), &rk]);
            let nil = Matrix::from_fn(4 * n, 4 * n, |r, c| {
                if r < 2 * k && c == r + 2 * k + 2 * l {
                    T::one()
                } else {
                    T::zero()
                }
            });
            (i, nil, Some(k))
        }
    };
    let k_mat = &i * &b;
    Ok(AlgebraRep {
        epsilon,
        n,
        k: kk,
        i,
        b,
        k_mat,
        b_square: T::from_i64(epsilon as i64),
        tol: domain_tol::<T>(crate::scalar::DEFAULT_TOL),
    })
}

impl<T: Real> AlgebraRep<T> {
    /// Builds a representation from `I` and any `B` anticommuting with it whose
    /// square is scalar; `eps` is the sign of that scalar.
    pub fn from_generators(i: Matrix<T>, b: Matrix<T>, tol: f64) -> Result<Self> {
        let d = i.rows();
        if !(i.is_square() && b.is_square() && b.rows() == d && d > 0 && d.is_multiple_of(4)) {
            return Err(Error::InvalidRep("generators must be square of size 4n".into()));
        }
        let tol = domain_tol::<T>(tol);
        if !is_minus_identity(&(&i * &i), tol) {
            return Err(Error::InvalidRep("I^2 != -Id".into()));
        }
        let scale = i.max_abs().max(b.max_abs());
        if !is_zero_rel(&i.anticommutator(&b), scale * scale, tol) {
            return Err(Error::InvalidRep("IB + BI != 0".into()));
        }
        let sq = &b * &b;
        let b_square = sq
            .as_scalar_multiple(tol * sq.max_abs().max(1.0))
            .ok_or_else(|| Error::InvalidRep("B^2 is not scalar".into()))?;
        let epsilon = b_square.sign(tol * b.max_abs().powi(2).max(1.0)) as i32;
        let n = d / 4;
        let k = if epsilon == 0 {
            if is_zero_rel(&b, 1.0, tol) {
                return Err(Error::InvalidRep("nilpotent generator vanishes".into()));
            }
            Some(nilpotent_k(&b, tol)?)
        } else {
            None
        };
        let b_square = if epsilon == 0 { T::zero() } else { b_square };
        let k_mat = &i * &b;
        Ok(Self {
            epsilon,
            n,
            k,
            i,
            b,
            k_mat,
            b_square,
            tol,
        })
    }

    /// Like [`from_generators`](Self::from_generators) but requires `B^2 = eps * Id`.
    pub fn new(i: Matrix<T>, b: Matrix<T>, epsilon: i32, tol: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let report = verify_rep(&i, &b, epsilon, tol);
        if !report.ok() {
            return Err(Error::InvalidRep(format!("{report:?}")));
        }
        Self::from_generators(i, b, tol)
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Nilpotent rank parameter (`rank N = 2k`); `None` unless `eps = 0`.
    pub fn k(&self) -> Option<usize> {
        self.k
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn i(&self) -> &Matrix<T> {
        &self.i
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    pub fn k_mat(&self) -> &Matrix<T> {
        &self.k_mat
    }

    pub fn b_square(&self) -> &T {
        &self.b_square
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `B^2 = eps * Id` holds on the nose.
    pub fn is_normalized(&self) -> bool {
        let target = T::from_i64(self.epsilon as i64);
        self.b_square.sub_ref(&target).negligible(domain_tol::<T>(self.tol))
    }

    /// `x I + y B + z K`
    pub fn combination(&self, x: &T, y: &T, z: &T) -> Matrix<T> {
        let mut m = self.i.scale(x);
        m = &m + &self.b.scale(y);
        &m + &self.k_mat.scale(z)
    }

    /// `g I g^{-1}`, `g B g^{-1}`.
    pub fn conjugate(&self, g: &Matrix<T>) -> Result<Self> {
        if g.rows() != self.dim() || !g.is_square() {
            return Err(Error::DimensionMismatch("conjugating matrix has the wrong size".into()));
        }
        let ginv = inverse(g, self.tol.max(f64::MIN_POSITIVE))?;
        let i = &(g * &self.i) * &ginv;
        let b = &(g * &self.b) * &ginv;
        let k_mat = &i * &b;
        Ok(Self {
            i,
            b,
            k_mat,
            ..self.clone()
        })
    }

    pub fn to_f64(&self) -> AlgebraRep<f64> {
        AlgebraRep {
            epsilon: self.epsilon,
            n: self.n,
            k: self.k,
            i: self.i.to_f64(),
            b: self.b.to_f64(),
            k_mat: self.k_mat.to_f64(),
            b_square: self.b_square.to_f64(),
            tol: if T::EXACT { crate::scalar::DEFAULT_TOL } else { self.tol },
        }
    }
}

fn nilpotent_k<T: Real>(b: &Matrix<T>, tol: f64) -> Result<usize> {
    let r = rank(b, tol.max(if T::EXACT { 0.0 } else { crate::scalar::DEFAULT_TOL }));
    if r % 2 == 1 {
        return Err(Error::OddRank(r));
    }
    Ok(r / 2)
}

/// `-Tr(uv) / 4n`
pub fn trace_form<T: Real>(u: &Matrix<T>, v: &Matrix<T>, n: usize) -> T {
    -((u * v).trace() / T::from_i64(4 * n as i64))
}

/// Classifies two complex structures by `J1 J2 + J2 J1 = 2 alpha Id`.
pub fn classify_pair<T: Real>(j1: &Matrix<T>, j2: &Matrix<T>, tol: f64) -> Result<PairClassification<T>> {
    let d = j1.rows();
    if !(j1.is_square() && j2.is_square() && j2.rows() == d && d > 0 && d.is_multiple_of(4)) {
        return Err(Error::DimensionMismatch(
            "pair must be square matrices of size 4n".into(),
        ));
    }
    let tol = domain_tol::<T>(tol);
    if !is_minus_identity(&(j1 * j1), tol) || !is_minus_identity(&(j2 * j2), tol) {
        return Err(Error::NotComplexStructure);
    }
    let stacked = Matrix::from_cols(d * d, &[j1.vectorize(), j2.vectorize()]);
    if rank(
        &stacked,
        tol.max(if T::EXACT { 0.0 } else { crate::scalar::DEFAULT_TOL }),
    ) < 2
    {
        return Err(Error::Proportional);
    }
    let anti = j1.anticommutator(j2);
    anti.as_scalar_multiple(tol * anti.max_abs().max(1.0))
        .ok_or(Error::NotCospherical)?;
    let alpha = anti.trace() / T::from_i64(2 * d as i64);
    let b_raw = &j1.scale(&alpha) + j2;
    let c = alpha.mul_ref(&alpha) - T::one();
    let epsilon = c.sign(tol) as i32;
    Ok(PairClassification {
        alpha,
        epsilon,
        i: j1.clone(),
        b_raw,
        c,
    })
}

/// Signature of `(x, y) -> Tr(xy + yx) / 8n` on `span<I, B, K>`.
pub fn span_signature<T: Real>(rep: &AlgebraRep<T>) -> Signature {
    let gens = [rep.i(), rep.b(), rep.k_mat()];
    let denom = T::from_i64(8 * rep.n() as i64);
    let gram = Matrix::from_fn(3, 3, |r, c| gens[r].anticommutator(gens[c]).trace() / denom.clone());
    hermitian_inertia(&gram.to_complex(), domain_tol::<T>(crate::scalar::DEFAULT_TOL))
        .expect("gram matrix is symmetric")
        .into()
}

/// Recovers `k = rank(N) / 2` for a nilpotent representation.
pub fn classify_nilpotent_rep<T: Real>(i: &Matrix<T>, n_mat: &Matrix<T>, tol: f64) -> Result<usize> {
    let report = verify_rep(i, n_mat, 0, tol);
    if !report.ok() {
        return Err(Error::InvalidRep(format!("{report:?}")));
    }
    nilpotent_k(n_mat, domain_tol::<T>(tol))
}

/// Greedy complement of `span` by vectors from `candidates`, kept invariant
/// under `op` (assumed to satisfy `op^2 = -Id` and preserve `span`). Returns
/// the chosen vectors `e`; the complement is spanned by the `e` and `op e`.
pub fn invariant_complement<T: Real>(
    op: &Matrix<T>,
    span: &[Vec<T>],
    candidates: impl IntoIterator<Item = Vec<T>>,
    target_dim: usize,
    tol: f64,
) -> Vec<Vec<T>> {
    let dim = op.rows();
    let mut cols: Vec<Vec<T>> = span.to_vec();
    let mut current = rank(&Matrix::from_cols(dim, &cols), tol);
    let mut chosen = Vec::new();
    for e in candidates {
        if current >= target_dim {
            break;
        }
        cols.push(e.clone());
        let r = rank(&Matrix::from_cols(dim, &cols), tol);
        if r == current {
            cols.pop();
            continue;
        }
        cols.push(op.apply(&e));
        current = r + 1;
        chosen.push(e);
    }
    chosen
}

pub fn standard_basis<T: Real>(dim: usize) -> impl Iterator<Item = Vec<T>> {
    (0..dim).map(move |j| (0..dim).map(|r| if r == j { T::one() } else { T::zero() }).collect())
}

/// Change of basis `g` with `g^{-1} I g`, `g^{-1} N g` in standard form; columns
/// `N u, N I u` (image), then `w, I w` (rest of the kernel), then `u, I u`.
pub fn adapted_nilpotent_basis<T: Real>(i: &Matrix<T>, n_mat: &Matrix<T>, tol: f64) -> Result<Matrix<T>> {
    let k = classify_nilpotent_rep(i, n_mat, tol)?;
    let tol = domain_tol::<T>(tol).max(if T::EXACT { 0.0 } else { crate::scalar::DEFAULT_TOL });
    let dim = i.rows();
    let kernel = nullspace(n_mat, tol);
    let us = invariant_complement(i, &kernel, standard_basis(dim), dim, tol);
    debug_assert_eq!(us.len(), k);
    let ius: Vec<Vec<T>> = us.iter().map(|u| i.apply(u)).collect();
    let image: Vec<Vec<T>> = us.iter().chain(&ius).map(|u| n_mat.apply(u)).collect();
    let ws = invariant_complement(i, &image, kernel.iter().cloned(), kernel.len(), tol);
    let iws: Vec<Vec<T>> = ws.iter().map(|w| i.apply(w)).collect();
    let cols: Vec<Vec<T>> = image.into_iter().chain(ws).chain(iws).chain(us).chain(ius).collect();
    let g = Matrix::from_cols(dim, &cols);
    if rank(&g, tol) != dim {
        return Err(Error::Singular);
    }
    Ok(g)
}

pub fn rep_to_json<T: Real + JsonScalar>(rep: &AlgebraRep<T>) -> Value {
    let mut v = json!({
        "epsilon": rep.epsilon(),
        "n": rep.n(),
        "I": matrix_to_json(rep.i()),
        "B": matrix_to_json(rep.b()),
    });
    if let Some(k) = rep.k() {
        v["k"] = json!(k);
    }
    if !rep.is_normalized() {
        v["b_square"] = rep.b_square().to_json();
    }
    v
}

pub fn rep_from_json<T: Real + JsonScalar>(v: &Value, tol: f64) -> Result<AlgebraRep<T>> {
    let get = |key: &str| {
        v.get(key)
            .ok_or_else(|| Error::Malformed(format!("representation lacks {key:?}")))
    };
    let i = matrix_from_json::<T>(get("I")?)?;
    let b = matrix_from_json::<T>(get("B")?)?;
    let rep = AlgebraRep::from_generators(i, b, tol)?;
    if let Some(e) = v.get("epsilon") {
        let e = e
            .as_i64()
            .ok_or_else(|| Error::Malformed("epsilon must be an integer".into()))? as i32;
        check_epsilon(e)?;
        if e != rep.epsilon() {
            return Err(Error::InvalidRep(format!(
                "declared epsilon {e}, generators give {}",
                rep.epsilon()
            )));
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RMatrix;
    use crate::rng::CountedRng;
    use crate::scalar::{q, qi, DEFAULT_TOL};
    use proptest::prelude::*;

    fn std(e: i32, n: usize, k: Option<usize>) -> AlgebraRep {
        standard_rep(e, n, k).unwrap()
    }

    #[test]
    fn standard_reps_verify() {
        for n in 1..=3 {
            for e in [-1, 1] {
                let r = std(e, n, None);
                assert!(verify_rep(r.i(), r.b(), e, 0.0).ok(), "eps {e} n {n}");
                assert!(r.is_normalized());
            }
            for k in 1..=n {
                let r = std(0, n, Some(k));
                assert!(verify_rep(r.i(), r.b(), 0, 0.0).ok());
                assert_eq!(r.k(), Some(k));
            }
        }
    }

    #[test]
    fn standard_small_matrices() {
        let h = std(-1, 1, None);
        assert_eq!(
            *h.i(),
            RMatrix::from_i64(4, 4, &[0, 0, -1, 0, 0, 0, 0, -1, 1, 0, 0, 0, 0, 1, 0, 0])
        );
        assert_eq!(
            *h.b(),
            RMatrix::from_i64(4, 4, &[0, -1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1, 0])
        );
        let s = std(1, 1, None);
        assert_eq!(
            *s.b(),
            RMatrix::from_i64(4, 4, &[1, 0, 0, 0, 0, 1, 0, 0, 0, 0, -1, 0, 0, 0, 0, -1])
        );
        let z = std(0, 1, Some(1));
        assert_eq!(
            *z.i(),
            RMatrix::from_i64(4, 4, &[0, 1, 0, 0, -1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0])
        );
        assert_eq!(
            *z.b(),
            RMatrix::from_i64(4, 4, &[0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0])
        );
    }

    #[test]
    fn bad_parameters() {
        assert_eq!(
            standard_rep::<Rational>(0, 2, Some(3)).unwrap_err(),
            Error::BadK { k: 3, n: 2 }
        );
        assert_eq!(
            standard_rep::<Rational>(0, 2, Some(0)).unwrap_err(),
            Error::BadK { k: 0, n: 2 }
        );
        assert_eq!(standard_rep::<Rational>(2, 1, None).unwrap_err(), Error::BadEpsilon(2));
    }

    #[test]
    fn verify_reports_failures() {
        let r = std(-1, 1, None);
        let rep = verify_rep(r.i(), r.i(), -1, 0.0);
        assert!(!rep.anticommute && rep.i_square);
        let zero = RMatrix::zeros(4, 4);
        let rep = verify_rep(r.i(), &zero, 0, 0.0);
        assert!(rep.i_square && rep.b_square && rep.anticommute && !rep.faithful);
    }

    #[test]
    fn classify_examples() {
        let h = std(-1, 1, None);
        let c = classify_pair(h.i(), h.b(), 0.0).unwrap();
        assert_eq!((c.alpha.clone(), c.epsilon), (qi(0), -1));

        let s = std(1, 1, None);
        let j2 = &s.i().scale(&q(5, 4)) + &s.b().scale(&q(3, 4));
        let c = classify_pair(s.i(), &j2, 0.0).unwrap();
        assert_eq!((c.alpha.clone(), c.epsilon), (q(-5, 4), 1));
        assert_eq!(c.b_raw, s.b().scale(&q(3, 4)));
        assert_eq!(&c.b_raw * &c.b_raw, RMatrix::scalar(4, c.c.clone()));

        let z = std(0, 1, Some(1));
        let j2 = z.i() + z.b();
        let c = classify_pair(z.i(), &j2, 0.0).unwrap();
        assert_eq!((c.alpha.clone(), c.epsilon), (qi(-1), 0));
        assert_eq!(c.b_raw, *z.b());
        assert!((&c.b_raw * &c.b_raw).is_zero(0.0));
    }

    #[test]
    fn classify_errors() {
        let h = std(-1, 1, None);
        assert_eq!(classify_pair(h.i(), &(-h.i()), 0.0).unwrap_err(), Error::Proportional);
        assert_eq!(classify_pair(h.i(), h.i(), 0.0).unwrap_err(), Error::Proportional);
        let s = std(1, 1, None);
        assert_eq!(
            classify_pair(h.i(), s.b(), 0.0).unwrap_err(),
            Error::NotComplexStructure
        );
        let mut rng = CountedRng::new(11);
        let g = rng.invertible(4);
        let other = h.conjugate(&g).unwrap();
        assert_eq!(classify_pair(h.i(), other.i(), 0.0).unwrap_err(), Error::NotCospherical);
    }

    #[test]
    fn trace_form_examples() {
        let h = std(-1, 1, None);
        assert_eq!(trace_form(h.i(), h.i(), 1), qi(1));
        assert_eq!(trace_form(h.i(), h.b(), 1), qi(0));
        let s = std(1, 2, None);
        assert_eq!(trace_form(s.b(), s.b(), 2), qi(-1));
    }

    #[test]
    fn signatures() {
        assert_eq!(
            span_signature(&std(-1, 1, None)),
            Signature {
                positive: 0,
                negative: 3,
                null: 0
            }
        );
        assert_eq!(
            span_signature(&std(1, 1, None)),
            Signature {
                positive: 2,
                negative: 1,
                null: 0
            }
        );
        assert_eq!(
            span_signature(&std(0, 2, Some(1))),
            Signature {
                positive: 0,
                negative: 1,
                null: 2
            }
        );
    }

    #[test]
    fn conjugation_by_scalars_is_trivial() {
        let s = std(1, 1, None);
        let same = s.conjugate(&RMatrix::scalar(4, qi(2))).unwrap();
        assert_eq!(same.i(), s.i());
        assert_eq!(same.b(), s.b());
        assert_eq!(s.conjugate(&RMatrix::zeros(4, 4)).unwrap_err(), Error::Singular);
    }

    #[test]
    fn adapted_basis_of_standard_rep() {
        for (n, k) in [(1, 1), (2, 1), (2, 2), (3, 2)] {
            let r = std(0, n, Some(k));
            let g = adapted_nilpotent_basis(r.i(), r.b(), 0.0).unwrap();
            let gi = inverse(&g, 0.0).unwrap();
            assert_eq!(&(&gi * r.i()) * &g, *r.i());
            assert_eq!(&(&gi * r.b()) * &g, *r.b());
        }
    }

    #[test]
    fn json_round_trip() {
        let r = std(0, 2, Some(1));
        let v = rep_to_json(&r);
        assert_eq!(v["k"], 1);
        let back: AlgebraRep = rep_from_json(&v, 0.0).unwrap();
        assert_eq!(back.i(), r.i());
        let mut wrong = v.clone();
        wrong["epsilon"] = json!(1);
        assert!(matches!(
            rep_from_json::<Rational>(&wrong, 0.0),
            Err(Error::InvalidRep(_))
        ));
    }

    #[test]
    fn float_rep_matches_exact() {
        let r = std(1, 2, None).to_f64();
        assert!(verify_rep(r.i(), r.b(), 1, DEFAULT_TOL).ok());
        assert_eq!(
            span_signature(&r),
            Signature {
                positive: 2,
                negative: 1,
                null: 0
            }
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn classification_is_adjoint_invariant(seed in any::<u64>(), n in 1usize..=3, kk in 1usize..=3) {
            let k = kk.min(n);
            let mut rng = CountedRng::new(seed);
            let r = std(0, n, Some(k));
            let g = rng.invertible(4 * n);
            let c = r.conjugate(&g).unwrap();
            prop_assert_eq!(classify_nilpotent_rep(c.i(), c.b(), 0.0).unwrap(), k);
            let h = adapted_nilpotent_basis(c.i(), c.b(), 0.0).unwrap();
            let hi = inverse(&h, 0.0).unwrap();
            prop_assert_eq!(&(&hi * c.i()) * &h, r.i().clone());
            prop_assert_eq!(&(&hi * c.b()) * &h, r.b().clone());
        }

        #[test]
        fn signature_depends_only_on_epsilon(seed in any::<u64>(), e in -1i32..=1, n in 1usize..=2) {
            let mut rng = CountedRng::new(seed);
            let r = std(e, n, (e == 0).then_some(1));
            let c = r.conjugate(&rng.invertible(4 * n)).unwrap();
            prop_assert_eq!(span_signature(&c), span_signature(&r));
            prop_assert!(verify_rep(c.i(), c.b(), e, 0.0).ok());
        }

        #[test]
        fn classified_pairs_anticommute(seed in any::<u64>(), e in prop::sample::select(vec![-1i32, 1])) {
            let mut rng = CountedRng::new(seed);
            let r = std(e, 1, None);
            // second point of the line through I from a rational parameter
            let t = rng.rational(5, 5);
            let (x, y) = if e == -1 {
                let s = qi(1) + t.clone() * t.clone();
                ((qi(1) - t.clone() * t.clone()) / s.clone(), qi(2) * t / s)
            } else {
                let t = t / qi(6);
                let s = qi(1) - t.clone() * t.clone();
                ((qi(1) + t.clone() * t.clone()) / s.clone(), qi(2) * t / s)
            };
            prop_assume!(y != qi(0));
            let j2 = r.combination(&x, &y, &qi(0));
            let c = classify_pair(r.i(), &j2, 0.0).unwrap();
            prop_assert!(c.i.anticommutator(&c.b_raw).is_zero(0.0));
            prop_assert_eq!(&c.b_raw * &c.b_raw, RMatrix::scalar(4, c.c.clone()));
            prop_assert_eq!(c.epsilon, e);
        }
    }
}
