//! Normalized period matrices of complex structures on `R^{4n}` with the
//! standard lattice, the Riemann bilinear relations, the space of classes
//! that stay of type (1,1) along a line, and Kähler certificates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_definiteness, inverse, nullspace, rank, rref, Definiteness};
use crate::line::{Component, TwistorLine};
use crate::matrix::{CMatrix, Matrix};
use crate::rep::{check_epsilon, domain_tol};
use crate::scalar::{Complex, Rational, Real, Scalar, DEFAULT_TOL};

/// `(1 | Z)` in the column order `order` (lattice columns `selection` first).
#[derive(Clone, Debug)]
pub struct PeriodMatrix<T = Rational> {
    pub z: CMatrix<T>,
    pub selection: Vec<usize>,
    pub order: Vec<usize>,
    /// `(1 | Z)` in the original column order: maps a real vector to its
    /// holomorphic coordinates.
    pub coordinates: CMatrix<T>,
}

#[derive(Clone, Debug)]
pub struct DualPeriod<T = Rational> {
    pub e: CMatrix<T>,
    pub g: CMatrix<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HdgMode {
    ClosedForm,
    GenericSampling,
}

#[derive(Clone, Debug)]
pub struct HdgSpace<T = Rational> {
    pub basis: Vec<Matrix<T>>,
    pub mode: HdgMode,
}

impl<T> HdgSpace<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoKahlerReason {
    /// The hermitian form at `-lambda` is minus the conjugate of the one at
    /// `lambda`, and both points lie on the same connected line.
    Antipodal,
    /// The hermitian form vanishes on the image of the nilpotent generator.
    IsotropicImage,
}

#[derive(Clone, Debug)]
pub enum KahlerCertificate<T = Rational> {
    Cone {
        component: Component,
        witness: Matrix<T>,
        points_checked: usize,
        verified: bool,
    },
    None {
        reason: NoKahlerReason,
        forms_checked: usize,
        points_checked: usize,
        verified: bool,
    },
}

impl<T> KahlerCertificate<T> {
    pub fn verified(&self) -> bool {
        match self {
            Self::Cone { verified, .. } | Self::None { verified, .. } => *verified,
        }
    }
}

fn work_tol<T: Scalar>(tol: f64) -> f64 {
    if T::EXACT {
        0.0
    } else {
        tol.max(DEFAULT_TOL)
    }
}

fn i_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Rows spanning the `i`-eigenspace of `lambda^t`, reduced so that the
/// first C-independent lattice columns carry the identity.
pub fn normalized_period<T: Real>(lambda: &Matrix<T>, tol: f64) -> Result<PeriodMatrix<T>> {
    let d = lambda.rows();
    if !lambda.is_square() || !d.is_multiple_of(4) || d == 0 {
        return Err(Error::DimensionMismatch(
            "period needs a 4n x 4n complex structure".into(),
        ));
    }
    let tol = work_tol::<T>(tol);
    if !(lambda * lambda).near(&Matrix::scalar(d, -T::one()), tol) {
        return Err(Error::NotComplexStructure);
    }
    let shifted = &lambda.transpose().to_complex() - &CMatrix::scalar(d, i_unit());
    let kernel = nullspace(&shifted, tol);
    if kernel.len() != d / 2 {
        return Err(Error::NotComplexStructure);
    }
    let rows = Matrix::from_cols(d, &kernel).transpose();
    let ech = rref(&rows, tol);
    let selection = ech.pivots.clone();
    let rest: Vec<usize> = (0..d).filter(|c| !selection.contains(c)).collect();
    let z = ech.reduced.select_cols(&rest);
    let order = selection.iter().chain(&rest).copied().collect();
    Ok(PeriodMatrix {
        z,
        selection,
        order,
        coordinates: ech.reduced,
    })
}

/// `G = (Z - conj Z)^{-1}`, `E = Id - Z G`.
pub fn dual_period<T: Real>(z: &CMatrix<T>, tol: f64) -> Result<DualPeriod<T>> {
    let m = z.rows();
    let diff = z - &z.conj();
    let g = inverse(&diff, work_tol::<T>(tol)).map_err(|_| Error::DegenerateImaginaryPart)?;
    let e = &CMatrix::identity(m) - &(z * &g);
    Ok(DualPeriod { e, g })
}

/// `-i Pi^t Q Pi-bar` with `Pi = [E; G]` in the period's column order.
pub fn hermitian_form<T: Real>(q: &Matrix<T>, lambda: &Matrix<T>, tol: f64) -> Result<CMatrix<T>> {
    if q.rows() != lambda.rows() || !q.is_square() {
        return Err(Error::DimensionMismatch("form and point sizes differ".into()));
    }
    let period = normalized_period(lambda, tol)?;
    let dual = dual_period(&period.z, tol)?;
    let pi = dual.e.vstack(&dual.g)?;
    let q_perm = q.select_rows(&period.order).select_cols(&period.order).to_complex();
    let h = &(&pi.transpose() * &q_perm) * &pi.conj();
    Ok(h.scale(&-i_unit::<T>()))
}

/// Hermitian form restricted to the complex span of the holomorphic
/// coordinates of the given real vectors.
pub fn restricted_form<T: Real>(
    q: &Matrix<T>,
    lambda: &Matrix<T>,
    vectors: &Matrix<T>,
    tol: f64,
) -> Result<CMatrix<T>> {
    let period = normalized_period(lambda, tol)?;
    let h = hermitian_form(q, lambda, tol)?;
    let coords = &period.coordinates * &vectors.to_complex();
    Ok(&(&coords.transpose() * &h) * &coords.conj())
}

pub fn is_kahler_at<T: Real>(q: &Matrix<T>, lambda: &Matrix<T>, tol: f64) -> Result<bool> {
    let h = hermitian_form(q, lambda, tol)?;
    Ok(
        hermitian_definiteness(&h, domain_tol::<T>(tol).max(if T::EXACT { 0.0 } else { DEFAULT_TOL }))?
            == Definiteness::Positive,
    )
}

pub fn hdg_dim_formula(epsilon: i32, n: usize, k: Option<usize>) -> Result<usize> {
    check_epsilon(epsilon)?;
    if epsilon != 0 {
        return Ok(2 * n * n + n);
    }
    let k = k.ok_or(Error::BadK { k: 0, n })?;
    if k == 0 || k > n {
        return Err(Error::BadK { k, n });
    }
    Ok(k * (k + 1) + (2 * n - k) * (2 * n - k))
}

fn upper_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect()
}

fn skew_from_coeffs<T: Real>(d: usize, pairs: &[(usize, usize)], coeffs: &[T]) -> Matrix<T> {
    let mut q = Matrix::zeros(d, d);
    for (&(a, b), x) in pairs.iter().zip(coeffs) {
        q[(a, b)] = x.clone();
        q[(b, a)] = -x.clone();
    }
    q
}

/// Solves for skew `Q` with `constraint(Q) = 0`, where `constraint` is linear
/// and evaluated on the elementary skew forms.
fn skew_solutions<T: Real>(d: usize, tol: f64, constraint: impl Fn(&Matrix<T>) -> Vec<T>) -> Vec<Matrix<T>> {
    let pairs = upper_pairs(d);
    let cols: Vec<Vec<T>> = pairs
        .iter()
        .map(|&(a, b)| {
            let mut e = Matrix::zeros(d, d);
            e[(a, b)] = T::one();
            e[(b, a)] = -T::one();
            constraint(&e)
        })
        .collect();
    let rows = cols.first().map_or(0, Vec::len);
    let system = Matrix::from_cols(rows, &cols);
    nullspace(&system, tol)
        .iter()
        .map(|c| skew_from_coeffs(d, &pairs, c))
        .collect()
}

fn commutation_defect<T: Real>(q: &Matrix<T>, x: &Matrix<T>) -> Matrix<T> {
    &(&x.transpose() * q) + &(q * x)
}

/// `lambda^t Q lambda - Q`
pub fn invariance_defect<T: Real>(q: &Matrix<T>, lambda: &Matrix<T>) -> Matrix<T> {
    &(&(&lambda.transpose() * q) * lambda) - q
}

/// Skew forms `Q` with `lambda^t Q lambda = Q` for every point of the line.
///
/// The closed form imposes `X^t Q + Q X = 0` for the generators `I` and `B`
/// (the condition for `K` follows). Sampling imposes the invariance at three
/// points with independent coordinates and confirms at a fourth.
pub fn hdg_space<T: Real>(line: &TwistorLine<T>, mode: HdgMode) -> Result<HdgSpace<T>> {
    let rep = line.rep();
    let d = rep.dim();
    let tol = work_tol::<T>(rep.tol());
    let flatten = |m: Matrix<T>| -> Vec<T> { upper_pairs(d).into_iter().map(|(a, b)| m[(a, b)].clone()).collect() };
    let basis = match mode {
        HdgMode::ClosedForm => skew_solutions(d, tol, |e| {
            let mut v = flatten(commutation_defect(e, rep.i()));
            v.extend(flatten(commutation_defect(e, rep.b())));
            v
        }),
        HdgMode::GenericSampling => {
            let (points, confirm) = generic_points(line);
            let basis = skew_solutions(d, tol, |e| {
                points.iter().flat_map(|p| flatten(invariance_defect(e, p))).collect()
            });
            for q in &basis {
                if !invariance_defect(q, &confirm).is_zero(tol * q.max_abs().max(1.0)) {
                    return Err(Error::DegenerateBasis);
                }
            }
            basis
        }
    };
    Ok(HdgSpace { basis, mode })
}

/// Three points of the line with linearly independent coordinate vectors,
/// plus one more for confirmation.
fn generic_points<T: Real>(line: &TwistorLine<T>) -> (Vec<Matrix<T>>, Matrix<T>) {
    let samples = line.sample_points(64, None);
    let tol = work_tol::<T>(line.rep().tol());
    let mut chosen: Vec<usize> = Vec::new();
    for (idx, p) in samples.iter().enumerate().skip(1) {
        let mut cols: Vec<Vec<T>> = chosen.iter().map(|&c| samples[c].coords.to_vec()).collect();
        cols.push(p.coords.to_vec());
        if rank(&Matrix::from_cols(3, &cols), tol) == cols.len() {
            chosen.push(idx);
        }
        if chosen.len() == 3 {
            break;
        }
    }
    let confirm = samples.last().expect("samples").matrix.clone();
    (chosen.into_iter().map(|c| samples[c].matrix.clone()).collect(), confirm)
}

/// Whether both modes span the same space.
pub fn hdg_modes_agree<T: Real>(line: &TwistorLine<T>) -> Result<bool> {
    let a = hdg_space(line, HdgMode::ClosedForm)?;
    let b = hdg_space(line, HdgMode::GenericSampling)?;
    if a.dim() != b.dim() {
        return Ok(false);
    }
    let d = line.rep().dim();
    let tol = work_tol::<T>(line.rep().tol());
    let cols: Vec<Vec<T>> = a.basis.iter().chain(&b.basis).map(Matrix::vectorize).collect();
    Ok(rank(&Matrix::from_cols(d * d, &cols), tol) == a.dim())
}

/// Averaged metric `G = (Id + I^t I + (B^t B + K^t K) / c) / 4`, invariant
/// under the finite group generated by `I` and the normalized `B`.
fn averaged_metric<T: Real>(line: &TwistorLine<T>) -> Matrix<T> {
    let rep = line.rep();
    let c = rep.b_square().clone();
    let mut g = &Matrix::identity(rep.dim()) + &(&rep.i().transpose() * rep.i());
    let bb = &(&rep.b().transpose() * rep.b()) + &(&rep.k_mat().transpose() * rep.k_mat());
    g = &g + &bb.scale(&(T::one() / c));
    g.scale(&(T::one() / T::from_i64(4)))
}

/// A Kähler witness on one sheet of a hyperbolic line: `Q = -G I` on the
/// `+` component and `G I` on the `-` component.
pub fn cone_witness<T: Real>(line: &TwistorLine<T>, component: Component) -> Result<Matrix<T>> {
    if line.epsilon() != 1 {
        return Err(Error::WrongEpsilon {
            expected: "1",
            got: line.epsilon(),
        });
    }
    let gi = &averaged_metric(line) * line.rep().i();
    Ok(gi.scale(&T::from_i64(-component.sign())))
}

/// Certifies the presence (hyperbolic lines) or absence (other lines) of
/// Kähler classes at finitely many sampled points.
pub fn kahler_certificate<T: Real>(
    line: &TwistorLine<T>,
    component: Option<Component>,
    points: usize,
) -> Result<KahlerCertificate<T>> {
    let tol = work_tol::<T>(line.rep().tol());
    let points = points.max(1);
    match line.epsilon() {
        1 => {
            let component = component.unwrap_or(Component::Plus);
            let witness = cone_witness(line, component)?;
            let rep = line.rep();
            let scale = witness.max_abs().max(1.0) * rep.i().max_abs().max(rep.b().max_abs()).max(1.0);
            let mut verified = commutation_defect(&witness, rep.i()).is_zero(tol * scale)
                && commutation_defect(&witness, rep.b()).is_zero(tol * scale);
            for p in line.sample_points(points, Some(component)) {
                verified &= is_kahler_at(&witness, &p.matrix, tol)?;
                verified &= !is_kahler_at(&witness, &(-&p.matrix), tol)?;
            }
            Ok(KahlerCertificate::Cone {
                component,
                witness,
                points_checked: points,
                verified,
            })
        }
        -1 => {
            let hdg = hdg_space(line, HdgMode::ClosedForm)?;
            let mut verified = true;
            for p in line.sample_points(points, None) {
                let neg = -&p.matrix;
                verified &= line.contains(&neg)?.is_some();
                for q in &hdg.basis {
                    let h = hermitian_form(q, &p.matrix, tol)?;
                    let h_neg = hermitian_form(q, &neg, tol)?;
                    verified &= h_neg.approx_eq(&(-&h.conj()), tol * h.max_abs().max(1.0));
                    if is_kahler_at(q, &p.matrix, tol)? {
                        verified &= !is_kahler_at(q, &neg, tol)?;
                    }
                }
            }
            Ok(KahlerCertificate::None {
                reason: NoKahlerReason::Antipodal,
                forms_checked: hdg.dim(),
                points_checked: points,
                verified,
            })
        }
        _ => {
            let hdg = hdg_space(line, HdgMode::ClosedForm)?;
            let image = line.rep().b();
            let mut verified = true;
            for p in line.sample_points(points, component) {
                for q in &hdg.basis {
                    let r = restricted_form(q, &p.matrix, image, tol)?;
                    verified &= r.is_zero(tol * q.max_abs().max(1.0));
                    verified &= !is_kahler_at(q, &p.matrix, tol)?;
                }
            }
            Ok(KahlerCertificate::None {
                reason: NoKahlerReason::IsotropicImage,
                forms_checked: hdg.dim(),
                points_checked: points,
                verified,
            })
        }
    }
}
