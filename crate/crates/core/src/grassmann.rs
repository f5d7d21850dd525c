//! Complex structures as points of `Gr(2n, C^{4n})` via `lambda -> (Id - i lambda) R^{4n}`,
//! the real locus `L_R` of subspaces meeting `R^{4n}`, limits of lines at
//! infinity, and tangent vectors there as homomorphisms `p -> C^{4n} / p`.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{nullspace, principal_angles, rank, solve, SubspaceC};
use crate::line::{Component, TwistorLine};
use crate::matrix::{CMatrix, Matrix};
use crate::rep::{invariant_complement, standard_basis, AlgebraRep};
use crate::scalar::{Complex, Rational, Real, Scalar, DEFAULT_TOL};

pub type GrassPoint<T = Rational> = SubspaceC<T>;

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

fn c_real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Column span of `Id - i lambda`.
pub fn embed<T: Real>(lambda: &Matrix<T>, tol: f64) -> Result<GrassPoint<T>> {
    let d = lambda.rows();
    let tol = work_tol::<T>(tol);
    if !lambda.is_square() || !(lambda * lambda).near(&Matrix::scalar(d, -T::one()), tol) {
        return Err(Error::NotComplexStructure);
    }
    let m = CMatrix::from_parts(&Matrix::identity(d), &(-lambda));
    Ok(SubspaceC::span_of(&m, tol))
}

/// Whether `U` meets the real points, and the real dimension of the meet.
pub fn in_lr<T: Real>(u: &GrassPoint<T>) -> (bool, usize) {
    let d = u.real_points_dimension();
    (d > 0, d)
}

/// Product of `u0 I + u1 B + u2 K` and `v0 I + v1 B + v2 K` with `B^2 = c`:
/// the scalar part and the `(I, B, K)` coordinates of the rest.
pub fn span_product<T: Real>(c: &T, u: &[T; 3], v: &[T; 3]) -> (T, [T; 3]) {
    let scalar = -u[0].mul_ref(&v[0]) + c.mul_ref(&(u[1].mul_ref(&v[1]) + u[2].mul_ref(&v[2])));
    let x = c.mul_ref(&(u[2].mul_ref(&v[1]) - u[1].mul_ref(&v[2])));
    let y = u[2].mul_ref(&v[0]) - u[0].mul_ref(&v[2]);
    let z = u[0].mul_ref(&v[1]) - u[1].mul_ref(&v[0]);
    (scalar, [x, y, z])
}

/// Tangent plane of the quadric at `coords`, in span coordinates.
pub fn tangent_plane<T: Real>(c: &T, coords: &[T; 3], tol: f64) -> Vec<[T; 3]> {
    let grad = Matrix::from_fn(1, 3, |_, j| match j {
        0 => coords[0].clone(),
        _ => -c.mul_ref(&coords[j]),
    });
    nullspace(&grad, tol)
        .into_iter()
        .map(|v| v.try_into().expect("three coordinates"))
        .collect()
}

/// Left multiplication by the point preserves the tangent plane of the line
/// there, i.e. the line is a complex curve at that point.
pub fn tangent_invariance_check<T: Real>(line: &TwistorLine<T>, coords: &[T; 3]) -> Result<bool> {
    let rep = line.rep();
    let tol = work_tol::<T>(rep.tol());
    line.point(coords[0].clone(), coords[1].clone(), coords[2].clone())?;
    let c = rep.b_square();
    let plane = tangent_plane(c, coords, tol);
    if plane.len() != 2 {
        return Ok(false);
    }
    let mut cols: Vec<Vec<T>> = plane.iter().map(|t| t.to_vec()).collect();
    for t in &plane {
        let (scalar, vec) = span_product(c, coords, t);
        if !scalar.negligible(tol) {
            return Ok(false);
        }
        cols.push(vec.to_vec());
    }
    Ok(rank(&Matrix::from_cols(3, &cols), tol) == 2)
}

fn require_hyperbolic<T: Real>(rep: &AlgebraRep<T>) -> Result<()> {
    if rep.epsilon() != 1 {
        return Err(Error::WrongEpsilon {
            expected: "1",
            got: rep.epsilon(),
        });
    }
    if !rep.is_normalized() {
        return Err(Error::NotNormalized("circle at infinity needs B^2 = Id".into()));
    }
    Ok(())
}

/// `W + iW` for `W = (I + c B + s K) R^{4n}`, `c^2 + s^2 = 1`.
pub fn infinity_circle_point<T: Real>(line: &TwistorLine<T>, c: &T, s: &T) -> Result<GrassPoint<T>> {
    let rep = line.rep();
    require_hyperbolic(rep)?;
    let tol = work_tol::<T>(rep.tol());
    if !(c.mul_ref(c) + s.mul_ref(s) - T::one()).negligible(tol) {
        return Err(Error::OffCircle);
    }
    let m = rep.combination(&T::one(), c, s);
    Ok(SubspaceC::complexified(&m, tol))
}

fn require_nilpotent<T: Real>(rep: &AlgebraRep<T>) -> Result<()> {
    if rep.epsilon() != 0 {
        return Err(Error::WrongEpsilon {
            expected: "0",
            got: rep.epsilon(),
        });
    }
    Ok(())
}

/// `Im N + i Im N + (Id -/+ i I) Ker N` for the `+` / `-` component.
pub fn infinity_point<T: Real>(line: &TwistorLine<T>, which: Component) -> Result<GrassPoint<T>> {
    let rep = line.rep();
    require_nilpotent(rep)?;
    let tol = work_tol::<T>(rep.tol());
    let d = rep.dim();
    let mut cols: Vec<Vec<Complex<T>>> = (0..d)
        .map(|j| rep.b().col(j).into_iter().map(c_real).collect())
        .collect();
    let twist = twisted_identity(rep.i(), which);
    for w in nullspace(rep.b(), tol) {
        let wc: Vec<Complex<T>> = w.into_iter().map(c_real).collect();
        cols.push(twist.apply(&wc));
    }
    Ok(SubspaceC::span_of(&Matrix::from_cols(d, &cols), tol))
}

pub fn infinity_points<T: Real>(line: &TwistorLine<T>) -> Result<(GrassPoint<T>, GrassPoint<T>)> {
    Ok((
        infinity_point(line, Component::Plus)?,
        infinity_point(line, Component::Minus)?,
    ))
}

/// `Id - i I` for `+`, `Id + i I` for `-`.
fn twisted_identity<T: Real>(i: &Matrix<T>, which: Component) -> CMatrix<T> {
    let sign = T::from_i64(-which.sign());
    CMatrix::from_parts(&Matrix::identity(i.rows()), &i.scale(&sign))
}

/// A polynomial curve of matrices `sum_e t^e coeffs[e]`.
#[derive(Clone, Debug)]
pub struct MatrixCurve<T = Rational> {
    pub coeffs: Vec<CMatrix<T>>,
}

impl<T: Real> MatrixCurve<T> {
    pub fn at(&self, t: &T) -> CMatrix<T> {
        let t = c_real(t.clone());
        let mut acc = self.coeffs.last().expect("nonempty curve").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc.scale(&t) + c;
        }
        acc
    }
}

/// Limit as `t -> 0` of the column span of a polynomial matrix curve whose
/// generic rank is `dim`. Leading coefficients of the columns are made
/// independent by column operations over polynomials, after which they span
/// the limit.
pub fn limit_span<T: Real>(curve: &MatrixCurve<T>, dim: usize, tol: f64) -> Result<GrassPoint<T>> {
    let tol = work_tol::<T>(tol);
    let generic = curve.at(&T::from_rational(&crate::scalar::q(1, 7)));
    let idx = crate::linalg::independent_columns(&generic, tol);
    if idx.len() != dim {
        return Err(Error::DegenerateBasis);
    }
    let rows = generic.rows();
    // columns as coefficient lists, lowest degree first
    let mut polys: Vec<Vec<Vec<Complex<T>>>> = idx
        .iter()
        .map(|&j| curve.coeffs.iter().map(|m| m.col(j)).collect())
        .collect();
    let order = |p: &Vec<Vec<Complex<T>>>| p.iter().position(|v| v.iter().any(|x| !x.negligible(tol)));
    for _ in 0..64 * dim.max(1) {
        let orders: Vec<usize> = polys
            .iter()
            .map(|p| order(p).ok_or(Error::DegenerateBasis))
            .collect::<Result<_>>()?;
        let leads: Vec<Vec<Complex<T>>> = polys.iter().zip(&orders).map(|(p, &o)| p[o].clone()).collect();
        let lead_m = Matrix::from_cols(rows, &leads);
        let null = nullspace(&lead_m, tol);
        let Some(c) = null.first() else {
            return Ok(SubspaceC::span_of(&lead_m, tol));
        };
        let support: Vec<usize> = (0..dim).filter(|&j| !c[j].negligible(tol)).collect();
        let top = *support.iter().max_by_key(|&&j| orders[j]).expect("nonzero null vector");
        let len = polys.iter().map(Vec::len).max().unwrap_or(0) + orders[top];
        let mut combined = vec![vec![Complex::<T>::zero(); rows]; len];
        for &j in &support {
            let shift = orders[top] - orders[j];
            for (e, v) in polys[j].iter().enumerate() {
                for r in 0..rows {
                    combined[e + shift][r] = combined[e + shift][r].add_ref(&c[j].mul_ref(&v[r]));
                }
            }
        }
        // exact cancellation of the shared leading term
        if T::EXACT {
            debug_assert!(combined[orders[top]].iter().all(|x| x.negligible(0.0)));
        } else {
            for x in combined[orders[top]].iter_mut() {
                *x = Complex::zero();
            }
        }
        polys[top] = combined;
    }
    Err(Error::NotConverged {
        iterations: 64 * dim,
        residual: f64::NAN,
    })
}

/// Limit at infinity of a hyperbolic line along the rational curve through
/// the direction `(c, s)` on the chosen sheet.
pub fn exact_limit_hyperbolic<T: Real>(line: &TwistorLine<T>, c: &T, s: &T, sheet: Component) -> Result<GrassPoint<T>> {
    let rep = line.rep();
    require_hyperbolic(rep)?;
    let tol = work_tol::<T>(rep.tol());
    if !(c.mul_ref(c) + s.mul_ref(s) - T::one()).negligible(tol) {
        return Err(Error::OffCircle);
    }
    // rho = 1 - t in (1 - rho^2) Id -/+ i ((1 + rho^2) I + 2 rho (c B + s K))
    let d = rep.dim();
    let dir = rep.combination(&T::zero(), c, s);
    let i = rep.i();
    let sg = T::from_i64(-sheet.sign());
    let two = T::from_i64(2);
    let im0 = &i.scale(&two) + &dir.scale(&two);
    let im1 = &i.scale(&-two.clone()) + &dir.scale(&-two.clone());
    let im2 = i.clone();
    let re1 = Matrix::scalar(d, two.clone());
    let re2 = Matrix::scalar(d, -T::one());
    let zero = Matrix::zeros(d, d);
    let coeffs = vec![
        CMatrix::from_parts(&zero, &im0.scale(&sg)),
        CMatrix::from_parts(&re1, &im1.scale(&sg)),
        CMatrix::from_parts(&re2, &im2.scale(&sg)),
    ];
    limit_span(&MatrixCurve { coeffs }, d / 2, tol)
}

/// Limit at infinity of a nilpotent line along `+/-(I + y (alpha N + beta I N))`.
pub fn exact_limit_nilpotent<T: Real>(
    line: &TwistorLine<T>,
    which: Component,
    alpha: &T,
    beta: &T,
) -> Result<GrassPoint<T>> {
    let rep = line.rep();
    require_nilpotent(rep)?;
    let tol = work_tol::<T>(rep.tol());
    let d = rep.dim();
    let dir = &rep.b().scale(alpha) + &rep.k_mat().scale(beta);
    if dir.is_zero(tol) {
        return Err(Error::ZeroParameter);
    }
    // t (Id -/+ i I) -/+ i (alpha N + beta I N)
    let sg = T::from_i64(-which.sign());
    let coeffs = vec![
        CMatrix::from_parts(&Matrix::zeros(d, d), &dir.scale(&sg)),
        twisted_identity(rep.i(), which),
    ];
    limit_span(&MatrixCurve { coeffs }, d / 2, tol)
}

/// Curve approaching infinity, for float convergence studies.
#[derive(Clone, Debug)]
pub enum RaySpec {
    /// `sheet (t I + sqrt(t^2 - 1) (c B + s K))`
    Hyperbolic { sheet: Component, c: f64, s: f64 },
    /// `+/- I + y (alpha N + beta I N)`
    Nilpotent { which: Component, alpha: f64, beta: f64 },
    /// A fixed point of the line.
    Constant { coords: [f64; 3] },
}

/// Largest principal angle between the image of the curve and its expected
/// limit, at each parameter.
pub fn limit_convergence<T: Real>(line: &TwistorLine<T>, ray: &RaySpec, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if T::EXACT {
        return Err(Error::DomainMismatch);
    }
    let rep = line.rep().to_f64();
    let fline = TwistorLine::new(rep.clone());
    let tol = DEFAULT_TOL;
    let target = match ray {
        RaySpec::Hyperbolic { c, s, .. } => infinity_circle_point(&fline, c, s)?,
        RaySpec::Nilpotent { which, .. } => infinity_point(&fline, *which)?,
        RaySpec::Constant { coords } => embed(&fline.point(coords[0], coords[1], coords[2])?.matrix, tol)?,
    };
    grid.iter()
        .map(|&t| {
            let lambda = match ray {
                RaySpec::Hyperbolic { sheet, c, s } => {
                    let r = (t * t - 1.0).max(0.0).sqrt();
                    rep.combination(&t, &(r * c), &(r * s)).scale(&(sheet.sign() as f64))
                }
                RaySpec::Nilpotent { which, alpha, beta } => {
                    rep.combination(&(which.sign() as f64), &(t * alpha), &(t * beta))
                }
                RaySpec::Constant { coords } => rep.combination(&coords[0], &coords[1], &coords[2]),
            };
            // rescaled so the spanning matrix stays bounded
            let scale = lambda.max_abs().max(1.0);
            let m = CMatrix::from_parts(
                &Matrix::identity(rep.dim()).scale(&(1.0 / scale)),
                &lambda.scale(&(-1.0 / scale)),
            );
            let u = SubspaceC::span_of(&m, tol);
            let angles = principal_angles(&u, &target)?;
            Ok((t, angles.first().copied().unwrap_or(0.0)))
        })
        .collect()
}

/// A tangent vector at `base`: images of the base's basis columns in `C^{4n}`,
/// meaningful modulo homomorphisms into `base`.
#[derive(Clone, Debug)]
pub struct TangentHom<T = Rational> {
    pub base: GrassPoint<T>,
    pub map: CMatrix<T>,
}

impl<T: Real> TangentHom<T> {
    pub fn new(base: GrassPoint<T>, map: CMatrix<T>) -> Result<Self> {
        if map.rows() != base.ambient_dim() || map.cols() != base.dim() {
            return Err(Error::DimensionMismatch("tangent map shape".into()));
        }
        Ok(Self { base, map })
    }

    fn tol(&self) -> f64 {
        work_tol::<T>(self.base.tol())
    }

    /// Same class in `Hom(p, C^{4n} / p)`.
    pub fn equal_mod_base(&self, other: &Self) -> bool {
        if !self.base.equals(&other.base) {
            return false;
        }
        let other = match other.rebase(&self.base) {
            Ok(o) => o,
            Err(_) => return false,
        };
        let diff = &self.map - &other.map;
        let stack = self.base.basis().hstack(&diff).expect("same rows");
        rank(&stack, self.tol()) == self.base.dim()
    }

    /// The same homomorphism expressed on another basis of the same subspace.
    pub fn rebase(&self, base: &GrassPoint<T>) -> Result<Self> {
        let tol = self.tol();
        let mut coeff_cols = Vec::with_capacity(base.dim());
        for j in 0..base.dim() {
            let x = solve(self.base.basis(), &base.basis().col(j), tol)
                .ok_or(Error::DimensionMismatch("bases span different subspaces".into()))?;
            coeff_cols.push(x);
        }
        let a = Matrix::from_cols(self.base.dim(), &coeff_cols);
        Ok(Self {
            base: base.clone(),
            map: &self.map * &a,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let other = other.rebase(&self.base)?;
        Ok(Self {
            base: self.base.clone(),
            map: &self.map + &other.map,
        })
    }

    pub fn scale(&self, a: &T) -> Self {
        Self {
            base: self.base.clone(),
            map: self.map.scale(&c_real(a.clone())),
        }
    }

    /// Whether the stored representative sends some nonzero real point of the
    /// base to a nonzero real vector.
    pub fn in_tangent_cone_lr(&self) -> Result<bool> {
        let tol = self.tol();
        let real = self.base.real_points();
        if real.cols() == 0 {
            return Err(Error::BaseNotInLR);
        }
        let basis = self.base.basis();
        let mut coeffs = Vec::with_capacity(real.cols());
        for j in 0..real.cols() {
            let v: Vec<Complex<T>> = real.col(j).into_iter().map(c_real).collect();
            coeffs.push(solve(basis, &v, tol).ok_or(Error::DegenerateBasis)?);
        }
        let images = &self.map * &Matrix::from_cols(basis.cols(), &coeffs);
        let (re, im) = (images.re(), images.im());
        let scale = images.max_abs().max(1.0);
        Ok(nullspace(&im, tol).iter().any(|x| {
            let v = re.apply(x);
            v.iter().any(|e| !e.negligible(tol * scale))
        }))
    }
}

/// Real dimension of the span of the classes of `homs` in `Hom(p, C^{4n}/p)`.
pub fn quotient_real_rank<T: Real>(homs: &[TangentHom<T>]) -> Result<usize> {
    let Some(first) = homs.first() else {
        return Ok(0);
    };
    let base = &first.base;
    let tol = first.tol();
    let (d, k) = (base.ambient_dim(), base.dim());
    let realify = |m: &CMatrix<T>| -> Vec<T> {
        let v = m.vectorize();
        v.iter()
            .map(|z| z.re.clone())
            .chain(v.iter().map(|z| z.im.clone()))
            .collect()
    };
    let mut cols = Vec::new();
    for a in 0..k {
        for b in 0..k {
            for unit in [Complex::new(T::one(), T::zero()), i_unit()] {
                let e = CMatrix::from_fn(k, k, |r, c| {
                    if r == a && c == b {
                        unit.clone()
                    } else {
                        Complex::zero()
                    }
                });
                cols.push(realify(&(base.basis() * &e)));
            }
        }
    }
    let inner = rank(&Matrix::from_cols(2 * d * k, &cols), tol);
    for h in homs {
        cols.push(realify(&h.rebase(base)?.map));
    }
    Ok(rank(&Matrix::from_cols(2 * d * k, &cols), tol) - inner)
}

/// Choice of complement used to build tangent representatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplementChoice {
    Primary,
    Secondary,
}

/// Data at the circle point `(1, 0)`: the real basis `v_j = (I + B) u_j` of
/// the base and the complement vectors `u_j`.
struct CircleFrame<T> {
    base: GrassPoint<T>,
    us: Vec<Vec<T>>,
}

fn circle_frame<T: Real>(rep: &AlgebraRep<T>, choice: ComplementChoice) -> Result<CircleFrame<T>> {
    require_hyperbolic(rep)?;
    let tol = work_tol::<T>(rep.tol());
    let d = rep.dim();
    let ib = rep.combination(&T::one(), &T::one(), &T::zero());
    let kernel = nullspace(&ib, tol);
    let mut us: Vec<Vec<T>> = Vec::new();
    let mut cols = kernel.clone();
    for e in standard_basis::<T>(d) {
        if us.len() == d - kernel.len() {
            break;
        }
        cols.push(e.clone());
        if rank(&Matrix::from_cols(d, &cols), tol) == cols.len() {
            us.push(e);
        } else {
            cols.pop();
        }
    }
    if choice == ComplementChoice::Secondary {
        // shift each u_j by an element of Ker(I + B)
        let m = kernel.len();
        for (j, u) in us.iter_mut().enumerate() {
            let kappa = &kernel[(j + 1) % m];
            for (x, y) in u.iter_mut().zip(kappa) {
                *x = x.add_ref(y);
            }
        }
    }
    let vs: Vec<Vec<Complex<T>>> = us
        .iter()
        .map(|u| ib.apply(u).into_iter().map(c_real).collect())
        .collect();
    let base = SubspaceC::new(Matrix::from_cols(d, &vs), tol)?;
    Ok(CircleFrame { base, us })
}

/// `phi_b : (I + B) u -> (b K + i) u` at the circle point `(1, 0)`.
pub fn tangent_at_infinity_hyperbolic<T: Real>(
    line: &TwistorLine<T>,
    b: &T,
    choice: ComplementChoice,
) -> Result<TangentHom<T>> {
    let rep = line.rep();
    let frame = circle_frame(rep, choice)?;
    let op = CMatrix::from_parts(&rep.k_mat().scale(b), &Matrix::identity(rep.dim()));
    let cols: Vec<Vec<Complex<T>>> = frame
        .us
        .iter()
        .map(|u| op.apply(&u.iter().cloned().map(c_real).collect::<Vec<_>>()))
        .collect();
    TangentHom::new(frame.base, Matrix::from_cols(rep.dim(), &cols))
}

/// Tangent to the circle at infinity: `(I + B) u -> K u`.
pub fn circle_direction<T: Real>(line: &TwistorLine<T>, choice: ComplementChoice) -> Result<TangentHom<T>> {
    let rep = line.rep();
    let frame = circle_frame(rep, choice)?;
    let cols: Vec<Vec<Complex<T>>> = frame
        .us
        .iter()
        .map(|u| rep.k_mat().apply(u).into_iter().map(c_real).collect())
        .collect();
    TangentHom::new(frame.base, Matrix::from_cols(rep.dim(), &cols))
}

/// Data at `p+/-`: basis `N u_m` (image) then `(Id -/+ i I) w_j` (kernel part),
/// with `u_m` running over an `I`-invariant complement of `Ker N`.
struct NilpotentFrame<T> {
    base: GrassPoint<T>,
    us: Vec<Vec<T>>,
    kernel_cols: usize,
}

fn nilpotent_frame<T: Real>(
    rep: &AlgebraRep<T>,
    which: Component,
    choice: ComplementChoice,
) -> Result<NilpotentFrame<T>> {
    require_nilpotent(rep)?;
    let tol = work_tol::<T>(rep.tol());
    let d = rep.dim();
    let n_mat = rep.b();
    let i = rep.i();
    let kernel = nullspace(n_mat, tol);
    let firsts = invariant_complement(i, &kernel, standard_basis(d), d, tol);
    let mut us: Vec<Vec<T>> = firsts
        .iter()
        .cloned()
        .chain(firsts.iter().map(|u| i.apply(u)))
        .collect();
    if choice == ComplementChoice::Secondary {
        let k = firsts.len();
        for j in 0..k {
            let kappa = &kernel[j % kernel.len()];
            let ikappa = i.apply(kappa);
            for (x, y) in us[j].iter_mut().zip(kappa) {
                *x = x.add_ref(y);
            }
            for (x, y) in us[k + j].iter_mut().zip(&ikappa) {
                *x = x.add_ref(y);
            }
        }
    }
    let image: Vec<Vec<Complex<T>>> = us
        .iter()
        .map(|u| n_mat.apply(u).into_iter().map(c_real).collect())
        .collect();
    let image_real: Vec<Vec<T>> = us.iter().map(|u| n_mat.apply(u)).collect();
    let ws = invariant_complement(i, &image_real, kernel.iter().cloned(), kernel.len(), tol);
    let twist = twisted_identity(i, which);
    let mut cols = image;
    for w in &ws {
        cols.push(twist.apply(&w.iter().cloned().map(c_real).collect::<Vec<_>>()));
    }
    let base = SubspaceC::new(Matrix::from_cols(d, &cols), tol)?;
    Ok(NilpotentFrame {
        base,
        us,
        kernel_cols: ws.len(),
    })
}

/// `phi_z` at `p+` (`v -> (i / conj z)(Id - i I) u`) or `p-`
/// (`v -> (-i / z)(Id + i I) u`), for `v = N u` in the image and zero on
/// the kernel part.
pub fn tangent_at_infinity_nilpotent<T: Real>(
    line: &TwistorLine<T>,
    which: Component,
    z: &Complex<T>,
    choice: ComplementChoice,
) -> Result<TangentHom<T>> {
    let rep = line.rep();
    let tol = work_tol::<T>(rep.tol());
    if z.negligible(tol) {
        return Err(Error::ZeroParameter);
    }
    let frame = nilpotent_frame(rep, which, choice)?;
    let d = rep.dim();
    let factor = match which {
        Component::Plus => i_unit::<T>() / z.conj(),
        Component::Minus => -i_unit::<T>() / z.clone(),
    };
    let op = twisted_identity(rep.i(), which).scale(&factor);
    let mut cols: Vec<Vec<Complex<T>>> = frame
        .us
        .iter()
        .map(|u| op.apply(&u.iter().cloned().map(c_real).collect::<Vec<_>>()))
        .collect();
    cols.extend((0..frame.kernel_cols).map(|_| vec![Complex::zero(); d]));
    TangentHom::new(frame.base, Matrix::from_cols(d, &cols))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InfinityTangentReport {
    pub base: String,
    pub plane_dim: usize,
    /// Only for the circle at infinity of a hyperbolic line.
    pub boundary_in_cone: Option<bool>,
    pub interior_hits: usize,
    pub directions: usize,
    /// Reductions agree for two complements.
    pub complement_independent: bool,
    /// The cone criterion gives the same verdict for both representatives.
    pub cone_verdict_stable: bool,
    pub verdict: bool,
    /// Trivial intersection with a 2-plane forces the base to be a singular
    /// point of the real locus.
    pub singular_point: Option<bool>,
}

fn interior_samples() -> [(i64, i64); 8] {
    [(1, 0), (0, 1), (1, 1), (1, -1), (-1, 0), (0, -1), (2, 1), (-1, 2)]
}

/// Tangent plane of the closed line at its points at infinity, and its
/// intersection with the tangent cone of the real locus.
pub fn infinity_tangent_report<T: Real>(line: &TwistorLine<T>) -> Result<Vec<InfinityTangentReport>> {
    match line.epsilon() {
        1 => {
            let both =
                |f: &dyn Fn(ComplementChoice) -> Result<TangentHom<T>>| -> Result<(TangentHom<T>, TangentHom<T>)> {
                    Ok((f(ComplementChoice::Primary)?, f(ComplementChoice::Secondary)?))
                };
            let dir = both(&|c| circle_direction(line, c))?;
            let phi0 = both(&|c| tangent_at_infinity_hyperbolic(line, &T::zero(), c))?;
            let plane_dim = quotient_real_rank(&[dir.0.clone(), phi0.0.clone()])?;
            let boundary = dir.0.in_tangent_cone_lr()? && dir.0.scale(&-T::one()).in_tangent_cone_lr()?;
            let mut independent = dir.0.equal_mod_base(&dir.1) && phi0.0.equal_mod_base(&phi0.1);
            let mut stable = dir.0.in_tangent_cone_lr()? == dir.1.in_tangent_cone_lr()?;
            let mut hits = 0;
            let mut count = 0;
            for b in [0, 1, -1, 2] {
                let bt = T::from_i64(b);
                let pair = both(&|c| tangent_at_infinity_hyperbolic(line, &bt, c))?;
                independent &= pair.0.equal_mod_base(&pair.1);
                for sign in [1, -1] {
                    let s = T::from_i64(sign);
                    let (a, b2) = (pair.0.scale(&s), pair.1.scale(&s));
                    let verdict = a.in_tangent_cone_lr()?;
                    stable &= verdict == b2.in_tangent_cone_lr()?;
                    hits += usize::from(verdict);
                    count += 1;
                }
            }
            Ok(vec![InfinityTangentReport {
                base: "circle(1,0)".into(),
                plane_dim,
                boundary_in_cone: Some(boundary),
                interior_hits: hits,
                directions: count,
                complement_independent: independent,
                cone_verdict_stable: stable,
                verdict: plane_dim == 2 && boundary && hits == 0,
                singular_point: None,
            }])
        }
        0 => [Component::Plus, Component::Minus]
            .into_iter()
            .map(|which| {
                let phi = |z: Complex<T>, c| tangent_at_infinity_nilpotent(line, which, &z, c);
                let one = Complex::new(T::one(), T::zero());
                let (p1, p1b) = (
                    phi(one.clone(), ComplementChoice::Primary)?,
                    phi(one, ComplementChoice::Secondary)?,
                );
                let (pi, pib) = (
                    phi(i_unit(), ComplementChoice::Primary)?,
                    phi(i_unit(), ComplementChoice::Secondary)?,
                );
                let plane_dim = quotient_real_rank(&[p1.clone(), pi.clone()])?;
                let mut independent = p1.equal_mod_base(&p1b) && pi.equal_mod_base(&pib);
                let mut stable = true;
                let mut hits = 0;
                for (a, b) in interior_samples() {
                    let (a, b) = (T::from_i64(a), T::from_i64(b));
                    let h = p1.scale(&a).add(&pi.scale(&b))?;
                    let h2 = p1b.scale(&a).add(&pib.scale(&b))?;
                    independent &= h.equal_mod_base(&h2);
                    let verdict = h.in_tangent_cone_lr()?;
                    stable &= verdict == h2.in_tangent_cone_lr()?;
                    hits += usize::from(verdict);
                }
                let verdict = plane_dim == 2 && hits == 0;
                Ok(InfinityTangentReport {
                    base: format!("p{which}"),
                    plane_dim,
                    boundary_in_cone: None,
                    interior_hits: hits,
                    directions: interior_samples().len(),
                    complement_independent: independent,
                    cone_verdict_stable: stable,
                    verdict,
                    singular_point: Some(verdict),
                })
            })
            .collect(),
        e => Err(Error::WrongEpsilon {
            expected: "0 or 1",
            got: e,
        }),
    }
}
