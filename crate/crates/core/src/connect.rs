//! Stabilizers of complex structures under conjugation, transversality of the
//! stabilizers along a line, and chains of lines joining two complex structures.

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::{matrix_from_json, matrix_to_json};
use crate::linalg::{determinant, nullspace, rank};
use crate::line::{coords_from_json, line_from_json, line_to_json, Component, LinePoint, TwistorLine};
use crate::matrix::Matrix;
use crate::rep::{domain_tol, standard_rep, verify_rep, AlgebraRep};
use crate::rng::CountedRng;
use crate::scalar::{Real, DEFAULT_TOL};

/// Matrices commuting with a complex structure: the tangent space of its
/// stabilizer under conjugation.
#[derive(Clone, Debug)]
pub struct StabilizerTangent<T> {
    pub lambda: Matrix<T>,
    pub basis: Vec<Matrix<T>>,
}

impl<T> StabilizerTangent<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn elimination_tol<T: Real>(tol: f64) -> f64 {
    if T::EXACT {
        0.0
    } else {
        tol.max(DEFAULT_TOL)
    }
}

/// Stacked matrices of `X -> X op - op X`, acting on column-major `vec(X)`.
fn commutation_system<T: Real>(ops: &[&Matrix<T>]) -> Matrix<T> {
    let d = ops[0].rows();
    let dd = d * d;
    let mut m = Matrix::<T>::zeros(ops.len() * dd, dd);
    for (k, op) in ops.iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                let row = k * dd + b * d + a;
                for c in 0..d {
                    if !op[(c, b)].negligible(0.0) {
                        m[(row, c * d + a)] = m[(row, c * d + a)].add_ref(&op[(c, b)]);
                    }
                    if !op[(a, c)].negligible(0.0) {
                        m[(row, b * d + c)] = m[(row, b * d + c)].sub_ref(&op[(a, c)]);
                    }
                }
            }
        }
    }
    m
}

fn unvec<T: Real>(d: usize, v: &[T]) -> Matrix<T> {
    Matrix::from_fn(d, d, |r, c| v[c * d + r].clone())
}

/// Basis of the matrices commuting with every operator in `ops`.
pub fn commutant<T: Real>(ops: &[&Matrix<T>], tol: f64) -> Vec<Matrix<T>> {
    let d = ops[0].rows();
    nullspace(&commutation_system(ops), elimination_tol::<T>(tol))
        .into_iter()
        .map(|v| unvec(d, &v))
        .collect()
}

fn check_complex_structure<T: Real>(lambda: &Matrix<T>, tol: f64) -> Result<()> {
    if !lambda.is_square() {
        return Err(Error::NotComplexStructure);
    }
    let d = lambda.rows();
    let scale = lambda.max_abs().powi(2).max(1.0);
    if !(lambda * lambda).near(&Matrix::scalar(d, -T::one()), domain_tol::<T>(tol) * scale) {
        return Err(Error::NotComplexStructure);
    }
    Ok(())
}

pub fn stabilizer_tangent<T: Real>(lambda: &Matrix<T>, tol: f64) -> Result<StabilizerTangent<T>> {
    check_complex_structure(lambda, tol)?;
    Ok(StabilizerTangent {
        lambda: lambda.clone(),
        basis: commutant(&[lambda], tol),
    })
}

/// Matrices commuting with the whole algebra, i.e. with both generators.
pub fn algebra_centralizer_tangent<T: Real>(rep: &AlgebraRep<T>) -> Vec<Matrix<T>> {
    commutant(&[rep.i(), rep.b()], rep.tol())
}

/// Common stabilizer tangent of two complex structures.
pub fn stabilizer_intersection<T: Real>(l1: &Matrix<T>, l2: &Matrix<T>, tol: f64) -> Result<Vec<Matrix<T>>> {
    check_complex_structure(l1, tol)?;
    check_complex_structure(l2, tol)?;
    Ok(commutant(&[l1, l2], tol))
}

fn span_matrix<T: Real>(d: usize, mats: &[&Matrix<T>]) -> Matrix<T> {
    let cols: Vec<Vec<T>> = mats.iter().map(|m| m.vectorize()).collect();
    Matrix::from_cols(d * d, &cols)
}

/// Real span equality of two families of `d x d` matrices.
pub fn same_span<T: Real>(a: &[Matrix<T>], b: &[Matrix<T>], tol: f64) -> bool {
    let Some(d) = a.first().or(b.first()).map(Matrix::rows) else {
        return true;
    };
    let tol = elimination_tol::<T>(tol);
    let ra = if a.is_empty() {
        0
    } else {
        rank(&span_matrix(d, &a.iter().collect::<Vec<_>>()), tol)
    };
    let rb = if b.is_empty() {
        0
    } else {
        rank(&span_matrix(d, &b.iter().collect::<Vec<_>>()), tol)
    };
    if ra != rb {
        return false;
    }
    let all: Vec<&Matrix<T>> = a.iter().chain(b).collect();
    rank(&span_matrix(d, &all), tol) == ra
}

/// Dimension count for a sum of stabilizer tangents modulo the algebra
/// centralizer, which each of them contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transversality {
    pub stacked_rank: usize,
    pub centralizer_dim: usize,
    pub quotient_rank: usize,
    pub expected: usize,
    pub transversal: bool,
}

fn stacked_transversality<T: Real>(ops: &[&Matrix<T>], centralizer_dim: usize, tol: f64) -> Transversality {
    let d = ops[0].rows();
    let n = d / 4;
    let bases: Vec<Matrix<T>> = ops.iter().flat_map(|op| commutant(&[*op], tol)).collect();
    let stacked_rank = rank(
        &span_matrix(d, &bases.iter().collect::<Vec<_>>()),
        elimination_tol::<T>(tol),
    );
    let quotient_rank = stacked_rank.saturating_sub(centralizer_dim);
    let expected = 12 * n * n;
    Transversality {
        stacked_rank,
        centralizer_dim,
        quotient_rank,
        expected,
        transversal: quotient_rank == expected,
    }
}

fn require_unit_epsilon(epsilon: i32) -> Result<()> {
    if epsilon == 0 {
        return Err(Error::WrongEpsilon {
            expected: "{-1, 1}",
            got: epsilon,
        });
    }
    Ok(())
}

/// Whether the stabilizer tangents of `I`, `B` and `K` together span every
/// direction transverse to the algebra centralizer.
pub fn generator_transversality<T: Real>(rep: &AlgebraRep<T>) -> Result<Transversality> {
    require_unit_epsilon(rep.epsilon())?;
    let centralizer_dim = algebra_centralizer_tangent(rep).len();
    Ok(stacked_transversality(
        &[rep.i(), rep.b(), rep.k_mat()],
        centralizer_dim,
        rep.tol(),
    ))
}

#[derive(Clone, Debug)]
pub struct TripleTransversality<T> {
    pub report: Transversality,
    /// Determinant of the 3x3 matrix of point coordinates.
    pub determinant: T,
}

impl<T: Real> TripleTransversality<T> {
    pub fn transversal(&self) -> bool {
        self.report.transversal
    }

    pub fn determinant_nonzero(&self) -> bool {
        !self.determinant.negligible(DEFAULT_TOL)
    }

    pub fn agrees(&self) -> bool {
        self.transversal() == self.determinant_nonzero()
    }
}

pub fn coordinate_determinant<T: Real>(points: [&LinePoint<T>; 3]) -> T {
    let m = Matrix::from_fn(3, 3, |r, c| points[r].coords[c].clone());
    determinant(&m).expect("square")
}

/// Transversality of the stabilizer tangents of three points of one line,
/// alongside the coordinate determinant it should agree with.
pub fn triple_transversality<T: Real>(
    line: &TwistorLine<T>,
    p1: &LinePoint<T>,
    p2: &LinePoint<T>,
    p3: &LinePoint<T>,
) -> Result<TripleTransversality<T>> {
    require_unit_epsilon(line.epsilon())?;
    let pts: Vec<LinePoint<T>> = [p1, p2, p3]
        .iter()
        .map(|p| line.point(p.coords[0].clone(), p.coords[1].clone(), p.coords[2].clone()))
        .collect::<Result<_>>()?;
    let centralizer_dim = algebra_centralizer_tangent(line.rep()).len();
    let ops: Vec<&Matrix<T>> = pts.iter().map(|p| &p.matrix).collect();
    let report = stacked_transversality(&ops, centralizer_dim, line.rep().tol());
    Ok(TripleTransversality {
        report,
        determinant: coordinate_determinant([&pts[0], &pts[1], &pts[2]]),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Frobenius residual at which the solve stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest admissible Frobenius distance between the target and `I3`.
    pub radius: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            radius: 1.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub g1: Matrix<f64>,
    pub g2: Matrix<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

fn from_na(m: &DMatrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

fn float_inverse(m: &Matrix<f64>) -> Result<Matrix<f64>> {
    to_na(m).try_inverse().map(|x| from_na(&x)).ok_or(Error::Singular)
}

/// `g x g^{-1}` in floating point.
pub fn conjugate_by(g: &Matrix<f64>, x: &Matrix<f64>) -> Result<Matrix<f64>> {
    Ok(&(g * x) * &float_inverse(g)?)
}

fn expm(m: &Matrix<f64>) -> Matrix<f64> {
    from_na(&to_na(m).exp())
}

/// `g1 g2 I3 g2^{-1} g1^{-1}`
fn chain_map(g1: &Matrix<f64>, g2: &Matrix<f64>, i3: &Matrix<f64>) -> Result<Matrix<f64>> {
    conjugate_by(&(g1 * g2), i3)
}

fn combine(coeffs: &[f64], basis: &[Matrix<f64>], d: usize) -> Matrix<f64> {
    basis
        .iter()
        .zip(coeffs)
        .fold(Matrix::zeros(d, d), |acc, (b, &x)| &acc + &b.scale(&x))
}

/// Finds `g1` commuting with `I1` and `g2` commuting with `I2` such that
/// `g1 g2 I3 g2^{-1} g1^{-1}` hits `target`, by damped Gauss-Newton on the
/// exponential coordinates of the two stabilizers.
pub fn local_connect(
    i1: &Matrix<f64>,
    i2: &Matrix<f64>,
    i3: &Matrix<f64>,
    target: &Matrix<f64>,
    opts: &NewtonOptions,
) -> Result<LocalSolution> {
    let d = i3.rows();
    for m in [i1, i2, i3, target] {
        if !m.is_square() || m.rows() != d {
            return Err(Error::DimensionMismatch("local_connect inputs differ in size".into()));
        }
        check_complex_structure(m, DEFAULT_TOL)?;
    }
    let distance = (target - i3).frobenius();
    if distance > opts.radius {
        return Err(Error::OutOfReach {
            distance,
            radius: opts.radius,
        });
    }
    let id = Matrix::<f64>::identity(d);
    if distance <= opts.tol {
        return Ok(LocalSolution {
            g1: id.clone(),
            g2: id,
            iterations: 0,
            residual: distance,
        });
    }
    let bx = commutant(&[i1], DEFAULT_TOL);
    let by = commutant(&[i2], DEFAULT_TOL);
    let (mut g1, mut g2) = (id.clone(), id);
    let mut residual = distance;
    for iter in 1..=opts.max_iter {
        let g1i = float_inverse(&g1)?;
        let g2i = float_inverse(&g2)?;
        let moved = &(&g2 * i3) * &g2i;
        let current = &(&g1 * &moved) * &g1i;
        // pulled back to the frame of g1, the differential is
        // (X, Y) -> [X, g2 I3 g2^{-1}] + g2 [Y, I3] g2^{-1}
        let rhs = &(&g1i * &(target - &current)) * &g1;
        let mut cols: Vec<Vec<f64>> = bx.iter().map(|x| x.commutator(&moved).vectorize()).collect();
        cols.extend(by.iter().map(|y| (&(&g2 * &y.commutator(i3)) * &g2i).vectorize()));
        let jac = to_na(&Matrix::from_cols(d * d, &cols));
        let svd = jac.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let rhs_na = nalgebra::DVector::from_vec(rhs.vectorize());
        let step = svd.solve(&rhs_na, cutoff).map_err(|_| Error::NotConverged {
            iterations: iter,
            residual,
        })?;
        let x = combine(&step.as_slice()[..bx.len()], &bx, d);
        let y = combine(&step.as_slice()[bx.len()..], &by, d);
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let c1 = &g1 * &expm(&x.scale(&alpha));
            let c2 = &g2 * &expm(&y.scale(&alpha));
            let r = (target - &chain_map(&c1, &c2, i3)?).frobenius();
            if r < residual {
                accepted = Some((c1, c2, r));
                break;
            }
            alpha /= 2.0;
        }
        let Some((c1, c2, r)) = accepted else {
            return Err(Error::NotConverged {
                iterations: iter,
                residual,
            });
        };
        g1 = c1;
        g2 = c2;
        residual = r;
        if residual < opts.tol {
            return Ok(LocalSolution {
                g1,
                g2,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

/// Nearest complex structure along the matrix sign iteration `X -> (X - X^{-1})/2`,
/// which fixes exactly the operators squaring to `-Id`.
pub fn project_to_complex_structure(m: &Matrix<f64>, tol: f64) -> Result<Matrix<f64>> {
    let d = m.rows();
    let minus_id = Matrix::<f64>::scalar(d, -1.0);
    let mut x = m.clone();
    for iter in 0..100 {
        let defect = (&(&x * &x) - &minus_id).frobenius();
        if defect <= tol {
            return Ok(x);
        }
        let xi = float_inverse(&x).map_err(|_| Error::NotConverged {
            iterations: iter,
            residual: defect,
        })?;
        x = (&x - &xi).scale(&0.5);
        if !x.max_abs().is_finite() {
            return Err(Error::NotConverged {
                iterations: iter,
                residual: f64::INFINITY,
            });
        }
    }
    let defect = (&(&x * &x) - &minus_id).frobenius();
    Err(Error::NotConverged {
        iterations: 100,
        residual: defect,
    })
}

#[derive(Clone, Debug)]
pub struct ChainSegment {
    pub line: TwistorLine<f64>,
    pub from: LinePoint<f64>,
    pub to: LinePoint<f64>,
    /// Common component of both endpoints; `None` on compact lines.
    pub component: Option<Component>,
}

#[derive(Clone, Debug)]
pub struct TwistorPath {
    pub epsilon: i32,
    pub segments: Vec<ChainSegment>,
    /// Newton iterations of each local solve, one per three-line chain.
    pub newton_iterations: Vec<usize>,
}

impl TwistorPath {
    pub fn junction_residuals(&self) -> Vec<f64> {
        self.segments
            .windows(2)
            .map(|w| (&w[0].to.matrix - &w[1].from.matrix).frobenius())
            .collect()
    }

    pub fn start(&self) -> Option<&Matrix<f64>> {
        self.segments.first().map(|s| &s.from.matrix)
    }

    pub fn end(&self) -> Option<&Matrix<f64>> {
        self.segments.last().map(|s| &s.to.matrix)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConnectOptions {
    /// Initial interpolation step as a fraction of the way from `A` to `B`.
    pub step: f64,
    /// Below this step the interpolation gives up.
    pub min_step: f64,
    /// Candidate points per line among which the two auxiliary points are chosen.
    pub candidates: usize,
    pub newton: NewtonOptions,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            step: 1.0,
            min_step: 1e-6,
            candidates: 16,
            newton: NewtonOptions::default(),
        }
    }
}

const LINE_TOL: f64 = 1e-8;

/// A line of type `epsilon` through `current`, with `current` at `(1, 0, 0)`:
/// the standard algebra moved by a random frame adapted to `current`.
fn random_line_through(current: &Matrix<f64>, epsilon: i32, rng: &mut CountedRng) -> Result<TwistorLine<f64>> {
    let d = current.rows();
    let half = d / 2;
    let std = standard_rep::<f64>(epsilon, d / 4, None)?;
    // the standard I maps e_j to e_{j + half}, so [v | current v] carries it to current
    for _ in 0..32 {
        let v = Matrix::from_fn(d, half, |_, _| rng.uniform(-1.0, 1.0));
        let frame = v.hstack(&(current * &v))?;
        let det = determinant(&frame)?;
        if det.abs() < 1e-3 {
            continue;
        }
        let partner = conjugate_by(&frame, std.b())?;
        if let Ok(rep) = AlgebraRep::new(current.clone(), partner, epsilon, LINE_TOL) {
            return Ok(TwistorLine::new(rep));
        }
    }
    Err(Error::NotConverged {
        iterations: 32,
        residual: f64::NAN,
    })
}

/// The pair of auxiliary points maximizing the coordinate determinant with
/// `(1, 0, 0)`, after scaling coordinates to unit length so that far-out
/// points (large matrices, poor conditioning) are not favoured.
fn auxiliary_points(line: &TwistorLine<f64>, candidates: usize) -> (LinePoint<f64>, LinePoint<f64>) {
    let comp = (line.epsilon() == 1).then_some(Component::Plus);
    let pts = line.sample_points(candidates, comp);
    let norm = |p: &[f64; 3]| p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut best = (0.0, 0, 1);
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let (p, q) = (&pts[a].coords, &pts[b].coords);
            let det = (p[1] * q[2] - p[2] * q[1]).abs() / (norm(p) * norm(q));
            if det > best.0 {
                best = (det, a, b);
            }
        }
    }
    (pts[best.1].clone(), pts[best.2].clone())
}

fn segment(line: TwistorLine<f64>, from: [f64; 3], to: [f64; 3]) -> Result<ChainSegment> {
    let from = line.point(from[0], from[1], from[2])?;
    let to = line.point(to[0], to[1], to[2])?;
    let component = if line.epsilon() == -1 {
        None
    } else {
        Some(line.component_of(&from.coords)?)
    };
    Ok(ChainSegment {
        line,
        from,
        to,
        component,
    })
}

/// Three lines `S`, `g1 S`, `g1 g2 S` from `current` to (within the Newton
/// tolerance of) `target`.
fn chain_step(
    current: &Matrix<f64>,
    target: &Matrix<f64>,
    epsilon: i32,
    opts: &ConnectOptions,
    rng: &mut CountedRng,
) -> Result<(Vec<ChainSegment>, usize)> {
    let line = random_line_through(current, epsilon, rng)?;
    let (p1, p2) = auxiliary_points(&line, opts.candidates);
    let sol = local_connect(&p1.matrix, &p2.matrix, current, target, &opts.newton)?;
    let g12 = &sol.g1 * &sol.g2;
    let base = [1.0, 0.0, 0.0];
    let mut first = segment(line.clone(), base, p1.coords)?;
    // the starting point is `current` itself, not its reconstruction from coordinates
    first.from.matrix = current.clone();
    let second = segment(TwistorLine::new(line.rep().conjugate(&sol.g1)?), p1.coords, p2.coords)?;
    let third = segment(TwistorLine::new(line.rep().conjugate(&g12)?), p2.coords, base)?;
    Ok((vec![first, second, third], sol.iterations))
}

/// Joins two complex structures of one component by a chain of lines of type
/// `epsilon`, following the straight segment from `a` to `b` projected back
/// to the complex structures and subdividing it where Newton fails.
pub fn connect(
    a: &Matrix<f64>,
    b: &Matrix<f64>,
    epsilon: i32,
    opts: &ConnectOptions,
    rng: &mut CountedRng,
) -> Result<TwistorPath> {
    require_unit_epsilon(epsilon)?;
    if epsilon.abs() != 1 {
        return Err(Error::BadEpsilon(epsilon));
    }
    let d = a.rows();
    if !a.is_square() || b.rows() != d || !b.is_square() || d == 0 || !d.is_multiple_of(4) {
        return Err(Error::DimensionMismatch("endpoints must be square of size 4n".into()));
    }
    check_complex_structure(a, LINE_TOL)?;
    check_complex_structure(b, LINE_TOL)?;
    let mut path = TwistorPath {
        epsilon,
        segments: Vec::new(),
        newton_iterations: Vec::new(),
    };
    if (a - b).frobenius() <= opts.newton.tol {
        return Ok(path);
    }
    let mut current = a.clone();
    let (mut s, mut h) = (0.0_f64, opts.step.min(1.0));
    while s < 1.0 {
        if h < opts.min_step {
            return Err(Error::StepTooLarge(h));
        }
        let next = (s + h).min(1.0);
        let blend = &a.scale(&(1.0 - next)) + &b.scale(&next);
        let attempt = project_to_complex_structure(&blend, 1e-13 * blend.max_abs().powi(2).max(1.0))
            .and_then(|target| chain_step(&current, &target, epsilon, opts, rng));
        match attempt {
            Ok((segs, iters)) => {
                current = segs[2].to.matrix.clone();
                path.segments.extend(segs);
                path.newton_iterations.push(iters);
                s = next;
                h = (2.0 * h).min(opts.step.min(1.0));
            }
            Err(Error::NotConverged { .. } | Error::OutOfReach { .. } | Error::Singular) => h /= 2.0,
            Err(e) => return Err(e),
        }
    }
    Ok(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentCheck {
    pub line_valid: bool,
    pub from_on_line: bool,
    pub to_on_line: bool,
    /// Both endpoints on one component; `None` on compact lines.
    pub same_component: Option<bool>,
}

impl SegmentCheck {
    pub fn ok(&self) -> bool {
        self.line_valid && self.from_on_line && self.to_on_line && self.same_component != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathReport {
    pub segments: Vec<SegmentCheck>,
    pub junction_residuals: Vec<f64>,
    pub junctions_ok: bool,
    pub pass: bool,
}

pub fn validate_path(path: &TwistorPath, tol: f64) -> PathReport {
    let segments: Vec<SegmentCheck> = path
        .segments
        .iter()
        .map(|seg| {
            let rep = seg.line.rep();
            let line_valid =
                seg.line.epsilon() == path.epsilon && verify_rep(rep.i(), rep.b(), rep.epsilon(), tol).ok();
            let locate = |p: &LinePoint<f64>| seg.line.contains(&p.matrix).ok().flatten();
            let (from, to) = (locate(&seg.from), locate(&seg.to));
            let same_component = (seg.line.epsilon() != -1).then(|| match (&from, &to) {
                (Some(f), Some(t)) => matches!(
                    (seg.line.component_of(f), seg.line.component_of(t)),
                    (Ok(x), Ok(y)) if x == y && seg.component.is_none_or(|c| c == x)
                ),
                _ => false,
            });
            SegmentCheck {
                line_valid,
                from_on_line: from.is_some(),
                to_on_line: to.is_some(),
                same_component,
            }
        })
        .collect();
    let junction_residuals = path.junction_residuals();
    let junctions_ok = junction_residuals.iter().all(|&r| r < tol);
    let pass = junctions_ok && segments.iter().all(SegmentCheck::ok);
    PathReport {
        segments,
        junction_residuals,
        junctions_ok,
        pass,
    }
}

fn point_json(p: &LinePoint<f64>) -> Value {
    json!({"coords": p.coords.to_vec(), "matrix": matrix_to_json(&p.matrix)})
}

pub fn path_to_json(path: &TwistorPath) -> Value {
    let segments: Vec<Value> = path
        .segments
        .iter()
        .map(|s| {
            json!({
                "line": line_to_json(&s.line),
                "from": point_json(&s.from),
                "to": point_json(&s.to),
                "component": s.component.map(|c| c.to_string()),
            })
        })
        .collect();
    json!({
        "epsilon": path.epsilon,
        "segments": segments,
        "junction_residuals": path.junction_residuals(),
        "newton_iterations": path.newton_iterations,
    })
}

fn point_from_json(v: &Value) -> Result<LinePoint<f64>> {
    let coords = coords_from_json::<f64>(v)?;
    let m = v
        .get("matrix")
        .ok_or_else(|| Error::Malformed("point lacks \"matrix\"".into()))?;
    Ok(LinePoint {
        coords,
        matrix: matrix_from_json(m)?,
    })
}

pub fn path_from_json(v: &Value) -> Result<TwistorPath> {
    let field = |name: &str| {
        v.get(name)
            .ok_or_else(|| Error::Malformed(format!("path lacks {name:?}")))
    };
    let epsilon = field("epsilon")?
        .as_i64()
        .ok_or_else(|| Error::Malformed("epsilon must be an integer".into()))? as i32;
    let segments = field("segments")?
        .as_array()
        .ok_or_else(|| Error::Malformed("segments must be an array".into()))?
        .iter()
        .map(|s| {
            let get = |name: &str| {
                s.get(name)
                    .ok_or_else(|| Error::Malformed(format!("segment lacks {name:?}")))
            };
            let component = match get("component")? {
                Value::Null => None,
                Value::String(c) => Some(c.parse()?),
                other => return Err(Error::Malformed(format!("bad component {other}"))),
            };
            Ok(ChainSegment {
                line: line_from_json(get("line")?, LINE_TOL)?,
                from: point_from_json(get("from")?)?,
                to: point_from_json(get("to")?)?,
                component,
            })
        })
        .collect::<Result<_>>()?;
    let newton_iterations = v
        .get("newton_iterations")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(Value::as_u64).map(|x| x as usize).collect())
        .unwrap_or_default();
    Ok(TwistorPath {
        epsilon,
        segments,
        newton_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::standard_rep;
    use crate::scalar::{q, Rational, Scalar};
    use proptest::prelude::*;

    fn std_rep(eps: i32, n: usize) -> AlgebraRep<Rational> {
        standard_rep(eps, n, None).unwrap()
    }

    fn float_rep(eps: i32, n: usize) -> AlgebraRep<f64> {
        standard_rep(eps, n, None).unwrap()
    }

    #[test]
    fn stabilizer_dimension_is_eight_n_squared() {
        for n in 1..=2 {
            let rep = std_rep(-1, n);
            let st = stabilizer_tangent(rep.i(), 0.0).unwrap();
            assert_eq!(st.dim(), 8 * n * n);
            for x in &st.basis {
                assert!(x.commutator(rep.i()).is_zero(0.0));
            }
        }
    }

    #[test]
    fn stabilizer_rejects_non_complex_structure() {
        let rep = std_rep(1, 1);
        assert_eq!(
            stabilizer_tangent(rep.b(), 0.0).unwrap_err(),
            Error::NotComplexStructure
        );
    }

    #[test]
    fn commutation_system_matches_products() {
        let rep = std_rep(-1, 1);
        let x = Matrix::from_fn(4, 4, |r, c| Rational::from_i64((3 * r + 5 * c) as i64 % 7 - 3));
        let sys = commutation_system(&[rep.b()]);
        let got = unvec(4, &sys.apply(&x.vectorize()));
        assert_eq!(got, x.commutator(rep.b()));
    }

    #[test]
    fn centralizer_is_pairwise_intersection() {
        for (eps, n) in [(-1, 1), (1, 1), (-1, 2), (1, 2)] {
            let rep = std_rep(eps, n);
            let cent = algebra_centralizer_tangent(&rep);
            assert_eq!(cent.len(), 4 * n * n);
            let line = TwistorLine::new(rep);
            let pts = line.sample_points(2, if eps == 1 { Some(Component::Plus) } else { None });
            let inter = stabilizer_intersection(&pts[0].matrix, &pts[1].matrix, 0.0).unwrap();
            assert!(same_span(&inter, &cent, 0.0));
        }
    }

    #[test]
    fn same_span_detects_difference() {
        let rep = std_rep(-1, 1);
        let cent = algebra_centralizer_tangent(&rep);
        let stab = stabilizer_tangent(rep.i(), 0.0).unwrap().basis;
        assert!(!same_span(&cent, &stab, 0.0));
        assert!(same_span(&stab, &stab.iter().rev().cloned().collect::<Vec<_>>(), 0.0));
    }

    #[test]
    fn generators_are_transversal() {
        for (eps, n) in [(-1, 1), (1, 1), (1, 2)] {
            let t = generator_transversality(&std_rep(eps, n)).unwrap();
            assert!(t.transversal, "{t:?}");
            assert_eq!(t.quotient_rank, 12 * n * n);
            assert_eq!(t.stacked_rank, 16 * n * n);
        }
        let nil = standard_rep::<Rational>(0, 1, Some(1)).unwrap();
        assert!(matches!(
            generator_transversality(&nil),
            Err(Error::WrongEpsilon { .. })
        ));
    }

    #[test]
    fn rational_sphere_triple() {
        let line = TwistorLine::new(std_rep(-1, 1));
        let p = |x, y, z| line.point(x, y, z).unwrap();
        let t = triple_transversality(
            &line,
            &p(q(1, 1), q(0, 1), q(0, 1)),
            &p(q(0, 1), q(1, 1), q(0, 1)),
            &p(q(3, 5), q(4, 5), q(0, 1)),
        )
        .unwrap();
        // coplanar in the xy-plane, so the coordinate determinant vanishes
        assert_eq!(t.determinant, q(0, 1));
        assert!(t.agrees());
        let u = triple_transversality(
            &line,
            &p(q(1, 1), q(0, 1), q(0, 1)),
            &p(q(-1, 1), q(0, 1), q(0, 1)),
            &p(q(0, 1), q(1, 1), q(0, 1)),
        )
        .unwrap();
        assert!(!u.transversal());
        assert!(u.agrees());
        let w = triple_transversality(
            &line,
            &p(q(1, 1), q(0, 1), q(0, 1)),
            &p(q(0, 1), q(1, 1), q(0, 1)),
            &p(q(0, 1), q(0, 1), q(1, 1)),
        )
        .unwrap();
        assert!(w.transversal());
        assert!(w.agrees());
    }

    #[test]
    fn hyperboloid_triple() {
        let line = TwistorLine::new(std_rep(1, 1));
        let p = |x, y, z| line.point(x, y, z).unwrap();
        let t = triple_transversality(
            &line,
            &p(q(5, 4), q(3, 4), q(0, 1)),
            &p(q(5, 4), q(-3, 4), q(0, 1)),
            &p(q(5, 4), q(0, 1), q(3, 4)),
        )
        .unwrap();
        assert!(t.determinant_nonzero());
        assert!(t.transversal());
    }

    #[test]
    fn newton_trivial_target() {
        let line = TwistorLine::new(float_rep(1, 1));
        let pts = line.sample_points(2, Some(Component::Plus));
        let i3 = line.rep().i().clone();
        let sol = local_connect(&pts[0].matrix, &pts[1].matrix, &i3, &i3, &NewtonOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.g1.near(&Matrix::identity(4), 0.0));
    }

    fn best_pair(line: &TwistorLine<f64>) -> (LinePoint<f64>, LinePoint<f64>) {
        auxiliary_points(line, 16)
    }

    #[test]
    fn newton_recovers_first_stabilizer_motion() {
        let line = TwistorLine::new(float_rep(-1, 1));
        let (p1, p2) = best_pair(&line);
        let i3 = line.rep().i().clone();
        let basis = commutant(&[&p1.matrix], DEFAULT_TOL);
        let x0 = combine(&[0.05, -0.03, 0.02, 0.04, 0.01, -0.02, 0.03, 0.01], &basis, 4);
        let target = conjugate_by(&expm(&x0), &i3).unwrap();
        let sol = local_connect(&p1.matrix, &p2.matrix, &i3, &target, &NewtonOptions::default()).unwrap();
        assert!(sol.residual < 1e-10);
        assert!((&chain_map(&sol.g1, &sol.g2, &i3).unwrap() - &target).frobenius() < 1e-10);
        assert!(sol.g1.commutator(&p1.matrix).max_abs() < 1e-12);
        assert!(sol.g2.commutator(&p2.matrix).max_abs() < 1e-12);
    }

    #[test]
    fn newton_random_nearby_target() {
        let mut rng = CountedRng::new(11);
        for eps in [-1, 1] {
            let line = TwistorLine::new(float_rep(eps, 1));
            let (p1, p2) = best_pair(&line);
            let i3 = line.rep().i().clone();
            let dir = Matrix::from_fn(4, 4, |_, _| rng.uniform(-1.0, 1.0));
            let dir = dir.scale(&(0.1 / dir.frobenius()));
            let target = project_to_complex_structure(&(&i3 + &dir), 1e-14).unwrap();
            let sol = local_connect(&p1.matrix, &p2.matrix, &i3, &target, &NewtonOptions::default()).unwrap();
            assert!(sol.iterations <= 20, "{} iterations", sol.iterations);
            assert!(sol.residual < 1e-10);
        }
    }

    #[test]
    fn newton_rejects_far_targets() {
        let line = TwistorLine::new(float_rep(-1, 1));
        let (p1, p2) = best_pair(&line);
        let i3 = line.rep().i().clone();
        let far = -&i3;
        assert!(matches!(
            local_connect(&p1.matrix, &p2.matrix, &i3, &far, &NewtonOptions::default()),
            Err(Error::OutOfReach { .. })
        ));
    }

    #[test]
    fn projection_fixes_complex_structures() {
        let rep = float_rep(-1, 1);
        let p = project_to_complex_structure(rep.i(), 1e-14).unwrap();
        assert!(p.near(rep.i(), 0.0));
        let bumped = rep.i() + &Matrix::from_fn(4, 4, |r, c| if r == c { 0.01 } else { 0.0 });
        let p = project_to_complex_structure(&bumped, 1e-13).unwrap();
        assert!((&(&p * &p) + &Matrix::identity(4)).frobenius() < 1e-12);
    }

    fn conjugated_pair(rng: &mut CountedRng) -> (Matrix<f64>, Matrix<f64>) {
        let a = float_rep(-1, 1).i().clone();
        let g = rng.near_identity(4, 4).to_f64();
        let b = conjugate_by(&g, &a).unwrap();
        (a, b)
    }

    #[test]
    fn connect_equal_endpoints_is_empty() {
        let a = float_rep(1, 1).i().clone();
        let mut rng = CountedRng::new(1);
        let path = connect(&a, &a, 1, &ConnectOptions::default(), &mut rng).unwrap();
        assert!(path.segments.is_empty());
        assert!(validate_path(&path, 1e-8).pass);
    }

    #[test]
    fn connect_conjugate_pair() {
        let mut rng = CountedRng::new(5);
        for eps in [1, -1] {
            let (a, b) = conjugated_pair(&mut rng);
            let path = connect(&a, &b, eps, &ConnectOptions::default(), &mut rng).unwrap();
            assert_eq!(path.segments.len() % 3, 0);
            assert!(!path.segments.is_empty());
            let report = validate_path(&path, 1e-8);
            assert!(report.pass, "{report:?}");
            assert!(path.start().unwrap().near(&a, 0.0));
            assert!((path.end().unwrap() - &b).frobenius() < 1e-8);
            assert!(path.newton_iterations.iter().all(|&k| k <= 50));
        }
    }

    #[test]
    fn connect_rejects_nilpotent_type() {
        let a = float_rep(1, 1).i().clone();
        let mut rng = CountedRng::new(1);
        assert!(matches!(
            connect(&a, &a, 0, &ConnectOptions::default(), &mut rng),
            Err(Error::WrongEpsilon { .. })
        ));
    }

    #[test]
    fn perturbed_junction_fails() {
        let mut rng = CountedRng::new(9);
        let (a, b) = conjugated_pair(&mut rng);
        let mut path = connect(&a, &b, 1, &ConnectOptions::default(), &mut rng).unwrap();
        // move the whole second segment by a conjugation of size 1e-3, so its
        // endpoints stay on its own line while the junctions break
        let g = &Matrix::identity(4) + &Matrix::from_fn(4, 4, |r, c| if (r, c) == (0, 1) { 1e-3 } else { 0.0 });
        let seg = &mut path.segments[1];
        seg.line = TwistorLine::new(seg.line.rep().conjugate(&g).unwrap());
        seg.from.matrix = conjugate_by(&g, &seg.from.matrix).unwrap();
        seg.to.matrix = conjugate_by(&g, &seg.to.matrix).unwrap();
        let report = validate_path(&path, 1e-8);
        assert!(!report.junctions_ok);
        assert!(report.segments[1].ok());
        assert!(!report.pass);
    }

    #[test]
    fn split_sheets_fail_component_check() {
        let line = TwistorLine::new(float_rep(1, 1));
        let seg = ChainSegment {
            from: line.point(1.0, 0.0, 0.0).unwrap(),
            to: line.point(-1.0, 0.0, 0.0).unwrap(),
            line,
            component: Some(Component::Plus),
        };
        let path = TwistorPath {
            epsilon: 1,
            segments: vec![seg],
            newton_iterations: vec![],
        };
        let report = validate_path(&path, 1e-8);
        assert_eq!(report.segments[0].same_component, Some(false));
        assert!(!report.pass);
    }

    #[test]
    fn path_json_round_trip() {
        let mut rng = CountedRng::new(3);
        let (a, b) = conjugated_pair(&mut rng);
        let path = connect(&a, &b, 1, &ConnectOptions::default(), &mut rng).unwrap();
        let v = path_to_json(&path);
        assert_eq!(v["segments"][0]["component"], "+");
        let back = path_from_json(&v).unwrap();
        assert_eq!(back.segments.len(), path.segments.len());
        assert!(validate_path(&back, 1e-8).pass);
        assert_eq!(path_to_json(&back), v);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn triple_test_matches_determinant(
            eps in prop::sample::select(vec![-1, 1]),
            params in prop::collection::vec((-6i64..=6, 1i64..=6), 6),
        ) {
            let line = TwistorLine::new(std_rep(eps, 1));
            let pts: Vec<LinePoint<Rational>> = line.sample_points(12, None);
            let pick = |k: usize| &pts[((params[k].0 + 6) as usize * 7 + params[k].1 as usize) % pts.len()];
            let t = triple_transversality(&line, pick(0), pick(1), pick(2)).unwrap();
            prop_assert!(t.agrees(), "{:?}", t);
        }

        #[test]
        fn stabilizer_of_conjugated_point_has_full_dimension(seed in 0u64..1000) {
            let mut rng = CountedRng::new(seed);
            let g = rng.invertible(4);
            let rep = std_rep(-1, 1).conjugate(&g).unwrap();
            let line = TwistorLine::new(rep);
            let p = &line.sample_points(3, None)[2];
            let st = stabilizer_tangent(&p.matrix, 0.0).unwrap();
            prop_assert_eq!(st.dim(), 8);
        }
    }
}
