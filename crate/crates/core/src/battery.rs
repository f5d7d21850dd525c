//! The verification battery: every checkable number about lines, Hodge
//! spaces, limits at infinity, stabilizers and chains, as a report of
//! expected versus computed values.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::connect::{
    algebra_centralizer_tangent, conjugate_by, connect, generator_transversality, same_span, stabilizer_intersection,
    stabilizer_tangent, triple_transversality, validate_path, ConnectOptions,
};
use crate::error::{Error, Result};
use crate::grassmann::{
    embed, exact_limit_hyperbolic, exact_limit_nilpotent, in_lr, infinity_circle_point, infinity_point,
    infinity_tangent_report, limit_convergence, tangent_at_infinity_nilpotent, ComplementChoice, RaySpec,
};
use crate::json::JsonScalar;
use crate::linalg::inverse;
use crate::line::{Component, LinePoint, TwistorLine};
use crate::matrix::{CMatrix, Matrix};
use crate::period::{
    cone_witness, dual_period, hdg_dim_formula, hdg_space, hermitian_form, is_kahler_at, kahler_certificate,
    normalized_period, HdgMode, KahlerCertificate, NoKahlerReason,
};
use crate::rep::{adapted_nilpotent_basis, classify_nilpotent_rep, standard_rep, AlgebraRep};
use crate::rng::CountedRng;
use crate::scalar::{q, Complex, Rational, Real};

pub const MAX_N: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub expected: Value,
    pub computed: Value,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatteryReport {
    pub seed: u64,
    pub n_max: usize,
    pub scalar: &'static str,
    pub k_grid: Option<Vec<usize>>,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

#[derive(Clone, Debug)]
pub struct BatteryConfig {
    pub n_max: usize,
    /// Nilpotent ranks to test; all of `1..=n` when `None`.
    pub k_grid: Option<Vec<usize>>,
    pub seed: u64,
    /// Sampled points per line for the Kähler and period checks (at least 5).
    pub samples: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            n_max: 2,
            k_grid: None,
            seed: 0,
            samples: 8,
        }
    }
}

impl BatteryConfig {
    fn ks(&self, n: usize) -> Vec<usize> {
        match &self.k_grid {
            Some(ks) => ks.iter().copied().filter(|&k| (1..=n).contains(&k)).collect(),
            None => (1..=n).collect(),
        }
    }

    fn samples(&self) -> usize {
        self.samples.max(5)
    }
}

fn check(id: impl Into<String>, description: impl Into<String>, expected: Value, computed: Value, pass: bool) -> Check {
    Check {
        id: id.into(),
        description: description.into(),
        expected,
        computed,
        pass,
    }
}

fn failed(id: impl Into<String>, description: impl Into<String>, expected: Value, err: &Error) -> Check {
    check(id, description, expected, json!({"error": err.to_string()}), false)
}

/// Runs a fallible check body, turning errors into failed entries.
fn guarded(id: String, description: &str, expected: Value, body: impl FnOnce() -> Result<(Value, bool)>) -> Check {
    match body() {
        Ok((computed, pass)) => check(id, description, expected, computed, pass),
        Err(e) => failed(id, description, expected, &e),
    }
}

fn std_line<T: Real>(epsilon: i32, n: usize, k: Option<usize>) -> Result<TwistorLine<T>> {
    Ok(TwistorLine::new(standard_rep(epsilon, n, k)?))
}

fn tag(epsilon: i32, n: usize, k: Option<usize>) -> String {
    match k {
        Some(k) => format!("eps={epsilon}/n={n}/k={k}"),
        None => format!("eps={epsilon}/n={n}"),
    }
}

/// Every `(epsilon, n, k)` of the configuration.
fn line_types(cfg: &BatteryConfig, epsilons: &[i32]) -> Vec<(i32, usize, Option<usize>)> {
    let mut out = Vec::new();
    for n in 1..=cfg.n_max {
        for &e in epsilons {
            if e == 0 {
                out.extend(cfg.ks(n).into_iter().map(|k| (0, n, Some(k))));
            } else {
                out.push((e, n, None));
            }
        }
    }
    out
}

fn near<T: crate::scalar::Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> bool {
    a.near(b, 1e-9)
}

fn hdg_checks<T: Real>(cfg: &BatteryConfig) -> Vec<Check> {
    line_types(cfg, &[-1, 0, 1])
        .into_iter()
        .map(|(e, n, k)| {
            let formula = hdg_dim_formula(e, n, k).unwrap_or(0);
            guarded(
                format!("c1/hdg/{}", tag(e, n, k)),
                "dimension of Hdg equals the closed formula",
                json!(formula),
                || {
                    let dim = hdg_space(&std_line::<T>(e, n, k)?, HdgMode::ClosedForm)?.dim();
                    Ok((json!(dim), dim == formula))
                },
            )
        })
        .collect()
}

/// `H = ((a + c) / 2) Id` at `(a, b, c)` for the standard hyperbolic witness.
fn hyperbolic_form_matches<T: Real>(h: &CMatrix<T>, p: &LinePoint<T>) -> bool {
    let val = (p.coords[0].clone() + p.coords[2].clone()) / T::from_i64(2);
    near(h, &CMatrix::scalar(h.rows(), Complex::new(val, T::zero())))
}

fn kahler_checks<T: Real>(cfg: &BatteryConfig) -> Vec<Check> {
    let m = cfg.samples();
    let mut out = Vec::new();
    for (e, n, k) in line_types(cfg, &[-1, 0, 1]) {
        let id = format!("c2/kahler/{}", tag(e, n, k));
        let entry = match e {
            1 => guarded(
                id,
                "witness is Kähler on every upper-sheet sample with H = ((a+c)/2) Id and on no lower-sheet sample",
                json!({"upper": m, "lower": 0, "closed_form": m}),
                || {
                    let line = std_line::<T>(e, n, k)?;
                    let w = cone_witness(&line, Component::Plus)?;
                    let tol = line.rep().tol();
                    let (mut upper, mut closed, mut lower) = (0, 0, 0);
                    for p in line.sample_points(m, Some(Component::Plus)) {
                        upper += usize::from(is_kahler_at(&w, &p.matrix, tol)?);
                        closed += usize::from(hyperbolic_form_matches(&hermitian_form(&w, &p.matrix, tol)?, &p));
                    }
                    for p in line.sample_points(m, Some(Component::Minus)) {
                        lower += usize::from(is_kahler_at(&w, &p.matrix, tol)?);
                    }
                    let pass = upper == m && closed == m && lower == 0;
                    Ok((json!({"upper": upper, "lower": lower, "closed_form": closed}), pass))
                },
            ),
            _ => {
                let (reason, what) = if e == -1 {
                    (
                        NoKahlerReason::Antipodal,
                        "antipodal identity H(-l) = -conj H(l) over the full Hdg basis",
                    )
                } else {
                    (
                        NoKahlerReason::IsotropicImage,
                        "H vanishes on the image of N for the full Hdg basis",
                    )
                };
                let formula = hdg_dim_formula(e, n, k).unwrap_or(0);
                guarded(
                    id,
                    what,
                    json!({"verified": true, "reason": reason, "forms": formula, "points": m}),
                    || match kahler_certificate(&std_line::<T>(e, n, k)?, None, m)? {
                        KahlerCertificate::None {
                            reason: r,
                            forms_checked,
                            points_checked,
                            verified,
                        } => Ok((
                            json!({"verified": verified, "reason": r, "forms": forms_checked, "points": points_checked}),
                            verified && r == reason && forms_checked == formula && points_checked == m,
                        )),
                        KahlerCertificate::Cone { .. } => Ok((json!({"verified": false}), false)),
                    },
                )
            }
        };
        out.push(entry);
    }
    out
}

/// `Z` on a compact line at `(a, b, c)`: `[[d, o], [-o, d]]` blocks with
/// `d = (-bc + ai) / s`, `o = (ab + ci) / s`, `s = a^2 + c^2`.
fn sphere_period<T: Real>(n: usize, p: &[T; 3]) -> CMatrix<T> {
    let [a, b, c] = p.clone();
    let s = a.mul_ref(&a) + c.mul_ref(&c);
    let diag = Complex::new(-(b.mul_ref(&c)) / s.clone(), a.clone() / s.clone());
    let off = Complex::new(a.mul_ref(&b) / s.clone(), c / s);
    CMatrix::from_fn(2 * n, 2 * n, |r, col| {
        if r % n != col % n {
            return Complex::new(T::zero(), T::zero());
        }
        match (r / n, col / n) {
            (0, 0) | (1, 1) => diag.clone(),
            (0, 1) => off.clone(),
            _ => -off.clone(),
        }
    })
}

/// `Z = ((-b + i) / (a + c)) Id` on a hyperbolic line.
fn hyperboloid_period<T: Real>(n: usize, p: &[T; 3]) -> CMatrix<T> {
    let s = p[0].clone() + p[2].clone();
    CMatrix::scalar(2 * n, Complex::new(-p[1].clone() / s.clone(), T::one() / s))
}

fn period_checks<T: Real>(cfg: &BatteryConfig) -> Vec<Check> {
    let m = cfg.samples();
    line_types(cfg, &[-1, 1])
        .into_iter()
        .map(|(e, n, k)| {
            guarded(
                format!("c3/period/{}", tag(e, n, k)),
                "normalized periods match the closed forms; E + ZG = Id and conj(E) + Z conj(G) = 0",
                json!({"closed_form": m, "dual": m}),
                || {
                    let line = std_line::<T>(e, n, k)?;
                    let tol = line.rep().tol();
                    let (mut closed, mut dual) = (0, 0);
                    let comp = (e == 1).then_some(Component::Plus);
                    for p in line.sample_points(m, comp) {
                        let per = normalized_period(&p.matrix, tol)?;
                        let expected = if e == -1 {
                            sphere_period(n, &p.coords)
                        } else {
                            hyperboloid_period(n, &p.coords)
                        };
                        let ordered = per.selection == (0..2 * n).collect::<Vec<_>>();
                        closed += usize::from(ordered && near(&per.z, &expected));
                        let dp = dual_period(&per.z, tol)?;
                        let id = CMatrix::identity(2 * n);
                        let first = near(&(&dp.e + &(&per.z * &dp.g)), &id);
                        let second =
                            (&dp.e.conj() + &(&per.z * &dp.g.conj())).is_zero(if T::EXACT { 0.0 } else { 1e-9 });
                        dual += usize::from(first && second);
                    }
                    Ok((json!({"closed_form": closed, "dual": dual}), closed == m && dual == m))
                },
            )
        })
        .collect()
}

const LR_SAMPLES: usize = 100;

fn rational_circle_points() -> Vec<(Rational, Rational)> {
    // (1 - t^2, 2t) / (1 + t^2)
    let ts = [q(0, 1), q(1, 1), q(2, 1), q(3, 1), q(1, 2), q(1, 3), q(-1, 1), q(-2, 1)];
    ts.iter()
        .map(|t| {
            let den = Rational::from_integer(1.into()) + t * t;
            (
                (Rational::from_integer(1.into()) - t * t) / &den,
                (t * Rational::from_integer(2.into())) / den,
            )
        })
        .collect()
}

fn infinity_checks<T: Real>(cfg: &BatteryConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for (e, n, k) in line_types(cfg, &[-1, 0, 1]) {
        out.push(guarded(
            format!("c4a/off-real-locus/{}", tag(e, n, k)),
            "sampled points embed off the real locus",
            json!({"in_lr": 0, "samples": LR_SAMPLES}),
            || {
                let line = std_line::<T>(e, n, k)?;
                let mut hits = 0;
                for p in line.sample_points(LR_SAMPLES, None) {
                    hits += usize::from(in_lr(&embed(&p.matrix, line.rep().tol())?).0);
                }
                Ok((json!({"in_lr": hits, "samples": LR_SAMPLES}), hits == 0))
            },
        ));
    }
    for (e, n, k) in line_types(cfg, &[1]) {
        let pts = rational_circle_points();
        out.push(guarded(
            format!("c4b/circle/{}", tag(e, n, k)),
            "rational circle points meet the real points in dimension 2n and are pairwise distinct",
            json!({"dims": vec![2 * n; pts.len()], "distinct": true}),
            || {
                let line = std_line::<T>(e, n, k)?;
                let spans = pts
                    .iter()
                    .map(|(c, s)| infinity_circle_point(&line, &T::from_rational(c), &T::from_rational(s)))
                    .collect::<Result<Vec<_>>>()?;
                let dims: Vec<usize> = spans.iter().map(|u| u.real_points_dimension()).collect();
                let distinct = (0..spans.len()).all(|a| (a + 1..spans.len()).all(|b| !spans[a].equals(&spans[b])));
                let mut limits = true;
                for (c, s) in pts.iter().take(3) {
                    let (c, s) = (T::from_rational(c), T::from_rational(s));
                    let lim = exact_limit_hyperbolic(&line, &c, &s, Component::Plus)?;
                    limits &= lim.equals(&infinity_circle_point(&line, &c, &s)?);
                }
                let pass = dims.iter().all(|&d| d == 2 * n) && distinct && limits;
                Ok((
                    json!({"dims": dims, "distinct": distinct, "limits_match": limits}),
                    pass,
                ))
            },
        ));
    }
    for (e, n, k) in line_types(cfg, &[0]) {
        out.push(guarded(
            format!("c4c/nilpotent-limits/{}", tag(e, n, k)),
            "limits along the planes equal p+ and p- (span equality)",
            json!({"matches": 6}),
            || {
                let line = std_line::<T>(e, n, k)?;
                let mut matches = 0;
                for which in [Component::Plus, Component::Minus] {
                    let p = infinity_point(&line, which)?;
                    for (a, b) in [(1, 0), (0, 1), (2, -3)] {
                        let lim = exact_limit_nilpotent(&line, which, &T::from_i64(a), &T::from_i64(b))?;
                        matches += usize::from(lim.equals(&p));
                    }
                }
                Ok((json!({"matches": matches}), matches == 6))
            },
        ));
    }
    let grid = [10.0, 100.0, 1000.0];
    for (e, n, k) in line_types(cfg, &[0, 1]) {
        out.push(guarded(
            format!("c4d/angle-decay/{}", tag(e, n, k)),
            "largest principal angle to the limit decreases over t = 10, 100, 1000 and ends below 1e-2",
            json!({"decreasing": true, "final_below": 1e-2}),
            || {
                let line = std_line::<f64>(e, n, k)?;
                let ray = if e == 1 {
                    RaySpec::Hyperbolic {
                        sheet: Component::Plus,
                        c: 1.0,
                        s: 0.0,
                    }
                } else {
                    RaySpec::Nilpotent {
                        which: Component::Plus,
                        alpha: 1.0,
                        beta: 0.0,
                    }
                };
                let angles: Vec<f64> = limit_convergence(&line, &ray, &grid)?
                    .into_iter()
                    .map(|(_, a)| a)
                    .collect();
                let decreasing = angles.windows(2).all(|w| w[1] < w[0]);
                let last = *angles.last().unwrap_or(&f64::INFINITY);
                Ok((
                    json!({"angles": angles, "decreasing": decreasing}),
                    decreasing && last < 1e-2,
                ))
            },
        ));
    }
    out
}

fn law_grid() -> Vec<Rational> {
    vec![q(-2, 1), q(-1, 2), q(1, 3), q(1, 1), q(3, 2)]
}

fn tangent_checks<T: Real>(cfg: &BatteryConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for (e, n, k) in line_types(cfg, &[0, 1]) {
        out.push(guarded(
            format!("c5/tangent-cone/{}", tag(e, n, k)),
            "tangent plane at infinity has dimension 2 and meets the tangent cone of the real locus only as predicted",
            if e == 1 {
                json!([{"plane_dim": 2, "boundary_in_cone": true, "interior_hits": 0, "directions": 8}])
            } else {
                json!([{"plane_dim": 2, "interior_hits": 0, "directions": 8}, {"plane_dim": 2, "interior_hits": 0, "directions": 8}])
            },
            || {
                let reports = infinity_tangent_report(&std_line::<T>(e, n, k)?)?;
                let pass = reports.iter().all(|r| {
                    r.plane_dim == 2 && r.interior_hits == 0 && r.directions == 8 && r.boundary_in_cone != Some(false)
                });
                let computed: Vec<Value> = reports
                    .iter()
                    .map(|r| {
                        json!({"base": r.base, "plane_dim": r.plane_dim, "boundary_in_cone": r.boundary_in_cone,
                               "interior_hits": r.interior_hits, "directions": r.directions})
                    })
                    .collect();
                Ok((json!(computed), pass))
            },
        ));
    }
    for (e, n, k) in line_types(cfg, &[0]) {
        let grid = law_grid();
        let count = grid.len() * grid.len();
        out.push(guarded(
            format!("c5/phi-laws/{}", tag(e, n, k)),
            "phi_z1 + phi_z2 = phi_(z1 z2 / (z1 + z2)) and a phi_z = phi_(z / a) on a 5x5 grid of z",
            json!({"addition": 2 * count, "scaling": 2 * count}),
            || {
                let line = std_line::<T>(e, n, k)?;
                let zs: Vec<Complex<T>> = grid
                    .iter()
                    .flat_map(|a| {
                        grid.iter()
                            .map(move |b| Complex::new(T::from_rational(a), T::from_rational(b)))
                    })
                    .collect();
                let (mut add, mut scale) = (0, 0);
                for which in [Component::Plus, Component::Minus] {
                    let phi =
                        |z: &Complex<T>| tangent_at_infinity_nilpotent(&line, which, z, ComplementChoice::Primary);
                    for (idx, z1) in zs.iter().enumerate() {
                        let z2 = &zs[(idx * 7 + 3) % zs.len()];
                        let total = z1.clone() + z2.clone();
                        if total.re.negligible(0.0) && total.im.negligible(0.0) {
                            add += 1;
                            continue;
                        }
                        let sum = phi(z1)?.add(&phi(z2)?)?;
                        let law = phi(&((z1.clone() * z2.clone()) / total))?;
                        add += usize::from(near(&sum.map, &law.map));
                        let a = T::from_rational(&grid[idx % grid.len()]);
                        let lhs = phi(z1)?.scale(&a);
                        let rhs = phi(&(z1.clone() / Complex::new(a, T::zero())))?;
                        scale += usize::from(near(&lhs.map, &rhs.map));
                    }
                }
                Ok((
                    json!({"addition": add, "scaling": scale}),
                    add == 2 * count && scale == 2 * count,
                ))
            },
        ));
    }
    out
}

const TRIPLES: usize = 50;

/// Points of `line` by index into a growing sample, with deliberately
/// dependent triples mixed in.
fn random_triples<T: Real>(line: &TwistorLine<T>, rng: &mut CountedRng) -> Result<Vec<[LinePoint<T>; 3]>> {
    use rand::Rng;
    let pool = line.sample_points(40, None);
    let neg = |p: &LinePoint<T>| line.point(-p.coords[0].clone(), -p.coords[1].clone(), -p.coords[2].clone());
    (0..TRIPLES)
        .map(|t| {
            let mut pick = || pool[rng.random_range(0..pool.len())].clone();
            let (a, b, c) = (pick(), pick(), pick());
            Ok(match t % 10 {
                4 => [a.clone(), b, a],
                9 => {
                    let na = neg(&a)?;
                    [a, b, na]
                }
                _ => [a, b, c],
            })
        })
        .collect()
}

fn transversality_checks<T: Real>(cfg: &BatteryConfig, rng_for: &(dyn Fn(&str) -> CountedRng + Sync)) -> Vec<Check> {
    let mut out = Vec::new();
    for (e, n, k) in line_types(cfg, &[-1, 1]) {
        let t = tag(e, n, k);
        let line = match std_line::<T>(e, n, k) {
            Ok(l) => l,
            Err(err) => {
                out.push(failed(format!("c6/setup/{t}"), "standard line", json!(null), &err));
                continue;
            }
        };
        let comp = (e == 1).then_some(Component::Plus);
        let pts = line.sample_points(4, comp);
        out.push(guarded(
            format!("c6/stabilizer/{t}"),
            "stabilizer tangent dimension 8n^2 at I and sampled points",
            json!(vec![8 * n * n; 5]),
            || {
                let mut dims = vec![stabilizer_tangent(line.rep().i(), line.rep().tol())?.dim()];
                for p in &pts {
                    dims.push(stabilizer_tangent(&p.matrix, line.rep().tol())?.dim());
                }
                let pass = dims.iter().all(|&d| d == 8 * n * n);
                Ok((json!(dims), pass))
            },
        ));
        let cent = algebra_centralizer_tangent(line.rep());
        out.push(check(
            format!("c6/centralizer/{t}"),
            "matrices commuting with the algebra: dimension 4n^2",
            json!(4 * n * n),
            json!(cent.len()),
            cent.len() == 4 * n * n,
        ));
        out.push(guarded(
            format!("c6/intersection/{t}"),
            "stabilizer intersection of two line points equals the centralizer",
            json!(true),
            || {
                let inter = stabilizer_intersection(&pts[1].matrix, &pts[2].matrix, line.rep().tol())?;
                let eq = same_span(&inter, &cent, line.rep().tol());
                Ok((json!(eq), eq))
            },
        ));
        out.push(guarded(
            format!("c6/generators/{t}"),
            "quotient rank of the generator stabilizers is 12n^2",
            json!(12 * n * n),
            || {
                let r = generator_transversality(line.rep())?;
                Ok((json!(r.quotient_rank), r.transversal && r.quotient_rank == 12 * n * n))
            },
        ));
        out.push(guarded(
            format!("c6/triples/{t}"),
            "triple transversality agrees with a nonzero coordinate determinant",
            json!({"agree": TRIPLES}),
            || {
                let mut rng = rng_for(&format!("c6/triples/{t}"));
                let (mut agree, mut transversal) = (0, 0);
                for [a, b, c] in random_triples(&line, &mut rng)? {
                    let r = triple_transversality(&line, &a, &b, &c)?;
                    agree += usize::from(r.agrees());
                    transversal += usize::from(r.transversal());
                }
                Ok((json!({"agree": agree, "transversal": transversal}), agree == TRIPLES))
            },
        ));
    }
    out
}

const PAIRS: usize = 10;

fn connectivity_checks(rng_for: &(dyn Fn(&str) -> CountedRng + Sync)) -> Vec<Check> {
    [-1, 1]
        .into_iter()
        .map(|e| {
            let id = format!("c7/connect/eps={e}/n=1");
            guarded(
                id.clone(),
                "chains joining seeded conjugate pairs validate with junctions below 1e-8 and at most 50 Newton iterations",
                json!({"valid": PAIRS, "max_junction_residual_below": 1e-8, "max_newton_iterations_at_most": 50}),
                || {
                    let mut rng = rng_for(&id);
                    let base = standard_rep::<f64>(e, 1, None)?.i().clone();
                    let (mut valid, mut worst, mut iters, mut segments) = (0, 0.0_f64, 0usize, 0usize);
                    for _ in 0..PAIRS {
                        let g0 = rng.near_identity(4, 4).to_f64();
                        let g = rng.near_identity(4, 4).to_f64();
                        let a = conjugate_by(&g0, &base)?;
                        let b = conjugate_by(&g, &a)?;
                        let path = connect(&a, &b, e, &ConnectOptions::default(), &mut rng)?;
                        let report = validate_path(&path, 1e-8);
                        let end = path.end().map(|m| (m - &b).frobenius()).unwrap_or(f64::INFINITY);
                        let start = path.start().map(|m| (m - &a).frobenius()).unwrap_or(f64::INFINITY);
                        valid += usize::from(report.pass && end < 1e-8 && start < 1e-8);
                        worst = report.junction_residuals.iter().chain([&end]).fold(worst, |w, &r| w.max(r));
                        iters = path.newton_iterations.iter().copied().fold(iters, usize::max);
                        segments += path.segments.len();
                    }
                    let pass = valid == PAIRS && worst < 1e-8 && iters <= 50;
                    Ok((
                        json!({"valid": valid, "max_junction_residual": worst, "max_newton_iterations": iters, "segments": segments}),
                        pass,
                    ))
                },
            )
        })
        .collect()
}

const CONJUGATES: usize = 20;

fn classification_checks<T: Real>(cfg: &BatteryConfig, rng_for: &(dyn Fn(&str) -> CountedRng + Sync)) -> Vec<Check> {
    line_types(cfg, &[0])
        .into_iter()
        .map(|(e, n, k)| {
            let id = format!("c8/nilpotent-class/{}", tag(e, n, k));
            guarded(
                id.clone(),
                "k is recovered from random conjugates and the adapted basis returns the standard blocks",
                json!({"recovered": CONJUGATES, "round_trips": CONJUGATES}),
                || {
                    let mut rng = rng_for(&id);
                    let std: AlgebraRep<T> = standard_rep(e, n, k)?;
                    let tol = std.tol();
                    let (mut recovered, mut round) = (0, 0);
                    for _ in 0..CONJUGATES {
                        let g = rng.invertible(4 * n).map(T::from_rational);
                        let c = std.conjugate(&g)?;
                        recovered += usize::from(classify_nilpotent_rep(c.i(), c.b(), tol)? == k.unwrap_or(0));
                        let h = adapted_nilpotent_basis(c.i(), c.b(), tol)?;
                        let hi = inverse(&h, tol.max(f64::MIN_POSITIVE))?;
                        round +=
                            usize::from(near(&(&(&hi * c.i()) * &h), std.i()) && near(&(&(&hi * c.b()) * &h), std.b()));
                    }
                    Ok((
                        json!({"recovered": recovered, "round_trips": round}),
                        recovered == CONJUGATES && round == CONJUGATES,
                    ))
                },
            )
        })
        .collect()
}

/// Runs every check, in parallel, and sorts the entries by id.
pub fn run_battery<T: Real + JsonScalar + Send + Sync>(cfg: &BatteryConfig) -> Result<BatteryReport> {
    if cfg.n_max == 0 || cfg.n_max > MAX_N {
        return Err(Error::Malformed(format!(
            "n_max must lie in 1..={MAX_N}, got {}",
            cfg.n_max
        )));
    }
    let seed = cfg.seed;
    let rng_for = move |label: &str| CountedRng::derive(seed, label);
    type Task<'a> = Box<dyn Fn() -> Vec<Check> + Send + Sync + 'a>;
    let tasks: Vec<Task> = vec![
        Box::new(|| hdg_checks::<T>(cfg)),
        Box::new(|| kahler_checks::<T>(cfg)),
        Box::new(|| period_checks::<T>(cfg)),
        Box::new(|| infinity_checks::<T>(cfg)),
        Box::new(|| tangent_checks::<T>(cfg)),
        Box::new(|| transversality_checks::<T>(cfg, &rng_for)),
        Box::new(|| connectivity_checks(&rng_for)),
        Box::new(|| classification_checks::<T>(cfg, &rng_for)),
    ];
    let mut checks: Vec<Check> = tasks.par_iter().flat_map(|t| t()).collect();
    checks.sort_by(|a, b| a.id.cmp(&b.id));
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(BatteryReport {
        seed,
        n_max: cfg.n_max,
        scalar: T::DOMAIN,
        k_grid: cfg.k_grid.clone(),
        checks,
        all_pass,
    })
}
