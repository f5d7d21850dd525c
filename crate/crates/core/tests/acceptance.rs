//! Acceptance run: one PASS/FAIL line per criterion. Oracles are closed
//! forms evaluated here, independently of the library's own battery.

use std::time::Instant;

use rand::Rng;
use twistor::connect::{
    algebra_centralizer_tangent, conjugate_by, connect, generator_transversality, same_span, stabilizer_intersection,
    stabilizer_tangent, triple_transversality, validate_path, ConnectOptions,
};
use twistor::grassmann::{
    embed, exact_limit_nilpotent, in_lr, infinity_circle_point, infinity_tangent_report, limit_convergence,
    tangent_at_infinity_nilpotent, ComplementChoice, RaySpec,
};
use twistor::linalg::{inverse, nullspace, rank, SubspaceC};
use twistor::line::{Component, LinePoint, TwistorLine};
use twistor::period::{cone_witness, dual_period, hdg_space, hermitian_form, is_kahler_at, normalized_period, HdgMode};
use twistor::rep::{adapted_nilpotent_basis, classify_nilpotent_rep, standard_rep};
use twistor::rng::CountedRng;
use twistor::scalar::q;
use twistor::{CMatrix, Complex, Matrix, RMatrix, Rational, Scalar};

const SEED: u64 = 2024;
const SAMPLES: usize = 6;
const JUNCTION_TOL: f64 = 1e-8;
const MAX_NEWTON: usize = 50;
const ANGLE_BOUND: f64 = 1e-2;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn line(e: i32, n: usize, k: Option<usize>) -> TwistorLine {
    TwistorLine::new(standard_rep(e, n, k).unwrap())
}

fn int(v: i64) -> Rational {
    Rational::from_i64(v)
}

fn cz(re: Rational, im: Rational) -> Complex<Rational> {
    Complex::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Every (epsilon, n, k) for n = 1, 2, 3, with all ranks 1..=n for epsilon = 0.
fn all_types(epsilons: &[i32]) -> Vec<(i32, usize, Option<usize>)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for &e in epsilons {
            if e == 0 {
                out.extend((1..=n).map(|k| (0, n, Some(k))));
            } else {
                out.push((e, n, None));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    // Published dimensions, one entry per (epsilon, n, k).
    let table: &[(i32, usize, Option<usize>, usize)] = &[
        (-1, 1, None, 3),
        (1, 1, None, 3),
        (0, 1, Some(1), 3),
        (-1, 2, None, 10),
        (1, 2, None, 10),
        (0, 2, Some(1), 11),
        (0, 2, Some(2), 10),
        (-1, 3, None, 21),
        (1, 3, None, 21),
        (0, 3, Some(1), 27),
        (0, 3, Some(2), 22),
        (0, 3, Some(3), 21),
    ];
    for &(e, n, k, expected) in table {
        let l = line(e, n, k);
        let hdg = hdg_space(&l, HdgMode::ClosedForm).map_err(|e| e.to_string())?;
        ensure(hdg.dim() == expected, || {
            format!("eps={e} n={n} k={k:?}: dim {} != {expected}", hdg.dim())
        })?;
        // Each basis form is alternating and of type (1,1) at sampled points.
        let vecs: Vec<Vec<Rational>> = hdg.basis.iter().map(|b| b.vectorize()).collect();
        let d = 16 * n * n;
        ensure(rank(&Matrix::from_cols(d, &vecs), 0.0) == expected, || {
            format!("eps={e} n={n}: dependent basis")
        })?;
        let pts = l.sample_points(3, None);
        for form in &hdg.basis {
            ensure(form.transpose() == -form, || {
                format!("eps={e} n={n}: form not alternating")
            })?;
            for p in &pts {
                let pulled = &(&p.matrix.transpose() * form) * &p.matrix;
                ensure(&pulled == form, || format!("eps={e} n={n}: form not of type (1,1)"))?;
            }
        }
    }
    Ok("all 12 dimensions exact (3,10,21; 3,11,10,27,22,21)".into())
}

fn criterion_2() -> Outcome {
    for n in 1..=3 {
        // Hyperbolic: Kähler exactly on the upper sheet with H = ((x+z)/2) Id.
        let l = line(1, n, None);
        let w = cone_witness(&l, Component::Plus).map_err(|e| e.to_string())?;
        for p in l.sample_points(SAMPLES, Some(Component::Plus)) {
            let h = hermitian_form(&w, &p.matrix, 0.0).map_err(|e| e.to_string())?;
            let val = (p.coords[0].clone() + p.coords[2].clone()) / int(2);
            ensure(val > int(0), || "upper sample with x + z <= 0".into())?;
            ensure(h == CMatrix::scalar(2 * n, cz(val, int(0))), || {
                format!("n={n}: H differs from ((x+z)/2) Id")
            })?;
            ensure(is_kahler_at(&w, &p.matrix, 0.0).map_err(|e| e.to_string())?, || {
                "upper sample not Kähler".into()
            })?;
        }
        for p in l.sample_points(SAMPLES, Some(Component::Minus)) {
            ensure(!is_kahler_at(&w, &p.matrix, 0.0).map_err(|e| e.to_string())?, || {
                "lower sample Kähler".into()
            })?;
        }
        // Compact: H(-l) = -conj H(l), so no form is positive at both.
        let l = line(-1, n, None);
        let hdg = hdg_space(&l, HdgMode::ClosedForm).map_err(|e| e.to_string())?;
        for p in l.sample_points(5, None) {
            let neg = l
                .point(-p.coords[0].clone(), -p.coords[1].clone(), -p.coords[2].clone())
                .map_err(|e| e.to_string())?;
            ensure(neg.matrix == -&p.matrix, || "antipode is not -lambda".into())?;
            for form in &hdg.basis {
                let h = hermitian_form(form, &p.matrix, 0.0).map_err(|e| e.to_string())?;
                let hn = hermitian_form(form, &neg.matrix, 0.0).map_err(|e| e.to_string())?;
                ensure(hn == -&h.conj(), || format!("n={n}: antipodal identity fails"))?;
            }
        }
        // Nilpotent: Q(Nu, Nv) = Q(Nu, lambda Nv) = 0, i.e. Im N is isotropic.
        for k in 1..=n {
            let l = line(0, n, Some(k));
            let nil = l.rep().b();
            let hdg = hdg_space(&l, HdgMode::ClosedForm).map_err(|e| e.to_string())?;
            for p in l.sample_points(5, None) {
                for form in &hdg.basis {
                    let a = &(&nil.transpose() * form) * nil;
                    let b = &(&(&nil.transpose() * form) * &p.matrix) * nil;
                    ensure(a.is_zero(0.0) && b.is_zero(0.0), || {
                        format!("n={n} k={k}: Im N not isotropic")
                    })?;
                }
            }
        }
    }
    Ok(format!("{SAMPLES} upper/{SAMPLES} lower sheet samples, antipodal and isotropy identities exact over full Hdg bases, n<=3"))
}

fn sphere_period(n: usize, x: &Rational, y: &Rational, z: &Rational) -> CMatrix<Rational> {
    let s = x * x + z * z;
    let diag = cz(-(y * z) / &s, x / &s);
    let off = cz(x * y / &s, z / &s);
    CMatrix::from_fn(2 * n, 2 * n, |r, c| match (r % n == c % n, r / n, c / n) {
        (false, _, _) => cz(int(0), int(0)),
        (true, 0, 0) | (true, 1, 1) => diag.clone(),
        (true, 0, 1) => off.clone(),
        _ => -off.clone(),
    })
}

fn criterion_3() -> Outcome {
    let mut count = 0;
    for n in 1..=3 {
        for e in [-1, 1] {
            let l = line(e, n, None);
            let comp = (e == 1).then_some(Component::Plus);
            for p in l.sample_points(SAMPLES, comp) {
                let [x, y, z] = &p.coords;
                let per = normalized_period(&p.matrix, 0.0).map_err(|e| e.to_string())?;
                let expected = if e == -1 {
                    sphere_period(n, x, y, z)
                } else {
                    CMatrix::scalar(2 * n, cz(-y / (x + z), int(1) / (x + z)))
                };
                ensure(per.z == expected, || {
                    format!("eps={e} n={n}: Z differs at {:?}", p.coords)
                })?;
                let dual = dual_period(&per.z, 0.0).map_err(|e| e.to_string())?;
                let id = CMatrix::identity(2 * n);
                ensure(&dual.e + &(&per.z * &dual.g) == id, || "E + ZG != Id".into())?;
                ensure((&dual.e.conj() + &(&per.z * &dual.g.conj())).is_zero(0.0), || {
                    "conj E + Z conj G != 0".into()
                })?;
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} rational periods equal the closed forms exactly; dual identities exact"
    ))
}

fn circle_points() -> Vec<(Rational, Rational)> {
    [q(0, 1), q(1, 1), q(2, 1), q(3, 1), q(1, 2), q(1, 3), q(-1, 1), q(-2, 1)]
        .iter()
        .map(|t| {
            let den = int(1) + t * t;
            ((int(1) - t * t) / &den, (t * int(2)) / den)
        })
        .collect()
}

/// `Im N + i Im N + (Id -/+ i I) Ker N`, assembled here from the generators.
fn nilpotent_limit_closed_form(l: &TwistorLine, which: Component) -> SubspaceC<Rational> {
    let rep = l.rep();
    let d = rep.dim();
    let real = |v: Vec<Rational>| v.into_iter().map(|x| cz(x, int(0))).collect::<Vec<_>>();
    let mut cols: Vec<Vec<Complex<Rational>>> = (0..d).map(|j| real(rep.b().col(j))).collect();
    let sign = match which {
        Component::Plus => int(-1),
        Component::Minus => int(1),
    };
    for w in nullspace(rep.b(), 0.0) {
        let iw = rep.i().apply(&w);
        cols.push(w.iter().zip(&iw).map(|(a, b)| cz(a.clone(), &sign * b)).collect());
    }
    SubspaceC::span_of(&Matrix::from_cols(d, &cols), 0.0)
}

fn criterion_4() -> Outcome {
    // (a) off the real locus
    let mut checked = 0;
    for (e, n, k) in all_types(&[-1, 0, 1]) {
        let l = line(e, n, k);
        for p in l.sample_points(100, None) {
            let u = embed(&p.matrix, 0.0).map_err(|e| e.to_string())?;
            ensure(!in_lr(&u).0, || {
                format!("eps={e} n={n}: sampled point in the real locus")
            })?;
            checked += 1;
        }
    }
    // (b) circle at infinity
    for n in 1..=3 {
        let l = line(1, n, None);
        let spans = circle_points()
            .iter()
            .map(|(c, s)| {
                ensure(c * c + s * s == int(1), || "not on the circle".into())?;
                infinity_circle_point(&l, c, s).map_err(|e| e.to_string())
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        for (a, u) in spans.iter().enumerate() {
            ensure(u.real_points_dimension() == 2 * n, || {
                format!("n={n}: real meet {} != {}", u.real_points_dimension(), 2 * n)
            })?;
            ensure(spans[a + 1..].iter().all(|v| !u.equals(v)), || {
                format!("n={n}: repeated circle point")
            })?;
        }
    }
    // (c) nilpotent limits equal the closed form
    for (_, n, k) in all_types(&[0]) {
        let l = line(0, n, k);
        for which in [Component::Plus, Component::Minus] {
            let closed = nilpotent_limit_closed_form(&l, which);
            ensure(closed.dim() == 2 * n, || "closed form has wrong dimension".into())?;
            for (a, b) in [(1, 0), (0, 1), (2, -3)] {
                let lim = exact_limit_nilpotent(&l, which, &int(a), &int(b)).map_err(|e| e.to_string())?;
                ensure(lim.equals(&closed), || {
                    format!("n={n} k={k:?} {which}: limit differs from closed form")
                })?;
            }
        }
    }
    // (d) float principal angles
    let mut last = 0.0_f64;
    for (e, n, k) in all_types(&[0, 1]) {
        let l = TwistorLine::new(standard_rep::<f64>(e, n, k).map_err(|e| e.to_string())?);
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
        let angles: Vec<f64> = limit_convergence(&l, &ray, &[10.0, 100.0, 1000.0])
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|(_, a)| a)
            .collect();
        ensure(angles.windows(2).all(|w| w[1] < w[0]), || {
            format!("eps={e} n={n}: angles {angles:?} not decreasing")
        })?;
        ensure(angles[2] < ANGLE_BOUND, || {
            format!("eps={e} n={n}: final angle {} >= {ANGLE_BOUND}", angles[2])
        })?;
        last = last.max(angles[2]);
    }
    Ok(format!(
        "{checked} points off L_R; circle meets 2n; limits match; worst final angle {last:.2e} < {ANGLE_BOUND}"
    ))
}

fn criterion_5() -> Outcome {
    for (e, n, k) in all_types(&[0, 1]) {
        let reports = infinity_tangent_report(&line(e, n, k)).map_err(|e| e.to_string())?;
        for r in &reports {
            ensure(r.plane_dim == 2, || format!("eps={e} n={n}: plane dim {}", r.plane_dim))?;
            ensure(r.directions == 8 && r.interior_hits == 0, || {
                format!("eps={e} n={n}: {}/8 directions in the cone", r.interior_hits)
            })?;
            if e == 1 {
                ensure(r.boundary_in_cone == Some(true), || {
                    format!("n={n}: circle direction not in the cone")
                })?;
            }
        }
        ensure(reports.len() == if e == 1 { 1 } else { 2 }, || {
            "wrong number of base points".into()
        })?;
    }
    // phi_z1 + phi_z2 = phi_{z1 z2/(z1+z2)} and a phi_z = phi_{z/a}
    let grid = [q(-2, 1), q(-1, 2), q(1, 3), q(1, 1), q(3, 2)];
    let zs: Vec<Complex<Rational>> = grid
        .iter()
        .flat_map(|a| grid.iter().map(move |b| cz(a.clone(), b.clone())))
        .collect();
    let mut laws = 0;
    for (_, n, k) in all_types(&[0]) {
        let l = line(0, n, k);
        for which in [Component::Plus, Component::Minus] {
            let phi = |z: &Complex<Rational>| {
                tangent_at_infinity_nilpotent(&l, which, z, ComplementChoice::Primary).map_err(|e| e.to_string())
            };
            for z1 in &zs {
                for z2 in zs.iter().step_by(6) {
                    let total = z1 + z2;
                    if total.re.negligible(0.0) && total.im.negligible(0.0) {
                        continue;
                    }
                    let sum = phi(z1)?.add(&phi(z2)?).map_err(|e| e.to_string())?;
                    ensure(sum.map == phi(&(z1 * z2 / total))?.map, || {
                        format!("n={n}: addition law fails")
                    })?;
                    laws += 1;
                }
                for a in &grid {
                    let lhs = phi(z1)?.scale(a);
                    ensure(lhs.map == phi(&(z1 / cz(a.clone(), int(0))))?.map, || {
                        format!("n={n}: scaling law fails")
                    })?;
                    laws += 1;
                }
            }
        }
    }
    Ok(format!(
        "plane dim 2, circle direction in cone, 0/8 interior hits; {laws} exact law instances"
    ))
}

fn det3(p: [&LinePoint; 3]) -> Rational {
    let m = |r: usize, c: usize| &p[r].coords[c];
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

fn criterion_6() -> Outcome {
    let mut rng = CountedRng::derive(SEED, "acceptance/6");
    let (mut transversal, mut total) = (0, 0);
    for n in 1..=3 {
        for e in [-1, 1] {
            let l = line(e, n, None);
            let rep = l.rep();
            let pts = l.sample_points(4, (e == 1).then_some(Component::Plus));
            for m in std::iter::once(rep.i()).chain(pts.iter().map(|p| &p.matrix)) {
                let dim = stabilizer_tangent(m, 0.0).map_err(|e| e.to_string())?.dim();
                ensure(dim == 8 * n * n, || {
                    format!("eps={e} n={n}: stabilizer {dim} != {}", 8 * n * n)
                })?;
            }
            let cent = algebra_centralizer_tangent(rep);
            ensure(cent.len() == 4 * n * n, || {
                format!("eps={e} n={n}: centralizer {}", cent.len())
            })?;
            // Every centralizer element commutes with both generators.
            ensure(
                cent.iter()
                    .all(|x| x.commutator(rep.i()).is_zero(0.0) && x.commutator(rep.b()).is_zero(0.0)),
                || "centralizer element fails to commute".into(),
            )?;
            let inter = stabilizer_intersection(&pts[1].matrix, &pts[2].matrix, 0.0).map_err(|e| e.to_string())?;
            ensure(same_span(&inter, &cent, 0.0), || {
                format!("eps={e} n={n}: intersection differs from centralizer")
            })?;
            let g = generator_transversality(rep).map_err(|e| e.to_string())?;
            ensure(g.quotient_rank == 12 * n * n && g.transversal, || {
                format!("eps={e} n={n}: rank {}", g.quotient_rank)
            })?;
            let pool = l.sample_points(40, None);
            for t in 0..50 {
                let mut pick = || pool[rng.random_range(0..pool.len())].clone();
                let (a, b, c) = (pick(), pick(), pick());
                let c = match t % 10 {
                    4 => a.clone(),
                    9 => l
                        .point(-a.coords[0].clone(), -a.coords[1].clone(), -a.coords[2].clone())
                        .unwrap(),
                    _ => c,
                };
                let r = triple_transversality(&l, &a, &b, &c).map_err(|e| e.to_string())?;
                let nonzero = det3([&a, &b, &c]) != int(0);
                ensure(r.transversal() == nonzero, || {
                    format!("eps={e} n={n}: triple verdict disagrees with determinant")
                })?;
                transversal += usize::from(nonzero);
                total += 1;
            }
        }
    }
    Ok(format!(
        "8n^2/4n^2/12n^2 for n<=3, eps=+-1; {total} triples agree with the determinant ({transversal} nonzero)"
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = CountedRng::derive(SEED, "acceptance/7");
    let (mut worst, mut iters, mut paths) = (0.0_f64, 0, 0);
    for e in [-1, 1] {
        let base = standard_rep::<f64>(e, 1, None).map_err(|e| e.to_string())?.i().clone();
        for pair in 0..10 {
            let g0 = rng.near_identity(4, 4).to_f64();
            let g: RMatrix = rng.near_identity(4, 4);
            ensure(twistor::linalg::determinant(&g).unwrap() > int(0), || {
                "det g <= 0".into()
            })?;
            let a = conjugate_by(&g0, &base).map_err(|e| e.to_string())?;
            let b = conjugate_by(&g.to_f64(), &a).map_err(|e| e.to_string())?;
            let path = connect(&a, &b, e, &ConnectOptions::default(), &mut rng)
                .map_err(|err| format!("eps={e} pair {pair}: {err}"))?;
            let report = validate_path(&path, JUNCTION_TOL);
            ensure(report.pass, || format!("eps={e} pair {pair}: path does not validate"))?;
            let start = (path.start().unwrap() - &a).frobenius();
            let end = (path.end().unwrap() - &b).frobenius();
            for r in report.junction_residuals.iter().chain([&start, &end]) {
                worst = worst.max(*r);
            }
            iters = path.newton_iterations.iter().copied().fold(iters, usize::max);
            paths += 1;
        }
    }
    ensure(worst < JUNCTION_TOL, || format!("worst junction residual {worst:.2e}"))?;
    ensure(iters <= MAX_NEWTON, || format!("Newton needed {iters} iterations"))?;
    Ok(format!("{paths} paths valid; worst residual {worst:.2e} < {JUNCTION_TOL:e}; max {iters} <= {MAX_NEWTON} Newton iterations"))
}

fn criterion_8() -> Outcome {
    let mut rng = CountedRng::derive(SEED, "acceptance/8");
    let mut count = 0;
    for (_, n, k) in all_types(&[0]) {
        let std = standard_rep::<Rational>(0, n, k).map_err(|e| e.to_string())?;
        let k = k.unwrap();
        for _ in 0..20 {
            let g = rng.invertible(4 * n);
            let c = std.conjugate(&g).map_err(|e| e.to_string())?;
            // Independent invariant: rank N = 2k.
            ensure(rank(c.b(), 0.0) == 2 * k, || "rank N != 2k".into())?;
            let found = classify_nilpotent_rep(c.i(), c.b(), 0.0).map_err(|e| e.to_string())?;
            ensure(found == k, || format!("n={n}: recovered k={found}, expected {k}"))?;
            let h = adapted_nilpotent_basis(c.i(), c.b(), 0.0).map_err(|e| e.to_string())?;
            let hi = inverse(&h, 0.0).map_err(|e| e.to_string())?;
            ensure(
                &(&hi * c.i()) * &h == *std.i() && &(&hi * c.b()) * &h == *std.b(),
                || format!("n={n} k={k}: adapted basis does not return the standard blocks"),
            )?;
            count += 1;
        }
    }
    Ok(format!(
        "{count} conjugates classified; adapted bases round-trip exactly"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 Hdg dimensions", criterion_1),
        ("2 Kähler certificates", criterion_2),
        ("3 period closed forms", criterion_3),
        ("4 infinity behavior", criterion_4),
        ("5 tangent-cone verdicts", criterion_5),
        ("6 dimensions and transversality", criterion_6),
        ("7 connectivity", criterion_7),
        ("8 nilpotent classification", criterion_8),
    ];
    let results: Vec<(String, Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(name, f)| {
                s.spawn(move || {
                    let t = Instant::now();
                    let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
                    (name.to_string(), out, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("criterion thread"))
            .collect()
    });
    let mut failed = 0;
    for (name, out, secs) in &results {
        match out {
            Ok(detail) => println!("PASS criterion {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
