//! Generalized twistor lines: the complex structures `x I + y B + z K` inside
//! the span of a representation, cut out by `x^2 - c (y^2 + z^2) = 1` where
//! `B^2 = c Id`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::json::JsonScalar;
use crate::linalg::{rank, solve};
use crate::matrix::Matrix;
use crate::rep::{classify_pair, domain_tol, rep_from_json, rep_to_json, AlgebraRep};
use crate::scalar::{q, Rational, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineKind {
    Sphere,
    Hyperboloid,
    Planes,
}

impl LineKind {
    pub fn of_epsilon(epsilon: i32) -> Self {
        match epsilon {
            -1 => Self::Sphere,
            1 => Self::Hyperboloid,
            _ => Self::Planes,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Hyperboloid => "hyperboloid",
            Self::Planes => "planes",
        }
    }
}

/// Connected component of a disconnected line, by the sign of the
/// `I`-coordinate. Labels are relative to the stored `I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-", alias = "\u{2212}")]
    Minus,
}

impl Component {
    pub fn sign(self) -> i64 {
        match self {
            Self::Plus => 1,
            Self::Minus => -1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plus => "+",
            Self::Minus => "-",
        })
    }
}

impl FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" => Ok(Self::Plus),
            "-" | "\u{2212}" | "minus" => Ok(Self::Minus),
            other => Err(Error::Malformed(format!("unknown component {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TwistorLine<T = Rational> {
    rep: AlgebraRep<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinePoint<T = Rational> {
    pub coords: [T; 3],
    pub matrix: Matrix<T>,
}

fn scaled_tol<T: Real>(tol: f64, scale: f64) -> f64 {
    domain_tol::<T>(tol) * scale.max(1.0)
}

impl<T: Real> TwistorLine<T> {
    pub fn new(rep: AlgebraRep<T>) -> Self {
        Self { rep }
    }

    pub fn rep(&self) -> &AlgebraRep<T> {
        &self.rep
    }

    pub fn epsilon(&self) -> i32 {
        self.rep.epsilon()
    }

    pub fn kind(&self) -> LineKind {
        LineKind::of_epsilon(self.rep.epsilon())
    }

    /// `x^2 - c (y^2 + z^2) - 1`
    pub fn quadric_defect(&self, x: &T, y: &T, z: &T) -> T {
        let c = self.rep.b_square();
        let yz = y.mul_ref(y) + z.mul_ref(z);
        x.mul_ref(x) - c.mul_ref(&yz) - T::one()
    }

    fn on_quadric(&self, x: &T, y: &T, z: &T) -> bool {
        let scale = 1.0
            + x.magnitude().powi(2)
            + self.rep.b_square().magnitude() * (y.magnitude().powi(2) + z.magnitude().powi(2));
        self.quadric_defect(x, y, z)
            .negligible(scaled_tol::<T>(self.rep.tol(), scale))
    }

    pub fn point(&self, x: T, y: T, z: T) -> Result<LinePoint<T>> {
        if !self.on_quadric(&x, &y, &z) {
            return Err(Error::OffQuadric);
        }
        let matrix = self.rep.combination(&x, &y, &z);
        Ok(LinePoint {
            coords: [x, y, z],
            matrix,
        })
    }

    /// Coordinates of `lambda` when it lies on the line.
    pub fn contains(&self, lambda: &Matrix<T>) -> Result<Option<[T; 3]>> {
        let d = self.rep.dim();
        if !lambda.is_square() || lambda.rows() != d {
            return Err(Error::DimensionMismatch("point has the wrong size".into()));
        }
        let tol = domain_tol::<T>(self.rep.tol());
        if !(lambda * lambda).near(&Matrix::scalar(d, -T::one()), tol) {
            return Err(Error::NotComplexStructure);
        }
        let gens = Matrix::from_cols(
            d * d,
            &[
                self.rep.i().vectorize(),
                self.rep.b().vectorize(),
                self.rep.k_mat().vectorize(),
            ],
        );
        let solve_tol = if T::EXACT {
            0.0
        } else {
            tol.max(crate::scalar::DEFAULT_TOL)
        };
        let Some(x) = solve(&gens, &lambda.vectorize(), solve_tol) else {
            return Ok(None);
        };
        let [a, b, c]: [T; 3] = x.try_into().expect("three generators");
        if !self.rep.combination(&a, &b, &c).near(lambda, tol) || !self.on_quadric(&a, &b, &c) {
            return Ok(None);
        }
        Ok(Some([a, b, c]))
    }

    /// Component of a point by the sign of its `I`-coordinate.
    pub fn component_of(&self, coords: &[T; 3]) -> Result<Component> {
        if self.epsilon() == -1 {
            return Err(Error::ConnectedLine);
        }
        match coords[0].sign(scaled_tol::<T>(self.rep.tol(), 1.0)) {
            1 => Ok(Component::Plus),
            -1 => Ok(Component::Minus),
            _ => Err(Error::OffQuadric),
        }
    }

    /// Distinct rational points, from a stereographic-type parametrization of
    /// the quadric over a growing grid of rational parameters. Without a
    /// component, disconnected lines alternate between components.
    pub fn sample_points(&self, count: usize, component: Option<Component>) -> Vec<LinePoint<T>> {
        let c = self.rep.b_square().clone();
        let kind = self.kind();
        // keeps |c| (u^2 + v^2) < 1 on the hyperboloid
        let shrink = if kind == LineKind::Hyperboloid {
            let root = c.to_f64().sqrt().floor() as i64 + 1;
            T::from_rational(&q(1, root))
        } else {
            T::one()
        };
        let abs_c = if c.sign(0.0) < 0 { -c.clone() } else { c.clone() };
        let mut out = Vec::with_capacity(count);
        let mut grid = ParameterGrid::default();
        let mut idx = 0usize;
        while out.len() < count {
            let (u, v) = grid.next_pair();
            let (u, v) = (
                T::from_rational(&u).mul_ref(&shrink),
                T::from_rational(&v).mul_ref(&shrink),
            );
            let sheet = match (kind, component) {
                (LineKind::Sphere, _) => 1,
                (_, Some(comp)) => comp.sign(),
                (_, None) => {
                    if idx.is_multiple_of(2) {
                        1
                    } else {
                        -1
                    }
                }
            };
            idx += 1;
            let two = T::from_i64(2);
            let s = abs_c.mul_ref(&(u.mul_ref(&u) + v.mul_ref(&v)));
            let (x, y, z) = match kind {
                LineKind::Sphere => {
                    let den = T::one() + s.clone();
                    (
                        (T::one() - s) / den.clone(),
                        two.mul_ref(&u) / den.clone(),
                        two * v / den,
                    )
                }
                LineKind::Hyperboloid => {
                    let den = T::one() - s.clone();
                    (
                        (T::one() + s) / den.clone(),
                        two.mul_ref(&u) / den.clone(),
                        two * v / den,
                    )
                }
                LineKind::Planes => (T::one(), two.mul_ref(&u), two * v),
            };
            let sg = T::from_i64(sheet);
            let (x, y, z) = (x * sg.clone(), y * sg.clone(), z * sg);
            let p = self.point(x, y, z).expect("parametrization lies on the quadric");
            out.push(p);
        }
        out
    }
}

/// Rational pairs `(a/2d, b/2d)` with `|a|, |b| <= d`, enumerated by growing
/// `d` without repeats, starting at the origin.
#[derive(Default)]
struct ParameterGrid {
    seen: HashSet<(Rational, Rational)>,
    queue: Vec<(Rational, Rational)>,
    d: i64,
}

impl ParameterGrid {
    fn next_pair(&mut self) -> (Rational, Rational) {
        loop {
            if self.d == 0 {
                self.d = 1;
                let origin = (q(0, 1), q(0, 1));
                self.seen.insert(origin.clone());
                return origin;
            }
            if let Some(p) = self.queue.pop() {
                return p;
            }
            let d = self.d;
            let mut fresh = Vec::new();
            for a in -d..=d {
                for b in -d..=d {
                    let p = (q(a, 2 * d), q(b, 2 * d));
                    if self.seen.insert(p.clone()) {
                        fresh.push(p);
                    }
                }
            }
            // pop from the back yields the enumeration order
            fresh.reverse();
            self.queue = fresh;
            self.d += 1;
        }
    }
}

pub fn line_from_rep<T: Real>(rep: AlgebraRep<T>) -> TwistorLine<T> {
    TwistorLine::new(rep)
}

/// The unique line through two independent points. The second generator is
/// normalized whenever `|c|` has a square root in the domain.
pub fn line_through<T: Real>(l1: &Matrix<T>, l2: &Matrix<T>, tol: f64) -> Result<TwistorLine<T>> {
    let pc = classify_pair(l1, l2, tol)?;
    let b = if pc.epsilon == 0 {
        pc.b_raw
    } else {
        let abs_c = if pc.epsilon < 0 { -pc.c.clone() } else { pc.c.clone() };
        match abs_c.try_sqrt() {
            Some(r) => pc.b_raw.scale(&(T::one() / r)),
            None => pc.b_raw,
        }
    };
    Ok(TwistorLine::new(AlgebraRep::from_generators(pc.i, b, tol)?))
}

/// Same type and same span of generators.
pub fn equal_lines<T: Real>(s1: &TwistorLine<T>, s2: &TwistorLine<T>) -> bool {
    if s1.epsilon() != s2.epsilon() || s1.rep.dim() != s2.rep.dim() {
        return false;
    }
    let d = s1.rep.dim();
    let gens = |r: &AlgebraRep<T>| vec![r.i().vectorize(), r.b().vectorize(), r.k_mat().vectorize()];
    let mut cols = gens(&s1.rep);
    cols.extend(gens(&s2.rep));
    let tol = if T::EXACT {
        0.0
    } else {
        s1.rep.tol().max(crate::scalar::DEFAULT_TOL)
    };
    rank(&Matrix::from_cols(d * d, &cols), tol) == 3
}

pub fn line_to_json<T: Real + JsonScalar>(line: &TwistorLine<T>) -> Value {
    json!({"rep": rep_to_json(line.rep()), "type": line.kind().as_str()})
}

pub fn line_from_json<T: Real + JsonScalar>(v: &Value, tol: f64) -> Result<TwistorLine<T>> {
    let rep = v
        .get("rep")
        .ok_or_else(|| Error::Malformed("line lacks \"rep\"".into()))?;
    let line = TwistorLine::new(rep_from_json(rep, tol)?);
    if let Some(t) = v.get("type") {
        let t = t
            .as_str()
            .ok_or_else(|| Error::Malformed("line type must be a string".into()))?;
        if t != line.kind().as_str() {
            return Err(Error::InvalidRep(format!(
                "declared {t} line, generators give {}",
                line.kind().as_str()
            )));
        }
    }
    Ok(line)
}

pub fn point_to_json<T: JsonScalar>(p: &LinePoint<T>) -> Value {
    json!({"coords": p.coords.iter().map(JsonScalar::to_json).collect::<Vec<_>>()})
}

pub fn coords_from_json<T: JsonScalar>(v: &Value) -> Result<[T; 3]> {
    let arr = v
        .get("coords")
        .unwrap_or(v)
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::Malformed("point needs three coordinates".into()))?;
    Ok([T::from_json(&arr[0])?, T::from_json(&arr[1])?, T::from_json(&arr[2])?])
}
