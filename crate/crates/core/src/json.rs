//! Matrix wire format: `{"rows","cols","domain","entries"}` with exact entries
//! as `"p/q"` strings and complex entries as `[re, im]` pairs.

use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Complex, Rational, Real, Scalar};

pub trait JsonScalar: Scalar {
    const DOMAIN: &'static str;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

fn parse_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => Rational::from_str(s.trim()).map_err(|_| malformed(format!("bad rational {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .map(Rational::from_i64)
            .ok_or_else(|| malformed(format!("exact entry {n} must be an integer or a \"p/q\" string"))),
        other => Err(malformed(format!("expected a rational, got {other}"))),
    }
}

impl JsonScalar for Rational {
    const DOMAIN: &'static str = "exact";

    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }

    fn from_json(v: &Value) -> Result<Self> {
        parse_rational(v)
    }
}

impl JsonScalar for f64 {
    const DOMAIN: &'static str = "float";

    fn to_json(&self) -> Value {
        json!(self)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| malformed("non-finite number")),
            Value::String(_) => Ok(parse_rational(v)?.to_f64()),
            other => Err(malformed(format!("expected a number, got {other}"))),
        }
    }
}

impl<T: JsonScalar + Real> JsonScalar for Complex<T> {
    const DOMAIN: &'static str = T::DOMAIN;

    fn to_json(&self) -> Value {
        Value::Array(vec![self.re.to_json(), self.im.to_json()])
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Array(parts) if parts.len() == 2 => {
                Ok(Complex::new(T::from_json(&parts[0])?, T::from_json(&parts[1])?))
            }
            Value::Array(_) => Err(malformed("complex entries need exactly [re, im]")),
            real => Ok(Complex::new(T::from_json(real)?, T::zero())),
        }
    }
}

pub fn matrix_to_json<T: JsonScalar>(m: &Matrix<T>) -> Value {
    json!({
        "rows": m.rows(),
        "cols": m.cols(),
        "domain": T::DOMAIN,
        "entries": m.entries().iter().map(JsonScalar::to_json).collect::<Vec<_>>(),
    })
}

/// Parses a matrix. Float targets also accept exact payloads.
pub fn matrix_from_json<T: JsonScalar>(v: &Value) -> Result<Matrix<T>> {
    let obj = v.as_object().ok_or_else(|| malformed("matrix must be a JSON object"))?;
    let dim = |key: &str| {
        obj.get(key)
            .and_then(Value::as_u64)
            .map(|x| x as usize)
            .ok_or_else(|| malformed(format!("matrix field {key:?} missing or not a count")))
    };
    let (rows, cols) = (dim("rows")?, dim("cols")?);
    let domain = obj.get("domain").and_then(Value::as_str).unwrap_or(T::DOMAIN);
    if domain != "exact" && domain != "float" {
        return Err(malformed(format!("unknown domain {domain:?}")));
    }
    if domain == "float" && T::EXACT {
        return Err(malformed("float payload supplied where exact entries are required"));
    }
    let entries = obj
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("matrix field \"entries\" missing"))?;
    if entries.len() != rows * cols {
        return Err(malformed(format!(
            "{} entries for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let data = entries.iter().map(T::from_json).collect::<Result<Vec<_>>>()?;
    Matrix::from_vec(rows, cols, data)
}
