//! The job file: field, curves, caps and per-command parameters.

use albker::curves::WeierstrassCurve;
use albker::engine::{Caps, CurveInput};
use albker::padic::{parse_element, parse_rational, LocalField};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::InputError;

pub const SCHEMA: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Reduction,
    Filtration,
    Symbol,
    Psi,
    Mackey,
    Tower,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Reduction => "reduction",
            Command::Filtration => "filtration",
            Command::Symbol => "symbol",
            Command::Psi => "psi",
            Command::Mackey => "mackey",
            Command::Tower => "tower",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub p: u64,
    #[serde(default = "one")]
    pub f: usize,
    /// coefficients c_0, ..., c_e of an Eisenstein polynomial, constant term first
    #[serde(default)]
    pub eisenstein: Option<Vec<String>>,
    pub precision: i64,
}

fn one() -> usize {
    1
}

fn zero() -> String {
    "0".to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub label: String,
    #[serde(default = "zero")]
    pub a1: String,
    #[serde(default = "zero")]
    pub a2: String,
    #[serde(default = "zero")]
    pub a3: String,
    #[serde(default = "zero")]
    pub a4: String,
    #[serde(default = "zero")]
    pub a6: String,
    #[serde(default)]
    pub cm: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiKind {
    KummerUnit,
    Uniformizer,
    Tower,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `symbol`: pairs of field literals
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(String, String)>>,
    /// `symbol`: include the Gram matrix of the filtered basis
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<bool>,
    /// `psi`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<PsiKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<i64>,
    /// `mackey` and `tower`: labels of the two factors
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub field: FieldSpec,
    #[serde(default)]
    pub curves: Vec<CurveSpec>,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Invalid { path: path.into(), message: message.into() }
}

fn parse_integer(path: &str, s: &str) -> Result<BigInt, InputError> {
    let (n, d) = parse_rational(s).map_err(|e| invalid(path, e.to_string()))?;
    if d != BigInt::from(1) {
        return Err(invalid(path, format!("'{s}' is not an integer")));
    }
    Ok(n)
}

fn normalize_literal(s: &str) -> String {
    match parse_rational(s) {
        Ok((n, d)) if d == BigInt::from(1) => n.to_string(),
        Ok((n, d)) => format!("{n}/{d}"),
        Err(_) => s.split_whitespace().collect(),
    }
}

impl JobSpec {
    pub fn from_json(text: &str) -> Result<JobSpec, InputError> {
        let spec: JobSpec = serde_json::from_str(text).map_err(|e| InputError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if spec.schema != SCHEMA {
            return Err(invalid("schema", format!("unsupported schema '{}', expected '{SCHEMA}'", spec.schema)));
        }
        Ok(spec)
    }

    /// Canonical literals; the result parses back to itself.
    pub fn normalized(&self) -> JobSpec {
        let mut s = self.clone();
        if let Some(c) = s.field.eisenstein.as_mut() {
            c.iter_mut().for_each(|x| *x = normalize_literal(x));
        }
        for c in &mut s.curves {
            for a in [&mut c.a1, &mut c.a2, &mut c.a3, &mut c.a4, &mut c.a6] {
                *a = normalize_literal(a);
            }
        }
        if let Some(pairs) = s.params.pairs.as_mut() {
            for (x, y) in pairs {
                *x = normalize_literal(x);
                *y = normalize_literal(y);
            }
        }
        s
    }

    pub fn build_field(&self) -> Result<LocalField, InputError> {
        let eis = match &self.field.eisenstein {
            None => None,
            Some(c) => Some(
                c.iter()
                    .enumerate()
                    .map(|(i, x)| parse_integer(&format!("field.eisenstein[{i}]"), x))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        LocalField::new(self.field.p, self.field.f, eis.as_deref(), self.field.precision).map_err(|e| invalid("field", e.to_string()))
    }

    pub fn build_curves(&self, k: &LocalField) -> Result<Vec<CurveInput>, InputError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::with_capacity(self.curves.len());
        for (i, c) in self.curves.iter().enumerate() {
            if !seen.insert(c.label.as_str()) {
                return Err(invalid(format!("curves[{i}].label"), format!("duplicate label '{}'", c.label)));
            }
            let names = ["a1", "a2", "a3", "a4", "a6"];
            let raw = [&c.a1, &c.a2, &c.a3, &c.a4, &c.a6];
            let mut coeffs = Vec::with_capacity(5);
            for (name, s) in names.iter().zip(raw) {
                coeffs.push(parse_element(k, s).map_err(|e| invalid(format!("curves[{i}].{name}"), e.to_string()))?);
            }
            let a: [_; 5] = coeffs.try_into().expect("five coefficients");
            let curve = WeierstrassCurve::new(k, a).map_err(|e| invalid(format!("curves[{i}]"), e.to_string()))?;
            out.push(CurveInput { label: c.label.clone(), curve, cm: c.cm });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"schema":"1","field":{"p":2,"precision":30}}"#;

    #[test]
    fn defaults_fill_in() {
        let s = JobSpec::from_json(MINIMAL).unwrap();
        assert_eq!(s.field.f, 1);
        assert_eq!(s.caps, Caps::default());
        assert!(s.curves.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = r#"{"schema":"1","field":{"p":2,"precision":30},"extra":1}"#;
        assert!(matches!(JobSpec::from_json(bad), Err(InputError::Json { .. })));
        let bad = r#"{"schema":"1","field":{"p":2,"precision":30},"caps":{"n_cap":2,"depth":1}}"#;
        assert!(JobSpec::from_json(bad).is_err());
    }

    #[test]
    fn floats_are_rejected() {
        assert!(JobSpec::from_json(r#"{"schema":"1","field":{"p":2.0,"precision":30}}"#).is_err());
    }

    #[test]
    fn normalization_is_idempotent() {
        let text = r#"{"schema":"1","field":{"p":3,"precision":20},
            "curves":[{"label":"E","a1":"2/4","a4":"-06","a6":"1 + 3 * pi"}],
            "params":{"pairs":[["-2/-4","9"]]}}"#;
        let s = JobSpec::from_json(text).unwrap().normalized();
        assert_eq!(s.curves[0].a1, "1/2");
        assert_eq!(s.curves[0].a4, "-6");
        assert_eq!(s.curves[0].a6, "1+3*pi");
        assert_eq!(s.params.pairs.as_ref().unwrap()[0].0, "1/2");
        let again = JobSpec::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again.normalized(), s);
    }

    #[test]
    fn eisenstein_must_be_integral() {
        let s = JobSpec::from_json(r#"{"schema":"1","field":{"p":2,"eisenstein":["2","1/2","1"],"precision":20}}"#).unwrap();
        assert!(s.build_field().is_err());
        let s = JobSpec::from_json(r#"{"schema":"1","field":{"p":2,"eisenstein":["2","2","1"],"precision":20}}"#).unwrap();
        assert_eq!(s.build_field().unwrap().e(), 2);
    }
}
