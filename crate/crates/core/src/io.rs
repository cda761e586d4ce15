//! Instance files and stable report output.
//!
//! Instance schema:
//! `{"n1","n2","m1","m2","l","c","first_stage":{"A","b","lb","ub","binary"},
//! "W","Q","q","T":{"base","coeffs","sign"},"h":{"base","H"},
//! "ambiguity":{"p","theta","support_q","support_T","samples_q","samples_T"}}`.
//! `p` is a number or `"inf"`; infinite bounds are `"inf"`/`"-inf"`;
//! supports are `"continuous"`, `"binary"` or `{"singleton": [..]}`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{DrtspError, Result};
use crate::model::{
    AffineMatrixMap, AffineVectorMap, AmbiguitySet, DrtspInstance, FirstStage, Matrix, NormP, SignMark, SupportKind,
};
use crate::validate::{check_ambiguity, check_dimensions};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Real {
    Num(f64),
    Text(String),
}

impl Real {
    fn value(&self, path: &str) -> Result<f64> {
        match self {
            Real::Num(v) => Ok(*v),
            Real::Text(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                _ => Err(DrtspError::Parse(format!("{}: expected a number or \"inf\", got {:?}", path, s))),
            },
        }
    }

    fn of(v: f64) -> Real {
        if v == f64::INFINITY {
            Real::Text("inf".into())
        } else if v == f64::NEG_INFINITY {
            Real::Text("-inf".into())
        } else {
            Real::Num(v)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SupportFile {
    Continuous,
    Binary,
    Singleton(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FirstStageFile {
    #[serde(rename = "A", default)]
    a: Matrix,
    #[serde(default)]
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lb: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ub: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    binary: Option<Vec<bool>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TFile {
    base: Matrix,
    #[serde(default)]
    coeffs: Vec<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sign: Option<Vec<Vec<SignMark>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HFile {
    base: Vec<f64>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    h: Option<Matrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmbiguityFile {
    p: Real,
    theta: f64,
    support_q: SupportFile,
    #[serde(rename = "support_T")]
    support_t: SupportFile,
    #[serde(default)]
    samples_q: Matrix,
    #[serde(rename = "samples_T", default)]
    samples_t: Matrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n1: usize,
    n2: usize,
    m1: usize,
    m2: usize,
    l: usize,
    #[serde(default)]
    c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first_stage: Option<FirstStageFile>,
    #[serde(rename = "W")]
    w: Matrix,
    #[serde(rename = "Q")]
    q_mat: Matrix,
    q: Vec<f64>,
    #[serde(rename = "T")]
    t: TFile,
    h: HFile,
    ambiguity: AmbiguityFile,
}

fn support(s: SupportFile) -> SupportKind {
    match s {
        SupportFile::Continuous => SupportKind::Continuous,
        SupportFile::Binary => SupportKind::Binary,
        SupportFile::Singleton(v) => SupportKind::Singleton(v),
    }
}

fn support_file(s: &SupportKind) -> SupportFile {
    match s {
        SupportKind::Continuous => SupportFile::Continuous,
        SupportKind::Binary => SupportFile::Binary,
        SupportKind::Singleton(v) => SupportFile::Singleton(v.clone()),
    }
}

fn reals(v: Option<Vec<Real>>, n: usize, default: f64, path: &str) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![default; n]),
        Some(v) => v.iter().enumerate().map(|(k, r)| r.value(&format!("{}[{}]", path, k))).collect(),
    }
}

fn convert(f: InstanceFile) -> Result<(DrtspInstance, AmbiguitySet)> {
    let n1 = f.n1;
    let fs = match f.first_stage {
        None => FirstStage::free(n1),
        Some(fs) => FirstStage {
            lb: reals(fs.lb, n1, f64::NEG_INFINITY, "first_stage.lb")?,
            ub: reals(fs.ub, n1, f64::INFINITY, "first_stage.ub")?,
            binary: fs.binary.unwrap_or_else(|| vec![false; n1]),
            a: fs.a,
            b: fs.b,
        },
    };
    let sign = match f.t.sign {
        Some(s) => s,
        None => AffineMatrixMap::constant(f.t.base.clone()).sign,
    };
    let l = f.h.base.len();
    let coeffs = if f.t.coeffs.is_empty() && n1 > 0 {
        let zero = vec![vec![0.0; f.t.base.first().map_or(0, |r| r.len())]; f.t.base.len()];
        vec![zero; n1]
    } else {
        f.t.coeffs
    };
    let h = AffineVectorMap { coeffs: f.h.h.unwrap_or_else(|| vec![vec![0.0; n1]; l]), base: f.h.base };
    let c = if f.c.is_empty() { vec![0.0; n1] } else { f.c };
    let inst = DrtspInstance {
        n1,
        n2: f.n2,
        m1: f.m1,
        m2: f.m2,
        l: f.l,
        c,
        first_stage: fs,
        w: f.w,
        q_mat: f.q_mat,
        q: f.q,
        t: AffineMatrixMap { base: f.t.base, coeffs, sign },
        h,
    };
    let a = f.ambiguity;
    let p = match a.p.value("ambiguity.p")? {
        v if v == f64::INFINITY => NormP::Inf,
        v if v >= 1.0 => NormP::Finite(v),
        v => return Err(DrtspError::Parse(format!("ambiguity.p: norm exponent {} is below 1", v))),
    };
    let support_q = support(a.support_q);
    let support_t = support(a.support_t);
    let (mut samples_q, mut samples_t) = (a.samples_q, a.samples_t);
    // A singleton block may omit its samples.
    if let (true, SupportKind::Singleton(v)) = (samples_q.is_empty(), &support_q) {
        samples_q = vec![v.clone(); samples_t.len().max(1)];
    }
    if let (true, SupportKind::Singleton(v)) = (samples_t.is_empty(), &support_t) {
        samples_t = vec![v.clone(); samples_q.len().max(1)];
    }
    let amb = AmbiguitySet { p, theta: a.theta, samples_q, samples_t, support_q, support_t };
    check_dimensions(&inst)?;
    check_ambiguity(&inst, &amb)?;
    Ok((inst, amb))
}

/// Parses an instance document, reporting the field path and position of
/// the first problem.
pub fn parse_instance(text: &str) -> Result<(DrtspInstance, AmbiguitySet)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let f: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.inner();
        let at = if path == "." { String::new() } else { format!("{}: ", path) };
        DrtspError::Parse(format!("{}{} (line {}, column {})", at, inner, inner.line(), inner.column()))
    })?;
    convert(f)
}

pub fn load_instance(path: &Path) -> Result<(DrtspInstance, AmbiguitySet)> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text).map_err(|e| match e {
        DrtspError::Parse(m) => DrtspError::Parse(format!("{}: {}", path.display(), m)),
        other => other,
    })
}

/// Instance document in the schema above.
pub fn instance_to_value(inst: &DrtspInstance, amb: &AmbiguitySet) -> Value {
    let fs = &inst.first_stage;
    let f = InstanceFile {
        n1: inst.n1,
        n2: inst.n2,
        m1: inst.m1,
        m2: inst.m2,
        l: inst.l,
        c: inst.c.clone(),
        first_stage: Some(FirstStageFile {
            a: fs.a.clone(),
            b: fs.b.clone(),
            lb: Some(fs.lb.iter().map(|&v| Real::of(v)).collect()),
            ub: Some(fs.ub.iter().map(|&v| Real::of(v)).collect()),
            binary: Some(fs.binary.clone()),
        }),
        w: inst.w.clone(),
        q_mat: inst.q_mat.clone(),
        q: inst.q.clone(),
        t: TFile { base: inst.t.base.clone(), coeffs: inst.t.coeffs.clone(), sign: Some(inst.t.sign.clone()) },
        h: HFile { base: inst.h.base.clone(), h: Some(inst.h.coeffs.clone()) },
        ambiguity: AmbiguityFile {
            p: match amb.p {
                NormP::Inf => Real::Text("inf".into()),
                NormP::Finite(v) => Real::Num(v),
            },
            theta: amb.theta,
            support_q: support_file(&amb.support_q),
            support_t: support_file(&amb.support_t),
            samples_q: amb.samples_q.clone(),
            samples_t: amb.samples_t.clone(),
        },
    };
    serde_json::to_value(f).expect("instance documents hold only finite numbers and strings")
}

pub fn instance_to_json(inst: &DrtspInstance, amb: &AmbiguitySet) -> String {
    to_stable_json(&instance_to_value(inst, amb))
}

/// `%.9g`.
pub fn fmt_g9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.8e}", v);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..9).contains(&exp) {
        format!("{}e{}{:02}", trim(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim(&format!("{:.*}", (8 - exp) as usize, v))
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{}", i).unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{}", u).unwrap();
            } else {
                out.push_str(&fmt_g9(n.as_f64().expect("finite number")));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) => {
            // Arrays of scalars stay on one line.
            if a.iter().all(|e| !e.is_array() && !e.is_object()) {
                out.push('[');
                for (k, e) in a.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, e, indent);
                }
                out.push(']');
            } else {
                out.push_str("[\n");
                for (k, e) in a.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    write_value(out, e, indent + 1);
                    out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_value(out, &m[key.as_str()], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// JSON with sorted keys and `%.9g` floats, newline terminated.
pub fn to_stable_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

/// Serializes any report through [`to_stable_json`]. Non-finite floats
/// become `null`.
pub fn report_json<T: Serialize>(report: &T) -> Result<String> {
    let v = serde_json::to_value(report).map_err(|e| DrtspError::Parse(format!("serializing report: {}", e)))?;
    Ok(to_stable_json(&v))
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
pub fn write_report(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}
