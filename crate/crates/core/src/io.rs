//! Serialized forms: roof functions with rational-string values, measures,
//! models, and CSV emitters for orbits and linking matrices.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Orbit3D;
use crate::scalar::Rational;
use crate::shift::{Symbol, Word};
use crate::suspension::{CylinderFunction, RoofFunction};
use crate::thermo::MarkovMeasure;

/// Parse a value written as `a/b`, an integer, or a decimal.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: i64 = num
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad numerator in {s:?}")))?;
        let d: i64 = den
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad denominator in {s:?}")))?;
        if d == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(Ratio::new(n, d));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(Ratio::from_integer(n));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let i: i64 = int
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad number {s:?}")))?;
        if frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidInput(format!("bad decimal {s:?}")));
        }
        let f: i64 = if frac.is_empty() { 0 } else { frac.parse().unwrap() };
        let den = 10i64.pow(frac.len() as u32);
        return Ok(Ratio::from_integer(i) + Ratio::new(sign * f, den));
    }
    Err(Error::InvalidInput(format!("cannot parse {s:?} as a rational")))
}

fn format_rational(r: Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse a word written as digits (`"011"`) or comma-separated symbols
/// (`"0,11,3"` for alphabets past 10).
pub fn parse_word(key: &str) -> Result<Word> {
    let symbols: Vec<Symbol> = if key.contains(',') {
        key.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad word key {key:?}")))
            })
            .collect::<Result<_>>()?
    } else {
        key.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::InvalidInput(format!("bad word key {key:?}")))
            })
            .collect::<Result<_>>()?
    };
    if symbols.is_empty() {
        return Err(Error::InvalidInput("empty word key".into()));
    }
    Ok(Word::new(symbols))
}

fn format_word_key(w: &Word) -> String {
    if w.0.iter().all(|&s| s < 10) {
        w.0.iter().map(|s| s.to_string()).collect()
    } else {
        w.0.iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Roof function on disk: a cylinder depth and rational-string values
/// keyed by word (digits, or comma-separated symbols for large alphabets).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoofSpec {
    pub depth: usize,
    pub values: BTreeMap<String, String>,
}

impl RoofSpec {
    pub fn to_roof_f64(&self) -> Result<RoofFunction<f64>> {
        let mut map = HashMap::new();
        for (k, v) in &self.values {
            let r = parse_rational(v)?;
            map.insert(parse_word(k)?, *r.numer() as f64 / *r.denom() as f64);
        }
        RoofFunction::new(CylinderFunction::new(self.depth, map)?)
    }

    pub fn to_roof_rational(&self) -> Result<RoofFunction<Rational>> {
        let mut map = HashMap::new();
        for (k, v) in &self.values {
            map.insert(parse_word(k)?, parse_rational(v)?);
        }
        RoofFunction::new(CylinderFunction::new(self.depth, map)?)
    }

    pub fn from_roof_rational(roof: &RoofFunction<Rational>) -> Self {
        RoofSpec {
            depth: roof.depth(),
            values: roof
                .as_cylinder()
                .values()
                .iter()
                .map(|(w, &v)| (format_word_key(w), format_rational(v)))
                .collect(),
        }
    }
}

/// Measure on disk, tagged by kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeasureSpec {
    Bernoulli {
        weights: Vec<f64>,
    },
    Markov {
        #[serde(rename = "P")]
        p: Vec<Vec<f64>>,
        pi: Vec<f64>,
    },
}

impl MeasureSpec {
    pub fn to_measure(&self) -> Result<MarkovMeasure<f64>> {
        match self {
            MeasureSpec::Bernoulli { weights } => MarkovMeasure::bernoulli(weights.clone()),
            MeasureSpec::Markov { p, pi } => MarkovMeasure::markov(p.clone(), pi.clone()),
        }
    }

    pub fn from_measure(m: &MarkovMeasure<f64>) -> Self {
        match m {
            MarkovMeasure::Bernoulli { weights } => MeasureSpec::Bernoulli {
                weights: weights.clone(),
            },
            MarkovMeasure::Markov { p, pi } => MeasureSpec::Markov {
                p: p.clone(),
                pi: pi.clone(),
            },
        }
    }
}

/// CSV polyline `t,x,y,z` for one orbit.
pub fn orbit_csv(orbit: &Orbit3D) -> String {
    let mut out = String::from("t,x,y,z\n");
    for (t, v) in orbit.times.iter().zip(&orbit.vertices) {
        out.push_str(&format!("{t},{},{},{}\n", v.x, v.y, v.z));
    }
    out
}

/// Symmetric linking matrix as CSV with row/column labels.
pub fn linking_matrix_csv(labels: &[String], matrix: &[Vec<i64>]) -> String {
    let mut out = String::from("label");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (l, row) in labels.iter().zip(matrix) {
        out.push_str(l);
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
