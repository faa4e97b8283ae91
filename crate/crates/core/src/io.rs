//! JSON ingestion and emission.
//!
//! Inputs are parsed into `f64` records and converted to the target scalar.
//! Output numbers that are exact integers are written without a fractional
//! part so `-2.0` prints as `-2`.

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::energy::BoundCheck;
use crate::experiments::Verdict;
use crate::solver::{Certificate, Regime, SolveReport, StepKind, UniquenessCondition};
use crate::{Atom, DensityGrid, Error, Halfspace, Measure, RadialWeight, Real, Result, Tail};

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum WeightRecord {
    Linear,
    Clamped {
        threshold: f64,
    },
    Piecewise {
        knots: Vec<[f64; 2]>,
        #[serde(default)]
        tail: TailRecord,
    },
    Tabulated {
        samples: Vec<[f64; 2]>,
    },
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum TailRecord {
    #[default]
    Constant,
    Linear,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRecord {
    dim: usize,
    atoms: Option<Vec<AtomRecord>>,
    density: Option<DensityRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRecord {
    point: Vec<f64>,
    weight: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityRecord {
    origin: Vec<f64>,
    extent: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HalfspaceRecord {
    normal: Vec<f64>,
    offset: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum HalfspaceList {
    One(HalfspaceRecord),
    Many(Vec<HalfspaceRecord>),
}

fn parse<'a, R: Deserialize<'a>>(text: &'a str) -> Result<R> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn pairs<T: Real>(v: Vec<[f64; 2]>) -> Vec<(T, T)> {
    v.into_iter().map(|[r, g]| (T::lit(r), T::lit(g))).collect()
}

fn vector<T: Real>(v: Vec<f64>) -> Vec<T> {
    v.into_iter().map(T::lit).collect()
}

pub fn parse_weight<T: Real>(text: &str) -> Result<RadialWeight<T>> {
    match parse::<WeightRecord>(text)? {
        WeightRecord::Linear => Ok(RadialWeight::linear()),
        WeightRecord::Clamped { threshold } => RadialWeight::clamped(T::lit(threshold)),
        WeightRecord::Piecewise { knots, tail } => {
            let tail = match tail {
                TailRecord::Constant => Tail::Constant,
                TailRecord::Linear => Tail::Linear,
            };
            RadialWeight::piecewise(pairs(knots), tail)
        }
        WeightRecord::Tabulated { samples } => RadialWeight::tabulated(pairs(samples)),
    }
}

pub fn parse_measure<T: Real>(text: &str) -> Result<Measure<T>> {
    let rec: MeasureRecord = parse(text)?;
    match (rec.atoms, rec.density) {
        (Some(atoms), None) => {
            let atoms = atoms
                .into_iter()
                .map(|a| Atom::new(vector(a.point), T::lit(a.weight)))
                .collect();
            Measure::from_atoms(rec.dim, atoms)
        }
        (None, Some(d)) => {
            let grid = DensityGrid::new(vector(d.origin), vector(d.extent), d.shape)?;
            if grid.dim() != rec.dim {
                return Err(Error::DimensionMismatch {
                    expected: rec.dim,
                    got: grid.dim(),
                });
            }
            Measure::from_density(&grid, &vector::<T>(d.values))
        }
        _ => Err(Error::InvalidMeasure(
            "exactly one of \"atoms\" or \"density\" is required".into(),
        )),
    }
}

fn halfspace<T: Real>(rec: HalfspaceRecord) -> Result<Halfspace<T>> {
    Halfspace::new(vector(rec.normal), T::lit(rec.offset))
}

pub fn parse_halfspace<T: Real>(text: &str) -> Result<Halfspace<T>> {
    halfspace(parse(text)?)
}

/// A single halfspace or an array of them.
pub fn parse_halfspaces<T: Real>(text: &str) -> Result<Vec<Halfspace<T>>> {
    match parse::<HalfspaceList>(text)? {
        HalfspaceList::One(h) => Ok(vec![halfspace(h)?]),
        HalfspaceList::Many(hs) => hs.into_iter().map(halfspace).collect(),
    }
}

pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// JSON number; exact integers lose their fractional part, non-finite
/// values become `null`.
pub fn number(v: f64) -> Value {
    if !v.is_finite() {
        Value::Null
    } else if v.fract() == 0.0 && v.abs() < 9.0e15 {
        Value::from(v as i64)
    } else {
        Value::from(v)
    }
}

pub fn numbers<T: Real>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|c| number(c.to_f64_lossy())).collect())
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::CompactPositive => "compact-positive",
        Regime::UnboundedPositive => "unbounded-positive",
        Regime::Signed => "signed",
        Regime::Unsupported => "unsupported",
    }
}

fn uniqueness_name(u: UniquenessCondition) -> &'static str {
    match u {
        UniquenessCondition::None => "none",
        UniquenessCondition::StrictlyIncreasing => "strictly-increasing",
        UniquenessCondition::IncreasingNotLineSupported => "increasing-not-line-supported",
    }
}

pub fn certificate_json(c: &Certificate) -> Value {
    let wc = &c.weight_class;
    json!({
        "regime": regime_name(c.regime),
        "existence": c.existence(),
        "uniqueness": c.uniqueness(),
        "uniqueness_condition": uniqueness_name(c.uniqueness_condition),
        "line_supported": c.line_supported,
        "weight_class": {
            "integral_diverges": wc.integral_diverges,
            "strictly_increasing": wc.strictly_increasing,
            "increasing_positive": wc.increasing_positive,
            "bounded": wc.bounded,
            "positive_finite_limit": wc.positive_finite_limit,
        },
    })
}

pub fn report_json<T: Real>(r: &SolveReport<T>) -> Value {
    let trace: Vec<Value> = r
        .trace
        .iter()
        .map(|e| {
            json!({
                "x": numbers(&e.x),
                "energy": number(e.energy.to_f64_lossy()),
                "grad_norm": number(e.grad_norm.to_f64_lossy()),
                "step": match e.step {
                    StepKind::Start => "start",
                    StepKind::Newton => "newton",
                    StepKind::SteepestDescent => "steepest-descent",
                },
            })
        })
        .collect();
    let probe = r.flatness_probe.as_ref().map(|p| {
        p.iter()
            .map(|q| json!({"point": numbers(&q.point), "grad_norm": number(q.grad_norm.to_f64_lossy())}))
            .collect::<Vec<_>>()
    });
    json!({
        "x_c": numbers(&r.x_c),
        "center": numbers(&r.center()),
        "residual": number(r.residual_norm.to_f64_lossy()),
        "grad_tol": number(r.grad_tol.to_f64_lossy()),
        "iterations": r.iterations,
        "renormalized": r.renormalized,
        "existence_certified": r.existence_certified,
        "uniqueness_certified": r.uniqueness_certified,
        "certificates": certificate_json(&r.certificate),
        "flatness_probe": probe,
        "trace": trace,
    })
}

pub fn halfspace_json<T: Real>(h: &Halfspace<T>) -> Value {
    json!({"normal": numbers(h.normal()), "offset": number(h.offset().to_f64_lossy())})
}

pub fn verdict_json(v: &Verdict) -> Value {
    let mut out = Map::new();
    out.insert("name".into(), Value::from(v.name.clone()));
    out.insert("pass".into(), Value::from(v.pass));
    out.insert("details".into(), Value::from(v.details.clone()));
    if let Some(table) = &v.table {
        let rows = table
            .iter()
            .map(|row| {
                let mut o = Map::new();
                o.insert("k".into(), number(row.k));
                o.insert("value".into(), number(row.value));
                if let Some(r) = row.reference {
                    o.insert("reference".into(), number(r));
                }
                Value::Object(o)
            })
            .collect();
        out.insert("table".into(), Value::Array(rows));
    }
    Value::Object(out)
}

/// Tally of one bound over a sample set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BoundTally {
    pub applicable: usize,
    pub held: usize,
    pub violated: usize,
}

impl BoundTally {
    pub fn record(&mut self, b: &BoundCheck) {
        match b {
            BoundCheck::Held => {
                self.applicable += 1;
                self.held += 1;
            }
            BoundCheck::Violated => {
                self.applicable += 1;
                self.violated += 1;
            }
            BoundCheck::Inapplicable(_) => {}
        }
    }

    pub fn to_json(self) -> Value {
        json!({"applicable": self.applicable, "held": self.held, "violated": self.violated})
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_schemas() {
        let w: RadialWeight<f64> = parse_weight(r#"{"kind":"linear"}"#).unwrap();
        assert_eq!(w, RadialWeight::linear());
        let w: RadialWeight<f64> = parse_weight(r#"{"kind":"clamped","threshold":1.0}"#).unwrap();
        assert_eq!(w.eval_g(3.0).unwrap(), 1.0);
        let w: RadialWeight<f64> =
            parse_weight(r#"{"kind":"piecewise","knots":[[0,0],[1,1],[2,3]],"tail":"constant"}"#)
                .unwrap();
        assert_eq!(w.eval_g(1.5).unwrap(), 2.0);
        let w: RadialWeight<f64> =
            parse_weight(r#"{"kind":"piecewise","knots":[[0,0],[1,1]],"tail":"linear"}"#).unwrap();
        assert_eq!(w.eval_g(3.0).unwrap(), 3.0);
        let w: RadialWeight<f32> =
            parse_weight(r#"{"kind":"tabulated","samples":[[0,0],[1,1]]}"#).unwrap();
        assert_eq!(w.eval_g(5.0).unwrap(), 1.0);
    }

    #[test]
    fn measure_schemas() {
        let m: Measure<f64> = parse_measure(
            r#"{"dim":2,"atoms":[{"point":[0,0],"weight":3},{"point":[1,0],"weight":-1}]}"#,
        )
        .unwrap();
        assert_eq!(m.total_mass(), 2.0);
        assert!(m.is_signed());
        let m: Measure<f64> = parse_measure(
            r#"{"dim":2,"density":{"origin":[0,0],"extent":[1,1],"shape":[2,2],"values":[1,1,1,1]}}"#,
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 4);
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parse_errors_carry_position() {
        let e = parse_weight::<f64>("{\n  \"kind\": \"linear\",,\n}").unwrap_err();
        match e {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_weight::<f64>(r#"{"kind":"cubic"}"#),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn measure_needs_exactly_one_source() {
        assert!(matches!(
            parse_measure::<f64>(r#"{"dim":1}"#),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn halfspace_lists() {
        let hs: Vec<Halfspace<f64>> = parse_halfspaces(r#"{"normal":[1,0],"offset":0.5}"#).unwrap();
        assert_eq!(hs.len(), 1);
        let hs: Vec<Halfspace<f64>> =
            parse_halfspaces(r#"[{"normal":[1,0],"offset":0.5},{"normal":[0,1],"offset":0}]"#)
                .unwrap();
        assert_eq!(hs[1].normal(), &[0.0, 1.0]);
    }

    #[test]
    fn integral_numbers_print_without_fraction() {
        assert_eq!(numbers(&[-2.0f64, 0.0, 0.5]).to_string(), "[-2,0,0.5]");
        assert_eq!(number(f64::NAN), Value::Null);
    }
}
