use albker::curves::analysis::{analyze_curve, CurveAnalysis};
use albker::engine::{analyze_product, construct_tower, CurveInput, ItemError};
use albker::mackey::{image_of_sp, setup, torsion_generation_check};
use albker::padic::{parse_element, LocalField};
use albker::ramify::{extract_second_level, psi_kummer_unit, psi_tower_closed_form, psi_uniformizer};
use albker::symbols::build_gram;
use albker::units::{graded_quotient_order, is_norm, Level, UnitsModP};
use albker::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::spec::{Command, JobSpec, PsiKind};
use crate::InputError;

pub enum Failure {
    Input(InputError),
    Computation(Error),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Computation(e)
    }
}

pub struct Output {
    pub result: Value,
    /// per-item failures: {path, kind, message}
    pub errors: Vec<Value>,
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn item_error(path: String, e: &ItemError) -> Value {
    json!({"path": path, "kind": e.kind, "message": e.message})
}

fn invalid(path: &str, message: impl Into<String>) -> Failure {
    Failure::Input(InputError::Invalid { path: path.into(), message: message.into() })
}

pub fn dispatch(command: Command, spec: &JobSpec) -> Result<Output, Failure> {
    let k = spec.build_field()?;
    match command {
        Command::Analyze => analyze(spec, &k),
        Command::Reduction => reduction(spec, &k),
        Command::Filtration => filtration(&k),
        Command::Symbol => symbol(spec, &k),
        Command::Psi => psi(spec, &k),
        Command::Mackey => mackey(spec, &k),
        Command::Tower => tower(spec, &k),
    }
}

fn analyze(spec: &JobSpec, k: &LocalField) -> Result<Output, Failure> {
    let curves = spec.build_curves(k)?;
    if curves.len() < 2 {
        return Err(invalid("curves", "a product needs at least two curves"));
    }
    let report = analyze_product(&curves, spec.caps, spec.seed)?;
    let mut errors = Vec::new();
    for c in &report.curves {
        if let Some(e) = &c.error {
            errors.push(item_error(format!("curves.{}", c.label), e));
        }
    }
    for p in &report.pairs {
        if let Some(e) = &p.error {
            errors.push(item_error(format!("pairs.{}.{}", p.labels.0, p.labels.1), e));
        }
    }
    Ok(Output { result: to_value(&report), errors })
}

fn reduction(spec: &JobSpec, k: &LocalField) -> Result<Output, Failure> {
    let curves = spec.build_curves(k)?;
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for c in &curves {
        match analyze_curve(&c.label, &c.curve, c.cm, spec.caps.curve_caps()) {
            Ok(a) => items.push(json!({"label": c.label, "analysis": to_value(&a)})),
            Err(e) => {
                let ie = ItemError::from(&e);
                errors.push(item_error(format!("curves.{}", c.label), &ie));
                items.push(json!({"label": c.label, "error": to_value(&ie)}));
            }
        }
    }
    Ok(Output { result: json!({"curves": items}), errors })
}

fn level_json(l: &Level) -> Value {
    to_value(l)
}

fn filtration(k: &LocalField) -> Result<Output, Failure> {
    let units = UnitsModP::new(k)?;
    let p = k.p();
    let mut graded = Vec::new();
    let mut total: u128 = 1;
    if units.has_mu_p() {
        let top = units.top_level()?;
        for i in 0..=top {
            let closed = graded_quotient_order(k, i)?;
            let from_basis = units.graded_order_from_basis(i);
            total = total.saturating_mul(closed as u128);
            graded.push(json!({"level": i, "order": closed, "order_from_basis": from_basis}));
        }
    } else {
        let mut levels: Vec<u64> = units.levels().iter().filter_map(Level::index).collect();
        levels.sort_unstable();
        levels.dedup();
        for i in levels {
            let from_basis = units.graded_order_from_basis(i);
            total = total.saturating_mul(from_basis as u128);
            graded.push(json!({"level": i, "order_from_basis": from_basis}));
        }
    }
    let result = json!({
        "p": p,
        "e": k.e(),
        "f": k.f(),
        "mu_p": units.has_mu_p(),
        "dim": units.dim(),
        "basis_levels": units.levels().iter().map(level_json).collect::<Vec<_>>(),
        "graded": graded,
        "unit_part_order": total.to_string(),
    });
    Ok(Output { result, errors: Vec::new() })
}

fn symbol(spec: &JobSpec, k: &LocalField) -> Result<Output, Failure> {
    let Some(pairs) = &spec.params.pairs else {
        return Err(invalid("params.pairs", "the symbol command needs params.pairs"));
    };
    let mut parsed = Vec::with_capacity(pairs.len());
    for (i, (x, y)) in pairs.iter().enumerate() {
        let px = parse_element(k, x).map_err(|e| invalid(&format!("params.pairs[{i}][0]"), e.to_string()))?;
        let py = parse_element(k, y).map_err(|e| invalid(&format!("params.pairs[{i}][1]"), e.to_string()))?;
        parsed.push((px, py));
    }
    let gram = build_gram(k)?;
    let mut items = Vec::new();
    let mut errors = Vec::new();
    for (i, ((x, y), (sx, sy))) in parsed.iter().zip(pairs).enumerate() {
        let value = gram.gp(x, y);
        let norm = is_norm(k, y, x);
        match (value, norm) {
            (Ok(v), Ok(n)) => {
                if v.is_zero() != n {
                    errors.push(json!({"path": format!("params.pairs[{i}]"), "kind": "PrecisionExhausted",
                        "message": "the symbol and the norm test disagree"}));
                }
                items.push(json!({"x": sx, "y": sy, "vanishes": v.is_zero(), "y_is_norm_from_x": n}));
            }
            (Err(e), _) | (_, Err(e)) => {
                let ie = ItemError::from(&e);
                errors.push(item_error(format!("params.pairs[{i}]"), &ie));
                items.push(json!({"x": sx, "y": sy, "error": to_value(&ie)}));
            }
        }
    }
    let mut result = json!({"pairs": items, "pairing_rank": gram.rank(), "dim": gram.dim()});
    if spec.params.gram == Some(true) {
        result["gram"] = to_value(&gram.report());
    }
    Ok(Output { result, errors })
}

fn psi(spec: &JobSpec, k: &LocalField) -> Result<Output, Failure> {
    let kind = spec.params.kind.ok_or_else(|| invalid("params.kind", "the psi command needs params.kind"))?;
    let level = || spec.params.level.ok_or_else(|| invalid("params.level", "this psi kind needs params.level"));
    let result = match kind {
        PsiKind::KummerUnit => {
            let f = psi_kummer_unit(k, level()?)?;
            json!({"kind": "kummer_unit", "breaks": f.breaks().iter().map(|b| b.to_string()).collect::<Vec<_>>(), "psi": to_value(&f)})
        }
        PsiKind::Uniformizer => {
            let f = psi_uniformizer(k)?;
            json!({"kind": "uniformizer", "breaks": f.breaks().iter().map(|b| b.to_string()).collect::<Vec<_>>(), "psi": to_value(&f)})
        }
        PsiKind::Tower => {
            let i = level()?;
            let (p, e) = (k.p() as i64, k.e() as i64);
            let first = psi_kummer_unit(k, i)?;
            let composite = psi_tower_closed_form(p, e, i)?;
            let j = extract_second_level(&composite, &first, p, e)?;
            json!({
                "kind": "tower",
                "first": to_value(&first),
                "composite": to_value(&composite),
                "breaks": composite.breaks().iter().map(|b| b.to_string()).collect::<Vec<_>>(),
                "second_level": j,
            })
        }
    };
    Ok(Output { result, errors: Vec::new() })
}

fn pick_pair<'a>(spec: &JobSpec, curves: &'a [CurveInput]) -> Result<(&'a CurveInput, &'a CurveInput), Failure> {
    let find = |label: &str| {
        curves.iter().find(|c| c.label == label).ok_or_else(|| invalid("params.pair", format!("no curve labelled '{label}'")))
    };
    match &spec.params.pair {
        Some((a, b)) => Ok((find(a)?, find(b)?)),
        None if curves.len() >= 2 => Ok((&curves[0], &curves[1])),
        None => Err(invalid("curves", "two curves are needed")),
    }
}

fn analyzed_pair(spec: &JobSpec, k: &LocalField) -> Result<(CurveAnalysis, CurveAnalysis), Failure> {
    let curves = spec.build_curves(k)?;
    let (a, b) = pick_pair(spec, &curves)?;
    let caps = spec.caps.curve_caps();
    Ok((analyze_curve(&a.label, &a.curve, a.cm, caps)?, analyze_curve(&b.label, &b.curve, b.cm, caps)?))
}

fn mackey(spec: &JobSpec, k: &LocalField) -> Result<Output, Failure> {
    let (c1, c2) = analyzed_pair(spec, k)?;
    let n = c1.rationality_level.min(c2.rationality_level);
    let s = setup(&c1, &c2, n.max(1), spec.caps.sample_budget, spec.seed)?;
    let img = image_of_sp(&c1, &c2, &s)?;
    let mut result = json!({"pair": [c1.label, c2.label], "n": n, "image": to_value(&img)});
    if n >= 1 {
        result["torsion_generation"] = to_value(&torsion_generation_check(&img, n, k.p()));
    }
    Ok(Output { result, errors: Vec::new() })
}

fn tower(spec: &JobSpec, k: &LocalField) -> Result<Output, Failure> {
    let (c1, c2) = analyzed_pair(spec, k)?;
    let t = construct_tower(&c1, &c2, spec.caps)?;
    Ok(Output { result: json!({"pair": [c1.label, c2.label], "tower": to_value(&t)}), errors: Vec::new() })
}
