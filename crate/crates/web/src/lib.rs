//! Browser bindings. Every entry point takes and returns strings: a JSON
//! result, or `{"error": "..."}`.

use cylset::constructions::{split_any_crs, split_atom_diag};
use cylset::{eval, parse_term, satisfies, Evaluation, Subset, Term, Unit};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

const MAX_VARS: usize = 16;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn model(unit_json: &str, eval_json: &str) -> Result<(Unit, Evaluation), String> {
    let unit = Unit::from_json(unit_json).map_err(|e| format!("unit: {e}"))?;
    let ev = if eval_json.trim().is_empty() {
        Evaluation::new()
    } else {
        Evaluation::from_json(eval_json, unit.len()).map_err(|e| format!("evaluation: {e}"))?
    };
    Ok((unit, ev))
}

/// Evaluates `term` in the unit; returns `{"term", "sequences"}`.
#[wasm_bindgen]
pub fn eval_term(unit_json: &str, term: &str, eval_json: &str) -> String {
    respond((|| {
        let (unit, ev) = model(unit_json, eval_json)?;
        let t = parse_term(term, MAX_VARS).map_err(|e| e.to_string())?;
        let s = eval(&t, &unit, &ev).map_err(|e| e.to_string())?;
        let seqs: Vec<Vec<u32>> = s
            .positions()
            .into_iter()
            .map(|p| unit.sequences()[p].raw_values())
            .collect();
        Ok(json!({ "term": t.to_string(), "sequences": seqs }))
    })())
}

/// Returns `{"classes": [...], "size": n, "base": [...]}`.
#[wasm_bindgen]
pub fn classify_unit(unit_json: &str) -> String {
    respond((|| {
        let unit = Unit::from_json(unit_json).map_err(|e| format!("unit: {e}"))?;
        let classes: Vec<String> = unit.classify().iter().map(|t| t.to_string()).collect();
        let base: Vec<u32> = unit.base().iter().map(|b| b.0).collect();
        Ok(json!({ "classes": classes, "size": unit.len(), "base": base }))
    })())
}

/// Splits `term` at the first point satisfying it: below `c0 -d01` with the
/// diagonal construction when `class` is `"d"`, otherwise by relabelling.
#[wasm_bindgen]
pub fn split_demo(unit_json: &str, term: &str, eval_json: &str, class: &str) -> String {
    respond((|| {
        let (unit, mut ev) = model(unit_json, eval_json)?;
        if ev.get(0).is_none() {
            ev.insert(0, Subset::empty(unit.len()));
        }
        let tau = parse_term(term, MAX_VARS).map_err(|e| e.to_string())?;
        let diagonal = class.eq_ignore_ascii_case("d");
        let target = if diagonal {
            Term::and(tau.clone(), Term::cyl(0, Term::not(Term::diag(0, 1))))
        } else {
            tau.clone()
        };
        let f = unit
            .sequences()
            .iter()
            .find(|f| satisfies(&unit, f, &ev, &target).unwrap_or(false))
            .ok_or_else(|| format!("no point satisfies {target}"))?;
        let cert = if diagonal {
            split_atom_diag(&unit, f, &ev, &tau)
        } else {
            split_any_crs(&unit, f, &ev, &tau)
        }
        .map_err(|e| e.to_string())?;
        let invariance = cert.check_invariance().map_err(|e| e.to_string())?;
        Ok(json!({
            "original": cert.original.to_string(),
            "splitter": cert.splitter.to_string(),
            "focus": f.raw_values(),
            "negative_unit": cert.negative.unit.to_file(),
            "positive_unit": cert.positive.unit.to_file(),
            "invariance_checked": invariance.checked,
            "invariance_passed": invariance.passed(),
            "certificate": cert.to_file(),
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQ22: &str = r#"{"window":[0,1],"sequences":[[0,0],[0,1],[1,0],[1,1]]}"#;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn eval_round_trip() {
        let v = parse(&eval_term(SQ22, "c0 -d01", r#"{"x0":[0]}"#));
        assert_eq!(v["sequences"].as_array().unwrap().len(), 4);
        let v = parse(&eval_term(SQ22, "-d01", ""));
        assert_eq!(v["sequences"], json!([[0, 1], [1, 0]]));
        assert!(parse(&eval_term(SQ22, "c7 x0", ""))["error"].is_string());
        assert!(parse(&eval_term("{", "x0", ""))["error"].is_string());
    }

    #[test]
    fn classify() {
        let v = parse(&classify_unit(r#"{"window":[0,1],"sequences":[[0,1]]}"#));
        assert_eq!(v["classes"], json!(["Crs"]));
        let v = parse(&classify_unit(SQ22));
        assert_eq!(v["classes"], json!(["Crs", "D", "G", "Gs"]));
    }

    #[test]
    fn split_both_kinds() {
        for class in ["d", "crs"] {
            let v = parse(&split_demo(SQ22, "x0", r#"{"x0":[0,1,2,3]}"#, class));
            assert_eq!(v["invariance_passed"], json!(true), "{v}");
        }
        assert!(parse(&split_demo(SQ22, "0", "", "crs"))["error"].is_string());
    }
}
