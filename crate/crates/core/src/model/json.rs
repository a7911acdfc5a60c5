//! Native JSON instance format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Instance, RawRow, RowKind, Sense};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct JsonModel {
    pub name: String,
    pub num_vars: usize,
    pub objective: Vec<f64>,
    #[serde(default)]
    pub rows: Vec<JsonRow>,
    #[serde(default)]
    pub bounds: Vec<JsonBound>,
    #[serde(default)]
    pub integers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonRow {
    pub coeffs: BTreeMap<usize, f64>,
    pub rhs: f64,
    pub sense: Sense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonBound {
    pub var: usize,
    pub lb: f64,
    pub ub: f64,
}

fn field_error(ctx: &str, field: String, message: impl Into<String>) -> Error {
    Error::Parse {
        context: format!("{ctx}: field {field}"),
        message: message.into(),
    }
}

pub(super) fn parse(text: &str, ctx: &str) -> Result<Instance> {
    let model: JsonModel = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("{ctx}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    from_model(&model, ctx)
}

pub(super) fn from_model(model: &JsonModel, ctx: &str) -> Result<Instance> {
    let n = model.num_vars;
    if model.objective.len() != n {
        return Err(field_error(
            ctx,
            "objective".into(),
            format!("{} entries for numVars = {n}", model.objective.len()),
        ));
    }
    let mut raw = Vec::with_capacity(model.rows.len());
    for (i, r) in model.rows.iter().enumerate() {
        if let Some((&j, _)) = r.coeffs.iter().find(|(&j, _)| j >= n) {
            return Err(field_error(
                ctx,
                format!("rows[{i}].coeffs"),
                format!("variable index {j} out of range"),
            ));
        }
        raw.push(RawRow {
            coeffs: r.coeffs.iter().map(|(&j, &v)| (j, v)).collect(),
            sense: r.sense,
            rhs: r.rhs,
        });
    }
    let mut bounds = vec![None; n];
    for (k, b) in model.bounds.iter().enumerate() {
        if b.var >= n {
            return Err(field_error(
                ctx,
                format!("bounds[{k}].var"),
                format!("variable index {} out of range", b.var),
            ));
        }
        if bounds[b.var].is_some() {
            return Err(field_error(
                ctx,
                format!("bounds[{k}].var"),
                format!("duplicate bounds for variable {}", b.var),
            ));
        }
        bounds[b.var] = Some((b.lb, b.ub));
    }
    if let Some(&j) = model.integers.iter().find(|&&j| j >= n) {
        return Err(field_error(
            ctx,
            "integers".into(),
            format!("variable index {j} out of range"),
        ));
    }
    Instance::standardize(
        model.name.clone(),
        n,
        model.objective.clone(),
        &raw,
        &bounds,
        model.integers.iter().copied(),
    )
}

pub(super) fn to_model(inst: &Instance) -> JsonModel {
    let rows = inst
        .row_kinds
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == RowKind::Structural)
        .map(|(i, _)| JsonRow {
            coeffs: inst.rows[i]
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect(),
            rhs: inst.rhs[i],
            sense: Sense::Ge,
        })
        .collect();
    let bounds = (0..inst.num_vars)
        .filter_map(|j| inst.bounds(j).map(|(lb, ub)| JsonBound { var: j, lb, ub }))
        .collect();
    JsonModel {
        name: inst.name.clone(),
        num_vars: inst.num_vars,
        objective: inst.objective.clone(),
        rows,
        bounds,
        integers: inst.integers.iter().copied().collect(),
    }
}
