//! MILP instances in `A x >= b` form.
//!
//! Every instance is standardized on construction: structural rows come first
//! in source order (`<=` rows are negated, `=` rows split into two `>=` rows),
//! followed by one lower-bound row `x_j >= l_j` and one upper-bound row
//! `-x_j >= -u_j` per variable. Bound rows are ordinary matrix rows so Farkas
//! multipliers on bounds are first class.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, neg};
use crate::{Error, Result};

mod json;
mod mps;

pub use json::{JsonBound, JsonModel, JsonRow};

/// Upper bound given to variables that do not state one.
pub const DEFAULT_UPPER: f64 = 1e6;

/// Role of a row in the standardized system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowKind {
    Structural,
    LowerBound(usize),
    UpperBound(usize),
}

/// Constraint sense as written in a source file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

/// A source-level constraint before standardization.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// One member of a parametric MILP family: `min c x` over `A x >= b`,
/// `x_j` integer for `j` in `integers`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub num_vars: usize,
    /// Dense rows of `A`.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub objective: Vec<f64>,
    pub integers: BTreeSet<usize>,
    pub row_kinds: Vec<RowKind>,
}

/// Which data element of an instance a perturbation targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    /// Structural rows of the constraint matrix.
    #[serde(rename = "A")]
    Matrix,
    /// Structural right-hand sides.
    #[serde(rename = "b")]
    Rhs,
    /// Objective.
    #[serde(rename = "c")]
    Objective,
}

impl Element {
    pub fn label(self) -> &'static str {
        match self {
            Element::Matrix => "A",
            Element::Rhs => "b",
            Element::Objective => "c",
        }
    }

    /// Long name used in reports.
    pub fn long_name(self) -> &'static str {
        match self {
            Element::Matrix => "matrix",
            Element::Rhs => "rhs",
            Element::Objective => "objective",
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Element {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" | "matrix" => Ok(Element::Matrix),
            "b" | "B" | "rhs" => Ok(Element::Rhs),
            "c" | "C" | "objective" => Ok(Element::Objective),
            other => Err(Error::Invalid(format!("unknown element '{other}'"))),
        }
    }
}

/// Where a cut came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Freshly generated from a cut-generating LP.
    Fresh,
    /// Farkas PDI: stored certificate re-evaluated on new data.
    Pdc,
    /// Strong PDI: Farkas PDI after per-term reparameterization.
    Spdc,
}

/// The inequality `alpha x >= beta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Cut {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub provenance: Provenance,
    pub source_instance: String,
}

impl Cut {
    pub fn new(
        alpha: Vec<f64>,
        beta: f64,
        provenance: Provenance,
        source_instance: impl Into<String>,
    ) -> Result<Self> {
        if !beta.is_finite() || alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("cut has non-finite entries".into()));
        }
        if alpha.iter().all(|&a| a == 0.0) {
            return Err(Error::DegenerateCut);
        }
        Ok(Cut {
            alpha,
            beta,
            provenance,
            source_instance: source_instance.into(),
        })
    }

    /// `beta - alpha x`; positive means `x` is cut off.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.beta - dot(&self.alpha, x)
    }

    /// Copy scaled by `1 / ||alpha||_inf`.
    pub fn normalized(&self) -> Cut {
        let s = crate::linalg::norm_inf(&self.alpha);
        Cut {
            alpha: self.alpha.iter().map(|a| a / s).collect(),
            beta: self.beta / s,
            ..self.clone()
        }
    }
}

/// A violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic(pub String);

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// File formats accepted by [`load_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Mps,
}

impl Format {
    /// Guess from a file extension; anything but `.mps` is JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("mps") => Format::Mps,
            _ => Format::Json,
        }
    }
}

pub fn load_instance(path: impl AsRef<Path>, format: Format) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let ctx = path.display().to_string();
    match format {
        Format::Json => json::parse(&text, &ctx),
        Format::Mps => mps::parse(&text, &ctx),
    }
}

pub fn save_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, inst.to_json()?)?;
    Ok(())
}

pub fn validate_instance(inst: &Instance) -> Vec<Diagnostic> {
    inst.validate()
}

fn var_name(j: usize) -> String {
    format!("x{}", j + 1)
}

fn clean(v: f64) -> f64 {
    // folds -0.0 into +0.0
    v + 0.0
}

impl Instance {
    /// Standardizes source rows and bounds. `bounds[j]` defaults to
    /// `[0, DEFAULT_UPPER]` when `None`.
    pub fn standardize(
        name: impl Into<String>,
        num_vars: usize,
        objective: Vec<f64>,
        raw_rows: &[RawRow],
        bounds: &[Option<(f64, f64)>],
        integers: impl IntoIterator<Item = usize>,
    ) -> Result<Instance> {
        if objective.len() != num_vars {
            return Err(Error::Dimension(format!(
                "objective has {} entries for {num_vars} variables",
                objective.len()
            )));
        }
        if bounds.len() != num_vars {
            return Err(Error::Dimension(format!(
                "{} bound entries for {num_vars} variables",
                bounds.len()
            )));
        }
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut kinds = Vec::new();
        for (i, r) in raw_rows.iter().enumerate() {
            let mut dense = vec![0.0; num_vars];
            for &(j, v) in &r.coeffs {
                if j >= num_vars {
                    return Err(Error::Dimension(format!(
                        "row {i} references variable {j} of {num_vars}"
                    )));
                }
                dense[j] += v;
            }
            let negated = || dense.iter().map(|&v| clean(neg(v))).collect::<Vec<_>>();
            match r.sense {
                Sense::Ge => {
                    rows.push(dense.iter().map(|&v| clean(v)).collect());
                    rhs.push(clean(r.rhs));
                }
                Sense::Le => {
                    rows.push(negated());
                    rhs.push(clean(neg(r.rhs)));
                }
                Sense::Eq => {
                    rows.push(dense.iter().map(|&v| clean(v)).collect());
                    rhs.push(clean(r.rhs));
                    rows.push(negated());
                    rhs.push(clean(neg(r.rhs)));
                    kinds.push(RowKind::Structural);
                }
            }
            kinds.push(RowKind::Structural);
        }
        for (j, b) in bounds.iter().enumerate() {
            let (lb, ub) = b.unwrap_or((0.0, DEFAULT_UPPER));
            let mut lo = vec![0.0; num_vars];
            lo[j] = 1.0;
            rows.push(lo);
            rhs.push(clean(lb));
            kinds.push(RowKind::LowerBound(j));
            let mut up = vec![0.0; num_vars];
            up[j] = -1.0;
            rows.push(up);
            rhs.push(clean(neg(ub)));
            kinds.push(RowKind::UpperBound(j));
        }
        Ok(Instance {
            name: name.into(),
            num_vars,
            rows,
            rhs,
            objective: objective.into_iter().map(clean).collect(),
            integers: integers.into_iter().collect(),
            row_kinds: kinds,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn structural_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == RowKind::Structural)
            .map(|(i, _)| i)
    }

    pub fn num_structural(&self) -> usize {
        self.structural_rows().count()
    }

    /// `(l_j, u_j)` read off the bound rows; `None` if a bound row is missing.
    pub fn bounds(&self, j: usize) -> Option<(f64, f64)> {
        let mut lo = None;
        let mut up = None;
        for (i, k) in self.row_kinds.iter().enumerate() {
            match *k {
                RowKind::LowerBound(v) if v == j => lo = Some(self.rhs[i] / self.rows[i][j]),
                RowKind::UpperBound(v) if v == j => up = Some(self.rhs[i] / self.rows[i][j]),
                _ => {}
            }
        }
        Some((lo?, clean(up?)))
    }

    /// All bounds; panics on instances that fail validation.
    pub fn all_bounds(&self) -> Vec<(f64, f64)> {
        (0..self.num_vars)
            .map(|j| self.bounds(j).expect("instance is missing a bound row"))
            .collect()
    }

    /// Row index of the lower (`upper == false`) or upper bound row of `j`.
    pub fn bound_row(&self, j: usize, upper: bool) -> Option<usize> {
        let want = if upper {
            RowKind::UpperBound(j)
        } else {
            RowKind::LowerBound(j)
        };
        self.row_kinds.iter().position(|k| *k == want)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation `b_i - A_i x` over all rows (zero or negative when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| b - dot(r, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether every integer variable of `x` is integral within `tol`.
    pub fn is_integral(&self, x: &[f64], tol: f64) -> bool {
        self.integers
            .iter()
            .all(|&j| (x[j] - x[j].round()).abs() <= tol)
    }

    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let n = self.num_vars;
        let m = self.rows.len();
        if self.rhs.len() != m {
            out.push(Diagnostic(format!(
                "rhs has {} entries for {m} rows",
                self.rhs.len()
            )));
        }
        if self.row_kinds.len() != m {
            out.push(Diagnostic(format!(
                "row kinds have {} entries for {m} rows",
                self.row_kinds.len()
            )));
        }
        if self.objective.len() != n {
            out.push(Diagnostic(format!(
                "objective has {} entries for {n} variables",
                self.objective.len()
            )));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != n {
                out.push(Diagnostic(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            if r.iter().any(|v| !v.is_finite()) {
                out.push(Diagnostic(format!("row {i} has non-finite coefficients")));
            }
        }
        if self
            .rhs
            .iter()
            .chain(&self.objective)
            .any(|v| !v.is_finite())
        {
            out.push(Diagnostic("non-finite rhs or objective entry".into()));
        }
        for &j in &self.integers {
            if j >= n {
                out.push(Diagnostic(format!("integer index {j} out of range")));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for j in 0..n {
            let mut lower = Vec::new();
            let mut upper = Vec::new();
            for (i, k) in self.row_kinds.iter().enumerate() {
                match *k {
                    RowKind::LowerBound(v) if v == j => lower.push(i),
                    RowKind::UpperBound(v) if v == j => upper.push(i),
                    _ => {}
                }
            }
            let name = var_name(j);
            for (rows, what, sign) in [(&lower, "lower", 1.0), (&upper, "upper", -1.0)] {
                match rows.len() {
                    0 => out.push(Diagnostic(format!("missing {what} bound row for {name}"))),
                    1 => {
                        let r = &self.rows[rows[0]];
                        let unit =
                            r.iter()
                                .enumerate()
                                .all(|(c, &v)| if c == j { v == sign } else { v == 0.0 });
                        if !unit {
                            out.push(Diagnostic(format!(
                                "{what} bound row {} for {name} is not a unit row",
                                rows[0]
                            )));
                        }
                    }
                    k => out.push(Diagnostic(format!("{k} {what} bound rows for {name}"))),
                }
            }
            if lower.len() == 1 && upper.len() == 1 {
                let lb = self.rhs[lower[0]];
                let ub = -self.rhs[upper[0]];
                if lb < 0.0 {
                    out.push(Diagnostic(format!("negative lower bound on {name}")));
                }
                if ub < lb {
                    out.push(Diagnostic(format!("crossed bounds on {name}")));
                }
            }
        }
        for (i, k) in self.row_kinds.iter().enumerate() {
            if let RowKind::LowerBound(j) | RowKind::UpperBound(j) = *k {
                if j >= n {
                    out.push(Diagnostic(format!(
                        "bound row {i} refers to missing variable {j}"
                    )));
                }
            }
        }
        out
    }

    /// Flattened current values of `element`: structural rows row-major for
    /// the matrix, structural rhs entries, or the objective.
    pub fn element_values(&self, element: Element) -> Vec<f64> {
        match element {
            Element::Matrix => self
                .structural_rows()
                .flat_map(|i| self.rows[i].iter().copied())
                .collect(),
            Element::Rhs => self.structural_rows().map(|i| self.rhs[i]).collect(),
            Element::Objective => self.objective.clone(),
        }
    }

    /// Replaces one data element. `values` is either the structural block
    /// (as returned by [`Instance::element_values`]) or, for the matrix and
    /// rhs, the full row-major system, in which case bound rows must be
    /// unchanged.
    pub fn perturb_element(&self, element: Element, values: &[f64]) -> Result<Instance> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPerturbation("non-finite values".into()));
        }
        let n = self.num_vars;
        let structural: Vec<usize> = self.structural_rows().collect();
        let mut out = self.clone();
        out.name = format!("{}+{}", self.name, element.label());
        match element {
            Element::Objective => {
                if values.len() != n {
                    return Err(Error::Dimension(format!(
                        "objective needs {n} values, got {}",
                        values.len()
                    )));
                }
                out.objective = values.iter().map(|&v| clean(v)).collect();
            }
            Element::Rhs => {
                let targets: Vec<usize> = if values.len() == structural.len() {
                    structural.clone()
                } else if values.len() == self.num_rows() {
                    for (i, k) in self.row_kinds.iter().enumerate() {
                        if *k != RowKind::Structural && values[i] != self.rhs[i] {
                            return Err(Error::InvalidPerturbation(format!(
                                "rhs of bound row {i} may not change"
                            )));
                        }
                    }
                    structural.clone()
                } else {
                    return Err(Error::Dimension(format!(
                        "rhs needs {} structural values, got {}",
                        structural.len(),
                        values.len()
                    )));
                };
                let full = values.len() == self.num_rows();
                for (k, &i) in targets.iter().enumerate() {
                    out.rhs[i] = clean(if full { values[i] } else { values[k] });
                }
            }
            Element::Matrix => {
                let full = values.len() == self.num_rows() * n;
                if !full && values.len() != structural.len() * n {
                    return Err(Error::Dimension(format!(
                        "matrix needs {}x{n} structural values, got {}",
                        structural.len(),
                        values.len()
                    )));
                }
                if full {
                    for (i, k) in self.row_kinds.iter().enumerate() {
                        if *k != RowKind::Structural
                            && values[i * n..(i + 1) * n] != self.rows[i][..]
                        {
                            return Err(Error::InvalidPerturbation(format!(
                                "bound row {i} may not change"
                            )));
                        }
                    }
                }
                for (k, &i) in structural.iter().enumerate() {
                    let src = if full { i } else { k };
                    out.rows[i] = values[src * n..(src + 1) * n]
                        .iter()
                        .map(|&v| clean(v))
                        .collect();
                }
            }
        }
        Ok(out)
    }

    /// Same instance with new bounds for `j`; used to build hand-made families
    /// whose bound data differs, which [`Instance::perturb_element`] refuses.
    pub fn with_bounds(&self, j: usize, lb: f64, ub: f64) -> Instance {
        let mut out = self.clone();
        if let Some(i) = self.bound_row(j, false) {
            out.rhs[i] = clean(lb);
        }
        if let Some(i) = self.bound_row(j, true) {
            out.rhs[i] = clean(neg(ub));
        }
        out
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Instance {
        self.name = name.into();
        self
    }

    /// Whether `other` has the same shape, row kinds and integer set, which
    /// is what transferring a certificate requires.
    pub fn same_family(&self, other: &Instance) -> bool {
        self.num_vars == other.num_vars
            && self.rows.len() == other.rows.len()
            && self.row_kinds == other.row_kinds
            && self.integers == other.integers
    }

    pub fn to_json_model(&self) -> JsonModel {
        json::to_model(self)
    }

    pub fn from_json_model(model: &JsonModel) -> Result<Instance> {
        json::from_model(model, "<model>")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_json_model())?)
    }

    pub fn from_json(text: &str) -> Result<Instance> {
        json::parse(text, "<string>")
    }

    pub fn from_mps(text: &str) -> Result<Instance> {
        mps::parse(text, "<string>")
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// min -x1 - x2; 2x1 + x2 <= 2; x in [0,1]^2; x1 integer.
    pub fn two_var() -> Instance {
        Instance::standardize(
            "two_var",
            2,
            vec![-1.0, -1.0],
            &[RawRow {
                coeffs: vec![(0, 2.0), (1, 1.0)],
                sense: Sense::Le,
                rhs: 2.0,
            }],
            &[Some((0.0, 1.0)), Some((0.0, 1.0))],
            [0],
        )
        .unwrap()
    }

    #[test]
    fn standardizes_two_var() {
        let inst = two_var();
        assert_eq!(inst.num_rows(), 5);
        assert_eq!(inst.rows[0], vec![-2.0, -1.0]);
        assert_eq!(inst.rhs[0], -2.0);
        assert_eq!(inst.rows[1], vec![1.0, 0.0]);
        assert_eq!(inst.rows[2], vec![-1.0, 0.0]);
        assert_eq!(inst.rhs[2], -1.0);
        assert_eq!(inst.rows[4], vec![0.0, -1.0]);
        assert_eq!(
            inst.row_kinds,
            vec![
                RowKind::Structural,
                RowKind::LowerBound(0),
                RowKind::UpperBound(0),
                RowKind::LowerBound(1),
                RowKind::UpperBound(1)
            ]
        );
        assert!(inst.validate().is_empty());
        assert_eq!(inst.bounds(1), Some((0.0, 1.0)));
    }

    #[test]
    fn equality_rows_split() {
        let inst = Instance::standardize(
            "eq",
            1,
            vec![1.0],
            &[RawRow {
                coeffs: vec![(0, 1.0)],
                sense: Sense::Eq,
                rhs: 0.5,
            }],
            &[None],
            [],
        )
        .unwrap();
        assert_eq!(inst.num_structural(), 2);
        assert_eq!(inst.rows[1], vec![-1.0]);
        assert_eq!(inst.rhs[1], -0.5);
        assert_eq!(inst.bounds(0), Some((0.0, DEFAULT_UPPER)));
    }

    #[test]
    fn pure_lp_is_accepted() {
        let mut inst = two_var();
        inst.integers.clear();
        assert!(inst.validate().is_empty());
    }

    #[test]
    fn missing_upper_bound_is_named() {
        let mut inst = two_var();
        inst.rows.remove(4);
        inst.rhs.remove(4);
        inst.row_kinds.remove(4);
        let d = inst.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].0.contains("x2"), "{d:?}");
    }

    #[test]
    fn crossed_bounds_detected() {
        let inst = two_var().with_bounds(0, 2.0, 1.0);
        let d = inst.validate();
        assert_eq!(d, vec![Diagnostic("crossed bounds on x1".into())]);
    }

    #[test]
    fn perturb_identity_and_single_entries() {
        let inst = two_var();
        let same = inst
            .perturb_element(Element::Objective, &[-1.0, -1.0])
            .unwrap();
        assert_eq!(same.objective, inst.objective);
        assert_eq!(same.rows, inst.rows);

        let b = inst.perturb_element(Element::Rhs, &[-1.8]).unwrap();
        assert_eq!(b.rhs[0], -1.8);
        assert_eq!(b.rhs[1..], inst.rhs[1..]);

        let a = inst
            .perturb_element(Element::Matrix, &[-1.9, -1.1])
            .unwrap();
        assert_eq!(a.rows[0], vec![-1.9, -1.1]);
        assert_eq!(a.rows[1..], inst.rows[1..]);
        assert_eq!(a.rhs, inst.rhs);
    }

    #[test]
    fn perturb_rejects_bound_rows_and_bad_shapes() {
        let inst = two_var();
        let mut full = inst.rhs.clone();
        full[4] = -0.9;
        assert!(matches!(
            inst.perturb_element(Element::Rhs, &full),
            Err(Error::InvalidPerturbation(_))
        ));
        full[4] = -1.0;
        full[0] = -1.5;
        assert_eq!(
            inst.perturb_element(Element::Rhs, &full).unwrap().rhs[0],
            -1.5
        );
        assert!(matches!(
            inst.perturb_element(Element::Objective, &[1.0]),
            Err(Error::Dimension(_))
        ));
        let mut a: Vec<f64> = inst.rows.concat();
        a[3] = 7.0;
        assert!(matches!(
            inst.perturb_element(Element::Matrix, &a),
            Err(Error::InvalidPerturbation(_))
        ));
    }

    #[test]
    fn cut_requires_nonzero_alpha() {
        assert!(matches!(
            Cut::new(vec![0.0, 0.0], 1.0, Provenance::Fresh, "x"),
            Err(Error::DegenerateCut)
        ));
        let c = Cut::new(vec![-2.0, -1.0], -2.0, Provenance::Fresh, "x").unwrap();
        assert_eq!(c.normalized().alpha, vec![-1.0, -0.5]);
        assert_eq!(c.violation(&[1.0, 1.0]), 1.0);
    }
}
