//! Variable-branching disjunctions taken from the leaves of a partial
//! branch-and-bound tree, and the per-term polyhedra `Q^t = P ∩ X^t`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::neg;
use crate::model::Instance;
use crate::simplex::{solve_lp, BasisIndexSet, LpSolution, LpStatus};
use crate::{Error, Result};

/// Integrality tolerance for LP values of integer variables.
pub const INT_TOL: f64 = 1e-6;

/// Tightened bounds on one variable; `None` keeps the instance bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundOverride {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// One hyperrectangle `X^t` of a disjunction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub id: usize,
    pub overrides: BTreeMap<usize, BoundOverride>,
}

impl Term {
    pub fn new(id: usize) -> Self {
        Term {
            id,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_lower(mut self, var: usize, lower: f64) -> Self {
        self.overrides.entry(var).or_default().lower = Some(lower);
        self
    }

    pub fn with_upper(mut self, var: usize, upper: f64) -> Self {
        self.overrides.entry(var).or_default().upper = Some(upper);
        self
    }

    /// Number of rows the term appends to the instance rows.
    pub fn num_override_rows(&self) -> usize {
        self.overrides
            .values()
            .map(|o| o.lower.is_some() as usize + o.upper.is_some() as usize)
            .sum()
    }

    /// Problems with the term relative to `inst`: non-integer variables,
    /// fractional or relaxing bounds.
    pub fn check(&self, inst: &Instance) -> Vec<String> {
        let mut out = Vec::new();
        for (&j, o) in &self.overrides {
            if !inst.integers.contains(&j) {
                out.push(format!(
                    "term {} overrides non-integer variable {j}",
                    self.id
                ));
                continue;
            }
            let Some((lb, ub)) = inst.bounds(j) else {
                out.push(format!("term {} overrides unbounded variable {j}", self.id));
                continue;
            };
            if let Some(l) = o.lower {
                if l.fract() != 0.0 || l < lb {
                    out.push(format!(
                        "term {} lower bound {l} on {j} is not a tightening",
                        self.id
                    ));
                }
            }
            if let Some(u) = o.upper {
                if u.fract() != 0.0 || u > ub {
                    out.push(format!(
                        "term {} upper bound {u} on {j} is not a tightening",
                        self.id
                    ));
                }
            }
        }
        out
    }
}

/// A valid disjunction `{X^t}` for its source instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Disjunction {
    pub source_instance: String,
    pub terms: Vec<Term>,
}

impl Disjunction {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether the integer point `x` lies in some term (bounds only).
    pub fn covers(&self, x: &[f64]) -> bool {
        self.terms.iter().any(|t| {
            t.overrides.iter().all(|(&j, o)| {
                o.lower.is_none_or(|l| x[j] >= l - INT_TOL)
                    && o.upper.is_none_or(|u| x[j] <= u + INT_TOL)
            })
        })
    }
}

/// Provenance of a row in a [`TermPolyhedron`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowOrigin {
    Base(usize),
    OverrideLower(usize),
    OverrideUpper(usize),
}

/// The stacked system `[A; D^t] x >= [b; D^t_0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TermPolyhedron {
    pub term: usize,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub row_map: Vec<RowOrigin>,
}

impl TermPolyhedron {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `min objective x` over the term, optionally warm-started.
    pub fn solve(&self, objective: &[f64], warm: Option<&BasisIndexSet>) -> Result<LpSolution> {
        solve_lp(&self.rows, &self.rhs, objective, warm)
    }

    pub fn is_feasible(&self) -> Result<bool> {
        let zero = vec![0.0; self.rows.first().map_or(0, |r| r.len())];
        Ok(self.solve(&zero, None)?.status == LpStatus::Optimal)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.rows
            .iter()
            .zip(&self.rhs)
            .all(|(r, b)| crate::linalg::dot(r, x) >= b - tol)
    }
}

/// Instance rows followed by one `>=` row per override, lower before upper,
/// in increasing variable order.
pub fn term_polyhedron(inst: &Instance, term: &Term) -> TermPolyhedron {
    let n = inst.num_vars;
    let mut rows = inst.rows.clone();
    let mut rhs = inst.rhs.clone();
    let mut row_map: Vec<RowOrigin> = (0..inst.num_rows()).map(RowOrigin::Base).collect();
    for (&j, o) in &term.overrides {
        if let Some(l) = o.lower {
            let mut r = vec![0.0; n];
            r[j] = 1.0;
            rows.push(r);
            rhs.push(l + 0.0);
            row_map.push(RowOrigin::OverrideLower(j));
        }
        if let Some(u) = o.upper {
            let mut r = vec![0.0; n];
            r[j] = -1.0;
            rows.push(r);
            rhs.push(neg(u));
            row_map.push(RowOrigin::OverrideUpper(j));
        }
    }
    TermPolyhedron {
        term: term.id,
        rows,
        rhs,
        row_map,
    }
}

pub fn term_polyhedra(inst: &Instance, disj: &Disjunction) -> Vec<TermPolyhedron> {
    disj.terms
        .iter()
        .map(|t| term_polyhedron(inst, t))
        .collect()
}

/// Positions (into `disj.terms`) of terms with a nonempty polyhedron.
pub fn feasible_terms(inst: &Instance, disj: &Disjunction) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (t, term) in disj.terms.iter().enumerate() {
        if term_polyhedron(inst, term).is_feasible()? {
            out.push(t);
        }
    }
    Ok(out)
}

/// `min_t min { c x : x in Q^t }` over feasible terms.
pub fn disjunctive_bound(inst: &Instance, disj: &Disjunction) -> Result<f64> {
    let mut best: Option<f64> = None;
    for term in &disj.terms {
        let sol = term_polyhedron(inst, term).solve(&inst.objective, None)?;
        match sol.status {
            LpStatus::Optimal => {
                best = Some(best.map_or(sol.objective, |b: f64| b.min(sol.objective)))
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Err(Error::Unbounded),
        }
    }
    best.ok_or(Error::AllTermsInfeasible)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DisjunctionOptions {
    /// Cap on the number of leaves.
    pub max_terms: usize,
    /// `None` branches on the most fractional variable (lowest index on ties);
    /// `Some(seed)` picks uniformly among fractional integer variables.
    pub seed: Option<u64>,
}

impl DisjunctionOptions {
    pub fn new(max_terms: usize) -> Self {
        DisjunctionOptions {
            max_terms,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DisjunctionBuild {
    pub disjunction: Disjunction,
    /// Set when the root LP was already integral and the disjunction has a
    /// single unrestricted term.
    pub integral_root: bool,
    pub root_bound: f64,
    /// Leaves whose LP was infeasible when the tree was built.
    pub infeasible_leaves: usize,
}

/// Picks the branching variable for `x`, if any integer variable is fractional.
pub(crate) fn branching_variable(
    inst: &Instance,
    x: &[f64],
    rng: Option<&mut ChaCha8Rng>,
) -> Option<usize> {
    let fractional: Vec<(usize, f64)> = inst
        .integers
        .iter()
        .map(|&j| (j, (x[j] - x[j].floor()).min(x[j].ceil() - x[j])))
        .filter(|&(_, f)| f > INT_TOL)
        .collect();
    if let Some(rng) = rng {
        return fractional.choose(rng).map(|&(j, _)| j);
    }
    let mut best: Option<(usize, f64)> = None;
    for (j, f) in fractional {
        if best.is_none_or(|(_, bf)| f > bf + 1e-12) {
            best = Some((j, f));
        }
    }
    best.map(|(j, _)| j)
}

/// Bound-modified LP relaxation used by tree searches: the instance rows with
/// the rhs of the bound rows replaced. The matrix never changes, so a parent
/// basis stays dual feasible for its children.
#[derive(Clone, Debug)]
pub(crate) struct BoundedLp<'a> {
    pub rows: &'a [Vec<f64>],
    pub rhs: &'a [f64],
    pub objective: &'a [f64],
    /// `(lower row, upper row)` per variable.
    pub bound_rows: Vec<(usize, usize)>,
}

impl<'a> BoundedLp<'a> {
    pub fn new(
        inst: &Instance,
        rows: &'a [Vec<f64>],
        rhs: &'a [f64],
        objective: &'a [f64],
    ) -> Self {
        let bound_rows = (0..inst.num_vars)
            .map(|j| {
                (
                    inst.bound_row(j, false).expect("missing lower bound row"),
                    inst.bound_row(j, true).expect("missing upper bound row"),
                )
            })
            .collect();
        BoundedLp {
            rows,
            rhs,
            objective,
            bound_rows,
        }
    }

    pub fn solve(
        &self,
        lb: &[f64],
        ub: &[f64],
        warm: Option<&BasisIndexSet>,
    ) -> Result<LpSolution> {
        let mut rhs = self.rhs.to_vec();
        for (j, &(lo, up)) in self.bound_rows.iter().enumerate() {
            rhs[lo] = lb[j];
            rhs[up] = neg(ub[j]);
        }
        solve_lp(self.rows, &rhs, self.objective, warm)
    }
}

enum LeafState {
    Open(LpSolution),
    Integral,
    Infeasible,
}

struct Leaf {
    lb: Vec<f64>,
    ub: Vec<f64>,
    state: LeafState,
}

pub fn build_partial_bnb_disjunction(
    inst: &Instance,
    max_terms: usize,
) -> Result<DisjunctionBuild> {
    build_disjunction(inst, DisjunctionOptions::new(max_terms))
}

/// Grows a best-bound tree with most-fractional branching until it has
/// `max_terms` leaves or no fractional leaf remains; every leaf, including
/// integral and infeasible ones, becomes a term.
pub fn build_disjunction(inst: &Instance, opts: DisjunctionOptions) -> Result<DisjunctionBuild> {
    if opts.max_terms < 2 {
        return Err(Error::Invalid(
            "a disjunction needs at least 2 terms".into(),
        ));
    }
    let mut rng = opts.seed.map(ChaCha8Rng::seed_from_u64);
    let lp = BoundedLp::new(inst, &inst.rows, &inst.rhs, &inst.objective);
    let bounds = inst.all_bounds();
    let lb0: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let ub0: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let root = lp.solve(&lb0, &ub0, None)?;
    match root.status {
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => return Err(Error::Unbounded),
        LpStatus::Optimal => {}
    }
    let root_bound = root.objective;
    if branching_variable(inst, &root.x, None).is_none() {
        log::info!(
            "{}: LP relaxation is integral; single-term disjunction",
            inst.name
        );
        return Ok(DisjunctionBuild {
            disjunction: Disjunction {
                source_instance: inst.name.clone(),
                terms: vec![Term::new(0)],
            },
            integral_root: true,
            root_bound,
            infeasible_leaves: 0,
        });
    }
    let mut leaves = vec![Leaf {
        lb: lb0.clone(),
        ub: ub0.clone(),
        state: LeafState::Open(root),
    }];
    while leaves.len() < opts.max_terms {
        let pick = leaves
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match &l.state {
                LeafState::Open(sol) => Some((i, sol.objective)),
                _ => None,
            })
            .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
                Some((_, best)) if best <= v => acc,
                _ => Some((i, v)),
            });
        let Some((pos, _)) = pick else { break };
        let leaf = leaves.remove(pos);
        let LeafState::Open(sol) = &leaf.state else {
            unreachable!()
        };
        let j = branching_variable(inst, &sol.x, rng.as_mut()).expect("open leaf is fractional");
        let v = sol.x[j];
        let mut down_ub = leaf.ub.clone();
        down_ub[j] = v.floor();
        let mut up_lb = leaf.lb.clone();
        up_lb[j] = v.ceil();
        let children = [(leaf.lb.clone(), down_ub), (up_lb, leaf.ub.clone())];
        let mut made = Vec::with_capacity(2);
        for (lb, ub) in children {
            let child = lp.solve(&lb, &ub, Some(&sol.basis))?;
            let state = match child.status {
                LpStatus::Infeasible => LeafState::Infeasible,
                LpStatus::Unbounded => return Err(Error::Unbounded),
                LpStatus::Optimal => {
                    if branching_variable(inst, &child.x, None).is_some() {
                        LeafState::Open(child)
                    } else {
                        LeafState::Integral
                    }
                }
            };
            made.push(Leaf { lb, ub, state });
        }
        for (k, l) in made.into_iter().enumerate() {
            leaves.insert(pos + k, l);
        }
    }
    let infeasible_leaves = leaves
        .iter()
        .filter(|l| matches!(l.state, LeafState::Infeasible))
        .count();
    let terms = leaves
        .iter()
        .enumerate()
        .map(|(id, l)| {
            let mut term = Term::new(id);
            for j in 0..inst.num_vars {
                if l.lb[j] > lb0[j] {
                    term = term.with_lower(j, l.lb[j]);
                }
                if l.ub[j] < ub0[j] {
                    term = term.with_upper(j, l.ub[j]);
                }
            }
            term
        })
        .collect();
    Ok(DisjunctionBuild {
        disjunction: Disjunction {
            source_instance: inst.name.clone(),
            terms,
        },
        integral_root: false,
        root_bound,
        infeasible_leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::two_var;
    use crate::model::Element;

    fn split() -> Disjunction {
        Disjunction {
            source_instance: "two_var".into(),
            terms: vec![
                Term::new(0).with_upper(0, 0.0),
                Term::new(1).with_lower(0, 1.0),
            ],
        }
    }

    #[test]
    fn two_var_split() {
        let inst = two_var();
        let b = build_partial_bnb_disjunction(&inst, 2).unwrap();
        assert_eq!(b.disjunction, split());
        assert!(!b.integral_root);
        // one integer variable: the tree cannot grow past 2 leaves
        let b4 = build_partial_bnb_disjunction(&inst, 4).unwrap();
        assert_eq!(b4.disjunction.len(), 2);
    }

    #[test]
    fn integral_root_gives_single_term() {
        let inst = two_var().perturb_element(Element::Rhs, &[-3.0]).unwrap();
        let b = build_partial_bnb_disjunction(&inst, 4).unwrap();
        assert!(b.integral_root);
        assert_eq!(b.disjunction.terms, vec![Term::new(0)]);
    }

    #[test]
    fn infeasible_root_is_an_error() {
        let inst = two_var().perturb_element(Element::Rhs, &[1.0]).unwrap();
        assert!(matches!(
            build_partial_bnb_disjunction(&inst, 2),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn term_polyhedra_stack_overrides() {
        let inst = two_var();
        let up = term_polyhedron(&inst, &Term::new(1).with_lower(0, 1.0));
        assert_eq!(up.num_rows(), 6);
        assert_eq!(up.rows[5], vec![1.0, 0.0]);
        assert_eq!(up.rhs[5], 1.0);
        let down = term_polyhedron(&inst, &Term::new(0).with_upper(0, 0.0));
        assert_eq!(down.rows[5], vec![-1.0, 0.0]);
        assert!(down.rhs[5] == 0.0 && down.rhs[5].is_sign_positive());
        let empty = term_polyhedron(&inst, &Term::new(0));
        assert_eq!(empty.rows, inst.rows);
        assert_eq!(empty.rhs, inst.rhs);
    }

    #[test]
    fn feasible_terms_and_bound() {
        let inst = two_var();
        assert_eq!(feasible_terms(&inst, &split()).unwrap(), vec![0, 1]);
        assert!((disjunctive_bound(&inst, &split()).unwrap() + 1.0).abs() < 1e-12);

        let tight = inst.perturb_element(Element::Rhs, &[-0.5]).unwrap();
        assert_eq!(feasible_terms(&tight, &split()).unwrap(), vec![0]);

        let single = Disjunction {
            source_instance: "two_var".into(),
            terms: vec![Term::new(0)],
        };
        assert!((disjunctive_bound(&inst, &single).unwrap() + 1.5).abs() < 1e-12);

        let empty = Disjunction {
            source_instance: "two_var".into(),
            terms: vec![Term::new(0).with_lower(0, 1.0).with_upper(0, 0.0)],
        };
        assert!(feasible_terms(&inst, &empty).unwrap().is_empty());
        assert!(matches!(
            disjunctive_bound(&inst, &empty),
            Err(Error::AllTermsInfeasible)
        ));
    }

    #[test]
    fn term_check_flags_bad_overrides() {
        let inst = two_var();
        assert!(Term::new(0).with_upper(0, 0.0).check(&inst).is_empty());
        assert_eq!(Term::new(0).with_upper(1, 0.0).check(&inst).len(), 1);
        assert_eq!(Term::new(0).with_lower(0, 0.5).check(&inst).len(), 1);
    }

    #[test]
    fn disjunction_json_round_trip() {
        let d = split();
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<Disjunction>(&text).unwrap(), d);
    }
}
