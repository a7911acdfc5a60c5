//! Helpers shared by the integration tests.
#![allow(dead_code)]

use pdi_core::cglp::{generate_cut, GeneratedCut};
use pdi_core::disjunction::{build_disjunction, term_polyhedron, Disjunction, DisjunctionOptions};
use pdi_core::model::Instance;
use pdi_core::oracle::{vertex_enumeration, VertexOptimum};
use pdi_core::simplex::{solve_lp, LpStatus};
use pdi_core::synthetic::{random_instance, SyntheticSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance with `n <= 5` variables and at most 12 rows in total.
pub fn small_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=5);
    let m = rng.gen_range(1..=(12 - 2 * n));
    random_instance(format!("s{seed}"), &SyntheticSpec::small(n, m), &mut rng).unwrap()
}

/// A base instance with a disjunction and a fresh cut at its LP optimum.
pub struct Base {
    pub inst: Instance,
    pub disj: Disjunction,
    pub cut: GeneratedCut,
}

pub fn base(seed: u64, terms: usize) -> Option<Base> {
    let inst = small_instance(seed);
    let d = build_disjunction(&inst, DisjunctionOptions::new(terms)).ok()?;
    let lp = solve_lp(&inst.rows, &inst.rhs, &inst.objective, None).ok()?;
    if lp.status != LpStatus::Optimal {
        return None;
    }
    let cut = generate_cut(&inst, &d.disjunction, &lp.x).ok()?;
    Some(Base {
        inst,
        disj: d.disjunction,
        cut,
    })
}

/// `min alpha x` over each term by vertex enumeration; `None` for empty terms.
pub fn term_minima(inst: &Instance, disj: &Disjunction, alpha: &[f64]) -> Vec<Option<f64>> {
    disj.terms
        .iter()
        .map(|t| {
            let q = term_polyhedron(inst, t);
            match vertex_enumeration(&q.rows, &q.rhs, alpha) {
                VertexOptimum::Optimal { value, .. } => Some(value),
                VertexOptimum::Infeasible => None,
            }
        })
        .collect()
}

/// `min_t min alpha x` over nonempty terms.
pub fn hull_minimum(inst: &Instance, disj: &Disjunction, alpha: &[f64]) -> Option<f64> {
    term_minima(inst, disj, alpha)
        .into_iter()
        .flatten()
        .min_by(f64::total_cmp)
}
