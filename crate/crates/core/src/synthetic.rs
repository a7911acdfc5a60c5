//! Seeded random MILPs for property tests and benchmark sweeps.
//!
//! Instances are `max` problems written as `min -p x` over packing rows
//! `a x <= b` with `b > 0`, so the origin is always feasible and the box
//! keeps the relaxation bounded.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, RawRow, Sense};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyntheticSpec {
    pub num_vars: usize,
    pub num_constraints: usize,
    /// Upper bounds are drawn from `1..=max_upper`.
    pub max_upper: u32,
    /// Integer coefficients are drawn from `min_coeff..=max_coeff`.
    pub min_coeff: i32,
    pub max_coeff: i32,
    /// Probability that a variable is integer; at least one always is.
    pub integer_fraction: f64,
}

impl SyntheticSpec {
    /// Small binary-ish instance with `n` variables and `m` packing rows.
    pub fn small(n: usize, m: usize) -> Self {
        SyntheticSpec {
            num_vars: n,
            num_constraints: m,
            max_upper: 2,
            min_coeff: -2,
            max_coeff: 6,
            integer_fraction: 0.8,
        }
    }
}

pub fn random_instance(
    name: impl Into<String>,
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Instance> {
    let n = spec.num_vars;
    let upper: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(1..=spec.max_upper.max(1)) as f64)
        .collect();
    let mut rows = Vec::with_capacity(spec.num_constraints);
    for _ in 0..spec.num_constraints {
        let mut coeffs: Vec<(usize, f64)> = (0..n)
            .map(|j| (j, rng.gen_range(spec.min_coeff..=spec.max_coeff) as f64))
            .filter(|&(_, a)| a != 0.0)
            .collect();
        if !coeffs.iter().any(|&(_, a)| a > 0.0) {
            let j = rng.gen_range(0..n);
            coeffs.retain(|&(k, _)| k != j);
            coeffs.push((j, spec.max_coeff.max(1) as f64));
            coeffs.sort_by_key(|&(k, _)| k);
        }
        let reach: f64 = coeffs.iter().map(|&(j, a)| a.max(0.0) * upper[j]).sum();
        // a half-integral rhs strictly inside the reachable range keeps
        // LP optima fractional without making the row redundant
        let rhs = (reach * rng.gen_range(0.3..0.7)).floor().max(0.0) + 0.5;
        rows.push(RawRow {
            coeffs,
            sense: Sense::Le,
            rhs,
        });
    }
    let objective: Vec<f64> = (0..n).map(|_| -(rng.gen_range(1..=10) as f64)).collect();
    let mut integers: Vec<usize> = (0..n)
        .filter(|_| rng.gen_bool(spec.integer_fraction))
        .collect();
    if integers.is_empty() {
        integers.push(rng.gen_range(0..n));
    }
    let bounds: Vec<Option<(f64, f64)>> = upper.iter().map(|&u| Some((0.0, u))).collect();
    Instance::standardize(name, n, objective, &rows, &bounds, integers)
}
