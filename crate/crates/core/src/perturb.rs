//! Random perturbation of one data element of an instance to a prescribed
//! degree, and assembly of perturbed test families.

use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm2};
use crate::model::{Element, Instance};
use crate::simplex::{solve_lp, LpStatus};
use crate::{Error, Result};

/// Smallest step size tried before giving up.
pub const MIN_STEP: f64 = 1e-6;

/// Inner-loop cap per step size. The walk normally crosses `theta` long
/// before this; hitting it ends the search with "not found".
pub const MAX_INNER_STEPS: usize = 1_000_000;

/// `max(angle(u, v), |‖u‖ - ‖v‖| / ‖u‖)`.
pub fn find_degree(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm2(u), norm2(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidPerturbation(
            "zero-norm vector has no degree".into(),
        ));
    }
    let cos = (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0);
    Ok(angle_component(cos).max(((nu - nv) / nu).abs()))
}

fn angle_component(cos: f64) -> f64 {
    // identical directions must give exactly 0, which rounding in the
    // cosine would otherwise turn into ~1e-8
    if cos >= 1.0 - 4.0 * f64::EPSILON {
        0.0
    } else {
        cos.acos()
    }
}

/// Random walk from `u` that keeps the last iterate with degree below
/// `theta`, halving the step size from 1 until an iterate other than `u`
/// is found. `None` when no step size down to [`MIN_STEP`] yields one.
pub fn find_perturbation(u: &[f64], theta: f64, rng: &mut ChaCha8Rng) -> Result<Option<Vec<f64>>> {
    if theta.is_nan() || theta <= 0.0 {
        return Err(Error::InvalidPerturbation(format!(
            "degree {theta} is not positive"
        )));
    }
    if u.is_empty() || norm2(u) == 0.0 {
        return Err(Error::InvalidPerturbation(
            "cannot perturb a zero vector".into(),
        ));
    }
    let mut eps = 1.0;
    while eps >= MIN_STEP {
        let mut next = u.to_vec();
        let mut prev: Option<Vec<f64>> = None;
        let mut steps = 0;
        // a walk that lands on the zero vector has no degree; treat it as overshooting
        while find_degree(u, &next).unwrap_or(f64::INFINITY) < theta {
            if steps == MAX_INNER_STEPS {
                log::warn!("perturbation walk hit {MAX_INNER_STEPS} steps at step size {eps}");
                return Ok(None);
            }
            steps += 1;
            prev = Some(next.clone());
            let i = rng.gen_range(0..next.len());
            next[i] += rng.gen_range(-eps..=eps);
        }
        if let Some(p) = prev {
            if p.as_slice() != u {
                return Ok(Some(p));
            }
        }
        eps /= 2.0;
    }
    Ok(None)
}

/// Row-major matrix variant of [`find_perturbation`].
pub fn find_matrix_perturbation(
    u: &[Vec<f64>],
    theta: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<Vec<f64>>>> {
    let cols = u.first().map_or(0, |r| r.len());
    if u.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("ragged matrix".into()));
    }
    let flat: Vec<f64> = u.iter().flatten().copied().collect();
    Ok(
        find_perturbation(&flat, theta, rng)?
            .map(|v| v.chunks(cols).map(<[f64]>::to_vec).collect()),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PerturbationSpec {
    pub element: Element,
    pub degree: f64,
    pub count: usize,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: usize,
    #[serde(default)]
    pub seed: u64,
    /// Wall-clock budget in seconds; `None` is unlimited.
    #[serde(default)]
    pub time_budget: Option<f64>,
}

fn default_max_attempts() -> usize {
    1000
}

impl PerturbationSpec {
    pub fn new(element: Element, degree: f64, count: usize, seed: u64) -> Self {
        PerturbationSpec {
            element,
            degree,
            count,
            max_attempts: default_max_attempts(),
            seed,
            time_budget: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AttemptStats {
    pub attempts: usize,
    pub accepted: usize,
    pub not_found: usize,
    pub infeasible: usize,
    pub unbounded: usize,
    pub out_of_time: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbedInstance {
    pub instance: Instance,
    /// Degree actually achieved on the perturbed element.
    pub degree: f64,
    pub attempt: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestSet {
    pub base: String,
    pub spec: PerturbationSpec,
    pub members: Vec<PerturbedInstance>,
    pub stats: AttemptStats,
}

/// Draws perturbations of `spec.element` from one seeded stream until
/// `spec.count` admissible instances (LP relaxation feasible and bounded)
/// are found or the attempt or time budget runs out.
pub fn make_test_set(inst: &Instance, spec: &PerturbationSpec) -> Result<TestSet> {
    if spec.count == 0 {
        return Err(Error::InvalidPerturbation(
            "count must be at least 1".into(),
        ));
    }
    let u = inst.element_values(spec.element);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let start = Instant::now();
    let budget = spec.time_budget.map(Duration::from_secs_f64);
    let mut stats = AttemptStats::default();
    let mut members = Vec::new();
    while members.len() < spec.count && stats.attempts < spec.max_attempts {
        if budget.is_some_and(|b| start.elapsed() >= b) {
            stats.out_of_time = true;
            break;
        }
        stats.attempts += 1;
        let Some(v) = find_perturbation(&u, spec.degree, &mut rng)? else {
            stats.not_found += 1;
            continue;
        };
        let degree = find_degree(&u, &v)?;
        let name = format!(
            "{}_{}{}_{}",
            inst.name,
            spec.element.label(),
            spec.degree,
            members.len()
        );
        let candidate = inst.perturb_element(spec.element, &v)?.with_name(name);
        match solve_lp(&candidate.rows, &candidate.rhs, &candidate.objective, None)?.status {
            LpStatus::Optimal => {
                stats.accepted += 1;
                members.push(PerturbedInstance {
                    instance: candidate,
                    degree,
                    attempt: stats.attempts,
                });
            }
            LpStatus::Infeasible => stats.infeasible += 1,
            LpStatus::Unbounded => stats.unbounded += 1,
        }
    }
    Ok(TestSet {
        base: inst.name.clone(),
        spec: spec.clone(),
        members,
        stats,
    })
}
