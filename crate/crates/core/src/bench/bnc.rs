//! LP-based branch and bound with a fixed root cut pool.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::disjunction::{branching_variable, BoundedLp};
use crate::model::{Cut, Instance};
use crate::simplex::{solve_lp, BasisIndexSet, LpStatus};
use crate::{Error, Result, FEAS_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vpc,
    Spdc,
    Pdc,
    Default,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Vpc, Method::Spdc, Method::Pdc, Method::Default];

    pub fn label(self) -> &'static str {
        match self {
            Method::Vpc => "vpc",
            Method::Spdc => "spdc",
            Method::Pdc => "pdc",
            Method::Default => "default",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vpc" => Ok(Method::Vpc),
            "spdc" => Ok(Method::Spdc),
            "pdc" => Ok(Method::Pdc),
            "default" => Ok(Method::Default),
            other => Err(Error::Invalid(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RunStatus {
    Optimal,
    TimeLimit,
    Infeasible,
    Error,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub method: Method,
    pub terms: usize,
    /// Seconds; 0 stops right after the root.
    pub time_limit: f64,
    pub node_limit: usize,
    pub root_cut_rounds: usize,
    /// A known integer-feasible point; any root cut violating it is reported
    /// as invalid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_solution: Option<Vec<f64>>,
}

impl RunConfig {
    pub fn new(method: Method) -> Self {
        RunConfig {
            method,
            terms: 2,
            time_limit: 60.0,
            node_limit: 100_000,
            root_cut_rounds: 1,
            reference_solution: None,
        }
    }
}

/// Outcome of [`run_branch_and_cut`].
#[derive(Clone, Debug, PartialEq)]
pub struct BncResult {
    pub status: RunStatus,
    /// LP bound without cuts.
    pub lp_bound: f64,
    /// Root LP bound with the cuts appended.
    pub root_bound: f64,
    /// Global lower bound at termination.
    pub best_bound: f64,
    pub incumbent: Option<(f64, Vec<f64>)>,
    pub root_time: f64,
    pub total_time: f64,
    pub nodes: usize,
    pub branchings: usize,
}

struct Node {
    lb: Vec<f64>,
    ub: Vec<f64>,
    bound: f64,
    warm: Option<BasisIndexSet>,
}

fn is_cut_off(value: f64, incumbent: Option<f64>) -> bool {
    incumbent.is_some_and(|z| value >= z - 1e-9 * (1.0 + z.abs()))
}

/// Best-bound branch and bound with most-fractional branching, after
/// appending `cuts` to the root LP.
pub fn run_branch_and_cut(inst: &Instance, cuts: &[Cut], cfg: &RunConfig) -> Result<BncResult> {
    let start = Instant::now();
    if let Some(x) = &cfg.reference_solution {
        for cut in cuts {
            if cut.violation(x) > 1e-6 {
                return Err(Error::InvalidCut(format!(
                    "{:?} cut for {} removes a known integer-feasible point (violation {:e})",
                    cut.provenance,
                    inst.name,
                    cut.violation(x)
                )));
            }
        }
    }
    let base = solve_lp(&inst.rows, &inst.rhs, &inst.objective, None)?;
    let lp_bound = match base.status {
        LpStatus::Optimal => base.objective,
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => return Err(Error::Unbounded),
    };
    let mut rows = inst.rows.clone();
    let mut rhs = inst.rhs.clone();
    for cut in cuts {
        rows.push(cut.alpha.clone());
        rhs.push(cut.beta);
    }
    let lp = BoundedLp::new(inst, &rows, &rhs, &inst.objective);
    let bounds = inst.all_bounds();
    let lb0: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let ub0: Vec<f64> = bounds.iter().map(|b| b.1).collect();

    let root = lp.solve(&lb0, &ub0, None)?;
    let root_time = start.elapsed().as_secs_f64();
    let mut nodes = 1;
    let mut branchings = 0;
    let root_bound = match root.status {
        LpStatus::Optimal => root.objective,
        LpStatus::Infeasible => f64::INFINITY,
        LpStatus::Unbounded => return Err(Error::Unbounded),
    };
    if root.status == LpStatus::Infeasible {
        return Ok(BncResult {
            status: RunStatus::Infeasible,
            lp_bound,
            root_bound,
            best_bound: f64::INFINITY,
            incumbent: None,
            root_time,
            total_time: start.elapsed().as_secs_f64(),
            nodes,
            branchings,
        });
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut open: Vec<Node> = Vec::new();
    let mut limit_hit = false;
    match branching_variable(inst, &root.x, None) {
        None => incumbent = Some((root.objective, root.x.clone())),
        Some(j) => {
            branchings += 1;
            push_children(
                &mut open,
                &lb0,
                &ub0,
                j,
                root.x[j],
                root.objective,
                &root.basis,
            );
        }
    }
    // best bound first; ties go to the most recently created node
    while let Some(pos) = open
        .iter()
        .enumerate()
        .rev()
        .min_by(|a, b| a.1.bound.total_cmp(&b.1.bound))
        .map(|(i, _)| i)
    {
        if is_cut_off(open[pos].bound, incumbent.as_ref().map(|i| i.0)) {
            open.clear();
            break;
        }
        if start.elapsed().as_secs_f64() >= cfg.time_limit || nodes >= cfg.node_limit {
            limit_hit = true;
            break;
        }
        let node = open.swap_remove(pos);
        let sol = lp.solve(&node.lb, &node.ub, node.warm.as_ref())?;
        nodes += 1;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Optimal => {}
        }
        if is_cut_off(sol.objective, incumbent.as_ref().map(|i| i.0)) {
            continue;
        }
        match branching_variable(inst, &sol.x, None) {
            None => incumbent = Some((sol.objective, sol.x)),
            Some(j) => {
                branchings += 1;
                push_children(
                    &mut open,
                    &node.lb,
                    &node.ub,
                    j,
                    sol.x[j],
                    sol.objective,
                    &sol.basis,
                );
            }
        }
    }
    let open_min = open.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let inc_value = incumbent.as_ref().map_or(f64::INFINITY, |i| i.0);
    let (status, best_bound) = if limit_hit {
        (
            RunStatus::TimeLimit,
            open_min.min(inc_value).max(root_bound),
        )
    } else if incumbent.is_some() {
        (RunStatus::Optimal, inc_value)
    } else {
        (RunStatus::Infeasible, f64::INFINITY)
    };
    if let Some((_, x)) = &incumbent {
        debug_assert!(inst.max_violation(x) <= FEAS_TOL * 10.0);
    }
    Ok(BncResult {
        status,
        lp_bound,
        root_bound,
        best_bound,
        incumbent,
        root_time,
        total_time: start.elapsed().as_secs_f64(),
        nodes,
        branchings,
    })
}

fn push_children(
    open: &mut Vec<Node>,
    lb: &[f64],
    ub: &[f64],
    j: usize,
    value: f64,
    bound: f64,
    basis: &BasisIndexSet,
) {
    let mut down_ub = ub.to_vec();
    down_ub[j] = value.floor();
    let mut up_lb = lb.to_vec();
    up_lb[j] = value.ceil();
    open.push(Node {
        lb: lb.to_vec(),
        ub: down_ub,
        bound,
        warm: Some(basis.clone()),
    });
    open.push(Node {
        lb: up_lb,
        ub: ub.to_vec(),
        bound,
        warm: Some(basis.clone()),
    });
}

/// Percentage of the integrality gap closed by `improved`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapClosed {
    pub percent: f64,
    /// Set when `ip_opt == lp_bound`, where the ratio is undefined.
    pub degenerate: bool,
}

pub fn gap_closed(lp_bound: f64, improved: f64, ip_opt: f64) -> GapClosed {
    let gap = ip_opt - lp_bound;
    if gap.abs() <= 1e-9 * (1.0 + ip_opt.abs()) {
        return GapClosed {
            percent: 100.0,
            degenerate: true,
        };
    }
    GapClosed {
        percent: (100.0 * (improved - lp_bound) / gap).clamp(0.0, 100.0),
        degenerate: false,
    }
}
