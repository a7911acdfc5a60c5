//! Performance profiles of solve times relative to a baseline method.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bnc::{Method, RunStatus};
use super::experiment::RunRecord;

/// Label of the pointwise-minimum curve.
pub const BEST: &str = "best";

/// Empirical CDF of `(t_method - t_baseline) / t_baseline` per method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Profile {
    pub baseline: Method,
    /// Instances solved to optimality by every compared method.
    pub instances: usize,
    /// Applied threshold on the default method's total time, if any.
    pub min_default_time: Option<f64>,
    /// Per method: sorted `(relative value, fraction of instances <= value)`.
    pub curves: BTreeMap<String, Vec<(f64, f64)>>,
    /// Raw relative values per method, in instance order.
    pub values: BTreeMap<String, Vec<f64>>,
}

fn key(r: &RunRecord) -> (String, usize) {
    (r.instance.clone(), r.terms)
}

/// 75th percentile of the default method's optimal total times.
pub fn default_time_threshold(rows: &[RunRecord]) -> Option<f64> {
    let mut t: Vec<f64> = rows
        .iter()
        .filter(|r| r.method == Method::Default && r.status == RunStatus::Optimal)
        .filter_map(|r| r.total_time)
        .collect();
    if t.is_empty() {
        return None;
    }
    t.sort_by(f64::total_cmp);
    let pos = 0.75 * (t.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(t[lo] + (t[hi] - t[lo]) * (pos - lo as f64))
}

/// Profiles of `methods` against `baseline` over instances every one of
/// them solved, optionally restricted to instances where `default` took at
/// least `min_default_time` seconds. The `best` curve is the per-instance
/// minimum over the compared methods and the baseline.
pub fn performance_profile(
    rows: &[RunRecord],
    baseline: Method,
    methods: &[Method],
    min_default_time: Option<f64>,
) -> Profile {
    let mut times: BTreeMap<(String, usize), BTreeMap<Method, f64>> = BTreeMap::new();
    for r in rows {
        if r.status == RunStatus::Optimal {
            if let Some(t) = r.total_time {
                times.entry(key(r)).or_default().insert(r.method, t);
            }
        }
    }
    let compared: Vec<Method> = methods.iter().copied().filter(|&m| m != baseline).collect();
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut instances = 0;
    for per in times.values() {
        let Some(&tb) = per.get(&baseline) else {
            continue;
        };
        if tb <= 0.0 || !compared.iter().all(|m| per.contains_key(m)) {
            continue;
        }
        if let Some(limit) = min_default_time {
            if per.get(&Method::Default).is_none_or(|&t| t < limit) {
                continue;
            }
        }
        instances += 1;
        let mut best = 0.0f64;
        for &m in &compared {
            let v = (per[&m] - tb) / tb;
            best = best.min(v);
            values.entry(m.label().to_string()).or_default().push(v);
        }
        values.entry(BEST.to_string()).or_default().push(best);
    }
    if instances == 0 {
        log::warn!("no instances solved by {baseline} and every compared method");
    }
    let curves = values
        .iter()
        .map(|(m, v)| {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            let n = s.len() as f64;
            let pts = s
                .iter()
                .enumerate()
                .map(|(i, &x)| (x, (i + 1) as f64 / n))
                .collect();
            (m.clone(), pts)
        })
        .collect();
    Profile {
        baseline,
        instances,
        min_default_time,
        curves,
        values,
    }
}

impl Profile {
    /// Whether `best` lies pointwise at or below every other curve.
    pub fn best_dominates(&self) -> bool {
        let Some(best) = self.values.get(BEST) else {
            return true;
        };
        self.values
            .iter()
            .filter(|(m, _)| m.as_str() != BEST)
            .all(|(_, v)| v.iter().zip(best).all(|(x, b)| b <= x))
    }

    /// Rows `method,value,fraction` for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,value,fraction\n");
        for (m, pts) in &self.curves {
            for (x, f) in pts {
                out.push_str(&format!("{m},{x},{f}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, method: Method, t: f64) -> RunRecord {
        RunRecord {
            instance: instance.into(),
            base: "b".into(),
            method,
            element: None,
            degree: 0.5,
            terms: 2,
            lp_bound: None,
            cut_bound: None,
            root_bound: None,
            disj_bound_vd: None,
            disj_bound_pd: None,
            ip_opt: None,
            best_bound: None,
            cut_gen_time: None,
            root_time: None,
            total_time: Some(t),
            nodes: None,
            branchings: None,
            num_cuts: 0,
            status: RunStatus::Optimal,
            message: None,
        }
    }

    #[test]
    fn half_time_is_minus_one_half() {
        let rows = vec![row("i", Method::Vpc, 10.0), row("i", Method::Pdc, 5.0)];
        let p = performance_profile(&rows, Method::Vpc, &[Method::Pdc], None);
        assert_eq!(p.curves["pdc"], vec![(-0.5, 1.0)]);
        assert_eq!(p.values[BEST], vec![-0.5]);
    }

    #[test]
    fn identical_method_sits_at_zero() {
        let rows = vec![
            row("i", Method::Vpc, 2.0),
            row("i", Method::Spdc, 2.0),
            row("j", Method::Vpc, 3.0),
            row("j", Method::Spdc, 3.0),
        ];
        let p = performance_profile(&rows, Method::Vpc, &[Method::Spdc], None);
        assert!(p.values["spdc"].iter().all(|&v| v == 0.0));
        assert!(p.best_dominates());
    }

    #[test]
    fn best_is_pointwise_minimum() {
        let rows = vec![
            row("i", Method::Vpc, 4.0),
            row("i", Method::Spdc, 2.0),
            row("i", Method::Pdc, 6.0),
            row("j", Method::Vpc, 1.0),
            row("j", Method::Spdc, 3.0),
            row("j", Method::Pdc, 0.5),
        ];
        let p = performance_profile(&rows, Method::Vpc, &[Method::Spdc, Method::Pdc], None);
        assert_eq!(p.values[BEST], vec![-0.5, -0.5]);
        assert!(p.best_dominates());
    }

    #[test]
    fn default_time_filter() {
        let mut rows = Vec::new();
        for (i, t) in [1.0, 2.0, 3.0, 4.0, 5.0].iter().enumerate() {
            let name = format!("i{i}");
            rows.push(row(&name, Method::Vpc, 1.0));
            rows.push(row(&name, Method::Pdc, 1.0));
            rows.push(row(&name, Method::Default, *t));
        }
        let threshold = default_time_threshold(&rows).unwrap();
        assert_eq!(threshold, 4.0);
        let p = performance_profile(&rows, Method::Vpc, &[Method::Pdc], Some(threshold));
        assert_eq!(p.instances, 2);
        let none = performance_profile(&rows, Method::Vpc, &[Method::Pdc], Some(100.0));
        assert_eq!(none.instances, 0);
        assert!(none.curves.is_empty());
    }
}
