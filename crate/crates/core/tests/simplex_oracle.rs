//! Simplex results against vertex enumeration on tiny bounded LPs.

use pdi_core::linalg::dot;
use pdi_core::oracle::{vertex_enumeration, VertexOptimum};
use pdi_core::simplex::{solve_lp, LpStatus};
use pdi_core::{EQ_TOL, FEAS_TOL};
use proptest::prelude::*;

/// Box rows for `n` variables plus `extra` structural rows, at most 8 rows.
fn lp_strategy() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|n| {
        let extra = 8 - 2 * n;
        (
            prop::collection::vec((0i32..=2, 1i32..=3), n),
            prop::collection::vec((prop::collection::vec(-3i32..=3, n), -6i32..=2), 0..=extra),
            prop::collection::vec(-4i32..=4, n),
        )
            .prop_map(move |(boxes, structural, c)| {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (j, &(lo, width)) in boxes.iter().enumerate() {
                    let mut r = vec![0.0; n];
                    r[j] = 1.0;
                    a.push(r.clone());
                    b.push(lo as f64);
                    r[j] = -1.0;
                    a.push(r);
                    b.push(-((lo + width) as f64));
                }
                for (row, rhs) in structural {
                    a.push(row.into_iter().map(f64::from).collect());
                    b.push(rhs as f64 / 2.0);
                }
                (a, b, c.into_iter().map(f64::from).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn agrees_with_vertex_enumeration((a, b, c) in lp_strategy()) {
        let sol = solve_lp(&a, &b, &c, None).unwrap();
        match vertex_enumeration(&a, &b, &c) {
            VertexOptimum::Infeasible => {
                prop_assert_eq!(sol.status, LpStatus::Infeasible);
                let r = sol.farkas_ray.as_ref().unwrap();
                prop_assert!(r.iter().all(|&v| v >= -EQ_TOL));
                for j in 0..c.len() {
                    let col: f64 = a.iter().zip(r).map(|(row, ri)| row[j] * ri).sum();
                    prop_assert!(col.abs() <= EQ_TOL, "rA = {col}");
                }
                prop_assert!(dot(r, &b) >= FEAS_TOL);
            }
            VertexOptimum::Optimal { value, .. } => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective - value).abs() <= EQ_TOL * (1.0 + value.abs()),
                    "simplex {} oracle {}", sol.objective, value);
                prop_assert!(sol.duals.iter().all(|&y| y >= -EQ_TOL));
                let yb = dot(&sol.duals, &b);
                prop_assert!((yb - sol.objective).abs() <= EQ_TOL * (1.0 + value.abs()));
                for j in 0..c.len() {
                    let ya: f64 = a.iter().zip(&sol.duals).map(|(row, y)| row[j] * y).sum();
                    prop_assert!((ya - c[j]).abs() <= EQ_TOL);
                }
                for (i, (row, bi)) in a.iter().zip(&b).enumerate() {
                    let slack = dot(row, &sol.x) - bi;
                    prop_assert!(slack >= -FEAS_TOL);
                    prop_assert!((slack * sol.duals[i]).abs() <= EQ_TOL);
                }
            }
        }
    }

    #[test]
    fn warm_start_from_own_basis_is_free((a, b, c) in lp_strategy()) {
        let sol = solve_lp(&a, &b, &c, None).unwrap();
        prop_assume!(sol.status == LpStatus::Optimal);
        let again = solve_lp(&a, &b, &c, Some(&sol.basis)).unwrap();
        prop_assert_eq!(again.pivots, 0);
        prop_assert_eq!(again.objective, sol.objective);
    }
}
