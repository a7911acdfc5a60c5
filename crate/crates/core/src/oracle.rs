//! Brute-force reference solver for tiny bounded LPs: enumerates every
//! `n`-subset of rows, keeps the nonsingular ones whose intersection point
//! is feasible, and returns the best vertex. Shares no code with the simplex
//! beyond dense Gaussian elimination.

use crate::linalg::{dot, Square};
use crate::FEAS_TOL;

#[derive(Clone, Debug, PartialEq)]
pub enum VertexOptimum {
    Infeasible,
    Optimal { value: f64, point: Vec<f64> },
}

impl VertexOptimum {
    pub fn value(&self) -> Option<f64> {
        match self {
            VertexOptimum::Optimal { value, .. } => Some(*value),
            VertexOptimum::Infeasible => None,
        }
    }
}

/// `min c x` over `A x >= b`, assuming the feasible set is a polytope
/// (bounded, so a nonempty one has a vertex).
pub fn vertex_enumeration(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> VertexOptimum {
    let n = c.len();
    let m = a.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    if n == 0 || n > m {
        return VertexOptimum::Infeasible;
    }
    loop {
        let rows: Vec<&[f64]> = pick.iter().map(|&i| a[i].as_slice()).collect();
        if let Ok(sq) = Square::from_rows(&rows) {
            let rhs: Vec<f64> = pick.iter().map(|&i| b[i]).collect();
            if let Ok(x) = sq.solve(&rhs) {
                let scale = 1.0 + x.iter().fold(0.0f64, |s, v| s.max(v.abs()));
                let feasible = a
                    .iter()
                    .zip(b)
                    .all(|(r, bi)| dot(r, &x) >= bi - FEAS_TOL * scale);
                if feasible {
                    let v = dot(c, &x);
                    if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                        best = Some((v, x));
                    }
                }
            }
        }
        // next combination in lexicographic order
        let mut i = n;
        loop {
            if i == 0 {
                return match best {
                    Some((value, point)) => VertexOptimum::Optimal { value, point },
                    None => VertexOptimum::Infeasible,
                };
            }
            i -= 1;
            if pick[i] < m - n + i {
                pick[i] += 1;
                for k in i + 1..n {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}
