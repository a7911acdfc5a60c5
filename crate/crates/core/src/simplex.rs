//! Dense simplex on `min c x` subject to `A x >= b`, working directly on
//! row bases: a basis is a set of `n` linearly independent rows, its basic
//! solution solves those rows with equality, and its duals are `c A_B^{-1}`.
//! Keeping rows (rather than slack columns) as the unit of a basis lets duals
//! and Farkas rays line up positionally with the stacked systems the
//! certificates are written against.
//!
//! A cold start picks one unit row per variable with a sign that makes the
//! duals nonnegative, so systems with explicit bound rows always start dual
//! feasible and the dual simplex takes over. Variables lacking such a row get
//! a temporary artificial box row; an artificial row with a positive dual at
//! the optimum signals unboundedness.

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, Square};
use crate::{Error, Result, EQ_TOL, FEAS_TOL};

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const ARTIFICIAL_BOUND: f64 = 1e9;
const REFACTOR_EVERY: usize = 64;

/// Row indices forming a basis of a stacked system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisIndexSet(pub Vec<usize>);

impl BasisIndexSet {
    pub fn rows(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    /// Copy with indices in increasing order.
    pub fn sorted(&self) -> BasisIndexSet {
        let mut v = self.0.clone();
        v.sort_unstable();
        BasisIndexSet(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal point, or the last basic solution visited otherwise.
    pub x: Vec<f64>,
    /// `c x` at the optimum; `+inf` when infeasible, `-inf` when unbounded.
    pub objective: f64,
    /// One nonnegative dual per row, zero off the basis.
    pub duals: Vec<f64>,
    pub basis: BasisIndexSet,
    /// `r >= 0` with `r A = 0` and `r b > 0`, present iff infeasible.
    pub farkas_ray: Option<Vec<f64>>,
    pub pivots: usize,
}

/// Solves `min c x` over `A x >= b`, optionally warm-started from `warm`.
pub fn solve_lp(
    a: &[Vec<f64>],
    b: &[f64],
    c: &[f64],
    warm: Option<&BasisIndexSet>,
) -> Result<LpSolution> {
    let n = c.len();
    if a.len() != b.len() || a.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension(format!(
            "LP with {} rows, {} rhs entries and {n} columns",
            a.len(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(empty_solution(a, b));
    }
    let s = match warm {
        Some(basis) => {
            let s = Solver::with_basis(a, b, c, basis)?;
            if s.dual_feasible() {
                s.dual_simplex()?.restore_costs()?
            } else if s.primal_feasible() {
                s.primal_simplex()?
            } else {
                let cold = Solver::cold(a, b, c)?;
                cold.dual_simplex()?.restore_costs()?
            }
        }
        None => {
            let s = Solver::cold(a, b, c)?;
            s.dual_simplex()?.restore_costs()?
        }
    };
    s.finish()
}

/// `(A_B)^{-1} b_B`.
pub fn basic_solution_of(basis: &BasisIndexSet, a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let rows: Vec<&[f64]> = basis.0.iter().map(|&i| a[i].as_slice()).collect();
    let n = a.first().map_or(0, |r| r.len());
    if rows.len() != n || basis.0.iter().any(|&i| i >= a.len()) {
        return Err(Error::Dimension(format!(
            "basis of {} rows for {n} columns",
            rows.len()
        )));
    }
    let m = Square::from_rows(&rows)?;
    let rhs: Vec<f64> = basis.0.iter().map(|&i| b[i]).collect();
    m.solve(&rhs)
}

/// Whether the basic solution of `basis` satisfies every row within `FEAS_TOL`.
pub fn is_basis_feasible(basis: &BasisIndexSet, a: &[Vec<f64>], b: &[f64]) -> Result<bool> {
    let x = basic_solution_of(basis, a, b)?;
    Ok(a.iter().zip(b).all(|(r, bi)| dot(r, &x) >= bi - FEAS_TOL))
}

fn empty_solution(a: &[Vec<f64>], b: &[f64]) -> LpSolution {
    // with no columns every row reads 0 >= b_i
    match b.iter().position(|&bi| bi > FEAS_TOL) {
        Some(i) => {
            let mut ray = vec![0.0; a.len()];
            ray[i] = 1.0;
            LpSolution {
                status: LpStatus::Infeasible,
                x: vec![],
                objective: f64::INFINITY,
                duals: vec![0.0; a.len()],
                basis: BasisIndexSet(vec![]),
                farkas_ray: Some(ray),
                pivots: 0,
            }
        }
        None => LpSolution {
            status: LpStatus::Optimal,
            x: vec![],
            objective: 0.0,
            duals: vec![0.0; a.len()],
            basis: BasisIndexSet(vec![]),
            farkas_ray: None,
            pivots: 0,
        },
    }
}

/// Pivot threshold scaled to the largest entry of the pivot row.
fn pivot_tol(w: &[f64]) -> f64 {
    PIVOT_TOL * w.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

enum Outcome {
    Optimal,
    Infeasible(Vec<f64>),
    Unbounded,
}

struct Solver<'a> {
    a: &'a [Vec<f64>],
    b: &'a [f64],
    /// Cost driving the pivots; differs from `c` while perturbed.
    cost: Vec<f64>,
    c: &'a [f64],
    n: usize,
    m: usize,
    /// Artificial rows `sign * x_j >= -ARTIFICIAL_BOUND`, indexed from `m`.
    artificial: Vec<(usize, f64)>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Square,
    since_refactor: usize,
    pivots: usize,
    degenerate_run: usize,
    bland: bool,
    perturbed: bool,
    outcome: Option<Outcome>,
}

impl<'a> Solver<'a> {
    fn cold(a: &'a [Vec<f64>], b: &'a [f64], c: &'a [f64]) -> Result<Self> {
        let n = c.len();
        let m = a.len();
        let mut basis = Vec::with_capacity(n);
        let mut artificial = Vec::new();
        for j in 0..n {
            let want_positive = c[j] >= 0.0;
            let mut best: Option<(usize, f64)> = None;
            for (i, r) in a.iter().enumerate() {
                let coef = r[j];
                if coef == 0.0 || (coef > 0.0) != want_positive {
                    continue;
                }
                if r.iter().enumerate().any(|(k, &v)| k != j && v != 0.0) {
                    continue;
                }
                // tightest bound in the wanted direction
                let bound = b[i] / coef;
                let better = match best {
                    None => true,
                    Some((_, cur)) => {
                        if want_positive {
                            bound > cur
                        } else {
                            bound < cur
                        }
                    }
                };
                if better {
                    best = Some((i, bound));
                }
            }
            match best {
                Some((i, _)) => basis.push(i),
                None => {
                    basis.push(m + artificial.len());
                    artificial.push((j, if want_positive { 1.0 } else { -1.0 }));
                }
            }
        }
        Self::build(a, b, c, basis, artificial)
    }

    fn with_basis(
        a: &'a [Vec<f64>],
        b: &'a [f64],
        c: &'a [f64],
        warm: &BasisIndexSet,
    ) -> Result<Self> {
        let n = c.len();
        let m = a.len();
        if warm.0.len() != n || warm.0.iter().any(|&i| i >= m) {
            return Err(Error::Dimension(format!(
                "warm basis has {} rows (max index {:?}) for {n} columns and {m} rows",
                warm.0.len(),
                warm.0.iter().max()
            )));
        }
        let mut seen = vec![false; m];
        for &i in &warm.0 {
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::SingularBasis);
            }
        }
        Self::build(a, b, c, warm.0.clone(), Vec::new())
    }

    fn build(
        a: &'a [Vec<f64>],
        b: &'a [f64],
        c: &'a [f64],
        basis: Vec<usize>,
        artificial: Vec<(usize, f64)>,
    ) -> Result<Self> {
        let n = c.len();
        let m = a.len();
        let mut in_basis = vec![false; m + artificial.len()];
        for &i in &basis {
            in_basis[i] = true;
        }
        let mut s = Solver {
            a,
            b,
            cost: c.to_vec(),
            c,
            n,
            m,
            artificial,
            basis,
            in_basis,
            binv: Square::identity(n),
            since_refactor: 0,
            pivots: 0,
            degenerate_run: 0,
            bland: false,
            perturbed: false,
            outcome: None,
        };
        s.refactor()?;
        Ok(s)
    }

    fn total_rows(&self) -> usize {
        self.m + self.artificial.len()
    }

    /// Coefficient `j` of row `i` and the row as a dense vector when needed.
    fn row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        if i < self.m {
            std::borrow::Cow::Borrowed(&self.a[i])
        } else {
            let (j, sign) = self.artificial[i - self.m];
            let mut r = vec![0.0; self.n];
            r[j] = sign;
            std::borrow::Cow::Owned(r)
        }
    }

    fn rhs(&self, i: usize) -> f64 {
        if i < self.m {
            self.b[i]
        } else {
            -ARTIFICIAL_BOUND
        }
    }

    fn refactor(&mut self) -> Result<()> {
        let rows: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|&i| self.row(i).into_owned())
            .collect();
        self.binv = Square::from_rows(&rows)?.inverse()?;
        self.since_refactor = 0;
        Ok(())
    }

    fn primal_point(&self) -> Vec<f64> {
        let rhs: Vec<f64> = self.basis.iter().map(|&i| self.rhs(i)).collect();
        self.binv.mul_vec(&rhs)
    }

    fn duals(&self) -> Vec<f64> {
        self.binv.left_mul(&self.cost)
    }

    fn dual_feasible(&self) -> bool {
        self.duals().iter().all(|&y| y >= -EQ_TOL)
    }

    fn primal_feasible(&self) -> bool {
        let x = self.primal_point();
        (0..self.total_rows()).all(|i| dot(&self.row(i), &x) >= self.rhs(i) - FEAS_TOL)
    }

    fn iteration_limit(&self) -> usize {
        50 * (self.m + self.n) + 1000
    }

    /// Shifts the cost so every basic dual grows by a small distinct amount,
    /// which breaks the dual degeneracy that stalls the dual simplex. The
    /// true cost is restored by [`Solver::restore_costs`].
    fn perturb_costs(&mut self) {
        let scale = 1e-6 * self.c.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for p in 0..self.n {
            let delta = scale * (1.0 + (p as f64 * 0.618_033_988_75).fract());
            let row = self.row(self.basis[p]).into_owned();
            for (cj, aj) in self.cost.iter_mut().zip(&row) {
                *cj += delta * aj;
            }
        }
        self.perturbed = true;
    }

    /// Returns to the true cost after a perturbed dual phase; the basis stays
    /// primal feasible, so the primal simplex finishes from there.
    fn restore_costs(mut self) -> Result<Self> {
        if !self.perturbed || !matches!(self.outcome, Some(Outcome::Optimal)) {
            return Ok(self);
        }
        self.cost = self.c.to_vec();
        self.perturbed = false;
        self.bland = false;
        self.degenerate_run = 0;
        self.outcome = None;
        self.primal_simplex()
    }

    fn note_step(&mut self, step: f64) {
        if step <= RATIO_TIE {
            self.degenerate_run += 1;
            if self.degenerate_run > 2 * (self.m + self.n) {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
    }

    /// Replaces basis position `p` by row `r`, given `w = A_r B^{-1}`.
    fn pivot(&mut self, p: usize, r: usize, w: &[f64]) -> Result<()> {
        let wp = w[p];
        let n = self.n;
        let colp: Vec<f64> = self.binv.col(p);
        for (i, &wi) in w.iter().enumerate().take(n) {
            if i == p {
                continue;
            }
            let f = wi / wp;
            if f != 0.0 {
                for (k, &ck) in colp.iter().enumerate() {
                    self.binv[(k, i)] -= ck * f;
                }
            }
        }
        for (k, &ck) in colp.iter().enumerate() {
            self.binv[(k, p)] = ck / wp;
        }
        self.in_basis[self.basis[p]] = false;
        self.in_basis[r] = true;
        self.basis[p] = r;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        Ok(())
    }

    /// Most violated nonbasic row (scaled by its norm), or the lowest-index
    /// violated row in Bland mode.
    fn choose_violated(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.total_rows() {
            if self.in_basis[i] {
                continue;
            }
            let row = self.row(i);
            let viol = self.rhs(i) - dot(&row, x);
            if viol <= FEAS_TOL {
                continue;
            }
            if self.bland {
                return Some(i);
            }
            let score = viol / crate::linalg::norm2(&row).max(1e-12);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| i)
    }

    fn dual_simplex(mut self) -> Result<Self> {
        let limit = self.iteration_limit();
        let mut verified = false;
        let patience = self.m + self.n;
        let mut best = f64::NEG_INFINITY;
        let mut stalled = 0;
        for _ in 0..limit {
            let x = self.primal_point();
            let value = dot(&self.cost, &x);
            if value > best + 1e-9 * (1.0 + best.abs()) {
                best = value;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > patience {
                    if self.perturbed {
                        self.bland = true;
                    } else {
                        self.perturb_costs();
                        best = f64::NEG_INFINITY;
                    }
                    stalled = 0;
                }
            }
            let Some(r) = self.choose_violated(&x) else {
                if self.since_refactor > 0 && !verified {
                    self.refactor()?;
                    verified = true;
                    continue;
                }
                self.outcome = Some(Outcome::Optimal);
                return Ok(self);
            };
            let row = self.row(r).into_owned();
            let w = self.binv.left_mul(&row);
            let y = self.duals();
            let tol = pivot_tol(&w);
            let mut leave: Option<(usize, f64)> = None;
            for (p, (&wp, &yp)) in w.iter().zip(&y).enumerate() {
                if wp <= tol {
                    continue;
                }
                let ratio = yp.max(0.0) / wp;
                leave = match leave {
                    None => Some((p, ratio)),
                    Some((q, best)) => {
                        if ratio < best - RATIO_TIE
                            || (ratio <= best + RATIO_TIE && self.basis[p] < self.basis[q])
                        {
                            Some((p, ratio.min(best)))
                        } else {
                            Some((q, best))
                        }
                    }
                };
            }
            let Some((p, _)) = leave else {
                if self.since_refactor > 0 && !verified {
                    self.refactor()?;
                    verified = true;
                    continue;
                }
                let mut ray = vec![0.0; self.total_rows()];
                ray[r] = 1.0;
                for (pos, &wp) in w.iter().enumerate() {
                    if wp < 0.0 {
                        ray[self.basis[pos]] = -wp;
                    }
                }
                self.outcome = Some(Outcome::Infeasible(ray));
                return Ok(self);
            };
            verified = false;
            self.pivot(p, r, &w)?;
        }
        Err(Error::Numerical(format!(
            "dual simplex exceeded {limit} iterations"
        )))
    }

    fn primal_simplex(mut self) -> Result<Self> {
        let limit = self.iteration_limit();
        let mut verified = false;
        for _ in 0..limit {
            let y = self.duals();
            let mut enter: Option<usize> = None;
            for (p, &yp) in y.iter().enumerate() {
                if yp >= -EQ_TOL {
                    continue;
                }
                enter = match enter {
                    None => Some(p),
                    Some(q) if self.bland => {
                        if self.basis[p] < self.basis[q] {
                            Some(p)
                        } else {
                            Some(q)
                        }
                    }
                    Some(q) => {
                        if yp < y[q] {
                            Some(p)
                        } else {
                            Some(q)
                        }
                    }
                };
            }
            let Some(p) = enter else {
                if self.since_refactor > 0 && !verified {
                    self.refactor()?;
                    verified = true;
                    continue;
                }
                self.outcome = Some(Outcome::Optimal);
                return Ok(self);
            };
            let d = self.binv.col(p);
            let x = self.primal_point();
            let mut block: Option<(usize, f64)> = None;
            for i in 0..self.total_rows() {
                if self.in_basis[i] {
                    continue;
                }
                let row = self.row(i);
                let ad = dot(&row, &d);
                if ad >= -PIVOT_TOL {
                    continue;
                }
                let slack = (dot(&row, &x) - self.rhs(i)).max(0.0);
                let t = slack / -ad;
                if block.is_none_or(|(_, best)| t < best - RATIO_TIE) {
                    block = Some((i, t));
                }
            }
            let Some((r, step)) = block else {
                self.outcome = Some(Outcome::Unbounded);
                return Ok(self);
            };
            verified = false;
            let w = self.binv.left_mul(&self.row(r));
            self.note_step(step);
            self.pivot(p, r, &w)?;
        }
        Err(Error::Numerical(format!(
            "primal simplex exceeded {limit} iterations"
        )))
    }

    /// Swaps zero-dual artificial rows for tight real rows.
    fn drop_artificials(&mut self) -> Result<bool> {
        let x = self.primal_point();
        for p in 0..self.n {
            if self.basis[p] < self.m {
                continue;
            }
            let mut replaced = false;
            for r in 0..self.m {
                if self.in_basis[r] || (dot(&self.a[r], &x) - self.b[r]).abs() > FEAS_TOL {
                    continue;
                }
                let w = self.binv.left_mul(&self.a[r]);
                if w[p].abs() > PIVOT_TOL {
                    self.pivot(p, r, &w)?;
                    replaced = true;
                    break;
                }
            }
            if !replaced {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn finish(mut self) -> Result<LpSolution> {
        let outcome = self
            .outcome
            .take()
            .expect("solver finished without outcome");
        let m = self.m;
        match outcome {
            Outcome::Optimal => {
                let y = self.duals();
                if self
                    .basis
                    .iter()
                    .zip(&y)
                    .any(|(&i, &yi)| i >= m && yi > EQ_TOL)
                {
                    return Ok(self.unbounded_solution());
                }
                if self.basis.iter().any(|&i| i >= m) && !self.drop_artificials()? {
                    return Err(Error::Numerical(
                        "optimal face has no vertex (free direction without bound rows)".into(),
                    ));
                }
                let x = self.primal_point();
                let y = self.duals();
                let mut duals = vec![0.0; m];
                for (&i, &yi) in self.basis.iter().zip(&y) {
                    duals[i] = yi.max(0.0);
                }
                Ok(LpSolution {
                    status: LpStatus::Optimal,
                    objective: dot(self.c, &x),
                    x,
                    duals,
                    basis: BasisIndexSet(self.basis.clone()),
                    farkas_ray: None,
                    pivots: self.pivots,
                })
            }
            Outcome::Infeasible(ray) => {
                if ray[m..].iter().any(|&v| v > 0.0) {
                    return Err(Error::Numerical(
                        "infeasibility certificate depends on artificial bounds".into(),
                    ));
                }
                Ok(LpSolution {
                    status: LpStatus::Infeasible,
                    x: self.primal_point(),
                    objective: f64::INFINITY,
                    duals: vec![0.0; m],
                    basis: BasisIndexSet(self.basis.iter().copied().filter(|&i| i < m).collect()),
                    farkas_ray: Some(ray[..m].to_vec()),
                    pivots: self.pivots,
                })
            }
            Outcome::Unbounded => Ok(self.unbounded_solution()),
        }
    }

    fn unbounded_solution(&self) -> LpSolution {
        LpSolution {
            status: LpStatus::Unbounded,
            x: self.primal_point(),
            objective: f64::NEG_INFINITY,
            duals: vec![0.0; self.m],
            basis: BasisIndexSet(self.basis.iter().copied().filter(|&i| i < self.m).collect()),
            farkas_ray: None,
            pivots: self.pivots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::two_var;

    fn check_optimal(a: &[Vec<f64>], b: &[f64], c: &[f64], sol: &LpSolution) {
        assert_eq!(sol.status, LpStatus::Optimal);
        let n = c.len();
        let mut ya = vec![0.0; n];
        for (i, &y) in sol.duals.iter().enumerate() {
            assert!(y >= 0.0);
            for j in 0..n {
                ya[j] += y * a[i][j];
            }
            let slack = dot(&a[i], &sol.x) - b[i];
            assert!(slack >= -FEAS_TOL);
            assert!(y * slack <= EQ_TOL, "complementary slackness row {i}");
        }
        for j in 0..n {
            assert!((ya[j] - c[j]).abs() <= EQ_TOL);
        }
        let yb = dot(&sol.duals, b);
        assert!((yb - sol.objective).abs() <= EQ_TOL * (1.0 + sol.objective.abs()));
    }

    #[test]
    fn two_var_relaxation() {
        let inst = two_var();
        let sol = solve_lp(&inst.rows, &inst.rhs, &inst.objective, None).unwrap();
        check_optimal(&inst.rows, &inst.rhs, &inst.objective, &sol);
        assert!((sol.objective + 1.5).abs() < 1e-12);
        assert!((sol.x[0] - 0.5).abs() < 1e-12 && (sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_give_ray() {
        let a = vec![vec![1.0], vec![-1.0]];
        let b = vec![1.0, 0.0];
        let sol = solve_lp(&a, &b, &[3.0], None).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
        let r = sol.farkas_ray.unwrap();
        assert!(r.iter().all(|&v| v >= 0.0));
        assert!((r[0] * 1.0 - r[1]).abs() < 1e-12);
        assert!(dot(&r, &b) > 0.0);
    }

    #[test]
    fn zero_objective() {
        let inst = two_var();
        let sol = solve_lp(&inst.rows, &inst.rhs, &[0.0, 0.0], None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn warm_start_from_optimal_basis_takes_no_pivots() {
        let inst = two_var();
        let sol = solve_lp(&inst.rows, &inst.rhs, &inst.objective, None).unwrap();
        let again = solve_lp(&inst.rows, &inst.rhs, &inst.objective, Some(&sol.basis)).unwrap();
        assert_eq!(again.pivots, 0);
        assert_eq!(again.x, sol.x);
    }

    #[test]
    fn warm_start_after_rhs_change_uses_dual_simplex() {
        let inst = two_var();
        let sol = solve_lp(&inst.rows, &inst.rhs, &inst.objective, None).unwrap();
        let mut b = inst.rhs.clone();
        b[0] = -1.2;
        let warm = solve_lp(&inst.rows, &b, &inst.objective, Some(&sol.basis)).unwrap();
        let cold = solve_lp(&inst.rows, &b, &inst.objective, None).unwrap();
        check_optimal(&inst.rows, &b, &inst.objective, &warm);
        assert!((warm.objective - cold.objective).abs() < 1e-12);
    }

    #[test]
    fn warm_start_primal_feasible_basis() {
        // origin basis is feasible but not dual feasible for min -x1 - x2
        let inst = two_var();
        let basis = BasisIndexSet(vec![1, 3]);
        let sol = solve_lp(&inst.rows, &inst.rhs, &inst.objective, Some(&basis)).unwrap();
        check_optimal(&inst.rows, &inst.rhs, &inst.objective, &sol);
        assert!((sol.objective + 1.5).abs() < 1e-12);
    }

    #[test]
    fn unbounded_without_bound_rows() {
        // min -x subject to x >= 0 only
        let sol = solve_lp(&[vec![1.0]], &[0.0], &[-1.0], None).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn missing_bound_rows_still_solve() {
        // min x1 + x2 s.t. x1 + x2 >= 1, x1 - x2 >= -1 (no bound rows)
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
        let b = vec![1.0, -1.0, -1.0];
        let sol = solve_lp(&a, &b, &[1.0, 2.0], None).unwrap();
        check_optimal(&a, &b, &[1.0, 2.0], &sol);
        assert!((sol.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn basic_solutions() {
        let inst = two_var();
        let x = basic_solution_of(&BasisIndexSet(vec![1, 4]), &inst.rows, &inst.rhs).unwrap();
        assert_eq!(x, vec![0.0, 1.0]);
        let mut rows = inst.rows.clone();
        let mut rhs = inst.rhs.clone();
        rows.push(vec![1.0, 0.0]);
        rhs.push(1.0);
        let x = basic_solution_of(&BasisIndexSet(vec![0, 5]), &rows, &rhs).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
        assert!(matches!(
            basic_solution_of(&BasisIndexSet(vec![1, 5]), &rows, &rhs),
            Err(Error::SingularBasis)
        ));
    }

    #[test]
    fn basis_feasibility() {
        let inst = two_var();
        assert!(is_basis_feasible(&BasisIndexSet(vec![1, 3]), &inst.rows, &inst.rhs).unwrap());
        assert!(!is_basis_feasible(&BasisIndexSet(vec![2, 4]), &inst.rows, &inst.rhs).unwrap());
        // optimal vertex (0.5, 1) moves along x2 = 1 as the structural rhs grows
        let basis = BasisIndexSet(vec![0, 4]);
        for (rhs, feasible) in [(-2.0, true), (-2.5, true), (-3.5, false)] {
            let p = inst
                .perturb_element(crate::model::Element::Rhs, &[rhs])
                .unwrap();
            let x = basic_solution_of(&basis, &p.rows, &p.rhs).unwrap();
            assert_eq!(p.max_violation(&x) <= FEAS_TOL, feasible);
            assert_eq!(
                is_basis_feasible(&basis, &p.rows, &p.rhs).unwrap(),
                feasible
            );
        }
    }
}
