//! Fresh disjunctive cuts from the cut-generating LP, with the per-term
//! Farkas certificate and determining bases that later transfer the cut to
//! perturbed instances.
//!
//! The CGLP over variables `(alpha, beta, v^t)` is
//!
//! ```text
//! min  alpha x̄ - beta
//! s.t. alpha_j - v^t A^t_j >= 0      for every feasible term t and column j
//!      v^t b^t - beta      >= 0      for every feasible term t
//!      sum_t sum_i v^t_i    = 1
//!      v >= 0
//! ```
//!
//! with non-binding boxes on every variable so the row-basis simplex always
//! has unit rows to start from.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::disjunction::{term_polyhedron, Disjunction, TermPolyhedron};
use crate::linalg::{dot, norm_inf};
use crate::model::{Cut, Instance, JsonModel, Provenance};
use crate::simplex::{solve_lp, BasisIndexSet, LpStatus};
use crate::{Error, Result, EQ_TOL, FEAS_TOL};

/// One nonnegative multiplier vector per term, indexed like the term's
/// stacked rows; all zero for terms that were empty at generation time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FarkasCertificate {
    pub source_instance: String,
    pub disjunction_ref: String,
    pub per_term: Vec<Vec<f64>>,
}

impl FarkasCertificate {
    pub fn len(&self) -> usize {
        self.per_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_term.is_empty()
    }

    pub fn is_zero(&self, t: usize) -> bool {
        self.per_term[t].iter().all(|&v| v == 0.0)
    }

    /// Multiplies every vector by `s > 0`.
    pub fn scaled(&self, s: f64) -> FarkasCertificate {
        FarkasCertificate {
            per_term: self
                .per_term
                .iter()
                .map(|v| v.iter().map(|x| x * s).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// Errors unless the certificate has one vector per term of the right length.
    pub fn check_shape(&self, polys: &[TermPolyhedron]) -> Result<()> {
        if self.per_term.len() != polys.len() {
            return Err(Error::CertificateMismatch(format!(
                "certificate has {} terms, disjunction has {}",
                self.per_term.len(),
                polys.len()
            )));
        }
        for (t, (v, q)) in self.per_term.iter().zip(polys).enumerate() {
            if v.len() != q.num_rows() {
                return Err(Error::CertificateMismatch(format!(
                    "term {t}: {} multipliers for {} rows",
                    v.len(),
                    q.num_rows()
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn disjunction_ref(disj: &Disjunction) -> String {
    format!("{}/{}-term", disj.source_instance, disj.len())
}

/// Per-term row bases; `None` marks a term that was empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeterminingBases {
    pub per_term: Vec<Option<BasisIndexSet>>,
}

impl DeterminingBases {
    /// Whether every positive multiplier of `cert` sits on a basis row.
    pub fn determines(&self, cert: &FarkasCertificate) -> bool {
        self.per_term.len() == cert.len()
            && self
                .per_term
                .iter()
                .zip(&cert.per_term)
                .all(|(b, v)| match b {
                    Some(b) => v
                        .iter()
                        .enumerate()
                        .all(|(i, &vi)| vi <= 0.0 || b.contains(i)),
                    None => v.iter().all(|&vi| vi == 0.0),
                })
    }
}

/// Output of [`generate_cut`].
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedCut {
    pub cut: Cut,
    pub certificate: FarkasCertificate,
    pub bases: DeterminingBases,
    /// Whether the separated point violates the cut by more than `FEAS_TOL`.
    pub violated: bool,
    /// Optimal CGLP value before post-processing; negative when separating.
    pub cglp_value: f64,
}

struct CglpLayout {
    n: usize,
    /// First column of each feasible term's multiplier block.
    offsets: Vec<usize>,
    cols: usize,
}

fn build_cglp(
    polys: &[&TermPolyhedron],
    point: &[f64],
) -> (CglpLayout, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = point.len();
    let mut offsets = Vec::with_capacity(polys.len());
    let mut cols = n + 1;
    for q in polys {
        offsets.push(cols);
        cols += q.num_rows();
    }
    let beta = n;
    let max_a = polys
        .iter()
        .flat_map(|q| q.rows.iter().flatten())
        .fold(0.0f64, |m, &a| m.max(a.abs()));
    let max_b = polys
        .iter()
        .flat_map(|q| q.rhs.iter())
        .fold(0.0f64, |m, &b| m.max(b.abs()));

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let mut push = |row: Vec<f64>, r: f64| {
        rows.push(row);
        rhs.push(r);
    };
    for (q, &off) in polys.iter().zip(&offsets) {
        for j in 0..n {
            let mut row = vec![0.0; cols];
            row[j] = 1.0;
            for (i, a) in q.rows.iter().enumerate() {
                row[off + i] = -a[j];
            }
            push(row, 0.0);
        }
        let mut row = vec![0.0; cols];
        row[beta] = -1.0;
        for (i, &b) in q.rhs.iter().enumerate() {
            row[off + i] = b;
        }
        push(row, 0.0);
    }
    let mut sum = vec![0.0; cols];
    sum[n + 1..].iter_mut().for_each(|s| *s = 1.0);
    push(sum.clone(), 1.0);
    push(sum.iter().map(|s| -s).collect(), -1.0);
    for c in n + 1..cols {
        let mut lo = vec![0.0; cols];
        lo[c] = 1.0;
        push(lo, 0.0);
        let mut up = vec![0.0; cols];
        up[c] = -1.0;
        push(up, -1.0);
    }
    for (c, bound) in (0..n)
        .map(|j| (j, max_a + 1.0))
        .chain([(beta, max_b + 1.0)])
    {
        let mut lo = vec![0.0; cols];
        lo[c] = 1.0;
        push(lo, -bound);
        let mut up = vec![0.0; cols];
        up[c] = -1.0;
        push(up, -bound);
    }
    let mut objective = vec![0.0; cols];
    objective[..n].copy_from_slice(point);
    objective[beta] = -1.0;
    (CglpLayout { n, offsets, cols }, rows, rhs, objective)
}

/// Certificate and bases for fixed `alpha`: for every term, the dual optimum
/// and optimal basis of `min { alpha x : x in Q^t }`; zero / `None` for empty
/// terms.
pub fn certificate_for_alpha(
    inst: &Instance,
    disj: &Disjunction,
    alpha: &[f64],
) -> Result<(FarkasCertificate, DeterminingBases)> {
    let mut per_term = Vec::with_capacity(disj.len());
    let mut bases = Vec::with_capacity(disj.len());
    for (t, term) in disj.terms.iter().enumerate() {
        let q = term_polyhedron(inst, term);
        let sol = q.solve(alpha, None).map_err(|e| Error::Term {
            term: t,
            source: Box::new(e),
        })?;
        match sol.status {
            LpStatus::Optimal => {
                per_term.push(sol.duals);
                bases.push(Some(sol.basis));
            }
            LpStatus::Infeasible => {
                per_term.push(vec![0.0; q.num_rows()]);
                bases.push(None);
            }
            LpStatus::Unbounded => {
                return Err(Error::Term {
                    term: t,
                    source: Box::new(Error::Unbounded),
                })
            }
        }
    }
    if bases.iter().all(Option::is_none) {
        return Err(Error::AllTermsInfeasible);
    }
    Ok((
        FarkasCertificate {
            source_instance: inst.name.clone(),
            disjunction_ref: disjunction_ref(disj),
            per_term,
        },
        DeterminingBases { per_term: bases },
    ))
}

/// Separates `point` with the CGLP, tightens `(alpha, beta)` to a certificate
/// of validity, replaces the multipliers by per-term dual optima and rescales
/// to `||alpha||_inf = 1`.
pub fn generate_cut(inst: &Instance, disj: &Disjunction, point: &[f64]) -> Result<GeneratedCut> {
    if point.len() != inst.num_vars {
        return Err(Error::Dimension(format!(
            "point of length {} for {} variables",
            point.len(),
            inst.num_vars
        )));
    }
    let polys: Vec<TermPolyhedron> = disj
        .terms
        .iter()
        .map(|t| term_polyhedron(inst, t))
        .collect();
    let mut feasible = Vec::new();
    for (t, q) in polys.iter().enumerate() {
        if q.is_feasible()? {
            feasible.push(t);
        }
    }
    if feasible.is_empty() {
        return Err(Error::AllTermsInfeasible);
    }
    let live: Vec<&TermPolyhedron> = feasible.iter().map(|&t| &polys[t]).collect();
    let (layout, rows, rhs, objective) = build_cglp(&live, point);
    let sol = solve_lp(&rows, &rhs, &objective, None)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("CGLP returned {:?}", sol.status)));
    }
    debug_assert_eq!(sol.x.len(), layout.cols);

    let n = layout.n;
    let mut alpha = vec![f64::NEG_INFINITY; n];
    for (q, &off) in live.iter().zip(&layout.offsets) {
        let v = &sol.x[off..off + q.num_rows()];
        for (j, a) in alpha.iter_mut().enumerate() {
            let g: f64 = q.rows.iter().zip(v).map(|(r, vi)| r[j] * vi).sum();
            *a = a.max(g);
        }
    }
    if norm_inf(&alpha) <= EQ_TOL {
        // nothing separates: the normalization lets the CGLP settle on
        // alpha = 0, so support the hull in the objective direction instead
        alpha = inst.objective.clone();
    }
    let scale = norm_inf(&alpha);
    if scale <= EQ_TOL {
        return Err(Error::DegenerateCut);
    }
    let alpha: Vec<f64> = alpha
        .iter()
        .map(|a| {
            let s = a / scale;
            if s.abs() < 1e-11 {
                0.0
            } else {
                s
            }
        })
        .collect();
    let (certificate, bases) = certificate_for_alpha(inst, disj, &alpha)?;
    let mut cut = crate::pdi::farkas_pdi(&certificate, disj, inst)?;
    cut.provenance = Provenance::Fresh;
    let violated = cut.violation(point) > FEAS_TOL;
    if !violated {
        log::info!(
            "{}: no violated cut for this disjunction and point",
            inst.name
        );
    }
    Ok(GeneratedCut {
        cut,
        certificate,
        bases,
        violated,
        cglp_value: sol.objective,
    })
}

/// `rounds` cuts from one disjunction: round one separates the LP optimum,
/// each later round the LP optimum with all earlier cuts appended. Stops
/// early once a round yields no violated cut; the first round is always kept.
pub fn generate_rounds(
    inst: &Instance,
    disj: &Disjunction,
    rounds: usize,
) -> Result<Vec<GeneratedCut>> {
    let mut rows = inst.rows.clone();
    let mut rhs = inst.rhs.clone();
    let mut out: Vec<GeneratedCut> = Vec::new();
    for r in 0..rounds.max(1) {
        let lp = solve_lp(&rows, &rhs, &inst.objective, None)?;
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible),
            LpStatus::Unbounded => return Err(Error::Unbounded),
        }
        let g = generate_cut(inst, disj, &lp.x)?;
        if r > 0 && !g.violated {
            break;
        }
        rows.push(g.cut.alpha.clone());
        rhs.push(g.cut.beta);
        let stop = !g.violated;
        out.push(g);
        if stop {
            break;
        }
    }
    Ok(out)
}

/// Checks the max/min form of the certificate conditions on every feasible term.
pub fn verify_certificate(
    inst: &Instance,
    disj: &Disjunction,
    cut: &Cut,
    cert: &FarkasCertificate,
) -> bool {
    let polys: Vec<TermPolyhedron> = disj
        .terms
        .iter()
        .map(|t| term_polyhedron(inst, t))
        .collect();
    if cert.check_shape(&polys).is_err() || cut.alpha.len() != inst.num_vars {
        return false;
    }
    let mut gammas = Vec::new();
    for (q, v) in polys.iter().zip(&cert.per_term) {
        match q.is_feasible() {
            Ok(true) => {}
            Ok(false) => continue,
            Err(_) => return false,
        }
        if v.iter().any(|&x| x < -EQ_TOL || !x.is_finite()) {
            return false;
        }
        let gamma: Vec<f64> = (0..inst.num_vars)
            .map(|j| q.rows.iter().zip(v).map(|(r, vi)| r[j] * vi).sum())
            .collect();
        gammas.push((gamma, dot(v, &q.rhs)));
    }
    if gammas.is_empty() {
        return false;
    }
    let alpha_ok = (0..inst.num_vars).all(|j| {
        gammas.iter().all(|(g, _)| cut.alpha[j] >= g[j] - EQ_TOL)
            && gammas
                .iter()
                .any(|(g, _)| (cut.alpha[j] - g[j]).abs() <= EQ_TOL)
    });
    let beta_ok = gammas.iter().all(|&(_, g0)| cut.beta <= g0 + EQ_TOL)
        && gammas
            .iter()
            .any(|&(_, g0)| (cut.beta - g0).abs() <= EQ_TOL);
    alpha_ok && beta_ok
}

/// Optimal bases of `min { alpha x : x in Q^t }` per term.
pub fn extract_determining_bases(
    inst: &Instance,
    disj: &Disjunction,
    cut: &Cut,
    cert: &FarkasCertificate,
) -> Result<DeterminingBases> {
    if !verify_certificate(inst, disj, cut, cert) {
        return Err(Error::CertificateMismatch(
            "certificate does not certify the cut".into(),
        ));
    }
    Ok(certificate_for_alpha(inst, disj, &cut.alpha)?.1)
}

/// One stored cut with everything needed to transfer it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BundleCut {
    pub cut: Cut,
    pub certificate: FarkasCertificate,
    pub bases: Option<DeterminingBases>,
    pub violated: bool,
}

/// The warm-start artifact of a base instance: its data, disjunction and cuts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateBundle {
    pub base_instance: JsonModel,
    pub disjunction: Disjunction,
    pub feasible_terms: Vec<usize>,
    pub cuts: Vec<BundleCut>,
}

impl CertificateBundle {
    pub fn new(inst: &Instance, disj: &Disjunction, cuts: &[GeneratedCut]) -> Result<Self> {
        Ok(CertificateBundle {
            base_instance: inst.to_json_model(),
            disjunction: disj.clone(),
            feasible_terms: crate::disjunction::feasible_terms(inst, disj)?,
            cuts: cuts
                .iter()
                .map(|g| BundleCut {
                    cut: g.cut.clone(),
                    certificate: g.certificate.clone(),
                    bases: Some(g.bases.clone()),
                    violated: g.violated,
                })
                .collect(),
        })
    }

    pub fn instance(&self) -> Result<Instance> {
        Instance::from_json_model(&self.base_instance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
