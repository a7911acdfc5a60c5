//! Parametric disjunctive inequalities: stored certificates re-evaluated on
//! perturbed data, support tests against the disjunctive hull, and the
//! per-term reparameterization that restores support.

use serde::{Deserialize, Serialize};

use crate::cglp::{DeterminingBases, FarkasCertificate};
use crate::disjunction::{term_polyhedron, Disjunction, Term, TermPolyhedron};
use crate::linalg::{dot, norm2};
use crate::model::{Cut, Instance, Provenance};
use crate::simplex::{basic_solution_of, BasisIndexSet, LpStatus};
use crate::{Error, Result, EQ_TOL, FEAS_TOL};

/// `(gamma^t, gamma0^t) = (v^t A^t, v^t b^t)` for one term.
#[derive(Clone, Debug, PartialEq)]
pub struct TermCut {
    pub term: usize,
    pub gamma: Vec<f64>,
    pub gamma0: f64,
}

impl TermCut {
    fn of(term: usize, q: &TermPolyhedron, v: &[f64]) -> TermCut {
        let n = q.rows.first().map_or(0, |r| r.len());
        let gamma = (0..n)
            .map(|j| q.rows.iter().zip(v).map(|(r, vi)| r[j] * vi).sum::<f64>() + 0.0)
            .collect();
        TermCut {
            term,
            gamma,
            gamma0: dot(v, &q.rhs) + 0.0,
        }
    }

    fn zero(term: usize, n: usize) -> TermCut {
        TermCut {
            term,
            gamma: vec![0.0; n],
            gamma0: 0.0,
        }
    }
}

/// Term cuts of `cert` on `target`. Zero-multiplier terms contribute the
/// zero inequality when their polyhedron is nonempty and nothing otherwise.
pub fn term_cuts(
    cert: &FarkasCertificate,
    disj: &Disjunction,
    target: &Instance,
) -> Result<Vec<TermCut>> {
    let polys: Vec<TermPolyhedron> = disj
        .terms
        .iter()
        .map(|t| term_polyhedron(target, t))
        .collect();
    cert.check_shape(&polys)?;
    let mut out = Vec::with_capacity(polys.len());
    for (t, (q, v)) in polys.iter().zip(&cert.per_term).enumerate() {
        if cert.is_zero(t) {
            if q.is_feasible()? {
                out.push(TermCut::zero(t, target.num_vars));
            }
        } else {
            out.push(TermCut::of(t, q, v));
        }
    }
    Ok(out)
}

fn aggregate<'a>(cuts: impl IntoIterator<Item = &'a TermCut>, n: usize) -> Option<(Vec<f64>, f64)> {
    let mut alpha = vec![f64::NEG_INFINITY; n];
    let mut beta = f64::INFINITY;
    let mut any = false;
    for tc in cuts {
        any = true;
        for (a, g) in alpha.iter_mut().zip(&tc.gamma) {
            *a = a.max(*g);
        }
        beta = beta.min(tc.gamma0);
    }
    any.then_some((alpha, beta))
}

/// The Farkas PDI of `cert` on `target`: `alpha_j = max_t gamma^t_j`,
/// `beta = min_t gamma0^t`.
pub fn farkas_pdi(cert: &FarkasCertificate, disj: &Disjunction, target: &Instance) -> Result<Cut> {
    let cuts = term_cuts(cert, disj, target)?;
    let (alpha, beta) = aggregate(&cuts, target.num_vars).ok_or(Error::AllTermsInfeasible)?;
    Cut::new(alpha, beta, Provenance::Pdc, target.name.clone())
}

/// Whether all nonempty terms of `inst` map `cert` to the same `gamma`.
pub fn is_induced(cert: &FarkasCertificate, disj: &Disjunction, inst: &Instance) -> Result<bool> {
    let polys: Vec<TermPolyhedron> = disj
        .terms
        .iter()
        .map(|t| term_polyhedron(inst, t))
        .collect();
    cert.check_shape(&polys)?;
    let mut first: Option<Vec<f64>> = None;
    for (t, (q, v)) in polys.iter().zip(&cert.per_term).enumerate() {
        if !q.is_feasible()? {
            continue;
        }
        let g = TermCut::of(t, q, v).gamma;
        match &first {
            None => first = Some(g),
            Some(f) => {
                if f.iter().zip(&g).any(|(a, b)| (a - b).abs() > EQ_TOL) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Result of [`check_support`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupportCheck {
    pub supported: bool,
    /// `min_t min { alpha x : x in Q^t }`.
    pub hull_min: f64,
    /// `hull_min - beta`; nonnegative for a valid cut.
    pub gap: f64,
    pub witness: SupportWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportWitness {
    pub term: usize,
    pub point: Vec<f64>,
}

/// Whether `cut` touches the disjunctive hull of `inst`.
pub fn check_support(cut: &Cut, inst: &Instance, disj: &Disjunction) -> Result<SupportCheck> {
    let mut best: Option<(f64, SupportWitness)> = None;
    for (t, term) in disj.terms.iter().enumerate() {
        let sol = term_polyhedron(inst, term).solve(&cut.alpha, None)?;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(Error::Unbounded),
            LpStatus::Optimal => {}
        }
        if best.as_ref().is_none_or(|(v, _)| sol.objective < *v) {
            best = Some((
                sol.objective,
                SupportWitness {
                    term: t,
                    point: sol.x,
                },
            ));
        }
    }
    let (hull_min, witness) = best.ok_or(Error::AllTermsInfeasible)?;
    let gap = hull_min - cut.beta;
    Ok(SupportCheck {
        supported: gap.abs() <= EQ_TOL,
        hull_min,
        gap,
        witness,
    })
}

/// Primal-dual solution of `min { alpha x : x in Q^t }`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparameterization {
    pub multipliers: Vec<f64>,
    pub basis: BasisIndexSet,
    pub value: f64,
    pub point: Vec<f64>,
    pub pivots: usize,
}

fn reparameterize_poly(
    alpha: &[f64],
    q: &TermPolyhedron,
    warm: Option<&BasisIndexSet>,
) -> Result<Reparameterization> {
    let sol = match q.solve(alpha, warm) {
        Err(Error::SingularBasis) if warm.is_some() => q.solve(alpha, None)?,
        other => other?,
    };
    match sol.status {
        LpStatus::Optimal => Ok(Reparameterization {
            multipliers: sol.duals,
            basis: sol.basis,
            value: sol.objective,
            point: sol.x,
            pivots: sol.pivots,
        }),
        LpStatus::Infeasible => Err(Error::EmptyTerm(q.term)),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// Supporting certificate of `alpha` on one term, warm-started from `warm`
/// (a singular warm basis falls back to a cold start).
pub fn reparameterize_term(
    alpha: &[f64],
    inst: &Instance,
    term: &Term,
    warm: Option<&BasisIndexSet>,
) -> Result<Reparameterization> {
    reparameterize_poly(alpha, &term_polyhedron(inst, term), warm)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongPdiResult {
    pub cut: Cut,
    pub certificate: FarkasCertificate,
    pub bases: DeterminingBases,
    /// Terms whose stored basis stayed feasible (and whose multipliers are nonzero).
    pub surviving_terms: Vec<usize>,
    pub reparameterized_terms: Vec<usize>,
    pub support_witness: SupportWitness,
    /// Reparameterized terms where `alpha` is parallel to a row, so the dual
    /// optimum need not be unique.
    pub multiplicity: Vec<usize>,
    /// `||alpha_final - alpha_initial||_inf`; zero up to rounding.
    pub alpha_drift: f64,
}

fn parallel_to_some_row(alpha: &[f64], q: &TermPolyhedron) -> bool {
    let na = norm2(alpha);
    q.rows.iter().any(|r| {
        let nr = norm2(r);
        nr > 0.0 && (dot(alpha, r).abs() - na * nr).abs() <= 1e-9 * na * nr
    })
}

/// Strong PDI: keeps the certificate of every term whose determining basis
/// survives on `l`, fixes `alpha` from those terms, and reparameterizes the
/// remaining nonempty terms (all of them when the matrix changed) against
/// that `alpha`.
pub fn strong_pdi(
    k: &Instance,
    l: &Instance,
    disj: &Disjunction,
    cert: &FarkasCertificate,
    bases: &DeterminingBases,
) -> Result<StrongPdiResult> {
    if !k.same_family(l) {
        return Err(Error::Dimension(format!(
            "{} and {} are not members of one family",
            k.name, l.name
        )));
    }
    let polys: Vec<TermPolyhedron> = disj.terms.iter().map(|t| term_polyhedron(l, t)).collect();
    cert.check_shape(&polys)?;
    if bases.per_term.len() != polys.len() {
        return Err(Error::CertificateMismatch(format!(
            "{} bases for {} terms",
            bases.per_term.len(),
            polys.len()
        )));
    }
    let n = l.num_vars;

    let mut basis_points: Vec<Option<Vec<f64>>> = vec![None; polys.len()];
    let mut surviving = Vec::new();
    for (t, q) in polys.iter().enumerate() {
        let Some(basis) = &bases.per_term[t] else {
            continue;
        };
        if cert.is_zero(t) {
            continue;
        }
        let x = match basic_solution_of(basis, &q.rows, &q.rhs) {
            Ok(x) => x,
            Err(Error::SingularBasis) => continue,
            Err(e) => return Err(e),
        };
        if q.contains(&x, FEAS_TOL) {
            basis_points[t] = Some(x);
            surviving.push(t);
        }
    }
    if surviving.is_empty() {
        return Err(Error::NoSurvivingTerm(format!(
            "no determining basis of {} stays feasible on {}; generate a fresh cut instead",
            k.name, l.name
        )));
    }
    let initial: Vec<TermCut> = surviving
        .iter()
        .map(|&t| TermCut::of(t, &polys[t], &cert.per_term[t]))
        .collect();
    let (alpha, _) = aggregate(&initial, n).expect("surviving terms are nonempty");
    let matrix_changed = k.rows != l.rows;

    let mut per_term = cert.per_term.clone();
    let mut new_bases = bases.per_term.clone();
    let mut points: Vec<Option<Vec<f64>>> = vec![None; polys.len()];
    let mut reparameterized = Vec::new();
    let mut multiplicity = Vec::new();
    for (t, q) in polys.iter().enumerate() {
        let survived = basis_points[t].is_some();
        if survived && !matrix_changed {
            points[t] = basis_points[t].take();
            continue;
        }
        if !survived && !q.is_feasible()? {
            per_term[t] = vec![0.0; q.num_rows()];
            new_bases[t] = None;
            continue;
        }
        let r = reparameterize_poly(&alpha, q, bases.per_term[t].as_ref()).map_err(|e| {
            Error::Term {
                term: t,
                source: Box::new(e),
            }
        })?;
        if parallel_to_some_row(&alpha, q) {
            multiplicity.push(t);
        }
        per_term[t] = r.multipliers;
        new_bases[t] = Some(r.basis);
        points[t] = Some(r.point);
        reparameterized.push(t);
    }

    let finals: Vec<TermCut> = (0..polys.len())
        .filter(|&t| points[t].is_some())
        .map(|t| TermCut::of(t, &polys[t], &per_term[t]))
        .collect();
    let (alpha_final, beta) = aggregate(&finals, n).expect("at least one surviving term");
    let alpha_drift = alpha_final
        .iter()
        .zip(&alpha)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if alpha_drift > EQ_TOL {
        log::warn!("{}: strong PDI alpha moved by {alpha_drift:e}", l.name);
    }
    let witness_term = finals
        .iter()
        .fold(None, |acc: Option<&TermCut>, tc| match acc {
            Some(b) if b.gamma0 <= tc.gamma0 => acc,
            _ => Some(tc),
        })
        .expect("nonempty")
        .term;
    let cut = Cut::new(alpha_final, beta, Provenance::Spdc, l.name.clone())?;
    Ok(StrongPdiResult {
        cut,
        certificate: FarkasCertificate {
            source_instance: l.name.clone(),
            disjunction_ref: cert.disjunction_ref.clone(),
            per_term,
        },
        bases: DeterminingBases {
            per_term: new_bases,
        },
        surviving_terms: surviving,
        reparameterized_terms: reparameterized,
        support_witness: SupportWitness {
            term: witness_term,
            point: points[witness_term]
                .clone()
                .expect("witness term has a point"),
        },
        multiplicity,
        alpha_drift,
    })
}

/// One line of the `pdi` subcommand's JSONL output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CutRecord {
    pub instance: String,
    pub cut: Cut,
    pub violation_at_lp_optimum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reparameterized_terms: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub support_witness: Option<SupportWitness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cglp::generate_cut;
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

    fn base() -> (Instance, crate::cglp::GeneratedCut) {
        let inst = two_var();
        let g = generate_cut(&inst, &split(), &[0.5, 1.0]).unwrap();
        (inst, g)
    }

    #[test]
    fn identity_family_reproduces_the_cut() {
        let (k, g) = base();
        let pdc = farkas_pdi(&g.certificate, &split(), &k).unwrap();
        assert_eq!(pdc.alpha, g.cut.alpha);
        assert_eq!(pdc.beta, g.cut.beta);
        let s = strong_pdi(&k, &k, &split(), &g.certificate, &g.bases).unwrap();
        assert!(s.reparameterized_terms.is_empty());
        assert_eq!(s.cut.alpha, g.cut.alpha);
        assert_eq!(s.cut.beta, g.cut.beta);
        assert!(is_induced(&g.certificate, &split(), &k).unwrap());
    }

    #[test]
    fn tightened_x2_bound() {
        let (k, g) = base();
        let l = k.with_bounds(1, 0.0, 0.9).with_name("two_var_x2");
        let pdc = farkas_pdi(&g.certificate, &split(), &l).unwrap();
        assert!((pdc.alpha[0] + 1.0).abs() < 1e-12 && (pdc.alpha[1] + 1.0).abs() < 1e-12);
        assert!((pdc.beta + 1.0).abs() < 1e-12);
        let tc = term_cuts(&g.certificate, &split(), &l).unwrap();
        assert!((tc[0].gamma0 + 0.9).abs() < 1e-12);
        assert!((tc[1].gamma0 + 1.0).abs() < 1e-12);

        let sup = check_support(&pdc, &l, &split()).unwrap();
        assert!(sup.supported);
        assert_eq!(sup.witness.term, 1);
        assert!((sup.witness.point[0] - 1.0).abs() < 1e-9 && sup.witness.point[1].abs() < 1e-9);

        let r = reparameterize_term(&pdc.alpha, &l, &split().terms[0], None).unwrap();
        assert!((r.value + 0.9).abs() < 1e-12);
        assert!(r.point[0].abs() < 1e-12 && (r.point[1] - 0.9).abs() < 1e-12);

        // the t0 basis point (0, 0.9) stays feasible, so no term is reparameterized
        let s = strong_pdi(&k, &l, &split(), &g.certificate, &g.bases).unwrap();
        assert_eq!(s.surviving_terms, vec![0, 1]);
        assert!(s.reparameterized_terms.is_empty());
        assert!((s.cut.beta + 1.0).abs() < 1e-12);
        assert_eq!(s.support_witness.term, 1);
    }

    #[test]
    fn slack_cut_reports_gap() {
        let k = two_var();
        let cut = Cut::new(vec![-1.0, -1.0], -2.0, Provenance::Pdc, "two_var").unwrap();
        let sup = check_support(&cut, &k, &split()).unwrap();
        assert!(!sup.supported);
        assert!((sup.gap - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_alpha_reparameterizes_to_zero() {
        let k = two_var();
        let r = reparameterize_term(&[0.0, 0.0], &k, &split().terms[1], None).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.multipliers.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_term_cannot_be_reparameterized() {
        let k = two_var().perturb_element(Element::Rhs, &[-0.5]).unwrap();
        let err = reparameterize_term(&[-1.0, -1.0], &k, &split().terms[1], None).unwrap_err();
        assert!(matches!(err, Error::EmptyTerm(1)));
    }

    #[test]
    fn matrix_change_breaks_induction_and_is_repaired() {
        let (k, g) = base();
        let l = k.perturb_element(Element::Matrix, &[-1.9, -1.1]).unwrap();
        assert!(!is_induced(&g.certificate, &split(), &l).unwrap());
        let pdc = farkas_pdi(&g.certificate, &split(), &l).unwrap();
        let s = strong_pdi(&k, &l, &split(), &g.certificate, &g.bases).unwrap();
        assert_eq!(s.reparameterized_terms, vec![0, 1]);
        assert!(check_support(&s.cut, &l, &split()).unwrap().supported);
        assert!(s.cut.beta >= pdc.beta - 1e-9 || s.cut.alpha != pdc.alpha);
    }

    #[test]
    fn newly_feasible_term_is_reparameterized() {
        // with 2x1 + x2 <= 1.5 the term {x1 >= 1} is empty
        let k = two_var().perturb_element(Element::Rhs, &[-1.5]).unwrap();
        let g = generate_cut(&k, &split(), &[0.25, 1.0]).unwrap();
        assert!(g.certificate.is_zero(1));
        let l = k.perturb_element(Element::Rhs, &[-2.5]).unwrap();
        let s = strong_pdi(&k, &l, &split(), &g.certificate, &g.bases).unwrap();
        assert_eq!(s.surviving_terms, vec![0]);
        assert!(s.reparameterized_terms.contains(&1));
        assert!(check_support(&s.cut, &l, &split()).unwrap().supported);
    }

    #[test]
    fn lost_bases_are_an_error() {
        let (k, g) = base();
        let empty = DeterminingBases {
            per_term: vec![None, None],
        };
        assert!(matches!(
            strong_pdi(&k, &k, &split(), &g.certificate, &empty),
            Err(Error::NoSurvivingTerm(_))
        ));
    }
}
