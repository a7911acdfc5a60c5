//! Sweeps over base instances × elements × degrees × disjunction sizes,
//! comparing fresh cuts (`vpc`), Farkas PDIs (`pdc`), strong PDIs (`spdc`)
//! and no disjunctive cuts (`default`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bnc::{gap_closed, run_branch_and_cut, Method, RunConfig, RunStatus};
use crate::cglp::{generate_rounds, CertificateBundle, GeneratedCut};
use crate::disjunction::{build_disjunction, disjunctive_bound, Disjunction, DisjunctionOptions};
use crate::model::{load_instance, Cut, Element, Format, Instance};
use crate::pdi::{farkas_pdi, strong_pdi};
use crate::perturb::{make_test_set, AttemptStats, PerturbationSpec};
use crate::synthetic::{random_instance, SyntheticSpec};
use crate::{Error, Result};

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub instance: String,
    pub base: String,
    pub method: Method,
    /// Empty for the unperturbed control member.
    pub element: Option<Element>,
    pub degree: f64,
    pub terms: usize,
    pub lp_bound: Option<f64>,
    pub cut_bound: Option<f64>,
    pub root_bound: Option<f64>,
    #[serde(rename = "disjBoundVD")]
    pub disj_bound_vd: Option<f64>,
    #[serde(rename = "disjBoundPD")]
    pub disj_bound_pd: Option<f64>,
    pub ip_opt: Option<f64>,
    pub best_bound: Option<f64>,
    pub cut_gen_time: Option<f64>,
    pub root_time: Option<f64>,
    pub total_time: Option<f64>,
    pub nodes: Option<usize>,
    pub branchings: Option<usize>,
    pub num_cuts: usize,
    pub status: RunStatus,
    pub message: Option<String>,
}

impl RunRecord {
    fn blank(job: &Job, method: Method) -> RunRecord {
        RunRecord {
            instance: job.instance.name.clone(),
            base: job.base.clone(),
            method,
            element: job.element,
            degree: job.degree,
            terms: job.terms,
            lp_bound: None,
            cut_bound: None,
            root_bound: None,
            disj_bound_vd: None,
            disj_bound_pd: None,
            ip_opt: None,
            best_bound: None,
            cut_gen_time: None,
            root_time: None,
            total_time: None,
            nodes: None,
            branchings: None,
            num_cuts: 0,
            status: RunStatus::Error,
            message: None,
        }
    }

    /// Disjunction bound the row's cuts came from.
    pub fn generating_disjunction_bound(&self) -> Option<f64> {
        match self.method {
            Method::Vpc => self.disj_bound_vd,
            Method::Pdc | Method::Spdc => self.disj_bound_pd,
            Method::Default => None,
        }
    }
}

/// A row plus the cuts that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub record: RunRecord,
    pub cuts: Vec<Cut>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentGrid {
    pub elements: Vec<Element>,
    pub degrees: Vec<f64>,
    pub terms: Vec<usize>,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
    /// Perturbed instances per (base, element, degree).
    pub perturbations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    /// Adds the unperturbed base as a test member.
    #[serde(default)]
    pub include_control: bool,
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default = "default_node_limit")]
    pub node_limit: usize,
    #[serde(default = "one")]
    pub root_cut_rounds: usize,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub threads: Option<usize>,
    /// Branching seeds for the fresh and the stored disjunctions.
    #[serde(default)]
    pub vpc_seed: Option<u64>,
    #[serde(default)]
    pub pdi_seed: Option<u64>,
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_attempts() -> usize {
    1000
}
fn default_time_limit() -> f64 {
    60.0
}
fn default_node_limit() -> usize {
    100_000
}
fn one() -> usize {
    1
}

impl ExperimentGrid {
    pub fn new(
        elements: Vec<Element>,
        degrees: Vec<f64>,
        terms: Vec<usize>,
        perturbations: usize,
    ) -> Self {
        ExperimentGrid {
            elements,
            degrees,
            terms,
            methods: all_methods(),
            perturbations,
            seed: 0,
            max_attempts: default_attempts(),
            include_control: false,
            time_limit: default_time_limit(),
            node_limit: default_node_limit(),
            root_cut_rounds: 1,
            threads: None,
            vpc_seed: None,
            pdi_seed: None,
        }
    }

    fn run_config(&self, method: Method, terms: usize) -> RunConfig {
        RunConfig {
            method,
            terms,
            time_limit: self.time_limit,
            node_limit: self.node_limit,
            root_cut_rounds: self.root_cut_rounds,
            reference_solution: None,
        }
    }
}

/// Random base instances drawn in place of (or next to) instance files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SyntheticBases {
    pub count: usize,
    pub seed: u64,
    pub spec: SyntheticSpec,
}

impl SyntheticBases {
    pub fn generate(&self) -> Result<Vec<Instance>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|i| random_instance(format!("rand{i:03}"), &self.spec, &mut rng))
            .collect()
    }
}

/// The `experiment --config` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    #[serde(default)]
    pub instances: Vec<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticBases>,
    pub out_dir: PathBuf,
    #[serde(flatten)]
    pub grid: ExperimentGrid,
}

impl ExperimentConfig {
    /// Loads the config; instance paths are relative to the config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in cfg.instances.iter_mut() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = dir.join(&cfg.out_dir);
        }
        Ok(cfg)
    }

    pub fn base_instances(&self) -> Result<Vec<Instance>> {
        let mut out = Vec::new();
        for p in &self.instances {
            out.push(load_instance(p, Format::from_path(p))?);
        }
        if let Some(s) = &self.synthetic {
            out.extend(s.generate()?);
        }
        Ok(out)
    }
}

/// Stored cuts of one base instance for one disjunction size.
#[derive(Clone, Debug)]
pub struct BaseBundle {
    pub base: Instance,
    pub disjunction: Disjunction,
    pub cuts: Vec<GeneratedCut>,
    /// Disjunction plus CGLP time, attributed to the base instance.
    pub generation_time: f64,
}

impl BaseBundle {
    pub fn build(base: &Instance, terms: usize, rounds: usize, seed: Option<u64>) -> Result<Self> {
        let start = Instant::now();
        let d = build_disjunction(
            base,
            DisjunctionOptions {
                max_terms: terms,
                seed,
            },
        )?;
        let cuts = generate_rounds(base, &d.disjunction, rounds)?;
        Ok(BaseBundle {
            base: base.clone(),
            disjunction: d.disjunction,
            cuts,
            generation_time: start.elapsed().as_secs_f64(),
        })
    }

    pub fn to_bundle(&self) -> Result<CertificateBundle> {
        CertificateBundle::new(&self.base, &self.disjunction, &self.cuts)
    }
}

struct Job {
    base: String,
    bundle: std::result::Result<std::sync::Arc<BaseBundle>, String>,
    instance: Instance,
    element: Option<Element>,
    degree: f64,
    terms: usize,
}

/// Test-set bookkeeping for the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyStats {
    pub base: String,
    pub element: Element,
    pub degree: f64,
    pub members: Vec<String>,
    pub achieved_degrees: Vec<f64>,
    pub stats: AttemptStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BundleStats {
    pub base: String,
    pub terms: usize,
    pub generation_time: Option<f64>,
    pub num_cuts: usize,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub runs: Vec<RunOutput>,
    pub families: Vec<FamilyStats>,
    pub bundles: Vec<BundleStats>,
}

impl ExperimentOutput {
    pub fn records(&self) -> Vec<RunRecord> {
        self.runs.iter().map(|r| r.record.clone()).collect()
    }

    pub fn error_count(&self) -> usize {
        self.runs
            .iter()
            .filter(|r| r.record.status == RunStatus::Error)
            .count()
            + self.bundles.iter().filter(|b| b.error.is_some()).count()
    }
}

/// Runs the full grid. Each (test instance, terms) pair is one job; jobs run
/// on a worker pool and rows come back in grid order.
pub fn run_experiment(bases: &[Instance], grid: &ExperimentGrid) -> Result<ExperimentOutput> {
    if grid.terms.iter().any(|&d| d < 2) {
        return Err(Error::Invalid("disjunctions need at least 2 terms".into()));
    }
    let mut bundles = Vec::new();
    let mut bundle_map = BTreeMap::new();
    for (bi, base) in bases.iter().enumerate() {
        for &d in &grid.terms {
            let built = BaseBundle::build(base, d, grid.root_cut_rounds, grid.pdi_seed);
            bundles.push(BundleStats {
                base: base.name.clone(),
                terms: d,
                generation_time: built.as_ref().ok().map(|b| b.generation_time),
                num_cuts: built.as_ref().map_or(0, |b| b.cuts.len()),
                error: built.as_ref().err().map(|e| e.to_string()),
            });
            bundle_map.insert(
                (bi, d),
                built.map(std::sync::Arc::new).map_err(|e| e.to_string()),
            );
        }
    }

    let mut families = Vec::new();
    let mut jobs = Vec::new();
    for (bi, base) in bases.iter().enumerate() {
        if grid.include_control {
            for &d in &grid.terms {
                jobs.push(Job {
                    base: base.name.clone(),
                    bundle: bundle_map[&(bi, d)].clone(),
                    instance: base.clone(),
                    element: None,
                    degree: 0.0,
                    terms: d,
                });
            }
        }
        for &element in &grid.elements {
            for &degree in &grid.degrees {
                let mut spec =
                    PerturbationSpec::new(element, degree, grid.perturbations, grid.seed);
                spec.max_attempts = grid.max_attempts;
                let set = make_test_set(base, &spec)?;
                families.push(FamilyStats {
                    base: base.name.clone(),
                    element,
                    degree,
                    members: set
                        .members
                        .iter()
                        .map(|m| m.instance.name.clone())
                        .collect(),
                    achieved_degrees: set.members.iter().map(|m| m.degree).collect(),
                    stats: set.stats.clone(),
                });
                for &d in &grid.terms {
                    for m in &set.members {
                        jobs.push(Job {
                            base: base.name.clone(),
                            bundle: bundle_map[&(bi, d)].clone(),
                            instance: m.instance.clone(),
                            element: Some(element),
                            degree,
                            terms: d,
                        });
                    }
                }
            }
        }
    }

    let work = || -> Vec<RunOutput> {
        jobs.par_iter()
            .flat_map_iter(|job| run_job(job, grid))
            .collect()
    };
    let runs = match grid.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(ExperimentOutput {
        runs,
        families,
        bundles,
    })
}

fn record_from(mut rec: RunRecord, r: &super::bnc::BncResult, ip_opt: Option<f64>) -> RunRecord {
    rec.lp_bound = Some(r.lp_bound);
    rec.cut_bound = Some(r.root_bound);
    rec.root_bound = Some(r.root_bound);
    rec.best_bound = Some(r.best_bound);
    rec.ip_opt = ip_opt;
    rec.root_time = Some(r.root_time);
    rec.total_time = Some(r.total_time);
    rec.nodes = Some(r.nodes);
    rec.branchings = Some(r.branchings);
    rec.status = r.status;
    rec
}

fn run_job(job: &Job, grid: &ExperimentGrid) -> Vec<RunOutput> {
    let inst = &job.instance;
    let mut out = Vec::new();

    let default = run_branch_and_cut(inst, &[], &grid.run_config(Method::Default, job.terms));
    let (ip_opt, reference) = match &default {
        Ok(r) if r.status == super::bnc::RunStatus::Optimal => (
            Some(r.best_bound),
            r.incumbent.as_ref().map(|i| i.1.clone()),
        ),
        _ => (None, None),
    };
    let pd = job
        .bundle
        .as_ref()
        .ok()
        .and_then(|b| disjunctive_bound(inst, &b.disjunction).ok());

    // the fresh disjunction is shared by the vpc row and the VD column
    let vpc_start = Instant::now();
    let vpc_disj = build_disjunction(
        inst,
        DisjunctionOptions {
            max_terms: job.terms,
            seed: grid.vpc_seed,
        },
    );
    let vpc_disj_time = vpc_start.elapsed().as_secs_f64();
    let vd = vpc_disj
        .as_ref()
        .ok()
        .and_then(|d| disjunctive_bound(inst, &d.disjunction).ok());

    for &method in &grid.methods {
        let mut rec = RunRecord::blank(job, method);
        rec.disj_bound_vd = vd;
        rec.disj_bound_pd = pd;
        rec.ip_opt = ip_opt;
        if method == Method::Spdc && job.element == Some(Element::Objective) {
            rec.status = RunStatus::Skipped;
            rec.message = Some("objective perturbation leaves A and b unchanged".into());
            out.push(RunOutput {
                record: rec,
                cuts: Vec::new(),
            });
            continue;
        }
        let cuts: std::result::Result<(Vec<Cut>, f64), String> = match method {
            Method::Default => Ok((Vec::new(), 0.0)),
            Method::Vpc => match &vpc_disj {
                // every term empty: the instance itself is integer infeasible
                Err(Error::AllTermsInfeasible) => Ok((Vec::new(), vpc_disj_time)),
                Err(e) => Err(e.to_string()),
                Ok(d) => {
                    let t = Instant::now();
                    let generated = generate_rounds(inst, &d.disjunction, grid.root_cut_rounds);
                    let elapsed = vpc_disj_time + t.elapsed().as_secs_f64();
                    match generated {
                        Ok(g) => Ok((g.into_iter().map(|g| g.cut).collect(), elapsed)),
                        Err(Error::AllTermsInfeasible) => Ok((Vec::new(), elapsed)),
                        Err(e) => Err(e.to_string()),
                    }
                }
            },
            Method::Pdc | Method::Spdc => match &job.bundle {
                Err(e) => Err(format!("no bundle: {e}")),
                Ok(b) => transfer(b, inst, method).map_err(|e| e.to_string()),
            },
        };
        let (cuts, gen_time) = match cuts {
            Ok(c) => c,
            Err(msg) => {
                rec.message = Some(msg);
                out.push(RunOutput {
                    record: rec,
                    cuts: Vec::new(),
                });
                continue;
            }
        };
        rec.cut_gen_time = Some(gen_time);
        rec.num_cuts = cuts.len();
        let result = if method == Method::Default {
            default
                .as_ref()
                .map(Clone::clone)
                .map_err(|e| Error::Invalid(e.to_string()))
        } else {
            let mut cfg = grid.run_config(method, job.terms);
            cfg.reference_solution = reference.clone();
            run_branch_and_cut(inst, &cuts, &cfg)
        };
        let record = match result {
            Ok(r) => record_from(rec, &r, ip_opt),
            Err(e) => {
                rec.message = Some(e.to_string());
                rec
            }
        };
        out.push(RunOutput { record, cuts });
    }
    out
}

/// Transfers every stored cut of `bundle` to `target`; returns the cuts and
/// the time spent.
pub fn transfer(bundle: &BaseBundle, target: &Instance, method: Method) -> Result<(Vec<Cut>, f64)> {
    let start = Instant::now();
    let mut cuts = Vec::with_capacity(bundle.cuts.len());
    for g in &bundle.cuts {
        let cut = match method {
            Method::Pdc => farkas_pdi(&g.certificate, &bundle.disjunction, target),
            Method::Spdc => strong_pdi(
                &bundle.base,
                target,
                &bundle.disjunction,
                &g.certificate,
                &g.bases,
            )
            .map(|s| s.cut),
            _ => {
                return Err(Error::Invalid(format!(
                    "{method} does not transfer certificates"
                )))
            }
        };
        match cut {
            Ok(c) => cuts.push(c),
            // 0 x >= beta carries no information for the LP
            Err(Error::DegenerateCut) => {
                log::debug!("{}: dropped a vanishing {method} cut", target.name)
            }
            Err(e) => return Err(e),
        }
    }
    Ok((cuts, start.elapsed().as_secs_f64()))
}

/// Per (element, degree, terms, method) averages over optimal rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub element: String,
    pub degree: f64,
    pub terms: usize,
    pub method: Method,
    pub rows: usize,
    /// Mean percent gap closed by the cuts alone, or "--".
    pub cut_gap_closed: String,
    pub root_gap_closed: String,
    #[serde(rename = "disjGapVD")]
    pub disj_gap_vd: String,
    #[serde(rename = "disjGapPD")]
    pub disj_gap_pd: String,
    pub cut_gen_time: String,
    pub root_time: String,
    pub total_time: String,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn fmt_mean(values: &[f64], digits: usize) -> String {
    mean(values).map_or_else(|| "--".to_string(), |m| format!("{m:.digits$}"))
}

pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, String, usize, Method), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let element = r
            .element
            .map_or("control".to_string(), |e| e.long_name().to_string());
        groups
            .entry((element, format!("{:020.6}", r.degree), r.terms, r.method))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((element, _, terms, method), rows)| {
            let ok: Vec<&&RunRecord> = rows
                .iter()
                .filter(|r| r.status == RunStatus::Optimal && r.ip_opt.is_some())
                .collect();
            let gap = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
                ok.iter()
                    .filter_map(|r| {
                        // a closed gap has no meaningful ratio; leave it out of the mean
                        let g = gap_closed(r.lp_bound?, f(r)?, r.ip_opt?);
                        (!g.degenerate).then_some(g.percent)
                    })
                    .collect()
            };
            let times = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Vec<f64> {
                ok.iter().filter_map(|r| f(r)).collect()
            };
            SummaryRow {
                element,
                degree: rows[0].degree,
                terms,
                method,
                rows: rows.len(),
                cut_gap_closed: fmt_mean(&gap(&|r| r.cut_bound), 2),
                root_gap_closed: fmt_mean(&gap(&|r| r.root_bound), 2),
                disj_gap_vd: fmt_mean(&gap(&|r| r.disj_bound_vd), 2),
                disj_gap_pd: fmt_mean(&gap(&|r| r.disj_bound_pd), 2),
                cut_gen_time: fmt_mean(&times(&|r| r.cut_gen_time), 6),
                root_time: fmt_mean(&times(&|r| r.root_time), 6),
                total_time: fmt_mean(&times(&|r| r.total_time), 6),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest {
    pub grid: ExperimentGrid,
    pub run_files: Vec<String>,
    pub summary_file: String,
    pub rows: usize,
    pub errors: usize,
    pub families: Vec<FamilyStats>,
    pub bundles: Vec<BundleStats>,
}

/// Writes one CSV per (element, degree, terms), `summary.csv` and
/// `manifest.json` into `dir`.
pub fn write_outputs(
    output: &ExperimentOutput,
    grid: &ExperimentGrid,
    dir: &Path,
) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let records = output.records();
    let mut files: BTreeMap<String, Vec<&RunRecord>> = BTreeMap::new();
    for r in &records {
        let element = r.element.map_or("control", |e| e.long_name());
        files
            .entry(format!("runs_{element}_deg{}_d{}.csv", r.degree, r.terms))
            .or_default()
            .push(r);
    }
    for (name, rows) in &files {
        let mut w = csv::Writer::from_path(dir.join(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    for s in summarize(&records) {
        w.serialize(s)?;
    }
    w.flush()?;
    let manifest = Manifest {
        grid: grid.clone(),
        run_files: files.keys().cloned().collect(),
        summary_file: "summary.csv".into(),
        rows: records.len(),
        errors: output.error_count(),
        families: output.families.clone(),
        bundles: output.bundles.clone(),
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

/// Reads every `runs_*.csv` listed in a manifest directory.
pub fn read_records(dir: &Path) -> Result<Vec<RunRecord>> {
    let manifest: Manifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let mut out = Vec::new();
    for f in &manifest.run_files {
        let mut r = csv::Reader::from_path(dir.join(f))?;
        for row in r.deserialize() {
            out.push(row?);
        }
    }
    Ok(out)
}
