//! `pdi`: generate disjunctive cuts with certificates, transfer them to
//! perturbed instances, and benchmark the result.
//!
//! Exit status is 0 on success, 2 when some items failed but output was
//! written, and 1 on a fatal error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pdi_core::bench::{
    default_time_threshold, performance_profile, read_records, run_branch_and_cut, run_experiment,
    summarize, write_outputs, ExperimentConfig, Method, RunConfig,
};
use pdi_core::cglp::{generate_rounds, CertificateBundle, DeterminingBases};
use pdi_core::disjunction::{build_disjunction, DisjunctionOptions};
use pdi_core::model::{load_instance, save_instance, Element, Format, Instance};
use pdi_core::pdi::{farkas_pdi, strong_pdi, CutRecord};
use pdi_core::perturb::{make_test_set, PerturbationSpec};
use pdi_core::simplex::{solve_lp, LpStatus};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pdi", version, about = "Parametric disjunctive cuts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance by branch and bound and print the result as JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
    },
    /// Build a disjunction, generate cuts with certificates and save the bundle.
    Gencuts {
        instance: PathBuf,
        #[arg(long, default_value_t = 2)]
        terms: usize,
        #[arg(long)]
        out: PathBuf,
        /// Cut rounds at the root; each round separates the previous LP optimum.
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        /// Random branching seed; most-fractional branching when absent.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write perturbed copies of an instance plus a manifest of achieved degrees.
    Perturb {
        instance: PathBuf,
        #[arg(long)]
        element: Element,
        #[arg(long)]
        degree: f64,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_attempts: usize,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        time_budget: Option<f64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Transfer the cuts of a bundle to one or more instances of its family.
    Pdi {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long = "instance", required = true)]
        instances: Vec<PathBuf>,
        /// Reparameterize terms so each cut supports the disjunctive hull.
        #[arg(long)]
        strong: bool,
        /// JSONL output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment grid from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Summaries and performance profiles of an experiment directory.
    Report {
        results: PathBuf,
        /// Also emit performance profiles.
        #[arg(long)]
        profiles: bool,
        #[arg(long, default_value = "vpc")]
        baseline: Method,
        /// Keep only instances where default took at least this many seconds.
        /// With a default baseline and no value, the 75th percentile of
        /// default times is used.
        #[arg(long)]
        min_default_time: Option<f64>,
    },
}

/// Result of a subcommand that may have partially failed.
enum Outcome {
    Done,
    Partial(usize),
}

fn load(path: &Path) -> Result<Instance> {
    load_instance(path, Format::from_path(path))
        .with_context(|| format!("loading {}", path.display()))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // a closed pipe (`| head`) is not a failure of the command
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn solve(instance: &Path, time_limit: f64) -> Result<Outcome> {
    let inst = load(instance)?;
    let mut cfg = RunConfig::new(Method::Default);
    cfg.time_limit = time_limit;
    let r = run_branch_and_cut(&inst, &[], &cfg)?;
    print_json(&json!({
        "instance": inst.name,
        "status": r.status,
        "lpBound": r.lp_bound,
        "bestBound": r.best_bound,
        "objective": r.incumbent.as_ref().map(|i| i.0),
        "x": r.incumbent.as_ref().map(|i| i.1.clone()),
        "nodes": r.nodes,
        "branchings": r.branchings,
        "totalTime": r.total_time,
    }))?;
    Ok(Outcome::Done)
}

fn gencuts(
    instance: &Path,
    terms: usize,
    out: &Path,
    rounds: usize,
    seed: Option<u64>,
) -> Result<Outcome> {
    let inst = load(instance)?;
    let build = build_disjunction(
        &inst,
        DisjunctionOptions {
            max_terms: terms,
            seed,
        },
    )?;
    if build.integral_root {
        log::warn!("{}: LP optimum is already integral", inst.name);
    }
    let cuts = generate_rounds(&inst, &build.disjunction, rounds)?;
    let bundle = CertificateBundle::new(&inst, &build.disjunction, &cuts)?;
    bundle
        .save(out)
        .with_context(|| format!("writing {}", out.display()))?;
    print_json(&json!({
        "instance": inst.name,
        "terms": build.disjunction.len(),
        "feasibleTerms": bundle.feasible_terms,
        "rootBound": build.root_bound,
        "cuts": cuts.iter().map(|g| json!({
            "alpha": g.cut.alpha,
            "beta": g.cut.beta,
            "violated": g.violated,
            "certificate": g.certificate.per_term,
            "bases": g.bases,
        })).collect::<Vec<_>>(),
        "bundle": out,
    }))?;
    Ok(Outcome::Done)
}

fn perturb(instance: &Path, spec: PerturbationSpec, out_dir: &Path) -> Result<Outcome> {
    let inst = load(instance)?;
    let set = make_test_set(&inst, &spec)?;
    std::fs::create_dir_all(out_dir)?;
    let mut members = Vec::new();
    for m in &set.members {
        let file = format!("{}.json", m.instance.name);
        save_instance(&m.instance, out_dir.join(&file))?;
        members.push(json!({ "file": file, "degree": m.degree, "attempt": m.attempt }));
    }
    let manifest = json!({
        "base": set.base,
        "spec": set.spec,
        "members": members,
        "stats": set.stats,
    });
    std::fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    eprintln!(
        "{} of {} perturbations after {} attempts",
        set.members.len(),
        spec.count,
        set.stats.attempts
    );
    Ok(match spec.count - set.members.len() {
        0 => Outcome::Done,
        missing => Outcome::Partial(missing),
    })
}

fn transfer_all(
    bundle_path: &Path,
    instances: &[PathBuf],
    strong: bool,
    out: Option<&Path>,
) -> Result<Outcome> {
    let bundle = CertificateBundle::load(bundle_path)
        .with_context(|| format!("reading {}", bundle_path.display()))?;
    let base = bundle.instance()?;
    let mut sink: Box<dyn Write> = match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut failures = 0;
    for path in instances {
        let target = load(path)?;
        let lp = solve_lp(&target.rows, &target.rhs, &target.objective, None)?;
        let lp_x = (lp.status == LpStatus::Optimal).then_some(lp.x);
        for stored in &bundle.cuts {
            let result = if strong {
                let bases: &DeterminingBases = stored
                    .bases
                    .as_ref()
                    .context("bundle has no determining bases; regenerate it")?;
                strong_pdi(
                    &base,
                    &target,
                    &bundle.disjunction,
                    &stored.certificate,
                    bases,
                )
                .map(|s| {
                    (
                        s.cut,
                        Some(s.reparameterized_terms),
                        Some(s.support_witness),
                    )
                })
            } else {
                farkas_pdi(&stored.certificate, &bundle.disjunction, &target)
                    .map(|c| (c, None, None))
            };
            let record = match result {
                Ok((cut, reparameterized_terms, support_witness)) => CutRecord {
                    instance: target.name.clone(),
                    violation_at_lp_optimum: lp_x.as_ref().map(|x| cut.violation(x)),
                    cut,
                    reparameterized_terms,
                    support_witness,
                    error: None,
                },
                Err(e) => {
                    failures += 1;
                    log::error!("{}: {e}", target.name);
                    CutRecord {
                        instance: target.name.clone(),
                        cut: stored.cut.clone(),
                        violation_at_lp_optimum: None,
                        reparameterized_terms: None,
                        support_witness: None,
                        error: Some(e.to_string()),
                    }
                }
            };
            writeln!(sink, "{}", serde_json::to_string(&record)?)?;
        }
    }
    sink.flush()?;
    Ok(if failures == 0 {
        Outcome::Done
    } else {
        Outcome::Partial(failures)
    })
}

fn experiment(config: &Path) -> Result<Outcome> {
    let cfg =
        ExperimentConfig::load(config).with_context(|| format!("reading {}", config.display()))?;
    let bases = cfg.base_instances()?;
    if bases.is_empty() {
        bail!("config lists no base instances");
    }
    let output = run_experiment(&bases, &cfg.grid)?;
    let manifest = write_outputs(&output, &cfg.grid, &cfg.out_dir)?;
    eprintln!(
        "{} rows, {} errors, written to {}",
        manifest.rows,
        manifest.errors,
        cfg.out_dir.display()
    );
    Ok(match manifest.errors {
        0 => Outcome::Done,
        n => Outcome::Partial(n),
    })
}

fn report(
    results: &Path,
    profiles: bool,
    baseline: Method,
    min_default_time: Option<f64>,
) -> Result<Outcome> {
    let records = read_records(results)?;
    let summary = summarize(&records);
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    for row in &summary {
        w.serialize(row)?;
    }
    w.flush()?;
    if !profiles {
        return Ok(Outcome::Done);
    }
    let threshold = match (min_default_time, baseline) {
        (Some(t), _) => Some(t),
        (None, Method::Default) => default_time_threshold(&records),
        (None, _) => None,
    };
    let methods: Vec<Method> = Method::ALL.into_iter().filter(|&m| m != baseline).collect();
    let profile = performance_profile(&records, baseline, &methods, threshold);
    let stem = format!("profile_{baseline}");
    std::fs::write(results.join(format!("{stem}.csv")), profile.to_csv())?;
    std::fs::write(
        results.join(format!("{stem}.json")),
        serde_json::to_string_pretty(&profile)?,
    )?;
    eprintln!(
        "profile against {baseline} over {} instances{}",
        profile.instances,
        threshold.map_or(String::new(), |t| format!(" (default >= {t:.3}s)"))
    );
    Ok(if profile.instances == 0 {
        Outcome::Partial(1)
    } else {
        Outcome::Done
    })
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Solve {
            instance,
            time_limit,
        } => solve(&instance, time_limit),
        Command::Gencuts {
            instance,
            terms,
            out,
            rounds,
            seed,
        } => gencuts(&instance, terms, &out, rounds, seed),
        Command::Perturb {
            instance,
            element,
            degree,
            count,
            seed,
            max_attempts,
            time_budget,
            out_dir,
        } => {
            let mut spec = PerturbationSpec::new(element, degree, count, seed);
            spec.max_attempts = max_attempts;
            spec.time_budget = time_budget;
            perturb(&instance, spec, &out_dir)
        }
        Command::Pdi {
            bundle,
            instances,
            strong,
            out,
        } => transfer_all(&bundle, &instances, strong, out.as_deref()),
        Command::Experiment { config } => experiment(&config),
        Command::Report {
            results,
            profiles,
            baseline,
            min_default_time,
        } => report(&results, profiles, baseline, min_default_time),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(n)) => {
            eprintln!("{n} item(s) failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
