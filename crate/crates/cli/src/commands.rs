use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::{json, Value};
use stressuq::channel::{
    barycentric_trace, relative_l2, run_members, solve_baseline, write_trace_csv, ChannelState,
    DataDrivenInjection, Envelope, EnvelopeMember, EnvelopeMode,
};
use stressuq::dns::surrogate::{surrogate_profile, table_names, write_tables};
use stressuq::dns::DnsProfile;
use stressuq::features::FeatureSet;
use stressuq::forest::{RegressionForest, TargetKind};
use stressuq::pipeline::{prepare_cases, propagate_dns, train};
use stressuq::tensor::{decompose, K_FLOOR};
use stressuq::{Error, Result};

use crate::config::RunConfig;
use crate::manifest::{self, Manifest};

/// Resolved inputs shared by every command.
pub struct Context {
    pub cfg: RunConfig,
    pub config_path: Option<PathBuf>,
    pub out: PathBuf,
}

/// Creates the output directory, runs `body` and always leaves a manifest
/// behind, with the error message when the command fails.
fn execute(
    name: &str,
    ctx: &Context,
    body: impl FnOnce(&Context, &mut Manifest) -> Result<()>,
) -> Result<()> {
    std::fs::create_dir_all(&ctx.out)?;
    let mut m = Manifest::new(name, &ctx.cfg, ctx.config_path.as_deref(), &ctx.out);
    let r = body(ctx, &mut m);
    if let Err(e) = &r {
        m.error = Some(error_chain(e));
    }
    m.write(&ctx.out)?;
    r
}

pub fn error_chain(e: &Error) -> String {
    let mut msg = e.to_string();
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        msg.push_str(": ");
        msg.push_str(&s.to_string());
        src = s.source();
    }
    msg
}

fn create(out: &Path, m: &mut Manifest, name: &str) -> Result<BufWriter<File>> {
    m.outputs.push(name.to_string());
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_state(out: &Path, m: &mut Manifest, name: &str, state: &ChannelState) -> Result<()> {
    state.write_csv(create(out, m, name)?)
}

fn write_trace(out: &Path, m: &mut Manifest, name: &str, state: &ChannelState) -> Result<()> {
    write_trace_csv(&barycentric_trace(state), create(out, m, name)?)
}

fn write_residuals(out: &Path, m: &mut Manifest, name: &str, history: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(out, m, name)?);
    w.write_record(["iteration", "residual"])?;
    for (i, r) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Largest `|lambda_2|` of the anisotropy over the non-degenerate nodes.
fn max_middle_eigenvalue(state: &ChannelState) -> f64 {
    state
        .tau
        .iter()
        .map(|t| decompose(t, K_FLOOR))
        .filter(|e| !e.degenerate)
        .map(|e| e.lambda[1].abs())
        .fold(0.0, f64::max)
}

pub fn baseline(ctx: &Context) -> Result<()> {
    execute("baseline", ctx, |ctx, m| {
        let cfg = &ctx.cfg.solver;
        let state = solve_baseline(cfg)?;
        write_state(&ctx.out, m, "baseline.csv", &state)?;
        write_trace(&ctx.out, m, "trace_baseline.csv", &state)?;
        FeatureSet::default().write_csv(&state, create(&ctx.out, m, "features.csv")?)?;
        write_residuals(&ctx.out, m, "residuals.csv", &state.residual_history)?;
        m.set("re_tau", cfg.re_tau);
        m.set("iterations", state.iterations());
        m.set("centerline_velocity", state.centerline_velocity());
        m.set("momentum_balance_error", state.momentum_balance_error());
        m.set("max_abs_lambda2", max_middle_eigenvalue(&state));
        m.set("realizability_violations", state.realizability_violations);
        Ok(())
    })
}

pub fn train_forest(ctx: &Context) -> Result<()> {
    execute("train", ctx, |ctx, m| {
        let cfg = &ctx.cfg;
        let kind = cfg.target()?;
        m.mode = Some(kind.label().into());
        let features = cfg.feature_set()?;
        let hp = cfg.hyperparams(kind);
        hp.validate(features.len())?;
        m.set("hyperparams", serde_json::to_value(&hp)?);

        let mut all = cfg.data.train_re.clone();
        all.extend(&cfg.data.test_re);
        let data = cfg.load_datasets(&all)?;
        m.datasets = data.iter().flat_map(|d| d.paths.clone()).collect();
        let profiles: Vec<(f64, DnsProfile)> =
            data.into_iter().map(|d| (d.re_tau, d.profile)).collect();
        let cases = prepare_cases(&cfg.solver, &profiles)?;
        let (train_cases, test_cases) = cases.split_at(cfg.data.train_re.len());
        let fit = train(train_cases, test_cases, kind, &hp, &features)?;

        let forest_name = format!("forest_{}.json", kind.label());
        fit.forest.write_to(create(&ctx.out, m, &forest_name)?)?;
        fit.train.write_csv(create(&ctx.out, m, "train_set.csv")?)?;
        if let Some(t) = &fit.test {
            t.write_csv(create(&ctx.out, m, "test_set.csv")?)?;
        }

        let mut w = csv::Writer::from_writer(create(&ctx.out, m, "metrics.csv")?);
        w.write_record(["target", "split", "rows", "mse", "mean_predictor_mse"])?;
        w.write_record([
            kind.label(),
            "train",
            &fit.train.len().to_string(),
            &fit.train_mse.to_string(),
            &stressuq::pipeline::mean_predictor_mse(&fit.train.y).to_string(),
        ])?;
        if let (Some(t), Some(mse), Some(base)) = (&fit.test, fit.test_mse, fit.test_baseline_mse) {
            w.write_record([
                kind.label(),
                "test",
                &t.len().to_string(),
                &mse.to_string(),
                &base.to_string(),
            ])?;
        }
        w.flush()?;

        m.set("forest", forest_name);
        m.set("train_rows", fit.train.len());
        m.set("train_mse", fit.train_mse);
        m.set("excluded_degenerate", fit.train.excluded_degenerate);
        m.set("excluded_frame", fit.train.excluded_frame);
        if let (Some(mse), Some(base)) = (fit.test_mse, fit.test_baseline_mse) {
            m.set("test_mse", mse);
            m.set("test_mean_predictor_mse", base);
        }
        Ok(())
    })
}

/// Envelope settings for the configured mode.
fn envelope_mode(cfg: &RunConfig) -> Result<EnvelopeMode> {
    let mode = cfg.uq.mode.trim().to_ascii_lowercase().replace('_', "-");
    if mode == "data-free" {
        if !(0.0..=1.0).contains(&cfg.uq.delta_b) {
            return Err(Error::Config(format!(
                "delta_b must lie in [0, 1], got {}",
                cfg.uq.delta_b
            )));
        }
        return Ok(EnvelopeMode::DataFree {
            delta_b: cfg.uq.delta_b,
        });
    }
    let kind: TargetKind = mode.parse().map_err(|_| {
        Error::Config(format!(
            "unknown mode `{}` (expected data-free, p, pcorr or pcorr_angles)",
            cfg.uq.mode
        ))
    })?;
    let path = cfg
        .uq
        .forest
        .as_ref()
        .ok_or_else(|| Error::Config(format!("mode `{}` needs a forest file", kind.label())))?;
    let forest = RegressionForest::load(path)?;
    if TargetKind::from_target_names(forest.target_names()) != Some(kind) {
        return Err(Error::Config(format!(
            "{} predicts [{}], not the `{}` targets",
            path.display(),
            forest.target_names().join(", "),
            kind.label()
        )));
    }
    let features = FeatureSet::from_names(forest.feature_names())?;
    let mut inj = DataDrivenInjection::new(Arc::new(forest), kind, None);
    inj.features = features;
    inj.freeze_features = cfg.uq.freeze_features;
    Ok(EnvelopeMode::DataDriven(inj))
}

pub fn uq(ctx: &Context) -> Result<()> {
    execute("uq", ctx, |ctx, m| {
        let cfg = &ctx.cfg;
        m.mode = Some(cfg.uq.mode.clone());
        let mode = envelope_mode(cfg)?;
        if let Some(p) = &cfg.uq.forest {
            if matches!(mode, EnvelopeMode::DataDriven(_)) {
                m.datasets.push(p.clone());
            }
        }
        let (baseline, outcomes) = run_members(&cfg.solver, &mode)?;
        write_state(&ctx.out, m, "baseline.csv", &baseline)?;
        write_trace(&ctx.out, m, "trace_baseline.csv", &baseline)?;

        let mut members = Vec::new();
        let mut failure = None;
        let mut iterations = json!({ "baseline": baseline.iterations() });
        for (label, r) in outcomes {
            match r {
                Ok(state) => {
                    write_state(&ctx.out, m, &format!("solution_{label}.csv"), &state)?;
                    write_trace(&ctx.out, m, &format!("trace_{label}.csv"), &state)?;
                    iterations[&label] = state.iterations().into();
                    members.push(EnvelopeMember { label, state });
                }
                Err(e) => {
                    iterations[&label] = Value::Null;
                    failure.get_or_insert(Error::Member {
                        corner: label,
                        source: Box::new(e),
                    });
                }
            }
        }
        m.set("re_tau", cfg.solver.re_tau);
        m.set("member_iterations", iterations);
        let most = members
            .iter()
            .map(|mb| mb.state.iterations())
            .chain([baseline.iterations()])
            .max()
            .unwrap_or(0);
        m.set("iterations", most);
        if let Some(e) = failure {
            return Err(e);
        }

        let env = Envelope::new(baseline, members);
        env.write_csv(create(&ctx.out, m, "envelope.csv")?)?;
        m.set("integrated_width", env.integrated_width());
        m.set("realizability_violations", env.realizability_violations());
        m.set(
            "centerline_velocity",
            json!({
                "baseline": env.baseline.centerline_velocity(),
                "lower": env.lower.last(),
                "upper": env.upper.last(),
            }),
        );
        Ok(())
    })
}

fn write_reference(out: &Path, m: &mut Manifest, name: &str, p: &DnsProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(out, m, name)?);
    w.write_record(["y_plus", "U_plus", "uu", "vv", "ww", "uv"])?;
    for i in 0..p.len() {
        w.write_record(
            [p.y_plus[i], p.u_plus[i], p.uu[i], p.vv[i], p.ww[i], p.uv[i]].map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn propagate(ctx: &Context) -> Result<()> {
    execute("propagate-dns", ctx, |ctx, m| {
        let cfg = &ctx.cfg;
        let noise = cfg.uq.noise;
        m.mode = Some(format!("noise={noise}"));
        let solver = &cfg.solver;
        solver.validate()?;
        let data = cfg.load_datasets(&[solver.re_tau])?;
        let data = data
            .into_iter()
            .next()
            .expect("one dataset per requested Re");
        m.datasets = data.paths.clone();

        let baseline = solve_baseline(solver)?;
        let clean = propagate_dns(solver, &data.profile, 0.0, cfg.seed, Some(&baseline))?;
        let run = if noise > 0.0 {
            propagate_dns(solver, &data.profile, noise, cfg.seed, Some(&baseline))?
        } else {
            clean.clone()
        };
        let l2_clean = relative_l2(&run.state.u_plus, &clean.state.u_plus);
        let l2_baseline = relative_l2(&baseline.u_plus, &clean.reference.u_plus);

        write_state(&ctx.out, m, "solution.csv", &run.state)?;
        write_state(&ctx.out, m, "baseline.csv", &baseline)?;
        write_reference(&ctx.out, m, "reference.csv", &run.reference)?;
        write_residuals(&ctx.out, m, "residuals.csv", &run.state.residual_history)?;
        let mut w = csv::Writer::from_writer(create(&ctx.out, m, "metrics.csv")?);
        w.write_record([
            "re_tau",
            "noise",
            "seed",
            "l2_vs_reference",
            "l2_vs_noise_free",
            "baseline_l2_vs_reference",
        ])?;
        w.write_record([
            solver.re_tau.to_string(),
            noise.to_string(),
            cfg.seed.to_string(),
            run.l2_vs_reference.to_string(),
            l2_clean.to_string(),
            l2_baseline.to_string(),
        ])?;
        w.flush()?;

        m.set("re_tau", solver.re_tau);
        m.set("iterations", run.state.iterations());
        m.set("l2_error", run.l2_vs_reference);
        m.set("l2_vs_noise_free", l2_clean);
        m.set("baseline_l2_error", l2_baseline);
        m.set(
            "realizability_violations",
            run.state.realizability_violations,
        );
        Ok(())
    })
}

/// One row of `summary.csv`.
struct SummaryRow {
    run: String,
    manifest: Manifest,
    width_ratio: Option<f64>,
}

fn collect_manifests(dir: &Path) -> Result<Vec<(String, Manifest)>> {
    let mut found = Vec::new();
    if dir.join(manifest::FILE_NAME).is_file() {
        found.push((".".to_string(), Manifest::read(dir)?));
    }
    if dir.is_dir() {
        let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(manifest::FILE_NAME).is_file())
            .collect();
        subdirs.sort();
        for p in subdirs {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned());
            found.push((name.unwrap_or_default(), Manifest::read(&p)?));
        }
    }
    found.retain(|(_, m)| m.command != "report");
    if found.is_empty() {
        return Err(Error::Data(format!(
            "no run manifest in {} or its subdirectories",
            dir.display()
        )));
    }
    Ok(found)
}

/// Data-free over data-driven integrated width for every data-driven
/// envelope that has a data-free partner at the same `Re_tau`.
fn summarize(found: Vec<(String, Manifest)>) -> Vec<SummaryRow> {
    let data_free: Vec<(f64, f64)> = found
        .iter()
        .filter(|(_, m)| m.command == "uq" && m.mode.as_deref() == Some("data-free"))
        .filter_map(|(_, m)| Some((m.number("re_tau")?, m.number("integrated_width")?)))
        .collect();
    found
        .into_iter()
        .map(|(run, manifest)| {
            let data_driven = manifest.command == "uq"
                && manifest.mode.as_deref() != Some("data-free")
                && manifest.error.is_none();
            let width_ratio = data_driven
                .then(|| {
                    let re = manifest.number("re_tau")?;
                    let w = manifest.number("integrated_width")?;
                    let (_, free) = data_free.iter().find(|(r, _)| (r - re).abs() < 1e-9)?;
                    (w > 0.0).then(|| free / w)
                })
                .flatten();
            SummaryRow {
                run,
                manifest,
                width_ratio,
            }
        })
        .collect()
}

pub fn report(dir: &Path, ctx: &Context) -> Result<()> {
    let found = collect_manifests(dir)?;
    let rows = summarize(found);
    std::fs::create_dir_all(&ctx.out)?;
    let mut m = Manifest::new("report", &ctx.cfg, ctx.config_path.as_deref(), &ctx.out);
    let mut w = csv::Writer::from_writer(create(&ctx.out, &mut m, "summary.csv")?);
    w.write_record([
        "run",
        "command",
        "mode",
        "re_tau",
        "iterations",
        "integrated_width",
        "l2_error",
        "realizability_violations",
        "width_ratio",
        "error",
    ])?;
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut violations = 0.0;
    for r in &rows {
        let mf = &r.manifest;
        violations += mf.number("realizability_violations").unwrap_or(0.0);
        w.write_record([
            r.run.clone(),
            mf.command.clone(),
            mf.mode.clone().unwrap_or_default(),
            num(mf.number("re_tau")),
            num(mf.number("iterations")),
            num(mf.number("integrated_width")),
            num(mf.number("l2_error")),
            num(mf.number("realizability_violations")),
            num(r.width_ratio),
            mf.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    drop(w);
    if violations > 0.0 {
        eprintln!("warning: {violations} non-realizable injected stresses across the runs");
    }
    m.datasets = rows
        .iter()
        .map(|r| dir.join(&r.run).join(manifest::FILE_NAME))
        .collect();
    m.set("runs", rows.len());
    m.set("realizability_violations", violations);
    // Reporting into a run directory must not replace that run's manifest.
    let own = Manifest::read(&ctx.out).map(|x| x.command == "report");
    if own.unwrap_or(true) {
        m.write(&ctx.out)?;
    }
    Ok(())
}

/// Writes analytic stand-in tables for the configured Reynolds numbers.
pub fn synth_dns(ctx: &Context, res: &[f64], points: usize) -> Result<()> {
    execute("synth-dns", ctx, |ctx, m| {
        if points < 2 {
            return Err(Error::Config(format!(
                "points must be at least 2, got {points}"
            )));
        }
        for &re in res {
            if !(re > 0.0 && re.is_finite()) {
                return Err(Error::Config(format!("re_tau must be positive, got {re}")));
            }
            let p = surrogate_profile(re, points);
            let (mean, fluct) = table_names(re);
            let mut mw = create(&ctx.out, m, &mean)?;
            let mut fw = create(&ctx.out, m, &fluct)?;
            write_tables(&p, &mut mw, &mut fw)?;
            mw.flush()?;
            fw.flush()?;
        }
        m.set("re_tau", json!(res));
        m.set("points", points);
        Ok(())
    })
}
