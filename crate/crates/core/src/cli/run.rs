//! Scenario execution and output files.

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use super::config::{Experiment, ScenarioConfig};
use crate::admissibility::{classify, rho_components};
use crate::enss::{self, build_block_map, decay_fit, DecayOptions};
use crate::error::{Error, Result};
use crate::field::{Lattice, WaveFunction};
use crate::potential::{build_static, StaticPotential, TimeDependentPotential, TimeEnvelope};
use crate::propagate::{
    evolve_static, evolve_timedep, free_evolve, monodromy_apply, PropagationPlan, GUARD_FRACTION,
};
use crate::rational;
use crate::report::{fmt, round12, Table};
use crate::scatter::{self, CookOptions, CookResult, SmoothnessResult};
use crate::spectrum::{self, SolverOptions};
use crate::symbol::{DispersionSymbol, SmoothCutoff};

/// Front-end overrides applied on top of a scenario file.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: usize,
    pub quiet: bool,
}

/// Everything an experiment produced, before it is written out.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: Value,
    pub tables: Vec<(String, Table)>,
    pub fields: Vec<(String, WaveFunction)>,
    /// Human-readable lines for standard output.
    pub log: Vec<String>,
    /// Set when the experiment produced outputs but missed its convergence target.
    pub failure: Option<Error>,
}

/// Maps `f` over `items` on up to `threads` scoped workers, preserving order.
pub fn par_map<T: Sync, R: Send>(threads: usize, items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker thread panicked"))
            .collect()
    })
}

fn round_json(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round12(x));
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_json),
        Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn tolerances(cfg: &ScenarioConfig) -> Value {
    json!({
        "guard_fraction": GUARD_FRACTION,
        "dt": cfg.lattice.as_ref().map(|l| l.dt),
        "line_tolerance": enss::LINE_TOLERANCE,
        "radial_tolerance": enss::RADIAL_TOLERANCE,
        "window_leak": scatter::WINDOW_LEAK,
        "residual_factor": spectrum::RESIDUAL_FACTOR,
    })
}

fn header(cfg: &ScenarioConfig) -> Value {
    json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "experiment": cfg.experiment.name(),
        "name": cfg.name,
        "seed": cfg.seed,
        "config": to_json(cfg),
        "tolerances": tolerances(cfg),
    })
}

/// Applies the overrides, runs the experiment and writes the output directory.
///
/// A failed run still writes `summary.json` carrying the error and its exit code.
pub fn run_scenario(mut cfg: ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    if let Some(e) = opts.experiment {
        cfg.experiment = e;
        cfg.validate()?;
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.name()));
    std::fs::create_dir_all(&dir)?;
    match execute(&cfg, opts.threads) {
        Ok(mut out) => {
            write_outputs(&dir, &out)?;
            match out.failure.take() {
                Some(e) => Err(e),
                None => Ok(out),
            }
        }
        Err(e) => {
            let mut summary = header(&cfg);
            summary["status"] = json!("error");
            summary["error"] = json!(e.to_string());
            summary["exit_code"] = json!(e.exit_code());
            round_json(&mut summary);
            let text = serde_json::to_string_pretty(&summary).expect("json");
            std::fs::write(dir.join("summary.json"), text + "\n")?;
            Err(e)
        }
    }
}

pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<()> {
    let text = serde_json::to_string_pretty(&out.summary).expect("json");
    std::fs::write(dir.join("summary.json"), text + "\n")?;
    for (name, table) in &out.tables {
        table.write(&dir.join(format!("detail_{name}.csv")))?;
    }
    for (name, wf) in &out.fields {
        wf.write_binary(&dir.join(format!("field_{name}.bin")))?;
    }
    Ok(())
}

/// Runs the configured experiment without touching the filesystem.
pub fn execute(cfg: &ScenarioConfig, threads: usize) -> Result<RunOutput> {
    let mut out = RunOutput {
        summary: Value::Null,
        tables: Vec::new(),
        fields: Vec::new(),
        log: Vec::new(),
        failure: None,
    };
    let results = match cfg.experiment {
        Experiment::Admit => admit(cfg, &mut out)?,
        Experiment::Evolve => evolve(cfg, &mut out)?,
        Experiment::DecayFit => decay(cfg, &mut out)?,
        Experiment::Smooth => smooth(cfg, threads, &mut out)?,
        Experiment::Waveop => waveop(cfg, &mut out)?,
        Experiment::Invariance => invariance(cfg, threads, &mut out)?,
        Experiment::Monodromy => monodromy(cfg, &mut out)?,
        Experiment::Spectrum => spectrum_run(cfg, threads, &mut out)?,
    };
    let mut summary = header(cfg);
    match &out.failure {
        None => summary["status"] = json!("ok"),
        Some(e) => {
            summary["status"] = json!("error");
            summary["error"] = json!(e.to_string());
            summary["exit_code"] = json!(e.exit_code());
        }
    }
    summary["results"] = results;
    round_json(&mut summary);
    out.summary = summary;
    Ok(out)
}

struct Setup {
    lattice: std::sync::Arc<Lattice>,
    plan: PropagationPlan,
}

fn setup(cfg: &ScenarioConfig) -> Result<Setup> {
    let lc = cfg.lattice()?;
    let lattice = lc.build(&cfg.symbol)?;
    let plan = PropagationPlan::new(&cfg.symbol, &lattice, lc.dt)?;
    Ok(Setup { lattice, plan })
}

fn static_potential(cfg: &ScenarioConfig, lattice: &Lattice) -> Result<StaticPotential> {
    match &cfg.potential {
        Some(spec) => build_static(lattice, spec).map_err(|e| match e {
            Error::Invalid(m) => Error::config("potential", m),
            other => other,
        }),
        None => Ok(StaticPotential::zero(lattice)),
    }
}

fn certificates(v: &StaticPotential) -> Value {
    json!({ "in_class": v.in_class(), "classes": to_json(&v.certificates) })
}

fn admit(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.admit.as_ref().expect("validated");
    let q = p.q.as_deref().map(rational::parse).transpose()?;
    let report = classify(&cfg.symbol, &p.eps, q.as_ref())?;
    let mut t = Table::new(&["set", "applicable", "verdict", "boundary", "inexact", "witness"]);
    for m in &report.memberships {
        t.push(vec![
            m.set.to_string(),
            m.applicable.to_string(),
            m.verdict.to_string(),
            m.boundary.to_string(),
            m.inexact.to_string(),
            m.witness.replace(',', ";"),
        ]);
    }
    out.tables.push(("admit".into(), t));
    out.log.push(report.render());
    Ok(to_json(&report))
}

fn position_moments(wf: &WaveFunction) -> (f64, f64) {
    let lat = wf.lattice();
    let stride = lat.stride(0);
    let n0 = lat.axes()[0].points;
    let x = lat.x_axis(0);
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (i, s) in wf.samples().iter().enumerate() {
        let xi = x[(i / stride) % n0];
        let p = s.norm_sqr();
        m0 += p;
        m1 += p * xi;
        m2 += p * xi * xi;
    }
    if m0 == 0.0 {
        return (0.0, 0.0);
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).max(0.0).sqrt())
}

fn evolve(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.evolve.as_ref().expect("validated");
    let Setup { lattice, plan } = setup(cfg)?;
    let psi0 = cfg.state()?.build(&lattice, "state")?;
    let v = static_potential(cfg, &lattice)?;
    plan.check_guard(&psi0, p.t.abs())?;
    let pot = match &cfg.envelope {
        Some(env) if *env != TimeEnvelope::Constant => Some(TimeDependentPotential::new(v.clone(), env.clone())?),
        _ => None,
    };
    let records = p.records.max(1);
    let mut t = Table::new(&["t", "norm", "mean_x0", "width_x0"]);
    let mut psi = psi0.clone();
    let mut prev = 0.0;
    let push = |t: &mut Table, time: f64, wf: &WaveFunction| {
        let (m, w) = position_moments(wf);
        t.push(vec![fmt(time), fmt(wf.norm()), fmt(m), fmt(w)]);
    };
    push(&mut t, 0.0, &psi);
    for i in 1..=records {
        let now = p.t * i as f64 / records as f64;
        psi = match &pot {
            Some(pot) => evolve_timedep(&plan, pot, &psi, prev, now)?,
            None if cfg.potential.is_some() => evolve_static(&plan, &v.values, &psi, now - prev)?,
            None => free_evolve(&plan, &psi, now - prev)?,
        };
        prev = now;
        push(&mut t, now, &psi);
    }
    let drift = (psi.norm() - psi0.norm()).abs();
    out.log.push(format!("evolved to t = {}; norm drift {}", p.t, fmt(drift)));
    out.tables.push(("evolve".into(), t));
    if p.dump_field {
        out.fields.push(("initial".into(), psi0.clone()));
        out.fields.push(("final".into(), psi.clone()));
    }
    Ok(json!({
        "t": p.t,
        "norm_drift": drift,
        "v_max": plan.velocity_bound(&psi0),
        "potential": certificates(&v),
    }))
}

fn decay(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.decay.as_ref().expect("validated");
    let j = p.block - 1;
    let lc = cfg.lattice()?;
    let axes = lc.axes(cfg.symbol.dim())?;
    let sub_axes = cfg.symbol.block_axes(j).map(|i| axes[i]).collect();
    let sub = DispersionSymbol::from_blocks(vec![cfg.symbol.block(j).clone()])?;
    let lattice = Lattice::for_symbol(&sub, sub_axes)?;
    let map = build_block_map(&sub, &lattice, 0)?;
    let times = p.times.clone().unwrap_or_else(|| enss::dyadic_times(2.0, 6));
    let cutoff = p.cutoff_scale.map(|s| (SmoothCutoff::default(), s));
    let opts = DecayOptions {
        members: p.members,
        width: p.width,
    };
    let fit = decay_fit(&sub, &map, p.eps, p.sign, cutoff, &times, &opts)?;
    let mut t = Table::new(&["t", "envelope", "members"]);
    for ((time, v), m) in fit.times.iter().zip(&fit.values).zip(&fit.members) {
        t.push(vec![fmt(*time), fmt(*v), m.to_string()]);
    }
    let mut f = Table::new(&enss::DecayFit::CSV_HEADER);
    f.push(fit.csv_row());
    out.tables.push(("decay".into(), t));
    out.tables.push(("fit".into(), f));
    out.log.push(format!(
        "block {}: slope {} (target {}), residual {}",
        p.block,
        fmt(fit.slope),
        fmt(fit.target),
        fmt(fit.residual)
    ));
    Ok(json!({
        "fit": to_json(&fit),
        "approximate": map.is_approximate(),
        "tolerance": map.tolerance(),
        "kernel_norm": map.kernel_norm(),
        "sheets": map.sheet_sizes(),
    }))
}

/// Combines per-chunk smoothness results over disjoint parts of one ensemble.
fn merge_smoothness(parts: Vec<SmoothnessResult>) -> SmoothnessResult {
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one chunk");
    for r in it {
        acc.ratios.iter_mut().zip(&r.ratios).for_each(|(a, b)| *a = a.max(*b));
        acc.integrals.extend(r.integrals);
    }
    let n = acc.ratios.len();
    acc.ratio = *acc.ratios.last().unwrap_or(&0.0);
    acc.last_change = if n >= 2 && acc.ratios[n - 2] > 0.0 {
        acc.ratio / acc.ratios[n - 2] - 1.0
    } else {
        0.0
    };
    acc.converged = acc.last_change.abs() < 0.05;
    acc
}

fn smooth(cfg: &ScenarioConfig, threads: usize, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.smooth.as_ref().expect("validated");
    let Setup { lattice, plan } = setup(cfg)?;
    let ensemble: Vec<WaveFunction> = if p.members.is_empty() {
        vec![cfg.state()?.build(&lattice, "state")?]
    } else {
        p.members
            .iter()
            .enumerate()
            .map(|(i, m)| m.build(&lattice, &format!("smooth.members[{i}]")))
            .collect::<Result<_>>()?
    };
    let chunks: Vec<&[WaveFunction]> = ensemble.chunks(ensemble.len().div_ceil(threads.max(1))).collect();
    let parts = par_map(threads, &chunks, |c| {
        scatter::smoothness_integral(&plan, &p.eps, p.gamma, c, p.horizon)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let res = merge_smoothness(parts);
    let mut t = Table::new(&["T", "ratio"]);
    for (cp, r) in res.checkpoints.iter().zip(&res.ratios) {
        t.push(vec![fmt(*cp), fmt(*r)]);
    }
    out.tables.push(("smooth".into(), t));
    out.log.push(format!(
        "ratio {} at T = {}; last doubling changed it by {}",
        fmt(res.ratio),
        p.horizon,
        fmt(res.last_change)
    ));
    let scan = match &p.cutoff {
        Some(c) => {
            let scan = scatter::smoothness_cutoff_scan(&plan, &p.eps, p.gamma, &ensemble, p.horizon, c.axis, &c.scales)?;
            let mut t = Table::new(&["s", "ratio"]);
            for (s, r) in scan.scales.iter().zip(&scan.ratios) {
                t.push(vec![fmt(*s), fmt(*r)]);
            }
            out.tables.push(("cutoff".into(), t));
            Some(to_json(&scan))
        }
        None => None,
    };
    Ok(json!({ "smoothness": to_json(&res), "cutoff_scan": scan }))
}

fn cook_json(r: &CookResult) -> Value {
    json!({
        "sign": r.sign.to_string(),
        "horizon": r.horizon,
        "step": r.step,
        "tail": r.tail,
        "isometry_defect": r.isometry_defect,
        "intertwining_defect": r.intertwining_defect,
        "converged": r.converged,
    })
}

fn potential_rho(cfg: &ScenarioConfig) -> Result<f64> {
    let spec = cfg.potential()?;
    match &spec.eps {
        Some(eps) => Ok(rational::to_f64(&rho_components(&cfg.symbol, eps)?.rho)),
        None => Err(Error::config(
            "potential.eps",
            "needed to certify the time-dependent hypothesis",
        )),
    }
}

fn waveop(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.waveop.as_ref().expect("validated");
    let Setup { lattice, plan } = setup(cfg)?;
    let psi = cfg.state()?.build(&lattice, "state")?;
    let v = static_potential(cfg, &lattice)?;
    let window = cfg.window.as_ref().map(|w| w.build()).transpose()?;

    if let Some(env) = cfg.envelope.as_ref().filter(|e| **e != TimeEnvelope::Constant) {
        let horizons = p.horizons.as_ref().expect("validated");
        let gamma = p
            .gamma
            .ok_or_else(|| Error::config("waveop.gamma", "required with an [envelope]"))?;
        let pot = TimeDependentPotential::new(v.clone(), env.clone())?;
        let res = scatter::timedep_wave_operator(&plan, &pot, &psi, p.sign, horizons, gamma, potential_rho(cfg)?)?;
        let mut t = Table::new(&["T", "increment"]);
        for (h, inc) in horizons.iter().skip(1).zip(&res.increments) {
            t.push(vec![fmt(*h), fmt(*inc)]);
        }
        out.tables.push(("waveop".into(), t));
        out.log.push(format!(
            "Cauchy increments {}; unitarity defect {}",
            if res.decreasing { "decreasing" } else { "not decreasing" },
            fmt(res.unitarity_defect)
        ));
        if p.dump_field {
            if let Some(w) = &res.output {
                out.fields.push(("waveop".into(), w.clone()));
            }
        }
        return Ok(json!({ "timedep": to_json(&res), "potential": certificates(&v) }));
    }

    let opts = CookOptions {
        tol: p.tol,
        intertwining_tau: p.tau,
    };
    let res = match p.t_max {
        Some(t_max) => scatter::cook_until_converged(&plan, &v.values, &psi, p.sign, p.horizon, t_max, window.as_ref(), &opts)?,
        None => scatter::cook_wave_operator(&plan, &v.values, &psi, p.sign, p.horizon, window.as_ref(), &opts)?,
    };
    let mut t = Table::new(&CookResult::CSV_HEADER);
    t.push(res.csv_row(cfg.name.as_deref().unwrap_or("waveop")));
    out.tables.push(("waveop".into(), t));
    out.log.push(format!(
        "W_{} at T = {}: tail {}, isometry defect {}{}",
        res.sign,
        res.horizon,
        fmt(res.tail),
        fmt(res.isometry_defect),
        if res.converged { "" } else { " (not converged)" }
    ));
    let scattering = if p.scattering {
        let s = scatter::scattering_apply(&plan, &v.values, &psi, res.horizon)?;
        Some(json!({ "norm_defect": (s.norm() - psi.norm()).abs() }))
    } else {
        None
    };
    if p.dump_field {
        out.fields.push(("waveop".into(), res.output.clone()));
    }
    if !res.converged {
        out.failure = Some(Error::NonConvergence(format!(
            "Cook tail {} above tolerance {} at T = {}",
            res.tail, p.tol, res.horizon
        )));
    }
    Ok(json!({ "cook": cook_json(&res), "scattering": scattering, "potential": certificates(&v) }))
}

fn invariance(cfg: &ScenarioConfig, threads: usize, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.invariance.as_ref().expect("validated");
    let Setup { lattice, plan } = setup(cfg)?;
    let psi = cfg.state()?.build(&lattice, "state")?;
    let v = static_potential(cfg, &lattice)?;
    let window = cfg.window.as_ref().expect("validated").build()?;
    let results = par_map(threads, &p.horizons, |&h| {
        scatter::invariance_compare(&plan, p.function, &v.values, &psi, &window, h)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["T", "defect"]);
    for r in &results {
        t.push(vec![fmt(r.horizon), fmt(r.defect)]);
    }
    out.tables.push(("invariance".into(), t));
    let defects: Vec<f64> = results.iter().map(|r| r.defect).collect();
    let decreasing = defects.windows(2).all(|w| w[1] < w[0]);
    out.log.push(format!(
        "defects {:?}; {}",
        defects.iter().map(|d| fmt(*d)).collect::<Vec<_>>(),
        if decreasing { "decreasing" } else { "not decreasing" }
    ));
    Ok(json!({ "comparisons": to_json(&results), "decreasing": decreasing, "potential": certificates(&v) }))
}

fn monodromy(cfg: &ScenarioConfig, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.monodromy.as_ref().expect("validated");
    let Setup { lattice, plan } = setup(cfg)?;
    let psi = cfg.state()?.build(&lattice, "state")?;
    let v = static_potential(cfg, &lattice)?;
    let pot = TimeDependentPotential::new(v.clone(), cfg.envelope.clone().expect("validated"))?;
    let one = monodromy_apply(&plan, &pot, &psi)?;
    let res = scatter::monodromy_wave_operator(&plan, &pot, &psi, &p.periods)?;
    let mut t = Table::new(&["n", "increment"]);
    for (n, inc) in p.periods.iter().skip(1).zip(&res.increments) {
        t.push(vec![n.to_string(), fmt(*inc)]);
    }
    out.tables.push(("monodromy".into(), t));
    out.log.push(format!(
        "monodromy norm defect {}; increments {}",
        fmt((one.norm() - psi.norm()).abs()),
        if res.decreasing { "decreasing" } else { "not decreasing" }
    ));
    if p.dump_field {
        if let Some(w) = &res.output {
            out.fields.push(("monodromy".into(), w.clone()));
        }
    }
    Ok(json!({
        "monodromy_unitarity_defect": (one.norm() - psi.norm()).abs(),
        "wave_operator": to_json(&res),
        "potential": certificates(&v),
    }))
}

fn spectrum_run(cfg: &ScenarioConfig, threads: usize, out: &mut RunOutput) -> Result<Value> {
    let p = cfg.spectrum.as_ref().expect("validated");
    let solver = SolverOptions {
        seed: cfg.seed,
        ..SolverOptions::default()
    };
    let mut results = serde_json::Map::new();
    if cfg.lattice.is_some() {
        let Setup { lattice, plan } = setup(cfg)?;
        let v = static_potential(cfg, &lattice)?;
        let rep = spectrum::discrete_spectrum(&plan, &v.values, p.window, p.k_max, &solver)?;
        let mut t = Table::new(&["index", "eigenvalue", "residual"]);
        for (i, (e, r)) in rep.eigenvalues.iter().zip(&rep.residuals).enumerate() {
            t.push(vec![i.to_string(), fmt(*e), fmt(*r)]);
        }
        out.tables.push(("spectrum".into(), t));
        let mut s = Table::new(&["m", "count"]);
        for (m, c) in &rep.shells {
            s.push(vec![m.to_string(), c.to_string()]);
        }
        out.tables.push(("shells".into(), s));
        out.log.push(format!(
            "{} eigenvalues in ({}, {}){}",
            rep.eigenvalues.len(),
            p.window.0,
            p.window.1,
            if rep.converged { "" } else { " (not converged)" }
        ));
        if p.oracle {
            let dense = spectrum::dense_eigenvalues(&plan, &v.values)?;
            let inside: Vec<f64> = dense.into_iter().filter(|e| *e > p.window.0 && *e < p.window.1).collect();
            let gap = rep
                .eigenvalues
                .iter()
                .zip(&inside)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            results.insert("oracle".into(), json!({ "count": inside.len(), "max_difference": gap }));
        }
        results.insert("potential".into(), certificates(&v));
        if !rep.converged {
            out.failure = Some(Error::NonConvergence("eigensolver exhausted its restart budget".into()));
        }
        results.insert("report".into(), to_json(&rep));
    }
    if let Some(l) = &p.ladder {
        let studies = par_map(threads, &l.eps, |&e| {
            spectrum::accumulation_study(&cfg.symbol, &[e], l.coupling, &l.rungs, l.delta, &solver)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(&spectrum::AccumulationStudy::CSV_HEADER);
        let mut verdicts = Vec::new();
        for s in &studies {
            for row in s.csv_rows() {
                t.push(row);
            }
            verdicts.extend(s.verdicts.iter().map(|(e, v)| json!({ "eps": e, "verdict": v.to_string() })));
        }
        out.tables.push(("ladder".into(), t));
        out.log.push(format!("ladder verdicts {}", Value::Array(verdicts.clone())));
        results.insert("ladder".into(), json!({ "studies": to_json(&studies), "verdicts": verdicts }));
    }
    Ok(Value::Object(results))
}
