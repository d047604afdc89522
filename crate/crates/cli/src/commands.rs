//! Subcommand bodies. Each returns data as well as writing it, so tests can
//! drive them without a process boundary.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use annulus_core::circuit::{generate, parse_circuit, to_document, Circuit};
use annulus_core::fasty::optimize;
use annulus_core::floorplan::{min_grid, Floorplan};
use annulus_core::multiprog::{self, MultiPlan, MultiReport, Policy};
use annulus_core::placement::{greedy_place, random_place, reversed_place, spread_place};
use annulus_core::scheduler::{cpi_t, rho_route, simulate, wallclock, ExecutionTrace};
use annulus_core::transpiler::{self, oracle, parse_gates};
use annulus_core::Error;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PlacementPolicy;
use crate::table::{emit, opt, Table};
use crate::{CliError, RunConfig};

/// How far auto-sizing may grow the ring stack before giving up.
const MAX_AUTO_RINGS: usize = 64;

pub fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_circuit(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_all(paths: &[PathBuf]) -> Result<Vec<Circuit>, CliError> {
    paths.iter().map(|p| load_circuit(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenOutput {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

pub fn gen(cfg: &RunConfig) -> Result<GenOutput, CliError> {
    let dir = &cfg.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let params: Vec<_> = (0..cfg.synth.count).map(|i| cfg.synth.params(i, cfg.seed)).collect();
    let circuits = params.par_iter().map(generate).collect::<Result<Vec<_>, _>>()?;
    let mut manifest = Table::new(&["file", "name", "class", "q", "j", "n_t", "s_max", "seed"]);
    let mut files = Vec::with_capacity(circuits.len());
    for (p, c) in params.iter().zip(&circuits) {
        let file = format!("{}.json", c.name());
        let path = dir.join(&file);
        std::fs::write(&path, to_document(c)).map_err(|e| CliError::io(&path, e))?;
        let (n_t, s_max) = c.totals();
        manifest.push(vec![
            file,
            c.name().to_string(),
            p.density_class.name().to_string(),
            c.num_qubits().to_string(),
            c.num_layers().to_string(),
            n_t.to_string(),
            s_max.to_string(),
            p.seed.to_string(),
        ]);
        files.push(path);
    }
    let path = dir.join("manifest.csv");
    emit(&manifest, cfg, Some(&path))?;
    Ok(GenOutput { files, manifest: path })
}

pub fn transpile(input: &Path, out: Option<&Path>, verify: bool) -> Result<(), CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let gates = parse_gates(&text).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
    let cc = transpiler::transpile(&gates)?;
    if verify {
        if gates.num_qubits() > oracle::MAX_QUBITS {
            return Err(CliError::Input(format!(
                "--verify supports at most {} qubits, got {}",
                oracle::MAX_QUBITS,
                gates.num_qubits()
            )));
        }
        let a = oracle::unitary_of_gates(&gates)?;
        let b = oracle::unitary_of_commuted(&cc)?;
        if !oracle::equal_up_to_phase(&a, &b, 1e-9) {
            return Err(CliError::Verify(format!("{}: unitaries differ", input.display())));
        }
    }
    let name = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let circuit = cc.circuit.with_name(name);
    let doc = to_document(&circuit);
    match out {
        Some(p) => std::fs::write(p, doc).map_err(|e| CliError::io(p, e))?,
        None => println!("{doc}"),
    }
    eprintln!(
        "{}: {} eighth rotations in {} layers, {} Clifford rotations absorbed{}",
        circuit.name(),
        cc.rotations.len(),
        circuit.num_layers(),
        cc.cliffords.len(),
        if verify { ", unitary verified" } else { "" }
    );
    Ok(())
}

fn sized(cfg: &RunConfig, s_max: usize) -> annulus_core::floorplan::FloorplanConfig {
    let mut fc = cfg.floorplan;
    fc.n = fc.n.max(min_grid(s_max));
    fc
}

/// Grid widened until the CR holds the peak active set; ring count fixed by
/// `rings`, or grown from `floorplan.outer_rings` until `num_qubits` fit.
fn fit(cfg: &RunConfig, num_qubits: usize, s_max: usize, rings: Option<usize>) -> Result<Floorplan, CliError> {
    let mut fc = sized(cfg, s_max);
    let fixed = rings.or((!cfg.sim.auto_rings).then_some(fc.outer_rings));
    let range = match fixed {
        Some(l) => l..=l,
        None => fc.outer_rings..=fc.outer_rings + MAX_AUTO_RINGS,
    };
    let mut capacity = 0;
    for l in range {
        fc.outer_rings = l;
        let fp = Floorplan::build(fc)?;
        if num_qubits <= fp.capacity() {
            return Ok(fp);
        }
        capacity = fp.capacity();
    }
    Err(Error::CapacityExceeded { needed: num_qubits, capacity }.into())
}

pub fn fit_floorplan(cfg: &RunConfig, circuit: &Circuit, rings: Option<usize>) -> Result<Floorplan, CliError> {
    fit(cfg, circuit.num_qubits(), circuit.totals().1, rings)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub floorplan: Floorplan,
    pub trace: ExecutionTrace,
    pub promotions: usize,
    pub wallclock_s: f64,
}

pub fn run_sim(circuit: &Circuit, cfg: &RunConfig, rings: Option<usize>) -> Result<SimOutcome, CliError> {
    let fp = fit_floorplan(cfg, circuit, rings)?;
    let w = &cfg.placement;
    let placement = match cfg.sim.placement {
        PlacementPolicy::Greedy => greedy_place(circuit, &fp, w)?,
        PlacementPolicy::Reversed => reversed_place(circuit, &fp, w)?,
        PlacementPolicy::Random => random_place(circuit.num_qubits(), &fp, cfg.seed)?,
        PlacementPolicy::Spread => spread_place(circuit, &fp, w)?,
    };
    let (placement, promotions) = if cfg.sim.fast_y {
        let budget = cfg.sim.fast_y_budget.unwrap_or_else(|| cfg.multi.fast_y_cap(&fp));
        let o = optimize(circuit, &placement, &fp, &cfg.latency, w, Some(budget))?;
        let n = o.log.len();
        (o.placement, n)
    } else {
        (placement, 0)
    };
    let trace = simulate(circuit, &placement, &fp, &cfg.latency)?;
    let wallclock_s = wallclock(&trace, fp.config().distance)?;
    Ok(SimOutcome { floorplan: fp, trace, promotions, wallclock_s })
}

pub const SIM_HEADER: [&str; 11] =
    ["circuit", "n", "L", "K", "policy", "fasty", "t_total", "n_t", "cpi_t", "rho_route", "wallclock_s"];

fn sim_row(circuit: &Circuit, cfg: &RunConfig, o: &SimOutcome) -> Vec<String> {
    vec![
        circuit.name().to_string(),
        o.floorplan.n().to_string(),
        o.floorplan.outer_rings().to_string(),
        o.floorplan.lanes().len().to_string(),
        cfg.sim.placement.name().to_string(),
        if cfg.sim.fast_y { "on" } else { "off" }.to_string(),
        o.trace.t_total.to_string(),
        o.trace.n_t.to_string(),
        opt(cpi_t(&o.trace)),
        opt(rho_route(&o.trace)),
        o.wallclock_s.to_string(),
    ]
}

pub fn sim(
    cfg: &RunConfig,
    paths: &[PathBuf],
    rings: Option<Vec<usize>>,
    out: Option<&Path>,
    trace: Option<&Path>,
) -> Result<(), CliError> {
    let circuits = load_all(paths)?;
    let rings: Vec<Option<usize>> = match rings {
        Some(v) => v.into_iter().map(Some).collect(),
        None => vec![None],
    };
    let jobs: Vec<(&Circuit, Option<usize>)> =
        circuits.iter().flat_map(|c| rings.iter().map(move |&l| (c, l))).collect();
    let outcomes = jobs.par_iter().map(|&(c, l)| run_sim(c, cfg, l)).collect::<Result<Vec<_>, _>>()?;
    let mut summary = Table::new(&SIM_HEADER);
    let mut layers = Table::new(&["circuit", "L", "j", "t_move", "t_meas", "cr_batched"]);
    for (&(c, _), o) in jobs.iter().zip(&outcomes) {
        summary.push(sim_row(c, cfg, o));
        for lt in &o.trace.layers {
            layers.push(vec![
                c.name().to_string(),
                o.floorplan.outer_rings().to_string(),
                lt.j.to_string(),
                lt.t_move.to_string(),
                lt.t_meas.to_string(),
                lt.cr_batched.to_string(),
            ]);
        }
    }
    emit(&summary, cfg, out)?;
    if let Some(t) = trace {
        emit(&layers, cfg, Some(t))?;
    }
    Ok(())
}

/// Smallest ring stack on which the proposed policy's sectors hold every
/// workload, with the shared plan computed on it.
pub fn fit_multi(
    workloads: &[Circuit],
    cfg: &RunConfig,
    rings: Option<usize>,
) -> Result<(Floorplan, MultiPlan), CliError> {
    let total: usize = workloads.iter().map(Circuit::num_qubits).sum();
    let s_max = workloads.iter().map(|c| c.totals().1).max().unwrap_or(0);
    let mut fc = sized(cfg, s_max);
    let fixed = rings.or((!cfg.sim.auto_rings).then_some(fc.outer_rings));
    let range = match fixed {
        Some(l) => l..=l,
        None => fc.outer_rings..=fc.outer_rings + MAX_AUTO_RINGS,
    };
    let mut last = Error::CapacityExceeded { needed: total, capacity: 0 };
    for l in range {
        fc.outer_rings = l;
        let fp = Floorplan::build(fc)?;
        if total > fp.capacity() {
            last = Error::CapacityExceeded { needed: total, capacity: fp.capacity() };
            continue;
        }
        let attempt = multiprog::plan(workloads, &fp, &cfg.multi, &cfg.placement, &cfg.latency).and_then(|p| {
            multiprog::place_concurrent(workloads, &p.sectors, &p.quotas, &cfg.placement, Policy::Proposed, cfg.seed)
                .map(|_| p)
        });
        match attempt {
            Ok(p) => return Ok((fp, p)),
            Err(e) if matches!(e, Error::CapacityExceeded { .. } | Error::FloorplanFull) => last = e,
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.into())
}

pub const MULTI_HEADER: [&str; 10] =
    ["workload", "q", "b0", "by", "t_alone", "t_conc", "slowdown", "mean_slowdown", "efficiency", "jain"];

pub fn multi_table(r: &MultiReport) -> Table {
    let mut t = Table::new(&MULTI_HEADER);
    for row in &r.rows {
        let mut cells = vec![
            row.workload.to_string(),
            row.q.to_string(),
            row.b0.to_string(),
            row.by.to_string(),
            row.t_alone.to_string(),
            row.t_conc.to_string(),
            row.slowdown.to_string(),
        ];
        cells.extend(std::iter::repeat_n(String::new(), 3));
        t.push(cells);
    }
    let mut agg = vec!["all".to_string()];
    agg.extend(std::iter::repeat_n(String::new(), 6));
    agg.extend([r.mean_slowdown.to_string(), r.efficiency.to_string(), r.jain.to_string()]);
    t.push(agg);
    t
}

pub fn multi(
    cfg: &RunConfig,
    paths: &[PathBuf],
    policies: &[Policy],
    rings: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let workloads = load_all(paths)?;
    let (_, plan) = fit_multi(&workloads, cfg, rings)?;
    let reports = policies
        .par_iter()
        .map(|&p| multiprog::report(&workloads, &plan, &cfg.placement, &cfg.latency, p, cfg.seed))
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        let path = match out {
            Some(o) if policies.len() > 1 => {
                let stem = o.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Some(o.with_file_name(format!("{stem}.{}.csv", r.policy.name())))
            }
            Some(o) => Some(o.to_path_buf()),
            None => None,
        };
        emit(&multi_table(r), cfg, path.as_deref())?;
    }
    Ok(())
}

/// Parameter name to the values it takes; each parameter is varied alone
/// against the base config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub params: BTreeMap<String, Vec<f64>>,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    }
}

pub const SWEEP_PARAMS: [&str; 12] = [
    "alpha_t",
    "alpha_y",
    "alpha_ratio",
    "lambda_t",
    "lambda_y",
    "lambda_int",
    "outer_rings",
    "lanes",
    "n",
    "tau_msf",
    "fast_y",
    "by_total",
];

fn as_count(name: &str, v: f64) -> Result<usize, CliError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(CliError::Input(format!("{name} takes non-negative integers, got {v}")))
    }
}

/// Base config with one parameter set, plus a forced ring count if the
/// parameter is `outer_rings`.
pub fn apply_param(base: &RunConfig, name: &str, v: f64) -> Result<(RunConfig, Option<usize>), CliError> {
    let mut c = base.clone();
    let mut rings = None;
    match name {
        "alpha_t" => c.placement.alpha_t = v,
        "alpha_y" => c.placement.alpha_y = v,
        "alpha_ratio" => c.placement.alpha_y = v * c.placement.alpha_t,
        "lambda_t" => c.placement.lambda_t = v,
        "lambda_y" => c.placement.lambda_y = v,
        "lambda_int" => c.placement.lambda_int = v,
        "outer_rings" => rings = Some(as_count(name, v)?),
        "lanes" => c.floorplan.lanes = as_count(name, v)?,
        "n" => c.floorplan.n = as_count(name, v)?,
        "tau_msf" => c.latency.tau_msf = as_count(name, v)? as u64,
        "fast_y" => c.sim.fast_y = as_count(name, v)? != 0,
        "by_total" => c.multi.b_y_total = Some(as_count(name, v)?),
        _ => {
            return Err(CliError::Input(format!(
                "unknown sweep parameter {name:?}; expected one of {}",
                SWEEP_PARAMS.join(", ")
            )))
        }
    }
    c.validate()?;
    Ok((c, rings))
}

pub const SWEEP_HEADER: [&str; 5] = ["param", "value", "circuit", "metric", "metric_value"];

pub fn sweep_rows(cfg: &RunConfig, spec: &SweepSpec, circuits: &[Circuit]) -> Result<Table, CliError> {
    let mut points = Vec::new();
    for (name, values) in &spec.params {
        for &v in values {
            let (c, rings) = apply_param(cfg, name, v)?;
            points.push((name.as_str(), v, c, rings));
        }
    }
    let jobs: Vec<_> = points.iter().flat_map(|p| circuits.iter().map(move |c| (p, c))).collect();
    let outcomes = jobs
        .par_iter()
        .map(|((_, _, c, rings), circuit)| run_sim(circuit, c, *rings))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&SWEEP_HEADER);
    for (((name, v, _, _), circuit), o) in jobs.iter().zip(&outcomes) {
        let metrics = [
            ("t_total", o.trace.t_total.to_string()),
            ("n_t", o.trace.n_t.to_string()),
            ("cpi_t", opt(cpi_t(&o.trace))),
            ("rho_route", opt(rho_route(&o.trace))),
            ("sum_move", o.trace.sum_move().to_string()),
            ("sum_meas", o.trace.sum_meas().to_string()),
            ("promotions", o.promotions.to_string()),
        ];
        for (m, val) in metrics {
            t.push(vec![name.to_string(), v.to_string(), circuit.name().to_string(), m.to_string(), val]);
        }
    }
    Ok(t)
}

pub fn sweep(cfg: &RunConfig, spec: &SweepSpec, paths: &[PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    let circuits = load_all(paths)?;
    let t = sweep_rows(cfg, spec, &circuits)?;
    emit(&t, cfg, out)?;
    if let Some(o) = out {
        let spec_path = o.with_extension("sweep.toml");
        std::fs::write(&spec_path, toml::to_string(spec).expect("spec serializes"))
            .map_err(|e| CliError::io(&spec_path, e))?;
    }
    Ok(())
}
