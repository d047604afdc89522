//! Concurrent workloads on one floorplan.
//!
//! Each workload gets a ring-0 tile quota and a fast-Y quota from its
//! pressures: non-Clifford volume (`P_T`), movement (`P_M`) and Y work
//! (`P_Y`). Under the proposed policy ring 0 is cut into contiguous arcs,
//! one per workload, each with its own CR-entry lanes. The arc extends
//! radially: an outer tile belongs to the workload whose arc contains its
//! angle mapped back onto ring 0.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::fasty::optimize;
use crate::floorplan::{Floorplan, RingTile};
use crate::placement::{cost_order, fill_order_with, greedy_place, place_in_order, Placement, PlacementWeights};
use crate::scheduler::{qubit_move, simulate, LatencyModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiConfig {
    pub eta_t: f64,
    pub eta_m: f64,
    /// System-wide fast-Y cap; `None` means `⌊N_0/4⌋`.
    pub b_y_total: Option<usize>,
}

impl Default for MultiConfig {
    fn default() -> Self {
        MultiConfig { eta_t: 1.0, eta_m: 2.0, b_y_total: None }
    }
}

impl MultiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta_t < 0.0 || self.eta_m < 0.0 || self.eta_t + self.eta_m <= 0.0 {
            return Err(Error::InvalidParams("eta weights must be non-negative, not both zero".into()));
        }
        Ok(())
    }

    pub fn fast_y_cap(&self, fp: &Floorplan) -> usize {
        self.b_y_total.unwrap_or(fp.ring0_tiles() / 4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Every qubit on a uniformly random tile.
    Random,
    /// Random tile pools, cost-sorted within each pool.
    Naive,
    /// Pressure-sized sectors with private lanes.
    Proposed,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Random, Policy::Naive, Policy::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Random => "random",
            Policy::Naive => "naive",
            Policy::Proposed => "proposed",
        }
    }
}

impl std::str::FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Policy::Random),
            "naive" => Ok(Policy::Naive),
            "proposed" => Ok(Policy::Proposed),
            _ => Err(Error::InvalidParams(format!("unknown policy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadPressures {
    pub p_t: usize,
    pub p_y: usize,
    pub p_m: u64,
}

/// Pressures of a workload running alone under greedy placement on `fp`.
pub fn pressures(circuit: &Circuit, fp: &Floorplan, weights: &PlacementWeights) -> Result<WorkloadPressures> {
    let placement = greedy_place(circuit, fp, weights)?;
    let mut p_m = 0;
    for q in 0..circuit.num_qubits() {
        p_m += qubit_move(q, &placement, fp)?;
    }
    Ok(WorkloadPressures {
        p_t: circuit.totals().0,
        p_y: circuit.profiles().iter().map(|p| p.y_total).sum(),
        p_m,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quotas {
    pub b0: Vec<usize>,
    pub by: Vec<usize>,
}

/// `⌈total · share_w⌉`, trimmed back to `total` by taking one from the
/// rounded-up share with the smallest fractional part, repeatedly.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let w = weights.len();
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|x| total as f64 * x / sum).collect()
    } else {
        vec![total as f64 / w as f64; w]
    };
    // Snap values within rounding noise of an integer so exact shares are
    // not bumped by their ceiling.
    let snapped: Vec<f64> =
        exact.iter().map(|&x| if (x - x.round()).abs() < 1e-9 { x.round() } else { x }).collect();
    let mut out: Vec<usize> = snapped.iter().map(|x| x.ceil() as usize).collect();
    let mut rounded: Vec<usize> = (0..w).filter(|&i| snapped[i].fract() > 0.0).collect();
    rounded.sort_by(|&a, &b| snapped[a].fract().total_cmp(&snapped[b].fract()).then(a.cmp(&b)));
    let mut it = rounded.into_iter();
    while out.iter().sum::<usize>() > total {
        match it.next() {
            Some(i) => out[i] -= 1,
            None => break,
        }
    }
    out
}

pub fn budgets(pressures: &[WorkloadPressures], fp: &Floorplan, cfg: &MultiConfig) -> Result<Quotas> {
    cfg.validate()?;
    if pressures.is_empty() {
        return Err(Error::InvalidParams("at least one workload is required".into()));
    }
    let n0 = fp.ring0_tiles();
    let w0: Vec<f64> =
        pressures.iter().map(|p| cfg.eta_t * p.p_t as f64 + cfg.eta_m * p.p_m as f64).collect();
    let mut b0 = apportion(n0, &w0);
    // Every workload needs a ring-0 arc to host its lane.
    for b in &mut b0 {
        *b = (*b).max(1);
    }
    while b0.iter().sum::<usize>() > n0 {
        let (i, _) = b0.iter().enumerate().max_by_key(|&(i, &b)| (b, std::cmp::Reverse(i))).expect("non-empty");
        b0[i] -= 1;
    }
    let wy: Vec<f64> = pressures.iter().map(|p| p.p_y as f64).collect();
    let by = apportion(cfg.fast_y_cap(fp), &wy);
    Ok(Quotas { b0, by })
}

/// Ring-0 arcs and per-workload lanes over a floorplan rebuilt with those
/// lanes.
#[derive(Debug, Clone, PartialEq)]
pub struct Sectors {
    pub floorplan: Floorplan,
    /// `(start, length)` on ring 0, in workload order and contiguous.
    pub arcs: Vec<(usize, usize)>,
    /// Lane indices (into `floorplan.lanes()`) owned by each workload.
    pub lanes: Vec<Vec<usize>>,
}

impl Sectors {
    /// Which workload's arc contains ring-0 angle `theta`.
    pub fn owner_of_angle(&self, theta: usize) -> usize {
        let n0 = self.floorplan.ring0_tiles();
        self.arcs
            .iter()
            .position(|&(s, len)| (theta + n0 - s) % n0 < len)
            .expect("arcs cover ring 0")
    }

    pub fn owner(&self, t: RingTile) -> usize {
        self.owner_of_angle(self.floorplan.sector_angle(t))
    }

    pub fn region(&self, w: usize) -> BTreeSet<RingTile> {
        self.floorplan.tiles().filter(|&t| self.owner(t) == w).collect()
    }
}

/// Arcs of lengths `b0` laid out from the offset that forces the fewest of
/// each workload's `demand` ring-0 qubits onto corner tiles.
pub fn plan_sectors(b0: &[usize], demand: &[usize], fp: &Floorplan) -> Result<Sectors> {
    let n0 = fp.ring0_tiles();
    let w = b0.len();
    let k = fp.lanes().len();
    if k < w {
        return Err(Error::NotEnoughLanes { workloads: w, lanes: k });
    }
    let total: usize = b0.iter().sum();
    if total != n0 || b0.contains(&0) || demand.len() != w {
        return Err(Error::InvalidParams(format!("ring-0 quotas {b0:?} must be positive and sum to {n0}")));
    }
    let corners = fp.corners(0);
    let edge_count = |s: usize, len: usize| (0..len).filter(|i| !corners.contains(&((s + i) % n0))).count();
    let offset = (0..n0)
        .filter_map(|off| {
            let mut s = off;
            let mut forced = 0;
            for (&len, &want) in b0.iter().zip(demand) {
                let edges = edge_count(s, len);
                if edges == 0 {
                    return None;
                }
                forced += want.min(len).saturating_sub(edges);
                s = (s + len) % n0;
            }
            Some((forced, off))
        })
        .min()
        .map(|(_, off)| off)
        .ok_or_else(|| Error::InvalidFloorplan("no arc layout gives every workload an edge tile".into()))?;
    let mut arcs = Vec::with_capacity(w);
    let mut s = offset;
    for &len in b0 {
        arcs.push((s, len));
        s = (s + len) % n0;
    }

    // One lane each, extras by largest remainder of arc length, capped by
    // the number of edge tiles in the arc.
    let caps: Vec<usize> = arcs.iter().map(|&(s, len)| edge_count(s, len)).collect();
    let mut counts = vec![1usize; w];
    let mut extra = k - w;
    while extra > 0 {
        let placed: usize = counts.iter().sum();
        let best = (0..w)
            .filter(|&i| counts[i] < caps[i])
            .max_by(|&a, &b| {
                let want = |i: usize| arcs[i].1 as f64 * (placed + 1) as f64 / n0 as f64 - counts[i] as f64;
                want(a).total_cmp(&want(b)).then(b.cmp(&a))
            });
        match best {
            Some(i) => counts[i] += 1,
            None => break,
        }
        extra -= 1;
    }

    let mut angles = Vec::with_capacity(k);
    let mut owned = Vec::with_capacity(w);
    for (i, &(s, len)) in arcs.iter().enumerate() {
        let m = counts[i];
        let mut mine = Vec::with_capacity(m);
        for j in 0..m {
            let mut off = (2 * j + 1) * len / (2 * m);
            let free = |o: usize, angles: &Vec<usize>| {
                let t = (s + o) % n0;
                !corners.contains(&t) && !angles.contains(&t)
            };
            let mut tries = 0;
            while !free(off, &angles) && tries < len {
                off = (off + 1) % len;
                tries += 1;
            }
            mine.push(angles.len());
            angles.push((s + off) % n0);
        }
        owned.push(mine);
    }
    let floorplan = Floorplan::with_lanes(*fp.config(), angles)?;
    Ok(Sectors { floorplan, arcs, lanes: owned })
}

fn split_proportional(total: usize, sizes: &[usize]) -> Vec<usize> {
    let sum: usize = sizes.iter().sum();
    let exact: Vec<f64> = sizes.iter().map(|&s| total as f64 * s as f64 / sum.max(1) as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| exact[b].fract().total_cmp(&exact[a].fract()).then(a.cmp(&b)));
    let short = total - out.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        out[i] += 1;
    }
    out
}

/// Per-workload placements, before fast-Y.
pub fn place_concurrent(
    workloads: &[Circuit],
    sectors: &Sectors,
    quotas: &Quotas,
    weights: &PlacementWeights,
    policy: Policy,
    seed: u64,
) -> Result<Vec<Placement>> {
    weights.validate()?;
    let fp = &sectors.floorplan;
    let needed: usize = workloads.iter().map(Circuit::num_qubits).sum();
    if needed > fp.capacity() {
        return Err(Error::CapacityExceeded { needed, capacity: fp.capacity() });
    }
    match policy {
        Policy::Proposed => workloads
            .iter()
            .enumerate()
            .map(|(w, c)| {
                let lanes = &sectors.lanes[w];
                let region = sectors.region(w);
                let order = cost_order(&c.profiles(), weights);
                let b0 = quotas.b0[w].min(order.len());
                let ring0 = fill_order_with(fp, region.iter().copied().filter(|t| t.r == 0), Some(lanes));
                let outer = fill_order_with(fp, region.iter().copied().filter(|t| t.r > 0), Some(lanes));
                let rest = order.len() - b0.min(ring0.len());
                if rest > outer.len() + ring0.len().saturating_sub(b0) {
                    return Err(Error::CapacityExceeded { needed: order.len(), capacity: region.len() });
                }
                let mut tiles: Vec<RingTile> = ring0.iter().take(b0).copied().collect();
                tiles.extend(outer.iter().copied());
                tiles.extend(ring0.iter().skip(b0).copied());
                Ok(place_in_order(c.num_qubits(), &order, &tiles)?
                    .with_lanes(lanes.clone())
                    .with_region(region))
            })
            .collect(),
        Policy::Random | Policy::Naive => {
            let mut tiles: Vec<RingTile> = fp.tiles().collect();
            tiles.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let sizes: Vec<usize> = workloads.iter().map(Circuit::num_qubits).collect();
            let mut shares = split_proportional(fp.capacity(), &sizes);
            // Each pool must fit its workload; top up from the largest pools.
            for i in 0..shares.len() {
                while shares[i] < sizes[i] {
                    let donor = (0..shares.len())
                        .filter(|&j| shares[j] > sizes[j])
                        .max_by_key(|&j| shares[j] - sizes[j])
                        .expect("total capacity suffices");
                    shares[donor] -= 1;
                    shares[i] += 1;
                }
            }
            let mut start = 0;
            let mut out = Vec::with_capacity(workloads.len());
            for ((c, &share), lanes) in workloads.iter().zip(&shares).zip(&sectors.lanes) {
                let pool = &tiles[start..start + share];
                start += share;
                let region: BTreeSet<RingTile> = pool.iter().copied().collect();
                let p = if policy == Policy::Random {
                    let order: Vec<usize> = (0..c.num_qubits()).collect();
                    place_in_order(c.num_qubits(), &order, pool)?
                } else {
                    let order = cost_order(&c.profiles(), weights);
                    place_in_order(c.num_qubits(), &order, &fill_order_with(fp, pool.iter().copied(), Some(lanes)))?
                };
                // Lanes stay private under every policy; only tile choice differs.
                out.push(p.with_lanes(lanes.clone()).with_region(region));
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadRow {
    pub workload: usize,
    pub name: String,
    pub q: usize,
    pub b0: usize,
    pub by: usize,
    pub t_alone: u64,
    pub t_conc: u64,
    pub slowdown: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiReport {
    pub policy: Policy,
    pub rows: Vec<WorkloadRow>,
    pub mean_slowdown: f64,
    pub efficiency: f64,
    pub jain: f64,
}

/// `(Σx)² / (W·Σx²)`.
pub fn jain(xs: &[f64]) -> f64 {
    let s: f64 = xs.iter().sum();
    let s2: f64 = xs.iter().map(|x| x * x).sum();
    s * s / (xs.len() as f64 * s2)
}

/// `Σ T_alone / (W · max T_conc)`.
pub fn efficiency(t_alone: &[u64], t_conc: &[u64]) -> f64 {
    let max = *t_conc.iter().max().expect("non-empty") as f64;
    t_alone.iter().sum::<u64>() as f64 / (t_alone.len() as f64 * max)
}

pub fn mean_slowdown(slowdowns: &[f64]) -> f64 {
    slowdowns.iter().sum::<f64>() / slowdowns.len() as f64
}

/// Everything one concurrent run needs, computed once and shared across
/// policies.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPlan {
    pub pressures: Vec<WorkloadPressures>,
    pub quotas: Quotas,
    pub sectors: Sectors,
    /// Each workload alone on the sectored floorplan.
    pub t_alone: Vec<u64>,
}

pub fn plan(
    workloads: &[Circuit],
    fp: &Floorplan,
    cfg: &MultiConfig,
    weights: &PlacementWeights,
    model: &LatencyModel,
) -> Result<MultiPlan> {
    if workloads.is_empty() {
        return Err(Error::InvalidParams("at least one workload is required".into()));
    }
    if fp.lanes().len() < workloads.len() {
        return Err(Error::NotEnoughLanes { workloads: workloads.len(), lanes: fp.lanes().len() });
    }
    let pressures = workloads.iter().map(|c| pressures(c, fp, weights)).collect::<Result<Vec<_>>>()?;
    let quotas = budgets(&pressures, fp, cfg)?;
    let demand: Vec<usize> = workloads.iter().map(Circuit::num_qubits).collect();
    let sectors = plan_sectors(&quotas.b0, &demand, fp)?;
    let cap = cfg.fast_y_cap(fp);
    let t_alone = workloads
        .iter()
        .map(|c| {
            let p = greedy_place(c, &sectors.floorplan, weights)?;
            let p = optimize(c, &p, &sectors.floorplan, model, weights, Some(cap))?.placement;
            Ok(simulate(c, &p, &sectors.floorplan, model)?.t_total)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MultiPlan { pressures, quotas, sectors, t_alone })
}

/// Concurrent placements after per-workload fast-Y, one per workload.
pub fn concurrent_placements(
    workloads: &[Circuit],
    plan: &MultiPlan,
    weights: &PlacementWeights,
    model: &LatencyModel,
    policy: Policy,
    seed: u64,
) -> Result<Vec<Placement>> {
    let fp = &plan.sectors.floorplan;
    let base = place_concurrent(workloads, &plan.sectors, &plan.quotas, weights, policy, seed)?;
    let mut out: Vec<Placement> = Vec::with_capacity(base.len());
    for (w, (c, p)) in workloads.iter().zip(base).enumerate() {
        // Tiles other workloads already hold, including their fast-Y partners.
        let taken: BTreeSet<RingTile> = out.iter().flat_map(|o| o.occupied().map(|(t, _)| t)).collect();
        let region: BTreeSet<RingTile> =
            p.region().expect("concurrent placements carry a region").difference(&taken).copied().collect();
        let p = p.with_region(region);
        out.push(optimize(c, &p, fp, model, weights, Some(plan.quotas.by[w]))?.placement);
    }
    Ok(out)
}

pub fn report(
    workloads: &[Circuit],
    plan: &MultiPlan,
    weights: &PlacementWeights,
    model: &LatencyModel,
    policy: Policy,
    seed: u64,
) -> Result<MultiReport> {
    let fp = &plan.sectors.floorplan;
    let placements = concurrent_placements(workloads, plan, weights, model, policy, seed)?;
    let mut rows = Vec::with_capacity(workloads.len());
    for (w, (c, p)) in workloads.iter().zip(&placements).enumerate() {
        let t_conc = simulate(c, p, fp, model)?.t_total;
        let t_alone = plan.t_alone[w];
        rows.push(WorkloadRow {
            workload: w,
            name: c.name().to_string(),
            q: c.num_qubits(),
            b0: plan.quotas.b0[w],
            by: plan.quotas.by[w],
            t_alone,
            t_conc,
            slowdown: t_conc as f64 / t_alone as f64,
        });
    }
    let sd: Vec<f64> = rows.iter().map(|r| r.slowdown).collect();
    let rates: Vec<f64> = sd.iter().map(|s| 1.0 / s).collect();
    let alone: Vec<u64> = rows.iter().map(|r| r.t_alone).collect();
    let conc: Vec<u64> = rows.iter().map(|r| r.t_conc).collect();
    Ok(MultiReport {
        policy,
        mean_slowdown: mean_slowdown(&sd),
        efficiency: efficiency(&alone, &conc),
        jain: jain(&rates),
        rows,
    })
}

pub fn simulate_concurrent(
    workloads: &[Circuit],
    fp: &Floorplan,
    cfg: &MultiConfig,
    weights: &PlacementWeights,
    model: &LatencyModel,
    policy: Policy,
    seed: u64,
) -> Result<MultiReport> {
    let plan = plan(workloads, fp, cfg, weights, model)?;
    report(workloads, &plan, weights, model, policy, seed)
}
