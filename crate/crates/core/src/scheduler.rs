//! Layer-by-layer latency model.
//!
//! A layer costs its movement time plus its measurement time. Ring-0 qubits
//! measure in place. Outer qubits hop radially and shift tangentially to
//! their lane, and entrants sharing a lane are serialized one beat apart.
//! Measurement time is that of the slowest basis in the layer. The factory
//! startup is charged once per run.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Pauli, Rotation, TLayer};
use crate::floorplan::{Floorplan, RingTile};
use crate::placement::Placement;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MovementMode {
    /// Positions never change; every activation pays `r + d_θ`.
    #[default]
    Stateless,
    /// On first activation an outer qubit moves to the innermost free tile
    /// and stays there.
    PromoteInward,
}

impl std::str::FromStr for MovementMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stateless" => Ok(MovementMode::Stateless),
            "promote_inward" | "promote-inward" => Ok(MovementMode::PromoteInward),
            _ => Err(Error::InvalidParams(format!("unknown movement mode {s:?}"))),
        }
    }
}

/// All times in code beats `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatencyModel {
    pub t_xz_edge: u64,
    pub t_y_edge: u64,
    pub t_xz_corner: u64,
    pub t_y_corner: u64,
    pub t_y_fast: u64,
    /// Adds one beat to both corner costs.
    pub worst_case_corner: bool,
    pub tau_msf: u64,
    pub movement_mode: MovementMode,
    pub lane_pipelining: bool,
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel {
            t_xz_edge: 1,
            t_y_edge: 5,
            t_xz_corner: 3,
            t_y_corner: 7,
            t_y_fast: 1,
            worst_case_corner: false,
            tau_msf: 11,
            movement_mode: MovementMode::Stateless,
            lane_pipelining: true,
        }
    }
}

impl LatencyModel {
    pub fn validate(&self) -> Result<()> {
        let all = [self.t_xz_edge, self.t_y_edge, self.t_xz_corner, self.t_y_corner, self.t_y_fast];
        if all.contains(&0) {
            return Err(Error::InvalidParams("measurement latencies must be positive".into()));
        }
        Ok(())
    }

    /// Cost of measuring `pauli` on a qubit at `tile`.
    pub fn basis_cost(&self, pauli: Pauli, tile: RingTile, corner: bool, promoted: bool) -> u64 {
        let y = pauli == Pauli::Y;
        if promoted {
            return if y { self.t_y_fast } else { self.t_xz_edge };
        }
        if tile.r == 0 && corner {
            let extra = u64::from(self.worst_case_corner);
            return extra + if y { self.t_y_corner } else { self.t_xz_corner };
        }
        if y {
            self.t_y_edge
        } else {
            self.t_xz_edge
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerTrace {
    pub j: usize,
    pub t_move: u64,
    pub t_meas: u64,
    /// The layer overflowed the CR and ran as several sub-layers.
    pub cr_batched: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relocation {
    pub layer: usize,
    pub qubit: usize,
    pub from: RingTile,
    pub to: RingTile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub layers: Vec<LayerTrace>,
    pub tau_msf: u64,
    pub t_total: u64,
    pub n_t: usize,
    pub relocations: Vec<Relocation>,
}

impl ExecutionTrace {
    pub fn sum_move(&self) -> u64 {
        self.layers.iter().map(|l| l.t_move).sum()
    }

    pub fn sum_meas(&self) -> u64 {
        self.layers.iter().map(|l| l.t_meas).sum()
    }

    pub fn cr_batched_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.cr_batched).count()
    }
}

/// `r + d_θ` for outer qubits, zero on ring 0.
pub fn qubit_move(q: usize, placement: &Placement, fp: &Floorplan) -> Result<u64> {
    let t = placement.tile_of(q)?;
    Ok(tile_move(t, placement, fp))
}

fn tile_move(t: RingTile, placement: &Placement, fp: &Floorplan) -> u64 {
    if t.r == 0 {
        0
    } else {
        (t.r + placement.lane_for(t, fp).1) as u64
    }
}

/// Lane-wise aggregation of the moves of the outer qubits among `active`.
pub fn layer_move(
    active: impl IntoIterator<Item = usize>,
    placement: &Placement,
    fp: &Floorplan,
    model: &LatencyModel,
) -> Result<u64> {
    let mut lanes: BTreeMap<usize, (u64, u64, u64)> = BTreeMap::new();
    for q in active {
        let t = placement.tile_of(q)?;
        if t.r == 0 {
            continue;
        }
        let (lane, d) = placement.lane_for(t, fp);
        let m = (t.r + d) as u64;
        let e = lanes.entry(lane).or_insert((0, 0, 0));
        e.0 = e.0.max(m);
        e.1 += m;
        e.2 += 1;
    }
    Ok(lanes
        .values()
        .map(|&(max, sum, k)| if model.lane_pipelining { max + k - 1 } else { sum })
        .max()
        .unwrap_or(0))
}

/// Slowest basis over the given rotations.
pub fn layer_meas<'a>(
    rotations: impl IntoIterator<Item = &'a Rotation>,
    placement: &Placement,
    fp: &Floorplan,
    model: &LatencyModel,
) -> Result<u64> {
    let mut worst = 0;
    for rot in rotations {
        for (q, pauli) in rot.product.iter() {
            let t = placement.tile_of(q)?;
            let cost = model.basis_cost(pauli, t, fp.is_corner(t), placement.is_promoted(q));
            worst = worst.max(cost);
        }
    }
    Ok(worst)
}

/// Splits a layer into in-order first-fit groups that each fit the CR.
fn cr_batches(layer: &TLayer, capacity: usize) -> Result<Vec<Vec<&Rotation>>> {
    let mut batches: Vec<(usize, Vec<&Rotation>)> = Vec::new();
    for rot in layer.rotations() {
        let w = rot.product.weight();
        if w > capacity {
            return Err(Error::CrCapacity { arity: w, capacity });
        }
        match batches.iter_mut().find(|(used, _)| used + w <= capacity) {
            Some((used, group)) => {
                *used += w;
                group.push(rot);
            }
            None => batches.push((w, vec![rot])),
        }
    }
    Ok(batches.into_iter().map(|(_, g)| g).collect())
}

/// Prices one layer at the current positions.
pub fn layer_cost(
    j: usize,
    layer: &TLayer,
    placement: &Placement,
    fp: &Floorplan,
    model: &LatencyModel,
) -> Result<LayerTrace> {
    let cap = fp.cr_capacity();
    if layer.active_count() <= cap {
        let t_move = layer_move(layer.active_qubits(), placement, fp, model)?;
        let t_meas = layer_meas(layer.rotations(), placement, fp, model)?;
        return Ok(LayerTrace { j, t_move, t_meas, cr_batched: false });
    }
    let mut out = LayerTrace { j, t_move: 0, t_meas: 0, cr_batched: true };
    for group in cr_batches(layer, cap)? {
        let active = group.iter().flat_map(|r| r.product.qubits());
        out.t_move += layer_move(active, placement, fp, model)?;
        out.t_meas += layer_meas(group.iter().copied(), placement, fp, model)?;
    }
    Ok(out)
}

/// Innermost free tile strictly inside ring `t.r`, preferring edges, then
/// lane proximity, then angle.
fn inward_target(t: RingTile, placement: &Placement, fp: &Floorplan) -> Option<RingTile> {
    (0..t.r).find_map(|r| {
        (0..fp.ring_size(r))
            .map(|theta| RingTile::new(r, theta))
            .filter(|&c| placement.is_free(fp, c))
            .min_by_key(|&c| (fp.is_corner(c), placement.lane_for(c, fp).1, c.theta))
    })
}

pub fn simulate(
    circuit: &Circuit,
    placement: &Placement,
    fp: &Floorplan,
    model: &LatencyModel,
) -> Result<ExecutionTrace> {
    model.validate()?;
    if placement.num_qubits() < circuit.num_qubits() {
        return Err(Error::Unplaced(placement.num_qubits()));
    }
    for q in 0..circuit.num_qubits() {
        placement.tile_of(q)?;
    }
    let mut current = placement.clone();
    let mut seen = BTreeSet::new();
    let mut layers = Vec::with_capacity(circuit.num_layers());
    let mut relocations = Vec::new();
    for (j, layer) in circuit.layers().iter().enumerate() {
        layers.push(layer_cost(j, layer, &current, fp, model)?);
        if model.movement_mode == MovementMode::PromoteInward {
            let mut fresh: Vec<usize> = layer.active_qubits().filter(|q| seen.insert(*q)).collect();
            fresh.sort_unstable();
            for q in fresh {
                let from = current.tile_of(q)?;
                if from.r == 0 {
                    continue;
                }
                if let Some(to) = inward_target(from, &current, fp) {
                    current.relocate(q, to)?;
                    relocations.push(Relocation { layer: j, qubit: q, from, to });
                }
            }
        }
    }
    let body: u64 = layers.iter().map(|l| l.t_move + l.t_meas).sum();
    Ok(ExecutionTrace {
        layers,
        tau_msf: model.tau_msf,
        t_total: body + model.tau_msf,
        n_t: circuit.totals().0,
        relocations,
    })
}

/// `T_total / N_T`; absent for circuits without non-Clifford work.
pub fn cpi_t(trace: &ExecutionTrace) -> Option<f64> {
    (trace.n_t > 0).then(|| trace.t_total as f64 / trace.n_t as f64)
}

/// `1 + ΣT_move / ΣT_meas`; absent when nothing is measured.
pub fn rho_route(trace: &ExecutionTrace) -> Option<f64> {
    let meas = trace.sum_meas();
    (meas > 0).then(|| 1.0 + trace.sum_move() as f64 / meas as f64)
}

/// Seconds, at 10 µs per beat for distance 11 and linear in `d`.
pub fn wallclock(trace: &ExecutionTrace, d: usize) -> Result<f64> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("code distance {d} must be odd and at least 3")));
    }
    Ok(trace.t_total as f64 * 10e-6 * d as f64 / 11.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{PauliProduct, Sign};
    use crate::floorplan::FloorplanConfig;

    fn fp(n: usize, l: usize) -> Floorplan {
        Floorplan::build(FloorplanConfig::new(n, l)).unwrap()
    }

    fn rot(ps: &[(usize, Pauli)]) -> Rotation {
        Rotation::eighth(PauliProduct::new(ps.iter().copied()).unwrap(), Sign::Plus)
    }

    fn circuit(q: usize, layers: Vec<Vec<Rotation>>) -> Circuit {
        let ls = layers.into_iter().enumerate().map(|(j, r)| TLayer::new(r, j).unwrap()).collect();
        Circuit::new("t", q, ls, None).unwrap()
    }

    fn placed(tiles: &[RingTile]) -> Placement {
        let mut p = Placement::new(tiles.len());
        for (q, &t) in tiles.iter().enumerate() {
            p.assign(q, t).unwrap();
        }
        p
    }

    #[test]
    fn latency_constants() {
        let m = LatencyModel::default();
        assert_eq!(
            (m.t_xz_edge, m.t_y_edge, m.t_xz_corner, m.t_y_corner, m.t_y_fast, m.tau_msf),
            (1, 5, 3, 7, 1, 11)
        );
        assert!(!m.worst_case_corner && m.lane_pipelining);
        assert_eq!(m.movement_mode, MovementMode::Stateless);
        let worst = LatencyModel { worst_case_corner: true, ..m };
        let c = RingTile::new(0, 0);
        assert_eq!(worst.basis_cost(Pauli::X, c, true, false), 4);
        assert_eq!(worst.basis_cost(Pauli::Y, c, true, false), 8);
        assert_eq!(m.basis_cost(Pauli::Y, RingTile::new(0, 1), false, true), 1);
        assert_eq!(m.basis_cost(Pauli::Y, RingTile::new(2, 0), true, false), 5);
    }

    #[test]
    fn qubit_moves() {
        let f = fp(8, 2);
        let mut p = placed(&[RingTile::new(0, 3), RingTile::new(2, 0)]);
        assert_eq!(qubit_move(0, &p, &f).unwrap(), 0);
        // Ring 2 has 44 tiles; lane 0 projects to 2, so θ = 0 is 2 steps away.
        assert_eq!(f.lane_angle(0, 2), 2);
        assert_eq!(qubit_move(1, &p, &f).unwrap(), 4);
        p.relocate(1, RingTile::new(2, 5)).unwrap();
        assert_eq!(qubit_move(1, &p, &f).unwrap(), 5);
        assert!(matches!(qubit_move(2, &p, &f), Err(Error::Unplaced(2))));
    }

    #[test]
    fn lane_aggregation() {
        let f = fp(8, 2);
        let m = LatencyModel::default();
        // Same lane: moves 5 (r=2, d=3) and 3 (r=1, d=2).
        let p = placed(&[RingTile::new(2, 5), RingTile::new(1, 3), RingTile::new(1, 34), RingTile::new(0, 4)]);
        assert_eq!(qubit_move(0, &p, &f).unwrap(), 5);
        assert_eq!(qubit_move(1, &p, &f).unwrap(), 3);
        assert_eq!(layer_move([0, 1], &p, &f, &m).unwrap(), 6);
        let serial = LatencyModel { lane_pipelining: false, ..m };
        assert_eq!(layer_move([0, 1], &p, &f, &serial).unwrap(), 8);
        // θ = 34 on ring 1 wraps around to lane 0 (projected to θ = 1).
        assert_eq!(p.lane_of(2, &f).unwrap(), (0, 3));
        let q = placed(&[RingTile::new(2, 5), RingTile::new(1, 10)]);
        assert_eq!(q.lane_of(1, &f).unwrap(), (1, 2));
        assert_eq!(layer_move([0, 1], &q, &f, &m).unwrap(), 5);
        assert_eq!(layer_move([3], &p, &f, &m).unwrap(), 0);
    }

    #[test]
    fn measurement_examples() {
        let f = fp(8, 0);
        let m = LatencyModel::default();
        let mut p = placed(&[RingTile::new(0, 1), RingTile::new(0, 3)]);
        assert_eq!(layer_meas(&[rot(&[(0, Pauli::Z)])], &p, &f, &m).unwrap(), 1);
        assert_eq!(layer_meas(&[rot(&[(0, Pauli::X), (1, Pauli::Y)])], &p, &f, &m).unwrap(), 5);
        p.promote(1, RingTile::new(0, 2)).unwrap();
        assert_eq!(layer_meas(&[rot(&[(1, Pauli::Y)])], &p, &f, &m).unwrap(), 1);
        let c = placed(&[RingTile::new(0, 0)]);
        assert_eq!(layer_meas(&[rot(&[(0, Pauli::Z)])], &c, &f, &m).unwrap(), 3);
        assert_eq!(layer_meas(&[rot(&[(0, Pauli::Y)])], &c, &f, &m).unwrap(), 7);
    }

    #[test]
    fn simulate_examples() {
        let f = fp(8, 0);
        let m = LatencyModel::default();
        let empty = circuit(1, vec![]);
        let p = placed(&[RingTile::new(0, 1)]);
        let tr = simulate(&empty, &p, &f, &m).unwrap();
        assert_eq!(tr.t_total, 11);
        assert_eq!(cpi_t(&tr), None);
        assert_eq!(rho_route(&tr), None);
        let one = circuit(1, vec![vec![rot(&[(0, Pauli::Z)])]]);
        let tr = simulate(&one, &p, &f, &m).unwrap();
        assert_eq!(tr.t_total, 12);
        assert_eq!(rho_route(&tr), Some(1.0));
        assert_eq!(cpi_t(&tr), Some(12.0));
    }

    #[test]
    fn ring0_no_y_amortizes() {
        let f = fp(8, 0);
        let m = LatencyModel::default();
        let p = placed(&[RingTile::new(0, 1), RingTile::new(0, 2)]);
        for j in [1usize, 10, 100, 1000] {
            let layers = (0..j).map(|i| vec![rot(&[(i % 2, if i % 3 == 0 { Pauli::X } else { Pauli::Z })])]).collect();
            let tr = simulate(&circuit(2, layers), &p, &f, &m).unwrap();
            assert_eq!(tr.t_total, j as u64 + 11);
            assert_eq!(cpi_t(&tr), Some((j as f64 + 11.0) / j as f64));
        }
    }

    #[test]
    fn metric_arithmetic() {
        let mk = |moves: u64, meas: u64, total: u64, n_t: usize| ExecutionTrace {
            layers: vec![LayerTrace { j: 0, t_move: moves, t_meas: meas, cr_batched: false }],
            tau_msf: 11,
            t_total: total,
            n_t,
            relocations: vec![],
        };
        assert_eq!(cpi_t(&mk(0, 289, 300, 100)), Some(3.0));
        assert_eq!(rho_route(&mk(50, 200, 261, 1)), Some(1.25));
        let tr = mk(0, 989, 1000, 1);
        assert!((wallclock(&tr, 11).unwrap() - 0.01).abs() < 1e-15);
        assert!((wallclock(&tr, 33).unwrap() - 3.0 * wallclock(&tr, 11).unwrap()).abs() < 1e-12);
        assert_eq!(wallclock(&mk(0, 0, 0, 0), 11).unwrap(), 0.0);
        assert!(wallclock(&tr, 10).is_err());
        assert!(wallclock(&tr, 1).is_err());
    }

    #[test]
    fn cr_overflow_is_batched() {
        // n = 6 gives a 4-slot CR.
        let f = Floorplan::build(FloorplanConfig::new(6, 0).with_lanes(1)).unwrap();
        let m = LatencyModel::default();
        let tiles: Vec<_> = [1, 2, 3, 4, 6, 7].iter().map(|&t| RingTile::new(0, t)).collect();
        let p = placed(&tiles);
        let wide = circuit(6, vec![vec![rot(&[(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::Z)]), rot(&[(3, Pauli::Y), (4, Pauli::Z)]), rot(&[(5, Pauli::X)])]]);
        let tr = simulate(&wide, &p, &f, &m).unwrap();
        // Groups: {3 + 1 qubits} then {2 qubits}: 1t + 5t.
        assert!(tr.layers[0].cr_batched);
        assert_eq!(tr.layers[0].t_meas, 6);
        let too_wide = circuit(6, vec![vec![rot(&[(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::Z), (3, Pauli::Z), (4, Pauli::Z)])]]);
        assert!(matches!(simulate(&too_wide, &p, &f, &m), Err(Error::CrCapacity { arity: 5, capacity: 4 })));
    }

    #[test]
    fn promote_inward_moves_once() {
        let f = fp(8, 1);
        let m = LatencyModel { movement_mode: MovementMode::PromoteInward, ..LatencyModel::default() };
        let p = placed(&[RingTile::new(1, 12), RingTile::new(0, 1)]);
        let c = circuit(2, vec![vec![rot(&[(0, Pauli::Z)])]; 5]);
        let tr = simulate(&c, &p, &f, &m).unwrap();
        assert_eq!(tr.relocations.len(), 1);
        let moved = tr.relocations[0];
        assert_eq!((moved.layer, moved.qubit, moved.to.r), (0, 0, 0));
        assert!(tr.layers[0].t_move > 0);
        assert!(tr.layers[1..].iter().all(|l| l.t_move == 0));
        let stateless = simulate(&c, &p, &f, &LatencyModel::default()).unwrap();
        assert!(stateless.layers.iter().all(|l| l.t_move == tr.layers[0].t_move));
        assert!(stateless.relocations.is_empty());
    }

    #[test]
    fn unplaced_qubits_rejected() {
        let f = fp(8, 0);
        let c = circuit(2, vec![vec![rot(&[(0, Pauli::Z)])]]);
        let p = placed(&[RingTile::new(0, 1)]);
        assert!(matches!(simulate(&c, &p, &f, &LatencyModel::default()), Err(Error::Unplaced(_))));
    }
}
