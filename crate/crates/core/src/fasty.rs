//! Two-tile fast-Y promotion.
//!
//! A ring-0 qubit that owns two adjacent edge tiles exposes both its X and
//! Z boundaries to the ancilla ring and measures Y in one beat. The second
//! tile is taken from a neighbour, which is evicted to an outer ring and
//! then pays radial movement on each of its activations.
//!
//! Candidates are tried in descending speedup `Δ`. The cheapest neighbour
//! by eviction penalty `I` (then placement cost) is chosen, and the
//! promotion goes ahead when `G = Δ − I > 0` and repricing the affected
//! layers shows the modeled runtime does not grow.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, QubitProfile};
use crate::floorplan::{Floorplan, RingTile};
use crate::placement::{cost, Placement, PlacementWeights};
use crate::scheduler::{layer_cost, LatencyModel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FastYModel {
    pub t_y_slow_edge: u64,
    pub t_y_slow_corner: u64,
    pub t_y_fast: u64,
}

impl Default for FastYModel {
    fn default() -> Self {
        FastYModel { t_y_slow_edge: 5, t_y_slow_corner: 7, t_y_fast: 1 }
    }
}

impl From<&LatencyModel> for FastYModel {
    fn from(m: &LatencyModel) -> Self {
        FastYModel { t_y_slow_edge: m.t_y_edge, t_y_slow_corner: m.t_y_corner, t_y_fast: m.t_y_fast }
    }
}

/// `Y(q) · (t_Y^slow − t_Y^fast)` at the qubit's ring-0 tile.
pub fn delta(profile: &QubitProfile, tile: RingTile, fp: &Floorplan, m: &FastYModel) -> Result<i64> {
    if tile.r != 0 || !fp.contains(tile) {
        return Err(Error::InvalidCoord(format!("({}, {}) is not a ring-0 tile", tile.r, tile.theta)));
    }
    let slow = if fp.is_corner(tile) { m.t_y_slow_corner } else { m.t_y_slow_edge };
    Ok(profile.y_total as i64 * (slow as i64 - m.t_y_fast as i64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Eviction {
    /// `ν · Δr` in beats.
    pub penalty: u64,
    pub destination: RingTile,
    pub delta_r: usize,
}

/// Where `q` would go if evicted from ring 0, and what that costs.
pub fn eviction_penalty(
    q: usize,
    profile: &QubitProfile,
    placement: &Placement,
    fp: &Floorplan,
) -> Result<Eviction> {
    let from = placement.tile_of(q)?;
    if from.r != 0 {
        return Err(Error::InvalidCoord(format!("qubit {q} is not on ring 0")));
    }
    let (lane, _) = placement.lane_for(from, fp);
    for r in 1..fp.num_rings() {
        let target = fp.lane_angle(lane, r);
        let best = (0..fp.ring_size(r))
            .map(|theta| RingTile::new(r, theta))
            .filter(|&t| placement.is_free(fp, t))
            .min_by_key(|t| (fp.ring_dist(r, t.theta, target).expect("valid angle"), t.theta));
        if let Some(destination) = best {
            return Ok(Eviction { penalty: (profile.nu * r) as u64, destination, delta_r: r });
        }
    }
    Err(Error::FloorplanFull)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromotionRecord {
    pub qubit: usize,
    /// The displaced neighbour; `None` when the partner tile was free.
    pub evicted: Option<usize>,
    pub partner: RingTile,
    pub destination: Option<RingTile>,
    pub delta: i64,
    pub penalty: u64,
    pub gain: i64,
    /// Runtime saved over the repriced layers.
    pub modeled_saving: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FastYOutcome {
    pub placement: Placement,
    pub log: Vec<PromotionRecord>,
}

struct Choice {
    partner: RingTile,
    evicted: Option<(usize, Eviction)>,
    penalty: u64,
}

fn neighbour_options(
    q: usize,
    placement: &Placement,
    fp: &Floorplan,
    profiles: &[QubitProfile],
) -> Vec<Choice> {
    let t = placement.tile(q).expect("candidate is placed");
    let n0 = fp.ring0_tiles();
    let mut thetas = vec![(t.theta + n0 - 1) % n0, (t.theta + 1) % n0];
    thetas.sort_unstable();
    thetas.dedup();
    let mut out = Vec::new();
    for theta in thetas {
        let nb = RingTile::new(0, theta);
        if !fp.ring0_adjacent(t.theta, theta) || fp.is_corner(nb) || !placement.in_region(nb) {
            continue;
        }
        match placement.occupant(nb) {
            None => out.push(Choice { partner: nb, evicted: None, penalty: 0 }),
            Some(o) if placement.tile(o) == Some(nb) && !placement.is_promoted(o) => {
                if let Ok(ev) = eviction_penalty(o, &profiles[o], placement, fp) {
                    out.push(Choice { partner: nb, evicted: Some((o, ev)), penalty: ev.penalty });
                }
            }
            Some(_) => {}
        }
    }
    out
}

fn repriced(
    circuit: &Circuit,
    layers: &BTreeSet<usize>,
    placement: &Placement,
    fp: &Floorplan,
    model: &LatencyModel,
) -> Result<u64> {
    let mut total = 0;
    for &j in layers {
        let l = layer_cost(j, &circuit.layers()[j], placement, fp, model)?;
        total += l.t_move + l.t_meas;
    }
    Ok(total)
}

/// Greedy promotion pass. `budget` caps the number of promotions.
pub fn optimize(
    circuit: &Circuit,
    placement: &Placement,
    fp: &Floorplan,
    model: &LatencyModel,
    weights: &PlacementWeights,
    budget: Option<usize>,
) -> Result<FastYOutcome> {
    model.validate()?;
    let fym = FastYModel::from(model);
    let profiles = circuit.profiles();
    let activity = circuit.activity();
    let mut current = placement.clone();
    let mut log = Vec::new();

    let mut candidates: Vec<(i64, usize)> = Vec::new();
    for (q, profile) in profiles.iter().enumerate() {
        let t = current.tile_of(q)?;
        if t.r == 0 && !fp.is_corner(t) && !current.is_promoted(q) {
            candidates.push((delta(profile, t, fp, &fym)?, q));
        }
    }
    candidates.sort_by_key(|&(d, q)| (std::cmp::Reverse(d), q));

    for (d, q) in candidates {
        if budget.is_some_and(|b| log.len() >= b) || d <= 0 {
            break;
        }
        let t = current.tile_of(q)?;
        if t.r != 0 || current.is_promoted(q) {
            continue;
        }
        let options = neighbour_options(q, &current, fp, &profiles);
        let Some(choice) = options.into_iter().min_by(|a, b| {
            let key = |o: &Choice| {
                let c = o.evicted.map_or(0.0, |(e, _)| cost(&profiles[e], weights));
                (o.penalty, o.evicted.is_some(), c, o.partner.theta)
            };
            let (ka, kb) = (key(a), key(b));
            (ka.0, ka.1).cmp(&(kb.0, kb.1)).then(ka.2.total_cmp(&kb.2)).then(ka.3.cmp(&kb.3))
        }) else {
            continue;
        };
        let gain = d - choice.penalty as i64;
        if gain <= 0 {
            continue;
        }
        let mut affected: BTreeSet<usize> = activity[q].iter().copied().collect();
        if let Some((e, _)) = choice.evicted {
            affected.extend(activity[e].iter().copied());
        }
        let before = repriced(circuit, &affected, &current, fp, model)?;
        let mut trial = current.clone();
        if let Some((e, ev)) = choice.evicted {
            trial.relocate(e, ev.destination)?;
        }
        trial.promote(q, choice.partner)?;
        let after = repriced(circuit, &affected, &trial, fp, model)?;
        if after > before {
            continue;
        }
        current = trial;
        log.push(PromotionRecord {
            qubit: q,
            evicted: choice.evicted.map(|(e, _)| e),
            partner: choice.partner,
            destination: choice.evicted.map(|(_, ev)| ev.destination),
            delta: d,
            penalty: choice.penalty,
            gain,
            modeled_saving: before - after,
        });
    }
    Ok(FastYOutcome { placement: current, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, DensityClass, Pauli, PauliProduct, Rotation, Sign, SynthParams, TLayer};
    use crate::floorplan::FloorplanConfig;
    use crate::placement::greedy_place;
    use crate::scheduler::simulate;
    use proptest::prelude::*;

    fn fp(n: usize, l: usize) -> Floorplan {
        Floorplan::build(FloorplanConfig::new(n, l)).unwrap()
    }

    fn rot(ps: &[(usize, Pauli)]) -> Rotation {
        Rotation::eighth(PauliProduct::new(ps.iter().copied()).unwrap(), Sign::Plus)
    }

    fn circuit(q: usize, layers: Vec<Vec<Rotation>>) -> Circuit {
        let ls = layers.into_iter().enumerate().map(|(j, r)| TLayer::new(r, j).unwrap()).collect();
        Circuit::new("f", q, ls, None).unwrap()
    }

    fn placed(tiles: &[RingTile]) -> Placement {
        let mut p = Placement::new(tiles.len());
        for (q, &t) in tiles.iter().enumerate() {
            p.assign(q, t).unwrap();
        }
        p
    }

    #[test]
    fn delta_examples() {
        let f = fp(8, 0);
        let m = FastYModel::default();
        let p3 = QubitProfile { y_total: 3, ..Default::default() };
        assert_eq!(delta(&p3, RingTile::new(0, 1), &f, &m).unwrap(), 12);
        assert_eq!(delta(&QubitProfile::default(), RingTile::new(0, 1), &f, &m).unwrap(), 0);
        let p1 = QubitProfile { y_total: 1, ..Default::default() };
        assert_eq!(delta(&p1, RingTile::new(0, 7), &f, &m).unwrap(), 6);
        assert!(delta(&p1, RingTile::new(1, 0), &fp(8, 1), &m).is_err());
    }

    #[test]
    fn eviction_examples() {
        let f = fp(8, 2);
        let mut p = placed(&[RingTile::new(0, 1)]);
        let nu10 = QubitProfile { nu: 10, ..Default::default() };
        let ev = eviction_penalty(0, &nu10, &p, &f).unwrap();
        assert_eq!((ev.penalty, ev.delta_r), (10, 1));
        assert_eq!(ev.destination, RingTile::new(1, f.lane_angle(0, 1)));
        let idle = QubitProfile::default();
        assert_eq!(eviction_penalty(0, &idle, &p, &f).unwrap().penalty, 0);
        // Fill ring 1 to force ring 2.
        let mut full = Placement::new(1 + f.ring_size(1));
        full.assign(0, RingTile::new(0, 1)).unwrap();
        for theta in 0..f.ring_size(1) {
            full.assign(theta + 1, RingTile::new(1, theta)).unwrap();
        }
        let nu4 = QubitProfile { nu: 4, ..Default::default() };
        assert_eq!(eviction_penalty(0, &nu4, &full, &f).unwrap().penalty, 8);
        p = placed(&[RingTile::new(0, 1)]);
        assert!(matches!(eviction_penalty(0, &nu4, &p, &fp(8, 0)), Err(Error::FloorplanFull)));
    }

    #[test]
    fn single_promotion_turns_five_into_one() {
        let f = fp(8, 1);
        let m = LatencyModel::default();
        let c = circuit(2, vec![vec![rot(&[(0, Pauli::Y)])], vec![rot(&[(1, Pauli::Z)])]]);
        let p = placed(&[RingTile::new(0, 1), RingTile::new(0, 2)]);
        let before = simulate(&c, &p, &f, &m).unwrap();
        assert_eq!(before.layers[0].t_meas, 5);
        let out = optimize(&c, &p, &f, &m, &PlacementWeights::default(), None).unwrap();
        assert_eq!(out.log.len(), 1);
        let rec = &out.log[0];
        assert!(rec.gain > 0);
        assert_eq!(rec.qubit, 0);
        let after = simulate(&c, &out.placement, &f, &m).unwrap();
        assert_eq!(after.layers[0].t_meas, 1);
        assert_eq!(out.placement.tiles_used(), 3);
        assert!(after.t_total <= before.t_total);
    }

    #[test]
    fn free_neighbour_costs_nothing() {
        let f = fp(8, 1);
        let c = circuit(2, vec![vec![rot(&[(0, Pauli::Y)])], vec![rot(&[(1, Pauli::Y)])]]);
        let p = placed(&[RingTile::new(0, 3), RingTile::new(0, 4)]);
        let out = optimize(&c, &p, &f, &LatencyModel::default(), &PlacementWeights::default(), None).unwrap();
        assert_eq!(out.log.len(), 2);
        assert_eq!((out.log[0].evicted, out.log[0].partner, out.log[0].penalty), (None, RingTile::new(0, 2), 0));
        assert_eq!((out.log[1].evicted, out.log[1].partner), (None, RingTile::new(0, 5)));
    }

    #[test]
    fn no_y_means_no_change() {
        let f = fp(8, 1);
        let c = generate(&SynthParams::new(20, 20, DensityClass::High, 4)).unwrap();
        let no_y_layers = c
            .layers()
            .iter()
            .map(|l| {
                l.rotations()
                    .iter()
                    .map(|r| {
                        let ps = r.product.iter().map(|(q, p)| (q, if p == Pauli::Y { Pauli::Z } else { p }));
                        Rotation::eighth(PauliProduct::new(ps).unwrap(), r.sign)
                    })
                    .collect()
            })
            .collect();
        let c = circuit(20, no_y_layers);
        let w = PlacementWeights::default();
        let p = greedy_place(&c, &f, &w).unwrap();
        let out = optimize(&c, &p, &f, &LatencyModel::default(), &w, None).unwrap();
        assert_eq!(out.placement, p);
        assert!(out.log.is_empty());
    }

    /// Qubit 0 at θ = 2 carries three Y layers (Δ = 12). Its neighbours are
    /// qubit 2 at θ = 1 and qubit 1 at θ = 3, which is active in `nu1` layers.
    fn gain_case(nu1: usize) -> (Circuit, Placement, Floorplan) {
        let f = fp(8, 1);
        let mut layers = vec![vec![rot(&[(0, Pauli::Y)])]; 3];
        layers.extend(vec![vec![rot(&[(1, Pauli::Z)])]; nu1]);
        let c = circuit(4, layers);
        let p = placed(&[RingTile::new(0, 2), RingTile::new(0, 3), RingTile::new(0, 1), RingTile::new(0, 4)]);
        (c, p, f)
    }

    #[test]
    fn gain_sign_decides() {
        let w = PlacementWeights::default();
        let m = LatencyModel::default();
        // Qubit 2 at θ = 1 is idle, so the cheapest eviction is free of movement.
        let (c, p, f) = gain_case(10);
        let out = optimize(&c, &p, &f, &m, &w, None).unwrap();
        assert_eq!(out.log.len(), 1);
        assert_eq!(out.log[0].evicted, Some(2));
        assert_eq!(out.log[0].penalty, 0);

        // With both neighbours busy the penalty is ν of the evictee.
        let mut layers = vec![vec![rot(&[(0, Pauli::Y)])]; 3];
        layers.extend(vec![vec![rot(&[(1, Pauli::Z)]), rot(&[(2, Pauli::Z)])]; 10]);
        let c10 = circuit(4, layers.clone());
        let out = optimize(&c10, &p, &f, &m, &w, None).unwrap();
        assert_eq!(out.log.len(), 1);
        assert_eq!((out.log[0].delta, out.log[0].penalty, out.log[0].gain), (12, 10, 2));

        let mut layers = vec![vec![rot(&[(0, Pauli::Y)])]; 3];
        layers.extend(vec![vec![rot(&[(1, Pauli::Z)]), rot(&[(2, Pauli::Z)])]; 14]);
        let c14 = circuit(4, layers);
        let out = optimize(&c14, &p, &f, &m, &w, None).unwrap();
        assert!(out.log.is_empty());
    }

    #[test]
    fn budget_caps_promotions() {
        let f = fp(10, 2);
        let c = generate(&SynthParams::new(30, 40, DensityClass::Medium, 9)).unwrap();
        let w = PlacementWeights::default();
        let m = LatencyModel::default();
        let p = greedy_place(&c, &f, &w).unwrap();
        let all = optimize(&c, &p, &f, &m, &w, None).unwrap();
        assert!(!all.log.is_empty());
        let zero = optimize(&c, &p, &f, &m, &w, Some(0)).unwrap();
        assert_eq!(zero.placement, p);
        let one = optimize(&c, &p, &f, &m, &w, Some(1)).unwrap();
        assert_eq!(one.log.len(), 1);
        assert_eq!(one.log[0], all.log[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn optimize_never_hurts(
            q in 10usize..40,
            class in prop::sample::select(DensityClass::ALL.to_vec()),
            seed in any::<u64>(),
            l in 1usize..3,
            budget in 0usize..6,
        ) {
            let f = fp(10, l);
            let c = generate(&SynthParams::new(q, 30, class, seed)).unwrap();
            let w = PlacementWeights::default();
            let m = LatencyModel::default();
            let p = greedy_place(&c, &f, &w).unwrap();
            let base = simulate(&c, &p, &f, &m).unwrap().t_total;
            let out = optimize(&c, &p, &f, &m, &w, None).unwrap();
            let opt = simulate(&c, &out.placement, &f, &m).unwrap().t_total;
            prop_assert!(opt <= base);
            prop_assert!(out.log.iter().all(|r| r.gain > 0));
            prop_assert_eq!(out.placement.tiles_used(), q + out.placement.num_promoted());
            for rec in &out.log {
                let partner = out.placement.partner(rec.qubit).unwrap();
                let own = out.placement.tile(rec.qubit).unwrap();
                prop_assert!(f.ring0_adjacent(own.theta, partner.theta));
                prop_assert!(!f.is_corner(own) && !f.is_corner(partner));
            }
            let tb = simulate(&c, &optimize(&c, &p, &f, &m, &w, Some(budget)).unwrap().placement, &f, &m).unwrap().t_total;
            let tb1 = simulate(&c, &optimize(&c, &p, &f, &m, &w, Some(budget + 1)).unwrap().placement, &f, &m).unwrap().t_total;
            prop_assert!(tb1 <= tb);
        }
    }
}
