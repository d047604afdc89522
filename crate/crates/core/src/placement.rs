//! Workload-aware qubit placement.
//!
//! Each qubit gets a scalar cost from its non-Clifford profile; qubits are
//! then laid onto data tiles in descending cost, innermost ring first.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, QubitProfile};
use crate::floorplan::{Floorplan, RingTile};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementWeights {
    pub alpha_t: f64,
    pub alpha_y: f64,
    pub lambda_t: f64,
    pub lambda_y: f64,
    pub lambda_int: f64,
}

impl Default for PlacementWeights {
    fn default() -> Self {
        PlacementWeights { alpha_t: 1.0, alpha_y: 1.5, lambda_t: 1.0, lambda_y: 2.0, lambda_int: 4.0 }
    }
}

impl PlacementWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = self.alpha_t > 0.0
            && self.alpha_y > 0.0
            && self.lambda_t >= 0.0
            && self.lambda_y >= 0.0
            && self.lambda_int >= 0.0
            && [self.alpha_t, self.alpha_y, self.lambda_t, self.lambda_y, self.lambda_int]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("placement weights out of range: {self:?}")))
        }
    }
}

/// `λ_T·Tload + λ_Y·Yload + λ_int·deg_int`.
pub fn cost(p: &QubitProfile, w: &PlacementWeights) -> f64 {
    let tload = p.t_s as f64 + w.alpha_t * p.t_m as f64;
    let yload = p.y_s as f64 + w.alpha_y * p.y_m as f64;
    w.lambda_t * tload + w.lambda_y * yload + w.lambda_int * p.deg_int as f64
}

/// Qubit indices by descending cost, ties by index.
///
/// Costs are compared after dividing by `λ_T + λ_Y + λ_int` and rounding to
/// nine decimals, so a common rescaling of the λ weights cannot reorder
/// qubits through floating-point noise.
pub fn cost_order(profiles: &[QubitProfile], w: &PlacementWeights) -> Vec<usize> {
    let scale = w.lambda_t + w.lambda_y + w.lambda_int;
    let keys: Vec<i64> = profiles
        .iter()
        .map(|p| if scale > 0.0 { (cost(p, w) / scale * 1e9).round() as i64 } else { 0 })
        .collect();
    let mut order: Vec<usize> = (0..profiles.len()).collect();
    order.sort_by_key(|&q| (std::cmp::Reverse(keys[q]), q));
    order
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Placement {
    assignment: Vec<Option<RingTile>>,
    occupied: BTreeMap<RingTile, usize>,
    /// Promoted qubit → its second ring-0 tile.
    promoted: BTreeMap<usize, RingTile>,
    lanes: Option<Vec<usize>>,
    region: Option<BTreeSet<RingTile>>,
}

impl Placement {
    pub fn new(num_qubits: usize) -> Self {
        Placement { assignment: vec![None; num_qubits], ..Default::default() }
    }

    /// Restricts CR entry to the given lane numbers.
    pub fn with_lanes(mut self, lanes: Vec<usize>) -> Self {
        self.lanes = Some(lanes);
        self
    }

    /// Restricts every later tile choice (relocation, promotion) to `region`.
    pub fn with_region(mut self, region: BTreeSet<RingTile>) -> Self {
        self.region = Some(region);
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.assignment.len()
    }

    pub fn lanes(&self) -> Option<&[usize]> {
        self.lanes.as_deref()
    }

    pub fn region(&self) -> Option<&BTreeSet<RingTile>> {
        self.region.as_ref()
    }

    pub fn tile(&self, q: usize) -> Option<RingTile> {
        self.assignment.get(q).copied().flatten()
    }

    pub fn tile_of(&self, q: usize) -> Result<RingTile> {
        self.tile(q).ok_or(Error::Unplaced(q))
    }

    pub fn occupant(&self, t: RingTile) -> Option<usize> {
        self.occupied.get(&t).copied()
    }

    pub fn is_promoted(&self, q: usize) -> bool {
        self.promoted.contains_key(&q)
    }

    pub fn partner(&self, q: usize) -> Option<RingTile> {
        self.promoted.get(&q).copied()
    }

    pub fn promoted(&self) -> impl Iterator<Item = usize> + '_ {
        self.promoted.keys().copied()
    }

    pub fn num_promoted(&self) -> usize {
        self.promoted.len()
    }

    pub fn tiles_used(&self) -> usize {
        self.occupied.len()
    }

    pub fn occupied(&self) -> impl Iterator<Item = (RingTile, usize)> + '_ {
        self.occupied.iter().map(|(&t, &q)| (t, q))
    }

    /// Inside the region (if any) and not occupied.
    pub fn is_free(&self, fp: &Floorplan, t: RingTile) -> bool {
        fp.contains(t)
            && !self.occupied.contains_key(&t)
            && self.region.as_ref().is_none_or(|r| r.contains(&t))
    }

    pub fn in_region(&self, t: RingTile) -> bool {
        self.region.as_ref().is_none_or(|r| r.contains(&t))
    }

    pub fn assign(&mut self, q: usize, t: RingTile) -> Result<()> {
        if q >= self.assignment.len() {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: self.assignment.len() });
        }
        if self.assignment[q].is_some() || self.occupied.contains_key(&t) {
            return Err(Error::InvalidParams(format!("cannot assign qubit {q} to {t:?}")));
        }
        self.assignment[q] = Some(t);
        self.occupied.insert(t, q);
        Ok(())
    }

    /// Moves an unpromoted qubit to a free tile.
    pub fn relocate(&mut self, q: usize, t: RingTile) -> Result<()> {
        let from = self.tile_of(q)?;
        if self.is_promoted(q) || self.occupied.contains_key(&t) {
            return Err(Error::InvalidParams(format!("cannot relocate qubit {q} to {t:?}")));
        }
        self.occupied.remove(&from);
        self.occupied.insert(t, q);
        self.assignment[q] = Some(t);
        Ok(())
    }

    /// Gives `q` the free tile `partner` as its second tile.
    pub fn promote(&mut self, q: usize, partner: RingTile) -> Result<()> {
        self.tile_of(q)?;
        if self.is_promoted(q) || self.occupied.contains_key(&partner) {
            return Err(Error::InvalidParams(format!("cannot promote qubit {q} onto {partner:?}")));
        }
        self.occupied.insert(partner, q);
        self.promoted.insert(q, partner);
        Ok(())
    }

    /// Nearest permitted lane to `q`'s tile, as `(lane, d_θ)`.
    pub fn lane_of(&self, q: usize, fp: &Floorplan) -> Result<(usize, usize)> {
        let t = self.tile_of(q)?;
        Ok(self.lane_for(t, fp))
    }

    pub fn lane_for(&self, t: RingTile, fp: &Floorplan) -> (usize, usize) {
        match &self.lanes {
            Some(lanes) => fp.nearest_lane_among(t, lanes.iter().copied()),
            None => fp.nearest_lane(t),
        }
    }

    pub fn check_complete(&self) -> Result<()> {
        match self.assignment.iter().position(Option::is_none) {
            Some(q) => Err(Error::Unplaced(q)),
            None => Ok(()),
        }
    }

    pub fn records(&self) -> Vec<PlacementRecord> {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(q, t)| {
                t.map(|t| PlacementRecord {
                    qubit: q,
                    r: t.r,
                    theta: t.theta,
                    promoted: self.is_promoted(q),
                    partner_theta: self.partner(q).map(|p| p.theta),
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub qubit: usize,
    pub r: usize,
    pub theta: usize,
    pub promoted: bool,
    pub partner_theta: Option<usize>,
}

/// Ring ascending, non-corner before corner, nearest lane first, then angle.
pub fn fill_order(fp: &Floorplan) -> Vec<RingTile> {
    fill_order_with(fp, fp.tiles(), None)
}

/// Fill order over a subset of tiles, measuring `d_θ` to the given lanes.
pub fn fill_order_with(
    fp: &Floorplan,
    tiles: impl IntoIterator<Item = RingTile>,
    lanes: Option<&[usize]>,
) -> Vec<RingTile> {
    let mut keyed: Vec<_> = tiles
        .into_iter()
        .map(|t| {
            let d = match lanes {
                Some(ls) => fp.nearest_lane_among(t, ls.iter().copied()).1,
                None => fp.nearest_lane(t).1,
            };
            ((t.r, fp.is_corner(t), d, t.theta), t)
        })
        .collect();
    keyed.sort_unstable_by_key(|&(k, _)| k);
    keyed.into_iter().map(|(_, t)| t).collect()
}

/// Assigns `order[i]` to `tiles[i]`.
pub fn place_in_order(
    num_qubits: usize,
    order: &[usize],
    tiles: &[RingTile],
) -> Result<Placement> {
    if order.len() > tiles.len() {
        return Err(Error::CapacityExceeded { needed: order.len(), capacity: tiles.len() });
    }
    let mut p = Placement::new(num_qubits);
    for (&q, &t) in order.iter().zip(tiles) {
        p.assign(q, t)?;
    }
    Ok(p)
}

pub fn greedy_place(circuit: &Circuit, fp: &Floorplan, w: &PlacementWeights) -> Result<Placement> {
    w.validate()?;
    let q = circuit.num_qubits();
    if q > fp.capacity() {
        return Err(Error::CapacityExceeded { needed: q, capacity: fp.capacity() });
    }
    let order = cost_order(&circuit.profiles(), w);
    place_in_order(q, &order, &fill_order(fp))
}

/// Qubits in cost order onto the fill order reversed: the cheapest qubits
/// get the best tiles.
pub fn reversed_place(circuit: &Circuit, fp: &Floorplan, w: &PlacementWeights) -> Result<Placement> {
    w.validate()?;
    let q = circuit.num_qubits();
    if q > fp.capacity() {
        return Err(Error::CapacityExceeded { needed: q, capacity: fp.capacity() });
    }
    let mut order = cost_order(&circuit.profiles(), w);
    order.reverse();
    place_in_order(q, &order, &fill_order(fp))
}

/// Uniformly random distinct tiles.
pub fn random_place(num_qubits: usize, fp: &Floorplan, seed: u64) -> Result<Placement> {
    if num_qubits > fp.capacity() {
        return Err(Error::CapacityExceeded { needed: num_qubits, capacity: fp.capacity() });
    }
    let mut tiles: Vec<RingTile> = fp.tiles().collect();
    tiles.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let order: Vec<usize> = (0..num_qubits).collect();
    place_in_order(num_qubits, &order, &tiles)
}

/// Spreads the cost-sorted qubits over every ring in equal contiguous
/// chunks, the costliest chunk innermost. Rings that run out of tiles spill
/// into the next one.
pub fn spread_place(circuit: &Circuit, fp: &Floorplan, w: &PlacementWeights) -> Result<Placement> {
    w.validate()?;
    let q = circuit.num_qubits();
    if q > fp.capacity() {
        return Err(Error::CapacityExceeded { needed: q, capacity: fp.capacity() });
    }
    let rings = fp.num_rings();
    let fill = fill_order(fp);
    let mut by_ring: Vec<Vec<RingTile>> = vec![Vec::new(); rings];
    for t in fill {
        by_ring[t.r].push(t);
    }
    let mut tiles = Vec::with_capacity(q);
    let mut carry = 0;
    for (r, ring) in by_ring.iter().enumerate() {
        let share = q / rings + usize::from(r < q % rings) + carry;
        let take = share.min(ring.len());
        carry = share - take;
        tiles.extend_from_slice(&ring[..take]);
    }
    if carry > 0 {
        // Inner rings absorb what the outermost one could not hold.
        let used: BTreeSet<RingTile> = tiles.iter().copied().collect();
        tiles.extend(fill_order(fp).into_iter().filter(|t| !used.contains(t)).take(carry));
    }
    let order = cost_order(&circuit.profiles(), w);
    place_in_order(q, &order, &tiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generate, DensityClass, Pauli, PauliProduct, Rotation, Sign, SynthParams, TLayer};
    use crate::floorplan::FloorplanConfig;
    use proptest::prelude::*;

    fn fp(n: usize, l: usize) -> Floorplan {
        Floorplan::build(FloorplanConfig::new(n, l)).unwrap()
    }

    fn layer(rots: &[&[(usize, Pauli)]]) -> TLayer {
        let rs = rots
            .iter()
            .map(|ps| Rotation::eighth(PauliProduct::new(ps.iter().copied()).unwrap(), Sign::Plus))
            .collect();
        TLayer::new(rs, 0).unwrap()
    }

    #[test]
    fn cost_formula() {
        let w = PlacementWeights::default();
        assert_eq!(cost(&QubitProfile::default(), &w), 0.0);
        let p = QubitProfile { t_s: 2, t_m: 1, y_s: 1, y_m: 0, deg_int: 1, nu: 3, y_total: 1 };
        assert_eq!(cost(&p, &w), 9.0);
        let d = QubitProfile { t_s: 4, t_m: 2, y_s: 2, y_m: 0, deg_int: 2, nu: 6, y_total: 2 };
        assert_eq!(cost(&d, &w), 18.0);
        let bad = PlacementWeights { alpha_y: 0.0, ..w };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn fill_order_shape() {
        let f = fp(8, 1);
        let order = fill_order(&f);
        assert_eq!(order.len(), f.capacity());
        let first = order[0];
        assert_eq!(first.r, 0);
        assert!(f.lanes().contains(&first.theta));
        let ring0: Vec<_> = order.iter().take_while(|t| t.r == 0).collect();
        assert_eq!(ring0.len(), 27);
        assert!(ring0[23..].iter().all(|t| f.is_corner(**t)));
        assert!(ring0[..23].iter().all(|t| !f.is_corner(**t)));
    }

    /// Two heavily interacting qubits, one Y-heavy qubit, one idle qubit.
    fn four_qubit_workload() -> Circuit {
        let layers = vec![
            layer(&[&[(2, Pauli::X), (3, Pauli::Z)]]),
            layer(&[&[(2, Pauli::Z), (3, Pauli::X)], &[(0, Pauli::Y)]]),
            layer(&[&[(2, Pauli::Y), (3, Pauli::Y)]]),
        ];
        Circuit::new("fig5", 4, layers, None).unwrap()
    }

    #[test]
    fn interacting_pair_goes_first() {
        let f = fp(8, 0);
        let c = four_qubit_workload();
        let p = greedy_place(&c, &f, &PlacementWeights::default()).unwrap();
        let order = fill_order(&f);
        let pos = |q| order.iter().position(|&t| t == p.tile(q).unwrap()).unwrap();
        let mut first_two = [pos(2), pos(3)];
        first_two.sort();
        assert_eq!(first_two, [0, 1]);
        assert_eq!(pos(1), 3);
        assert_eq!(p.num_promoted(), 0);
    }

    #[test]
    fn identical_profiles_follow_index() {
        let f = fp(8, 0);
        let c = Circuit::new("idle", 5, vec![], None).unwrap();
        let p = greedy_place(&c, &f, &PlacementWeights::default()).unwrap();
        let order = fill_order(&f);
        for (q, &t) in order.iter().take(5).enumerate() {
            assert_eq!(p.tile(q), Some(t));
        }
    }

    #[test]
    fn capacity_errors() {
        let f = fp(6, 0);
        let c = Circuit::new("big", 20, vec![], None).unwrap();
        assert!(matches!(
            greedy_place(&c, &f, &PlacementWeights::default()),
            Err(Error::CapacityExceeded { needed: 20, capacity: 19 })
        ));
        assert!(random_place(20, &f, 1).is_err());
    }

    #[test]
    fn placement_bookkeeping() {
        let mut p = Placement::new(2);
        let a = RingTile::new(0, 1);
        p.assign(0, a).unwrap();
        assert!(p.assign(1, a).is_err());
        assert!(p.assign(0, RingTile::new(0, 2)).is_err());
        assert!(matches!(p.check_complete(), Err(Error::Unplaced(1))));
        p.assign(1, RingTile::new(0, 5)).unwrap();
        p.promote(0, RingTile::new(0, 2)).unwrap();
        assert_eq!(p.tiles_used(), 3);
        assert!(p.relocate(0, RingTile::new(1, 0)).is_err());
        p.relocate(1, RingTile::new(1, 0)).unwrap();
        assert_eq!(p.occupant(RingTile::new(0, 5)), None);
        assert_eq!(p.records()[0].partner_theta, Some(2));
    }

    #[test]
    fn spread_uses_every_ring() {
        let f = fp(8, 2);
        let c = generate(&SynthParams::new(21, 10, DensityClass::Medium, 5)).unwrap();
        let p = spread_place(&c, &f, &PlacementWeights::default()).unwrap();
        let mut per_ring = [0; 3];
        for rec in p.records() {
            per_ring[rec.r] += 1;
        }
        assert_eq!(per_ring, [7, 7, 7]);
    }

    fn synth(q: usize, seed: u64) -> Circuit {
        generate(&SynthParams::new(q, 20, DensityClass::Medium, seed)).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_is_sorted_and_bijective(q in 10usize..60, seed in any::<u64>(), l in 0usize..3) {
            let f = fp(8, l + 1);
            let c = synth(q, seed);
            let w = PlacementWeights::default();
            let p = greedy_place(&c, &f, &w).unwrap();
            let order = fill_order(&f);
            let pos: Vec<usize> = (0..q).map(|i| order.iter().position(|&t| t == p.tile(i).unwrap()).unwrap()).collect();
            let mut sorted = pos.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..q).collect::<Vec<_>>());
            let costs: Vec<f64> = c.profiles().iter().map(|pr| cost(pr, &w)).collect();
            for a in 0..q {
                for b in 0..q {
                    if costs[a] > costs[b] {
                        prop_assert!(pos[a] < pos[b]);
                        prop_assert!(p.tile(a).unwrap().r <= p.tile(b).unwrap().r);
                    }
                }
            }
        }

        #[test]
        fn scaling_lambdas_keeps_placement(q in 10usize..40, seed in any::<u64>(), k in 0.1f64..50.0) {
            let f = fp(8, 1);
            let c = synth(q, seed);
            let w = PlacementWeights::default();
            let scaled = PlacementWeights { lambda_t: w.lambda_t * k, lambda_y: w.lambda_y * k, lambda_int: w.lambda_int * k, ..w };
            prop_assert_eq!(greedy_place(&c, &f, &w).unwrap(), greedy_place(&c, &f, &scaled).unwrap());
        }

        #[test]
        fn doubling_counts_doubles_cost(t_s in 0usize..100, t_m in 0usize..100, y_s in 0usize..100, y_m in 0usize..100) {
            let w = PlacementWeights::default();
            let p = QubitProfile { t_s, t_m, y_s, y_m, deg_int: t_m, nu: 0, y_total: y_s + y_m };
            let d = QubitProfile { t_s: 2 * t_s, t_m: 2 * t_m, y_s: 2 * y_s, y_m: 2 * y_m, deg_int: 2 * t_m, nu: 0, y_total: 2 * (y_s + y_m) };
            prop_assert!((cost(&d, &w) - 2.0 * cost(&p, &w)).abs() < 1e-9);
            let more = QubitProfile { t_s: t_s + 1, ..p };
            prop_assert!(cost(&more, &w) >= cost(&p, &w));
        }

        #[test]
        fn random_place_is_injective(q in 1usize..63, seed in any::<u64>()) {
            let f = fp(8, 1);
            let p = random_place(q, &f, seed).unwrap();
            prop_assert_eq!(p.tiles_used(), q);
            prop_assert!(p.check_complete().is_ok());
            prop_assert_eq!(p, random_place(q, &f, seed).unwrap());
        }
    }
}
