//! Annular tile geometry.
//!
//! The base fabric is an `n × n` grid. Its border is data ring 0 (one tile
//! given up for the magic-state channel), the next ring in is the ancilla
//! ring, and the `(n−4)²` core is the compute region (CR). Outer data rings
//! `r ≥ 1` are the full perimeters of the `(n+2r)`-sided squares around it.
//!
//! Every ring is enumerated clockwise from its top-left corner. On ring 0 the
//! channel tile sits in the middle of the bottom edge and is skipped by the
//! enumeration, so the two tiles on either side of it get consecutive
//! indices without being physically adjacent.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloorplanConfig {
    /// Grid side of the base fabric.
    pub n: usize,
    /// Number of stacked outer rings, `L`.
    pub outer_rings: usize,
    /// Number of CR-entry lanes, `K`.
    pub lanes: usize,
    /// Code distance, only used for physical-size and wall-clock reporting.
    pub distance: usize,
}

impl Default for FloorplanConfig {
    fn default() -> Self {
        FloorplanConfig { n: 8, outer_rings: 0, lanes: 4, distance: 11 }
    }
}

impl FloorplanConfig {
    pub fn new(n: usize, outer_rings: usize) -> Self {
        FloorplanConfig { n, outer_rings, ..Default::default() }
    }

    pub fn with_lanes(mut self, lanes: usize) -> Self {
        self.lanes = lanes;
        self
    }
}

/// A data tile `(r, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingTile {
    pub r: usize,
    pub theta: usize,
}

impl RingTile {
    pub fn new(r: usize, theta: usize) -> Self {
        RingTile { r, theta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TileCoord {
    Ring(RingTile),
    CrSlot(usize),
    Msf,
}

pub fn ring0_size(n: usize) -> usize {
    4 * (n - 1) - 1
}

pub fn outer_ring_size(n: usize, r: usize) -> usize {
    4 * (n + 2 * r - 1)
}

pub fn ancilla_ring_usable(n: usize) -> usize {
    4 * (n - 3) - 1
}

pub fn cr_capacity_of(n: usize) -> usize {
    (n - 4) * (n - 4)
}

/// Ring 0 tiles plus both channel tiles plus the usable ancilla ring plus the
/// CR. Equals `n²` for every legal `n`.
pub fn budget_total(n: usize) -> usize {
    ring0_size(n) + 1 + ancilla_ring_usable(n) + 1 + cr_capacity_of(n)
}

/// Data tiles over all tiles (MSF row excluded).
pub fn density(n: usize, outer_rings: usize) -> f64 {
    let outer: usize = (1..=outer_rings).map(|r| outer_ring_size(n, r)).sum();
    (ring0_size(n) + outer) as f64 / (n * n + outer) as f64
}

/// Smallest legal grid whose CR holds `s_max` concurrently active qubits.
pub fn min_grid(s_max: usize) -> usize {
    let mut n = 6;
    while cr_capacity_of(n) < s_max {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    config: FloorplanConfig,
    ring_sizes: Vec<usize>,
    corners: Vec<[usize; 4]>,
    lanes: Vec<usize>,
}

impl Floorplan {
    /// Lanes are spread evenly, `θ_k = ⌊k·N_0/K⌋`, moving forward past corners
    /// and already-taken tiles.
    pub fn build(config: FloorplanConfig) -> Result<Self> {
        let n0 = Self::check(&config)?;
        let corners = ring0_corners(config.n);
        let usable = n0 - 4;
        if config.lanes == 0 || config.lanes > usable {
            return Err(Error::InvalidFloorplan(format!(
                "lane count {} outside [1, {usable}]",
                config.lanes
            )));
        }
        let mut lanes = Vec::with_capacity(config.lanes);
        for k in 0..config.lanes {
            let mut theta = k * n0 / config.lanes;
            while corners.contains(&theta) || lanes.contains(&theta) {
                theta = (theta + 1) % n0;
            }
            lanes.push(theta);
        }
        Self::with_lanes(config, lanes)
    }

    /// Builds with explicit ring-0 lane positions; `config.lanes` is replaced
    /// by their count.
    pub fn with_lanes(mut config: FloorplanConfig, lanes: Vec<usize>) -> Result<Self> {
        let n0 = Self::check(&config)?;
        let mut corners = vec![ring0_corners(config.n)];
        for r in 1..=config.outer_rings {
            let s = config.n + 2 * r;
            corners.push([0, s - 1, 2 * (s - 1), 3 * (s - 1)]);
        }
        if lanes.is_empty() {
            return Err(Error::InvalidFloorplan("at least one lane is required".into()));
        }
        for (i, &l) in lanes.iter().enumerate() {
            if l >= n0 {
                return Err(Error::InvalidFloorplan(format!("lane at {l} is off ring 0")));
            }
            if corners[0].contains(&l) {
                return Err(Error::InvalidFloorplan(format!("lane at {l} is a corner")));
            }
            if lanes[..i].contains(&l) {
                return Err(Error::InvalidFloorplan(format!("lane at {l} is repeated")));
            }
        }
        config.lanes = lanes.len();
        let mut ring_sizes = vec![n0];
        ring_sizes.extend((1..=config.outer_rings).map(|r| outer_ring_size(config.n, r)));
        Ok(Floorplan { config, ring_sizes, corners, lanes })
    }

    fn check(config: &FloorplanConfig) -> Result<usize> {
        if config.n < 6 {
            return Err(Error::InvalidFloorplan(format!("grid side {} below 6", config.n)));
        }
        if config.distance < 3 || config.distance.is_multiple_of(2) {
            return Err(Error::InvalidFloorplan(format!(
                "code distance {} must be odd and at least 3",
                config.distance
            )));
        }
        Ok(ring0_size(config.n))
    }

    pub fn config(&self) -> &FloorplanConfig {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn outer_rings(&self) -> usize {
        self.config.outer_rings
    }

    pub fn num_rings(&self) -> usize {
        self.ring_sizes.len()
    }

    pub fn ring_size(&self, r: usize) -> usize {
        self.ring_sizes[r]
    }

    pub fn ring_sizes(&self) -> &[usize] {
        &self.ring_sizes
    }

    /// Ring-0 angles of the lanes, indexed by lane number.
    pub fn lanes(&self) -> &[usize] {
        &self.lanes
    }

    pub fn ring0_tiles(&self) -> usize {
        self.ring_sizes[0]
    }

    pub fn ancilla_tiles(&self) -> usize {
        ancilla_ring_usable(self.config.n)
    }

    pub fn cr_capacity(&self) -> usize {
        cr_capacity_of(self.config.n)
    }

    pub fn capacity(&self) -> usize {
        self.ring_sizes.iter().sum()
    }

    pub fn density(&self) -> f64 {
        density(self.config.n, self.config.outer_rings)
    }

    /// All tiles of the fabric, data or not, MSF row excluded.
    pub fn total_tiles(&self) -> usize {
        self.config.n * self.config.n + self.ring_sizes[1..].iter().sum::<usize>()
    }

    pub fn corners(&self, r: usize) -> [usize; 4] {
        self.corners[r]
    }

    pub fn contains(&self, t: RingTile) -> bool {
        t.r < self.ring_sizes.len() && t.theta < self.ring_sizes[t.r]
    }

    fn validate(&self, t: RingTile) -> Result<()> {
        if self.contains(t) {
            Ok(())
        } else {
            Err(Error::InvalidCoord(format!("({}, {})", t.r, t.theta)))
        }
    }

    /// Panics on a tile outside the floorplan; use [`Floorplan::is_corner_at`]
    /// for unchecked input.
    pub fn is_corner(&self, t: RingTile) -> bool {
        self.corners[t.r].contains(&t.theta)
    }

    pub fn is_corner_at(&self, coord: TileCoord) -> Result<bool> {
        match coord {
            TileCoord::Ring(t) => self.validate(t).map(|_| self.is_corner(t)),
            other => Err(Error::InvalidCoord(format!("{other:?} is not a ring tile"))),
        }
    }

    /// Wrap-around angular distance on ring `r`.
    pub fn ring_dist(&self, r: usize, a: usize, b: usize) -> Result<usize> {
        self.validate(RingTile::new(r, a))?;
        self.validate(RingTile::new(r, b))?;
        Ok(self.dist(r, a, b))
    }

    fn dist(&self, r: usize, a: usize, b: usize) -> usize {
        let n = self.ring_sizes[r];
        let d = (a + n - b) % n;
        d.min(n - d)
    }

    /// Angle of lane `k` projected onto ring `r`, `round(θ_k · N_r / N_0)`.
    pub fn lane_angle(&self, k: usize, r: usize) -> usize {
        let n0 = self.ring_sizes[0];
        let nr = self.ring_sizes[r];
        (self.lanes[k] * nr * 2 + n0) / (2 * n0) % nr
    }

    /// Lowest-index lane at the smallest angular distance.
    pub fn nearest_lane(&self, t: RingTile) -> (usize, usize) {
        self.nearest_lane_among(t, 0..self.lanes.len())
    }

    pub fn nearest_lane_among(
        &self,
        t: RingTile,
        lanes: impl IntoIterator<Item = usize>,
    ) -> (usize, usize) {
        lanes
            .into_iter()
            .map(|k| (k, self.dist(t.r, t.theta, self.lane_angle(k, t.r))))
            .min_by_key(|&(k, d)| (d, k))
            .expect("floorplan has at least one lane")
    }

    pub fn nearest_lane_at(&self, coord: TileCoord) -> Result<(usize, usize)> {
        match coord {
            TileCoord::Ring(t) => self.validate(t).map(|_| self.nearest_lane(t)),
            other => Err(Error::InvalidCoord(format!("{other:?} is not a ring tile"))),
        }
    }

    /// Physical adjacency of two ring-0 tiles.
    pub fn ring0_adjacent(&self, a: usize, b: usize) -> bool {
        let n0 = self.ring_sizes[0];
        let gap = channel_index(self.config.n);
        let (lo, hi) = if (a + 1) % n0 == b {
            (a, b)
        } else if (b + 1) % n0 == a {
            (b, a)
        } else {
            return false;
        };
        !(lo + 1 == gap && hi == gap)
    }

    /// Every data tile in ring-major, angle-minor order.
    pub fn tiles(&self) -> impl Iterator<Item = RingTile> + '_ {
        self.ring_sizes
            .iter()
            .enumerate()
            .flat_map(|(r, &nr)| (0..nr).map(move |theta| RingTile::new(r, theta)))
    }

    /// Ring-0 angular sector of a tile: outer tiles map back by proportional
    /// scaling, the inverse of lane projection.
    pub fn sector_angle(&self, t: RingTile) -> usize {
        if t.r == 0 {
            t.theta
        } else {
            t.theta * self.ring_sizes[0] / self.ring_sizes[t.r]
        }
    }

    pub fn summary(&self) -> FloorplanSummary {
        FloorplanSummary {
            n: self.config.n,
            outer_rings: self.config.outer_rings,
            lanes: self.config.lanes,
            distance: self.config.distance,
            ring_sizes: self.ring_sizes.clone(),
            lane_angles: self.lanes.clone(),
            ancilla_tiles: self.ancilla_tiles(),
            cr_capacity: self.cr_capacity(),
            density: self.density(),
            capacity: self.capacity(),
            physical_qubits: self.total_tiles() * 2 * self.config.distance * self.config.distance,
        }
    }
}

/// Enumeration index (before removal) of the channel tile on ring 0.
fn channel_index(n: usize) -> usize {
    2 * (n - 1) + (n - 1) / 2
}

fn ring0_corners(n: usize) -> [usize; 4] {
    [0, n - 1, 2 * (n - 1), 3 * (n - 1) - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorplanSummary {
    pub n: usize,
    pub outer_rings: usize,
    pub lanes: usize,
    pub distance: usize,
    pub ring_sizes: Vec<usize>,
    pub lane_angles: Vec<usize>,
    pub ancilla_tiles: usize,
    pub cr_capacity: usize,
    pub density: f64,
    pub capacity: usize,
    /// Approximate, at `2d²` physical qubits per tile.
    pub physical_qubits: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fp(n: usize, l: usize, k: usize) -> Floorplan {
        Floorplan::build(FloorplanConfig::new(n, l).with_lanes(k)).unwrap()
    }

    #[test]
    fn n8_budgets() {
        let f = fp(8, 0, 4);
        assert_eq!(f.ring0_tiles(), 27);
        assert_eq!(f.ancilla_tiles(), 19);
        assert_eq!(f.cr_capacity(), 16);
        assert_eq!(fp(6, 0, 1).cr_capacity(), 4);
        assert_eq!(fp(15, 2, 4).ring_sizes(), &[55, 64, 72]);
    }

    #[test]
    fn budget_identity_small_grids() {
        for n in 6..=64 {
            assert_eq!(budget_total(n), n * n, "n = {n}");
        }
    }

    #[test]
    fn ring_dist_examples() {
        let f = fp(6, 0, 1);
        assert_eq!(f.ring_size(0), 19);
        assert_eq!(f.ring_dist(0, 1, 18).unwrap(), 2);
        assert_eq!(f.ring_dist(0, 5, 5).unwrap(), 0);
        assert!(f.ring_dist(0, 19, 0).is_err());
        assert!(f.ring_dist(1, 0, 0).is_err());
    }

    #[test]
    fn lane_layout_n8() {
        let f = fp(8, 0, 4);
        assert_eq!(f.lanes(), &[1, 6, 13, 21]);
        let worst = (0..27).map(|t| f.nearest_lane(RingTile::new(0, t)).1).max().unwrap();
        assert_eq!(worst, 4);
        assert!(worst <= 27usize.div_ceil(8));
        let single = fp(8, 0, 1);
        let worst = (0..27).map(|t| single.nearest_lane(RingTile::new(0, t)).1).max().unwrap();
        assert_eq!(worst, 13);
        assert_eq!(f.nearest_lane(RingTile::new(0, 6)), (1, 0));
    }

    #[test]
    fn lane_count_limits() {
        assert!(Floorplan::build(FloorplanConfig::new(8, 0).with_lanes(0)).is_err());
        assert!(Floorplan::build(FloorplanConfig::new(8, 0).with_lanes(23)).is_ok());
        assert!(Floorplan::build(FloorplanConfig::new(8, 0).with_lanes(24)).is_err());
        assert!(Floorplan::build(FloorplanConfig::new(5, 0)).is_err());
        let even_d = FloorplanConfig { distance: 12, ..FloorplanConfig::default() };
        assert!(Floorplan::build(even_d).is_err());
        assert!(Floorplan::with_lanes(FloorplanConfig::default(), vec![0]).is_err());
        assert!(Floorplan::with_lanes(FloorplanConfig::default(), vec![3, 3]).is_err());
        assert_eq!(Floorplan::with_lanes(FloorplanConfig::default(), vec![3, 9]).unwrap().config().lanes, 2);
    }

    #[test]
    fn corners() {
        let f = fp(8, 2, 4);
        for r in 0..3 {
            let count = (0..f.ring_size(r)).filter(|&t| f.is_corner(RingTile::new(r, t))).count();
            assert_eq!(count, 4);
        }
        assert_eq!(f.corners(0), [0, 7, 14, 20]);
        assert_eq!(f.corners(1), [0, 9, 18, 27]);
        assert!(f.lanes().iter().all(|&l| !f.is_corner(RingTile::new(0, l))));
        assert!(f.is_corner_at(TileCoord::Msf).is_err());
        assert!(f.is_corner_at(TileCoord::Ring(RingTile::new(0, 27))).is_err());
        assert!(f.nearest_lane_at(TileCoord::CrSlot(0)).is_err());
    }

    #[test]
    fn ring0_adjacency_skips_channel() {
        let f = fp(8, 0, 4);
        // Channel sits at full index 17, between θ = 16 and θ = 17.
        assert!(!f.ring0_adjacent(16, 17));
        assert!(f.ring0_adjacent(15, 16));
        assert!(f.ring0_adjacent(26, 0));
        assert!(!f.ring0_adjacent(3, 5));
    }

    #[test]
    fn densities() {
        assert!((density(8, 0) - 27.0 / 64.0).abs() < 1e-15);
        assert!((density(15, 2) - 191.0 / 361.0).abs() < 1e-15);
        assert!((density(34, 0) - 131.0 / 1156.0).abs() < 1e-15);
        for n in 6..200 {
            assert!(density(n + 1, 0) < density(n, 0));
        }
        assert!((2000.0 * density(2000, 0) - 4.0).abs() < 0.01);
    }

    #[test]
    fn min_grids() {
        assert_eq!(min_grid(1), 6);
        assert_eq!(min_grid(4), 6);
        assert_eq!(min_grid(16), 8);
        assert_eq!(min_grid(17), 9);
        assert_eq!(min_grid(100), 14);
    }

    #[test]
    fn capacities() {
        assert_eq!(fp(8, 0, 4).capacity(), 27);
        assert_eq!(fp(8, 1, 4).capacity(), 63);
        let caps: Vec<_> = (0..5).map(|l| fp(8, l, 4).capacity()).collect();
        assert!(caps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(fp(8, 1, 4).tiles().count(), 63);
    }

    #[test]
    fn lane_projection() {
        let f = fp(8, 1, 4);
        // round(θ · 36 / 27) for θ in {1, 6, 13, 21}
        let proj: Vec<_> = (0..4).map(|k| f.lane_angle(k, 1)).collect();
        assert_eq!(proj, vec![1, 8, 17, 28]);
        assert_eq!(f.sector_angle(RingTile::new(1, 28)), 21);
    }

    proptest! {
        #[test]
        fn ring_dist_is_a_metric(n in 6usize..30, l in 0usize..4, r in 0usize..4, a in 0usize..500, b in 0usize..500, c in 0usize..500) {
            let f = fp(n, l, 4);
            let r = r.min(l);
            let nr = f.ring_size(r);
            let (a, b, c) = (a % nr, b % nr, c % nr);
            let d = |x, y| f.ring_dist(r, x, y).unwrap();
            prop_assert_eq!(d(a, a), 0);
            prop_assert_eq!(d(a, b), d(b, a));
            prop_assert!(d(a, c) <= d(a, b) + d(b, c));
            prop_assert!(d(a, b) <= nr / 2);
            prop_assert!((a == b) == (d(a, b) == 0));
        }

        #[test]
        fn nearest_lane_within_half_ring(n in 6usize..30, l in 0usize..4, k in 1usize..8) {
            let f = fp(n, l, k.min(ring0_size(n) - 4));
            for t in f.tiles() {
                let (lane, d) = f.nearest_lane(t);
                prop_assert!(lane < f.lanes().len());
                prop_assert!(d <= f.ring_size(t.r) / 2);
            }
        }

        #[test]
        fn stacking_raises_density(n in 6usize..80, l in 0usize..10) {
            prop_assert!(density(n, l) < density(n, l + 1));
        }
    }
}
