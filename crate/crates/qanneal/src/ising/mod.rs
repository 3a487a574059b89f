//! Ising problem representation: couplings, fields, energies, Boltzmann
//! weights, single-flip deltas, and an exhaustive ground-state oracle.

pub mod format;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest vertex count the exhaustive operations (`boltzmann_probability`,
/// `brute_force_ground`) will enumerate by default.
pub const ENUM_CAP: usize = 24;

/// One coupler of an Ising instance, canonically stored with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: u32,
    pub j: u32,
    pub coupling: f64,
}

/// An Ising problem instance: a graph with couplings `J_ij`, local fields
/// `h_j`, and a label. Immutable after construction; the edge list is kept
/// sorted by `(i, j)` so serialization is canonical.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsingInstance {
    b: usize,
    edges: Vec<Edge>,
    h: Vec<f64>,
    id: String,
    #[serde(skip)]
    adjacency: Vec<Vec<(u32, f64)>>,
}

impl IsingInstance {
    /// Build an instance from raw edges `(i, j, J)`. Vertex order within an
    /// edge is normalized, the list is sorted, and self-loops, duplicates,
    /// out-of-range indices, and non-finite values are rejected.
    pub fn new(
        b: usize,
        raw_edges: &[(usize, usize, f64)],
        h: Option<Vec<f64>>,
        id: impl Into<String>,
    ) -> Result<Self> {
        let h = h.unwrap_or_else(|| vec![0.0; b]);
        if h.len() != b {
            return Err(Error::DimensionMismatch(format!(
                "field vector has length {}, expected b = {}",
                h.len(),
                b
            )));
        }
        if let Some(bad) = h.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite field {bad}")));
        }
        let mut edges = Vec::with_capacity(raw_edges.len());
        for &(i, j, coupling) in raw_edges {
            if i >= b || j >= b {
                return Err(Error::IndexOutOfRange(format!(
                    "edge ({i}, {j}) with b = {b}"
                )));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop at vertex {i}")));
            }
            if !coupling.is_finite() {
                return Err(Error::Domain(format!(
                    "non-finite coupling on edge ({i}, {j})"
                )));
            }
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            edges.push(Edge {
                i: i as u32,
                j: j as u32,
                coupling,
            });
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = edges.windows(2).find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j)) {
            return Err(Error::Domain(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        let mut adjacency = vec![Vec::new(); b];
        for e in &edges {
            adjacency[e.i as usize].push((e.j, e.coupling));
            adjacency[e.j as usize].push((e.i, e.coupling));
        }
        Ok(Self {
            b,
            edges,
            h,
            id: id.into(),
            adjacency,
        })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// Neighbors of vertex `i` with their couplings.
    pub fn adjacency(&self, i: usize) -> &[(u32, f64)] {
        &self.adjacency[i]
    }

    pub fn has_fields(&self) -> bool {
        self.h.iter().any(|&x| x != 0.0)
    }

    /// True when every coupling and field is an integer, in which case all
    /// energies are exactly representable and equality tests are exact.
    pub fn is_integral(&self) -> bool {
        self.edges.iter().all(|e| e.coupling.fract() == 0.0)
            && self.h.iter().all(|x| x.fract() == 0.0)
    }

    /// `max_i (|h_i| + sum_j |J_ij|)`: bounds `|delta_energy_flip| / 2`.
    pub fn max_local_field(&self) -> f64 {
        (0..self.b)
            .map(|i| {
                self.h[i].abs()
                    + self.adjacency[i]
                        .iter()
                        .map(|(_, j)| j.abs())
                        .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Energy of a configuration: `-sum_(i,j) J_ij s_i s_j - sum_j h_j s_j`.
    pub fn energy(&self, s: &SpinConfiguration) -> Result<f64> {
        if s.len() != self.b {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} spins, instance has {}",
                s.len(),
                self.b
            )));
        }
        Ok(self.energy_unchecked(s.spins()))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[i8]) -> f64 {
        let mut e = 0.0;
        for edge in &self.edges {
            e -= edge.coupling
                * f64::from(spins[edge.i as usize] * spins[edge.j as usize]);
        }
        for (hj, &sj) in self.h.iter().zip(spins) {
            e -= hj * f64::from(sj);
        }
        e
    }

    /// Energy change from flipping spin `i`, computed in `O(degree(i))`:
    /// `2 s_i (h_i + sum_j J_ij s_j)`.
    pub fn delta_energy_flip(&self, s: &SpinConfiguration, i: usize) -> Result<f64> {
        if s.len() != self.b {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} spins, instance has {}",
                s.len(),
                self.b
            )));
        }
        if i >= self.b {
            return Err(Error::IndexOutOfRange(format!(
                "flip index {i} with b = {}",
                self.b
            )));
        }
        Ok(self.delta_unchecked(s.spins(), i))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, spins: &[i8], i: usize) -> f64 {
        let mut field = self.h[i];
        for &(j, coupling) in &self.adjacency[i] {
            field += coupling * f64::from(spins[j as usize]);
        }
        2.0 * f64::from(spins[i]) * field
    }

    /// Exact Boltzmann probability `exp(-beta E(s)) / Z_beta`, with the
    /// partition function summed over all `2^b` configurations.
    pub fn boltzmann_probability(&self, s: &SpinConfiguration, beta: f64) -> Result<f64> {
        if beta <= 0.0 {
            return Err(Error::Domain(format!("beta must be positive, got {beta}")));
        }
        if self.b > ENUM_CAP {
            return Err(Error::Capability {
                what: "exact partition function (2^b enumeration)",
                requested: self.b,
                limit: ENUM_CAP,
            });
        }
        let target = self.energy(s)?;
        // Shift by the minimum energy so the exponentials stay in range.
        let energies = self.all_energies();
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let z: f64 = energies.iter().map(|e| (-beta * (e - min)).exp()).sum();
        Ok((-beta * (target - min)).exp() / z)
    }

    /// Energies of all `2^b` configurations, indexed by
    /// [`SpinConfiguration::from_index`] order.
    pub(crate) fn all_energies(&self) -> Vec<f64> {
        let n = 1usize << self.b;
        let mut spins = vec![1i8; self.b];
        let mut out = Vec::with_capacity(n);
        for idx in 0..n {
            write_spins_from_index(idx, &mut spins);
            out.push(self.energy_unchecked(&spins));
        }
        out
    }

    /// Exhaustive ground-state search (default cap `b <= 24`). Returns the
    /// minimum energy together with every configuration attaining it; the
    /// degenerate set is collected in full because both the success test and
    /// the bound report compare by energy, not by configuration.
    pub fn brute_force_ground(&self) -> Result<(f64, Vec<SpinConfiguration>)> {
        self.brute_force_ground_capped(ENUM_CAP)
    }

    pub fn brute_force_ground_capped(
        &self,
        cap: usize,
    ) -> Result<(f64, Vec<SpinConfiguration>)> {
        if self.b > cap {
            return Err(Error::Capability {
                what: "brute-force ground-state enumeration (2^b states)",
                requested: self.b,
                limit: cap,
            });
        }
        let n = 1usize << self.b;
        let mut spins = vec![1i8; self.b];
        let mut min = f64::INFINITY;
        for idx in 0..n {
            write_spins_from_index(idx, &mut spins);
            let e = self.energy_unchecked(&spins);
            if e < min {
                min = e;
            }
        }
        // Second pass collects ties within a tolerance that cannot merge
        // distinct integer levels.
        let tol = 1e-9 * min.abs().max(1.0);
        let mut minimizers = Vec::new();
        for idx in 0..n {
            write_spins_from_index(idx, &mut spins);
            if self.energy_unchecked(&spins) <= min + tol {
                minimizers.push(SpinConfiguration::from_spins_unchecked(spins.clone()));
            }
        }
        Ok((min, minimizers))
    }

    /// Indices (in `from_index` order) of all ground configurations.
    pub fn ground_indices(&self) -> Result<(f64, Vec<usize>)> {
        if self.b > ENUM_CAP {
            return Err(Error::Capability {
                what: "brute-force ground-state enumeration (2^b states)",
                requested: self.b,
                limit: ENUM_CAP,
            });
        }
        let energies = self.all_energies();
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * min.abs().max(1.0);
        let idx = energies
            .iter()
            .enumerate()
            .filter(|(_, &e)| e <= min + tol)
            .map(|(i, _)| i)
            .collect();
        Ok((min, idx))
    }
}

impl<'de> Deserialize<'de> for IsingInstance {
    fn deserialize<D>(deserializer: D) -> std::result::Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            b: usize,
            edges: Vec<Edge>,
            h: Vec<f64>,
            id: String,
        }
        let raw = Raw::deserialize(deserializer)?;
        let edges: Vec<(usize, usize, f64)> = raw
            .edges
            .iter()
            .map(|e| (e.i as usize, e.j as usize, e.coupling))
            .collect();
        IsingInstance::new(raw.b, &edges, Some(raw.h), raw.id)
            .map_err(serde::de::Error::custom)
    }
}

/// A spin assignment: one value in `{+1, -1}` per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration(Vec<i8>);

impl SpinConfiguration {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::Domain(format!("spin value {bad} is not +-1")));
        }
        Ok(Self(spins))
    }

    pub(crate) fn from_spins_unchecked(spins: Vec<i8>) -> Self {
        Self(spins)
    }

    /// Configuration number `index` of `b` spins: bit `b-1-j` of the index
    /// holds spin `j`, with bit 0 meaning `+1`. Index 0 is all-up, and the
    /// ordering matches the computational-basis ordering of the dense
    /// quantum Hamiltonians.
    pub fn from_index(index: usize, b: usize) -> Self {
        let mut spins = vec![1i8; b];
        write_spins_from_index(index, &mut spins);
        Self(spins)
    }

    /// Inverse of [`SpinConfiguration::from_index`].
    pub fn to_index(&self) -> usize {
        let mut idx = 0usize;
        for &s in &self.0 {
            idx = (idx << 1) | usize::from(s < 0);
        }
        idx
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn flipped(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.flip(i);
        c
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.0
    }
}

#[inline]
fn write_spins_from_index(index: usize, spins: &mut [i8]) {
    let b = spins.len();
    for (j, s) in spins.iter_mut().enumerate() {
        *s = if index >> (b - 1 - j) & 1 == 0 { 1 } else { -1 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn pair(j: f64) -> IsingInstance {
        IsingInstance::new(2, &[(0, 1, j)], None, "pair").unwrap()
    }

    fn config(spins: &[i8]) -> SpinConfiguration {
        SpinConfiguration::new(spins.to_vec()).unwrap()
    }

    fn random_instance(b: usize, seed: u64) -> IsingInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for i in 0..b {
            for j in (i + 1)..b {
                if rng.random::<f64>() < 0.6 {
                    edges.push((i, j, rng.random_range(-2.0..2.0)));
                }
            }
        }
        let h: Vec<f64> = (0..b).map(|_| rng.random_range(-1.0..1.0)).collect();
        IsingInstance::new(b, &edges, Some(h), format!("rnd-{seed}")).unwrap()
    }

    fn random_config(b: usize, rng: &mut impl Rng) -> SpinConfiguration {
        config(
            &(0..b)
                .map(|_| if rng.random::<f64>() < 0.5 { 1i8 } else { -1 })
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn energy_aligned_ferromagnetic_pair() {
        assert_eq!(pair(1.0).energy(&config(&[1, 1])).unwrap(), -1.0);
    }

    #[test]
    fn energy_fields_cancel() {
        let inst = IsingInstance::new(2, &[], Some(vec![1.0, 1.0]), "f").unwrap();
        assert_eq!(inst.energy(&config(&[1, -1])).unwrap(), 0.0);
    }

    #[test]
    fn energy_triangle() {
        let inst = IsingInstance::new(
            3,
            &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)],
            None,
            "tri",
        )
        .unwrap();
        assert_eq!(inst.energy(&config(&[1, 1, -1])).unwrap(), 1.0);
    }

    #[test]
    fn energy_dimension_mismatch() {
        assert!(matches!(
            pair(1.0).energy(&config(&[1, 1, 1])),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn delta_flip_examples() {
        assert_eq!(
            pair(1.0)
                .delta_energy_flip(&config(&[1, 1]), 0)
                .unwrap(),
            2.0
        );
        let site = IsingInstance::new(1, &[], Some(vec![1.0]), "site").unwrap();
        assert_eq!(site.delta_energy_flip(&config(&[1]), 0).unwrap(), 2.0);
        assert!(matches!(
            site.delta_energy_flip(&config(&[1]), 1),
            Err(Error::IndexOutOfRange(_))
        ));
    }

    #[test]
    fn delta_matches_full_reevaluation() {
        let inst = random_instance(8, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let s = random_config(8, &mut rng);
            let base = inst.energy(&s).unwrap();
            for i in 0..8 {
                let flipped = inst.energy(&s.flipped(i)).unwrap();
                assert_relative_eq!(
                    inst.delta_energy_flip(&s, i).unwrap(),
                    flipped - base,
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn boltzmann_single_free_spin() {
        let inst = IsingInstance::new(1, &[], None, "free").unwrap();
        assert_relative_eq!(
            inst.boltzmann_probability(&config(&[1]), 1.0).unwrap(),
            0.5
        );
        assert_relative_eq!(
            inst.boltzmann_probability(&config(&[-1]), 1.0).unwrap(),
            0.5
        );
    }

    #[test]
    fn boltzmann_uniform_limit() {
        let inst = random_instance(5, 3);
        let s = config(&[1, -1, 1, 1, -1]);
        let p = inst.boltzmann_probability(&s, 1e-9).unwrap();
        assert!((p - 1.0 / 32.0).abs() < 1e-6);
    }

    #[test]
    fn boltzmann_pair_closed_form() {
        // P(++) = e / (2e + 2e^-1), evaluated by a high-precision oracle.
        let p = pair(1.0)
            .boltzmann_probability(&config(&[1, 1]), 1.0)
            .unwrap();
        assert_relative_eq!(p, 0.440398538988941222, epsilon = 1e-14);
    }

    #[test]
    fn boltzmann_capability_error() {
        let inst = IsingInstance::new(25, &[], None, "big").unwrap();
        let s = SpinConfiguration::from_index(0, 25);
        match inst.boltzmann_probability(&s, 1.0) {
            Err(Error::Capability { limit, .. }) => assert_eq!(limit, ENUM_CAP),
            other => panic!("expected capability error, got {other:?}"),
        }
    }

    #[test]
    fn ground_ferromagnetic_chain() {
        let inst = IsingInstance::new(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
            None,
            "chain",
        )
        .unwrap();
        let (e, mins) = inst.brute_force_ground().unwrap();
        assert_eq!(e, -3.0);
        assert_eq!(mins.len(), 2);
        assert!(mins.contains(&config(&[1, 1, 1, 1])));
        assert!(mins.contains(&config(&[-1, -1, -1, -1])));
    }

    #[test]
    fn ground_frustrated_triangle() {
        let inst = IsingInstance::new(
            3,
            &[(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)],
            None,
            "aft",
        )
        .unwrap();
        let (e, mins) = inst.brute_force_ground().unwrap();
        assert_eq!(e, -1.0);
        assert_eq!(mins.len(), 6);
    }

    #[test]
    fn ground_single_field() {
        let inst = IsingInstance::new(1, &[], Some(vec![2.0]), "one").unwrap();
        let (e, mins) = inst.brute_force_ground().unwrap();
        assert_eq!(e, -2.0);
        assert_eq!(mins, vec![config(&[1])]);
    }

    #[test]
    fn ground_capability_error() {
        let inst = IsingInstance::new(25, &[], None, "big").unwrap();
        assert!(matches!(
            inst.brute_force_ground(),
            Err(Error::Capability { .. })
        ));
    }

    #[test]
    fn ground_minimality() {
        let inst = random_instance(10, 99);
        let (e, _) = inst.brute_force_ground().unwrap();
        for idx in 0..(1 << 10) {
            let s = SpinConfiguration::from_index(idx, 10);
            assert!(inst.energy(&s).unwrap() >= e);
        }
    }

    #[test]
    fn construction_rejects_bad_edges() {
        assert!(IsingInstance::new(2, &[(0, 0, 1.0)], None, "x").is_err());
        assert!(IsingInstance::new(2, &[(0, 2, 1.0)], None, "x").is_err());
        assert!(IsingInstance::new(2, &[(0, 1, 1.0), (1, 0, 2.0)], None, "x").is_err());
        assert!(IsingInstance::new(2, &[(0, 1, f64::NAN)], None, "x").is_err());
    }

    #[test]
    fn edges_are_canonicalized() {
        let inst = IsingInstance::new(3, &[(2, 1, 1.0), (1, 0, -1.0)], None, "c").unwrap();
        let pairs: Vec<_> = inst.edges().iter().map(|e| (e.i, e.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn index_round_trip() {
        for idx in 0..(1 << 5) {
            let s = SpinConfiguration::from_index(idx, 5);
            assert_eq!(s.to_index(), idx);
        }
        // index 0 is all-up, matching the basis convention
        assert_eq!(SpinConfiguration::from_index(0, 3), config(&[1, 1, 1]));
        assert_eq!(SpinConfiguration::from_index(1, 3), config(&[1, 1, -1]));
        assert_eq!(SpinConfiguration::from_index(4, 3), config(&[-1, 1, 1]));
    }

    proptest! {
        #[test]
        fn prop_flip_consistency(seed in 0u64..500, idx in 0usize..6, cfg_bits in 0usize..64) {
            let inst = random_instance(6, seed);
            let s = SpinConfiguration::from_index(cfg_bits, 6);
            let delta = inst.delta_energy_flip(&s, idx).unwrap();
            let direct = inst.energy(&s.flipped(idx)).unwrap() - inst.energy(&s).unwrap();
            prop_assert!((delta - direct).abs() < 1e-12);
        }

        #[test]
        fn prop_spin_reversal_symmetry(seed in 0u64..200, cfg_bits in 0usize..256) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for i in 0..8usize {
                for j in (i + 1)..8 {
                    if rng.random::<f64>() < 0.4 {
                        edges.push((i, j, rng.random_range(-1.0..1.0f64)));
                    }
                }
            }
            let inst = IsingInstance::new(8, &edges, None, "sym").unwrap();
            let s = SpinConfiguration::from_index(cfg_bits, 8);
            let e1 = inst.energy(&s).unwrap();
            let e2 = inst.energy(&s.negated()).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
        }

        #[test]
        fn prop_boltzmann_normalization(seed in 0u64..50) {
            let inst = random_instance(6, seed);
            let total: f64 = (0..64)
                .map(|i| {
                    inst.boltzmann_probability(&SpinConfiguration::from_index(i, 6), 0.7)
                        .unwrap()
                })
                .sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }
    }
}
