//! Chimera-style graph generation and random coupling assignment.

use crate::error::{Error, Result};
use crate::ising::IsingInstance;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use std::collections::BTreeSet;
use std::path::Path;

/// A Chimera grid of `rows x cols` cells, each cell a complete bipartite
/// K_{shore,shore} block, with an optional set of disabled vertices.
/// Vertex ids before masking follow the usual linear layout
/// `((r * cols + c) * 2 + side) * shore + offset`, side 0 being the
/// partition wired vertically and side 1 the one wired horizontally.
#[derive(Debug, Clone)]
pub struct ChimeraSpec {
    pub rows: usize,
    pub cols: usize,
    pub shore: usize,
    pub mask: BTreeSet<usize>,
}

impl ChimeraSpec {
    pub fn new(rows: usize, cols: usize, shore: usize) -> Self {
        Self {
            rows,
            cols,
            shore,
            mask: BTreeSet::new(),
        }
    }

    pub fn with_mask(mut self, mask: BTreeSet<usize>) -> Self {
        self.mask = mask;
        self
    }

    pub fn total_vertices(&self) -> usize {
        self.rows * self.cols * 2 * self.shore
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.shore == 0 {
            return Err(Error::Config(
                "chimera dimensions must all be at least 1".into(),
            ));
        }
        if let Some(&v) = self.mask.iter().next_back() {
            if v >= self.total_vertices() {
                return Err(Error::Config(format!(
                    "mask vertex {v} outside [0, {})",
                    self.total_vertices()
                )));
            }
        }
        Ok(())
    }
}

/// A generated graph: active vertex count and canonical edge list over
/// compacted indices `[0, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChimeraGraph {
    pub b: usize,
    pub edges: Vec<(u32, u32)>,
}

/// Build the Chimera edge set: K_{shore,shore} inside each cell, plus
/// couplers joining same-offset vertices of vertically adjacent cells
/// (side 0) and horizontally adjacent cells (side 1). Edges touching
/// masked vertices are dropped and the survivors are renumbered densely.
pub fn chimera_graph(spec: &ChimeraSpec) -> Result<ChimeraGraph> {
    spec.validate()?;
    let (rows, cols, k) = (spec.rows, spec.cols, spec.shore);
    let vid = |r: usize, c: usize, side: usize, off: usize| ((r * cols + c) * 2 + side) * k + off;

    let total = spec.total_vertices();
    let mut remap = vec![u32::MAX; total];
    let mut b = 0u32;
    for v in 0..total {
        if !spec.mask.contains(&v) {
            remap[v] = b;
            b += 1;
        }
    }

    let mut edges = Vec::new();
    let mut push = |u: usize, v: usize| {
        let (nu, nv) = (remap[u], remap[v]);
        if nu != u32::MAX && nv != u32::MAX {
            edges.push((nu.min(nv), nu.max(nv)));
        }
    };

    for r in 0..rows {
        for c in 0..cols {
            for a in 0..k {
                for z in 0..k {
                    push(vid(r, c, 0, a), vid(r, c, 1, z));
                }
            }
            for off in 0..k {
                if r + 1 < rows {
                    push(vid(r, c, 0, off), vid(r + 1, c, 0, off));
                }
                if c + 1 < cols {
                    push(vid(r, c, 1, off), vid(r, c + 1, 1, off));
                }
            }
        }
    }
    edges.sort_unstable();
    Ok(ChimeraGraph {
        b: b as usize,
        edges,
    })
}

/// Assign each coupler an independent +-1 with probability 1/2 from the
/// seeded generator (one `u64` draw per edge, low bit 0 meaning +1), with
/// all fields zero. Pure function of `(edges, seed)`.
pub fn random_instance(b: usize, edges: &[(u32, u32)], seed: u64) -> Result<IsingInstance> {
    if edges.is_empty() {
        return Err(Error::Config("cannot assign couplings to an empty edge list".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<(usize, usize, f64)> = edges
        .iter()
        .map(|&(i, j)| {
            let coupling = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
            (i as usize, j as usize, coupling)
        })
        .collect();
    IsingInstance::new(b, &raw, None, format!("rand-{seed:016x}"))
}

/// Parse a mask file: one vertex index per line, `#` comments allowed.
pub fn parse_mask(text: &str) -> Result<BTreeSet<usize>> {
    let mut mask = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let v = content.parse::<usize>().map_err(|e| Error::Parse {
            line: lineno + 1,
            msg: format!("bad vertex index: {e}"),
        })?;
        if !mask.insert(v) {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("duplicate mask vertex {v}"),
            });
        }
    }
    Ok(mask)
}

pub fn read_mask_file(path: impl AsRef<Path>) -> Result<BTreeSet<usize>> {
    parse_mask(&std::fs::read_to_string(path)?)
}

pub fn write_mask_file(mask: &BTreeSet<usize>, path: impl AsRef<Path>) -> Result<()> {
    let mut text = String::new();
    for v in mask {
        text.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_counts() {
        let g = chimera_graph(&ChimeraSpec::new(1, 1, 4)).unwrap();
        assert_eq!(g.b, 8);
        assert_eq!(g.edges.len(), 16);
    }

    #[test]
    fn two_by_two_counts() {
        // 4 cells * 16 intra + 8 vertical + 8 horizontal couplers
        let g = chimera_graph(&ChimeraSpec::new(2, 2, 4)).unwrap();
        assert_eq!(g.b, 32);
        assert_eq!(g.edges.len(), 80);
    }

    #[test]
    fn masked_c8_vertex_count() {
        let mask: BTreeSet<usize> = (0..27).map(|i| i * 19 % 512).collect();
        assert_eq!(mask.len(), 27);
        let g = chimera_graph(&ChimeraSpec::new(8, 8, 4).with_mask(mask)).unwrap();
        assert_eq!(g.b, 485);
    }

    #[test]
    fn graph_is_simple_with_bounded_degree() {
        for (m, n, k, nmask) in [(1, 1, 4, 0), (3, 3, 4, 0), (4, 2, 3, 5), (8, 8, 4, 27)] {
            let mask: BTreeSet<usize> = (0..nmask).map(|i| i * 7 % (m * n * 2 * k)).collect();
            let g = chimera_graph(&ChimeraSpec::new(m, n, k).with_mask(mask)).unwrap();
            let mut seen = BTreeSet::new();
            let mut degree = vec![0usize; g.b];
            for &(i, j) in &g.edges {
                assert!(i < j, "self-loop or unordered edge ({i}, {j})");
                assert!((j as usize) < g.b);
                assert!(seen.insert((i, j)), "duplicate edge ({i}, {j})");
                degree[i as usize] += 1;
                degree[j as usize] += 1;
            }
            assert!(degree.iter().all(|&d| d <= k + 2));
        }
    }

    #[test]
    fn instance_generation_is_deterministic() {
        let g = chimera_graph(&ChimeraSpec::new(2, 2, 4)).unwrap();
        let a = random_instance(g.b, &g.edges, 7).unwrap();
        let b = random_instance(g.b, &g.edges, 7).unwrap();
        assert_eq!(a, b);
        let c = random_instance(g.b, &g.edges, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn couplings_are_unit_and_balanced() {
        let g = chimera_graph(&ChimeraSpec::new(8, 8, 4)).unwrap();
        let mut plus = 0usize;
        let mut n = 0usize;
        for seed in 0..7 {
            let inst = random_instance(g.b, &g.edges, seed).unwrap();
            for e in inst.edges() {
                assert!(e.coupling == 1.0 || e.coupling == -1.0);
                plus += usize::from(e.coupling == 1.0);
                n += 1;
            }
            assert!(!inst.has_fields());
        }
        // binomial check across the seed sweep: 3 sigma around 1/2
        let frac = plus as f64 / n as f64;
        let sigma = 0.5 / (n as f64).sqrt();
        assert!(
            (frac - 0.5).abs() < 3.0 * sigma,
            "+1 fraction {frac} with n = {n}"
        );
    }

    #[test]
    fn single_cell_instance_domain() {
        let g = chimera_graph(&ChimeraSpec::new(1, 1, 4)).unwrap();
        let inst = random_instance(g.b, &g.edges, 3).unwrap();
        assert_eq!(inst.edges().len(), 16);
    }

    #[test]
    fn mask_parsing() {
        let mask = parse_mask("# two holes\n3\n17\n").unwrap();
        assert_eq!(mask, BTreeSet::from([3, 17]));
        assert!(parse_mask("3\n3\n").is_err());
        assert!(parse_mask("-1\n").is_err());
        assert!(parse_mask("abc\n").is_err());
    }

    #[test]
    fn mask_out_of_range_rejected() {
        let spec = ChimeraSpec::new(1, 1, 4).with_mask(BTreeSet::from([8]));
        assert!(chimera_graph(&spec).is_err());
    }

    #[test]
    fn shipped_masks_reproduce_published_sizes() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../masks");
        for (file, rows, cols, want) in [
            ("chimera_c8_485.mask", 8, 8, 485),
            ("chimera_c11_945.mask", 11, 11, 945),
            ("chimera_c12_1094.mask", 12, 12, 1094),
        ] {
            let mask = read_mask_file(dir.join(file)).unwrap();
            let g = chimera_graph(&ChimeraSpec::new(rows, cols, 4).with_mask(mask)).unwrap();
            assert_eq!(g.b, want, "{file}");
        }
    }
}
