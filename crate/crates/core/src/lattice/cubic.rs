use alloc::vec::Vec;

use super::{Graph, RhgComplex};
use crate::{Error, Result};

/// Periodic `N × N × N` simple-cubic cluster graph, site id `(x * N + y) * N + z`.
///
/// Measuring every site whose coordinates are all odd or all even in the Z
/// basis leaves the RHG cluster of size `N/2` on the remaining sites, with the
/// same coordinates.
#[derive(Debug, Clone)]
pub struct CubicClusterGraph {
    n: usize,
    graph: Graph,
    /// Cubic site of each RHG qubit id (faces then edges).
    retained: Vec<u32>,
    /// Inverse of `retained`, `u32::MAX` for removed sites.
    rhg_id: Vec<u32>,
    complex: RhgComplex,
}

impl CubicClusterGraph {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 == 1 {
            return Err(Error::LatticeSize {
                what: "N",
                value: n,
                need: "even and >= 4",
            });
        }
        let site = |x: usize, y: usize, z: usize| ((x % n) * n + y % n) * n + z % n;
        let graph = Graph::from_adjacency((0..n * n * n).map(|s| {
            let (x, y, z) = (s / (n * n), (s / n) % n, s % n);
            [
                site(x + 1, y, z),
                site(x + n - 1, y, z),
                site(x, y + 1, z),
                site(x, y + n - 1, z),
                site(x, y, z + 1),
                site(x, y, z + n - 1),
            ]
        }));
        let complex = RhgComplex::new(n / 2)?;
        let faces = complex.num_faces();
        let retained: Vec<u32> = (0..complex.num_qubits())
            .map(|q| {
                let c = if q < faces {
                    complex.face_coord(q)
                } else {
                    complex.edge_coord(q - faces)
                };
                site(c[0], c[1], c[2]) as u32
            })
            .collect();
        let mut rhg_id = alloc::vec![u32::MAX; n * n * n];
        for (q, &s) in retained.iter().enumerate() {
            rhg_id[s as usize] = q as u32;
        }
        Ok(Self {
            n,
            graph,
            retained,
            rhg_id,
            complex,
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn num_sites(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// The RHG complex of size `N/2` living on the retained sites.
    pub fn complex(&self) -> &RhgComplex {
        &self.complex
    }

    /// Cubic site for each RHG qubit id.
    pub fn retained(&self) -> &[u32] {
        &self.retained
    }

    /// RHG qubit id of a cubic site, `None` if the site is measured out.
    pub fn rhg_qubit(&self, site: usize) -> Option<usize> {
        match self.rhg_id[site] {
            u32::MAX => None,
            q => Some(q as usize),
        }
    }

    pub fn coord(&self, site: usize) -> [usize; 3] {
        let n = self.n;
        [site / (n * n), (site / n) % n, site % n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_regularity() {
        let c = CubicClusterGraph::new(4).unwrap();
        assert_eq!(c.num_sites(), 64);
        assert_eq!(c.graph().num_bonds(), 192);
        assert!(c.graph().is_symmetric());
        assert!((0..64).all(|s| c.graph().degree(s) == 6));
        assert_eq!(c.retained().len(), 48);
        assert_eq!(c.complex().num_qubits(), 48);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(CubicClusterGraph::new(5).is_err());
        assert!(CubicClusterGraph::new(2).is_err());
    }

    #[test]
    fn retained_sites_are_one_or_two_odd() {
        let c = CubicClusterGraph::new(6).unwrap();
        for s in 0..c.num_sites() {
            let odd = c.coord(s).iter().filter(|&&x| x % 2 == 1).count();
            assert_eq!(c.rhg_qubit(s).is_some(), odd == 1 || odd == 2);
        }
        for (q, &s) in c.retained().iter().enumerate() {
            assert_eq!(c.rhg_qubit(s as usize), Some(q));
        }
    }

    #[test]
    fn induced_subgraph_is_rhg_qubit_graph() {
        for n in [4, 6, 8] {
            let c = CubicClusterGraph::new(n).unwrap();
            let rhg = c.complex().qubit_graph();
            for (q, &s) in c.retained().iter().enumerate() {
                let mut induced: Vec<usize> = c
                    .graph()
                    .neighbors(s as usize)
                    .iter()
                    .filter_map(|&t| c.rhg_qubit(t as usize))
                    .collect();
                let mut expected: Vec<usize> = rhg.neighbors(q).iter().map(|&t| t as usize).collect();
                induced.sort();
                expected.sort();
                assert_eq!(induced, expected);
            }
        }
    }
}
