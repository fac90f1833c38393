//! Lattice geometries: periodic square lattice, RHG cell complex and simple
//! cubic cluster graph, plus the undirected graph type the Monte-Carlo engine
//! runs on.

mod cubic;
mod rhg;
mod square;

pub use cubic::CubicClusterGraph;
pub use rhg::{Coord, ErrorChain, HomologyClass, RhgComplex, Sector, Syndrome};
pub use square::SquareLattice;

use alloc::vec::Vec;

/// Undirected multigraph in compressed sparse row form.
///
/// Parallel bonds are kept as repeated neighbour entries, so the Ising energy
/// `-J Σ_bonds s_i s_j` counts each of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Build from per-site neighbour lists. Each bond must appear in both
    /// endpoint lists.
    pub fn from_adjacency<I, J>(lists: I) -> Self
    where
        I: IntoIterator<Item = J>,
        J: IntoIterator<Item = usize>,
    {
        let mut offsets = alloc::vec![0u32];
        let mut neighbors = Vec::new();
        for list in lists {
            neighbors.extend(list.into_iter().map(|n| n as u32));
            offsets.push(neighbors.len() as u32);
        }
        let g = Self { offsets, neighbors };
        debug_assert!(g.is_symmetric());
        g
    }

    #[inline]
    pub fn num_sites(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of bonds, parallel bonds counted separately.
    #[inline]
    pub fn num_bonds(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, site: usize) -> &[u32] {
        &self.neighbors[self.offsets[site] as usize..self.offsets[site + 1] as usize]
    }

    #[inline]
    pub fn degree(&self, site: usize) -> usize {
        (self.offsets[site + 1] - self.offsets[site]) as usize
    }

    /// Every bond once, as `(i, j)` with `i < j`.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_sites()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| i < j)
                .map(move |j| (i, j))
        })
    }

    /// Neighbour multiset relation is symmetric and has no self loops.
    pub fn is_symmetric(&self) -> bool {
        (0..self.num_sites()).all(|i| {
            self.neighbors(i).iter().all(|&j| {
                let j = j as usize;
                j != i
                    && j < self.num_sites()
                    && self.neighbors(i).iter().filter(|&&k| k as usize == j).count()
                        == self.neighbors(j).iter().filter(|&&k| k as usize == i).count()
            })
        })
    }
}
