use alloc::vec;

use super::Graph;
use crate::{Error, Result};

/// Periodic `Lx × Ly` square lattice, site id `row * Lx + col`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareLattice {
    lx: usize,
    ly: usize,
    graph: Graph,
}

impl SquareLattice {
    /// Neighbours are listed per direction (right, left, down, up), so on a
    /// side of length 2 the same neighbour appears twice (a double bond).
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        for (what, value) in [("Lx", lx), ("Ly", ly)] {
            if value < 2 {
                return Err(Error::LatticeSize {
                    what,
                    value,
                    need: ">= 2",
                });
            }
        }
        let graph = Graph::from_adjacency((0..lx * ly).map(|s| {
            let (r, c) = (s / lx, s % lx);
            vec![
                r * lx + (c + 1) % lx,
                r * lx + (c + lx - 1) % lx,
                ((r + 1) % ly) * lx + c,
                ((r + ly - 1) % ly) * lx + c,
            ]
        }));
        Ok(Self { lx, ly, graph })
    }

    pub fn width(&self) -> usize {
        self.lx
    }

    pub fn height(&self) -> usize {
        self.ly
    }

    pub fn num_sites(&self) -> usize {
        self.lx * self.ly
    }

    #[inline]
    pub fn site(&self, row: usize, col: usize) -> usize {
        (row % self.ly) * self.lx + col % self.lx
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }
}
