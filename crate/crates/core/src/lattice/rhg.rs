use alloc::vec::Vec;

use super::Graph;
use crate::bits::BitSet;
use crate::{Error, Result};

/// Site of the `{0..2N-1}³` periodic coordinate grid.
pub type Coord = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// Face qubits, checked by primal cubes.
    Primal,
    /// Edge qubits (dual faces), checked by dual cubes.
    Dual,
}

impl Sector {
    pub fn name(self) -> &'static str {
        match self {
            Sector::Primal => "primal",
            Sector::Dual => "dual",
        }
    }
}

/// Periodic RHG cell complex of linear size `N`.
///
/// Sites of `{0..2N-1}³` are classified by the parity of their coordinates:
/// three odd is a primal cube, two odd a face qubit, one odd an edge qubit
/// (a dual face) and none a dual cube. Faces are indexed by their normal axis
/// (the even coordinate), edges by their direction (the odd coordinate):
/// `index = axis * N³ + ((x/2) * N + y/2) * N + z/2`.
///
/// Qubit ids used by [`RhgComplex::qubit_graph`] put faces first
/// (`0..3N³`) and edges after (`3N³..6N³`). The shift by `(1,1,1)` exchanges
/// the primal and dual structures.
#[derive(Debug, Clone)]
pub struct RhgComplex {
    n: usize,
    graph: Graph,
}

impl RhgComplex {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::LatticeSize {
                what: "N",
                value: n,
                need: ">= 2",
            });
        }
        let mut complex = Self {
            n,
            graph: Graph::from_adjacency(core::iter::empty::<[usize; 0]>()),
        };
        let faces = complex.num_faces();
        let graph = Graph::from_adjacency(
            (0..faces)
                .map(|f| complex.face_edges(f).map(|e| faces + e))
                .chain((0..faces).map(|e| complex.edge_faces(e))),
        );
        complex.graph = graph;
        Ok(complex)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    /// Period of the coordinate grid, `2N`.
    #[inline]
    pub fn side(&self) -> usize {
        2 * self.n
    }

    /// Cubes per sector, `N³`.
    #[inline]
    pub fn num_cubes(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn num_faces(&self) -> usize {
        3 * self.num_cubes()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        3 * self.num_cubes()
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.num_faces() + self.num_edges()
    }

    /// Adjacent face/edge qubit pairs, `12N³`.
    pub fn num_pairs(&self) -> usize {
        self.graph.num_bonds()
    }

    /// Bipartite 4-regular graph: each face qubit is joined to its four
    /// boundary edges.
    pub fn qubit_graph(&self) -> &Graph {
        &self.graph
    }

    #[inline]
    fn cell(&self, c: Coord) -> usize {
        ((c[0] / 2) * self.n + c[1] / 2) * self.n + c[2] / 2
    }

    #[inline]
    fn cell_base(&self, cell: usize) -> Coord {
        let n = self.n;
        [2 * (cell / (n * n)), 2 * ((cell / n) % n), 2 * (cell % n)]
    }

    #[inline]
    pub fn wrap(&self, c: [isize; 3]) -> Coord {
        let s = self.side() as isize;
        [
            c[0].rem_euclid(s) as usize,
            c[1].rem_euclid(s) as usize,
            c[2].rem_euclid(s) as usize,
        ]
    }

    #[inline]
    fn step(&self, c: Coord, axis: usize, forward: bool) -> Coord {
        let s = self.side();
        let mut out = c;
        out[axis] = if forward {
            (c[axis] + 1) % s
        } else {
            (c[axis] + s - 1) % s
        };
        out
    }

    /// Translate by `d` with periodic wraparound.
    pub fn translate(&self, c: Coord, d: Coord) -> Coord {
        let s = self.side();
        [(c[0] + d[0]) % s, (c[1] + d[1]) % s, (c[2] + d[2]) % s]
    }

    /// Primal/dual exchange: shift by `(1,1,1)`.
    pub fn dual_coord(&self, c: Coord) -> Coord {
        self.translate(c, [1, 1, 1])
    }

    pub fn face_index(&self, c: Coord) -> usize {
        debug_assert_eq!(c.iter().filter(|&&x| x % 2 == 1).count(), 2);
        let normal = (0..3).find(|&a| c[a] % 2 == 0).unwrap();
        normal * self.num_cubes() + self.cell(c)
    }

    pub fn face_coord(&self, f: usize) -> Coord {
        let normal = f / self.num_cubes();
        let mut c = self.cell_base(f % self.num_cubes());
        for (a, x) in c.iter_mut().enumerate() {
            if a != normal {
                *x += 1;
            }
        }
        c
    }

    #[inline]
    pub fn face_normal(&self, f: usize) -> usize {
        f / self.num_cubes()
    }

    pub fn edge_index(&self, c: Coord) -> usize {
        debug_assert_eq!(c.iter().filter(|&&x| x % 2 == 1).count(), 1);
        let axis = (0..3).find(|&a| c[a] % 2 == 1).unwrap();
        axis * self.num_cubes() + self.cell(c)
    }

    pub fn edge_coord(&self, e: usize) -> Coord {
        let axis = e / self.num_cubes();
        let mut c = self.cell_base(e % self.num_cubes());
        c[axis] += 1;
        c
    }

    #[inline]
    pub fn edge_axis(&self, e: usize) -> usize {
        e / self.num_cubes()
    }

    pub fn cube_index(&self, sector: Sector, c: Coord) -> usize {
        debug_assert!(c.iter().all(|&x| x % 2 == usize::from(sector == Sector::Primal)));
        self.cell(c)
    }

    /// Centre of a cube: all-odd for primal, all-even for dual.
    pub fn cube_coord(&self, sector: Sector, q: usize) -> Coord {
        let mut c = self.cell_base(q);
        if sector == Sector::Primal {
            c.iter_mut().for_each(|x| *x += 1);
        }
        c
    }

    /// The six faces of a primal cube, at `±1` along each axis from its centre.
    pub fn cube_faces(&self, q: usize) -> [usize; 6] {
        let c = self.cube_coord(Sector::Primal, q);
        core::array::from_fn(|k| self.face_index(self.step(c, k / 2, k % 2 == 0)))
    }

    /// The two primal cubes sharing a face.
    pub fn face_cubes(&self, f: usize) -> [usize; 2] {
        let c = self.face_coord(f);
        let a = self.face_normal(f);
        [self.cell(self.step(c, a, true)), self.cell(self.step(c, a, false))]
    }

    /// The four edges bounding a face.
    pub fn face_edges(&self, f: usize) -> [usize; 4] {
        let c = self.face_coord(f);
        let a = self.face_normal(f);
        let (b, d) = ((a + 1) % 3, (a + 2) % 3);
        [
            self.edge_index(self.step(c, b, true)),
            self.edge_index(self.step(c, b, false)),
            self.edge_index(self.step(c, d, true)),
            self.edge_index(self.step(c, d, false)),
        ]
    }

    /// The four faces containing an edge.
    pub fn edge_faces(&self, e: usize) -> [usize; 4] {
        let c = self.edge_coord(e);
        let a = self.edge_axis(e);
        let (b, d) = ((a + 1) % 3, (a + 2) % 3);
        [
            self.face_index(self.step(c, b, true)),
            self.face_index(self.step(c, b, false)),
            self.face_index(self.step(c, d, true)),
            self.face_index(self.step(c, d, false)),
        ]
    }

    /// The six edges (dual faces) of a dual cube.
    pub fn dual_cube_edges(&self, q: usize) -> [usize; 6] {
        let c = self.cube_coord(Sector::Dual, q);
        core::array::from_fn(|k| self.edge_index(self.step(c, k / 2, k % 2 == 0)))
    }

    /// The two dual cubes sharing an edge.
    pub fn edge_dual_cubes(&self, e: usize) -> [usize; 2] {
        let c = self.edge_coord(e);
        let a = self.edge_axis(e);
        [self.cell(self.step(c, a, true)), self.cell(self.step(c, a, false))]
    }

    /// Qubits of one sector paired with the cubes that check them.
    pub fn checked_cubes(&self, sector: Sector, qubit: usize) -> [usize; 2] {
        match sector {
            Sector::Primal => self.face_cubes(qubit),
            Sector::Dual => self.edge_dual_cubes(qubit),
        }
    }

    /// Periodic taxicab distance between two cubes of a sector, in cube units.
    pub fn cube_distance(&self, a: usize, b: usize) -> usize {
        let n = self.n;
        let (ca, cb) = (self.cell_base(a), self.cell_base(b));
        (0..3)
            .map(|k| {
                let d = (ca[k] / 2).abs_diff(cb[k] / 2);
                d.min(n - d)
            })
            .sum()
    }

    pub fn syndrome(&self, chain: &ErrorChain) -> Result<Syndrome> {
        self.check_chain(chain)?;
        let mut s = Syndrome::new(self);
        for f in chain.primal.ones() {
            for q in self.face_cubes(f) {
                s.primal.toggle(q);
            }
        }
        for e in chain.dual.ones() {
            for q in self.edge_dual_cubes(e) {
                s.dual.toggle(q);
            }
        }
        Ok(s)
    }

    fn check_chain(&self, chain: &ErrorChain) -> Result<()> {
        for len in [chain.primal.len(), chain.dual.len()] {
            if len != self.num_faces() {
                return Err(Error::SizeMismatch {
                    expected: self.num_faces(),
                    got: len,
                });
            }
        }
        Ok(())
    }

    /// Parities of cut-plane crossings. Primal cut `a`: faces with normal `a`
    /// at coordinate `a = 0`. Dual cut `a`: edges along `a` at coordinate
    /// `a = 1`. Only a homology invariant for cycles.
    pub fn cut_parities(&self, chain: &ErrorChain) -> HomologyClass {
        let mut bits = 0u8;
        for f in chain.primal.ones() {
            let a = self.face_normal(f);
            if self.face_coord(f)[a] == 0 {
                bits ^= 1 << a;
            }
        }
        for e in chain.dual.ones() {
            let a = self.edge_axis(e);
            if self.edge_coord(e)[a] == 1 {
                bits ^= 1 << (3 + a);
            }
        }
        HomologyClass(bits)
    }

    /// Homology class of a cycle; rejects chains with a nonempty boundary.
    pub fn homology_winding(&self, cycle: &ErrorChain) -> Result<HomologyClass> {
        let s = self.syndrome(cycle)?;
        if !s.is_empty() {
            return Err(Error::NotACycle(s.weight()));
        }
        Ok(self.cut_parities(cycle))
    }

    /// Straight wrapping loop along `axis` with fixed transverse coordinates:
    /// faces with normal `axis` at `(2k, 1, 1)` (primal) or edges along
    /// `axis` at `(2k+1, 0, 0)` (dual), coordinates listed from `axis`.
    pub fn logical(&self, sector: Sector, axis: usize) -> ErrorChain {
        let mut chain = ErrorChain::new(self);
        for k in 0..self.n {
            let mut c = match sector {
                Sector::Primal => [1, 1, 1],
                Sector::Dual => [0, 0, 0],
            };
            c[axis] = match sector {
                Sector::Primal => 2 * k,
                Sector::Dual => 2 * k + 1,
            };
            match sector {
                Sector::Primal => chain.primal.toggle(self.face_index(c)),
                Sector::Dual => chain.dual.toggle(self.edge_index(c)),
            }
        }
        chain
    }

    /// Smallest homologically trivial primal cycle: the four faces around
    /// edge `e`.
    pub fn primal_plaquette_loop(&self, e: usize) -> ErrorChain {
        let mut chain = ErrorChain::new(self);
        for f in self.edge_faces(e) {
            chain.primal.toggle(f);
        }
        chain
    }

    /// Smallest homologically trivial dual cycle: the four edges around
    /// face `f`.
    pub fn dual_plaquette_loop(&self, f: usize) -> ErrorChain {
        let mut chain = ErrorChain::new(self);
        for e in self.face_edges(f) {
            chain.dual.toggle(e);
        }
        chain
    }
}

/// Z-error supports on face qubits (`primal`) and edge qubits (`dual`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ErrorChain {
    pub primal: BitSet,
    pub dual: BitSet,
}

impl ErrorChain {
    pub fn new(complex: &RhgComplex) -> Self {
        Self::with_len(complex.num_faces())
    }

    pub fn with_len(per_sector: usize) -> Self {
        Self {
            primal: BitSet::new(per_sector),
            dual: BitSet::new(per_sector),
        }
    }

    /// From qubit ids in the combined numbering (faces, then edges).
    pub fn from_qubits(complex: &RhgComplex, qubits: impl IntoIterator<Item = usize>) -> Self {
        let mut chain = Self::new(complex);
        for q in qubits {
            chain.toggle_qubit(q);
        }
        chain
    }

    #[inline]
    pub fn toggle_qubit(&mut self, q: usize) {
        let faces = self.primal.len();
        if q < faces {
            self.primal.toggle(q);
        } else {
            self.dual.toggle(q - faces);
        }
    }

    #[inline]
    pub fn sector(&self, sector: Sector) -> &BitSet {
        match sector {
            Sector::Primal => &self.primal,
            Sector::Dual => &self.dual,
        }
    }

    #[inline]
    pub fn sector_mut(&mut self, sector: Sector) -> &mut BitSet {
        match sector {
            Sector::Primal => &mut self.primal,
            Sector::Dual => &mut self.dual,
        }
    }

    pub fn weight(&self) -> usize {
        self.primal.count_ones() + self.dual.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty() && self.dual.is_empty()
    }

    pub fn xor_with(&mut self, other: &ErrorChain) {
        self.primal.xor_with(&other.primal);
        self.dual.xor_with(&other.dual);
    }

    pub fn symmetric_difference(&self, other: &ErrorChain) -> ErrorChain {
        let mut out = self.clone();
        out.xor_with(other);
        out
    }

    /// Combined qubit ids of the support, faces first.
    pub fn qubits(&self) -> Vec<usize> {
        let faces = self.primal.len();
        self.primal
            .ones()
            .chain(self.dual.ones().map(|e| e + faces))
            .collect()
    }

    /// Pair sign `u_f u_e` (`-1` when exactly one of the pair is in error).
    #[inline]
    pub fn pair_sign(&self, face: usize, edge: usize) -> i8 {
        if self.primal.get(face) ^ self.dual.get(edge) {
            -1
        } else {
            1
        }
    }
}

/// Defective primal and dual cubes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Syndrome {
    pub primal: BitSet,
    pub dual: BitSet,
}

impl Syndrome {
    pub fn new(complex: &RhgComplex) -> Self {
        Self {
            primal: BitSet::new(complex.num_cubes()),
            dual: BitSet::new(complex.num_cubes()),
        }
    }

    pub fn sector(&self, sector: Sector) -> &BitSet {
        match sector {
            Sector::Primal => &self.primal,
            Sector::Dual => &self.dual,
        }
    }

    pub fn sector_mut(&mut self, sector: Sector) -> &mut BitSet {
        match sector {
            Sector::Primal => &mut self.primal,
            Sector::Dual => &mut self.dual,
        }
    }

    pub fn defects(&self, sector: Sector) -> Vec<usize> {
        self.sector(sector).ones().collect()
    }

    pub fn weight(&self) -> usize {
        self.primal.count_ones() + self.dual.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.primal.is_empty() && self.dual.is_empty()
    }

    pub fn xor_with(&mut self, other: &Syndrome) {
        self.primal.xor_with(&other.primal);
        self.dual.xor_with(&other.dual);
    }
}

/// Winding parities of a cycle: bit `a` for the primal sector along axis
/// `a`, bit `3 + a` for the dual sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HomologyClass(pub u8);

impl HomologyClass {
    pub const TRIVIAL: HomologyClass = HomologyClass(0);

    pub fn is_trivial(self) -> bool {
        self.0 == 0
    }

    pub fn bit(self, sector: Sector, axis: usize) -> bool {
        let shift = axis + if sector == Sector::Dual { 3 } else { 0 };
        self.0 >> shift & 1 == 1
    }

    pub fn single(sector: Sector, axis: usize) -> Self {
        HomologyClass(1 << (axis + if sector == Sector::Dual { 3 } else { 0 }))
    }
}

impl core::ops::BitXor for HomologyClass {
    type Output = HomologyClass;
    fn bitxor(self, rhs: Self) -> Self {
        HomologyClass(self.0 ^ rhs.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn parity_count(n: usize, odd: usize) -> usize {
        let s = 2 * n;
        let mut count = 0;
        for x in 0..s {
            for y in 0..s {
                for z in 0..s {
                    if (x % 2 + y % 2 + z % 2) == odd {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn counts_match_parity_classes() {
        for n in 2..5 {
            let c = RhgComplex::new(n).unwrap();
            assert_eq!(c.num_faces(), parity_count(n, 2));
            assert_eq!(c.num_edges(), parity_count(n, 1));
            assert_eq!(c.num_cubes(), parity_count(n, 3));
            assert_eq!(c.num_cubes(), parity_count(n, 0));
        }
        let c = RhgComplex::new(2).unwrap();
        assert_eq!((c.num_faces(), c.num_edges(), c.num_cubes()), (24, 24, 8));
        assert_eq!(RhgComplex::new(6).unwrap().num_faces(), 648);
        assert!(RhgComplex::new(1).is_err());
    }

    #[test]
    fn index_coord_round_trip() {
        let c = RhgComplex::new(3).unwrap();
        for f in 0..c.num_faces() {
            assert_eq!(c.face_index(c.face_coord(f)), f);
        }
        for e in 0..c.num_edges() {
            assert_eq!(c.edge_index(c.edge_coord(e)), e);
        }
        for sector in [Sector::Primal, Sector::Dual] {
            for q in 0..c.num_cubes() {
                assert_eq!(c.cube_index(sector, c.cube_coord(sector, q)), q);
            }
        }
    }

    #[test]
    fn cube_faces_are_unit_steps() {
        let c = RhgComplex::new(3).unwrap();
        for q in 0..c.num_cubes() {
            let centre = c.cube_coord(Sector::Primal, q);
            let mut expected: Vec<usize> = (0..3)
                .flat_map(|a| [-1isize, 1].map(move |d| (a, d)))
                .map(|(a, d)| {
                    let mut p = centre.map(|x| x as isize);
                    p[a] += d;
                    c.face_index(c.wrap(p))
                })
                .collect();
            let mut got = c.cube_faces(q).to_vec();
            expected.sort();
            got.sort();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn incidence_multiplicities() {
        let c = RhgComplex::new(3).unwrap();
        let mut face_in = vec![0; c.num_faces()];
        for q in 0..c.num_cubes() {
            for f in c.cube_faces(q) {
                face_in[f] += 1;
                assert!(c.face_cubes(f).contains(&q));
            }
        }
        assert!(face_in.iter().all(|&k| k == 2));
        let mut edge_in = vec![0; c.num_edges()];
        for q in 0..c.num_cubes() {
            for e in c.dual_cube_edges(q) {
                edge_in[e] += 1;
                assert!(c.edge_dual_cubes(e).contains(&q));
            }
        }
        assert!(edge_in.iter().all(|&k| k == 2));
        for f in 0..c.num_faces() {
            for e in c.face_edges(f) {
                assert!(c.edge_faces(e).contains(&f));
            }
        }
    }

    #[test]
    fn qubit_graph_is_4_regular_bipartite() {
        for n in 2..5 {
            let c = RhgComplex::new(n).unwrap();
            let g = c.qubit_graph();
            assert_eq!(g.num_sites(), 6 * n * n * n);
            assert_eq!(g.num_bonds(), 12 * n * n * n);
            assert!(g.is_symmetric());
            for s in 0..g.num_sites() {
                assert_eq!(g.degree(s), 4);
                let side = s < c.num_faces();
                assert!(g.neighbors(s).iter().all(|&t| ((t as usize) < c.num_faces()) != side));
            }
        }
    }

    #[test]
    fn duality_shift_exchanges_structures() {
        let c = RhgComplex::new(3).unwrap();
        for f in 0..c.num_faces() {
            let e = c.edge_index(c.dual_coord(c.face_coord(f)));
            // Incidence face-in-cube maps to edge-in-dual-cube.
            for q in c.face_cubes(f) {
                let dq = c.cube_index(Sector::Dual, c.dual_coord(c.cube_coord(Sector::Primal, q)));
                assert!(c.edge_dual_cubes(e).contains(&dq));
            }
            // Dual of the dual is the primal complex translated by (2,2,2),
            // which is an automorphism of the cell classification.
            let back = c.dual_coord(c.edge_coord(e));
            assert_eq!(back, c.translate(c.face_coord(f), [2, 2, 2]));
            assert_eq!(c.face_index(c.translate(back, [c.side() - 2; 3])), f);
        }
    }

    #[test]
    fn empty_and_logical_windings() {
        let c = RhgComplex::new(3).unwrap();
        assert_eq!(c.homology_winding(&ErrorChain::new(&c)).unwrap(), HomologyClass::TRIVIAL);
        for sector in [Sector::Primal, Sector::Dual] {
            for axis in 0..3 {
                let l = c.logical(sector, axis);
                assert_eq!(l.weight(), 3);
                assert_eq!(c.homology_winding(&l).unwrap(), HomologyClass::single(sector, axis));
                let twice = l.symmetric_difference(&c.logical(sector, axis));
                assert!(c.homology_winding(&twice).unwrap().is_trivial());
            }
        }
    }

    #[test]
    fn single_cube_shell_has_six_neighbour_defects() {
        let c = RhgComplex::new(3).unwrap();
        let q = 5;
        let shell = ErrorChain {
            primal: BitSet::from_indices(c.num_faces(), c.cube_faces(q)),
            dual: BitSet::new(c.num_edges()),
        };
        let s = c.syndrome(&shell).unwrap();
        assert_eq!(s.primal.count_ones(), 6);
        assert!(!s.primal.get(q));
    }

    #[test]
    fn plaquette_loops_are_trivial_cycles() {
        let c = RhgComplex::new(3).unwrap();
        for k in 0..c.num_faces() {
            for chain in [c.primal_plaquette_loop(k), c.dual_plaquette_loop(k)] {
                assert!(c.syndrome(&chain).unwrap().is_empty());
                assert!(c.homology_winding(&chain).unwrap().is_trivial());
            }
        }
    }

    #[test]
    fn non_cycle_rejected() {
        let c = RhgComplex::new(2).unwrap();
        let chain = ErrorChain::from_qubits(&c, [0]);
        assert_eq!(c.homology_winding(&chain), Err(Error::NotACycle(2)));
        let s = c.syndrome(&chain).unwrap();
        let expect = c.face_cubes(0);
        assert_eq!(s.defects(Sector::Primal), {
            let mut v = expect.to_vec();
            v.sort();
            v
        });
    }

    #[test]
    fn cube_distance_is_periodic() {
        let c = RhgComplex::new(4).unwrap();
        let a = c.cube_index(Sector::Primal, [1, 1, 1]);
        let b = c.cube_index(Sector::Primal, [7, 3, 1]);
        // x: |0 - 3| = 3 -> min(3, 1) = 1; y: 1.
        assert_eq!(c.cube_distance(a, b), 2);
    }

    fn random_cycle(c: &RhgComplex, gens: &[(bool, usize)], logicals: u8) -> ErrorChain {
        let mut chain = ErrorChain::new(c);
        for &(primal, k) in gens {
            let k = k % c.num_faces();
            let g = if primal {
                c.primal_plaquette_loop(k)
            } else {
                c.dual_plaquette_loop(k)
            };
            chain.xor_with(&g);
        }
        for bit in 0..6 {
            if logicals >> bit & 1 == 1 {
                let sector = if bit < 3 { Sector::Primal } else { Sector::Dual };
                chain.xor_with(&c.logical(sector, bit % 3));
            }
        }
        chain
    }

    proptest! {
        #[test]
        fn winding_is_z2_linear(
            n in 2usize..5,
            ga in proptest::collection::vec((any::<bool>(), 0usize..10_000), 0..12),
            gb in proptest::collection::vec((any::<bool>(), 0usize..10_000), 0..12),
            la in 0u8..64,
            lb in 0u8..64,
        ) {
            let c = RhgComplex::new(n).unwrap();
            let a = random_cycle(&c, &ga, la);
            let b = random_cycle(&c, &gb, lb);
            let wa = c.homology_winding(&a).unwrap();
            let wb = c.homology_winding(&b).unwrap();
            prop_assert_eq!(wa, HomologyClass(la));
            prop_assert_eq!(c.homology_winding(&a.symmetric_difference(&b)).unwrap(), wa ^ wb);
        }

        #[test]
        fn syndrome_is_linear(
            a in proptest::collection::btree_set(0usize..162, 0..30),
            b in proptest::collection::btree_set(0usize..162, 0..30),
        ) {
            let c = RhgComplex::new(3).unwrap();
            let ca = ErrorChain::from_qubits(&c, a.iter().copied());
            let cb = ErrorChain::from_qubits(&c, b.iter().copied());
            let mut sa = c.syndrome(&ca).unwrap();
            sa.xor_with(&c.syndrome(&cb).unwrap());
            prop_assert_eq!(c.syndrome(&ca.symmetric_difference(&cb)).unwrap(), sa);
        }

        #[test]
        fn translation_preserves_incidence(n in 2usize..5, dx in 0usize..4, dy in 0usize..4, dz in 0usize..4) {
            let c = RhgComplex::new(n).unwrap();
            let d = [2 * dx, 2 * dy, 2 * dz];
            for f in 0..c.num_faces() {
                let tf = c.face_index(c.translate(c.face_coord(f), d));
                let mut a: Vec<usize> = c.face_edges(f).iter()
                    .map(|&e| c.edge_index(c.translate(c.edge_coord(e), d))).collect();
                let mut b = c.face_edges(tf).to_vec();
                a.sort();
                b.sort();
                prop_assert_eq!(a, b);
            }
        }
    }
}
