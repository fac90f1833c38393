//! Exact minimum-weight perfect matching.
//!
//! The core is the primal-dual blossom algorithm for maximum-weight matching
//! in general graphs, following J. van Rantwijk's `mwmatching.py` (itself
//! after Galil, "Efficient algorithms for finding maximum matching in
//! graphs", 1986), with integer weights and doubled dual variables so every
//! quantity stays integral. Minimum-weight perfect matching on a complete
//! graph is solved on a sparse nearest-neighbour subgraph and accepted only
//! when the dual solution certifies optimality on every pair.

use alloc::vec;
use alloc::vec::Vec;

/// A perfect matching and its total weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Matched pairs `(i, j)` with `i < j`, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub weight: i64,
}

/// Maximum-weight matching on `nvertex` vertices. With `max_cardinality` the
/// result has maximum weight among maximum-cardinality matchings. Returns the
/// mate of every vertex.
pub fn max_weight_matching(nvertex: usize, edges: &[(usize, usize, i64)], max_cardinality: bool) -> Vec<Option<usize>> {
    let mut b = Blossom::new(nvertex, edges);
    b.solve(max_cardinality);
    b.mates()
}

/// Minimum-weight perfect matching on the given edges, `None` if the graph
/// has no perfect matching.
pub fn min_weight_perfect_matching(nvertex: usize, edges: &[(usize, usize, i64)]) -> Option<Matching> {
    if nvertex % 2 == 1 {
        return None;
    }
    if nvertex == 0 {
        return Some(Matching {
            pairs: Vec::new(),
            weight: 0,
        });
    }
    let cap = edges.iter().map(|e| e.2).max().unwrap_or(0) + 1;
    let flipped: Vec<(usize, usize, i64)> = edges.iter().map(|&(i, j, w)| (i, j, cap - w)).collect();
    let mut b = Blossom::new(nvertex, &flipped);
    b.solve(true);
    collect(&b.mates(), |i, j| {
        edges
            .iter()
            .filter(|e| (e.0 == i && e.1 == j) || (e.0 == j && e.1 == i))
            .map(|e| e.2)
            .min()
            .unwrap()
    })
}

/// Minimum-weight perfect matching of the complete graph on `n` vertices
/// with non-negative weights `dist(i, j) ≤ max_dist`.
///
/// Starts from the `k` nearest neighbours of every vertex (ties by index),
/// adds every pair whose reduced cost is negative under the returned duals,
/// and repeats until the duals certify the matching on all pairs.
pub fn min_weight_perfect_matching_complete(
    n: usize,
    k: usize,
    max_dist: i64,
    dist: impl Fn(usize, usize) -> i64,
) -> Option<Matching> {
    if n % 2 == 1 {
        return None;
    }
    if n == 0 {
        return Some(Matching {
            pairs: Vec::new(),
            weight: 0,
        });
    }
    let cap = max_dist + 1;
    let mut k = k.max(1).min(n - 1);
    let mut pairs = nearest_pairs(n, k, &dist);
    loop {
        let edges = sorted_edges(&pairs, &dist, cap);
        let mut b = Blossom::new(n, &edges);
        b.solve(true);
        let mates = b.mates();
        if mates.iter().any(Option::is_none) {
            // No perfect matching in the subgraph yet.
            k = (2 * k).min(n - 1);
            pairs = nearest_pairs(n, k, &dist);
            continue;
        }
        let violated = b.violated_pairs(|i, j| cap - dist(i, j));
        if violated.is_empty() {
            return collect(&mates, &dist);
        }
        pairs.extend(violated);
        pairs.sort_unstable();
        pairs.dedup();
    }
}

/// Exhaustive minimum over all perfect matchings of the complete graph, by
/// always pairing the lowest unmatched vertex. `None` for odd `n`.
pub fn exhaustive_min_weight(n: usize, dist: impl Fn(usize, usize) -> i64) -> Option<i64> {
    fn rec(free: &mut Vec<usize>, dist: &dyn Fn(usize, usize) -> i64) -> i64 {
        if free.is_empty() {
            return 0;
        }
        let a = free.remove(0);
        let mut best = i64::MAX;
        for idx in 0..free.len() {
            let b = free.remove(idx);
            let w = dist(a, b) + rec(free, dist);
            best = best.min(w);
            free.insert(idx, b);
        }
        free.insert(0, a);
        best
    }
    if n % 2 == 1 {
        return None;
    }
    let mut free: Vec<usize> = (0..n).collect();
    Some(rec(&mut free, &dist))
}

fn collect(mates: &[Option<usize>], weight: impl Fn(usize, usize) -> i64) -> Option<Matching> {
    let mut pairs = Vec::with_capacity(mates.len() / 2);
    let mut total = 0;
    for (i, m) in mates.iter().enumerate() {
        let j = (*m)?;
        if i < j {
            pairs.push((i, j));
            total += weight(i, j);
        }
    }
    Some(Matching { pairs, weight: total })
}

fn nearest_pairs(n: usize, k: usize, dist: &impl Fn(usize, usize) -> i64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * k);
    let mut row: Vec<(i64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        row.clear();
        row.extend((0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)));
        if k < row.len() {
            row.select_nth_unstable(k - 1);
            row.truncate(k);
        }
        pairs.extend(row.iter().map(|&(_, j)| (i.min(j), i.max(j))));
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Edges in `(weight, lower id, higher id)` order, weights flipped to
/// `cap - dist` for the maximisation.
fn sorted_edges(pairs: &[(usize, usize)], dist: &impl Fn(usize, usize) -> i64, cap: i64) -> Vec<(usize, usize, i64)> {
    let mut keyed: Vec<(i64, usize, usize)> = pairs.iter().map(|&(i, j)| (dist(i, j), i, j)).collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(d, i, j)| (i, j, cap - d)).collect()
}

const NONE: isize = -1;

/// State of the primal-dual blossom algorithm. Endpoint `p` of edge `p / 2`
/// is vertex `endpoint[p]`; blossoms are numbered `nv..2nv`.
struct Blossom<'e> {
    nv: usize,
    edges: &'e [(usize, usize, i64)],
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    /// Remote endpoint of the matched edge, or `NONE`.
    mate: Vec<isize>,
    /// 0 free, 1 S, 2 T, 5 S while scanning, -1 retired.
    label: Vec<i8>,
    labelend: Vec<isize>,
    inblossom: Vec<usize>,
    parent: Vec<isize>,
    childs: Vec<Vec<usize>>,
    base: Vec<isize>,
    endps: Vec<Vec<usize>>,
    bestedge: Vec<isize>,
    bestedges: Vec<Option<Vec<usize>>>,
    unused: Vec<usize>,
    /// Doubled dual variables; slack(k) = dual[i] + dual[j] - 2 w.
    dual: Vec<i64>,
    allow: Vec<bool>,
    queue: Vec<usize>,
}

impl<'e> Blossom<'e> {
    fn new(nv: usize, edges: &'e [(usize, usize, i64)]) -> Self {
        let maxweight = edges.iter().map(|e| e.2).max().unwrap_or(0).max(0);
        let mut endpoint = Vec::with_capacity(2 * edges.len());
        let mut neighbend = vec![Vec::new(); nv];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            assert!(i != j && i < nv && j < nv, "invalid edge ({i}, {j})");
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut base: Vec<isize> = (0..nv as isize).collect();
        base.extend(core::iter::repeat(NONE).take(nv));
        let mut dual = vec![maxweight; nv];
        dual.extend(core::iter::repeat(0).take(nv));
        Self {
            nv,
            edges,
            endpoint,
            neighbend,
            mate: vec![NONE; nv],
            label: vec![0; 2 * nv],
            labelend: vec![NONE; 2 * nv],
            inblossom: (0..nv).collect(),
            parent: vec![NONE; 2 * nv],
            childs: vec![Vec::new(); 2 * nv],
            base,
            endps: vec![Vec::new(); 2 * nv],
            bestedge: vec![NONE; 2 * nv],
            bestedges: vec![None; 2 * nv],
            unused: (nv..2 * nv).collect(),
            dual,
            allow: vec![false; edges.len()],
            queue: Vec::new(),
        }
    }

    fn mates(&self) -> Vec<Option<usize>> {
        self.mate
            .iter()
            .map(|&p| (p >= 0).then(|| self.endpoint[p as usize]))
            .collect()
    }

    #[inline]
    fn slack(&self, k: usize) -> i64 {
        let (i, j, w) = self.edges[k];
        self.dual[i] + self.dual[j] - 2 * w
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.nv {
                out.push(t);
            } else {
                stack.extend(self.childs[t].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: i8, p: isize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let leaves = self.leaves(b);
            self.queue.extend(leaves);
        } else {
            let base = self.base[b] as usize;
            let m = self.mate[base];
            debug_assert!(m >= 0);
            self.assign_label(self.endpoint[m as usize], 1, m ^ 1);
        }
    }

    /// Trace back from `v` and `w`; returns the base of a new blossom, or
    /// `NONE` when the paths reach two different roots (augmenting path).
    fn scan_blossom(&mut self, mut v: isize, mut w: isize) -> isize {
        let mut path = Vec::new();
        let mut base = NONE;
        while v != NONE || w != NONE {
            let mut b = self.inblossom[v as usize];
            if self.label[b] & 4 != 0 {
                base = self.base[b];
                break;
            }
            path.push(b);
            self.label[b] = 5;
            if self.labelend[b] == NONE {
                v = NONE;
            } else {
                v = self.endpoint[self.labelend[b] as usize] as isize;
                b = self.inblossom[v as usize];
                v = self.endpoint[self.labelend[b] as usize] as isize;
            }
            if w != NONE {
                core::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unused.pop().expect("blossom slots exhausted");
        self.base[b] = base as isize;
        self.parent[b] = NONE;
        self.parent[bb] = b as isize;
        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.parent[bv] = b as isize;
            path.push(bv);
            endps.push(self.labelend[bv] as usize);
            v = self.endpoint[self.labelend[bv] as usize];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.parent[bw] = b as isize;
            path.push(bw);
            endps.push((self.labelend[bw] ^ 1) as usize);
            w = self.endpoint[self.labelend[bw] as usize];
            bw = self.inblossom[w];
        }
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dual[b] = 0;
        for leaf in self.leaves_of(&path) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }
        let mut bestedgeto = vec![NONE; 2 * self.nv];
        for &sub in &path {
            let lists: Vec<Vec<usize>> = match self.bestedges[sub].take() {
                Some(list) => vec![list],
                None => self
                    .leaves(sub)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|p| p / 2).collect())
                    .collect(),
            };
            for list in lists {
                for kk in list {
                    let (mut i, mut j, _) = self.edges[kk];
                    if self.inblossom[j] == b {
                        core::mem::swap(&mut i, &mut j);
                    }
                    let _ = i;
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(kk) < self.slack(bestedgeto[bj] as usize))
                    {
                        bestedgeto[bj] = kk as isize;
                    }
                }
            }
            self.bestedge[sub] = NONE;
        }
        let best: Vec<usize> = bestedgeto.into_iter().filter(|&k| k != NONE).map(|k| k as usize).collect();
        self.bestedge[b] = NONE;
        for &kk in &best {
            if self.bestedge[b] == NONE || self.slack(kk) < self.slack(self.bestedge[b] as usize) {
                self.bestedge[b] = kk as isize;
            }
        }
        self.bestedges[b] = Some(best);
        self.childs[b] = path;
        self.endps[b] = endps;
    }

    fn leaves_of(&self, subs: &[usize]) -> Vec<usize> {
        subs.iter().flat_map(|&s| self.leaves(s)).collect()
    }

    #[inline]
    fn child(&self, b: usize, j: isize) -> usize {
        let len = self.childs[b].len() as isize;
        self.childs[b][j.rem_euclid(len) as usize]
    }

    #[inline]
    fn endp(&self, b: usize, j: isize) -> usize {
        let len = self.endps[b].len() as isize;
        self.endps[b][j.rem_euclid(len) as usize]
    }

    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        let children = self.childs[b].clone();
        for &s in &children {
            self.parent[s] = NONE;
            if s < self.nv {
                self.inblossom[s] = s;
            } else if endstage && self.dual[s] == 0 {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }
        if !endstage && self.label[b] == 2 {
            let entrychild = self.inblossom[self.endpoint[(self.labelend[b] ^ 1) as usize]];
            let len = children.len() as isize;
            let mut j = children.iter().position(|&c| c == entrychild).unwrap() as isize;
            let (jstep, endptrick): (isize, isize) = if j & 1 == 1 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                let q = self.endp(b, j - endptrick) as isize;
                self.label[self.endpoint[(p ^ 1) as usize]] = 0;
                self.label[self.endpoint[(q ^ endptrick ^ 1) as usize]] = 0;
                self.assign_label(self.endpoint[(p ^ 1) as usize], 2, p);
                self.allow[(q / 2) as usize] = true;
                j += jstep;
                p = self.endp(b, j - endptrick) as isize ^ endptrick;
                self.allow[(p / 2) as usize] = true;
                j += jstep;
            }
            let bv = self.child(b, j);
            let ep = self.endpoint[(p ^ 1) as usize];
            self.label[ep] = 2;
            self.label[bv] = 2;
            self.labelend[ep] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while self.child(b, j) != entrychild {
                let bv = self.child(b, j);
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                if let Some(v) = self.leaves(bv).into_iter().find(|&v| self.label[v] != 0) {
                    self.label[v] = 0;
                    let m = self.mate[self.base[bv] as usize];
                    self.label[self.endpoint[m as usize]] = 0;
                    self.assign_label(v, 2, self.labelend[v]);
                }
                j += jstep;
            }
        }
        self.label[b] = -1;
        self.labelend[b] = NONE;
        self.childs[b] = Vec::new();
        self.endps[b] = Vec::new();
        self.base[b] = NONE;
        self.bestedges[b] = None;
        self.bestedge[b] = NONE;
        self.unused.push(b);
    }

    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.parent[t] != b as isize {
            t = self.parent[t] as usize;
        }
        if t >= self.nv {
            self.augment_blossom(t, v);
        }
        let len = self.childs[b].len() as isize;
        let i = self.childs[b].iter().position(|&c| c == t).unwrap();
        let mut j = i as isize;
        let (jstep, endptrick): (isize, isize) = if j & 1 == 1 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.child(b, j);
            let p = self.endp(b, j - endptrick) as isize ^ endptrick;
            if t >= self.nv {
                self.augment_blossom(t, self.endpoint[p as usize]);
            }
            j += jstep;
            let t = self.child(b, j);
            if t >= self.nv {
                self.augment_blossom(t, self.endpoint[(p ^ 1) as usize]);
            }
            self.mate[self.endpoint[p as usize]] = p ^ 1;
            self.mate[self.endpoint[(p ^ 1) as usize]] = p;
        }
        self.childs[b].rotate_left(i);
        self.endps[b].rotate_left(i);
        self.base[b] = self.base[self.childs[b][0]];
        debug_assert_eq!(self.base[b], v as isize);
    }

    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k as isize + 1), (w, 2 * k as isize)] {
            loop {
                let bs = self.inblossom[s];
                if bs >= self.nv {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs] as usize];
                let bt = self.inblossom[t];
                s = self.endpoint[self.labelend[bt] as usize];
                let j = self.endpoint[(self.labelend[bt] ^ 1) as usize];
                if bt >= self.nv {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self, max_cardinality: bool) {
        let nv = self.nv;
        for _stage in 0..nv {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in nv..2 * nv {
                self.bestedges[b] = None;
            }
            self.allow.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..nv {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while !augmented {
                    let Some(v) = self.queue.pop() else { break };
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0;
                        if !self.allow[k] {
                            kslack = self.slack(k);
                            if kslack <= 0 {
                                self.allow[k] = true;
                            }
                        }
                        let bw = self.inblossom[w];
                        if self.allow[k] {
                            if self.label[bw] == 0 {
                                self.assign_label(w, 2, p as isize ^ 1);
                            } else if self.label[bw] == 1 {
                                let base = self.scan_blossom(v as isize, w as isize);
                                if base >= 0 {
                                    self.add_blossom(base as usize, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                self.label[w] = 2;
                                self.labelend[w] = p as isize ^ 1;
                            }
                        } else if self.label[bw] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b] as usize) {
                                self.bestedge[b] = k as isize;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w] as usize))
                        {
                            self.bestedge[w] = k as isize;
                        }
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment.
                let mut deltatype = 0u8;
                let mut delta = 0i64;
                let mut deltaedge = 0usize;
                let mut deltablossom = 0usize;
                if !max_cardinality {
                    deltatype = 1;
                    delta = self.dual[..nv].iter().copied().min().unwrap();
                }
                for v in 0..nv {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v] as usize);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v] as usize;
                        }
                    }
                }
                for b in 0..2 * nv {
                    if self.parent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE {
                        let kslack = self.slack(self.bestedge[b] as usize);
                        debug_assert_eq!(kslack % 2, 0);
                        let d = kslack / 2;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b] as usize;
                        }
                    }
                }
                for b in nv..2 * nv {
                    if self.base[b] >= 0
                        && self.parent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dual[b] < delta)
                    {
                        delta = self.dual[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    // Maximum cardinality reached; final dual shift.
                    deltatype = 1;
                    delta = self.dual[..nv].iter().copied().min().unwrap().max(0);
                }
                for v in 0..nv {
                    match self.label[self.inblossom[v]] {
                        1 => self.dual[v] -= delta,
                        2 => self.dual[v] += delta,
                        _ => {}
                    }
                }
                for b in nv..2 * nv {
                    if self.base[b] >= 0 && self.parent[b] == NONE {
                        match self.label[b] {
                            1 => self.dual[b] += delta,
                            2 => self.dual[b] -= delta,
                            _ => {}
                        }
                    }
                }
                match deltatype {
                    1 => break,
                    2 => {
                        self.allow[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        self.queue.push(i);
                    }
                    3 => {
                        self.allow[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in nv..2 * nv {
                if self.parent[b] == NONE && self.base[b] >= 0 && self.label[b] == 1 && self.dual[b] == 0 {
                    self.expand_blossom(b, true);
                }
            }
        }
    }

    /// Vertex pairs whose reduced cost under the final duals is negative for
    /// the weights `weight(i, j)`; empty iff the duals certify the matching
    /// on the complete graph.
    fn violated_pairs(&self, weight: impl Fn(usize, usize) -> i64) -> Vec<(usize, usize)> {
        let chains: Vec<Vec<usize>> = (0..self.nv)
            .map(|v| {
                let mut chain = Vec::new();
                let mut t = v as isize;
                while self.parent[t as usize] != NONE {
                    t = self.parent[t as usize];
                    chain.push(t as usize);
                }
                chain.reverse();
                chain
            })
            .collect();
        let mut out = Vec::new();
        for i in 0..self.nv {
            for j in i + 1..self.nv {
                let mut s = self.dual[i] + self.dual[j] - 2 * weight(i, j);
                for (a, b) in chains[i].iter().zip(&chains[j]) {
                    if a != b {
                        break;
                    }
                    s += 2 * self.dual[*a];
                }
                if s < 0 {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{below, stream};

    fn random_points(seed: u64, n: usize, side: i64) -> Vec<(i64, i64)> {
        let mut rng = stream(seed, &[]);
        (0..n)
            .map(|_| (below(&mut rng, side as u64) as i64, below(&mut rng, side as u64) as i64))
            .collect()
    }

    #[test]
    fn textbook_cases() {
        assert_eq!(max_weight_matching(0, &[], false), Vec::<Option<usize>>::new());
        assert_eq!(max_weight_matching(2, &[(0, 1, 1)], false), vec![Some(1), Some(0)]);
        assert_eq!(
            max_weight_matching(4, &[(1, 2, 10), (2, 3, 11)], false),
            vec![None, None, Some(3), Some(2)]
        );
        let path = [(1, 2, 5), (2, 3, 11), (3, 4, 5)];
        assert_eq!(max_weight_matching(5, &path, false), vec![None, None, Some(3), Some(2), None]);
        assert_eq!(max_weight_matching(5, &path, true), vec![None, Some(2), Some(1), Some(4), Some(3)]);
        // Maximum cardinality trades weight for size.
        assert_eq!(
            max_weight_matching(4, &[(0, 1, 2), (0, 2, 1), (1, 2, 1), (2, 3, 5)], true)
                .iter()
                .filter(|m| m.is_some())
                .count(),
            4
        );
    }

    #[test]
    fn blossom_cases() {
        // S-blossom, then augment through it.
        let m = max_weight_matching(5, &[(1, 2, 8), (1, 3, 9), (2, 3, 10), (3, 4, 7)], false);
        assert_eq!(m, vec![None, Some(2), Some(1), Some(4), Some(3)]);
        // Nested blossoms and expansion of a T-blossom.
        let edges = [(1, 2, 19), (1, 3, 20), (1, 8, 8), (2, 3, 25), (2, 4, 18), (3, 5, 18), (4, 5, 13), (4, 7, 7), (5, 6, 7)];
        let m = max_weight_matching(9, &edges, false);
        assert_eq!(m, vec![None, Some(8), Some(3), Some(2), Some(7), Some(6), Some(5), Some(4), Some(1)]);
        // Nasty case from the reference test suite.
        let edges = [
            (1, 2, 45),
            (1, 5, 45),
            (2, 3, 50),
            (3, 4, 45),
            (4, 5, 50),
            (1, 6, 30),
            (3, 9, 35),
            (4, 8, 26),
            (5, 7, 40),
            (9, 10, 5),
        ];
        let m = max_weight_matching(11, &edges, false);
        assert_eq!(m, vec![None, Some(6), Some(3), Some(2), Some(8), Some(7), Some(1), Some(5), Some(4), Some(10), Some(9)]);
        let edges = [
            (1, 2, 40),
            (1, 3, 40),
            (2, 3, 60),
            (2, 4, 55),
            (3, 5, 55),
            (4, 5, 50),
            (1, 8, 15),
            (5, 7, 30),
            (7, 6, 10),
            (8, 10, 10),
            (4, 9, 30),
        ];
        let m = max_weight_matching(11, &edges, false);
        assert_eq!(m, vec![None, Some(2), Some(1), Some(5), Some(9), Some(3), Some(7), Some(6), Some(10), Some(4), Some(8)]);
    }

    fn torus(a: (i64, i64), b: (i64, i64), side: i64) -> i64 {
        let dx = (a.0 - b.0).abs();
        let dy = (a.1 - b.1).abs();
        dx.min(side - dx) + dy.min(side - dy)
    }

    #[test]
    fn matches_exhaustive_oracle() {
        for case in 0..300u64 {
            let n = 2 * (1 + case as usize % 5);
            let pts = random_points(case, n, 7);
            let d = |i: usize, j: usize| torus(pts[i], pts[j], 7);
            let best = exhaustive_min_weight(n, d).unwrap();
            let complete = min_weight_perfect_matching_complete(n, n, 6, d).unwrap();
            assert_eq!(complete.weight, best, "case {case}");
            let sparse = min_weight_perfect_matching_complete(n, 1, 6, d).unwrap();
            assert_eq!(sparse.weight, best, "case {case}");
            let mut seen = vec![false; n];
            for &(i, j) in &sparse.pairs {
                assert!(!seen[i] && !seen[j]);
                seen[i] = true;
                seen[j] = true;
            }
        }
    }

    #[test]
    fn sparse_certificate_equals_dense_run() {
        for case in 0..20u64 {
            let n = 40 + 2 * case as usize;
            let pts = random_points(1000 + case, n, 20);
            let d = |i: usize, j: usize| torus(pts[i], pts[j], 20);
            let mut all = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    all.push((i, j, d(i, j)));
                }
            }
            let dense = min_weight_perfect_matching(n, &all).unwrap();
            let sparse = min_weight_perfect_matching_complete(n, 4, 20, d).unwrap();
            assert_eq!(dense.weight, sparse.weight, "case {case}");
        }
    }

    #[test]
    fn odd_and_empty() {
        assert!(min_weight_perfect_matching_complete(3, 2, 5, |_, _| 1).is_none());
        assert_eq!(min_weight_perfect_matching_complete(0, 2, 5, |_, _| 1).unwrap().weight, 0);
        assert!(exhaustive_min_weight(5, |_, _| 1).is_none());
        // A path graph with no perfect matching.
        assert!(min_weight_perfect_matching(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]).is_none());
    }

    #[test]
    fn random_general_graphs_vs_exhaustive() {
        // Sparse random graphs: compare against brute force over perfect
        // matchings restricted to existing edges.
        for case in 0..200u64 {
            let mut rng = stream(77, &[case]);
            let n = 2 * (2 + below(&mut rng, 4) as usize);
            let mut w = vec![vec![None; n]; n];
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if below(&mut rng, 3) > 0 {
                        let wt = below(&mut rng, 20) as i64;
                        w[i][j] = Some(wt);
                        w[j][i] = Some(wt);
                        edges.push((i, j, wt));
                    }
                }
            }
            let big = 1_000_000;
            let best = exhaustive_min_weight(n, |i, j| w[i][j].unwrap_or(big)).unwrap();
            match min_weight_perfect_matching(n, &edges) {
                Some(m) => assert_eq!(m.weight, best, "case {case}"),
                None => assert!(best >= big, "case {case}"),
            }
        }
    }
}
