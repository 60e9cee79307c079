//! Simple undirected graphs over dense vertex ids `0..n`, with bitset
//! adjacency rows. Everything downstream (pattern search, generators,
//! recognition) works on this representation.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for n = {n}")]
    OutOfRange { vertex: usize, n: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A set of vertex ids drawn from a fixed universe `0..universe`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    universe: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        VertexSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for v in 0..universe {
            s.insert(v);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(universe: usize, it: I) -> Self {
        let mut s = Self::new(universe);
        for v in it {
            s.insert(v);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.universe);
        self.words[v / 64] |= 1u64 << (v % 64);
    }

    pub fn remove(&mut self, v: usize) {
        debug_assert!(v < self.universe);
        self.words[v / 64] &= !(1u64 << (v % 64));
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.universe && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        for (i, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(i * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> VertexSetIter<'_> {
        VertexSetIter {
            set: self,
            word: 0,
            bits: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct VertexSetIter<'a> {
    set: &'a VertexSet,
    word: usize,
    bits: u64,
}

impl Iterator for VertexSetIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let b = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some(self.word * 64 + b);
            }
            self.word += 1;
            if self.word >= self.set.words.len() {
                return None;
            }
            self.bits = self.set.words[self.word];
        }
    }
}

/// An ordered sequence of pairwise-disjoint vertex sets. Blocks may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<VertexSet>,
}

impl Partition {
    /// True when the blocks are pairwise disjoint and cover exactly `ground`.
    pub fn partitions(&self, ground: &VertexSet) -> bool {
        let mut seen = VertexSet::new(ground.universe());
        for b in &self.blocks {
            if !seen.is_disjoint(b) {
                return false;
            }
            seen.union_with(b);
        }
        seen == *ground
    }
}

/// Immutable simple undirected graph. Vertex ids are exactly `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    rows: Vec<VertexSet>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn from_edge_list(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut rows = vec![VertexSet::new(n); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::OutOfRange { vertex: u, n });
            }
            if v >= n {
                return Err(GraphError::OutOfRange { vertex: v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            rows[u].insert(v);
            rows[v].insert(u);
        }
        Ok(Graph { n, rows })
    }

    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            rows: vec![VertexSet::new(n); n],
        }
    }

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.rows[u].insert(v);
                g.rows[v].insert(u);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edge_list(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Graph::from_edge_list(n, &edges).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.rows[v]
    }

    pub fn closed_neighborhood(&self, v: usize) -> VertexSet {
        let mut s = self.rows[v].clone();
        s.insert(v);
        s
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rows[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in self.rows[u].iter() {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn vertex_set(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    g.rows[u].insert(v);
                    g.rows[v].insert(u);
                }
            }
        }
        g
    }

    /// Induced subgraph on `set`, plus the map from new ids back to old ids.
    pub fn induced(&self, set: &VertexSet) -> (Graph, Vec<usize>) {
        let map: Vec<usize> = set.iter().collect();
        let mut inv = vec![usize::MAX; self.n];
        for (new, &old) in map.iter().enumerate() {
            inv[old] = new;
        }
        let mut g = Graph::empty(map.len());
        for (new, &old) in map.iter().enumerate() {
            for w in self.rows[old].intersection(set).iter() {
                g.rows[new].insert(inv[w]);
            }
        }
        (g, map)
    }

    pub fn is_clique(&self, set: &VertexSet) -> bool {
        set.iter().all(|u| {
            let mut rest = set.clone();
            rest.remove(u);
            rest.is_subset_of(&self.rows[u])
        })
    }

    pub fn is_stable_set(&self, set: &VertexSet) -> bool {
        set.iter().all(|u| set.is_disjoint(&self.rows[u]))
    }

    /// True when `a` is complete to `b` (disjoint sets assumed).
    pub fn is_complete_between(&self, a: &VertexSet, b: &VertexSet) -> bool {
        a.iter().all(|u| b.is_subset_of(&self.rows[u]))
    }

    pub fn is_anticomplete_between(&self, a: &VertexSet, b: &VertexSet) -> bool {
        a.iter().all(|u| b.is_disjoint(&self.rows[u]))
    }

    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = VertexSet::new(self.n);
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen.contains(start) {
                continue;
            }
            let mut comp = VertexSet::new(self.n);
            let mut stack = vec![start];
            comp.insert(start);
            while let Some(v) = stack.pop() {
                for w in self.rows[v].iter() {
                    if !comp.contains(w) {
                        comp.insert(w);
                        stack.push(w);
                    }
                }
            }
            seen.union_with(&comp);
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub fn anticomponents(&self) -> Vec<VertexSet> {
        self.complement().components()
    }

    pub fn is_anticonnected(&self) -> bool {
        self.anticomponents().len() <= 1
    }

    pub fn is_simplicial(&self, v: usize) -> bool {
        self.is_clique(&self.rows[v])
    }

    pub fn simplicial_vertices(&self) -> VertexSet {
        VertexSet::from_iter(self.n, (0..self.n).filter(|&v| self.is_simplicial(v)))
    }

    pub fn universal_vertices(&self) -> VertexSet {
        VertexSet::from_iter(
            self.n,
            (0..self.n).filter(|&v| self.degree(v) == self.n - 1),
        )
    }

    /// Equivalence classes of the closed-neighborhood-equality relation,
    /// ordered by smallest member. Every block is a clique.
    pub fn true_twin_classes(&self) -> Partition {
        let mut blocks: Vec<(VertexSet, VertexSet)> = Vec::new(); // (closed nbhd, class)
        for v in 0..self.n {
            let cn = self.closed_neighborhood(v);
            match blocks.iter_mut().find(|(key, _)| *key == cn) {
                Some((_, class)) => class.insert(v),
                None => {
                    let mut class = VertexSet::new(self.n);
                    class.insert(v);
                    blocks.push((cn, class));
                }
            }
        }
        Partition {
            blocks: blocks.into_iter().map(|(_, c)| c).collect(),
        }
    }

    /// Quotient by true-twin classes. The returned partition's block `i` is the
    /// class that quotient vertex `i` stands for.
    pub fn contract_twins(&self) -> (Graph, Partition) {
        let part = self.true_twin_classes();
        let k = part.blocks.len();
        let reps: Vec<usize> = part.blocks.iter().map(|b| b.first().unwrap()).collect();
        let mut g = Graph::empty(k);
        for i in 0..k {
            for j in i + 1..k {
                if self.has_edge(reps[i], reps[j]) {
                    g.rows[i].insert(j);
                    g.rows[j].insert(i);
                }
            }
        }
        (g, part)
    }

    /// Some clique whose removal disconnects the graph, when one exists.
    /// Returns the empty set when the graph is already disconnected.
    ///
    /// Candidates come from the higher fill-neighborhoods of an MCS-M minimal
    /// elimination ordering; each is verified directly before being returned,
    /// and the theory of clique minimal separators guarantees that if none of
    /// the candidates works, no clique-cutset exists.
    pub fn clique_cutset(&self) -> Option<VertexSet> {
        if self.n == 0 {
            return None;
        }
        if !self.is_connected() {
            return Some(VertexSet::new(self.n));
        }
        let (order, fill_rows) = self.mcs_m();
        let mut rank = vec![0usize; self.n];
        for (pos, &v) in order.iter().enumerate() {
            rank[v] = pos;
        }
        for &v in &order {
            let mut cand = VertexSet::new(self.n);
            for u in fill_rows[v].iter() {
                if rank[u] > rank[v] {
                    cand.insert(u);
                }
            }
            if cand.len() >= self.n - 1 || !self.is_clique(&cand) {
                continue;
            }
            let rest = self.vertex_set().difference(&cand);
            let (sub, _) = self.induced(&rest);
            if !sub.is_connected() {
                return Some(cand);
            }
        }
        None
    }

    /// MCS-M: returns the elimination order (first to eliminate first) and
    /// the adjacency rows of the minimal triangulation.
    fn mcs_m(&self) -> (Vec<usize>, Vec<VertexSet>) {
        let n = self.n;
        let mut weight = vec![0usize; n];
        let mut numbered = VertexSet::new(n);
        let mut fill_rows = self.rows.clone();
        let mut pick_order = Vec::with_capacity(n);
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| !numbered.contains(v))
                .max_by_key(|&v| (weight[v], std::cmp::Reverse(v)))
                .unwrap();
            // u is reached if some v-u path has all internal vertices
            // unnumbered with weight < weight[u]
            let mut reached = VertexSet::new(n);
            for u in 0..n {
                if u == v || numbered.contains(u) || reached.contains(u) {
                    continue;
                }
                if self.has_edge(u, v) {
                    reached.insert(u);
                    continue;
                }
                let mut seen = VertexSet::new(n);
                let mut stack: Vec<usize> = self.rows[v]
                    .iter()
                    .filter(|&x| !numbered.contains(x) && weight[x] < weight[u])
                    .collect();
                for &x in &stack {
                    seen.insert(x);
                }
                let mut hit = false;
                while let Some(x) = stack.pop() {
                    if self.has_edge(x, u) {
                        hit = true;
                        break;
                    }
                    for y in self.rows[x].iter() {
                        if !seen.contains(y)
                            && y != u
                            && !numbered.contains(y)
                            && weight[y] < weight[u]
                        {
                            seen.insert(y);
                            stack.push(y);
                        }
                    }
                }
                if hit {
                    reached.insert(u);
                }
            }
            for u in reached.iter() {
                weight[u] += 1;
                fill_rows[v].insert(u);
                fill_rows[u].insert(v);
            }
            numbered.insert(v);
            pick_order.push(v);
        }
        // vertices are numbered n down to 1 in pick order, so the elimination
        // order (increasing number) is the reverse of the pick order
        pick_order.reverse();
        (pick_order, fill_rows)
    }

    /// Adjacency-preserving bijection from `self` to `other`, if one exists.
    /// Degree and neighbor-degree-multiset pruning plus backtracking; meant
    /// for small graphs.
    pub fn is_isomorphic(&self, other: &Graph) -> Option<Vec<usize>> {
        if self.n != other.n || self.edge_count() != other.edge_count() {
            return None;
        }
        let sig = |g: &Graph, v: usize| {
            let mut nd: Vec<usize> = g.rows[v].iter().map(|u| g.degree(u)).collect();
            nd.sort_unstable();
            (g.degree(v), nd)
        };
        let sig_a: Vec<_> = (0..self.n).map(|v| sig(self, v)).collect();
        let sig_b: Vec<_> = (0..self.n).map(|v| sig(other, v)).collect();
        let mut sa = sig_a.clone();
        let mut sb = sig_b.clone();
        sa.sort();
        sb.sort();
        if sa != sb {
            return None;
        }
        // order: most-constrained first (max degree, then adjacency to placed)
        let mut order: Vec<usize> = Vec::with_capacity(self.n);
        let mut placed = VertexSet::new(self.n);
        for _ in 0..self.n {
            let v = (0..self.n)
                .filter(|&v| !placed.contains(v))
                .max_by_key(|&v| {
                    let back = self.rows[v].intersection(&placed).len();
                    (back, self.degree(v), std::cmp::Reverse(v))
                })
                .unwrap();
            order.push(v);
            placed.insert(v);
        }
        let mut map = vec![usize::MAX; self.n];
        let mut used = VertexSet::new(self.n);
        if self.iso_backtrack(other, &sig_a, &sig_b, &order, 0, &mut map, &mut used) {
            Some(map)
        } else {
            None
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn iso_backtrack(
        &self,
        other: &Graph,
        sig_a: &[(usize, Vec<usize>)],
        sig_b: &[(usize, Vec<usize>)],
        order: &[usize],
        k: usize,
        map: &mut Vec<usize>,
        used: &mut VertexSet,
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let v = order[k];
        'cand: for c in 0..other.n {
            if used.contains(c) || sig_a[v] != sig_b[c] {
                continue;
            }
            for &p in &order[..k] {
                if self.has_edge(v, p) != other.has_edge(c, map[p]) {
                    continue 'cand;
                }
            }
            map[v] = c;
            used.insert(c);
            if self.iso_backtrack(other, sig_a, sig_b, order, k + 1, map, used) {
                return true;
            }
            used.remove(c);
            map[v] = usize::MAX;
        }
        false
    }

    /// Text format: `p <n>` header, one `e <u> <v>` line per edge, `#` comments.
    pub fn to_text(&self) -> String {
        let mut s = format!("p {}\n", self.n);
        for (u, v) in self.edges() {
            s.push_str(&format!("e {} {}\n", u, v));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Graph, GraphError> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("p") => {
                    if n.is_some() {
                        return Err(GraphError::Parse {
                            line: lineno,
                            msg: "duplicate p line".into(),
                        });
                    }
                    let val = parts.next().ok_or_else(|| GraphError::Parse {
                        line: lineno,
                        msg: "p line missing vertex count".into(),
                    })?;
                    n = Some(val.parse().map_err(|_| GraphError::Parse {
                        line: lineno,
                        msg: format!("bad vertex count '{}'", val),
                    })?);
                }
                Some("e") => {
                    let u: usize = parse_field(parts.next(), lineno)?;
                    let v: usize = parse_field(parts.next(), lineno)?;
                    edges.push((u, v));
                }
                Some(tok) => {
                    return Err(GraphError::Parse {
                        line: lineno,
                        msg: format!("unknown line kind '{}'", tok),
                    })
                }
                None => {}
            }
        }
        let n = n.ok_or(GraphError::Parse {
            line: 0,
            msg: "missing p line".into(),
        })?;
        Graph::from_edge_list(n, &edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson {
            n: self.n,
            edges: self.edges(),
        })
        .unwrap()
    }

    pub fn from_json(text: &str) -> Result<Graph, GraphError> {
        let parsed: GraphJson = serde_json::from_str(text).map_err(|e| GraphError::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        Graph::from_edge_list(parsed.n, &parsed.edges)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph g {\n");
        for v in 0..self.n {
            s.push_str(&format!("  {};\n", v));
        }
        for (u, v) in self.edges() {
            s.push_str(&format!("  {} -- {};\n", u, v));
        }
        s.push_str("}\n");
        s
    }
}

fn parse_field(tok: Option<&str>, line: usize) -> Result<usize, GraphError> {
    let tok = tok.ok_or_else(|| GraphError::Parse {
        line,
        msg: "e line needs two endpoints".into(),
    })?;
    tok.parse().map_err(|_| GraphError::Parse {
        line,
        msg: format!("bad vertex id '{}'", tok),
    })
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges())
    }
}
