//! Induced-subgraph detection for the fixed forbidden patterns, hole
//! enumeration, and the derived membership profile.
//!
//! Class membership is defined by absence of induced copies: `in_class`
//! means (2P3,C4,C6)-free, `in_class_57` additionally C7- and T0-free.

use serde::Serialize;

use crate::graph::{Graph, VertexSet};

/// The eight fixed patterns the profile tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    FourK1,
    TwoP3,
    C4,
    C6,
    C7,
    ThreePentagon,
    T0,
    T1,
}

pub const ALL_PATTERNS: [Pattern; 8] = [
    Pattern::FourK1,
    Pattern::C4,
    Pattern::TwoP3,
    Pattern::C6,
    Pattern::C7,
    Pattern::ThreePentagon,
    Pattern::T0,
    Pattern::T1,
];

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::FourK1 => "4K1",
            Pattern::TwoP3 => "2P3",
            Pattern::C4 => "C4",
            Pattern::C6 => "C6",
            Pattern::C7 => "C7",
            Pattern::ThreePentagon => "3-pentagon",
            Pattern::T0 => "T0",
            Pattern::T1 => "T1",
        }
    }

    pub fn graph(self) -> Graph {
        match self {
            Pattern::FourK1 => Graph::empty(4),
            Pattern::TwoP3 => Graph::from_edge_list(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap(),
            Pattern::C4 => Graph::cycle(4),
            Pattern::C6 => Graph::cycle(6),
            Pattern::C7 => Graph::cycle(7),
            Pattern::ThreePentagon => three_pentagon(),
            Pattern::T0 => t0(),
            Pattern::T1 => t1(),
        }
    }
}

/// The 3-pentagon: apex 0, stable set {1,2,3}, triangle {4,5,6}, i+3 matched to i.
pub fn three_pentagon() -> Graph {
    Graph::from_edge_list(
        7,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (1, 4),
            (2, 5),
            (3, 6),
            (4, 5),
            (4, 6),
            (5, 6),
        ],
    )
    .unwrap()
}

/// T0: the nine-vertex graph in which all holes have length five.
/// Vertices: a0=0, a1=1 (adjacent pair), b0..b3=2..5 (stable), c1..c3=6..8
/// (triangle); a0~{b0,b2,b3}, a1~{b1,b2,b3}; c1~{b0,b1}, c2~b2, c3~b3.
pub fn t0() -> Graph {
    Graph::from_edge_list(
        9,
        &[
            (0, 1),
            (0, 2),
            (0, 4),
            (0, 5),
            (1, 3),
            (1, 4),
            (1, 5),
            (2, 6),
            (3, 6),
            (4, 7),
            (5, 8),
            (6, 7),
            (6, 8),
            (7, 8),
        ],
    )
    .unwrap()
}

/// T1: T0 extended by one vertex adjacent to {a0, a1, b0, b1, b2, c1, c2}.
/// This is the unique one-vertex extension of T0 that is (2P3,C4,C6)-free,
/// twin-free, anticonnected, and has no simplicial vertices.
pub fn t1() -> Graph {
    let mut edges = t0().edges();
    for v in [0, 1, 2, 3, 4, 6, 7] {
        edges.push((9, v));
    }
    Graph::from_edge_list(10, &edges).unwrap()
}

/// An injective, induced embedding of a pattern into a host: `map[p]` is the
/// host vertex playing pattern vertex `p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    /// Check the induced condition against the given pair of graphs.
    pub fn verify(&self, host: &Graph, pattern: &Graph) -> bool {
        if self.map.len() != pattern.n() {
            return false;
        }
        let mut seen = VertexSet::new(host.n());
        for &h in &self.map {
            if h >= host.n() || seen.contains(h) {
                return false;
            }
            seen.insert(h);
        }
        for u in 0..pattern.n() {
            for v in u + 1..pattern.n() {
                if pattern.has_edge(u, v) != host.has_edge(self.map[u], self.map[v]) {
                    return false;
                }
            }
        }
        true
    }
}

/// Find an induced copy of `pattern` in `host`, if any. Backtracking with
/// bitset candidate refinement: each new pattern vertex's candidates are cut
/// down by the neighborhoods (or non-neighborhoods) of the placed vertices.
pub fn find_induced(host: &Graph, pattern: &Graph) -> Option<Embedding> {
    let np = pattern.n();
    if np > host.n() {
        return None;
    }
    if np == 0 {
        return Some(Embedding { map: vec![] });
    }
    // placement order: most-constrained-first
    let mut order = Vec::with_capacity(np);
    let mut placed = VertexSet::new(np);
    for _ in 0..np {
        let v = (0..np)
            .filter(|&v| !placed.contains(v))
            .max_by_key(|&v| {
                let back = pattern.neighbors(v).intersection(&placed).len();
                (back, pattern.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        order.push(v);
        placed.insert(v);
    }
    let mut map = vec![usize::MAX; np];
    let mut used = VertexSet::new(host.n());
    if induced_backtrack(host, pattern, &order, 0, &mut map, &mut used) {
        Some(Embedding { map })
    } else {
        None
    }
}

fn induced_backtrack(
    host: &Graph,
    pattern: &Graph,
    order: &[usize],
    k: usize,
    map: &mut Vec<usize>,
    used: &mut VertexSet,
) -> bool {
    if k == order.len() {
        return true;
    }
    let p = order[k];
    let mut cand = host.vertex_set();
    cand.difference_with(used);
    for &q in &order[..k] {
        if pattern.has_edge(p, q) {
            cand.intersect_with(host.neighbors(map[q]));
        } else {
            cand.difference_with(host.neighbors(map[q]));
        }
    }
    let pdeg = pattern.degree(p);
    for x in cand.iter() {
        if host.degree(x) < pdeg {
            continue;
        }
        map[p] = x;
        used.insert(x);
        if induced_backtrack(host, pattern, order, k + 1, map, used) {
            return true;
        }
        used.remove(x);
        map[p] = usize::MAX;
    }
    false
}

/// Per-pattern witnesses plus the derived membership flags.
#[derive(Clone, Debug)]
pub struct ForbiddenProfile {
    pub witnesses: Vec<(Pattern, Option<Embedding>)>,
    pub in_class: bool,
    pub in_class_57: bool,
}

impl ForbiddenProfile {
    pub fn witness(&self, p: Pattern) -> Option<&Embedding> {
        self.witnesses
            .iter()
            .find(|(q, _)| *q == p)
            .and_then(|(_, e)| e.as_ref())
    }

    pub fn has(&self, p: Pattern) -> bool {
        self.witness(p).is_some()
    }

    pub fn to_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        for (p, e) in &self.witnesses {
            obj.insert(
                p.name().to_string(),
                match e {
                    Some(emb) => serde_json::to_value(&emb.map).unwrap(),
                    None => serde_json::Value::Null,
                },
            );
        }
        obj.insert("in_class".into(), self.in_class.into());
        obj.insert("in_class_57".into(), self.in_class_57.into());
        serde_json::Value::Object(obj).to_string()
    }
}

/// Search all eight patterns (ascending vertex count; never short-circuits).
pub fn forbidden_profile(g: &Graph) -> ForbiddenProfile {
    let witnesses: Vec<(Pattern, Option<Embedding>)> = ALL_PATTERNS
        .iter()
        .map(|&p| (p, find_induced(g, &p.graph())))
        .collect();
    let absent = |p: Pattern| {
        witnesses
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, e)| e.is_none())
            .unwrap()
    };
    let in_class = absent(Pattern::TwoP3) && absent(Pattern::C4) && absent(Pattern::C6);
    let in_class_57 = in_class && absent(Pattern::C7) && absent(Pattern::T0);
    ForbiddenProfile {
        witnesses,
        in_class,
        in_class_57,
    }
}

/// Enumerate all holes (chordless cycles) of length 4..=max_len, one
/// representative per rotation/reflection class. Each hole is returned as its
/// vertex cycle starting at its least vertex, second vertex smaller than last.
pub fn holes(g: &Graph, max_len: usize) -> Vec<Vec<usize>> {
    assert!(max_len >= 4, "max_len must be at least 4");
    let mut out = Vec::new();
    let mut path = Vec::new();
    for start in 0..g.n() {
        path.push(start);
        let mut on_path = VertexSet::new(g.n());
        on_path.insert(start);
        extend_hole(g, start, max_len, &mut path, &mut on_path, &mut out);
        path.pop();
    }
    out
}

fn extend_hole(
    g: &Graph,
    start: usize,
    max_len: usize,
    path: &mut Vec<usize>,
    on_path: &mut VertexSet,
    out: &mut Vec<Vec<usize>>,
) {
    let last = *path.last().unwrap();
    let first_step = path.len() == 1;
    for w in g.neighbors(last).iter() {
        if w <= start || on_path.contains(w) {
            continue;
        }
        if first_step {
            // second cycle vertex; its adjacency to the start is the cycle edge
            path.push(w);
            on_path.insert(w);
            extend_hole(g, start, max_len, path, on_path, out);
            on_path.remove(w);
            path.pop();
            continue;
        }
        // interior vertices must be nonadjacent to everything on the path
        // except `last`; adjacency to the start closes a cycle
        let mut chord = false;
        for &p in &path[1..path.len() - 1] {
            if g.has_edge(w, p) {
                chord = true;
                break;
            }
        }
        if chord {
            continue;
        }
        if g.has_edge(w, start) {
            if path.len() >= 3 && path[1] < w {
                let mut hole = path.clone();
                hole.push(w);
                out.push(hole);
            }
            continue;
        }
        if path.len() + 1 < max_len {
            path.push(w);
            on_path.insert(w);
            extend_hole(g, start, max_len, path, on_path, out);
            on_path.remove(w);
            path.pop();
        }
    }
}

/// Chordality via repeated simplicial deletion.
pub fn is_chordal(g: &Graph) -> bool {
    let mut alive = g.vertex_set();
    loop {
        if alive.is_empty() {
            return true;
        }
        let mut progressed = false;
        for v in alive.clone().iter() {
            let nb = g.neighbors(v).intersection(&alive);
            if nb
                .iter()
                .all(|u| nb.difference(&g.closed_neighborhood(u)).is_empty())
            {
                alive.remove(v);
                progressed = true;
            }
        }
        if !progressed {
            return false;
        }
    }
}

/// Largest t >= 3 such that the host contains an induced t-pentagon, with a
/// witness embedding laid out as (apex; b_1..b_t; c_1..c_t).
///
/// Searches over apex choices, growing (b, c) pairs with b-ids ascending;
/// pruned by a cheap bound on how many pairs can still be added.
pub fn largest_pentagon_t(g: &Graph) -> Option<(usize, Embedding)> {
    let mut best: Option<PentagonWitness> = None;
    for apex in 0..g.n() {
        let b_pool = g.neighbors(apex).clone();
        let mut c_pool = g.vertex_set();
        c_pool.difference_with(g.neighbors(apex));
        c_pool.remove(apex);
        let mut bs = Vec::new();
        let mut cs = Vec::new();
        pentagon_grow(g, apex, &b_pool, &c_pool, &mut bs, &mut cs, &mut best);
    }
    let w = best?;
    let t = w.bs.len();
    // pentagon layout: apex 0, b_i = 1..=t, c_i = t+1..=2t
    let mut map = Vec::with_capacity(2 * t + 1);
    map.push(w.apex);
    map.extend(&w.bs);
    map.extend(&w.cs);
    let emb = Embedding { map };
    debug_assert!(emb.verify(g, &crate::families::pentagon(t).unwrap()));
    Some((t, emb))
}

struct PentagonWitness {
    apex: usize,
    bs: Vec<usize>,
    cs: Vec<usize>,
}

fn pentagon_grow(
    g: &Graph,
    apex: usize,
    b_pool: &VertexSet,
    c_pool: &VertexSet,
    bs: &mut Vec<usize>,
    cs: &mut Vec<usize>,
    best: &mut Option<PentagonWitness>,
) {
    let t = bs.len();
    if t >= 3 && best.as_ref().map_or(true, |w| t > w.bs.len()) {
        *best = Some(PentagonWitness {
            apex,
            bs: bs.clone(),
            cs: cs.clone(),
        });
    }
    // bound: each further pair consumes one b and one c candidate
    let bound = t + b_pool.len().min(c_pool.len());
    if bound <= best.as_ref().map_or(2, |w| w.bs.len()) {
        return;
    }
    let min_b = bs.last().map_or(0, |&b| b + 1);
    for b in b_pool.iter() {
        if b < min_b {
            continue;
        }
        // pools already enforce: b nonadjacent to chosen b's and c's,
        // c nonadjacent to chosen b's, adjacent to chosen c's
        let c_cand = c_pool.intersection(g.neighbors(b));
        if c_cand.is_empty() {
            continue;
        }
        let mut b_rest = b_pool.clone();
        b_rest.difference_with(g.neighbors(b));
        b_rest.remove(b);
        for c in c_cand.iter() {
            let mut b_next = b_rest.clone();
            b_next.difference_with(g.neighbors(c));
            let mut c_next = c_pool.clone();
            c_next.difference_with(g.neighbors(b));
            c_next.intersect_with(g.neighbors(c));
            c_next.remove(c);
            bs.push(b);
            cs.push(c);
            pentagon_grow(g, apex, &b_next, &c_next, bs, cs, best);
            bs.pop();
            cs.pop();
        }
    }
}

/// Sufficient condition for T0-freeness: the set S of vertices with three
/// pairwise nonadjacent neighbors is a clique. True implies T0-free; false
/// is inconclusive.
pub fn t0_precheck(g: &Graph) -> bool {
    let mut s = VertexSet::new(g.n());
    for v in 0..g.n() {
        if has_stable_triple(g, g.neighbors(v)) {
            s.insert(v);
        }
    }
    g.is_clique(&s)
}

fn has_stable_triple(g: &Graph, set: &VertexSet) -> bool {
    let members = set.to_vec();
    for (i, &a) in members.iter().enumerate() {
        for (j, &b) in members.iter().enumerate().skip(i + 1) {
            if g.has_edge(a, b) {
                continue;
            }
            for &c in members.iter().skip(j + 1) {
                if !g.has_edge(a, c) && !g.has_edge(b, c) {
                    return true;
                }
            }
        }
    }
    false
}
