//! Parameterized generators for the structured families (pentagons, villas,
//! mansions, 5-baskets, rings, 5-crowns, hyperholes, thickenings) plus the
//! fixed base-graph library used by the thickening branch of recognition.
//!
//! Vertex layout convention (part of the external contract): parts are laid
//! out in definition order as contiguous id blocks, e.g. a villa occupies
//! A, B_1..B_t, C_1..C_t in that order. Certificates reference these ids.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, Partition, VertexSet};
use crate::recognizer::{CertCore, Certificate};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("parameter out of range: {0}")]
    BadParam(String),
    #[error("invalid nested chain: {0}")]
    BadChain(String),
    #[error("size budget {budget} below the family minimum {minimum}")]
    BudgetTooSmall { budget: usize, minimum: usize },
    #[error("unknown base graph '{0}'")]
    UnknownBase(String),
    #[error("constructed graph failed its post-construction check: {0}")]
    PostCheck(String),
}

/// Prefix lengths, one per source-part vertex, describing a nested
/// neighborhood chain into a target part laid out in a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NestedChainSpec {
    pub lengths: Vec<usize>,
}

impl NestedChainSpec {
    pub fn full(source: usize, target: usize) -> Self {
        NestedChainSpec {
            lengths: vec![target; source],
        }
    }

    fn validate(
        &self,
        source: usize,
        target: usize,
        floor: usize,
        label: &str,
    ) -> Result<(), FamilyError> {
        if self.lengths.len() != source {
            return Err(FamilyError::BadChain(format!(
                "{label}: {} entries for a source of size {source}",
                self.lengths.len()
            )));
        }
        if self.lengths[0] != target {
            return Err(FamilyError::BadChain(format!(
                "{label}: first entry {} must equal the full target size {target}",
                self.lengths[0]
            )));
        }
        for w in self.lengths.windows(2) {
            if w[1] > w[0] {
                return Err(FamilyError::BadChain(format!(
                    "{label}: increasing entries"
                )));
            }
        }
        if let Some(&last) = self.lengths.last() {
            if last < floor {
                return Err(FamilyError::BadChain(format!(
                    "{label}: entry {last} below floor {floor}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VillaParams {
    pub t: usize,
    pub a_size: usize,
    pub b_sizes: Vec<usize>,
    pub c_sizes: Vec<usize>,
    /// One chain per i: B_i into C_i, floor 1, first entry full.
    pub chains: Vec<NestedChainSpec>,
}

#[derive(Clone, Debug)]
pub struct MansionParams {
    pub villa: VillaParams,
    pub f_size: usize,
    pub x_size: usize,
    pub y_size: usize,
    /// 0-based index; the chain at j_star must be full (B_{j*} complete to C_{j*}).
    pub j_star: usize,
}

#[derive(Clone, Debug)]
pub struct BasketParams {
    pub a_size: usize,
    pub b_sizes: [usize; 3],
    pub c_sizes: [usize; 3],
    pub f_size: usize,
    pub i_star: usize,
    pub j_star: usize,
    /// Chain A into B_{i*}, floor 0, first entry full.
    pub chain: NestedChainSpec,
}

#[derive(Clone, Debug)]
pub struct RingParams {
    pub k: usize,
    pub sizes: Vec<usize>,
    /// Per part i: prefix reach into X_{i-1}, floor 1, first entry full.
    pub pred_chains: Vec<NestedChainSpec>,
    /// Per part i: prefix reach into X_{i+1}, floor 1, first entry full.
    pub succ_chains: Vec<NestedChainSpec>,
}

#[derive(Clone, Debug)]
pub struct CrownParams {
    /// Ring parameters with k = 5; the two boundaries flanking i_star's
    /// antipode are overridden to complete.
    pub ring: RingParams,
    pub i_star: usize,
}

#[derive(Clone, Debug)]
pub struct ThickeningSpec {
    pub base: Graph,
    pub mult: Vec<usize>,
}

/// Contiguous id blocks for a sequence of part sizes.
fn layout(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut next = 0;
    sizes
        .iter()
        .map(|&s| {
            let block: Vec<usize> = (next..next + s).collect();
            next += s;
            block
        })
        .collect()
}

fn clique_edges(part: &[usize], edges: &mut Vec<(usize, usize)>) {
    for (i, &u) in part.iter().enumerate() {
        for &v in &part[i + 1..] {
            edges.push((u, v));
        }
    }
}

fn complete_between(a: &[usize], b: &[usize], edges: &mut Vec<(usize, usize)>) {
    for &u in a {
        for &v in b {
            edges.push((u, v));
        }
    }
}

/// The t-pentagon: apex complete to the stable set b_1..b_t, clique c_1..c_t,
/// b_i matched to c_i. Ids: apex 0, b_i = i, c_i = t + i.
pub fn pentagon(t: usize) -> Result<Graph, FamilyError> {
    if t < 3 {
        return Err(FamilyError::BadParam(format!(
            "pentagon needs t >= 3, got {t}"
        )));
    }
    let mut edges = Vec::new();
    for i in 1..=t {
        edges.push((0, i));
        edges.push((i, t + i));
    }
    clique_edges(&(t + 1..=2 * t).collect::<Vec<_>>(), &mut edges);
    Graph::from_edge_list(2 * t + 1, &edges).map_err(|e| FamilyError::BadParam(e.to_string()))
}

pub fn villa(p: &VillaParams) -> Result<(Graph, Certificate), FamilyError> {
    if p.t < 3 {
        return Err(FamilyError::BadParam(format!(
            "villa needs t >= 3, got {}",
            p.t
        )));
    }
    if p.a_size == 0 || p.b_sizes.iter().any(|&s| s == 0) || p.c_sizes.iter().any(|&s| s == 0) {
        return Err(FamilyError::BadParam("villa parts must be nonempty".into()));
    }
    if p.b_sizes.len() != p.t || p.c_sizes.len() != p.t || p.chains.len() != p.t {
        return Err(FamilyError::BadParam(
            "villa needs t sizes and chains per side".into(),
        ));
    }
    for i in 0..p.t {
        p.chains[i].validate(p.b_sizes[i], p.c_sizes[i], 1, &format!("villa chain {i}"))?;
    }
    let mut sizes = vec![p.a_size];
    sizes.extend(&p.b_sizes);
    sizes.extend(&p.c_sizes);
    let parts = layout(&sizes);
    let (a, bs, cs) = (&parts[0], &parts[1..=p.t], &parts[p.t + 1..=2 * p.t]);
    let n = p.a_size + p.b_sizes.iter().sum::<usize>() + p.c_sizes.iter().sum::<usize>();

    let mut edges = Vec::new();
    clique_edges(a, &mut edges);
    for b in bs {
        clique_edges(b, &mut edges);
        complete_between(a, b, &mut edges);
    }
    for (i, c) in cs.iter().enumerate() {
        clique_edges(c, &mut edges);
        for c2 in &cs[i + 1..] {
            complete_between(c, c2, &mut edges);
        }
    }
    for i in 0..p.t {
        for (j, &b) in bs[i].iter().enumerate() {
            for &c in &cs[i][..p.chains[i].lengths[j]] {
                edges.push((b, c));
            }
        }
    }
    let g = Graph::from_edge_list(n, &edges).unwrap();
    let cert = Certificate {
        universals: vec![],
        core: CertCore::Villa {
            t: p.t,
            a: a.clone(),
            b: bs.to_vec(),
            c: cs.to_vec(),
        },
    };
    Ok((g, cert))
}

pub fn mansion(p: &MansionParams) -> Result<(Graph, Certificate), FamilyError> {
    if p.f_size == 0 {
        return Err(FamilyError::BadParam("mansion needs a nonempty F".into()));
    }
    if p.j_star >= p.villa.t {
        return Err(FamilyError::BadParam("mansion j_star out of range".into()));
    }
    let t = p.villa.t;
    let full = NestedChainSpec::full(p.villa.b_sizes[p.j_star], p.villa.c_sizes[p.j_star]);
    if p.villa.chains[p.j_star] != full {
        return Err(FamilyError::BadParam(
            "mansion chain at j_star must be full (B_{j*} complete to C_{j*})".into(),
        ));
    }
    let (vg, vcert) = villa(&p.villa)?;
    let vn = vg.n();
    let n = vn + p.f_size + p.x_size + p.y_size;
    let f: Vec<usize> = (vn..vn + p.f_size).collect();
    let x: Vec<usize> = (vn + p.f_size..vn + p.f_size + p.x_size).collect();
    let y: Vec<usize> = (vn + p.f_size + p.x_size..n).collect();
    let (a, bs, cs) = match &vcert.core {
        CertCore::Villa { a, b, c, .. } => (a.clone(), b.clone(), c.clone()),
        _ => unreachable!(),
    };
    let mut edges = vg.edges();
    clique_edges(&f, &mut edges);
    clique_edges(&x, &mut edges);
    clique_edges(&y, &mut edges);
    complete_between(&f, &a, &mut edges);
    for (i, b) in bs.iter().enumerate() {
        if i != p.j_star {
            complete_between(&f, b, &mut edges);
        }
    }
    for (i, c) in cs.iter().enumerate() {
        if i != p.j_star {
            complete_between(&f, c, &mut edges);
        }
        complete_between(&y, c, &mut edges);
    }
    complete_between(&f, &x, &mut edges);
    complete_between(&f, &y, &mut edges);
    complete_between(&x, &a, &mut edges);
    complete_between(&x, &bs[p.j_star], &mut edges);
    let g = Graph::from_edge_list(n, &edges).unwrap();
    let cert = Certificate {
        universals: vec![],
        core: CertCore::Mansion {
            t,
            a,
            b: bs,
            c: cs,
            f,
            x,
            y,
            j_star: p.j_star,
        },
    };
    Ok((g, cert))
}

pub fn basket(p: &BasketParams) -> Result<(Graph, Certificate), FamilyError> {
    if p.a_size == 0 || p.b_sizes.contains(&0) || p.c_sizes.contains(&0) {
        return Err(FamilyError::BadParam(
            "basket parts A, B_i, C_i must be nonempty".into(),
        ));
    }
    if p.i_star >= 3 || p.j_star >= 3 {
        return Err(FamilyError::BadParam(
            "basket indices must be in 0..3".into(),
        ));
    }
    p.chain
        .validate(p.a_size, p.b_sizes[p.i_star], 0, "basket chain A -> B_{i*}")?;
    let sizes = [
        p.a_size,
        p.b_sizes[0],
        p.b_sizes[1],
        p.b_sizes[2],
        p.c_sizes[0],
        p.c_sizes[1],
        p.c_sizes[2],
        p.f_size,
    ];
    let parts = layout(&sizes);
    let (a, bs, cs, f) = (&parts[0], &parts[1..4], &parts[4..7], &parts[7]);
    let n: usize = sizes.iter().sum();

    let mut edges = Vec::new();
    for part in &parts {
        clique_edges(part, &mut edges);
    }
    for (i, c) in cs.iter().enumerate() {
        complete_between(&bs[i], c, &mut edges);
        for c2 in &cs[i + 1..] {
            complete_between(c, c2, &mut edges);
        }
    }
    for (i, b) in bs.iter().enumerate() {
        if i != p.i_star {
            complete_between(a, b, &mut edges);
        }
    }
    for (j, &av) in a.iter().enumerate() {
        for &b in &bs[p.i_star][..p.chain.lengths[j]] {
            edges.push((av, b));
        }
    }
    for (i, b) in bs.iter().enumerate() {
        if i != p.j_star {
            complete_between(f, b, &mut edges);
        }
    }
    for (i, c) in cs.iter().enumerate() {
        if i != p.j_star {
            complete_between(f, c, &mut edges);
        }
    }
    complete_between(f, a, &mut edges);
    let g = Graph::from_edge_list(n, &edges).unwrap();
    let cert = Certificate {
        universals: vec![],
        core: CertCore::Basket {
            a: a.clone(),
            b: bs.to_vec(),
            c: cs.to_vec(),
            f: f.clone(),
            i_star: p.i_star,
            j_star: p.j_star,
        },
    };
    Ok((g, cert))
}

/// Build a ring from per-part orders and two prefix staircases per part.
/// Adjacency across the boundary (i, i+1) is the intersection of the two
/// staircases, which keeps every closed neighborhood chain nested; the ring
/// conditions are re-verified on the result before it is returned.
pub fn ring(p: &RingParams) -> Result<Graph, FamilyError> {
    if p.k < 4 {
        return Err(FamilyError::BadParam(format!(
            "ring needs k >= 4, got {}",
            p.k
        )));
    }
    if p.sizes.len() != p.k || p.pred_chains.len() != p.k || p.succ_chains.len() != p.k {
        return Err(FamilyError::BadParam(
            "ring needs k sizes and chains".into(),
        ));
    }
    if p.sizes.contains(&0) {
        return Err(FamilyError::BadParam("ring parts must be nonempty".into()));
    }
    let k = p.k;
    for i in 0..k {
        let prev = (i + k - 1) % k;
        let next = (i + 1) % k;
        p.pred_chains[i].validate(
            p.sizes[i],
            p.sizes[prev],
            1,
            &format!("ring pred chain {i}"),
        )?;
        p.succ_chains[i].validate(
            p.sizes[i],
            p.sizes[next],
            1,
            &format!("ring succ chain {i}"),
        )?;
    }
    let parts = layout(&p.sizes);
    let n: usize = p.sizes.iter().sum();
    let mut edges = Vec::new();
    for part in &parts {
        clique_edges(part, &mut edges);
    }
    for i in 0..k {
        let next = (i + 1) % k;
        for (j, &u) in parts[i].iter().enumerate() {
            for (l, &v) in parts[next].iter().enumerate() {
                if l < p.succ_chains[i].lengths[j] && j < p.pred_chains[next].lengths[l] {
                    edges.push((u, v));
                }
            }
        }
    }
    let g = Graph::from_edge_list(n, &edges).unwrap();
    let part_refs: Vec<&[usize]> = parts.iter().map(|p| p.as_slice()).collect();
    if !ring_partition_valid(&g, &part_refs) {
        return Err(FamilyError::PostCheck(
            "ring chain condition violated".into(),
        ));
    }
    Ok(g)
}

/// Check the ring conditions for ordered parts: every closed neighborhood
/// stays inside the three-part span, the closed neighborhoods along each
/// part's order form a descending chain, and the first vertex of each part
/// sees the whole span.
pub fn ring_partition_valid(g: &Graph, parts: &[&[usize]]) -> bool {
    let k = parts.len();
    if k < 4 || parts.iter().any(|p| p.is_empty()) {
        return false;
    }
    let mut covered = VertexSet::new(g.n());
    for part in parts {
        for &v in *part {
            if covered.contains(v) {
                return false;
            }
            covered.insert(v);
        }
    }
    if covered != g.vertex_set() {
        return false;
    }
    for i in 0..k {
        let span = VertexSet::from_iter(
            g.n(),
            parts[(i + k - 1) % k]
                .iter()
                .chain(parts[i])
                .chain(parts[(i + 1) % k])
                .copied(),
        );
        let closed: Vec<VertexSet> = parts[i].iter().map(|&v| g.closed_neighborhood(v)).collect();
        let part_set = VertexSet::from_iter(g.n(), parts[i].iter().copied());
        for (j, cn) in closed.iter().enumerate() {
            if !cn.is_subset_of(&span) || !part_set.is_subset_of(cn) {
                return false;
            }
            if j + 1 < closed.len() && !closed[j + 1].is_subset_of(cn) {
                return false;
            }
        }
        if closed[0] != span {
            return false;
        }
    }
    true
}

pub fn crown(p: &CrownParams) -> Result<(Graph, Certificate), FamilyError> {
    if p.ring.k != 5 {
        return Err(FamilyError::BadParam("crown needs k = 5".into()));
    }
    if p.i_star >= 5 {
        return Err(FamilyError::BadParam("crown i_star out of range".into()));
    }
    // force the two boundaries flanking the antipodal arc to be complete:
    // X_{i*-2} -- X_{i*-1} and X_{i*+1} -- X_{i*+2}
    let mut rp = p.ring.clone();
    let sizes = rp.sizes.clone();
    for start in [(p.i_star + 3) % 5, (p.i_star + 1) % 5] {
        let end = (start + 1) % 5;
        rp.succ_chains[start] = NestedChainSpec::full(sizes[start], sizes[end]);
        rp.pred_chains[end] = NestedChainSpec::full(sizes[end], sizes[start]);
    }
    let g = ring(&rp)?;
    let parts = layout(&rp.sizes);
    let cert = Certificate {
        universals: vec![],
        core: CertCore::Crown {
            x: parts,
            i_star: p.i_star,
        },
    };
    Ok((g, cert))
}

/// A k-hyperhole: thickening of C_k, i.e. a ring with full staircases.
pub fn hyperhole(k: usize, sizes: &[usize]) -> Result<Graph, FamilyError> {
    if k < 4 || sizes.len() != k {
        return Err(FamilyError::BadParam("hyperhole needs k >= 4 sizes".into()));
    }
    let pred = (0..k)
        .map(|i| NestedChainSpec::full(sizes[i], sizes[(i + k - 1) % k]))
        .collect();
    let succ = (0..k)
        .map(|i| NestedChainSpec::full(sizes[i], sizes[(i + 1) % k]))
        .collect();
    ring(&RingParams {
        k,
        sizes: sizes.to_vec(),
        pred_chains: pred,
        succ_chains: succ,
    })
}

/// Blow each base vertex up into a clique; complete/anticomplete relations
/// follow the base edges. Block i holds the copies of base vertex i.
pub fn thicken(spec: &ThickeningSpec) -> Result<(Graph, Partition), FamilyError> {
    if spec.mult.len() != spec.base.n() {
        return Err(FamilyError::BadParam(
            "one multiplicity per base vertex".into(),
        ));
    }
    if spec.mult.contains(&0) {
        return Err(FamilyError::BadParam("multiplicities must be >= 1".into()));
    }
    let blocks = layout(&spec.mult);
    let n: usize = spec.mult.iter().sum();
    let mut edges = Vec::new();
    for block in &blocks {
        clique_edges(block, &mut edges);
    }
    for (u, v) in spec.base.edges() {
        complete_between(&blocks[u], &blocks[v], &mut edges);
    }
    let g = Graph::from_edge_list(n, &edges).unwrap();
    let partition = Partition {
        blocks: blocks
            .iter()
            .map(|b| VertexSet::from_iter(n, b.iter().copied()))
            .collect(),
    };
    Ok((g, partition))
}

/// Append m new vertices, each complete to everything else.
pub fn add_universal(g: &Graph, m: usize) -> Graph {
    let n = g.n() + m;
    let mut edges = g.edges();
    for u in g.n()..n {
        for v in 0..u {
            edges.push((v, u));
        }
    }
    Graph::from_edge_list(n, &edges).unwrap()
}

/// The 37 named bases: all 32 induced subgraphs M0 \ S over the five optional
/// vertices, M1, M2, M3, T0, and T1. Checked once at first use: every base
/// must be twin-free and anticonnected, every M-member must contain a C7, and
/// T0/T1 must be C7-free.
pub fn base_library() -> &'static [(String, Graph)] {
    static LIB: OnceLock<Vec<(String, Graph)>> = OnceLock::new();
    LIB.get_or_init(|| {
        let lib = build_base_library();
        for (name, g) in &lib {
            assert_eq!(
                g.true_twin_classes().blocks.len(),
                g.n(),
                "base {name} is not twin-free"
            );
            assert!(g.is_anticonnected(), "base {name} is not anticonnected");
            let has_c7 = crate::patterns::find_induced(g, &Graph::cycle(7)).is_some();
            assert_eq!(
                has_c7,
                name != "T0" && name != "T1",
                "C7 presence wrong for base {name}"
            );
        }
        lib
    })
}

pub fn base_by_name(name: &str) -> Result<&'static Graph, FamilyError> {
    base_library()
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, g)| g)
        .ok_or_else(|| FamilyError::UnknownBase(name.to_string()))
}

fn build_base_library() -> Vec<(String, Graph)> {
    // M0: x0..x6 = 0..6 on a 7-hole, y0=7, y3=8, z0=9, z3=10, z4=11
    let mut m0_edges: Vec<(usize, usize)> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
    let attach = [
        (7, vec![0, 1, 4]),
        (8, vec![3, 4, 0]),
        (9, vec![0, 1, 2, 3, 4]),
        (10, vec![3, 4, 5, 6, 0]),
        (11, vec![4, 5, 6, 0, 1]),
    ];
    for (v, xs) in &attach {
        for &x in xs {
            m0_edges.push((*v, x));
        }
    }
    clique_edges(&[7, 8, 9, 10, 11], &mut m0_edges);
    let m0 = Graph::from_edge_list(12, &m0_edges).unwrap();

    let tokens = ["y0", "y3", "z0", "z3", "z4"];
    let mut lib = Vec::new();
    for k in 0..=5usize {
        for combo in combinations(5, k) {
            let removed: Vec<usize> = combo.iter().map(|&i| 7 + i).collect();
            let keep = VertexSet::from_iter(12, (0..12).filter(|v| !removed.contains(v)));
            let (g, _) = m0.induced(&keep);
            let mut name = String::from("M0");
            for &i in &combo {
                name.push('-');
                name.push_str(tokens[i]);
            }
            lib.push((name, g));
        }
    }

    // M1: 7-hole + y0 ~ {x0,x1,x4} + z2 ~ {x2..x6}; y0, z2 nonadjacent
    let mut m1_edges: Vec<(usize, usize)> = (0..7).map(|i| (i, (i + 1) % 7)).collect();
    for x in [0, 1, 4] {
        m1_edges.push((7, x));
    }
    for x in [2, 3, 4, 5, 6] {
        m1_edges.push((8, x));
    }
    let m1 = Graph::from_edge_list(9, &m1_edges).unwrap();

    // M2 = M1 + z1 ~ {x1..x5, y0, z2}; M3 = M1 + z3 ~ {x3..x6, x0, y0, z2}
    let mut m2_edges = m1.edges();
    for x in [1, 2, 3, 4, 5, 7, 8] {
        m2_edges.push((9, x));
    }
    let m2 = Graph::from_edge_list(10, &m2_edges).unwrap();
    let mut m3_edges = m1.edges();
    for x in [3, 4, 5, 6, 0, 7, 8] {
        m3_edges.push((9, x));
    }
    let m3 = Graph::from_edge_list(10, &m3_edges).unwrap();

    lib.push(("M1".into(), m1));
    lib.push(("M2".into(), m2));
    lib.push(("M3".into(), m3));
    lib.push(("T0".into(), crate::patterns::t0()));
    lib.push(("T1".into(), crate::patterns::t1()));
    lib
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Family selector for seeded random generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyTag {
    Pentagon,
    Basket,
    Villa,
    Mansion,
    Crown,
    Ring,
    Hyperhole,
    Thicken,
    Base(String),
}

impl FamilyTag {
    pub fn parse(s: &str) -> Option<FamilyTag> {
        Some(match s {
            "pentagon" => FamilyTag::Pentagon,
            "basket" => FamilyTag::Basket,
            "villa" => FamilyTag::Villa,
            "mansion" => FamilyTag::Mansion,
            "crown" => FamilyTag::Crown,
            "ring" => FamilyTag::Ring,
            "hyperhole" => FamilyTag::Hyperhole,
            "thicken" => FamilyTag::Thicken,
            _ => FamilyTag::Base(s.strip_prefix("base:")?.to_string()),
        })
    }
}

/// Part sizes >= 1 summing to at most `budget`: the extra mass follows a
/// geometric-ish total (with a per-instance growth rate so small and
/// near-budget instances both occur), spread uniformly over the parts.
fn sample_sizes(rng: &mut ChaCha8Rng, parts: usize, budget: usize) -> Vec<usize> {
    let mut sizes = vec![1usize; parts];
    let mut left = budget.saturating_sub(parts);
    let rate = [0.5, 0.8, 0.95, 0.99][rng.gen_range(0..4)];
    while left > 0 && rng.gen_bool(rate) {
        sizes[rng.gen_range(0..parts)] += 1;
        left -= 1;
    }
    sizes
}

fn sample_chain(
    rng: &mut ChaCha8Rng,
    source: usize,
    target: usize,
    floor: usize,
) -> NestedChainSpec {
    let mut lengths = Vec::with_capacity(source);
    lengths.push(target);
    for j in 1..source {
        let prev = lengths[j - 1];
        lengths.push(rng.gen_range(floor..=prev));
    }
    NestedChainSpec { lengths }
}

fn sample_t(rng: &mut ChaCha8Rng, budget: usize) -> usize {
    let t_max = ((budget - 1) / 2).max(3);
    let mut t = 3;
    while t < t_max && rng.gen_bool(0.3) {
        t += 1;
    }
    t
}

pub fn sample_villa_params(
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Result<VillaParams, FamilyError> {
    sample_villa_params_t(rng, budget, None)
}

pub fn sample_villa_params_t(
    rng: &mut ChaCha8Rng,
    budget: usize,
    t_override: Option<usize>,
) -> Result<VillaParams, FamilyError> {
    if budget < 7 {
        return Err(FamilyError::BudgetTooSmall { budget, minimum: 7 });
    }
    let t = match t_override {
        Some(t) if t < 3 => {
            return Err(FamilyError::BadParam(format!(
                "t must be at least 3, got {t}"
            )))
        }
        Some(t) if 2 * t + 1 > budget => {
            return Err(FamilyError::BudgetTooSmall {
                budget,
                minimum: 2 * t + 1,
            })
        }
        Some(t) => t,
        None => sample_t(rng, budget),
    };
    let sizes = sample_sizes(rng, 2 * t + 1, budget);
    let a_size = sizes[0];
    let b_sizes = sizes[1..=t].to_vec();
    let c_sizes = sizes[t + 1..].to_vec();
    let chains = (0..t)
        .map(|i| sample_chain(rng, b_sizes[i], c_sizes[i], 1))
        .collect();
    Ok(VillaParams {
        t,
        a_size,
        b_sizes,
        c_sizes,
        chains,
    })
}

pub fn sample_mansion_params(
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Result<MansionParams, FamilyError> {
    sample_mansion_params_t(rng, budget, None)
}

pub fn sample_mansion_params_t(
    rng: &mut ChaCha8Rng,
    budget: usize,
    t_override: Option<usize>,
) -> Result<MansionParams, FamilyError> {
    if budget < 8 {
        return Err(FamilyError::BudgetTooSmall { budget, minimum: 8 });
    }
    if let Some(t) = t_override {
        if 2 * t + 2 > budget {
            return Err(FamilyError::BudgetTooSmall {
                budget,
                minimum: 2 * t + 2,
            });
        }
    }
    let mut extra_budget = budget - 7; // keep at least a minimal villa
    let mut take = |rng: &mut ChaCha8Rng, min: usize| {
        let mut v = min;
        while extra_budget > v && rng.gen_bool(0.4) {
            v += 1;
        }
        extra_budget -= v.min(extra_budget);
        v
    };
    let f_size = take(rng, 1);
    let x_size = if rng.gen_bool(0.5) { take(rng, 0) } else { 0 };
    let y_size = if rng.gen_bool(0.5) { take(rng, 0) } else { 0 };
    let mut villa = sample_villa_params_t(rng, budget - f_size - x_size - y_size, t_override)?;
    let j_star = rng.gen_range(0..villa.t);
    villa.chains[j_star] = NestedChainSpec::full(villa.b_sizes[j_star], villa.c_sizes[j_star]);
    Ok(MansionParams {
        villa,
        f_size,
        x_size,
        y_size,
        j_star,
    })
}

pub fn sample_basket_params(
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Result<BasketParams, FamilyError> {
    if budget < 7 {
        return Err(FamilyError::BudgetTooSmall { budget, minimum: 7 });
    }
    let f_size = if budget > 7 && rng.gen_bool(0.6) {
        1 + rng.gen_range(0..(budget - 7).min(3))
    } else {
        0
    };
    let sizes = sample_sizes(rng, 7, budget - f_size);
    let i_star = rng.gen_range(0..3);
    let j_star = rng.gen_range(0..3);
    Ok(BasketParams {
        a_size: sizes[0],
        b_sizes: [sizes[1], sizes[2], sizes[3]],
        c_sizes: [sizes[4], sizes[5], sizes[6]],
        f_size,
        i_star,
        j_star,
        chain: sample_chain(rng, sizes[0], sizes[1 + i_star], 0),
    })
}

pub fn sample_ring_params(
    rng: &mut ChaCha8Rng,
    k: usize,
    budget: usize,
) -> Result<RingParams, FamilyError> {
    if budget < k {
        return Err(FamilyError::BudgetTooSmall { budget, minimum: k });
    }
    let sizes = sample_sizes(rng, k, budget);
    let pred_chains = (0..k)
        .map(|i| sample_chain(rng, sizes[i], sizes[(i + k - 1) % k], 1))
        .collect();
    let succ_chains = (0..k)
        .map(|i| sample_chain(rng, sizes[i], sizes[(i + 1) % k], 1))
        .collect();
    Ok(RingParams {
        k,
        sizes,
        pred_chains,
        succ_chains,
    })
}

pub fn sample_crown_params(
    rng: &mut ChaCha8Rng,
    budget: usize,
) -> Result<CrownParams, FamilyError> {
    if budget < 5 {
        return Err(FamilyError::BudgetTooSmall { budget, minimum: 5 });
    }
    let ring = sample_ring_params(rng, 5, budget)?;
    let i_star = rng.gen_range(0..5);
    Ok(CrownParams { ring, i_star })
}

fn sample_k(
    rng: &mut ChaCha8Rng,
    budget: usize,
    k_override: Option<usize>,
) -> Result<usize, FamilyError> {
    match k_override {
        Some(k) if k < 4 => Err(FamilyError::BadParam(format!(
            "k must be at least 4, got {k}"
        ))),
        Some(k) if k > budget => Err(FamilyError::BudgetTooSmall { budget, minimum: k }),
        Some(k) => Ok(k),
        None => Ok(rng.gen_range(4..=8.min(budget.max(4)))),
    }
}

/// Deterministic-in-seed random member of a family. Certified families carry
/// their construction certificate; rings and hyperholes return none.
pub fn random_member(
    tag: &FamilyTag,
    budget: usize,
    seed: u64,
) -> Result<(Graph, Option<Certificate>), FamilyError> {
    random_member_with(tag, budget, seed, None)
}

/// Like `random_member`, with an optional override for the family's size
/// parameter: t for pentagons, villas, and mansions, k for rings and
/// hyperholes. Other families reject an override.
pub fn random_member_with(
    tag: &FamilyTag,
    budget: usize,
    seed: u64,
    size_param: Option<usize>,
) -> Result<(Graph, Option<Certificate>), FamilyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if size_param.is_some()
        && !matches!(
            tag,
            FamilyTag::Pentagon
                | FamilyTag::Villa
                | FamilyTag::Mansion
                | FamilyTag::Ring
                | FamilyTag::Hyperhole
        )
    {
        return Err(FamilyError::BadParam(format!(
            "size parameter does not apply to {tag:?}"
        )));
    }
    match tag {
        FamilyTag::Pentagon => {
            if budget < 7 {
                return Err(FamilyError::BudgetTooSmall { budget, minimum: 7 });
            }
            let t = match size_param {
                Some(t) if t < 3 => {
                    return Err(FamilyError::BadParam(format!(
                        "t must be at least 3, got {t}"
                    )))
                }
                Some(t) if 2 * t + 1 > budget => {
                    return Err(FamilyError::BudgetTooSmall {
                        budget,
                        minimum: 2 * t + 1,
                    })
                }
                Some(t) => t,
                None => sample_t(&mut rng, budget),
            };
            let g = pentagon(t)?;
            let cert = Certificate {
                universals: vec![],
                core: CertCore::Villa {
                    t,
                    a: vec![0],
                    b: (1..=t).map(|i| vec![i]).collect(),
                    c: (1..=t).map(|i| vec![t + i]).collect(),
                },
            };
            Ok((g, Some(cert)))
        }
        FamilyTag::Villa => {
            let p = sample_villa_params_t(&mut rng, budget, size_param)?;
            let (g, c) = villa(&p)?;
            Ok((g, Some(c)))
        }
        FamilyTag::Mansion => {
            let p = sample_mansion_params_t(&mut rng, budget, size_param)?;
            let (g, c) = mansion(&p)?;
            Ok((g, Some(c)))
        }
        FamilyTag::Basket => {
            let p = sample_basket_params(&mut rng, budget)?;
            let (g, c) = basket(&p)?;
            Ok((g, Some(c)))
        }
        FamilyTag::Crown => {
            let p = sample_crown_params(&mut rng, budget)?;
            let (g, c) = crown(&p)?;
            Ok((g, Some(c)))
        }
        FamilyTag::Ring => {
            let k = sample_k(&mut rng, budget, size_param)?;
            let p = sample_ring_params(&mut rng, k, budget)?;
            Ok((ring(&p)?, None))
        }
        FamilyTag::Hyperhole => {
            let k = sample_k(&mut rng, budget, size_param)?;
            let sizes = sample_sizes(&mut rng, k, budget);
            Ok((hyperhole(k, &sizes)?, None))
        }
        FamilyTag::Thicken => {
            let lib = base_library();
            let (name, base) = &lib[rng.gen_range(0..lib.len())];
            if budget < base.n() {
                return Err(FamilyError::BudgetTooSmall {
                    budget,
                    minimum: base.n(),
                });
            }
            let mut mult = vec![1usize; base.n()];
            let mut left = budget - base.n();
            let rate = [0.5, 0.9, 0.99][rng.gen_range(0..3)];
            while left > 0 && rng.gen_bool(rate) {
                let grow: Vec<usize> = (0..base.n()).filter(|&v| mult[v] < 3).collect();
                let Some(&v) = grow.get(rng.gen_range(0..grow.len().max(1))) else {
                    break;
                };
                mult[v] += 1;
                left -= 1;
            }
            let (g, partition) = thicken(&ThickeningSpec {
                base: base.clone(),
                mult,
            })?;
            let cert = Certificate {
                universals: vec![],
                core: CertCore::Thickened {
                    base_name: name.clone(),
                    classes: partition.blocks.iter().map(|b| b.to_vec()).collect(),
                },
            };
            Ok((g, Some(cert)))
        }
        FamilyTag::Base(name) => {
            let g = base_by_name(name)?.clone();
            let classes = (0..g.n()).map(|v| vec![v]).collect();
            let cert = Certificate {
                universals: vec![],
                core: CertCore::Thickened {
                    base_name: name.clone(),
                    classes,
                },
            };
            Ok((g, Some(cert)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{self, Pattern};

    #[test]
    fn pentagon_examples() {
        let g = pentagon(3).unwrap();
        assert_eq!(g.n(), 7);
        assert_eq!(g.edge_count(), 9);
        let g4 = pentagon(4).unwrap();
        assert_eq!(g4.n(), 9);
        assert_eq!(g4.edge_count(), 14);
        assert!(pentagon(2).is_err());
        assert!(patterns::forbidden_profile(&g).in_class_57);
    }

    #[test]
    fn minimal_villa_is_three_pentagon() {
        let p = VillaParams {
            t: 3,
            a_size: 1,
            b_sizes: vec![1, 1, 1],
            c_sizes: vec![1, 1, 1],
            chains: vec![NestedChainSpec::full(1, 1); 3],
        };
        let (g, _) = villa(&p).unwrap();
        assert!(g.is_isomorphic(&pentagon(3).unwrap()).is_some());
    }

    #[test]
    fn villa_rejects_bad_chains() {
        let mut p = VillaParams {
            t: 3,
            a_size: 1,
            b_sizes: vec![2, 1, 1],
            c_sizes: vec![2, 1, 1],
            chains: vec![
                NestedChainSpec {
                    lengths: vec![2, 1],
                },
                NestedChainSpec::full(1, 1),
                NestedChainSpec::full(1, 1),
            ],
        };
        assert!(villa(&p).is_ok());
        p.chains[0] = NestedChainSpec {
            lengths: vec![1, 2],
        };
        assert!(villa(&p).is_err());
        p.chains[0] = NestedChainSpec {
            lengths: vec![2, 0],
        };
        assert!(villa(&p).is_err());
    }

    #[test]
    fn villa_has_no_simplicial_or_universal_vertices() {
        let p = VillaParams {
            t: 3,
            a_size: 2,
            b_sizes: vec![1, 1, 1],
            c_sizes: vec![1, 1, 1],
            chains: vec![NestedChainSpec::full(1, 1); 3],
        };
        let (g, _) = villa(&p).unwrap();
        assert_eq!(g.n(), 8);
        assert!(g.simplicial_vertices().is_empty());
        assert!(g.universal_vertices().is_empty());
        let hs = patterns::holes(&g, g.n());
        assert!(!hs.is_empty() && hs.iter().all(|h| h.len() == 5));
    }

    #[test]
    fn minimal_mansion() {
        let p = MansionParams {
            villa: VillaParams {
                t: 3,
                a_size: 1,
                b_sizes: vec![1, 1, 1],
                c_sizes: vec![1, 1, 1],
                chains: vec![NestedChainSpec::full(1, 1); 3],
            },
            f_size: 1,
            x_size: 0,
            y_size: 0,
            j_star: 0,
        };
        let (g, _) = mansion(&p).unwrap();
        assert_eq!(g.n(), 8);
        let profile = patterns::forbidden_profile(&g);
        assert!(profile.in_class_57);
        assert!(g.universal_vertices().is_empty());
        assert!(g.simplicial_vertices().is_empty());
    }

    #[test]
    fn mansion_x_y_clauses() {
        let p = MansionParams {
            villa: VillaParams {
                t: 3,
                a_size: 1,
                b_sizes: vec![1, 1, 1],
                c_sizes: vec![1, 1, 1],
                chains: vec![NestedChainSpec::full(1, 1); 3],
            },
            f_size: 1,
            x_size: 1,
            y_size: 1,
            j_star: 1,
        };
        let (g, cert) = mansion(&p).unwrap();
        let (x, y) = match &cert.core {
            CertCore::Mansion { x, y, .. } => (x.clone(), y.clone()),
            _ => unreachable!(),
        };
        assert!(!g.has_edge(x[0], y[0]));
        assert!(patterns::forbidden_profile(&g).in_class_57);
    }

    #[test]
    fn minimal_basket_is_three_pentagon() {
        let p = BasketParams {
            a_size: 1,
            b_sizes: [1, 1, 1],
            c_sizes: [1, 1, 1],
            f_size: 0,
            i_star: 0,
            j_star: 0,
            chain: NestedChainSpec::full(1, 1),
        };
        let (g, _) = basket(&p).unwrap();
        assert!(g.is_isomorphic(&pentagon(3).unwrap()).is_some());
    }

    #[test]
    fn basket_contains_three_pentagon_and_is_in_class() {
        for (i_star, j_star) in [(0, 0), (0, 2)] {
            let p = BasketParams {
                a_size: 2,
                b_sizes: [2, 1, 1],
                c_sizes: [1, 2, 1],
                f_size: 1,
                i_star,
                j_star,
                chain: NestedChainSpec {
                    lengths: vec![2, 1],
                },
            };
            let (g, _) = basket(&p).unwrap();
            let profile = patterns::forbidden_profile(&g);
            assert!(profile.in_class_57, "i*={i_star} j*={j_star}");
            assert!(profile.has(Pattern::ThreePentagon));
            assert!(g.simplicial_vertices().is_empty());
            assert!(g.universal_vertices().is_empty());
            assert!(g.is_anticonnected());
        }
    }

    #[test]
    fn crown_singletons_is_c5() {
        let p = CrownParams {
            ring: RingParams {
                k: 5,
                sizes: vec![1; 5],
                pred_chains: vec![NestedChainSpec::full(1, 1); 5],
                succ_chains: vec![NestedChainSpec::full(1, 1); 5],
            },
            i_star: 0,
        };
        let (g, _) = crown(&p).unwrap();
        assert!(g.is_isomorphic(&Graph::cycle(5)).is_some());
    }

    #[test]
    fn hyperhole_examples() {
        let g = hyperhole(5, &[2, 1, 1, 1, 1]).unwrap();
        assert_eq!(g.n(), 6);
        let (c5, _) = Graph::cycle(5).contract_twins();
        let (q, _) = g.contract_twins();
        assert!(q.is_isomorphic(&c5).is_some());
        // a 6-ring with full staircases has all holes of length 6
        let g = hyperhole(6, &[2; 6]).unwrap();
        let hs = patterns::holes(&g, g.n());
        assert!(!hs.is_empty() && hs.iter().all(|h| h.len() == 6));
    }

    #[test]
    fn thicken_examples() {
        let c5 = Graph::cycle(5);
        let (g, _) = thicken(&ThickeningSpec {
            base: c5.clone(),
            mult: vec![1; 5],
        })
        .unwrap();
        assert_eq!(g, c5);
        let (g, _) = thicken(&ThickeningSpec {
            base: c5.clone(),
            mult: vec![2, 1, 1, 1, 1],
        })
        .unwrap();
        assert!(g
            .is_isomorphic(&hyperhole(5, &[2, 1, 1, 1, 1]).unwrap())
            .is_some());
        let blocks = g.true_twin_classes();
        let mut sizes: Vec<usize> = blocks.blocks.iter().map(|b| b.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 1, 1, 2]);
        let (g, _) = thicken(&ThickeningSpec {
            base: patterns::t0(),
            mult: vec![2; 9],
        })
        .unwrap();
        assert_eq!(g.n(), 18);
        let (q, _) = g.contract_twins();
        assert!(q.is_isomorphic(&patterns::t0()).is_some());
    }

    #[test]
    fn add_universal_examples() {
        let c5 = Graph::cycle(5);
        let w = add_universal(&c5, 1);
        assert_eq!(w.n(), 6);
        assert_eq!(w.degree(5), 5);
        assert_eq!(add_universal(&c5, 0), c5);
        assert_eq!(add_universal(&c5, 2).universal_vertices().len(), 2);
    }

    #[test]
    fn base_library_shape() {
        let lib = base_library();
        assert_eq!(lib.len(), 37);
        assert_eq!(base_by_name("M0").unwrap().n(), 12);
        assert_eq!(base_by_name("T0").unwrap().n(), 9);
        assert_eq!(base_by_name("T1").unwrap().n(), 10);
        // removing all five optionals leaves the bare 7-hole
        assert!(base_by_name("M0-y0-y3-z0-z3-z4")
            .unwrap()
            .is_isomorphic(&Graph::cycle(7))
            .is_some());
        assert!(base_by_name("nope").is_err());
    }

    #[test]
    fn bases_are_in_class_without_simplicial_vertices() {
        for (name, g) in base_library() {
            let profile = patterns::forbidden_profile(g);
            assert!(profile.in_class, "{name} not in class");
            assert!(
                g.simplicial_vertices().is_empty(),
                "{name} has a simplicial vertex"
            );
        }
    }

    #[test]
    fn random_member_is_deterministic() {
        for tag in [
            FamilyTag::Villa,
            FamilyTag::Mansion,
            FamilyTag::Basket,
            FamilyTag::Crown,
            FamilyTag::Ring,
            FamilyTag::Thicken,
        ] {
            let (g1, c1) = random_member(&tag, 20, 42).unwrap();
            let (g2, c2) = random_member(&tag, 20, 42).unwrap();
            assert_eq!(g1, g2, "{tag:?} not deterministic");
            assert_eq!(
                c1.map(|c| c.to_json()),
                c2.map(|c| c.to_json()),
                "{tag:?} certificate not deterministic"
            );
        }
    }

    #[test]
    fn random_member_budget_errors() {
        assert!(matches!(
            random_member(&FamilyTag::Crown, 3, 1),
            Err(FamilyError::BudgetTooSmall { .. })
        ));
        assert!(matches!(
            random_member(&FamilyTag::Mansion, 7, 1),
            Err(FamilyError::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn mansion_minimum_budget_gives_small_mansion() {
        let (g, _) = random_member(&FamilyTag::Mansion, 9, 5).unwrap();
        assert!(g.n() == 8 || g.n() == 9, "got {}", g.n());
    }

    /// Every basket, villa, and mansion contains an induced 3-pentagon.
    #[test]
    fn pentagon_bearing_families_contain_three_pentagon() {
        for tag in [FamilyTag::Basket, FamilyTag::Villa, FamilyTag::Mansion] {
            for seed in 0..8 {
                let (g, _) = random_member(&tag, 8 + (seed as usize % 8), seed + 900).unwrap();
                let (t, emb) = patterns::largest_pentagon_t(&g)
                    .unwrap_or_else(|| panic!("{tag:?} seed {seed}: no pentagon"));
                assert!(t >= 3);
                assert!(emb.verify(&g, &pentagon(t).unwrap()));
            }
        }
    }

    #[test]
    fn family_tag_parsing() {
        assert_eq!(FamilyTag::parse("villa"), Some(FamilyTag::Villa));
        assert_eq!(
            FamilyTag::parse("base:M0-y0"),
            Some(FamilyTag::Base("M0-y0".into()))
        );
        assert_eq!(FamilyTag::parse("nonsense"), None);
    }
}
