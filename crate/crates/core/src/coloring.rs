//! Exact graph coloring: a branch-and-bound oracle for desk-scale graphs,
//! simplicial peeling, a k-colorability DP over k-expressions, and the
//! structured pipeline (peel, strip universals, color the certified core
//! through its width-bounded expression, reassemble).

use std::collections::HashMap;

use thiserror::Error;

use crate::cliquewidth::{expr_for_core, KExprError, KExpression};
use crate::graph::{Graph, VertexSet};
use crate::patterns::{forbidden_profile, Embedding, Pattern};
use crate::recognizer::{classify, ClassifyOutcome, RecognizerError};

const EXACT_SIZE_GUARD: usize = 22;
const DP_STATE_GUARD: usize = 2_000_000;
const DP_WORK_GUARD: usize = 50_000_000;

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("graph too large for the exact oracle (n = {0}, guard {EXACT_SIZE_GUARD})")]
    SizeGuard(usize),
    #[error("graph is not in the class (induced {pattern})")]
    NotInClass {
        pattern: &'static str,
        witness: Embedding,
    },
    #[error("coloring DP state guard exceeded")]
    StateExplosion,
    #[error(transparent)]
    Recognizer(#[from] RecognizerError),
    #[error(transparent)]
    Expression(#[from] KExprError),
    #[error("internal contradiction: {0}")]
    Internal(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringResult {
    pub chi: usize,
    /// vertex -> color in 1..=chi
    pub assignment: Vec<usize>,
}

impl ColoringResult {
    pub fn is_proper(&self, g: &Graph) -> bool {
        self.assignment.len() == g.n()
            && self.assignment.iter().all(|&c| c >= 1 && c <= self.chi)
            && g.edges()
                .iter()
                .all(|&(u, v)| self.assignment[u] != self.assignment[v])
    }
}

/// One maximum clique, via Bron-Kerbosch with pivoting.
pub fn max_clique(g: &Graph) -> VertexSet {
    let mut best = VertexSet::new(g.n());
    let mut r = VertexSet::new(g.n());
    let p = g.vertex_set();
    let x = VertexSet::new(g.n());
    bron_kerbosch(g, &mut r, p, x, &mut best);
    best
}

fn bron_kerbosch(g: &Graph, r: &mut VertexSet, p: VertexSet, x: VertexSet, best: &mut VertexSet) {
    if p.is_empty() && x.is_empty() {
        if r.len() > best.len() {
            *best = r.clone();
        }
        return;
    }
    if r.len() + p.len() <= best.len() {
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&v| g.neighbors(v).intersection(&p).len())
        .unwrap();
    let mut candidates = p.difference(g.neighbors(pivot));
    let mut p = p;
    let mut x = x;
    for v in candidates.clone().iter() {
        r.insert(v);
        bron_kerbosch(
            g,
            r,
            p.intersection(g.neighbors(v)),
            x.intersection(g.neighbors(v)),
            best,
        );
        r.remove(v);
        p.remove(v);
        candidates.remove(v);
        x.insert(v);
    }
}

/// Colors used by a greedy coloring in descending-degree order; an upper
/// bound on the chromatic number.
pub fn greedy_bound(g: &Graph) -> usize {
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(g.degree(v)));
    let mut colors = vec![0usize; g.n()];
    let mut used = 0;
    for &v in &order {
        let mut taken: Vec<bool> = vec![false; used + 2];
        for u in g.neighbors(v).iter() {
            if colors[u] > 0 {
                taken[colors[u].min(used + 1)] = true;
            }
        }
        let c = (1..).find(|&c| c > used || !taken[c]).unwrap();
        colors[v] = c;
        used = used.max(c);
    }
    used.max(1)
}

/// Backtracking k-coloring with DSATUR-style vertex selection and new-color
/// symmetry breaking.
fn k_color_backtrack(g: &Graph, k: usize) -> Option<Vec<usize>> {
    fn recurse(g: &Graph, k: usize, colors: &mut Vec<usize>, colored: usize) -> bool {
        if colored == g.n() {
            return true;
        }
        let v = (0..g.n())
            .filter(|&v| colors[v] == 0)
            .max_by_key(|&v| {
                let mut sat: Vec<bool> = vec![false; k + 1];
                let mut s = 0;
                for u in g.neighbors(v).iter() {
                    if colors[u] > 0 && !sat[colors[u]] {
                        sat[colors[u]] = true;
                        s += 1;
                    }
                }
                (s, g.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        let max_used = colors.iter().copied().max().unwrap();
        let mut forbidden = vec![false; k + 1];
        for u in g.neighbors(v).iter() {
            forbidden[colors[u]] = true;
        }
        for c in 1..=k.min(max_used + 1) {
            if forbidden[c] {
                continue;
            }
            colors[v] = c;
            if recurse(g, k, colors, colored + 1) {
                return true;
            }
            colors[v] = 0;
        }
        false
    }
    if g.n() == 0 {
        return Some(vec![]);
    }
    if k == 0 {
        return None;
    }
    let mut colors = vec![0usize; g.n()];
    colors[0] = 1;
    if recurse(g, k, &mut colors, 1) {
        Some(colors)
    } else {
        None
    }
}

/// Exact chromatic number with a witness, by branch and bound between the
/// clique lower bound and the greedy upper bound. Guarded to desk scale.
pub fn chromatic_exact(g: &Graph) -> Result<ColoringResult, ColoringError> {
    if g.n() > EXACT_SIZE_GUARD {
        return Err(ColoringError::SizeGuard(g.n()));
    }
    let lb = max_clique(g).len().max(1);
    let ub = greedy_bound(g);
    for k in lb..=ub {
        if let Some(assignment) = k_color_backtrack(g, k) {
            return Ok(ColoringResult { chi: k, assignment });
        }
    }
    unreachable!("greedy bound is always achievable")
}

/// Decision form of the oracle.
pub fn k_colorable_exact(g: &Graph, k: usize) -> Result<bool, ColoringError> {
    if g.n() > EXACT_SIZE_GUARD {
        return Err(ColoringError::SizeGuard(g.n()));
    }
    Ok(k_color_backtrack(g, k).is_some())
}

#[derive(Clone, Debug)]
pub struct PeelTrace {
    /// (vertex, degree at removal), in removal order
    pub removed: Vec<(usize, usize)>,
    /// what is left after no simplicial vertex remains
    pub core: VertexSet,
}

/// Repeatedly remove the lowest-id simplicial vertex.
pub fn peel_simplicial(g: &Graph) -> PeelTrace {
    let mut alive = g.vertex_set();
    let mut removed = Vec::new();
    loop {
        let mut pick = None;
        for v in alive.iter() {
            let nb = g.neighbors(v).intersection(&alive);
            let clique = nb
                .iter()
                .all(|u| nb.difference(&g.closed_neighborhood(u)).is_empty());
            if clique {
                pick = Some((v, nb.len()));
                break;
            }
        }
        match pick {
            Some((v, deg)) => {
                removed.push((v, deg));
                alive.remove(v);
            }
            None => break,
        }
    }
    PeelTrace {
        removed,
        core: alive,
    }
}

// ---------------------------------------------------------------------------
// k-colorability over k-expressions
// ---------------------------------------------------------------------------

/// DP signature: the multiset of per-color label-mask values, stored sorted
/// descending (canonical under color permutation; colors are interchangeable,
/// so only the multiset matters for extendability).
type Sig = Vec<u32>;

fn canonical(mut sig: Sig) -> Sig {
    sig.sort_unstable_by(|a, b| b.cmp(a));
    sig
}

#[derive(Clone)]
enum Prov {
    Intro,
    /// Canonical child signatures plus the alignment: count of colors whose
    /// left mask is `.0` and right mask is `.1`.
    Union {
        left: Sig,
        right: Sig,
        table: Vec<(u32, u32, usize)>,
    },
    Join,
    Rename {
        pre: Sig,
    },
}

struct DpNode {
    sigs: HashMap<Sig, Prov>,
    children: Vec<DpNode>,
}

fn label_index(labels: &[u32]) -> HashMap<u32, u32> {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i as u32))
        .collect()
}

/// Operations pending above a node, innermost first. A signature that cannot
/// survive them can never reach the root: joins only accumulate bits under
/// merging and renames distribute over merges, so pruning children against
/// the chain is sound. All checks are per-mask, hence orbit-invariant.
#[derive(Clone, Copy)]
enum PendOp {
    Join(u32, u32),
    Ren(u32, u32),
}

/// Whether a single color mask can survive the pending chain. Joins test
/// each color independently and renames act per mask, so a signature
/// survives iff every one of its masks does.
fn mask_survives(mask: u32, ops: &[PendOp]) -> bool {
    let mut cur = mask;
    for op in ops {
        match *op {
            PendOp::Join(bi, bj) => {
                if cur & bi != 0 && cur & bj != 0 {
                    return false;
                }
            }
            PendOp::Ren(bf, bt) => {
                if cur & bf != 0 {
                    cur = (cur & !bf) | bt;
                }
            }
        }
    }
    true
}

fn survives(sig: &Sig, ops: &[PendOp]) -> bool {
    sig.iter().all(|&m| mask_survives(m, ops))
}

fn grouped(sig: &Sig) -> Vec<(u32, usize)> {
    let mut out: Vec<(u32, usize)> = Vec::new();
    for &m in sig {
        match out.last_mut() {
            Some((mask, cnt)) if *mask == m => *cnt += 1,
            _ => out.push((m, 1)),
        }
    }
    out
}

/// Enumerate every alignment of two color-mask multisets: contingency tables
/// with the left group counts as row sums and right group counts as column
/// sums. Each table yields one merged multiset.
fn for_each_alignment(
    gl: &[(u32, usize)],
    gr: &[(u32, usize)],
    cell_ok: &dyn Fn(u32) -> bool,
    mut emit: impl FnMut(&[(u32, u32, usize)], Sig) -> Result<(), ColoringError>,
) -> Result<(), ColoringError> {
    fn rec(
        gl: &[(u32, usize)],
        gr: &[(u32, usize)],
        cell_ok: &dyn Fn(u32) -> bool,
        row: usize,
        col_left: &mut Vec<usize>,
        table: &mut Vec<(u32, u32, usize)>,
        merged: &mut Vec<u32>,
        emit: &mut impl FnMut(&[(u32, u32, usize)], Sig) -> Result<(), ColoringError>,
    ) -> Result<(), ColoringError> {
        if row == gl.len() {
            return emit(table, canonical(merged.clone()));
        }
        // distribute this row's count over the columns, skipping cells whose
        // merged mask cannot survive the pending chain
        #[allow(clippy::too_many_arguments)]
        fn fill(
            gl: &[(u32, usize)],
            gr: &[(u32, usize)],
            cell_ok: &dyn Fn(u32) -> bool,
            row: usize,
            col: usize,
            remaining: usize,
            col_left: &mut Vec<usize>,
            table: &mut Vec<(u32, u32, usize)>,
            merged: &mut Vec<u32>,
            emit: &mut impl FnMut(&[(u32, u32, usize)], Sig) -> Result<(), ColoringError>,
        ) -> Result<(), ColoringError> {
            if col == gr.len() {
                if remaining == 0 {
                    return rec(gl, gr, cell_ok, row + 1, col_left, table, merged, emit);
                }
                return Ok(());
            }
            let tail: usize = col_left[col + 1..].iter().sum();
            let lo = remaining.saturating_sub(tail);
            let hi = if cell_ok(gl[row].0 | gr[col].0) {
                remaining.min(col_left[col])
            } else {
                0
            };
            if lo > hi {
                return Ok(());
            }
            for take in lo..=hi {
                col_left[col] -= take;
                if take > 0 {
                    table.push((gl[row].0, gr[col].0, take));
                    for _ in 0..take {
                        merged.push(gl[row].0 | gr[col].0);
                    }
                }
                fill(
                    gl,
                    gr,
                    cell_ok,
                    row,
                    col + 1,
                    remaining - take,
                    col_left,
                    table,
                    merged,
                    emit,
                )?;
                if take > 0 {
                    for _ in 0..take {
                        merged.pop();
                    }
                    table.pop();
                }
                col_left[col] += take;
            }
            Ok(())
        }
        fill(
            gl, gr, cell_ok, row, 0, gl[row].1, col_left, table, merged, emit,
        )
    }
    let mut col_left: Vec<usize> = gr.iter().map(|&(_, c)| c).collect();
    rec(
        gl,
        gr,
        cell_ok,
        0,
        &mut col_left,
        &mut Vec::new(),
        &mut Vec::new(),
        &mut emit,
    )
}

/// Retained-state and enumeration-work budgets for one DP run.
struct Budget {
    states: usize,
    work: usize,
}

impl Budget {
    fn new() -> Budget {
        Budget { states: 0, work: 0 }
    }

    fn state(&mut self, added: usize) -> Result<(), ColoringError> {
        self.states += added;
        if self.states > DP_STATE_GUARD {
            return Err(ColoringError::StateExplosion);
        }
        Ok(())
    }

    fn spend(&mut self) -> Result<(), ColoringError> {
        self.work += 1;
        if self.work > DP_WORK_GUARD {
            return Err(ColoringError::StateExplosion);
        }
        Ok(())
    }
}

fn dp(
    e: &KExpression,
    k: usize,
    idx: &HashMap<u32, u32>,
    pending: &mut Vec<PendOp>,
    budget: &mut Budget,
) -> Result<DpNode, ColoringError> {
    match e {
        KExpression::Intro { label, .. } => {
            let bit = 1u32 << idx[label];
            let mut sig = vec![0u32; k];
            sig[0] = bit;
            let mut sigs = HashMap::new();
            if survives(&sig, pending) {
                sigs.insert(canonical(sig), Prov::Intro);
            }
            budget.state(sigs.len())?;
            Ok(DpNode {
                sigs,
                children: vec![],
            })
        }
        KExpression::Union { left, right } => {
            let l = dp(left, k, idx, pending, budget)?;
            let r = dp(right, k, idx, pending, budget)?;
            let mut sigs: HashMap<Sig, Prov> = HashMap::new();
            let cell_ok = |m: u32| mask_survives(m, pending);
            for (sl, _) in l.sigs.iter() {
                let gl = grouped(sl);
                for (sr, _) in r.sigs.iter() {
                    let gr = grouped(sr);
                    for_each_alignment(&gl, &gr, &cell_ok, |table, merged| {
                        budget.spend()?;
                        debug_assert!(survives(&merged, pending));
                        if sigs.contains_key(&merged) {
                            return Ok(());
                        }
                        budget.state(1)?;
                        sigs.insert(
                            merged,
                            Prov::Union {
                                left: sl.clone(),
                                right: sr.clone(),
                                table: table.to_vec(),
                            },
                        );
                        Ok(())
                    })?;
                }
            }
            Ok(DpNode {
                sigs,
                children: vec![l, r],
            })
        }
        KExpression::Join { i, j, inner } => {
            let bi = 1u32 << idx[i];
            let bj = 1u32 << idx[j];
            pending.insert(0, PendOp::Join(bi, bj));
            let child = dp(inner, k, idx, pending, budget)?;
            pending.remove(0);
            let mut sigs = HashMap::new();
            for (sig, _) in child.sigs.iter() {
                // a join is proper iff no color touches both labels
                if sig.iter().all(|&m| m & bi == 0 || m & bj == 0) {
                    sigs.insert(sig.clone(), Prov::Join);
                }
            }
            budget.state(sigs.len())?;
            Ok(DpNode {
                sigs,
                children: vec![child],
            })
        }
        KExpression::Rename { from, to, inner } => {
            let bf = 1u32 << idx[from];
            let bt = 1u32 << idx[to];
            pending.insert(0, PendOp::Ren(bf, bt));
            let child = dp(inner, k, idx, pending, budget)?;
            pending.remove(0);
            let mut sigs = HashMap::new();
            for (sig, _) in child.sigs.iter() {
                let renamed: Sig = canonical(
                    sig.iter()
                        .map(|&m| if m & bf != 0 { (m & !bf) | bt } else { m })
                        .collect(),
                );
                sigs.entry(renamed)
                    .or_insert_with(|| Prov::Rename { pre: sig.clone() });
            }
            budget.state(sigs.len())?;
            Ok(DpNode {
                sigs,
                children: vec![child],
            })
        }
    }
}

/// Walk back down the DP with a concrete (color-indexed) signature, peeling
/// the canonical provenance into actual vertex colors.
fn replay(
    e: &KExpression,
    node: &DpNode,
    idx: &HashMap<u32, u32>,
    concrete: &Sig,
    out: &mut HashMap<String, usize>,
) {
    let key = canonical(concrete.clone());
    match (e, node.sigs.get(&key)) {
        (KExpression::Intro { name, .. }, Some(Prov::Intro)) => {
            let color = concrete
                .iter()
                .position(|&m| m != 0)
                .expect("intro signature has one nonzero mask");
            out.insert(name.clone(), color + 1);
        }
        (
            KExpression::Union { left, right },
            Some(Prov::Union {
                left: sl,
                right: sr,
                table,
            }),
        ) => {
            // hand each concrete color slot a table cell producing its mask
            let mut cells = table.clone();
            let mut lc = vec![0u32; concrete.len()];
            let mut rc = vec![0u32; concrete.len()];
            for (slot, &m) in concrete.iter().enumerate() {
                let cell = cells
                    .iter_mut()
                    .find(|(a, b, cnt)| *cnt > 0 && (*a | *b) == m)
                    .expect("alignment table covers the merged multiset");
                lc[slot] = cell.0;
                rc[slot] = cell.1;
                cell.2 -= 1;
            }
            debug_assert_eq!(canonical(lc.clone()), *sl);
            debug_assert_eq!(canonical(rc.clone()), *sr);
            replay(left, &node.children[0], idx, &lc, out);
            replay(right, &node.children[1], idx, &rc, out);
        }
        (KExpression::Join { inner, .. }, Some(Prov::Join)) => {
            replay(inner, &node.children[0], idx, concrete, out);
        }
        (KExpression::Rename { from, to, inner }, Some(Prov::Rename { pre })) => {
            // choose, per concrete slot, an unused pre-mask that renames to it
            let bf = 1u32 << idx[from];
            let bt = 1u32 << idx[to];
            let ren = |m: u32| if m & bf != 0 { (m & !bf) | bt } else { m };
            let mut pool = grouped(pre);
            let mut child = vec![0u32; concrete.len()];
            for (slot, &m) in concrete.iter().enumerate() {
                let entry = pool
                    .iter_mut()
                    .find(|(mask, cnt)| *cnt > 0 && ren(*mask) == m)
                    .expect("rename provenance covers the target multiset");
                child[slot] = entry.0;
                entry.1 -= 1;
            }
            replay(inner, &node.children[0], idx, &child, out);
        }
        _ => unreachable!("provenance mismatch during replay"),
    }
}

/// Proper k-coloring of eval(e), reconstructed from the signature DP, or
/// None when no k-coloring exists.
pub fn cwd_color(
    e: &KExpression,
    k: usize,
) -> Result<Option<HashMap<String, usize>>, ColoringError> {
    if k == 0 {
        return Ok(None);
    }
    let labels: Vec<u32> = e.labels().into_iter().collect();
    let idx = label_index(&labels);
    let root = dp(e, k, &idx, &mut Vec::new(), &mut Budget::new())?;
    let Some(target) = root.sigs.keys().next().cloned() else {
        return Ok(None);
    };
    let mut out = HashMap::new();
    replay(e, &root, &idx, &target, &mut out);
    Ok(Some(out))
}

/// True iff eval(e) is k-colorable.
pub fn k_colorable_cwd(e: &KExpression, k: usize) -> Result<bool, ColoringError> {
    if k == 0 {
        return Ok(false);
    }
    let labels: Vec<u32> = e.labels().into_iter().collect();
    let idx = label_index(&labels);
    let root = dp(e, k, &idx, &mut Vec::new(), &mut Budget::new())?;
    Ok(!root.sigs.is_empty())
}

/// Exact chromatic number via the structural pipeline: peel simplicial
/// vertices (chi = max of degree+1 along the peel and chi of the core),
/// strip universal vertices off the core, color the certified inner graph by
/// searching k over its width-bounded expression, and reassemble a witness
/// through the peel in reverse.
pub fn chromatic_structured(g: &Graph) -> Result<ColoringResult, ColoringError> {
    let profile = forbidden_profile(g);
    if !profile.in_class {
        for p in [Pattern::C4, Pattern::C6, Pattern::TwoP3] {
            if let Some(w) = profile.witness(p) {
                return Err(ColoringError::NotInClass {
                    pattern: p.name(),
                    witness: w.clone(),
                });
            }
        }
    }
    let trace = peel_simplicial(g);
    let peel_bound = trace.removed.iter().map(|&(_, d)| d + 1).max().unwrap_or(1);

    let mut assignment = vec![0usize; g.n()];
    let mut chi = peel_bound;

    if !trace.core.is_empty() {
        let (core, core_map) = g.induced(&trace.core);
        let outcome = classify(&core)?;
        let cert = match outcome {
            ClassifyOutcome::InClassNoSimplicial(cert) => cert,
            other => {
                return Err(ColoringError::Internal(format!(
                    "peeled core did not classify to a certificate: {other:?}"
                )))
            }
        };
        let universal_count = cert.universals.len();
        let inner_set = {
            let mut s = core.vertex_set();
            for &u in &cert.universals {
                s.remove(u);
            }
            s
        };
        let (inner, _) = core.induced(&inner_set);
        let expr = expr_for_core(&core, &cert)?;
        let lb = max_clique(&inner).len().max(1);
        let ub = greedy_bound(&inner);
        let mut inner_result = None;
        for k in lb..=ub {
            if let Some(colors) = cwd_color(&expr, k)? {
                inner_result = Some((k, colors));
                break;
            }
        }
        let (k_inner, colors) = inner_result
            .ok_or_else(|| ColoringError::Internal("greedy bound not reached by DP".into()))?;
        // expression names are core-graph ids
        for (name, color) in &colors {
            let core_id: usize = name.parse().map_err(|_| {
                ColoringError::Internal("non-id vertex name in core expression".into())
            })?;
            assignment[core_map[core_id]] = *color;
        }
        for (offset, &u) in cert.universals.iter().enumerate() {
            assignment[core_map[u]] = k_inner + offset + 1;
        }
        chi = chi.max(k_inner + universal_count);
    }

    // reverse the peel: each vertex takes the smallest color not used by its
    // already-colored neighbors (a clique at its removal time)
    for &(v, _) in trace.removed.iter().rev() {
        let mut taken = vec![false; chi + 2];
        for u in g.neighbors(v).iter() {
            if assignment[u] > 0 {
                taken[assignment[u].min(chi + 1)] = true;
            }
        }
        let c = (1..=chi).find(|&c| !taken[c]).ok_or_else(|| {
            ColoringError::Internal("no free color while reversing the peel".into())
        })?;
        assignment[v] = c;
    }

    let result = ColoringResult { chi, assignment };
    if !result.is_proper(g) {
        return Err(ColoringError::Internal(
            "assembled coloring is not proper".into(),
        ));
    }
    Ok(result)
}
