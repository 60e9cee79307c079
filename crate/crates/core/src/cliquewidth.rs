//! k-expressions: a tree IR over the four clique-width operations with a
//! textual grammar, an evaluator, and width-bounded builders for every
//! certified core kind (complete ≤ |C|+1, spike/villa ≤ 4, mansion/basket/
//! crown ≤ 5, thickened base ≤ n0+1, universal re-addition ≤ max(w,2)).
//!
//! Grammar (canonical form uses single spaces):
//!   expr := "(" "v" INT NAME ")"
//!         | "(" "u" expr expr ")"
//!         | "(" "j" INT INT expr ")"
//!         | "(" "r" INT INT expr ")"
//!   INT  := positive decimal, NAME := [A-Za-z0-9_]+

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::graph::Graph;
use crate::recognizer::{classify, CertCore, Certificate, ClassifyOutcome, RecognizerError};

#[derive(Debug, Error)]
pub enum KExprError {
    #[error("join/rename labels must differ (got {0})")]
    EqualLabels(u32),
    #[error("duplicate vertex name '{0}'")]
    DuplicateName(String),
    #[error("labels must be positive")]
    ZeroLabel,
    #[error("certificate does not verify: {0}")]
    BadCertificate(String),
    #[error("classification failed: {0}")]
    Classify(#[from] RecognizerError),
    #[error("classify returned no certificate: {0}")]
    NoCertificate(String),
    #[error("builder invariant violated: {0}")]
    Builder(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct KParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KExpression {
    Intro {
        label: u32,
        name: String,
    },
    Union {
        left: Box<KExpression>,
        right: Box<KExpression>,
    },
    Join {
        i: u32,
        j: u32,
        inner: Box<KExpression>,
    },
    Rename {
        from: u32,
        to: u32,
        inner: Box<KExpression>,
    },
}

impl KExpression {
    pub fn intro(label: u32, name: &str) -> KExpression {
        assert!(label > 0, "labels are positive");
        KExpression::Intro {
            label,
            name: name.to_string(),
        }
    }

    pub fn union(left: KExpression, right: KExpression) -> KExpression {
        KExpression::Union {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn join(i: u32, j: u32, inner: KExpression) -> KExpression {
        assert!(i != j, "join labels must differ");
        assert!(i > 0 && j > 0);
        KExpression::Join {
            i,
            j,
            inner: Box::new(inner),
        }
    }

    pub fn rename(from: u32, to: u32, inner: KExpression) -> KExpression {
        assert!(from != to, "rename labels must differ");
        assert!(from > 0 && to > 0);
        KExpression::Rename {
            from,
            to,
            inner: Box::new(inner),
        }
    }

    /// Distinct labels appearing anywhere in the tree.
    pub fn labels(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels(&self, out: &mut BTreeSet<u32>) {
        match self {
            KExpression::Intro { label, .. } => {
                out.insert(*label);
            }
            KExpression::Union { left, right } => {
                left.collect_labels(out);
                right.collect_labels(out);
            }
            KExpression::Join { i, j, inner } => {
                out.insert(*i);
                out.insert(*j);
                inner.collect_labels(out);
            }
            KExpression::Rename { from, to, inner } => {
                out.insert(*from);
                out.insert(*to);
                inner.collect_labels(out);
            }
        }
    }

    /// Labels carried by at least one vertex at the root of the tree.
    pub fn live_labels(&self) -> BTreeSet<u32> {
        match self {
            KExpression::Intro { label, .. } => [*label].into_iter().collect(),
            KExpression::Union { left, right } => {
                let mut s = left.live_labels();
                s.extend(right.live_labels());
                s
            }
            KExpression::Join { inner, .. } => inner.live_labels(),
            KExpression::Rename { from, to, inner } => {
                let mut s = inner.live_labels();
                if s.remove(from) {
                    s.insert(*to);
                }
                s
            }
        }
    }

    pub fn vertex_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut Vec<String>) {
        match self {
            KExpression::Intro { name, .. } => out.push(name.clone()),
            KExpression::Union { left, right } => {
                left.collect_names(out);
                right.collect_names(out);
            }
            KExpression::Join { inner, .. } | KExpression::Rename { inner, .. } => {
                inner.collect_names(out)
            }
        }
    }
}

/// Number of distinct labels used anywhere in the expression: a witness
/// upper bound on the clique-width of the evaluated graph.
pub fn width(e: &KExpression) -> usize {
    e.labels().len()
}

/// A graph together with per-vertex names and final labels, the result of
/// evaluating a k-expression.
#[derive(Clone, Debug)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub names: Vec<String>,
    pub labels: Vec<u32>,
}

impl LabeledGraph {
    pub fn label_of(&self, name: &str) -> Option<u32> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.labels[i])
    }
}

/// Bottom-up evaluation of the four operations.
pub fn eval(e: &KExpression) -> Result<LabeledGraph, KExprError> {
    let mut names = Vec::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    eval_rec(e, &mut names, &mut labels, &mut edges)?;
    let mut seen = HashSet::new();
    for n in &names {
        if !seen.insert(n.clone()) {
            return Err(KExprError::DuplicateName(n.clone()));
        }
    }
    let graph = Graph::from_edge_list(names.len(), &edges).expect("evaluator emits valid edges");
    Ok(LabeledGraph {
        graph,
        names,
        labels,
    })
}

/// Returns the index range of the subtree's vertices within the buffers.
fn eval_rec(
    e: &KExpression,
    names: &mut Vec<String>,
    labels: &mut Vec<u32>,
    edges: &mut Vec<(usize, usize)>,
) -> Result<std::ops::Range<usize>, KExprError> {
    match e {
        KExpression::Intro { label, name } => {
            if *label == 0 {
                return Err(KExprError::ZeroLabel);
            }
            names.push(name.clone());
            labels.push(*label);
            Ok(names.len() - 1..names.len())
        }
        KExpression::Union { left, right } => {
            let l = eval_rec(left, names, labels, edges)?;
            let r = eval_rec(right, names, labels, edges)?;
            Ok(l.start..r.end)
        }
        KExpression::Join { i, j, inner } => {
            if i == j {
                return Err(KExprError::EqualLabels(*i));
            }
            let span = eval_rec(inner, names, labels, edges)?;
            let with_i: Vec<usize> = span.clone().filter(|&v| labels[v] == *i).collect();
            let with_j: Vec<usize> = span.clone().filter(|&v| labels[v] == *j).collect();
            for &u in &with_i {
                for &v in &with_j {
                    edges.push((u, v));
                }
            }
            Ok(span)
        }
        KExpression::Rename { from, to, inner } => {
            if from == to {
                return Err(KExprError::EqualLabels(*from));
            }
            let span = eval_rec(inner, names, labels, edges)?;
            for v in span.clone() {
                if labels[v] == *from {
                    labels[v] = *to;
                }
            }
            Ok(span)
        }
    }
}

/// Canonical textual form (single spaces, no extra whitespace).
pub fn to_text(e: &KExpression) -> String {
    let mut s = String::new();
    write_text(e, &mut s);
    s
}

fn write_text(e: &KExpression, out: &mut String) {
    match e {
        KExpression::Intro { label, name } => {
            out.push_str(&format!("(v {} {})", label, name));
        }
        KExpression::Union { left, right } => {
            out.push_str("(u ");
            write_text(left, out);
            out.push(' ');
            write_text(right, out);
            out.push(')');
        }
        KExpression::Join { i, j, inner } => {
            out.push_str(&format!("(j {} {} ", i, j));
            write_text(inner, out);
            out.push(')');
        }
        KExpression::Rename { from, to, inner } => {
            out.push_str(&format!("(r {} {} ", from, to));
            write_text(inner, out);
            out.push(')');
        }
    }
}

impl fmt::Display for KExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_text(self))
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

#[derive(Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Atom(String),
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Next token plus its starting position.
    fn next_tok(&mut self) -> Result<Option<(Tok, usize, usize)>, KParseError> {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
        let (line, col) = (self.line, self.col);
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        if c == '(' {
            self.bump();
            return Ok(Some((Tok::LParen, line, col)));
        }
        if c == ')' {
            self.bump();
            return Ok(Some((Tok::RParen, line, col)));
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = self.chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok(Some((Tok::Atom(s), line, col)));
        }
        Err(KParseError {
            line,
            col,
            msg: format!("unexpected character '{}'", c),
        })
    }
}

pub fn parse(text: &str) -> Result<KExpression, KParseError> {
    let mut lex = Lexer::new(text);
    let mut names = HashSet::new();
    let e = parse_expr(&mut lex, &mut names)?;
    if let Some((_, line, col)) = lex.next_tok()? {
        return Err(KParseError {
            line,
            col,
            msg: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

fn expect_tok(lex: &mut Lexer, what: &str) -> Result<(Tok, usize, usize), KParseError> {
    lex.next_tok()?.ok_or_else(|| KParseError {
        line: lex.line,
        col: lex.col,
        msg: format!("unexpected end of input, expected {what}"),
    })
}

fn parse_int(lex: &mut Lexer) -> Result<(u32, usize, usize), KParseError> {
    let (tok, line, col) = expect_tok(lex, "a label")?;
    match tok {
        Tok::Atom(s) if s.chars().all(|c| c.is_ascii_digit()) && !s.is_empty() => {
            let v: u32 = s.parse().map_err(|_| KParseError {
                line,
                col,
                msg: format!("label '{}' out of range", s),
            })?;
            if v == 0 {
                return Err(KParseError {
                    line,
                    col,
                    msg: "labels must be positive".into(),
                });
            }
            Ok((v, line, col))
        }
        other => Err(KParseError {
            line,
            col,
            msg: format!("expected a label, got {:?}", other),
        }),
    }
}

fn parse_expr(lex: &mut Lexer, names: &mut HashSet<String>) -> Result<KExpression, KParseError> {
    let (tok, line, col) = expect_tok(lex, "'('")?;
    if tok != Tok::LParen {
        return Err(KParseError {
            line,
            col,
            msg: format!("expected '(', got {:?}", tok),
        });
    }
    let (op, oline, ocol) = expect_tok(lex, "an operator (v, u, j, r)")?;
    let op = match op {
        Tok::Atom(s) => s,
        other => {
            return Err(KParseError {
                line: oline,
                col: ocol,
                msg: format!("expected an operator, got {:?}", other),
            })
        }
    };
    let e = match op.as_str() {
        "v" => {
            let (label, _, _) = parse_int(lex)?;
            let (tok, nline, ncol) = expect_tok(lex, "a vertex name")?;
            let name = match tok {
                Tok::Atom(s) => s,
                other => {
                    return Err(KParseError {
                        line: nline,
                        col: ncol,
                        msg: format!("expected a vertex name, got {:?}", other),
                    })
                }
            };
            if !names.insert(name.clone()) {
                return Err(KParseError {
                    line: nline,
                    col: ncol,
                    msg: format!("duplicate vertex name '{}'", name),
                });
            }
            KExpression::Intro { label, name }
        }
        "u" => {
            let left = parse_expr(lex, names)?;
            let right = parse_expr(lex, names)?;
            KExpression::union(left, right)
        }
        "j" | "r" => {
            let (i, _, _) = parse_int(lex)?;
            let (j, jline, jcol) = parse_int(lex)?;
            if i == j {
                return Err(KParseError {
                    line: jline,
                    col: jcol,
                    msg: format!("labels must differ in '{}', both are {}", op, i),
                });
            }
            let inner = Box::new(parse_expr(lex, names)?);
            if op == "j" {
                KExpression::Join { i, j, inner }
            } else {
                KExpression::Rename {
                    from: i,
                    to: j,
                    inner,
                }
            }
        }
        other => {
            return Err(KParseError {
                line: oline,
                col: ocol,
                msg: format!("unknown operator '{}'", other),
            })
        }
    };
    let (tok, cline, ccol) = expect_tok(lex, "')'")?;
    if tok != Tok::RParen {
        return Err(KParseError {
            line: cline,
            col: ccol,
            msg: format!("expected ')', got {:?}", tok),
        });
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

/// Complete graph over named, labeled vertices using one spare label:
/// width <= (distinct target labels) + 1.
pub fn expr_complete(vertices: &[(String, u32)]) -> Result<KExpression, KExprError> {
    if vertices.is_empty() {
        return Err(KExprError::Builder("complete graph needs a vertex".into()));
    }
    let labels: BTreeSet<u32> = vertices.iter().map(|(_, l)| *l).collect();
    if labels.contains(&0) {
        return Err(KExprError::ZeroLabel);
    }
    let spare = (1..).find(|l| !labels.contains(l)).unwrap();
    Ok(complete_expr(vertices, spare))
}

/// Incremental clique construction: each new vertex enters with the spare
/// label, joins every label already present, then takes its target label.
fn complete_expr(vertices: &[(String, u32)], spare: u32) -> KExpression {
    debug_assert!(vertices.iter().all(|(_, l)| *l != spare && *l > 0));
    let mut e = KExpression::intro(vertices[0].1, &vertices[0].0);
    let mut present: BTreeSet<u32> = [vertices[0].1].into_iter().collect();
    for (name, label) in &vertices[1..] {
        let mut cur = KExpression::union(e, KExpression::intro(spare, name));
        for &l in &present {
            cur = KExpression::join(spare, l, cur);
        }
        e = KExpression::rename(spare, *label, cur);
        present.insert(*label);
    }
    e
}

fn named(ids: &[usize]) -> Vec<String> {
    ids.iter().map(|v| v.to_string()).collect()
}

fn named_with(ids: &[usize], label: u32) -> Vec<(String, u32)> {
    ids.iter().map(|v| (v.to_string(), label)).collect()
}

/// One staircase arm: clique `b` (names ordered by nonincreasing reach)
/// against clique `c` (prefix order); `reach[j]` = how many of c's first
/// vertices b[j] sees.
struct Arm {
    b: Vec<(String, usize)>,
    c: Vec<String>,
}

impl Arm {
    fn from_lists(g: &Graph, b: &[usize], c: &[usize], what: &str) -> Result<Arm, KExprError> {
        let mut rows = Vec::with_capacity(b.len());
        for &bv in b {
            let reach = c.iter().take_while(|&&cv| g.has_edge(bv, cv)).count();
            // the reach must be a prefix: nothing beyond it may be adjacent
            if c[reach..].iter().any(|&cv| g.has_edge(bv, cv)) {
                return Err(KExprError::Builder(format!(
                    "{what}: neighborhood of {bv} is not a prefix of the stored order"
                )));
            }
            rows.push((bv.to_string(), reach));
        }
        for w in rows.windows(2) {
            if w[1].1 > w[0].1 {
                return Err(KExprError::Builder(format!(
                    "{what}: reaches increase along the stored order"
                )));
            }
        }
        Ok(Arm {
            b: rows,
            c: named(c),
        })
    }
}

/// The 1-spike base case, following the proof's (b1; C0, C1, C2) split.
/// Produces B -> lb, C -> lc using only {lb, lc, s1, s2}.
fn arm_expr(
    b: &[(String, usize)],
    c: &[String],
    lb: u32,
    lc: u32,
    s1: u32,
    s2: u32,
) -> KExpression {
    debug_assert!(!b.is_empty());
    if c.is_empty() {
        let verts: Vec<(String, u32)> = b.iter().map(|(n, _)| (n.clone(), lb)).collect();
        return complete_expr(&verts, s1);
    }
    if b.len() == 1 {
        let (name, r1) = (&b[0].0, b[0].1);
        let mut cverts: Vec<(String, u32)> = c[..r1].iter().map(|n| (n.clone(), lc)).collect();
        cverts.extend(c[r1..].iter().map(|n| (n.clone(), s1)));
        let e_c = complete_expr(&cverts, lb);
        let e = KExpression::union(e_c, KExpression::intro(lb, name));
        let e = KExpression::join(lb, lc, e);
        return KExpression::rename(s1, lc, e);
    }
    let (b1_name, r1) = (&b[0].0, b[0].1);
    let r2 = b[1].1;
    // C2 = shared prefix, C1 = b1's private interval, C0 = untouched tail
    let e_rec = arm_expr(&b[1..], &c[..r2], lb, lc, s1, s2);
    let mut top: Vec<(String, u32)> = vec![(b1_name.clone(), s1)];
    top.extend(c[r2..r1].iter().map(|n| (n.clone(), s2)));
    let e_top = complete_expr(&top, lb);
    let mut e = KExpression::union(e_rec, e_top);
    e = KExpression::join(s1, lb, e);
    e = KExpression::join(s1, lc, e);
    e = KExpression::join(s2, lc, e);
    e = KExpression::rename(s1, lb, e);
    e = KExpression::rename(s2, lc, e);
    if r1 < c.len() {
        let tail: Vec<(String, u32)> = c[r1..].iter().map(|n| (n.clone(), s1)).collect();
        let e0 = complete_expr(&tail, lb);
        e = KExpression::union(e, e0);
        e = KExpression::join(s1, lc, e);
        e = KExpression::rename(s1, lc, e);
    }
    e
}

/// t-spike by induction over arms; all B vertices end labeled lb, all C
/// vertices lc, using only {lb, lc, s1, s2}.
fn spike_expr(arms: &[Arm], lb: u32, lc: u32, s1: u32, s2: u32) -> KExpression {
    let mut e = arm_expr(&arms[0].b, &arms[0].c, lb, lc, s1, s2);
    for arm in &arms[1..] {
        let e_arm = arm_expr(&arm.b, &arm.c, lb, s1, lc, s2);
        e = KExpression::union(e, e_arm);
        e = KExpression::join(lc, s1, e);
        e = KExpression::rename(s1, lc, e);
    }
    e
}

/// Spike shape: pairwise-anticomplete cliques B_i against pairwise-complete
/// cliques C_i, with nested (floor-0) chains B_i -> C_i.
#[derive(Clone, Debug)]
pub struct SpikePartition {
    pub b_sizes: Vec<usize>,
    pub c_sizes: Vec<usize>,
    /// chains[i].len() == b_sizes[i]; nonincreasing entries <= c_sizes[i]
    pub chains: Vec<Vec<usize>>,
}

impl SpikePartition {
    pub fn validate(&self) -> Result<(), KExprError> {
        let t = self.b_sizes.len();
        if t == 0 || self.c_sizes.len() != t || self.chains.len() != t {
            return Err(KExprError::Builder(
                "spike needs t >= 1 matched parts".into(),
            ));
        }
        for i in 0..t {
            if self.b_sizes[i] == 0 || self.c_sizes[i] == 0 {
                return Err(KExprError::Builder("spike parts must be nonempty".into()));
            }
            if self.chains[i].len() != self.b_sizes[i] {
                return Err(KExprError::Builder("one chain entry per B vertex".into()));
            }
            if self.chains[i].iter().any(|&r| r > self.c_sizes[i]) {
                return Err(KExprError::Builder("chain entry exceeds C part".into()));
            }
            if self.chains[i].windows(2).any(|w| w[1] > w[0]) {
                return Err(KExprError::Builder(
                    "chain entries must be nonincreasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// The concrete spike graph: parts laid out B_1..B_t then C_1..C_t.
    pub fn graph(&self) -> Result<Graph, KExprError> {
        self.validate()?;
        let t = self.b_sizes.len();
        let mut sizes = self.b_sizes.clone();
        sizes.extend(&self.c_sizes);
        let mut blocks = Vec::new();
        let mut next = 0;
        for &s in &sizes {
            blocks.push((next..next + s).collect::<Vec<usize>>());
            next += s;
        }
        let mut edges = Vec::new();
        for block in &blocks {
            for (i, &u) in block.iter().enumerate() {
                for &v in &block[i + 1..] {
                    edges.push((u, v));
                }
            }
        }
        for i in 0..t {
            for j in i + 1..t {
                for &u in &blocks[t + i] {
                    for &v in &blocks[t + j] {
                        edges.push((u, v));
                    }
                }
            }
            for (j, &b) in blocks[i].iter().enumerate() {
                for &c in &blocks[t + i][..self.chains[i][j]] {
                    edges.push((b, c));
                }
            }
        }
        Ok(Graph::from_edge_list(next, &edges).expect("spike layout is valid"))
    }

    fn arms(&self) -> Vec<Arm> {
        let t = self.b_sizes.len();
        let mut next = 0;
        let mut blocks = Vec::new();
        for &s in self.b_sizes.iter().chain(&self.c_sizes) {
            blocks.push((next..next + s).collect::<Vec<usize>>());
            next += s;
        }
        (0..t)
            .map(|i| Arm {
                b: blocks[i]
                    .iter()
                    .zip(&self.chains[i])
                    .map(|(&v, &r)| (v.to_string(), r))
                    .collect(),
                c: named(&blocks[t + i]),
            })
            .collect()
    }
}

/// Width <= 4 spike expression with all B vertices labeled `b_label`, all C
/// vertices `c_label`.
pub fn expr_spike(
    p: &SpikePartition,
    b_label: u32,
    c_label: u32,
) -> Result<KExpression, KExprError> {
    p.validate()?;
    if b_label == c_label || b_label == 0 || c_label == 0 {
        return Err(KExprError::Builder(
            "spike needs two distinct positive labels".into(),
        ));
    }
    let mut aux = (1..).filter(|l| *l != b_label && *l != c_label);
    let s1 = aux.next().unwrap();
    let s2 = aux.next().unwrap();
    Ok(spike_expr(&p.arms(), b_label, c_label, s1, s2))
}

fn require_verified(g: &Graph, cert: &Certificate) -> Result<(), KExprError> {
    let fails = crate::recognizer::verify_certificate_detailed(g, cert);
    if fails.is_empty() {
        Ok(())
    } else {
        Err(KExprError::BadCertificate(fails.join("; ")))
    }
}

/// Villa, width <= 4: spike over the arms, clique A joined to all of B.
pub fn expr_villa(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    require_verified(g, cert)?;
    let (a, b, c) = match &cert.core {
        CertCore::Villa { a, b, c, .. } => (a, b, c),
        _ => return Err(KExprError::BadCertificate("expected a villa core".into())),
    };
    let arms: Vec<Arm> = b
        .iter()
        .zip(c)
        .map(|(bi, ci)| Arm::from_lists(g, bi, ci, "villa arm"))
        .collect::<Result<_, _>>()?;
    let e_spike = spike_expr(&arms, 2, 3, 1, 4);
    let e_a = complete_expr(&named_with(a, 1), 2);
    Ok(simplify(KExpression::join(
        1,
        2,
        KExpression::union(e_a, e_spike),
    )))
}

/// Mansion, width <= 5, staged exactly as the proof: L1 builds B,C,F with
/// B_{j*},C_{j*} split out; Y is absorbed, then A, then X.
pub fn expr_mansion(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    require_verified(g, cert)?;
    let (a, b, c, f, x, y, j) = match &cert.core {
        CertCore::Mansion {
            a,
            b,
            c,
            f,
            x,
            y,
            j_star,
            ..
        } => (a, b, c, f, x, y, *j_star),
        _ => return Err(KExprError::BadCertificate("expected a mansion core".into())),
    };
    // L1: B\B_j -> 1, C\C_j -> 2, F -> 3, B_j -> 4, C_j -> 5
    let arms: Vec<Arm> = (0..b.len())
        .filter(|&i| i != j)
        .map(|i| Arm::from_lists(g, &b[i], &c[i], "mansion arm"))
        .collect::<Result<_, _>>()?;
    let e_spike = spike_expr(&arms, 1, 2, 3, 4);
    let mut bjcj = named_with(&b[j], 4);
    bjcj.extend(named_with(&c[j], 5));
    let e_bjcj = complete_expr(&bjcj, 1);
    let e_f = complete_expr(&named_with(f, 3), 1);
    let mut e = KExpression::union(KExpression::union(e_spike, e_bjcj), e_f);
    e = KExpression::join(3, 1, e);
    e = KExpression::join(3, 2, e);
    e = KExpression::join(5, 2, e);
    // L2: C_j joins C; absorb Y at 5
    e = KExpression::rename(5, 2, e);
    if !y.is_empty() {
        let e_y = complete_expr(&named_with(y, 5), 4);
        e = KExpression::union(e, e_y);
        e = KExpression::join(5, 2, e);
        e = KExpression::join(5, 3, e);
        e = KExpression::rename(5, 2, e);
    }
    // L3: B_j merges with F; absorb A at 4
    e = KExpression::rename(4, 3, e);
    let e_a = complete_expr(&named_with(a, 4), 3);
    e = KExpression::union(e, e_a);
    e = KExpression::join(4, 1, e);
    e = KExpression::join(4, 3, e);
    // final: absorb X at 5
    if !x.is_empty() {
        let e_x = complete_expr(&named_with(x, 5), 4);
        e = KExpression::union(e, e_x);
        e = KExpression::join(5, 3, e);
        e = KExpression::join(5, 4, e);
    }
    Ok(simplify(e))
}

/// Basket, width <= 5. Two assembly orders depending on whether F avoids the
/// staircase arm (j* == i*) or another arm.
pub fn expr_basket(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    require_verified(g, cert)?;
    let (a, b, c, f, i_star, j_star) = match &cert.core {
        CertCore::Basket {
            a,
            b,
            c,
            f,
            i_star,
            j_star,
        } => (a, b, c, f, *i_star, *j_star),
        _ => return Err(KExprError::BadCertificate("expected a basket core".into())),
    };
    let stair = Arm::from_lists(g, a, &b[i_star], "basket staircase")?;
    if f.is_empty() || j_star == i_star {
        // arms k != i*: 2-spike (B -> 1, C -> 2); F -> 3; A..B_{i*} pair; C_{i*}
        let others: Vec<usize> = (0..3).filter(|&k| k != i_star).collect();
        let arms: Vec<Arm> = others
            .iter()
            .map(|&k| Arm::from_lists(g, &b[k], &c[k], "basket arm"))
            .collect::<Result<_, _>>()?;
        let mut e = spike_expr(&arms, 1, 2, 3, 4);
        if !f.is_empty() {
            let e_f = complete_expr(&named_with(f, 3), 1);
            e = KExpression::union(e, e_f);
            e = KExpression::join(3, 1, e);
            e = KExpression::join(3, 2, e);
        }
        // A -> 5 over its staircase into B_{i*} -> 4
        let e_pair = arm_expr(&stair.b, &stair.c, 5, 4, 1, 2);
        e = KExpression::union(e, e_pair);
        e = KExpression::join(5, 1, e);
        if !f.is_empty() {
            e = KExpression::join(5, 3, e);
        }
        e = KExpression::rename(5, 1, e);
        let e_ci = complete_expr(&named_with(&c[i_star], 5), 1);
        e = KExpression::union(e, e_ci);
        e = KExpression::join(5, 4, e);
        e = KExpression::join(5, 2, e);
        Ok(simplify(e))
    } else {
        // F is complete to the staircase arm; the avoided arm comes last
        let mid: usize = (0..3).find(|&k| k != i_star && k != j_star).unwrap();
        let e_pair = arm_expr(&stair.b, &stair.c, 4, 1, 2, 3);
        let e_ci = complete_expr(&named_with(&c[i_star], 2), 3);
        let mut e = KExpression::union(e_pair, e_ci);
        e = KExpression::join(2, 1, e);
        let mut arm_mid = named_with(&b[mid], 3);
        arm_mid.extend(named_with(&c[mid], 5));
        let e_mid = complete_expr(&arm_mid, 1);
        e = KExpression::union(e, e_mid);
        e = KExpression::join(3, 4, e);
        e = KExpression::join(5, 2, e);
        e = KExpression::rename(3, 1, e);
        e = KExpression::rename(5, 2, e);
        let e_f = complete_expr(&named_with(f, 3), 1);
        e = KExpression::union(e, e_f);
        e = KExpression::join(3, 1, e);
        e = KExpression::join(3, 2, e);
        e = KExpression::join(3, 4, e);
        e = KExpression::rename(3, 1, e);
        let mut arm_avoid = named_with(&b[j_star], 3);
        arm_avoid.extend(named_with(&c[j_star], 5));
        let e_avoid = complete_expr(&arm_avoid, 1);
        e = KExpression::union(e, e_avoid);
        e = KExpression::join(3, 4, e);
        e = KExpression::join(5, 2, e);
        Ok(simplify(e))
    }
}

/// Crown, width <= 5: a double staircase grows X_{i*} against its two
/// neighbor parts, then the opposite staircase X_{i*+2} -- X_{i*+3} lands on
/// the two complete boundaries.
pub fn expr_crown(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    require_verified(g, cert)?;
    let (x, i_star) = match &cert.core {
        CertCore::Crown { x, i_star } => (x, *i_star),
        _ => return Err(KExprError::BadCertificate("expected a crown core".into())),
    };
    let part = |i: usize| -> &[usize] { &x[(i_star + i) % 5] };
    // relative to i*: S = X_0, P = X_1, R = X_4; staircase X_2 -- X_3
    let s_part = part(0);
    let p_part = part(1);
    let r_part = part(4);
    let p_reach: Vec<usize> = s_part
        .iter()
        .map(|&v| prefix_reach(g, v, p_part, "crown boundary (i*, i*+1)"))
        .collect::<Result<_, _>>()?;
    let r_reach: Vec<usize> = s_part
        .iter()
        .map(|&v| prefix_reach(g, v, r_part, "crown boundary (i*-1, i*)"))
        .collect::<Result<_, _>>()?;
    let s_named: Vec<(String, usize, usize)> = s_part
        .iter()
        .zip(p_reach.iter().zip(&r_reach))
        .map(|(&v, (&p, &r))| (v.to_string(), p, r))
        .collect();
    for w in s_named.windows(2) {
        if w[1].1 > w[0].1 || w[1].2 > w[0].2 {
            return Err(KExprError::Builder(
                "crown part order is not a simultaneous chain".into(),
            ));
        }
    }
    let mut e = double_stair_expr(&s_named, &named(p_part), &named(r_part));
    // X_2 -- X_3 staircase, then the complete boundaries X_1--X_2, X_3--X_4
    let arm23 = Arm::from_lists(g, part(2), part(3), "crown staircase (i*+2, i*+3)")?;
    let e23 = arm_expr(&arm23.b, &arm23.c, 4, 5, 1, 2);
    e = KExpression::union(e, e23);
    e = KExpression::join(4, 2, e);
    e = KExpression::join(5, 3, e);
    Ok(simplify(e))
}

fn prefix_reach(g: &Graph, v: usize, part: &[usize], what: &str) -> Result<usize, KExprError> {
    let reach = part.iter().take_while(|&&u| g.has_edge(v, u)).count();
    if part[reach..].iter().any(|&u| g.has_edge(v, u)) {
        return Err(KExprError::Builder(format!(
            "{what}: neighborhood of {v} is not a prefix of the stored order"
        )));
    }
    Ok(reach)
}

/// Q[S u P u R] where S is a clique with simultaneously nested prefix
/// reaches into cliques P and R (P anticomplete to R, first S vertex
/// complete to both). Final labels: S -> 1, P -> 2, R -> 3; width <= 5.
fn double_stair_expr(s: &[(String, usize, usize)], p: &[String], r: &[String]) -> KExpression {
    debug_assert!(!s.is_empty());
    let (name, rp, rr) = (&s[0].0, s[0].1, s[0].2);
    debug_assert_eq!(rp, p.len(), "top S vertex must be complete to P");
    debug_assert_eq!(rr, r.len(), "top S vertex must be complete to R");
    if s.len() == 1 {
        let mut head: Vec<(String, u32)> = vec![(name.clone(), 1)];
        head.extend(p.iter().map(|n| (n.clone(), 2)));
        let mut e = complete_expr(&head, 3);
        if !r.is_empty() {
            let e_r = complete_expr(&r.iter().map(|n| (n.clone(), 3)).collect::<Vec<_>>(), 1);
            e = KExpression::union(e, e_r);
            e = KExpression::join(1, 3, e);
        }
        return e;
    }
    let p2 = s[1].1;
    let r2 = s[1].2;
    let e_rec = double_stair_expr(&s[1..], &p[..p2], &r[..r2]);
    // s1 with its private P interval
    let mut top: Vec<(String, u32)> = vec![(name.clone(), 4)];
    top.extend(p[p2..].iter().map(|n| (n.clone(), 5)));
    let e_top = complete_expr(&top, 1);
    let mut e = KExpression::union(e_rec, e_top);
    e = KExpression::join(4, 1, e);
    if p2 > 0 {
        e = KExpression::join(4, 2, e);
    }
    if r2 > 0 {
        e = KExpression::join(4, 3, e);
    }
    if p2 > 0 && p2 < p.len() {
        e = KExpression::join(5, 2, e);
    }
    e = KExpression::rename(5, 2, e);
    if r2 < r.len() {
        let tail: Vec<(String, u32)> = r[r2..].iter().map(|n| (n.clone(), 5)).collect();
        let e_r = complete_expr(&tail, 1);
        e = KExpression::union(e, e_r);
        e = KExpression::join(5, 4, e);
        if r2 > 0 {
            e = KExpression::join(5, 3, e);
        }
        e = KExpression::rename(5, 3, e);
    }
    e = KExpression::rename(4, 1, e);
    e
}

/// Thickened base, width <= n0 + 1: one label per base vertex plus a shared
/// worker label.
pub fn expr_thickened(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    require_verified(g, cert)?;
    let (base_name, classes) = match &cert.core {
        CertCore::Thickened { base_name, classes } => (base_name, classes),
        _ => {
            return Err(KExprError::BadCertificate(
                "expected a thickened core".into(),
            ))
        }
    };
    let base = crate::families::base_by_name(base_name)
        .map_err(|e| KExprError::BadCertificate(e.to_string()))?;
    let n0 = base.n() as u32;
    let spare = n0 + 1;
    // fold classes most-connected-first so the coloring DP's pending joins
    // bite as early as possible
    let mut order: Vec<usize> = Vec::with_capacity(base.n());
    let mut placed = crate::graph::VertexSet::new(base.n());
    for _ in 0..base.n() {
        let v = (0..base.n())
            .filter(|&v| !placed.contains(v))
            .max_by_key(|&v| {
                let back = base.neighbors(v).intersection(&placed).len();
                (back, base.degree(v), std::cmp::Reverse(v))
            })
            .unwrap();
        order.push(v);
        placed.insert(v);
    }
    let mut e: Option<KExpression> = None;
    for &i in &order {
        let verts = named_with(&classes[i], i as u32 + 1);
        let e_class = complete_expr(&verts, spare);
        e = Some(match e {
            None => e_class,
            Some(acc) => KExpression::union(acc, e_class),
        });
    }
    let mut e = e.expect("bases are nonnull");
    for (u, v) in base.edges() {
        e = KExpression::join(u as u32 + 1, v as u32 + 1, e);
    }
    Ok(simplify(e))
}

/// Re-add universal vertices: width <= max(width(e), 2). Live labels first
/// collapse to one, then each universal enters on a reused label.
pub fn expr_add_universal(e: KExpression, m: usize) -> KExpression {
    let existing: HashSet<String> = e.vertex_names().into_iter().collect();
    let mut names = Vec::with_capacity(m);
    let mut i = 0usize;
    while names.len() < m {
        let cand = format!("u{i}");
        if !existing.contains(&cand) {
            names.push(cand);
        }
        i += 1;
    }
    expr_add_universal_named(e, &names)
}

pub fn expr_add_universal_named(e: KExpression, names: &[String]) -> KExpression {
    if names.is_empty() {
        return e;
    }
    let live = e.live_labels();
    let keep = *live.iter().next().expect("expression has vertices");
    let mut e = live
        .iter()
        .filter(|&&l| l != keep)
        .fold(e, |acc, &l| KExpression::rename(l, keep, acc));
    let all = e.labels();
    let spare = all
        .iter()
        .copied()
        .find(|&l| l != keep)
        .unwrap_or_else(|| keep + 1);
    for name in names {
        e = KExpression::union(e, KExpression::intro(spare, name));
        e = KExpression::join(spare, keep, e);
        e = KExpression::rename(spare, keep, e);
    }
    e
}

/// End-to-end: classify, dispatch to the matching builder, re-add the
/// universal vertices. Vertex names are the decimal ids of `g`.
pub fn expr_for(g: &Graph) -> Result<(KExpression, Certificate), KExprError> {
    let outcome = classify(g)?;
    let cert = match outcome {
        ClassifyOutcome::InClassNoSimplicial(cert) => cert,
        ClassifyOutcome::HasSimplicial(v) => {
            return Err(KExprError::NoCertificate(format!(
                "graph has a simplicial vertex ({v})"
            )))
        }
        ClassifyOutcome::NotInClass { pattern, .. } => {
            return Err(KExprError::NoCertificate(format!(
                "graph is not in the class (induced {})",
                pattern.name()
            )))
        }
    };
    let e = expr_for_certificate(g, &cert)?;
    Ok((e, cert))
}

/// Builder dispatch for an already-verified certificate, including the
/// universal re-addition.
pub fn expr_for_certificate(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    require_verified(g, cert)?;
    let core_expr = expr_for_core(g, cert)?;
    let names: Vec<String> = cert.universals.iter().map(|v| v.to_string()).collect();
    Ok(expr_add_universal_named(core_expr, &names))
}

/// Expression for the certificate's core alone (universals excluded), with
/// vertex names already translated to `g`'s ids.
pub fn expr_for_core(g: &Graph, cert: &Certificate) -> Result<KExpression, KExprError> {
    let universal_set: HashSet<usize> = cert.universals.iter().copied().collect();
    let inner_ids: Vec<usize> = (0..g.n()).filter(|v| !universal_set.contains(v)).collect();
    let inner_set = crate::graph::VertexSet::from_iter(g.n(), inner_ids.iter().copied());
    let (inner, map) = g.induced(&inner_set);
    // rebuild the core certificate in the induced graph's ids
    let mut inv = vec![usize::MAX; g.n()];
    for (new, &old) in map.iter().enumerate() {
        inv[old] = new;
    }
    let remapped = remap_core_ids(&cert.core, &inv);
    let inner_cert = Certificate {
        universals: vec![],
        core: remapped,
    };
    let core_expr = match &inner_cert.core {
        CertCore::Villa { .. } => expr_villa(&inner, &inner_cert)?,
        CertCore::Mansion { .. } => expr_mansion(&inner, &inner_cert)?,
        CertCore::Basket { .. } => expr_basket(&inner, &inner_cert)?,
        CertCore::Crown { .. } => expr_crown(&inner, &inner_cert)?,
        CertCore::Thickened { .. } => expr_thickened(&inner, &inner_cert)?,
        CertCore::Complete {} => {
            let verts: Vec<(String, u32)> = (0..inner.n()).map(|v| (v.to_string(), 1)).collect();
            expr_complete(&verts)?
        }
    };
    // builder names are inner ids; translate back to g's ids
    Ok(rename_vertices(core_expr, &|name: &str| {
        let inner_id: usize = name.parse().expect("builder names are ids");
        map[inner_id].to_string()
    }))
}

fn rename_vertices(e: KExpression, f: &dyn Fn(&str) -> String) -> KExpression {
    match e {
        KExpression::Intro { label, name } => KExpression::Intro {
            label,
            name: f(&name),
        },
        KExpression::Union { left, right } => KExpression::Union {
            left: Box::new(rename_vertices(*left, f)),
            right: Box::new(rename_vertices(*right, f)),
        },
        KExpression::Join { i, j, inner } => KExpression::Join {
            i,
            j,
            inner: Box::new(rename_vertices(*inner, f)),
        },
        KExpression::Rename { from, to, inner } => KExpression::Rename {
            from,
            to,
            inner: Box::new(rename_vertices(*inner, f)),
        },
    }
}

fn remap_core_ids(core: &CertCore, inv: &[usize]) -> CertCore {
    let m = |part: &[usize]| -> Vec<usize> { part.iter().map(|&v| inv[v]).collect() };
    let mm = |parts: &[Vec<usize>]| -> Vec<Vec<usize>> { parts.iter().map(|p| m(p)).collect() };
    match core {
        CertCore::Villa { t, a, b, c } => CertCore::Villa {
            t: *t,
            a: m(a),
            b: mm(b),
            c: mm(c),
        },
        CertCore::Mansion {
            t,
            a,
            b,
            c,
            f,
            x,
            y,
            j_star,
        } => CertCore::Mansion {
            t: *t,
            a: m(a),
            b: mm(b),
            c: mm(c),
            f: m(f),
            x: m(x),
            y: m(y),
            j_star: *j_star,
        },
        CertCore::Basket {
            a,
            b,
            c,
            f,
            i_star,
            j_star,
        } => CertCore::Basket {
            a: m(a),
            b: mm(b),
            c: mm(c),
            f: m(f),
            i_star: *i_star,
            j_star: *j_star,
        },
        CertCore::Crown { x, i_star } => CertCore::Crown {
            x: mm(x),
            i_star: *i_star,
        },
        CertCore::Thickened { base_name, classes } => CertCore::Thickened {
            base_name: base_name.clone(),
            classes: mm(classes),
        },
        CertCore::Complete {} => CertCore::Complete {},
    }
}

/// Cosmetic cleanup: drop joins touching a label with no live vertices and
/// renames of dead labels. Semantics are unchanged; the width can only drop.
pub fn simplify(e: KExpression) -> KExpression {
    simplify_rec(e).0
}

fn simplify_rec(e: KExpression) -> (KExpression, BTreeSet<u32>) {
    match e {
        KExpression::Intro { label, name } => {
            let live = [label].into_iter().collect();
            (KExpression::Intro { label, name }, live)
        }
        KExpression::Union { left, right } => {
            let (l, mut live) = simplify_rec(*left);
            let (r, live_r) = simplify_rec(*right);
            live.extend(live_r);
            (KExpression::union(l, r), live)
        }
        KExpression::Join { i, j, inner } => {
            let (c, live) = simplify_rec(*inner);
            if live.contains(&i) && live.contains(&j) {
                (
                    KExpression::Join {
                        i,
                        j,
                        inner: Box::new(c),
                    },
                    live,
                )
            } else {
                (c, live)
            }
        }
        KExpression::Rename { from, to, inner } => {
            let (c, mut live) = simplify_rec(*inner);
            if live.remove(&from) {
                live.insert(to);
                (
                    KExpression::Rename {
                        from,
                        to,
                        inner: Box::new(c),
                    },
                    live,
                )
            } else {
                (c, live)
            }
        }
    }
}

/// True when the expression evaluates edge-exactly to `g` under decimal-id
/// vertex names.
pub fn eval_matches(g: &Graph, e: &KExpression) -> bool {
    let Ok(lg) = eval(e) else {
        return false;
    };
    if lg.graph.n() != g.n() {
        return false;
    }
    let mut ids = Vec::with_capacity(lg.names.len());
    for name in &lg.names {
        match name.parse::<usize>() {
            Ok(v) if v < g.n() => ids.push(v),
            _ => return false,
        }
    }
    let mut seen = vec![false; g.n()];
    for &v in &ids {
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    for u in 0..lg.graph.n() {
        for v in u + 1..lg.graph.n() {
            if lg.graph.has_edge(u, v) != g.has_edge(ids[u], ids[v]) {
                return false;
            }
        }
    }
    true
}

/// Seeded random well-formed expression on `n_vertices` introductions over
/// labels 1..=num_labels; used by the parser and coloring test suites.
pub fn random_expression(seed: u64, n_vertices: usize, num_labels: u32) -> KExpression {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut next_name = 0usize;
    let mut intro = |rng: &mut rand_chacha::ChaCha8Rng| {
        let name = format!("x{next_name}");
        next_name += 1;
        KExpression::intro(rng.gen_range(1..=num_labels), &name)
    };
    let mut forest: Vec<KExpression> = Vec::new();
    forest.push(intro(&mut rng));
    for _ in 1..n_vertices.max(1) {
        let e = intro(&mut rng);
        forest.push(e);
    }
    while forest.len() > 1 {
        let a = forest.remove(rng.gen_range(0..forest.len()));
        let b = forest.remove(rng.gen_range(0..forest.len()));
        let mut e = KExpression::union(a, b);
        for _ in 0..rng.gen_range(0..3) {
            let i = rng.gen_range(1..=num_labels);
            let mut j = rng.gen_range(1..=num_labels);
            if num_labels < 2 {
                break;
            }
            while j == i {
                j = rng.gen_range(1..=num_labels);
            }
            if rng.gen_bool(0.7) {
                e = KExpression::join(i, j, e);
            } else {
                e = KExpression::rename(i, j, e);
            }
        }
        forest.push(e);
    }
    forest.pop().unwrap()
}
