//! Finite base-pointed square complexes labeled over V(Γ), i.e. combinatorial
//! maps to the Salvetti complex.
//!
//! Only the 1-skeleton and squares are stored. The local-isometry test is the
//! square-level link condition: folded 1-skeleton, every corner between
//! commuting distinct labels filled by exactly one square.
//!
//! Complexes built from a rose carry provenance: every edge `e` has a product
//! `E(e)` of the rose generators with `P(from)·label·P(to)⁻¹ = E(e)` in A_Γ for
//! some assignment `P` with `P(basepoint) = 1`. Folding and square completion
//! keep this invariant, so the label of any loop at the basepoint is the product
//! of provenance along it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{input, RaagError, Result};
use crate::graph::{DefiningGraph, JoinCover, Vertex, VertexSet};
use crate::product::Product;
use crate::word::{are_equal, is_identity, normalize_unchecked, Letter, Word};

/// Default cap on simple cycles enumerated by [`simple_cycle_supports`].
pub const SIMPLE_CYCLE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Vertex,
}

/// An edge traversed along (`forward`) or against its orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirEdge {
    pub edge: usize,
    pub forward: bool,
}

impl DirEdge {
    pub fn rev(self) -> DirEdge {
        DirEdge {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// Square with boundary `bottom · right · top⁻¹ · left⁻¹`, all four edges
/// positively oriented; bottom and top carry the smaller label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    pub bottom: usize,
    pub right: usize,
    pub top: usize,
    pub left: usize,
}

/// Two edge germs at a vertex, `first < second`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner {
    pub vertex: usize,
    pub first: Letter,
    pub second: Letter,
}

impl Corner {
    pub fn new(vertex: usize, a: Letter, b: Letter) -> Self {
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        Corner {
            vertex,
            first,
            second,
        }
    }

    pub fn describe(&self, g: &DefiningGraph) -> String {
        format!(
            "{}:{}/{}",
            self.vertex,
            g.format_word(&Word(vec![self.first])),
            g.format_word(&Word(vec![self.second]))
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IsometryReport {
    pub folded: bool,
    /// Germs shared by two edges.
    pub fold_conflicts: Vec<(usize, Letter)>,
    pub missing_squares: Vec<Corner>,
    pub duplicate_squares: Vec<Corner>,
}

impl IsometryReport {
    pub fn passes(&self) -> bool {
        self.folded && self.missing_squares.is_empty() && self.duplicate_squares.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LabeledComplex {
    vertex_count: usize,
    basepoint: usize,
    edges: Vec<Edge>,
    squares: Vec<Square>,
    provenance: Option<Vec<Product>>,
}

/// Result of following a word from the basepoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub path: Vec<DirEdge>,
    pub end: usize,
    pub is_loop: bool,
}

/// A spanning-tree basis loop at the basepoint through one non-tree edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisLoop {
    pub edge: usize,
    pub path: Vec<DirEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleCycle {
    pub start: usize,
    pub path: Vec<DirEdge>,
    pub label: Word,
    pub support: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScanVerdict {
    Pure {
        cycles: usize,
    },
    Witness {
        cycle: SimpleCycle,
        cover: JoinCover,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaturationStatus {
    Complete,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub complex: LabeledComplex,
    pub status: SaturationStatus,
    pub steps: usize,
}

/// Isomorphism invariant of a folded complex: vertices renumbered in BFS order
/// from the basepoint, following germs in letter order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CanonicalComplex {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, Vertex)>,
    pub squares: Vec<[(usize, usize, Vertex); 4]>,
}

type Incidence = Vec<Vec<(Letter, DirEdge, usize)>>;

impl LabeledComplex {
    /// A single vertex; the complex of the trivial subgroup.
    pub fn point() -> Self {
        LabeledComplex {
            vertex_count: 1,
            basepoint: 0,
            edges: vec![],
            squares: vec![],
            provenance: Some(vec![]),
        }
    }

    /// Builds and validates a complex without provenance.
    pub fn from_parts(
        g: &DefiningGraph,
        vertex_count: usize,
        basepoint: usize,
        edges: Vec<Edge>,
        squares: Vec<Square>,
    ) -> Result<Self> {
        if basepoint >= vertex_count {
            return input("basepoint out of range");
        }
        for (i, e) in edges.iter().enumerate() {
            if e.from >= vertex_count || e.to >= vertex_count {
                return input(format!("edge {i} has an endpoint out of range"));
            }
            if e.label.index() >= g.len() {
                return input(format!("edge {i} has an unknown label"));
            }
        }
        let c = LabeledComplex {
            vertex_count,
            basepoint,
            edges,
            squares,
            provenance: None,
        };
        for (i, s) in c.squares.iter().enumerate() {
            c.check_square(g, s)
                .map_err(|m| RaagError::Input(format!("square {i}: {m}")))?;
        }
        if !c.is_connected() {
            return input("complex is not connected");
        }
        Ok(c)
    }

    fn check_square(&self, g: &DefiningGraph, s: &Square) -> std::result::Result<(), String> {
        let ids = [s.bottom, s.right, s.top, s.left];
        if ids.iter().any(|&e| e >= self.edges.len()) {
            return Err("edge id out of range".into());
        }
        let [b, r, t, l] = ids.map(|e| self.edges[e]);
        if b.label != t.label || l.label != r.label {
            return Err("opposite sides carry different labels".into());
        }
        if b.label >= l.label || !g.adjacent(b.label, l.label) {
            return Err("labels are not an ordered commuting pair".into());
        }
        if b.from != l.from || b.to != r.from || t.from != l.to || t.to != r.to {
            return Err("boundary is not closed".into());
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        let inc = self.incidence();
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([self.basepoint]);
        seen[self.basepoint] = true;
        while let Some(v) = queue.pop_front() {
            for &(_, _, u) in &inc[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn has_provenance(&self) -> bool {
        self.provenance.is_some()
    }

    /// Provenance product of an edge in its positive direction.
    pub fn edge_expression(&self, e: usize) -> Option<&Product> {
        self.provenance.as_ref().and_then(|p| p.get(e))
    }

    /// A copy with one square removed.
    pub fn without_square(&self, i: usize) -> LabeledComplex {
        let mut c = self.clone();
        if i < c.squares.len() {
            c.squares.remove(i);
        }
        c
    }

    pub fn letter(&self, d: DirEdge) -> Letter {
        Letter::new(self.edges[d.edge].label, !d.forward)
    }

    pub fn start(&self, d: DirEdge) -> usize {
        let e = self.edges[d.edge];
        if d.forward {
            e.from
        } else {
            e.to
        }
    }

    pub fn end(&self, d: DirEdge) -> usize {
        self.start(d.rev())
    }

    /// Per vertex, every (germ, directed edge leaving along it, far endpoint),
    /// sorted by germ then edge.
    fn incidence(&self) -> Incidence {
        let mut inc: Incidence = vec![Vec::new(); self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            let fwd = DirEdge {
                edge: i,
                forward: true,
            };
            inc[e.from].push((Letter::new(e.label, false), fwd, e.to));
            inc[e.to].push((Letter::new(e.label, true), fwd.rev(), e.from));
        }
        for list in &mut inc {
            list.sort();
        }
        inc
    }

    fn follow(inc: &Incidence, v: usize, l: Letter) -> Option<(DirEdge, usize)> {
        inc[v]
            .iter()
            .find(|(g, _, _)| *g == l)
            .map(|&(_, d, u)| (d, u))
    }

    pub fn path_label(&self, path: &[DirEdge]) -> Word {
        Word(path.iter().map(|&d| self.letter(d)).collect())
    }

    /// Product of provenance along a path; `None` without provenance.
    pub fn path_expression(&self, path: &[DirEdge]) -> Option<Product> {
        let prov = self.provenance.as_ref()?;
        let mut out = Product::identity();
        for d in path {
            let e = &prov[d.edge];
            out = out.mul(&if d.forward { e.clone() } else { e.inverse() });
        }
        Some(out)
    }

    /// Follows `w` letter by letter from the basepoint.
    pub fn trace_word(&self, w: &Word) -> Option<Trace> {
        let inc = self.incidence();
        let mut v = self.basepoint;
        let mut path = Vec::with_capacity(w.len());
        for &l in w.letters() {
            let (d, u) = Self::follow(&inc, v, l)?;
            path.push(d);
            v = u;
        }
        Some(Trace {
            path,
            end: v,
            is_loop: v == self.basepoint,
        })
    }

    /// Some member of the shuffle class of `normalize(w)` that traces a loop at
    /// the basepoint.
    pub fn loop_shuffle(&self, g: &DefiningGraph, w: &Word) -> Option<Word> {
        let nf = normalize_unchecked(g, w);
        let letters = nf.word().letters();
        let n = letters.len();
        let preds = crate::bits::dependency_preds(g, letters);
        let inc = self.incidence();
        let mut failed = std::collections::HashSet::new();
        let mut used = crate::bits::PosSet::new(n);
        let mut order = Vec::with_capacity(n);
        #[allow(clippy::too_many_arguments)]
        fn dfs(
            c: &LabeledComplex,
            inc: &Incidence,
            letters: &[Letter],
            preds: &[crate::bits::PosSet],
            used: &mut crate::bits::PosSet,
            order: &mut Vec<Letter>,
            v: usize,
            failed: &mut std::collections::HashSet<(crate::bits::PosSet, usize)>,
        ) -> bool {
            if order.len() == letters.len() {
                return v == c.basepoint;
            }
            if failed.contains(&(used.clone(), v)) {
                return false;
            }
            for i in 0..letters.len() {
                if used.get(i) || !preds[i].is_subset(used) {
                    continue;
                }
                if let Some((_, u)) = LabeledComplex::follow(inc, v, letters[i]) {
                    used.set(i);
                    order.push(letters[i]);
                    if dfs(c, inc, letters, preds, used, order, u, failed) {
                        return true;
                    }
                    order.pop();
                    used.unset(i);
                }
            }
            failed.insert((used.clone(), v));
            false
        }
        dfs(
            self,
            &inc,
            letters,
            &preds,
            &mut used,
            &mut order,
            self.basepoint,
            &mut failed,
        )
        .then_some(Word(order))
    }

    /// Membership in the π₁-image; exact when the complex passes
    /// [`check_local_isometry`], sound in general.
    pub fn contains(&self, g: &DefiningGraph, w: &Word) -> bool {
        self.loop_shuffle(g, w).is_some()
    }

    /// BFS spanning tree: for each vertex, the directed edge used to reach it.
    fn spanning_tree(&self) -> Vec<Option<DirEdge>> {
        let inc = self.incidence();
        let mut parent = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        seen[self.basepoint] = true;
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(v) = queue.pop_front() {
            for &(_, d, u) in &inc[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(d);
                    queue.push_back(u);
                }
            }
        }
        parent
    }

    fn tree_path(parent: &[Option<DirEdge>], c: &LabeledComplex, mut v: usize) -> Vec<DirEdge> {
        let mut path = Vec::new();
        while let Some(d) = parent[v] {
            path.push(d);
            v = c.start(d);
        }
        path.reverse();
        path
    }

    /// Path from the basepoint to `v` in the spanning tree.
    pub fn path_to(&self, v: usize) -> Vec<DirEdge> {
        Self::tree_path(&self.spanning_tree(), self, v)
    }

    /// One loop per non-tree edge; together they generate π₁ of the 1-skeleton.
    pub fn basis_loops(&self) -> Vec<BasisLoop> {
        let parent = self.spanning_tree();
        let tree: BTreeSet<usize> = parent.iter().flatten().map(|d| d.edge).collect();
        (0..self.edges.len())
            .filter(|e| !tree.contains(e))
            .map(|e| {
                let edge = self.edges[e];
                let mut path = Self::tree_path(&parent, self, edge.from);
                path.push(DirEdge {
                    edge: e,
                    forward: true,
                });
                let back = Self::tree_path(&parent, self, edge.to);
                path.extend(back.iter().rev().map(|d| d.rev()));
                BasisLoop { edge: e, path }
            })
            .collect()
    }

    /// Checks that the π₁-image equals ⟨gens⟩: every generator traces a loop,
    /// as spelled or up to shuffling its normal form, and every basis loop's label equals its provenance product.
    pub fn check_image(&self, g: &DefiningGraph, gens: &[Word]) -> std::result::Result<(), String> {
        for (i, w) in gens.iter().enumerate() {
            let literal = self.trace_word(&w.free_reduce()).is_some_and(|t| t.is_loop);
            if !literal && !self.contains(g, w) {
                return Err(format!("generator {} does not trace a loop", i + 1));
            }
        }
        for bl in self.basis_loops() {
            let Some(expr) = self.path_expression(&bl.path) else {
                return Err("complex carries no provenance".into());
            };
            let value = expr.evaluate(gens).map_err(|e| e.to_string())?;
            if !are_equal(g, &self.path_label(&bl.path), &value) {
                return Err(format!(
                    "basis loop through edge {} is not {}",
                    bl.edge, expr
                ));
            }
        }
        Ok(())
    }

    pub fn canonical_form(&self) -> CanonicalComplex {
        let inc = self.incidence();
        let mut order = vec![usize::MAX; self.vertex_count];
        let mut next = 0;
        let mut queue = VecDeque::from([self.basepoint]);
        order[self.basepoint] = 0;
        next += 1;
        while let Some(v) = queue.pop_front() {
            for &(_, _, u) in &inc[v] {
                if order[u] == usize::MAX {
                    order[u] = next;
                    next += 1;
                    queue.push_back(u);
                }
            }
        }
        for o in order.iter_mut() {
            if *o == usize::MAX {
                *o = next;
                next += 1;
            }
        }
        let key = |e: usize| {
            let e = self.edges[e];
            (order[e.from], order[e.to], e.label)
        };
        let mut edges: Vec<_> = (0..self.edges.len()).map(key).collect();
        edges.sort();
        let mut squares: Vec<_> = self
            .squares
            .iter()
            .map(|s| [key(s.bottom), key(s.right), key(s.top), key(s.left)])
            .collect();
        squares.sort();
        CanonicalComplex {
            vertex_count: self.vertex_count,
            edges,
            squares,
        }
    }

    pub fn to_text(&self, g: &DefiningGraph) -> String {
        let mut out = String::new();
        for v in 0..self.vertex_count {
            out.push_str(&format!("vertex {v}\n"));
        }
        out.push_str(&format!("basepoint {}\n", self.basepoint));
        for e in &self.edges {
            out.push_str(&format!("dedge {} {} {}\n", e.from, e.to, g.name(e.label)));
        }
        for s in &self.squares {
            out.push_str(&format!(
                "square {} {} {}^-1 {}^-1\n",
                s.bottom, s.right, s.top, s.left
            ));
        }
        out
    }

    /// Parses the format written by [`LabeledComplex::to_text`]. Vertices must
    /// be listed as `0..n` in order and squares in canonical orientation.
    pub fn parse(g: &DefiningGraph, text: &str) -> Result<Self> {
        let mut vertex_count = 0;
        let mut basepoint = None;
        let mut edges = Vec::new();
        let mut squares = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: &str| RaagError::Input(format!("line {}: {m}", no + 1));
            let toks: Vec<&str> = line.split_whitespace().collect();
            let num = |t: &str| t.parse::<usize>().map_err(|_| err("expected a number"));
            match toks.as_slice() {
                ["vertex", id] => {
                    if num(id)? != vertex_count {
                        return Err(err("vertices must be numbered 0, 1, 2, ... in order"));
                    }
                    vertex_count += 1;
                }
                ["basepoint", id] => {
                    if basepoint.replace(num(id)?).is_some() {
                        return Err(err("duplicate basepoint"));
                    }
                }
                ["dedge", from, to, label] => edges.push(Edge {
                    from: num(from)?,
                    to: num(to)?,
                    label: g.vertex(label).map_err(|_| err("unknown label"))?,
                }),
                ["square", b, r, t, l] => {
                    let inv = |t: &str| -> Result<usize> {
                        num(t
                            .strip_suffix("^-1")
                            .ok_or_else(|| err("expected `e^-1`"))?)
                    };
                    squares.push(Square {
                        bottom: num(b)?,
                        right: num(r)?,
                        top: inv(t)?,
                        left: inv(l)?,
                    });
                }
                _ => return Err(err("unrecognised line")),
            }
        }
        let basepoint = basepoint.ok_or_else(|| RaagError::Input("missing basepoint".into()))?;
        Self::from_parts(g, vertex_count, basepoint, edges, squares)
    }
}

/// One petal per generator at the basepoint, spelling the generator's word.
pub fn rose(g: &DefiningGraph, gens: &[Word]) -> Result<LabeledComplex> {
    if gens.is_empty() {
        return input("at least one generator is required");
    }
    for (i, w) in gens.iter().enumerate() {
        g.check_word(w)?;
        if w.is_empty() {
            return input(format!("generator {} is the empty word", i + 1));
        }
    }
    Ok(rose_indexed(gens.iter().cloned().enumerate()))
}

/// Rose on `(index, word)` petals; provenance refers to the given indices.
pub(crate) fn rose_indexed(petals: impl IntoIterator<Item = (usize, Word)>) -> LabeledComplex {
    let mut c = LabeledComplex::point();
    let prov = c.provenance.as_mut().expect("point has provenance");
    for (i, w) in petals {
        let mut at = 0;
        for (k, l) in w.letters().iter().enumerate() {
            let last = k + 1 == w.len();
            let next = if last {
                0
            } else {
                c.vertex_count += 1;
                c.vertex_count - 1
            };
            let (from, to) = if l.inverse { (next, at) } else { (at, next) };
            c.edges.push(Edge {
                from,
                to,
                label: l.vertex,
            });
            prov.push(if !last {
                Product::identity()
            } else if l.inverse {
                Product::generator(i).inverse()
            } else {
                Product::generator(i)
            });
            at = next;
        }
    }
    c
}

/// Mutable working copy used by folding and square completion.
struct Work {
    alive: Vec<bool>,
    basepoint: usize,
    edges: Vec<Option<Edge>>,
    squares: Vec<Square>,
    prov: Option<Vec<Product>>,
}

impl Work {
    fn new(c: &LabeledComplex) -> Self {
        Work {
            alive: vec![true; c.vertex_count],
            basepoint: c.basepoint,
            edges: c.edges.iter().copied().map(Some).collect(),
            squares: c.squares.clone(),
            prov: c.provenance.clone(),
        }
    }

    fn edge(&self, e: usize) -> Edge {
        self.edges[e].expect("live edge")
    }

    fn expr(&self, e: usize) -> Product {
        self.prov.as_ref().map(|p| p[e].clone()).unwrap_or_default()
    }

    fn trav(&self, d: DirEdge) -> Product {
        if d.forward {
            self.expr(d.edge)
        } else {
            self.expr(d.edge).inverse()
        }
    }

    fn add_vertex(&mut self) -> usize {
        self.alive.push(true);
        self.alive.len() - 1
    }

    fn add_edge(&mut self, from: usize, to: usize, label: Vertex, expr: Product) -> usize {
        self.edges.push(Some(Edge { from, to, label }));
        if let Some(p) = self.prov.as_mut() {
            p.push(expr);
        }
        self.edges.len() - 1
    }

    /// Adds an edge traversed as `from --l--> to` with traversal product `t`.
    fn add_dir(&mut self, from: usize, to: usize, l: Letter, t: Product) -> DirEdge {
        if l.inverse {
            let e = self.add_edge(to, from, l.vertex, t.inverse());
            DirEdge {
                edge: e,
                forward: false,
            }
        } else {
            let e = self.add_edge(from, to, l.vertex, t);
            DirEdge {
                edge: e,
                forward: true,
            }
        }
    }

    fn start(&self, d: DirEdge) -> usize {
        let e = self.edge(d.edge);
        if d.forward {
            e.from
        } else {
            e.to
        }
    }

    fn end(&self, d: DirEdge) -> usize {
        self.start(d.rev())
    }

    /// First live edge leaving `v` along germ `l`.
    fn follow(&self, v: usize, l: Letter) -> Option<DirEdge> {
        self.edges.iter().enumerate().find_map(|(i, e)| {
            let e = (*e)?;
            if e.label != l.vertex {
                return None;
            }
            let forward = !l.inverse;
            let start = if forward { e.from } else { e.to };
            (start == v).then_some(DirEdge { edge: i, forward })
        })
    }

    /// Identifies `drop` with `keep`, where `P(drop) = D·P(keep)`.
    fn merge_vertices(&mut self, mut keep: usize, mut drop: usize, mut d: Product) {
        if keep == drop {
            return;
        }
        if drop == self.basepoint {
            std::mem::swap(&mut keep, &mut drop);
            d = d.inverse();
        }
        let d_inv = d.inverse();
        for i in 0..self.edges.len() {
            let Some(mut e) = self.edges[i] else { continue };
            if e.from == drop {
                e.from = keep;
                if let Some(p) = self.prov.as_mut() {
                    p[i] = d_inv.mul(&p[i]);
                }
            }
            if e.to == drop {
                e.to = keep;
                if let Some(p) = self.prov.as_mut() {
                    p[i] = p[i].mul(&d);
                }
            }
            self.edges[i] = Some(e);
        }
        self.alive[drop] = false;
    }

    /// Pairs of live edges sharing a germ: `(first, second, outgoing)`.
    fn conflicts(&self) -> Vec<(usize, usize, bool)> {
        let mut first: BTreeMap<(usize, Letter), usize> = BTreeMap::new();
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = e else { continue };
            for (v, l, outgoing) in [
                (e.from, Letter::new(e.label, false), true),
                (e.to, Letter::new(e.label, true), false),
            ] {
                match first.get(&(v, l)) {
                    Some(&f) => out.push((f, i, outgoing)),
                    None => {
                        first.insert((v, l), i);
                    }
                }
            }
        }
        out
    }

    /// Folds `e2` onto `e1`; both share the germ at their start (`outgoing`)
    /// or end.
    fn identify(&mut self, e1: usize, e2: usize, outgoing: bool) {
        let (a, b) = (self.edge(e1), self.edge(e2));
        let (u1, u2, d) = if outgoing {
            (a.to, b.to, self.expr(e2).inverse().mul(&self.expr(e1)))
        } else {
            (a.from, b.from, self.expr(e2).mul(&self.expr(e1).inverse()))
        };
        self.merge_vertices(u1, u2, d);
        self.edges[e2] = None;
        for s in &mut self.squares {
            for id in [&mut s.bottom, &mut s.right, &mut s.top, &mut s.left] {
                if *id == e2 {
                    *id = e1;
                }
            }
        }
    }

    fn still_conflict(&self, e1: usize, e2: usize, outgoing: bool) -> bool {
        match (self.edges[e1], self.edges[e2]) {
            (Some(a), Some(b)) if e1 != e2 && a.label == b.label => {
                if outgoing {
                    a.from == b.from
                } else {
                    a.to == b.to
                }
            }
            _ => false,
        }
    }

    fn fold(&mut self, pick: &mut dyn FnMut(usize) -> usize, one_at_a_time: bool) {
        loop {
            let conflicts = self.conflicts();
            if conflicts.is_empty() {
                return;
            }
            if one_at_a_time {
                let (e1, e2, o) = conflicts[pick(conflicts.len()) % conflicts.len()];
                self.identify(e1, e2, o);
            } else {
                for (e1, e2, o) in conflicts {
                    if self.still_conflict(e1, e2, o) {
                        self.identify(e1, e2, o);
                    }
                }
            }
        }
    }

    /// Prunes hairs, deduplicates squares and renumbers with the basepoint
    /// first.
    fn finish(mut self) -> LabeledComplex {
        let n = self.alive.len();
        let mut degree = vec![0usize; n];
        for e in self.edges.iter().flatten() {
            degree[e.from] += 1;
            degree[e.to] += 1;
        }
        let mut queue: Vec<usize> = (0..n)
            .filter(|&v| self.alive[v] && v != self.basepoint && degree[v] <= 1)
            .collect();
        while let Some(v) = queue.pop() {
            if !self.alive[v] {
                continue;
            }
            self.alive[v] = false;
            for i in 0..self.edges.len() {
                let Some(e) = self.edges[i] else { continue };
                if e.from == v || e.to == v {
                    self.edges[i] = None;
                    let other = if e.from == v { e.to } else { e.from };
                    degree[other] -= 1;
                    if other != self.basepoint && self.alive[other] && degree[other] <= 1 {
                        queue.push(other);
                    }
                }
            }
        }

        let mut vmap = vec![usize::MAX; n];
        vmap[self.basepoint] = 0;
        let mut next = 1;
        for v in 0..n {
            if self.alive[v] && v != self.basepoint {
                vmap[v] = next;
                next += 1;
            }
        }
        let mut emap = vec![usize::MAX; self.edges.len()];
        let mut edges = Vec::new();
        let mut prov = self.prov.as_ref().map(|_| Vec::new());
        for (i, e) in self.edges.iter().enumerate() {
            let Some(e) = e else { continue };
            emap[i] = edges.len();
            edges.push(Edge {
                from: vmap[e.from],
                to: vmap[e.to],
                label: e.label,
            });
            if let (Some(out), Some(p)) = (prov.as_mut(), self.prov.as_ref()) {
                out.push(p[i].clone());
            }
        }
        let squares: BTreeSet<Square> = self
            .squares
            .iter()
            .filter(|s| {
                [s.bottom, s.right, s.top, s.left]
                    .iter()
                    .all(|&e| emap[e] != usize::MAX)
            })
            .map(|s| Square {
                bottom: emap[s.bottom],
                right: emap[s.right],
                top: emap[s.top],
                left: emap[s.left],
            })
            .collect();
        LabeledComplex {
            vertex_count: next,
            basepoint: 0,
            edges,
            squares: squares.into_iter().collect(),
            provenance: prov,
        }
    }
}

/// Stallings folding, identifying conflicting edge pairs in a fixed order.
pub fn fold(c: &LabeledComplex) -> LabeledComplex {
    let mut w = Work::new(c);
    w.fold(&mut |_| 0, false);
    w.finish()
}

/// Folding one conflict at a time, `pick(k)` choosing among the `k` current
/// conflicts.
pub fn fold_with(c: &LabeledComplex, mut pick: impl FnMut(usize) -> usize) -> LabeledComplex {
    let mut w = Work::new(c);
    w.fold(&mut pick, true);
    w.finish()
}

pub fn check_local_isometry(g: &DefiningGraph, c: &LabeledComplex) -> IsometryReport {
    let inc = c.incidence();
    let mut report = IsometryReport::default();
    let mut needed = BTreeSet::new();
    for (v, list) in inc.iter().enumerate() {
        let mut germs: Vec<Letter> = list.iter().map(|&(l, _, _)| l).collect();
        for w in germs.windows(2) {
            if w[0] == w[1] && !report.fold_conflicts.contains(&(v, w[0])) {
                report.fold_conflicts.push((v, w[0]));
            }
        }
        germs.dedup();
        for (i, &x) in germs.iter().enumerate() {
            for &y in &germs[i + 1..] {
                if x.vertex != y.vertex && g.adjacent(x.vertex, y.vertex) {
                    needed.insert(Corner::new(v, x, y));
                }
            }
        }
    }
    report.folded = report.fold_conflicts.is_empty();
    let mut filled: BTreeMap<Corner, usize> = BTreeMap::new();
    for s in &c.squares {
        let b = c.edges[s.bottom];
        let t = c.edges[s.top];
        let (x, y) = (b.label, c.edges[s.left].label);
        let l = |v: Vertex, inverse: bool| Letter::new(v, inverse);
        for corner in [
            Corner::new(b.from, l(x, false), l(y, false)),
            Corner::new(b.to, l(x, true), l(y, false)),
            Corner::new(t.to, l(x, true), l(y, true)),
            Corner::new(t.from, l(x, false), l(y, true)),
        ] {
            *filled.entry(corner).or_default() += 1;
        }
    }
    report.missing_squares = needed
        .iter()
        .filter(|k| !filled.contains_key(k))
        .copied()
        .collect();
    report.duplicate_squares = filled
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(&k, _)| k)
        .collect();
    report
}

/// Fills the least missing corner with a square, reusing edges where they
/// exist, then refolds. Complexes with nothing missing come back unchanged.
pub fn complete_squares_step(g: &DefiningGraph, c: &LabeledComplex) -> LabeledComplex {
    let report = check_local_isometry(g, c);
    if !report.folded {
        return fold(c);
    }
    let Some(&corner) = report.missing_squares.first() else {
        return c.clone();
    };
    let mut w = Work::new(c);
    let (x, y) = (corner.first, corner.second);
    let v = corner.vertex;
    let vq = w.follow(v, x).expect("germ present at corner");
    let vs = w.follow(v, y).expect("germ present at corner");
    let (q, s) = (w.end(vq), w.end(vs));
    let qr = w.follow(q, y);
    let sr = w.follow(s, x);
    let (qr, sr) = match (qr, sr) {
        (Some(qr), Some(sr)) => {
            let (r1, r2) = (w.end(qr), w.end(sr));
            if r1 != r2 {
                let d = w
                    .trav(sr)
                    .inverse()
                    .mul(&w.trav(vs).inverse())
                    .mul(&w.trav(vq))
                    .mul(&w.trav(qr));
                w.merge_vertices(r1, r2, d);
            }
            (qr, sr)
        }
        (Some(qr), None) => {
            let r = w.end(qr);
            let t = w.trav(vs).inverse().mul(&w.trav(vq)).mul(&w.trav(qr));
            (qr, w.add_dir(s, r, x, t))
        }
        (None, Some(sr)) => {
            let r = w.end(sr);
            let t = w.trav(vq).inverse().mul(&w.trav(vs)).mul(&w.trav(sr));
            (w.add_dir(q, r, y, t), sr)
        }
        (None, None) => {
            let r = w.add_vertex();
            let qr = w.add_dir(q, r, y, Product::identity());
            let t = w.trav(vs).inverse().mul(&w.trav(vq)).mul(&w.trav(qr));
            (qr, w.add_dir(s, r, x, t))
        }
    };
    // corners of the boundary v -x-> q -y-> r -x^-1-> s -y^-1-> v; the one
    // reading both labels positively is the square's origin
    let (x_at_p, y_at_p, x_other, y_other) = match (x.inverse, y.inverse) {
        (false, false) => (vq, vs, sr, qr),
        (true, false) => (vq, qr, sr, vs),
        (false, true) => (sr, vs, vq, qr),
        (true, true) => (sr, qr, vq, vs),
    };
    let (lo_p, hi_p, lo_o, hi_o) = if x.vertex < y.vertex {
        (x_at_p, y_at_p, x_other, y_other)
    } else {
        (y_at_p, x_at_p, y_other, x_other)
    };
    w.squares.push(Square {
        bottom: lo_p.edge,
        left: hi_p.edge,
        top: lo_o.edge,
        right: hi_o.edge,
    });
    w.fold(&mut |_| 0, false);
    w.finish()
}

/// Folds, then completes squares until the local-isometry check passes or
/// `budget` completion steps have run.
pub fn saturate(g: &DefiningGraph, c: &LabeledComplex, budget: usize) -> Saturation {
    let mut complex = fold(c);
    let mut steps = 0;
    loop {
        if check_local_isometry(g, &complex).passes() {
            return Saturation {
                complex,
                status: SaturationStatus::Complete,
                steps,
            };
        }
        if steps >= budget {
            return Saturation {
                complex,
                status: SaturationStatus::BudgetExhausted,
                steps,
            };
        }
        complex = complete_squares_step(g, &complex);
        steps += 1;
    }
}

/// Every simple cycle of the 1-skeleton once, as a closed path from its least
/// vertex, with the support of its label.
pub fn simple_cycle_supports(c: &LabeledComplex, cap: usize) -> Result<Vec<SimpleCycle>> {
    let inc = c.incidence();
    let mut out = Vec::new();
    let mut steps = 0usize;
    let step_cap = cap.saturating_mul(64).max(1 << 20);
    let over = || RaagError::Budget(format!("simple-cycle enumeration exceeded {cap} cycles"));

    struct Search<'a> {
        c: &'a LabeledComplex,
        inc: &'a Incidence,
        root: usize,
        visited: Vec<bool>,
        path: Vec<DirEdge>,
    }

    fn record(c: &LabeledComplex, root: usize, path: Vec<DirEdge>, out: &mut Vec<SimpleCycle>) {
        let label = c.path_label(&path);
        let support = label.support();
        out.push(SimpleCycle {
            start: root,
            path,
            label,
            support,
        });
    }

    fn dfs(
        s: &mut Search,
        v: usize,
        out: &mut Vec<SimpleCycle>,
        steps: &mut usize,
        cap: usize,
        step_cap: usize,
    ) -> bool {
        *steps += 1;
        if *steps > step_cap || out.len() > cap {
            return false;
        }
        for &(_, d, u) in &s.inc[v] {
            let e = s.c.edges[d.edge];
            if e.from == e.to {
                continue;
            }
            if u == s.root {
                let Some(first) = s.path.first() else {
                    continue;
                };
                if first.edge < d.edge {
                    let mut p = s.path.clone();
                    p.push(d);
                    record(s.c, s.root, p, out);
                }
            } else if u > s.root && !s.visited[u] {
                s.visited[u] = true;
                s.path.push(d);
                let ok = dfs(s, u, out, steps, cap, step_cap);
                s.path.pop();
                s.visited[u] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    for root in 0..c.vertex_count {
        for &(_, d, _) in &inc[root] {
            let e = c.edges[d.edge];
            if e.from == e.to && d.forward {
                record(c, root, vec![d], &mut out);
            }
        }
        let mut s = Search {
            c,
            inc: &inc,
            root,
            visited: vec![false; c.vertex_count],
            path: Vec::new(),
        };
        s.visited[root] = true;
        if !dfs(&mut s, root, &mut out, &mut steps, cap, step_cap) || out.len() > cap {
            return Err(over());
        }
    }
    Ok(out)
}

/// Looks for a simple cycle with a nontrivial label supported in a join.
/// Square boundaries are trivial and never count.
pub fn purely_loxodromic_scan(
    g: &DefiningGraph,
    c: &LabeledComplex,
    cap: usize,
) -> Result<ScanVerdict> {
    if !check_local_isometry(g, c).passes() {
        return input("scan needs a complex that passes the local-isometry check");
    }
    let cycles = simple_cycle_supports(c, cap)?;
    let count = cycles.len();
    for cycle in cycles {
        if let Some(cover) = g.join_cover(cycle.support)? {
            if !is_identity(g, &cycle.label) {
                return Ok(ScanVerdict::Witness { cycle, cover });
            }
        }
    }
    Ok(ScanVerdict::Pure { cycles: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c5() -> DefiningGraph {
        DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap()
    }

    fn words(g: &DefiningGraph, ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|s| g.parse_word(s).unwrap()).collect()
    }

    fn corner_names(g: &DefiningGraph, r: &IsometryReport) -> Vec<String> {
        r.missing_squares
            .iter()
            .map(|k| {
                let mut n = [g.name(k.first.vertex), g.name(k.second.vertex)];
                n.sort();
                n.join("/")
            })
            .collect()
    }

    #[test]
    fn rose_shapes() {
        let g = c5();
        let c = rose(&g, &words(&g, &["a b c d"])).unwrap();
        assert_eq!((c.vertex_count(), c.edges().len()), (4, 4));
        let c = rose(&g, &words(&g, &["a", "a"])).unwrap();
        assert_eq!((c.vertex_count(), c.edges().len()), (1, 2));
        assert!(rose(&g, &[]).is_err());
        assert!(rose(&g, &[Word::empty()]).is_err());
    }

    #[test]
    fn fold_examples() {
        let g = c5();
        let c = fold(&rose(&g, &words(&g, &["a", "a"])).unwrap());
        assert_eq!((c.vertex_count(), c.edges().len()), (1, 1));

        let c = fold(&rose(&g, &words(&g, &["a b", "a c"])).unwrap());
        assert_eq!(c.edges().len(), 3);
        assert_eq!(c.vertex_count(), 2);
        let again = fold(&c);
        assert_eq!(again.canonical_form(), c.canonical_form());
        assert!(check_local_isometry(&g, &c).folded);
        c.check_image(&g, &words(&g, &["a b", "a c"])).unwrap();
    }

    #[test]
    fn bare_cycle_corners() {
        let g = c5();
        let c = rose(&g, &words(&g, &["a b c d"])).unwrap();
        let r = check_local_isometry(&g, &c);
        assert!(r.folded);
        assert_eq!(corner_names(&g, &r), vec!["a/b", "b/c", "c/d"]);
        assert!(r.duplicate_squares.is_empty());

        let loop_a = rose(&g, &words(&g, &["a"])).unwrap();
        assert!(check_local_isometry(&g, &loop_a).passes());
        let ac = rose(&g, &words(&g, &["a c"])).unwrap();
        assert!(check_local_isometry(&g, &ac).passes());
    }

    #[test]
    fn completion_step_resolves_corner() {
        let g = c5();
        let gens = words(&g, &["a b c d"]);
        let c = rose(&g, &gens).unwrap();
        let next = complete_squares_step(&g, &c);
        assert_eq!(next.squares().len(), 1);
        assert_eq!(next.vertex_count(), 5);
        assert_eq!(next.edges().len(), 6);
        let r = check_local_isometry(&g, &next);
        assert!(r.missing_squares.iter().all(|k| k.vertex != 1));
        next.check_image(&g, &gens).unwrap();
        assert!(next.contains(&g, &g.parse_word("b a c d").unwrap()));
    }

    #[test]
    fn saturate_examples() {
        let g = c5();
        let s = saturate(&g, &rose(&g, &words(&g, &["a"])).unwrap(), 10);
        assert_eq!(s.status, SaturationStatus::Complete);
        assert_eq!(s.steps, 0);
        let s = saturate(&g, &rose(&g, &words(&g, &["a", "c"])).unwrap(), 10);
        assert_eq!(s.status, SaturationStatus::Complete);
    }

    #[test]
    fn saturating_abcd_keeps_image() {
        let g = c5();
        let gens = words(&g, &["a b c d"]);
        let mut c = fold(&rose(&g, &gens).unwrap());
        for _ in 0..200 {
            c.check_image(&g, &gens).unwrap();
            if check_local_isometry(&g, &c).passes() {
                break;
            }
            c = complete_squares_step(&g, &c);
        }
        assert!(check_local_isometry(&g, &c).passes());
        assert!(matches!(
            purely_loxodromic_scan(&g, &c, SIMPLE_CYCLE_CAP).unwrap(),
            ScanVerdict::Pure { .. }
        ));
        for probe in ["a b c d", "b a d c", "a^-1 b c d", "a c"] {
            let p = g.parse_word(probe).unwrap();
            let expected = probe == "a b c d" || probe == "b a d c";
            assert_eq!(c.contains(&g, &p), expected, "{probe}");
        }
    }

    #[test]
    fn trace_examples() {
        let g = c5();
        let c = rose(&g, &words(&g, &["a b c d"])).unwrap();
        assert!(
            c.trace_word(&g.parse_word("a b c d").unwrap())
                .unwrap()
                .is_loop
        );
        let t = c.trace_word(&g.parse_word("a b").unwrap()).unwrap();
        assert!(!t.is_loop);
        assert!(c.trace_word(&g.parse_word("b a c d").unwrap()).is_none());
    }

    #[test]
    fn simple_cycle_counts() {
        let g = c5();
        let cs = simple_cycle_supports(&rose(&g, &words(&g, &["a"])).unwrap(), 10).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].support, g.parse_set(&["a"]).unwrap());
        let cs = simple_cycle_supports(&rose(&g, &words(&g, &["a b c d"])).unwrap(), 10).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs[0].support.len(), 4);

        // two a-b squares sharing an edge: 7 edges, 6 vertices, 3 cycles
        let e = |from, to, l: &str| Edge {
            from,
            to,
            label: g.vertex(l).unwrap(),
        };
        let edges = vec![
            e(0, 1, "a"),
            e(1, 2, "b"),
            e(3, 2, "a"),
            e(0, 3, "b"),
            e(2, 4, "b"),
            e(5, 4, "a"),
            e(3, 5, "b"),
        ];
        let squares = vec![
            Square {
                bottom: 0,
                right: 1,
                top: 2,
                left: 3,
            },
            Square {
                bottom: 2,
                right: 4,
                top: 5,
                left: 6,
            },
        ];
        let c = LabeledComplex::from_parts(&g, 6, 0, edges, squares).unwrap();
        assert_eq!(simple_cycle_supports(&c, 100).unwrap().len(), 3);
        assert!(simple_cycle_supports(&c, 1).is_err());
    }

    #[test]
    fn scan_examples() {
        let g = c5();
        let a = rose(&g, &words(&g, &["a"])).unwrap();
        assert!(matches!(
            purely_loxodromic_scan(&g, &a, 10).unwrap(),
            ScanVerdict::Witness { .. }
        ));
        let ac = rose(&g, &words(&g, &["a c"])).unwrap();
        match purely_loxodromic_scan(&g, &ac, 10).unwrap() {
            ScanVerdict::Witness { cover, .. } => {
                assert_eq!(g.set_names(cover.side_a), vec!["b"]);
            }
            other => panic!("{other:?}"),
        }
        let bare = rose(&g, &words(&g, &["a b c d"])).unwrap();
        assert!(purely_loxodromic_scan(&g, &bare, 10).is_err());
    }

    #[test]
    fn text_round_trip_and_rejections() {
        let g = c5();
        let gens = words(&g, &["a b c d"]);
        let c = saturate(&g, &rose(&g, &gens).unwrap(), 100).complex;
        let text = c.to_text(&g);
        let back = LabeledComplex::parse(&g, &text).unwrap();
        assert_eq!(back.canonical_form(), c.canonical_form());
        assert_eq!(back.to_text(&g), text);
        assert!(LabeledComplex::parse(&g, "vertex 1\nbasepoint 0\n").is_err());
        assert!(LabeledComplex::parse(&g, "vertex 0\nvertex 1\nbasepoint 0\n").is_err());
        assert!(LabeledComplex::parse(&g, "vertex 0\nbasepoint 0\ndedge 0 0 z\n").is_err());
        if !c.squares().is_empty() {
            let s = c.squares()[0];
            let bad = text.replace(
                &format!("square {} {} {}^-1 {}^-1", s.bottom, s.right, s.top, s.left),
                &format!("square {} {} {}^-1 {}^-1", s.right, s.bottom, s.top, s.left),
            );
            assert!(LabeledComplex::parse(&g, &bad).is_err());
        }
    }

    #[test]
    fn random_fold_orders_agree() {
        let g = c5();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let k = rng.gen_range(1..=3);
            let gens: Vec<Word> = (0..k)
                .map(|_| {
                    let len = rng.gen_range(1..=5);
                    Word(
                        (0..len)
                            .map(|_| Letter::new(Vertex(rng.gen_range(0..5)), rng.gen_bool(0.5)))
                            .collect(),
                    )
                })
                .collect();
            let r = rose(&g, &gens).unwrap();
            let base = fold(&r).canonical_form();
            for _ in 0..3 {
                let f = fold_with(&r, |n| rng.gen_range(0..n));
                assert_eq!(f.canonical_form(), base);
            }
            let f = fold(&r);
            f.check_image(&g, &gens).unwrap();
        }
    }
}
