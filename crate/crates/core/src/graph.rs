//! Defining graphs of right-angled Artin groups and the join/star queries the
//! algorithms reduce to.
//!
//! Vertices are numbered in input order and every set-valued answer is a
//! [`VertexSet`] bitmask, so iteration order always follows that input order.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{input, RaagError, Result};

/// Upper bound on the number of vertices, fixed by the bitmask representation.
pub const MAX_VERTICES: usize = 64;

/// A vertex of a [`DefiningGraph`], identified by its position in the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex(pub u8);

impl Vertex {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A subset of the vertices of a defining graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn singleton(v: Vertex) -> Self {
        VertexSet(1 << v.0)
    }

    pub fn from_vertices<I: IntoIterator<Item = Vertex>>(it: I) -> Self {
        it.into_iter().fold(Self::EMPTY, |s, v| s.with(v))
    }

    pub fn with(self, v: Vertex) -> Self {
        VertexSet(self.0 | (1 << v.0))
    }

    pub fn insert(&mut self, v: Vertex) {
        self.0 |= 1 << v.0;
    }

    pub fn contains(self, v: Vertex) -> bool {
        self.0 & (1 << v.0) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VertexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: VertexSet) -> Self {
        VertexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: VertexSet) -> Self {
        VertexSet(self.0 & other.0)
    }

    pub fn difference(self, other: VertexSet) -> Self {
        VertexSet(self.0 & !other.0)
    }

    pub fn first(self) -> Option<Vertex> {
        (self.0 != 0).then(|| Vertex(self.0.trailing_zeros() as u8))
    }

    /// Members in increasing vertex order.
    pub fn iter(self) -> impl Iterator<Item = Vertex> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let v = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Vertex(v as u8))
        })
    }
}

/// Two disjoint nonempty vertex sets with every cross pair adjacent; the
/// subgraph they induce is a join and `side_a ∪ side_b` supports a join subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct JoinCover {
    pub side_a: VertexSet,
    pub side_b: VertexSet,
}

impl JoinCover {
    pub fn vertices(&self) -> VertexSet {
        self.side_a.union(self.side_b)
    }

    pub fn covers(&self, s: VertexSet) -> bool {
        s.is_subset(self.vertices())
    }

    /// Checks disjointness, nonemptiness and full cross adjacency.
    pub fn is_valid(&self, g: &DefiningGraph) -> bool {
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return false;
        }
        if !self.side_a.is_disjoint(self.side_b) {
            return false;
        }
        if !self.vertices().is_subset(g.all()) {
            return false;
        }
        self.side_a.iter().all(|a| self.side_b.is_subset(g.link(a)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub connected: bool,
    pub anti_connected: bool,
    pub vertex_count: usize,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    /// Connected, anti-connected and at least two vertices.
    pub fn meets_hypotheses(&self) -> bool {
        self.connected && self.anti_connected && self.vertex_count >= 2
    }
}

/// A finite simplicial graph Γ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningGraph {
    names: Vec<String>,
    index: HashMap<String, Vertex>,
    adj: Vec<VertexSet>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl DefiningGraph {
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Result<Self> {
        let mut g = DefiningGraph {
            names: Vec::new(),
            index: HashMap::new(),
            adj: Vec::new(),
        };
        for v in vertices {
            g.add_vertex(v.as_ref())?;
        }
        for (u, v) in edges {
            g.add_edge(u.as_ref(), v.as_ref())?;
        }
        Ok(g)
    }

    /// The cycle graph on the given names, in order.
    pub fn cycle<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let n = names.len();
        let edges: Vec<(&str, &str)> = (0..n)
            .map(|i| (names[i].as_ref(), names[(i + 1) % n].as_ref()))
            .collect();
        let verts: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
        Self::new(&verts, &edges)
    }

    pub fn path<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let edges: Vec<(&str, &str)> = names
            .windows(2)
            .map(|w| (w[0].as_ref(), w[1].as_ref()))
            .collect();
        let verts: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
        Self::new(&verts, &edges)
    }

    pub fn complete<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                edges.push((names[i].as_ref(), names[j].as_ref()));
            }
        }
        let verts: Vec<&str> = names.iter().map(|s| s.as_ref()).collect();
        Self::new(&verts, &edges)
    }

    /// Parses the line format `vertex <name>` / `edge <u> <v>` with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut g = DefiningGraph {
            names: Vec::new(),
            index: HashMap::new(),
            adj: Vec::new(),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let res = match toks.as_slice() {
                ["vertex", name] => g.add_vertex(name),
                ["edge", u, v] => g.add_edge(u, v),
                _ => input(format!("unrecognised declaration `{line}`")),
            };
            res.map_err(|e| match e {
                RaagError::Input(msg) => RaagError::Input(format!("line {}: {msg}", lineno + 1)),
                other => other,
            })?;
        }
        Ok(g)
    }

    fn add_vertex(&mut self, name: &str) -> Result<()> {
        if !is_identifier(name) {
            return input(format!("`{name}` is not an identifier"));
        }
        if self.index.contains_key(name) {
            return input(format!("duplicate vertex `{name}`"));
        }
        if self.names.len() == MAX_VERTICES {
            return input(format!("more than {MAX_VERTICES} vertices"));
        }
        let v = Vertex(self.names.len() as u8);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        self.adj.push(VertexSet::EMPTY);
        Ok(())
    }

    fn add_edge(&mut self, u: &str, v: &str) -> Result<()> {
        let (a, b) = (self.vertex(u)?, self.vertex(v)?);
        if a == b {
            return input(format!("loop at `{u}`"));
        }
        if self.adjacent(a, b) {
            return input(format!("duplicate edge `{u}`–`{v}`"));
        }
        self.adj[a.index()].insert(b);
        self.adj[b.index()].insert(a);
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.names {
            out.push_str(&format!("vertex {n}\n"));
        }
        for (u, v) in self.edges() {
            out.push_str(&format!("edge {} {}\n", self.name(u), self.name(v)));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn all(&self) -> VertexSet {
        if self.names.len() == 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << self.names.len()) - 1)
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.names.len() as u8).map(Vertex)
    }

    pub fn vertex(&self, name: &str) -> Result<Vertex> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| RaagError::Input(format!("unknown vertex `{name}`")))
    }

    pub fn name(&self, v: Vertex) -> &str {
        &self.names[v.index()]
    }

    pub fn set_names(&self, s: VertexSet) -> Vec<String> {
        s.iter().map(|v| self.name(v).to_string()).collect()
    }

    pub fn parse_set<S: AsRef<str>>(&self, names: &[S]) -> Result<VertexSet> {
        let mut s = VertexSet::EMPTY;
        for n in names {
            s.insert(self.vertex(n.as_ref())?);
        }
        Ok(s)
    }

    /// Edges as pairs `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for u in self.vertices() {
            for v in self.adj[u.index()].iter() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.adj[u.index()].contains(v)
    }

    /// Whether the generators `u` and `v` commute in A_Γ.
    pub fn commute(&self, u: Vertex, v: Vertex) -> bool {
        u == v || self.adjacent(u, v)
    }

    pub fn link(&self, v: Vertex) -> VertexSet {
        self.adj[v.index()]
    }

    pub fn star(&self, v: Vertex) -> VertexSet {
        self.adj[v.index()].with(v)
    }

    fn check_subset(&self, s: VertexSet) -> Result<()> {
        if s.is_subset(self.all()) {
            Ok(())
        } else {
            input("vertex set is not contained in the graph")
        }
    }

    /// Components of a graph on `s` given by a neighbourhood function.
    fn components(&self, s: VertexSet, nbrs: impl Fn(Vertex) -> VertexSet) -> Vec<VertexSet> {
        let mut rest = s;
        let mut out = Vec::new();
        while let Some(start) = rest.first() {
            let mut comp = VertexSet::singleton(start);
            let mut frontier = comp;
            while !frontier.is_empty() {
                let mut next = VertexSet::EMPTY;
                for v in frontier.iter() {
                    next = next.union(nbrs(v).intersection(s));
                }
                frontier = next.difference(comp);
                comp = comp.union(frontier);
            }
            rest = rest.difference(comp);
            out.push(comp);
        }
        out
    }

    /// Connected components of the complement of the induced subgraph Γ[s].
    pub fn induced_complement_components(&self, s: VertexSet) -> Result<Vec<VertexSet>> {
        self.check_subset(s)?;
        Ok(self.components(s, |v| self.all().difference(self.star(v))))
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.len();
        let connected = self.components(self.all(), |v| self.link(v)).len() <= 1;
        let co_components = self.components(self.all(), |v| self.all().difference(self.star(v)));
        let single_edge = n == 2 && self.edges().len() == 1;
        let anti_connected = co_components.len() <= 1 || single_edge;
        let mut warnings = Vec::new();
        if n == 0 {
            warnings.push("graph has no vertices".to_string());
        }
        if n == 1 {
            warnings.push("single vertex: A_Γ is infinite cyclic".to_string());
        }
        if single_edge {
            warnings.push(
                "single edge: A_Γ is free abelian of rank 2 and has no loxodromic elements"
                    .to_string(),
            );
        }
        if !connected {
            warnings.push("graph is disconnected".to_string());
        }
        if !anti_connected {
            warnings.push("graph decomposes as a nontrivial join".to_string());
        }
        ValidationReport {
            connected,
            anti_connected,
            vertex_count: n,
            warnings,
        }
    }

    /// `Ok(())` when Γ is connected, anti-connected and has at least two vertices.
    pub fn check_hypotheses(&self) -> Result<()> {
        let report = self.validate();
        if report.meets_hypotheses() {
            Ok(())
        } else {
            Err(RaagError::Hypothesis(format!(
                "defining graph must be connected, anti-connected, with at least two vertices ({})",
                report.warnings.join("; ")
            )))
        }
    }

    /// A join subgraph containing `s`, if one exists.
    ///
    /// A cover exists iff `s` lies in the star of a non-isolated vertex, or
    /// `|s| ≥ 2` and Γ[s] itself has a disconnected complement.
    pub fn join_cover(&self, s: VertexSet) -> Result<Option<JoinCover>> {
        self.check_subset(s)?;
        for v in self.vertices() {
            let link = self.link(v);
            if link.is_empty() || !s.is_subset(self.star(v)) {
                continue;
            }
            let rest = s.difference(VertexSet::singleton(v));
            let side_b = if rest.is_empty() {
                VertexSet::singleton(link.first().expect("nonempty link"))
            } else {
                rest
            };
            return Ok(Some(JoinCover {
                side_a: VertexSet::singleton(v),
                side_b,
            }));
        }
        if s.len() >= 2 {
            let comps = self.induced_complement_components(s)?;
            if comps.len() >= 2 {
                return Ok(Some(JoinCover {
                    side_a: comps[0],
                    side_b: s.difference(comps[0]),
                }));
            }
        }
        Ok(None)
    }
}

impl fmt::Display for DefiningGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
