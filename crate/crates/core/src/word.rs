//! Words over V(Γ)^{±1}: normal forms, shuffle classes, cyclic reduction and
//! the word problem.
//!
//! A word is in normal form when it is freely reduced and has no subword
//! `x^ε u x^-ε` with `x` commuting with every letter of `u`. Normal forms of an
//! element are unique up to swapping adjacent commuting letters, so a single
//! left-to-right stack pass decides the word problem.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::{input, RaagError, Result};
use crate::graph::{DefiningGraph, Vertex, VertexSet};

/// Largest shuffle class [`shuffle_class`] will materialise.
pub const SHUFFLE_CLASS_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub vertex: Vertex,
    pub inverse: bool,
}

impl Letter {
    pub fn new(vertex: Vertex, inverse: bool) -> Self {
        Letter { vertex, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            vertex: self.vertex,
            inverse: !self.inverse,
        }
    }

    /// Sort key: vertex order first, then `x^-1` before `x`.
    fn key(self) -> (u8, bool) {
        (self.vertex.0, !self.inverse)
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(v: Vertex) -> Self {
        Word(vec![Letter::new(v, false)])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `self^n`; negative exponents use the inverse.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Vec::with_capacity(base.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            out.extend_from_slice(&base.0);
        }
        Word(out)
    }

    /// Vertices occurring with either sign.
    /// Cancels adjacent inverse pairs only, ignoring commutation.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn support(&self) -> VertexSet {
        VertexSet::from_vertices(self.0.iter().map(|l| l.vertex))
    }

    /// Exponent sum of every generator; equal elements have equal abelianizations.
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut out = vec![0; rank];
        for l in &self.0 {
            out[l.vertex.index()] += if l.inverse { -1 } else { 1 };
        }
        out
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// A word satisfying the normal-form conditions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalForm(Word);

impl NormalForm {
    pub fn word(&self) -> &Word {
        &self.0
    }

    pub fn into_word(self) -> Word {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `conjugator · core · conjugator⁻¹` equals the reduced element and every
/// rotation of `core` is a normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicNormalForm {
    pub core: NormalForm,
    pub conjugator: Word,
}

impl DefiningGraph {
    /// Parses whitespace-separated tokens `x`, `x^-1`, `x^3`; `1` is the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => {
                    let e: i64 = e
                        .parse()
                        .map_err(|_| RaagError::Input(format!("bad exponent in `{tok}`")))?;
                    (n, e)
                }
                None => (tok, 1),
            };
            let v = self.vertex(name)?;
            let l = Letter::new(v, exp < 0);
            out.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        }
        Ok(Word(out))
    }

    /// Inverse of [`DefiningGraph::parse_word`]; the empty word prints as `1`.
    pub fn format_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.0.iter()
            .map(|l| {
                if l.inverse {
                    format!("{}^-1", self.name(l.vertex))
                } else {
                    self.name(l.vertex).to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.0.iter().find(|l| l.vertex.index() >= self.len()) {
            Some(l) => input(format!("letter index {} is not a vertex", l.vertex.0)),
            None => Ok(()),
        }
    }
}

/// Letter-level rewriting shared by every caller; assumes letters are valid.
pub(crate) fn reduce_letters(g: &DefiningGraph, letters: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &x in letters {
        let target = x.inv();
        let mut hit = None;
        for k in (0..out.len()).rev() {
            let y = out[k];
            if y == target {
                hit = Some(k);
                break;
            }
            if !g.commute(y.vertex, x.vertex) {
                break;
            }
        }
        match hit {
            Some(k) => {
                out.remove(k);
            }
            None => out.push(x),
        }
    }
    out
}

/// Rewrites `w` into a normal form for the same element of A_Γ.
pub fn normalize(g: &DefiningGraph, w: &Word) -> Result<NormalForm> {
    g.check_word(w)?;
    Ok(NormalForm(Word(reduce_letters(g, &w.0))))
}

pub(crate) fn normalize_unchecked(g: &DefiningGraph, w: &Word) -> NormalForm {
    NormalForm(Word(reduce_letters(g, &w.0)))
}

pub fn is_normal_form(g: &DefiningGraph, w: &Word) -> bool {
    reduce_letters(g, &w.0).len() == w.len()
}

/// Wraps a word already known to be in normal form.
pub fn as_normal_form(g: &DefiningGraph, w: Word) -> Result<NormalForm> {
    g.check_word(&w)?;
    if is_normal_form(g, &w) {
        Ok(NormalForm(w))
    } else {
        input("word is not in normal form")
    }
}

/// Word problem in A_Γ.
pub fn are_equal(g: &DefiningGraph, u: &Word, v: &Word) -> bool {
    let mut letters = u.0.clone();
    letters.extend(v.0.iter().rev().map(|l| l.inv()));
    reduce_letters(g, &letters).is_empty()
}

pub fn is_identity(g: &DefiningGraph, w: &Word) -> bool {
    reduce_letters(g, &w.0).is_empty()
}

fn swappable(g: &DefiningGraph, a: Letter, b: Letter) -> bool {
    a.vertex != b.vertex && g.adjacent(a.vertex, b.vertex)
}

/// All normal forms of the element represented by `nf`, by closure under
/// adjacent commuting transpositions.
pub fn shuffle_class(g: &DefiningGraph, nf: &NormalForm) -> Result<HashSet<Word>> {
    shuffle_class_capped(g, nf, SHUFFLE_CLASS_CAP)
}

pub fn shuffle_class_capped(
    g: &DefiningGraph,
    nf: &NormalForm,
    cap: usize,
) -> Result<HashSet<Word>> {
    let start = nf.word().clone();
    let mut seen = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(w) = queue.pop_front() {
        for i in 0..w.len().saturating_sub(1) {
            if swappable(g, w.0[i], w.0[i + 1]) {
                let mut next = w.clone();
                next.0.swap(i, i + 1);
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return Err(RaagError::Budget(format!(
                            "shuffle class exceeds {cap} members"
                        )));
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(seen)
}

/// Positions that can be shuffled to the front of `letters`.
fn movable_to_front(g: &DefiningGraph, letters: &[Letter]) -> Vec<usize> {
    let mut seen = VertexSet::EMPTY;
    let mut out = Vec::new();
    for (i, l) in letters.iter().enumerate() {
        if seen.is_subset(g.link(l.vertex)) {
            out.push(i);
        }
        seen.insert(l.vertex);
        if seen == g.all() {
            break;
        }
    }
    out
}

fn movable_to_back(g: &DefiningGraph, letters: &[Letter]) -> Vec<usize> {
    let mut seen = VertexSet::EMPTY;
    let mut out = Vec::new();
    for (i, l) in letters.iter().enumerate().rev() {
        if seen.is_subset(g.link(l.vertex)) {
            out.push(i);
        }
        seen.insert(l.vertex);
    }
    out
}

/// Lexicographically least member of the shuffle class (vertex order, `x^-1` before `x`).
pub fn canonical(g: &DefiningGraph, nf: &NormalForm) -> NormalForm {
    let mut rest: Vec<Letter> = nf.word().0.clone();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let best = movable_to_front(g, &rest)
            .into_iter()
            .min_by_key(|&i| rest[i])
            .expect("some letter is always movable");
        out.push(rest.remove(best));
    }
    NormalForm(Word(out))
}

/// Conjugates away matching first/last letters until every rotation is normal.
pub fn cyclic_reduce(g: &DefiningGraph, w: &Word) -> CyclicNormalForm {
    let mut core = reduce_letters(g, &w.0);
    let mut conjugator = Vec::new();
    loop {
        let backs = movable_to_back(g, &core);
        let pair = movable_to_front(g, &core)
            .into_iter()
            .filter_map(|i| {
                backs
                    .iter()
                    .find(|&&j| j != i && core[j] == core[i].inv())
                    .map(|&j| (i, j))
            })
            .min_by_key(|&(i, _)| core[i]);
        let Some((i, j)) = pair else { break };
        conjugator.push(core[i]);
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        core.remove(hi);
        core.remove(lo);
    }
    CyclicNormalForm {
        core: NormalForm(Word(core)),
        conjugator: Word(conjugator),
    }
}

pub fn is_cyclically_reduced(g: &DefiningGraph, w: &Word) -> bool {
    (0..w.len().max(1)).all(|r| {
        let mut rot = w.0[r.min(w.len())..].to_vec();
        rot.extend_from_slice(&w.0[..r.min(w.len())]);
        reduce_letters(g, &rot).len() == w.len()
    })
}

/// Display adapter pairing a word with the graph that names its letters.
pub struct WordDisplay<'a>(pub &'a DefiningGraph, pub &'a Word);

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.format_word(self.1))
    }
}
