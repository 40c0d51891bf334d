//! Loxodromic/elliptic classification and star length.
//!
//! An element is elliptic when its cyclically reduced normal form is supported
//! in a join subgraph, loxodromic otherwise.
//!
//! Star length is computed on the heap of a normal form: a factorisation into
//! star-blocks is a chain of prefix-closed position sets, each step adding
//! letters from a single star. Extending a prefix never hurts, so every state
//! only needs its maximal extension per star centre, and the breadth-first
//! search over states yields the minimum over all shuffles of the normal form.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bits::{dependency_preds, PosSet};
use crate::error::{RaagError, Result};
use crate::graph::{DefiningGraph, JoinCover, Vertex};
use crate::word::{cyclic_reduce, normalize_unchecked, CyclicNormalForm, Letter, NormalForm, Word};

/// Cap on live prefix states per search level in [`star_length`].
pub const STAR_STATE_CAP: usize = 200_000;
/// Largest power accepted by [`growth_probe`].
pub const GROWTH_PROBE_MAX: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Identity,
    Elliptic,
    Loxodromic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementClass {
    pub kind: ElementKind,
    /// Join cover of the cyclically reduced support; present iff elliptic.
    pub witness: Option<JoinCover>,
    pub reduced: CyclicNormalForm,
}

/// Classification without the hypothesis check; callers that validated Γ once
/// use this in loops.
pub(crate) fn classify_unchecked(g: &DefiningGraph, w: &Word) -> ElementClass {
    let reduced = cyclic_reduce(g, w);
    if reduced.core.is_empty() {
        return ElementClass {
            kind: ElementKind::Identity,
            witness: None,
            reduced,
        };
    }
    let cover = g
        .join_cover(reduced.core.word().support())
        .expect("support of a valid word lies in the graph");
    ElementClass {
        kind: if cover.is_some() {
            ElementKind::Elliptic
        } else {
            ElementKind::Loxodromic
        },
        witness: cover,
        reduced,
    }
}

pub fn classify(g: &DefiningGraph, w: &Word) -> Result<ElementClass> {
    g.check_hypotheses()?;
    g.check_word(w)?;
    Ok(classify_unchecked(g, w))
}

/// `blocks[i]` only uses letters from the star of `star_vertices[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarFactorization {
    pub blocks: Vec<Word>,
    pub star_vertices: Vec<Vertex>,
}

impl StarFactorization {
    pub fn product(&self) -> Word {
        self.blocks
            .iter()
            .flat_map(|b| b.0.iter().copied())
            .collect()
    }

    /// Structural check: every block nonempty and inside its star.
    pub fn is_well_formed(&self, g: &DefiningGraph) -> bool {
        self.blocks.len() == self.star_vertices.len()
            && self
                .blocks
                .iter()
                .zip(&self.star_vertices)
                .all(|(b, &v)| !b.is_empty() && b.support().is_subset(g.star(v)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarLength {
    pub length: usize,
    pub factorization: StarFactorization,
}

struct Node {
    state: PosSet,
    parent: usize,
    centre: Vertex,
}

fn star_length_of_normal_form(g: &DefiningGraph, nf: &NormalForm) -> Result<StarLength> {
    let letters: &[Letter] = nf.word().letters();
    let n = letters.len();
    if n == 0 {
        return Ok(StarLength {
            length: 0,
            factorization: StarFactorization {
                blocks: vec![],
                star_vertices: vec![],
            },
        });
    }
    let preds = dependency_preds(g, letters);
    let stars: Vec<(Vertex, crate::graph::VertexSet)> =
        g.vertices().map(|v| (v, g.star(v))).collect();

    let mut levels: Vec<Vec<Node>> = vec![vec![Node {
        state: PosSet::new(n),
        parent: usize::MAX,
        centre: Vertex(0),
    }]];
    loop {
        let current = levels.last().expect("at least one level");
        let mut next: Vec<Node> = Vec::new();
        let mut seen: HashSet<PosSet> = HashSet::new();
        for (idx, node) in current.iter().enumerate() {
            for &(v, star) in &stars {
                let mut ext = node.state.clone();
                let mut grew = false;
                for i in 0..n {
                    if !ext.get(i) && star.contains(letters[i].vertex) && preds[i].is_subset(&ext) {
                        ext.set(i);
                        grew = true;
                    }
                }
                if grew && seen.insert(ext.clone()) {
                    next.push(Node {
                        state: ext,
                        parent: idx,
                        centre: v,
                    });
                }
            }
        }
        // a superset state is never worse, so dominated states are dropped
        next.sort_by_key(|node| std::cmp::Reverse(node.state.count()));
        let mut kept: Vec<Node> = Vec::new();
        for node in next {
            if !kept.iter().any(|k| node.state.is_subset(&k.state)) {
                kept.push(node);
            }
        }
        if kept.len() > STAR_STATE_CAP {
            return Err(RaagError::Budget(format!(
                "star-length search exceeded {STAR_STATE_CAP} states"
            )));
        }
        let done = kept.iter().position(|node| node.state.count() == n);
        levels.push(kept);
        if let Some(end) = done {
            return Ok(rebuild(letters, &levels, end));
        }
    }
}

fn rebuild(letters: &[Letter], levels: &[Vec<Node>], end: usize) -> StarLength {
    let length = levels.len() - 1;
    let mut blocks = Vec::with_capacity(length);
    let mut star_vertices = Vec::with_capacity(length);
    let mut idx = end;
    for level in (1..levels.len()).rev() {
        let node = &levels[level][idx];
        let prev = &levels[level - 1][node.parent].state;
        let block: Word = (0..letters.len())
            .filter(|&i| node.state.get(i) && !prev.get(i))
            .map(|i| letters[i])
            .collect();
        blocks.push(block);
        star_vertices.push(node.centre);
        idx = node.parent;
    }
    blocks.reverse();
    star_vertices.reverse();
    StarLength {
        length,
        factorization: StarFactorization {
            blocks,
            star_vertices,
        },
    }
}

/// |w|_*, the least number of star-block factors of the element, with a witness.
pub fn star_length(g: &DefiningGraph, w: &Word) -> Result<StarLength> {
    g.check_word(w)?;
    star_length_of_normal_form(g, &normalize_unchecked(g, w))
}

/// d_*(u, v) = |u⁻¹v|_*.
pub fn star_distance(g: &DefiningGraph, u: &Word, v: &Word) -> Result<usize> {
    Ok(star_length(g, &u.inverse().concat(v))?.length)
}

/// Exact star lengths of `w^n` for `n = 1..=nmax`.
pub fn growth_probe(g: &DefiningGraph, w: &Word, nmax: usize) -> Result<Vec<usize>> {
    if nmax > GROWTH_PROBE_MAX {
        return Err(RaagError::Input(format!(
            "growth probe limited to n <= {GROWTH_PROBE_MAX}"
        )));
    }
    g.check_word(w)?;
    (1..=nmax as i64)
        .map(|n| star_length(g, &w.pow(n)).map(|s| s.length))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::are_equal;

    fn c5() -> DefiningGraph {
        DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap()
    }

    fn w(g: &DefiningGraph, s: &str) -> Word {
        g.parse_word(s).unwrap()
    }

    #[test]
    fn classify_examples() {
        let g = c5();
        let a = classify(&g, &w(&g, "a")).unwrap();
        assert_eq!(a.kind, ElementKind::Elliptic);
        assert!(a.witness.unwrap().covers(g.parse_set(&["a"]).unwrap()));

        let ac = classify(&g, &w(&g, "a c")).unwrap();
        assert_eq!(ac.kind, ElementKind::Elliptic);
        let cover = ac.witness.unwrap();
        assert_eq!(g.set_names(cover.side_a), vec!["b"]);
        assert_eq!(g.set_names(cover.side_b), vec!["a", "c"]);

        let abcd = classify(&g, &w(&g, "a b c d")).unwrap();
        assert_eq!(abcd.kind, ElementKind::Loxodromic);
        assert!(abcd.witness.is_none());

        assert_eq!(
            classify(&g, &Word::empty()).unwrap().kind,
            ElementKind::Identity
        );
    }

    #[test]
    fn classify_refuses_bad_graphs() {
        let p3 = DefiningGraph::path(&["p", "q", "r"]).unwrap();
        let x = p3.parse_word("p r").unwrap();
        assert!(matches!(classify(&p3, &x), Err(RaagError::Hypothesis(_))));
    }

    #[test]
    fn classify_conjugation_invariance() {
        let g = c5();
        let base = w(&g, "a b c d");
        for conj in ["e", "c d^-1", "a^-1 e"] {
            let u = w(&g, conj);
            let x = u.concat(&base).concat(&u.inverse());
            assert_eq!(classify(&g, &x).unwrap().kind, ElementKind::Loxodromic);
            assert_eq!(
                classify(&g, &x.inverse()).unwrap().kind,
                ElementKind::Loxodromic
            );
        }
    }

    #[test]
    fn star_length_examples() {
        let g = c5();
        let s = star_length(&g, &w(&g, "a")).unwrap();
        assert_eq!(s.length, 1);
        assert_eq!(s.factorization.blocks, vec![w(&g, "a")]);

        let s = star_length(&g, &w(&g, "a c")).unwrap();
        assert_eq!(s.length, 1);
        assert_eq!(s.factorization.star_vertices, vec![g.vertex("b").unwrap()]);

        let s = star_length(&g, &w(&g, "a b c d")).unwrap();
        assert_eq!(s.length, 2);
        assert!(s.factorization.is_well_formed(&g));
        assert!(are_equal(&g, &s.factorization.product(), &w(&g, "a b c d")));

        assert_eq!(star_length(&g, &Word::empty()).unwrap().length, 0);
    }

    #[test]
    fn growth_probe_examples() {
        let g = c5();
        assert_eq!(growth_probe(&g, &w(&g, "a"), 4).unwrap(), vec![1, 1, 1, 1]);
        let ac = growth_probe(&g, &w(&g, "a c"), 4).unwrap();
        assert!(ac.iter().all(|&x| x <= 2));
        assert!(growth_probe(&g, &w(&g, "a"), GROWTH_PROBE_MAX + 1).is_err());
    }
}
