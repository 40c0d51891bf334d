//! HLT coset enumeration over the RAAG presentation.
//!
//! Columns are `2v` for `v` and `2v + 1` for `v⁻¹`. Coset 0 is the subgroup.
//! The budget counts coset definitions and is checked before each one, so an
//! exhausted run can be resumed from its state with a larger budget.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::graph::DefiningGraph;
use crate::word::{Letter, Word};

const UNDEF: u32 = u32::MAX;

/// One commutator `x y x⁻¹ y⁻¹` per edge.
pub fn raag_relators(g: &DefiningGraph) -> Vec<Word> {
    g.edges()
        .into_iter()
        .map(|(x, y)| {
            let (x, y) = (Letter::new(x, false), Letter::new(y, false));
            Word(vec![x, y, x.inv(), y.inv()])
        })
        .collect()
}

fn column(l: Letter) -> usize {
    2 * l.vertex.index() + l.inverse as usize
}

fn columns(w: &Word) -> Vec<u32> {
    w.letters().iter().map(|&l| column(l) as u32).collect()
}

/// A complete coset table: `rows[c][col]` is the image of coset `c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetTable {
    pub rows: Vec<Vec<usize>>,
}

impl CosetTable {
    pub fn index(&self) -> usize {
        self.rows.len()
    }

    pub fn image(&self, coset: usize, l: Letter) -> usize {
        self.rows[coset][column(l)]
    }

    fn trace(&self, mut c: usize, w: &Word) -> usize {
        for &l in w.letters() {
            c = self.image(c, l);
        }
        c
    }

    /// Independent re-check: shape and range, inverse columns, every relator
    /// closed at every coset, every generator closed at coset 0, transitivity.
    pub fn validate(&self, g: &DefiningGraph, gens: &[Word]) -> std::result::Result<(), String> {
        let n = self.rows.len();
        let cols = 2 * g.len();
        if n == 0 {
            return Err("table has no cosets".into());
        }
        for (c, row) in self.rows.iter().enumerate() {
            if row.len() != cols {
                return Err(format!(
                    "coset {c} has {} columns, expected {cols}",
                    row.len()
                ));
            }
            for (x, &d) in row.iter().enumerate() {
                if d >= n {
                    return Err(format!("coset {c} column {x} points outside the table"));
                }
                if self.rows[d][x ^ 1] != c {
                    return Err(format!("coset {c} column {x} has no matching inverse"));
                }
            }
        }
        for w in gens {
            if g.check_word(w).is_err() {
                return Err("generator uses an unknown letter".into());
            }
        }
        for r in raag_relators(g) {
            for c in 0..n {
                if self.trace(c, &r) != c {
                    return Err(format!(
                        "relator {} does not close at coset {c}",
                        g.format_word(&r)
                    ));
                }
            }
        }
        for (i, w) in gens.iter().enumerate() {
            if self.trace(0, w) != 0 {
                return Err(format!("generator {} does not close at coset 0", i + 1));
            }
        }
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(c) = queue.pop_front() {
            for &d in &self.rows[c] {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("action is not transitive".into());
        }
        Ok(())
    }

    /// `coset,generator,image` lines for audit.
    pub fn to_csv(&self, g: &DefiningGraph) -> String {
        let mut out = String::from("coset,generator,image\n");
        for (c, row) in self.rows.iter().enumerate() {
            for (x, &d) in row.iter().enumerate() {
                let l = Letter::new(crate::graph::Vertex((x / 2) as u8), x % 2 == 1);
                out.push_str(&format!("{c},{},{d}\n", g.format_word(&Word(vec![l]))));
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum Phase {
    /// Scanning subgroup generator `i` at coset 0.
    Generators(usize),
    /// Scanning relator `r` at coset `coset`, then filling its row.
    Relators {
        coset: u32,
        relator: usize,
    },
    Done,
}

/// Resumable enumeration state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CosetEnumeration {
    cols: usize,
    gens: Vec<Vec<u32>>,
    relators: Vec<Vec<u32>>,
    table: Vec<u32>,
    parent: Vec<u32>,
    phase: Phase,
    definitions: usize,
}

#[derive(Clone, Debug)]
pub enum CosetOutcome {
    Complete { index: usize, table: CosetTable },
    BudgetExhausted(Box<CosetEnumeration>),
}

/// Signals that the definition budget ran out.
struct OutOfBudget;

impl CosetEnumeration {
    pub fn new(g: &DefiningGraph, gens: &[Word]) -> Result<Self> {
        if g.is_empty() {
            return input("graph has no vertices");
        }
        for w in gens {
            g.check_word(w)?;
        }
        let cols = 2 * g.len();
        Ok(CosetEnumeration {
            cols,
            gens: gens.iter().map(|w| columns(&w.free_reduce())).collect(),
            relators: raag_relators(g).iter().map(columns).collect(),
            table: vec![UNDEF; cols],
            parent: vec![0],
            phase: Phase::Generators(0),
            definitions: 0,
        })
    }

    /// Definitions made so far, across resumptions.
    pub fn definitions(&self) -> usize {
        self.definitions
    }

    pub fn is_complete(&self) -> bool {
        self.phase == Phase::Done
    }

    fn get(&self, c: u32, x: u32) -> u32 {
        self.table[c as usize * self.cols + x as usize]
    }

    fn set(&mut self, c: u32, x: u32, d: u32) {
        self.table[c as usize * self.cols + x as usize] = d;
    }

    fn live(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn define(&mut self, c: u32, x: u32, limit: usize) -> std::result::Result<(), OutOfBudget> {
        if self.definitions >= limit {
            return Err(OutOfBudget);
        }
        self.definitions += 1;
        let d = self.parent.len() as u32;
        self.parent.push(d);
        self.table.extend(std::iter::repeat_n(UNDEF, self.cols));
        self.set(c, x, d);
        self.set(d, x ^ 1, c);
        Ok(())
    }

    fn rep(&mut self, mut c: u32) -> u32 {
        let mut root = c;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        while self.parent[c as usize] != root {
            let next = self.parent[c as usize];
            self.parent[c as usize] = root;
            c = next;
        }
        root
    }

    fn merge(&mut self, a: u32, b: u32, queue: &mut Vec<u32>) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (keep, drop) = (a.min(b), a.max(b));
        self.parent[drop as usize] = keep;
        queue.push(drop);
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut i = 0;
        while i < queue.len() {
            let gamma = queue[i];
            i += 1;
            for x in 0..self.cols as u32 {
                let delta = self.get(gamma, x);
                if delta == UNDEF {
                    continue;
                }
                self.set(delta, x ^ 1, UNDEF);
                let mu = self.rep(gamma);
                let nu = self.rep(delta);
                if self.get(mu, x) != UNDEF {
                    let t = self.get(mu, x);
                    self.merge(nu, t, &mut queue);
                } else if self.get(nu, x ^ 1) != UNDEF {
                    let t = self.get(nu, x ^ 1);
                    self.merge(mu, t, &mut queue);
                } else {
                    self.set(mu, x, nu);
                    self.set(nu, x ^ 1, mu);
                }
            }
        }
    }

    fn scan_and_fill(
        &mut self,
        c: u32,
        w: &[u32],
        limit: usize,
    ) -> std::result::Result<(), OutOfBudget> {
        if w.is_empty() {
            return Ok(());
        }
        let mut f = c;
        let mut b = c;
        let mut i = 0usize;
        let mut j = w.len() as isize - 1;
        loop {
            while (i as isize) <= j && self.get(f, w[i]) != UNDEF {
                f = self.get(f, w[i]);
                i += 1;
            }
            if i as isize > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize && self.get(b, w[j as usize] ^ 1) != UNDEF {
                b = self.get(b, w[j as usize] ^ 1);
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i as isize {
                self.set(f, w[i], b);
                self.set(b, w[i] ^ 1, f);
                return Ok(());
            }
            self.define(f, w[i], limit)?;
        }
    }

    fn step(&mut self, limit: usize) -> std::result::Result<(), OutOfBudget> {
        match self.phase {
            Phase::Generators(i) => {
                if i < self.gens.len() {
                    let w = self.gens[i].clone();
                    self.scan_and_fill(0, &w, limit)?;
                    self.phase = Phase::Generators(i + 1);
                } else {
                    self.phase = Phase::Relators {
                        coset: 0,
                        relator: 0,
                    };
                }
            }
            Phase::Relators { coset, relator } => {
                if coset as usize >= self.parent.len() {
                    self.phase = Phase::Done;
                    return Ok(());
                }
                if !self.live(coset) {
                    self.phase = Phase::Relators {
                        coset: coset + 1,
                        relator: 0,
                    };
                    return Ok(());
                }
                if relator < self.relators.len() {
                    let w = self.relators[relator].clone();
                    self.scan_and_fill(coset, &w, limit)?;
                    self.phase = Phase::Relators {
                        coset,
                        relator: relator + 1,
                    };
                    return Ok(());
                }
                for x in 0..self.cols as u32 {
                    if !self.live(coset) {
                        break;
                    }
                    if self.get(coset, x) == UNDEF {
                        self.define(coset, x, limit)?;
                    }
                }
                self.phase = Phase::Relators {
                    coset: coset + 1,
                    relator: 0,
                };
            }
            Phase::Done => {}
        }
        Ok(())
    }

    /// Runs until completion or until `budget` further definitions are used.
    pub fn run(&mut self, budget: usize) -> Option<CosetTable> {
        let limit = self.definitions.saturating_add(budget);
        while self.phase != Phase::Done {
            if self.step(limit).is_err() {
                return None;
            }
        }
        Some(self.compact())
    }

    fn compact(&mut self) -> CosetTable {
        let n = self.parent.len();
        let mut map = vec![usize::MAX; n];
        let mut next = 0;
        for c in 0..n {
            if self.live(c as u32) {
                map[c] = next;
                next += 1;
            }
        }
        let mut rows = Vec::with_capacity(next);
        for c in 0..n as u32 {
            if !self.live(c) {
                continue;
            }
            let row = (0..self.cols as u32)
                .map(|x| {
                    let d = self.get(c, x);
                    map[self.rep(d) as usize]
                })
                .collect();
            rows.push(row);
        }
        CosetTable { rows }
    }
}

pub fn enumerate_cosets(g: &DefiningGraph, gens: &[Word], budget: usize) -> Result<CosetOutcome> {
    Ok(resume_cosets(CosetEnumeration::new(g, gens)?, budget))
}

/// Continues an exhausted enumeration with `budget` more definitions.
pub fn resume_cosets(state: CosetEnumeration, budget: usize) -> CosetOutcome {
    let mut e = state;
    match e.run(budget) {
        Some(table) => CosetOutcome::Complete {
            index: table.index(),
            table,
        },
        None => CosetOutcome::BudgetExhausted(Box::new(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> DefiningGraph {
        DefiningGraph::new(&["x", "y"], &[("x", "y")]).unwrap()
    }

    fn index(g: &DefiningGraph, gens: &[&str], budget: usize) -> Option<usize> {
        let gens: Vec<Word> = gens.iter().map(|s| g.parse_word(s).unwrap()).collect();
        match enumerate_cosets(g, &gens, budget).unwrap() {
            CosetOutcome::Complete { index, table } => {
                table.validate(g, &gens).unwrap();
                Some(index)
            }
            CosetOutcome::BudgetExhausted(_) => None,
        }
    }

    #[test]
    fn relators() {
        let c5 = DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap();
        assert_eq!(raag_relators(&c5).len(), 5);
        let g = edge();
        assert_eq!(g.format_word(&raag_relators(&g)[0]), "x y x^-1 y^-1");
    }

    #[test]
    fn hand_cases() {
        let g = edge();
        assert_eq!(index(&g, &["x^2", "y"], 1000), Some(2));
        assert_eq!(index(&g, &["x^2", "y^3"], 1000), Some(6));
        assert_eq!(index(&g, &["x y", "x^-1 y"], 1000), Some(2));
        let c5 = DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap();
        assert_eq!(index(&c5, &["a", "b", "c", "d", "e"], 1000), Some(1));
        assert_eq!(index(&c5, &["a"], 1000), None);
    }

    #[test]
    fn resumption_matches_single_run() {
        let g = edge();
        let gens = vec![g.parse_word("x^3 y").unwrap(), g.parse_word("y^2").unwrap()];
        let CosetOutcome::BudgetExhausted(state) = enumerate_cosets(&g, &gens, 2).unwrap() else {
            panic!("expected exhaustion");
        };
        let json = serde_json::to_string(&state).unwrap();
        let state: CosetEnumeration = serde_json::from_str(&json).unwrap();
        let CosetOutcome::Complete { index, .. } = resume_cosets(state, 1000) else {
            panic!("expected completion");
        };
        assert_eq!(index, 6);
    }

    #[test]
    fn validator_rejects_broken_tables() {
        let g = edge();
        let gens = vec![g.parse_word("x^2").unwrap(), g.parse_word("y").unwrap()];
        let CosetOutcome::Complete { table, .. } = enumerate_cosets(&g, &gens, 100).unwrap() else {
            panic!()
        };
        let mut bad = table.clone();
        bad.rows[0][0] = 0;
        assert!(bad.validate(&g, &gens).is_err());
        assert!(table.validate(&g, &[g.parse_word("x").unwrap()]).is_err());
        assert!(table
            .to_csv(&g)
            .starts_with("coset,generator,image\n0,x,1\n"));
    }
}
