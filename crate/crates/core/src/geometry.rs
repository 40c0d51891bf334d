//! Local-to-global constants for quasigeodesics and a star-metric probe.
//!
//! `l2g_constants` returns `(K, λ', ε')` such that in a δ-hyperbolic geodesic
//! space every path whose length-`K` subpaths are `(λ, ε)`-quasigeodesics is a
//! `(λ', ε')`-quasigeodesic.
//!
//! For δ = 0 (trees) a path with `K`-local `(λ, ε)` control and
//! `K ≥ max(2λε + 2, 3λε + 1)` cannot backtrack far enough to lose more than
//! half of its progress, giving `λ' = 2λ`, `ε' = ε`.
//!
//! For δ > 0 the Morse lemma constant of Gouëzel and Shchur,
//! `H = 92λ²(ε + 1 + δ)`, bounds the distance from a local quasigeodesic piece
//! to a geodesic; chaining pieces of length `R = ⌈2λ(ε + 2H + 2δ)⌉` with window
//! `K = 2R` yields `λ' = 2λ` and `ε' = R(1 + 1/(2λ))`.
//!
//! The probe is a heuristic: δ for the star metric is not known, so the caller
//! supplies an assumed value and the verdicts never feed the deciders.

use serde::{Deserialize, Serialize};

use crate::element::star_distance;
use crate::error::{input, Result};
use crate::graph::DefiningGraph;
use crate::product::{GenLetter, Product};
use crate::word::{is_identity, Word};

/// Default cap on subgroup products examined per `(λ, ε)` pair.
pub const PROBE_MAX_PRODUCTS: usize = 2_000;

const TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L2GConstants {
    pub delta: f64,
    pub lambda: f64,
    pub epsilon: f64,
    /// Window length, in edges.
    pub k: u64,
    pub lambda_out: f64,
    pub epsilon_out: f64,
}

pub fn l2g_constants(delta: f64, lambda: f64, epsilon: f64) -> Result<L2GConstants> {
    if !(delta.is_finite() && lambda.is_finite() && epsilon.is_finite()) {
        return input("constants must be finite");
    }
    if delta < 0.0 || lambda < 1.0 || epsilon < 0.0 {
        return input("need delta >= 0, lambda >= 1, epsilon >= 0");
    }
    if delta == 0.0 {
        let k = (2.0 * lambda * epsilon + 2.0)
            .ceil()
            .max((3.0 * lambda * epsilon + 1.0).ceil());
        return Ok(L2GConstants {
            delta,
            lambda,
            epsilon,
            k: k as u64,
            lambda_out: 2.0 * lambda,
            epsilon_out: epsilon,
        });
    }
    let h = 92.0 * lambda * lambda * (epsilon + 1.0 + delta);
    let r = (2.0 * lambda * (epsilon + 2.0 * h + 2.0 * delta)).ceil();
    Ok(L2GConstants {
        delta,
        lambda,
        epsilon,
        k: 2 * r as u64,
        lambda_out: 2.0 * lambda,
        epsilon_out: r * (1.0 + 1.0 / (2.0 * lambda)),
    })
}

/// Whether `m` steps and distance `d` satisfy `(λ, ε)` bounds.
pub fn within_bounds(m: usize, d: usize, lambda: f64, epsilon: f64) -> bool {
    let (m, d) = (m as f64, d as f64);
    d + TOL >= m / lambda - epsilon && d <= lambda * m + epsilon + TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub distance: usize,
}

/// Checks every pair of positions of a star-metric path, or only pairs at
/// most `window` apart.
fn check_path(
    g: &DefiningGraph,
    path: &[Word],
    lambda: f64,
    epsilon: f64,
    window: Option<usize>,
) -> Result<Option<Violation>> {
    for j in 1..path.len() {
        let lo = window.map_or(0, |k| j.saturating_sub(k));
        for i in lo..j {
            let d = star_distance(g, &path[i], &path[j])?;
            if !within_bounds(j - i, d, lambda, epsilon) {
                return Ok(Some(Violation { i, j, distance: d }));
            }
        }
    }
    Ok(None)
}

/// `(λ, ε)`-quasigeodesic test in `d_*` over all pairs; returns the first
/// violation in `(j, i)` order.
pub fn is_quasigeodesic_star(
    g: &DefiningGraph,
    path: &[Word],
    lambda: f64,
    epsilon: f64,
) -> Result<Option<Violation>> {
    for w in path {
        g.check_word(w)?;
    }
    for (i, pair) in path.windows(2).enumerate() {
        let step = pair[0].inverse().concat(&pair[1]);
        if crate::word::normalize_unchecked(g, &step).len() != 1 {
            return input(format!(
                "path entries {i} and {} differ by more than a generator",
                i + 1
            ));
        }
    }
    check_path(g, path, lambda, epsilon, None)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PairStatus {
    /// Every product up to window length passed the local test.
    Pass {
        products: usize,
    },
    Fail {
        product: Vec<i64>,
        violation: Violation,
    },
    Inconclusive {
        products: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub lambda: u32,
    pub epsilon: u32,
    pub constants: L2GConstants,
    #[serde(flatten)]
    pub status: PairStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub heuristic: bool,
    pub delta_assumed: f64,
    pub pairs: Vec<PairReport>,
    /// First pair whose status is `pass`, as `(λ, ε)`.
    pub first_pass: Option<(u32, u32)>,
}

/// The letter-level path of a product of generators, from the identity.
fn product_path(gens: &[Word], p: &[GenLetter]) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut cur = Word::empty();
    for l in p {
        let w = if l.inverse {
            gens[l.gen].inverse()
        } else {
            gens[l.gen].clone()
        };
        for &x in w.letters() {
            cur.0.push(x);
            out.push(cur.clone());
        }
    }
    out
}

/// For each `(λ, ε)` with `1 ≤ λ ≤ lambda_max`, `0 ≤ ε ≤ epsilon_max`, tests
/// freely reduced products of the generators in length-lex order, up to `K`
/// factors, for `K`-local `(λ, ε)` control in `d_*`. Passing all of them means
/// the products are `(λ', ε')`-quasigeodesic if the star metric really is
/// `delta_assumed`-hyperbolic.
pub fn stability_probe(
    g: &DefiningGraph,
    gens: &[Word],
    lambda_max: u32,
    epsilon_max: u32,
    delta_assumed: f64,
    max_products: usize,
) -> Result<ProbeReport> {
    for w in gens {
        g.check_word(w)?;
    }
    let gens: Vec<Word> = gens
        .iter()
        .filter(|w| !is_identity(g, w))
        .cloned()
        .collect();
    let mut pairs = Vec::new();
    for lambda in 1..=lambda_max {
        for epsilon in 0..=epsilon_max {
            let constants = l2g_constants(delta_assumed, lambda as f64, epsilon as f64)?;
            let status = probe_pair(g, &gens, &constants, max_products)?;
            pairs.push(PairReport {
                lambda,
                epsilon,
                constants,
                status,
            });
        }
    }
    let first_pass = pairs
        .iter()
        .find(|p| matches!(p.status, PairStatus::Pass { .. }))
        .map(|p| (p.lambda, p.epsilon));
    Ok(ProbeReport {
        heuristic: true,
        delta_assumed,
        pairs,
        first_pass,
    })
}

fn probe_pair(
    g: &DefiningGraph,
    gens: &[Word],
    c: &L2GConstants,
    max_products: usize,
) -> Result<PairStatus> {
    let k = c.k as usize;
    let mut examined = 0;
    let mut level: Vec<Product> = vec![Product::identity()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &level {
            for gen in 0..gens.len() {
                for inverse in [false, true] {
                    let l = GenLetter { gen, inverse };
                    if p.0.last() == Some(&l.inv()) {
                        continue;
                    }
                    if examined >= max_products {
                        return Ok(PairStatus::Inconclusive { products: examined });
                    }
                    examined += 1;
                    let mut q = p.clone();
                    q.0.push(l);
                    let path = product_path(gens, &q.0);
                    if let Some(v) = check_path(g, &path, c.lambda, c.epsilon, Some(k))? {
                        return Ok(PairStatus::Fail {
                            product: q.to_signed(),
                            violation: v,
                        });
                    }
                    next.push(q);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Ok(PairStatus::Pass { products: examined })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c5() -> DefiningGraph {
        DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap()
    }

    #[test]
    fn constants_contract_shape() {
        let c = l2g_constants(0.0, 1.0, 0.0).unwrap();
        assert!(c.k >= 1 && c.lambda_out >= 1.0 && c.epsilon_out >= 0.0);
        let a = l2g_constants(1.0, 2.0, 1.0).unwrap();
        let b = l2g_constants(2.0, 2.0, 1.0).unwrap();
        assert!(a.k <= b.k);
        assert!(l2g_constants(-1.0, 1.0, 0.0).is_err());
        assert!(l2g_constants(0.0, 0.5, 0.0).is_err());
        assert!(l2g_constants(f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn constants_monotone() {
        let grid = [0.0, 0.5, 1.0, 2.0, 4.0];
        for &d in &grid {
            for &l in &[1.0, 1.5, 2.0, 3.0] {
                for &e in &grid {
                    let c = l2g_constants(d, l, e).unwrap();
                    assert!(c.lambda_out >= l && c.epsilon_out >= e);
                    for (d2, l2, e2) in [(d + 1.0, l, e), (d, l + 1.0, e), (d, l, e + 1.0)] {
                        let c2 = l2g_constants(d2, l2, e2).unwrap();
                        assert!(c2.k >= c.k);
                        assert!(c2.lambda_out >= c.lambda_out);
                        assert!(c2.epsilon_out >= c.epsilon_out);
                    }
                }
            }
        }
    }

    #[test]
    fn quasigeodesic_examples() {
        let g = c5();
        let p = |s: &str| g.parse_word(s).unwrap();
        assert_eq!(
            is_quasigeodesic_star(&g, &[p("1"), p("a")], 1.0, 0.0).unwrap(),
            None
        );
        assert_eq!(
            is_quasigeodesic_star(&g, &[p("1")], 1.0, 0.0).unwrap(),
            None
        );
        let path: Vec<Word> = ["1", "a", "a b", "a b c", "a b c d"]
            .iter()
            .map(|s| p(s))
            .collect();
        // a b c lies in the star of b, so d_*(1, a b c) = 1 < 3/2
        let v = is_quasigeodesic_star(&g, &path, 2.0, 0.0).unwrap().unwrap();
        assert_eq!((v.i, v.j, v.distance), (0, 3, 1));
        let v = is_quasigeodesic_star(&g, &path, 1.0, 0.0).unwrap().unwrap();
        assert_eq!((v.i, v.j, v.distance), (0, 2, 1));
        assert!(is_quasigeodesic_star(&g, &[p("1"), p("a b")], 1.0, 0.0).is_err());
    }

    #[test]
    fn probe_examples() {
        let g = c5();
        let a = vec![g.parse_word("a").unwrap()];
        let r = stability_probe(&g, &a, 3, 3, 1.0, 500).unwrap();
        assert_eq!(r.pairs.len(), 12);
        assert!(r.first_pass.is_none());
        assert!(r
            .pairs
            .iter()
            .all(|p| matches!(p.status, PairStatus::Fail { .. })));
        let empty = stability_probe(&g, &a, 0, 0, 1.0, 10).unwrap();
        assert!(empty.pairs.is_empty());
    }
}
