//! Stability decision and Morse semi-decision for finitely generated
//! subgroups `H = ⟨gens⟩ ≤ A_Γ`.
//!
//! Two searches share one budget of abstract units. Side A classifies freely
//! reduced products of the generators in length-lex order and stops at the
//! first elliptic one. Side B folds the rose on the generators and completes
//! squares one step per unit; once the complex is a local isometry whose
//! π₁-image is `H`, a pure cycle scan proves stability. The schedule is a fixed
//! round robin of [`CLASSIFICATIONS_PER_TURN`] side-A units and one side-B unit.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::certificate::{
    BasisLoopEntry, CoverNames, IsometrySummary, MorseCertificate, MorseRoute, MorseVerdict,
    ScanSummary, StabilityCertificate, StabilityEvidence, StabilityVerdict, SCHEMA,
};
use crate::complex::{
    check_local_isometry, complete_squares_step, fold, purely_loxodromic_scan, rose_indexed,
    DirEdge, LabeledComplex, ScanVerdict, SIMPLE_CYCLE_CAP,
};
use crate::cosets::{enumerate_cosets, CosetOutcome};
use crate::element::{classify_unchecked, ElementKind};
use crate::error::Result;
use crate::graph::DefiningGraph;
use crate::product::{GenLetter, Product};
use crate::word::{canonical, is_identity, normalize_unchecked, Word};

pub const CLASSIFICATIONS_PER_TURN: usize = 1000;
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Freely reduced products in length-lex order over `g1, g1⁻¹, g2, ...`.
#[derive(Clone, Debug)]
struct ProductEnumerator {
    letters: usize,
    digits: Vec<usize>,
}

impl ProductEnumerator {
    fn new(gens: usize) -> Self {
        ProductEnumerator {
            letters: 2 * gens,
            digits: Vec::new(),
        }
    }

    fn fill(&mut self, from: usize) {
        for t in from..self.digits.len() {
            self.digits[t] = if t > 0 && self.digits[t - 1] ^ 1 == 0 {
                1
            } else {
                0
            };
        }
    }

    fn next(&mut self) -> Product {
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.digits.push(0);
                self.fill(0);
                break;
            }
            i -= 1;
            let mut d = self.digits[i] + 1;
            if i > 0 && d == self.digits[i - 1] ^ 1 {
                d += 1;
            }
            if d < self.letters {
                self.digits[i] = d;
                self.fill(i + 1);
                break;
            }
        }
        Product(
            self.digits
                .iter()
                .map(|&d| GenLetter {
                    gen: d / 2,
                    inverse: d % 2 == 1,
                })
                .collect(),
        )
    }
}

#[derive(Clone, Debug)]
enum SideB {
    Running(LabeledComplex),
    /// Verification failed or the cycle scan ran out of room; only side A
    /// can still halt.
    Stalled(String),
}

/// Resumable state of [`decide_stability`].
#[derive(Clone, Debug)]
pub struct StabilityRun {
    g: DefiningGraph,
    gens: Vec<Word>,
    enumerator: ProductEnumerator,
    side_b: SideB,
    units: usize,
    quota: usize,
    use_a: bool,
    use_b: bool,
    trivial: bool,
    saturation_steps: usize,
    classified: usize,
}

#[derive(Clone, Debug)]
pub enum StabilityOutcome {
    Decided(StabilityCertificate),
    BudgetExhausted(Box<StabilityRun>),
}

impl StabilityOutcome {
    pub fn certificate(&self) -> Option<&StabilityCertificate> {
        match self {
            StabilityOutcome::Decided(c) => Some(c),
            StabilityOutcome::BudgetExhausted(_) => None,
        }
    }
}

fn header(g: &DefiningGraph, gens: &[Word]) -> (String, Vec<String>) {
    (g.to_text(), gens.iter().map(|w| g.format_word(w)).collect())
}

/// Certificate for the elliptic element `p(gens)`; `None` if it is not
/// elliptic.
pub fn elliptic_certificate(
    g: &DefiningGraph,
    gens: &[Word],
    p: &Product,
) -> Option<StabilityCertificate> {
    let w = p.evaluate(gens).ok()?;
    let class = classify_unchecked(g, &w);
    if class.kind != ElementKind::Elliptic {
        return None;
    }
    let cover = class.witness?;
    let (graph, generators) = header(g, gens);
    Some(StabilityCertificate {
        schema: SCHEMA.into(),
        graph,
        generators,
        verdict: StabilityVerdict::NotStable,
        evidence: StabilityEvidence::EllipticWitness {
            product: p.to_signed(),
            word: g.format_word(canonical(g, &normalize_unchecked(g, &w)).word()),
            core: g.format_word(class.reduced.core.word()),
            conjugator: g.format_word(&class.reduced.conjugator),
            cover: CoverNames::of(g, &cover),
        },
    })
}

/// Certificate from a verified candidate complex, or the reason it fails.
pub fn complex_certificate(
    g: &DefiningGraph,
    gens: &[Word],
    c: &LabeledComplex,
) -> std::result::Result<StabilityCertificate, String> {
    let report = check_local_isometry(g, c);
    if !report.passes() {
        return Err("complex is not a local isometry".into());
    }
    c.check_image(g, gens)?;
    match purely_loxodromic_scan(g, c, SIMPLE_CYCLE_CAP).map_err(|e| e.to_string())? {
        ScanVerdict::Pure { cycles } => {
            let traces = gens
                .iter()
                .map(|w| c.loop_shuffle(g, w).map(|t| g.format_word(&t)))
                .collect::<Option<Vec<_>>>()
                .ok_or("a generator does not trace a loop")?;
            let basis_loops = c
                .basis_loops()
                .into_iter()
                .map(|bl| {
                    let expr = c
                        .path_expression(&bl.path)
                        .expect("provenance checked above");
                    BasisLoopEntry {
                        edge: bl.edge,
                        expression: expr.to_signed(),
                    }
                })
                .collect();
            let (graph, generators) = header(g, gens);
            Ok(StabilityCertificate {
                schema: SCHEMA.into(),
                graph,
                generators,
                verdict: StabilityVerdict::Stable,
                evidence: StabilityEvidence::PureComplex {
                    complex: c.to_text(g),
                    isometry: IsometrySummary::of(g, &report),
                    generator_traces: traces,
                    basis_loops,
                    scan: ScanSummary {
                        simple_cycles: cycles,
                    },
                },
            })
        }
        ScanVerdict::Witness { cycle, .. } => {
            // conjugate the cycle to the basepoint and read its provenance
            let to_start = c.path_to(cycle.start);
            let mut path: Vec<DirEdge> = to_start.clone();
            path.extend(&cycle.path);
            path.extend(to_start.iter().rev().map(|d| d.rev()));
            let p = c
                .path_expression(&path)
                .ok_or("complex carries no provenance")?;
            elliptic_certificate(g, gens, &p).ok_or_else(|| "scan witness is not elliptic".into())
        }
    }
}

impl StabilityRun {
    pub fn new(g: &DefiningGraph, gens: &[Word]) -> Result<Self> {
        g.check_hypotheses()?;
        for w in gens {
            g.check_word(w)?;
        }
        let petals = gens
            .iter()
            .enumerate()
            .filter(|(_, w)| !is_identity(g, w))
            .map(|(i, w)| (i, normalize_unchecked(g, w).into_word()));
        let complex = fold(&rose_indexed(petals));
        Ok(StabilityRun {
            g: g.clone(),
            gens: gens.to_vec(),
            enumerator: ProductEnumerator::new(gens.len()),
            side_b: SideB::Running(complex),
            units: 0,
            quota: CLASSIFICATIONS_PER_TURN,
            use_a: true,
            use_b: true,
            trivial: gens.iter().all(|w| is_identity(g, w)),
            saturation_steps: 0,
            classified: 0,
        })
    }

    fn only(mut self, a: bool, b: bool) -> Self {
        self.use_a = a;
        self.use_b = b;
        self
    }

    /// Units spent so far.
    pub fn units(&self) -> usize {
        self.units
    }

    pub fn saturation_steps(&self) -> usize {
        self.saturation_steps
    }

    pub fn classified(&self) -> usize {
        self.classified
    }

    /// The side-B candidate complex, if that side is still running.
    pub fn candidate(&self) -> Option<&LabeledComplex> {
        match &self.side_b {
            SideB::Running(c) => Some(c),
            SideB::Stalled(_) => None,
        }
    }

    /// Why side B stopped, if it did.
    pub fn side_b_stalled(&self) -> Option<&str> {
        match &self.side_b {
            SideB::Stalled(reason) => Some(reason),
            SideB::Running(_) => None,
        }
    }

    fn step_a(&mut self) -> Option<StabilityCertificate> {
        let p = self.enumerator.next();
        self.classified += 1;
        let w = p.evaluate(&self.gens).expect("indices in range");
        if classify_unchecked(&self.g, &w).kind == ElementKind::Elliptic {
            return elliptic_certificate(&self.g, &self.gens, &p);
        }
        None
    }

    fn step_b(&mut self) -> Option<StabilityCertificate> {
        let SideB::Running(c) = &self.side_b else {
            return None;
        };
        if !check_local_isometry(&self.g, c).passes() {
            let next = complete_squares_step(&self.g, c);
            self.side_b = SideB::Running(next);
            self.saturation_steps += 1;
            return None;
        }
        match complex_certificate(&self.g, &self.gens, c) {
            Ok(cert) => Some(cert),
            Err(reason) => {
                self.side_b = SideB::Stalled(reason);
                None
            }
        }
    }

    fn run_until(
        &mut self,
        limit: usize,
        stop: Option<&AtomicBool>,
    ) -> Option<StabilityCertificate> {
        if self.trivial {
            return complex_certificate(&self.g, &self.gens, &LabeledComplex::point()).ok();
        }
        while self.units < limit {
            if stop.is_some_and(|s| s.load(Ordering::Relaxed)) {
                return None;
            }
            self.units += 1;
            let b_turn = self.use_b && (!self.use_a || self.quota == 0);
            let found = if b_turn {
                self.quota = CLASSIFICATIONS_PER_TURN;
                self.step_b()
            } else {
                self.quota = self.quota.saturating_sub(1);
                self.step_a()
            };
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Spends at most `budget` more units.
    pub fn run(&mut self, budget: usize) -> Option<StabilityCertificate> {
        let limit = self.units.saturating_add(budget);
        self.run_until(limit, None)
    }
}

pub fn decide_stability(
    g: &DefiningGraph,
    gens: &[Word],
    budget: usize,
) -> Result<StabilityOutcome> {
    Ok(resume_stability(StabilityRun::new(g, gens)?, budget))
}

/// Continues an exhausted run with `budget` more units.
pub fn resume_stability(mut run: StabilityRun, budget: usize) -> StabilityOutcome {
    match run.run(budget) {
        Some(cert) => StabilityOutcome::Decided(cert),
        None => StabilityOutcome::BudgetExhausted(Box::new(run)),
    }
}

/// Runs both sides on separate threads, each with the full budget; the first
/// verdict wins. Not reproducible in which side answers.
pub fn decide_stability_parallel(
    g: &DefiningGraph,
    gens: &[Word],
    budget: usize,
) -> Result<StabilityOutcome> {
    let base = StabilityRun::new(g, gens)?;
    let stop = AtomicBool::new(false);
    let mut a = base.clone().only(true, false);
    let mut b = base.only(false, true);
    let (ra, rb) = std::thread::scope(|s| {
        let stop = &stop;
        let ha = s.spawn(|| {
            let r = a.run_until(budget, Some(stop));
            if r.is_some() {
                stop.store(true, Ordering::Relaxed);
            }
            r
        });
        let hb = s.spawn(|| {
            let r = b.run_until(budget, Some(stop));
            if r.is_some() {
                stop.store(true, Ordering::Relaxed);
            }
            r
        });
        (
            ha.join().expect("side A panicked"),
            hb.join().expect("side B panicked"),
        )
    });
    Ok(match ra.or(rb) {
        Some(cert) => StabilityOutcome::Decided(cert),
        None => StabilityOutcome::BudgetExhausted(Box::new(a)),
    })
}

#[derive(Clone, Debug)]
pub enum MorseOutcome {
    Morse(MorseCertificate),
    /// No verdict within budget; carries the stability certificate if H was
    /// shown not stable.
    BudgetExhausted {
        not_stable: Option<StabilityCertificate>,
    },
}

/// Stability first; if H is not stable, coset enumeration on the remaining
/// budget. Never halts on subgroups that are neither stable nor of finite
/// index.
pub fn semidecide_morse(g: &DefiningGraph, gens: &[Word], budget: usize) -> Result<MorseOutcome> {
    let mut run = StabilityRun::new(g, gens)?;
    let Some(cert) = run.run(budget) else {
        return Ok(MorseOutcome::BudgetExhausted { not_stable: None });
    };
    let (graph, generators) = header(g, gens);
    let wrap = |route| MorseCertificate {
        schema: SCHEMA.into(),
        graph: graph.clone(),
        generators: generators.clone(),
        verdict: MorseVerdict::Morse,
        route,
    };
    if cert.verdict == StabilityVerdict::Stable {
        return Ok(MorseOutcome::Morse(wrap(MorseRoute::ViaStable {
            certificate: cert,
        })));
    }
    let remaining = budget.saturating_sub(run.units());
    Ok(match enumerate_cosets(g, gens, remaining)? {
        CosetOutcome::Complete { index, table } => {
            MorseOutcome::Morse(wrap(MorseRoute::ViaFiniteIndex { index, table }))
        }
        CosetOutcome::BudgetExhausted(_) => MorseOutcome::BudgetExhausted {
            not_stable: Some(cert),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::verify_stability;

    fn c5() -> DefiningGraph {
        DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap()
    }

    fn words(g: &DefiningGraph, ws: &[&str]) -> Vec<Word> {
        ws.iter().map(|s| g.parse_word(s).unwrap()).collect()
    }

    #[test]
    fn enumerator_order() {
        let mut e = ProductEnumerator::new(2);
        let firsts: Vec<Vec<i64>> = (0..8).map(|_| e.next().to_signed()).collect();
        assert_eq!(
            firsts,
            vec![
                vec![1],
                vec![-1],
                vec![2],
                vec![-2],
                vec![1, 1],
                vec![1, 2],
                vec![1, -2],
                vec![-1, -1]
            ]
        );
        let mut e = ProductEnumerator::new(2);
        let n3 = (0..4 + 12 + 36)
            .map(|_| e.next())
            .filter(|p| p.len() == 3)
            .count();
        assert_eq!(n3, 36);
    }

    #[test]
    fn curated_not_stable() {
        let g = c5();
        for gens in [vec!["a"], vec!["a c"], vec!["a", "b", "c", "d", "e"]] {
            let gens = words(&g, &gens);
            let out = decide_stability(&g, &gens, DEFAULT_BUDGET).unwrap();
            let cert = out.certificate().expect("decided");
            assert_eq!(cert.verdict, StabilityVerdict::NotStable);
            assert!(verify_stability(&g, &gens, cert).is_valid());
        }
    }

    #[test]
    fn abcd_is_stable() {
        let g = c5();
        let gens = words(&g, &["a b c d"]);
        let out = decide_stability(&g, &gens, DEFAULT_BUDGET).unwrap();
        let cert = out.certificate().expect("decided");
        assert_eq!(cert.verdict, StabilityVerdict::Stable);
        assert_eq!(
            verify_stability(&g, &gens, cert),
            crate::certificate::Verification::Valid
        );
    }

    #[test]
    fn trivial_subgroup_is_stable() {
        let g = c5();
        let gens = words(&g, &["a a^-1"]);
        let cert = decide_stability(&g, &gens, 10)
            .unwrap()
            .certificate()
            .cloned()
            .unwrap();
        assert_eq!(cert.verdict, StabilityVerdict::Stable);
        assert!(verify_stability(&g, &gens, &cert).is_valid());
    }

    #[test]
    fn morse_routes() {
        let edge = DefiningGraph::new(&["x", "y"], &[("x", "y")]).unwrap();
        let gens = words(&edge, &["x^2", "y"]);
        match semidecide_morse(&edge, &gens, DEFAULT_BUDGET).unwrap() {
            MorseOutcome::Morse(m) => {
                assert!(matches!(
                    m.route,
                    MorseRoute::ViaFiniteIndex { index: 2, .. }
                ))
            }
            other => panic!("{other:?}"),
        }
        let g = c5();
        let out = semidecide_morse(&g, &words(&g, &["a"]), 10_000).unwrap();
        assert!(matches!(
            out,
            MorseOutcome::BudgetExhausted {
                not_stable: Some(_)
            }
        ));
    }
}
