//! JSON certificates (`raag-cert/1`) and their independent verification.
//!
//! Verification recomputes every recorded field from the graph, the
//! generators and the embedded complex, and requires exact agreement, so a
//! certificate has a single valid serialization for a given run.

use serde::{Deserialize, Serialize};

use crate::complex::{
    check_local_isometry, purely_loxodromic_scan, IsometryReport, LabeledComplex, ScanVerdict,
    SIMPLE_CYCLE_CAP,
};
use crate::cosets::CosetTable;
use crate::element::{classify_unchecked, ElementKind};
use crate::error::{RaagError, Result};
use crate::graph::{DefiningGraph, JoinCover};
use crate::product::Product;
use crate::word::{are_equal, canonical, normalize_unchecked, Word};

pub const SCHEMA: &str = "raag-cert/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    NotStable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverNames {
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
}

impl CoverNames {
    pub fn of(g: &DefiningGraph, c: &JoinCover) -> Self {
        CoverNames {
            side_a: g.set_names(c.side_a),
            side_b: g.set_names(c.side_b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsometrySummary {
    pub folded: bool,
    pub missing_squares: Vec<String>,
    pub duplicate_squares: Vec<String>,
}

impl IsometrySummary {
    pub fn of(g: &DefiningGraph, r: &IsometryReport) -> Self {
        IsometrySummary {
            folded: r.folded,
            missing_squares: r.missing_squares.iter().map(|k| k.describe(g)).collect(),
            duplicate_squares: r.duplicate_squares.iter().map(|k| k.describe(g)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisLoopEntry {
    pub edge: usize,
    /// Signed 1-based generator indices.
    pub expression: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSummary {
    pub simple_cycles: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StabilityEvidence {
    EllipticWitness {
        /// Signed 1-based generator indices.
        product: Vec<i64>,
        /// Canonical normal form of the product.
        word: String,
        core: String,
        conjugator: String,
        cover: CoverNames,
    },
    PureComplex {
        complex: String,
        isometry: IsometrySummary,
        generator_traces: Vec<String>,
        basis_loops: Vec<BasisLoopEntry>,
        scan: ScanSummary,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityCertificate {
    pub schema: String,
    pub graph: String,
    pub generators: Vec<String>,
    pub verdict: StabilityVerdict,
    pub evidence: StabilityEvidence,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MorseRoute {
    ViaStable { certificate: StabilityCertificate },
    ViaFiniteIndex { index: usize, table: CosetTable },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MorseVerdict {
    Morse,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseCertificate {
    pub schema: String,
    pub graph: String,
    pub generators: Vec<String>,
    pub verdict: MorseVerdict,
    pub route: MorseRoute,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Stability(StabilityCertificate),
    Morse(MorseCertificate),
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| RaagError::Input(format!("malformed certificate: {e}")))
    }

    pub fn graph_text(&self) -> &str {
        match self {
            Certificate::Stability(c) => &c.graph,
            Certificate::Morse(c) => &c.graph,
        }
    }

    pub fn generator_texts(&self) -> &[String] {
        match self {
            Certificate::Stability(c) => &c.generators,
            Certificate::Morse(c) => &c.generators,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Valid,
    /// The first check that failed.
    Invalid(String),
}

impl Verification {
    pub fn is_valid(&self) -> bool {
        *self == Verification::Valid
    }
}

type Check = std::result::Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn to_verification(c: Check) -> Verification {
    match c {
        Ok(()) => Verification::Valid,
        Err(m) => Verification::Invalid(m),
    }
}

fn check_header(
    g: &DefiningGraph,
    gens: &[Word],
    schema: &str,
    graph: &str,
    generators: &[String],
) -> Check {
    ensure(schema == SCHEMA, || format!("unknown schema `{schema}`"))?;
    ensure(graph == g.to_text(), || "graph does not match".into())?;
    ensure(generators.len() == gens.len(), || {
        "generator count does not match".into()
    })?;
    for (i, (s, w)) in generators.iter().zip(gens).enumerate() {
        ensure(*s == g.format_word(w), || {
            format!("generator {} does not match", i + 1)
        })?;
    }
    Ok(())
}

fn parse_product(v: &[i64], k: usize) -> std::result::Result<Product, String> {
    let p = Product::from_signed(v).map_err(|e| e.to_string())?;
    ensure(p.0.iter().all(|l| l.gen < k), || {
        "product uses an unknown generator".into()
    })?;
    ensure(p.0.windows(2).all(|w| w[0] != w[1].inv()), || {
        "product is not freely reduced".into()
    })?;
    Ok(p)
}

/// Checks every claim of a stability certificate for `⟨gens⟩ ≤ A_Γ`.
pub fn verify_stability(
    g: &DefiningGraph,
    gens: &[Word],
    cert: &StabilityCertificate,
) -> Verification {
    to_verification(check_stability(g, gens, cert))
}

fn check_stability(g: &DefiningGraph, gens: &[Word], cert: &StabilityCertificate) -> Check {
    check_header(g, gens, &cert.schema, &cert.graph, &cert.generators)?;
    g.check_hypotheses().map_err(|e| e.to_string())?;
    match (&cert.verdict, &cert.evidence) {
        (
            StabilityVerdict::NotStable,
            StabilityEvidence::EllipticWitness {
                product,
                word,
                core,
                conjugator,
                cover,
            },
        ) => {
            let p = parse_product(product, gens.len())?;
            ensure(!p.is_identity(), || "witness product is empty".into())?;
            let w = p.evaluate(gens).map_err(|e| e.to_string())?;
            let nf = canonical(g, &normalize_unchecked(g, &w));
            ensure(*word == g.format_word(nf.word()), || {
                "witness word does not match the product".into()
            })?;
            let class = classify_unchecked(g, &w);
            ensure(*core == g.format_word(class.reduced.core.word()), || {
                "core does not match".into()
            })?;
            ensure(
                *conjugator == g.format_word(&class.reduced.conjugator),
                || "conjugator does not match".into(),
            )?;
            ensure(class.kind == ElementKind::Elliptic, || {
                "witness is not elliptic".into()
            })?;
            let found = class.witness.expect("elliptic elements carry a cover");
            ensure(*cover == CoverNames::of(g, &found), || {
                "join cover does not match".into()
            })?;
            ensure(
                found.is_valid(g) && found.covers(class.reduced.core.word().support()),
                || "join cover is invalid".into(),
            )
        }
        (
            StabilityVerdict::Stable,
            StabilityEvidence::PureComplex {
                complex,
                isometry,
                generator_traces,
                basis_loops,
                scan,
            },
        ) => {
            let c = LabeledComplex::parse(g, complex).map_err(|e| format!("complex: {e}"))?;
            ensure(c.to_text(g) == *complex, || {
                "complex text is not canonical".into()
            })?;
            let report = check_local_isometry(g, &c);
            ensure(*isometry == IsometrySummary::of(g, &report), || {
                "isometry report does not match".into()
            })?;
            ensure(report.passes(), || "complex is not a local isometry".into())?;
            ensure(generator_traces.len() == gens.len(), || {
                "trace count does not match".into()
            })?;
            for (i, (t, w)) in generator_traces.iter().zip(gens).enumerate() {
                let found = c
                    .loop_shuffle(g, w)
                    .ok_or_else(|| format!("generator {} does not trace a loop", i + 1))?;
                ensure(*t == g.format_word(&found), || {
                    format!("trace of generator {} does not match", i + 1)
                })?;
            }
            let loops = c.basis_loops();
            ensure(loops.len() == basis_loops.len(), || {
                "basis loop count does not match".into()
            })?;
            for (bl, entry) in loops.iter().zip(basis_loops) {
                ensure(bl.edge == entry.edge, || {
                    format!("basis loop edge {} does not match", entry.edge)
                })?;
                let p = parse_product(&entry.expression, gens.len())?;
                let value = p.evaluate(gens).map_err(|e| e.to_string())?;
                ensure(are_equal(g, &c.path_label(&bl.path), &value), || {
                    format!("basis loop through edge {} is not its expression", bl.edge)
                })?;
            }
            let verdict =
                purely_loxodromic_scan(g, &c, SIMPLE_CYCLE_CAP).map_err(|e| e.to_string())?;
            match verdict {
                ScanVerdict::Pure { cycles } => ensure(cycles == scan.simple_cycles, || {
                    "simple cycle count does not match".into()
                }),
                ScanVerdict::Witness { .. } => Err("complex has a join-word cycle".into()),
            }
        }
        _ => Err("verdict and evidence disagree".into()),
    }
}

pub fn verify_morse(g: &DefiningGraph, gens: &[Word], cert: &MorseCertificate) -> Verification {
    let check = || -> Check {
        check_header(g, gens, &cert.schema, &cert.graph, &cert.generators)?;
        match &cert.route {
            MorseRoute::ViaStable { certificate } => {
                ensure(certificate.generators == cert.generators, || {
                    "inner generators differ".into()
                })?;
                ensure(certificate.verdict == StabilityVerdict::Stable, || {
                    "inner verdict is not stable".into()
                })?;
                check_stability(g, gens, certificate).map_err(|m| format!("stability route: {m}"))
            }
            MorseRoute::ViaFiniteIndex { index, table } => {
                table
                    .validate(g, gens)
                    .map_err(|m| format!("coset table: {m}"))?;
                ensure(*index == table.index(), || {
                    "index does not match the table".into()
                })
            }
        }
    };
    to_verification(check())
}

pub fn verify_certificate(g: &DefiningGraph, gens: &[Word], cert: &Certificate) -> Verification {
    match cert {
        Certificate::Stability(c) => verify_stability(g, gens, c),
        Certificate::Morse(c) => verify_morse(g, gens, c),
    }
}

/// Parses and verifies a certificate using the graph and generators it embeds.
pub fn verify_certificate_json(text: &str) -> Result<Verification> {
    let cert = Certificate::from_json(text)?;
    let g = DefiningGraph::parse(cert.graph_text())?;
    let gens = cert
        .generator_texts()
        .iter()
        .map(|s| g.parse_word(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(verify_certificate(&g, &gens, &cert))
}
