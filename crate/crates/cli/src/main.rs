use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use raag::complex::{
    check_local_isometry, fold, purely_loxodromic_scan, rose, saturate, SIMPLE_CYCLE_CAP,
};
use raag::cosets::{enumerate_cosets, resume_cosets, CosetEnumeration, CosetOutcome};
use raag::deciders::{
    decide_stability, decide_stability_parallel, semidecide_morse, DEFAULT_BUDGET,
};
use raag::geometry::{stability_probe, PROBE_MAX_PRODUCTS};
use raag::{
    canonical, classify, cyclic_reduce, normalize, star_length, verify_certificate_json,
    Certificate, DefiningGraph, ElementKind, LabeledComplex, MorseOutcome, RaagError,
    SaturationStatus, ScanVerdict, StabilityOutcome, Verification, Word,
};

const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "raag",
    version,
    about = "Stability and Morse deciders for right-angled Artin groups"
)]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct GraphArg {
    /// Graph file (`vertex <name>` / `edge <u> <v>` lines).
    #[arg(long, short)]
    graph: PathBuf,
}

#[derive(Args)]
struct GensArg {
    /// Generator file, one word per line.
    #[arg(long)]
    gens: Option<PathBuf>,
    /// A generator word such as "a b^-1"; repeatable.
    #[arg(long = "gen")]
    gen: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a defining graph and report the hypotheses.
    CheckGraph(GraphArg),
    /// Normal form, canonical form and cyclic reduction of a word.
    Nf {
        #[command(flatten)]
        graph: GraphArg,
        word: String,
    },
    /// Classify a word as identity, elliptic or loxodromic.
    Classify {
        #[command(flatten)]
        graph: GraphArg,
        word: String,
    },
    /// Star length with a star-geodesic factorization.
    StarLength {
        #[command(flatten)]
        graph: GraphArg,
        word: String,
    },
    /// Decide stability of the subgroup generated by the given words.
    Stability {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Run both sides on separate threads (not reproducible).
        #[arg(long)]
        parallel: bool,
        /// Write the certificate here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semi-decide whether the subgroup is Morse.
    Morse {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coset enumeration for the subgroup.
    Cosets {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Write the complete table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the enumeration state here when the budget runs out.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Continue from a checkpoint instead of starting afresh.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Labeled square complexes.
    #[command(subcommand)]
    Complex(ComplexCommand),
    /// Heuristic local-to-global quasigeodesic probe.
    Probe {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, default_value_t = 4)]
        lambda_max: u32,
        #[arg(long, default_value_t = 4)]
        epsilon_max: u32,
        /// Hyperbolicity constant assumed for the star metric.
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = PROBE_MAX_PRODUCTS)]
        max_products: usize,
    },
    /// Verify a certificate against the graph and generators it embeds.
    VerifyCert { certificate: PathBuf },
}

#[derive(Subcommand)]
enum ComplexCommand {
    /// Folded rose on the generators.
    Build {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
    },
    /// Fold and complete squares until locally isometric.
    Saturate {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        gens: GensArg,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Local-isometry check and join-word cycle scan of a complex file.
    Verify {
        #[command(flatten)]
        graph: GraphArg,
        complex: PathBuf,
    },
}

enum Failure {
    Input(String),
    Budget(Report),
}

impl From<RaagError> for Failure {
    fn from(e: RaagError) -> Self {
        Failure::Input(e.to_string())
    }
}

/// A text rendering and the matching JSON document.
struct Report {
    text: String,
    json: Value,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_graph(arg: &GraphArg) -> Result<DefiningGraph, Failure> {
    Ok(DefiningGraph::parse(&read(&arg.graph)?)?)
}

fn load_gens(g: &DefiningGraph, arg: &GensArg) -> Result<Vec<Word>, Failure> {
    let mut lines: Vec<String> = Vec::new();
    if let Some(path) = &arg.gens {
        for raw in read(path)?.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                lines.push(line.to_string());
            }
        }
    }
    lines.extend(arg.gen.iter().cloned());
    if lines.is_empty() {
        return Err(Failure::Input(
            "no generators given (use --gens or --gen)".into(),
        ));
    }
    Ok(lines
        .iter()
        .map(|l| g.parse_word(l))
        .collect::<raag::Result<_>>()?)
}

fn show(g: &DefiningGraph, w: &Word) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        g.format_word(w)
    }
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::CheckGraph(arg) => {
            let g = load_graph(arg)?;
            let r = g.validate();
            let mut text = format!(
                "vertices: {}\nconnected: {}\nanti-connected: {}\nhypotheses: {}",
                r.vertex_count,
                r.connected,
                r.anti_connected,
                if r.meets_hypotheses() {
                    "met"
                } else {
                    "not met"
                }
            );
            for w in &r.warnings {
                text.push_str(&format!("\nwarning: {w}"));
            }
            let json = serde_json::to_value(&r).expect("report serializes");
            if r.meets_hypotheses() {
                Ok(Report { text, json })
            } else {
                Err(Failure::Input(format!(
                    "graph does not meet the hypotheses\n{text}"
                )))
            }
        }
        Command::Nf { graph, word } => {
            let g = load_graph(graph)?;
            let w = g.parse_word(word)?;
            let nf = normalize(&g, &w)?;
            let can = canonical(&g, &nf);
            let cyc = cyclic_reduce(&g, &w);
            Ok(Report {
                text: format!(
                    "normal form: {}\ncanonical: {}\ncyclic core: {}\nconjugator: {}",
                    show(&g, nf.word()),
                    show(&g, can.word()),
                    show(&g, cyc.core.word()),
                    show(&g, &cyc.conjugator)
                ),
                json: json!({
                    "normal_form": g.format_word(nf.word()),
                    "canonical": g.format_word(can.word()),
                    "core": g.format_word(cyc.core.word()),
                    "conjugator": g.format_word(&cyc.conjugator),
                }),
            })
        }
        Command::Classify { graph, word } => {
            let g = load_graph(graph)?;
            let class = classify(&g, &g.parse_word(word)?)?;
            let kind = match class.kind {
                ElementKind::Identity => "identity",
                ElementKind::Elliptic => "elliptic",
                ElementKind::Loxodromic => "loxodromic",
            };
            let cover = class
                .witness
                .map(|c| json!({"side_a": g.set_names(c.side_a), "side_b": g.set_names(c.side_b)}));
            let mut text = format!(
                "kind: {kind}\ncore: {}",
                show(&g, class.reduced.core.word())
            );
            if let Some(c) = &class.witness {
                text.push_str(&format!(
                    "\njoin: {{{}}} * {{{}}}",
                    g.set_names(c.side_a).join(","),
                    g.set_names(c.side_b).join(",")
                ));
            }
            Ok(Report {
                text,
                json: json!({
                    "kind": kind,
                    "core": g.format_word(class.reduced.core.word()),
                    "conjugator": g.format_word(&class.reduced.conjugator),
                    "cover": cover,
                }),
            })
        }
        Command::StarLength { graph, word } => {
            let g = load_graph(graph)?;
            let s = star_length(&g, &g.parse_word(word)?)?;
            let f = &s.factorization;
            let blocks: Vec<Value> = f
                .blocks
                .iter()
                .zip(&f.star_vertices)
                .map(|(b, v)| json!({"star": g.name(*v), "block": g.format_word(b)}))
                .collect();
            let text = std::iter::once(format!("star length: {}", s.length))
                .chain(
                    f.blocks
                        .iter()
                        .zip(&f.star_vertices)
                        .map(|(b, v)| format!("  St({}): {}", g.name(*v), g.format_word(b))),
                )
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Report {
                text,
                json: json!({"length": s.length, "blocks": blocks}),
            })
        }
        Command::Stability {
            graph,
            gens,
            budget,
            parallel,
            out,
        } => {
            let g = load_graph(graph)?;
            let gens = load_gens(&g, gens)?;
            check_budget(*budget)?;
            let outcome = if *parallel {
                decide_stability_parallel(&g, &gens, *budget)?
            } else {
                decide_stability(&g, &gens, *budget)?
            };
            match outcome {
                StabilityOutcome::Decided(cert) => {
                    let cert = Certificate::Stability(cert);
                    certificate_report(&cert, out.as_deref())
                }
                StabilityOutcome::BudgetExhausted(run) => Err(Failure::Budget(Report {
                    text: format!(
                        "budget exhausted after {} units ({} products classified, {} saturation steps)",
                        run.units(),
                        run.classified(),
                        run.saturation_steps()
                    ),
                    json: json!({
                        "status": "budget_exhausted",
                        "units": run.units(),
                        "classified": run.classified(),
                        "saturation_steps": run.saturation_steps(),
                    }),
                })),
            }
        }
        Command::Morse {
            graph,
            gens,
            budget,
            out,
        } => {
            let g = load_graph(graph)?;
            let gens = load_gens(&g, gens)?;
            check_budget(*budget)?;
            match semidecide_morse(&g, &gens, *budget)? {
                MorseOutcome::Morse(cert) => {
                    certificate_report(&Certificate::Morse(cert), out.as_deref())
                }
                MorseOutcome::BudgetExhausted { not_stable } => {
                    let text = if not_stable.is_some() {
                        "budget exhausted: not stable, index still unknown".to_string()
                    } else {
                        "budget exhausted: stability undecided".to_string()
                    };
                    Err(Failure::Budget(Report {
                        text,
                        json: json!({
                            "status": "budget_exhausted",
                            "not_stable": not_stable.map(Certificate::Stability),
                        }),
                    }))
                }
            }
        }
        Command::Cosets {
            graph,
            gens,
            budget,
            csv,
            checkpoint,
            resume,
        } => {
            let g = load_graph(graph)?;
            check_budget(*budget)?;
            let (gens, outcome) = match resume {
                Some(path) => {
                    let state: CosetEnumeration = serde_json::from_str(&read(path)?)
                        .map_err(|e| Failure::Input(format!("checkpoint: {e}")))?;
                    let gens = load_gens(&g, gens)?;
                    (gens, resume_cosets(state, *budget))
                }
                None => {
                    let gens = load_gens(&g, gens)?;
                    let outcome = enumerate_cosets(&g, &gens, *budget)?;
                    (gens, outcome)
                }
            };
            match outcome {
                CosetOutcome::Complete { index, table } => {
                    table.validate(&g, &gens).map_err(|m| {
                        Failure::Input(format!("table does not belong to these generators: {m}"))
                    })?;
                    if let Some(path) = csv {
                        write(path, &table.to_csv(&g))?;
                    }
                    Ok(Report {
                        text: format!("index: {index}"),
                        json: json!({"status": "complete", "index": index, "table": table}),
                    })
                }
                CosetOutcome::BudgetExhausted(state) => {
                    if let Some(path) = checkpoint {
                        write(
                            path,
                            &serde_json::to_string(&state).expect("state serializes"),
                        )?;
                    }
                    Err(Failure::Budget(Report {
                        text: format!(
                            "budget exhausted after {} coset definitions",
                            state.definitions()
                        ),
                        json: json!({"status": "budget_exhausted", "definitions": state.definitions()}),
                    }))
                }
            }
        }
        Command::Complex(ComplexCommand::Build { graph, gens }) => {
            let g = load_graph(graph)?;
            let gens = load_gens(&g, gens)?;
            let c = fold(&rose(&g, &gens)?);
            Ok(complex_report(&g, &c, None))
        }
        Command::Complex(ComplexCommand::Saturate {
            graph,
            gens,
            budget,
        }) => {
            let g = load_graph(graph)?;
            let gens = load_gens(&g, gens)?;
            check_budget(*budget)?;
            let s = saturate(&g, &rose(&g, &gens)?, *budget);
            let report = complex_report(&g, &s.complex, Some(s.steps));
            match s.status {
                SaturationStatus::Complete => Ok(report),
                SaturationStatus::BudgetExhausted => Err(Failure::Budget(report)),
            }
        }
        Command::Complex(ComplexCommand::Verify { graph, complex }) => {
            let g = load_graph(graph)?;
            let c = LabeledComplex::parse(&g, &read(complex)?)?;
            let report = check_local_isometry(&g, &c);
            let isometry = json!({
                "folded": report.folded,
                "fold_conflicts": report.fold_conflicts.len(),
                "missing_squares": report.missing_squares.iter().map(|k| k.describe(&g)).collect::<Vec<_>>(),
                "duplicate_squares": report.duplicate_squares.iter().map(|k| k.describe(&g)).collect::<Vec<_>>(),
            });
            let mut text = format!(
                "vertices: {}, edges: {}, squares: {}\nlocal isometry: {}",
                c.vertex_count(),
                c.edges().len(),
                c.squares().len(),
                if report.passes() { "yes" } else { "no" }
            );
            let scan = if report.passes() {
                match purely_loxodromic_scan(&g, &c, SIMPLE_CYCLE_CAP)? {
                    ScanVerdict::Pure { cycles } => {
                        text.push_str(&format!("\nsimple cycles: {cycles}, none a join word"));
                        json!({"pure": true, "simple_cycles": cycles})
                    }
                    ScanVerdict::Witness { cycle, .. } => {
                        let label = g.format_word(&cycle.label);
                        text.push_str(&format!("\njoin-word cycle: {label}"));
                        json!({"pure": false, "witness": label})
                    }
                }
            } else {
                for k in &report.missing_squares {
                    text.push_str(&format!("\nmissing square at {}", k.describe(&g)));
                }
                Value::Null
            };
            Ok(Report {
                text,
                json: json!({"isometry": isometry, "scan": scan}),
            })
        }
        Command::Probe {
            graph,
            gens,
            lambda_max,
            epsilon_max,
            delta,
            max_products,
        } => {
            let g = load_graph(graph)?;
            let gens = load_gens(&g, gens)?;
            let r = stability_probe(&g, &gens, *lambda_max, *epsilon_max, *delta, *max_products)?;
            let json = serde_json::to_value(&r).expect("report serializes");
            let mut text = format!("HEURISTIC probe assuming delta = {delta}");
            for p in &r.pairs {
                let status = serde_json::to_value(&p.status).expect("status serializes");
                text.push_str(&format!(
                    "\n  lambda={} epsilon={} K={}: {}",
                    p.lambda,
                    p.epsilon,
                    p.constants.k,
                    status["status"].as_str().unwrap_or("?")
                ));
            }
            text.push_str(&match r.first_pass {
                Some((l, e)) => format!("\nfirst pass: lambda={l} epsilon={e}"),
                None => "\nno pair passed".to_string(),
            });
            Ok(Report { text, json })
        }
        Command::VerifyCert { certificate } => {
            match verify_certificate_json(&read(certificate)?)? {
                Verification::Valid => Ok(Report {
                    text: "certificate valid".into(),
                    json: json!({"valid": true}),
                }),
                Verification::Invalid(reason) => {
                    Err(Failure::Input(format!("certificate invalid: {reason}")))
                }
            }
        }
    }
}

fn check_budget(budget: usize) -> Result<(), Failure> {
    if budget == 0 {
        return Err(Failure::Input("budget must be positive".into()));
    }
    Ok(())
}

fn certificate_report(cert: &Certificate, out: Option<&Path>) -> Result<Report, Failure> {
    let text_cert = cert.to_json();
    if let Some(path) = out {
        write(path, &text_cert)?;
    }
    let verdict = match cert {
        Certificate::Stability(c) => serde_json::to_value(c.verdict).expect("verdict serializes"),
        Certificate::Morse(c) => serde_json::to_value(c.verdict).expect("verdict serializes"),
    };
    let verdict = verdict.as_str().unwrap_or("?").to_string();
    let mut text = format!("verdict: {verdict}");
    match cert {
        Certificate::Stability(c) => {
            let evidence = serde_json::to_value(&c.evidence).expect("evidence serializes");
            text.push_str(&format!(
                "\nevidence: {}",
                evidence["type"].as_str().unwrap_or("?")
            ));
            if let Some(w) = evidence["word"].as_str() {
                text.push_str(&format!("\nelliptic element: {w}"));
            }
        }
        Certificate::Morse(c) => {
            let route = serde_json::to_value(&c.route).expect("route serializes");
            text.push_str(&format!(
                "\nroute: {}",
                route["type"].as_str().unwrap_or("?")
            ));
            if let Some(i) = route["index"].as_u64() {
                text.push_str(&format!("\nindex: {i}"));
            }
        }
    }
    if let Some(path) = out {
        text.push_str(&format!("\ncertificate written to {}", path.display()));
    }
    Ok(Report {
        text,
        json: json!({"status": "decided", "verdict": verdict, "certificate": cert}),
    })
}

fn complex_report(g: &DefiningGraph, c: &LabeledComplex, steps: Option<usize>) -> Report {
    let passes = check_local_isometry(g, c).passes();
    let mut text = c.to_text(g);
    if let Some(s) = steps {
        text.push_str(&format!(
            "# {s} completion steps, local isometry: {passes}\n"
        ));
    }
    Report {
        text: text.trim_end().to_string(),
        json: json!({
            "complex": c.to_text(g),
            "vertices": c.vertex_count(),
            "edges": c.edges().len(),
            "squares": c.squares().len(),
            "local_isometry": passes,
            "steps": steps,
        }),
    }
}

fn emit(format: Format, report: &Report) {
    match format {
        Format::Text => println!("{}", report.text),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.json).expect("json")
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            emit(cli.format, &report);
            ExitCode::SUCCESS
        }
        Err(Failure::Budget(report)) => {
            emit(cli.format, &report);
            ExitCode::from(EXIT_BUDGET)
        }
        Err(Failure::Input(msg)) => {
            match cli.format {
                Format::Text => eprintln!("error: {msg}"),
                Format::Json => println!("{}", json!({"status": "error", "message": msg})),
            }
            ExitCode::from(EXIT_INPUT)
        }
    }
}
