use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use selfsim::automaton::{builtin, format_vertex, parse_transducer, parse_vertex, Transducer};
use selfsim::ball::{
    grigorchuk_eta, grigorchuk_weights, growth_exponent, verify_contraction, Ball, ContractionMode,
    WeightVector,
};
use selfsim::checks::verify_relators;
use selfsim::elements::{index_to_vertex, LevelAction};
use selfsim::expr::{eval_word, parse_word, ParseError, WordError, GRAMMAR};
use selfsim::quotient::{
    derived_index, element_order, hausdorff_estimate, predicted_order_basilica, quotient_order,
};
use selfsim::solver::WordProblem;
use selfsim::spectra::{
    cantor_approximation, level_spectrum, schreier_graph, spectrum_check, spectrum_to_csv, to_dot,
    to_json, verify_det_recursion,
};
use selfsim::stochastic::{estimate_contraction, exact_cogrowth};
use selfsim::thompson::verify_thompson_relators;
use selfsim::unrooted::{
    cd_commute, transitivity_check, verify_conjugation_identity, verify_expressions,
    verify_unrooted_relators, UnrootedGroup, Variant, DELTA_RELATIONS,
};
use selfsim::wreath::fixes_to_depth;

/// Computations with automaton groups acting on rooted and unrooted trees.
///
/// Output is JSON unless a subcommand says otherwise. Exit status is 0 on
/// success, 1 when a verification ran and failed, 2 on usage or input errors.
#[derive(Parser)]
#[command(name = "selfsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct Source {
    /// builtin automaton: gamma, bsv, grigorchuk, aleshin, or mandelbrot:<bits>
    #[arg(long)]
    builtin: Option<String>,
    /// automaton file
    #[arg(long)]
    automaton: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Output {
    /// write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(ValueEnum, Clone, Copy)]
enum Preset {
    Delta,
    DeltaLiteral,
    Gtilde,
    Thompson,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an automaton and report invertibility, monomiality and dual invertibility.
    Validate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        output: Output,
    },
    /// Image of a vertex (letters 1..d) under a word, or the permutation a word induces on a level.
    Act {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        word: String,
        #[arg(long, required_unless_present = "level")]
        vertex: Option<String>,
        #[arg(long)]
        level: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Decide whether a word is trivial. Uses the nucleus for contracting groups and
    /// otherwise falls back to a bounded check on levels up to --depth.
    Identity {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Check relators, substituting p = 1, 2, 4, …, pmax where p occurs. For gamma the
    /// default family is [[a^p,b^p],b^p] and [[b^p,a^(2p)],a^(2p)].
    Relators {
        #[command(flatten)]
        source: Source,
        /// relator expression; repeatable
        #[arg(long)]
        word: Vec<String>,
        #[arg(long, default_value_t = 16)]
        pmax: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Enumerate the ball of the given radius in the word metric with unit weights.
    Ball {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Check contraction inequalities on a ball: per child with weights (1, √2) for gamma,
    /// summed over children with the η-weights for grigorchuk.
    Contraction {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 8.0)]
        radius: f64,
        /// additive constant; defaults to 1/√2 (gamma) or η (grigorchuk)
        #[arg(long)]
        constant: Option<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Schreier graph of a level as JSON or DOT.
    Schreier {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Eigenvalues of the averaged generator operator on a level, as CSV by default.
    /// With --check (gamma only) each eigenvalue is tested against the determinant recursion.
    /// With --cantor the distinct eigenvalues of all levels up to --depth are listed.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long, required_unless_present = "cantor")]
        level: Option<usize>,
        #[arg(long)]
        check: bool,
        #[arg(long, requires = "depth")]
        cantor: bool,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Check Q_{n+1}(p) = Q_n(F(p)) at random points p in [-1,1]^3 for n < --level.
    Fcheck {
        #[arg(long, default_value_t = 6)]
        level: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Estimate the contraction statistics μ and η from random reduced words.
    Montecarlo {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 20_000)]
        length: usize,
        #[arg(long, default_value_t = 5_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Count reduced words of each length up to --length that represent the identity.
    Cogrowth {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 12)]
        length: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Order of the level quotient Q_n, compared with 2^((2/3)(2^n + ⌊3n/2⌋/2 − 1)) for gamma.
    /// With --word, the order of that element in Q_n; with --derived, the index of Q_n′.
    Quotient {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        level: usize,
        /// print only the order and the predicted order
        #[arg(long)]
        order: bool,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        derived: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Verify an HNN extension acting on the 3-regular tree: the conjugation identity for t,
    /// the relators to --depth and vertex transitivity to --radius.
    #[command(visible_alias = "verify")]
    HnnVerify {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 14)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        radius: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Evaluate [tu^-1,u^t] and [tu^-1,u^(t^2)] as exact dyadic PL maps of [0,1].
    Thompson {
        #[command(flatten)]
        output: Output,
    },
}

struct Report {
    body: String,
    ok: bool,
}

impl Report {
    fn json(value: Value, ok: bool) -> Self {
        Report {
            body: serde_json::to_string_pretty(&value).expect("serializable") + "\n",
            ok,
        }
    }
}

fn load(source: &Source) -> Result<(String, Transducer)> {
    match (&source.builtin, &source.automaton) {
        (Some(name), None) => {
            let (base, parameter) = match name.split_once(':') {
                Some((b, p)) => (b, Some(p)),
                None => (name.as_str(), None),
            };
            Ok((name.clone(), builtin(base, parameter)?))
        }
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Ok((path.display().to_string(), parse_transducer(&text)?))
        }
        _ => bail!("give exactly one of --builtin and --automaton"),
    }
}

fn word_problem(t: &Transducer) -> Result<WordProblem> {
    WordProblem::new(t).map_err(|e| anyhow!("word problem unavailable: {e}"))
}

fn reject_format(output: &Output, allowed: &[Format]) -> Result<()> {
    match output.format {
        Some(f) if !allowed.contains(&f) => {
            bail!("this subcommand does not support the requested format")
        }
        _ => Ok(()),
    }
}

fn big(x: &BigUint) -> String {
    x.to_str_radix(10)
}

fn run(command: Command) -> Result<(Report, Output)> {
    let json_only = [Format::Json];
    match command {
        Command::Validate { source, output } => {
            reject_format(&output, &json_only)?;
            let (name, t) = load(&source)?;
            let v = t.validate();
            let states: Vec<&str> = t.generators().map(|q| t.name(q)).collect();
            let value = json!({
                "automaton": name,
                "alphabet": t.alphabet_size(),
                "states": states,
                "invertible": v.invertible,
                "monomial": v.monomial,
                "dual_invertible": v.dual_invertible,
            });
            Ok((Report::json(value, true), output))
        }
        Command::Act {
            source,
            word,
            vertex,
            level,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (_, t) = load(&source)?;
            let w = eval_word(&t, &word)?;
            let d = t.alphabet_size();
            let value = match vertex {
                Some(v) => {
                    let v = parse_vertex(&v, d)?;
                    let image = t.apply_word(w.symbols(), &v)?;
                    json!({"word": word, "vertex": format_vertex(&v, d), "image": format_vertex(&image, d)})
                }
                None => {
                    let n = level.expect("clap enforces --vertex or --level");
                    if d.checked_pow(n as u32).is_none_or(|size| size > 1 << 20) {
                        bail!("level {n} has too many vertices");
                    }
                    let perm = LevelAction::new(&t, n).of_word(&w);
                    let images: Vec<String> = perm
                        .iter()
                        .map(|&i| format_vertex(&index_to_vertex(i as usize, d, n), d))
                        .collect();
                    json!({"word": word, "level": n, "images": images})
                }
            };
            Ok((Report::json(value, true), output))
        }
        Command::Identity {
            source,
            word,
            depth,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (_, t) = load(&source)?;
            let w = eval_word(&t, &word)?;
            let value = match WordProblem::new(&t) {
                Ok(wp) => json!({"identity": wp.is_identity(&w), "method": "nucleus"}),
                Err(_) => json!({
                    "identity": fixes_to_depth(&t, &w, depth),
                    "method": "bounded check only",
                    "depth": depth,
                }),
            };
            Ok((Report::json(value, true), output))
        }
        Command::Relators {
            source,
            word,
            pmax,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (name, t) = load(&source)?;
            let texts: Vec<String> = if !word.is_empty() {
                word
            } else if name == "gamma" {
                vec!["[[a^p,b^p],b^p]".into(), "[[b^p,a^(2p)],a^(2p)]".into()]
            } else {
                bail!("--word is required for this automaton");
            };
            let exprs = texts
                .iter()
                .map(|s| parse_word(s))
                .collect::<Result<Vec<_>, _>>()?;
            let results = verify_relators(&word_problem(&t)?, &exprs, pmax)?;
            let ok = results.iter().all(|r| r.identity);
            Ok((
                Report::json(json!({"results": results, "ok": ok}), ok),
                output,
            ))
        }
        Command::Ball {
            source,
            radius,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (_, t) = load(&source)?;
            let wp = word_problem(&t)?;
            let ball = Ball::new(&wp, radius, &WeightVector::unit(&t), 2_000_000)?;
            let words: Vec<Value> = ball
                .words()
                .iter()
                .zip(ball.lengths())
                .map(|(w, l)| json!({"word": w.display(&t).to_string(), "length": l}))
                .collect();
            Ok((
                Report::json(
                    json!({"radius": radius, "size": ball.len(), "elements": words}),
                    true,
                ),
                output,
            ))
        }
        Command::Contraction {
            source,
            radius,
            constant,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (name, t) = load(&source)?;
            let wp = word_problem(&t)?;
            let (weights, eta, c, mode, growth) = match name.as_str() {
                "gamma" => {
                    let w = WeightVector::from_names(&t, &[("a", 1.0), ("b", 2f64.sqrt())])?;
                    (
                        w,
                        0.5f64.sqrt(),
                        constant.unwrap_or(0.5f64.sqrt()),
                        ContractionMode::PerChild,
                        None,
                    )
                }
                "grigorchuk" => {
                    let eta = grigorchuk_eta();
                    let w = WeightVector::from_names(&t, &grigorchuk_weights())?;
                    (
                        w,
                        eta,
                        constant.unwrap_or(eta),
                        ContractionMode::Summed,
                        Some(growth_exponent(2, eta)?),
                    )
                }
                _ => bail!("contraction weights are defined for gamma and grigorchuk"),
            };
            let ball = Ball::new(&wp, radius, &weights, 2_000_000)?;
            let mut report = verify_contraction(&ball, eta, c, mode);
            let ok = report.ok();
            let violations = report.violations.len();
            report.violations.truncate(20);
            let value = json!({
                "automaton": name,
                "verified_to_radius": radius,
                "report": report,
                "violation_count": violations,
                "growth_exponent": growth,
                "ok": ok,
            });
            Ok((Report::json(value, ok), output))
        }
        Command::Schreier {
            source,
            level,
            output,
        } => {
            reject_format(&output, &[Format::Json, Format::Dot])?;
            let (_, t) = load(&source)?;
            let g = schreier_graph(&t, level)?;
            let report = match output.format {
                Some(Format::Dot) => Report {
                    body: to_dot(&g),
                    ok: true,
                },
                _ => Report::json(to_json(&g), true),
            };
            Ok((report, output))
        }
        Command::Spectrum {
            source,
            level,
            check,
            cantor,
            depth,
            tol,
            output,
        } => {
            reject_format(&output, &[Format::Json, Format::Csv])?;
            let (name, t) = load(&source)?;
            if check {
                if name != "gamma" {
                    bail!("--check is available for gamma only");
                }
                let n = level.ok_or_else(|| anyhow!("--check needs --level"))?;
                let r = spectrum_check(n, tol)?;
                let ok = r.pass;
                return Ok((Report::json(serde_json::to_value(&r)?, ok), output));
            }
            let values = if cantor {
                if name != "gamma" {
                    bail!("--cantor is available for gamma only");
                }
                cantor_approximation(depth.expect("clap enforces --depth"))?
            } else {
                level_spectrum(&t, level.expect("clap enforces --level"))?
            };
            let report = match output.format {
                Some(Format::Json) => Report::json(
                    json!({"level": level, "depth": depth, "eigenvalues": values}),
                    true,
                ),
                _ => Report {
                    body: spectrum_to_csv(&values),
                    ok: true,
                },
            };
            Ok((report, output))
        }
        Command::Fcheck {
            level,
            samples,
            tol,
            seed,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let r = verify_det_recursion(samples, level, tol, seed);
            let ok = r.pass;
            Ok((Report::json(serde_json::to_value(&r)?, ok), output))
        }
        Command::Montecarlo {
            source,
            length,
            samples,
            seed,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (name, t) = load(&source)?;
            let s = estimate_contraction(&t, length, samples, seed)?;
            let value = json!({
                "group": name,
                "n": s.n,
                "samples": s.samples,
                "seed": seed,
                "mu_hat": s.mu_hat,
                "eta_hat": s.eta_hat,
                "stderr_mu": s.stderr_mu,
                "stderr_eta": s.stderr_eta,
            });
            Ok((Report::json(value, true), output))
        }
        Command::Cogrowth {
            source,
            length,
            output,
        } => {
            reject_format(&output, &[Format::Json, Format::Csv])?;
            let (_, t) = load(&source)?;
            let rows = exact_cogrowth(&word_problem(&t)?, length)?;
            let report = match output.format {
                Some(Format::Csv) => Report {
                    body: std::iter::once("n,words,identities\n".to_string())
                        .chain(
                            rows.iter()
                                .map(|r| format!("{},{},{}\n", r.n, r.words, r.identities)),
                        )
                        .collect(),
                    ok: true,
                },
                _ => Report::json(serde_json::to_value(&rows)?, true),
            };
            Ok((report, output))
        }
        Command::Quotient {
            source,
            level,
            order,
            word,
            derived,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let (name, t) = load(&source)?;
            if let Some(text) = word {
                let w = eval_word(&t, &text)?;
                let o = element_order(&t, &w, level)?;
                return Ok((
                    Report::json(json!({"word": text, "n": level, "order": big(&o)}), true),
                    output,
                ));
            }
            if derived {
                let index = derived_index(&t, level)?;
                return Ok((
                    Report::json(json!({"n": level, "derived_index": big(&index)}), true),
                    output,
                ));
            }
            let q = quotient_order(&t, level)?;
            let predicted = if name == "gamma" {
                Some(big(&predicted_order_basilica(level as u32)?))
            } else {
                None
            };
            let ok = predicted.as_ref().is_none_or(|p| *p == big(&q));
            let value = if order {
                json!({"order": big(&q), "predicted": predicted})
            } else {
                json!({
                    "n": level,
                    "order": big(&q),
                    "predicted": predicted,
                    "hausdorff_estimate": hausdorff_estimate(&t, level)?,
                })
            };
            Ok((Report::json(value, ok), output))
        }
        Command::HnnVerify {
            preset,
            depth,
            radius,
            seed,
            output,
        } => {
            reject_format(&output, &json_only)?;
            let variant = match preset {
                Preset::Delta => Variant::Delta,
                Preset::DeltaLiteral => Variant::DeltaLiteral,
                Preset::Gtilde => Variant::Grig,
                Preset::Thompson => return run(Command::Thompson { output }),
            };
            Ok((hnn_report(variant, depth, radius, seed)?, output))
        }
        Command::Thompson { output } => {
            reject_format(&output, &json_only)?;
            let checks = verify_thompson_relators()?;
            let ok = checks.iter().all(|c| c.identity);
            Ok((
                Report::json(json!({"relators": checks, "exact": true, "ok": ok}), ok),
                output,
            ))
        }
    }
}

fn hnn_report(variant: Variant, depth: usize, radius: usize, seed: u64) -> Result<Report> {
    let gate_depth = depth.min(10);
    let gate = verify_conjugation_identity(variant, 20, gate_depth, seed)?;
    let note = format!(
        "verified to depth {depth}, transitivity to radius {radius}; bounded checks, not proofs"
    );
    if !gate.ok {
        let value = json!({"preset": variant.label(), "conjugation_gate": gate, "ok": false, "note": "conjugation identity failed; no results reported"});
        return Ok(Report::json(value, false));
    }
    let relators = verify_unrooted_relators(variant, depth)?;
    let relations = match variant {
        Variant::Delta | Variant::DeltaLiteral => {
            let group = UnrootedGroup::new(variant);
            let mut checks =
                serde_json::to_value(verify_expressions(&group, &DELTA_RELATIONS, gate_depth)?)?;
            let cd = cd_commute(gate_depth)?;
            checks
                .as_array_mut()
                .expect("array")
                .push(json!({"relator": "[c,d]", "depth": gate_depth, "ok": cd, "moved": null}));
            checks
        }
        Variant::Grig => json!([]),
    };
    let transitivity = transitivity_check(variant, radius)?;
    let ok = relators.iter().all(|r| r.ok)
        && relations
            .as_array()
            .expect("array")
            .iter()
            .all(|r| r["ok"] == true)
        && transitivity.ok;
    let value = json!({
        "preset": variant.label(),
        "conjugation_gate": gate,
        "relators": relators,
        "relations": relations,
        "transitivity": transitivity,
        "ok": ok,
        "note": note,
    });
    Ok(Report::json(value, ok))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((report, output)) => {
            let written = match &output.out {
                Some(path) => fs::write(path, &report.body)
                    .with_context(|| format!("writing {}", path.display())),
                None => std::io::stdout()
                    .write_all(report.body.as_bytes())
                    .context("writing stdout"),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<WordError>().is_some() || e.downcast_ref::<ParseError>().is_some() {
                eprintln!("\nword expressions:\n{GRAMMAR}");
            }
            ExitCode::from(2)
        }
    }
}
