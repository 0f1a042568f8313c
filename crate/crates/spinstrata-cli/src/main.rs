//! `spinstrata` — command-line front end for the spinstrata library.
//!
//! Every subcommand prints one JSON document on standard output.  Exit
//! codes: `0` when the requested quantity was evaluated, `2` when it lies
//! outside the evaluable range (a symbolic answer would be needed), `1` on
//! any error (malformed arguments, failed preconditions, failed checks of
//! an interpolation).

use std::io::Write;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use spinstrata::graph::HalfEdge;
use spinstrata::level::{
    enumerate_horizontal_one_edge, enumerate_two_level_graphs, level_stratum, GenStratum, Level,
    LevelGraph, Signature,
};
use spinstrata::pixton::{conjecture_rhs, dr_cycle_with_log, RamificationVector};
use spinstrata::recursion::{
    graph_ambient, one_edge_graphs, pullback_contributions, reconstruct, stratum_class_traced,
    Variant,
};
use spinstrata::spin_comb::{base_parity, classification_json, classify_level_graph, Parity};
use spinstrata::taut::complementary_probes;
use spinstrata::Error;

#[derive(Parser, Debug)]
#[command(name = "spinstrata", version, about = "Spin stratum classes of abelian differentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Class (spin by default) of a stratum with optional residue conditions.
    SpinClass(SpinClassArgs),
    /// Clutching pullback of a stratum class along a one-edge graph.
    ClutchPull(ClutchPullArgs),
    /// (Spin) double ramification cycle via Pixton's formula.
    Dr(DrArgs),
    /// Spin classification of every two-level graph of a stratum.
    SpinClassify(SignatureArgs),
    /// Two-level and one-edge horizontal graphs of a stratum.
    Levelgraphs(SignatureArgs),
    /// Compare the spin DR cycle with the star-graph side of the conjecture.
    ConjectureCheck(SignatureArgs),
}

#[derive(Args, Debug)]
struct SignatureArgs {
    /// Orders of zeros and poles, comma separated (e.g. `4,-2,-2`).
    #[arg(long, allow_hyphen_values = true)]
    mu: String,
    /// Genus.
    #[arg(long)]
    g: u32,
}

#[derive(Args, Debug)]
struct SpinClassArgs {
    #[command(flatten)]
    sig: SignatureArgs,
    /// Residue condition `legs:0`, legs joined by `+` (e.g. `3:0`, `2+3:0`).
    #[arg(long = "res")]
    res: Vec<String>,
    /// Pair of simple poles with opposite residues (e.g. `2,3`).
    #[arg(long = "pair")]
    pair: Vec<String>,
    /// Compute the plain class instead of the spin class.
    #[arg(long)]
    plain: bool,
    /// Also write the recursion trace to this file.
    #[arg(long)]
    trace: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct ClutchPullArgs {
    #[command(flatten)]
    sig: SignatureArgs,
    /// Canonical id of the one-edge graph (see the error message for the list).
    #[arg(long)]
    graph: String,
    /// Pull back the plain class instead of the spin class.
    #[arg(long)]
    plain: bool,
}

#[derive(Args, Debug)]
struct DrArgs {
    /// Ramification vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Genus.
    #[arg(long)]
    g: u32,
    /// Twist.
    #[arg(long, default_value_t = 1)]
    k: i64,
    /// Spin variant (odd entries, odd `k`).
    #[arg(long)]
    spin: bool,
    /// Compare with the star-graph side for the signature `--mu`.
    #[arg(long)]
    check_conjecture: bool,
    /// Signature for `--check-conjecture`.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
}

/// Outcome of a subcommand: a JSON document and whether it is symbolic.
struct Outcome {
    doc: Value,
    symbolic: bool,
}

impl Outcome {
    fn evaluated(doc: Value) -> Self {
        Outcome { doc, symbolic: false }
    }
}

fn parse_list(s: &str) -> anyhow::Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().with_context(|| format!("bad integer `{t}`")))
        .collect()
}

fn parse_res(s: &str) -> anyhow::Result<Vec<HalfEdge>> {
    let (legs, rhs) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("residue condition `{s}` must look like `3:0`"))?;
    if rhs.trim() != "0" {
        bail!("only vanishing residue conditions are supported (`{s}`)");
    }
    legs.split('+')
        .map(|t| t.trim().parse::<HalfEdge>().with_context(|| format!("bad leg `{t}`")))
        .collect()
}

fn parse_pair(s: &str) -> anyhow::Result<Vec<HalfEdge>> {
    let legs: Vec<HalfEdge> = s
        .split(',')
        .map(|t| t.trim().parse::<HalfEdge>().with_context(|| format!("bad leg `{t}`")))
        .collect::<anyhow::Result<_>>()?;
    if legs.len() != 2 {
        bail!("a pair needs exactly two legs (`{s}`)");
    }
    Ok(legs)
}

fn signature(args: &SignatureArgs) -> anyhow::Result<Signature> {
    Ok(Signature::abelian(args.g, parse_list(&args.mu)?)?)
}

fn manifest(subcommand: &str, args: Value) -> Value {
    json!({
        "subcommand": subcommand,
        "arguments": args,
        "engine_version": env!("CARGO_PKG_VERSION"),
    })
}

fn symbolic(subcommand: &str, args: Value, reason: String) -> Outcome {
    Outcome {
        doc: json!({
            "manifest": manifest(subcommand, args),
            "status": "symbolic",
            "reason": reason,
        }),
        symbolic: true,
    }
}

fn variant(plain: bool) -> Variant {
    if plain {
        Variant::Plain
    } else {
        Variant::Spin
    }
}

fn cmd_spin_class(a: &SpinClassArgs) -> anyhow::Result<Outcome> {
    let sig = signature(&a.sig)?;
    let mut residues = Vec::new();
    for r in &a.res {
        residues.push(parse_res(r)?);
    }
    for p in &a.pair {
        residues.push(parse_pair(p)?);
    }
    let stratum = sig.stratum().with_residues(residues.clone())?;
    let v = variant(a.plain);
    let args = json!({
        "mu": sig.orders, "g": sig.g, "residues": residues, "variant": v,
    });
    let (class, trace) = match stratum_class_traced(&stratum, v) {
        Ok(x) => x,
        Err(Error::Symbolic(reason)) => return Ok(symbolic("spin-class", args, reason)),
        Err(e) => return Err(e.into()),
    };
    let trace_json = serde_json::to_value(&trace)?;
    if let Some(path) = &a.trace {
        std::fs::write(path, serde_json::to_string_pretty(&trace_json)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let solve = if trace.rule.starts_with("reconstruct") {
        serde_json::to_value(reconstruct(&stratum, v)?.1)?
    } else {
        Value::Null
    };
    Ok(Outcome::evaluated(json!({
        "manifest": manifest("spin-class", args),
        "status": "evaluated",
        "stratum": stratum.describe(),
        "class": class.to_json(),
        "solve": solve,
        "trace": trace_json,
    })))
}

fn cmd_clutch_pull(a: &ClutchPullArgs) -> anyhow::Result<Outcome> {
    let sig = signature(&a.sig)?;
    let stratum = sig.stratum();
    let legs = stratum.labels();
    let graphs = one_edge_graphs(sig.g, &legs);
    let ids: Vec<String> = graphs.iter().map(|g| g.canonical_key()).collect();
    let Some(pos) = ids.iter().position(|k| *k == a.graph) else {
        bail!("unknown graph `{}`; available: {}", a.graph, ids.join(" | "));
    };
    let gamma = &graphs[pos];
    let v = variant(a.plain);
    let args = json!({ "mu": sig.orders, "g": sig.g, "graph": a.graph, "variant": v });
    let contributions = match pullback_contributions(&stratum, gamma, v) {
        Ok(c) => c,
        Err(Error::Symbolic(reason)) => return Ok(symbolic("clutch-pull", args, reason)),
        Err(e) => return Err(e.into()),
    };
    let mut total = spinstrata::taut::DecoratedClass::zero(graph_ambient(gamma));
    let mut parts = Vec::new();
    for c in &contributions {
        total = total.add(&c.class);
        parts.push(json!({
            "level_graph": c.graph.to_json(),
            "horizontal": c.horizontal,
            "structures": c.structures,
            "class": c.class.to_json(),
        }));
    }
    Ok(Outcome::evaluated(json!({
        "manifest": manifest("clutch-pull", args),
        "status": "evaluated",
        "graph": gamma.to_json(),
        "pullback": total.to_json(),
        "contributions": parts,
    })))
}

fn cmd_dr(a: &DrArgs) -> anyhow::Result<Outcome> {
    let entries = parse_list(&a.a)?;
    let rv = RamificationVector::new(a.g, a.k, entries.clone())?;
    let args = json!({ "a": entries, "g": a.g, "k": a.k, "spin": a.spin, "mu": a.mu });
    let (class, log) = dr_cycle_with_log(&rv, a.spin)?;
    let mut doc = json!({
        "manifest": manifest("dr", args.clone()),
        "status": "evaluated",
        "class": class.to_json(),
        "log": serde_json::to_value(&log)?,
    });
    if a.check_conjecture {
        let mu = a
            .mu
            .as_deref()
            .ok_or_else(|| anyhow!("--check-conjecture needs --mu"))?;
        let mu = parse_list(mu)?;
        let expected: Vec<i64> = mu.iter().map(|m| m + a.k).collect();
        if expected != entries {
            bail!("--a must equal mu + k entrywise");
        }
        let rhs = match conjecture_rhs(&mu, a.g) {
            Ok(c) => c,
            Err(Error::Symbolic(reason)) => return Ok(symbolic("dr", args, reason)),
            Err(e) => return Err(e.into()),
        };
        let probes = complementary_probes(class.ambient(), a.g as i64);
        let same = class.fingerprint(&probes) == rhs.fingerprint(&probes);
        doc["conjecture"] = json!({
            "result": if same { "match" } else { "mismatch" },
            "probes": probes.len(),
            "rhs": rhs.to_json(),
        });
    }
    Ok(Outcome::evaluated(doc))
}

/// Parity of a vertex stratum when it is a base case.
fn vertex_parity(lg: &LevelGraph, v: usize) -> Option<Parity> {
    let g = lg.graph.genera()[v];
    let orders: Vec<i64> = lg.graph.half_edges()[v].iter().map(|h| lg.orders[h]).collect();
    if g == 1 && orders.iter().all(|&m| m == 0) {
        return Some(1);
    }
    base_parity(&Signature::new(g, lg.k, orders).ok()?)
}

fn cmd_spin_classify(a: &SignatureArgs) -> anyhow::Result<Outcome> {
    let sig = signature(a)?;
    let mut out = Vec::new();
    for lg in enumerate_two_level_graphs(&sig.stratum())? {
        let parities: Vec<Option<Parity>> =
            (0..lg.graph.num_vertices()).map(|v| vertex_parity(&lg, v)).collect();
        let known: Vec<Parity> = parities.iter().map(|p| p.unwrap_or(0)).collect();
        let mut rec = classification_json(&lg, classify_level_graph(&lg, &known))?;
        if rec["kind"] == "constant" && parities.iter().any(Option::is_none) {
            rec["parity"] = Value::Null;
        }
        rec["vertex_parities"] = json!(parities);
        out.push(rec);
    }
    Ok(Outcome::evaluated(json!({
        "manifest": manifest("spin-classify", json!({ "mu": sig.orders, "g": sig.g })),
        "status": "evaluated",
        "graphs": out,
    })))
}

fn level_json(s: &GenStratum, lg: &LevelGraph) -> anyhow::Result<Value> {
    let mut levels = Vec::new();
    for level in [Level::Top, Level::Bottom] {
        let ex = level_stratum(lg, &s.residues, level, true)?;
        levels.push(json!({ "stratum": ex.stratum.describe(), "grc": ex.grc }));
    }
    Ok(json!({
        "id": lg.canonical_key(),
        "graph": lg.to_json(),
        "kappas": lg.kappas(),
        "levels": levels,
    }))
}

fn cmd_levelgraphs(a: &SignatureArgs) -> anyhow::Result<Outcome> {
    let sig = signature(a)?;
    let s = sig.stratum();
    let mut vertical = Vec::new();
    for lg in enumerate_two_level_graphs(&s)? {
        vertical.push(level_json(&s, &lg)?);
    }
    let horizontal: Vec<Value> = enumerate_horizontal_one_edge(&s)?
        .iter()
        .map(|lg| json!({ "id": lg.canonical_key(), "graph": lg.to_json() }))
        .collect();
    Ok(Outcome::evaluated(json!({
        "manifest": manifest("levelgraphs", json!({ "mu": sig.orders, "g": sig.g })),
        "status": "evaluated",
        "two_level": vertical,
        "horizontal": horizontal,
    })))
}

fn cmd_conjecture_check(a: &SignatureArgs) -> anyhow::Result<Outcome> {
    let sig = signature(a)?;
    let entries: Vec<i64> = sig.orders.iter().map(|m| m + 1).collect();
    Ok(cmd_dr(&DrArgs {
        a: entries.iter().map(i64::to_string).collect::<Vec<_>>().join(","),
        g: sig.g,
        k: 1,
        spin: true,
        check_conjecture: true,
        mu: Some(a.mu.clone()),
    })?)
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::SpinClass(a) => cmd_spin_class(a),
        Command::ClutchPull(a) => cmd_clutch_pull(a),
        Command::Dr(a) => cmd_dr(a),
        Command::SpinClassify(a) => cmd_spin_classify(a),
        Command::Levelgraphs(a) => cmd_levelgraphs(a),
        Command::ConjectureCheck(a) => cmd_conjecture_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error of the computation.
            let text = serde_json::to_string_pretty(&out.doc).expect("serialisable");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(if out.symbolic { 2 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
