use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use reasoner_core::amr::{to_penman, AlignedAmrDocument, AmrNode, AmrTree};
use reasoner_core::harness::{
    bucket_by_collapsability, dataset_stats, evaluate, load_corpus, match_rot_sst, proof_summary, sweep,
    BucketRow, EvalMetrics, ProofSummary, ReportLine, RunConfig, SweepAxis, SweepRow, SweepSpec,
};
use reasoner_core::logic::{
    amr_to_formula, implication_clause, parse_clauses, parse_literal, rot_to_implication, sst_to_facts, to_clauses,
    Notation, VerdictLexicon,
};
use reasoner_core::merge::{enumerate_merge_trees, Bound, MergeConfig};
use reasoner_core::prover::{check_proof, prove, ProofStatus, ProverConfig};
use reasoner_core::similarity::HybridSimilarity;

#[derive(Parser, Serialize)]
#[command(name = "reasoner", version, about = "Match rules of thumb against situations over AMR")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Jsonl, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Jsonl,
    Text,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase", tag = "command")]
enum Command {
    /// Parse a document and list its nodes.
    Parse { doc: PathBuf },
    /// Enumerate merged variants of a document's tree.
    Merge {
        doc: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        merge: MergeArgs,
    },
    /// Convert a document to logic.
    Logic {
        doc: PathBuf,
        /// Treat the document as a rule of thumb (implication).
        #[arg(long, conflicts_with = "as_sst")]
        as_rot: bool,
        /// Treat the document as a situation (ground facts).
        #[arg(long)]
        as_sst: bool,
        /// Show embedding fingerprints on symbols.
        #[arg(long)]
        embeddings: bool,
        /// Verdict lexicon (TOML) replacing the built-in one.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Prove a goal from a clause file.
    Prove {
        clauses: PathBuf,
        #[arg(long)]
        goal: String,
        #[command(flatten)]
        #[serde(flatten)]
        prover: ProverArgs,
    },
    /// Match a rule of thumb against a situation.
    Match {
        rot: PathBuf,
        sst: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
    },
    /// Evaluate a corpus with one sampled negative per situation.
    Eval {
        corpus: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        #[serde(flatten)]
        run: RunArgs,
        /// `threshold=START:END:STEP`, `max-width=START:END:STEP`, or `axis=v1,v2,...`.
        #[arg(long)]
        sweep: Option<String>,
        /// Collapsability bucket edges, e.g. `0,0.2,0.4,0.6,0.8,1`.
        #[arg(long, value_delimiter = ',')]
        buckets: Option<Vec<f64>>,
        /// Write the sweep (or the single run) as CSV here.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Tree-size statistics for a corpus.
    Stats {
        corpus: PathBuf,
        #[command(flatten)]
        #[serde(flatten)]
        merge: MergeArgs,
    },
}

#[derive(Args, Serialize)]
struct MergeArgs {
    /// Maximum merge width (embeddings averaged into one node).
    #[arg(long, default_value_t = MergeConfig::default().max_merge_width)]
    max_width: usize,
    /// Allow merges of exactly the maximum width.
    #[arg(long)]
    inclusive_width: bool,
    /// Minimum depth of a merge node.
    #[arg(long, default_value_t = MergeConfig::default().min_merge_depth)]
    min_depth: usize,
    /// Stop enumerating after this many trees.
    #[arg(long, default_value_t = MergeConfig::default().max_variants)]
    max_variants: usize,
}

impl MergeArgs {
    fn config(&self) -> MergeConfig {
        MergeConfig {
            max_merge_width: self.max_width,
            width_bound: if self.inclusive_width { Bound::Inclusive } else { Bound::Strict },
            min_merge_depth: self.min_depth,
            max_variants: self.max_variants,
            ..MergeConfig::default()
        }
    }
}

#[derive(Args, Serialize)]
struct ProverArgs {
    /// Unification needs similarity strictly above this.
    #[arg(long, default_value_t = ProverConfig::default().similarity_threshold)]
    threshold: f64,
    #[arg(long, default_value_t = ProverConfig::default().max_proof_depth)]
    max_depth: usize,
    #[arg(long, default_value_t = ProverConfig::default().max_resolvent_width)]
    max_resolvent_width: usize,
    #[arg(long, default_value_t = ProverConfig::default().max_expansions)]
    max_expansions: usize,
}

impl ProverArgs {
    fn config(&self) -> ProverConfig {
        ProverConfig {
            similarity_threshold: self.threshold,
            max_proof_depth: self.max_depth,
            max_resolvent_width: self.max_resolvent_width,
            max_expansions: self.max_expansions,
        }
    }
}

#[derive(Args, Serialize)]
struct RunArgs {
    #[command(flatten)]
    #[serde(flatten)]
    prover: ProverArgs,
    #[command(flatten)]
    #[serde(flatten)]
    merge: MergeArgs,
    /// Try all four verdicts, not only the rule's own.
    #[arg(long)]
    all_verdicts: bool,
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig> {
        Ok(RunConfig {
            prover: self.prover.config(),
            merge: self.merge.config(),
            all_verdicts: self.all_verdicts,
            lexicon: lexicon(self.lexicon.as_deref())?,
            ..RunConfig::default()
        })
    }
}

fn lexicon(path: Option<&Path>) -> Result<VerdictLexicon> {
    match path {
        Some(p) => Ok(VerdictLexicon::load(p)?),
        None => Ok(VerdictLexicon::builtin()),
    }
}

fn load_doc(path: &Path) -> Result<AlignedAmrDocument> {
    AlignedAmrDocument::load(path).with_context(|| format!("loading {}", path.display()))
}

fn doc_tree(doc: &AlignedAmrDocument) -> Result<AmrTree> {
    doc.to_tree().with_context(|| format!("document {}", doc.id))
}

/// Collects output lines; text lines are used only in text mode.
struct Out {
    format: Format,
    lines: Vec<String>,
}

impl Out {
    fn emit<T: Serialize>(&mut self, kind: &str, data: &T, text: impl FnOnce() -> String) {
        match self.format {
            Format::Jsonl => self.lines.push(ReportLine::new(kind, data).to_json()),
            Format::Text => self.lines.push(text()),
        }
    }
}

/// `axis=a:b:step` or `axis=v1,v2,...`.
fn parse_sweep(spec: &str) -> Result<SweepSpec> {
    let (axis, range) = spec.split_once('=').context("sweep must look like axis=values")?;
    let axis = match axis.trim() {
        "threshold" => SweepAxis::Threshold,
        "max-width" | "max_width" | "max_merge_width" => SweepAxis::MaxMergeWidth,
        other => bail!("unknown sweep axis {other:?} (expected threshold or max-width)"),
    };
    let values = if range.contains(':') {
        let parts: Vec<f64> = range
            .split(':')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .context("bad sweep range")?;
        let [start, end, step] = parts[..] else {
            bail!("sweep range needs START:END:STEP");
        };
        if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || end < start {
            bail!("sweep range needs START <= END and a positive STEP");
        }
        let n = ((end - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| round9(start + k as f64 * step)).collect()
    } else {
        range
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .context("bad sweep value list")?
    };
    Ok(SweepSpec { axis, values })
}

fn round9(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("-".to_string(), |v| format!("{v:.4}"))
}

fn metrics_text(m: &EvalMetrics) -> String {
    format!(
        "tp {} fp {} tn {} fn {}  precision {}  recall {}  f1 {}",
        m.tp,
        m.fp,
        m.tn,
        m.fn_,
        fmt_opt(m.precision),
        fmt_opt(m.recall),
        fmt_opt(m.f1)
    )
}

fn node_json(tree: &AmrTree, id: reasoner_core::amr::NodeId) -> Value {
    let node = tree.node(id);
    let (kind, name) = match node {
        AmrNode::Instance { label, predicate, .. } => ("instance", format!("{label} / {predicate}")),
        AmrNode::Constant { value, .. } => ("constant", value.clone()),
        AmrNode::Coreference { label } => ("coreference", label.clone()),
        AmrNode::Merge { var, width, .. } => ("merge", format!("{var} (width {width})")),
    };
    json!({
        "path": tree.path(id).to_string(),
        "kind": kind,
        "node": name,
        "depth": tree.depth(id),
        "embedded": node.embedding().is_some(),
    })
}

fn cmd_parse(doc: &Path, out: &mut Out) -> Result<()> {
    let doc = load_doc(doc)?;
    let tree = doc_tree(&doc)?;
    let nodes: Vec<Value> = tree.node_ids().map(|id| node_json(&tree, id)).collect();
    let data = json!({
        "id": doc.id,
        "tokens": doc.tokens.len(),
        "instances": tree.instance_count(),
        "constants": tree.constant_count(),
        "coreferences": tree.coreference_count(),
        "depth": tree.max_depth(),
        "penman": to_penman(&tree),
        "nodes": nodes,
    });
    out.emit("tree", &data, || {
        let mut s = format!(
            "{}: {} instances, {} constants, {} coreferences, depth {}\n{}\n",
            doc.id,
            tree.instance_count(),
            tree.constant_count(),
            tree.coreference_count(),
            tree.max_depth(),
            to_penman(&tree)
        );
        for n in &nodes {
            s.push_str(&format!(
                "  {:<24} {:<11} {}{}\n",
                if n["path"] == "" { "(root)" } else { n["path"].as_str().unwrap_or("") },
                n["kind"].as_str().unwrap_or(""),
                n["node"].as_str().unwrap_or(""),
                if n["embedded"] == true { "" } else { "  [no embedding]" }
            ));
        }
        s.trim_end().to_string()
    });
    Ok(())
}

fn cmd_merge(doc: &Path, args: &MergeArgs, out: &mut Out) -> Result<()> {
    let doc = load_doc(doc)?;
    let tree = doc_tree(&doc)?;
    let config = args.config();
    let set = enumerate_merge_trees(&tree, &config)?;
    let collapsability = set.collapsability().ok();
    for (i, t) in set.trees().enumerate() {
        let targets = if i == 0 { Vec::new() } else { set.variants[i - 1].targets.clone() };
        let data = json!({
            "index": i,
            "nodes": t.len(),
            "merge_width": t.merge_width(),
            "targets": targets,
            "penman": to_penman(t),
        });
        out.emit("variant", &data, || {
            format!(
                "#{i} nodes {} width {} targets [{}]\n{}",
                t.len(),
                t.merge_width(),
                targets.join(", "),
                to_penman(t)
            )
        });
    }
    let summary = json!({
        "id": doc.id,
        "trees": set.len(),
        "min_nodes": set.min_nodes(),
        "max_nodes": set.max_nodes(),
        "collapsability": collapsability,
        "truncated": set.truncated,
    });
    out.emit("summary", &summary, || {
        format!(
            "{} trees, nodes {}..{}, collapsability {}{}",
            set.len(),
            set.min_nodes(),
            set.max_nodes(),
            fmt_opt(collapsability),
            if set.truncated { " (truncated)" } else { "" }
        )
    });
    Ok(())
}

fn cmd_logic(doc: &Path, as_rot: bool, as_sst: bool, embeddings: bool, lex: Option<&Path>, out: &mut Out) -> Result<()> {
    let doc = load_doc(doc)?;
    let tree = doc_tree(&doc)?;
    let n = if embeddings { Notation::with_embeddings() } else { Notation::plain() };
    if as_rot {
        let rule = rot_to_implication(&tree, &lexicon(lex)?)?;
        let clause = implication_clause(&rule);
        let data = json!({ "implication": n.implication(&rule), "clause": n.clause(&clause) });
        out.emit("rule", &data, || format!("{}\nclause: {}", n.implication(&rule), n.clause(&clause)));
    } else if as_sst {
        let facts = sst_to_facts(&tree, &doc.id)?;
        let clauses: Vec<String> = to_clauses(&facts).iter().map(|c| n.clause(c)).collect();
        let data = json!({ "facts": clauses });
        out.emit("facts", &data, || clauses.join("\n"));
    } else {
        let f = amr_to_formula(&tree)?;
        let data = json!({ "formula": n.formula(&f) });
        out.emit("formula", &data, || n.formula(&f));
    }
    Ok(())
}

fn steps_json(p: &ProofSummary) -> Value {
    json!({ "goal": p.goal, "similarity": p.similarity, "steps": p.steps, "answer": p.answer })
}

fn cmd_prove(clauses: &Path, goal: &str, args: &ProverArgs, out: &mut Out) -> Result<()> {
    let text = fs::read_to_string(clauses).with_context(|| format!("reading {}", clauses.display()))?;
    let kb = parse_clauses(&text)?;
    let goal = parse_literal(goal)?;
    let config = args.config();
    let outcome = prove(&kb, &goal, &config, &HybridSimilarity)?;
    let status = match outcome.status {
        ProofStatus::Proved => "proved",
        ProofStatus::NoProof => "no_proof",
        ProofStatus::ResourceCapExceeded => "resource_cap_exceeded",
    };
    let proof = outcome.proof.as_ref().map(|p| ProofSummary::from_proof(p, 0, 0));
    let data = json!({
        "status": status,
        "expansions": outcome.expansions,
        "proof": proof.as_ref().map(steps_json),
    });
    out.emit("proof", &data, || match &outcome.proof {
        Some(p) => format!("{status} after {} expansions\n{}", outcome.expansions, p.table().trim_end()),
        None => format!("{status} after {} expansions", outcome.expansions),
    });
    Ok(())
}

fn cmd_match(rot: &Path, sst: &Path, args: &RunArgs, out: &mut Out) -> Result<()> {
    let rot = load_doc(rot)?;
    let sst = load_doc(sst)?;
    let config = args.config()?;
    let m = match_rot_sst(&rot, &sst, &config)?;
    let replay = match (&m.proof, &m.kb) {
        (Some(p), Some(kb)) => Some(check_proof(p, kb, &config.prover, &HybridSimilarity)),
        _ => None,
    };
    let replay_ok = replay.as_ref().map(|r| r.is_ok());
    let summary = proof_summary(&m);
    let data = json!({
        "rot": rot.id,
        "sst": sst.id,
        "matched": m.matched,
        "verdict": m.verdict.map(|v| v.to_string()),
        "similarity": m.best_similarity,
        "rot_variant": m.rot_variant_index,
        "sst_variant": m.sst_variant_index,
        "pairs_tried": m.pairs_tried,
        "cap_hit": m.cap_hit,
        "replay_ok": replay_ok,
        "replay_error": replay.as_ref().and_then(|r| r.as_ref().err()),
        "proof": summary,
    });
    out.emit("match", &data, || {
        let mut s = format!(
            "{} vs {}: {}",
            rot.id,
            sst.id,
            if m.matched { "matched" } else { "no match" }
        );
        if let (Some(v), Some(sim)) = (m.verdict, m.best_similarity) {
            s.push_str(&format!(
                "  verdict {v}  similarity {sim:.6}  variants rot #{} sst #{}",
                m.rot_variant_index.unwrap_or(0),
                m.sst_variant_index.unwrap_or(0)
            ));
        }
        s.push_str(&format!("  ({} variant pairs tried)", m.pairs_tried));
        if let Some(p) = &m.proof {
            s.push('\n');
            s.push_str(p.table().trim_end());
        }
        if let Some(r) = &replay {
            s.push_str(&format!("\nreplay: {}", if r.is_ok() { "ok" } else { "FAILED" }));
        }
        s
    });
    if let Some(Err(e)) = replay {
        bail!("proof replay failed: {e}");
    }
    Ok(())
}

#[derive(Serialize)]
struct PlotRow {
    axis: String,
    value: f64,
    tp: usize,
    fp: usize,
    tn: usize,
    #[serde(rename = "fn")]
    fn_: usize,
    precision: Option<f64>,
    recall: Option<f64>,
    f1: Option<f64>,
}

impl PlotRow {
    fn new(axis: &str, value: f64, m: &EvalMetrics) -> Self {
        Self {
            axis: axis.to_string(),
            value: round9(value),
            tp: m.tp,
            fp: m.fp,
            tn: m.tn,
            fn_: m.fn_,
            precision: m.precision.map(round9),
            recall: m.recall.map(round9),
            f1: m.f1.map(round9),
        }
    }
}

fn write_plot(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn axis_name(a: SweepAxis) -> &'static str {
    match a {
        SweepAxis::Threshold => "threshold",
        SweepAxis::MaxMergeWidth => "max_merge_width",
    }
}

struct EvalOptions<'a> {
    corpus: &'a Path,
    seed: u64,
    run: &'a RunArgs,
    sweep: Option<&'a str>,
    buckets: Option<&'a [f64]>,
    plot_data: Option<&'a Path>,
}

/// Returns the number of per-sample errors.
fn cmd_eval(o: EvalOptions<'_>, out: &mut Out) -> Result<usize> {
    let samples = load_corpus(o.corpus)?;
    let mut config = o.run.config()?;
    config.rng_seed = o.seed;
    config.dataset = Some(o.corpus.display().to_string());
    config.sweep = o.sweep.map(parse_sweep).transpose()?;
    config.buckets = o.buckets.map(<[f64]>::to_vec);
    config.validate()?;
    out.emit("config", &config, || {
        format!(
            "{} samples, seed {}, threshold {}, max merge width {}",
            samples.len(),
            config.rng_seed,
            config.prover.similarity_threshold,
            config.merge.max_merge_width
        )
    });

    if let Some(spec) = &config.sweep {
        let rows: Vec<SweepRow> = sweep(&samples, &config, spec.axis, &spec.values)?;
        let axis = axis_name(spec.axis);
        let mut errors = 0;
        for r in &rows {
            errors = errors.max(r.errors);
            let data = json!({
                "axis": axis,
                "value": r.value,
                "metrics": r.metrics,
                "errors": r.errors,
                "matched_positive": r.matched_positive,
                "matched_negative": r.matched_negative,
            });
            out.emit("sweep", &data, || format!("{axis} {:<8} {}", r.value, metrics_text(&r.metrics)));
        }
        if let Some(p) = o.plot_data {
            let plot: Vec<PlotRow> = rows.iter().map(|r| PlotRow::new(axis, r.value, &r.metrics)).collect();
            write_plot(p, &plot)?;
        }
        return Ok(errors);
    }

    let ev = evaluate(&samples, &config)?;
    for r in &ev.records {
        out.emit("record", r, || {
            format!(
                "{:<20} {} (sim {})  negative {:<20} {}  collapsability {}",
                r.sample_id,
                if r.positive_outcome == reasoner_core::harness::PositiveOutcome::TruePositive { "TP" } else { "FN" },
                fmt_opt(r.positive_similarity),
                r.negative_rot_id,
                if r.negative_outcome == reasoner_core::harness::NegativeOutcome::FalsePositive { "FP" } else { "TN" },
                fmt_opt(r.collapsability)
            )
        });
    }
    for e in &ev.errors {
        out.emit("error", e, || format!("error {}: {}", e.sample_id, e.message));
    }
    out.emit("metrics", &ev.metrics, || metrics_text(&ev.metrics));
    if let Some(edges) = &config.buckets {
        let rows: Vec<BucketRow> = bucket_by_collapsability(&ev.records, edges)?;
        for b in &rows {
            out.emit("bucket", b, || {
                format!(
                    "[{}, {}{} n={:<3} {}",
                    b.lower,
                    b.upper,
                    if b.upper_inclusive { "]" } else { ")" },
                    b.count,
                    metrics_text(&b.metrics)
                )
            });
        }
    }
    if let Some(p) = o.plot_data {
        write_plot(p, &[PlotRow::new("threshold", config.prover.similarity_threshold, &ev.metrics)])?;
    }
    Ok(ev.errors.len())
}

fn cmd_stats(corpus: &Path, args: &MergeArgs, out: &mut Out) -> Result<()> {
    let samples = load_corpus(corpus)?;
    let stats = dataset_stats(&samples, &args.config())?;
    out.emit("stats", &stats, || {
        let mut s = format!("{} samples\n", samples.len());
        for (name, d) in [("rot", &stats.rot), ("sst", &stats.sst)] {
            for (what, v) in [
                ("instance nodes", &d.instance_nodes),
                ("depth", &d.depth),
                ("logic terms", &d.logic_terms),
                ("merge trees", &d.merge_trees),
            ] {
                s.push_str(&format!(
                    "{name} {what:<15} mean {:>8.3}  median {:>7.1}  stdev {:>8.3}\n",
                    v.mean, v.median, v.stdev
                ));
            }
        }
        s.trim_end().to_string()
    });
    Ok(())
}

/// Runs the command; `Ok(true)` means some samples failed.
fn run(cli: &Cli, out: &mut Out) -> Result<bool> {
    match &cli.command {
        Command::Parse { doc } => cmd_parse(doc, out)?,
        Command::Merge { doc, merge } => cmd_merge(doc, merge, out)?,
        Command::Logic {
            doc,
            as_rot,
            as_sst,
            embeddings,
            lexicon,
        } => cmd_logic(doc, *as_rot, *as_sst, *embeddings, lexicon.as_deref(), out)?,
        Command::Prove { clauses, goal, prover } => cmd_prove(clauses, goal, prover, out)?,
        Command::Match { rot, sst, run } => cmd_match(rot, sst, run, out)?,
        Command::Eval {
            corpus,
            seed,
            run,
            sweep,
            buckets,
            plot_data,
        } => {
            let opts = EvalOptions {
                corpus,
                seed: *seed,
                run,
                sweep: sweep.as_deref(),
                buckets: buckets.as_deref(),
                plot_data: plot_data.as_deref(),
            };
            return Ok(cmd_eval(opts, out)? > 0);
        }
        Command::Stats { corpus, merge } => cmd_stats(corpus, merge, out)?,
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut out = Out {
        format: cli.format,
        lines: Vec::new(),
    };
    out.emit("header", &cli, || {
        format!(
            "# reasoner {}",
            serde_json::to_string(&cli.command).unwrap_or_default()
        )
    });
    let result = run(&cli, &mut out);
    for line in &out.lines {
        println!("{line}");
    }
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
