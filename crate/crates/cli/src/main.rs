use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use revgram::artifact::{Artifact, CompileOptions};
use revgram::chart::{ChartError, ChartOptions};
use revgram::debug::read_sem;
use revgram::grammar::GrammarOptions;
use revgram::inversion::{GenerateError, InversionConfig};

mod serve;

const EXIT_NONE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "revgram", version, about = "Compile, parse and generate with reversible feature-structure grammars")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a grammar to an artifact.
    Compile {
        grammar: PathBuf,
        /// Also build the generation program.
        #[arg(long)]
        invert: bool,
        /// Output path (default: the grammar path with extension `rvga`).
        #[arg(long, short)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        max_ec_rounds: usize,
        /// JSON file naming the semantic features; implies --invert.
        #[arg(long)]
        sem_config: Option<PathBuf>,
    },
    /// Parse a sentence.
    Parse {
        /// Artifact, or grammar source compiled on the fly.
        artifact: PathBuf,
        /// The words, either as one argument or several.
        words: Vec<String>,
        /// Print results as JSON.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Generate word sequences from a semantic structure.
    Generate {
        artifact: PathBuf,
        /// Description text, or JSON if it starts with `{`; `-` reads stdin.
        sem: String,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Run a suite of inputs with expected result counts and print CSV.
    Bench {
        artifact: PathBuf,
        suite: PathBuf,
        #[command(flatten)]
        run: RunFlags,
    },
    /// Serve the debug protocol over HTTP.
    ServeDebug {
        artifact: PathBuf,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

#[derive(Args, Clone)]
struct RunFlags {
    /// Write trace events as JSON lines to stderr.
    #[arg(long)]
    trace: bool,
    #[arg(long, default_value_t = ChartOptions::default().max_edges)]
    max_edges: usize,
    #[arg(long, default_value_t = ChartOptions::default().max_steps)]
    max_steps: u64,
    /// Drop complete edges equivalent to one already in the same cell.
    #[arg(long)]
    dedup: bool,
    /// Process the agenda last-in first-out.
    #[arg(long)]
    lifo: bool,
}

impl RunFlags {
    fn options(&self) -> ChartOptions {
        ChartOptions {
            max_edges: self.max_edges,
            max_steps: self.max_steps,
            lifo: self.lifo,
            dedup: self.dedup,
            trace: self.trace,
        }
    }
}

struct Fail(u8, String);

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail(EXIT_USAGE, e.to_string())
}

fn chart_fail(e: ChartError) -> Fail {
    match e {
        ChartError::ResourceExhausted { .. } => Fail(EXIT_LIMIT, e.to_string()),
        ChartError::UnknownWord { .. } => Fail(EXIT_NONE, e.to_string()),
        ChartError::Machine(_) => Fail(EXIT_USAGE, e.to_string()),
    }
}

/// Reads an artifact; grammar source is compiled (with inversion when
/// `invert` is set).
fn load(path: &Path, invert: bool) -> Result<Artifact, Fail> {
    let bytes = std::fs::read(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if bytes.starts_with(b"RVGA") {
        return Artifact::from_bytes(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())));
    }
    let src = String::from_utf8(bytes).map_err(|_| usage(format!("{}: not UTF-8", path.display())))?;
    let opts = CompileOptions {
        invert: invert.then(InversionConfig::default),
        ..Default::default()
    };
    Artifact::compile(&src, &opts).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn compile(
    grammar: &Path,
    invert: bool,
    out: Option<PathBuf>,
    max_ec_rounds: usize,
    sem_config: Option<PathBuf>,
) -> Result<u8, Fail> {
    let src = std::fs::read_to_string(grammar).map_err(|e| usage(format!("{}: {e}", grammar.display())))?;
    let cfg = match &sem_config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            Some(serde_json::from_str::<InversionConfig>(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?)
        }
        None => invert.then(InversionConfig::default),
    };
    let opts = CompileOptions {
        grammar: GrammarOptions { max_ec_rounds },
        invert: cfg,
        ..Default::default()
    };
    let a = Artifact::compile(&src, &opts).map_err(|e| usage(format!("{}: {e}", grammar.display())))?;
    for w in a.grammar.warnings.iter().chain(a.inverted.iter().flat_map(|(i, _)| &i.grammar.warnings)) {
        eprintln!("warning: {w}");
    }
    let out = out.unwrap_or_else(|| grammar.with_extension("rvga"));
    std::fs::write(&out, a.to_bytes()).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    for s in a.stats() {
        println!("{s}");
    }
    println!("wrote {}", out.display());
    Ok(0)
}

fn print_trace(trace: &[revgram::chart::TraceEvent]) {
    for ev in trace {
        eprintln!("{}", serde_json::to_string(ev).unwrap());
    }
}

fn parse(path: &Path, words: &[String], as_json: bool, run: &RunFlags) -> Result<u8, Fail> {
    let a = load(path, false)?;
    let words: Vec<&str> = words.iter().flat_map(|w| w.split_whitespace()).collect();
    let (chart, results) = a.parse(&words, run.options()).map_err(chart_fail)?;
    if run.trace {
        print_trace(&chart.trace);
    }
    let sig = &a.grammar.signature;
    if as_json {
        let rs: Vec<_> = results.iter().map(|&id| chart.edge_fs(id).to_json(sig)).collect();
        println!("{}", json!({"results": rs, "counters": chart.counters}));
    } else {
        for (k, &id) in results.iter().enumerate() {
            println!("% result {} (edge {id})", k + 1);
            println!("{}", chart.edge_fs(id).to_text(sig));
        }
    }
    eprintln!("{} result(s), {} edges, {} steps", results.len(), chart.counters.complete, chart.counters.steps);
    Ok(if results.is_empty() { EXIT_NONE } else { 0 })
}

fn generate(path: &Path, sem: &str, as_json: bool, run: &RunFlags) -> Result<u8, Fail> {
    let a = load(path, true)?;
    let Some((inv, _)) = &a.inverted else {
        return Err(usage(format!("{}: artifact was compiled without --invert", path.display())));
    };
    let text = if sem == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(usage)?
    } else {
        sem.to_string()
    };
    let value = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(usage)?
    } else {
        serde_json::Value::String(text)
    };
    let sem = read_sem(inv.signature(), &value).map_err(usage)?;
    let g = match a.generate(&sem, run.options()).unwrap() {
        Ok(g) => g,
        Err(GenerateError::Chart(e)) => return Err(chart_fail(e)),
        Err(e) => return Err(usage(e)),
    };
    if run.trace {
        print_trace(&g.chart.trace);
    }
    for d in &g.diagnostics {
        eprintln!("note: {d}");
    }
    if as_json {
        println!("{}", json!({"strings": g.strings, "results": g.results.len(), "counters": g.chart.counters}));
    } else {
        for s in &g.strings {
            println!("{}", s.join(" "));
        }
    }
    Ok(if g.strings.is_empty() { EXIT_NONE } else { 0 })
}

/// Suite lines: `<expected count> <input>`; `gen <expected count> <sem>`
/// runs generation. `#` starts a comment line.
fn bench(path: &Path, suite: &Path, run: &RunFlags) -> Result<u8, Fail> {
    let text = std::fs::read_to_string(suite).map_err(|e| usage(format!("{}: {e}", suite.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (gen, rest) = match line.strip_prefix("gen ") {
            Some(r) => (true, r.trim_start()),
            None => (false, line),
        };
        let (n, input) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let n: usize = n
            .parse()
            .map_err(|_| usage(format!("{}:{}: expected a result count", suite.display(), i + 1)))?;
        rows.push((gen, n, input.trim().to_string()));
    }
    let needs_inverse = rows.iter().any(|r| r.0);
    let a = load(path, needs_inverse)?;
    if needs_inverse && a.inverted.is_none() {
        return Err(usage("suite has generation rows but the artifact was compiled without --invert"));
    }
    let mut opts = run.options();
    opts.trace = false;
    println!("task,input,expected,results,edges,steps,micros,status");
    let mut mismatches = Vec::new();
    for (gen, expected, input) in &rows {
        let t = Instant::now();
        let outcome: Result<(usize, usize, u64), String> = if *gen {
            let inv = &a.inverted.as_ref().unwrap().0;
            read_sem(inv.signature(), &serde_json::Value::String(input.clone())).and_then(|sem| {
                a.generate(&sem, opts.clone())
                    .unwrap()
                    .map(|g| (g.strings.len(), g.chart.counters.complete, g.chart.counters.steps))
                    .map_err(|e| e.to_string())
            })
        } else {
            let words: Vec<&str> = input.split_whitespace().collect();
            a.parse(&words, opts.clone())
                .map(|(c, r)| (r.len(), c.counters.complete, c.counters.steps))
                .map_err(|e| e.to_string())
        };
        let micros = t.elapsed().as_micros();
        let (results, edges, steps, status) = match &outcome {
            Ok((r, e, s)) => (r.to_string(), e.to_string(), s.to_string(), if r == expected { "ok" } else { "mismatch" }),
            Err(_) => ("-".into(), "-".into(), "-".into(), "error"),
        };
        let task = if *gen { "generate" } else { "parse" };
        println!("{task},\"{}\",{expected},{results},{edges},{steps},{micros},{status}", input.replace('"', "\"\""));
        match outcome {
            Ok((r, _, _)) if r != *expected => mismatches.push(format!("{task} `{input}`: expected {expected}, got {r}")),
            Err(e) => mismatches.push(format!("{task} `{input}`: {e}")),
            _ => {}
        }
    }
    for m in &mismatches {
        eprintln!("mismatch: {m}");
    }
    Ok(if mismatches.is_empty() { 0 } else { EXIT_MISMATCH })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let r = match cli.cmd {
        Cmd::Compile {
            grammar,
            invert,
            out,
            max_ec_rounds,
            sem_config,
        } => compile(&grammar, invert, out, max_ec_rounds, sem_config),
        Cmd::Parse {
            artifact,
            words,
            json,
            run,
        } => parse(&artifact, &words, json, &run),
        Cmd::Generate { artifact, sem, json, run } => generate(&artifact, &sem, json, &run),
        Cmd::Bench { artifact, suite, run } => bench(&artifact, &suite, &run),
        Cmd::ServeDebug { artifact, port, host } => {
            // Grammar source that does not invert is still served for parsing.
            load(&artifact, true)
                .or_else(|_| load(&artifact, false))
                .and_then(|a| serve::serve(a, &host, port).map(|_| 0).map_err(usage))
        }
    };
    match r {
        Ok(c) => ExitCode::from(c),
        Err(Fail(c, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(c)
        }
    }
}
