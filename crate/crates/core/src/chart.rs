//! Bottom-up chart control shared by parsing and generation.
//!
//! The chart knows nothing about the task: it is seeded with complete
//! edges on the diagonal (words or semantic elements) and runs compiled
//! rules over them until the agenda is empty.

use std::collections::{HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use thiserror::Error;

use crate::fs::{print_fs, CellRef, FeatureStructure, FsView, Heap, PrintStyle, Snapshot};
use crate::grammar::Grammar;
use crate::machine::{step, Attempt, MachineError, Program, Step};
use crate::signature::Signature;

pub const TRACE_VERSION: u32 = 1;

static RUN_LOOP: AtomicU64 = AtomicU64::new(0);

/// Number of times the shared run loop has advanced, process-wide.
pub fn run_loop_count() -> u64 {
    RUN_LOOP.load(Ordering::Relaxed)
}

#[derive(Clone, Debug)]
pub struct ChartOptions {
    pub max_edges: usize,
    pub max_steps: u64,
    /// Take new complete edges from the back of the agenda.
    pub lifo: bool,
    /// Drop complete edges identical to one already on the same span.
    pub dedup: bool,
    pub trace: bool,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            max_edges: 100_000,
            max_steps: 10_000_000,
            lifo: false,
            dedup: false,
            trace: false,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChartError {
    #[error("unknown word `{word}` at position {position}")]
    UnknownWord { word: String, position: usize },
    #[error("resource limit `{limit}` exceeded after {edges} edges and {steps} steps")]
    ResourceExhausted { limit: &'static str, edges: usize, steps: u64 },
    #[error(transparent)]
    Machine(#[from] MachineError),
}

#[derive(Clone, Debug)]
pub struct CompleteEdge {
    pub span: (usize, usize),
    /// Frozen root on the chart heap.
    pub root: CellRef,
    /// Placed at initialization rather than built by a rule.
    pub initial: bool,
    pub rule: Option<usize>,
    pub children: Vec<usize>,
    pub processed: bool,
}

#[derive(Clone, Debug)]
pub struct ActiveEdge {
    pub span: (usize, usize),
    pub rule: usize,
    pub resume: usize,
    pub matched: Vec<CellRef>,
    pub children: Vec<usize>,
    pub snapshot: Snapshot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Task {
    Start { rule: usize, edge: usize },
    Resume { active: usize, edge: usize },
}

#[derive(Clone, Debug)]
pub struct Current {
    pub attempt: Attempt,
    pub span: (usize, usize),
    pub children: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, Serialize, PartialEq, Eq)]
pub struct Counters {
    pub complete: usize,
    pub active: usize,
    pub attempts: u64,
    pub failures: u64,
    pub steps: u64,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(tag = "ev", rename_all = "lowercase")]
pub enum TraceEvent {
    Edge {
        id: usize,
        kind: &'static str,
        span: (usize, usize),
        rule: Option<usize>,
        dot: usize,
    },
    Attempt {
        rule: usize,
        span: (usize, usize),
        dot: usize,
    },
    Fail {
        rule: usize,
        pc: usize,
        reason: String,
    },
    Step {
        pc: usize,
        op: &'static str,
        rule: usize,
        dot: usize,
    },
}

/// What one call to [`Chart::advance`] did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Advance {
    /// Executed the instruction at `pc`.
    Executed { pc: usize },
    /// Began a rule attempt or took an edge off the agenda.
    Scheduled,
    Finished,
}

#[derive(Debug)]
pub struct Chart {
    pub heap: Heap,
    pub n: usize,
    pub complete: Vec<CompleteEdge>,
    pub active: Vec<ActiveEdge>,
    pub counters: Counters,
    pub options: ChartOptions,
    pub trace: Vec<TraceEvent>,
    pub current: Option<Current>,
    agenda: VecDeque<usize>,
    tasks: VecDeque<Task>,
    /// Processed complete edges by start position.
    by_start: Vec<Vec<usize>>,
    /// Active edges by end position.
    by_end: Vec<Vec<usize>>,
    seen: HashSet<(usize, usize, bool, String)>,
}

impl Chart {
    /// A chart whose cell `[i, i+1]` holds `items[i]`.
    pub fn from_items(items: &[Vec<FeatureStructure>], options: ChartOptions) -> Chart {
        let n = items.len();
        let mut c = Chart {
            heap: Heap::new(),
            n,
            complete: Vec::new(),
            active: Vec::new(),
            counters: Counters::default(),
            options,
            trace: Vec::new(),
            current: None,
            agenda: VecDeque::new(),
            tasks: VecDeque::new(),
            by_start: vec![Vec::new(); n + 1],
            by_end: vec![Vec::new(); n + 1],
            seen: HashSet::new(),
        };
        for (i, cell) in items.iter().enumerate() {
            for fs in cell {
                let r = c.heap.import(fs.heap(), &[fs.root()])[0];
                let r = c.heap.freeze(&[r])[0];
                c.add_complete((i, i + 1), r, true, None, Vec::new(), None);
            }
        }
        c
    }

    /// Looks every word up in the lexicon.
    pub fn init_parse(g: &Grammar, words: &[&str], options: ChartOptions) -> Result<Chart, ChartError> {
        let mut items = Vec::new();
        for (i, w) in words.iter().enumerate() {
            let entries: Vec<FeatureStructure> = g.lookup(w).map(|e| e.fs.clone()).collect();
            if entries.is_empty() {
                return Err(ChartError::UnknownWord {
                    word: w.to_string(),
                    position: i + 1,
                });
            }
            items.push(entries);
        }
        Ok(Chart::from_items(&items, options))
    }

    fn add_complete(
        &mut self,
        span: (usize, usize),
        root: CellRef,
        initial: bool,
        rule: Option<usize>,
        children: Vec<usize>,
        sig: Option<&Signature>,
    ) {
        if let (true, Some(sig)) = (self.options.dedup, sig) {
            let key = print_fs(sig, FsView::new(&self.heap, root), PrintStyle::Compact);
            if !self.seen.insert((span.0, span.1, initial, key)) {
                return;
            }
        }
        let id = self.complete.len();
        self.complete.push(CompleteEdge {
            span,
            root,
            initial,
            rule,
            children,
            processed: false,
        });
        self.counters.complete += 1;
        self.agenda.push_back(id);
        if self.options.trace {
            self.trace.push(TraceEvent::Edge {
                id,
                kind: "complete",
                span,
                rule,
                dot: 0,
            });
        }
    }

    fn add_active(&mut self, prog: &Program, cur: Current, snapshot: Snapshot) {
        let id = self.active.len();
        let rule = cur.attempt.rule;
        let dot = cur.attempt.dot();
        let end = cur.span.1;
        self.active.push(ActiveEdge {
            span: cur.span,
            rule,
            resume: cur.attempt.pc,
            matched: cur.attempt.constituents,
            children: cur.children,
            snapshot,
        });
        self.counters.active += 1;
        self.by_end[end].push(id);
        if self.options.trace {
            self.trace.push(TraceEvent::Edge {
                id,
                kind: "active",
                span: cur.span,
                rule: Some(rule),
                dot,
            });
        }
        let init_only = prog.rules[rule].initial_only[dot];
        for &e in &self.by_start[end] {
            if !init_only || self.complete[e].initial {
                self.tasks.push_back(Task::Resume { active: id, edge: e });
            }
        }
    }

    fn check_limits(&self) -> Result<(), ChartError> {
        let edges = self.counters.complete + self.counters.active;
        let limit = if edges > self.options.max_edges {
            "max_edges"
        } else if self.counters.steps > self.options.max_steps {
            "max_steps"
        } else {
            return Ok(());
        };
        Err(ChartError::ResourceExhausted {
            limit,
            edges,
            steps: self.counters.steps,
        })
    }

    /// Program counter of the instruction about to run, if any.
    pub fn pc(&self) -> Option<usize> {
        self.current.as_ref().map(|c| c.attempt.pc)
    }

    pub fn is_finished(&self) -> bool {
        self.current.is_none() && self.tasks.is_empty() && self.agenda.is_empty()
    }

    /// One unit of work: an instruction if an attempt is running, otherwise
    /// the next task, otherwise the next agenda edge.
    pub fn advance(&mut self, prog: &Program, sig: &Signature) -> Result<Advance, ChartError> {
        RUN_LOOP.fetch_add(1, Ordering::Relaxed);
        self.check_limits()?;
        if let Some(mut cur) = self.current.take() {
            let pc = cur.attempt.pc;
            self.counters.steps += 1;
            if self.options.trace {
                self.trace.push(TraceEvent::Step {
                    pc,
                    op: prog.instrs.get(pc).map_or("?", |i| i.opcode().name()),
                    rule: cur.attempt.rule,
                    dot: cur.attempt.dot(),
                });
            }
            match step(prog, sig, &mut self.heap, &mut cur.attempt) {
                Err(e) => {
                    self.heap.discard();
                    return Err(e.into());
                }
                Ok(Step::Continue) => self.current = Some(cur),
                Ok(Step::Suspend) => {
                    let snap = self.heap.snapshot(&cur.attempt.regs);
                    self.heap.discard();
                    self.add_active(prog, cur, snap);
                }
                Ok(Step::Done(root)) => {
                    let rule = Some(cur.attempt.rule);
                    self.add_complete(cur.span, root, false, rule, cur.children, Some(sig));
                }
                Ok(Step::Fail(clash)) => {
                    self.heap.discard();
                    self.counters.failures += 1;
                    if self.options.trace {
                        self.trace.push(TraceEvent::Fail {
                            rule: cur.attempt.rule,
                            pc,
                            reason: clash.describe(sig),
                        });
                    }
                }
            }
            return Ok(Advance::Executed { pc });
        }
        if let Some(task) = self.tasks.pop_front() {
            let cur = match task {
                Task::Start { rule, edge } => {
                    let e = &self.complete[edge];
                    Current {
                        attempt: Attempt::start(prog, rule, e.root),
                        span: e.span,
                        children: vec![edge],
                    }
                }
                Task::Resume { active, edge } => {
                    let a = &self.active[active];
                    let e = &self.complete[edge];
                    let regs = self.heap.restore(&a.snapshot);
                    let mut matched = a.matched.clone();
                    matched.push(e.root);
                    let mut children = a.children.clone();
                    children.push(edge);
                    Current {
                        attempt: Attempt {
                            rule: a.rule,
                            pc: a.resume,
                            regs,
                            constituents: matched,
                        },
                        span: (a.span.0, e.span.1),
                        children,
                    }
                }
            };
            self.counters.attempts += 1;
            if self.options.trace {
                self.trace.push(TraceEvent::Attempt {
                    rule: cur.attempt.rule,
                    span: cur.span,
                    dot: cur.attempt.dot(),
                });
            }
            self.current = Some(cur);
            return Ok(Advance::Scheduled);
        }
        let next = if self.options.lifo {
            self.agenda.pop_back()
        } else {
            self.agenda.pop_front()
        };
        let Some(id) = next else {
            return Ok(Advance::Finished);
        };
        let (start, initial) = (self.complete[id].span.0, self.complete[id].initial);
        self.complete[id].processed = true;
        self.by_start[start].push(id);
        for (r, entry) in prog.rules.iter().enumerate() {
            if !entry.initial_only[0] || initial {
                self.tasks.push_back(Task::Start { rule: r, edge: id });
            }
        }
        for &a in &self.by_end[start] {
            let ae = &self.active[a];
            if !prog.rules[ae.rule].initial_only[ae.matched.len()] || initial {
                self.tasks.push_back(Task::Resume { active: a, edge: id });
            }
        }
        Ok(Advance::Scheduled)
    }

    /// Runs to the fixpoint and returns the spanning complete edges.
    pub fn run(&mut self, prog: &Program, sig: &Signature) -> Result<Vec<usize>, ChartError> {
        while self.advance(prog, sig)? != Advance::Finished {}
        Ok(self.spanning())
    }

    /// Complete edges covering `[0, n]`, in creation order.
    pub fn spanning(&self) -> Vec<usize> {
        if self.n == 0 {
            return Vec::new();
        }
        (0..self.complete.len())
            .filter(|&i| self.complete[i].span == (0, self.n))
            .collect()
    }

    pub fn edge_fs(&self, id: usize) -> FeatureStructure {
        FeatureStructure::extract(&self.heap, self.complete[id].root)
    }

    /// Complete edges on `span`.
    pub fn edges_at(&self, span: (usize, usize)) -> Vec<usize> {
        (0..self.complete.len()).filter(|&i| self.complete[i].span == span).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::GrammarOptions;
    use crate::machine::{compile_program, DEFAULT_REGISTER_CAP};

    fn setup(src: &str) -> (Grammar, Program) {
        let g = Grammar::from_source(src, &GrammarOptions::default()).unwrap();
        let p = compile_program(&g.signature, &g.rules, DEFAULT_REGISTER_CAP).unwrap();
        (g, p)
    }

    fn parse(g: &Grammar, p: &Program, s: &str, opts: ChartOptions) -> Result<usize, ChartError> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let mut c = Chart::init_parse(g, &words, opts)?;
        Ok(c.run(p, &g.signature)?.len())
    }

    #[test]
    fn tiny_sentence() {
        let (g, p) = setup(include_str!("../grammars/tiny.gr"));
        assert_eq!(parse(&g, &p, "every boy sleeps", ChartOptions::default()), Ok(1));
        assert_eq!(parse(&g, &p, "boy every sleeps", ChartOptions::default()), Ok(0));
        assert_eq!(parse(&g, &p, "", ChartOptions::default()), Ok(0));
        assert!(matches!(
            parse(&g, &p, "every girl sleeps", ChartOptions::default()),
            Err(ChartError::UnknownWord { position: 2, .. })
        ));
    }

    #[test]
    fn anbn() {
        let (g, p) = setup(include_str!("../grammars/anbn.gr"));
        assert_eq!(parse(&g, &p, "a a b b", ChartOptions::default()), Ok(1));
        assert_eq!(parse(&g, &p, "a a b", ChartOptions::default()), Ok(0));
        let lifo = ChartOptions {
            lifo: true,
            ..Default::default()
        };
        assert_eq!(parse(&g, &p, "a a a b b b", lifo), Ok(1));
    }

    #[test]
    fn limits_trip() {
        let (g, p) = setup(include_str!("../grammars/anbn.gr"));
        let opts = ChartOptions {
            max_steps: 5,
            ..Default::default()
        };
        assert!(matches!(
            parse(&g, &p, "a a b b", opts),
            Err(ChartError::ResourceExhausted { limit: "max_steps", .. })
        ));
    }

    #[test]
    fn trace_events_serialize() {
        let (g, p) = setup(include_str!("../grammars/anbn.gr"));
        let opts = ChartOptions {
            trace: true,
            ..Default::default()
        };
        let mut c = Chart::init_parse(&g, &["a", "b"], opts).unwrap();
        c.run(&p, &g.signature).unwrap();
        let j = serde_json::to_value(&c.trace[0]).unwrap();
        assert_eq!(j["ev"], "edge");
        assert!(c.trace.iter().any(|e| matches!(e, TraceEvent::Step { op: "PROCEED", .. })));
    }
}
