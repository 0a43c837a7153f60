use std::collections::HashMap;

use super::{Instr, MachineError, Program, Reg, RuleEntry};
use crate::frontend::RuleTemplate;
use crate::fs::{Cell, CellRef, Heap};
use crate::signature::{Signature, BOT};

pub const DEFAULT_REGISTER_CAP: usize = 4096;

struct Compiler<'a> {
    sig: &'a Signature,
    heap: &'a Heap,
    refcount: HashMap<CellRef, usize>,
    regs: HashMap<CellRef, Reg>,
    next: Reg,
    code: Vec<Instr>,
}

impl<'a> Compiler<'a> {
    fn new(sig: &'a Signature, rule: &'a RuleTemplate) -> Self {
        let heap = &rule.heap;
        let mut refcount: HashMap<CellRef, usize> = HashMap::new();
        let mut stack = rule.roots();
        while let Some(r) = stack.pop() {
            let r = heap.resolve(r);
            let n = refcount.entry(r).or_insert(0);
            *n += 1;
            if *n == 1 {
                stack.extend_from_slice(heap.arcs_of(r));
            }
        }
        Compiler {
            sig,
            heap,
            refcount,
            regs: HashMap::new(),
            next: rule.arity() as Reg + 1,
            code: Vec::new(),
        }
    }

    fn temp(&mut self) -> Reg {
        let r = self.next;
        self.next += 1;
        r
    }

    /// A placeholder of exactly the appropriate type, mentioned once: it
    /// constrains nothing.
    fn trivial(&self, c: CellRef, restr: crate::signature::TypeId) -> bool {
        matches!(self.heap.cell(c), Cell::Unexpanded(t) if t == restr) && self.refcount[&c] == 1
    }

    fn get_children(&mut self, node: CellRef, reg: Reg) {
        let Cell::Node { ty, .. } = self.heap.cell(node) else {
            return;
        };
        let feats = self.sig.features_of(ty);
        for (i, &(f, restr)) in feats.iter().enumerate() {
            let child = self.heap.resolve(self.heap.arcs_of(node)[i]);
            if let Some(&q) = self.regs.get(&child) {
                let t = self.temp();
                self.code.push(Instr::GetArc { reg, feat: f, dst: t });
                self.code.push(Instr::UnifyRegs { a: q, b: t });
                continue;
            }
            if self.trivial(child, restr) {
                continue;
            }
            let t = self.temp();
            self.code.push(Instr::GetArc { reg, feat: f, dst: t });
            self.regs.insert(child, t);
            let cty = self.heap.type_of(child);
            if cty != restr {
                self.code.push(Instr::GetNode { ty: cty, reg: t });
            }
            self.get_children(child, t);
        }
    }

    fn put_node(&mut self, node: CellRef, reg: Reg) {
        self.regs.insert(node, reg);
        let ty = self.heap.type_of(node);
        self.code.push(Instr::PutNode { ty, reg });
        if !matches!(self.heap.cell(node), Cell::Node { .. }) {
            return;
        }
        let feats = self.sig.features_of(ty);
        for (i, &(f, restr)) in feats.iter().enumerate() {
            let child = self.heap.resolve(self.heap.arcs_of(node)[i]);
            let val = if let Some(&q) = self.regs.get(&child) {
                q
            } else if self.trivial(child, restr) {
                continue;
            } else {
                let t = self.temp();
                self.put_node(child, t);
                t
            };
            self.code.push(Instr::SetArc { reg, feat: f, val });
        }
    }
}

/// Code for one rule, relative to offset 0, plus its resume offsets and
/// register count.
pub fn compile_rule(
    sig: &Signature,
    rule: &RuleTemplate,
    cap: usize,
) -> Result<(Vec<Instr>, Vec<usize>, usize), MachineError> {
    let n = rule.arity();
    if n == 0 {
        return Err(MachineError::Fault(format!("rule `{}` has an empty body", rule.name)));
    }
    let mut c = Compiler::new(sig, rule);
    let mut resume = Vec::new();
    for (i, &b) in rule.body.iter().enumerate() {
        let k = i as Reg + 1;
        c.code.push(Instr::BindConstituent { k });
        let root = rule.heap.resolve(b);
        if let Some(&q) = c.regs.get(&root) {
            c.code.push(Instr::UnifyRegs { a: q, b: k });
        } else {
            c.regs.insert(root, k);
            let ty = rule.heap.type_of(root);
            if ty != BOT {
                c.code.push(Instr::GetNode { ty, reg: k });
            }
            c.get_children(root, k);
        }
        if i + 1 < n {
            c.code.push(Instr::AdvanceDot);
            resume.push(c.code.len());
        }
    }
    let head = rule.heap.resolve(rule.head);
    if let Some(&q) = c.regs.get(&head) {
        c.code.push(Instr::PutRef { src: q, dst: 0 });
        c.code.push(Instr::BuildHead { reg: 0, ty: None });
    } else if let (Cell::Unexpanded(t), 1) = (rule.heap.cell(head), c.refcount[&head]) {
        c.code.push(Instr::BuildHead { reg: 0, ty: Some(t) });
    } else {
        c.put_node(head, 0);
        c.code.push(Instr::BuildHead { reg: 0, ty: None });
    }
    c.code.push(Instr::Proceed);
    let needed = c.next as usize;
    if needed > cap {
        return Err(MachineError::RegisterOverflow {
            rule: rule.name.clone(),
            needed,
            cap,
        });
    }
    Ok((c.code, resume, needed))
}

pub fn compile_program(sig: &Signature, rules: &[RuleTemplate], cap: usize) -> Result<Program, MachineError> {
    let mut p = Program::default();
    for r in rules {
        let (code, resume, regs) = compile_rule(sig, r, cap)?;
        let entry = p.instrs.len();
        p.instrs.extend(code);
        p.rules.push(RuleEntry {
            name: r.name.clone(),
            entry,
            resume: resume.into_iter().map(|o| o + entry).collect(),
            end: p.instrs.len(),
            arity: r.arity(),
            initial_only: r.initial_only.clone(),
            regs,
        });
    }
    Ok(p)
}
