use super::{Instr, MachineError, Program, Reg};
use crate::fs::{CellRef, Clash, FeatureStructure, Heap};
use crate::signature::Signature;

/// A rule application in progress: the matched constituents (frozen roots)
/// and the live registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attempt {
    pub rule: usize,
    pub pc: usize,
    pub regs: Vec<Option<CellRef>>,
    pub constituents: Vec<CellRef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Continue,
    /// Reached `ADVANCE_DOT`; `pc` points at the resume offset.
    Suspend,
    /// The frozen head.
    Done(CellRef),
    Fail(Clash),
}

impl Attempt {
    /// Starts `rule` on its first constituent.
    pub fn start(prog: &Program, rule: usize, first: CellRef) -> Self {
        let r = &prog.rules[rule];
        Attempt {
            rule,
            pc: r.entry,
            regs: vec![None; r.regs],
            constituents: vec![first],
        }
    }

    /// Number of constituents matched so far.
    pub fn dot(&self) -> usize {
        self.constituents.len()
    }

    fn reg(&self, r: Reg) -> Result<CellRef, MachineError> {
        self.regs
            .get(r as usize)
            .copied()
            .flatten()
            .ok_or_else(|| MachineError::Fault(format!("read of empty register X{r}")))
    }

    fn set(&mut self, r: Reg, v: CellRef) -> Result<(), MachineError> {
        match self.regs.get_mut(r as usize) {
            Some(slot) => {
                *slot = Some(v);
                Ok(())
            }
            None => Err(MachineError::Fault(format!("register X{r} out of range"))),
        }
    }
}

/// Executes the instruction at `a.pc`.
pub fn step(prog: &Program, sig: &Signature, heap: &mut Heap, a: &mut Attempt) -> Result<Step, MachineError> {
    let rule = prog
        .rules
        .get(a.rule)
        .ok_or_else(|| MachineError::Fault(format!("no rule {}", a.rule)))?;
    if a.pc < rule.entry || a.pc >= rule.end {
        return Err(MachineError::Fault(format!("pc {} outside rule `{}`", a.pc, rule.name)));
    }
    let ins = prog.instrs[a.pc];
    a.pc += 1;
    let fail = |c: Clash| Ok(Step::Fail(c));
    match ins {
        Instr::PutNode { ty, reg } => {
            let n = heap.alloc_node(sig, ty);
            a.set(reg, n)?;
        }
        Instr::PutRef { src, dst } => {
            let v = a.reg(src)?;
            a.set(dst, v)?;
        }
        Instr::SetArc { reg, feat, val } => {
            let (r, v) = (a.reg(reg)?, a.reg(val)?);
            if !heap.set_arc(sig, r, feat, v) {
                return Err(MachineError::Fault(format!(
                    "SET_ARC on X{reg} without feature {}",
                    sig.feat_name(feat)
                )));
            }
        }
        Instr::GetNode { ty, reg } => {
            if let Err(c) = heap.coerce(sig, a.reg(reg)?, ty) {
                return fail(c);
            }
        }
        Instr::GetArc { reg, feat, dst } => match heap.get_arc(sig, a.reg(reg)?, feat) {
            Ok(v) => a.set(dst, v)?,
            Err(c) => return fail(c),
        },
        Instr::UnifyRegs { a: x, b: y } => {
            if let Err(c) = heap.unify(sig, a.reg(x)?, a.reg(y)?) {
                return fail(c);
            }
        }
        Instr::BindConstituent { k } => {
            let c = *a
                .constituents
                .get((k as usize).wrapping_sub(1))
                .ok_or_else(|| MachineError::Fault(format!("constituent {k} not matched")))?;
            let copy = heap.copy_to_working(&[c])[0];
            a.set(k, copy)?;
        }
        Instr::AdvanceDot => return Ok(Step::Suspend),
        Instr::BuildHead { reg, ty } => match ty {
            Some(t) => {
                let n = heap.alloc_unexpanded(t);
                a.set(reg, n)?;
            }
            None => {
                a.reg(reg)?;
            }
        },
        Instr::Proceed => {
            let root = a.reg(0)?;
            return Ok(Step::Done(heap.freeze(&[root])[0]));
        }
    }
    Ok(Step::Continue)
}

/// Applies rule `rule` to `constituents` outside any chart, suspending and
/// resuming through snapshots at every dot.
pub fn execute(
    prog: &Program,
    sig: &Signature,
    rule: usize,
    constituents: &[FeatureStructure],
) -> Result<Option<FeatureStructure>, MachineError> {
    let entry = prog
        .rules
        .get(rule)
        .ok_or_else(|| MachineError::Fault(format!("no rule {rule}")))?;
    if constituents.len() != entry.arity || constituents.is_empty() {
        return Err(MachineError::Fault(format!(
            "rule `{}` has arity {}, given {} constituents",
            entry.name,
            entry.arity,
            constituents.len()
        )));
    }
    let mut heap = Heap::new();
    let mut roots = Vec::new();
    for c in constituents {
        let r = heap.import(c.heap(), &[c.root()])[0];
        roots.push(heap.freeze(&[r])[0]);
    }
    let mut a = Attempt::start(prog, rule, roots[0]);
    loop {
        match step(prog, sig, &mut heap, &mut a)? {
            Step::Continue => {}
            Step::Suspend => {
                let snap = heap.snapshot(&a.regs);
                heap.discard();
                a.regs = heap.restore(&snap);
                a.constituents.push(roots[a.dot()]);
            }
            Step::Done(r) => return Ok(Some(FeatureStructure::extract(&heap, r))),
            Step::Fail(_) => {
                heap.discard();
                return Ok(None);
            }
        }
    }
}
