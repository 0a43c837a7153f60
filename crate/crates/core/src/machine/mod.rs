//! The abstract machine: instructions, the rule compiler, and a steppable
//! interpreter.
//!
//! Register convention: `X0` is the head root, `X1..Xn` hold the copies of
//! the matched constituents, higher registers are temporaries. Code for a
//! rule with body length `n` has the shape
//!
//! ```text
//! BIND_CONSTITUENT 1; GET...; ADVANCE_DOT; ...; BIND_CONSTITUENT n; GET...;
//! PUT...; BUILD_HEAD X0; PROCEED
//! ```

mod binary;
mod compile;
mod exec;

use std::fmt::Write as _;

use thiserror::Error;

use crate::signature::{FeatId, Signature, TypeId};

pub use binary::{decode_program, encode_program, DecodeError};
pub use compile::{compile_program, compile_rule, DEFAULT_REGISTER_CAP};
pub use exec::{execute, step, Attempt, Step};

pub type Reg = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    /// Allocate a node of `ty` (arcs are placeholders) into `reg`.
    PutNode { ty: TypeId, reg: Reg },
    PutRef { src: Reg, dst: Reg },
    SetArc { reg: Reg, feat: FeatId, val: Reg },
    /// Raise the type of the node in `reg` to at least `ty`.
    GetNode { ty: TypeId, reg: Reg },
    /// Load the value of `feat` below `reg` into `dst`.
    GetArc { reg: Reg, feat: FeatId, dst: Reg },
    UnifyRegs { a: Reg, b: Reg },
    /// Copy the `k`-th matched constituent into `Xk`.
    BindConstituent { k: u32 },
    AdvanceDot,
    /// Declare `reg` the head root; with a type, first store a placeholder
    /// of that type there.
    BuildHead { reg: Reg, ty: Option<TypeId> },
    Proceed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opcode {
    PutNode,
    PutRef,
    SetArc,
    GetNode,
    GetArc,
    UnifyRegs,
    BindConstituent,
    AdvanceDot,
    BuildHead,
    Proceed,
}

impl Opcode {
    pub const ALL: [Opcode; 10] = [
        Opcode::PutNode,
        Opcode::PutRef,
        Opcode::SetArc,
        Opcode::GetNode,
        Opcode::GetArc,
        Opcode::UnifyRegs,
        Opcode::BindConstituent,
        Opcode::AdvanceDot,
        Opcode::BuildHead,
        Opcode::Proceed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Opcode::PutNode => "PUT_NODE",
            Opcode::PutRef => "PUT_REF",
            Opcode::SetArc => "SET_ARC",
            Opcode::GetNode => "GET_NODE",
            Opcode::GetArc => "GET_ARC",
            Opcode::UnifyRegs => "UNIFY_REGS",
            Opcode::BindConstituent => "BIND_CONSTITUENT",
            Opcode::AdvanceDot => "ADVANCE_DOT",
            Opcode::BuildHead => "BUILD_HEAD",
            Opcode::Proceed => "PROCEED",
        }
    }

    pub fn from_name(s: &str) -> Option<Opcode> {
        Opcode::ALL.into_iter().find(|o| o.name() == s)
    }
}

impl Instr {
    pub fn opcode(&self) -> Opcode {
        match self {
            Instr::PutNode { .. } => Opcode::PutNode,
            Instr::PutRef { .. } => Opcode::PutRef,
            Instr::SetArc { .. } => Opcode::SetArc,
            Instr::GetNode { .. } => Opcode::GetNode,
            Instr::GetArc { .. } => Opcode::GetArc,
            Instr::UnifyRegs { .. } => Opcode::UnifyRegs,
            Instr::BindConstituent { .. } => Opcode::BindConstituent,
            Instr::AdvanceDot => Opcode::AdvanceDot,
            Instr::BuildHead { .. } => Opcode::BuildHead,
            Instr::Proceed => Opcode::Proceed,
        }
    }

    /// Assembly text with symbolic names.
    pub fn render(&self, sig: &Signature) -> String {
        let t = |t: &TypeId| sig.type_name(*t).to_string();
        let f = |f: &FeatId| sig.feat_name(*f).to_string();
        let op = self.opcode().name();
        match self {
            Instr::PutNode { ty, reg } | Instr::GetNode { ty, reg } => format!("{op} {}, X{reg}", t(ty)),
            Instr::PutRef { src, dst } => format!("{op} X{src}, X{dst}"),
            Instr::SetArc { reg, feat, val } => format!("{op} X{reg}, {}, X{val}", f(feat)),
            Instr::GetArc { reg, feat, dst } => format!("{op} X{reg}, {}, X{dst}", f(feat)),
            Instr::UnifyRegs { a, b } => format!("{op} X{a}, X{b}"),
            Instr::BindConstituent { k } => format!("{op} {k}"),
            Instr::BuildHead { reg, ty: None } => format!("{op} X{reg}"),
            Instr::BuildHead { reg, ty: Some(ty) } => format!("{op} X{reg}, {}", t(ty)),
            Instr::AdvanceDot | Instr::Proceed => op.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleEntry {
    pub name: String,
    /// Offset of the first instruction.
    pub entry: usize,
    /// `resume[k]`: offset just after the `k+1`-th `ADVANCE_DOT`.
    pub resume: Vec<usize>,
    /// One past the last instruction.
    pub end: usize,
    pub arity: usize,
    pub initial_only: Vec<bool>,
    /// Number of registers used.
    pub regs: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub instrs: Vec<Instr>,
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("rule `{rule}` needs {needed} registers (cap {cap})")]
    RegisterOverflow { rule: String, needed: usize, cap: usize },
    #[error("machine fault: {0}")]
    Fault(String),
}

impl Program {
    /// One instruction per line, with a label line before each rule.
    pub fn disassemble(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for (i, r) in self.rules.iter().enumerate() {
            let _ = writeln!(out, "rule {} {} arity {}:", i, r.name, r.arity);
            for pc in r.entry..r.end {
                let _ = writeln!(out, "{pc:6}  {}", self.instrs[pc].render(sig));
            }
        }
        out
    }

    /// Listing of one rule's code without offsets.
    pub fn disassemble_rule(&self, sig: &Signature, rule: usize) -> String {
        let r = &self.rules[rule];
        let mut out = String::new();
        for pc in r.entry..r.end {
            out.push_str(&self.instrs[pc].render(sig));
            out.push('\n');
        }
        out
    }

    /// Index of the rule whose code contains `pc`.
    pub fn rule_at(&self, pc: usize) -> Option<usize> {
        self.rules.iter().position(|r| r.entry <= pc && pc < r.end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fs::FeatureStructure;
    use crate::grammar::{Grammar, GrammarOptions};

    fn grammar(src: &str) -> Grammar {
        Grammar::from_source(src, &GrammarOptions::default()).unwrap()
    }

    fn atom(g: &Grammar, t: &str) -> FeatureStructure {
        FeatureStructure::most_general(g.signature.type_id(t).unwrap())
    }

    #[test]
    fn unary_rule_listing() {
        let g = grammar("bot sub [a, b].\nb ===> cat> a.\n");
        let p = compile_program(&g.signature, &g.rules, DEFAULT_REGISTER_CAP).unwrap();
        assert_eq!(
            p.disassemble_rule(&g.signature, 0),
            "BIND_CONSTITUENT 1\nGET_NODE a, X1\nBUILD_HEAD X0, b\nPROCEED\n"
        );
        let out = execute(&p, &g.signature, 0, &[atom(&g, "a")]).unwrap().unwrap();
        assert_eq!(g.signature.type_name(out.ty()), "b");
        assert!(execute(&p, &g.signature, 0, &[atom(&g, "b")]).unwrap().is_none());
    }

    #[test]
    fn binary_rule_suspends_once() {
        let g = grammar(include_str!("../../grammars/anbn.gr"));
        let p = compile_program(&g.signature, &g.rules, DEFAULT_REGISTER_CAP).unwrap();
        assert_eq!(p.rules[0].resume.len(), 1);
        let out = execute(&p, &g.signature, 0, &[atom(&g, "a"), atom(&g, "b")]).unwrap();
        assert_eq!(g.signature.type_name(out.unwrap().ty()), "s");
        assert!(execute(&p, &g.signature, 0, &[atom(&g, "b"), atom(&g, "b")]).unwrap().is_none());
    }

    #[test]
    fn shared_values_unify_across_constituents() {
        let g = grammar("bot sub [t, a, b]. t intro [f:bot, g:bot].\n(t, f:X) ===> cat> (t, f:X), cat> (t, g:X).\n");
        let p = compile_program(&g.signature, &g.rules, DEFAULT_REGISTER_CAP).unwrap();
        let sig = &g.signature;
        let mk = |s: &str| crate::frontend::infer_and_expand(sig, &crate::frontend::parse_desc(s).unwrap()).unwrap();
        let out = execute(&p, sig, 0, &[mk("f:a"), mk("g:a")]).unwrap().unwrap();
        assert_eq!(sig.type_name(out.at(sig, "f").unwrap().ty()), "a");
        assert!(execute(&p, sig, 0, &[mk("f:a"), mk("g:b")]).unwrap().is_none());
    }

    #[test]
    fn register_cap_is_enforced() {
        let g = grammar(include_str!("../../grammars/tiny.gr"));
        let err = compile_program(&g.signature, &g.rules, 4).unwrap_err();
        assert!(matches!(err, MachineError::RegisterOverflow { .. }));
    }

    #[test]
    fn binary_round_trip() {
        let g = grammar(include_str!("../../grammars/tiny.gr"));
        let p = compile_program(&g.signature, &g.rules, DEFAULT_REGISTER_CAP).unwrap();
        let bytes = encode_program(&p, &g.signature);
        let (q, used) = decode_program(&bytes, &g.signature).unwrap();
        assert_eq!(used, bytes.len());
        assert_eq!(p, q);
        assert_eq!(decode_program(&bytes[..bytes.len() - 1], &g.signature), Err(DecodeError::Truncated));
        let other = grammar(include_str!("../../grammars/anbn.gr"));
        assert!(matches!(decode_program(&bytes, &other.signature), Err(DecodeError::SymbolMismatch(_))));
    }

    #[test]
    fn empty_register_is_a_fault() {
        let g = grammar("bot sub [a, b].\nb ===> cat> a.\n");
        let mut p = compile_program(&g.signature, &g.rules, DEFAULT_REGISTER_CAP).unwrap();
        p.instrs[1] = Instr::GetNode { ty: crate::signature::BOT, reg: 3 };
        let err = execute(&p, &g.signature, 0, &[atom(&g, "a")]).unwrap_err();
        assert!(matches!(err, MachineError::Fault(_)));
    }
}
