//! `TFSM` binary encoding of a program. Little-endian throughout:
//!
//! ```text
//! "TFSM" u16:version
//! u32:ntypes {str}*   u32:nfeats {str}*
//! u32:ninstrs {u8:opcode u32*}*
//! u32:nrules {str u32:entry u32:end u32:arity u32:regs u32:nresume u32* u8*arity}*
//! ```
//!
//! Strings are `u32` byte length plus UTF-8. The symbol tables let a
//! reader reject code compiled against a different signature.

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::{Instr, Opcode, Program, RuleEntry};
use crate::signature::{FeatId, Signature, TypeId};

const MAGIC: &[u8; 4] = b"TFSM";
const VERSION: u16 = 1;
const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error("not a TFSM program")]
    BadMagic,
    #[error("unsupported TFSM version {0}")]
    Version(u16),
    #[error("truncated TFSM data")]
    Truncated,
    #[error("program was compiled against a different signature: {0}")]
    SymbolMismatch(String),
    #[error("invalid TFSM data: {0}")]
    Invalid(String),
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.write_u32::<LE>(s.len() as u32).unwrap();
    out.write_all(s.as_bytes()).unwrap();
}

pub fn encode_program(p: &Program, sig: &Signature) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.write_u16::<LE>(VERSION).unwrap();
    out.write_u32::<LE>(sig.type_count() as u32).unwrap();
    for t in sig.types() {
        put_str(&mut out, sig.type_name(t));
    }
    out.write_u32::<LE>(sig.feature_count() as u32).unwrap();
    for f in 0..sig.feature_count() {
        put_str(&mut out, sig.feat_name(FeatId(f as u32)));
    }
    out.write_u32::<LE>(p.instrs.len() as u32).unwrap();
    for ins in &p.instrs {
        let op = Opcode::ALL.iter().position(|o| *o == ins.opcode()).unwrap();
        out.write_u8(op as u8).unwrap();
        let args: Vec<u32> = match *ins {
            Instr::PutNode { ty, reg } | Instr::GetNode { ty, reg } => vec![ty.0, reg],
            Instr::PutRef { src, dst } => vec![src, dst],
            Instr::SetArc { reg, feat, val } => vec![reg, feat.0, val],
            Instr::GetArc { reg, feat, dst } => vec![reg, feat.0, dst],
            Instr::UnifyRegs { a, b } => vec![a, b],
            Instr::BindConstituent { k } => vec![k],
            Instr::BuildHead { reg, ty } => vec![reg, ty.map_or(NONE, |t| t.0)],
            Instr::AdvanceDot | Instr::Proceed => vec![],
        };
        for a in args {
            out.write_u32::<LE>(a).unwrap();
        }
    }
    out.write_u32::<LE>(p.rules.len() as u32).unwrap();
    for r in &p.rules {
        put_str(&mut out, &r.name);
        for v in [r.entry, r.end, r.arity, r.regs, r.resume.len()] {
            out.write_u32::<LE>(v as u32).unwrap();
        }
        for &o in &r.resume {
            out.write_u32::<LE>(o as u32).unwrap();
        }
        for &b in &r.initial_only {
            out.write_u8(b as u8).unwrap();
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn u8(&mut self) -> Result<u8, DecodeError> {
        self.buf.read_u8().map_err(|_| DecodeError::Truncated)
    }

    fn u32(&mut self) -> Result<u32, DecodeError> {
        self.buf.read_u32::<LE>().map_err(|_| DecodeError::Truncated)
    }

    fn len(&mut self) -> Result<usize, DecodeError> {
        let n = self.u32()? as usize;
        if n > self.buf.len() {
            return Err(DecodeError::Truncated);
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<String, DecodeError> {
        let n = self.len()?;
        let mut v = vec![0; n];
        self.buf.read_exact(&mut v).map_err(|_| DecodeError::Truncated)?;
        String::from_utf8(v).map_err(|_| DecodeError::Invalid("string is not UTF-8".into()))
    }
}

/// Decodes and validates a program for `sig`. Returns the program and the
/// number of bytes consumed.
pub fn decode_program(bytes: &[u8], sig: &Signature) -> Result<(Program, usize), DecodeError> {
    let mut r = Reader { buf: bytes };
    let mut magic = [0u8; 4];
    r.buf.read_exact(&mut magic).map_err(|_| DecodeError::BadMagic)?;
    if &magic != MAGIC {
        return Err(DecodeError::BadMagic);
    }
    let v = r.buf.read_u16::<LE>().map_err(|_| DecodeError::Truncated)?;
    if v != VERSION {
        return Err(DecodeError::Version(v));
    }
    let nt = r.len()?;
    if nt != sig.type_count() {
        return Err(DecodeError::SymbolMismatch(format!(
            "{nt} types, signature has {}",
            sig.type_count()
        )));
    }
    for t in sig.types() {
        let s = r.str()?;
        if s != sig.type_name(t) {
            return Err(DecodeError::SymbolMismatch(format!("type {} is `{s}`, expected `{}`", t.0, sig.type_name(t))));
        }
    }
    let nf = r.len()?;
    if nf != sig.feature_count() {
        return Err(DecodeError::SymbolMismatch(format!(
            "{nf} features, signature has {}",
            sig.feature_count()
        )));
    }
    for f in 0..nf {
        let s = r.str()?;
        let want = sig.feat_name(FeatId(f as u32));
        if s != want {
            return Err(DecodeError::SymbolMismatch(format!("feature {f} is `{s}`, expected `{want}`")));
        }
    }
    let ty = |v: u32| {
        if (v as usize) < nt {
            Ok(TypeId(v))
        } else {
            Err(DecodeError::Invalid(format!("type id {v} out of range")))
        }
    };
    let ft = |v: u32| {
        if (v as usize) < nf {
            Ok(FeatId(v))
        } else {
            Err(DecodeError::Invalid(format!("feature id {v} out of range")))
        }
    };
    let ni = r.len()?;
    let mut instrs = Vec::with_capacity(ni);
    for _ in 0..ni {
        let op = *Opcode::ALL
            .get(r.u8()? as usize)
            .ok_or_else(|| DecodeError::Invalid("unknown opcode".into()))?;
        instrs.push(match op {
            Opcode::PutNode => Instr::PutNode { ty: ty(r.u32()?)?, reg: r.u32()? },
            Opcode::GetNode => Instr::GetNode { ty: ty(r.u32()?)?, reg: r.u32()? },
            Opcode::PutRef => Instr::PutRef { src: r.u32()?, dst: r.u32()? },
            Opcode::SetArc => Instr::SetArc { reg: r.u32()?, feat: ft(r.u32()?)?, val: r.u32()? },
            Opcode::GetArc => Instr::GetArc { reg: r.u32()?, feat: ft(r.u32()?)?, dst: r.u32()? },
            Opcode::UnifyRegs => Instr::UnifyRegs { a: r.u32()?, b: r.u32()? },
            Opcode::BindConstituent => Instr::BindConstituent { k: r.u32()? },
            Opcode::AdvanceDot => Instr::AdvanceDot,
            Opcode::BuildHead => {
                let reg = r.u32()?;
                let t = r.u32()?;
                Instr::BuildHead { reg, ty: if t == NONE { None } else { Some(ty(t)?) } }
            }
            Opcode::Proceed => Instr::Proceed,
        });
    }
    let nr = r.len()?;
    let mut rules = Vec::with_capacity(nr);
    for _ in 0..nr {
        let name = r.str()?;
        let entry = r.u32()? as usize;
        let end = r.u32()? as usize;
        let arity = r.u32()? as usize;
        let regs = r.u32()? as usize;
        let nres = r.len()?;
        let resume = (0..nres).map(|_| r.u32().map(|v| v as usize)).collect::<Result<Vec<_>, _>>()?;
        let initial_only = (0..arity).map(|_| r.u8().map(|b| b != 0)).collect::<Result<Vec<_>, _>>()?;
        if entry >= end || end > ni || resume.iter().any(|&o| o <= entry || o >= end) {
            return Err(DecodeError::Invalid(format!("rule `{name}` has bad offsets")));
        }
        if arity == 0 || nres + 1 != arity {
            return Err(DecodeError::Invalid(format!("rule `{name}` has bad arity")));
        }
        rules.push(RuleEntry {
            name,
            entry,
            resume,
            end,
            arity,
            initial_only,
            regs,
        });
    }
    Ok((Program { instrs, rules }, bytes.len() - r.buf.len()))
}
