//! Compiled artifacts: grammar, parsing program and, optionally, the
//! inverted grammar with its program, in one file.
//!
//! ```text
//! "RVGA" u16:version
//! u32:len JSON metadata
//! u32:len grammar source      u32:len TFSM program
//! [u32:len inverted source    u32:len TFSM program]   when metadata.inverted
//! ```

use std::io::Read;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chart::{Chart, ChartError, ChartOptions};
use crate::frontend::FrontendError;
use crate::fs::FeatureStructure;
use crate::grammar::{Grammar, GrammarOptions};
use crate::inversion::{generate, invert, GenerateError, Generation, InversionConfig, InversionError, InvertedGrammar};
use crate::machine::{compile_program, decode_program, encode_program, DecodeError, MachineError, Program, DEFAULT_REGISTER_CAP};

const MAGIC: &[u8; 4] = b"RVGA";
const VERSION: u16 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Metadata {
    pub compiler: String,
    /// FNV-1a hash of the grammar source, hex.
    pub source_hash: String,
    pub inverted: bool,
    pub inversion: Option<InversionConfig>,
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub grammar: GrammarOptions,
    pub invert: Option<InversionConfig>,
    pub register_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            grammar: GrammarOptions::default(),
            invert: None,
            register_cap: DEFAULT_REGISTER_CAP,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error(transparent)]
    Inversion(#[from] InversionError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArtifactError {
    #[error("not a grammar artifact")]
    BadMagic,
    #[error("unsupported artifact version {0}")]
    Version(u16),
    #[error("truncated artifact")]
    Truncated,
    #[error("bad artifact metadata: {0}")]
    Metadata(String),
    #[error("embedded grammar: {0}")]
    Grammar(#[from] FrontendError),
    #[error("embedded program: {0}")]
    Program(#[from] DecodeError),
    #[error("embedded inverted grammar: {0}")]
    Inversion(#[from] InversionError),
    #[error("program has {program} rules but the grammar has {grammar}")]
    RuleCount { program: usize, grammar: usize },
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub meta: Metadata,
    pub grammar: Grammar,
    pub program: Program,
    pub inverted: Option<(InvertedGrammar, Program)>,
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Options for re-reading embedded source: rules are stored after
/// empty-category expansion, so it must not run again.
fn reload_options() -> GrammarOptions {
    GrammarOptions { max_ec_rounds: 0 }
}

impl Artifact {
    pub fn compile(src: &str, opts: &CompileOptions) -> Result<Artifact, CompileError> {
        let grammar = Grammar::from_source(src, &opts.grammar)?;
        let program = compile_program(&grammar.signature, &grammar.rules, opts.register_cap)?;
        let inverted = match &opts.invert {
            Some(cfg) => {
                let inv = invert(&grammar, cfg)?;
                let p = compile_program(inv.signature(), &inv.grammar.rules, opts.register_cap)?;
                Some((inv, p))
            }
            None => None,
        };
        Ok(Artifact {
            meta: Metadata {
                compiler: format!("revgram {}", env!("CARGO_PKG_VERSION")),
                source_hash: format!("{:016x}", fnv1a(src.as_bytes())),
                inverted: inverted.is_some(),
                inversion: opts.invert.clone(),
            },
            grammar,
            program,
            inverted,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.write_u16::<LE>(VERSION).unwrap();
        let mut chunk = |b: &[u8]| {
            out.write_u32::<LE>(b.len() as u32).unwrap();
            out.extend_from_slice(b);
        };
        chunk(&serde_json::to_vec(&self.meta).unwrap());
        chunk(self.grammar.to_source().as_bytes());
        chunk(&encode_program(&self.program, &self.grammar.signature));
        if let Some((inv, p)) = &self.inverted {
            chunk(inv.to_source().as_bytes());
            chunk(&encode_program(p, inv.signature()));
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Artifact, ArtifactError> {
        let mut r = bytes;
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| ArtifactError::BadMagic)?;
        if &magic != MAGIC {
            return Err(ArtifactError::BadMagic);
        }
        let v = r.read_u16::<LE>().map_err(|_| ArtifactError::Truncated)?;
        if v != VERSION {
            return Err(ArtifactError::Version(v));
        }
        let mut chunk = || -> Result<&[u8], ArtifactError> {
            let n = r.read_u32::<LE>().map_err(|_| ArtifactError::Truncated)? as usize;
            if n > r.len() {
                return Err(ArtifactError::Truncated);
            }
            let (a, b) = r.split_at(n);
            r = b;
            Ok(a)
        };
        let meta: Metadata = serde_json::from_slice(chunk()?).map_err(|e| ArtifactError::Metadata(e.to_string()))?;
        let text = |b: &[u8]| String::from_utf8(b.to_vec()).map_err(|_| ArtifactError::Metadata("source is not UTF-8".into()));
        let grammar = Grammar::from_source(&text(chunk()?)?, &reload_options())?;
        let program = load_program(chunk()?, &grammar)?;
        let inverted = if meta.inverted {
            let g = Grammar::from_source(&text(chunk()?)?, &reload_options())?;
            let p = load_program(chunk()?, &g)?;
            let inv = InvertedGrammar::from_grammar(g, meta.inversion.clone().unwrap_or_default())?;
            Some((inv, p))
        } else {
            None
        };
        Ok(Artifact {
            meta,
            grammar,
            program,
            inverted,
        })
    }

    pub fn parse(&self, words: &[&str], options: ChartOptions) -> Result<(Chart, Vec<usize>), ChartError> {
        let mut chart = Chart::init_parse(&self.grammar, words, options)?;
        let res = chart.run(&self.program, &self.grammar.signature)?;
        Ok((chart, res))
    }

    /// `sem` must be built over the inverted signature.
    pub fn generate(&self, sem: &FeatureStructure, options: ChartOptions) -> Option<Result<Generation, GenerateError>> {
        let (inv, p) = self.inverted.as_ref()?;
        Some(generate(inv, p, sem, options))
    }

    /// One line per compilation phase.
    pub fn stats(&self) -> Vec<String> {
        let g = &self.grammar;
        let mut out = vec![
            format!(
                "signature: {} types, {} features",
                g.signature.type_count(),
                g.signature.feature_count()
            ),
            format!("rules: {} ({} empty categories)", g.rules.len(), g.empties.len()),
            format!("lexicon: {} entries", g.lexicon.len()),
            format!("program: {} instructions", self.program.instrs.len()),
        ];
        if let Some((inv, p)) = &self.inverted {
            out.push(format!(
                "inverted: {} rules ({} lexical), {} kb records, {} instructions",
                inv.grammar.rules.len(),
                inv.lexical_rules.len(),
                inv.grammar.kb.len(),
                p.instrs.len()
            ));
        }
        out
    }
}

fn load_program(bytes: &[u8], g: &Grammar) -> Result<Program, ArtifactError> {
    let (p, _) = decode_program(bytes, &g.signature)?;
    if p.rules.len() != g.rules.len() {
        return Err(ArtifactError::RuleCount {
            program: p.rules.len(),
            grammar: g.rules.len(),
        });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn artifact_round_trip_is_byte_stable() {
        let opts = CompileOptions {
            invert: Some(InversionConfig::default()),
            ..Default::default()
        };
        let a = Artifact::compile(include_str!("../grammars/tiny.gr"), &opts).unwrap();
        let bytes = a.to_bytes();
        let b = Artifact::from_bytes(&bytes).unwrap();
        assert_eq!(b.to_bytes(), bytes);
        assert_eq!(b.program, a.program);
        let (ca, ra) = a.parse(&["every", "boy", "sleeps"], ChartOptions::default()).unwrap();
        let (cb, rb) = b.parse(&["every", "boy", "sleeps"], ChartOptions::default()).unwrap();
        assert_eq!(ra.len(), 1);
        assert_eq!(
            ca.edge_fs(ra[0]).to_text(&a.grammar.signature),
            cb.edge_fs(rb[0]).to_text(&b.grammar.signature)
        );
        assert_eq!(Artifact::from_bytes(&bytes[..bytes.len() - 3]).unwrap_err(), ArtifactError::Truncated);
        assert_eq!(Artifact::from_bytes(b"nope").unwrap_err(), ArtifactError::BadMagic);
    }
}
