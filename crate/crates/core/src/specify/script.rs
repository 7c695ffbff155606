//! Session scripts: a specification written out as text, replayed as
//! tactics.
//!
//! ```text
//! Example "Diff_App/coil-kernel"
//! Specification:
//!   Model:
//!     Given: "Constants [r = 7]"
//!     Find: "Maximum A" "AdditionalValues [u, v]"
//!   References:
//!     Theory_Ref: "Diff_App"
//! ```

use serde::{Deserialize, Serialize};

use crate::knowledge::file::{lex, Tok, Token};
use crate::knowledge::MField;
use crate::terms::SrcPos;

use super::TacticInput;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{}:{}: {msg}", pos.line, pos.col)]
pub struct ScriptError {
    pub pos: SrcPos,
    pub msg: String,
}

/// One step of a script, with the position of its text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub tactic: TacticInput,
    pub pos: SrcPos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Script {
    pub example: Option<(String, SrcPos)>,
    pub steps: Vec<ScriptStep>,
    pub warnings: Vec<ScriptError>,
}

struct Cursor {
    toks: Vec<Token>,
    at: usize,
}

impl Cursor {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn skip_colon(&mut self) {
        if self.peek().tok == Tok::Colon {
            self.bump();
        }
    }

    fn string(&mut self, what: &str) -> Result<(String, SrcPos), ScriptError> {
        let t = self.bump();
        match t.tok {
            Tok::Str(s) => Ok((s, t.pos)),
            _ => Err(ScriptError { pos: t.pos, msg: format!("expected {what} in quotes") }),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Num(n) => n.to_string(),
        Tok::Colon => "':'".into(),
        Tok::Eq => "'='".into(),
        Tok::LBrace => "'{'".into(),
        Tok::RBrace => "'}'".into(),
        Tok::Comma => "','".into(),
        Tok::Eof => "end of script".into(),
    }
}

pub fn parse_script(src: &str) -> Result<Script, ScriptError> {
    let toks = lex(src).map_err(|(pos, msg)| ScriptError { pos, msg })?;
    let mut c = Cursor { toks, at: 0 };
    let mut script = Script::default();
    if c.peek().tok == Tok::Eof {
        return Ok(script);
    }
    match &c.peek().tok {
        Tok::Ident(k) if k == "Example" => {
            c.bump();
            script.example = Some(c.string("an example id")?);
        }
        other => {
            return Err(ScriptError {
                pos: c.peek().pos,
                msg: format!("expected 'Example', found {}", describe(other)),
            })
        }
    }
    loop {
        let t = c.bump();
        let Tok::Ident(word) = &t.tok else {
            if t.tok == Tok::Eof {
                return Ok(script);
            }
            return Err(ScriptError { pos: t.pos, msg: format!("unexpected {}", describe(&t.tok)) });
        };
        match word.as_str() {
            "Specification" | "Model" | "References" => c.skip_colon(),
            "Solution" => {
                script.warnings.push(ScriptError { pos: t.pos, msg: "Solution is not replayed; ignored".into() });
                return Ok(script);
            }
            "Where" => {
                c.skip_colon();
                while matches!(c.peek().tok, Tok::Str(_)) {
                    let (_, pos) = c.string("a precondition")?;
                    script.warnings.push(ScriptError { pos, msg: "preconditions are computed; ignored".into() });
                }
            }
            "Theory_Ref" | "Problem_Ref" | "Method_Ref" => {
                c.skip_colon();
                let (id, pos) = c.string("a reference")?;
                let tactic = match word.as_str() {
                    "Theory_Ref" => TacticInput::SpecifyTheory { id },
                    "Problem_Ref" => TacticInput::SpecifyProblem { id },
                    _ => TacticInput::SpecifyMethod { id },
                };
                script.steps.push(ScriptStep { tactic, pos });
            }
            w => {
                let Some(field) = MField::from_name(w).filter(|f| f.name() == w) else {
                    return Err(ScriptError { pos: t.pos, msg: format!("unexpected '{w}'") });
                };
                c.skip_colon();
                while matches!(c.peek().tok, Tok::Str(_)) {
                    let (text, pos) = c.string("an item")?;
                    script.steps.push(ScriptStep { tactic: TacticInput::add(field, text, pos), pos });
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steps_carry_positions() {
        let src = "Example \"E/x\"\nSpecification:\n  Model:\n    Given: \"Constants [r = 7]\"\n    Where: \"0 < r\"\n    Find: \"Maximum A\" \"AdditionalValues [u, v]\"\n  References:\n    Theory_Ref: \"Diff_App\"\nSolution: anything here";
        let s = parse_script(src).unwrap();
        assert_eq!(s.example, Some(("E/x".to_string(), SrcPos::new(1, 10, 3))));
        assert_eq!(s.steps.len(), 4);
        assert_eq!(s.steps[0].tactic, TacticInput::add(MField::Given, "Constants [r = 7]", SrcPos::new(4, 13, 17)));
        assert_eq!(s.steps[3].tactic, TacticInput::SpecifyTheory { id: "Diff_App".into() });
        assert_eq!(s.warnings.len(), 2);
    }

    #[test]
    fn empty_and_malformed() {
        assert_eq!(parse_script("  (* nothing *) ").unwrap(), Script::default());
        let e = parse_script("Given: \"x\"").unwrap_err();
        assert_eq!(e.pos, SrcPos::new(1, 1, 5));
        let e = parse_script("Example \"E\"\n  Gven: \"x\"").unwrap_err();
        assert_eq!((e.pos.line, e.pos.col), (2, 3));
        assert!(parse_script("Example \"E\"\nTheory_Ref 7").is_err());
    }
}
