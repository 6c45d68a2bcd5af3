use super::{AtomSet, FeatureStructure, LinkId, Value};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("offset {offset}: {message}")]
pub struct FsParseError {
    pub offset: usize,
    pub message: String,
}

pub(crate) fn is_atom_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '[' | ']' | '/' | '#' | ':' | '"' | '<' | '>' | '=')
}

/// Parses one value (`[attr:value ...]`, `a/b`, or `#3`) from the start of
/// `text`. Returns the value and the number of bytes consumed.
pub fn parse_value(text: &str) -> Result<(Value, usize), FsParseError> {
    let mut p = Cursor { text, pos: 0 };
    p.skip_ws();
    let v = p.value()?;
    Ok((v, p.pos))
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn err(&self, message: impl Into<String>) -> FsParseError {
        FsParseError { offset: self.pos, message: message.into() }
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if is_atom_char(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn value(&mut self) -> Result<Value, FsParseError> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let mut fs = FeatureStructure::new();
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(']') => {
                            self.pos += 1;
                            return Ok(Value::Struct(fs));
                        }
                        None => return Err(self.err("unterminated feature structure")),
                        _ => {}
                    }
                    let attr = self.word().to_string();
                    if attr.is_empty() {
                        return Err(self.err("expected attribute name"));
                    }
                    if self.peek() != Some(':') {
                        return Err(self.err("expected ':' after attribute"));
                    }
                    self.pos += 1;
                    let v = self.value()?;
                    if fs.insert(attr.clone(), v).is_some() {
                        return Err(self.err(format!("duplicate attribute {attr}")));
                    }
                }
            }
            Some('#') => {
                self.pos += 1;
                let start = self.pos;
                let digits = self.word();
                let n: u32 =
                    digits.parse().map_err(|_| FsParseError { offset: start, message: "bad link id".into() })?;
                Ok(Value::Link(LinkId(n)))
            }
            _ => {
                let mut atoms = Vec::new();
                loop {
                    let a = self.word();
                    if a.is_empty() {
                        return Err(self.err("expected atom"));
                    }
                    atoms.push(a.to_string());
                    if self.peek() == Some('/') {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                Ok(Value::Atoms(AtomSet::new(atoms).expect("non-empty")))
            }
        }
    }
}
