use super::text::is_atom_char;
use super::AtomSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Top,
    Bottom,
    /// No `.t`/`.b` given. Installs on the top side.
    Unspecified,
}

impl Side {
    /// The side an equation actually addresses.
    pub fn effective(self) -> Side {
        match self {
            Side::Bottom => Side::Bottom,
            _ => Side::Top,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeaturePath {
    pub node: String,
    pub side: Side,
    pub attrs: Vec<String>,
}

impl FeaturePath {
    pub fn new(node: impl Into<String>, side: Side, attrs: &[&str]) -> Self {
        FeaturePath { node: node.into(), side, attrs: attrs.iter().map(|s| s.to_string()).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EqRhs {
    Path(FeaturePath),
    Atoms(AtomSet),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FeatureEquation {
    pub lhs: FeaturePath,
    pub rhs: EqRhs,
}

impl FeatureEquation {
    /// Same equation with both sides swapped, if the right side is a path.
    pub fn flipped(&self) -> Option<FeatureEquation> {
        match &self.rhs {
            EqRhs::Path(p) => Some(FeatureEquation { lhs: p.clone(), rhs: EqRhs::Path(self.lhs.clone()) }),
            EqRhs::Atoms(_) => None,
        }
    }

    /// Node names mentioned by the equation.
    pub fn nodes(&self) -> Vec<&str> {
        let mut v = vec![self.lhs.node.as_str()];
        if let EqRhs::Path(p) = &self.rhs {
            v.push(p.node.as_str());
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for FeaturePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.node)?;
        match self.side {
            Side::Top => f.write_str(".t")?,
            Side::Bottom => f.write_str(".b")?,
            Side::Unspecified => {}
        }
        write!(f, ":<{}>", self.attrs.join(" "))
    }
}

impl fmt::Display for FeatureEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = ", self.lhs)?;
        match &self.rhs {
            EqRhs::Path(p) => write!(f, "{p}"),
            EqRhs::Atoms(a) => write!(f, "{a}"),
        }
    }
}

impl std::str::FromStr for FeatureEquation {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_equation(s)
    }
}

/// Parses `Node[.t|.b]:<attr ...> = Node[.t|.b]:<attr ...>` or
/// `Node[.t|.b]:<attr ...> = atom[/atom...]`.
pub fn parse_equation(text: &str) -> Result<FeatureEquation, ParseError> {
    let mut p = EqParser { text, pos: 0 };
    p.ws();
    let lhs = p.path()?;
    p.ws();
    p.expect('=')?;
    p.ws();
    let rhs = if p.looks_like_path() {
        let path = p.path()?;
        EqRhs::Path(path)
    } else {
        EqRhs::Atoms(p.atoms()?)
    };
    p.ws();
    if p.pos != text.len() {
        return Err(p.err("trailing input"));
    }
    Ok(FeatureEquation { lhs, rhs })
}

struct EqParser<'a> {
    text: &'a str,
    pos: usize,
}

fn is_node_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '.' | ':' | '<' | '>' | '=')
}

impl EqParser<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn err(&self, message: &str) -> ParseError {
        ParseError { offset: self.pos, message: message.to_string() }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(&format!("expected '{c}'")))
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if f(c) {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        &self.text[start..self.pos]
    }

    fn looks_like_path(&self) -> bool {
        let rest = &self.text[self.pos..];
        let end = rest.find(|c: char| !is_node_char(c)).unwrap_or(rest.len());
        matches!(rest[end..].chars().next(), Some('.') | Some(':'))
    }

    fn path(&mut self) -> Result<FeaturePath, ParseError> {
        let node = self.take_while(is_node_char).to_string();
        if node.is_empty() {
            return Err(self.err("expected node name"));
        }
        let side = if self.peek() == Some('.') {
            self.pos += 1;
            match self.peek() {
                Some('t') => {
                    self.pos += 1;
                    Side::Top
                }
                Some('b') => {
                    self.pos += 1;
                    Side::Bottom
                }
                _ => return Err(self.err("expected 't' or 'b' after '.'")),
            }
        } else {
            Side::Unspecified
        };
        self.expect(':')?;
        self.expect('<')?;
        let mut attrs = Vec::new();
        loop {
            self.ws();
            if self.peek() == Some('>') {
                self.pos += 1;
                break;
            }
            let a = self.take_while(|c| !c.is_whitespace() && c != '>' && c != '<');
            if a.is_empty() {
                return Err(self.err("expected attribute or '>'"));
            }
            attrs.push(a.to_string());
        }
        if attrs.is_empty() {
            return Err(self.err("empty attribute path"));
        }
        Ok(FeaturePath { node, side, attrs })
    }

    fn atoms(&mut self) -> Result<AtomSet, ParseError> {
        let mut atoms = Vec::new();
        loop {
            let a = self.take_while(is_atom_char);
            if a.is_empty() {
                return Err(self.err("expected atomic value"));
            }
            atoms.push(a.to_string());
            if self.peek() == Some('/') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok(AtomSet::new(atoms).expect("non-empty"))
    }
}
