//! Reader and writer for the IRI-only subset of N-Triples.
//!
//! Each statement is `<s> <p> <o> .` on its own line. Lines starting with `#`
//! and blank lines are skipped; a comment may also follow the final dot.
//! Literals and blank nodes are rejected.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// An absolute IRI, stored unescaped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(String);

impl Iri {
    pub fn new(value: impl Into<String>) -> Result<Self, String> {
        let value = value.into();
        if value.is_empty() {
            return Err("empty IRI".into());
        }
        if let Some(c) = value.chars().find(|&c| !is_iri_char(c)) {
            return Err(format!("character {c:?} not allowed in IRI"));
        }
        Ok(Iri(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn is_iri_char(c: char) -> bool {
    !(c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Iri,
    pub predicate: Iri,
    pub object: Iri,
}

impl Triple {
    pub fn new(subject: Iri, predicate: Iri, object: Iri) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }

    /// Builds a triple from raw strings, panicking on invalid IRIs.
    /// Meant for fixtures and generated data.
    pub fn from_strs(s: &str, p: &str, o: &str) -> Self {
        let iri = |v: &str| Iri::new(v).unwrap_or_else(|e| panic!("bad IRI {v:?}: {e}"));
        Triple::new(iri(s), iri(p), iri(o))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// One parsed statement together with its trailing comment, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub triple: Triple,
    pub comment: Option<String>,
}

struct Cursor<'a> {
    rest: &'a str,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start_matches([' ', '\t']);
    }

    fn iri(&mut self, what: &str) -> Result<Iri> {
        self.skip_ws();
        match self.rest.chars().next() {
            Some('<') => {}
            Some('"') => return Err(self.err(format!("literal {what} is not supported"))),
            Some('_') if self.rest.starts_with("_:") => {
                return Err(self.err(format!("blank node {what} is not supported")))
            }
            Some(c) => return Err(self.err(format!("expected '<' at start of {what}, found {c:?}"))),
            None => return Err(self.err(format!("missing {what}"))),
        }
        let end = self
            .rest
            .find('>')
            .ok_or_else(|| self.err(format!("unterminated IRI in {what}")))?;
        let raw = &self.rest[1..end];
        self.rest = &self.rest[end + 1..];
        let value = unescape(raw).map_err(|m| self.err(m))?;
        Iri::new(value).map_err(|m| self.err(format!("{what}: {m}")))
    }
}

fn unescape(raw: &str) -> Result<String, String> {
    if !raw.contains('\\') {
        return Ok(raw.to_string());
    }
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        let width = match chars.next() {
            Some('u') => 4,
            Some('U') => 8,
            other => return Err(format!("invalid escape \\{}", other.unwrap_or(' '))),
        };
        let hex: String = chars.by_ref().take(width).collect();
        let code = u32::from_str_radix(&hex, 16)
            .ok()
            .filter(|_| hex.len() == width)
            .ok_or_else(|| format!("invalid unicode escape {hex:?}"))?;
        out.push(char::from_u32(code).ok_or_else(|| format!("invalid code point {code:#x}"))?);
    }
    Ok(out)
}

/// Parses one line. Returns `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str, line_no: usize) -> Result<Option<Statement>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut cur = Cursor {
        rest: trimmed,
        line: line_no,
    };
    let subject = cur.iri("subject")?;
    let predicate = cur.iri("predicate")?;
    let object = cur.iri("object")?;
    cur.skip_ws();
    cur.rest = cur
        .rest
        .strip_prefix('.')
        .ok_or_else(|| cur.err("expected '.' after object"))?;
    cur.skip_ws();
    let comment = if cur.rest.is_empty() {
        None
    } else if let Some(c) = cur.rest.strip_prefix('#') {
        Some(c.trim().to_string())
    } else {
        return Err(cur.err(format!("unexpected trailing content {:?}", cur.rest)));
    };
    Ok(Some(Statement {
        triple: Triple::new(subject, predicate, object),
        comment,
    }))
}

pub fn read_statements<R: BufRead>(reader: R) -> Result<Vec<Statement>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        if let Some(st) = parse_line(&line?, i + 1)? {
            out.push(st);
        }
    }
    Ok(out)
}

pub fn read_triples<R: BufRead>(reader: R) -> Result<Vec<Triple>> {
    Ok(read_statements(reader)?
        .into_iter()
        .map(|s| s.triple)
        .collect())
}

pub fn parse_str(text: &str) -> Result<Vec<Triple>> {
    read_triples(text.as_bytes())
}

/// Writes `<s> <p> <o> .` followed by ` # comment` when given.
pub fn write_statement<W: Write>(
    w: &mut W,
    s: &str,
    p: &str,
    o: &str,
    comment: Option<&str>,
) -> std::io::Result<()> {
    write!(w, "<{s}> <{p}> <{o}> .")?;
    if let Some(c) = comment {
        write!(w, " # {c}")?;
    }
    writeln!(w)
}

pub fn write_triples<'a, W, I>(w: &mut W, triples: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a Triple>,
{
    for t in triples {
        writeln!(w, "{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_basic_statement_and_comments() {
        let text = "# header\n\n<http://a/s> <http://a/p> <http://a/o> .\n  <http://a/x>\t<http://a/p> <http://a/y>. # note\n";
        let st = read_statements(text.as_bytes()).unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(st[0].triple.subject.as_str(), "http://a/s");
        assert_eq!(st[0].comment, None);
        assert_eq!(st[1].comment.as_deref(), Some("note"));
    }

    #[test]
    fn reports_line_numbers() {
        let text = "<http://a/s> <http://a/p> <http://a/o> .\n<http://a/s> <http://a/p> \"lit\" .\n";
        match parse_str(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("literal"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_str("<http://a/s> <http://a/p> _:b ."),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_str("<http://a/s> <http://a/p> <http://a/o>"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_str("<http://a/s> <> <http://a/o> ."),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn decodes_unicode_escapes() {
        let t = parse_str("<http://a/\\u00E9> <http://a/p> <http://a/o> .").unwrap();
        assert_eq!(t[0].subject.as_str(), "http://a/é");
    }

    proptest! {
        #[test]
        fn triple_roundtrip(
            s in "[a-z]{1,8}:[a-zA-Z0-9/#._~-]{1,20}",
            p in "[a-z]{1,8}:[a-zA-Z0-9/#._~-]{1,20}",
            o in "[a-z]{1,8}:[a-zA-Zé0-9/#._~-]{1,20}",
        ) {
            let t = Triple::from_strs(&s, &p, &o);
            let mut buf = Vec::new();
            write_triples(&mut buf, [&t]).unwrap();
            let back = read_triples(buf.as_slice()).unwrap();
            prop_assert_eq!(back, vec![t]);
        }
    }
}
