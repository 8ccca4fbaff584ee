//! Serialization of alignment links, the tuple provenance sidecar and the
//! per-source statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::kb::KnowledgeBase;
use crate::matcher::SourceMatrix;
use crate::ntriples::{parse_line, write_statement, Statement};
use crate::rules::{MatchLink, RelatednessLevel};
use crate::tuples::TupleRecord;

/// Trailing comment that marks a link added by transitive closure.
pub const INDUCED_MARK: &str = "induced";

/// A link with tuples named by IRI, independent of any knowledge base.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkRecord {
    pub origin: String,
    pub destination: String,
    pub level: RelatednessLevel,
    pub induced: bool,
}

impl LinkRecord {
    pub fn from_link(link: &MatchLink, kb: &KnowledgeBase) -> Self {
        LinkRecord {
            origin: kb.individual_iri(link.origin).to_string(),
            destination: kb.individual_iri(link.destination).to_string(),
            level: link.level,
            induced: link.induced,
        }
    }
}

pub fn write_link_records<'a, W: Write>(
    w: &mut W,
    records: impl IntoIterator<Item = &'a LinkRecord>,
) -> std::io::Result<()> {
    for r in records {
        write_statement(
            w,
            &r.origin,
            r.level.predicate_iri(),
            &r.destination,
            r.induced.then_some(INDUCED_MARK),
        )?;
    }
    Ok(())
}

/// Writes one N-Triples line per link. No links gives an empty file.
pub fn write_links<W: Write>(w: &mut W, links: &[MatchLink], kb: &KnowledgeBase) -> std::io::Result<()> {
    let records: Vec<LinkRecord> = links.iter().map(|l| LinkRecord::from_link(l, kb)).collect();
    write_link_records(w, &records)
}

pub fn read_link_records<R: BufRead>(reader: R) -> Result<Vec<LinkRecord>> {
    let mut out = Vec::new();
    for (n, st) in read_statements_numbered(reader)? {
        let predicate = st.triple.predicate.as_str();
        let level = RelatednessLevel::from_predicate_iri(predicate).ok_or_else(|| Error::Parse {
            line: n,
            message: format!("<{predicate}> is not an alignment predicate"),
        })?;
        let induced = match st.comment.as_deref() {
            None => false,
            Some(INDUCED_MARK) => true,
            Some(other) => {
                return Err(Error::Parse {
                    line: n,
                    message: format!("unexpected comment {other:?}"),
                })
            }
        };
        out.push(LinkRecord {
            origin: st.triple.subject.into_string(),
            destination: st.triple.object.into_string(),
            level,
            induced,
        });
    }
    Ok(out)
}

fn read_statements_numbered<R: BufRead>(reader: R) -> Result<Vec<(usize, Statement)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(st) = parse_line(&line, i + 1)? {
            out.push((i + 1, st));
        }
    }
    Ok(out)
}

/// Path of the provenance sidecar written next to a links file.
pub fn sources_path(links_path: &std::path::Path) -> std::path::PathBuf {
    let mut name = links_path.as_os_str().to_owned();
    name.push(".sources.tsv");
    name.into()
}

/// `tuple_iri<TAB>source` for every tuple, in tuple order.
pub fn write_sources<W: Write>(w: &mut W, tuples: &[TupleRecord], kb: &KnowledgeBase) -> std::io::Result<()> {
    for t in tuples {
        writeln!(w, "{}\t{}", kb.individual_iri(t.id), t.source)?;
    }
    Ok(())
}

pub fn read_sources<R: BufRead>(reader: R) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (tuple, source) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected tuple and source separated by a tab".into(),
        })?;
        out.insert(tuple.to_string(), source.to_string());
    }
    Ok(out)
}

/// Rebuilds per-source counts from serialized links and their provenance.
pub fn matrix_from_records(records: &[LinkRecord], sources: &BTreeMap<String, String>) -> Result<SourceMatrix> {
    let mut m = SourceMatrix::new(sources.values());
    let source = |iri: &str| {
        sources
            .get(iri)
            .map(String::as_str)
            .ok_or_else(|| Error::UnknownIndividual(iri.to_string()))
    };
    for r in records {
        m.add(r.level.rule(), source(&r.origin)?, source(&r.destination)?, 1);
    }
    Ok(m)
}

pub const STATS_HEADER: &str = "rule\torigin_source\tdestination_source\tcount";

/// Header line, then one row per cell with zeros included.
pub fn write_stats_tsv<W: Write>(w: &mut W, matrix: &SourceMatrix) -> std::io::Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for (rule, o, d, n) in matrix.cells() {
        writeln!(w, "{rule}\t{o}\t{d}\t{n}")?;
    }
    Ok(())
}

/// One block per rule; rows are origin sources, columns destination sources.
pub fn format_table(matrix: &SourceMatrix) -> String {
    let sources: Vec<&str> = matrix.sources().collect();
    let label_width = sources.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    for level in RelatednessLevel::ALL {
        let rule = level.rule();
        let _ = writeln!(
            out,
            "Rule {rule} ({}) encoded by <{}>: {} links",
            level.symbol(),
            level.predicate_iri(),
            matrix.total(rule)
        );
        if sources.is_empty() {
            let _ = writeln!(out);
            continue;
        }
        let counts: Vec<Vec<String>> = sources
            .iter()
            .map(|o| sources.iter().map(|d| matrix.count(rule, o, d).to_string()).collect())
            .collect();
        let col_width: Vec<usize> = (0..sources.len())
            .map(|c| {
                counts
                    .iter()
                    .map(|row| row[c].len())
                    .chain([sources[c].chars().count()])
                    .max()
                    .unwrap_or(1)
            })
            .collect();
        let _ = write!(out, "  {:label_width$}", "origin");
        for (c, s) in sources.iter().enumerate() {
            let _ = write!(out, "  {:>w$}", s, w = col_width[c]);
        }
        let _ = writeln!(out);
        for (o, row) in sources.iter().zip(&counts) {
            let _ = write!(out, "  {:label_width$}", o);
            for (c, n) in row.iter().enumerate() {
                let _ = write!(out, "  {:>w$}", n, w = col_width[c]);
            }
            let _ = writeln!(out);
        }
        let _ = writeln!(out);
    }
    out
}
