//! Container parsing: gzip-compressed UTF-8 JSON of the form
//! `{"items": [...]}` with publication-metadata field names.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{
    normalize_orcid, AuthorRecord, ContainerSet, FunderRecord, IssnEntry, IssnKind,
    ReferenceRecord, WorkRecord,
};
use crate::error::{Error, Result};

/// A parsed container: records in file order plus the count of skipped
/// malformed records.
#[derive(Debug, Default)]
pub struct ParsedContainer {
    pub works: Vec<WorkRecord>,
    pub warnings: u64,
}

/// Read one container of a set. Peak memory is bounded by the container's
/// decompressed size: the stream is decoded in small chunks and only the
/// parsed records are retained. Malformed individual records are skipped
/// and counted; corrupt gzip or broken JSON framing fails the container.
pub fn read_container(set: &ContainerSet, index: usize) -> Result<ParsedContainer> {
    let container = set.container(index)?;
    parse_container_file(&container.path)
}

pub(crate) fn parse_container_file(path: &Path) -> Result<ParsedContainer> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = flate2::read::GzDecoder::new(BufReader::new(file));
    let mut reader = CountingReader { inner: gz, read: 0 };

    let top: Value = match serde_json::from_reader(&mut reader) {
        Ok(v) => v,
        Err(e) => {
            return Err(Error::ContainerParse {
                path: path.to_owned(),
                offset: reader.read,
                message: e.to_string(),
            })
        }
    };
    let items = match top.get("items").and_then(Value::as_array) {
        Some(items) => items,
        None => {
            return Err(Error::ContainerParse {
                path: path.to_owned(),
                offset: reader.read,
                message: "top-level object lacks an \"items\" array".into(),
            })
        }
    };

    let mut parsed = ParsedContainer::default();
    for item in items {
        match work_from_json(item) {
            Some(work) => parsed.works.push(work),
            None => parsed.warnings += 1,
        }
    }
    Ok(parsed)
}

struct CountingReader<R> {
    inner: R,
    read: u64,
}

impl<R: Read> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.read += n as u64;
        Ok(n)
    }
}

#[derive(Deserialize)]
struct RawWork {
    #[serde(rename = "DOI")]
    doi: Option<String>,
    #[serde(default)]
    title: Vec<String>,
    published: Option<RawDate>,
    #[serde(rename = "container-title", default)]
    container_title: Vec<String>,
    #[serde(rename = "issn-type", default)]
    issn_type: Vec<RawIssn>,
    page: Option<String>,
    #[serde(rename = "abstract")]
    abstract_text: Option<String>,
    #[serde(default)]
    author: Vec<RawAuthor>,
    #[serde(default)]
    reference: Vec<RawReference>,
    #[serde(default)]
    funder: Vec<RawFunder>,
    #[serde(default)]
    subject: Vec<String>,
    #[serde(default)]
    link: Vec<RawLink>,
}

#[derive(Deserialize)]
struct RawDate {
    #[serde(rename = "date-parts", default)]
    date_parts: Vec<Vec<Value>>,
}

#[derive(Deserialize)]
struct RawIssn {
    value: String,
    #[serde(rename = "type")]
    kind: String,
}

#[derive(Deserialize)]
struct RawAuthor {
    #[serde(default)]
    given: String,
    #[serde(default)]
    family: String,
    #[serde(rename = "ORCID")]
    orcid: Option<String>,
    #[serde(default)]
    affiliation: Vec<RawAffiliation>,
}

#[derive(Deserialize)]
struct RawAffiliation {
    name: Option<String>,
}

#[derive(Deserialize)]
struct RawReference {
    #[serde(rename = "DOI")]
    doi: Option<String>,
    unstructured: Option<String>,
    year: Option<Value>,
}

#[derive(Deserialize)]
struct RawFunder {
    name: Option<String>,
    #[serde(rename = "DOI")]
    doi: Option<String>,
    #[serde(default)]
    award: Vec<String>,
}

#[derive(Deserialize)]
struct RawLink {
    #[serde(rename = "URL")]
    url: Option<String>,
}

/// One record. Returns None (counted as a warning) when the item cannot
/// be used: undecodable shape or a missing/empty DOI.
fn work_from_json(item: &Value) -> Option<WorkRecord> {
    let raw: RawWork = serde_json::from_value(item.clone()).ok()?;
    let doi = raw.doi.filter(|d| !d.is_empty())?;

    let (year, month, day) = raw
        .published
        .as_ref()
        .map(date_parts)
        .unwrap_or((None, None, None));

    let issns = raw
        .issn_type
        .iter()
        .filter_map(|i| {
            IssnKind::parse(&i.kind).map(|kind| IssnEntry {
                value: i.value.clone(),
                kind,
            })
        })
        .collect();

    let authors = raw
        .author
        .into_iter()
        .map(|a| AuthorRecord {
            given: a.given,
            family: a.family,
            orcid: a.orcid.as_deref().and_then(normalize_orcid),
            affiliations: a
                .affiliation
                .into_iter()
                .filter_map(|af| af.name)
                .filter(|n| !n.is_empty())
                .collect(),
        })
        .collect();

    // References must carry a DOI or unstructured text.
    let references = raw
        .reference
        .into_iter()
        .filter_map(|r| {
            let doi = r.doi.filter(|d| !d.is_empty());
            let unstructured = r.unstructured.filter(|u| !u.is_empty());
            if doi.is_none() && unstructured.is_none() {
                return None;
            }
            Some(ReferenceRecord {
                doi,
                unstructured,
                year: r.year.as_ref().and_then(lenient_i64),
            })
        })
        .collect();

    let funders = raw
        .funder
        .into_iter()
        .filter_map(|f| {
            let name = f.name.filter(|n| !n.is_empty())?;
            Some(FunderRecord {
                name,
                doi: f.doi.filter(|d| !d.is_empty()),
                awards: f.award,
            })
        })
        .collect();

    Some(WorkRecord {
        doi,
        title: raw.title.into_iter().next().unwrap_or_default(),
        published_year: year,
        published_month: month,
        published_day: day,
        container_title: raw.container_title.into_iter().next().unwrap_or_default(),
        issns,
        pages: raw.page.unwrap_or_default(),
        abstract_text: raw.abstract_text,
        authors,
        references,
        funders,
        subjects: raw.subject,
        links: raw.link.into_iter().filter_map(|l| l.url).collect(),
    })
}

/// Year/month/day from a `date-parts` array; truncated at the first
/// missing or non-numeric part so that month implies year and day
/// implies month.
fn date_parts(date: &RawDate) -> (Option<i64>, Option<i64>, Option<i64>) {
    let parts = match date.date_parts.first() {
        Some(p) => p,
        None => return (None, None, None),
    };
    let mut out = [None, None, None];
    for (i, slot) in out.iter_mut().enumerate() {
        match parts.get(i).and_then(lenient_i64) {
            Some(v) => *slot = Some(v),
            None => break,
        }
    }
    (out[0], out[1], out[2])
}

/// Accept JSON numbers and numeric strings.
fn lenient_i64(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_without_doi_is_skipped() {
        let item: Value = serde_json::json!({"title": ["No identifier"]});
        assert!(work_from_json(&item).is_none());
    }

    #[test]
    fn date_prefix_semantics() {
        let item: Value = serde_json::json!({
            "DOI": "10.1/x",
            "published": {"date-parts": [[2020, null, 5]]}
        });
        let w = work_from_json(&item).unwrap();
        assert_eq!(w.published_year, Some(2020));
        assert_eq!(w.published_month, None);
        assert_eq!(w.published_day, None);
    }

    #[test]
    fn reference_needs_doi_or_text() {
        let item: Value = serde_json::json!({
            "DOI": "10.1/x",
            "reference": [
                {"DOI": "10.2/y"},
                {"unstructured": "Smith 1999", "year": "1999"},
                {"year": 2001}
            ]
        });
        let w = work_from_json(&item).unwrap();
        assert_eq!(w.references.len(), 2);
        assert_eq!(w.references[1].year, Some(1999));
    }

    #[test]
    fn invalid_orcid_dropped() {
        let item: Value = serde_json::json!({
            "DOI": "10.1/x",
            "author": [
                {"given": "A", "family": "B", "ORCID": "http://orcid.org/0000-0002-1825-0097"},
                {"given": "C", "family": "D", "ORCID": "junk"}
            ]
        });
        let w = work_from_json(&item).unwrap();
        assert_eq!(w.authors[0].orcid.as_deref(), Some("0000-0002-1825-0097"));
        assert_eq!(w.authors[1].orcid, None);
    }
}
