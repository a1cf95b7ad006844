//! CSV reference-table reading (RFC 4180, UTF-8, header row required).

use std::fs::File;
use std::path::Path;

use super::{IssnEntry, IssnKind};
use crate::error::{Error, Result};
use crate::schema::{SemanticKind, TableSchema};

/// Read a CSV whose header matches the table's data columns (everything
/// except the synthetic key and foreign keys, in schema order). Rows are
/// returned as strings in header order.
pub fn read_csv_table(path: &Path, table: &TableSchema) -> Result<Vec<Vec<String>>> {
    let expected: Vec<&str> = table
        .columns
        .iter()
        .filter(|c| !matches!(c.kind, SemanticKind::Key | SemanticKind::ForeignKey { .. }))
        .map(|c| c.name.as_str())
        .collect();
    read_csv_columns(path, &expected)
}

/// Read a CSV validating an explicit header.
pub fn read_csv_columns(path: &Path, expected: &[&str]) -> Result<Vec<Vec<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?
        .iter()
        .map(|h| h.trim().to_owned())
        .collect();
    if header != expected {
        return Err(Error::CsvHeader {
            path: path.to_owned(),
            expected: expected.join(","),
            found: header.join(","),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Ok(rows)
}

/// One journal from the journals CSV: a title plus its ISSNs by type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalRow {
    pub title: String,
    pub issns: Vec<IssnEntry>,
}

/// Journals CSV (`title,issn_print,issn_electronic,issn_alternative`),
/// disaggregating the ISSN columns into typed entries.
pub fn read_journals_csv(path: &Path) -> Result<Vec<JournalRow>> {
    let rows = read_csv_columns(
        path,
        &["title", "issn_print", "issn_electronic", "issn_alternative"],
    )?;
    Ok(rows
        .into_iter()
        .map(|row| {
            let mut issns = Vec::new();
            for (value, kind) in [
                (&row[1], IssnKind::Print),
                (&row[2], IssnKind::Electronic),
                (&row[3], IssnKind::Alternative),
            ] {
                if !value.is_empty() {
                    issns.push(IssnEntry {
                        value: value.clone(),
                        kind,
                    });
                }
            }
            JournalRow {
                title: row[0].clone(),
                issns,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::SchemaGraph;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_rows_against_schema_header() {
        let schema = SchemaGraph::bundled();
        let table = schema.table("open_access_journals").unwrap();
        let f = write_tmp("title,issn\nJournal A,1234-5678\n\"Journal, B\",\n");
        let rows = read_csv_table(f.path(), table).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1][0], "Journal, B");
    }

    #[test]
    fn header_mismatch_lists_expected_and_found() {
        let schema = SchemaGraph::bundled();
        let table = schema.table("asjc_codes").unwrap();
        let f = write_tmp("kode,description\n1503,Catalysis\n");
        match read_csv_table(f.path(), table) {
            Err(Error::CsvHeader {
                expected, found, ..
            }) => {
                assert_eq!(expected, "code,description");
                assert_eq!(found, "kode,description");
            }
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn journals_disaggregate_issns_by_type() {
        let f = write_tmp(
            "title,issn_print,issn_electronic,issn_alternative\n\
             Journal A,1111-1111,2222-2222,\n\
             Journal B,,3333-3333,4444-4444\n",
        );
        let journals = read_journals_csv(f.path()).unwrap();
        assert_eq!(journals.len(), 2);
        assert_eq!(journals[0].issns.len(), 2);
        assert_eq!(journals[0].issns[0].kind, IssnKind::Print);
        assert_eq!(journals[1].issns[1].kind, IssnKind::Alternative);
    }
}
