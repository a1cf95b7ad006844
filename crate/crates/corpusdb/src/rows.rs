//! Projection of parsed container records onto relational rows.
//!
//! Row identifiers are synthetic and stable: `container_index * 2^32 +
//! ordinal`, with ordinals counted per table within a container. No
//! cross-container coordination is needed and identifiers ascend in row
//! order.

use rusqlite::types::Value;

use crate::sources::{ContainerRecords, IssnKind, WorkRecord};

/// Identifier of the `ordinal`-th row of a table within a container.
pub fn row_id(container_index: usize, ordinal: u64) -> i64 {
    ((container_index as i64) << 32) + ordinal as i64
}

fn text(s: &str) -> Value {
    Value::Text(s.to_owned())
}

fn opt_text(s: &Option<String>) -> Value {
    match s {
        Some(v) => Value::Text(v.clone()),
        None => Value::Null,
    }
}

fn opt_int(v: &Option<i64>) -> Value {
    match v {
        Some(v) => Value::Integer(*v),
        None => Value::Null,
    }
}

fn first_issn(work: &WorkRecord, kind: IssnKind) -> Value {
    work.issns
        .iter()
        .find(|i| i.kind == kind)
        .map(|i| Value::Text(i.value.clone()))
        .unwrap_or(Value::Null)
}

/// All rows of one container table, in ascending id order, with column
/// values in schema order.
pub fn table_rows(table: &str, records: &ContainerRecords) -> Vec<(i64, Vec<Value>)> {
    let cidx = records.index;
    let cid = Value::Integer(cidx as i64);
    let mut out = Vec::new();
    let mut ordinal = |out: &mut Vec<(i64, Vec<Value>)>, values: Vec<Value>| {
        let id = row_id(cidx, out.len() as u64);
        let mut row = Vec::with_capacity(values.len() + 2);
        row.push(Value::Integer(id));
        row.push(cid.clone());
        row.extend(values);
        out.push((id, row));
    };

    match table {
        "works" => {
            for w in &records.works {
                ordinal(
                    &mut out,
                    vec![
                        text(&w.doi),
                        text(&w.title),
                        opt_int(&w.published_year),
                        opt_int(&w.published_month),
                        opt_int(&w.published_day),
                        text(&w.container_title),
                        first_issn(w, IssnKind::Print),
                        first_issn(w, IssnKind::Electronic),
                        text(&w.pages),
                        opt_text(&w.abstract_text),
                    ],
                );
            }
        }
        "work_authors" => {
            for (w_ord, w) in records.works.iter().enumerate() {
                let work_id = Value::Integer(row_id(cidx, w_ord as u64));
                for a in &w.authors {
                    ordinal(
                        &mut out,
                        vec![
                            work_id.clone(),
                            text(&a.given),
                            text(&a.family),
                            opt_text(&a.orcid),
                        ],
                    );
                }
            }
        }
        "author_affiliations" => {
            let mut author_ord = 0u64;
            for w in &records.works {
                for a in &w.authors {
                    let author_id = Value::Integer(row_id(cidx, author_ord));
                    author_ord += 1;
                    for name in &a.affiliations {
                        ordinal(&mut out, vec![author_id.clone(), text(name)]);
                    }
                }
            }
        }
        "work_references" => {
            for (w_ord, w) in records.works.iter().enumerate() {
                let work_id = Value::Integer(row_id(cidx, w_ord as u64));
                for r in &w.references {
                    ordinal(
                        &mut out,
                        vec![
                            work_id.clone(),
                            opt_text(&r.doi),
                            opt_text(&r.unstructured),
                            opt_int(&r.year),
                        ],
                    );
                }
            }
        }
        "work_funders" => {
            for (w_ord, w) in records.works.iter().enumerate() {
                let work_id = Value::Integer(row_id(cidx, w_ord as u64));
                for f in &w.funders {
                    ordinal(
                        &mut out,
                        vec![work_id.clone(), text(&f.name), opt_text(&f.doi)],
                    );
                }
            }
        }
        "funder_awards" => {
            let mut funder_ord = 0u64;
            for w in &records.works {
                for f in &w.funders {
                    let funder_id = Value::Integer(row_id(cidx, funder_ord));
                    funder_ord += 1;
                    for award in &f.awards {
                        ordinal(&mut out, vec![funder_id.clone(), text(award)]);
                    }
                }
            }
        }
        "work_subjects" => {
            for (w_ord, w) in records.works.iter().enumerate() {
                let work_id = Value::Integer(row_id(cidx, w_ord as u64));
                for s in &w.subjects {
                    ordinal(&mut out, vec![work_id.clone(), text(s)]);
                }
            }
        }
        "work_links" => {
            for (w_ord, w) in records.works.iter().enumerate() {
                let work_id = Value::Integer(row_id(cidx, w_ord as u64));
                for url in &w.links {
                    ordinal(&mut out, vec![work_id.clone(), text(url)]);
                }
            }
        }
        _ => {}
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sources::AuthorRecord;

    #[test]
    fn ids_are_container_scoped() {
        assert_eq!(row_id(0, 0), 0);
        assert_eq!(row_id(0, 5), 5);
        assert_eq!(row_id(3, 7), 3 * (1i64 << 32) + 7);
    }

    #[test]
    fn author_rows_link_to_their_work() {
        let records = ContainerRecords {
            index: 2,
            works: vec![
                WorkRecord {
                    doi: "10.1/a".into(),
                    authors: vec![AuthorRecord::default(), AuthorRecord::default()],
                    ..WorkRecord::default()
                },
                WorkRecord {
                    doi: "10.1/b".into(),
                    authors: vec![AuthorRecord::default()],
                    ..WorkRecord::default()
                },
            ],
            warnings: 0,
        };
        let rows = table_rows("work_authors", &records);
        assert_eq!(rows.len(), 3);
        let base = 2 * (1i64 << 32);
        assert_eq!(rows[0].0, base);
        assert_eq!(rows[2].0, base + 2);
        // Third author belongs to the second work.
        assert_eq!(rows[2].1[2], Value::Integer(base + 1));
    }
}
