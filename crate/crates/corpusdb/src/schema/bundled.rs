//! The bundled table definitions.

use super::{ColumnSchema, SchemaGraph, SemanticKind, TableSchema};

fn key() -> ColumnSchema {
    ColumnSchema::new("id", SemanticKind::Key, false)
}

fn container_id() -> ColumnSchema {
    ColumnSchema::new("container_id", SemanticKind::Integer, false)
}

fn fk(name: &str, target: &str) -> ColumnSchema {
    ColumnSchema::new(
        name,
        SemanticKind::ForeignKey {
            target: target.to_owned(),
        },
        false,
    )
}

fn text(name: &str) -> ColumnSchema {
    ColumnSchema::new(name, SemanticKind::Text, true)
}

fn text_required(name: &str) -> ColumnSchema {
    ColumnSchema::new(name, SemanticKind::Text, false)
}

fn date_part(name: &str) -> ColumnSchema {
    ColumnSchema::new(name, SemanticKind::DatePart, true)
}

pub(super) fn bundled_schema() -> SchemaGraph {
    let t = |name, columns, parent: Option<&str>, cid: bool| {
        TableSchema::new(name, columns, parent, cid.then_some("container_id"))
            .expect("bundled schema is well-formed")
    };

    let tables = vec![
        // Container-sourced publication tables.
        t(
            "works",
            vec![
                key(),
                container_id(),
                text_required("doi"),
                text("title"),
                date_part("published_year"),
                date_part("published_month"),
                date_part("published_day"),
                text("container_title"),
                text("issn_print"),
                text("issn_electronic"),
                text("pages"),
                text("abstract"),
            ],
            None,
            true,
        ),
        t(
            "work_authors",
            vec![
                key(),
                container_id(),
                fk("work_id", "works"),
                text("given"),
                text("family"),
                text("orcid"),
            ],
            Some("works"),
            true,
        ),
        t(
            "author_affiliations",
            vec![
                key(),
                container_id(),
                fk("author_id", "work_authors"),
                text_required("name"),
            ],
            Some("work_authors"),
            true,
        ),
        t(
            "work_references",
            vec![
                key(),
                container_id(),
                fk("work_id", "works"),
                text("doi"),
                text("unstructured"),
                date_part("year"),
            ],
            Some("works"),
            true,
        ),
        t(
            "work_funders",
            vec![
                key(),
                container_id(),
                fk("work_id", "works"),
                text_required("name"),
                text("doi"),
            ],
            Some("works"),
            true,
        ),
        t(
            "funder_awards",
            vec![
                key(),
                container_id(),
                fk("funder_id", "work_funders"),
                text_required("name"),
            ],
            Some("work_funders"),
            true,
        ),
        t(
            "work_subjects",
            vec![
                key(),
                container_id(),
                fk("work_id", "works"),
                text_required("name"),
            ],
            Some("works"),
            true,
        ),
        t(
            "work_links",
            vec![
                key(),
                container_id(),
                fk("work_id", "works"),
                text_required("url"),
            ],
            Some("works"),
            true,
        ),
        // Person archive tables.
        t(
            "persons",
            vec![key(), text_required("orcid"), text("given"), text("family")],
            None,
            false,
        ),
        t(
            "person_employments",
            vec![
                key(),
                fk("person_id", "persons"),
                text_required("organization"),
                text("ror"),
                text("start_date"),
                text("end_date"),
            ],
            Some("persons"),
            false,
        ),
        t(
            "person_educations",
            vec![
                key(),
                fk("person_id", "persons"),
                text_required("organization"),
                text("ror"),
                text("start_date"),
                text("end_date"),
            ],
            Some("persons"),
            false,
        ),
        t(
            "person_works",
            vec![key(), fk("person_id", "persons"), text_required("doi")],
            Some("persons"),
            false,
        ),
        // Organization registry tables.
        t(
            "research_organizations",
            vec![key(), text_required("ror"), text_required("name"), text("country")],
            None,
            false,
        ),
        t(
            "org_acronyms",
            vec![
                key(),
                fk("org_id", "research_organizations"),
                text_required("acronym"),
            ],
            Some("research_organizations"),
            false,
        ),
        t(
            "org_aliases",
            vec![
                key(),
                fk("org_id", "research_organizations"),
                text_required("alias"),
            ],
            Some("research_organizations"),
            false,
        ),
        t(
            "org_relationships",
            vec![
                key(),
                fk("org_id", "research_organizations"),
                text_required("type"),
                text_required("related_ror"),
            ],
            Some("research_organizations"),
            false,
        ),
        // Flat reference tables.
        t(
            "journal_names",
            vec![key(), text_required("title")],
            None,
            false,
        ),
        t(
            "journal_issns",
            vec![
                key(),
                fk("journal_id", "journal_names"),
                text_required("issn"),
                text_required("issn_type"),
            ],
            Some("journal_names"),
            false,
        ),
        t(
            "funder_names",
            vec![key(), text_required("uri"), text_required("name")],
            None,
            false,
        ),
        t(
            "open_access_journals",
            vec![key(), text_required("title"), text("issn")],
            None,
            false,
        ),
        t(
            "asjc_codes",
            vec![
                key(),
                ColumnSchema::new("code", SemanticKind::Integer, false),
                text_required("description"),
            ],
            None,
            false,
        ),
        // Affiliation-to-organization links written by the matcher.
        t(
            "affiliation_links",
            vec![
                key(),
                fk("affiliation_id", "author_affiliations"),
                text_required("ror"),
            ],
            Some("author_affiliations"),
            false,
        ),
    ];
    SchemaGraph::new(tables).expect("bundled schema is well-formed")
}
