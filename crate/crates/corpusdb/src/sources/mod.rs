//! Physical data sources: gzip-JSON container sets, tar.gz XML person
//! archives, zipped JSON organization registries, and CSV reference
//! tables. Everything is read in bounded-memory streams; at no point is
//! more than one container's decompressed content held per reader.

mod cache;
mod crossref;
mod csvfile;
mod jsonarray;
mod org;
mod person;
mod sample;

pub use cache::{ContainerRecords, ContainerSource};
pub use crossref::read_container;
pub use csvfile::{read_csv_table, read_journals_csv, JournalRow};
pub use org::read_org_registry;
pub use person::read_person_archive;
pub use sample::{sample_accept, sample_unit};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// One compressed container file inside a set.
#[derive(Debug, Clone)]
pub struct Container {
    /// Position of the container within the enumerated set.
    pub index: usize,
    pub path: PathBuf,
}

/// An enumerable set of compressed containers, the unit of streaming,
/// sampling, and join locality.
#[derive(Debug, Clone)]
pub struct ContainerSet {
    root: PathBuf,
    containers: Vec<Container>,
}

impl ContainerSet {
    /// List container files (`<n>.json.gz`) under `root` in lexicographic
    /// order and assign dense indices. Contents are not read.
    pub fn enumerate(root: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(root).map_err(|e| Error::io(root, e))?;
        let mut names: Vec<String> = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(root, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if is_container_name(&name) {
                names.push(name);
            }
        }
        if names.is_empty() {
            return Err(Error::EmptyContainerSet(root.to_owned()));
        }
        names.sort();
        let containers = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| Container {
                index,
                path: root.join(name),
            })
            .collect();
        Ok(ContainerSet {
            root: root.to_owned(),
            containers,
        })
    }

    /// A synthetic set with the given number of containers and no backing
    /// files; usable only for sampling.
    pub fn synthetic(len: usize) -> Self {
        ContainerSet {
            root: PathBuf::new(),
            containers: (0..len)
                .map(|index| Container {
                    index,
                    path: PathBuf::new(),
                })
                .collect(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.containers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.containers.is_empty()
    }

    pub fn containers(&self) -> &[Container] {
        &self.containers
    }

    pub fn container(&self, index: usize) -> Result<&Container> {
        self.containers
            .iter()
            .find(|c| c.index == index)
            .ok_or_else(|| Error::Domain(format!("container index {index} not in set")))
    }

    /// Keep each container independently with the given probability,
    /// deterministically in (probability, seed). Retained containers keep
    /// their original indices.
    pub fn sample(&self, probability: f64, seed: u64) -> Result<ContainerSet> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::Domain(format!(
                "sampling probability {probability} outside [0, 1]"
            )));
        }
        Ok(ContainerSet {
            root: self.root.clone(),
            containers: self
                .containers
                .iter()
                .filter(|c| sample_accept(seed, c.index as u64, probability))
                .cloned()
                .collect(),
        })
    }
}

fn is_container_name(name: &str) -> bool {
    match name.strip_suffix(".json.gz") {
        Some(stem) => !stem.is_empty() && stem.bytes().all(|b| b.is_ascii_digit()),
        None => false,
    }
}

/// A publication record with its nested authors, references, funders,
/// subjects, and text-mining links.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WorkRecord {
    pub doi: String,
    pub title: String,
    pub published_year: Option<i64>,
    pub published_month: Option<i64>,
    pub published_day: Option<i64>,
    pub container_title: String,
    pub issns: Vec<IssnEntry>,
    /// Raw page field, empty when absent.
    pub pages: String,
    pub abstract_text: Option<String>,
    pub authors: Vec<AuthorRecord>,
    pub references: Vec<ReferenceRecord>,
    pub funders: Vec<FunderRecord>,
    pub subjects: Vec<String>,
    pub links: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IssnEntry {
    pub value: String,
    pub kind: IssnKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssnKind {
    Electronic,
    Print,
    Alternative,
}

impl IssnKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            IssnKind::Electronic => "electronic",
            IssnKind::Print => "print",
            IssnKind::Alternative => "alternative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "electronic" => Some(IssnKind::Electronic),
            "print" => Some(IssnKind::Print),
            "alternative" => Some(IssnKind::Alternative),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AuthorRecord {
    pub given: String,
    pub family: String,
    /// Bare checksummed identifier; URL prefixes are stripped and
    /// checksum-invalid values dropped at parse time.
    pub orcid: Option<String>,
    pub affiliations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReferenceRecord {
    pub doi: Option<String>,
    pub unstructured: Option<String>,
    pub year: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FunderRecord {
    pub name: String,
    pub doi: Option<String>,
    pub awards: Vec<String>,
}

/// One person from a person archive.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PersonRecord {
    pub orcid: String,
    pub given: String,
    pub family: String,
    pub employments: Vec<AffiliationSpell>,
    pub educations: Vec<AffiliationSpell>,
    /// DOIs of the person's works.
    pub works: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AffiliationSpell {
    pub organization: String,
    pub ror: Option<String>,
    pub start_date: Option<String>,
    pub end_date: Option<String>,
}

/// One organization from a registry.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrgRecord {
    pub ror: String,
    pub name: String,
    pub acronyms: Vec<String>,
    pub aliases: Vec<String>,
    pub parent: Option<String>,
    pub country: String,
}

/// Strip URL prefixes and validate the 16-digit-with-dashes checksummed
/// identifier format. Returns the bare identifier.
pub fn normalize_orcid(raw: &str) -> Option<String> {
    let bare = raw
        .trim()
        .trim_start_matches("https://orcid.org/")
        .trim_start_matches("http://orcid.org/");
    let bytes = bare.as_bytes();
    if bytes.len() != 19 {
        return None;
    }
    let mut digits = [0u8; 16];
    let mut n = 0;
    for (i, b) in bytes.iter().enumerate() {
        match i {
            4 | 9 | 14 => {
                if *b != b'-' {
                    return None;
                }
            }
            _ => {
                if b.is_ascii_digit() {
                    digits[n] = b - b'0';
                } else if i == 18 && (*b == b'X' || *b == b'x') {
                    digits[n] = 10;
                } else {
                    return None;
                }
                n += 1;
            }
        }
    }
    // ISO 7064 11-2 check digit over the first 15 digits.
    let mut total: u32 = 0;
    for d in &digits[..15] {
        total = (total + u32::from(*d)) * 2;
    }
    let check = (12 - total % 11) % 11;
    if check != u32::from(digits[15]) {
        return None;
    }
    Some(bare.to_ascii_uppercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orcid_checksum() {
        assert_eq!(
            normalize_orcid("0000-0002-1825-0097"),
            Some("0000-0002-1825-0097".to_string())
        );
        assert_eq!(
            normalize_orcid("https://orcid.org/0000-0002-1825-0097"),
            Some("0000-0002-1825-0097".to_string())
        );
        // Flipped check digit.
        assert_eq!(normalize_orcid("0000-0002-1825-0098"), None);
        assert_eq!(normalize_orcid("not-an-orcid"), None);
        // X check digit.
        assert_eq!(
            normalize_orcid("0000-0002-1694-233X"),
            Some("0000-0002-1694-233X".to_string())
        );
    }

    #[test]
    fn container_names() {
        assert!(is_container_name("0.json.gz"));
        assert!(is_container_name("26809.json.gz"));
        assert!(!is_container_name("works.json.gz"));
        assert!(!is_container_name("1.json"));
        assert!(!is_container_name(".json.gz"));
    }

    #[test]
    fn synthetic_sets_sample_without_files() {
        let set = ContainerSet::synthetic(100);
        assert_eq!(set.len(), 100);
        let sub = set.sample(0.5, 7).unwrap();
        assert!(sub.len() < 100 && !sub.is_empty());
    }
}
