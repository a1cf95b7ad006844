//! Organization registry reading: a `.zip` archive containing one JSON
//! array of organization records.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use zip::read::ZipFile;
use zip::ZipArchive;

use super::jsonarray::JsonArrayFrames;
use super::OrgRecord;
use crate::error::{Error, Result};

/// An opened registry archive. [`OrgRegistry::records`] streams entries
/// without holding the decompressed document in memory.
pub struct OrgRegistry {
    path: PathBuf,
    archive: ZipArchive<BufReader<File>>,
}

impl OrgRegistry {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let archive = ZipArchive::new(BufReader::new(file))
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        if archive.is_empty() {
            return Err(Error::io(
                path,
                std::io::Error::new(std::io::ErrorKind::InvalidData, "empty zip archive"),
            ));
        }
        Ok(OrgRegistry {
            path: path.to_owned(),
            archive,
        })
    }

    pub fn records(&mut self) -> Result<OrgRecords<'_>> {
        let path = self.path.clone();
        let entry = self
            .archive
            .by_index(0)
            .map_err(|e| Error::io(&path, std::io::Error::other(e.to_string())))?;
        Ok(OrgRecords {
            path,
            frames: JsonArrayFrames::new(entry),
            warnings: 0,
        })
    }
}

/// Streaming iterator over registry records. Undecodable entries are
/// skipped and counted in `warnings`.
pub struct OrgRecords<'a> {
    path: PathBuf,
    frames: JsonArrayFrames<ZipFile<'a, BufReader<File>>>,
    pub warnings: u64,
}

impl Iterator for OrgRecords<'_> {
    type Item = Result<OrgRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let frame = match self.frames.next()? {
                Ok(f) => f,
                Err(e) => {
                    return Some(Err(Error::ContainerParse {
                        path: self.path.clone(),
                        offset: self.frames.bytes_read,
                        message: e.to_string(),
                    }))
                }
            };
            match org_from_slice(&frame) {
                Some(org) => return Some(Ok(org)),
                None => {
                    self.warnings += 1;
                    continue;
                }
            }
        }
    }
}

/// Read a whole registry eagerly; the second element counts skipped
/// records.
pub fn read_org_registry(path: &Path) -> Result<(Vec<OrgRecord>, u64)> {
    let mut registry = OrgRegistry::open(path)?;
    let mut records = registry.records()?;
    let mut out = Vec::new();
    for record in records.by_ref() {
        out.push(record?);
    }
    let warnings = records.warnings;
    Ok((out, warnings))
}

#[derive(Deserialize)]
struct RawOrg {
    id: String,
    name: String,
    #[serde(default)]
    acronyms: Vec<String>,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(default)]
    relationships: Vec<RawRelationship>,
    #[serde(default)]
    country: String,
}

#[derive(Deserialize)]
struct RawRelationship {
    #[serde(rename = "type")]
    kind: String,
    id: String,
}

fn org_from_slice(frame: &[u8]) -> Option<OrgRecord> {
    let raw: RawOrg = serde_json::from_slice(frame).ok()?;
    if raw.id.is_empty() || raw.name.is_empty() {
        return None;
    }
    let parent = raw
        .relationships
        .iter()
        .find(|r| r.kind == "Parent")
        .map(|r| r.id.clone());
    Some(OrgRecord {
        ror: raw.id,
        name: raw.name,
        acronyms: raw.acronyms,
        aliases: raw.aliases,
        parent,
        country: raw.country,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_record_with_parent() {
        let frame = br#"{"id":"https://ror.org/05gq02987","name":"Brown University",
            "acronyms":["BU"],"aliases":[],"country":"US",
            "relationships":[{"type":"Parent","id":"https://ror.org/0000"}]}"#;
        let org = org_from_slice(frame).unwrap();
        assert_eq!(org.ror, "https://ror.org/05gq02987");
        assert_eq!(org.parent.as_deref(), Some("https://ror.org/0000"));
        assert_eq!(org.acronyms, vec!["BU"]);
    }

    #[test]
    fn missing_id_is_skipped() {
        assert!(org_from_slice(br#"{"name":"X"}"#).is_none());
    }
}
