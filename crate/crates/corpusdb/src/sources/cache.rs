//! Shared container source with a small most-recently-used cache of
//! parsed containers. The populator and the direct-query engine revisit
//! the same container once per table; caching the parsed content turns
//! those revisits into memory reads.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use super::crossref::parse_container_file;
use super::{ContainerSet, WorkRecord};
use crate::error::Result;

/// Environment variable overriding the cache capacity (parsed containers).
pub const CACHE_ENV: &str = "CORPUSDB_CACHE";

/// A parsed container retained in memory.
#[derive(Debug)]
pub struct ContainerRecords {
    pub index: usize,
    pub works: Vec<WorkRecord>,
    /// Malformed records skipped while parsing this container.
    pub warnings: u64,
}

/// Thread-safe reader over a [`ContainerSet`] with an MRU cache.
pub struct ContainerSource {
    set: ContainerSet,
    capacity: usize,
    cache: Mutex<VecDeque<Arc<ContainerRecords>>>,
    warnings: AtomicU64,
}

impl ContainerSource {
    /// Cache capacity comes from `CORPUSDB_CACHE` when set, else 1.
    pub fn new(set: ContainerSet) -> Self {
        let capacity = std::env::var(CACHE_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|v| *v > 0)
            .unwrap_or(1);
        Self::with_capacity(set, capacity)
    }

    pub fn with_capacity(set: ContainerSet, capacity: usize) -> Self {
        ContainerSource {
            set,
            capacity: capacity.max(1),
            cache: Mutex::new(VecDeque::new()),
            warnings: AtomicU64::new(0),
        }
    }

    pub fn set(&self) -> &ContainerSet {
        &self.set
    }

    /// Parsed records of one container, from cache when warm.
    pub fn records(&self, index: usize) -> Result<Arc<ContainerRecords>> {
        {
            let mut cache = self.cache.lock().expect("container cache");
            if let Some(pos) = cache.iter().position(|c| c.index == index) {
                let hit = cache.remove(pos).expect("present");
                cache.push_front(Arc::clone(&hit));
                return Ok(hit);
            }
        }
        let container = self.set.container(index)?;
        let parsed = parse_container_file(&container.path)?;
        self.warnings.fetch_add(parsed.warnings, Ordering::Relaxed);
        let records = Arc::new(ContainerRecords {
            index,
            works: parsed.works,
            warnings: parsed.warnings,
        });
        let mut cache = self.cache.lock().expect("container cache");
        cache.push_front(Arc::clone(&records));
        while cache.len() > self.capacity {
            cache.pop_back();
        }
        Ok(records)
    }

    /// Total malformed-record warnings seen so far.
    pub fn warnings(&self) -> u64 {
        self.warnings.load(Ordering::Relaxed)
    }
}
