//! Command-line interface.
//!
//! Every run prints a reproducibility header to stderr (tool version,
//! seed, input digests) so that invocations can be documented and
//! repeated bit for bit. Primary outputs (reports, CSV rows) go to
//! stdout or the requested files. Exit codes: 0 success, 1 usage error,
//! 2 data error.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use corpusdb::error::Error;
use corpusdb::link;
use corpusdb::metrics;
use corpusdb::populate::{self, PopulateOptions, ReferencePaths};
use corpusdb::query;
use corpusdb::schema::{Attachment, Sampling, SchemaGraph, SliceSpec};
use corpusdb::sources::{ContainerSet, ContainerSource};

#[derive(Parser)]
#[command(name = "corpusdb", version, about = "Populate, query, link, and measure bibliographic metadata databases", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Populate a database with a slice of a container set.
    Populate(PopulateArgs),
    /// Populate person tables from a person archive.
    PopulatePersons(PopulatePersonsArgs),
    /// Populate reference tables (organizations, journals, funders,
    /// open-access journals, subject codes).
    PopulateRefs(PopulateRefsArgs),
    /// Run SQL directly over a container set.
    Query(QueryArgs),
    /// Match stored affiliations to organization identifiers.
    LinkRor { db: PathBuf },
    /// Rewrite affiliation links to ultimate parent organizations.
    LinkParent { db: PathBuf },
    /// Compute a metric over a populated database.
    Metric(MetricArgs),
    /// Execute SQL script files in order, one transaction per file.
    Run {
        db: PathBuf,
        #[arg(required = true)]
        scripts: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct PopulateArgs {
    db: PathBuf,
    /// Directory of numbered .json.gz containers.
    #[arg(long)]
    source: PathBuf,
    /// SQL boolean expression selecting publication records.
    #[arg(long = "row-expr")]
    row_expr: Option<String>,
    /// Comma-separated table.column / table.* selectors.
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Container inclusion probability in [0,1]; requires --seed.
    #[arg(long, requires = "seed")]
    sample: Option<f64>,
    /// Sampling seed; mandatory with --sample, no implicit default.
    #[arg(long, requires = "sample")]
    seed: Option<u64>,
    /// Attach an external database as name=path (repeatable).
    #[arg(long = "attach", value_parser = parse_attachment)]
    attachments: Vec<Attachment>,
    /// Rows per bulk-insert batch.
    #[arg(long = "batch-size", default_value_t = 1000)]
    batch_size: usize,
}

#[derive(Args)]
struct PopulatePersonsArgs {
    db: PathBuf,
    /// tar.gz archive of one XML document per person.
    #[arg(long)]
    archive: PathBuf,
    /// Load only persons whose identifier appears in work_authors.
    #[arg(long = "only-linked")]
    only_linked: bool,
}

#[derive(Args)]
struct PopulateRefsArgs {
    db: PathBuf,
    /// Organization registry (.zip of one JSON array).
    #[arg(long)]
    ror: Option<PathBuf>,
    /// Journals CSV (title,issn_print,issn_electronic,issn_alternative).
    #[arg(long)]
    journals: Option<PathBuf>,
    /// Funders CSV (uri,name).
    #[arg(long)]
    funders: Option<PathBuf>,
    /// Open-access journals CSV (title,issn).
    #[arg(long)]
    doaj: Option<PathBuf>,
    /// Subject classification CSV (code,description).
    #[arg(long)]
    asjc: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Directory of numbered .json.gz containers.
    #[arg(long)]
    source: PathBuf,
    /// SQL text, or a path to a file holding it.
    #[arg(long)]
    sql: String,
    /// Evaluate per container (required for multi-table queries).
    #[arg(long)]
    partition: bool,
    /// Write results to a CSV file instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MetricArgs {
    name: MetricName,
    db: PathBuf,
    /// Forward citation horizon in years (cd5).
    #[arg(long, default_value_t = 5)]
    horizon: u32,
    /// Worker threads (cd5).
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Census year (jif, h5-journal, h5-person).
    #[arg(long)]
    year: Option<i64>,
    /// Trailing window in years (h5-journal, h5-person).
    #[arg(long, default_value_t = 5)]
    window: i64,
    /// Focal work identifier (clustering).
    #[arg(long)]
    doi: Option<String>,
    /// Write rows to a CSV file instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricName {
    Cd5,
    Jif,
    #[value(name = "h5-journal")]
    H5Journal,
    #[value(name = "h5-person")]
    H5Person,
    Fields,
    Synthesis,
    Clustering,
}

fn parse_attachment(raw: &str) -> Result<Attachment, String> {
    let (name, path) = raw
        .split_once('=')
        .ok_or_else(|| "expected name=path".to_string())?;
    if name.is_empty() || path.is_empty() {
        return Err("expected name=path".to_string());
    }
    Ok(Attachment {
        name: name.to_owned(),
        path: PathBuf::from(path),
    })
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Populate(args) => {
            header(args.seed, &[("source", &args.source), ("db", &args.db)])?;
            let schema = SchemaGraph::bundled();
            let set = ContainerSet::enumerate(&args.source)?;
            let spec = SliceSpec {
                columns: args.columns.iter().cloned().collect::<BTreeSet<_>>(),
                row_expression: args.row_expr.clone(),
                sampling: match (args.sample, args.seed) {
                    (Some(probability), Some(seed)) => Some(Sampling { probability, seed }),
                    _ => None,
                },
                attachments: args.attachments.clone(),
            };
            let options = PopulateOptions {
                batch_size: args.batch_size,
            };
            let report = populate::populate(&args.db, &set, &spec, &schema, &options)?;
            for line in report.lines() {
                println!("{line}");
            }
            Ok(())
        }
        Command::PopulatePersons(args) => {
            header(None, &[("archive", &args.archive), ("db", &args.db)])?;
            let report = populate::populate_persons(&args.db, &args.archive, args.only_linked)?;
            for line in report.lines() {
                println!("{line}");
            }
            Ok(())
        }
        Command::PopulateRefs(args) => {
            let mut inputs: Vec<(&str, &Path)> = vec![("db", &args.db)];
            for (name, path) in [
                ("ror", &args.ror),
                ("journals", &args.journals),
                ("funders", &args.funders),
                ("doaj", &args.doaj),
                ("asjc", &args.asjc),
            ] {
                if let Some(p) = path {
                    inputs.push((name, p));
                }
            }
            header(None, &inputs)?;
            let paths = ReferencePaths {
                org_registry: args.ror,
                journals: args.journals,
                funders: args.funders,
                open_access: args.doaj,
                asjc: args.asjc,
            };
            let report = populate::populate_reference_tables(&args.db, &paths)?;
            for line in report.lines() {
                println!("{line}");
            }
            Ok(())
        }
        Command::Query(args) => {
            header(None, &[("source", &args.source)])?;
            let sql = read_sql_argument(&args.sql)?;
            let set = ContainerSet::enumerate(&args.source)?;
            let source = Arc::new(ContainerSource::new(set));
            match &args.csv {
                Some(out) => {
                    let rows = query::query_to_csv(&source, &sql, args.partition, out)?;
                    eprintln!("{rows} rows written to {}", out.display());
                }
                None => {
                    let mut wrote_header = false;
                    let warnings =
                        query::query_for_each(&source, &sql, args.partition, |columns, row| {
                            if !wrote_header {
                                println!("{}", columns.join(","));
                                wrote_header = true;
                            }
                            let rendered: Vec<String> =
                                row.iter().map(query::value_to_csv).collect();
                            println!("{}", rendered.join(","));
                            Ok(())
                        })?;
                    for w in warnings {
                        eprintln!("warning: {w}");
                    }
                }
            }
            Ok(())
        }
        Command::LinkRor { db } => {
            header(None, &[("db", &db)])?;
            let conn = rusqlite::Connection::open(&db)?;
            let orgs = link::org_records_from_db(&conn)?;
            let automaton = link::build_automaton(orgs)?;
            let written = link::match_affiliations(&conn, &automaton)?;
            println!("affiliation links written: {written}");
            println!("patterns: {} kept, {} pruned", automaton.entries().len(), automaton.pruned().len());
            Ok(())
        }
        Command::LinkParent { db } => {
            header(None, &[("db", &db)])?;
            let conn = rusqlite::Connection::open(&db)?;
            let changed = link::propagate_to_parent(&conn)?;
            println!("links rewritten to parents: {changed}");
            Ok(())
        }
        Command::Metric(args) => run_metric(args),
        Command::Run { db, scripts } => {
            let mut inputs: Vec<(&str, &Path)> = vec![("db", &db)];
            for s in &scripts {
                inputs.push(("script", s));
            }
            header(None, &inputs)?;
            let logs = query::run_script_set(&db, &scripts)?;
            for log in logs {
                println!(
                    "{}: {} statements, {} rows, {:.3}s",
                    log.script.display(),
                    log.statements,
                    log.rows,
                    log.elapsed.as_secs_f64()
                );
            }
            Ok(())
        }
    }
}

fn run_metric(args: MetricArgs) -> Result<(), Error> {
    header(None, &[("db", &args.db)])?;
    let conn = rusqlite::Connection::open(&args.db)?;
    let mut writer = CsvSink::open(args.csv.as_deref())?;
    match args.name {
        MetricName::Cd5 => {
            let graph = metrics::build_graph(&conn)?;
            eprintln!(
                "graph: {} nodes, {} dangling references",
                graph.node_count(),
                graph.dangling_references
            );
            let results = metrics::cd_index_all(&graph, args.horizon, args.workers)?;
            writer.row(&["doi", "cd", "n"])?;
            for r in results {
                writer.row(&[&r.doi, &r.cd.to_string(), &r.n.to_string()])?;
            }
        }
        MetricName::Jif => {
            let year = require_year(args.year)?;
            let report = metrics::impact_factor(&conn, year)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            writer.row(&["journal", "issns", "citations", "citable_items", "jif"])?;
            for r in report.rows {
                writer.row(&[
                    &r.journal,
                    &r.issns.join("|"),
                    &r.citations.to_string(),
                    &r.citable_items.to_string(),
                    &r.jif.to_string(),
                ])?;
            }
        }
        MetricName::H5Journal | MetricName::H5Person => {
            let year = require_year(args.year)?;
            let rows = match args.name {
                MetricName::H5Journal => metrics::h5_by_journal(&conn, year, args.window)?,
                _ => metrics::h5_by_person(&conn, year, args.window)?,
            };
            writer.row(&["key", "h"])?;
            for (key, h) in rows {
                writer.row(&[&key, &h.to_string()])?;
            }
        }
        MetricName::Fields => {
            let rows = metrics::field_pair_stats(&conn)?;
            writer.row(&[
                "field_a",
                "field_b",
                "citations_ab",
                "citations_ba",
                "strength",
                "fundamentalness_of_a",
            ])?;
            for s in rows {
                writer.row(&[
                    &s.field_a.to_string(),
                    &s.field_b.to_string(),
                    &s.citations_ab.to_string(),
                    &s.citations_ba.to_string(),
                    &s.strength.to_string(),
                    &s.fundamentalness_of_a.to_string(),
                ])?;
            }
        }
        MetricName::Synthesis => {
            let mut stmt = conn.prepare(
                "SELECT doi, published_year, title FROM works WHERE title IS NOT NULL ORDER BY id",
            )?;
            let mut rows = stmt.query([])?;
            writer.row(&["doi", "published_year", "category"])?;
            let mut totals: std::collections::BTreeMap<&'static str, u64> = Default::default();
            while let Some(row) = rows.next()? {
                let doi: String = row.get(0)?;
                let year: Option<i64> = row.get(1)?;
                let title: String = row.get(2)?;
                let category = metrics::classify_title(&title);
                if category == metrics::TitleCategory::None {
                    continue;
                }
                *totals.entry(category.label()).or_default() += 1;
                writer.row(&[
                    &doi,
                    &year.map(|y| y.to_string()).unwrap_or_default(),
                    category.label(),
                ])?;
            }
            for (label, count) in totals {
                eprintln!("{label}: {count}");
            }
        }
        MetricName::Clustering => {
            let doi = args.doi.ok_or_else(|| {
                Error::Usage("metric clustering requires --doi <focal work>".into())
            })?;
            let graph = metrics::build_graph(&conn)?;
            let node = graph
                .node_by_doi(&doi)
                .ok_or_else(|| Error::Domain(format!("work {doi} not in citation graph")))?;
            let coefficient = metrics::clustering_sample(&graph, node)?;
            writer.row(&["doi", "clustering"])?;
            writer.row(&[&doi, &coefficient.to_string()])?;
        }
    }
    writer.finish()
}

fn require_year(year: Option<i64>) -> Result<i64, Error> {
    year.ok_or_else(|| Error::Usage("this metric requires --year".into()))
}

/// CSV rows to a file (RFC 4180, CRLF) or stdout.
enum CsvSink {
    File(csv::Writer<std::fs::File>),
    Stdout,
}

impl CsvSink {
    fn open(path: Option<&Path>) -> Result<Self, Error> {
        match path {
            Some(p) => {
                let file = std::fs::File::create(p).map_err(|e| Error::io(p, e))?;
                Ok(CsvSink::File(
                    csv::WriterBuilder::new()
                        .terminator(csv::Terminator::CRLF)
                        .from_writer(file),
                ))
            }
            None => Ok(CsvSink::Stdout),
        }
    }

    fn row(&mut self, fields: &[&str]) -> Result<(), Error> {
        match self {
            CsvSink::File(w) => w
                .write_record(fields)
                .map_err(|e| Error::Usage(format!("cannot write CSV: {e}"))),
            CsvSink::Stdout => {
                println!("{}", fields.join(","));
                Ok(())
            }
        }
    }

    fn finish(self) -> Result<(), Error> {
        if let CsvSink::File(mut w) = self {
            w.flush()
                .map_err(|e| Error::Usage(format!("cannot flush CSV: {e}")))?;
        }
        Ok(())
    }
}

/// `--sql` accepts a file path or literal SQL.
fn read_sql_argument(arg: &str) -> Result<String, Error> {
    let path = Path::new(arg);
    if path.exists() && path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
    } else {
        Ok(arg.to_owned())
    }
}

/// Reproducibility header on stderr: version, seed, input digests.
fn header(seed: Option<u64>, inputs: &[(&str, &Path)]) -> Result<(), Error> {
    eprintln!("# corpusdb {}", corpusdb::VERSION);
    match seed {
        Some(s) => eprintln!("# seed: {s}"),
        None => eprintln!("# seed: none"),
    }
    for (name, path) in inputs {
        match digest_path(path) {
            Ok(d) => eprintln!("# input {name} {}: sha256={d}", path.display()),
            Err(_) => eprintln!("# input {name} {}: (not yet present)", path.display()),
        }
    }
    Ok(())
}

/// Hex digest of a file, or of the sorted (name, digest) pairs of a
/// directory's files.
fn digest_path(path: &Path) -> std::io::Result<String> {
    let meta = std::fs::metadata(path)?;
    if meta.is_dir() {
        let mut names: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        let mut hasher = Sha256::new();
        for file in names {
            hasher.update(file.file_name().unwrap_or_default().to_string_lossy().as_bytes());
            hasher.update(digest_file(&file)?.as_bytes());
        }
        Ok(hex(&hasher.finalize()))
    } else {
        digest_file(path)
    }
}

fn digest_file(path: &Path) -> std::io::Result<String> {
    let mut file = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
