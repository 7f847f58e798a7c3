//! On-disk dataset layout.
//!
//! A dataset directory holds:
//!
//! * `edges.csv`: header `t,u,v`, one row per undirected edge with `u < v`,
//!   sorted by `(t, u, v)`, `t` 0-indexed.
//! * `manifest.json`: [`Manifest`], including a SHA-256 of `edges.csv`.
//! * `events.csv` (optional): header `u,v,t`, both orientations of every
//!   edge, grouped by ascending `t`.
//!
//! All files are UTF-8 with LF line endings. Writing the same graph twice
//! produces identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, Pair, Snapshot};
use crate::metrics::{Counts, MetricReport, PairScores, TimestepScore};
use crate::splits::SplitIndex;
use crate::tasks::{Task, TaskSpec, CE_MEMORY_NODE, LR_SOURCE_NODE, LR_TARGET_NODE};

pub const SCHEMA_VERSION: u32 = 1;
pub const EDGES_FILE: &str = "edges.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "metrics_report.csv";
pub const GENERATOR: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRanges {
    pub train: [usize; 2],
    pub val: [usize; 2],
    pub test: [usize; 2],
}

impl From<&SplitIndex> for SplitRanges {
    fn from(s: &SplitIndex) -> Self {
        SplitRanges {
            train: [0, s.val_start()],
            val: [s.val_start(), s.test_start()],
            test: [s.test_start(), s.total()],
        }
    }
}

impl SplitRanges {
    fn to_index(&self) -> Result<SplitIndex> {
        let contiguous =
            self.train[0] == 0 && self.train[1] == self.val[0] && self.val[1] == self.test[0];
        if !contiguous {
            return Err(Error::InvalidSplit(format!(
                "non-contiguous ranges {self:?}"
            )));
        }
        SplitIndex::new(self.val[0], self.test[0], self.test[1])
    }
}

/// Fixed node ids with a special role in the task family.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRoles {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub memory: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<u32>,
}

impl NodeRoles {
    pub fn for_spec(spec: &TaskSpec) -> Self {
        match spec.task {
            Task::CauseEffect { .. } => NodeRoles {
                memory: Some(CE_MEMORY_NODE),
                ..Default::default()
            },
            Task::LongRange { .. } => NodeRoles {
                source: Some(LR_SOURCE_NODE),
                target: Some(LR_TARGET_NODE),
                ..Default::default()
            },
            _ => NodeRoles::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub spec: TaskSpec,
    pub num_nodes: u32,
    pub num_timesteps: usize,
    /// Always `"zero-based"`.
    pub time_indexing: String,
    pub split: SplitRanges,
    pub undirected_edge_count: u64,
    pub directed_edge_count: u64,
    pub roles: NodeRoles,
    pub edges_sha256: String,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetStats {
    pub num_nodes: u32,
    pub directed_edge_count: u64,
    pub num_timesteps: usize,
    pub per_timestep: Vec<u64>,
}

pub fn compute_stats(g: &DynamicGraph) -> DatasetStats {
    let per_timestep: Vec<u64> = g.snapshots().iter().map(|s| s.num_edges() as u64).collect();
    DatasetStats {
        num_nodes: g.num_nodes(),
        directed_edge_count: 2 * per_timestep.iter().sum::<u64>(),
        num_timesteps: g.num_timesteps(),
        per_timestep,
    }
}

fn csv_writer(buf: &mut Vec<u8>) -> csv::Writer<&mut Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(buf)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn edges_bytes(g: &DynamicGraph) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let path = Path::new(EDGES_FILE);
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["t", "u", "v"]).map_err(csv_err(path))?;
        for (t, s) in g.snapshots().iter().enumerate() {
            for p in s.edges() {
                w.serialize((t, p.lo(), p.hi())).map_err(csv_err(path))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    Ok(buf)
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes `edges.csv` and `manifest.json` into `dir`, creating it if needed.
pub fn export_dataset(g: &DynamicGraph, split: &SplitIndex, dir: &Path) -> Result<Manifest> {
    if split.total() != g.num_timesteps() {
        return Err(Error::InvalidSplit(format!(
            "split covers {} timesteps, graph has {}",
            split.total(),
            g.num_timesteps()
        )));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let edges = edges_bytes(g)?;
    write_file(&dir.join(EDGES_FILE), &edges)?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        spec: g.spec().clone(),
        num_nodes: g.num_nodes(),
        num_timesteps: g.num_timesteps(),
        time_indexing: "zero-based".into(),
        split: split.into(),
        undirected_edge_count: g.undirected_edge_count(),
        directed_edge_count: g.directed_edge_count(),
        roles: NodeRoles::for_spec(g.spec()),
        edges_sha256: sha256_hex(&edges),
        generator: GENERATOR.into(),
    };
    let path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    json.push('\n');
    write_file(&path, json.as_bytes())?;
    Ok(manifest)
}

/// Writes `events.csv` and returns its row count.
pub fn export_ctdg_events(g: &DynamicGraph, dir: &Path) -> Result<u64> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(EVENTS_FILE);
    let mut buf = Vec::new();
    let mut rows = 0u64;
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(["u", "v", "t"]).map_err(csv_err(&path))?;
        for (t, s) in g.snapshots().iter().enumerate() {
            for p in s.edges() {
                w.serialize((p.lo(), p.hi(), t)).map_err(csv_err(&path))?;
                w.serialize((p.hi(), p.lo(), t)).map_err(csv_err(&path))?;
                rows += 2;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    write_file(&path, &buf)?;
    Ok(rows)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::schema(path, "file is missing"),
        _ => Error::io(path, e),
    })
}

fn check_header(path: &Path, rdr: &mut csv::Reader<&[u8]>, want: &[&str]) -> Result<()> {
    let header = rdr.headers().map_err(csv_err(path))?;
    if header.iter().ne(want.iter().copied()) {
        return Err(Error::schema(
            path,
            format!(
                "header {:?}, expected {:?}",
                header.iter().collect::<Vec<_>>(),
                want
            ),
        ));
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = read_file(&path)?;
    let json_err = |source| Error::Json {
        path: path.clone(),
        source,
    };
    let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(json_err)?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::schema(&path, "missing schema_version"))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::SchemaVersion {
            found: version as u32,
            expected: SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(json_err)
}

fn mismatch(field: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::StatsMismatch {
        field,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

/// Loads and fully validates a dataset directory.
pub fn import_dataset(dir: &Path) -> Result<(DynamicGraph, SplitIndex, Manifest)> {
    let manifest = read_manifest(dir)?;
    let mpath = dir.join(MANIFEST_FILE);
    manifest.spec.validate()?;
    if manifest.time_indexing != "zero-based" {
        return Err(Error::schema(
            &mpath,
            "time_indexing must be \"zero-based\"",
        ));
    }
    if manifest.num_nodes != manifest.spec.num_nodes() {
        return Err(mismatch(
            "num_nodes",
            manifest.spec.num_nodes(),
            manifest.num_nodes,
        ));
    }
    let expected_t = manifest.spec.num_timesteps()?;
    if manifest.num_timesteps != expected_t {
        return Err(mismatch(
            "num_timesteps",
            expected_t,
            manifest.num_timesteps,
        ));
    }
    let split = manifest.split.to_index()?;
    if split.total() != manifest.num_timesteps {
        return Err(mismatch("split", manifest.num_timesteps, split.total()));
    }
    if manifest.roles != NodeRoles::for_spec(&manifest.spec) {
        return Err(Error::schema(
            &mpath,
            "node roles do not match the task family",
        ));
    }

    let epath = dir.join(EDGES_FILE);
    let bytes = read_file(&epath)?;
    let digest = sha256_hex(&bytes);
    if digest != manifest.edges_sha256 {
        return Err(mismatch("edges_sha256", &manifest.edges_sha256, digest));
    }

    let num_nodes = manifest.num_nodes;
    let total = manifest.num_timesteps;
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    check_header(&epath, &mut rdr, &["t", "u", "v"])?;
    let mut layers: Vec<Vec<Pair>> = vec![Vec::new(); total];
    let mut last: Option<(usize, Pair)> = None;
    for (row, rec) in rdr.deserialize::<(usize, u32, u32)>().enumerate() {
        let (t, u, v) = rec.map_err(csv_err(&epath))?;
        let bad = |msg: String| Error::schema(&epath, format!("row {}: {msg}", row + 1));
        if t >= total {
            return Err(bad(format!("timestep {t} outside 0..{total}")));
        }
        if u >= v || v >= num_nodes {
            return Err(bad(format!("pair ({u}, {v}) is not u < v < {num_nodes}")));
        }
        let key = (t, Pair::ordered(u, v));
        if last.is_some_and(|prev| prev >= key) {
            return Err(bad("rows not strictly sorted by (t, u, v)".into()));
        }
        last = Some(key);
        layers[t].push(key.1);
    }
    let snapshots = layers
        .into_iter()
        .map(|edges| Snapshot::from_sorted(num_nodes, edges))
        .collect();
    let graph = DynamicGraph::new(manifest.spec.clone(), snapshots)?;

    if graph.undirected_edge_count() != manifest.undirected_edge_count {
        return Err(mismatch(
            "undirected_edge_count",
            manifest.undirected_edge_count,
            graph.undirected_edge_count(),
        ));
    }
    if graph.directed_edge_count() != manifest.directed_edge_count {
        return Err(mismatch(
            "directed_edge_count",
            manifest.directed_edge_count,
            graph.directed_edge_count(),
        ));
    }
    Ok((graph, split, manifest))
}

/// Regroups `events.csv` rows into per-timestep snapshots.
pub fn read_ctdg_events(dir: &Path, num_nodes: u32, total: usize) -> Result<Vec<Snapshot>> {
    let path = dir.join(EVENTS_FILE);
    let bytes = read_file(&path)?;
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    check_header(&path, &mut rdr, &["u", "v", "t"])?;
    let mut layers: Vec<Vec<(u32, u32)>> = vec![Vec::new(); total];
    let mut last_t = 0;
    for rec in rdr.deserialize::<(u32, u32, usize)>() {
        let (u, v, t) = rec.map_err(csv_err(&path))?;
        if t >= total || t < last_t {
            return Err(Error::schema(
                &path,
                format!("timestep {t} out of order or range"),
            ));
        }
        last_t = t;
        layers[t].push((u, v));
    }
    layers
        .into_iter()
        .map(|pairs| Snapshot::from_pairs(num_nodes, pairs))
        .collect()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Renders a report: header `t,f1,is_changepoint`, one row per timestep,
/// then `# key,value` summary lines. F1 values use the shortest decimal
/// that round-trips.
pub fn render_report(report: &MetricReport) -> String {
    let mut out = String::from("t,f1,is_changepoint\n");
    for s in &report.per_timestep {
        out.push_str(&format!(
            "{},{},{}\n",
            s.t,
            s.f1,
            u8::from(s.is_changepoint)
        ));
    }
    out.push_str(&format!("# evaluated,{}\n", report.per_timestep.len()));
    out.push_str(&format!("# mean_all,{}\n", report.mean_all));
    out.push_str(&format!(
        "# mean_changepoints,{}\n",
        fmt_opt(report.mean_changepoints)
    ));
    out.push_str(&format!("# tp,{}\n", report.counts.tp));
    out.push_str(&format!("# fp,{}\n", report.counts.fp));
    out.push_str(&format!("# fn,{}\n", report.counts.fn_));
    if let Some(sd) = report.seed_std {
        out.push_str(&format!("# seed_std,{sd}\n# runs,{}\n", report.num_runs));
    }
    out
}

pub fn write_report(report: &MetricReport, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    write_file(path, render_report(report).as_bytes())
}

/// Parsed `metrics_report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFile {
    pub rows: Vec<(usize, f64, bool)>,
    pub summary: BTreeMap<String, String>,
}

impl ReportFile {
    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(|v| v.parse().ok())
    }
}

pub fn read_report(path: &Path) -> Result<ReportFile> {
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| Error::schema(path, "report is not UTF-8"))?;
    let mut lines = text.lines();
    if lines.next() != Some("t,f1,is_changepoint") {
        return Err(Error::schema(path, "bad report header"));
    }
    let mut rows = Vec::new();
    let mut summary = BTreeMap::new();
    for line in lines {
        let bad = || Error::schema(path, format!("bad report line {line:?}"));
        if let Some(kv) = line.strip_prefix("# ") {
            let (k, v) = kv.split_once(',').ok_or_else(bad)?;
            summary.insert(k.to_string(), v.to_string());
            continue;
        }
        let mut parts = line.split(',');
        let (Some(t), Some(f), Some(cp), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let cp = match cp {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        };
        rows.push((
            t.parse().map_err(|_| bad())?,
            f.parse().map_err(|_| bad())?,
            cp,
        ));
    }
    Ok(ReportFile { rows, summary })
}

#[derive(Debug, Deserialize)]
struct PredictionRow {
    t: usize,
    u: Option<u32>,
    v: Option<u32>,
    score: Option<f64>,
}

/// Reads a prediction file with header `t,u,v` or `t,u,v,score`.
///
/// Rows without a score column count as score 1. A row whose `u` and `v`
/// are both empty declares timestep `t` with no predicted pairs.
pub fn read_predictions(path: &Path) -> Result<BTreeMap<usize, PairScores>> {
    let bytes = read_file(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["t", "u", "v"] && header != ["t", "u", "v", "score"] {
        return Err(Error::schema(
            path,
            format!("header {header:?}, expected t,u,v or t,u,v,score"),
        ));
    }
    let mut out: BTreeMap<usize, PairScores> = BTreeMap::new();
    for (row, rec) in rdr.deserialize::<PredictionRow>().enumerate() {
        let r = rec.map_err(|e| Error::Predictions(format!("row {}: {e}", row + 1)))?;
        let entry = out.entry(r.t).or_insert_with(|| PairScores::new(r.t));
        match (r.u, r.v) {
            (None, None) => {}
            (Some(u), Some(v)) => {
                let pair = Pair::new(u, v)
                    .map_err(|e| Error::Predictions(format!("row {}: {e}", row + 1)))?;
                entry.insert(pair, r.score.unwrap_or(1.0))?;
            }
            _ => {
                return Err(Error::Predictions(format!(
                    "row {}: u and v must both be set or both empty",
                    row + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Writes predictions in the format [`read_predictions`] accepts.
pub fn write_predictions<'a, I>(path: &Path, preds: I) -> Result<()>
where
    I: IntoIterator<Item = &'a PairScores>,
{
    let mut buf = Vec::new();
    writeln!(buf, "t,u,v,score").map_err(|e| Error::io(path, e))?;
    for p in preds {
        if p.is_empty() {
            writeln!(buf, "{},,,", p.timestep).map_err(|e| Error::io(path, e))?;
        }
        for (pair, s) in p.iter() {
            writeln!(buf, "{},{},{},{}", p.timestep, pair.lo(), pair.hi(), s)
                .map_err(|e| Error::io(path, e))?;
        }
    }
    write_file(path, &buf)
}

/// `dir/metrics_report.csv`.
pub fn default_report_path(dir: &Path) -> PathBuf {
    dir.join(REPORT_FILE)
}

/// Rebuilds a [`MetricReport`] from a parsed file; counts are not stored
/// per row, so only the totals survive.
pub fn report_from_file(file: &ReportFile) -> Result<MetricReport> {
    let scores = file
        .rows
        .iter()
        .map(|&(t, f1, cp)| TimestepScore {
            t,
            f1,
            counts: Counts::default(),
            is_changepoint: cp,
        })
        .collect();
    let mut r = MetricReport::from_scores(scores)?;
    let get = |k: &str| {
        file.summary
            .get(k)
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    };
    r.counts = Counts {
        tp: get("tp"),
        fp: get("fp"),
        fn_: get("fn"),
    };
    Ok(r)
}
