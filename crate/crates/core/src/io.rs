//! File formats.
//!
//! | File | Format |
//! |------|--------|
//! | embeddings | text; header `lang n d`, then `n` lines of `d` space-separated floats; `#` lines are comments |
//! | similarity matrix | CSV; first row and column are language codes |
//! | availability | CSV `language,count` |
//! | allocation | JSON object with sorted keys |
//! | dataset index | text, one example id per line; the file stem is the language |
//! | manifest | JSON Lines `{example_id, source_language, split}` in shuffled order |
//! | run results | CSV `task,target,budget,model,strategy,seed,metric,utilization` |
//! | comparison report | CSV `comparison,condition,n,delta,ci_low,ci_high,p,p_adjusted,d` |
//!
//! Reals are written in shortest round-trip form, so reading a file back
//! gives bit-identical values. All writers go through [`atomic_write`].

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::allocation::{AllocationVector, Entry, ReturnsCurve, Strategy, StrategyConfig};
use crate::error::{Error, Result};
use crate::manifest::{DatasetIndex, Manifest, Task};
use crate::similarity::{EmbeddingSet, SimilarityMatrix};
use crate::stats::{ComparisonReport, RunResult};

/// Writes `bytes` to a temporary file beside `path` and renames it into place.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Sidecar path holding the resolved configuration of an output file.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_meta(path: &Path, meta: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta).expect("JSON value serializes");
    text.push('\n');
    atomic_write(&meta_path(path), text.as_bytes())
}

// Embeddings

pub fn parse_embeddings(text: &str, origin: &Path) -> Result<EmbeddingSet> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, "missing `lang n d` header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [lang, n, d] = fields[..] else {
        return Err(Error::parse(
            origin,
            format!("header `{header}` is not `lang n d`"),
        ));
    };
    let n: usize = n
        .parse()
        .map_err(|_| Error::parse(origin, format!("bad sentence count `{n}`")))?;
    let d: usize = d
        .parse()
        .map_err(|_| Error::parse(origin, format!("bad dimension `{d}`")))?;

    let mut data = Vec::with_capacity(n * d);
    let mut rows = 0;
    for (lineno, line) in lines {
        rows += 1;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(origin, format!("line {}: bad number `{tok}`", lineno + 1))
            })?;
            data.push(v);
        }
        if data.len() - before != d {
            return Err(Error::parse(
                origin,
                format!(
                    "line {}: expected {d} values, got {}",
                    lineno + 1,
                    data.len() - before
                ),
            ));
        }
    }
    if rows != n {
        return Err(Error::parse(
            origin,
            format!("header declares {n} rows, found {rows}"),
        ));
    }
    EmbeddingSet::from_flat(lang, n, d, data)
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingSet> {
    parse_embeddings(&read_to_string(path)?, path)
}

/// Reads every regular, non-hidden file in `dir` as an embedding file, in
/// file-name order.
pub fn read_embedding_dir(dir: &Path) -> Result<Vec<EmbeddingSet>> {
    list_files(dir)?
        .iter()
        .map(|p| read_embeddings(p))
        .collect()
}

pub fn format_embeddings(set: &EmbeddingSet, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(&format!("{} {} {}\n", set.language(), set.len(), set.dim()));
    for row in set.rows() {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn list_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden && !path.to_string_lossy().ends_with(".meta.json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

// Similarity matrix

pub fn format_matrix_csv(m: &SimilarityMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![String::new()];
    header.extend(m.languages().iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (i, lang) in m.languages().iter().enumerate() {
        let mut row = vec![lang.clone()];
        row.extend((0..m.len()).map(|j| m.at(i, j).to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 output")
}

pub fn parse_matrix_csv(text: &str, origin: &Path, provenance: &str) -> Result<SimilarityMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::parse(origin, "empty similarity matrix"))?
        .map_err(|e| Error::parse(origin, e.to_string()))?;
    let languages: Vec<String> = header
        .iter()
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    let k = languages.len();
    let mut scores = Vec::with_capacity(k * k);
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        let row_lang = rec.get(0).unwrap_or("").trim();
        if languages.get(i).map(String::as_str) != Some(row_lang) {
            return Err(Error::parse(
                origin,
                format!(
                    "row {} is `{row_lang}`, expected the column order of the header",
                    i + 1
                ),
            ));
        }
        if rec.len() != k + 1 {
            return Err(Error::parse(
                origin,
                format!(
                    "row `{row_lang}` has {} cells, expected {}",
                    rec.len() - 1,
                    k
                ),
            ));
        }
        for cell in rec.iter().skip(1) {
            scores.push(cell.trim().parse::<f64>().map_err(|_| {
                Error::parse(origin, format!("row `{row_lang}`: bad score `{cell}`"))
            })?);
        }
    }
    if scores.len() != k * k {
        return Err(Error::parse(origin, format!("expected {k} rows")));
    }
    SimilarityMatrix::new(languages, scores, provenance)
}

pub fn read_matrix_csv(path: &Path) -> Result<SimilarityMatrix> {
    let provenance = fs::read_to_string(meta_path(path))
        .ok()
        .and_then(|t| serde_json::from_str::<serde_json::Value>(&t).ok())
        .and_then(|v| {
            v.get("provenance")
                .and_then(|p| p.as_str())
                .map(str::to_string)
        })
        .unwrap_or_else(|| path.display().to_string());
    parse_matrix_csv(&read_to_string(path)?, path, &provenance)
}

// Availability

pub fn parse_availability_csv(text: &str, origin: &Path) -> Result<BTreeMap<String, u64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::parse(
                origin,
                format!("line {}: expected `language,count`", i + 1),
            ));
        }
        if i == 0 && &rec[0] == "language" && &rec[1] == "count" {
            continue;
        }
        let count: u64 = rec[1]
            .parse()
            .map_err(|_| Error::parse(origin, format!("`{}`: bad count `{}`", &rec[0], &rec[1])))?;
        if out.insert(rec[0].to_string(), count).is_some() {
            return Err(Error::parse(
                origin,
                format!("language `{}` listed twice", &rec[0]),
            ));
        }
    }
    Ok(out)
}

pub fn read_availability_csv(path: &Path) -> Result<BTreeMap<String, u64>> {
    parse_availability_csv(&read_to_string(path)?, path)
}

// Allocation

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AllocationRecord {
    alpha: f64,
    batch_size: u64,
    budget: u64,
    entries: Vec<Entry>,
    k: usize,
    returns: ReturnsCurve,
    saturation_c: f64,
    seed: u64,
    strategy: Strategy,
    target: String,
    used: u64,
    utilization: f64,
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn allocation_to_json(a: &AllocationVector) -> String {
    let rec = AllocationRecord {
        alpha: a.config.alpha,
        batch_size: a.config.batch_size,
        budget: a.budget,
        entries: a.entries.clone(),
        k: a.config.k,
        returns: a.config.returns,
        saturation_c: a.config.saturation_c,
        seed: a.config.seed,
        strategy: a.config.strategy,
        target: a.target.clone(),
        used: a.used,
        utilization: a.utilization,
    };
    // Round-tripping through `Value` sorts nested keys as well.
    let value = serde_json::to_value(rec).expect("allocation serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("allocation serializes");
    s.push('\n');
    s
}

pub fn allocation_from_json(text: &str, origin: &Path) -> Result<AllocationVector> {
    let rec: AllocationRecord =
        serde_json::from_str(text).map_err(|e| Error::parse(origin, e.to_string()))?;
    let config = StrategyConfig {
        strategy: rec.strategy,
        budget: rec.budget,
        k: rec.k,
        alpha: rec.alpha,
        seed: rec.seed,
        batch_size: rec.batch_size,
        saturation_c: rec.saturation_c,
        returns: rec.returns,
    };
    let a = AllocationVector::new(rec.target, rec.entries, config);
    if a.used != rec.used {
        return Err(Error::parse(
            origin,
            format!("`used` is {} but entries sum to {}", rec.used, a.used),
        ));
    }
    Ok(a)
}

pub fn read_allocation_json(path: &Path) -> Result<AllocationVector> {
    allocation_from_json(&read_to_string(path)?, path)
}

// Dataset indexes

pub fn parse_index(language: &str, text: &str, task: Task) -> Result<DatasetIndex> {
    let ids = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect();
    DatasetIndex::new(language, ids, task)
}

/// Reads `<dir>/<language>.*` index files for the requested languages.
pub fn read_index_dir<S: AsRef<str>>(
    dir: &Path,
    languages: &[S],
    task: Task,
) -> Result<Vec<DatasetIndex>> {
    let files = list_files(dir)?;
    languages
        .iter()
        .map(|lang| {
            let lang = lang.as_ref();
            let path = files
                .iter()
                .find(|p| p.file_stem().and_then(|s| s.to_str()) == Some(lang))
                .ok_or_else(|| {
                    Error::Index(format!("no index file for `{lang}` in {}", dir.display()))
                })?;
            parse_index(lang, &read_to_string(path)?, task)
        })
        .collect()
}

pub fn manifest_to_jsonl(m: &Manifest) -> String {
    let mut out = String::with_capacity(m.records.len() * 64);
    for r in &m.records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

// Results and reports

pub fn results_to_csv(results: &[RunResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if results.is_empty() {
        w.write_record([
            "task",
            "target",
            "budget",
            "model",
            "strategy",
            "seed",
            "metric",
            "utilization",
        ])
        .expect("in-memory write");
    }
    for r in results {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 output")
}

pub fn parse_results_csv(text: &str, origin: &Path) -> Result<Vec<RunResult>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let expected = [
        "task",
        "target",
        "budget",
        "model",
        "strategy",
        "seed",
        "metric",
        "utilization",
    ];
    let header = r
        .headers()
        .map_err(|e| Error::parse(origin, e.to_string()))?;
    if header.iter().ne(expected) {
        return Err(Error::parse(
            origin,
            format!("header must be `{}`", expected.join(",")),
        ));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, rec)| rec.map_err(|e| Error::parse(origin, format!("row {}: {e}", i + 2))))
        .collect()
}

pub fn read_results_csv(path: &Path) -> Result<Vec<RunResult>> {
    parse_results_csv(&read_to_string(path)?, path)
}

pub fn report_to_csv(rows: &[ComparisonReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "comparison",
        "condition",
        "n",
        "delta",
        "ci_low",
        "ci_high",
        "p",
        "p_adjusted",
        "d",
    ])
    .expect("in-memory write");
    let opt = |x: Option<f64>| x.map_or("NA".to_string(), |v| v.to_string());
    for r in rows {
        w.write_record([
            r.comparison.clone(),
            r.condition.clone(),
            r.n.to_string(),
            r.delta.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            opt(r.p),
            opt(r.p_adjusted),
            opt(r.d),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 output")
}
