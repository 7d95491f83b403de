//! Retrieval of reviews from a Gerrit REST endpoint.
//!
//! Changes are listed with `GET <endpoint>/changes/?q=<query>&n=<page_size>`,
//! paging with the `S` offset while the last change of a page carries
//! `_more_changes: true`. For every revision the file list and the per-file
//! diff (`context=ALL`) are requested and converted to archive records:
//! `ab` chunks become unchanged lines, `a` removed and `b` added lines.
//! Every Gerrit response starts with the `)]}'` XSSI guard, which is stripped
//! before decoding.

use std::collections::{BTreeMap, HashSet};
use std::thread;
use std::time::Duration;

use chrono::{DateTime, NaiveDateTime, Utc};
use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde::Deserialize;

use super::{write_review_archive, DiffLine, FileDiff, IngestError, LineOp, PatchRevision, ReviewRecord, ReviewStatus};

const XSSI_PREFIX: &str = ")]}'";

/// Gerrit pseudo-files that are not part of the patch content.
const MAGIC_FILES: &[&str] = &["/COMMIT_MSG", "/MERGE_LIST", "/PATCHSET_LEVEL"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

/// Minimal blocking GET transport, replaceable in tests.
pub trait HttpTransport {
    /// Performs a GET. `Err` is reserved for transport-level failures; HTTP
    /// error statuses are returned as responses.
    fn get(&self, url: &str) -> Result<HttpResponse, String>;
}

/// [`HttpTransport`] backed by `ureq`, with optional pass-through headers
/// (for example an `Authorization` token).
pub struct UreqTransport {
    agent: ureq::Agent,
    headers: Vec<(String, String)>,
}

impl UreqTransport {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(timeout)
            .user_agent(concat!("conflens/", env!("CARGO_PKG_VERSION")))
            .build();
        Self { agent, headers: Vec::new() }
    }

    pub fn with_header(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.headers.push((name.into(), value.into()));
        self
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new(Duration::from_secs(60))
    }
}

impl HttpTransport for UreqTransport {
    fn get(&self, url: &str) -> Result<HttpResponse, String> {
        let mut req = self.agent.get(url);
        for (k, v) in &self.headers {
            req = req.set(k, v);
        }
        match req.call() {
            Ok(resp) => {
                let status = resp.status();
                let body = resp.into_string().map_err(|e| e.to_string())?;
                Ok(HttpResponse { status, body })
            }
            Err(ureq::Error::Status(status, resp)) => {
                Ok(HttpResponse { status, body: resp.into_string().unwrap_or_default() })
            }
            Err(e) => Err(e.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FetchOptions {
    pub page_size: usize,
    /// Additional attempts after the first for transport failures and
    /// 5xx/429 responses.
    pub retries: u32,
    pub backoff: Duration,
    /// Stop listing once this many changes have been collected.
    pub max_changes: Option<usize>,
}

impl Default for FetchOptions {
    fn default() -> Self {
        Self { page_size: 100, retries: 3, backoff: Duration::from_millis(500), max_changes: None }
    }
}

#[derive(Deserialize)]
struct ChangeInfo {
    #[serde(default)]
    id: Option<String>,
    #[serde(rename = "_number")]
    number: u64,
    status: String,
    #[serde(default)]
    revisions: BTreeMap<String, RevisionInfo>,
    #[serde(rename = "_more_changes", default)]
    more_changes: bool,
}

#[derive(Deserialize)]
struct RevisionInfo {
    #[serde(rename = "_number")]
    number: u32,
    created: String,
}

#[derive(Deserialize)]
struct FileInfo {
    #[serde(default)]
    binary: bool,
}

#[derive(Deserialize)]
struct DiffInfo {
    #[serde(default)]
    binary: bool,
    #[serde(default)]
    content: Vec<DiffContent>,
}

#[derive(Deserialize)]
struct DiffContent {
    #[serde(default)]
    a: Vec<String>,
    #[serde(default)]
    b: Vec<String>,
    #[serde(default)]
    ab: Vec<String>,
}

fn strip_xssi(body: &str) -> &str {
    body.strip_prefix(XSSI_PREFIX).map(|s| s.trim_start_matches(['\r', '\n'])).unwrap_or(body)
}

fn encode(s: &str) -> String {
    utf8_percent_encode(s, NON_ALPHANUMERIC).to_string()
}

/// Gerrit timestamps look like `2018-03-01 12:00:00.000000000` and are UTC.
fn parse_gerrit_time(s: &str) -> Option<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f")
        .ok()
        .map(|n| n.and_utc())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.with_timezone(&Utc)))
}

struct Fetcher<'a, T: HttpTransport + ?Sized> {
    transport: &'a T,
    opts: &'a FetchOptions,
}

impl<T: HttpTransport + ?Sized> Fetcher<'_, T> {
    fn get_json<D: for<'de> Deserialize<'de>>(&self, url: &str) -> Result<D, IngestError> {
        let mut attempt = 0u32;
        loop {
            let outcome = self.transport.get(url);
            let retry_reason = match &outcome {
                Err(e) => Some(format!("transport error: {e}")),
                Ok(r) if r.status >= 500 || r.status == 429 => Some(format!("HTTP {}", r.status)),
                _ => None,
            };
            if let Some(reason) = retry_reason {
                if attempt < self.opts.retries {
                    attempt += 1;
                    log::warn!("GET {url} failed ({reason}), retry {attempt}/{}", self.opts.retries);
                    if !self.opts.backoff.is_zero() {
                        thread::sleep(self.opts.backoff * attempt);
                    }
                    continue;
                }
                return Err(IngestError::Fetch {
                    url: url.to_string(),
                    reason: format!("{reason} after {} attempts", attempt + 1),
                    retriable: true,
                });
            }
            let resp = outcome.expect("transport errors handled above");
            if resp.status >= 400 {
                return Err(IngestError::Fetch {
                    url: url.to_string(),
                    reason: format!("HTTP {}", resp.status),
                    retriable: true,
                });
            }
            return serde_json::from_str(strip_xssi(&resp.body)).map_err(|e| IngestError::Fetch {
                url: url.to_string(),
                reason: format!("decoding response: {e}"),
                retriable: false,
            });
        }
    }

    fn list_changes(&self, endpoint: &str, query: &str) -> Result<Vec<ChangeInfo>, IngestError> {
        let mut all = Vec::new();
        let mut seen = HashSet::new();
        let mut start = 0usize;
        loop {
            let url =
                format!("{endpoint}/changes/?q={}&n={}&S={start}&o=ALL_REVISIONS", encode(query), self.opts.page_size);
            let page: Vec<ChangeInfo> = self.get_json(&url)?;
            let more = page.last().is_some_and(|c| c.more_changes);
            let mut fresh = 0usize;
            for change in page {
                if seen.insert(change.number) {
                    fresh += 1;
                    all.push(change);
                }
            }
            if !more {
                break;
            }
            if fresh == 0 {
                return Err(IngestError::PaginationLoop { query: query.to_string(), start });
            }
            start += fresh;
            if self.opts.max_changes.is_some_and(|m| all.len() >= m) {
                break;
            }
        }
        if let Some(m) = self.opts.max_changes {
            all.truncate(m);
        }
        Ok(all)
    }

    fn file_diff(&self, base: &str, rev: u32, path: &str) -> Result<Option<FileDiff>, IngestError> {
        let url = format!("{base}/revisions/{rev}/files/{}/diff?context=ALL", encode(path));
        let info: DiffInfo = self.get_json(&url)?;
        if info.binary {
            return Ok(None);
        }
        let mut lines = Vec::new();
        for chunk in info.content {
            lines.extend(chunk.ab.into_iter().map(|t| DiffLine::new(LineOp::Unchanged, t)));
            lines.extend(chunk.a.into_iter().map(|t| DiffLine::new(LineOp::Removed, t)));
            lines.extend(chunk.b.into_iter().map(|t| DiffLine::new(LineOp::Added, t)));
        }
        Ok(Some(FileDiff { path: path.to_string(), lines }))
    }

    fn convert(&self, endpoint: &str, change: ChangeInfo) -> Result<Option<ReviewRecord>, IngestError> {
        let status = match change.status.as_str() {
            "MERGED" => ReviewStatus::Accepted,
            "ABANDONED" => ReviewStatus::Abandoned,
            other => {
                log::info!("skipping change {} with status {other}", change.number);
                return Ok(None);
            }
        };
        let base = format!("{endpoint}/changes/{}", change.number);
        let mut revs: Vec<&RevisionInfo> = change.revisions.values().collect();
        revs.sort_by_key(|r| r.number);
        let mut revisions = Vec::with_capacity(revs.len());
        for rev in revs {
            let created = parse_gerrit_time(&rev.created).ok_or_else(|| IngestError::Fetch {
                url: base.clone(),
                reason: format!("bad revision timestamp {:?}", rev.created),
                retriable: false,
            })?;
            let files: BTreeMap<String, FileInfo> =
                self.get_json(&format!("{base}/revisions/{}/files/", rev.number))?;
            let mut diffs = Vec::new();
            for (path, info) in files {
                if info.binary || MAGIC_FILES.contains(&path.as_str()) {
                    continue;
                }
                if let Some(d) = self.file_diff(&base, rev.number, &path)? {
                    diffs.push(d);
                }
            }
            revisions.push(PatchRevision { revision_number: rev.number, created, files: diffs });
        }
        let review_id = change.id.unwrap_or_else(|| change.number.to_string());
        match ReviewRecord::new(review_id, status, revisions) {
            Ok(r) => Ok(Some(r)),
            Err(reason) => {
                log::warn!("skipping change {}: {reason}", change.number);
                Ok(None)
            }
        }
    }
}

/// Retrieves all changes matching `query` and returns them encoded in the
/// archive format. Changes that are still open are skipped.
pub fn fetch_reviews<T: HttpTransport + ?Sized>(
    transport: &T,
    endpoint: &str,
    query: &str,
    opts: &FetchOptions,
) -> Result<Vec<u8>, IngestError> {
    if opts.page_size == 0 {
        return Err(IngestError::Fetch {
            url: endpoint.to_string(),
            reason: "page_size must be positive".into(),
            retriable: false,
        });
    }
    let endpoint = endpoint.trim_end_matches('/');
    let fetcher = Fetcher { transport, opts };
    let mut records = Vec::new();
    for change in fetcher.list_changes(endpoint, query)? {
        if let Some(r) = fetcher.convert(endpoint, change)? {
            records.push(r);
        }
    }
    let mut out = Vec::new();
    write_review_archive(&mut out, &records)?;
    Ok(out)
}
