use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Duration;

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("invalid series id {0:?}")]
    InvalidSeries(String),
    #[error("fetching {url}: HTTP status {status}")]
    Status { url: String, status: u16 },
    #[error("fetching {url}: {message}")]
    Network { url: String, message: String },
    #[error("cache {path}: {source}")]
    Cache { path: PathBuf, source: io::Error },
}

/// Returns the body for `series_id`, reading `<cache_dir>/<series_id>.csv`
/// when present and otherwise downloading it from `endpoint` and caching it.
///
/// `endpoint` may contain a `{series_id}` placeholder; without one the id is
/// appended as an `id` query parameter (the FRED graph CSV convention).
pub fn fetch_series(series_id: &str, endpoint: &str, cache_dir: &Path) -> Result<String, FetchError> {
    if series_id.is_empty() || !series_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(FetchError::InvalidSeries(series_id.to_string()));
    }
    let path = cache_dir.join(format!("{series_id}.csv"));
    let lock = file_lock(&path);
    let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());

    match fs::read_to_string(&path) {
        Ok(body) => return Ok(body),
        Err(e) if e.kind() == io::ErrorKind::NotFound => {}
        Err(source) => return Err(FetchError::Cache { path, source }),
    }

    let url = series_url(endpoint, series_id);
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(30)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut response =
        agent.get(&url).call().map_err(|e| FetchError::Network { url: url.clone(), message: e.to_string() })?;
    let status = response.status().as_u16();
    if status != 200 {
        return Err(FetchError::Status { url, status });
    }
    let body = response.body_mut().read_to_string().map_err(|e| FetchError::Network { url, message: e.to_string() })?;

    let cache_err = |source| FetchError::Cache { path: path.clone(), source };
    fs::create_dir_all(cache_dir).map_err(cache_err)?;
    let tmp = path.with_extension(format!("csv.tmp{}", std::process::id()));
    fs::write(&tmp, &body).map_err(cache_err)?;
    fs::rename(&tmp, &path).map_err(cache_err)?;
    Ok(body)
}

fn series_url(endpoint: &str, series_id: &str) -> String {
    if endpoint.contains("{series_id}") {
        endpoint.replace("{series_id}", series_id)
    } else if endpoint.contains('?') {
        format!("{endpoint}&id={series_id}")
    } else {
        format!("{endpoint}?id={series_id}")
    }
}

// Writers to the same cache file are serialized within the process.
fn file_lock(path: &Path) -> Arc<Mutex<()>> {
    static LOCKS: OnceLock<Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>> = OnceLock::new();
    let mut map = LOCKS.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(path.to_path_buf()).or_default().clone()
}
