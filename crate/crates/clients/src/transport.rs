use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, Once};
use std::time::Duration;

use async_trait::async_trait;
use tokio::sync::Semaphore;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub url: Url,
    pub headers: Vec<(String, String)>,
}

impl HttpRequest {
    pub fn get(url: Url) -> Self {
        Self { url, headers: Vec::new() }
    }

    pub fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_string(), value.into()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransportError {
    #[error("request timed out")]
    Timeout,
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("network access is disabled")]
    Disabled,
}

/// Sends GET requests. Everything that talks to the outside world goes
/// through one of these so tests can substitute a double.
#[async_trait]
pub trait Transport: Send + Sync {
    async fn get(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(5);
pub const DEFAULT_PER_HOST_LIMIT: usize = 4;

/// reqwest-backed transport with a per-request timeout and a cap on
/// concurrent requests per host.
pub struct LiveTransport {
    client: reqwest::Client,
    per_host_limit: usize,
    hosts: Mutex<HashMap<String, Arc<Semaphore>>>,
}

static CRYPTO: Once = Once::new();

impl LiveTransport {
    pub fn new(timeout: Duration, per_host_limit: usize) -> Result<Self, TransportError> {
        CRYPTO.call_once(|| {
            let _ = rustls::crypto::ring::default_provider().install_default();
        });
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("tablecheck/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError::Connect(e.to_string()))?;
        Ok(Self { client, per_host_limit: per_host_limit.max(1), hosts: Mutex::new(HashMap::new()) })
    }

    fn permit_pool(&self, host: &str) -> Arc<Semaphore> {
        let mut hosts = self.hosts.lock().expect("host table poisoned");
        hosts.entry(host.to_string()).or_insert_with(|| Arc::new(Semaphore::new(self.per_host_limit))).clone()
    }
}

#[async_trait]
impl Transport for LiveTransport {
    async fn get(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let pool = self.permit_pool(request.url.host_str().unwrap_or_default());
        let _permit = pool.acquire().await.map_err(|e| TransportError::Connect(e.to_string()))?;
        let mut builder = self.client.get(request.url.clone());
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        let classify =
            |e: reqwest::Error| if e.is_timeout() { TransportError::Timeout } else { TransportError::Connect(e.to_string()) };
        let response = builder.send().await.map_err(classify)?;
        let status = response.status().as_u16();
        let body = response.bytes().await.map_err(classify)?.to_vec();
        Ok(HttpResponse { status, body })
    }
}

/// Fails every request and counts the attempts. Stands in wherever a test
/// must prove no network traffic happens.
#[derive(Debug, Default)]
pub struct PanicTransport {
    pub attempts: AtomicUsize,
}

impl PanicTransport {
    pub fn attempts(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl Transport for PanicTransport {
    async fn get(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        panic!("unexpected network request to {}", request.url);
    }
}

/// Refuses every request without panicking; used by the `--offline` CLI
/// path when no fixture is available.
#[derive(Debug, Default)]
pub struct OfflineTransport;

#[async_trait]
impl Transport for OfflineTransport {
    async fn get(&self, _: &HttpRequest) -> Result<HttpResponse, TransportError> {
        Err(TransportError::Disabled)
    }
}

/// Retry schedule for live calls: `retries` extra attempts, doubling the
/// delay each time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { retries: 2, initial_backoff: Duration::from_millis(250) }
    }
}

/// Sends `request`, retrying transport failures, 429 and 5xx responses.
/// Other statuses are returned to the caller as-is.
pub async fn get_with_retry(
    transport: &dyn Transport,
    request: &HttpRequest,
    policy: RetryPolicy,
) -> Result<HttpResponse, String> {
    let mut delay = policy.initial_backoff;
    let mut last = String::new();
    for attempt in 0..=policy.retries {
        if attempt > 0 {
            tokio::time::sleep(delay).await;
            delay *= 2;
        }
        match transport.get(request).await {
            Ok(r) if r.status == 429 || r.status >= 500 => last = format!("HTTP {}", r.status),
            Ok(r) => return Ok(r),
            Err(TransportError::Disabled) => return Err(TransportError::Disabled.to_string()),
            Err(e) => last = e.to_string(),
        }
        tracing::debug!(url = %request.url, attempt, error = %last, "request failed");
    }
    Err(last)
}
