//! Shared HTTP plumbing for the external-service backends (LLM
//! decomposition, cross-encoder reranking, NLI classification).
//!
//! All backends POST JSON and read JSON back. Calls retry with exponential
//! backoff; concurrent fan-out is bounded and reassembled in input order so
//! completion timing never changes results.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Retry and timeout policy for one backend.
#[derive(Debug, Clone)]
pub struct HttpPolicy {
    /// Total attempts, including the first (>= 1).
    pub attempts: u32,
    /// Backoff before retry i is `base_backoff * 2^(i-1)`.
    pub base_backoff: Duration,
    pub timeout: Duration,
}

impl Default for HttpPolicy {
    fn default() -> Self {
        HttpPolicy {
            attempts: 3,
            base_backoff: Duration::from_millis(100),
            timeout: Duration::from_secs(30),
        }
    }
}

/// POST `body` as JSON to `url` and deserialize the JSON response.
/// `backend` names the service in errors; `bearer` is sent as an
/// `Authorization: Bearer` header when present.
pub fn post_json<B: Serialize, T: DeserializeOwned>(
    backend: &str,
    url: &str,
    bearer: Option<&str>,
    body: &B,
    policy: &HttpPolicy,
) -> Result<T> {
    let attempts = policy.attempts.max(1);
    let mut last_err = String::new();
    for attempt in 0..attempts {
        if attempt > 0 {
            let backoff = policy.base_backoff * 2u32.pow(attempt - 1);
            std::thread::sleep(backoff);
        }
        let agent = ureq::AgentBuilder::new().timeout(policy.timeout).build();
        let mut request = agent.post(url);
        if let Some(token) = bearer {
            request = request.set("Authorization", &format!("Bearer {token}"));
        }
        match request.send_json(body) {
            Ok(response) => {
                return response
                    .into_json::<T>()
                    .map_err(|e| Error::service(backend, format!("malformed response: {e}")));
            }
            Err(ureq::Error::Status(code, response)) => {
                let text = response.into_string().unwrap_or_default();
                last_err = format!("HTTP {code}: {text}");
                // Client errors won't heal on retry.
                if (400..500).contains(&code) && code != 429 {
                    return Err(Error::service(backend, last_err));
                }
            }
            Err(ureq::Error::Transport(t)) => {
                last_err = t.to_string();
            }
        }
    }
    Err(Error::service(
        backend,
        format!("failed after {attempts} attempts: {last_err}"),
    ))
}

/// Apply `f` to every item with at most `max_in_flight` worker threads.
/// Results come back in input order; the first error wins deterministically
/// (lowest input index).
pub fn bounded_map<T, U, F>(items: &[T], max_in_flight: usize, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    let workers = max_in_flight.max(1).min(items.len().max(1));
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }

    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<Result<U>>>> =
        items.iter().map(|_| std::sync::Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(&items[i]);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });

    let mut out = Vec::with_capacity(items.len());
    for slot in slots {
        match slot.into_inner().unwrap() {
            Some(Ok(v)) => out.push(v),
            Some(Err(e)) => return Err(e),
            None => return Err(Error::data("worker dropped an item")),
        }
    }
    Ok(out)
}
