use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use ssc_core::sources::http::{fetch_candidates, EndpointConfig, FetchError, SampleRequest};

/// Serves `responses(i)` for the i-th request as (status, body).
fn serve<F>(responses: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(usize) -> (u16, String) + Send + Sync + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let responses = Arc::new(responses);
    std::thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let counter = counter.clone();
            let responses = responses.clone();
            std::thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                let mut auth = false;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 {
                        return;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                    if lower.starts_with("authorization: bearer test-key") {
                        auth = true;
                    }
                    if line == "\r\n" {
                        break;
                    }
                }
                let mut body = vec![0; len];
                reader.read_exact(&mut body).unwrap();
                let i = counter.fetch_add(1, Ordering::SeqCst);
                let (status, text) = if auth { responses(i) } else { (401, String::new()) };
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{text}",
                    text.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            });
        }
    });
    (format!("http://{addr}/v1"), hits)
}

fn completion(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn endpoint(base: &str) -> EndpointConfig {
    let mut e = EndpointConfig::new(base, "test-key");
    e.backoff = Duration::from_millis(5);
    e.timeout = Duration::from_secs(5);
    e
}

#[test]
fn five_candidates_in_slot_order() {
    let (base, _) = serve(|_| (200, completion("same")));
    let req = SampleRequest::new("prompt", "m");
    let pool = fetch_candidates(&req, &endpoint(&base)).unwrap();
    assert_eq!(pool.len(), 5);
    for (i, c) in pool.iter().enumerate() {
        assert_eq!(c.index, i);
        assert_eq!(c.text, "same");
    }
}

#[test]
fn single_sample() {
    let (base, hits) = serve(|_| (200, completion("{\"a\": 1}")));
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 1;
    let pool = fetch_candidates(&req, &endpoint(&base)).unwrap();
    assert_eq!(pool.len(), 1);
    assert_eq!(pool[0].text, "{\"a\": 1}");
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn retries_then_succeeds() {
    let (base, hits) = serve(|i| if i < 2 { (429, String::new()) } else { (200, completion("ok")) });
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 1;
    let pool = fetch_candidates(&req, &endpoint(&base)).unwrap();
    assert_eq!(pool[0].text, "ok");
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn persistent_server_error() {
    let (base, hits) = serve(|_| (500, String::new()));
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 1;
    let err = fetch_candidates(&req, &endpoint(&base)).unwrap_err();
    assert!(matches!(err, FetchError::HttpError(500)), "{err:?}");
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (base, hits) = serve(|_| (400, String::new()));
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 1;
    assert!(matches!(fetch_candidates(&req, &endpoint(&base)), Err(FetchError::HttpError(400))));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn partial_pool_keeps_successes() {
    // Requests are numbered in arrival order; with one worker that is slot order.
    let (base, _) = serve(|i| if i == 0 { (200, completion("first")) } else { (503, String::new()) });
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 2;
    let mut e = endpoint(&base);
    e.concurrency = 1;
    match fetch_candidates(&req, &e) {
        Err(FetchError::PartialPool { requested, candidates }) => {
            assert_eq!(requested, 2);
            assert_eq!(candidates.len(), 1);
            assert_eq!(candidates[0].text, "first");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_key() {
    let req = SampleRequest::new("prompt", "m");
    let e = EndpointConfig::new("http://127.0.0.1:1", " ");
    assert!(matches!(fetch_candidates(&req, &e), Err(FetchError::AuthMissing)));
}

#[test]
fn bad_response_shape() {
    let (base, _) = serve(|_| (200, "{\"choices\": []}".to_string()));
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 1;
    assert!(matches!(fetch_candidates(&req, &endpoint(&base)), Err(FetchError::BadResponse(_))));
}

#[test]
fn zero_samples_rejected() {
    let mut req = SampleRequest::new("prompt", "m");
    req.n = 0;
    assert!(matches!(
        fetch_candidates(&req, &endpoint("http://127.0.0.1:1")),
        Err(FetchError::InvalidRequest(_))
    ));
}
