//! A tiny HTTP/1.1 server for exercising the service client.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;

pub struct Reply {
    pub status: u16,
    pub body: String,
}

impl Reply {
    pub fn json(body: serde_json::Value) -> Self {
        Self { status: 200, body: body.to_string() }
    }

    pub fn status(status: u16) -> Self {
        Self { status, body: "{\"detail\":\"error\"}".into() }
    }
}

pub struct MockServer {
    pub url: String,
    stop: Arc<AtomicBool>,
}

impl MockServer {
    /// Serves each connection on its own thread with `handler(method, path, body)`.
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(&str, &str, &str) -> Reply + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let stop = Arc::new(AtomicBool::new(false));
        let handler = Arc::new(handler);
        let flag = Arc::clone(&stop);
        thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::Relaxed) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let handler = Arc::clone(&handler);
                thread::spawn(move || serve(stream, handler.as_ref()));
            }
        });
        Self { url, stop }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        let _ = TcpStream::connect(self.url.trim_start_matches("http://"));
    }
}

fn serve<F: Fn(&str, &str, &str) -> Reply>(stream: TcpStream, handler: &F) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).is_err() || line.is_empty() {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or("").to_owned();
    let path = parts.next().unwrap_or("").to_owned();
    let mut length = 0;
    loop {
        let mut h = String::new();
        if reader.read_line(&mut h).is_err() || h.trim().is_empty() {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; length];
    let _ = reader.read_exact(&mut body);
    let reply = handler(&method, &path, &String::from_utf8_lossy(&body));
    let mut out = stream;
    let _ = write!(
        out,
        "HTTP/1.1 {} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        reply.body.len(),
        reply.body
    );
}

/// Masked-LM stand-in: uniform over candidates except that "trees" gets
/// eight times the weight when offered.
pub fn fake_model(method: &str, path: &str, body: &str) -> Reply {
    match (method, path) {
        ("GET", "/capabilities") => Reply::json(serde_json::json!({
            "model": "fake-mlm", "mask_token": "<mask>", "max_context": 512, "vocab_size": 7
        })),
        ("GET", "/vocab") => Reply::json(serde_json::json!({
            "words": ["There", "is", "a", "beach", "with", "palm", "trees", "tress", "treks", "and", "clear", "blue", "water"]
        })),
        ("POST", "/fill_mask") => {
            let req: serde_json::Value = serde_json::from_str(body).unwrap();
            let masks: Vec<serde_json::Value> = req["masks"]
                .as_array()
                .unwrap()
                .iter()
                .map(|m| {
                    let cands = m["candidates"].as_array().unwrap();
                    let w: Vec<f64> =
                        cands.iter().map(|c| if c == "trees" { 8.0 } else { 1.0 }).collect();
                    let z: f64 = w.iter().sum();
                    let lp: Vec<f64> = w.iter().map(|x| (x / z).ln()).collect();
                    serde_json::json!({ "index": m["index"], "logprobs": lp })
                })
                .collect();
            Reply::json(serde_json::json!({ "masks": masks }))
        }
        ("POST", "/punctuate") => {
            let req: serde_json::Value = serde_json::from_str(body).unwrap();
            let text = req["text"].as_str().unwrap();
            let mut out = String::new();
            let mut chars = text.chars();
            if let Some(c) = chars.next() {
                out.extend(c.to_uppercase());
            }
            out.extend(chars);
            out.push('.');
            Reply::json(serde_json::json!({ "text": out }))
        }
        ("POST", "/bertscore") => {
            let req: serde_json::Value = serde_json::from_str(body).unwrap();
            let same = req["reference"] == req["hypothesis"];
            Reply::json(serde_json::json!({ "score": if same { 100.0 } else { 90.0 } }))
        }
        _ => Reply::status(404),
    }
}
