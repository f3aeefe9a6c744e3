//! Shared helpers: the CLI binary, a local mock chat server and an oracle
//! responder that answers with a sample's own annotations.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;
use std::thread;

use loopscan::{Category, CodeSample, PatternKind};
use serde_json::{json, Value};

pub fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_loopscan"));
    cmd.env_remove("LOOPSCAN_ENDPOINT_URL").env_remove("LOOPSCAN_MODEL").env("RUST_LOG", "warn");
    cmd
}

pub fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub type Responder = Arc<dyn Fn(&str, &str) -> String + Send + Sync>;

/// Serves `/v1/chat/completions` until the process exits. Returns the base URL.
pub fn start_mock_server(responder: Responder) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let responder = responder.clone();
            thread::spawn(move || {
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut length = 0usize;
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        length = v.trim().parse().unwrap();
                    }
                }
                let mut body = vec![0; length];
                reader.read_exact(&mut body).unwrap();
                let request: Value = serde_json::from_slice(&body).unwrap();
                let system = request["messages"][0]["content"].as_str().unwrap_or_default();
                let user = request["messages"][1]["content"].as_str().unwrap_or_default();
                let content = responder(system, user);
                let reply = json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]})
                    .to_string();
                let _ = write!(
                    stream,
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                    reply.len()
                );
            });
        }
    });
    base
}

/// `(sample_id, first_line, last_line)` from a user prompt preamble.
pub fn block_of(user: &str) -> (String, usize, usize) {
    let rest = user.strip_prefix("Analyze lines ").expect("preamble");
    let (range, rest) = rest.split_once(" of sample ").unwrap();
    let (sample, _) = rest.split_once(". The first line").unwrap();
    let (first, last) = range.split_once("..").unwrap();
    (sample.to_string(), first.parse().unwrap(), last.parse().unwrap())
}

/// Category named in the S4 block of a system prompt.
pub fn category_of(system: &str) -> Category {
    let title = system
        .lines()
        .find_map(|l| l.strip_prefix("Category: "))
        .expect("category line");
    Category::ALL.into_iter().find(|c| c.title() == title).expect("known title")
}

/// Answers with every annotation of the prompt's category inside the block.
pub fn oracle_answer(samples: &[CodeSample], system: &str, user: &str) -> String {
    let category = category_of(system);
    let (sample_id, first, last) = block_of(user);
    let sample = samples.iter().find(|s| s.sample_id == sample_id).expect("known sample");
    let mut out = String::from("Here is my analysis.\n");
    let mut any = false;
    for a in sample.annotations.iter().filter(|a| a.category == category) {
        if (first..=last).contains(&a.line_start) {
            any = true;
            out.push_str(&format!(
                "{{\"line\": {}, \"kind\": \"{}\", \"explanation\": \"{}\"}}\n",
                a.line_start,
                a.kind.id(),
                a.kind.title()
            ));
        }
    }
    if !any {
        out.push_str("NO FINDINGS\n");
    }
    out.push_str("END_OF_FINDINGS\n");
    out
}

/// One in-range record at the block's first line and one far outside it.
pub fn in_and_out_of_range_answer(system: &str, user: &str) -> String {
    let kind: PatternKind = category_of(system).kinds().next().unwrap();
    let (_, first, last) = block_of(user);
    format!(
        "{{\"line\": {first}, \"kind\": \"{k}\", \"explanation\": \"in range\"}}\n{{\"line\": {}, \"kind\": \"{k}\", \"explanation\": \"out of range\"}}\nEND_OF_FINDINGS\n",
        last + 100,
        k = kind.id()
    )
}

/// Only the in-range half of [`in_and_out_of_range_answer`].
pub fn in_range_answer(system: &str, user: &str) -> String {
    in_and_out_of_range_answer(system, user).lines().next().unwrap().to_string() + "\nEND_OF_FINDINGS\n"
}
