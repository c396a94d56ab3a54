use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use awm::lm::{HttpLm, LmClient, LmConfig, LmError, LmRequest};

/// Serves one canned response per connection and returns the request bodies.
fn stub(responses: Vec<(u16, String)>) -> (String, thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let handle = thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        length = v.trim().parse().unwrap();
                    }
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            bodies.push(String::from_utf8(buf).unwrap());
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            reader.get_mut().write_all(reply.as_bytes()).unwrap();
        }
        bodies
    });
    (url, handle)
}

fn config(url: String, attempts: u32) -> LmConfig {
    LmConfig {
        base_url: url,
        api_key: Some("k".into()),
        model: "test-model".into(),
        max_attempts: attempts,
        backoff_ms: 1,
        timeout_secs: 5,
    }
}

#[test]
fn retries_server_errors_then_succeeds() {
    let ok = r#"{"choices":[{"message":{"content":"Action: stop()"}}]}"#.to_string();
    let (url, server) = stub(vec![(500, "{}".into()), (429, "{}".into()), (200, ok)]);
    let lm = HttpLm::new(config(url, 3));
    let reply = lm.complete(&LmRequest::new("hello")).unwrap();
    assert_eq!(reply.text, "Action: stop()");
    let bodies = server.join().unwrap();
    assert_eq!(bodies.len(), 3);
    let sent: serde_json::Value = serde_json::from_str(&bodies[2]).unwrap();
    assert_eq!(sent["model"], "test-model");
    assert_eq!(sent["messages"][0]["content"], "hello");
}

#[test]
fn gives_up_after_the_attempt_budget() {
    let (url, server) = stub(vec![(429, "{}".into()), (429, "{}".into())]);
    let lm = HttpLm::new(config(url, 2));
    assert_eq!(lm.complete(&LmRequest::new("x")).unwrap_err(), LmError::RateLimited { attempts: 2 });
    server.join().unwrap();
}

#[test]
fn client_errors_are_not_retried() {
    let (url, server) = stub(vec![(400, r#"{"error":"bad"}"#.into())]);
    let lm = HttpLm::new(config(url, 4));
    assert!(matches!(lm.complete(&LmRequest::new("x")), Err(LmError::BadResponse(_))));
    assert_eq!(server.join().unwrap().len(), 1);
}
