// Starts the HTTP API on an ephemeral port, drives it with plain HTTP/1.1
// requests, then shuts it down.
//
// For a long-running server use `viewpoints serve --log <file>`.

use std::io::{Read, Write};
use std::net::TcpStream;

use viewpoints::service::{router, AppState};
use viewpoints::session::{apple_script, graph_through};

fn request(addr: std::net::SocketAddr, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(addr)?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    Ok(response.split("\r\n\r\n").nth(1).unwrap_or_default().to_string())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let state = AppState::in_memory(graph_through(&apple_script(), 2)?);
    let runtime = tokio::runtime::Runtime::new()?;
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    let server = runtime.spawn(async move { axum::serve(listener, router(state)).await });
    println!("serving on {addr}");

    let paths = r#"{"source": "B", "target": "apple"}"#;
    println!("POST /query/paths  {}", request(addr, "POST", "/query/paths", paths)?);
    let like = r#"{"agent": "B", "document": "D1", "topic": "apple", "polarity": 1, "at": 3}"#;
    println!("POST /feedback     {}", request(addr, "POST", "/feedback", like)?);
    println!("POST /query/paths  {}", request(addr, "POST", "/query/paths", paths)?);
    let bad = r#"{"emitter": "B", "r2": "B", "r3": "B", "paradigm": "feel", "polarity": 1, "at": 3}"#;
    println!("POST /viewpoints   {}", request(addr, "POST", "/viewpoints", bad)?);
    println!("GET  /version      {}", request(addr, "GET", "/version", "")?);

    server.abort();
    Ok(())
}
