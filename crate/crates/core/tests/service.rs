use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use viewpoints::service::{router, AppState};
use viewpoints::session::{apple_script, graph_through};

async fn call(state: &AppState, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let response = router(state.clone()).oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

fn step(n: usize) -> AppState {
    AppState::in_memory(graph_through(&apple_script(), n).unwrap())
}

#[tokio::test]
async fn paths_after_step_two_are_doubled() {
    let state = step(2);
    let (status, body) = call(
        &state,
        Method::POST,
        "/query/paths",
        Some(json!({"perspective": "neutral", "source": "B", "target": "apple"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["result"]["best_length"], json!(2.5));
    assert_eq!(
        body["result"]["paths"],
        json!([["B", "A", "D1", "apple"], ["B", "A", "D2", "apple"]])
    );
    assert_eq!(body["version"], json!(state.snapshot().version()));
}

#[tokio::test]
async fn feedback_then_paths_reproduces_step_three() {
    let state = step(2);
    let (status, body) = call(
        &state,
        Method::POST,
        "/feedback",
        Some(json!({"agent": "B", "document": "D1", "topic": "apple", "polarity": 1, "at": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["ids"].as_array().unwrap().len(), 2);
    let (_, body) = call(
        &state,
        Method::POST,
        "/query/paths",
        Some(json!({"source": "B", "target": "apple"})),
    )
    .await;
    assert_eq!(body["result"]["paths"], json!([["B", "D1", "apple"]]));
    let len = body["result"]["best_length"].as_f64().unwrap();
    assert!((len - 4.0 / 3.0).abs() < 1e-9);
}

#[tokio::test]
async fn inline_perspective_excluding_self() {
    let state = step(4);
    let (status, body) = call(
        &state,
        Method::POST,
        "/query/paths",
        Some(json!({"perspective": {"exclude_emitters": ["B"]}, "source": "B", "target": "apple"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["result"]["paths"].as_array().unwrap().len(), 3);
    assert_eq!(body["result"]["best_length"], json!(2.5));
}

#[tokio::test]
async fn near_with_and_without_via() {
    let state = step(4);
    let (_, body) = call(
        &state,
        Method::POST,
        "/query/near",
        Some(json!({"origin": "C", "kind": "document", "k": 1, "via": "apple"})),
    )
    .await;
    assert_eq!(body["result"][0]["id"], json!("D3"));
    assert_eq!(body["result"][0]["distance"], json!(1.5));
    let (_, body) = call(&state, Method::POST, "/query/near", Some(json!({"origin": "B", "kind": "document", "k": 3}))).await;
    let ids: Vec<&str> = body["result"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["D1", "D2", "D3"]);
}

#[tokio::test]
async fn neighborhood_and_map() {
    let state = step(3);
    let (status, body) = call(
        &state,
        Method::POST,
        "/query/neighborhood",
        Some(json!({"origin": "B", "radius": 1.4})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let ids: Vec<&str> = body["result"]["nodes"].as_array().unwrap().iter().map(|r| r["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["B", "A", "C", "D1", "apple"]);

    let (status, body) = call(&state, Method::GET, "/map", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(!body["map"]["edges"].as_array().unwrap().is_empty());
    let (status, _) = call(&state, Method::GET, "/map?perspective=bogus", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn events_since() {
    let state = step(5);
    let (_, all) = call(&state, Method::GET, "/events?since=0", None).await;
    assert_eq!(all["events"].as_array().unwrap().len(), 23);
    let (_, tail) = call(&state, Method::GET, "/events?since=20", None).await;
    let seqs: Vec<u64> = tail["events"].as_array().unwrap().iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, [21, 22, 23]);
    let (status, _) = call(&state, Method::GET, "/events?since=abc", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn error_statuses() {
    let state = step(1);
    let cases = [
        (
            "/viewpoints",
            json!({"emitter": "A", "r2": "B", "r3": "B", "paradigm": "feel", "polarity": 1, "at": 2}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "SelfLoop",
        ),
        (
            "/viewpoints",
            json!({"emitter": "D1", "r2": "A", "r3": "B", "paradigm": "feel", "polarity": 1, "at": 2}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "NonAgentEmitter",
        ),
        (
            "/viewpoints",
            json!({"emitter": "A", "r2": "A", "r3": "nobody", "paradigm": "feel", "polarity": 1, "at": 2}),
            StatusCode::NOT_FOUND,
            "UnknownResource",
        ),
        (
            "/resources",
            json!({"id": "A", "kind": "agent", "agency": "human"}),
            StatusCode::CONFLICT,
            "DuplicateId",
        ),
        ("/resources", json!({"kind": "spaceship"}), StatusCode::BAD_REQUEST, "InvalidBody"),
        (
            "/query/paths",
            json!({"perspective": {"half_life": -1.0}, "source": "A", "target": "B"}),
            StatusCode::BAD_REQUEST,
            "InvalidPerspective",
        ),
        (
            "/query/paths",
            json!({"source": "A", "target": "A"}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "SameResource",
        ),
        (
            "/feedback",
            json!({"agent": "D1", "document": "D2", "polarity": 1, "at": 2}),
            StatusCode::UNPROCESSABLE_ENTITY,
            "KindMismatch",
        ),
    ];
    let before = state.snapshot().version();
    for (uri, body, status, code) in cases {
        let (got, resp) = call(&state, Method::POST, uri, Some(body.clone())).await;
        assert_eq!(got, status, "{uri} {body}: {resp}");
        assert_eq!(resp["error"], json!(code), "{uri} {body}");
    }
    assert_eq!(state.snapshot().version(), before, "failed writes must not publish");
}

#[tokio::test]
async fn writes_persist_to_the_log() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let state = AppState::open(&path).unwrap();
    let (status, body) = call(
        &state,
        Method::POST,
        "/resources",
        Some(json!({"id": "L", "kind": "agent", "agency": "human", "at": 1})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    call(&state, Method::POST, "/resources", Some(json!({"id": "d", "kind": "document"}))).await;
    let (status, _) = call(
        &state,
        Method::POST,
        "/viewpoints",
        Some(json!({"emitter": "L", "r2": "L", "r3": "d", "paradigm": "feel", "polarity": -1, "at": 2})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    drop(state);

    let reopened = AppState::open(&path).unwrap();
    let graph = reopened.snapshot();
    assert_eq!(graph.resource_count(), 2);
    assert_eq!(graph.viewpoint_count(), 1);
    let (_, v) = call(&reopened, Method::GET, "/version", None).await;
    assert_eq!(v["version"], json!(graph.version()));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writes_linearize() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.jsonl");
    let state = AppState::open(&path).unwrap();
    for (id, kind) in [("L", "agent"), ("M", "agent"), ("d", "document")] {
        let agency = (kind == "agent").then_some("human");
        call(&state, Method::POST, "/resources", Some(json!({"id": id, "kind": kind, "agency": agency}))).await;
    }
    let mut tasks = Vec::new();
    for i in 0..32 {
        let state = state.clone();
        tasks.push(tokio::spawn(async move {
            let emitter = if i % 2 == 0 { "L" } else { "M" };
            let body = json!({"emitter": emitter, "r2": emitter, "r3": "d", "paradigm": "feel", "polarity": 1, "at": 1});
            let (status, resp) = call(&state, Method::POST, "/viewpoints", Some(body)).await;
            assert_eq!(status, StatusCode::OK);
            (resp["version"].as_u64().unwrap(), resp["id"].as_str().unwrap().to_string())
        }));
    }
    let mut seen = Vec::new();
    for t in tasks {
        seen.push(t.await.unwrap());
    }
    seen.sort();
    let versions: Vec<u64> = seen.iter().map(|(v, _)| *v).collect();
    assert_eq!(versions, (4..=35).collect::<Vec<_>>());

    let text = std::fs::read_to_string(&path).unwrap();
    for (version, vp_id) in &seen {
        let line: Value = serde_json::from_str(text.lines().nth(*version as usize - 1).unwrap()).unwrap();
        assert_eq!(line["seq"], json!(version));
        assert_eq!(line["id"], json!(vp_id));
    }
}
