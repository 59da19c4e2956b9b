mod common;

use std::net::SocketAddr;

use common::{json, post, spawn, Setup};
use futures_util::{SinkExt, StreamExt};
use polyseek::retrieval::{CategoryBatch, QueryOutcome};
use polyseek_server::api::{ApiMessage, ErrorBody};
use polyseek_server::PROTOCOL_VERSION;
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn connect(addr: SocketAddr, query: &str) -> Socket {
    connect_async(format!("ws://{addr}/ws{query}")).await.unwrap().0
}

async fn send(ws: &mut Socket, text: String) {
    ws.send(Message::text(text)).await.unwrap();
}

async fn request(ws: &mut Socket, message_type: &str, id: &str, payload: Value) {
    send(ws, json!({ "message_type": message_type, "request_id": id, "payload": payload }).to_string()).await;
}

async fn next(ws: &mut Socket) -> ApiMessage {
    loop {
        match ws.next().await.expect("socket closed").unwrap() {
            Message::Text(t) => {
                let msg: ApiMessage = json(t.as_bytes());
                assert_eq!(msg.protocol_version, Some(PROTOCOL_VERSION));
                return msg;
            }
            Message::Close(_) => panic!("server closed the connection"),
            _ => {}
        }
    }
}

/// Reads until QUERY_END or ERROR for `id`; returns everything received for it.
async fn until_done(ws: &mut Socket, id: &str) -> Vec<ApiMessage> {
    let mut got = Vec::new();
    loop {
        let msg = next(ws).await;
        if msg.request_id != id {
            continue;
        }
        let done = matches!(msg.message_type.as_str(), "QUERY_END" | "ERROR");
        got.push(msg);
        if done {
            return got;
        }
    }
}

fn kinds(msgs: &[ApiMessage]) -> Vec<&str> {
    msgs.iter().map(|m| m.message_type.as_str()).collect()
}

#[tokio::test]
async fn query_streams_batches_and_matches_rest() {
    let s = Setup::new();
    let state = s.state();
    let addr = spawn(state.clone()).await;
    let mut ws = connect(addr, "").await;
    let spec = s.image_query("harbour.png");
    request(&mut ws, "QUERY", "q1", serde_json::to_value(&spec).unwrap()).await;
    let msgs = until_done(&mut ws, "q1").await;

    let k = kinds(&msgs);
    assert_eq!(k.first(), Some(&"QUERY_START"));
    assert_eq!(k.last(), Some(&"QUERY_END"));
    assert_eq!(k.iter().filter(|&&t| t == "QUERY_START").count(), 1);
    assert_eq!(k.iter().filter(|&&t| t == "QUERY_END").count(), 1);
    let batches: Vec<CategoryBatch> =
        msgs.iter().filter(|m| m.message_type == "RESULT_BATCH").map(|m| serde_json::from_value(m.payload.clone()).unwrap()).collect();
    let mut categories: Vec<&str> = batches.iter().map(|b| b.category.as_str()).collect();
    categories.sort();
    let mut defaults: Vec<&str> = polyseek::features::DEFAULT_IMAGE_CATEGORIES.to_vec();
    defaults.sort();
    assert_eq!(categories, defaults, "one batch per category");

    let ws_outcome: QueryOutcome = serde_json::from_value(msgs.last().unwrap().payload.clone()).unwrap();
    let (_, body) = post(&state, "/api/query", &spec).await;
    let rest: QueryOutcome = json(&body);
    assert_eq!(serde_json::to_string(&ws_outcome.results).unwrap(), serde_json::to_string(&rest.results).unwrap());
}

#[tokio::test]
async fn errors_echo_the_request_and_keep_the_connection() {
    let s = Setup::new();
    let addr = spawn(s.state()).await;
    let mut ws = connect(addr, "").await;

    request(&mut ws, "QUERY", "bad-payload", json!({ "components": "nope" })).await;
    let msgs = until_done(&mut ws, "bad-payload").await;
    assert_eq!(kinds(&msgs), ["ERROR"]);
    let err: ErrorBody = serde_json::from_value(msgs[0].payload.clone()).unwrap();
    assert_eq!(err.code, "INVALID_QUERY");

    request(&mut ws, "DANCE", "u1", json!({})).await;
    let msgs = until_done(&mut ws, "u1").await;
    assert_eq!(msgs[0].payload["code"], "UNKNOWN_MESSAGE_TYPE");

    // Unparseable text has no id to echo.
    send(&mut ws, r#"{"request_id": "r9", "payload": 3"#.into()).await;
    let msg = next(&mut ws).await;
    assert_eq!((msg.message_type.as_str(), msg.request_id.as_str()), ("ERROR", ""));
    send(&mut ws, r#"{"request_id": "r9", "payload": 3}"#.into()).await;
    let msg = next(&mut ws).await;
    assert_eq!((msg.message_type.as_str(), msg.request_id.as_str()), ("ERROR", "r9"));
    send(&mut ws, r#"{"message_type": 5, "request_id": "r10"}"#.into()).await;
    assert_eq!(next(&mut ws).await.request_id, "r10");

    send(&mut ws, json!({ "message_type": "MLT", "request_id": "v2", "protocol_version": 2, "payload": {} }).to_string())
        .await;
    assert_eq!(kinds(&until_done(&mut ws, "v2").await), ["ERROR"]);

    // Still usable after all of the above.
    let seed = format!("{}.0", s.object_id("harbour.png"));
    request(&mut ws, "MLT", "m1", json!({ "segment_id": seed })).await;
    let msgs = until_done(&mut ws, "m1").await;
    assert_eq!(kinds(&msgs), ["QUERY_START", "QUERY_END"]);
    let outcome: QueryOutcome = serde_json::from_value(msgs[1].payload.clone()).unwrap();
    assert!(outcome.results.iter().all(|r| r.segment_id != seed));

    request(&mut ws, "REFINE", "r1", json!({ "session_id": outcome.session_id, "media_filter": ["AUDIO"] })).await;
    let msgs = until_done(&mut ws, "r1").await;
    let refined: QueryOutcome = serde_json::from_value(msgs.last().unwrap().payload.clone()).unwrap();
    assert!(refined.results.is_empty());
    request(&mut ws, "REFINE", "r2", json!({ "session_id": "gone" })).await;
    let msgs = until_done(&mut ws, "r2").await;
    assert_eq!(kinds(&msgs), ["QUERY_START", "ERROR"]);
    assert_eq!(msgs[1].payload["code"], "SESSION_EXPIRED");
}

#[tokio::test]
async fn concurrent_requests_keep_per_request_order() {
    let s = Setup::new();
    let addr = spawn(s.state()).await;
    let mut ws = connect(addr, "").await;
    let ids = ["a", "b", "c"];
    for (id, name) in ids.iter().zip(["harbour.png", "meadow.png", "harbour.png"]) {
        request(&mut ws, "QUERY", id, serde_json::to_value(s.image_query(name)).unwrap()).await;
    }
    let mut seen: std::collections::BTreeMap<String, Vec<String>> = Default::default();
    while seen.values().filter(|v| v.last().map(String::as_str) == Some("QUERY_END")).count() < ids.len() {
        let m = next(&mut ws).await;
        seen.entry(m.request_id).or_default().push(m.message_type);
    }
    for id in ids {
        let k = &seen[id];
        assert_eq!(k.first().map(String::as_str), Some("QUERY_START"), "{id}: {k:?}");
        assert!(k[1..k.len() - 1].iter().all(|t| t == "RESULT_BATCH"), "{id}: {k:?}");
    }
}

#[tokio::test]
async fn websocket_requires_the_token() {
    let s = Setup::with_config(|c| c.server.token = Some("tok".into()));
    let addr = spawn(s.state()).await;
    assert!(connect_async(format!("ws://{addr}/ws")).await.is_err());
    let mut ws = connect(addr, "?token=tok").await;
    request(&mut ws, "REFINE", "x", json!({ "session_id": "none" })).await;
    assert_eq!(until_done(&mut ws, "x").await.last().unwrap().message_type, "ERROR");
}
