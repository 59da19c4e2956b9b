//! The `/ws` protocol. Requests on one connection run concurrently; the
//! answers of each request are delivered in order.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket};
use futures_util::{SinkExt, StreamExt};
use polyseek::retrieval::{QueryOutcome, QuerySpec};
use serde::de::DeserializeOwned;
use serde_json::Value;
use tokio::sync::mpsc::{unbounded_channel, UnboundedSender};

use crate::api::{ApiError, ApiMessage, MoreLikeThisRequest, RefineBody, PROTOCOL_VERSION};
use crate::routes::mlt;
use crate::{AppState, NETWORK_PATHS};

type Outbox = UnboundedSender<ApiMessage>;

pub(crate) async fn session(socket: WebSocket, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    let (tx, mut rx) = unbounded_channel::<ApiMessage>();
    let writer = tokio::spawn(async move {
        while let Some(msg) = rx.recv().await {
            let text = serde_json::to_string(&msg).expect("messages serialize");
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });
    while let Some(Ok(frame)) = stream.next().await {
        match frame {
            Message::Text(text) => {
                let (state, tx) = (state.clone(), tx.clone());
                tokio::spawn(async move { handle(&state, text.as_str(), &tx).await });
            }
            Message::Binary(_) => {
                send_error(&tx, "", &ApiError::bad_request("binary frames are not supported; send JSON text"));
            }
            Message::Close(_) => break,
            _ => {}
        }
    }
    drop(tx);
    let _ = writer.await;
}

fn send_error(tx: &Outbox, request_id: &str, e: &ApiError) {
    let body = serde_json::to_value(e.body()).expect("error body serializes");
    let _ = tx.send(ApiMessage::reply("ERROR", request_id, body));
}

fn payload<T: DeserializeOwned>(value: Value) -> Result<T, ApiError> {
    serde_json::from_value(value).map_err(|e| ApiError::bad_request(format!("malformed payload: {e}")))
}

async fn handle(state: &AppState, text: &str, tx: &Outbox) {
    let msg: ApiMessage = match serde_json::from_str(text) {
        Ok(m) => m,
        Err(e) => {
            // Echo the id even when the rest of the frame is unusable.
            let id = serde_json::from_str::<Value>(text)
                .ok()
                .and_then(|v| v.get("request_id")?.as_str().map(str::to_string))
                .unwrap_or_default();
            send_error(tx, &id, &ApiError::bad_request(format!("malformed message: {e}")));
            return;
        }
    };
    let id = msg.request_id.clone();
    if let Err(e) = dispatch(state, msg, tx).await {
        send_error(tx, &id, &e);
    }
}

async fn dispatch(state: &AppState, msg: ApiMessage, tx: &Outbox) -> Result<(), ApiError> {
    if let Some(v) = msg.protocol_version.filter(|&v| v != PROTOCOL_VERSION) {
        return Err(ApiError::bad_request(format!("protocol_version {v} is not supported (server speaks {PROTOCOL_VERSION})")));
    }
    let id = msg.request_id;
    let start = || tx.send(ApiMessage::reply("QUERY_START", &id, Value::Object(Default::default())));
    let outcome: QueryOutcome = match msg.message_type.as_str() {
        "QUERY" => {
            let spec: QuerySpec = payload(msg.payload)?;
            state.check_reference_sizes(&spec)?;
            let query = state.run(move |_| spec.decode(NETWORK_PATHS)).await?;
            let _ = start();
            // Stops late batches of a timed-out query from following its ERROR.
            let open = Arc::new(AtomicBool::new(true));
            let (batches, still_open, rid) = (tx.clone(), Arc::clone(&open), id.clone());
            let result = state
                .run(move |engine| {
                    engine.retriever.execute(&engine.read(), &query, |batch| {
                        if still_open.load(Ordering::SeqCst) {
                            let body = serde_json::to_value(&batch).expect("batches serialize");
                            let _ = batches.send(ApiMessage::reply("RESULT_BATCH", &rid, body));
                        }
                    })
                })
                .await;
            open.store(false, Ordering::SeqCst);
            result?
        }
        "MLT" => {
            let req: MoreLikeThisRequest = payload(msg.payload)?;
            let _ = start();
            state.run(move |engine| mlt(engine, &req)).await?
        }
        "REFINE" => {
            let req: RefineBody = payload(msg.payload)?;
            let _ = start();
            state.run(move |engine| engine.retriever.refine(&engine.read(), &req.session_id, &req.request)).await?
        }
        other => {
            return Err(ApiError::new(
                axum::http::StatusCode::BAD_REQUEST,
                "UNKNOWN_MESSAGE_TYPE",
                format!("unknown message_type `{other}`; expected QUERY, MLT or REFINE"),
            ))
        }
    };
    let body = serde_json::to_value(&outcome).expect("outcomes serialize");
    let _ = tx.send(ApiMessage::reply("QUERY_END", &id, body));
    Ok(())
}
