//! Client for the plotmap service: batch operations and sessions over
//! HTTP, plus the newline-delimited protocol over raw TCP.

use std::net::SocketAddr;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use plotmap_core::api::{
    EvaluateRequest, GenerateMapsRequest, GenerateTasksRequest, GenerateTasksResponse, RenderRequest, RolloutRequest,
    RolloutResponse,
};
use plotmap_core::solvers::EvalReport;
use plotmap_core::worldgen::WorldMap;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("http: {0}")]
    Http(#[from] reqwest::Error),
    #[error("server error {status} ({code}): {message}")]
    Server { status: u16, code: String, message: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("protocol: {0}")]
    Protocol(String),
}

pub type Result<T> = std::result::Result<T, ClientError>;

/// Messages produced by one protocol request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub events: Vec<Value>,
    pub response: Value,
}

impl Exchange {
    pub fn ok(&self) -> bool {
        self.response["ok"] == Value::Bool(true)
    }

    pub fn payload(&self) -> &Value {
        &self.response["payload"]
    }

    pub fn error_code(&self) -> Option<&str> {
        self.response["error"]["code"].as_str()
    }
}

#[derive(Debug, Clone)]
pub struct HttpClient {
    base: String,
    http: reqwest::Client,
}

#[derive(Deserialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Deserialize)]
struct ErrorDetail {
    code: String,
    message: String,
}

impl HttpClient {
    /// `base` is the service root, e.g. `http://127.0.0.1:7420`.
    pub fn new(base: &str) -> Self {
        Self {
            base: base.trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }

    async fn check(resp: reqwest::Response) -> Result<reqwest::Response> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let bytes = resp.bytes().await?;
        let (code, message) = match serde_json::from_slice::<ErrorBody>(&bytes) {
            Ok(body) => (body.error.code, body.error.message),
            Err(_) => ("http".to_string(), String::from_utf8_lossy(&bytes).into_owned()),
        };
        Err(ClientError::Server {
            status: status.as_u16(),
            code,
            message,
        })
    }

    async fn post<B: Serialize + ?Sized>(&self, path: &str, body: &B) -> Result<reqwest::Response> {
        let resp = self.http.post(self.url(path)).json(body).send().await?;
        Self::check(resp).await
    }

    async fn post_json<B: Serialize + ?Sized, T: DeserializeOwned>(&self, path: &str, body: &B) -> Result<T> {
        let bytes = self.post(path, body).await?.bytes().await?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub async fn health(&self) -> Result<Value> {
        let resp = Self::check(self.http.get(self.url("/v1/health")).send().await?).await?;
        Ok(serde_json::from_slice(&resp.bytes().await?)?)
    }

    pub async fn generate_maps(&self, req: &GenerateMapsRequest) -> Result<Vec<WorldMap>> {
        self.post_json("/v1/maps/generate", req).await
    }

    pub async fn generate_tasks(&self, req: &GenerateTasksRequest) -> Result<GenerateTasksResponse> {
        self.post_json("/v1/tasks/generate", req).await
    }

    pub async fn evaluate(&self, req: &EvaluateRequest) -> Result<EvalReport> {
        self.post_json("/v1/evaluate", req).await
    }

    pub async fn rollout(&self, req: &RolloutRequest) -> Result<RolloutResponse> {
        self.post_json("/v1/rollout", req).await
    }

    /// Trail overlay of a rollout response, decoded.
    pub fn rollout_png(resp: &RolloutResponse) -> Result<Option<Vec<u8>>> {
        resp.png_base64
            .as_deref()
            .map(|s| {
                BASE64
                    .decode(s)
                    .map_err(|e| ClientError::Protocol(format!("bad png payload: {e}")))
            })
            .transpose()
    }

    /// PNG bytes of the rendered map.
    pub async fn render(&self, req: &RenderRequest) -> Result<Vec<u8>> {
        Ok(self.post("/v1/render", req).await?.bytes().await?.to_vec())
    }

    pub async fn open_session(&self) -> Result<HttpSession> {
        let resp = Self::check(self.http.post(self.url("/v1/sessions")).send().await?).await?;
        let body: Value = serde_json::from_slice(&resp.bytes().await?)?;
        let id = body["session"]
            .as_u64()
            .ok_or_else(|| ClientError::Protocol("session id missing".into()))?;
        Ok(HttpSession {
            client: self.clone(),
            id,
        })
    }
}

/// A protocol session held by the server and addressed over HTTP.
pub struct HttpSession {
    client: HttpClient,
    id: u64,
}

impl HttpSession {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub async fn send(&self, request: &Value) -> Result<Exchange> {
        let path = format!("/v1/sessions/{}", self.id);
        let resp = self
            .client
            .http
            .post(self.client.url(&path))
            .body(request.to_string())
            .send()
            .await?;
        let bytes = HttpClient::check(resp).await?.bytes().await?;
        Ok(serde_json::from_slice(&bytes)?)
    }

    pub async fn close(self) -> Result<()> {
        let path = format!("/v1/sessions/{}", self.id);
        HttpClient::check(self.client.http.delete(self.client.url(&path)).send().await?).await?;
        Ok(())
    }
}

/// Newline-delimited protocol over TCP.
pub struct LineClient {
    lines: Lines<BufReader<OwnedReadHalf>>,
    write: OwnedWriteHalf,
}

impl LineClient {
    pub async fn connect(addr: SocketAddr) -> Result<Self> {
        let (read, write) = TcpStream::connect(addr).await?.into_split();
        Ok(Self {
            lines: BufReader::new(read).lines(),
            write,
        })
    }

    /// Sends a raw line and gathers messages up to and including the
    /// response (the first message without an `event` field).
    pub async fn send_line(&mut self, line: &str) -> Result<Exchange> {
        self.write.write_all(line.as_bytes()).await?;
        self.write.write_all(b"\n").await?;
        self.write.flush().await?;
        let mut events = Vec::new();
        loop {
            let line = self
                .lines
                .next_line()
                .await?
                .ok_or_else(|| ClientError::Protocol("connection closed before a response".into()))?;
            let msg: Value = serde_json::from_str(&line)?;
            if msg.get("event").is_some() {
                events.push(msg);
            } else {
                return Ok(Exchange { events, response: msg });
            }
        }
    }

    pub async fn send(&mut self, request: &Value) -> Result<Exchange> {
        self.send_line(&request.to_string()).await
    }
}
