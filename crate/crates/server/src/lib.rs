//! Network front ends for the plotmap engine.
//!
//! - HTTP on one port: `/ws` speaks the line protocol over WebSocket,
//!   `/v1/*` exposes sessions and the batch operations, and any other
//!   path is served from an optional static directory.
//! - Raw TCP, one JSON message per line, on a second port.
//! - stdin/stdout with the same framing.

mod http;
mod worker;

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;

use plotmap_core::protocol::Session;
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader};
use tokio::net::{TcpListener, TcpStream};

pub use http::{router, AppState, MAX_HTTP_SESSIONS};
pub use worker::SessionWorker;

pub const DEFAULT_HTTP_ADDR: &str = "127.0.0.1:7420";
pub const DEFAULT_TCP_ADDR: &str = "127.0.0.1:7411";

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub http_addr: Option<SocketAddr>,
    pub tcp_addr: Option<SocketAddr>,
    pub data_dir: Option<PathBuf>,
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            http_addr: Some(DEFAULT_HTTP_ADDR.parse().expect("valid address")),
            tcp_addr: Some(DEFAULT_TCP_ADDR.parse().expect("valid address")),
            data_dir: None,
            static_dir: None,
        }
    }
}

pub async fn serve_http(
    listener: TcpListener,
    data_dir: Option<PathBuf>,
    static_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    let app = router(AppState::new(data_dir), static_dir);
    axum::serve(listener, app).await
}

/// Accepts line-protocol connections until the listener fails.
pub async fn serve_tcp(listener: TcpListener, data_dir: Option<PathBuf>) -> std::io::Result<()> {
    loop {
        let (stream, peer) = listener.accept().await?;
        let data_dir = data_dir.clone();
        tokio::spawn(async move {
            if let Err(e) = tcp_session(stream, data_dir).await {
                tracing::debug!(%peer, error = %e, "tcp session ended");
            }
        });
    }
}

async fn tcp_session(stream: TcpStream, data_dir: Option<PathBuf>) -> std::io::Result<()> {
    let (read, mut write) = stream.into_split();
    let worker = SessionWorker::spawn(data_dir);
    let (tx, mut rx) = tokio::sync::mpsc::unbounded_channel::<String>();
    let writer = tokio::spawn(async move {
        while let Some(mut msg) = rx.recv().await {
            msg.push('\n');
            write.write_all(msg.as_bytes()).await?;
        }
        write.flush().await
    });
    let mut lines = BufReader::new(read).lines();
    while let Some(line) = lines.next_line().await? {
        if line.trim().is_empty() {
            continue;
        }
        if !worker.submit(line, tx.clone()) {
            break;
        }
    }
    drop(tx);
    drop(worker);
    writer.await.map_err(std::io::Error::other)?
}

/// Serves one session over arbitrary line streams (stdin/stdout in
/// practice). Blank lines are ignored.
pub fn serve_lines(input: impl BufRead, mut output: impl Write, data_dir: Option<PathBuf>) -> std::io::Result<()> {
    let mut session = Session::new(data_dir);
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut failed = None;
        session.handle_line(&line, &mut |msg| {
            if failed.is_none() {
                if let Err(e) = writeln!(output, "{msg}") {
                    failed = Some(e);
                }
            }
        });
        if let Some(e) = failed {
            return Err(e);
        }
        output.flush()?;
    }
    Ok(())
}

pub fn serve_stdio(data_dir: Option<PathBuf>) -> std::io::Result<()> {
    serve_lines(std::io::stdin().lock(), std::io::stdout().lock(), data_dir)
}

/// Binds every configured listener and serves until one of them fails.
pub async fn run(config: ServerConfig) -> std::io::Result<()> {
    let http = match config.http_addr {
        Some(addr) => Some(TcpListener::bind(addr).await?),
        None => None,
    };
    let tcp = match config.tcp_addr {
        Some(addr) => Some(TcpListener::bind(addr).await?),
        None => None,
    };
    if let Some(l) = &http {
        tracing::info!(addr = %l.local_addr()?, "http and websocket listening");
    }
    if let Some(l) = &tcp {
        tracing::info!(addr = %l.local_addr()?, "line protocol listening");
    }
    let data_dir = config.data_dir.clone();
    let http_task = async {
        match http {
            Some(l) => serve_http(l, config.data_dir.clone(), config.static_dir.clone()).await,
            None => std::future::pending().await,
        }
    };
    let tcp_task = async {
        match tcp {
            Some(l) => serve_tcp(l, data_dir).await,
            None => std::future::pending().await,
        }
    };
    tokio::select! {
        r = http_task => r,
        r = tcp_task => r,
    }
}
