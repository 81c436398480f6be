use std::path::PathBuf;
use std::sync::mpsc;
use std::thread;

use plotmap_core::protocol::Session;
use tokio::sync::mpsc::UnboundedSender;

struct Job {
    line: String,
    out: UnboundedSender<String>,
}

/// A protocol session running on its own thread. Requests are handled
/// strictly in submission order; each job's messages (events, then the
/// response) go to the sender supplied with it, which is dropped once the
/// response has been written.
pub struct SessionWorker {
    jobs: mpsc::Sender<Job>,
}

impl SessionWorker {
    pub fn spawn(data_dir: Option<PathBuf>) -> Self {
        let (jobs, rx) = mpsc::channel::<Job>();
        thread::Builder::new()
            .name("plotmap-session".into())
            .spawn(move || {
                let mut session = Session::new(data_dir);
                for job in rx {
                    session.handle_line(&job.line, &mut |msg| {
                        let _ = job.out.send(msg);
                    });
                }
            })
            .expect("spawn session thread");
        Self { jobs }
    }

    /// Queues one request line. Returns false if the worker has stopped.
    pub fn submit(&self, line: String, out: UnboundedSender<String>) -> bool {
        self.jobs.send(Job { line, out }).is_ok()
    }

    /// Runs one request and collects its messages; the response is last.
    pub async fn call(&self, line: String) -> Vec<String> {
        let (tx, mut rx) = tokio::sync::mpsc::unbounded_channel();
        if !self.submit(line, tx) {
            return Vec::new();
        }
        let mut out = Vec::new();
        while let Some(msg) = rx.recv().await {
            out.push(msg);
        }
        out
    }
}
