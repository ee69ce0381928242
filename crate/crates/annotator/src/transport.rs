//! Describer backends reached over a line-oriented byte stream: a child
//! process (stdin/stdout) or a TCP socket.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use crate::protocol::{AnyRequest, DescribeReply, DescribeRequest, EmbedReply, EmbedRequest};
use crate::{AnnotateError, DescriberBackend};

pub struct LineDescriber {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    child: Option<Child>,
    timeout: Duration,
}

impl LineDescriber {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str, timeout: Duration) -> Result<Self, AnnotateError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(Self { writer: Box::new(stdin), lines: reader_thread(stdout), child: Some(child), timeout })
    }

    pub fn connect_tcp(addr: &str, timeout: Duration) -> Result<Self, AnnotateError> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let read_half = stream.try_clone()?;
        Ok(Self { writer: Box::new(stream), lines: reader_thread(read_half), child: None, timeout })
    }

    fn send(&mut self, line: &str) -> Result<(), AnnotateError> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }

    fn recv_line(&mut self, deadline: Instant) -> Result<String, AnnotateError> {
        let left = deadline.saturating_duration_since(Instant::now());
        match self.lines.recv_timeout(left) {
            Ok(line) => Ok(line?),
            Err(RecvTimeoutError::Timeout) => Err(AnnotateError::Timeout(self.timeout.as_secs_f64())),
            Err(RecvTimeoutError::Disconnected) => {
                Err(AnnotateError::Protocol("describer closed its output".into()))
            }
        }
    }
}

fn reader_thread<R: Read + Send + 'static>(source: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        for line in BufReader::new(source).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

impl DescriberBackend for LineDescriber {
    fn describe(&mut self, request: &DescribeRequest) -> Result<DescribeReply, AnnotateError> {
        let line = serde_json::to_string(request).map_err(|e| AnnotateError::Protocol(e.to_string()))?;
        self.send(&line)?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let raw = self.recv_line(deadline)?;
            let reply: DescribeReply = serde_json::from_str(&raw)
                .map_err(|e| AnnotateError::Protocol(format!("malformed reply: {e}")))?;
            if reply.batch_id < request.batch_id {
                // late answer to a request that already timed out
                log::warn!("discarding stale describer reply for batch {}", reply.batch_id);
                continue;
            }
            return Ok(reply);
        }
    }

    fn embed_text(&mut self, text: &str) -> Result<EmbedReply, AnnotateError> {
        let line = serde_json::to_string(&EmbedRequest { embed_text: text.to_string() })
            .map_err(|e| AnnotateError::Protocol(e.to_string()))?;
        self.send(&line)?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let raw = self.recv_line(deadline)?;
            if serde_json::from_str::<DescribeReply>(&raw).is_ok() {
                log::warn!("discarding stale describer reply while embedding text");
                continue;
            }
            return serde_json::from_str(&raw).map_err(|e| AnnotateError::Protocol(format!("malformed reply: {e}")));
        }
    }
}

/// Answers protocol lines from `reader` with `backend` until end of input.
/// A request that cannot be parsed or answered gets `{"error": ...}` and the
/// loop continues.
pub fn serve_backend<R: BufRead, W: Write>(
    backend: &mut dyn DescriberBackend,
    reader: R,
    mut writer: W,
) -> std::io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<AnyRequest>(&line) {
            Ok(AnyRequest::Describe(req)) => backend.describe(&req).map(|r| serde_json::to_string(&r)),
            Ok(AnyRequest::Embed(req)) => backend.embed_text(&req.embed_text).map(|r| serde_json::to_string(&r)),
            Err(e) => Err(AnnotateError::Protocol(format!("malformed request: {e}"))),
        };
        let out = match reply {
            Ok(Ok(json)) => json,
            Ok(Err(e)) => serde_json::json!({ "error": e.to_string() }).to_string(),
            Err(e) => serde_json::json!({ "error": e.to_string() }).to_string(),
        };
        writeln!(writer, "{out}")?;
        writer.flush()?;
    }
    Ok(())
}

impl Drop for LineDescriber {
    fn drop(&mut self) {
        if let Some(child) = self.child.as_mut() {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}
