use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::Arc;
use std::thread;

use crate::service::QueryService;

/// Serves request lines from `reader` until end of input. Blank lines are
/// skipped.
pub fn serve_stdio<R: BufRead, W: Write>(service: &QueryService, reader: R, mut writer: W) -> io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(writer, "{}", service.handle_line(&line))?;
        writer.flush()?;
    }
    Ok(())
}

pub fn serve_connection(service: &QueryService, stream: TcpStream) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_stdio(service, reader, stream)
}

/// Accepts connections forever, one thread per connection.
pub fn serve_tcp(service: Arc<QueryService>, listener: TcpListener) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = serve_connection(&service, stream) {
                log::warn!("query connection {peer}: {e}");
            }
        });
    }
    Ok(())
}
