//! Byte transports a session runs over: an in-process pipe pair for tests
//! and demos, and a TCP stream. Framing lives a layer up; a transport only
//! moves bytes in order.

use std::collections::VecDeque;
use std::io::{self, Read, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{channel, Receiver, Sender};

pub trait Transport: Send {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()>;
    fn recv_exact(&mut self, buf: &mut [u8]) -> io::Result<()>;
}

/// In-process bidirectional pipe. Each endpoint owns one half; the two
/// halves are connected by unbounded channels, so a send never blocks.
pub struct PipeTransport {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    pending: VecDeque<u8>,
}

impl PipeTransport {
    pub fn pair() -> (PipeTransport, PipeTransport) {
        let (a_tx, b_rx) = channel();
        let (b_tx, a_rx) = channel();
        (
            PipeTransport {
                tx: a_tx,
                rx: a_rx,
                pending: VecDeque::new(),
            },
            PipeTransport {
                tx: b_tx,
                rx: b_rx,
                pending: VecDeque::new(),
            },
        )
    }
}

impl Transport for PipeTransport {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.tx
            .send(bytes.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "peer endpoint dropped"))
    }

    fn recv_exact(&mut self, buf: &mut [u8]) -> io::Result<()> {
        let mut filled = 0;
        while filled < buf.len() {
            if let Some(byte) = self.pending.pop_front() {
                buf[filled] = byte;
                filled += 1;
                continue;
            }
            let chunk = self.rx.recv().map_err(|_| {
                io::Error::new(io::ErrorKind::UnexpectedEof, "peer endpoint closed")
            })?;
            self.pending.extend(chunk);
        }
        Ok(())
    }
}

pub struct TcpTransport {
    stream: TcpStream,
}

impl TcpTransport {
    pub fn connect<A: ToSocketAddrs>(addr: A) -> io::Result<TcpTransport> {
        Ok(TcpTransport {
            stream: TcpStream::connect(addr)?,
        })
    }

    /// Binds, accepts a single connection, and returns its transport.
    pub fn accept_one<A: ToSocketAddrs>(addr: A) -> io::Result<TcpTransport> {
        let listener = TcpListener::bind(addr)?;
        let (stream, _) = listener.accept()?;
        Ok(TcpTransport { stream })
    }

    pub fn from_stream(stream: TcpStream) -> TcpTransport {
        TcpTransport { stream }
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.stream.write_all(bytes)
    }

    fn recv_exact(&mut self, buf: &mut [u8]) -> io::Result<()> {
        self.stream.read_exact(buf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;

    #[test]
    fn pipe_delivers_bytes_in_order_across_chunk_sizes() {
        let (mut a, mut b) = PipeTransport::pair();
        a.send(&[1, 2, 3]).unwrap();
        a.send(&[4]).unwrap();
        a.send(&[5, 6]).unwrap();
        let mut first = [0u8; 2];
        let mut rest = [0u8; 4];
        b.recv_exact(&mut first).unwrap();
        b.recv_exact(&mut rest).unwrap();
        assert_eq!(first, [1, 2]);
        assert_eq!(rest, [3, 4, 5, 6]);
    }

    #[test]
    fn pipe_signals_eof_when_peer_drops() {
        let (mut a, b) = PipeTransport::pair();
        drop(b);
        let mut buf = [0u8; 1];
        assert!(a.recv_exact(&mut buf).is_err());
    }

    #[test]
    fn tcp_round_trips_bytes() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut t = TcpTransport::from_stream(stream);
            let mut buf = [0u8; 5];
            t.recv_exact(&mut buf).unwrap();
            t.send(&buf).unwrap();
            buf
        });
        let mut client = TcpTransport::connect(addr).unwrap();
        client.send(b"hello").unwrap();
        let mut echo = [0u8; 5];
        client.recv_exact(&mut echo).unwrap();
        assert_eq!(&echo, b"hello");
        assert_eq!(&server.join().unwrap(), b"hello");
    }
}
