//! Live broker mode: drive a real MQTT session over TCP, verify acceptance of
//! each QoS-1 PUBLISH by its PUBACK, and write a reconstructed bidirectional
//! capture.
//!
//! The capture is assembled in user space from the bytes actually sent and
//! received: a synthetic TCP handshake opens the session trace and every MQTT
//! packet is framed with the socket's real addresses and live timestamps.
//! Transport-level segments the kernel exchanged (pure ACKs, retransmissions)
//! are not visible at this layer and are not reconstructed.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fpa_core::craft::{generate_publishes, CraftError, CraftSpec, NetParams};
use fpa_core::frame::{frame_packet, CaptureFrame, Timestamp};
use fpa_core::mqtt::{
    build_connect, decode_packet_prefix, encode_packet, CodecError, ConnectOptions, MqttPacket,
    PacketType,
};
use fpa_core::tcp::{emit_segment, flags, SessionContext};

use crate::pcap::{write_pcap_file, PcapError};

#[derive(Debug, thiserror::Error)]
pub enum LiveError {
    #[error("port 8883 is MQTT-over-TLS; encrypted transport is out of scope")]
    TlsPortRejected,
    #[error("cannot resolve {0}")]
    Resolve(String),
    #[error("connection failed: {0}")]
    ConnectRefused(io::Error),
    #[error("broker refused the session: CONNACK return code {0}")]
    ConnackNonZero(u8),
    #[error("no PUBACK for packet id {0} within the timeout")]
    PubackTimeout(u16),
    #[error("broker closed the connection")]
    UnexpectedClose,
    #[error("broker sent malformed data: {0}")]
    Malformed(CodecError),
    #[error(transparent)]
    Craft(#[from] CraftError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Pcap(#[from] PcapError),
}

/// A broker endpoint. Port 8883 (TLS) is rejected at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveEndpoint {
    pub host: String,
    pub port: u16,
    pub timeout: Duration,
}

impl LiveEndpoint {
    pub fn new(host: &str, port: u16, timeout: Duration) -> Result<Self, LiveError> {
        if port == 8883 {
            return Err(LiveError::TlsPortRejected);
        }
        Ok(LiveEndpoint {
            host: host.to_string(),
            port,
            timeout,
        })
    }

    fn resolve(&self) -> Result<SocketAddr, LiveError> {
        (self.host.as_str(), self.port)
            .to_socket_addrs()
            .map_err(|_| LiveError::Resolve(self.host.clone()))?
            .next()
            .ok_or_else(|| LiveError::Resolve(self.host.clone()))
    }
}

/// Outcome of one live session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveReport {
    pub connack_rc: u8,
    pub sent_count: usize,
    pub puback_count: usize,
    pub capture_path: Option<PathBuf>,
}

fn now_ts() -> Timestamp {
    let elapsed = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .unwrap_or_default();
    Timestamp::new(elapsed.as_secs() as u32, elapsed.subsec_micros())
}

/// Reconstructs capture frames for one direction of the live byte stream.
struct CaptureBuilder {
    client: SessionContext,
    server: SessionContext,
    mss: u32,
    frames: Vec<CaptureFrame>,
}

impl CaptureBuilder {
    fn new(local: SocketAddr, peer: SocketAddr, mss: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6c69_7665);
        let (src_ip, dst_ip) = match (local, peer) {
            (SocketAddr::V4(l), SocketAddr::V4(p)) => (l.ip().octets(), p.ip().octets()),
            // IPv6 sockets get a synthetic v4 pair; the MQTT bytes are what matter
            _ => ([192, 168, 0, 2], [192, 168, 0, 1]),
        };
        let mut client = SessionContext {
            src_ip,
            dst_ip,
            src_port: local.port(),
            dst_port: peer.port(),
            seq: rng.gen(),
            ack: 0,
            established: false,
        };
        let mut server = SessionContext {
            src_ip: dst_ip,
            dst_ip: src_ip,
            src_port: peer.port(),
            dst_port: local.port(),
            seq: rng.gen(),
            ack: 0,
            established: false,
        };
        let mut frames = Vec::new();
        // synthetic three-way handshake opens the trace
        let mut push = |seg| frames.push(frame_packet(&seg, now_ts()));
        if let Ok(seg) = emit_segment(&mut client, flags::SYN, Vec::new(), mss) {
            push(seg);
        }
        server.ack = client.seq;
        if let Ok(seg) = emit_segment(&mut server, flags::SYN | flags::ACK, Vec::new(), mss) {
            push(seg);
        }
        client.ack = server.seq;
        if let Ok(seg) = emit_segment(&mut client, flags::ACK, Vec::new(), mss) {
            push(seg);
        }
        client.established = true;
        server.established = true;
        CaptureBuilder {
            client,
            server,
            mss,
            frames,
        }
    }

    fn sent(&mut self, bytes: &[u8]) {
        self.client.ack = self.server.seq;
        if let Ok(seg) = emit_segment(
            &mut self.client,
            flags::PSH | flags::ACK,
            bytes.to_vec(),
            self.mss,
        ) {
            self.frames.push(frame_packet(&seg, now_ts()));
        }
    }

    fn received(&mut self, bytes: &[u8]) {
        self.server.ack = self.client.seq;
        if let Ok(seg) = emit_segment(
            &mut self.server,
            flags::PSH | flags::ACK,
            bytes.to_vec(),
            self.mss,
        ) {
            self.frames.push(frame_packet(&seg, now_ts()));
        }
    }
}

/// Incremental MQTT packet reader over the socket.
struct PacketReader {
    buffer: Vec<u8>,
}

impl PacketReader {
    fn new() -> Self {
        PacketReader { buffer: Vec::new() }
    }

    /// Read until one complete packet is available or the deadline passes.
    fn next_packet(
        &mut self,
        stream: &mut TcpStream,
        deadline: Instant,
        capture: &mut CaptureBuilder,
    ) -> Result<MqttPacket, LiveError> {
        loop {
            match decode_packet_prefix(&self.buffer) {
                Ok((pkt, consumed)) => {
                    capture.received(&self.buffer[..consumed]);
                    self.buffer.drain(..consumed);
                    return Ok(pkt);
                }
                Err(CodecError::Incomplete) => {}
                Err(e) => return Err(LiveError::Malformed(e)),
            }
            if Instant::now() >= deadline {
                return Err(LiveError::Io(io::Error::new(
                    io::ErrorKind::TimedOut,
                    "read deadline passed",
                )));
            }
            let mut chunk = [0u8; 4096];
            match stream.read(&mut chunk) {
                Ok(0) => return Err(LiveError::UnexpectedClose),
                Ok(n) => self.buffer.extend_from_slice(&chunk[..n]),
                Err(e)
                    if e.kind() == io::ErrorKind::WouldBlock
                        || e.kind() == io::ErrorKind::TimedOut =>
                {
                    continue;
                }
                Err(e) => return Err(LiveError::Io(e)),
            }
        }
    }
}

/// Run one live session: CONNECT first (a client sends exactly one), then the
/// crafted PUBLISHes, awaiting each QoS-1 PUBACK before proceeding. Keep
/// Alive is forced to zero so the broker never times the session out.
pub fn live_send(
    spec: &CraftSpec,
    net: &NetParams,
    endpoint: &LiveEndpoint,
    capture_path: Option<&Path>,
    seed: u64,
) -> Result<LiveReport, LiveError> {
    let addr = endpoint.resolve()?;
    let mut stream =
        TcpStream::connect_timeout(&addr, endpoint.timeout).map_err(LiveError::ConnectRefused)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(Duration::from_millis(50)))?;

    let local = stream.local_addr()?;
    let mut capture = CaptureBuilder::new(local, addr, net.mss, seed);
    let mut reader = PacketReader::new();

    let connect_opts = ConnectOptions {
        keep_alive: 0,
        ..net.connect.clone()
    };
    let connect = encode_packet(&build_connect(&connect_opts)?)?;
    stream.write_all(&connect)?;
    capture.sent(&connect);

    let deadline = Instant::now() + endpoint.timeout;
    let connack = reader.next_packet(&mut stream, deadline, &mut capture)?;
    if connack.packet_type != PacketType::Connack {
        return Err(LiveError::Malformed(CodecError::ProtocolViolation(
            "expected CONNACK first",
        )));
    }
    let connack_rc = connack.connack_return_code().unwrap_or(0xFF);
    if connack_rc != 0 {
        return Err(LiveError::ConnackNonZero(connack_rc));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let publishes = generate_publishes(spec, net.mss, &mut rng)?;
    let mut sent_count = 0usize;
    let mut puback_count = 0usize;
    for publish in &publishes {
        let msgid = publish.publish_view().and_then(|v| v.msgid);
        let bytes = encode_packet(publish)?;
        stream.write_all(&bytes)?;
        capture.sent(&bytes);
        sent_count += 1;

        if let Some(id) = msgid {
            let deadline = Instant::now() + endpoint.timeout;
            loop {
                let pkt = match reader.next_packet(&mut stream, deadline, &mut capture) {
                    Ok(pkt) => pkt,
                    Err(LiveError::Io(e)) if e.kind() == io::ErrorKind::TimedOut => {
                        finish_capture(capture, capture_path)?;
                        return Err(LiveError::PubackTimeout(id));
                    }
                    Err(LiveError::UnexpectedClose) => {
                        finish_capture(capture, capture_path)?;
                        return Err(LiveError::PubackTimeout(id));
                    }
                    Err(e) => return Err(e),
                };
                match pkt.puback_msgid() {
                    Some(got) if got == id => {
                        puback_count += 1;
                        break;
                    }
                    // anything else (retained deliveries, pings) is captured and skipped
                    _ => continue,
                }
            }
        }
    }

    let capture_path = finish_capture(capture, capture_path)?;
    Ok(LiveReport {
        connack_rc,
        sent_count,
        puback_count,
        capture_path,
    })
}

fn finish_capture(
    capture: CaptureBuilder,
    path: Option<&Path>,
) -> Result<Option<PathBuf>, LiveError> {
    match path {
        Some(p) => {
            write_pcap_file(p, &capture.frames)?;
            Ok(Some(p.to_path_buf()))
        }
        None => Ok(None),
    }
}
