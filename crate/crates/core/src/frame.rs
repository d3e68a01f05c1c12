//! Ethernet II / IPv4 framing of TCP segments, and the reverse parse used by
//! feature extraction. The pcap file container itself lives in `fpa-forge`.

use alloc::vec::Vec;
use core::fmt;

use crate::tcp::TcpSegment;

/// Capture timestamp with microsecond resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Timestamp {
    pub sec: u32,
    pub usec: u32,
}

impl Timestamp {
    pub fn new(sec: u32, usec: u32) -> Self {
        Timestamp { sec, usec }
    }

    /// Advance by a number of microseconds.
    pub fn plus_micros(self, micros: u64) -> Self {
        let total = u64::from(self.sec) * 1_000_000 + u64::from(self.usec) + micros;
        Timestamp {
            sec: (total / 1_000_000) as u32,
            usec: (total % 1_000_000) as u32,
        }
    }
}

/// One captured link-layer frame. Captured length always equals the original
/// length; nothing is truncated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureFrame {
    pub ts: Timestamp,
    pub link_bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameError {
    TooShort,
    NotIpv4,
    NotTcp,
    LengthMismatch,
}

impl fmt::Display for FrameError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameError::TooShort => write!(f, "frame too short"),
            FrameError::NotIpv4 => write!(f, "not an Ethernet II / IPv4 frame"),
            FrameError::NotTcp => write!(f, "not a TCP packet"),
            FrameError::LengthMismatch => write!(f, "embedded lengths disagree with frame size"),
        }
    }
}

impl core::error::Error for FrameError {}

/// Synthetic locally-administered MAC derived from an IPv4 address, so frames
/// are deterministic in offline mode.
pub fn mac_for_ip(ip: [u8; 4]) -> [u8; 6] {
    [0x02, 0x00, ip[0], ip[1], ip[2], ip[3]]
}

/// Frame a TCP segment as Ethernet II + IPv4 (TTL 64, DF, no options) with a
/// correct IPv4 header checksum.
pub fn frame_packet(seg: &TcpSegment, ts: Timestamp) -> CaptureFrame {
    let tcp_bytes = seg.to_bytes();
    let total_len = 20 + tcp_bytes.len();

    let mut link_bytes = Vec::with_capacity(14 + total_len);
    link_bytes.extend_from_slice(&mac_for_ip(seg.ctx.dst_ip));
    link_bytes.extend_from_slice(&mac_for_ip(seg.ctx.src_ip));
    link_bytes.extend_from_slice(&0x0800u16.to_be_bytes());

    let mut ip = [0u8; 20];
    ip[0] = 0x45; // version 4, IHL 5
    ip[2] = (total_len >> 8) as u8;
    ip[3] = (total_len & 0xFF) as u8;
    ip[6] = 0x40; // DF
    ip[8] = 64; // TTL
    ip[9] = 6; // TCP
    ip[12..16].copy_from_slice(&seg.ctx.src_ip);
    ip[16..20].copy_from_slice(&seg.ctx.dst_ip);
    let csum = ipv4_checksum(&ip);
    ip[10] = (csum >> 8) as u8;
    ip[11] = (csum & 0xFF) as u8;

    link_bytes.extend_from_slice(&ip);
    link_bytes.extend_from_slice(&tcp_bytes);
    CaptureFrame { ts, link_bytes }
}

/// IPv4 header checksum over the header with its checksum field zeroed.
pub fn ipv4_checksum(header: &[u8]) -> u16 {
    let mut sum: u32 = 0;
    for (i, pair) in header.chunks_exact(2).enumerate() {
        if i == 5 {
            continue; // checksum field
        }
        sum += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    while sum >> 16 != 0 {
        sum = (sum >> 16) + (sum & 0xFFFF);
    }
    !(sum as u16)
}

/// Decoded view of an Ethernet II / IPv4 / TCP frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPacket {
    pub ts: Timestamp,
    pub src_ip: [u8; 4],
    pub dst_ip: [u8; 4],
    pub src_port: u16,
    pub dst_port: u16,
    pub seq: u32,
    pub ack: u32,
    pub flags: u16,
    pub checksum: u16,
    pub window: u16,
    pub options: Vec<u8>,
    pub payload: Vec<u8>,
}

impl ParsedPacket {
    pub fn flag(&self, bit: u8) -> bool {
        self.flags & u16::from(bit) != 0
    }
}

/// Parse one captured frame back into its TCP fields.
pub fn parse_frame(frame: &CaptureFrame) -> Result<ParsedPacket, FrameError> {
    let b = &frame.link_bytes;
    if b.len() < 14 + 20 {
        return Err(FrameError::TooShort);
    }
    if u16::from_be_bytes([b[12], b[13]]) != 0x0800 || b[14] >> 4 != 4 {
        return Err(FrameError::NotIpv4);
    }
    let ihl = usize::from(b[14] & 0x0F) * 4;
    let total_len = usize::from(u16::from_be_bytes([b[16], b[17]]));
    if b.len() != 14 + total_len || total_len < ihl + 20 {
        return Err(FrameError::LengthMismatch);
    }
    if b[23] != 6 {
        return Err(FrameError::NotTcp);
    }
    let ip = &b[14..];
    let src_ip = [ip[12], ip[13], ip[14], ip[15]];
    let dst_ip = [ip[16], ip[17], ip[18], ip[19]];
    let tcp = &ip[ihl..total_len];
    if tcp.len() < 20 {
        return Err(FrameError::TooShort);
    }
    let data_offset = usize::from(tcp[12] >> 4) * 4;
    if data_offset < 20 || tcp.len() < data_offset {
        return Err(FrameError::LengthMismatch);
    }
    Ok(ParsedPacket {
        ts: frame.ts,
        src_ip,
        dst_ip,
        src_port: u16::from_be_bytes([tcp[0], tcp[1]]),
        dst_port: u16::from_be_bytes([tcp[2], tcp[3]]),
        seq: u32::from_be_bytes([tcp[4], tcp[5], tcp[6], tcp[7]]),
        ack: u32::from_be_bytes([tcp[8], tcp[9], tcp[10], tcp[11]]),
        flags: u16::from_be_bytes([tcp[12] & 0x01, tcp[13]]),
        checksum: u16::from_be_bytes([tcp[16], tcp[17]]),
        window: u16::from_be_bytes([tcp[14], tcp[15]]),
        options: tcp[20..data_offset].to_vec(),
        payload: tcp[data_offset..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tcp::{emit_segment, flags, SessionContext, DEFAULT_MSS, MQTT_PORT};
    use alloc::vec;

    fn ctx() -> SessionContext {
        SessionContext {
            src_ip: [10, 0, 0, 2],
            dst_ip: [10, 0, 0, 1],
            src_port: 50_000,
            dst_port: MQTT_PORT,
            seq: 1,
            ack: 1,
            established: true,
        }
    }

    #[test]
    fn ack_frame_is_54_bytes() {
        let mut c = ctx();
        let seg = emit_segment(&mut c, flags::ACK, vec![], DEFAULT_MSS).unwrap();
        let frame = frame_packet(&seg, Timestamp::new(0, 0));
        assert_eq!(frame.link_bytes.len(), 54);
    }

    #[test]
    fn max_mss_frame_is_1514_bytes() {
        let mut c = ctx();
        let seg = emit_segment(
            &mut c,
            flags::PSH | flags::ACK,
            vec![0x20; 1460],
            DEFAULT_MSS,
        )
        .unwrap();
        let frame = frame_packet(&seg, Timestamp::new(0, 0));
        assert_eq!(frame.link_bytes.len(), 1514);
    }

    #[test]
    fn parse_inverts_frame() {
        let mut c = ctx();
        let seg = emit_segment(
            &mut c,
            flags::PSH | flags::ACK,
            b"hello".to_vec(),
            DEFAULT_MSS,
        )
        .unwrap();
        let frame = frame_packet(&seg, Timestamp::new(7, 40));
        let parsed = parse_frame(&frame).unwrap();
        assert_eq!(parsed.src_ip, seg.ctx.src_ip);
        assert_eq!(parsed.dst_ip, seg.ctx.dst_ip);
        assert_eq!(parsed.src_port, seg.ctx.src_port);
        assert_eq!(parsed.dst_port, seg.ctx.dst_port);
        assert_eq!(parsed.seq, seg.ctx.seq);
        assert_eq!(parsed.ack, seg.ctx.ack);
        assert_eq!(parsed.checksum, seg.checksum);
        assert_eq!(parsed.payload, b"hello");
        assert!(parsed.options.is_empty());
        assert_eq!(parsed.ts, Timestamp::new(7, 40));
    }

    /// Third-party dissector oracle: frames must parse with valid IPv4 and TCP
    /// checksums.
    #[test]
    fn etherparse_validates_checksums() {
        let mut c = ctx();
        for payload in [vec![], b"27.5C 61%   ".to_vec(), vec![0x20; 1460]] {
            let seg = emit_segment(&mut c, flags::PSH | flags::ACK, payload, DEFAULT_MSS).unwrap();
            let frame = frame_packet(&seg, Timestamp::new(1, 2));
            let sliced = etherparse::SlicedPacket::from_ethernet(&frame.link_bytes).unwrap();
            let (ipv4, _) = match sliced.net.unwrap() {
                etherparse::NetSlice::Ipv4(v) => (v.header().to_header(), ()),
                other => panic!("unexpected net layer {other:?}"),
            };
            assert_eq!(ipv4.header_checksum, ipv4.calc_header_checksum());
            match sliced.transport.unwrap() {
                etherparse::TransportSlice::Tcp(t) => {
                    let expected = t
                        .to_header()
                        .calc_checksum_ipv4_raw(seg.ctx.src_ip, seg.ctx.dst_ip, t.payload())
                        .unwrap();
                    assert_eq!(t.checksum(), expected);
                    assert_eq!(t.payload(), &seg.payload[..]);
                }
                other => panic!("unexpected transport {other:?}"),
            }
        }
    }

    #[test]
    fn timestamp_arithmetic() {
        let t = Timestamp::new(1, 999_999).plus_micros(2);
        assert_eq!(t, Timestamp::new(2, 1));
    }
}
