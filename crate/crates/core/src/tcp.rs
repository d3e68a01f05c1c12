//! TCP encapsulation of MQTT bytes with the intra-packet dependencies kept
//! consistent: MQTT remaining length, TCP segment length, sequence numbers,
//! and the RFC 793 checksum.

use alloc::vec::Vec;
use core::fmt;

use crate::mqtt::{self, MAX_REMAINING_LENGTH};

/// Real-world default TCP maximum segment size.
pub const DEFAULT_MSS: u32 = 1460;
/// Default MQTT-over-TCP port.
pub const MQTT_PORT: u16 = 1883;
/// Largest possible MQTT fixed header: 1 type byte + 4 varint bytes.
const FIXED_HEADER_MAX: u32 = 5;

/// TCP flag bits.
pub mod flags {
    pub const FIN: u8 = 0x01;
    pub const SYN: u8 = 0x02;
    pub const RST: u8 = 0x04;
    pub const PSH: u8 = 0x08;
    pub const ACK: u8 = 0x10;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TcpError {
    /// Computed length exceeds the remaining-length range.
    RangeError,
    /// Segment would not fit in the maximum segment size.
    MssExceeded,
    /// Data sent on a context that has not completed the handshake.
    NotEstablished,
    /// Topic must encode to at least one byte.
    EmptyTopic,
    /// Payload bytes do not form the MQTT packet the lengths claim.
    InconsistentPacket(&'static str),
}

impl fmt::Display for TcpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TcpError::RangeError => write!(f, "length out of remaining-length range"),
            TcpError::MssExceeded => write!(f, "segment exceeds MSS"),
            TcpError::NotEstablished => write!(f, "session not established"),
            TcpError::EmptyTopic => write!(f, "topic must be at least one byte"),
            TcpError::InconsistentPacket(what) => write!(f, "inconsistent packet: {what}"),
        }
    }
}

impl core::error::Error for TcpError {}

/// One direction of a TCP session: addressing plus the live seq/ack counters.
/// The sequence number is reinitialized for every new session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionContext {
    pub src_ip: [u8; 4],
    pub dst_ip: [u8; 4],
    pub src_port: u16,
    pub dst_port: u16,
    pub seq: u32,
    pub ack: u32,
    pub established: bool,
}

impl SessionContext {
    pub fn new(src_ip: [u8; 4], dst_ip: [u8; 4], src_port: u16, isn: u32) -> Self {
        SessionContext {
            src_ip,
            dst_ip,
            src_port,
            dst_port: MQTT_PORT,
            seq: isn,
            ack: 0,
            established: false,
        }
    }
}

/// An emitted TCP segment: the context snapshot at emission time, flag bits,
/// application payload, and the checksum over the RFC 793 pseudo-header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcpSegment {
    pub ctx: SessionContext,
    pub flags: u8,
    pub payload: Vec<u8>,
    pub checksum: u16,
}

impl TcpSegment {
    /// tcp.len: the application payload size in bytes.
    pub fn len(&self) -> u32 {
        self.payload.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.payload.is_empty()
    }

    /// Serialize as a 20-byte TCP header (no options) followed by the payload,
    /// with the stored checksum in place.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = header_bytes(&self.ctx, self.flags, self.payload.len());
        out[16] = (self.checksum >> 8) as u8;
        out[17] = (self.checksum & 0xFF) as u8;
        out.extend_from_slice(&self.payload);
        out
    }
}

fn header_bytes(ctx: &SessionContext, flag_bits: u8, payload_len: usize) -> Vec<u8> {
    let mut hdr = Vec::with_capacity(20 + payload_len);
    hdr.extend_from_slice(&ctx.src_port.to_be_bytes());
    hdr.extend_from_slice(&ctx.dst_port.to_be_bytes());
    hdr.extend_from_slice(&ctx.seq.to_be_bytes());
    hdr.extend_from_slice(&ctx.ack.to_be_bytes());
    hdr.push(5 << 4); // data offset 5 words, no options
    hdr.push(flag_bits);
    hdr.extend_from_slice(&64_240u16.to_be_bytes()); // window
    hdr.extend_from_slice(&[0, 0]); // checksum placeholder
    hdr.extend_from_slice(&[0, 0]); // urgent pointer
    hdr
}

/// MQTT remaining length of a PUBLISH: 2-byte topic length field, the topic
/// itself, a 2-byte packet identifier when present, and the message payload.
pub fn compute_mqtt_len(
    topic_bytes: usize,
    msgid_present: bool,
    payload_bytes: usize,
) -> Result<u32, TcpError> {
    if topic_bytes == 0 {
        return Err(TcpError::EmptyTopic);
    }
    let total = 2 + topic_bytes + if msgid_present { 2 } else { 0 } + payload_bytes;
    if total > MAX_REMAINING_LENGTH as usize {
        return Err(TcpError::RangeError);
    }
    Ok(total as u32)
}

/// TCP segment length for a crafted PUBLISH of the given remaining length:
/// `mqtt_len + 2` while the remaining length fits one byte-sized value,
/// `mqtt_len + 3` otherwise. Values needing more than two varint bytes are
/// outside the crafted range.
pub fn compute_tcp_len(mqtt_len: u32, mss: u32) -> Result<u32, TcpError> {
    if mqtt_len > 16_383 {
        return Err(TcpError::RangeError);
    }
    let tcp_len = if mqtt_len <= 255 {
        mqtt_len + 2
    } else {
        mqtt_len + 3
    };
    if tcp_len > mss {
        return Err(TcpError::MssExceeded);
    }
    Ok(tcp_len)
}

/// Largest number of whitespace padding bytes that can be appended to the
/// payload while the whole PUBLISH still fits the MSS. The fixed header is
/// reserved at its 5-byte maximum so the bound holds for any varint width.
pub fn max_padding_budget(
    topic_bytes: usize,
    msgid_present: bool,
    base_payload_bytes: usize,
    mss: u32,
) -> Result<usize, TcpError> {
    let base = compute_mqtt_len(topic_bytes, msgid_present, base_payload_bytes)?;
    let cap = mss.saturating_sub(FIXED_HEADER_MAX);
    if base > cap {
        return Err(TcpError::MssExceeded);
    }
    let budget = (cap - base).min(MAX_REMAINING_LENGTH - base);
    Ok(budget as usize)
}

/// Next client sequence number: previous one advanced by the bytes sent.
pub fn next_seq(prev_seq: u32, prev_len: u32) -> u32 {
    prev_seq.wrapping_add(prev_len)
}

/// RFC 793 section 3.1 checksum: one's complement of the one's-complement
/// 16-bit sum over the pseudo-header (source, destination, protocol 6, TCP
/// length) and the segment, odd lengths padded with a zero byte. The caller
/// supplies the segment with its checksum field zeroed. The computed value is
/// transmitted as-is, including 0x0000.
pub fn tcp_checksum(ctx: &SessionContext, segment_bytes: &[u8]) -> u16 {
    let mut sum = ones_sum(&ctx.src_ip, 0);
    sum = ones_sum(&ctx.dst_ip, sum);
    sum = ones_sum(&[0, 6], sum);
    sum = ones_sum(&(segment_bytes.len() as u16).to_be_bytes(), sum);
    sum = ones_sum(segment_bytes, sum);
    !fold(sum)
}

fn ones_sum(bytes: &[u8], mut acc: u32) -> u32 {
    let mut chunks = bytes.chunks_exact(2);
    for pair in &mut chunks {
        acc += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    if let [last] = chunks.remainder() {
        acc += u32::from(*last) << 8;
    }
    acc
}

fn fold(mut sum: u32) -> u16 {
    while sum >> 16 != 0 {
        sum = (sum >> 16) + (sum & 0xFFFF);
    }
    sum as u16
}

/// Verify a serialized segment: summing it with the stored checksum in place
/// must produce the all-ones value.
pub fn verify_checksum(ctx: &SessionContext, segment_bytes: &[u8]) -> bool {
    let mut sum = ones_sum(&ctx.src_ip, 0);
    sum = ones_sum(&ctx.dst_ip, sum);
    sum = ones_sum(&[0, 6], sum);
    sum = ones_sum(&(segment_bytes.len() as u16).to_be_bytes(), sum);
    sum = ones_sum(segment_bytes, sum);
    fold(sum) == 0xFFFF
}

/// Emit one segment from a context and advance its counters. SYN and FIN each
/// consume one unit of sequence space on top of the payload length.
pub fn emit_segment(
    ctx: &mut SessionContext,
    flag_bits: u8,
    payload: Vec<u8>,
    mss: u32,
) -> Result<TcpSegment, TcpError> {
    if payload.len() as u32 > mss {
        return Err(TcpError::MssExceeded);
    }
    let snapshot = *ctx;
    let mut raw = header_bytes(&snapshot, flag_bits, payload.len());
    raw.extend_from_slice(&payload);
    let checksum = tcp_checksum(&snapshot, &raw);

    let mut consumed = payload.len() as u32;
    if flag_bits & (flags::SYN | flags::FIN) != 0 {
        consumed += 1;
    }
    ctx.seq = next_seq(ctx.seq, consumed);

    Ok(TcpSegment {
        ctx: snapshot,
        flags: flag_bits,
        payload,
        checksum,
    })
}

/// Wrap one encoded MQTT packet in a PSH+ACK segment and advance the session
/// sequence number by its length. The bytes must parse as a single complete
/// MQTT packet so the length coupling cannot silently break.
pub fn wrap_mqtt(
    ctx: &mut SessionContext,
    mqtt_bytes: Vec<u8>,
    mss: u32,
) -> Result<TcpSegment, TcpError> {
    if !ctx.established {
        return Err(TcpError::NotEstablished);
    }
    if mqtt_bytes.len() as u32 > mss {
        return Err(TcpError::MssExceeded);
    }
    match mqtt::decode_packet_prefix(&mqtt_bytes) {
        Ok((pkt, consumed)) => {
            if consumed != mqtt_bytes.len() {
                return Err(TcpError::InconsistentPacket("trailing bytes"));
            }
            let expected = 1
                + mqtt::remaining_length_width(pkt.remaining_length())
                + pkt.remaining_length() as usize;
            if expected != mqtt_bytes.len() {
                return Err(TcpError::InconsistentPacket("length fields disagree"));
            }
        }
        Err(_) => {
            return Err(TcpError::InconsistentPacket(
                "payload is not one MQTT packet",
            ))
        }
    }
    emit_segment(ctx, flags::PSH | flags::ACK, mqtt_bytes, mss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mqtt::{build_publish, encode_packet, PublishOptions};
    use alloc::vec;

    #[test]
    fn mqtt_len_examples() {
        assert_eq!(compute_mqtt_len(24, true, 30).unwrap(), 58);
        assert_eq!(compute_mqtt_len(1, false, 0).unwrap(), 3);
        assert_eq!(compute_mqtt_len(24, false, 1431).unwrap(), 1457);
        assert_eq!(compute_mqtt_len(0, false, 0), Err(TcpError::EmptyTopic));
    }

    #[test]
    fn tcp_len_branches() {
        assert_eq!(compute_tcp_len(255, DEFAULT_MSS).unwrap(), 257);
        assert_eq!(compute_tcp_len(256, DEFAULT_MSS).unwrap(), 259);
        assert_eq!(compute_tcp_len(0, DEFAULT_MSS).unwrap(), 2);
        assert_eq!(
            compute_tcp_len(1458, DEFAULT_MSS),
            Err(TcpError::MssExceeded)
        );
    }

    #[test]
    fn tcp_len_branches_exhaustive() {
        for mqtt_len in 0u32..=1457 {
            let expected = if mqtt_len <= 255 {
                mqtt_len + 2
            } else {
                mqtt_len + 3
            };
            assert_eq!(compute_tcp_len(mqtt_len, DEFAULT_MSS).unwrap(), expected);
        }
    }

    #[test]
    fn padding_budget_examples() {
        assert_eq!(max_padding_budget(24, true, 30, DEFAULT_MSS).unwrap(), 1397);
        assert_eq!(max_padding_budget(24, true, 1427, DEFAULT_MSS).unwrap(), 0);
        assert_eq!(
            max_padding_budget(24, true, 1428, DEFAULT_MSS),
            Err(TcpError::MssExceeded)
        );
    }

    #[test]
    fn padding_budget_is_tight() {
        // Brute-force oracle: scan w upward until the reserved-header bound breaks.
        let brute = |topic: usize, msgid: bool, base: usize| -> usize {
            let mut w = 0usize;
            loop {
                let m = compute_mqtt_len(topic, msgid, base + w + 1).unwrap();
                if m + FIXED_HEADER_MAX > DEFAULT_MSS {
                    return w;
                }
                w += 1;
            }
        };
        for (topic, msgid, base) in [
            (24, true, 30),
            (24, true, 1427),
            (1, false, 0),
            (27, false, 9),
        ] {
            assert_eq!(
                max_padding_budget(topic, msgid, base, DEFAULT_MSS).unwrap(),
                brute(topic, msgid, base),
                "budget mismatch for topic={topic} msgid={msgid} base={base}"
            );
        }
    }

    #[test]
    fn seq_advance() {
        assert_eq!(next_seq(1000, 58), 1058);
        assert_eq!(next_seq(77, 0), 77);
        assert_eq!(next_seq(u32::MAX - 1, 2), 0);
        assert_eq!(next_seq(u32::MAX, 2), 1);
    }

    fn test_ctx() -> SessionContext {
        SessionContext {
            src_ip: [192, 168, 0, 10],
            dst_ip: [192, 168, 0, 1],
            src_port: 45_000,
            dst_port: MQTT_PORT,
            seq: 1000,
            ack: 500,
            established: true,
        }
    }

    /// Independent scalar one's-complement reference: accumulate 16-bit words
    /// one at a time with explicit end-around carry.
    fn reference_checksum(ctx: &SessionContext, segment: &[u8]) -> u16 {
        let mut words: Vec<u16> = vec![
            u16::from_be_bytes([ctx.src_ip[0], ctx.src_ip[1]]),
            u16::from_be_bytes([ctx.src_ip[2], ctx.src_ip[3]]),
            u16::from_be_bytes([ctx.dst_ip[0], ctx.dst_ip[1]]),
            u16::from_be_bytes([ctx.dst_ip[2], ctx.dst_ip[3]]),
            6,
            segment.len() as u16,
        ];
        let mut padded = segment.to_vec();
        if padded.len() % 2 == 1 {
            padded.push(0);
        }
        for pair in padded.chunks_exact(2) {
            words.push(u16::from_be_bytes([pair[0], pair[1]]));
        }
        let mut sum: u16 = 0;
        for w in words {
            let (s, carry) = sum.overflowing_add(w);
            sum = if carry { s + 1 } else { s };
        }
        !sum
    }

    #[test]
    fn checksum_matches_scalar_reference() {
        let ctx = test_ctx();
        for payload in [&b""[..], b"\x00\x01\xF2\x03", b"odd", b"27.5C 61%   "] {
            let mut raw = header_bytes(&ctx, flags::PSH | flags::ACK, payload.len());
            raw.extend_from_slice(payload);
            assert_eq!(tcp_checksum(&ctx, &raw), reference_checksum(&ctx, &raw));
        }
    }

    #[test]
    fn checksum_complement_identity() {
        // A segment whose sum with the pseudo-header is 0xFFFF checksums to 0,
        // and the computed complement is emitted unchanged.
        let ctx = test_ctx();
        let mut raw = header_bytes(&ctx, flags::ACK, 2);
        raw.extend_from_slice(&[0x00, 0x00]);
        let base = tcp_checksum(&ctx, &raw);
        // Force the running sum to all-ones by appending its complement.
        raw.truncate(raw.len() - 2);
        raw.extend_from_slice(&base.to_be_bytes());
        assert_eq!(tcp_checksum(&ctx, &raw), 0x0000);
    }

    #[test]
    fn emitted_segments_self_verify() {
        let mut ctx = test_ctx();
        for len in [0usize, 1, 58, 1460] {
            let seg = emit_segment(
                &mut ctx,
                flags::PSH | flags::ACK,
                vec![0x20; len],
                DEFAULT_MSS,
            )
            .unwrap();
            assert!(verify_checksum(&seg.ctx, &seg.to_bytes()));
        }
    }

    #[test]
    fn wrap_advances_seq_by_tcp_len() {
        let mut ctx = test_ctx();
        let first = encode_packet(
            &build_publish(&PublishOptions {
                dup: false,
                qos: 1,
                retain: false,
                topic: "Building1/Floor3/Sensor1".into(),
                msgid: Some(1),
                payload: vec![0x20; 30],
            })
            .unwrap(),
        )
        .unwrap();
        assert_eq!(first.len(), 60); // mqtt_len 58 -> tcp.len 60
        let seg1 = wrap_mqtt(&mut ctx, first, DEFAULT_MSS).unwrap();
        assert_eq!(seg1.len(), 60);
        assert_eq!(ctx.seq, seg1.ctx.seq + 60);

        // mqtt_len 256 -> tcp.len 259
        let big = encode_packet(
            &build_publish(&PublishOptions {
                dup: false,
                qos: 0,
                retain: false,
                topic: "t".into(),
                msgid: None,
                payload: vec![0x20; 253],
            })
            .unwrap(),
        )
        .unwrap();
        assert_eq!(big.len(), 259);
        let seg2 = wrap_mqtt(&mut ctx, big, DEFAULT_MSS).unwrap();
        assert_eq!(seg2.ctx.seq, seg1.ctx.seq + 60);
        assert_eq!(ctx.seq, seg2.ctx.seq + 259);
    }

    #[test]
    fn wrap_requires_established() {
        let mut ctx = test_ctx();
        ctx.established = false;
        let bytes = encode_packet(&crate::mqtt::MqttPacket::pingreq()).unwrap();
        assert_eq!(
            wrap_mqtt(&mut ctx, bytes, DEFAULT_MSS),
            Err(TcpError::NotEstablished)
        );
    }

    #[test]
    fn wrap_rejects_garbage_and_oversize() {
        let mut ctx = test_ctx();
        assert!(matches!(
            wrap_mqtt(&mut ctx, vec![0x30, 0x10, 0x00], DEFAULT_MSS),
            Err(TcpError::InconsistentPacket(_))
        ));
        assert_eq!(
            wrap_mqtt(&mut ctx, vec![0; 1461], DEFAULT_MSS),
            Err(TcpError::MssExceeded)
        );
    }

    #[test]
    fn sequence_telescoping() {
        let mut ctx = test_ctx();
        let isn = ctx.seq;
        let mut segments = Vec::new();
        for len in [10usize, 0, 300, 58, 0, 1460] {
            segments.push(
                emit_segment(
                    &mut ctx,
                    flags::PSH | flags::ACK,
                    vec![0x41; len],
                    DEFAULT_MSS,
                )
                .unwrap(),
            );
        }
        let mut expected = isn;
        for seg in &segments {
            assert_eq!(seg.ctx.seq, expected);
            expected = next_seq(expected, seg.len());
        }
    }
}
