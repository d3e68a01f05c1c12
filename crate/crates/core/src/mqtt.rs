//! MQTT 3.1.1 control packet codec.
//!
//! Byte-level encoding, decoding, and validation for the control packets the
//! crafting pipeline needs: CONNECT, CONNACK, PUBLISH, PUBACK, and PINGREQ.
//! All fourteen packet types decode; only the five above are constructible.
//! QoS 2 is rejected at construction since it would drag in the four-way
//! PUBREC/PUBREL/PUBCOMP handshake.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Largest value representable by the Remaining Length varint (2^28 - 1).
pub const MAX_REMAINING_LENGTH: u32 = 268_435_455;

/// MQTT control packet types (the 4-bit type field of the fixed header).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum PacketType {
    Connect = 1,
    Connack = 2,
    Publish = 3,
    Puback = 4,
    Pubrec = 5,
    Pubrel = 6,
    Pubcomp = 7,
    Subscribe = 8,
    Suback = 9,
    Unsubscribe = 10,
    Unsuback = 11,
    Pingreq = 12,
    Pingresp = 13,
    Disconnect = 14,
}

impl PacketType {
    pub fn from_nibble(value: u8) -> Option<Self> {
        match value {
            1 => Some(PacketType::Connect),
            2 => Some(PacketType::Connack),
            3 => Some(PacketType::Publish),
            4 => Some(PacketType::Puback),
            5 => Some(PacketType::Pubrec),
            6 => Some(PacketType::Pubrel),
            7 => Some(PacketType::Pubcomp),
            8 => Some(PacketType::Subscribe),
            9 => Some(PacketType::Suback),
            10 => Some(PacketType::Unsubscribe),
            11 => Some(PacketType::Unsuback),
            12 => Some(PacketType::Pingreq),
            13 => Some(PacketType::Pingresp),
            14 => Some(PacketType::Disconnect),
            _ => None,
        }
    }

    pub fn nibble(self) -> u8 {
        self as u8
    }
}

/// Codec errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodecError {
    /// A length exceeds what the Remaining Length varint can carry.
    RangeError,
    /// Varint with a continuation bit on all four bytes.
    MalformedLength,
    /// A normative MQTT 3.1.1 requirement would be violated.
    ProtocolViolation(&'static str),
    /// QoS 2 requested; the codec only constructs QoS 0 and 1.
    UnsupportedQoS,
    /// Will messages are not constructible (the attack never sends them).
    UnsupportedWill,
    /// Topic failed validation.
    Topic(TopicError),
    /// Packet invariants do not hold, so it cannot be serialized.
    EncodeError(&'static str),
    /// Input ends before the declared packet does.
    Incomplete,
    /// Input continues past the declared packet end.
    TrailingBytes,
    /// Reserved packet type nibble (0 or 15).
    UnknownType(u8),
    /// A field declared as UTF-8 is not valid UTF-8.
    InvalidUtf8,
}

impl fmt::Display for CodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodecError::RangeError => write!(f, "length exceeds remaining-length range"),
            CodecError::MalformedLength => write!(f, "malformed remaining-length varint"),
            CodecError::ProtocolViolation(what) => write!(f, "protocol violation: {what}"),
            CodecError::UnsupportedQoS => write!(f, "QoS 2 is not supported"),
            CodecError::UnsupportedWill => write!(f, "will messages are not supported"),
            CodecError::Topic(e) => write!(f, "invalid topic: {e}"),
            CodecError::EncodeError(what) => write!(f, "packet invariant violated: {what}"),
            CodecError::Incomplete => write!(f, "truncated packet"),
            CodecError::TrailingBytes => write!(f, "trailing bytes after packet"),
            CodecError::UnknownType(t) => write!(f, "unknown packet type nibble {t}"),
            CodecError::InvalidUtf8 => write!(f, "invalid UTF-8 string"),
        }
    }
}

impl core::error::Error for CodecError {}

impl From<TopicError> for CodecError {
    fn from(e: TopicError) -> Self {
        CodecError::Topic(e)
    }
}

/// Topic name validation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopicError {
    Empty,
    TooLong,
    /// Topic names must not contain '+' or '#' [MQTT-3.3.2-2].
    WildcardInTopic,
    /// Topics starting with '$' are reserved for the server.
    LeadingDollar,
}

impl fmt::Display for TopicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopicError::Empty => write!(f, "empty topic"),
            TopicError::TooLong => write!(f, "topic exceeds 65535 bytes"),
            TopicError::WildcardInTopic => write!(f, "topic contains a wildcard character"),
            TopicError::LeadingDollar => write!(f, "topic starts with '$'"),
        }
    }
}

impl core::error::Error for TopicError {}

/// A parsed or constructed MQTT control packet: first fixed-header byte plus
/// the variable header and payload it carries. The remaining length is always
/// derived, never stored, so it cannot drift out of sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqttPacket {
    pub packet_type: PacketType,
    /// The full first fixed-header byte (type nibble plus flag bits).
    pub header_flags: u8,
    pub variable_header: Vec<u8>,
    pub payload: Vec<u8>,
}

impl MqttPacket {
    pub fn remaining_length(&self) -> u32 {
        (self.variable_header.len() + self.payload.len()) as u32
    }

    /// Synthesized CONNACK, as a server would answer a valid CONNECT.
    pub fn connack(session_present: bool, return_code: u8) -> Self {
        MqttPacket {
            packet_type: PacketType::Connack,
            header_flags: 0x20,
            variable_header: alloc::vec![u8::from(session_present), return_code],
            payload: Vec::new(),
        }
    }

    /// Synthesized PUBACK acknowledging the given packet identifier.
    pub fn puback(msgid: u16) -> Self {
        MqttPacket {
            packet_type: PacketType::Puback,
            header_flags: 0x40,
            variable_header: msgid.to_be_bytes().to_vec(),
            payload: Vec::new(),
        }
    }

    pub fn pingreq() -> Self {
        MqttPacket {
            packet_type: PacketType::Pingreq,
            header_flags: 0xC0,
            variable_header: Vec::new(),
            payload: Vec::new(),
        }
    }

    /// CONNACK return code, if this is a CONNACK.
    pub fn connack_return_code(&self) -> Option<u8> {
        if self.packet_type == PacketType::Connack {
            self.variable_header.get(1).copied()
        } else {
            None
        }
    }

    /// Packet identifier of a PUBACK.
    pub fn puback_msgid(&self) -> Option<u16> {
        if self.packet_type == PacketType::Puback && self.variable_header.len() >= 2 {
            Some(u16::from_be_bytes([
                self.variable_header[0],
                self.variable_header[1],
            ]))
        } else {
            None
        }
    }

    /// Structured view of a PUBLISH packet, or None for other types.
    pub fn publish_view(&self) -> Option<PublishView<'_>> {
        if self.packet_type != PacketType::Publish {
            return None;
        }
        let vh = &self.variable_header;
        if vh.len() < 2 {
            return None;
        }
        let topic_len = u16::from_be_bytes([vh[0], vh[1]]) as usize;
        if vh.len() < 2 + topic_len {
            return None;
        }
        let qos = (self.header_flags >> 1) & 0x03;
        let msgid = if qos > 0 && vh.len() >= 2 + topic_len + 2 {
            Some(u16::from_be_bytes([vh[2 + topic_len], vh[3 + topic_len]]))
        } else {
            None
        };
        Some(PublishView {
            dup: self.header_flags & 0x08 != 0,
            qos,
            retain: self.header_flags & 0x01 != 0,
            topic: &vh[2..2 + topic_len],
            msgid,
            payload: &self.payload,
        })
    }

    /// Structured view of a CONNECT packet, or None for other types.
    pub fn connect_view(&self) -> Option<ConnectView<'_>> {
        if self.packet_type != PacketType::Connect || self.variable_header.len() < 10 {
            return None;
        }
        let vh = &self.variable_header;
        let proto_len = u16::from_be_bytes([vh[0], vh[1]]);
        Some(ConnectView {
            proto_len,
            protoname: &vh[2..2 + proto_len as usize],
            level: vh[2 + proto_len as usize],
            connect_flags: vh[3 + proto_len as usize],
            keep_alive: u16::from_be_bytes([
                vh[4 + proto_len as usize],
                vh[5 + proto_len as usize],
            ]),
        })
    }
}

/// Borrowed fields of a PUBLISH packet.
#[derive(Debug, Clone, Copy)]
pub struct PublishView<'a> {
    pub dup: bool,
    pub qos: u8,
    pub retain: bool,
    pub topic: &'a [u8],
    pub msgid: Option<u16>,
    pub payload: &'a [u8],
}

/// Borrowed fields of a CONNECT variable header.
#[derive(Debug, Clone, Copy)]
pub struct ConnectView<'a> {
    pub proto_len: u16,
    pub protoname: &'a [u8],
    pub level: u8,
    pub connect_flags: u8,
    pub keep_alive: u16,
}

impl ConnectView<'_> {
    pub fn clean_session(&self) -> bool {
        self.connect_flags & 0x02 != 0
    }
}

/// Options for building a CONNECT packet.
///
/// Flags mirror the connect-flags byte bit for bit. `reserved` exists so tests
/// can probe the server-side rejection path; it must stay false [MQTT-3.1.2-3].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectOptions {
    pub username: Option<String>,
    pub password: Option<Vec<u8>>,
    pub will_retain: bool,
    pub will_qos: u8,
    pub will_flag: bool,
    pub clean_session: bool,
    pub reserved: bool,
    pub keep_alive: u16,
    pub client_id: String,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        ConnectOptions {
            username: None,
            password: None,
            will_retain: false,
            will_qos: 0,
            will_flag: false,
            clean_session: false,
            reserved: false,
            keep_alive: 0,
            client_id: String::from("fpa-forge"),
        }
    }
}

impl ConnectOptions {
    /// The connect-flags byte: username, password, will-retain, will-QoS,
    /// will, clean-session, reserved, from bit 7 down to bit 0.
    pub fn connect_flags(&self) -> u8 {
        u8::from(self.username.is_some()) << 7
            | u8::from(self.password.is_some()) << 6
            | u8::from(self.will_retain) << 5
            | (self.will_qos & 0x03) << 3
            | u8::from(self.will_flag) << 2
            | u8::from(self.clean_session) << 1
            | u8::from(self.reserved)
    }
}

/// Options for building a PUBLISH packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublishOptions {
    pub dup: bool,
    pub qos: u8,
    pub retain: bool,
    pub topic: String,
    pub msgid: Option<u16>,
    pub payload: Vec<u8>,
}

/// Encode a Remaining Length value as a base-128 varint (1-4 bytes, the
/// continuation bit set on every byte but the last).
pub fn encode_remaining_length(len: u32) -> Result<Vec<u8>, CodecError> {
    if len > MAX_REMAINING_LENGTH {
        return Err(CodecError::RangeError);
    }
    let mut out = Vec::with_capacity(4);
    let mut rest = len;
    loop {
        let mut byte = (rest % 128) as u8;
        rest /= 128;
        if rest > 0 {
            byte |= 0x80;
        }
        out.push(byte);
        if rest == 0 {
            break;
        }
    }
    Ok(out)
}

/// Decode a Remaining Length varint, returning the value and bytes consumed.
pub fn decode_remaining_length(bytes: &[u8]) -> Result<(u32, usize), CodecError> {
    let mut value: u32 = 0;
    let mut shift = 0;
    for (i, &byte) in bytes.iter().enumerate().take(4) {
        value |= u32::from(byte & 0x7F) << shift;
        if byte & 0x80 == 0 {
            return Ok((value, i + 1));
        }
        shift += 7;
    }
    if bytes.len() >= 4 {
        Err(CodecError::MalformedLength)
    } else {
        Err(CodecError::Incomplete)
    }
}

/// Number of bytes the Remaining Length varint takes for a given value.
pub fn remaining_length_width(len: u32) -> usize {
    match len {
        0..=127 => 1,
        128..=16_383 => 2,
        16_384..=2_097_151 => 3,
        _ => 4,
    }
}

/// Validate a PUBLISH topic name: 1-65535 encoded bytes, no '+' or '#'
/// anywhere, and no leading '$'.
pub fn validate_topic(topic: &str) -> Result<(), TopicError> {
    if topic.is_empty() {
        return Err(TopicError::Empty);
    }
    if topic.len() > u16::MAX as usize {
        return Err(TopicError::TooLong);
    }
    if topic.contains('+') || topic.contains('#') {
        return Err(TopicError::WildcardInTopic);
    }
    if topic.starts_with('$') {
        return Err(TopicError::LeadingDollar);
    }
    Ok(())
}

/// Build a CONNECT packet. The variable header is fixed to
/// `[proto_len=4]["MQTT"][0x04][connect_flags][keep_alive]`; the payload
/// carries client id, then username and password when their flags are set.
pub fn build_connect(opts: &ConnectOptions) -> Result<MqttPacket, CodecError> {
    if opts.reserved {
        // The server will declare the request invalid [MQTT-3.1.2-3].
        return Err(CodecError::ProtocolViolation("reserved connect flag set"));
    }
    if opts.will_flag {
        return Err(CodecError::UnsupportedWill);
    }
    if opts.will_qos != 0 || opts.will_retain {
        // Will QoS and Will Retain must be 0 when Will Flag is 0
        // [MQTT-3.1.2-13, MQTT-3.1.2-15].
        return Err(CodecError::ProtocolViolation(
            "will bits set without will flag",
        ));
    }
    if opts.username.is_none() && opts.password.is_some() {
        return Err(CodecError::ProtocolViolation("password without username"));
    }
    if opts.client_id.len() > u16::MAX as usize {
        return Err(CodecError::EncodeError("client id too long"));
    }

    let mut variable_header = Vec::with_capacity(10);
    variable_header.extend_from_slice(&4u16.to_be_bytes());
    variable_header.extend_from_slice(b"MQTT");
    variable_header.push(0x04);
    variable_header.push(opts.connect_flags());
    variable_header.extend_from_slice(&opts.keep_alive.to_be_bytes());

    let mut payload = Vec::new();
    push_len_prefixed(&mut payload, opts.client_id.as_bytes())?;
    if let Some(ref username) = opts.username {
        push_len_prefixed(&mut payload, username.as_bytes())?;
    }
    if let Some(ref password) = opts.password {
        push_len_prefixed(&mut payload, password)?;
    }

    let pkt = MqttPacket {
        packet_type: PacketType::Connect,
        header_flags: 0x10,
        variable_header,
        payload,
    };
    if pkt.remaining_length() > MAX_REMAINING_LENGTH {
        return Err(CodecError::RangeError);
    }
    Ok(pkt)
}

/// Build a PUBLISH packet. Header byte is `0x30 | dup<<3 | qos<<1 | retain`;
/// the variable header is `[topic_len][topic]` plus a packet identifier when
/// QoS is 1.
pub fn build_publish(opts: &PublishOptions) -> Result<MqttPacket, CodecError> {
    if opts.qos == 2 {
        return Err(CodecError::UnsupportedQoS);
    }
    if opts.qos > 2 {
        // A PUBLISH must not have both QoS bits set [MQTT-3.3.1-4].
        return Err(CodecError::ProtocolViolation("both QoS bits set"));
    }
    validate_topic(&opts.topic)?;
    match (opts.qos, opts.msgid) {
        (1, None) => return Err(CodecError::ProtocolViolation("QoS 1 without packet id")),
        (0, Some(_)) => return Err(CodecError::ProtocolViolation("packet id with QoS 0")),
        _ => {}
    }

    let topic_bytes = opts.topic.as_bytes();
    let mut variable_header = Vec::with_capacity(2 + topic_bytes.len() + 2);
    variable_header.extend_from_slice(&(topic_bytes.len() as u16).to_be_bytes());
    variable_header.extend_from_slice(topic_bytes);
    if let Some(msgid) = opts.msgid {
        variable_header.extend_from_slice(&msgid.to_be_bytes());
    }

    let header_flags =
        0x30 | u8::from(opts.dup) << 3 | (opts.qos & 0x03) << 1 | u8::from(opts.retain);
    let pkt = MqttPacket {
        packet_type: PacketType::Publish,
        header_flags,
        variable_header,
        payload: opts.payload.clone(),
    };
    if pkt.remaining_length() > MAX_REMAINING_LENGTH {
        return Err(CodecError::RangeError);
    }
    Ok(pkt)
}

/// Serialize a packet: `[header_flags][remaining_length][variable_header][payload]`.
pub fn encode_packet(pkt: &MqttPacket) -> Result<Vec<u8>, CodecError> {
    check_invariants(pkt)?;
    let remaining = pkt.remaining_length();
    let len_bytes = encode_remaining_length(remaining)?;
    let mut out = Vec::with_capacity(1 + len_bytes.len() + remaining as usize);
    out.push(pkt.header_flags);
    out.extend_from_slice(&len_bytes);
    out.extend_from_slice(&pkt.variable_header);
    out.extend_from_slice(&pkt.payload);
    Ok(out)
}

/// Parse exactly one complete control packet.
pub fn decode_packet(bytes: &[u8]) -> Result<MqttPacket, CodecError> {
    let (pkt, consumed) = decode_packet_prefix(bytes)?;
    if consumed != bytes.len() {
        return Err(CodecError::TrailingBytes);
    }
    Ok(pkt)
}

/// Parse one control packet from the front of a buffer, returning it together
/// with the number of bytes consumed. Suits stream readers where more data may
/// follow.
pub fn decode_packet_prefix(bytes: &[u8]) -> Result<(MqttPacket, usize), CodecError> {
    if bytes.is_empty() {
        return Err(CodecError::Incomplete);
    }
    let header_flags = bytes[0];
    let nibble = header_flags >> 4;
    let packet_type = PacketType::from_nibble(nibble).ok_or(CodecError::UnknownType(nibble))?;
    let (remaining, len_width) = decode_remaining_length(&bytes[1..])?;
    let total = 1 + len_width + remaining as usize;
    if bytes.len() < total {
        return Err(CodecError::Incomplete);
    }
    let body = &bytes[1 + len_width..total];
    let (variable_header, payload) = split_body(packet_type, header_flags, body)?;
    let pkt = MqttPacket {
        packet_type,
        header_flags,
        variable_header,
        payload,
    };
    check_invariants(&pkt)?;
    Ok((pkt, total))
}

fn push_len_prefixed(out: &mut Vec<u8>, bytes: &[u8]) -> Result<(), CodecError> {
    if bytes.len() > u16::MAX as usize {
        return Err(CodecError::EncodeError("field exceeds 65535 bytes"));
    }
    out.extend_from_slice(&(bytes.len() as u16).to_be_bytes());
    out.extend_from_slice(bytes);
    Ok(())
}

/// Split a packet body into variable header and payload per packet type.
fn split_body(
    packet_type: PacketType,
    header_flags: u8,
    body: &[u8],
) -> Result<(Vec<u8>, Vec<u8>), CodecError> {
    let split_at = |n: usize| -> Result<(Vec<u8>, Vec<u8>), CodecError> {
        if body.len() < n {
            return Err(CodecError::Incomplete);
        }
        Ok((body[..n].to_vec(), body[n..].to_vec()))
    };
    match packet_type {
        PacketType::Connect => {
            if body.len() < 2 {
                return Err(CodecError::Incomplete);
            }
            let proto_len = u16::from_be_bytes([body[0], body[1]]) as usize;
            // proto name + level + flags + keep alive
            split_at(2 + proto_len + 4)
        }
        PacketType::Connack => split_at(2),
        PacketType::Publish => {
            if body.len() < 2 {
                return Err(CodecError::Incomplete);
            }
            let topic_len = u16::from_be_bytes([body[0], body[1]]) as usize;
            let qos = (header_flags >> 1) & 0x03;
            let vh_len = 2 + topic_len + if qos > 0 { 2 } else { 0 };
            split_at(vh_len)
        }
        PacketType::Puback
        | PacketType::Pubrec
        | PacketType::Pubrel
        | PacketType::Pubcomp
        | PacketType::Suback
        | PacketType::Unsuback
        | PacketType::Subscribe
        | PacketType::Unsubscribe => split_at(2),
        PacketType::Pingreq | PacketType::Pingresp | PacketType::Disconnect => {
            Ok((Vec::new(), body.to_vec()))
        }
    }
}

fn check_invariants(pkt: &MqttPacket) -> Result<(), CodecError> {
    if pkt.header_flags >> 4 != pkt.packet_type.nibble() {
        return Err(CodecError::EncodeError(
            "type nibble disagrees with packet type",
        ));
    }
    if pkt.remaining_length() > MAX_REMAINING_LENGTH {
        return Err(CodecError::RangeError);
    }
    if pkt.packet_type == PacketType::Publish {
        let qos = (pkt.header_flags >> 1) & 0x03;
        if qos == 3 {
            return Err(CodecError::ProtocolViolation("both QoS bits set"));
        }
        let view = pkt
            .publish_view()
            .ok_or(CodecError::EncodeError("malformed PUBLISH variable header"))?;
        if qos > 0 && view.msgid.is_none() {
            return Err(CodecError::ProtocolViolation("QoS > 0 without packet id"));
        }
        if core::str::from_utf8(view.topic).is_err() {
            return Err(CodecError::InvalidUtf8);
        }
    }
    Ok(())
}
