//! Attack campaign generation: whitespace-padded topics and payloads, ACL
//! pattern matching, and full TCP session synthesis.
//!
//! Padding never alters content: stripping trailing 0x20 bytes from any
//! emitted topic or payload recovers the base value exactly.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mqtt::{
    build_connect, build_publish, encode_packet, validate_topic, CodecError, ConnectOptions,
    MqttPacket, PublishOptions, TopicError,
};
use crate::num;
use crate::tcp::{
    emit_segment, flags, max_padding_budget, wrap_mqtt, SessionContext, TcpError, TcpSegment,
    DEFAULT_MSS, MQTT_PORT,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CraftError {
    Topic(TopicError),
    Codec(CodecError),
    Tcp(TcpError),
    /// Token pool for random topic generation is empty.
    EmptyPool,
    /// levels must be at least 1.
    ZeroLevels,
    /// Requested payload padding exceeds the MSS budget.
    BudgetExceeded {
        requested: usize,
        budget: usize,
    },
    /// ACL patterns may use '+' only; '#' is excluded by assumption.
    MultiLevelWildcard,
    /// An emitted topic would not match the campaign ACL rule.
    AclMismatch,
    /// Publishing requires write or readwrite permission.
    NotWritable,
    /// Base topic or payload ends in 0x20, so padding could not be stripped
    /// back off unambiguously.
    TrailingSpaceBase,
}

impl fmt::Display for CraftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CraftError::Topic(e) => write!(f, "{e}"),
            CraftError::Codec(e) => write!(f, "{e}"),
            CraftError::Tcp(e) => write!(f, "{e}"),
            CraftError::EmptyPool => write!(f, "token pool is empty"),
            CraftError::ZeroLevels => write!(f, "topic needs at least one level"),
            CraftError::BudgetExceeded { requested, budget } => {
                write!(f, "padding {requested} exceeds budget {budget}")
            }
            CraftError::MultiLevelWildcard => write!(f, "ACL pattern must not contain '#'"),
            CraftError::AclMismatch => write!(f, "topic does not match the ACL rule"),
            CraftError::NotWritable => write!(f, "ACL rule does not grant write access"),
            CraftError::TrailingSpaceBase => {
                write!(f, "base topic and payload must not end in a space")
            }
        }
    }
}

impl core::error::Error for CraftError {}

impl From<TopicError> for CraftError {
    fn from(e: TopicError) -> Self {
        CraftError::Topic(e)
    }
}

impl From<CodecError> for CraftError {
    fn from(e: CodecError) -> Self {
        CraftError::Codec(e)
    }
}

impl From<TcpError> for CraftError {
    fn from(e: TcpError) -> Self {
        CraftError::Tcp(e)
    }
}

/// Access granted by an ACL entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Permission {
    Read,
    Write,
    ReadWrite,
}

impl Permission {
    pub fn allows_publish(self) -> bool {
        matches!(self, Permission::Write | Permission::ReadWrite)
    }
}

/// A server-side access control entry: a permission and a topic pattern that
/// may contain the single-level wildcard '+'.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AclRule {
    pub permission: Permission,
    pub pattern: String,
}

impl AclRule {
    pub fn new(permission: Permission, pattern: &str) -> Result<Self, CraftError> {
        if pattern.contains('#') {
            return Err(CraftError::MultiLevelWildcard);
        }
        Ok(AclRule {
            permission,
            pattern: String::from(pattern),
        })
    }
}

/// Declarative description of an attack campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CraftSpec {
    pub base_topic: String,
    /// Inclusive range of whitespace characters appended to the topic.
    pub topic_pad_range: (usize, usize),
    pub base_payload: Vec<u8>,
    /// Candidate payload padding counts, drawn uniformly per PUBLISH.
    pub payload_pad_counts: Vec<usize>,
    /// Probability that a PUBLISH uses QoS 1 (otherwise QoS 0).
    pub qos1_probability: f64,
    /// Probability that a PUBLISH sets the RETAIN flag.
    pub retain_probability: f64,
    pub publish_count: usize,
    pub acl_rule: AclRule,
}

impl Default for CraftSpec {
    fn default() -> Self {
        CraftSpec {
            base_topic: String::from("Building1/Floor3/Sensor1"),
            topic_pad_range: (0, 3),
            base_payload: b"27.5C 61%".to_vec(),
            payload_pad_counts: alloc::vec![0, 50, 100, 200],
            qos1_probability: 0.5,
            retain_probability: 0.25,
            publish_count: 10,
            acl_rule: AclRule {
                permission: Permission::ReadWrite,
                pattern: String::from("Building1/Floor3/+"),
            },
        }
    }
}

/// Network parameters for one synthesized session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetParams {
    pub src_ip: [u8; 4],
    pub dst_ip: [u8; 4],
    pub src_port: u16,
    pub dst_port: u16,
    pub mss: u32,
    pub connect: ConnectOptions,
}

impl Default for NetParams {
    fn default() -> Self {
        NetParams {
            src_ip: [192, 168, 10, 20],
            dst_ip: [192, 168, 10, 1],
            src_port: 49_152,
            dst_port: MQTT_PORT,
            mss: DEFAULT_MSS,
            connect: ConnectOptions {
                username: Some(String::from("device")),
                password: Some(b"device-key".to_vec()),
                ..Default::default()
            },
        }
    }
}

/// Which endpoint emitted a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

/// Append exactly `n` space characters to a topic. The hierarchy is untouched
/// because 0x20 is not a separator.
pub fn pad_topic(base: &str, n: usize) -> Result<String, TopicError> {
    let mut topic = String::with_capacity(base.len() + n);
    topic.push_str(base);
    for _ in 0..n {
        topic.push(' ');
    }
    validate_topic(&topic)?;
    Ok(topic)
}

/// Append `n_spaces` 0x20 bytes to a payload, bounded by the MSS budget.
pub fn pad_payload(base: &[u8], n_spaces: usize, budget: usize) -> Result<Vec<u8>, CraftError> {
    if n_spaces > budget {
        return Err(CraftError::BudgetExceeded {
            requested: n_spaces,
            budget,
        });
    }
    let mut out = Vec::with_capacity(base.len() + n_spaces);
    out.extend_from_slice(base);
    out.extend_from_slice(&alloc::vec![0x20; n_spaces]);
    Ok(out)
}

/// Split topic names into tokens on '/', '_', and whitespace, dropping empties.
pub fn tokenize_topics<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Vec<String> {
    let mut tokens = Vec::new();
    for name in names {
        for token in name.split(|c: char| c == '/' || c == '_' || c.is_whitespace()) {
            if !token.is_empty() && !tokens.iter().any(|t| t == token) {
                tokens.push(String::from(token));
            }
        }
    }
    tokens
}

/// Build a topic of `levels` segments drawn from a token pool, joined by '/'.
pub fn random_topic_from_tokens<R: Rng>(
    token_pool: &[String],
    levels: usize,
    rng: &mut R,
) -> Result<String, CraftError> {
    if token_pool.is_empty() {
        return Err(CraftError::EmptyPool);
    }
    if levels == 0 {
        return Err(CraftError::ZeroLevels);
    }
    let mut topic = String::new();
    for i in 0..levels {
        if i > 0 {
            topic.push('/');
        }
        topic.push_str(&token_pool[rng.gen_range(0..token_pool.len())]);
    }
    validate_topic(&topic).map_err(CraftError::Topic)?;
    Ok(topic)
}

/// Match a topic against a '+'-wildcard pattern: the '/'-split levels must
/// align one to one, '+' matching exactly one whole level.
pub fn acl_match(rule: &AclRule, topic: &str) -> bool {
    let mut pattern_levels = rule.pattern.split('/');
    let mut topic_levels = topic.split('/');
    loop {
        match (pattern_levels.next(), topic_levels.next()) {
            (Some(p), Some(t)) => {
                if p != "+" && p != t {
                    return false;
                }
            }
            (None, None) => return true,
            _ => return false,
        }
    }
}

/// Deterministic per-session seed derivation.
pub fn session_seed(campaign_seed: u64, session_index: u64) -> u64 {
    num::splitmix64(campaign_seed ^ num::splitmix64(session_index.wrapping_add(1)))
}

/// Draw the crafted PUBLISH packets of one campaign run: per packet a padded
/// topic within the configured range, QoS and RETAIN per their mixes, a
/// sequential packet identifier for QoS 1, and a payload padding drawn from
/// the configured counts, bounded by the MSS budget.
pub fn generate_publishes<R: Rng>(
    spec: &CraftSpec,
    mss: u32,
    rng: &mut R,
) -> Result<Vec<MqttPacket>, CraftError> {
    if !spec.acl_rule.permission.allows_publish() {
        return Err(CraftError::NotWritable);
    }
    // stripping trailing 0x20 must recover the base content exactly, which
    // rules out bases that end in a space themselves
    if spec.base_topic.ends_with(' ') || spec.base_payload.last() == Some(&0x20) {
        return Err(CraftError::TrailingSpaceBase);
    }
    let mut out = Vec::with_capacity(spec.publish_count);
    let mut msgid: u16 = 0;
    for _ in 0..spec.publish_count {
        let topic_pad = rng.gen_range(spec.topic_pad_range.0..=spec.topic_pad_range.1);
        let topic = pad_topic(&spec.base_topic, topic_pad)?;
        if !acl_match(&spec.acl_rule, &topic) {
            return Err(CraftError::AclMismatch);
        }

        let qos = u8::from(rng.gen_bool(spec.qos1_probability));
        let retain = rng.gen_bool(spec.retain_probability);
        let this_msgid = if qos == 1 {
            msgid = msgid.wrapping_add(1).max(1);
            Some(msgid)
        } else {
            None
        };

        let budget = max_padding_budget(
            topic.len(),
            this_msgid.is_some(),
            spec.base_payload.len(),
            mss,
        )?;
        let pad = if spec.payload_pad_counts.is_empty() {
            0
        } else {
            spec.payload_pad_counts[rng.gen_range(0..spec.payload_pad_counts.len())]
        };
        let payload = pad_payload(&spec.base_payload, pad, budget)?;

        out.push(build_publish(&PublishOptions {
            dup: false,
            qos,
            retain,
            topic,
            msgid: this_msgid,
            payload,
        })?);
    }
    Ok(out)
}

/// Synthesize one full bidirectional session: TCP three-way handshake, then
/// CONNECT/CONNACK, then `publish_count` crafted PUBLISHes, each acknowledged
/// by the server and answered with a PUBACK when QoS is 1.
pub fn generate_session(
    spec: &CraftSpec,
    net: &NetParams,
    seed: u64,
) -> Result<Vec<(Direction, TcpSegment)>, CraftError> {
    if !spec.acl_rule.permission.allows_publish() {
        return Err(CraftError::NotWritable);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let client_isn: u32 = rng.gen();
    let server_isn: u32 = rng.gen();

    let mut client = SessionContext {
        src_ip: net.src_ip,
        dst_ip: net.dst_ip,
        src_port: net.src_port,
        dst_port: net.dst_port,
        seq: client_isn,
        ack: 0,
        established: false,
    };
    let mut server = SessionContext {
        src_ip: net.dst_ip,
        dst_ip: net.src_ip,
        src_port: net.dst_port,
        dst_port: net.src_port,
        seq: server_isn,
        ack: 0,
        established: false,
    };

    let mut out = Vec::with_capacity(5 + spec.publish_count * 3);

    // Three-way handshake. SYN and SYN-ACK each consume one sequence unit.
    out.push((
        Direction::ClientToServer,
        emit_segment(&mut client, flags::SYN, Vec::new(), net.mss)?,
    ));
    server.ack = client.seq;
    out.push((
        Direction::ServerToClient,
        emit_segment(&mut server, flags::SYN | flags::ACK, Vec::new(), net.mss)?,
    ));
    client.ack = server.seq;
    client.established = true;
    server.established = true;
    out.push((
        Direction::ClientToServer,
        emit_segment(&mut client, flags::ACK, Vec::new(), net.mss)?,
    ));

    // A client sends exactly one CONNECT, first.
    let connect = encode_packet(&build_connect(&net.connect)?)?;
    out.push((
        Direction::ClientToServer,
        wrap_mqtt(&mut client, connect, net.mss)?,
    ));
    server.ack = client.seq;
    let connack = encode_packet(&MqttPacket::connack(false, 0x00))?;
    out.push((
        Direction::ServerToClient,
        wrap_mqtt(&mut server, connack, net.mss)?,
    ));

    for publish in generate_publishes(spec, net.mss, &mut rng)? {
        client.ack = server.seq;
        let msgid = publish.publish_view().and_then(|v| v.msgid);
        let publish_bytes = encode_packet(&publish)?;
        out.push((
            Direction::ClientToServer,
            wrap_mqtt(&mut client, publish_bytes, net.mss)?,
        ));

        server.ack = client.seq;
        out.push((
            Direction::ServerToClient,
            emit_segment(&mut server, flags::ACK, Vec::new(), net.mss)?,
        ));
        if let Some(id) = msgid {
            let puback = encode_packet(&MqttPacket::puback(id))?;
            out.push((
                Direction::ServerToClient,
                wrap_mqtt(&mut server, puback, net.mss)?,
            ));
        }
    }

    Ok(out)
}

/// Generate a campaign of independent sessions with derived seeds and
/// consecutive client ports.
pub fn generate_campaign(
    spec: &CraftSpec,
    net: &NetParams,
    sessions: usize,
    seed: u64,
) -> Result<Vec<Vec<(Direction, TcpSegment)>>, CraftError> {
    let mut out = Vec::with_capacity(sessions);
    for i in 0..sessions {
        let mut session_net = net.clone();
        session_net.src_port = net.src_port.wrapping_add(i as u16);
        out.push(generate_session(
            spec,
            &session_net,
            session_seed(seed, i as u64),
        )?);
    }
    Ok(out)
}

/// Strip trailing 0x20 bytes; used to state the benignness property.
pub fn strip_trailing_spaces(bytes: &[u8]) -> &[u8] {
    let mut end = bytes.len();
    while end > 0 && bytes[end - 1] == 0x20 {
        end -= 1;
    }
    &bytes[..end]
}
