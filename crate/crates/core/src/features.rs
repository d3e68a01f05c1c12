//! Per-packet feature extraction into the 61-column Edge-IIoTset-compatible
//! schema, plus column rendering rules.
//!
//! Only Ethernet/IPv4/TCP frames are dissected and only MQTT on port 1883 is
//! decoded; every other protocol group (ARP, ICMP, HTTP, UDP, DNS, Modbus) is
//! emitted as its null sentinel: 0 for numeric columns, the empty string for
//! string columns. Hex-valued columns render as lowercase hex with a `0x`
//! prefix; raw byte columns as colon-separated hex pairs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::str::FromStr;

use chrono::{DateTime, Utc};

use crate::frame::{parse_frame, CaptureFrame, Timestamp};
use crate::mqtt::{self, PacketType};
use crate::tcp::MQTT_PORT;

/// Protocol groups of the schema, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Frame,
    Ip,
    Arp,
    Icmp,
    Http,
    Tcp,
    Udp,
    Dns,
    Mqtt,
    Mbtcp,
}

/// How a column renders and which sentinel it takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Decimal integer; sentinel "0".
    Num,
    /// Free text; sentinel "".
    Str,
}

#[derive(Debug, Clone, Copy)]
pub struct Column {
    /// Feature id, 1-based (F1..F61).
    pub id: u8,
    pub name: &'static str,
    pub group: Protocol,
    pub kind: ColumnKind,
}

const fn col(id: u8, name: &'static str, group: Protocol, kind: ColumnKind) -> Column {
    Column {
        id,
        name,
        group,
        kind,
    }
}

/// The full 61-column schema in feature-id order.
pub static SCHEMA: [Column; 61] = [
    col(1, "frame.time", Protocol::Frame, ColumnKind::Str),
    col(2, "ip.src_host", Protocol::Ip, ColumnKind::Str),
    col(3, "ip.dst_host", Protocol::Ip, ColumnKind::Str),
    col(4, "arp.dst.proto_ipv4", Protocol::Arp, ColumnKind::Str),
    col(5, "arp.opcode", Protocol::Arp, ColumnKind::Num),
    col(6, "arp.hw.size", Protocol::Arp, ColumnKind::Num),
    col(7, "arp.src.proto_ipv4", Protocol::Arp, ColumnKind::Str),
    col(8, "icmp.checksum", Protocol::Icmp, ColumnKind::Num),
    col(9, "icmp.seq_le", Protocol::Icmp, ColumnKind::Num),
    col(
        10,
        "icmp.transmit_timestamp",
        Protocol::Icmp,
        ColumnKind::Num,
    ),
    col(11, "icmp.unused", Protocol::Icmp, ColumnKind::Num),
    col(12, "http.file_data", Protocol::Http, ColumnKind::Str),
    col(13, "http.content_length", Protocol::Http, ColumnKind::Num),
    col(
        14,
        "http.request.uri.query",
        Protocol::Http,
        ColumnKind::Str,
    ),
    col(15, "http.request.method", Protocol::Http, ColumnKind::Str),
    col(16, "http.referer", Protocol::Http, ColumnKind::Str),
    col(17, "http.request.full_uri", Protocol::Http, ColumnKind::Str),
    col(18, "http.request.version", Protocol::Http, ColumnKind::Str),
    col(19, "http.response", Protocol::Http, ColumnKind::Num),
    col(20, "http.tls_port", Protocol::Http, ColumnKind::Num),
    col(21, "tcp.ack", Protocol::Tcp, ColumnKind::Num),
    col(22, "tcp.ack_raw", Protocol::Tcp, ColumnKind::Num),
    col(23, "tcp.checksum", Protocol::Tcp, ColumnKind::Str),
    col(24, "tcp.connection.fin", Protocol::Tcp, ColumnKind::Num),
    col(25, "tcp.connection.rst", Protocol::Tcp, ColumnKind::Num),
    col(26, "tcp.connection.syn", Protocol::Tcp, ColumnKind::Num),
    col(27, "tcp.connection.synack", Protocol::Tcp, ColumnKind::Num),
    col(28, "tcp.dstport", Protocol::Tcp, ColumnKind::Num),
    col(29, "tcp.flags", Protocol::Tcp, ColumnKind::Str),
    col(30, "tcp.flags.ack", Protocol::Tcp, ColumnKind::Num),
    col(31, "tcp.len", Protocol::Tcp, ColumnKind::Num),
    col(32, "tcp.options", Protocol::Tcp, ColumnKind::Str),
    col(33, "tcp.payload", Protocol::Tcp, ColumnKind::Str),
    col(34, "tcp.seq", Protocol::Tcp, ColumnKind::Num),
    col(35, "tcp.srcport", Protocol::Tcp, ColumnKind::Num),
    col(36, "udp.port", Protocol::Udp, ColumnKind::Num),
    col(37, "udp.stream", Protocol::Udp, ColumnKind::Num),
    col(38, "udp.time_delta", Protocol::Udp, ColumnKind::Num),
    col(39, "dns.qry.name", Protocol::Udp, ColumnKind::Str),
    col(40, "dns.qry.name.len", Protocol::Udp, ColumnKind::Num),
    col(41, "dns.qry.qu", Protocol::Dns, ColumnKind::Num),
    col(42, "dns.qry.type", Protocol::Dns, ColumnKind::Num),
    col(43, "dns.retransmission", Protocol::Dns, ColumnKind::Num),
    col(44, "dns.retransmit_request", Protocol::Dns, ColumnKind::Num),
    col(
        45,
        "dns.retransmit_request_in",
        Protocol::Dns,
        ColumnKind::Num,
    ),
    col(46, "mqtt.conack.flags", Protocol::Mqtt, ColumnKind::Str),
    col(
        47,
        "mqtt.conflag.cleansess",
        Protocol::Mqtt,
        ColumnKind::Num,
    ),
    col(48, "mqtt.conflags", Protocol::Mqtt, ColumnKind::Str),
    col(49, "mqtt.hdrflags", Protocol::Mqtt, ColumnKind::Str),
    col(50, "mqtt.len", Protocol::Mqtt, ColumnKind::Num),
    col(51, "mqtt.msg_decoded_as", Protocol::Mqtt, ColumnKind::Str),
    col(52, "mqtt.msg", Protocol::Mqtt, ColumnKind::Str),
    col(53, "mqtt.msgtype", Protocol::Mqtt, ColumnKind::Num),
    col(54, "mqtt.proto_len", Protocol::Mqtt, ColumnKind::Num),
    col(55, "mqtt.protoname", Protocol::Mqtt, ColumnKind::Str),
    col(56, "mqtt.topic", Protocol::Mqtt, ColumnKind::Str),
    col(57, "mqtt.topic_len", Protocol::Mqtt, ColumnKind::Num),
    col(58, "mqtt.ver", Protocol::Mqtt, ColumnKind::Num),
    col(59, "mbtcp.len", Protocol::Mbtcp, ColumnKind::Num),
    col(60, "mbtcp.trans_id", Protocol::Mbtcp, ColumnKind::Num),
    col(61, "mbtcp.unit_id", Protocol::Mbtcp, ColumnKind::Num),
];

/// Column subset selection for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureProfile {
    /// All 61 columns (the default).
    Full61,
    /// One protocol group of the schema.
    Group(Protocol),
    /// The TCP and MQTT groups together.
    TcpMqtt,
}

impl FeatureProfile {
    pub fn columns(&self) -> Vec<&'static Column> {
        match self {
            FeatureProfile::Full61 => SCHEMA.iter().collect(),
            FeatureProfile::Group(g) => SCHEMA.iter().filter(|c| c.group == *g).collect(),
            FeatureProfile::TcpMqtt => SCHEMA
                .iter()
                .filter(|c| c.group == Protocol::Tcp || c.group == Protocol::Mqtt)
                .collect(),
        }
    }
}

impl FromStr for FeatureProfile {
    type Err = UnknownProfile;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full61" | "full" => Ok(FeatureProfile::Full61),
            "frame" => Ok(FeatureProfile::Group(Protocol::Frame)),
            "ip" => Ok(FeatureProfile::Group(Protocol::Ip)),
            "arp" => Ok(FeatureProfile::Group(Protocol::Arp)),
            "icmp" => Ok(FeatureProfile::Group(Protocol::Icmp)),
            "http" => Ok(FeatureProfile::Group(Protocol::Http)),
            "tcp" => Ok(FeatureProfile::Group(Protocol::Tcp)),
            "udp" => Ok(FeatureProfile::Group(Protocol::Udp)),
            "dns" => Ok(FeatureProfile::Group(Protocol::Dns)),
            "mqtt" => Ok(FeatureProfile::Group(Protocol::Mqtt)),
            "mbtcp" => Ok(FeatureProfile::Group(Protocol::Mbtcp)),
            "tcp-mqtt" => Ok(FeatureProfile::TcpMqtt),
            _ => Err(UnknownProfile),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnknownProfile;

impl core::fmt::Display for UnknownProfile {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "unknown profile (expected full61, tcp-mqtt, or a protocol group name)"
        )
    }
}

impl core::error::Error for UnknownProfile {}

/// TCP fields of one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcpFields {
    pub ack: u32,
    pub checksum: u16,
    pub connection_fin: bool,
    pub connection_rst: bool,
    pub connection_syn: bool,
    pub connection_synack: bool,
    pub dstport: u16,
    pub flags: u16,
    pub flags_ack: bool,
    pub len: u32,
    pub options: Vec<u8>,
    pub payload: Vec<u8>,
    pub seq: u32,
    pub srcport: u16,
}

/// MQTT fields of one record, present only when the TCP payload decoded as an
/// MQTT control packet on port 1883.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MqttFields {
    pub hdrflags: u8,
    pub len: u32,
    pub msgtype: u8,
    pub conack_flags: Option<u8>,
    pub clean_session: Option<bool>,
    pub conflags: Option<u8>,
    pub proto_len: Option<u16>,
    pub protoname: Option<String>,
    pub ver: Option<u8>,
    pub msg: Vec<u8>,
    pub topic: Option<String>,
    pub topic_len: Option<u16>,
}

/// One row of the 61-feature schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRecord {
    pub ts: Timestamp,
    pub ip_src: [u8; 4],
    pub ip_dst: [u8; 4],
    pub tcp: TcpFields,
    pub mqtt: Option<MqttFields>,
}

/// Result of extracting a capture: records plus tallies of what was skipped.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub records: Vec<FeatureRecord>,
    /// Frames that were not Ethernet/IPv4/TCP.
    pub skipped: usize,
    /// Port-1883 payloads that did not decode as MQTT.
    pub mqtt_decode_failures: usize,
    /// Segments carrying more than one MQTT packet (only the first is kept).
    pub coalesced_segments: usize,
}

/// Extract one record per parseable frame; malformed frames are tallied, not
/// fatal.
pub fn extract_features(frames: &[CaptureFrame]) -> Extraction {
    let mut out = Extraction::default();
    for frame in frames {
        let parsed = match parse_frame(frame) {
            Ok(p) => p,
            Err(_) => {
                out.skipped += 1;
                continue;
            }
        };
        let syn = parsed.flag(crate::tcp::flags::SYN);
        let ack = parsed.flag(crate::tcp::flags::ACK);
        let tcp = TcpFields {
            ack: parsed.ack,
            checksum: parsed.checksum,
            connection_fin: parsed.flag(crate::tcp::flags::FIN),
            connection_rst: parsed.flag(crate::tcp::flags::RST),
            connection_syn: syn && !ack,
            connection_synack: syn && ack,
            dstport: parsed.dst_port,
            flags: parsed.flags,
            flags_ack: ack,
            len: parsed.payload.len() as u32,
            options: parsed.options.clone(),
            payload: parsed.payload.clone(),
            seq: parsed.seq,
            srcport: parsed.src_port,
        };

        let on_mqtt_port = parsed.src_port == MQTT_PORT || parsed.dst_port == MQTT_PORT;
        let mqtt = if on_mqtt_port && !parsed.payload.is_empty() {
            match mqtt::decode_packet_prefix(&parsed.payload) {
                Ok((pkt, consumed)) => {
                    if consumed < parsed.payload.len() {
                        out.coalesced_segments += 1;
                    }
                    Some(mqtt_fields(&pkt))
                }
                Err(_) => {
                    out.mqtt_decode_failures += 1;
                    None
                }
            }
        } else {
            None
        };

        out.records.push(FeatureRecord {
            ts: parsed.ts,
            ip_src: parsed.src_ip,
            ip_dst: parsed.dst_ip,
            tcp,
            mqtt,
        });
    }
    out
}

fn mqtt_fields(pkt: &mqtt::MqttPacket) -> MqttFields {
    let mut fields = MqttFields {
        hdrflags: pkt.header_flags,
        len: pkt.remaining_length(),
        msgtype: pkt.packet_type.nibble(),
        conack_flags: None,
        clean_session: None,
        conflags: None,
        proto_len: None,
        protoname: None,
        ver: None,
        msg: Vec::new(),
        topic: None,
        topic_len: None,
    };
    match pkt.packet_type {
        PacketType::Connect => {
            if let Some(view) = pkt.connect_view() {
                fields.clean_session = Some(view.clean_session());
                fields.conflags = Some(view.connect_flags);
                fields.proto_len = Some(view.proto_len);
                fields.protoname = core::str::from_utf8(view.protoname).ok().map(String::from);
                fields.ver = Some(view.level);
            }
        }
        PacketType::Connack => {
            fields.conack_flags = pkt.variable_header.first().copied();
        }
        PacketType::Publish => {
            if let Some(view) = pkt.publish_view() {
                fields.msg = view.payload.to_vec();
                fields.topic = core::str::from_utf8(view.topic).ok().map(String::from);
                fields.topic_len = Some(view.topic.len() as u16);
            }
        }
        _ => {}
    }
    fields
}

fn dotted(ip: [u8; 4]) -> String {
    format!("{}.{}.{}.{}", ip[0], ip[1], ip[2], ip[3])
}

fn colon_hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 3);
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 {
            out.push(':');
        }
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Fixed-format UTC timestamp with microseconds.
pub fn render_frame_time(ts: Timestamp) -> String {
    let dt = DateTime::<Utc>::from_timestamp(i64::from(ts.sec), ts.usec * 1_000)
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH);
    dt.format("%Y-%m-%d %H:%M:%S%.6f").to_string()
}

/// Render one column of one record, honoring the null sentinels.
pub fn render_value(rec: &FeatureRecord, column: &Column) -> String {
    let num = |v: u64| v.to_string();
    let bit = |b: bool| u64::from(b).to_string();
    match column.name {
        "frame.time" => render_frame_time(rec.ts),
        "ip.src_host" => dotted(rec.ip_src),
        "ip.dst_host" => dotted(rec.ip_dst),
        "tcp.ack" => num(rec.tcp.ack.into()),
        "tcp.ack_raw" => num(rec.tcp.ack.into()),
        "tcp.checksum" => format!("0x{:04x}", rec.tcp.checksum),
        "tcp.connection.fin" => bit(rec.tcp.connection_fin),
        "tcp.connection.rst" => bit(rec.tcp.connection_rst),
        "tcp.connection.syn" => bit(rec.tcp.connection_syn),
        "tcp.connection.synack" => bit(rec.tcp.connection_synack),
        "tcp.dstport" => num(rec.tcp.dstport.into()),
        "tcp.flags" => format!("0x{:04x}", rec.tcp.flags),
        "tcp.flags.ack" => bit(rec.tcp.flags_ack),
        "tcp.len" => num(rec.tcp.len.into()),
        "tcp.options" => colon_hex(&rec.tcp.options),
        "tcp.payload" => colon_hex(&rec.tcp.payload),
        "tcp.seq" => num(rec.tcp.seq.into()),
        "tcp.srcport" => num(rec.tcp.srcport.into()),
        "mqtt.conack.flags" => match rec.mqtt.as_ref().and_then(|m| m.conack_flags) {
            Some(v) => format!("0x{v:02x}"),
            None => String::new(),
        },
        "mqtt.conflag.cleansess" => match rec.mqtt.as_ref().and_then(|m| m.clean_session) {
            Some(v) => bit(v),
            None => "0".to_string(),
        },
        "mqtt.conflags" => match rec.mqtt.as_ref().and_then(|m| m.conflags) {
            Some(v) => format!("0x{v:02x}"),
            None => String::new(),
        },
        "mqtt.hdrflags" => match rec.mqtt.as_ref() {
            Some(m) => format!("0x{:02x}", m.hdrflags),
            None => String::new(),
        },
        "mqtt.len" => num(rec.mqtt.as_ref().map_or(0, |m| u64::from(m.len))),
        "mqtt.msg_decoded_as" => String::new(),
        "mqtt.msg" => rec
            .mqtt
            .as_ref()
            .map_or_else(String::new, |m| colon_hex(&m.msg)),
        "mqtt.msgtype" => num(rec.mqtt.as_ref().map_or(0, |m| u64::from(m.msgtype))),
        "mqtt.proto_len" => num(rec
            .mqtt
            .as_ref()
            .and_then(|m| m.proto_len)
            .map_or(0, u64::from)),
        "mqtt.protoname" => rec
            .mqtt
            .as_ref()
            .and_then(|m| m.protoname.clone())
            .unwrap_or_default(),
        "mqtt.topic" => rec
            .mqtt
            .as_ref()
            .and_then(|m| m.topic.clone())
            .unwrap_or_default(),
        "mqtt.topic_len" => num(rec
            .mqtt
            .as_ref()
            .and_then(|m| m.topic_len)
            .map_or(0, u64::from)),
        "mqtt.ver" => num(rec.mqtt.as_ref().and_then(|m| m.ver).map_or(0, u64::from)),
        _ => match column.kind {
            ColumnKind::Num => "0".to_string(),
            ColumnKind::Str => String::new(),
        },
    }
}

/// Render a full row in the column order of a profile.
pub fn render_row(rec: &FeatureRecord, profile: &FeatureProfile) -> Vec<String> {
    profile
        .columns()
        .iter()
        .map(|c| render_value(rec, c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::craft::{generate_session, CraftSpec, NetParams};
    use crate::frame::frame_packet;
    use crate::mqtt::{build_publish, encode_packet, PublishOptions};
    use crate::tcp::{emit_segment, flags, wrap_mqtt, SessionContext, DEFAULT_MSS};
    use alloc::vec;

    #[test]
    fn schema_has_61_columns_in_id_order() {
        assert_eq!(SCHEMA.len(), 61);
        for (i, c) in SCHEMA.iter().enumerate() {
            assert_eq!(usize::from(c.id), i + 1);
        }
    }

    #[test]
    fn tcp_profile_is_f21_to_f35() {
        let cols = FeatureProfile::Group(Protocol::Tcp).columns();
        assert_eq!(cols.len(), 15);
        assert_eq!(cols.first().unwrap().id, 21);
        assert_eq!(cols.last().unwrap().id, 35);
    }

    fn test_ctx() -> SessionContext {
        SessionContext {
            src_ip: [10, 0, 0, 5],
            dst_ip: [10, 0, 0, 1],
            src_port: 40_000,
            dst_port: MQTT_PORT,
            seq: 1,
            ack: 1,
            established: true,
        }
    }

    #[test]
    fn publish_record_fields() {
        let mut ctx = test_ctx();
        let publish = encode_packet(
            &build_publish(&PublishOptions {
                dup: false,
                qos: 0,
                retain: false,
                topic: "Building1/Floor3/Sensor1".into(),
                msgid: None,
                payload: b"27.5C 61%".to_vec(),
            })
            .unwrap(),
        )
        .unwrap();
        let seg = wrap_mqtt(&mut ctx, publish, DEFAULT_MSS).unwrap();
        let extraction = extract_features(&[frame_packet(&seg, Timestamp::new(0, 0))]);
        assert_eq!(extraction.records.len(), 1);
        let rec = &extraction.records[0];
        let m = rec.mqtt.as_ref().unwrap();
        assert_eq!(render_value(rec, &SCHEMA[48]), "0x30"); // mqtt.hdrflags
        assert_eq!(m.msgtype, 3);
        assert_eq!(m.len, 2 + 24 + 9);
        assert_eq!(m.topic.as_deref(), Some("Building1/Floor3/Sensor1"));
        assert_eq!(m.topic_len, Some(24));
    }

    #[test]
    fn pure_ack_has_mqtt_sentinels() {
        let mut ctx = test_ctx();
        let seg = emit_segment(&mut ctx, flags::ACK, vec![], DEFAULT_MSS).unwrap();
        let extraction = extract_features(&[frame_packet(&seg, Timestamp::new(0, 0))]);
        let rec = &extraction.records[0];
        assert!(rec.mqtt.is_none());
        assert_eq!(render_value(rec, &SCHEMA[30]), "0"); // tcp.len
        for c in FeatureProfile::Group(Protocol::Mqtt).columns() {
            let v = render_value(rec, c);
            match c.kind {
                ColumnKind::Num => assert_eq!(v, "0", "{}", c.name),
                ColumnKind::Str => assert_eq!(v, "", "{}", c.name),
            }
        }
    }

    #[test]
    fn connect_record_fields() {
        let session = generate_session(&CraftSpec::default(), &NetParams::default(), 5).unwrap();
        let frames: Vec<CaptureFrame> = session
            .iter()
            .enumerate()
            .map(|(i, (_, seg))| {
                frame_packet(seg, Timestamp::new(100, 0).plus_micros(i as u64 * 1000))
            })
            .collect();
        let extraction = extract_features(&frames);
        let connect = extraction
            .records
            .iter()
            .find(|r| r.mqtt.as_ref().is_some_and(|m| m.msgtype == 1))
            .unwrap();
        let m = connect.mqtt.as_ref().unwrap();
        assert_eq!(m.protoname.as_deref(), Some("MQTT"));
        assert_eq!(m.proto_len, Some(4));
        assert_eq!(m.ver, Some(4));
    }

    #[test]
    fn extraction_fidelity_against_generator() {
        let spec = CraftSpec {
            publish_count: 25,
            ..Default::default()
        };
        let session = generate_session(&spec, &NetParams::default(), 21).unwrap();
        let frames: Vec<CaptureFrame> = session
            .iter()
            .enumerate()
            .map(|(i, (_, seg))| frame_packet(seg, Timestamp::new(0, 0).plus_micros(i as u64)))
            .collect();
        let extraction = extract_features(&frames);
        assert_eq!(extraction.skipped, 0);
        assert_eq!(extraction.records.len(), session.len());
        for (rec, (_, seg)) in extraction.records.iter().zip(&session) {
            assert_eq!(rec.tcp.seq, seg.ctx.seq);
            assert_eq!(rec.tcp.len, seg.len());
            assert_eq!(rec.tcp.checksum, seg.checksum);
        }
        for rec in &extraction.records {
            if let Some(m) = rec.mqtt.as_ref().filter(|m| m.msgtype == 3) {
                let width = mqtt::remaining_length_width(m.len) as u32;
                assert_eq!(rec.tcp.len, m.len + 1 + width);
                assert_eq!(
                    u32::from(m.topic_len.unwrap()),
                    m.topic.as_ref().unwrap().len() as u32
                );
            }
        }
    }

    #[test]
    fn frame_time_fixed_format() {
        assert_eq!(
            render_frame_time(Timestamp::new(0, 0)),
            "1970-01-01 00:00:00.000000"
        );
        assert_eq!(
            render_frame_time(Timestamp::new(1_700_000_000, 123_456)),
            "2023-11-14 22:13:20.123456"
        );
    }

    #[test]
    fn garbage_frames_are_tallied() {
        let junk = CaptureFrame {
            ts: Timestamp::new(0, 0),
            link_bytes: vec![0xFF; 30],
        };
        let extraction = extract_features(&[junk]);
        assert_eq!(extraction.records.len(), 0);
        assert_eq!(extraction.skipped, 1);
    }
}
