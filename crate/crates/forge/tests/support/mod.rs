//! In-process MQTT 3.1.1 broker used by the live-mode tests: accepts one
//! session, answers CONNECT with a configurable return code, enforces a
//! topic ACL on PUBLISH, and acknowledges allowed QoS-1 publishes. Denied
//! publishes are dropped silently, matching broker-side ACL behavior.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread::JoinHandle;
use std::time::Duration;

use fpa_core::craft::{acl_match, AclRule, Permission};
use fpa_core::mqtt::{decode_packet_prefix, encode_packet, CodecError, MqttPacket, PacketType};

#[derive(Debug, Default)]
pub struct BrokerLog {
    pub connects: usize,
    pub publishes: Vec<(String, u8)>,
    pub denied: usize,
    pub pubacks_sent: usize,
}

pub struct MockBroker {
    pub addr: SocketAddr,
    handle: JoinHandle<BrokerLog>,
}

#[derive(Debug, Clone)]
pub struct BrokerConfig {
    /// ACL pattern for publishes; None allows everything.
    pub acl_pattern: Option<String>,
    /// Return code sent in CONNACK.
    pub connack_rc: u8,
    /// Fixed port (e.g. 1883 so captures extract as MQTT); 0 = ephemeral.
    pub port: u16,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        BrokerConfig {
            acl_pattern: Some("Building/Floor/+".to_string()),
            connack_rc: 0,
            port: 0,
        }
    }
}

impl MockBroker {
    pub fn spawn(config: BrokerConfig) -> MockBroker {
        let listener = TcpListener::bind(("127.0.0.1", config.port)).expect("bind mock broker");
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || serve(listener, config));
        MockBroker { addr, handle }
    }

    pub fn stop(self) -> BrokerLog {
        self.handle.join().expect("broker thread panicked")
    }
}

fn serve(listener: TcpListener, config: BrokerConfig) -> BrokerLog {
    let mut log = BrokerLog::default();
    let (stream, _) = match listener.accept() {
        Ok(pair) => pair,
        Err(_) => return log,
    };
    let _ = stream.set_read_timeout(Some(Duration::from_secs(5)));
    let _ = stream.set_nodelay(true);
    session(stream, &config, &mut log);
    log
}

fn session(mut stream: TcpStream, config: &BrokerConfig, log: &mut BrokerLog) {
    let acl = config
        .acl_pattern
        .as_deref()
        .map(|p| AclRule::new(Permission::ReadWrite, p).expect("valid test ACL"));
    let mut buffer: Vec<u8> = Vec::new();
    loop {
        match decode_packet_prefix(&buffer) {
            Ok((packet, consumed)) => {
                buffer.drain(..consumed);
                match packet.packet_type {
                    PacketType::Connect => {
                        log.connects += 1;
                        let connack = MqttPacket::connack(false, config.connack_rc);
                        if stream.write_all(&encode_packet(&connack).unwrap()).is_err() {
                            return;
                        }
                        if config.connack_rc != 0 {
                            return; // broker refuses and hangs up
                        }
                    }
                    PacketType::Publish => {
                        let view = packet.publish_view().expect("publish view");
                        let topic = String::from_utf8_lossy(view.topic).into_owned();
                        log.publishes.push((topic.clone(), view.qos));
                        let allowed = acl
                            .as_ref()
                            .map(|rule| acl_match(rule, &topic))
                            .unwrap_or(true);
                        if !allowed {
                            log.denied += 1;
                            continue; // silent drop: no PUBACK
                        }
                        if let Some(msgid) = view.msgid {
                            let puback = MqttPacket::puback(msgid);
                            if stream.write_all(&encode_packet(&puback).unwrap()).is_err() {
                                return;
                            }
                            log.pubacks_sent += 1;
                        }
                    }
                    PacketType::Pingreq => {
                        let pingresp = MqttPacket {
                            packet_type: PacketType::Pingresp,
                            header_flags: 0xD0,
                            variable_header: Vec::new(),
                            payload: Vec::new(),
                        };
                        let _ = stream.write_all(&encode_packet(&pingresp).unwrap());
                    }
                    PacketType::Disconnect => return,
                    _ => {}
                }
            }
            Err(CodecError::Incomplete) => {
                let mut chunk = [0u8; 4096];
                match stream.read(&mut chunk) {
                    Ok(0) => return,
                    Ok(n) => buffer.extend_from_slice(&chunk[..n]),
                    Err(_) => return,
                }
            }
            Err(_) => return, // malformed client data
        }
    }
}
