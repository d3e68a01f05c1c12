//! Live-mode integration tests against the embedded broker.

mod support;

use std::time::Duration;

use fpa_core::craft::{AclRule, CraftSpec, NetParams, Permission};
use fpa_core::features::extract_features;
use fpa_forge::live::{live_send, LiveEndpoint, LiveError};
use fpa_forge::pcap::read_pcap_file;
use support::{BrokerConfig, MockBroker};

fn compliant_spec() -> CraftSpec {
    CraftSpec {
        base_topic: "Building/Floor/Device1".into(),
        base_payload: b"21.4C 58%".to_vec(),
        payload_pad_counts: vec![0, 40, 90],
        qos1_probability: 1.0,
        retain_probability: 0.0,
        publish_count: 12,
        acl_rule: AclRule::new(Permission::ReadWrite, "Building/Floor/+").unwrap(),
        ..Default::default()
    }
}

fn endpoint(broker: &MockBroker, timeout_ms: u64) -> LiveEndpoint {
    LiveEndpoint::new(
        "127.0.0.1",
        broker.addr.port(),
        Duration::from_millis(timeout_ms),
    )
    .unwrap()
}

#[test]
fn compliant_session_gets_connack_and_all_pubacks() {
    // real MQTT port so the reconstructed capture extracts as MQTT traffic
    let broker = MockBroker::spawn(BrokerConfig {
        port: 1883,
        ..Default::default()
    });
    let spec = compliant_spec();
    let capture = tempfile::NamedTempFile::new().unwrap();
    let report = live_send(
        &spec,
        &NetParams::default(),
        &endpoint(&broker, 3_000),
        Some(capture.path()),
        7,
    )
    .unwrap();
    assert_eq!(report.connack_rc, 0);
    assert_eq!(report.sent_count, 12);
    assert_eq!(report.puback_count, 12);

    let log = broker.stop();
    assert_eq!(log.connects, 1);
    assert_eq!(log.publishes.len(), 12);
    assert_eq!(log.denied, 0);
    assert_eq!(log.pubacks_sent, 12);
    // every live topic stayed inside the ACL and stripped back to the base
    for (topic, qos) in &log.publishes {
        assert_eq!(*qos, 1);
        assert_eq!(topic.trim_end_matches(' '), "Building/Floor/Device1");
    }

    // the reconstructed capture holds the bidirectional MQTT exchange
    let frames = read_pcap_file(capture.path()).unwrap();
    let extraction = extract_features(&frames);
    assert_eq!(extraction.skipped, 0);
    let connacks = extraction
        .records
        .iter()
        .filter(|r| r.mqtt.as_ref().is_some_and(|m| m.msgtype == 2))
        .count();
    let publishes = extraction
        .records
        .iter()
        .filter(|r| r.mqtt.as_ref().is_some_and(|m| m.msgtype == 3))
        .count();
    let pubacks = extraction
        .records
        .iter()
        .filter(|r| r.mqtt.as_ref().is_some_and(|m| m.msgtype == 4))
        .count();
    assert_eq!(connacks, 1);
    assert_eq!(publishes, 12);
    assert_eq!(pubacks, 12);
}

#[test]
fn acl_violating_topic_times_out_without_puback() {
    // broker enforces Building/Floor/+; the campaign publishes elsewhere
    let broker = MockBroker::spawn(BrokerConfig::default());
    let spec = CraftSpec {
        base_topic: "Plant9/Line2/Sensor".into(),
        acl_rule: AclRule::new(Permission::ReadWrite, "Plant9/Line2/+").unwrap(),
        qos1_probability: 1.0,
        publish_count: 2,
        payload_pad_counts: vec![0],
        ..Default::default()
    };
    match live_send(
        &spec,
        &NetParams::default(),
        &endpoint(&broker, 400),
        None,
        3,
    ) {
        Err(LiveError::PubackTimeout(msgid)) => assert_eq!(msgid, 1),
        other => panic!("expected PubackTimeout, got {other:?}"),
    }
    let log = broker.stop();
    assert!(log.denied >= 1);
    assert_eq!(log.pubacks_sent, 0);
}

#[test]
fn nonzero_connack_is_reported() {
    let broker = MockBroker::spawn(BrokerConfig {
        connack_rc: 0x05,
        ..Default::default()
    });
    let spec = compliant_spec();
    match live_send(
        &spec,
        &NetParams::default(),
        &endpoint(&broker, 1_000),
        None,
        1,
    ) {
        Err(LiveError::ConnackNonZero(rc)) => assert_eq!(rc, 0x05),
        other => panic!("expected ConnackNonZero, got {other:?}"),
    }
    broker.stop();
}

#[test]
fn qos0_only_session_needs_no_pubacks() {
    let broker = MockBroker::spawn(BrokerConfig::default());
    let spec = CraftSpec {
        qos1_probability: 0.0,
        ..compliant_spec()
    };
    let report = live_send(
        &spec,
        &NetParams::default(),
        &endpoint(&broker, 1_000),
        None,
        9,
    )
    .unwrap();
    assert_eq!(report.sent_count, 12);
    assert_eq!(report.puback_count, 0);
    let log = broker.stop();
    assert!(log.publishes.iter().all(|(_, qos)| *qos == 0));
}
