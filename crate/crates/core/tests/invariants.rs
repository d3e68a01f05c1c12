//! Property tests for the codec, encapsulation, and crafting invariants.

use fpa_core::craft::{
    acl_match, generate_session, strip_trailing_spaces, AclRule, CraftSpec, Direction, NetParams,
    Permission,
};
use fpa_core::mqtt::{
    build_connect, build_publish, decode_packet, decode_remaining_length, encode_packet,
    encode_remaining_length, remaining_length_width, ConnectOptions, PublishOptions,
    MAX_REMAINING_LENGTH,
};
use fpa_core::tcp::{compute_mqtt_len, max_padding_budget, verify_checksum, DEFAULT_MSS};
use proptest::prelude::*;

fn topic_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec("[A-Za-z0-9]{1,8}", 1..4).prop_map(|levels| levels.join("/"))
}

fn publish_strategy() -> impl Strategy<Value = PublishOptions> {
    (
        topic_strategy(),
        any::<bool>(),
        0u8..2,
        any::<bool>(),
        proptest::collection::vec(any::<u8>(), 0..300),
        1u16..,
    )
        .prop_map(|(topic, dup, qos, retain, payload, msgid)| PublishOptions {
            dup,
            qos,
            retain,
            topic,
            msgid: (qos == 1).then_some(msgid),
            payload,
        })
}

fn connect_strategy() -> impl Strategy<Value = ConnectOptions> {
    (
        proptest::option::of("[a-z]{1,12}"),
        any::<bool>(),
        any::<u16>(),
        "[a-z0-9-]{1,20}",
    )
        .prop_map(
            |(username, clean_session, keep_alive, client_id)| ConnectOptions {
                password: username.as_ref().map(|u| u.as_bytes().to_vec()),
                username,
                clean_session,
                keep_alive,
                client_id,
                ..Default::default()
            },
        )
}

proptest! {
    #[test]
    fn varint_round_trip(len in 0u32..=MAX_REMAINING_LENGTH) {
        let encoded = encode_remaining_length(len).unwrap();
        prop_assert!(encoded.len() <= 4);
        prop_assert_eq!(encoded.len(), remaining_length_width(len));
        let (decoded, consumed) = decode_remaining_length(&encoded).unwrap();
        prop_assert_eq!(decoded, len);
        prop_assert_eq!(consumed, encoded.len());
    }

    #[test]
    fn publish_round_trip(opts in publish_strategy()) {
        let pkt = build_publish(&opts).unwrap();
        let bytes = encode_packet(&pkt).unwrap();
        let decoded = decode_packet(&bytes).unwrap();
        prop_assert_eq!(&decoded, &pkt);
        // remaining length identity
        let expected = 2 + opts.topic.len()
            + if opts.qos == 1 { 2 } else { 0 }
            + opts.payload.len();
        prop_assert_eq!(pkt.remaining_length() as usize, expected);
        prop_assert_eq!(
            pkt.remaining_length(),
            compute_mqtt_len(opts.topic.len(), opts.qos == 1, opts.payload.len()).unwrap()
        );
        // QoS bits never both set
        prop_assert_ne!((pkt.header_flags >> 1) & 0x03, 3);
    }

    #[test]
    fn connect_round_trip(opts in connect_strategy()) {
        let pkt = build_connect(&opts).unwrap();
        let decoded = decode_packet(&encode_packet(&pkt).unwrap()).unwrap();
        prop_assert_eq!(decoded, pkt);
    }

    #[test]
    fn decoder_never_panics_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..512)) {
        // untrusted broker data must only ever produce a packet or an error
        let _ = fpa_core::mqtt::decode_packet_prefix(&bytes);
        let _ = fpa_core::mqtt::decode_packet(&bytes);
        let _ = fpa_core::mqtt::decode_remaining_length(&bytes);
    }

    #[test]
    fn frame_parser_never_panics_on_arbitrary_bytes(bytes in proptest::collection::vec(any::<u8>(), 0..1600)) {
        let frame = fpa_core::frame::CaptureFrame {
            ts: fpa_core::frame::Timestamp::new(0, 0),
            link_bytes: bytes,
        };
        let _ = fpa_core::frame::parse_frame(&frame);
    }

    #[test]
    fn padding_budget_tight(
        topic_len in 1usize..200,
        msgid in any::<bool>(),
        base in 0usize..1300,
    ) {
        match max_padding_budget(topic_len, msgid, base, DEFAULT_MSS) {
            Ok(budget) => {
                let fits = compute_mqtt_len(topic_len, msgid, base + budget).unwrap() + 5;
                prop_assert!(fits <= DEFAULT_MSS);
                let over = compute_mqtt_len(topic_len, msgid, base + budget + 1).unwrap() + 5;
                prop_assert!(over > DEFAULT_MSS);
            }
            Err(_) => {
                let base_len = compute_mqtt_len(topic_len, msgid, base).unwrap();
                prop_assert!(base_len + 5 > DEFAULT_MSS);
            }
        }
    }
}

fn spec_strategy() -> impl Strategy<Value = CraftSpec> {
    (
        topic_strategy(),
        (0usize..3, 0usize..4),
        proptest::collection::vec(any::<u8>(), 0..64),
        proptest::collection::vec(0usize..1200, 0..5),
        0.0f64..=1.0,
        0.0f64..=1.0,
        0usize..12,
    )
        .prop_map(
            |(base_topic, (lo, extra), base_payload, pads, qos_p, retain_p, publish_count)| {
                // ACL pattern: same hierarchy with the last level wildcarded.
                let mut levels: Vec<&str> = base_topic.split('/').collect();
                let n = levels.len();
                levels[n - 1] = "+";
                let pattern = levels.join("/");
                CraftSpec {
                    base_topic: base_topic.clone(),
                    topic_pad_range: (lo, lo + extra),
                    base_payload,
                    payload_pad_counts: pads,
                    qos1_probability: qos_p,
                    retain_probability: retain_p,
                    publish_count,
                    acl_rule: AclRule::new(Permission::ReadWrite, &pattern).unwrap(),
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sessions_are_valid_benign_and_deterministic(spec in spec_strategy(), seed in any::<u64>()) {
        let net = NetParams::default();
        // a base payload ending in 0x20 would make strip-recovery ambiguous;
        // the engine must refuse it
        if spec.base_payload.last() == Some(&0x20) {
            prop_assert_eq!(
                generate_session(&spec, &net, seed),
                Err(fpa_core::craft::CraftError::TrailingSpaceBase)
            );
            return Ok(());
        }
        let session = generate_session(&spec, &net, seed).unwrap();
        let again = generate_session(&spec, &net, seed).unwrap();
        prop_assert_eq!(&session, &again);

        let mut publishes = 0usize;
        for (dir, seg) in &session {
            // every emitted segment checksums correctly
            prop_assert!(verify_checksum(&seg.ctx, &seg.to_bytes()));
            if *dir == Direction::ClientToServer
                && !seg.payload.is_empty()
                && seg.payload[0] & 0xF0 == 0x30
            {
                publishes += 1;
                let pkt = decode_packet(&seg.payload).unwrap();
                prop_assert_ne!((pkt.header_flags >> 1) & 0x03, 3);
                let view = pkt.publish_view().unwrap();
                // benignness: padding strips back to the base content
                prop_assert_eq!(strip_trailing_spaces(view.topic), spec.base_topic.as_bytes());
                prop_assert_eq!(
                    strip_trailing_spaces(view.payload),
                    spec.base_payload.as_slice()
                );
                // ACL and structural coupling
                let topic = core::str::from_utf8(view.topic).unwrap();
                prop_assert!(acl_match(&spec.acl_rule, topic));
                let width = remaining_length_width(pkt.remaining_length());
                prop_assert_eq!(
                    seg.payload.len(),
                    1 + width + pkt.remaining_length() as usize
                );
            }
        }
        prop_assert_eq!(publishes, spec.publish_count);
    }

    #[test]
    fn session_seq_telescopes_per_direction(spec in spec_strategy(), seed in any::<u64>()) {
        if spec.base_payload.last() == Some(&0x20) {
            return Ok(());
        }
        let session = generate_session(&spec, &NetParams::default(), seed).unwrap();
        for dir in [Direction::ClientToServer, Direction::ServerToClient] {
            let segs: Vec<_> = session.iter().filter(|(d, _)| *d == dir).map(|(_, s)| s).collect();
            // skip the SYN (consumes one phantom unit); data segments telescope
            for pair in segs.windows(2).skip(1) {
                prop_assert_eq!(
                    pair[1].ctx.seq,
                    pair[0].ctx.seq.wrapping_add(pair[0].len())
                );
            }
        }
    }
}
