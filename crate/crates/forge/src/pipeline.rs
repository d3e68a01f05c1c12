//! Campaign-to-capture glue: generate sessions, assign timestamps, frame.

use fpa_core::craft::{generate_campaign, CraftError};
use fpa_core::frame::{frame_packet, CaptureFrame, Timestamp};

use crate::config::Campaign;

/// Generate every session of a campaign and frame it with deterministic
/// timestamps: the configured start time plus one configured gap per packet,
/// across sessions in order.
pub fn campaign_frames(campaign: &Campaign, seed: u64) -> Result<Vec<CaptureFrame>, CraftError> {
    let sessions = generate_campaign(&campaign.spec, &campaign.net, campaign.sessions, seed)?;
    let mut ts = Timestamp::new(campaign.start_time, 0);
    let mut frames = Vec::new();
    for session in &sessions {
        for (_, segment) in session {
            frames.push(frame_packet(segment, ts));
            ts = ts.plus_micros(campaign.gap_micros);
        }
    }
    Ok(frames)
}
