//! TOML configuration files for campaigns and queue experiments. Flags given
//! on the command line override file values.

use std::net::Ipv4Addr;
use std::path::Path;

use serde::Deserialize;

use fpa_core::craft::{AclRule, CraftSpec, NetParams, Permission};
use fpa_core::mqtt::ConnectOptions;
use fpa_core::socsim::{ExperimentConfig, Pairing};
use fpa_core::tcp::{DEFAULT_MSS, MQTT_PORT};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CampaignFile {
    pub campaign: CampaignSection,
    #[serde(default)]
    pub acl: AclSection,
    #[serde(default)]
    pub net: NetSection,
    #[serde(default)]
    pub connect: ConnectSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub base_topic: String,
    #[serde(default = "default_pad_range")]
    pub topic_pad_range: [usize; 2],
    pub base_payload: String,
    #[serde(default)]
    pub payload_pad_counts: Vec<usize>,
    #[serde(default = "default_half")]
    pub qos1_probability: f64,
    #[serde(default = "default_quarter")]
    pub retain_probability: f64,
    pub publish_count: usize,
    #[serde(default = "default_one")]
    pub sessions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for CampaignSection {
    fn default() -> Self {
        CampaignSection {
            base_topic: String::new(),
            topic_pad_range: default_pad_range(),
            base_payload: String::new(),
            payload_pad_counts: Vec::new(),
            qos1_probability: default_half(),
            retain_probability: default_quarter(),
            publish_count: 0,
            sessions: default_one(),
            seed: None,
        }
    }
}

fn default_pad_range() -> [usize; 2] {
    [0, 3]
}

fn default_half() -> f64 {
    0.5
}

fn default_quarter() -> f64 {
    0.25
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AclSection {
    #[serde(default = "default_permission")]
    pub permission: String,
    pub pattern: String,
}

impl Default for AclSection {
    fn default() -> Self {
        AclSection {
            permission: default_permission(),
            pattern: String::new(),
        }
    }
}

fn default_permission() -> String {
    "readwrite".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetSection {
    #[serde(default = "default_src_ip")]
    pub src_ip: String,
    #[serde(default = "default_dst_ip")]
    pub dst_ip: String,
    #[serde(default = "default_src_port")]
    pub src_port: u16,
    #[serde(default = "default_dst_port")]
    pub dst_port: u16,
    #[serde(default = "default_mss")]
    pub mss: u32,
    /// Offline inter-packet gap in microseconds.
    #[serde(default = "default_gap")]
    pub gap_micros: u64,
    /// Capture start time, epoch seconds.
    #[serde(default = "default_start")]
    pub start_time: u32,
}

impl Default for NetSection {
    fn default() -> Self {
        NetSection {
            src_ip: default_src_ip(),
            dst_ip: default_dst_ip(),
            src_port: default_src_port(),
            dst_port: default_dst_port(),
            mss: default_mss(),
            gap_micros: default_gap(),
            start_time: default_start(),
        }
    }
}

fn default_src_ip() -> String {
    "192.168.10.20".into()
}

fn default_dst_ip() -> String {
    "192.168.10.1".into()
}

fn default_src_port() -> u16 {
    49_152
}

fn default_dst_port() -> u16 {
    MQTT_PORT
}

fn default_mss() -> u32 {
    DEFAULT_MSS
}

fn default_gap() -> u64 {
    1_000
}

fn default_start() -> u32 {
    1_700_000_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectSection {
    #[serde(default = "default_client_id")]
    pub client_id: String,
    #[serde(default)]
    pub username: Option<String>,
    #[serde(default)]
    pub password: Option<String>,
    #[serde(default)]
    pub clean_session: bool,
    #[serde(default)]
    pub keep_alive: u16,
}

impl Default for ConnectSection {
    fn default() -> Self {
        ConnectSection {
            client_id: default_client_id(),
            username: Some("device".into()),
            password: Some("device-key".into()),
            clean_session: false,
            keep_alive: 0,
        }
    }
}

fn default_client_id() -> String {
    "fpa-forge".into()
}

/// Everything a craft or live run needs, resolved from file plus overrides.
#[derive(Debug, Clone)]
pub struct Campaign {
    pub spec: CraftSpec,
    pub net: NetParams,
    pub sessions: usize,
    pub seed: Option<u64>,
    pub gap_micros: u64,
    pub start_time: u32,
}

fn parse_ip(s: &str, field: &str) -> Result<[u8; 4], ConfigError> {
    s.parse::<Ipv4Addr>()
        .map(|ip| ip.octets())
        .map_err(|_| ConfigError::Invalid(format!("{field}: not an IPv4 address: {s}")))
}

fn parse_permission(s: &str) -> Result<Permission, ConfigError> {
    match s {
        "read" => Ok(Permission::Read),
        "write" => Ok(Permission::Write),
        "readwrite" => Ok(Permission::ReadWrite),
        other => Err(ConfigError::Invalid(format!("unknown permission {other}"))),
    }
}

pub fn load_campaign(path: &Path) -> Result<Campaign, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file: CampaignFile = toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source: Box::new(source),
    })?;
    campaign_from_file(file)
}

pub fn campaign_from_file(file: CampaignFile) -> Result<Campaign, ConfigError> {
    let sessions = file.campaign.sessions.max(1);
    let seed = file.campaign.seed;
    let c = file.campaign;
    if c.base_topic.is_empty() {
        return Err(ConfigError::Invalid(
            "campaign.base_topic is required".into(),
        ));
    }
    if c.topic_pad_range[0] > c.topic_pad_range[1] {
        return Err(ConfigError::Invalid(
            "campaign.topic_pad_range is inverted".into(),
        ));
    }
    for p in [c.qos1_probability, c.retain_probability] {
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::Invalid(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
    }
    let pattern = if file.acl.pattern.is_empty() {
        // default rule: wildcard the last topic level
        let mut levels: Vec<&str> = c.base_topic.split('/').collect();
        let last = levels.len() - 1;
        levels[last] = "+";
        levels.join("/")
    } else {
        file.acl.pattern.clone()
    };
    let acl_rule = AclRule::new(parse_permission(&file.acl.permission)?, &pattern)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let spec = CraftSpec {
        base_topic: c.base_topic,
        topic_pad_range: (c.topic_pad_range[0], c.topic_pad_range[1]),
        base_payload: c.base_payload.into_bytes(),
        payload_pad_counts: c.payload_pad_counts,
        qos1_probability: c.qos1_probability,
        retain_probability: c.retain_probability,
        publish_count: c.publish_count,
        acl_rule,
    };

    let connect = ConnectOptions {
        username: file.connect.username,
        password: file.connect.password.map(String::into_bytes),
        clean_session: file.connect.clean_session,
        keep_alive: file.connect.keep_alive,
        client_id: file.connect.client_id,
        ..Default::default()
    };
    let net = NetParams {
        src_ip: parse_ip(&file.net.src_ip, "net.src_ip")?,
        dst_ip: parse_ip(&file.net.dst_ip, "net.dst_ip")?,
        src_port: file.net.src_port,
        dst_port: file.net.dst_port,
        mss: file.net.mss,
        connect,
    };

    Ok(Campaign {
        spec,
        net,
        sessions,
        seed,
        gap_micros: file.net.gap_micros,
        start_time: file.net.start_time,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub experiment: ExperimentSection,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub etas: Vec<f64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub budgets: Vec<f64>,
    #[serde(default)]
    pub fps: Vec<f64>,
    #[serde(default)]
    pub horizon_hours: Option<f64>,
    #[serde(default)]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub servers: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub pairing: Option<String>,
}

pub fn parse_pairing(s: &str) -> Result<Pairing, ConfigError> {
    match s {
        "zipped" => Ok(Pairing::Zipped),
        "crossed" => Ok(Pairing::Crossed),
        other => Err(ConfigError::Invalid(format!(
            "unknown pairing {other} (expected zipped or crossed)"
        ))),
    }
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file: ExperimentFile = toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: path.display().to_string(),
        source: Box::new(source),
    })?;
    let section = file.experiment;
    let defaults = ExperimentConfig::default();
    Ok(ExperimentConfig {
        etas: if section.etas.is_empty() && section.rho.is_none() {
            defaults.etas
        } else {
            section.etas
        },
        rho: section.rho,
        mus: if section.budgets.is_empty() {
            defaults.mus
        } else {
            section.budgets
        },
        fps: if section.fps.is_empty() {
            defaults.fps
        } else {
            section.fps
        },
        horizon: section.horizon_hours.unwrap_or(defaults.horizon),
        repeats: section.repeats.unwrap_or(defaults.repeats),
        servers: section.servers.unwrap_or(defaults.servers),
        seed: section.seed.unwrap_or(defaults.seed),
        pairing: match section.pairing {
            Some(p) => parse_pairing(&p)?,
            None => defaults.pairing,
        },
    })
}

/// Parse a duration like "1h", "24h", "1d", "90m", or bare hours.
pub fn parse_horizon_hours(s: &str) -> Result<f64, ConfigError> {
    let t = s.trim();
    let (digits, scale) = if let Some(v) = t.strip_suffix('h') {
        (v, 1.0)
    } else if let Some(v) = t.strip_suffix('d') {
        (v, 24.0)
    } else if let Some(v) = t.strip_suffix('m') {
        (v, 1.0 / 60.0)
    } else {
        (t, 1.0)
    };
    digits
        .trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| ConfigError::Invalid(format!("cannot parse horizon {s}")))
}
