//! Classic pcap container: magic 0xa1b2c3d4, version 2.4, linktype 1
//! (Ethernet), microsecond timestamps. Byte-swapped files are accepted on
//! read. Captured length always equals the original length.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use fpa_core::frame::{CaptureFrame, Timestamp};

pub const MAGIC: u32 = 0xa1b2_c3d4;
pub const MAGIC_SWAPPED: u32 = 0xd4c3_b2a1;
const LINKTYPE_ETHERNET: u32 = 1;
/// Upper bound on a single record; anything larger marks a corrupt file.
const MAX_RECORD_BYTES: usize = 16 * 1024 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum PcapError {
    #[error("not a pcap file: magic 0x{0:08x}")]
    BadMagic(u32),
    #[error("truncated record at index {index}")]
    TruncatedRecord { index: usize },
    #[error("record {index} claims {len} bytes, corrupt file")]
    OversizedRecord { index: usize, len: usize },
    #[error("truncated global header")]
    TruncatedHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Write frames (already timestamp-ordered) to a pcap stream.
pub fn write_pcap<W: Write>(mut out: W, frames: &[CaptureFrame]) -> Result<(), PcapError> {
    out.write_all(&MAGIC.to_le_bytes())?;
    out.write_all(&2u16.to_le_bytes())?;
    out.write_all(&4u16.to_le_bytes())?;
    out.write_all(&0i32.to_le_bytes())?; // thiszone
    out.write_all(&0u32.to_le_bytes())?; // sigfigs
    out.write_all(&65_535u32.to_le_bytes())?; // snaplen
    out.write_all(&LINKTYPE_ETHERNET.to_le_bytes())?;
    for frame in frames {
        let len = frame.link_bytes.len() as u32;
        out.write_all(&frame.ts.sec.to_le_bytes())?;
        out.write_all(&frame.ts.usec.to_le_bytes())?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(&len.to_le_bytes())?;
        out.write_all(&frame.link_bytes)?;
    }
    Ok(())
}

pub fn write_pcap_file<P: AsRef<Path>>(path: P, frames: &[CaptureFrame]) -> Result<(), PcapError> {
    let mut writer = BufWriter::new(File::create(path)?);
    write_pcap(&mut writer, frames)?;
    writer.flush()?;
    Ok(())
}

/// Read every frame of a pcap stream, honoring byte-swapped magics.
pub fn read_pcap<R: Read>(mut input: R) -> Result<Vec<CaptureFrame>, PcapError> {
    let mut header = [0u8; 24];
    let mut filled = 0;
    while filled < header.len() {
        match input.read(&mut header[filled..])? {
            0 => return Err(PcapError::TruncatedHeader),
            n => filled += n,
        }
    }
    let magic = u32::from_le_bytes([header[0], header[1], header[2], header[3]]);
    let swapped = match magic {
        MAGIC => false,
        MAGIC_SWAPPED => true,
        other => return Err(PcapError::BadMagic(other)),
    };
    let read_u32 = |bytes: [u8; 4]| {
        if swapped {
            u32::from_be_bytes(bytes)
        } else {
            u32::from_le_bytes(bytes)
        }
    };

    let mut frames = Vec::new();
    let mut index = 0usize;
    loop {
        let mut record = [0u8; 16];
        let mut got = 0;
        while got < record.len() {
            match input.read(&mut record[got..])? {
                0 if got == 0 => return Ok(frames),
                0 => return Err(PcapError::TruncatedRecord { index }),
                n => got += n,
            }
        }
        let sec = read_u32([record[0], record[1], record[2], record[3]]);
        let usec = read_u32([record[4], record[5], record[6], record[7]]);
        let incl = read_u32([record[8], record[9], record[10], record[11]]) as usize;
        if incl > MAX_RECORD_BYTES {
            return Err(PcapError::OversizedRecord { index, len: incl });
        }
        let mut link_bytes = vec![0u8; incl];
        let mut got = 0;
        while got < incl {
            match input.read(&mut link_bytes[got..])? {
                0 => return Err(PcapError::TruncatedRecord { index }),
                n => got += n,
            }
        }
        frames.push(CaptureFrame {
            ts: Timestamp::new(sec, usec),
            link_bytes,
        });
        index += 1;
    }
}

pub fn read_pcap_file<P: AsRef<Path>>(path: P) -> Result<Vec<CaptureFrame>, PcapError> {
    read_pcap(BufReader::new(File::open(path)?))
}
