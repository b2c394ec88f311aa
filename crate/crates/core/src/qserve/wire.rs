use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use super::QserveError;
use crate::circ::Basis;

/// Frames above this size are refused rather than buffered.
pub const MAX_FRAME_BYTES: usize = 16 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireBasis {
    Z,
    X,
    Y,
}

impl From<WireBasis> for Basis {
    fn from(b: WireBasis) -> Basis {
        match b {
            WireBasis::Z => Basis::Z,
            WireBasis::X => Basis::X,
            WireBasis::Y => Basis::Y,
        }
    }
}

impl From<Basis> for WireBasis {
    fn from(b: Basis) -> WireBasis {
        match b {
            Basis::Z => WireBasis::Z,
            Basis::X => WireBasis::X,
            Basis::Y => WireBasis::Y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Postselect {
    pub qubit: usize,
    pub outcome: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub basis: WireBasis,
    pub qubit: usize,
}

/// One job as it travels to the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub id: String,
    /// Circuit in the line-oriented text format.
    pub circuit: String,
    pub mode: ExecMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postselect: Option<Postselect>,
    #[serde(default)]
    pub bases: Vec<BasisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_p: Option<f64>,
    /// Carried through untouched; the server does not interpret it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime_norm: Option<f64>,
}

impl Job {
    pub fn analytic(id: impl Into<String>, circuit: impl Into<String>) -> Job {
        Job {
            id: id.into(),
            circuit: circuit.into(),
            mode: ExecMode::Analytic,
            shots: None,
            seed: None,
            postselect: None,
            bases: vec![],
            noise_p: None,
            b_prime_norm: None,
        }
    }

    pub fn sampled(
        id: impl Into<String>,
        circuit: impl Into<String>,
        shots: u64,
        seed: u64,
    ) -> Job {
        Job {
            mode: ExecMode::Sampled,
            shots: Some(shots),
            seed: Some(seed),
            ..Job::analytic(id, circuit)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisResult {
    pub basis: WireBasis,
    pub qubit: usize,
    /// Post-selected counts when post-selection was requested.
    pub counts: BTreeMap<String, u64>,
    pub raw_shots: u64,
    pub kept_shots: u64,
}

/// Server reply: amplitudes, per-basis counts, or an error code with detail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct JobResult {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<Vec<BasisResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl JobResult {
    pub fn error(id: impl Into<String>, code: &str, detail: impl Into<String>) -> JobResult {
        JobResult {
            id: id.into(),
            error: Some(code.to_string()),
            detail: Some(detail.into()),
            ..JobResult::default()
        }
    }

    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }
}

/// Writes a 4-byte big-endian length followed by the payload.
pub fn write_frame<W: Write>(w: &mut W, payload: &[u8]) -> Result<(), QserveError> {
    if payload.len() > MAX_FRAME_BYTES {
        return Err(QserveError::FrameTooLarge(payload.len()));
    }
    let len = u32::try_from(payload.len()).expect("bounded by MAX_FRAME_BYTES");
    w.write_all(&len.to_be_bytes())?;
    w.write_all(payload)?;
    w.flush()?;
    Ok(())
}

/// Reads one frame; `Ok(None)` on a clean end of stream before a header.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, QserveError> {
    let mut header = [0u8; 4];
    let mut filled = 0;
    while filled < header.len() {
        match r.read(&mut header[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(QserveError::Truncated),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let len = u32::from_be_bytes(header) as usize;
    if len > MAX_FRAME_BYTES {
        return Err(QserveError::FrameTooLarge(len));
    }
    let mut payload = vec![0u8; len];
    r.read_exact(&mut payload).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            QserveError::Truncated
        } else {
            e.into()
        }
    })?;
    Ok(Some(payload))
}
