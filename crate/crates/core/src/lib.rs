//! Polar codes and blind detection of polar-encoded frames.
//!
//! The crate covers the full receive chain needed to decide whether a block
//! of channel LLRs carries a frame of a given polar code:
//!
//! - [`code`]: frozen-set construction, non-systematic and systematic encoding
//! - [`crc`]: bit-level CRC-16 attach/verify
//! - [`tree`]: compact decoder tree with Rate-0/Rate-1/Repetition/SPC leaves
//! - [`decoders`]: SC, fast-SSC and CRC-aided SC list decoding
//! - [`detect`]: the detection metric accumulated during fast-SSC traversal
//! - [`channel`]: BPSK/AWGN frames for the NoTx, RndTx and RegTx scenarios
//!
//! LLR sign convention everywhere: positive means bit 0.

pub mod channel;
pub mod code;
pub mod crc;
pub mod decoders;
pub mod detect;
mod error;
pub mod tree;

pub use channel::{ChannelConfig, Frame, Scenario};
pub use code::CodeSpec;
pub use crc::CrcSpec;
pub use decoders::{FastSscDecoder, ListDecodeResult, ListDecoder, ScDecoder};
pub use detect::{DetectionResult, Detector, DetectorConfig, EarlyStop, Hypothesis};
pub use error::{Error, Result};
pub use tree::{DecoderTree, NodeKind, TreeConfig};

/// Log-likelihood ratio. Positive values favour bit 0.
pub type Llr = f64;
