//! Run configuration shared by the CLI flags and the JSON config file. The
//! file holds the same keys as the flags (snake_case); flags override it.

use clap::{ArgAction, Args, ValueEnum};
use polar_blind::{CodeSpec, CrcSpec, Detector, DetectorConfig, EarlyStop, Scenario, TreeConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::emit::Format;
use crate::error::{Result, SimError};
use crate::experiments::{Experiment, H0Mix, StopRule, SubsequentDecoder};

pub const DEFAULT_EBN0_DB: [f64; 4] = [1.0, 2.0, 2.5, 3.0];
pub const DEFAULT_DESIGN_SNR_DB: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CrcChoice {
    None,
    Ccitt16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecoderChoice {
    Sc,
    Scl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormatChoice {
    Csv,
    Json,
}

fn parse_scenario(s: &str) -> std::result::Result<Scenario, String> {
    s.parse::<Scenario>().map_err(|e| e.to_string())
}

/// Every tunable. `None` means "not given"; defaults are applied by
/// [`Params::resolve`].
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Block length N (power of two).
    #[arg(long)]
    pub n: Option<usize>,
    /// Information positions K, CRC bits included.
    #[arg(long)]
    pub k: Option<usize>,
    /// Eb/N0 used for the Gaussian-approximation construction.
    #[arg(long, allow_hyphen_values = true)]
    pub design_snr_db: Option<f64>,
    #[arg(long, value_enum)]
    pub crc: Option<CrcChoice>,
    #[arg(long, action = ArgAction::Set)]
    pub systematic: Option<bool>,
    /// Subsequent decoder used for labels and FER.
    #[arg(long, value_enum)]
    pub decoder: Option<DecoderChoice>,
    #[arg(long)]
    pub list_size: Option<usize>,
    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ebn0_db: Option<Vec<f64>>,
    /// Rate used to convert Eb/N0 to noise variance (default K/N).
    #[arg(long)]
    pub rate: Option<f64>,
    /// Trials per scenario/hypothesis (or search-space grids).
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub min_errors: Option<u64>,
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated scenarios.
    #[arg(long, value_delimiter = ',', value_parser = parse_scenario)]
    pub scenario: Option<Vec<Scenario>>,
    /// Decision threshold d.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// Largest SPC leaf that contributes to the metric.
    #[arg(long)]
    pub spc_max_size: Option<usize>,
    /// Fraction of SPC leaves, in traversal order, that contribute.
    #[arg(long)]
    pub spc_fraction: Option<f64>,
    #[arg(long)]
    pub spc_scale: Option<f64>,
    /// Early acceptance level (enables early stopping).
    #[arg(long, allow_hyphen_values = true)]
    pub early_accept: Option<f64>,
    #[arg(long)]
    pub early_min_fraction: Option<f64>,
    /// Split SPC nodes larger than this in the decoder tree.
    #[arg(long)]
    pub tree_max_spc: Option<usize>,
    /// Split repetition nodes larger than this in the decoder tree.
    #[arg(long)]
    pub tree_max_rep: Option<usize>,
    /// Weight of NoTx in the H0 mixture; RndTx gets the rest.
    #[arg(long)]
    pub h0_mix: Option<f64>,
    /// Use RndTx at the highest Eb/N0 as the only H0 source.
    #[arg(long, action = ArgAction::Set)]
    pub worst_case_h0: Option<bool>,
    /// Candidates per search space.
    #[arg(long)]
    pub candidates: Option<u64>,
    /// Valid frames per search space.
    #[arg(long)]
    pub valid: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatChoice>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Params {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlay(mut self, flags: &Params) -> Params {
        overlay!(
            self, flags, n, k, design_snr_db, crc, systematic, decoder, list_size, ebn0_db, rate,
            trials, min_errors, max_frames, seed, scenario, threshold, spc_max_size,
            spc_fraction, spc_scale, early_accept, early_min_fraction, tree_max_spc,
            tree_max_rep, h0_mix, worst_case_h0, candidates, valid, out, format
        );
        self
    }

    pub fn resolve(&self) -> Result<Settings> {
        let n = self.n.unwrap_or(512);
        let k = self.k.unwrap_or(80);
        let crc = match self.crc.unwrap_or(CrcChoice::Ccitt16) {
            CrcChoice::None => None,
            CrcChoice::Ccitt16 => Some(CrcSpec::CCITT16),
        };
        let design_snr_db = self.design_snr_db.unwrap_or(DEFAULT_DESIGN_SNR_DB);
        let systematic = self.systematic.unwrap_or(true);
        let spec = CodeSpec::construct(n, k, design_snr_db, crc, systematic)?;

        let decoder = match self.decoder.unwrap_or(DecoderChoice::Sc) {
            DecoderChoice::Sc => SubsequentDecoder::Sc,
            DecoderChoice::Scl => SubsequentDecoder::Scl {
                list_size: self.list_size.unwrap_or(8),
            },
        };
        let early_stop = match (self.early_accept, self.early_min_fraction) {
            (None, None) => None,
            (Some(accept_at), min) => Some(EarlyStop {
                accept_at,
                min_fraction_traversed: min.unwrap_or(0.5),
            }),
            (None, Some(_)) => {
                return Err(SimError::Config("early_min_fraction needs early_accept".into()))
            }
        };
        let detector_config = DetectorConfig {
            threshold_d: self.threshold.unwrap_or(0.0),
            spc_max_size: self.spc_max_size,
            spc_update_fraction: self.spc_fraction.unwrap_or(1.0),
            spc_scale: self.spc_scale.unwrap_or(1.0),
            early_stop,
        };
        let tree_config = TreeConfig {
            max_spc_size: self.tree_max_spc,
            max_rep_size: self.tree_max_rep,
        };
        let detector = Detector::new(&spec, tree_config, detector_config)?;

        let w = self.h0_mix.unwrap_or(0.5);
        let h0_mix = H0Mix::new(w, 1.0 - w)?;
        let ebn0_db = self.ebn0_db.clone().unwrap_or_else(|| DEFAULT_EBN0_DB.to_vec());
        if ebn0_db.is_empty() || ebn0_db.iter().any(|x| !x.is_finite()) {
            return Err(SimError::Config("ebn0_db needs finite values".into()));
        }
        let rate = self.rate.unwrap_or(spec.rate());
        let seed = self.seed.unwrap_or(1);
        let stop = StopRule {
            max_frames: self.max_frames.unwrap_or(10_000_000),
            min_errors: self.min_errors.unwrap_or(100),
        };
        let trials = self.trials.unwrap_or(10_000);
        if trials == 0 {
            return Err(SimError::Config("trials must be positive".into()));
        }
        let experiment = Experiment {
            spec,
            detector,
            rate_for_normalization: rate,
            seed,
        };
        // Validates the rate.
        experiment.channel(ebn0_db[0])?;
        Ok(Settings {
            config_hash: self.config_hash()?,
            experiment,
            decoder,
            ebn0_db,
            scenarios: self.scenario.clone().unwrap_or_else(|| Scenario::ALL.to_vec()),
            trials,
            stop,
            h0_mix,
            worst_case_h0: self.worst_case_h0.unwrap_or(false),
            candidates: self.candidates.unwrap_or(44),
            valid: self.valid.unwrap_or(2),
            out: self.out.clone(),
            format: match self.format.unwrap_or(FormatChoice::Csv) {
                FormatChoice::Csv => Format::Csv,
                FormatChoice::Json => Format::Json,
            },
        })
    }

    /// SHA-256 over the canonical JSON of everything that affects results
    /// (output path and format excluded).
    pub fn config_hash(&self) -> Result<String> {
        let mut p = self.clone();
        p.out = None;
        p.format = None;
        let json = serde_json::to_vec(&p)?;
        Ok(hex::encode(Sha256::digest(json)))
    }
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: Experiment,
    pub decoder: SubsequentDecoder,
    pub ebn0_db: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub trials: u64,
    pub stop: StopRule,
    pub h0_mix: H0Mix,
    pub worst_case_h0: bool,
    pub candidates: u64,
    pub valid: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub config_hash: String,
}
