//! BPSK over AWGN and the three evaluation scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::error::{Error, Result};
use crate::Llr;

/// Noise standard deviation for unit-energy BPSK at the given Eb/N0 and code
/// rate: `σ² = 1 / (2 R 10^(Eb/N0 / 10))`.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("rate {rate} outside (0, 1]")));
    }
    if !ebn0_db.is_finite() {
        return Err(Error::InvalidParameter(format!("Eb/N0 {ebn0_db} dB is not finite")));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Bit 0 maps to +1, bit 1 to −1.
pub fn modulate_bpsk(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b & 1)).collect()
}

/// `α_i = 2 y_i / σ²`.
pub fn llr_from_channel(y: &[f64], sigma: f64) -> Vec<Llr> {
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| scale * v).collect()
}

/// Hard decision: non-negative LLR → 0.
#[inline]
pub fn hard_decision(llr: Llr) -> u8 {
    u8::from(llr < 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Nothing sent: the receiver sees noise only.
    NoTx,
    /// Structure-free ±1 symbols.
    RndTx,
    /// A codeword of the configured code.
    RegTx,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::NoTx, Scenario::RndTx, Scenario::RegTx];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::NoTx => "notx",
            Scenario::RndTx => "rndtx",
            Scenario::RegTx => "regtx",
        }
    }

    /// NoTx and RndTx form the null hypothesis.
    pub fn is_null(self) -> bool {
        !matches!(self, Scenario::RegTx)
    }

    fn stream_domain(self) -> u64 {
        match self {
            Scenario::NoTx => 0x6e6f_7478,
            Scenario::RndTx => 0x726e_6474,
            Scenario::RegTx => 0x7265_6774,
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "notx" => Ok(Scenario::NoTx),
            "rndtx" => Ok(Scenario::RndTx),
            "regtx" => Ok(Scenario::RegTx),
            other => Err(Error::InvalidParameter(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Operating point of the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub ebn0_db: f64,
    pub rate_for_normalization: f64,
    pub rng_seed: u64,
}

impl ChannelConfig {
    pub fn new(ebn0_db: f64, rate_for_normalization: f64, rng_seed: u64) -> Result<Self> {
        let cfg = ChannelConfig {
            ebn0_db,
            rate_for_normalization,
            rng_seed,
        };
        cfg.sigma()?;
        Ok(cfg)
    }

    /// Normalizes Eb/N0 by the code rate `k/n`.
    pub fn for_code(spec: &CodeSpec, ebn0_db: f64, rng_seed: u64) -> Result<Self> {
        Self::new(ebn0_db, spec.rate(), rng_seed)
    }

    pub fn sigma(&self) -> Result<f64> {
        ebn0_to_sigma(self.ebn0_db, self.rate_for_normalization)
    }
}

/// Random stream of one trial: a pure function of `(seed, scenario, trial)`.
pub fn trial_rng(seed: u64, scenario: Scenario, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&scenario.stream_domain().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

/// One received block.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub scenario: Scenario,
    pub llr: Vec<Llr>,
    /// The transmitted `k`-bit message (payload ∥ CRC) for RegTx frames.
    pub message: Option<Vec<u8>>,
    /// The transmitted codeword for RegTx frames.
    pub codeword: Option<Vec<u8>>,
}

/// Generates trial `trial` of `scenario`. All scenarios demodulate with the
/// operating point's σ, including NoTx where nothing was sent.
pub fn gen_frame(scenario: Scenario, spec: &CodeSpec, cfg: &ChannelConfig, trial: u64) -> Result<Frame> {
    let sigma = cfg.sigma()?;
    let n = spec.block_len();
    let mut rng = trial_rng(cfg.rng_seed, scenario, trial);
    let (symbols, message, codeword) = match scenario {
        Scenario::NoTx => (vec![0.0; n], None, None),
        Scenario::RndTx => {
            let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            (modulate_bpsk(&bits), None, None)
        }
        Scenario::RegTx => {
            let payload: Vec<u8> = (0..spec.payload_len()).map(|_| rng.random_range(0..2u8)).collect();
            let message = spec.build_message(&payload)?;
            let codeword = spec.encode(&message)?;
            (modulate_bpsk(&codeword), Some(message), Some(codeword))
        }
    };
    let y: Vec<f64> = symbols
        .iter()
        .map(|&s| s + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(Frame {
        scenario,
        llr: llr_from_channel(&y, sigma),
        message,
        codeword,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_examples() {
        assert!((ebn0_to_sigma(0.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        let s = ebn0_to_sigma(2.0, 80.0 / 512.0).unwrap();
        // 1 / (2 · 0.15625 · 10^0.2) = 2.0189..., sqrt → 1.42090...
        assert!((s - 1.4210).abs() < 5e-4, "{s}");
        let mut prev = f64::INFINITY;
        for step in -20..40 {
            let s = ebn0_to_sigma(step as f64 * 0.25, 0.3).unwrap();
            assert!(s < prev);
            prev = s;
        }
        assert!(ebn0_to_sigma(1.0, 0.0).is_err());
        assert!(ebn0_to_sigma(1.0, 1.5).is_err());
    }

    #[test]
    fn bpsk_examples() {
        assert_eq!(modulate_bpsk(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
        assert_eq!(modulate_bpsk(&[0; 4]), vec![1.0; 4]);
        let bits = [1, 0, 0, 1, 1];
        let back: Vec<u8> = modulate_bpsk(&bits).into_iter().map(hard_decision).collect();
        assert_eq!(back, bits);
    }

    #[test]
    fn llr_examples() {
        let sigma: f64 = 0.8;
        let y = [sigma * sigma / 2.0, -0.3, 0.7];
        let llr = llr_from_channel(&y, sigma);
        assert!((llr[0] - 1.0).abs() < 1e-15);
        assert!(llr.iter().zip(&y).all(|(a, b)| a.signum() == b.signum()));
        let halved = llr_from_channel(&y, sigma / 2.0);
        assert!(halved.iter().zip(&llr).all(|(h, l)| (h - 4.0 * l).abs() < 1e-12));
    }

    #[test]
    fn regtx_high_snr_sign_pattern_is_the_codeword() {
        let spec = CodeSpec::construct(64, 20, 2.0, None, true).unwrap();
        let cfg = ChannelConfig::new(60.0, spec.rate(), 1).unwrap();
        let frame = gen_frame(Scenario::RegTx, &spec, &cfg, 0).unwrap();
        let hard: Vec<u8> = frame.llr.iter().map(|&a| hard_decision(a)).collect();
        assert_eq!(Some(hard), frame.codeword);
    }

    #[test]
    fn frames_are_reproducible_and_distinct() {
        let spec = CodeSpec::construct(64, 20, 2.0, None, true).unwrap();
        let cfg = ChannelConfig::new(2.0, spec.rate(), 99).unwrap();
        for s in Scenario::ALL {
            let a = gen_frame(s, &spec, &cfg, 5).unwrap();
            assert_eq!(a, gen_frame(s, &spec, &cfg, 5).unwrap());
            assert_ne!(a.llr, gen_frame(s, &spec, &cfg, 6).unwrap().llr);
        }
        let a = gen_frame(Scenario::NoTx, &spec, &cfg, 5).unwrap();
        let b = gen_frame(Scenario::RndTx, &spec, &cfg, 5).unwrap();
        assert_ne!(a.llr, b.llr);
    }

    #[test]
    fn notx_llr_mean_is_zero() {
        let spec = CodeSpec::construct(512, 80, 2.0, None, true).unwrap();
        let cfg = ChannelConfig::new(2.0, spec.rate(), 4).unwrap();
        let sigma = cfg.sigma().unwrap();
        let mut sum = 0.0;
        let mut count = 0usize;
        for t in 0..(1_000_000 / 512 + 1) {
            let f = gen_frame(Scenario::NoTx, &spec, &cfg, t).unwrap();
            sum += f.llr.iter().sum::<f64>();
            count += f.llr.len();
        }
        let mean = sum / count as f64;
        // α = 2n/σ with n ~ N(0,1): std 2/σ per sample.
        let bound = 3.0 * (2.0 / sigma) / (count as f64).sqrt();
        assert!(mean.abs() < bound, "mean {mean}, bound {bound}");
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("RegTx".parse::<Scenario>().unwrap(), Scenario::RegTx);
        assert!("foo".parse::<Scenario>().is_err());
        assert_eq!(serde_json::to_string(&Scenario::NoTx).unwrap(), "\"notx\"");
    }
}
