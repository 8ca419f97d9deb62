//! Code construction and encoding.
//!
//! Bit indices follow the natural (non bit-reversed) order: `x = u · F^{⊗n}`
//! with `F = [[1,0],[1,1]]`, `u[0]` the top row, and the first half of `u`
//! riding the degraded half of every polarization step.

use serde::{Deserialize, Serialize};

use crate::channel::ebn0_to_sigma;
use crate::crc::{CrcSpec, CRC_WIDTH};
use crate::error::{Error, Result};

/// A polar code: block length, frozen set, CRC policy and encoder flavour.
///
/// Immutable after construction. Serializes as a JSON document whose
/// `frozen_set` is a sorted integer array; derived tables are rebuilt on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CodeSpecDoc", into = "CodeSpecDoc")]
pub struct CodeSpec {
    n: usize,
    k: usize,
    frozen_set: Vec<usize>,
    design_snr_db: f64,
    crc: Option<CrcSpec>,
    systematic: bool,
    frozen_mask: Vec<bool>,
    info_positions: Vec<usize>,
    double_transform_systematic: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CodeSpecDoc {
    block_len_n: usize,
    info_len_k: usize,
    frozen_set: Vec<usize>,
    design_snr_db: f64,
    crc: Option<CrcSpec>,
    systematic: bool,
}

impl TryFrom<CodeSpecDoc> for CodeSpec {
    type Error = Error;

    fn try_from(doc: CodeSpecDoc) -> Result<Self> {
        let spec = CodeSpec::from_frozen_set(
            doc.block_len_n,
            doc.frozen_set,
            doc.design_snr_db,
            doc.crc,
            doc.systematic,
        )?;
        if spec.k != doc.info_len_k {
            return Err(Error::FrozenSet(format!(
                "info_len_k = {} but frozen set leaves {} information bits",
                doc.info_len_k, spec.k
            )));
        }
        Ok(spec)
    }
}

impl From<CodeSpec> for CodeSpecDoc {
    fn from(spec: CodeSpec) -> Self {
        CodeSpecDoc {
            block_len_n: spec.n,
            info_len_k: spec.k,
            frozen_set: spec.frozen_set,
            design_snr_db: spec.design_snr_db,
            crc: spec.crc,
            systematic: spec.systematic,
        }
    }
}

impl CodeSpec {
    /// Builds an `(n, k)` code whose frozen set is chosen by Gaussian
    /// approximation at `design_snr_db` (Eb/N0 at rate `k/n`).
    pub fn construct(
        n: usize,
        k: usize,
        design_snr_db: f64,
        crc: Option<CrcSpec>,
        systematic: bool,
    ) -> Result<Self> {
        let frozen = construct_frozen_set(n, k, design_snr_db)?;
        Self::from_frozen_set(n, frozen, design_snr_db, crc, systematic)
    }

    /// Builds a code from an explicit frozen set (any order, no duplicates).
    pub fn from_frozen_set(
        n: usize,
        mut frozen_set: Vec<usize>,
        design_snr_db: f64,
        crc: Option<CrcSpec>,
        systematic: bool,
    ) -> Result<Self> {
        check_block_len(n)?;
        frozen_set.sort_unstable();
        if let Some(w) = frozen_set.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::FrozenSet(format!("duplicate index {}", w[0])));
        }
        if let Some(&bad) = frozen_set.iter().find(|&&i| i >= n) {
            return Err(Error::FrozenSet(format!("index {bad} outside [0, {n})")));
        }
        let k = n - frozen_set.len();
        if k == 0 {
            return Err(Error::InfoLength { n, k });
        }
        if let Some(crc) = &crc {
            crc.validate()?;
            if k <= CRC_WIDTH {
                return Err(Error::InvalidParameter(format!(
                    "k = {k} leaves no payload next to a {CRC_WIDTH}-bit CRC"
                )));
            }
        }
        let mut frozen_mask = vec![false; n];
        for &i in &frozen_set {
            frozen_mask[i] = true;
        }
        let info_positions = (0..n).filter(|&i| !frozen_mask[i]).collect();
        let mut spec = CodeSpec {
            n,
            k,
            frozen_set,
            design_snr_db,
            crc,
            systematic,
            frozen_mask,
            info_positions,
            double_transform_systematic: false,
        };
        spec.double_transform_systematic = spec.double_transform_is_systematic();
        Ok(spec)
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn info_len(&self) -> usize {
        self.k
    }

    pub fn stages(&self) -> u32 {
        self.n.trailing_zeros()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn design_snr_db(&self) -> f64 {
        self.design_snr_db
    }

    pub fn crc(&self) -> Option<&CrcSpec> {
        self.crc.as_ref()
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    /// Sorted frozen indices.
    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i]
    }

    /// Sorted information indices.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Number of user payload bits: `k` minus the CRC width when a CRC is attached.
    pub fn payload_len(&self) -> usize {
        self.k - self.crc.map_or(0, |_| CRC_WIDTH)
    }

    /// Turns a payload into the `k`-bit message (payload ∥ CRC when enabled).
    pub fn build_message(&self, payload: &[u8]) -> Result<Vec<u8>> {
        check_len(payload, self.payload_len())?;
        check_binary(payload)?;
        Ok(match &self.crc {
            Some(crc) => crc.append(payload),
            None => payload.to_vec(),
        })
    }

    /// CRC verdict for a `k`-bit message; `true` when no CRC is configured.
    pub fn crc_passes(&self, message: &[u8]) -> bool {
        self.crc.as_ref().is_none_or(|crc| crc.check(message))
    }

    /// Places `info` into the information positions in ascending order.
    pub fn expand_info(&self, info: &[u8]) -> Result<Vec<u8>> {
        check_len(info, self.k)?;
        check_binary(info)?;
        let mut u = vec![0u8; self.n];
        for (&pos, &bit) in self.info_positions.iter().zip(info) {
            u[pos] = bit;
        }
        Ok(u)
    }

    /// Encodes a `k`-bit message with the configured encoder flavour.
    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if self.systematic {
            self.encode_systematic(info)
        } else {
            encode_nonsystematic(&self.expand_info(info)?)
        }
    }

    /// Systematic encoding: the codeword carries `info` verbatim on the
    /// information indices and is still `u · F^{⊗n}` for some `u` that is zero
    /// on every frozen index.
    pub fn encode_systematic(&self, info: &[u8]) -> Result<Vec<u8>> {
        let mut x = self.expand_info(info)?;
        if self.double_transform_systematic {
            polar_transform_in_place(&mut x);
            self.zero_frozen(&mut x);
            polar_transform_in_place(&mut x);
        } else {
            let mut u = self.solve_systematic_u(&x);
            polar_transform_in_place(&mut u);
            x = u;
        }
        Ok(x)
    }

    /// Recovers the `k`-bit message from a codeword estimate.
    pub fn message_from_codeword(&self, codeword: &[u8]) -> Result<Vec<u8>> {
        check_len(codeword, self.n)?;
        if self.systematic {
            Ok(self.info_positions.iter().map(|&i| codeword[i]).collect())
        } else {
            let u = encode_nonsystematic(codeword)?;
            Ok(self.info_positions.iter().map(|&i| u[i]).collect())
        }
    }

    fn zero_frozen(&self, v: &mut [u8]) {
        for &i in &self.frozen_set {
            v[i] = 0;
        }
    }

    /// The transform–zero–transform shortcut is systematic only for some
    /// information sets. It is linear, so checking every unit vector decides it.
    fn double_transform_is_systematic(&self) -> bool {
        let mut v = vec![0u8; self.n];
        self.info_positions.iter().all(|&a| {
            v.fill(0);
            v[a] = 1;
            polar_transform_in_place(&mut v);
            self.zero_frozen(&mut v);
            polar_transform_in_place(&mut v);
            self.info_positions.iter().all(|&i| v[i] == u8::from(i == a))
        })
    }

    /// Solves `(u · F^{⊗n})_A = x_A` with `u_F = 0` by back-substitution.
    /// `F^{⊗n}[i][j] = 1` iff `j ⊆ i` bitwise, so the system over the
    /// information set is unit lower-triangular.
    fn solve_systematic_u(&self, x: &[u8]) -> Vec<u8> {
        let mut u = vec![0u8; self.n];
        for &j in self.info_positions.iter().rev() {
            let mut acc = x[j];
            let mut i = (j + 1) | j;
            while i < self.n {
                acc ^= u[i];
                i = (i + 1) | j;
            }
            u[j] = acc;
        }
        u
    }
}

fn check_block_len(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::BlockLength(n));
    }
    Ok(())
}

fn check_len<T>(v: &[T], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: v.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_binary(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(index) => Err(Error::NonBinary {
            index,
            value: bits[index],
        }),
        None => Ok(()),
    }
}

/// In-place `v ← v · F^{⊗n}` over GF(2). `v.len()` must be a power of two.
pub(crate) fn polar_transform_in_place(v: &mut [u8]) {
    let n = v.len();
    let mut half = 1;
    while half < n {
        for block in v.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// `x = u · F^{⊗n}` via the O(N log N) butterfly. The transform is an
/// involution, so this also inverts a codeword back to its `u`.
pub fn encode_nonsystematic(u: &[u8]) -> Result<Vec<u8>> {
    if !u.len().is_power_of_two() {
        return Err(Error::BlockLength(u.len()));
    }
    check_binary(u)?;
    let mut x = u.to_vec();
    polar_transform_in_place(&mut x);
    Ok(x)
}

/// The `n - k` least reliable bit-channels under Gaussian-approximation
/// density evolution at Eb/N0 `design_snr_db` (rate `k/n`), sorted ascending.
/// Reliability ties freeze the lower index first.
pub fn construct_frozen_set(n: usize, k: usize, design_snr_db: f64) -> Result<Vec<usize>> {
    check_block_len(n)?;
    if k == 0 || k > n {
        return Err(Error::InfoLength { n, k });
    }
    let means = ga_llr_means(n, k as f64 / n as f64, design_snr_db)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
    let mut frozen = order[..n - k].to_vec();
    frozen.sort_unstable();
    Ok(frozen)
}

/// Mean LLR of each synthetic bit-channel `u_i` under the Gaussian
/// approximation (LLR ~ N(m, 2m)).
pub fn ga_llr_means(n: usize, rate: f64, design_snr_db: f64) -> Result<Vec<f64>> {
    check_block_len(n)?;
    let sigma = ebn0_to_sigma(design_snr_db, rate)?;
    let mut means = vec![2.0 / (sigma * sigma)];
    while means.len() < n {
        means = means
            .iter()
            .flat_map(|&m| [ga::check_node_mean(m), 2.0 * m])
            .collect();
    }
    Ok(means)
}

/// Chung's approximation of `φ(m) = 1 − E[tanh(L/2)]`, `L ~ N(m, 2m)`,
/// worked in the log domain so that very reliable channels do not underflow.
mod ga {
    const SPLIT: f64 = 10.0;
    /// Below this Chung's low branch overshoots φ = 1; `ln φ` is taken linear
    /// in `x` there (φ(x) ≈ 1 − x/2 near 0).
    const SMALL: f64 = 0.2;

    fn chung_low(x: f64) -> f64 {
        -0.4527 * x.powf(0.86) + 0.0218
    }

    fn ln_phi_low(x: f64) -> f64 {
        if x < SMALL {
            x * chung_low(SMALL) / SMALL
        } else {
            chung_low(x)
        }
    }

    fn ln_phi_high(x: f64) -> f64 {
        0.5 * (std::f64::consts::PI / x).ln() - x / 4.0 + (1.0 - 10.0 / (7.0 * x)).ln()
    }

    pub fn ln_phi(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x < SPLIT {
            ln_phi_low(x)
        } else {
            ln_phi_high(x)
        }
    }

    pub fn inv_ln_phi(l: f64) -> f64 {
        if l >= 0.0 {
            return 0.0;
        }
        if l >= chung_low(SMALL) {
            return l * SMALL / chung_low(SMALL);
        }
        if l >= chung_low(SPLIT) {
            return ((0.0218 - l) / 0.4527).powf(1.0 / 0.86);
        }
        let (mut lo, mut hi) = (SPLIT, 2.0 * SPLIT);
        while ln_phi_high(hi) > l {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ln_phi_high(mid) > l {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Mean after a check-node combination of two channels with mean `m`:
    /// `φ⁻¹(1 − (1 − φ(m))²)`.
    pub fn check_node_mean(m: f64) -> f64 {
        let l = ln_phi(m);
        inv_ln_phi(l + (2.0 - l.exp()).ln())
    }

}
