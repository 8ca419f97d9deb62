use crate::channel::hard_decision;
use crate::code::CodeSpec;
use crate::error::Result;
use crate::Llr;

use super::{check_llr, f_minsum, g_update, Decoded};

/// Plain bit-by-bit successive-cancellation decoder over the full tree.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    frozen: Vec<bool>,
}

impl ScDecoder {
    pub fn new(spec: &CodeSpec) -> Self {
        ScDecoder {
            frozen: spec.frozen_mask().to_vec(),
        }
    }

    pub fn block_len(&self) -> usize {
        self.frozen.len()
    }

    pub fn decode(&self, llr: &[Llr]) -> Result<Decoded> {
        let n = self.frozen.len();
        check_llr(llr, n)?;
        let mut codeword = vec![0u8; n];
        let mut u = vec![0u8; n];
        let mut scratch = vec![0.0; n];
        sc_node(&self.frozen, llr, &mut codeword, &mut u, &mut scratch);
        Ok(Decoded { codeword, u })
    }
}

fn sc_node(frozen: &[bool], alpha: &[Llr], beta: &mut [u8], u: &mut [u8], scratch: &mut [Llr]) {
    let len = alpha.len();
    if len == 1 {
        u[0] = if frozen[0] { 0 } else { hard_decision(alpha[0]) };
        beta[0] = u[0];
        return;
    }
    let half = len / 2;
    let (buf, rest) = scratch.split_at_mut(half);
    let (a_lo, a_hi) = alpha.split_at(half);
    for ((o, &a), &b) in buf.iter_mut().zip(a_lo).zip(a_hi) {
        *o = f_minsum(a, b);
    }
    let (b_lo, b_hi) = beta.split_at_mut(half);
    let (u_lo, u_hi) = u.split_at_mut(half);
    let (f_lo, f_hi) = frozen.split_at(half);
    sc_node(f_lo, buf, b_lo, u_lo, rest);
    for (((o, &a), &b), &bit) in buf.iter_mut().zip(a_lo).zip(a_hi).zip(b_lo.iter()) {
        *o = g_update(a, b, bit);
    }
    sc_node(f_hi, buf, b_hi, u_hi, rest);
    for (l, &r) in b_lo.iter_mut().zip(b_hi.iter()) {
        *l ^= r;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::encode_nonsystematic;

    #[test]
    fn two_bit_hand_trace() {
        let spec = CodeSpec::from_frozen_set(2, vec![0], 0.0, None, false).unwrap();
        let out = ScDecoder::new(&spec).decode(&[-1.0, 3.0]).unwrap();
        assert_eq!(out.u, vec![0, 0]);
        assert_eq!(out.codeword, vec![0, 0]);
    }

    #[test]
    fn noiseless_recovery() {
        let spec = CodeSpec::construct(128, 40, 2.0, None, false).unwrap();
        let dec = ScDecoder::new(&spec);
        for seed in 0..20u8 {
            let info: Vec<u8> = (0..40).map(|i| ((i * 7 + seed as usize) % 3 == 0) as u8).collect();
            let x = spec.encode(&info).unwrap();
            let llr: Vec<f64> = x.iter().map(|&b| if b == 0 { 10.0 } else { -10.0 }).collect();
            let out = dec.decode(&llr).unwrap();
            assert_eq!(out.codeword, x);
            assert_eq!(encode_nonsystematic(&out.u).unwrap(), out.codeword);
        }
    }

    #[test]
    fn length_mismatch() {
        let spec = CodeSpec::construct(8, 4, 2.0, None, false).unwrap();
        assert!(ScDecoder::new(&spec).decode(&[1.0; 4]).is_err());
        assert!(ScDecoder::new(&spec).decode(&[f64::NAN; 8]).is_err());
    }
}
