//! Bit codes. Bit strings are `Vec<bool>`, most significant bit first.

use alloc::vec::Vec;

use super::ChannelError;

const SYM_ZERO: [bool; 2] = [false, false];
const SYM_ONE: [bool; 2] = [false, true];
const SYM_END: [bool; 2] = [true, true];

/// Self-delimiting integer code: the binary digits of `k` followed by a
/// terminator, each symbol of the ternary alphabet written with two bits.
/// Length is `2 * (floor(log2 max(k, 1)) + 2)`.
pub fn encode_uint(k: u64) -> Vec<bool> {
    let digits = (u64::BITS - k.max(1).leading_zeros()) as usize;
    let mut out = Vec::with_capacity(2 * (digits + 1));
    for i in (0..digits).rev() {
        out.extend_from_slice(if k >> i & 1 == 1 { &SYM_ONE } else { &SYM_ZERO });
    }
    out.extend_from_slice(&SYM_END);
    out
}

/// `l - 1` zeros followed by a one.
pub fn encode_unary(l: u64) -> Result<Vec<bool>, ChannelError> {
    if l == 0 {
        return Err(ChannelError::UnaryZero);
    }
    let mut out = alloc::vec![false; (l - 1) as usize];
    out.push(true);
    Ok(out)
}

/// `ceil(log2 k)`: the width of a fixed-width choice among `k` alternatives.
pub fn choice_width(k: u128) -> usize {
    if k <= 1 {
        0
    } else {
        (u128::BITS - (k - 1).leading_zeros()) as usize
    }
}

fn push_fixed(out: &mut Vec<bool>, x: u128, width: usize) {
    for i in (0..width).rev() {
        out.push(x >> i & 1 == 1);
    }
}

/// Fixed-width index among `k` alternatives, with its idealized cost `log2 k`.
pub fn encode_choice(index: u64, k: u64) -> Result<(Vec<bool>, f64), ChannelError> {
    if k == 0 {
        return Err(ChannelError::ZeroAlternatives);
    }
    if index >= k {
        return Err(ChannelError::ChoiceOutOfRange { index, k });
    }
    let mut out = Vec::new();
    push_fixed(&mut out, index as u128, choice_width(k as u128));
    Ok((out, libm::log2(k as f64)))
}

/// `C(r, s)`, or `None` when it does not fit in 128 bits.
pub fn binomial(r: u64, s: u64) -> Option<u128> {
    if s > r {
        return Some(0);
    }
    let s = s.min(r - s);
    let mut acc: u128 = 1;
    for i in 0..s {
        // acc * (r - i) / (i + 1) stays integral at every step.
        let num = (r - i) as u128;
        let den = (i + 1) as u128;
        let g = num_integer::gcd(acc, den);
        acc = (acc / g).checked_mul(num / (den / g))?;
    }
    Some(acc)
}

/// Colexicographic rank of a sorted `s`-subset of `0..r`.
pub fn subset_rank(chosen: &[usize]) -> Option<u128> {
    let mut rank: u128 = 0;
    for (i, &c) in chosen.iter().enumerate() {
        rank = rank.checked_add(binomial(c as u64, (i + 1) as u64)?)?;
    }
    Some(rank)
}

/// Inverse of [`subset_rank`].
pub fn subset_unrank(mut rank: u128, r: usize, s: usize) -> Option<Vec<usize>> {
    let mut out = alloc::vec![0usize; s];
    let mut hi = r;
    for i in (0..s).rev() {
        // Largest c < hi with C(c, i + 1) <= rank.
        let mut c = hi;
        loop {
            if c == 0 {
                return None;
            }
            c -= 1;
            let b = binomial(c as u64, (i + 1) as u64)?;
            if b <= rank {
                rank -= b;
                break;
            }
        }
        out[i] = c;
        hi = c;
    }
    (rank == 0).then_some(out)
}

/// Rank of an `s`-subset of `0..r` in `ceil(log2 C(r, s))` bits, with the
/// idealized cost `log2 C(r, s)`.
pub fn encode_subset_rank(chosen: &[usize], r: usize, s: usize) -> Result<(Vec<bool>, f64), ChannelError> {
    if chosen.len() != s {
        return Err(ChannelError::SubsetSize { got: chosen.len(), expected: s });
    }
    let mut sorted = chosen.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.last().is_some_and(|&c| c >= r) {
        return Err(ChannelError::SubsetOutOfRange);
    }
    let total = binomial(r as u64, s as u64).ok_or(ChannelError::TooLarge)?;
    let rank = subset_rank(&sorted).ok_or(ChannelError::TooLarge)?;
    let mut out = Vec::new();
    push_fixed(&mut out, rank, choice_width(total));
    Ok((out, libm::log2(total as f64)))
}

/// Sequential decoder over a bit string.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [bool]) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    fn bit(&mut self) -> Result<bool, ChannelError> {
        let b = *self.bits.get(self.pos).ok_or(ChannelError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn fixed(&mut self, width: usize) -> Result<u128, ChannelError> {
        let mut x = 0u128;
        for _ in 0..width {
            x = x << 1 | self.bit()? as u128;
        }
        Ok(x)
    }

    pub fn flag(&mut self) -> Result<bool, ChannelError> {
        self.bit()
    }

    pub fn uint(&mut self) -> Result<u64, ChannelError> {
        let mut k: u64 = 0;
        let mut digits = 0;
        loop {
            match [self.bit()?, self.bit()?] {
                SYM_END if digits > 0 => return Ok(k),
                SYM_ZERO | SYM_ONE if digits < 64 => {
                    k = k << 1 | self.bits[self.pos - 1] as u64;
                    digits += 1;
                }
                _ => return Err(ChannelError::Malformed("integer code")),
            }
        }
    }

    pub fn unary(&mut self) -> Result<u64, ChannelError> {
        let mut l = 1;
        while !self.bit()? {
            l += 1;
        }
        Ok(l)
    }

    pub fn choice(&mut self, k: u64) -> Result<u64, ChannelError> {
        if k == 0 {
            return Err(ChannelError::ZeroAlternatives);
        }
        let x = self.fixed(choice_width(k as u128))?;
        if x >= k as u128 {
            return Err(ChannelError::Malformed("choice index"));
        }
        Ok(x as u64)
    }

    pub fn subset(&mut self, r: usize, s: usize) -> Result<Vec<usize>, ChannelError> {
        let total = binomial(r as u64, s as u64).ok_or(ChannelError::TooLarge)?;
        let rank = self.fixed(choice_width(total))?;
        if rank >= total {
            return Err(ChannelError::Malformed("subset rank"));
        }
        subset_unrank(rank, r, s).ok_or(ChannelError::Malformed("subset rank"))
    }

    /// Error unless every bit was consumed.
    pub fn finish(&self) -> Result<(), ChannelError> {
        if self.remaining() == 0 {
            Ok(())
        } else {
            Err(ChannelError::Malformed("trailing bits"))
        }
    }
}
