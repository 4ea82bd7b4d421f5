use crate::arith::binomial;
use crate::error::{ensure, Error, Result};
use rayon::prelude::*;
use std::io::{Read, Write};

pub const DEFAULT_BLOCK: usize = 1 << 20;

const MAGIC: &[u8; 4] = b"D4AP";
const VERSION: u32 = 1;

/// `d_k(n)` for `1 ≤ n ≤ limit`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisorTable {
    k: u32,
    values: Vec<u32>,
}

impl DivisorTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn limit(&self) -> u64 {
        self.values.len() as u64
    }

    /// `d_k(n)`; panics outside `1..=limit`.
    #[inline]
    pub fn get(&self, n: u64) -> u32 {
        assert!(n >= 1, "divisor table is 1-indexed");
        self.values[(n - 1) as usize]
    }

    /// Values for `n = 1..=limit`, so `values()[n - 1] = d_k(n)`.
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Values for `lo < n ≤ hi`.
    pub fn window(&self, lo: u64, hi: u64) -> Result<&[u32]> {
        ensure(lo <= hi && hi <= self.limit(), || format!("window ({lo}, {hi}] outside table limit {}", self.limit()))?;
        Ok(&self.values[lo as usize..hi as usize])
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&self.k.to_le_bytes())?;
        out.write_all(&self.limit().to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut head = [0u8; 20];
        input.read_exact(&mut head).map_err(|_| Error::Format("truncated header".into()))?;
        if &head[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let k = u32::from_le_bytes(head[8..12].try_into().unwrap());
        let limit = u64::from_le_bytes(head[12..20].try_into().unwrap());
        let mut raw = Vec::new();
        input.read_to_end(&mut raw)?;
        if raw.len() as u64 != 4 * limit {
            return Err(Error::Format(format!("expected {} value bytes, found {}", 4 * limit, raw.len())));
        }
        let values = raw.chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(DivisorTable { k, values })
    }
}

/// Sieve `d_k(n)` for `n ≤ limit` with the default block size.
pub fn sieve_divisor_table(k: u32, limit: u64) -> Result<DivisorTable> {
    sieve_divisor_table_with_block(k, limit, DEFAULT_BLOCK)
}

/// Segmented multiplicative sieve.
///
/// Within a block each `n` is stripped of its primes below `sqrt(limit)`; a
/// prime power `p^e` contributes `C(e+k-1, k-1)` and any cofactor left over
/// is a single prime contributing `k`. Blocks are independent and run in
/// parallel.
pub fn sieve_divisor_table_with_block(k: u32, limit: u64, block: usize) -> Result<DivisorTable> {
    ensure(k >= 1, || "k must be at least 1".into())?;
    ensure(limit >= 1, || "sieve limit must be at least 1".into())?;
    ensure(block >= 1, || "block size must be positive".into())?;
    ensure(limit <= usize::MAX as u64 / 8, || format!("sieve limit {limit} exceeds addressable memory"))?;

    let primes = small_primes(limit.isqrt());
    // C(e+k-1, k-1) for every exponent that can occur below the limit
    let max_e = 64 - limit.leading_zeros() as u64;
    let weights: Vec<Option<u64>> = (0..=max_e).map(|e| binomial(e + k as u64 - 1, k as u64 - 1)).collect();

    let mut values = vec![0u32; limit as usize];
    values.par_chunks_mut(block).enumerate().try_for_each(|(i, chunk)| {
        let lo = 1 + (i * block) as u64;
        fill_block(k, lo, chunk, &primes, &weights)
    })?;
    Ok(DivisorTable { k, values })
}

fn fill_block(k: u32, lo: u64, out: &mut [u32], primes: &[u64], weights: &[Option<u64>]) -> Result<()> {
    let len = out.len() as u64;
    let mut rest: Vec<u64> = (lo..lo + len).collect();
    let mut acc = vec![1u64; out.len()];
    for &p in primes {
        let first = lo.div_ceil(p) * p;
        let mut n = first;
        while n < lo + len {
            let idx = (n - lo) as usize;
            let mut e = 0usize;
            while rest[idx] % p == 0 {
                rest[idx] /= p;
                e += 1;
            }
            let w = weights[e].ok_or(Error::Overflow { k, n })?;
            acc[idx] = acc[idx].checked_mul(w).filter(|&v| v <= u32::MAX as u64).ok_or(Error::Overflow { k, n })?;
            n += p;
        }
    }
    for (idx, slot) in out.iter_mut().enumerate() {
        let mut v = acc[idx];
        if rest[idx] > 1 {
            v = v
                .checked_mul(k as u64)
                .filter(|&v| v <= u32::MAX as u64)
                .ok_or(Error::Overflow { k, n: lo + idx as u64 })?;
        }
        *slot = v as u32;
    }
    Ok(())
}

fn small_primes(bound: u64) -> Vec<u64> {
    let bound = bound as usize;
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// d_k(n) by convolving d_{k-1} over divisors, straight from the definition.
    fn d_k_naive(k: u32, n: u64) -> u64 {
        if k == 1 {
            return 1;
        }
        (1..=n).filter(|d| n % d == 0).map(|d| d_k_naive(k - 1, n / d)).sum()
    }

    #[test]
    fn matches_convolution_for_small_n() {
        for k in 1..=5 {
            let t = sieve_divisor_table_with_block(k, 300, 37).unwrap();
            for n in 1..=300 {
                assert_eq!(t.get(n) as u64, d_k_naive(k, n), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn block_size_does_not_matter() {
        let a = sieve_divisor_table_with_block(4, 10_000, 1).unwrap();
        let b = sieve_divisor_table_with_block(4, 10_000, 999).unwrap();
        let c = sieve_divisor_table(4, 10_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn quoted_values() {
        let t = sieve_divisor_table(4, 16).unwrap();
        assert_eq!(t.get(1), 1);
        assert_eq!(t.get(2), 4);
        assert_eq!(t.get(4), 10);
        assert_eq!(t.get(6), 16);
        assert_eq!(t.get(16), 35);
    }

    #[test]
    fn overflow_is_reported() {
        // d_40(2^10) = C(49, 39) is far above u32
        let err = sieve_divisor_table(40, 1024).unwrap_err();
        assert!(matches!(err, Error::Overflow { k: 40, .. }));
    }

    #[test]
    fn dump_roundtrip() {
        let t = sieve_divisor_table(4, 5000).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"D4AP");
        assert_eq!(buf.len(), 20 + 4 * 5000);
        let back = DivisorTable::read_from(&buf[..]).unwrap();
        assert_eq!(back, t);
        assert!(DivisorTable::read_from(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(DivisorTable::read_from(&bad[..]).is_err());
    }

    #[test]
    fn preconditions() {
        assert!(sieve_divisor_table(0, 10).is_err());
        assert!(sieve_divisor_table(4, 0).is_err());
        let t = sieve_divisor_table(4, 10).unwrap();
        assert!(t.window(5, 11).is_err());
        assert_eq!(t.window(8, 10).unwrap(), &[t.get(9), t.get(10)]);
    }
}
