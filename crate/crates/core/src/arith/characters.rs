use crate::arith::{is_prime, primitive_root, DivisorTable};
use crate::error::{ensure, Result};
use crate::phase::{pairwise_sum, unit_root_reduced};
use num_complex::Complex64;

/// Dirichlet characters modulo a prime `q ≥ 3`.
///
/// `χ_j(n) = e(j·ind(n)/(q−1))`, where `ind` is the discrete log to the
/// smallest primitive root. Values are kept as root indices mod `q−1`.
#[derive(Clone, Debug)]
pub struct CharacterGroup {
    modulus: u64,
    generator: u64,
    /// `log_table[r]` is the discrete log of `r`; entry 0 is unused.
    log_table: Vec<u64>,
}

/// One character `χ_j` of a [`CharacterGroup`].
#[derive(Clone, Copy, Debug)]
pub struct Character<'a> {
    pub group: &'a CharacterGroup,
    pub index: u64,
}

pub fn build_character_group(q: u64) -> Result<CharacterGroup> {
    ensure(q >= 3, || format!("character group needs a prime q >= 3, got {q}"))?;
    ensure(is_prime(q), || format!("character group modulus {q} is not prime"))?;
    let g = primitive_root(q).expect("prime modulus has a primitive root");
    let mut log_table = vec![0u64; q as usize];
    let mut v = 1u64;
    for e in 0..q - 1 {
        log_table[v as usize] = e;
        v = v * g % q;
    }
    Ok(CharacterGroup { modulus: q, generator: g, log_table })
}

impl CharacterGroup {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// Group order `q − 1`.
    pub fn order(&self) -> u64 {
        self.modulus - 1
    }

    /// Discrete log of `n`, or `None` when `q | n`.
    pub fn log(&self, n: i64) -> Option<u64> {
        let r = (n as i128).rem_euclid(self.modulus as i128) as usize;
        (r != 0).then(|| self.log_table[r])
    }

    /// Characters indexed `0..q−1`; index 0 is principal.
    pub fn character(&self, index: u64) -> Character<'_> {
        assert!(index < self.order(), "character index out of range");
        Character { group: self, index }
    }

    pub fn characters(&self) -> impl Iterator<Item = Character<'_>> {
        (0..self.order()).map(move |j| self.character(j))
    }
}

impl Character<'_> {
    pub fn is_principal(&self) -> bool {
        self.index == 0
    }

    /// Exponent `r` with `χ(n) = e(r/(q−1))`, `None` when `χ(n) = 0`.
    pub fn root_index(&self, n: i64) -> Option<u64> {
        let ord = self.group.order();
        self.group.log(n).map(|l| ((self.index as u128 * l as u128) % ord as u128) as u64)
    }

    pub fn value(&self, n: i64) -> Complex64 {
        match self.root_index(n) {
            Some(r) => unit_root_reduced(r, self.group.order()),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn conj(&self) -> Self {
        let ord = self.group.order();
        Character { group: self.group, index: (ord - self.index) % ord }
    }
}

/// Integer sums of `d_k(n)` over `n ≤ n_max` split by residue mod `q`.
pub(crate) fn residue_buckets(q: u64, n_max: u64, table: &DivisorTable) -> Vec<u64> {
    let mut buckets = vec![0u64; q as usize];
    for (i, &v) in table.values()[..n_max as usize].iter().enumerate() {
        buckets[((i as u64 + 1) % q) as usize] += v as u64;
    }
    buckets
}

fn combine(chi: &Character<'_>, residues: &[u64]) -> Complex64 {
    let ord = chi.group.order();
    let mut by_root = vec![0u64; ord as usize];
    for (r, &s) in residues.iter().enumerate().skip(1) {
        let idx = chi.root_index(r as i64).expect("nonzero residue");
        by_root[idx as usize] += s;
    }
    let terms: Vec<Complex64> = by_root
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(r, &c)| unit_root_reduced(r as u64, ord) * c as f64)
        .collect();
    pairwise_sum(&terms)
}

/// `Σ_{n ≤ N} d_k(n) χ(n)`.
///
/// Table values are summed exactly in integers by root index before any
/// complex arithmetic happens.
pub fn character_partial_sum(chi: &Character<'_>, n_max: u64, table: &DivisorTable) -> Result<Complex64> {
    ensure(n_max <= table.limit(), || format!("N = {n_max} exceeds table limit {}", table.limit()))?;
    let residues = residue_buckets(chi.group.modulus(), n_max, table);
    Ok(combine(chi, &residues))
}

/// `f_χ(N)` for every character of the group, sharing one pass over the table.
pub fn character_partial_sums(group: &CharacterGroup, n_max: u64, table: &DivisorTable) -> Result<Vec<Complex64>> {
    ensure(n_max <= table.limit(), || format!("N = {n_max} exceeds table limit {}", table.limit()))?;
    let residues = residue_buckets(group.modulus(), n_max, table);
    Ok(group.characters().map(|chi| combine(&chi, &residues)).collect())
}
