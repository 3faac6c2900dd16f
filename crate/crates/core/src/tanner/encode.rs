//! Systematic encoding through Gaussian elimination of `H` over GF(2).

use super::{TannerGraph, Word};
use crate::error::{Error, Result};

/// Row-reduced parity-check matrix with the information positions it implies.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    // One packed row per pivot, in reduced row echelon form.
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

fn bit(row: &[u64], i: usize) -> bool {
    (row[i / 64] >> (i % 64)) & 1 == 1
}

impl Encoder {
    pub fn new(g: &TannerGraph) -> Self {
        let n = g.n();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = (0..g.m())
            .map(|c| {
                let mut r = vec![0u64; words];
                for &v in g.check_vars(c) {
                    r[v as usize / 64] ^= 1 << (v % 64);
                }
                r
            })
            .collect();

        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, col) {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        let free = (0..n).filter(|c| !pivots.contains(c)).collect();
        Self {
            n,
            rows,
            pivots,
            free,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Realized dimension `k = n - rank(H)`.
    pub fn dimension(&self) -> usize {
        self.n - self.rank()
    }

    /// Codeword positions that carry message bits verbatim.
    pub fn information_positions(&self) -> &[usize] {
        &self.free
    }

    pub fn encode(&self, message: &[u8]) -> Result<Word> {
        if message.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                actual: message.len(),
            });
        }
        let mut x = vec![0u8; self.n];
        for (&pos, &b) in self.free.iter().zip(message) {
            x[pos] = (b != 0) as u8;
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            x[p] = self
                .free
                .iter()
                .filter(|&&j| bit(row, j))
                .fold(0u8, |acc, &j| acc ^ x[j]);
        }
        Ok(Word::from_bits(x))
    }
}

pub fn dimension(g: &TannerGraph) -> usize {
    Encoder::new(g).dimension()
}

/// Encodes `message` (length `n - rank(H)`) into a codeword of `g`.
pub fn encode(g: &TannerGraph, message: &[u8]) -> Result<Word> {
    Encoder::new(g).encode(message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{build_random_regular, CodeParams};
    use std::collections::BTreeSet;

    #[test]
    fn zero_message_gives_zero_word() {
        let g = build_random_regular(CodeParams::new(12, 3, 6).unwrap(), 7).unwrap();
        let k = dimension(&g);
        assert_eq!(encode(&g, &vec![0; k]).unwrap(), Word::zeros(12));
    }

    #[test]
    fn dimension_respects_rank_bound() {
        for seed in 0..10 {
            let g = build_random_regular(CodeParams::new(30, 3, 6).unwrap(), seed).unwrap();
            assert!(dimension(&g) >= g.n() - g.m());
        }
    }

    #[test]
    fn wrong_message_length_rejected() {
        let g = build_random_regular(CodeParams::new(12, 3, 6).unwrap(), 7).unwrap();
        let k = dimension(&g);
        assert!(matches!(
            encode(&g, &vec![0; k + 1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn image_equals_brute_force_kernel() {
        for (params, seed) in [((12, 3, 6), 7), ((10, 2, 4), 3), ((16, 3, 4), 11)] {
            let p = CodeParams::new(params.0, params.1, params.2).unwrap();
            let g = build_random_regular(p, seed).unwrap();
            let n = g.n();
            // Dense H and an independent kernel enumeration.
            let h: Vec<Vec<u8>> = (0..g.m())
                .map(|c| {
                    let mut row = vec![0u8; n];
                    for &v in g.check_vars(c) {
                        row[v as usize] = 1;
                    }
                    row
                })
                .collect();
            let kernel: BTreeSet<Vec<u8>> = (0u32..(1 << n))
                .map(|mask| (0..n).map(|i| ((mask >> i) & 1) as u8).collect::<Vec<u8>>())
                .filter(|w| {
                    h.iter()
                        .all(|row| row.iter().zip(w).map(|(a, b)| a & b).sum::<u8>() % 2 == 0)
                })
                .collect();

            let enc = Encoder::new(&g);
            let k = enc.dimension();
            let image: BTreeSet<Vec<u8>> = (0u32..(1 << k))
                .map(|mask| {
                    let msg: Vec<u8> = (0..k).map(|i| ((mask >> i) & 1) as u8).collect();
                    enc.encode(&msg).unwrap().into_bits()
                })
                .collect();
            assert_eq!(image.len(), 1 << k);
            assert_eq!(image, kernel);
        }
    }
}
