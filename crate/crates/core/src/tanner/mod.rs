//! Regular Tanner graphs and the binary linear codes they define.
//!
//! A graph has `n` variable nodes of degree `gamma` and `m = n*gamma/rho`
//! check nodes of degree `rho`. Edges are indexed canonically: edge
//! `v*gamma + j` joins variable `v` to its `j`-th check in ascending order,
//! so per-edge state (bit-copies, messages) is a flat slice of length
//! `n*gamma`.

mod alist;
mod encode;

pub use alist::{read_alist, write_alist};
pub use encode::{dimension, encode, Encoder};

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Shape of a `(gamma, rho)`-regular code of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub gamma: usize,
    pub rho: usize,
}

impl CodeParams {
    pub fn new(n: usize, gamma: usize, rho: usize) -> Result<Self> {
        let params = Self { n, gamma, rho };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be positive".into()));
        }
        if self.gamma < 2 {
            return Err(Error::InvalidParams(format!(
                "gamma must be at least 2 (got {})",
                self.gamma
            )));
        }
        if self.rho <= self.gamma {
            return Err(Error::InvalidParams(format!(
                "rho must exceed gamma (got gamma={}, rho={})",
                self.gamma, self.rho
            )));
        }
        if !(self.n * self.gamma).is_multiple_of(self.rho) {
            return Err(Error::InvalidParams(format!(
                "n*gamma = {} is not divisible by rho = {}",
                self.n * self.gamma,
                self.rho
            )));
        }
        Ok(())
    }

    /// Number of check nodes `n*gamma/rho`.
    pub fn checks(&self) -> usize {
        self.n * self.gamma / self.rho
    }

    pub fn edges(&self) -> usize {
        self.n * self.gamma
    }

    /// Design-rate lower bound `1 - gamma/rho`.
    pub fn rate_bound(&self) -> f64 {
        1.0 - self.gamma as f64 / self.rho as f64
    }

    /// Two-input XOR gates in the correcting circuit: `n*gamma*(rho-2)`.
    pub fn xor_gates(&self) -> usize {
        self.n * self.gamma * (self.rho - 2)
    }
}

/// A binary word of length `n`, one byte per bit (0 or 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn zeros(n: usize) -> Self {
        Word(vec![0; n])
    }

    /// Builds a word from arbitrary bytes, mapping every nonzero byte to 1.
    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        Word(bits.into_iter().map(|b| (b != 0) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bits_mut(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn get(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.0[i] = (bit != 0) as u8;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    pub fn distance(&self, other: &Word) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a != b)
            .count()
    }

    /// Bitwise sum over GF(2).
    pub fn xor(&self, other: &Word) -> Word {
        Word(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

// Dead ends are rare except for very small m; the cap mainly bounds infeasible shapes.
const DEFAULT_MIN_RESTARTS: usize = 100_000;

/// Knobs for [`build_random_regular_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Restart cap; `None` means `max(10*n, 100_000)`.
    pub max_restarts: Option<usize>,
    /// Require that no two variables share two checks (girth >= 6). Each
    /// restart repairs a fresh socket matching by edge switches; the restart
    /// cap defaults to 20 in this mode and `n` is limited to 8192.
    pub reject_four_cycles: bool,
}

/// An immutable simple `(gamma, rho)`-biregular bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    params: CodeParams,
    m: usize,
    // var_adj[v*gamma + j] = j-th check of v (ascending); also indexes edges.
    var_adj: Vec<u32>,
    // check_adj[c*rho + k] = k-th variable of c (ascending).
    check_adj: Vec<u32>,
    // check_edges[c*rho + k] = edge id joining c and check_adj[c*rho + k].
    check_edges: Vec<u32>,
    // edge_slot[e] = position k of edge e in its check's list.
    edge_slot: Vec<u32>,
}

/// JSON exchange form `{n, gamma, rho, edges}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub gamma: usize,
    pub rho: usize,
    pub edges: Vec<(usize, usize)>,
}

impl TannerGraph {
    /// Builds a graph from an edge list of `(variable, check)` pairs,
    /// validating regularity and simplicity.
    pub fn from_edges(params: CodeParams, edges: &[(usize, usize)]) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let m = params.checks();
        if edges.len() != params.edges() {
            return Err(Error::DegreeInconsistency(format!(
                "expected {} edges, found {}",
                params.edges(),
                edges.len()
            )));
        }
        let mut var_lists: Vec<Vec<u32>> = vec![Vec::with_capacity(params.gamma); n];
        let mut check_deg = vec![0usize; m];
        for &(v, c) in edges {
            if v >= n || c >= m {
                return Err(Error::DegreeInconsistency(format!(
                    "edge ({v}, {c}) out of range for n={n}, m={m}"
                )));
            }
            var_lists[v].push(c as u32);
            check_deg[c] += 1;
        }
        for (v, list) in var_lists.iter_mut().enumerate() {
            if list.len() != params.gamma {
                return Err(Error::DegreeInconsistency(format!(
                    "variable {v} has degree {}, expected {}",
                    list.len(),
                    params.gamma
                )));
            }
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::DegreeInconsistency(format!(
                    "variable {v} has parallel edges"
                )));
            }
        }
        if let Some((c, d)) = check_deg
            .iter()
            .enumerate()
            .find(|(_, &d)| d != params.rho)
        {
            return Err(Error::DegreeInconsistency(format!(
                "check {c} has degree {d}, expected {}",
                params.rho
            )));
        }
        let var_adj: Vec<u32> = var_lists.into_iter().flatten().collect();
        Ok(Self::index(params, m, var_adj))
    }

    fn index(params: CodeParams, m: usize, var_adj: Vec<u32>) -> Self {
        let rho = params.rho;
        let mut fill = vec![0usize; m];
        let mut check_adj = vec![0u32; m * rho];
        let mut check_edges = vec![0u32; m * rho];
        let mut edge_slot = vec![0u32; var_adj.len()];
        // Edge ids ascend with variable index, so each check's list ends up sorted.
        for (e, &c) in var_adj.iter().enumerate() {
            let c = c as usize;
            let k = fill[c];
            check_adj[c * rho + k] = (e / params.gamma) as u32;
            check_edges[c * rho + k] = e as u32;
            edge_slot[e] = k as u32;
            fill[c] += 1;
        }
        Self {
            params,
            m,
            var_adj,
            check_adj,
            check_edges,
            edge_slot,
        }
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> usize {
        self.params.gamma
    }

    pub fn rho(&self) -> usize {
        self.params.rho
    }

    pub fn num_edges(&self) -> usize {
        self.var_adj.len()
    }

    /// Checks adjacent to variable `v`, ascending. Position `j` is edge `v*gamma + j`.
    pub fn var_checks(&self, v: usize) -> &[u32] {
        let g = self.params.gamma;
        &self.var_adj[v * g..(v + 1) * g]
    }

    /// Variables adjacent to check `c`, ascending.
    pub fn check_vars(&self, c: usize) -> &[u32] {
        let r = self.params.rho;
        &self.check_adj[c * r..(c + 1) * r]
    }

    /// Edge ids incident to check `c`, aligned with [`Self::check_vars`].
    pub fn check_edges(&self, c: usize) -> &[u32] {
        let r = self.params.rho;
        &self.check_edges[c * r..(c + 1) * r]
    }

    pub fn edge_var(&self, e: usize) -> usize {
        e / self.params.gamma
    }

    pub fn edge_check(&self, e: usize) -> usize {
        self.var_adj[e] as usize
    }

    /// Position of edge `e` within its check's edge list.
    pub fn edge_slot(&self, e: usize) -> usize {
        self.edge_slot[e] as usize
    }

    /// All edges as `(variable, check)` pairs in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.num_edges())
            .map(|e| (self.edge_var(e), self.edge_check(e)))
            .collect()
    }

    /// Parity of each check under `w` (1 = unsatisfied).
    pub fn syndrome(&self, w: &Word) -> Result<Vec<u8>> {
        self.check_len(w)?;
        Ok(self.syndrome_unchecked(w.bits()))
    }

    pub(crate) fn syndrome_unchecked(&self, bits: &[u8]) -> Vec<u8> {
        let mut s = vec![0u8; self.m];
        self.syndrome_into(bits, &mut s);
        s
    }

    pub(crate) fn syndrome_into(&self, bits: &[u8], out: &mut [u8]) {
        for (c, slot) in out.iter_mut().enumerate() {
            *slot = self.check_vars(c).iter().fold(0u8, |acc, &v| acc ^ bits[v as usize]);
        }
    }

    /// True iff every check has even parity under `w`.
    pub fn is_codeword(&self, w: &Word) -> Result<bool> {
        self.check_len(w)?;
        let bits = w.bits();
        Ok((0..self.m).all(|c| {
            self.check_vars(c)
                .iter()
                .fold(0u8, |acc, &v| acc ^ bits[v as usize])
                == 0
        }))
    }

    pub(crate) fn check_len(&self, w: &Word) -> Result<()> {
        if w.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                actual: w.len(),
            });
        }
        Ok(())
    }

    /// True iff some pair of variables shares two or more checks.
    pub fn has_four_cycle(&self) -> bool {
        let mut seen = vec![usize::MAX; self.n()];
        for v in 0..self.n() {
            for &c in self.var_checks(v) {
                for &w in self.check_vars(c as usize) {
                    let w = w as usize;
                    if w == v {
                        continue;
                    }
                    if seen[w] == v {
                        return true;
                    }
                    seen[w] = v;
                }
            }
        }
        false
    }

    /// SHA-256 of the canonical edge list, hex encoded.
    pub fn identity_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{} {} {}\n", self.n(), self.gamma(), self.rho()).as_bytes());
        for &c in &self.var_adj {
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            gamma: self.gamma(),
            rho: self.rho(),
            edges: self.edges(),
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        Self::from_edges(CodeParams::new(j.n, j.gamma, j.rho)?, &j.edges)
    }
}

/// Samples a simple `(gamma, rho)`-biregular graph by socket matching,
/// rejecting sockets that would create parallel edges and restarting when a
/// variable runs out of admissible sockets. Deterministic per seed.
pub fn build_random_regular(params: CodeParams, seed: u64) -> Result<TannerGraph> {
    build_random_regular_with(params, seed, BuildOptions::default())
}

pub fn build_random_regular_with(
    params: CodeParams,
    seed: u64,
    opts: BuildOptions,
) -> Result<TannerGraph> {
    params.validate()?;
    let n = params.n;
    let m = params.checks();
    let gamma = params.gamma;
    let max_restarts = opts.max_restarts.unwrap_or((10 * n).max(DEFAULT_MIN_RESTARTS));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sockets: Vec<u32> = (0..m as u32)
        .flat_map(|c| std::iter::repeat_n(c, params.rho))
        .collect();

    if opts.reject_four_cycles {
        if n > GIRTH_MAX_N {
            return Err(Error::InvalidParams(format!(
                "4-cycle removal supports n <= {GIRTH_MAX_N} (got {n})"
            )));
        }
        let restarts = opts.max_restarts.unwrap_or(GIRTH_RESTARTS);
        for _ in 0..=restarts {
            let Some(mut var_adj) = match_sockets(&sockets, n, gamma, &mut rng) else {
                continue;
            };
            if repair_short_cycles(&mut var_adj, n, m, gamma, &mut rng) {
                for v in 0..n {
                    var_adj[v * gamma..(v + 1) * gamma].sort_unstable();
                }
                return Ok(TannerGraph::index(params, m, var_adj));
            }
        }
        return Err(Error::ConstructionTimeout {
            n,
            gamma,
            rho: params.rho,
            restarts,
        });
    }

    for _ in 0..=max_restarts {
        if let Some(var_adj) = match_sockets(&sockets, n, gamma, &mut rng) {
            return Ok(TannerGraph::index(params, m, var_adj));
        }
    }
    Err(Error::ConstructionTimeout {
        n,
        gamma,
        rho: params.rho,
        restarts: max_restarts,
    })
}

/// One pass of socket matching: each variable draws its checks from the
/// remaining check sockets, redrawing any socket that would duplicate an
/// edge. `None` when a variable is left with only duplicate choices.
fn match_sockets(pool: &[u32], n: usize, gamma: usize, rng: &mut ChaCha8Rng) -> Option<Vec<u32>> {
    use rand::Rng;
    let mut remaining = pool.to_vec();
    let mut var_adj = Vec::with_capacity(n * gamma);
    for v in 0..n {
        let start = v * gamma;
        for _ in 0..gamma {
            let taken = &var_adj[start..];
            let mut pick = None;
            for _ in 0..64 {
                let i = rng.random_range(0..remaining.len());
                if !taken.contains(&remaining[i]) {
                    pick = Some(i);
                    break;
                }
            }
            if pick.is_none() {
                let eligible: Vec<usize> = (0..remaining.len())
                    .filter(|&i| !taken.contains(&remaining[i]))
                    .collect();
                if eligible.is_empty() {
                    return None;
                }
                pick = Some(eligible[rng.random_range(0..eligible.len())]);
            }
            var_adj.push(remaining.swap_remove(pick.unwrap()));
        }
        var_adj[start..].sort_unstable();
    }
    Some(var_adj)
}

const GIRTH_RESTARTS: usize = 20;
// The repair keeps a dense n x n table of shared-check counts.
const GIRTH_MAX_N: usize = 8192;

/// Degree-preserving edge switches that drive the number of variable pairs
/// sharing two or more checks to zero. Dense shapes (more than about half
/// of all variable pairs inside some check) usually stall. The input must already be simple;
/// moves that would create a parallel edge are never proposed.
/// Returns false if the step cap is hit first.
fn repair_short_cycles(
    var_adj: &mut [u32],
    n: usize,
    m: usize,
    gamma: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    use rand::Rng;
    let edges = var_adj.len();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (e, &c) in var_adj.iter().enumerate() {
        members[c as usize].push((e / gamma) as u32);
    }
    // shared[u*n + w] = number of checks u and w have in common.
    let mut shared = vec![0u16; n * n];
    // bad[v] = number of partners sharing at least two checks with v.
    let mut bad = vec![0u32; n];
    let mut cost: i64 = 0;
    for list in &members {
        for (i, &u) in list.iter().enumerate() {
            for &w in &list[i + 1..] {
                let (u, w) = (u as usize, w as usize);
                shared[u * n + w] += 1;
                shared[w * n + u] += 1;
            }
        }
    }
    for u in 0..n {
        for w in u + 1..n {
            let k = shared[u * n + w] as i64;
            cost += k * (k - 1) / 2;
            if k >= 2 {
                bad[u] += 1;
                bad[w] += 1;
            }
        }
    }

    // Adjusts shared counts between v and the members of c; returns the cost change.
    fn touch(
        v: usize,
        c: usize,
        add: bool,
        n: usize,
        members: &mut [Vec<u32>],
        shared: &mut [u16],
        bad: &mut [u32],
    ) -> i64 {
        if !add {
            let pos = members[c].iter().position(|&x| x as usize == v).unwrap();
            members[c].swap_remove(pos);
        }
        let mut delta = 0;
        for &u in &members[c] {
            let u = u as usize;
            let before = shared[v * n + u];
            let after = if add { before + 1 } else { before - 1 };
            shared[v * n + u] = after;
            shared[u * n + v] = after;
            delta += if add { before as i64 } else { -(after as i64) };
            match (before >= 2, after >= 2) {
                (false, true) => {
                    bad[v] += 1;
                    bad[u] += 1;
                }
                (true, false) => {
                    bad[v] -= 1;
                    bad[u] -= 1;
                }
                _ => {}
            }
        }
        if add {
            members[c].push(v as u32);
        }
        delta
    }

    let steps = 20_000 + 200 * edges;
    for _ in 0..steps {
        if cost == 0 {
            return true;
        }
        let v = loop {
            let v = rng.random_range(0..n);
            if bad[v] > 0 {
                break v;
            }
        };
        let a = v * gamma + rng.random_range(0..gamma);
        let b = rng.random_range(0..edges);
        let (c1, c2) = (var_adj[a] as usize, var_adj[b] as usize);
        let w = b / gamma;
        if c1 == c2 || w == v {
            continue;
        }
        let has = |x: usize, c: usize, adj: &[u32]| adj[x * gamma..(x + 1) * gamma].contains(&(c as u32));
        if has(v, c2, var_adj) || has(w, c1, var_adj) {
            continue;
        }
        let mut delta = touch(v, c1, false, n, &mut members, &mut shared, &mut bad);
        delta += touch(w, c2, false, n, &mut members, &mut shared, &mut bad);
        delta += touch(v, c2, true, n, &mut members, &mut shared, &mut bad);
        delta += touch(w, c1, true, n, &mut members, &mut shared, &mut bad);
        if delta <= 0 {
            var_adj[a] = c2 as u32;
            var_adj[b] = c1 as u32;
            cost += delta;
        } else {
            touch(v, c2, false, n, &mut members, &mut shared, &mut bad);
            touch(w, c1, false, n, &mut members, &mut shared, &mut bad);
            touch(v, c1, true, n, &mut members, &mut shared, &mut bad);
            touch(w, c2, true, n, &mut members, &mut shared, &mut bad);
        }
    }
    cost == 0
}
