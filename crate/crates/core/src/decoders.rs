//! Correction rules: Algorithm A, parallel bit flipping, the TK bit-copy
//! scheme and its Gallager B message-passing form.
//!
//! Every check-to-variable message is the XOR of the `rho - 1` extrinsic
//! inputs, realised as a left-to-right chain of `rho - 2` two-input gates.
//! A failed gate complements its own output, so the message is flipped iff
//! an odd number of gates in its chain failed. Gates are identified by
//! `(check, slot, pos)` where `slot` is the receiving edge's position in the
//! check and `pos` the gate's place in the chain.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tanner::{TannerGraph, Word};

/// Which correcting circuit refreshes the registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    AlgorithmA,
    Tk,
    /// No correcting circuit: registers only decay.
    None,
}

impl DecoderKind {
    /// Number of registers (one per variable, or one per bit-copy for TK).
    pub fn registers(&self, g: &TannerGraph) -> usize {
        match self {
            DecoderKind::Tk => g.num_edges(),
            _ => g.n(),
        }
    }

    pub fn xor_gates(&self, g: &TannerGraph) -> usize {
        match self {
            DecoderKind::None => 0,
            _ => g.params().xor_gates(),
        }
    }

    pub fn majority_gates(&self, g: &TannerGraph) -> usize {
        match self {
            DecoderKind::None => 0,
            _ => self.registers(g),
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algorithm_a" => Ok(Self::AlgorithmA),
            "tk" => Ok(Self::Tk),
            "none" => Ok(Self::None),
            other => Err(Error::Config(format!(
                "unknown decoder `{other}` (expected algorithm_a, tk or none)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct XorGate {
    pub check: usize,
    pub slot: usize,
    pub pos: usize,
}

impl XorGate {
    /// Flat index in `0..n*gamma*(rho-2)`.
    pub fn index(&self, g: &TannerGraph) -> usize {
        (self.check * g.rho() + self.slot) * (g.rho() - 2) + self.pos
    }

    pub fn from_index(g: &TannerGraph, idx: usize) -> Self {
        let per = g.rho() - 2;
        let chain = idx / per;
        Self {
            check: chain / g.rho(),
            slot: chain % g.rho(),
            pos: idx % per,
        }
    }
}

/// Gate failures for one correction round.
///
/// `maj_flips` holds variable indices for Algorithm A and edge (bit-copy)
/// indices for the TK scheme, where every copy has its own majority gate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateFaultPlan {
    pub xor_flips: BTreeSet<XorGate>,
    pub maj_flips: BTreeSet<usize>,
}

impl GateFaultPlan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.xor_flips.is_empty() && self.maj_flips.is_empty()
    }

    fn validate(&self, g: &TannerGraph, maj_units: usize) -> Result<()> {
        for gate in &self.xor_flips {
            if gate.check >= g.m() || gate.slot >= g.rho() || gate.pos >= g.rho() - 2 {
                return Err(Error::InvalidParams(format!("XOR gate {gate:?} does not exist")));
            }
        }
        if let Some(&u) = self.maj_flips.iter().next_back() {
            if u >= maj_units {
                return Err(Error::InvalidParams(format!(
                    "majority gate {u} does not exist ({maj_units} gates)"
                )));
            }
        }
        Ok(())
    }

    /// Per-edge parity of failed gates in the chain feeding that edge.
    fn chain_parity(&self, g: &TannerGraph) -> Vec<u8> {
        let mut par = vec![0u8; g.num_edges()];
        for gate in &self.xor_flips {
            let e = g.check_edges(gate.check)[gate.slot] as usize;
            par[e] ^= 1;
        }
        par
    }
}

/// Check-to-variable messages computed from per-edge inputs `input[e]`.
fn extrinsic_messages(g: &TannerGraph, input: &[u8], faults: &GateFaultPlan) -> Vec<u8> {
    let mut out = faults.chain_parity(g);
    for c in 0..g.m() {
        let edges = g.check_edges(c);
        let total = edges.iter().fold(0u8, |acc, &e| acc ^ input[e as usize]);
        for &e in edges {
            out[e as usize] ^= total ^ input[e as usize];
        }
    }
    out
}

/// Messages on every edge in both directions for one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMessages {
    pub var_to_check: Vec<u8>,
    pub check_to_var: Vec<u8>,
}

impl EdgeMessages {
    /// Variable-to-check messages all equal to the variable's value.
    pub fn from_word(g: &TannerGraph, w: &Word) -> Result<Self> {
        g.check_len(w)?;
        let var_to_check: Vec<u8> = (0..g.num_edges()).map(|e| w.get(g.edge_var(e))).collect();
        let check_to_var = extrinsic_messages(g, &var_to_check, &GateFaultPlan::empty());
        Ok(Self {
            var_to_check,
            check_to_var,
        })
    }
}

/// One round of Algorithm A.
pub fn algorithm_a_round(g: &TannerGraph, state: &Word, faults: &GateFaultPlan) -> Result<Word> {
    g.check_len(state)?;
    faults.validate(g, g.n())?;
    let to_check: Vec<u8> = (0..g.num_edges()).map(|e| state.get(g.edge_var(e))).collect();
    let to_var = extrinsic_messages(g, &to_check, faults);
    let gamma = g.gamma();
    let half = gamma / 2;
    let mut out = state.clone();
    for v in 0..g.n() {
        let ones = to_var[v * gamma..(v + 1) * gamma]
            .iter()
            .map(|&b| b as usize)
            .sum::<usize>();
        if ones > half {
            out.set(v, 1);
        } else if gamma - ones > half {
            out.set(v, 0);
        }
    }
    for &v in &faults.maj_flips {
        out.flip(v);
    }
    Ok(out)
}

/// One reliable round of parallel bit flipping.
pub fn parallel_bitflip_round(g: &TannerGraph, state: &Word) -> Result<Word> {
    g.check_len(state)?;
    let syn = g.syndrome_unchecked(state.bits());
    let mut out = state.clone();
    for v in 0..g.n() {
        let unsat = g
            .var_checks(v)
            .iter()
            .filter(|&&c| syn[c as usize] == 1)
            .count();
        if 2 * unsat > g.gamma() {
            out.flip(v);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOutcome {
    pub word: Word,
    pub rounds: usize,
    pub converged: bool,
}

/// Iterates [`parallel_bitflip_round`] until a round changes nothing or
/// `max_rounds` rounds have run. The confirming round is counted.
pub fn parallel_bitflip_decode(g: &TannerGraph, state: &Word, max_rounds: usize) -> Result<DecodeOutcome> {
    if max_rounds == 0 {
        return Err(Error::InvalidParams("max_rounds must be at least 1".into()));
    }
    let mut w = state.clone();
    for r in 1..=max_rounds {
        let next = parallel_bitflip_round(g, &w)?;
        if next == w {
            return Ok(DecodeOutcome {
                word: w,
                rounds: r,
                converged: true,
            });
        }
        w = next;
    }
    Ok(DecodeOutcome {
        word: w,
        rounds: max_rounds,
        converged: false,
    })
}

/// TK registers: one bit-copy per edge, edge `v*gamma + j` holding `x_v^(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TkState {
    pub bit_copies: Vec<u8>,
}

impl TkState {
    /// All `gamma` copies of each variable set to its value.
    pub fn from_word(g: &TannerGraph, w: &Word) -> Result<Self> {
        g.check_len(w)?;
        Ok(Self {
            bit_copies: (0..g.num_edges()).map(|e| w.get(g.edge_var(e))).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.bit_copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bit_copies.is_empty()
    }

    /// Per-variable majority of the copies; ties keep `previous[v]`.
    pub fn readout(&self, g: &TannerGraph, previous: &Word) -> Result<Word> {
        self.check(g)?;
        g.check_len(previous)?;
        let gamma = g.gamma();
        Ok(Word::from_bits((0..g.n()).map(|v| {
            let ones = self.bit_copies[v * gamma..(v + 1) * gamma]
                .iter()
                .map(|&b| b as usize)
                .sum::<usize>();
            match (2 * ones).cmp(&gamma) {
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Equal => previous.get(v),
            }
        })))
    }

    fn check(&self, g: &TannerGraph) -> Result<()> {
        if self.bit_copies.len() != g.num_edges() {
            return Err(Error::LengthMismatch {
                expected: g.num_edges(),
                actual: self.bit_copies.len(),
            });
        }
        Ok(())
    }
}

/// Smallest number of unsatisfied extrinsic checks that flips a copy.
pub fn tk_flip_threshold(gamma: usize) -> usize {
    (gamma - 1).div_ceil(2)
}

/// One round of the TK scheme. `faults.maj_flips` indexes bit-copies.
pub fn tk_round(g: &TannerGraph, state: &TkState, faults: &GateFaultPlan) -> Result<TkState> {
    state.check(g)?;
    faults.validate(g, g.num_edges())?;
    let copies = &state.bit_copies;
    // Parity of check c as seen by variable v: the other variables' copies at c.
    let other_parity = extrinsic_messages(g, copies, faults);
    let gamma = g.gamma();
    let threshold = tk_flip_threshold(gamma);
    let mut next = copies.clone();
    for v in 0..g.n() {
        let base = v * gamma;
        for j in 0..gamma {
            let mine = copies[base + j];
            let unsatisfied = (0..gamma)
                .filter(|&k| k != j && (other_parity[base + k] ^ mine) == 1)
                .count();
            if unsatisfied >= threshold {
                next[base + j] ^= 1;
            }
        }
    }
    for &e in &faults.maj_flips {
        next[e] ^= 1;
    }
    Ok(TkState { bit_copies: next })
}

/// One reliable Gallager B round.
pub fn gallager_b_round(g: &TannerGraph, msgs: &EdgeMessages) -> Result<EdgeMessages> {
    gallager_b_round_faulty(g, msgs, &GateFaultPlan::empty())
}

/// Gallager B with the check half first, then the variable half. The
/// variable-to-check message on `e` flips its previous value when at least
/// `ceil((gamma-1)/2)` of the other incoming check messages disagree with it.
pub fn gallager_b_round_faulty(
    g: &TannerGraph,
    msgs: &EdgeMessages,
    faults: &GateFaultPlan,
) -> Result<EdgeMessages> {
    let edges = g.num_edges();
    for len in [msgs.var_to_check.len(), msgs.check_to_var.len()] {
        if len != edges {
            return Err(Error::LengthMismatch {
                expected: edges,
                actual: len,
            });
        }
    }
    faults.validate(g, edges)?;
    let check_to_var = extrinsic_messages(g, &msgs.var_to_check, faults);
    let gamma = g.gamma();
    let threshold = tk_flip_threshold(gamma);
    let mut var_to_check = msgs.var_to_check.clone();
    for e in 0..edges {
        let v = g.edge_var(e);
        let current = msgs.var_to_check[e];
        let disagree = (v * gamma..(v + 1) * gamma)
            .filter(|&f| f != e && check_to_var[f] != current)
            .count();
        if disagree >= threshold {
            var_to_check[e] ^= 1;
        }
    }
    for &e in &faults.maj_flips {
        var_to_check[e] ^= 1;
    }
    Ok(EdgeMessages {
        var_to_check,
        check_to_var,
    })
}
