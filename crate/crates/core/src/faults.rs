//! Register and gate fault plans under the adversarial and independent models.
//!
//! Register indices refer to variables, or to bit-copies (edges) when the
//! TK circuit is in use. Adversaries see which registers currently differ
//! from the stored codeword; every decoder here acts on the error pattern
//! independently of the codeword, so that is all the state they need.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::decoders::{algorithm_a_round, tk_round, DecoderKind, GateFaultPlan, TkState, XorGate};
use crate::error::{Error, Result};
use crate::expansion::{floor_fraction, ExpansionProfile};
use crate::tanner::{TannerGraph, Word};

/// Fractions of each component class allowed to fail per cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AdversarialBudget {
    pub alpha_m: f64,
    pub alpha_xor: f64,
    pub alpha_maj: f64,
}

/// Integral per-cycle fault counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetCounts {
    pub registers: usize,
    pub xor: usize,
    pub maj: usize,
}

impl AdversarialBudget {
    pub fn new(alpha_m: f64, alpha_xor: f64, alpha_maj: f64) -> Result<Self> {
        let b = Self {
            alpha_m,
            alpha_xor,
            alpha_maj,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [
            ("alpha_m", self.alpha_m),
            ("alpha_xor", self.alpha_xor),
            ("alpha_maj", self.alpha_maj),
        ] {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::InvalidParams(format!("{name} = {a} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// `floor(alpha * units)` for each class.
    pub fn counts(&self, g: &TannerGraph, kind: DecoderKind) -> BudgetCounts {
        BudgetCounts {
            registers: floor_fraction(self.alpha_m, kind.registers(g)),
            xor: floor_fraction(self.alpha_xor, kind.xor_gates(g)),
            maj: floor_fraction(self.alpha_maj, kind.majority_gates(g)),
        }
    }

    pub fn check_plans(
        &self,
        g: &TannerGraph,
        kind: DecoderKind,
        regs: &RegisterFaultPlan,
        gates: &GateFaultPlan,
    ) -> Result<()> {
        let c = self.counts(g, kind);
        for (name, used, cap) in [
            ("register", regs.flips.len(), c.registers),
            ("XOR", gates.xor_flips.len(), c.xor),
            ("majority", gates.maj_flips.len(), c.maj),
        ] {
            if used > cap {
                return Err(Error::BudgetViolation(format!(
                    "{used} {name} faults exceed the per-cycle budget of {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-use flip probabilities of the independent model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IndependentRates {
    pub p_m: f64,
    pub p_xor: f64,
    pub p_maj: f64,
}

impl IndependentRates {
    pub fn new(p_m: f64, p_xor: f64, p_maj: f64) -> Result<Self> {
        let r = Self { p_m, p_xor, p_maj };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_m", self.p_m), ("p_xor", self.p_xor), ("p_maj", self.p_maj)] {
            if !(0.0..0.5).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} outside [0, 1/2)")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.p_m == 0.0 && self.p_xor == 0.0 && self.p_maj == 0.0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterFaultPlan {
    pub flips: BTreeSet<usize>,
}

impl RegisterFaultPlan {
    pub fn apply(&self, registers: &mut [u8]) {
        for &i in &self.flips {
            registers[i] ^= 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Random,
    Repeat,
    Cluster,
    Greedy,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Random, Strategy::Repeat, Strategy::Cluster, Strategy::Greedy];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Repeat => "repeat",
            Strategy::Cluster => "cluster",
            Strategy::Greedy => "greedy",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::UnknownStrategy(s.to_string()))
    }
}

/// Default number of candidate register subsets the greedy adversary scores.
pub const DEFAULT_GREEDY_POOL: usize = 64;

/// SplitMix64 finaliser: decorrelated child seeds from `(root, index)`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one cycle: the seed picks the key, the cycle the stream.
pub fn cycle_rng(seed: u64, cycle: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cycle);
    rng
}

/// Indices in `0..units` hit independently with probability `p`, by geometric skipping.
fn bernoulli_indices(units: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if p <= 0.0 || units == 0 {
        return Vec::new();
    }
    let geo = Geometric::new(p).expect("p in (0, 1/2)");
    let mut out = Vec::new();
    let mut i: u64 = 0;
    loop {
        i = i.saturating_add(geo.sample(rng));
        if i >= units as u64 {
            return out;
        }
        out.push(i as usize);
        i += 1;
    }
}

/// Independent-model plans for one cycle.
pub fn draw_independent(
    rates: &IndependentRates,
    g: &TannerGraph,
    kind: DecoderKind,
    seed: u64,
    cycle: u64,
) -> Result<(RegisterFaultPlan, GateFaultPlan)> {
    rates.validate()?;
    let mut rng = cycle_rng(seed, cycle);
    let regs = RegisterFaultPlan {
        flips: bernoulli_indices(kind.registers(g), rates.p_m, &mut rng).into_iter().collect(),
    };
    let gates = GateFaultPlan {
        xor_flips: bernoulli_indices(kind.xor_gates(g), rates.p_xor, &mut rng)
            .into_iter()
            .map(|i| XorGate::from_index(g, i))
            .collect(),
        maj_flips: bernoulli_indices(kind.majority_gates(g), rates.p_maj, &mut rng)
            .into_iter()
            .collect(),
    };
    Ok((regs, gates))
}

/// Adversarial plans for one cycle, each exactly at its budget.
///
/// `errors[i] == 1` marks register `i` as currently differing from the stored codeword.
#[allow(clippy::too_many_arguments)]
pub fn draw_adversarial(
    budget: &AdversarialBudget,
    g: &TannerGraph,
    kind: DecoderKind,
    strategy: Strategy,
    seed: u64,
    cycle: u64,
    errors: &[u8],
    greedy_pool: usize,
) -> Result<(RegisterFaultPlan, GateFaultPlan)> {
    budget.validate()?;
    let units = kind.registers(g);
    if errors.len() != units {
        return Err(Error::LengthMismatch {
            expected: units,
            actual: errors.len(),
        });
    }
    let counts = budget.counts(g, kind);
    let mut rng = cycle_rng(seed, cycle);
    let (regs, gates) = match strategy {
        Strategy::Random => {
            let regs = sample(&mut rng, units, counts.registers).into_iter().collect();
            (regs, random_gates(g, kind, counts, &mut rng))
        }
        Strategy::Repeat => {
            let mut fixed = cycle_rng(derive_seed(seed, u64::MAX), 0);
            let regs = sample(&mut fixed, units, counts.registers).into_iter().collect();
            (regs, random_gates(g, kind, counts, &mut fixed))
        }
        Strategy::Cluster => cluster_plans(g, kind, counts, seed, errors, &mut rng),
        Strategy::Greedy => greedy_plans(g, kind, counts, errors, greedy_pool.max(1), &mut rng)?,
    };
    let plans = (RegisterFaultPlan { flips: regs }, gates);
    budget.check_plans(g, kind, &plans.0, &plans.1)?;
    Ok(plans)
}

fn random_gates(g: &TannerGraph, kind: DecoderKind, counts: BudgetCounts, rng: &mut ChaCha8Rng) -> GateFaultPlan {
    GateFaultPlan {
        xor_flips: sample(rng, kind.xor_gates(g), counts.xor)
            .into_iter()
            .map(|i| XorGate::from_index(g, i))
            .collect(),
        maj_flips: sample(rng, kind.majority_gates(g), counts.maj).into_iter().collect(),
    }
}

/// Registers belonging to variable `v`.
fn registers_of(g: &TannerGraph, kind: DecoderKind, v: usize) -> std::ops::Range<usize> {
    match kind {
        DecoderKind::Tk => v * g.gamma()..(v + 1) * g.gamma(),
        _ => v..v + 1,
    }
}

/// Variables in the neighbourhoods of `checks`.
fn check_neighborhood(g: &TannerGraph, checks: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; g.n()];
    let mut vars = Vec::new();
    for &c in checks {
        for &v in g.check_vars(c) {
            let v = v as usize;
            if !seen[v] {
                seen[v] = true;
                vars.push(v);
            }
        }
    }
    vars
}

/// Picks `k` entries, taking from `preferred` first and topping up from `rest`.
fn pick_preferring(preferred: &[usize], rest: &[usize], k: usize, rng: &mut ChaCha8Rng) -> BTreeSet<usize> {
    let mut out: BTreeSet<usize> = sample(rng, preferred.len(), k.min(preferred.len()))
        .into_iter()
        .map(|i| preferred[i])
        .collect();
    if out.len() < k {
        // `rest` may overlap `preferred`; drawing k + |out| indices leaves enough new ones.
        let want = k - out.len();
        let draws = (want + out.len()).min(rest.len());
        let extra: Vec<usize> = sample(rng, rest.len(), draws)
            .into_iter()
            .map(|i| rest[i])
            .filter(|r| !out.contains(r))
            .take(want)
            .collect();
        out.extend(extra);
    }
    out
}

fn cluster_plans(
    g: &TannerGraph,
    kind: DecoderKind,
    counts: BudgetCounts,
    seed: u64,
    errors: &[u8],
    rng: &mut ChaCha8Rng,
) -> (BTreeSet<usize>, GateFaultPlan) {
    // The target checks are fixed for the whole run; enough of them that their
    // neighbourhood covers the register budget.
    let mut fixed = cycle_rng(derive_seed(seed, u64::MAX - 1), 0);
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(&mut fixed);
    let per_var = registers_of(g, kind, 0).len();
    let need = counts.registers.max(counts.maj).max(1);
    let mut take = 1;
    while take < g.m() && check_neighborhood(g, &order[..take]).len() * per_var < need {
        take += 1;
    }
    let vars = check_neighborhood(g, &order[..take]);
    let pool: Vec<usize> = vars.iter().flat_map(|&v| registers_of(g, kind, v)).collect();
    let mut in_pool = vec![false; errors.len()];
    for &r in &pool {
        in_pool[r] = true;
    }

    let (clean, dirty): (Vec<usize>, Vec<usize>) = pool.iter().partition(|&&r| errors[r] == 0);
    let mut regs = pick_preferring(&clean, &dirty, counts.registers, rng);
    if regs.len() < counts.registers {
        let outside: Vec<usize> = (0..errors.len()).filter(|&r| !in_pool[r]).collect();
        let extra = pick_preferring(&outside, &[], counts.registers - regs.len(), rng);
        regs.extend(extra);
    }

    let mut maj_flips = BTreeSet::new();
    if counts.maj > 0 {
        let maj_rest: Vec<usize> = (0..kind.majority_gates(g)).filter(|&r| !in_pool[r]).collect();
        maj_flips = pick_preferring(&pool, &maj_rest, counts.maj, rng);
    }

    // XOR gates on the chains that feed the cluster's variables.
    let mut xor_flips = BTreeSet::new();
    if counts.xor > 0 {
        let mut in_cluster = vec![false; g.n()];
        for &v in &vars {
            in_cluster[v] = true;
        }
        let (near, far): (Vec<usize>, Vec<usize>) = (0..kind.xor_gates(g)).partition(|&idx| {
            let gate = XorGate::from_index(g, idx);
            in_cluster[g.check_vars(gate.check)[gate.slot] as usize]
        });
        xor_flips = pick_preferring(&near, &far, counts.xor, rng)
            .into_iter()
            .map(|i| XorGate::from_index(g, i))
            .collect();
    }
    (regs, GateFaultPlan { xor_flips, maj_flips })
}

/// One reliable correction round on an error pattern.
fn reliable_round(g: &TannerGraph, kind: DecoderKind, errors: &[u8]) -> Result<Vec<u8>> {
    match kind {
        DecoderKind::None => Ok(errors.to_vec()),
        DecoderKind::AlgorithmA => {
            let w = Word::from_bits(errors.iter().copied());
            Ok(algorithm_a_round(g, &w, &GateFaultPlan::empty())?.into_bits())
        }
        DecoderKind::Tk => {
            let s = TkState {
                bit_copies: errors.to_vec(),
            };
            Ok(tk_round(g, &s, &GateFaultPlan::empty())?.bit_copies)
        }
    }
}

/// Corrupt count after one reliable bit-flipping round, computed from the
/// error positions alone.
struct SparseScorer {
    parity: Vec<u8>,
    unsat: Vec<u8>,
    is_err: Vec<bool>,
    checks: Vec<usize>,
    vars: Vec<usize>,
    errs: Vec<usize>,
}

impl SparseScorer {
    fn new(g: &TannerGraph) -> Self {
        Self {
            parity: vec![0; g.m()],
            unsat: vec![0; g.n()],
            is_err: vec![false; g.n()],
            checks: Vec::new(),
            vars: Vec::new(),
            errs: Vec::new(),
        }
    }

    /// Errors are `base` with the entries of `flips` toggled.
    fn weight_after_round(&mut self, g: &TannerGraph, base: &[usize], flips: &[usize]) -> usize {
        for &v in base.iter().chain(flips) {
            if !self.is_err[v] && !self.errs.contains(&v) {
                self.errs.push(v);
            }
            self.is_err[v] ^= true;
        }
        self.errs.retain(|&v| self.is_err[v]);
        for &v in &self.errs {
            for &c in g.var_checks(v) {
                let c = c as usize;
                if self.parity[c] & 2 == 0 {
                    self.checks.push(c);
                }
                self.parity[c] = (self.parity[c] ^ 1) | 2;
            }
        }
        for &c in &self.checks {
            if self.parity[c] & 1 == 1 {
                for &u in g.check_vars(c) {
                    let u = u as usize;
                    if self.unsat[u] == 0 {
                        self.vars.push(u);
                    }
                    self.unsat[u] += 1;
                }
            }
            self.parity[c] = 0;
        }
        let mut weight = self.errs.len();
        for &u in &self.vars {
            if 2 * self.unsat[u] as usize > g.gamma() {
                if self.is_err[u] {
                    weight -= 1;
                } else {
                    weight += 1;
                }
            }
            self.unsat[u] = 0;
        }
        for &v in &self.errs {
            self.is_err[v] = false;
        }
        self.checks.clear();
        self.vars.clear();
        self.errs.clear();
        weight
    }
}

fn n_choose_k_at_most(n: usize, k: usize, cap: usize) -> bool {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap as u128 {
            return false;
        }
    }
    true
}

fn all_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn greedy_candidates(
    g: &TannerGraph,
    kind: DecoderKind,
    k: usize,
    errors: &[u8],
    pool_size: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let clean: Vec<usize> = (0..errors.len()).filter(|&r| errors[r] == 0).collect();
    if clean.len() < k {
        // Not enough clean registers: everything clean plus random dirty ones.
        let dirty: Vec<usize> = (0..errors.len()).filter(|&r| errors[r] == 1).collect();
        return (0..pool_size)
            .map(|_| pick_preferring(&clean, &dirty, k, rng).into_iter().collect())
            .collect();
    }
    if n_choose_k_at_most(clean.len(), k, pool_size) {
        return all_subsets(&clean, k);
    }
    let per_var = registers_of(g, kind, 0).len();
    let var_of = |r: usize| r / per_var;
    let corrupt_vars: Vec<usize> = {
        let mut v: Vec<usize> = (0..errors.len()).filter(|&r| errors[r] == 1).map(var_of).collect();
        v.dedup();
        v
    };
    let mut out = Vec::with_capacity(pool_size);
    for i in 0..pool_size {
        let local: Vec<usize> = match i % 3 {
            // Uniform over clean registers.
            0 => Vec::new(),
            // Around a random check, widened to two hops when the check alone is too small.
            1 => {
                let c = rng.random_range(0..g.m());
                let vars = check_neighborhood(g, &[c]);
                if vars.len() * per_var >= k {
                    vars
                } else {
                    let checks: Vec<usize> = vars
                        .iter()
                        .flat_map(|&v| g.var_checks(v).iter().map(|&c| c as usize))
                        .collect();
                    check_neighborhood(g, &checks)
                }
            }
            // Next to variables that are already corrupt.
            _ => {
                if corrupt_vars.is_empty() {
                    Vec::new()
                } else {
                    let v = corrupt_vars[rng.random_range(0..corrupt_vars.len())];
                    let checks: Vec<usize> = g.var_checks(v).iter().map(|&c| c as usize).collect();
                    check_neighborhood(g, &checks)
                }
            }
        };
        let preferred: Vec<usize> = local
            .iter()
            .flat_map(|&v| registers_of(g, kind, v))
            .filter(|&r| errors[r] == 0)
            .collect();
        out.push(pick_preferring(&preferred, &clean, k, rng).into_iter().collect());
    }
    out
}

fn greedy_plans(
    g: &TannerGraph,
    kind: DecoderKind,
    counts: BudgetCounts,
    errors: &[u8],
    pool_size: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(BTreeSet<usize>, GateFaultPlan)> {
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut trial = errors.to_vec();
    let mut scorer = SparseScorer::new(g);
    let base: Vec<usize> = (0..errors.len()).filter(|&r| errors[r] == 1).collect();
    for cand in greedy_candidates(g, kind, counts.registers, errors, pool_size, rng) {
        let score = match kind {
            // Without faults one Algorithm A round equals one bit-flipping round,
            // which only touches the neighbourhood of the errors.
            DecoderKind::AlgorithmA => scorer.weight_after_round(g, &base, &cand),
            DecoderKind::None => {
                let flipped_clean = cand.iter().filter(|&&r| errors[r] == 0).count();
                base.len() + flipped_clean - (cand.len() - flipped_clean)
            }
            DecoderKind::Tk => {
                trial.copy_from_slice(errors);
                for &r in &cand {
                    trial[r] ^= 1;
                }
                reliable_round(g, kind, &trial)?.iter().filter(|&&b| b == 1).count()
            }
        };
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, cand));
        }
    }
    // There is always at least one candidate, possibly the empty subset.
    let (_, regs) = best.expect("candidate pool is never empty");
    trial.copy_from_slice(errors);
    for &r in &regs {
        trial[r] ^= 1;
    }
    let after = reliable_round(g, kind, &trial)?;
    let mut pre = errors.to_vec();
    for &r in &regs {
        pre[r] ^= 1;
    }

    let mut gates = GateFaultPlan::empty();
    let mut targeted = BTreeSet::new();
    if kind == DecoderKind::AlgorithmA && counts.xor > 0 {
        // Push correct-after-round variables over the voting threshold with
        // as few message flips as possible.
        let gamma = g.gamma();
        let half = gamma / 2;
        let msgs = crate::decoders::EdgeMessages::from_word(g, &Word::from_bits(pre.iter().copied()))?;
        let mut needs: Vec<(usize, usize)> = (0..g.n())
            .filter(|&v| after[v] == 0)
            .map(|v| {
                let ones = msgs.check_to_var[v * gamma..(v + 1) * gamma].iter().filter(|&&b| b == 1).count();
                // A corrupt variable stays corrupt on a tie.
                let target = if pre[v] == 1 { gamma - half } else { half + 1 };
                (target.saturating_sub(ones), v)
            })
            .collect();
        needs.shuffle(rng);
        needs.sort_by_key(|&(k, _)| k);
        let mut left = counts.xor;
        for (k, v) in needs {
            if k == 0 || k > left {
                continue;
            }
            let zero_edges = (v * gamma..(v + 1) * gamma).filter(|&e| msgs.check_to_var[e] == 0);
            for e in zero_edges.take(k) {
                gates.xor_flips.insert(XorGate {
                    check: g.edge_check(e),
                    slot: g.edge_slot(e),
                    pos: 0,
                });
            }
            left -= k;
            targeted.insert(v);
        }
    }
    if counts.maj > 0 {
        let good: Vec<usize> = (0..after.len()).filter(|&r| after[r] == 0 && !targeted.contains(&r)).collect();
        let bad: Vec<usize> = (0..after.len()).filter(|&r| after[r] == 1).collect();
        gates.maj_flips = pick_preferring(&good, &bad, counts.maj, rng);
    }
    // Top up XOR faults on chains no other flip touches.
    if gates.xor_flips.len() < counts.xor {
        let used_chains: BTreeSet<(usize, usize)> = gates.xor_flips.iter().map(|x| (x.check, x.slot)).collect();
        let mut free: Vec<usize> = (0..kind.xor_gates(g))
            .filter(|&i| {
                let x = XorGate::from_index(g, i);
                x.pos == 0 && !used_chains.contains(&(x.check, x.slot))
            })
            .collect();
        free.shuffle(rng);
        let mut spill = (0..kind.xor_gates(g)).filter(|&i| XorGate::from_index(g, i).pos > 0);
        while gates.xor_flips.len() < counts.xor {
            let idx = match free.pop() {
                Some(i) => i,
                None => spill.next().expect("budget below gate count"),
            };
            gates.xor_flips.insert(XorGate::from_index(g, idx));
        }
    }
    Ok((regs.into_iter().collect(), gates))
}

/// `alpha (1+4 eps)(4 eps)/2 - (alpha_m + gamma (rho-2) alpha_xor + alpha_maj)`.
/// The tolerance condition holds iff the margin is strictly positive.
pub fn theorem2_margin(budget: &AdversarialBudget, gamma: usize, rho: usize, profile: &ExpansionProfile) -> f64 {
    profile.alpha_total() - (budget.alpha_m + (gamma * (rho - 2)) as f64 * budget.alpha_xor + budget.alpha_maj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{build_random_regular, CodeParams};
    use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

    fn seed7() -> TannerGraph {
        build_random_regular(CodeParams::new(12, 3, 6).unwrap(), 7).unwrap()
    }

    #[test]
    fn zero_rates_give_empty_plans() {
        let g = seed7();
        let (r, gp) = draw_independent(&IndependentRates::default(), &g, DecoderKind::AlgorithmA, 1, 0).unwrap();
        assert!(r.flips.is_empty() && gp.is_empty());
        for st in Strategy::ALL {
            let (r, gp) = draw_adversarial(&AdversarialBudget::default(), &g, DecoderKind::AlgorithmA, st, 1, 0, &[0; 12], 64).unwrap();
            assert!(r.flips.is_empty() && gp.is_empty(), "{st:?}");
        }
    }

    #[test]
    fn rate_validation() {
        assert!(IndependentRates::new(0.5, 0.0, 0.0).is_err());
        assert!(IndependentRates::new(1.0, 0.0, 0.0).is_err());
        assert!(IndependentRates::new(0.0, -0.1, 0.0).is_err());
        assert!(AdversarialBudget::new(1.0, 0.0, 0.0).is_err());
        assert!(matches!("sneaky".parse::<Strategy>(), Err(Error::UnknownStrategy(_))));
        assert_eq!("greedy".parse::<Strategy>().unwrap(), Strategy::Greedy);
    }

    #[test]
    fn independent_draws_are_reproducible() {
        let g = build_random_regular(CodeParams::new(60, 3, 6).unwrap(), 0).unwrap();
        let rates = IndependentRates::new(0.1, 0.05, 0.1).unwrap();
        let a = draw_independent(&rates, &g, DecoderKind::AlgorithmA, 42, 3).unwrap();
        let b = draw_independent(&rates, &g, DecoderKind::AlgorithmA, 42, 3).unwrap();
        let c = draw_independent(&rates, &g, DecoderKind::AlgorithmA, 42, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn register_flip_mean_within_three_sigma() {
        // p_m = 0.01, n = 10^4 over 10^4 draws: mean 100, sd of the mean 0.0995.
        let g = build_random_regular(CodeParams::new(10_000, 3, 6).unwrap(), 1).unwrap();
        let rates = IndependentRates::new(0.01, 0.0, 0.0).unwrap();
        let draws = 10_000u64;
        let total: usize = (0..draws)
            .map(|c| draw_independent(&rates, &g, DecoderKind::AlgorithmA, 9, c).unwrap().0.flips.len())
            .sum();
        let mean = total as f64 / draws as f64;
        let sd = (10_000.0 * 0.01 * 0.99 / draws as f64).sqrt();
        assert!((mean - 100.0).abs() < 3.0 * sd, "mean {mean}");
    }

    #[test]
    fn register_flip_counts_are_binomial() {
        let n = 200;
        let p = 0.05;
        let g = build_random_regular(CodeParams::new(n, 3, 6).unwrap(), 2).unwrap();
        let rates = IndependentRates::new(p, 0.0, 0.0).unwrap();
        let cycles = 20_000u64;
        let mut hist = vec![0u64; n + 1];
        for c in 0..cycles {
            hist[draw_independent(&rates, &g, DecoderKind::AlgorithmA, 5, c).unwrap().0.flips.len()] += 1;
        }
        // Pool adjacent counts until each bin expects at least 5; the tail joins the last bin.
        let binom = Binomial::new(p, n as u64).unwrap();
        let mut bins: Vec<(f64, f64)> = Vec::new();
        let (mut obs, mut exp) = (0.0, 0.0);
        for (k, &h) in hist.iter().enumerate() {
            obs += h as f64;
            exp += binom.pmf(k as u64) * cycles as f64;
            if exp >= 5.0 {
                bins.push((obs, exp));
                obs = 0.0;
                exp = 0.0;
            }
        }
        let last = bins.last_mut().unwrap();
        last.0 += obs;
        last.1 += exp;
        let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
        let bins = bins.len();
        let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(1.0 - 1e-3);
        assert!(stat < crit, "chi2 {stat} vs {crit} on {bins} bins");
    }

    #[test]
    fn cycles_are_uncorrelated() {
        let n = 1000;
        let g = build_random_regular(CodeParams::new(n, 3, 6).unwrap(), 3).unwrap();
        let rates = IndependentRates::new(0.2, 0.0, 0.0).unwrap();
        let cycles = 400u64;
        let plans: Vec<Vec<f64>> = (0..cycles)
            .map(|c| {
                let f = draw_independent(&rates, &g, DecoderKind::AlgorithmA, 77, c).unwrap().0.flips;
                (0..n).map(|i| f.contains(&i) as u8 as f64).collect()
            })
            .collect();
        // Pearson correlation of indicators between consecutive cycles, pooled.
        let (mut sxy, mut sx, mut sy, mut sxx, mut syy, mut k) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for w in plans.windows(2) {
            for i in 0..n {
                let (x, y) = (w[0][i], w[1][i]);
                sxy += x * y;
                sx += x;
                sy += y;
                sxx += x * x;
                syy += y * y;
                k += 1.0;
            }
        }
        let r = (sxy - sx * sy / k) / ((sxx - sx * sx / k) * (syy - sy * sy / k)).sqrt();
        // About 4e5 pairs: sd of r is 1/sqrt(k) ~ 0.0016.
        assert!(r.abs() < 4.0 / k.sqrt(), "r = {r}");
    }

    #[test]
    fn adversarial_plans_hit_budget_exactly() {
        let g = build_random_regular(CodeParams::new(36, 3, 6).unwrap(), 1).unwrap();
        let b = AdversarialBudget::new(0.1, 0.01, 0.05).unwrap();
        for kind in [DecoderKind::AlgorithmA, DecoderKind::Tk] {
            let c = b.counts(&g, kind);
            let units = kind.registers(&g);
            let mut errors = vec![0u8; units];
            errors[3] = 1;
            for st in Strategy::ALL {
                for cycle in 0..20 {
                    let (r, gp) = draw_adversarial(&b, &g, kind, st, 5, cycle, &errors, 16).unwrap();
                    assert_eq!(r.flips.len(), c.registers, "{st:?}");
                    assert_eq!(gp.xor_flips.len(), c.xor, "{st:?}");
                    assert_eq!(gp.maj_flips.len(), c.maj, "{st:?}");
                    assert!(r.flips.iter().all(|&i| i < units));
                }
            }
        }
        assert_eq!(b.counts(&g, DecoderKind::AlgorithmA), BudgetCounts { registers: 3, xor: 4, maj: 1 });
        assert_eq!(b.counts(&g, DecoderKind::Tk), BudgetCounts { registers: 10, xor: 4, maj: 5 });
        assert_eq!(b.counts(&g, DecoderKind::None), BudgetCounts { registers: 3, xor: 0, maj: 0 });
    }

    #[test]
    fn repeat_strategy_is_fixed_across_cycles() {
        let g = seed7();
        let b = AdversarialBudget::new(0.2, 0.0, 0.0).unwrap();
        let a = draw_adversarial(&b, &g, DecoderKind::AlgorithmA, Strategy::Repeat, 3, 1, &[0; 12], 64).unwrap();
        let mut errs = [0u8; 12];
        errs[0] = 1;
        let c = draw_adversarial(&b, &g, DecoderKind::AlgorithmA, Strategy::Repeat, 3, 2, &errs, 64).unwrap();
        assert_eq!(a.0, c.0);
    }

    #[test]
    fn budget_violations_are_reported() {
        let g = seed7();
        let b = AdversarialBudget::new(0.1, 0.0, 0.0).unwrap();
        let regs = RegisterFaultPlan {
            flips: [0, 1].into_iter().collect(),
        };
        assert!(matches!(
            b.check_plans(&g, DecoderKind::AlgorithmA, &regs, &GateFaultPlan::empty()),
            Err(Error::BudgetViolation(_))
        ));
    }

    #[test]
    fn greedy_beats_random_on_average() {
        let g = seed7();
        let b = AdversarialBudget::new(2.0 / 12.0 + 1e-6, 0.0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (mut greedy, mut random) = (0usize, 0usize);
        for t in 0..1000u64 {
            let mut errors = vec![0u8; 12];
            errors[rng.random_range(0..12)] = 1;
            let score = |st: Strategy| {
                let (r, _) = draw_adversarial(&b, &g, DecoderKind::AlgorithmA, st, t, 0, &errors, 64).unwrap();
                let mut e = errors.clone();
                r.apply(&mut e);
                reliable_round(&g, DecoderKind::AlgorithmA, &e).unwrap().iter().filter(|&&x| x == 1).count()
            };
            greedy += score(Strategy::Greedy);
            random += score(Strategy::Random);
        }
        assert!(greedy >= random, "greedy {greedy} random {random}");
    }

    #[test]
    fn sparse_scorer_matches_dense_round() {
        let g = build_random_regular(CodeParams::new(40, 4, 8).unwrap(), 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut scorer = SparseScorer::new(&g);
        for _ in 0..500 {
            let (kb, kf) = (rng.random_range(0..6), rng.random_range(0..4));
            let base: Vec<usize> = sample(&mut rng, 40, kb).into_vec();
            let flips: Vec<usize> = sample(&mut rng, 40, kf).into_vec();
            let mut dense = vec![0u8; 40];
            for &v in base.iter().chain(&flips) {
                dense[v] ^= 1;
            }
            let want = reliable_round(&g, DecoderKind::AlgorithmA, &dense).unwrap().iter().filter(|&&b| b == 1).count();
            assert_eq!(scorer.weight_after_round(&g, &base, &flips), want);
        }
    }

    #[test]
    fn margin_arithmetic() {
        let p = ExpansionProfile::new(3, 0.1, 0.2).unwrap();
        let zero = theorem2_margin(&AdversarialBudget::default(), 3, 6, &p);
        assert!((zero - p.alpha_total()).abs() < 1e-15 && zero > 0.0);
        let b = AdversarialBudget::new(0.0, 1e-4, 0.0).unwrap();
        assert!((zero - theorem2_margin(&b, 3, 6, &p) - 1.2e-3).abs() < 1e-15);
        let at = AdversarialBudget::new(p.alpha_total(), 0.0, 0.0).unwrap();
        assert!(theorem2_margin(&at, 3, 6, &p) <= 0.0);
    }

    #[test]
    fn seeds_are_spread() {
        let s: BTreeSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(s.len(), 1000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
