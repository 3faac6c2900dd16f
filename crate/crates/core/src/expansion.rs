//! Vertex expansion of Tanner graphs.
//!
//! A graph is a `(gamma, rho, alpha, delta)` expander when every set `S` of at
//! most `alpha*n` variables touches at least `delta*|S|` checks. This module
//! certifies or refutes that property on concrete graphs and evaluates the
//! asymptotic bounds on achievable expansion that feed the `alpha_total`
//! tolerance curves.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tanner::TannerGraph;

// Slack for comparing integer neighbor counts against real thresholds that
// were themselves computed in floating point.
const THRESHOLD_SLACK: f64 = 1e-9;

/// Expansion target with `delta = (3/4 + epsilon) * gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionProfile {
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl ExpansionProfile {
    pub fn new(gamma: usize, alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1)")));
        }
        if !(epsilon > 0.0 && epsilon <= 0.25) {
            return Err(Error::Domain(format!(
                "epsilon = {epsilon} outside (0, 1/4]"
            )));
        }
        Ok(Self {
            alpha,
            delta: (0.75 + epsilon) * gamma as f64,
            epsilon,
        })
    }

    /// Fraction of corrupt variables the reliable decoder is guaranteed to
    /// clean up: `alpha (1 + 4 eps) / 2`.
    pub fn guarantee_threshold(&self) -> f64 {
        self.alpha * (1.0 + 4.0 * self.epsilon) / 2.0
    }

    /// Total per-cycle failure fraction the memory can absorb: `alpha (1 + 4 eps)(4 eps) / 2`.
    pub fn alpha_total(&self) -> f64 {
        alpha_total(self.alpha, self.epsilon)
    }

    /// Per-round contraction factor `1 - 4 eps`.
    pub fn contraction(&self) -> f64 {
        1.0 - 4.0 * self.epsilon
    }

    /// Largest subset size covered, `floor(alpha n)`.
    pub fn max_subset(&self, n: usize) -> usize {
        floor_fraction(self.alpha, n)
    }
}

pub(crate) fn floor_fraction(frac: f64, n: usize) -> usize {
    (frac * n as f64 + THRESHOLD_SLACK).floor() as usize
}

/// `alpha (1 + 4 eps)(4 eps) / 2`.
pub fn alpha_total(alpha: f64, epsilon: f64) -> f64 {
    alpha * (1.0 + 4.0 * epsilon) * (4.0 * epsilon) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    Exhaustive,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    Refuted,
    Inconclusive,
}

/// Outcome of an expansion check, serialisable as the certificate JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCertificate {
    pub graph_hash: String,
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub mode: CertificateMode,
    pub verdict: Verdict,
    pub witness: Option<Vec<usize>>,
    pub subsets_checked: u64,
}

impl ExpansionCertificate {
    /// Re-derives the witness's neighbourhood and confirms it violates the bound.
    pub fn witness_recounts(&self, g: &TannerGraph) -> bool {
        match &self.witness {
            Some(w) => {
                !w.is_empty()
                    && w.len() <= floor_fraction(self.alpha, g.n())
                    && violates(neighborhood_size(g, w), w.len(), self.delta)
            }
            None => false,
        }
    }
}

/// `|N(S)|` for a variable subset.
pub fn neighborhood_size(g: &TannerGraph, subset: &[usize]) -> usize {
    let mut hit = vec![false; g.m()];
    let mut count = 0;
    for &v in subset {
        for &c in g.var_checks(v) {
            if !std::mem::replace(&mut hit[c as usize], true) {
                count += 1;
            }
        }
    }
    count
}

fn violates(neighbors: usize, size: usize, delta: f64) -> bool {
    (neighbors as f64) + THRESHOLD_SLACK < delta * size as f64
}

/// Incremental neighbourhood counter used by the subset walkers.
struct Cover<'a> {
    g: &'a TannerGraph,
    hits: Vec<u16>,
    size: usize,
}

impl<'a> Cover<'a> {
    fn new(g: &'a TannerGraph) -> Self {
        Self {
            g,
            hits: vec![0; g.m()],
            size: 0,
        }
    }

    fn add(&mut self, v: usize) {
        for &c in self.g.var_checks(v) {
            let h = &mut self.hits[c as usize];
            if *h == 0 {
                self.size += 1;
            }
            *h += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        for &c in self.g.var_checks(v) {
            let h = &mut self.hits[c as usize];
            *h -= 1;
            if *h == 0 {
                self.size -= 1;
            }
        }
    }
}

enum Walk {
    Continue,
    Stop,
}

/// Visits every `size`-subset of variables in lexicographic order, passing
/// the subset and its neighbourhood size. Returns false if `visit` stopped it.
fn for_each_subset<F>(g: &TannerGraph, size: usize, visit: &mut F) -> bool
where
    F: FnMut(&[usize], usize) -> Walk,
{
    fn rec<F: FnMut(&[usize], usize) -> Walk>(
        cover: &mut Cover<'_>,
        chosen: &mut Vec<usize>,
        start: usize,
        size: usize,
        visit: &mut F,
    ) -> bool {
        if chosen.len() == size {
            return matches!(visit(chosen, cover.size), Walk::Continue);
        }
        let n = cover.g.n();
        let remaining = size - chosen.len();
        for v in start..=n - remaining {
            cover.add(v);
            chosen.push(v);
            let go_on = rec(cover, chosen, v + 1, size, visit);
            chosen.pop();
            cover.remove(v);
            if !go_on {
                return false;
            }
        }
        true
    }
    if size == 0 || size > g.n() {
        return true;
    }
    let mut cover = Cover::new(g);
    let mut chosen = Vec::with_capacity(size);
    rec(&mut cover, &mut chosen, 0, size, visit)
}

/// Exhaustive check against raw `(alpha, delta)`; no constraint on the implied epsilon.
///
/// Sizes are scanned in ascending order, so a refutation carries a
/// minimum-size witness. Exceeding `budget` subsets yields `Inconclusive`.
pub fn certify_exhaustive(g: &TannerGraph, alpha: f64, delta: f64, budget: u64) -> ExpansionCertificate {
    let max_size = floor_fraction(alpha, g.n()).min(g.n());
    let mut checked = 0u64;
    let mut witness = None;
    let mut out_of_budget = false;
    for size in 1..=max_size {
        let finished = for_each_subset(g, size, &mut |s, nb| {
            if checked >= budget {
                out_of_budget = true;
                return Walk::Stop;
            }
            checked += 1;
            if violates(nb, s.len(), delta) {
                witness = Some(s.to_vec());
                return Walk::Stop;
            }
            Walk::Continue
        });
        if !finished {
            break;
        }
    }
    let verdict = if witness.is_some() {
        Verdict::Refuted
    } else if out_of_budget {
        Verdict::Inconclusive
    } else {
        Verdict::Certified
    };
    ExpansionCertificate {
        graph_hash: g.identity_hash(),
        alpha,
        delta,
        epsilon: delta / g.gamma() as f64 - 0.75,
        mode: CertificateMode::Exhaustive,
        verdict,
        witness,
        subsets_checked: checked,
    }
}

/// Default work budget for exhaustive checks, in subsets.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 50_000_000;

pub fn check_expansion_exhaustive(g: &TannerGraph, profile: &ExpansionProfile) -> ExpansionCertificate {
    check_expansion_exhaustive_with_budget(g, profile, DEFAULT_EXHAUSTIVE_BUDGET)
}

pub fn check_expansion_exhaustive_with_budget(
    g: &TannerGraph,
    profile: &ExpansionProfile,
    budget: u64,
) -> ExpansionCertificate {
    let mut cert = certify_exhaustive(g, profile.alpha, profile.delta, budget);
    cert.epsilon = profile.epsilon;
    cert
}

/// Random-subset search for a violation. Never certifies.
pub fn probe_expansion_randomized(
    g: &TannerGraph,
    profile: &ExpansionProfile,
    trials: u64,
    seed: u64,
) -> Result<ExpansionCertificate> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let max_size = profile.max_subset(g.n()).min(g.n());
    let mut cert = ExpansionCertificate {
        graph_hash: g.identity_hash(),
        alpha: profile.alpha,
        delta: profile.delta,
        epsilon: profile.epsilon,
        mode: CertificateMode::Randomized,
        verdict: Verdict::Inconclusive,
        witness: None,
        subsets_checked: 0,
    };
    if max_size == 0 {
        return Ok(cert);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let size = rng.random_range(1..=max_size);
        let mut subset = sample(&mut rng, g.n(), size).into_vec();
        cert.subsets_checked += 1;
        if violates(neighborhood_size(g, &subset), size, profile.delta) {
            subset.sort_unstable();
            cert.verdict = Verdict::Refuted;
            cert.witness = Some(subset);
            break;
        }
    }
    Ok(cert)
}

/// Smallest `|N(S)|` over all `size`-subsets, with a subset attaining it.
pub fn min_neighborhood_exhaustive(g: &TannerGraph, size: usize) -> (usize, Vec<usize>) {
    let mut best = (usize::MAX, Vec::new());
    for_each_subset(g, size, &mut |s, nb| {
        if nb < best.0 {
            best = (nb, s.to_vec());
        }
        Walk::Continue
    });
    best
}

/// Mean `|N(S)|` over all `size`-subsets of a `(gamma, rho)`-regular graph on
/// `n` variables: `m (1 - C(n - size, rho) / C(n, rho))`. Some subset always
/// does at least this well, which makes it a finite-`n` form of the
/// asymptotic upper bound.
pub fn mean_neighborhood(n: usize, gamma: usize, rho: usize, size: usize) -> f64 {
    let m = (n * gamma / rho) as f64;
    // C(n-size, rho)/C(n, rho) = prod_{i<rho} (n-size-i)/(n-i)
    let miss: f64 = (0..rho)
        .map(|i| {
            let num = n as f64 - size as f64 - i as f64;
            if num <= 0.0 {
                0.0
            } else {
                num / (n - i) as f64
            }
        })
        .product();
    m * (1.0 - miss)
}

/// Per-`n` upper bound on the neighbourhood of the worst `alpha n`-set:
/// `(gamma/rho)(1 - (1-alpha)^rho)`. The additive `O(1)` term is dropped.
pub fn expansion_upper_bound(gamma: usize, rho: usize, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (0, 1]")));
    }
    Ok(gamma as f64 / rho as f64 * (1.0 - (1.0 - alpha).powi(rho as i32)))
}

/// Guaranteed-existence `alpha` for an `(alpha n, delta_frac * gamma)` expander
/// with left degree `gamma` and rate `1 - gamma/rho`.
/// Requires `(1 - delta_frac) * gamma` to be an integer of at least 2.
pub fn expansion_lower_bound_alpha(gamma: usize, rho: usize, delta_frac: f64) -> Result<f64> {
    let rate = 1.0 - gamma as f64 / rho as f64;
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Domain(format!("rate {rate} outside (0, 1)")));
    }
    if !(delta_frac > 0.0 && delta_frac < 1.0) {
        return Err(Error::Domain(format!("delta = {delta_frac} outside (0, 1)")));
    }
    let c = gamma as f64;
    let slack = (1.0 - delta_frac) * c;
    let j = slack.round();
    if (slack - j).abs() > 1e-9 || j < 2.0 {
        return Err(Error::Precondition(format!(
            "(1 - delta) * gamma = {slack} must be an integer of at least 2"
        )));
    }
    let dc = delta_frac * c;
    let ln_base = std::f64::consts::LN_2 + dc + 1.0 + j * (dc / (1.0 - rate)).ln();
    Ok((-ln_base / (j - 1.0)).exp())
}

/// Largest `alpha` for which the upper bound still admits `delta_frac * gamma`
/// expansion, i.e. `(1 - (1-alpha)^rho) / (rho alpha) >= delta_frac`.
pub fn max_alpha_for_expansion(rho: usize, delta_frac: f64) -> f64 {
    let ratio = |a: f64| (1.0 - (1.0 - a).powi(rho as i32)) / (rho as f64 * a);
    if ratio(1.0) >= delta_frac {
        return 1.0;
    }
    if delta_frac >= 1.0 {
        return 0.0;
    }
    // ratio is decreasing in alpha with ratio(0+) = 1.
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if ratio(mid) >= delta_frac {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Candidate epsilons for the `alpha_total` optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid {
    pub points: Vec<f64>,
    /// Also try every `1/4 - j/gamma` (`j >= 2`), the values at which the
    /// existence bound's integrality condition holds exactly.
    pub include_integral: bool,
}

impl Default for EpsilonGrid {
    fn default() -> Self {
        Self {
            points: (1..=25).map(|k| k as f64 / 100.0).collect(),
            include_integral: true,
        }
    }
}

impl EpsilonGrid {
    pub fn single(eps: f64) -> Self {
        Self {
            points: vec![eps],
            include_integral: false,
        }
    }

    fn candidates(&self, gamma: usize) -> Vec<f64> {
        let mut eps: Vec<f64> = self.points.clone();
        if self.include_integral {
            eps.extend(
                (2..)
                    .map(|j| 0.25 - j as f64 / gamma as f64)
                    .take_while(|&e| e > 0.0),
            );
        }
        eps.retain(|&e| e > 0.0 && e <= 0.25);
        eps
    }
}

/// Bounds on `alpha_total` and the epsilons attaining them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaTotalBounds {
    pub lower: Option<f64>,
    pub lower_epsilon: Option<f64>,
    pub upper: f64,
    pub upper_epsilon: f64,
}

pub fn alpha_total_bounds(gamma: usize, rho: usize, grid: &EpsilonGrid) -> Result<AlphaTotalBounds> {
    if gamma < 2 || rho <= gamma {
        return Err(Error::Domain(format!(
            "need gamma >= 2 and rho > gamma (got {gamma}, {rho})"
        )));
    }
    let eps = grid.candidates(gamma);
    if eps.is_empty() {
        return Err(Error::Domain("epsilon grid is empty".into()));
    }
    let mut upper = (f64::NEG_INFINITY, 0.0);
    let mut lower: Option<(f64, f64)> = None;
    for &e in &eps {
        let delta_frac = 0.75 + e;
        let up = alpha_total(max_alpha_for_expansion(rho, delta_frac), e);
        if up > upper.0 {
            upper = (up, e);
        }
        if let Ok(a) = expansion_lower_bound_alpha(gamma, rho, delta_frac) {
            let lo = alpha_total(a, e);
            if lower.is_none_or(|(best, _)| lo > best) {
                lower = Some((lo, e));
            }
        }
    }
    Ok(AlphaTotalBounds {
        lower: lower.map(|l| l.0),
        lower_epsilon: lower.map(|l| l.1),
        upper: upper.0,
        upper_epsilon: upper.1,
    })
}
