//! Multi-cycle memory simulation and Monte Carlo aggregation.
//!
//! Each cycle draws the fault plans, lets the registers decay, records the
//! corrupt fraction just before correction, runs the correcting circuit,
//! records the fraction again and checks for memory failure at both points.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::decoders::{algorithm_a_round, parallel_bitflip_decode, tk_round, DecoderKind, GateFaultPlan, TkState};
use crate::error::{Error, Result};
use crate::expansion::ExpansionProfile;
use crate::faults::{
    derive_seed, draw_adversarial, draw_independent, AdversarialBudget, IndependentRates, RegisterFaultPlan,
    Strategy, DEFAULT_GREEDY_POOL,
};
use crate::tanner::{TannerGraph, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FaultModel {
    Adversarial {
        budget: AdversarialBudget,
        strategy: Strategy,
        #[serde(default = "default_greedy_pool")]
        greedy_pool: usize,
    },
    Independent {
        rates: IndependentRates,
    },
}

fn default_greedy_pool() -> usize {
    DEFAULT_GREEDY_POOL
}

impl FaultModel {
    pub fn adversarial(budget: AdversarialBudget, strategy: Strategy) -> Self {
        FaultModel::Adversarial {
            budget,
            strategy,
            greedy_pool: DEFAULT_GREEDY_POOL,
        }
    }

    pub fn independent(rates: IndependentRates) -> Self {
        FaultModel::Independent { rates }
    }

    pub fn none() -> Self {
        Self::independent(IndependentRates::default())
    }

    fn has_gate_faults(&self) -> bool {
        match self {
            FaultModel::Adversarial { budget, .. } => budget.alpha_xor > 0.0 || budget.alpha_maj > 0.0,
            FaultModel::Independent { rates } => rates.p_xor > 0.0 || rates.p_maj > 0.0,
        }
    }
}

/// Everything [`run_memory`] needs besides the graph and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub decoder: DecoderKind,
    pub fault_model: FaultModel,
    pub cycles: u64,
    #[serde(default = "one")]
    pub rounds_per_cycle: usize,
    #[serde(default)]
    pub profile: Option<ExpansionProfile>,
    /// Reliable-decoder round cap for failure detection when no profile is attached.
    #[serde(default = "default_detect_cap")]
    pub detect_round_cap: usize,
    /// Stored codeword; all-zero when absent.
    #[serde(default)]
    pub codeword: Option<Word>,
    #[serde(default = "yes")]
    pub stop_on_failure: bool,
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_detect_cap() -> usize {
    100
}

impl SimConfig {
    pub fn new(decoder: DecoderKind, fault_model: FaultModel, cycles: u64) -> Self {
        Self {
            decoder,
            fault_model,
            cycles,
            rounds_per_cycle: 1,
            profile: None,
            detect_round_cap: default_detect_cap(),
            codeword: None,
            stop_on_failure: true,
        }
    }

    pub fn with_profile(mut self, profile: ExpansionProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn validate(&self, g: &TannerGraph) -> Result<()> {
        if self.cycles == 0 {
            return Err(Error::Config("cycles must be at least 1".into()));
        }
        if self.rounds_per_cycle == 0 {
            return Err(Error::Config("rounds_per_cycle must be at least 1".into()));
        }
        if self.detect_round_cap == 0 {
            return Err(Error::Config("detect_round_cap must be at least 1".into()));
        }
        match &self.fault_model {
            FaultModel::Adversarial { budget, greedy_pool, .. } => {
                budget.validate()?;
                if *greedy_pool == 0 {
                    return Err(Error::Config("greedy_pool must be at least 1".into()));
                }
            }
            FaultModel::Independent { rates } => rates.validate()?,
        }
        if self.decoder == DecoderKind::None && self.fault_model.has_gate_faults() {
            return Err(Error::Config(
                "gate fault rates are set but decoder is `none`, so there are no gates".into(),
            ));
        }
        if let Some(p) = &self.profile {
            if (p.delta - (0.75 + p.epsilon) * g.gamma() as f64).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "profile delta {} does not match (3/4 + {}) * gamma",
                    p.delta, p.epsilon
                )));
            }
        }
        if let Some(w) = &self.codeword {
            g.check_len(w)?;
            if !g.is_codeword(w)? {
                return Err(Error::Config("stored word is not a codeword".into()));
            }
        }
        Ok(())
    }

    fn original(&self, g: &TannerGraph) -> Word {
        self.codeword.clone().unwrap_or_else(|| Word::zeros(g.n()))
    }
}

/// Variable-level view of the memory at an observation point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryState {
    pub registers: Word,
    pub original: Word,
    pub cycle: u64,
    pub corrupt_count: usize,
    pub corrupt_frac: f64,
}

impl MemoryState {
    pub fn new(registers: Word, original: Word, cycle: u64) -> Result<Self> {
        if registers.len() != original.len() {
            return Err(Error::LengthMismatch {
                expected: original.len(),
                actual: registers.len(),
            });
        }
        let corrupt_count = registers.distance(&original);
        let corrupt_frac = corrupt_count as f64 / original.len() as f64;
        Ok(Self {
            registers,
            original,
            cycle,
            corrupt_count,
            corrupt_frac,
        })
    }
}

/// Round cap used by failure detection.
pub fn detect_round_cap(n: usize, profile: Option<&ExpansionProfile>, fallback: usize) -> usize {
    match profile {
        Some(p) => {
            let c = p.contraction();
            let log = if c <= 0.0 || n <= 1 {
                0.0
            } else {
                (n as f64).ln() / (1.0 / c).ln()
            };
            log.ceil() as usize + 10
        }
        None => fallback,
    }
}

/// Memory failure: the reliable decoder does not return the stored codeword.
pub fn detect_failure(
    g: &TannerGraph,
    state: &MemoryState,
    profile: Option<&ExpansionProfile>,
    fallback_cap: usize,
) -> Result<bool> {
    if state.corrupt_count == 0 {
        return Ok(false);
    }
    let cap = detect_round_cap(g.n(), profile, fallback_cap);
    let out = parallel_bitflip_decode(g, &state.registers, cap)?;
    Ok(!out.converged || out.word != state.original)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationPoint {
    /// Just before the correcting circuit runs.
    Pre,
    /// Just after it.
    Post,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: u64,
    pub corrupt_pre: usize,
    pub corrupt_post: usize,
    pub alpha_v_pre: f64,
    pub alpha_v_post: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub n: usize,
    pub decoder: DecoderKind,
    pub cycles_run: u64,
    pub trace: Vec<CycleRecord>,
    pub failed: bool,
    pub failure_cycle: Option<u64>,
    pub failure_point: Option<ObservationPoint>,
    /// `alpha (1 + 4 eps) / 2` when a profile is attached.
    pub guarantee_threshold: Option<f64>,
    /// First cycle whose pre-correction count reaches `guarantee_threshold * n`.
    pub threshold_crossing_cycle: Option<u64>,
    /// Whether the per-cycle accounting inequality was evaluated.
    pub accounting_checked: bool,
    /// Cycles on which it failed.
    pub accounting_violations: Vec<u64>,
}

impl SimReport {
    pub fn max_pre(&self) -> usize {
        self.trace.iter().map(|r| r.corrupt_pre).max().unwrap_or(0)
    }

    pub fn max_post(&self) -> usize {
        self.trace.iter().map(|r| r.corrupt_post).max().unwrap_or(0)
    }

    /// The largest count in the trace is attained at a pre-correction point.
    pub fn peak_is_pre_correction(&self) -> bool {
        self.max_pre() >= self.max_post()
    }
}

/// Per-cycle bound on the next pre-correction count, in variables.
///
/// Returns `None` when the inequality does not apply (the previous count is
/// not below the guarantee threshold).
pub fn accounting_bound(
    prev_pre: usize,
    n: usize,
    gamma: usize,
    rho: usize,
    budget: &AdversarialBudget,
    profile: &ExpansionProfile,
) -> Option<f64> {
    let nf = n as f64;
    if prev_pre as f64 >= profile.guarantee_threshold() * nf {
        return None;
    }
    Some(
        prev_pre as f64 * profile.contraction()
            + (gamma * (rho - 2)) as f64 * budget.alpha_xor * nf
            + budget.alpha_maj * nf
            + budget.alpha_m * nf,
    )
}

/// Register contents of the running memory.
enum Registers {
    Plain(Word),
    Copies { state: TkState, readout: Word },
}

impl Registers {
    fn errors(&self, g: &TannerGraph, original: &Word) -> Vec<u8> {
        match self {
            Registers::Plain(w) => w.xor(original).into_bits(),
            Registers::Copies { state, .. } => state
                .bit_copies
                .iter()
                .enumerate()
                .map(|(e, &b)| b ^ original.get(g.edge_var(e)))
                .collect(),
        }
    }

    fn apply(&mut self, plan: &RegisterFaultPlan) {
        match self {
            Registers::Plain(w) => plan.apply(w.bits_mut()),
            Registers::Copies { state, .. } => plan.apply(&mut state.bit_copies),
        }
    }

    fn view(&mut self, g: &TannerGraph) -> Result<Word> {
        match self {
            Registers::Plain(w) => Ok(w.clone()),
            Registers::Copies { state, readout } => {
                *readout = state.readout(g, readout)?;
                Ok(readout.clone())
            }
        }
    }

    fn correct(&mut self, g: &TannerGraph, kind: DecoderKind, gates: &GateFaultPlan) -> Result<()> {
        match (self, kind) {
            (_, DecoderKind::None) => {}
            (Registers::Plain(w), DecoderKind::AlgorithmA) => *w = algorithm_a_round(g, w, gates)?,
            (Registers::Copies { state, .. }, DecoderKind::Tk) => *state = tk_round(g, state, gates)?,
            _ => unreachable!("register layout always matches the decoder"),
        }
        Ok(())
    }
}

fn draw_plans(
    g: &TannerGraph,
    cfg: &SimConfig,
    seed: u64,
    stream: u64,
    errors: &[u8],
) -> Result<(RegisterFaultPlan, GateFaultPlan)> {
    match &cfg.fault_model {
        FaultModel::Adversarial {
            budget,
            strategy,
            greedy_pool,
        } => draw_adversarial(budget, g, cfg.decoder, *strategy, seed, stream, errors, *greedy_pool),
        FaultModel::Independent { rates } => draw_independent(rates, g, cfg.decoder, seed, stream),
    }
}

/// Runs one memory trial.
pub fn run_memory(g: &TannerGraph, cfg: &SimConfig, seed: u64) -> Result<SimReport> {
    run_memory_observed(g, cfg, seed, |_, _| {})
}

/// [`run_memory`] that also hands every observed state to `observe`.
pub fn run_memory_observed<F>(g: &TannerGraph, cfg: &SimConfig, seed: u64, mut observe: F) -> Result<SimReport>
where
    F: FnMut(ObservationPoint, &MemoryState),
{
    cfg.validate(g)?;
    let n = g.n();
    let original = cfg.original(g);
    let mut regs = match cfg.decoder {
        DecoderKind::Tk => Registers::Copies {
            state: TkState::from_word(g, &original)?,
            readout: original.clone(),
        },
        _ => Registers::Plain(original.clone()),
    };
    let profile = cfg.profile.as_ref();
    let accounting = match (&cfg.fault_model, profile, cfg.decoder) {
        (FaultModel::Adversarial { budget, .. }, Some(p), DecoderKind::AlgorithmA) => Some((*budget, *p)),
        _ => None,
    };
    let threshold = profile.map(|p| p.guarantee_threshold());
    let rounds = cfg.rounds_per_cycle as u64;

    let mut report = SimReport {
        n,
        decoder: cfg.decoder,
        cycles_run: 0,
        trace: Vec::with_capacity(cfg.cycles.min(1 << 16) as usize),
        failed: false,
        failure_cycle: None,
        failure_point: None,
        guarantee_threshold: threshold,
        threshold_crossing_cycle: None,
        accounting_checked: accounting.is_some(),
        accounting_violations: Vec::new(),
    };
    let mut prev_pre = 0usize;

    for cycle in 1..=cfg.cycles {
        let errors = regs.errors(g, &original);
        let (reg_plan, gate_plan) = draw_plans(g, cfg, seed, cycle * rounds, &errors)?;
        regs.apply(&reg_plan);
        let pre = MemoryState::new(regs.view(g)?, original.clone(), cycle)?;
        observe(ObservationPoint::Pre, &pre);

        if let Some((budget, p)) = &accounting {
            if let Some(bound) = accounting_bound(prev_pre, n, g.gamma(), g.rho(), budget, p) {
                if pre.corrupt_count as f64 >= bound {
                    report.accounting_violations.push(cycle);
                }
            }
        }
        if let (Some(t), None) = (threshold, report.threshold_crossing_cycle) {
            if pre.corrupt_count as f64 >= t * n as f64 {
                report.threshold_crossing_cycle = Some(cycle);
            }
        }
        prev_pre = pre.corrupt_count;
        let pre_failed = detect_failure(g, &pre, profile, cfg.detect_round_cap)?;

        regs.correct(g, cfg.decoder, &gate_plan)?;
        for r in 1..rounds {
            let errors = regs.errors(g, &original);
            let (_, extra) = draw_plans(g, cfg, derive_seed(seed, r), cycle * rounds + r, &errors)?;
            regs.correct(g, cfg.decoder, &extra)?;
        }
        let post = MemoryState::new(regs.view(g)?, original.clone(), cycle)?;
        observe(ObservationPoint::Post, &post);

        report.trace.push(CycleRecord {
            cycle,
            corrupt_pre: pre.corrupt_count,
            corrupt_post: post.corrupt_count,
            alpha_v_pre: pre.corrupt_frac,
            alpha_v_post: post.corrupt_frac,
        });
        report.cycles_run = cycle;

        if !report.failed {
            let point = if pre_failed {
                Some(ObservationPoint::Pre)
            } else if detect_failure(g, &post, profile, cfg.detect_round_cap)? {
                Some(ObservationPoint::Post)
            } else {
                None
            };
            if point.is_some() {
                report.failed = true;
                report.failure_cycle = Some(cycle);
                report.failure_point = point;
                if cfg.stop_on_failure {
                    break;
                }
            }
        }
    }
    Ok(report)
}

/// Wilson score interval for `successes` out of `trials` at two-sided `confidence`.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Domain("Wilson interval needs at least one trial".into()));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Domain(format!("confidence {confidence} outside (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let nt = trials as f64;
    let p = successes as f64 / nt;
    let denom = 1.0 + z * z / nt;
    let centre = (p + z * z / (2.0 * nt)) / denom;
    let half = z * (p * (1.0 - p) / nt + z * z / (4.0 * nt * nt)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    Ok((lo, hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub cycle: u64,
    /// Trials still running at this cycle.
    pub alive: u64,
    pub mean_alpha_v_pre: f64,
    pub max_alpha_v_pre: f64,
    pub mean_alpha_v_post: f64,
    pub max_alpha_v_post: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: u64,
    pub root_seed: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub accounting_violations: u64,
    pub threshold_crossings: u64,
    pub trajectory: Vec<TrajectoryPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reports: Option<Vec<SimReport>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloOptions {
    pub confidence: f64,
    pub keep_reports: bool,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for MonteCarloOptions {
    fn default() -> Self {
        Self {
            confidence: 0.95,
            keep_reports: false,
            threads: 0,
        }
    }
}

/// Seed of trial `t` under `root_seed`.
pub fn trial_seed(root_seed: u64, t: u64) -> u64 {
    derive_seed(root_seed, t)
}

pub fn monte_carlo(
    g: &TannerGraph,
    cfg: &SimConfig,
    trials: u64,
    root_seed: u64,
    opts: &MonteCarloOptions,
) -> Result<MonteCarloSummary> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    cfg.validate(g)?;
    let threads = match opts.threads {
        0 => std::thread::available_parallelism().map_or(1, |p| p.get()),
        t => t,
    }
    .min(trials as usize)
    .max(1);

    let run_range = |lo: u64, hi: u64| -> Result<Vec<SimReport>> {
        (lo..hi).map(|t| run_memory(g, cfg, trial_seed(root_seed, t))).collect()
    };
    let reports: Vec<SimReport> = if threads == 1 {
        run_range(0, trials)?
    } else {
        let chunk = trials.div_ceil(threads as u64);
        let parts: Vec<Result<Vec<SimReport>>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads as u64)
                .map(|w| {
                    let (lo, hi) = (w * chunk, ((w + 1) * chunk).min(trials));
                    s.spawn(move || run_range(lo, hi))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut all = Vec::with_capacity(trials as usize);
        for p in parts {
            all.extend(p?);
        }
        all
    };

    let failures = reports.iter().filter(|r| r.failed).count() as u64;
    let (ci_low, ci_high) = wilson_interval(failures, trials, opts.confidence)?;
    let longest = reports.iter().map(|r| r.trace.len()).max().unwrap_or(0);
    let mut trajectory = Vec::with_capacity(longest);
    for i in 0..longest {
        let recs: Vec<&CycleRecord> = reports.iter().filter_map(|r| r.trace.get(i)).collect();
        let k = recs.len() as f64;
        trajectory.push(TrajectoryPoint {
            cycle: i as u64 + 1,
            alive: recs.len() as u64,
            mean_alpha_v_pre: recs.iter().map(|r| r.alpha_v_pre).sum::<f64>() / k,
            max_alpha_v_pre: recs.iter().map(|r| r.alpha_v_pre).fold(0.0, f64::max),
            mean_alpha_v_post: recs.iter().map(|r| r.alpha_v_post).sum::<f64>() / k,
            max_alpha_v_post: recs.iter().map(|r| r.alpha_v_post).fold(0.0, f64::max),
        });
    }
    Ok(MonteCarloSummary {
        trials,
        root_seed,
        failures,
        failure_rate: failures as f64 / trials as f64,
        confidence: opts.confidence,
        ci_low,
        ci_high,
        accounting_violations: reports.iter().map(|r| r.accounting_violations.len() as u64).sum(),
        threshold_crossings: reports.iter().filter(|r| r.threshold_crossing_cycle.is_some()).count() as u64,
        trajectory,
        reports: opts.keep_reports.then_some(reports),
    })
}

/// Per-cycle trace rows `(trial, cycle, alpha_v_pre, alpha_v_post, failed)`.
pub fn write_trace_csv<W: Write>(out: W, reports: &[SimReport]) -> Result<()> {
    let mut out = out;
    let io = |e: std::io::Error| Error::Config(format!("writing trace CSV: {e}"));
    writeln!(out, "trial,cycle,alpha_v_pre,alpha_v_post,failed").map_err(io)?;
    for (t, r) in reports.iter().enumerate() {
        for rec in &r.trace {
            let failed = r.failure_cycle.is_some_and(|c| c <= rec.cycle);
            writeln!(
                out,
                "{t},{},{},{},{}",
                rec.cycle, rec.alpha_v_pre, rec.alpha_v_post, failed as u8
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{build_random_regular, encode, CodeParams, Encoder};

    fn graph() -> TannerGraph {
        build_random_regular(CodeParams::new(36, 3, 6).unwrap(), 1).unwrap()
    }

    #[test]
    fn fault_free_memory_never_changes() {
        let g = graph();
        let k = Encoder::new(&g).dimension();
        let x = encode(&g, &vec![1; k]).unwrap();
        for decoder in [DecoderKind::AlgorithmA, DecoderKind::Tk, DecoderKind::None] {
            let mut cfg = SimConfig::new(decoder, FaultModel::none(), 50);
            cfg.codeword = Some(x.clone());
            let r = run_memory(&g, &cfg, 3).unwrap();
            assert!(!r.failed);
            assert_eq!(r.cycles_run, 50);
            assert!(r.trace.iter().all(|c| c.corrupt_pre == 0 && c.corrupt_post == 0));
        }
    }

    #[test]
    fn trace_matches_observed_distance() {
        let g = graph();
        let cfg = SimConfig::new(
            DecoderKind::AlgorithmA,
            FaultModel::independent(IndependentRates::new(0.02, 0.001, 0.01).unwrap()),
            200,
        );
        let mut seen = Vec::new();
        let r = run_memory_observed(&g, &cfg, 8, |p, s| {
            assert_eq!(s.corrupt_count, s.registers.distance(&s.original));
            assert!((s.corrupt_frac - s.corrupt_count as f64 / 36.0).abs() < 1e-15);
            seen.push((p, s.corrupt_count));
        })
        .unwrap();
        for (i, rec) in r.trace.iter().enumerate() {
            assert_eq!(seen[2 * i], (ObservationPoint::Pre, rec.corrupt_pre));
            assert_eq!(seen[2 * i + 1], (ObservationPoint::Post, rec.corrupt_post));
        }
        assert_eq!(r, run_memory(&g, &cfg, 8).unwrap());
    }

    #[test]
    fn detect_failure_cases() {
        let g = graph();
        let zero = Word::zeros(36);
        let s = MemoryState::new(zero.clone(), zero.clone(), 0).unwrap();
        assert!(!detect_failure(&g, &s, None, 100).unwrap());
        let enc = Encoder::new(&g);
        let mut msg = vec![0; enc.dimension()];
        msg[0] = 1;
        let other = enc.encode(&msg).unwrap();
        let s = MemoryState::new(other, zero.clone(), 0).unwrap();
        assert!(detect_failure(&g, &s, None, 100).unwrap());
    }

    #[test]
    fn decoder_none_with_gate_faults_is_rejected() {
        let g = graph();
        let cfg = SimConfig::new(
            DecoderKind::None,
            FaultModel::independent(IndependentRates::new(0.0, 0.01, 0.0).unwrap()),
            10,
        );
        assert!(matches!(run_memory(&g, &cfg, 0), Err(Error::Config(_))));
        let cfg = SimConfig::new(DecoderKind::AlgorithmA, FaultModel::none(), 0);
        assert!(run_memory(&g, &cfg, 0).is_err());
    }

    #[test]
    fn heavy_noise_fails() {
        let g = graph();
        let cfg = SimConfig::new(
            DecoderKind::AlgorithmA,
            FaultModel::independent(IndependentRates::new(0.4, 0.0, 0.0).unwrap()),
            50,
        );
        let s = monte_carlo(&g, &cfg, 200, 1, &MonteCarloOptions::default()).unwrap();
        assert_eq!(s.failures, 200);
        assert!(s.ci_low > 0.95);
    }

    #[test]
    fn fault_free_monte_carlo_rate_is_zero() {
        let g = graph();
        let cfg = SimConfig::new(DecoderKind::Tk, FaultModel::none(), 20);
        let s = monte_carlo(&g, &cfg, 30, 4, &MonteCarloOptions::default()).unwrap();
        assert_eq!(s.failure_rate, 0.0);
        assert_eq!(s.ci_low, 0.0);
        assert_eq!(s.trajectory.len(), 20);
    }

    #[test]
    fn monte_carlo_is_thread_count_independent() {
        let g = graph();
        let cfg = SimConfig::new(
            DecoderKind::AlgorithmA,
            FaultModel::independent(IndependentRates::new(0.05, 0.0, 0.0).unwrap()),
            30,
        );
        let one = MonteCarloOptions {
            threads: 1,
            ..Default::default()
        };
        let three = MonteCarloOptions {
            threads: 3,
            ..Default::default()
        };
        assert_eq!(
            monte_carlo(&g, &cfg, 40, 9, &one).unwrap(),
            monte_carlo(&g, &cfg, 40, 9, &three).unwrap()
        );
    }

    #[test]
    fn wilson_reference_values() {
        // 10 of 100 at 95%: (0.0552, 0.1744).
        let (lo, hi) = wilson_interval(10, 100, 0.95).unwrap();
        assert!((lo - 0.05523).abs() < 1e-4 && (hi - 0.17437).abs() < 1e-4);
        let (lo, hi) = wilson_interval(0, 50, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.05 && hi < 0.08);
        assert!(wilson_interval(0, 0, 0.95).is_err());
    }

    #[test]
    fn no_correction_degrades_monotonically() {
        let g = graph();
        let budget = AdversarialBudget::new(1.5 / 36.0, 0.0, 0.0).unwrap();
        let with = SimConfig::new(DecoderKind::AlgorithmA, FaultModel::adversarial(budget, Strategy::Random), 40);
        let without = SimConfig::new(DecoderKind::None, FaultModel::adversarial(budget, Strategy::Random), 40);
        let a = monte_carlo(&g, &with, 50, 2, &MonteCarloOptions::default()).unwrap();
        let b = monte_carlo(&g, &without, 50, 2, &MonteCarloOptions::default()).unwrap();
        assert!(b.failures >= a.failures);
        assert_eq!(b.failures, 50);
    }

    #[test]
    fn trace_csv_layout() {
        let g = graph();
        let cfg = SimConfig::new(
            DecoderKind::None,
            FaultModel::adversarial(AdversarialBudget::new(2.5 / 36.0, 0.0, 0.0).unwrap(), Strategy::Greedy),
            5,
        );
        let r = run_memory(&g, &cfg, 0).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, std::slice::from_ref(&r)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "trial,cycle,alpha_v_pre,alpha_v_post,failed");
        assert_eq!(lines.count(), r.trace.len());
        // Without correction the greedy adversary only ever adds two corruptions per cycle.
        for (i, rec) in r.trace.iter().enumerate() {
            assert_eq!(rec.corrupt_pre, 2 * (i + 1));
        }
    }
}
