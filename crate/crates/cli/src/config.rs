//! The JSON experiment document read by `simulate` and `compare-tk`.

use std::path::{Path, PathBuf};

use ftmem::decoders::DecoderKind;
use ftmem::expansion::{check_expansion_exhaustive, ExpansionCertificate, ExpansionProfile, Verdict};
use ftmem::memsim::{FaultModel, SimConfig};
use ftmem::tanner::{build_random_regular_with, read_alist, BuildOptions, CodeParams, TannerGraph};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CodeSource {
    Alist {
        alist: PathBuf,
    },
    Random {
        n: usize,
        gamma: usize,
        rho: usize,
        seed: u64,
        #[serde(default)]
        girth6: bool,
    },
}

/// `alpha` is a fraction of `n`; `alpha_n` gives the subset size directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub alpha_n: Option<f64>,
    pub epsilon: f64,
    /// Certify the graph exhaustively before running and refuse to run otherwise.
    #[serde(default)]
    pub certify: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub summary: Option<PathBuf>,
    #[serde(default)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub code: CodeSource,
    pub decoder: DecoderKind,
    pub fault_model: FaultModel,
    pub cycles: u64,
    pub trials: u64,
    pub root_seed: u64,
    #[serde(default = "one")]
    pub rounds_per_cycle: usize,
    #[serde(default)]
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub output: OutputPaths,
    /// Worker threads; 0 uses the available parallelism.
    #[serde(default)]
    pub threads: usize,
}

fn one() -> usize {
    1
}

/// A validated experiment, ready to run.
pub struct Prepared {
    pub graph: TannerGraph,
    pub sim: SimConfig,
    pub trials: u64,
    pub root_seed: u64,
    pub threads: usize,
    pub certificate: Option<ExpansionCertificate>,
    pub summary_path: PathBuf,
    pub trace_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<(Self, PathBuf), Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("reading config {}: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Failure::Invalid(format!("parsing config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// Checks every precondition and builds the graph. Nothing is written.
    pub fn prepare(&self, base: &Path, out_dir: &Path, stem: &str) -> Result<Prepared, Failure> {
        let invalid = |what: &str, e: ftmem::Error| Failure::Invalid(format!("{what}: {e}"));
        if self.trials == 0 {
            return Err(Failure::Invalid("trials must be at least 1".into()));
        }
        let graph = match &self.code {
            CodeSource::Alist { alist } => {
                let path = base.join(alist);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Failure::Invalid(format!("reading alist {}: {e}", path.display())))?;
                read_alist(&text).map_err(|e| invalid(&format!("alist {}", path.display()), e))?
            }
            CodeSource::Random {
                n,
                gamma,
                rho,
                seed,
                girth6,
            } => {
                let params = CodeParams::new(*n, *gamma, *rho).map_err(|e| invalid("code", e))?;
                let opts = BuildOptions {
                    reject_four_cycles: *girth6,
                    ..BuildOptions::default()
                };
                build_random_regular_with(params, *seed, opts).map_err(|e| Failure::Runtime(format!("code: {e}")))?
            }
        };
        let mut sim = SimConfig::new(self.decoder, self.fault_model.clone(), self.cycles);
        sim.rounds_per_cycle = self.rounds_per_cycle;
        let mut certificate = None;
        if let Some(spec) = &self.profile {
            let profile = spec.resolve(graph.gamma(), graph.n())?;
            if spec.certify {
                let cert = check_expansion_exhaustive(&graph, &profile);
                if cert.verdict != Verdict::Certified {
                    return Err(Failure::Invalid(format!(
                        "graph is not a certified expander at alpha={}, epsilon={} (verdict {:?})",
                        profile.alpha, profile.epsilon, cert.verdict
                    )));
                }
                certificate = Some(cert);
            }
            sim = sim.with_profile(profile);
        }
        sim.validate(&graph).map_err(|e| invalid("config", e))?;
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        Ok(Prepared {
            graph,
            sim,
            trials: self.trials,
            root_seed: self.root_seed,
            threads: self.threads,
            certificate,
            summary_path: self
                .output
                .summary
                .as_deref()
                .map(resolve)
                .unwrap_or_else(|| out_dir.join(format!("{stem}.json"))),
            trace_path: self.output.trace.as_deref().map(resolve),
        })
    }
}

impl ProfileSpec {
    pub fn resolve(&self, gamma: usize, n: usize) -> Result<ExpansionProfile, Failure> {
        let alpha = match (self.alpha, self.alpha_n) {
            (Some(a), None) => a,
            (None, Some(k)) => k / n as f64,
            _ => return Err(Failure::Invalid("profile needs exactly one of alpha, alpha_n".into())),
        };
        ExpansionProfile::new(gamma, alpha, self.epsilon).map_err(|e| Failure::Invalid(format!("profile: {e}")))
    }
}
