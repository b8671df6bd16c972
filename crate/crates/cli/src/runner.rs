//! Backend resolution and parallel estimation.

use ionqec_core::backend::SimError;
use ionqec_core::circuit::DurationTable;
use ionqec_core::estimator::{adaptive_sample, count_failures, enumerate_paths, BackendKind, LogicalErrorEstimate, PathEnumeration};
use ionqec_core::noise::NoiseParams;
use ionqec_core::steane::{Protocol, Target};
use rayon::prelude::*;

use crate::config::{BackendChoice, RunSettings, Sampling};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Tableau,
    Dense,
    Paths,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tableau => "tableau",
            Method::Dense => "dense",
            Method::Paths => "paths",
        }
    }
}

/// Picks the simulator for `params`, rejecting combinations that cannot
/// represent the noise.
pub fn resolve(choice: BackendChoice, params: &NoiseParams) -> Result<Method, CliError> {
    let coherent = params.active_crosstalk().is_coherent();
    match choice {
        BackendChoice::Auto if coherent && params.is_coherent_only() => Ok(Method::Paths),
        BackendChoice::Auto if coherent => Ok(Method::Dense),
        BackendChoice::Auto => Ok(Method::Tableau),
        BackendChoice::Tableau if coherent => Err(CliError::Config(format!(
            "coherent crosstalk ({}) needs the dense or paths backend",
            params.crosstalk_mode
        ))),
        BackendChoice::Tableau => Ok(Method::Tableau),
        BackendChoice::Dense => Ok(Method::Dense),
        BackendChoice::Paths if !params.is_coherent_only() => Err(CliError::Config(
            "the paths backend is valid only for coherent-only noise".into(),
        )),
        BackendChoice::Paths => Ok(Method::Paths),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub estimate: LogicalErrorEstimate,
    pub method: Method,
    pub paths: Option<PathEnumeration>,
}

/// Failures among trials `start..start + count`, split into chunks that run
/// in parallel. The total does not depend on the worker count.
pub fn par_count(protocol: &Protocol, target: Target, kind: BackendKind, seed: u64, start: u64, count: u64, chunk: u64) -> Result<u64, SimError> {
    let chunk = chunk.max(1);
    let chunks: Vec<(u64, u64)> = (0..count.div_ceil(chunk))
        .map(|i| (start + i * chunk, chunk.min(count - i * chunk)))
        .collect();
    chunks
        .par_iter()
        .map(|&(s, c)| count_failures(protocol, target, kind, seed, s, c))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

pub fn protocol(params: NoiseParams, durations: DurationTable) -> Result<Protocol, CliError> {
    Protocol::new(params, durations).map_err(|e| CliError::Config(e.to_string()))
}

pub fn estimate(protocol: &Protocol, target: Target, method: Method, run: &RunSettings) -> Result<Estimate, CliError> {
    let params = *protocol.params();
    let kind = match method {
        Method::Paths => {
            let p = enumerate_paths(protocol, target, run.prune).map_err(|e| CliError::Run(e.to_string()))?;
            return Ok(Estimate {
                estimate: LogicalErrorEstimate::exact(p.p_logical, params),
                method,
                paths: Some(p),
            });
        }
        Method::Tableau => BackendKind::Tableau,
        Method::Dense => BackendKind::Dense,
    };
    let batch = |start, count| par_count(protocol, target, kind, run.seed, start, count, run.chunk);
    let estimate = match run.sampling {
        Sampling::Fixed(n) => LogicalErrorEstimate::from_counts(batch(0, n)?, n, params),
        Sampling::Adaptive(policy) => adaptive_sample(&policy, params, batch)?,
    };
    Ok(Estimate {
        estimate,
        method,
        paths: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ionqec_core::noise::CrosstalkMode;

    #[test]
    fn backend_resolution() {
        let inc = NoiseParams::crosstalk_only(1e-3, CrosstalkMode::EntanglingIncoherent);
        let coh = NoiseParams::crosstalk_only(1e-3, CrosstalkMode::EntanglingCoherent);
        let full_coh = NoiseParams {
            p_c: 1e-3,
            crosstalk_mode: CrosstalkMode::StarkCoherent,
            ..NoiseParams::default()
        };
        assert_eq!(resolve(BackendChoice::Auto, &inc).unwrap(), Method::Tableau);
        assert_eq!(resolve(BackendChoice::Auto, &coh).unwrap(), Method::Paths);
        assert_eq!(resolve(BackendChoice::Auto, &full_coh).unwrap(), Method::Dense);
        assert!(resolve(BackendChoice::Tableau, &coh).is_err());
        assert!(resolve(BackendChoice::Paths, &inc).is_err());
        assert!(resolve(BackendChoice::Paths, &full_coh).is_err());
        assert_eq!(resolve(BackendChoice::Dense, &inc).unwrap(), Method::Dense);
    }

    #[test]
    fn chunked_counts_do_not_depend_on_partition() {
        let p = protocol(NoiseParams { p_ms: 5e-3, ..NoiseParams::default() }, DurationTable::default()).unwrap();
        let whole = count_failures(&p, Target::Zero, BackendKind::Tableau, 3, 0, 3000).unwrap();
        for chunk in [1000, 701, 5000] {
            assert_eq!(par_count(&p, Target::Zero, BackendKind::Tableau, 3, 0, 3000, chunk).unwrap(), whole);
        }
        assert!(whole > 0);
    }
}
