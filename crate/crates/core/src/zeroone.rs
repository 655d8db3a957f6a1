//! Random finite structures and Monte Carlo estimates of how often a
//! property holds in them.
//!
//! Sample `i` of a run is drawn from a ChaCha8 stream selected by `i` under
//! the run's seed, so results do not depend on how samples are split across
//! threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logic::{evaluate_idx, evaluate_sentence, Formula};
use crate::morphism::{Matcher, MorphismKind};
use crate::structure::{all_tuples, structures_up_to_iso, Structure, Vocabulary};
use crate::types::{atomic_type, atomic_type_idx, TypeDisjunction, TYPE_CAP};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Cap on structures enumerated per size by `asympt_theta`.
pub const THETA_CAP: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub vocab: Vocabulary,
    pub size: usize,
    pub samples: usize,
    pub seed: u64,
    /// Probability of each tuple being in each relation.
    pub p: f64,
}

impl SampleConfig {
    pub fn new(vocab: Vocabulary, size: usize, samples: usize, seed: u64) -> Self {
        SampleConfig {
            vocab,
            size,
            samples,
            seed,
            p: 0.5,
        }
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParams(format!(
                "tuple probability {p} is outside [0, 1]"
            )));
        }
        self.p = p;
        Ok(self)
    }
}

/// Sample `index` of the stream configured by `cfg`.
pub fn sample_random_structure(cfg: &SampleConfig, index: u64) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut s = Structure::numbered(cfg.vocab.clone(), cfg.size).expect("numbered universe");
    for r in 0..cfg.vocab.len() {
        let name = cfg.vocab.name(r).to_string();
        for t in all_tuples(cfg.size, cfg.vocab.arity_at(r)) {
            if rng.gen_bool(cfg.p) {
                s.add_idx(&name, &t).expect("tuple in range");
            }
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub estimate: f64,
    pub successes: usize,
    pub samples: usize,
    pub low: f64,
    pub high: f64,
}

impl MuEstimate {
    /// Point estimate with its 95% Wilson score interval.
    pub fn wilson(successes: usize, samples: usize) -> Result<Self> {
        if samples == 0 || successes > samples {
            return Err(Error::InvalidParams(format!(
                "{successes} successes out of {samples} samples"
            )));
        }
        let n = samples as f64;
        let phat = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (phat + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
        Ok(MuEstimate {
            estimate: phat,
            successes,
            samples,
            low: (center - half).clamp(0.0, 1.0).min(phat),
            high: (center + half).clamp(0.0, 1.0).max(phat),
        })
    }
}

/// Fraction of samples satisfying `property`, evaluated in parallel on
/// `jobs` threads (or rayon's default).
pub fn estimate_property<F>(
    cfg: &SampleConfig,
    jobs: Option<usize>,
    property: F,
) -> Result<MuEstimate>
where
    F: Fn(&Structure) -> Result<bool> + Sync,
{
    let run = || {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| property(&sample_random_structure(cfg, i)).map(usize::from))
            .try_reduce(|| 0, |a, b| Ok(a + b))
    };
    let successes = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    MuEstimate::wilson(successes, cfg.samples)
}

pub fn estimate_mu(phi: &Formula, cfg: &SampleConfig) -> Result<MuEstimate> {
    estimate_mu_with_jobs(phi, cfg, None)
}

pub fn estimate_mu_with_jobs(
    phi: &Formula,
    cfg: &SampleConfig,
    jobs: Option<usize>,
) -> Result<MuEstimate> {
    let free = phi.free_vars();
    if !free.is_empty() {
        return Err(Error::FreeVariables(free));
    }
    estimate_property(cfg, jobs, |s| evaluate_sentence(s, phi))
}

/// Whether every tuple of `b` with the atomic type of `abar` in `a`
/// extends to an embedding of `a` sending `abar` onto it.
pub fn extension_property_holds(a: &Structure, abar: &[&str], b: &Structure) -> Result<bool> {
    a.vocab().ensure_same(b.vocab())?;
    let t = atomic_type(a, abar)?;
    let abar = a.tuple_indices(abar.iter().copied())?;
    let candidates = (b.len() as f64).powi(abar.len() as i32);
    if candidates > TYPE_CAP as f64 {
        return Err(Error::cap(
            "candidate tuples for the extension property",
            TYPE_CAP,
        ));
    }
    let m = Matcher::new(MorphismKind::Embedding, a, b)?;
    for bbar in all_tuples(b.len(), abar.len()) {
        if atomic_type_idx(b, &bbar) != t {
            continue;
        }
        let pins: Vec<(usize, usize)> = abar.iter().copied().zip(bbar.iter().copied()).collect();
        if m.find(&pins)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Atomic types of the free variables of `phi` realized together with
/// `phi` in some structure of size 1 to `s`, one structure per
/// isomorphism class.
pub fn asympt_theta(phi: &Formula, vocab: &Vocabulary, s: usize) -> Result<TypeDisjunction> {
    let vars = phi.free_vars();
    let mut theta = TypeDisjunction::empty(vars.clone());
    for n in 1..=s {
        for a in structures_up_to_iso(vocab, n, THETA_CAP)? {
            for t in all_tuples(n, vars.len()) {
                let env: Vec<(String, usize)> =
                    vars.iter().cloned().zip(t.iter().copied()).collect();
                if evaluate_idx(&a, phi, &env)? {
                    theta.types.insert(atomic_type_idx(&a, &t));
                }
            }
        }
    }
    Ok(theta)
}

/// Whether `theta` and `phi` agree on every tuple of `a`.
pub fn theta_agrees(a: &Structure, phi: &Formula, theta: &TypeDisjunction) -> Result<bool> {
    for t in all_tuples(a.len(), theta.vars.len()) {
        let env: Vec<(String, usize)> = theta.vars.iter().cloned().zip(t.iter().copied()).collect();
        if evaluate_idx(a, phi, &env)? != theta.holds_idx(a, &t) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fraction of samples in which `theta` and `phi` are equivalent.
pub fn theta_agreement(
    phi: &Formula,
    theta: &TypeDisjunction,
    cfg: &SampleConfig,
) -> Result<MuEstimate> {
    estimate_property(cfg, None, |a| theta_agrees(a, phi, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, QuantifierDef, Registry};

    fn graph_cfg(size: usize, samples: usize) -> SampleConfig {
        SampleConfig::new(Vocabulary::graph(), size, samples, 7)
    }

    #[test]
    fn sampling_examples() {
        assert_eq!(sample_random_structure(&graph_cfg(0, 1), 0).len(), 0);
        let full = sample_random_structure(&graph_cfg(3, 1).with_p(1.0).unwrap(), 5);
        assert_eq!(full.relation_by_name("E").unwrap().len(), 9);
        let cfg = graph_cfg(6, 1);
        assert_eq!(
            sample_random_structure(&cfg, 3),
            sample_random_structure(&cfg, 3)
        );
        assert_ne!(
            sample_random_structure(&cfg, 3),
            sample_random_structure(&cfg, 4)
        );
        assert!(graph_cfg(3, 1).with_p(1.5).is_err());
    }

    #[test]
    fn estimates() {
        let reg = Registry::new();
        let v = Vocabulary::graph();
        let cfg = graph_cfg(8, 50);
        assert_eq!(estimate_mu(&Formula::True, &cfg).unwrap().estimate, 1.0);
        let f = parse_formula("E(x,x)", &v, &reg).unwrap();
        assert!(matches!(
            estimate_mu(&f, &cfg),
            Err(Error::FreeVariables(_))
        ));
        let f = parse_formula("exists x. E(x,x)", &v, &reg).unwrap();
        let serial = estimate_mu_with_jobs(&f, &cfg, Some(1)).unwrap();
        assert_eq!(serial, estimate_mu_with_jobs(&f, &cfg, Some(4)).unwrap());
    }

    #[test]
    fn wilson_bounds() {
        let m = MuEstimate::wilson(0, 10).unwrap();
        assert_eq!(m.low, 0.0);
        assert!(m.high > 0.2 && m.high < 0.35);
        let m = MuEstimate::wilson(10, 10).unwrap();
        assert_eq!(m.high, 1.0);
        assert!(MuEstimate::wilson(1, 0).is_err());
    }

    #[test]
    fn theta_examples() {
        let u = Vocabulary::new([("U", 1)]).unwrap();
        let mut reg = Registry::new();
        reg.insert(QuantifierDef::count_at_least("Q1", "U", 1).unwrap());
        let f = parse_formula("Q1[y: U(y)]", &u, &reg).unwrap();
        let theta = asympt_theta(&f, &u, 2).unwrap();
        assert!(theta.vars.is_empty());
        assert_eq!(theta.types.len(), 1);

        let f = parse_formula("Q1[y: !(y = y)]", &u, &reg).unwrap();
        assert!(asympt_theta(&f, &u, 3).unwrap().is_false());
    }
}
