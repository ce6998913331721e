//! Metropolis-Hastings chain over the histories consistent with a public
//! state, with the normalized joint range as its stationary distribution.
//!
//! A transition proposes a deal uniformly from the neighborhood of the
//! current deal (ring-swap neighbor assignments plus the other deals of the
//! current assignment) and accepts with the ratio of unnormalized reach
//! probabilities corrected by the neighborhood sizes. All computations are
//! local to the current history.

use num_bigint::BigUint;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::assignment::{ln_biguint, neighbor_set, propose_from, NeighborSet};
use crate::construction::construct_history;
use crate::enumeration::enumerate;
use crate::error::{Error, Result};
use crate::game::{Deal, History};
use crate::observation::{
    extract_constraints, history_with_deal, verify_consistency, ConstraintSummary, PublicState,
};
use crate::policy::{Policy, ReachEvaluator};
use crate::rng::{derive_rng, mix_seed};

/// Current chain position with its cached local quantities.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub history: History,
    pub deal: Deal,
    /// Log unnormalized reach of the current history.
    pub log_reach: f64,
    /// Size of the current neighborhood |Omega_sigma|.
    pub omega_size: BigUint,
    pub step_count: u64,
    pub rejected_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    /// Initialize from the max-flow construction.
    Construct,
    /// Draw the initial history uniformly from the enumerated belief state
    /// (oracle-assisted; used for experiment parity).
    UniformExact,
}

#[derive(Debug, Clone, Copy)]
pub struct ChainConfig {
    /// Transitions performed between consecutive retained samples.
    pub thinning_interval: usize,
    pub num_samples: usize,
    pub init_mode: InitMode,
    pub rng_seed: u64,
    /// Transitions discarded before the first retained sample.
    pub discard: usize,
}

impl ChainConfig {
    pub fn new(thinning_interval: usize, num_samples: usize, init_mode: InitMode, rng_seed: u64) -> Self {
        ChainConfig {
            thinning_interval,
            num_samples,
            init_mode,
            rng_seed,
            discard: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thinning_interval == 0 || self.num_samples == 0 {
            return Err(Error::InvalidConfig(
                "thinning interval and sample count must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Seed for chain `chain_id` of a replicated experiment rooted at `root`.
pub fn chain_seed(root: u64, chain_id: u64) -> u64 {
    mix_seed(root, &[0x636861696e, chain_id]) // "chain"
}

/// Metropolis-Hastings acceptance probability for moving between two
/// histories given their log reaches and neighborhood sizes.
pub fn acceptance_probability(
    log_reach_from: f64,
    omega_from: &BigUint,
    log_reach_to: f64,
    omega_to: &BigUint,
) -> f64 {
    debug_assert!(!omega_to.is_zero(), "proposal target has a neighborhood");
    let log_z =
        (log_reach_to - log_reach_from) + ln_biguint(omega_from) - ln_biguint(omega_to);
    if log_z >= 0.0 {
        1.0
    } else {
        log_z.exp()
    }
}

/// A single chain bound to one public state and policy.
pub struct Sampler<'a> {
    public: &'a PublicState,
    policy: &'a dyn Policy,
    constraints: ConstraintSummary,
    evaluator: ReachEvaluator,
    neighbors: NeighborSet,
    state: ChainState,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    /// Initialize per the chain configuration. Fails with an explicit
    /// empty-belief error when no consistent history exists.
    pub fn new(
        public: &'a PublicState,
        policy: &'a dyn Policy,
        config: &ChainConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut init_rng = derive_rng(config.rng_seed, &[0x696e6974]); // "init"
        let history = match config.init_mode {
            InitMode::Construct => construct_history(public, policy, &mut init_rng)?
                .ok_or(Error::EmptyBeliefState)?,
            InitMode::UniformExact => {
                let beta = enumerate(public, policy)?;
                if beta.members.is_empty() {
                    return Err(Error::EmptyBeliefState);
                }
                let at = init_rng.gen_range(0..beta.members.len());
                beta.members[at].history.clone()
            }
        };
        Self::with_initial(public, policy, config.rng_seed, history)
    }

    /// Initialize from a known-consistent history (the harness draws its
    /// own initial states from a cached enumeration).
    pub fn with_initial(
        public: &'a PublicState,
        policy: &'a dyn Policy,
        rng_seed: u64,
        history: History,
    ) -> Result<Self> {
        let constraints = extract_constraints(public)?;
        let evaluator = ReachEvaluator::new(public);
        let deal = history.deal.clone();
        let log_reach = evaluator.log_reach(&deal, policy);
        if log_reach == f64::NEG_INFINITY {
            return Err(Error::Contract(
                "initial history is unreachable under the policy".into(),
            ));
        }
        let neighbors = neighbor_set(&deal, &constraints)?;
        let state = ChainState {
            history,
            omega_size: neighbors.total_deal_count.clone(),
            deal,
            log_reach,
            step_count: 0,
            rejected_count: 0,
        };
        Ok(Sampler {
            public,
            policy,
            constraints,
            evaluator,
            neighbors,
            state,
            rng: derive_rng(rng_seed, &[0x73746570]), // "step"
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    /// One Metropolis-Hastings transition. Returns true when the proposal
    /// was accepted. A deal with an empty neighborhood self-loops.
    pub fn step(&mut self) -> bool {
        self.state.step_count += 1;
        let Some(proposed_deal) =
            propose_from(&self.state.deal, &self.neighbors, &self.constraints, &mut self.rng)
        else {
            self.state.rejected_count += 1;
            return false;
        };
        let proposed_log_reach = self.evaluator.log_reach(&proposed_deal, self.policy);
        let proposed_neighbors = neighbor_set(&proposed_deal, &self.constraints)
            .expect("proposed deal satisfies the constraints");
        let z = acceptance_probability(
            self.state.log_reach,
            &self.neighbors.total_deal_count,
            proposed_log_reach,
            &proposed_neighbors.total_deal_count,
        );
        if self.rng.gen::<f64>() < z {
            let history = history_with_deal(self.public, proposed_deal.clone());
            debug_assert!(verify_consistency(self.public, &history, self.policy));
            self.state.history = history;
            self.state.deal = proposed_deal;
            self.state.log_reach = proposed_log_reach;
            self.state.omega_size = proposed_neighbors.total_deal_count.clone();
            self.neighbors = proposed_neighbors;
            true
        } else {
            self.state.rejected_count += 1;
            false
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub samples: Vec<History>,
    pub transitions: u64,
    pub accepted: u64,
    pub rejected: u64,
}

/// Run one chain: `discard` warm-up transitions, then `thinning_interval`
/// transitions between consecutive retained samples, for `num_samples`
/// samples. Total transitions: `discard + thinning * samples`.
pub fn run(public: &PublicState, policy: &dyn Policy, config: &ChainConfig) -> Result<RunResult> {
    let mut sampler = Sampler::new(public, policy, config)?;
    run_sampler(&mut sampler, config)
}

pub fn run_sampler(sampler: &mut Sampler, config: &ChainConfig) -> Result<RunResult> {
    config.validate()?;
    for _ in 0..config.discard {
        sampler.step();
    }
    let mut samples = Vec::with_capacity(config.num_samples);
    for _ in 0..config.num_samples {
        for _ in 0..config.thinning_interval {
            sampler.step();
        }
        samples.push(sampler.state.history.clone());
    }
    let transitions = sampler.state.step_count;
    let rejected = sampler.state.rejected_count;
    Ok(RunResult {
        samples,
        transitions,
        accepted: transitions - rejected,
        rejected,
    })
}
