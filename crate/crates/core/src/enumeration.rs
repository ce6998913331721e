//! Exact oracle: enumerate every history consistent with a public state,
//! with exact normalized reach probabilities, values, entropy and variance.
//!
//! Enumeration works in deal space. For validated Oh Hell public states the
//! count-and-void constraints characterize the consistent deals exactly, so
//! the belief state is the cartesian expansion of the valid suit-length
//! assignments; this is cross-checked against a generic observation-matching
//! search in the test suite.

use crate::assignment::{deal_count, enumerate_deals_in, valid_assignments};
use crate::error::{Error, Result};
use crate::game::{History, WorldState};
use crate::observation::{
    extract_constraints, history_with_deal, InfoStateKey, PublicState,
};
use crate::policy::{Policy, ReachEvaluator};

/// One consistent history with its exact conditional probability.
#[derive(Debug, Clone)]
pub struct PbsMember {
    pub history: History,
    /// P(h | S) under the joint policy.
    pub probability: f64,
    /// Log unnormalized reach, chance factor omitted.
    pub log_reach: f64,
}

/// A public state together with its full joint range.
#[derive(Debug, Clone)]
pub struct PublicBeliefState {
    pub public: PublicState,
    pub members: Vec<PbsMember>,
    /// Sum of unnormalized reach probabilities over the members.
    pub total_unnormalized: f64,
}

/// Default cap on enumerated members; exceeding it is a loud error rather
/// than an attempt to thrash through an infeasible enumeration.
pub const DEFAULT_MEMBER_CAP: usize = 2_000_000;

pub fn enumerate(s: &PublicState, policy: &dyn Policy) -> Result<PublicBeliefState> {
    enumerate_capped(s, policy, DEFAULT_MEMBER_CAP)
}

/// All and only the consistent histories. An inconsistent (but well-formed)
/// public state yields an empty member list; blowing the cap is an error.
pub fn enumerate_capped(
    s: &PublicState,
    policy: &dyn Policy,
    cap: usize,
) -> Result<PublicBeliefState> {
    let constraints = match extract_constraints(s) {
        Ok(c) => c,
        Err(Error::InconsistentPublicState(_)) => {
            return Ok(PublicBeliefState {
                public: s.clone(),
                members: Vec::new(),
                total_unnormalized: 0.0,
            })
        }
        Err(e) => return Err(e),
    };

    let assignments = valid_assignments(&constraints);
    let mut total_count = num_bigint::BigUint::from(0u32);
    for a in &assignments {
        total_count += deal_count(a, &constraints);
    }
    if total_count > num_bigint::BigUint::from(cap) {
        return Err(Error::ResourceLimit(format!(
            "{total_count} consistent histories exceed the cap of {cap}"
        )));
    }

    let evaluator = ReachEvaluator::new(s);
    let mut raw: Vec<(History, f64)> = Vec::new();
    for assignment in &assignments {
        for deal in enumerate_deals_in(assignment, &constraints) {
            let log_reach = evaluator.log_reach(&deal, policy);
            // Zero-probability histories are outside the relation.
            if log_reach > f64::NEG_INFINITY {
                raw.push((history_with_deal(s, deal), log_reach));
            }
        }
    }

    let lse = log_sum_exp(raw.iter().map(|(_, lr)| *lr));
    let members = raw
        .into_iter()
        .map(|(history, log_reach)| PbsMember {
            history,
            probability: (log_reach - lse).exp(),
            log_reach,
        })
        .collect();
    Ok(PublicBeliefState {
        public: s.clone(),
        members,
        total_unnormalized: lse.exp(),
    })
}

/// Log reach of every consistent deal, without materializing histories.
/// Cheaper than `enumerate` when only probabilities are needed.
pub fn enumerate_log_reaches(
    s: &PublicState,
    policy: &dyn Policy,
    cap: usize,
) -> Result<Vec<f64>> {
    let constraints = match extract_constraints(s) {
        Ok(c) => c,
        Err(Error::InconsistentPublicState(_)) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let assignments = valid_assignments(&constraints);
    let mut total_count = num_bigint::BigUint::from(0u32);
    for a in &assignments {
        total_count += deal_count(a, &constraints);
    }
    if total_count > num_bigint::BigUint::from(cap) {
        return Err(Error::ResourceLimit(format!(
            "{total_count} consistent histories exceed the cap of {cap}"
        )));
    }
    let evaluator = ReachEvaluator::new(s);
    let mut out = Vec::new();
    for assignment in &assignments {
        for deal in enumerate_deals_in(assignment, &constraints) {
            let log_reach = evaluator.log_reach(&deal, policy);
            if log_reach > f64::NEG_INFINITY {
                out.push(log_reach);
            }
        }
    }
    Ok(out)
}

pub fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Exact expected utility vector of a history under the joint policy: the
/// policy-weighted expectation over every terminal continuation. All
/// post-deal transitions are deterministic, so weights are pure products of
/// action probabilities.
pub fn history_value(h: &History, policy: &dyn Policy) -> Result<Vec<f64>> {
    let mut state = WorldState::from_deal(h.config, h.deal.clone())?;
    let mut public = PublicState::new(h.config, h.deal.trump_upcard)?;
    for &(player, action) in &h.actions {
        if player != state.to_act {
            return Err(Error::Contract("actor out of turn in history".into()));
        }
        match action {
            crate::game::Action::Bid(b) => public.push_bid(b),
            crate::game::Action::Play(c) => public.push_play(player, c),
        }
        state.apply_action_in_place(action)?;
    }
    Ok(value_recurse(&state, &mut public, policy))
}

fn value_recurse(state: &WorldState, public: &mut PublicState, policy: &dyn Policy) -> Vec<f64> {
    if state.is_terminal() {
        return state.utility().expect("terminal state has utility");
    }
    let legal = state.legal_actions().expect("non-terminal state has actions");
    let player = state.to_act;
    let key = InfoStateKey {
        public,
        player,
        hand: state.hands[player],
    };
    let dist = policy.action_distribution(&key, &legal);
    let mut acc = vec![0.0; state.config.num_players];
    for (action, &p) in dist.actions.iter().zip(&dist.probs) {
        if p == 0.0 {
            continue;
        }
        let next = state.apply_action(*action).expect("legal action applies");
        let saved = public.digest();
        match action {
            crate::game::Action::Bid(b) => public.push_bid(*b),
            crate::game::Action::Play(c) => public.push_play(player, *c),
        }
        let child = value_recurse(&next, public, policy);
        match action {
            crate::game::Action::Bid(_) => public.pop_bid(saved),
            crate::game::Action::Play(_) => public.pop_play(saved),
        }
        for (a, c) in acc.iter_mut().zip(&child) {
            *a += p * c;
        }
    }
    acc
}

/// Per-member value table plus the exact belief-state value.
pub struct PbsValues {
    pub per_member: Vec<Vec<f64>>,
    pub value: Vec<f64>,
}

pub fn pbs_values(beta: &PublicBeliefState, policy: &dyn Policy) -> Result<PbsValues> {
    let num_players = beta.public.config().num_players;
    let mut per_member = Vec::with_capacity(beta.members.len());
    let mut value = vec![0.0; num_players];
    for member in &beta.members {
        let v = history_value(&member.history, policy)?;
        for (acc, x) in value.iter_mut().zip(&v) {
            *acc += member.probability * x;
        }
        per_member.push(v);
    }
    Ok(PbsValues { per_member, value })
}

/// Exact expected value of the public state under the joint policy.
pub fn pbs_value(beta: &PublicBeliefState, policy: &dyn Policy) -> Result<Vec<f64>> {
    Ok(pbs_values(beta, policy)?.value)
}

/// Shannon entropy (bits) of a probability vector.
pub fn entropy_bits<'a>(probs: impl Iterator<Item = &'a f64>) -> f64 {
    -probs
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// Entropy in bits of the joint range.
pub fn pbs_entropy(beta: &PublicBeliefState) -> f64 {
    entropy_bits(beta.members.iter().map(|m| &m.probability))
}

/// Variance of one player's history value under the joint range.
pub fn pbs_variance(beta: &PublicBeliefState, policy: &dyn Policy, player: usize) -> Result<f64> {
    let values = pbs_values(beta, policy)?;
    let mean = values.value[player];
    Ok(beta
        .members
        .iter()
        .zip(&values.per_member)
        .map(|(m, v)| m.probability * (v[player] - mean).powi(2))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Action, GameConfig};
    use crate::observation::public_state_of;
    use crate::policy::{
        sample_action, BiasedRandomPolicy, InfoStateDistribution, UniformPolicy,
    };
    use crate::rng::derive_rng;

    fn bids_only_public(config: GameConfig, seed: u64) -> PublicState {
        let state = crate::game::new_game(config, seed).unwrap();
        let mut s = PublicState::new(config, state.deal.trump_upcard).unwrap();
        for _ in 0..config.num_players {
            s.push_bid(0);
        }
        s
    }

    #[test]
    fn fresh_small_config_enumerates_multinomial_count() {
        // 3 players, 2 suits, 4 ranks, hand 2: 7!/(2!2!2!1!) = 630 deals.
        let config = GameConfig::new(3, 2, 4, 2, 10).unwrap();
        let s = bids_only_public(config, 3);
        let beta = enumerate(&s, &UniformPolicy).unwrap();
        assert_eq!(beta.members.len(), 630);
        let sum: f64 = beta.members.iter().map(|m| m.probability).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Uniform policy, identical bid sequence: uniform joint range.
        for m in &beta.members {
            assert!((m.probability - 1.0 / 630.0).abs() < 1e-15);
        }
    }

    #[test]
    fn enumeration_respects_cap() {
        let config = GameConfig::new(3, 2, 4, 2, 10).unwrap();
        let s = bids_only_public(config, 3);
        match enumerate_capped(&s, &UniformPolicy, 100) {
            Err(Error::ResourceLimit(_)) => {}
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn members_project_back_to_public_state() {
        let config = GameConfig::new(2, 2, 4, 2, 10).unwrap();
        let policy = BiasedRandomPolicy::new(0.7, 5);
        let s = bids_only_public(config, 8);
        let beta = enumerate(&s, &policy).unwrap();
        assert!(!beta.members.is_empty());
        for m in &beta.members {
            assert_eq!(public_state_of(&m.history).unwrap(), s);
        }
    }

    #[test]
    fn probabilities_match_reach_normalization() {
        let config = GameConfig::new(2, 2, 4, 2, 10).unwrap();
        let policy = BiasedRandomPolicy::new(0.8, 11);
        let s = bids_only_public(config, 8);
        let beta = enumerate(&s, &policy).unwrap();
        let total: f64 = beta.members.iter().map(|m| m.log_reach.exp()).sum();
        assert!((beta.total_unnormalized - total).abs() < 1e-9 * total);
        for m in &beta.members {
            let expected =
                crate::policy::unnormalized_reach(&m.history, &policy).unwrap().exp() / total;
            assert!((m.probability - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn terminal_history_value_is_utility() {
        let config = GameConfig::new(2, 1, 3, 1, 10).unwrap();
        let mut state = crate::game::new_game(config, 2).unwrap();
        let mut actions = Vec::new();
        while !state.is_terminal() {
            let a = state.legal_actions().unwrap()[0];
            actions.push((state.to_act, a));
            state.apply_action_in_place(a).unwrap();
        }
        let h = History {
            config,
            deal: state.deal.clone(),
            actions,
        };
        let value = history_value(&h, &UniformPolicy).unwrap();
        assert_eq!(value, state.utility().unwrap());
    }

    /// Always plays the first legal action with probability one. Zero
    /// support is allowed only in value tests.
    struct FirstActionPolicy;

    impl Policy for FirstActionPolicy {
        fn action_distribution(
            &self,
            _key: &InfoStateKey,
            legal: &[Action],
        ) -> InfoStateDistribution {
            let mut probs = vec![0.0; legal.len()];
            probs[0] = 1.0;
            InfoStateDistribution::new(legal.to_vec(), probs)
        }
    }

    #[test]
    fn deterministic_policy_value_is_single_rollout() {
        let config = GameConfig::new(3, 2, 4, 2, 10).unwrap();
        let start = crate::game::new_game(config, 6).unwrap();
        let h = History {
            config,
            deal: start.deal.clone(),
            actions: vec![],
        };
        let value = history_value(&h, &FirstActionPolicy).unwrap();
        // Independent rollout: always take the first legal action.
        let mut state = start;
        while !state.is_terminal() {
            let a = state.legal_actions().unwrap()[0];
            state.apply_action_in_place(a).unwrap();
        }
        let rollout = state.utility().unwrap();
        for (v, r) in value.iter().zip(&rollout) {
            assert!((v - r).abs() < 1e-12);
        }
    }

    #[test]
    fn value_agrees_with_monte_carlo_rollouts() {
        let config = GameConfig::new(2, 2, 4, 2, 10).unwrap();
        let policy = BiasedRandomPolicy::new(0.6, 17);
        let start = crate::game::new_game(config, 21).unwrap();
        let h = History {
            config,
            deal: start.deal.clone(),
            actions: vec![],
        };
        let exact = history_value(&h, &policy).unwrap();

        let mut rng = derive_rng(55, &[1]);
        let runs = 100_000;
        let mut mean = vec![0.0; 2];
        let mut sq = vec![0.0; 2];
        for _ in 0..runs {
            let mut state = start.clone();
            let mut public = PublicState::new(config, state.deal.trump_upcard).unwrap();
            while !state.is_terminal() {
                let legal = state.legal_actions().unwrap();
                let key = InfoStateKey {
                    public: &public,
                    player: state.to_act,
                    hand: state.hands[state.to_act],
                };
                let action = sample_action(&policy.action_distribution(&key, &legal), &mut rng);
                match action {
                    Action::Bid(b) => public.push_bid(b),
                    Action::Play(c) => public.push_play(state.to_act, c),
                }
                state.apply_action_in_place(action).unwrap();
            }
            let u = state.utility().unwrap();
            for p in 0..2 {
                mean[p] += u[p];
                sq[p] += u[p] * u[p];
            }
        }
        for p in 0..2 {
            mean[p] /= runs as f64;
            let var = sq[p] / runs as f64 - mean[p] * mean[p];
            let se = (var / runs as f64).sqrt();
            assert!(
                (mean[p] - exact[p]).abs() < 4.0 * se.max(1e-6),
                "player {p}: mc {} vs exact {} (se {se})",
                mean[p],
                exact[p]
            );
        }
    }

    #[test]
    fn entropy_of_uniform_matches_log2() {
        let probs = vec![1.0 / 192.0; 192];
        let h = entropy_bits(probs.iter());
        assert!((h - 192f64.log2()).abs() < 1e-12);
        assert!((h - 7.585).abs() < 1e-3);
    }

    #[test]
    fn entropy_bounds_and_degenerate_cases() {
        let config = GameConfig::new(3, 2, 4, 2, 10).unwrap();
        let s = bids_only_public(config, 3);
        let beta = enumerate(&s, &UniformPolicy).unwrap();
        let h = pbs_entropy(&beta);
        assert!(h >= 0.0);
        assert!(h <= (beta.members.len() as f64).log2() + 1e-12);
        // Uniform reach at tricks_played 0: entropy equals log2 |H_S|.
        assert!((h - (beta.members.len() as f64).log2()).abs() < 1e-9);

        let one = entropy_bits([1.0].iter());
        assert_eq!(one, 0.0);
    }

    #[test]
    fn entropy_decreases_with_bias() {
        let config = GameConfig::new(2, 2, 4, 2, 10).unwrap();
        let s = bids_only_public(config, 8);
        let mut last = f64::INFINITY;
        for bias in [0.5, 0.7, 0.9] {
            let policy = BiasedRandomPolicy::new(bias, 5);
            let beta = enumerate(&s, &policy).unwrap();
            let h = pbs_entropy(&beta);
            assert!(h < last, "entropy did not fall at bias {bias}");
            last = h;
        }
    }

    #[test]
    fn single_member_has_zero_entropy_and_variance() {
        let config = GameConfig::new(2, 1, 3, 1, 10).unwrap();
        // Play the hand to the end: the lone trick reveals both cards, so
        // only one deal remains consistent.
        let policy = UniformPolicy;
        let mut state = crate::game::new_game(config, 9).unwrap();
        let mut actions = Vec::new();
        while !state.is_terminal() {
            let a = state.legal_actions().unwrap()[0];
            actions.push((state.to_act, a));
            state.apply_action_in_place(a).unwrap();
        }
        let h = History {
            config,
            deal: state.deal.clone(),
            actions,
        };
        let s = public_state_of(&h).unwrap();
        let beta = enumerate(&s, &policy).unwrap();
        assert_eq!(beta.members.len(), 1);
        assert_eq!(pbs_entropy(&beta), 0.0);
        assert_eq!(pbs_variance(&beta, &policy, 0).unwrap(), 0.0);
        let v = pbs_value(&beta, &policy).unwrap();
        let direct = history_value(&beta.members[0].history, &policy).unwrap();
        assert_eq!(v, direct);
    }
}
