//! Full-support joint policies and reach-probability evaluation.
//!
//! Policies are pure functions of the infostate: the favored action of the
//! biased-random family is picked by a stable hash of the canonical
//! infostate encoding, so the same (seed, infostate) pair yields the same
//! distribution in every process.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, Card, CardSet, Deal, GameConfig, History, Phase, WorldState};
use crate::observation::{InfoStateKey, PublicState};
use crate::rng::{derive_rng, mix_seed, splitmix64};

/// Declarative policy description, serializable inside instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PolicySpec {
    Uniform,
    BiasedRandom {
        bias: f64,
        seed: u64,
    },
    TabularQ {
        #[serde(default = "default_episodes")]
        episodes: usize,
        #[serde(default = "default_learning_rate")]
        learning_rate: f64,
        #[serde(default = "default_discount")]
        discount: f64,
        #[serde(default = "default_exploration")]
        exploration: f64,
        #[serde(default = "default_support_floor")]
        support_floor: f64,
        seed: u64,
    },
}

fn default_episodes() -> usize {
    200_000
}
fn default_learning_rate() -> f64 {
    0.1
}
fn default_discount() -> f64 {
    1.0
}
fn default_exploration() -> f64 {
    0.1
}
fn default_support_floor() -> f64 {
    0.05
}

impl PolicySpec {
    /// Build a usable policy. Tabular specs run their training here.
    pub fn materialize(&self, config: &GameConfig) -> Result<Box<dyn Policy>> {
        match *self {
            PolicySpec::Uniform => Ok(Box::new(UniformPolicy)),
            PolicySpec::BiasedRandom { bias, seed } => {
                if !(0.0..1.0).contains(&bias) {
                    return Err(Error::InvalidConfig(format!(
                        "policy bias {bias} outside [0, 1)"
                    )));
                }
                Ok(Box::new(BiasedRandomPolicy::new(bias, seed)))
            }
            PolicySpec::TabularQ {
                episodes,
                learning_rate,
                discount,
                exploration,
                support_floor,
                seed,
            } => {
                let params = TabularQParams {
                    episodes,
                    learning_rate,
                    discount,
                    exploration,
                    support_floor,
                    seed,
                };
                Ok(Box::new(train_q_policies(config, &params)?))
            }
        }
    }
}

/// A distribution over the legal actions of one infostate.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoStateDistribution {
    pub actions: Vec<Action>,
    pub probs: Vec<f64>,
}

impl InfoStateDistribution {
    pub fn new(actions: Vec<Action>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(actions.len(), probs.len());
        debug_assert!(!actions.is_empty());
        debug_assert!(
            (probs.iter().sum::<f64>() - 1.0).abs() < 1e-12,
            "probabilities must sum to 1"
        );
        InfoStateDistribution { actions, probs }
    }

    pub fn probability_of(&self, action: Action) -> f64 {
        self.actions
            .iter()
            .position(|&a| a == action)
            .map_or(0.0, |i| self.probs[i])
    }
}

/// A joint policy: one distribution per infostate, for every player.
/// Implementations must be measurable in the infostate (identical keys give
/// identical distributions) and are expected to keep full support.
pub trait Policy: Send + Sync {
    fn action_distribution(
        &self,
        key: &InfoStateKey,
        legal: &[Action],
    ) -> InfoStateDistribution;

    /// Probability of one action; overridden by implementations that can
    /// answer without materializing the full distribution.
    fn action_probability(&self, key: &InfoStateKey, legal: &[Action], action: Action) -> f64 {
        self.action_distribution(key, legal).probability_of(action)
    }
}

/// Uniform over legal actions.
pub struct UniformPolicy;

impl Policy for UniformPolicy {
    fn action_distribution(
        &self,
        _key: &InfoStateKey,
        legal: &[Action],
    ) -> InfoStateDistribution {
        let p = 1.0 / legal.len() as f64;
        InfoStateDistribution::new(legal.to_vec(), vec![p; legal.len()])
    }

    fn action_probability(&self, _key: &InfoStateKey, legal: &[Action], _action: Action) -> f64 {
        1.0 / legal.len() as f64
    }
}

/// Places `bias` probability on a hash-chosen favored action and spreads
/// the remainder uniformly over the other legal actions. Bias 0 degenerates
/// to the uniform policy.
pub struct BiasedRandomPolicy {
    bias: f64,
    seed: u64,
}

impl BiasedRandomPolicy {
    pub fn new(bias: f64, seed: u64) -> Self {
        debug_assert!((0.0..1.0).contains(&bias));
        BiasedRandomPolicy { bias, seed }
    }

    fn favored_index(&self, key: &InfoStateKey, num_legal: usize) -> usize {
        let h = splitmix64(key.digest() ^ splitmix64(self.seed ^ 0x62696173)); // "bias"
        ((u128::from(h) * num_legal as u128) >> 64) as usize
    }

    fn prob_at(&self, favored: usize, index: usize, k: usize) -> f64 {
        if k == 1 {
            1.0
        } else if self.bias == 0.0 {
            1.0 / k as f64
        } else if index == favored {
            self.bias
        } else {
            (1.0 - self.bias) / (k - 1) as f64
        }
    }
}

impl Policy for BiasedRandomPolicy {
    fn action_distribution(
        &self,
        key: &InfoStateKey,
        legal: &[Action],
    ) -> InfoStateDistribution {
        let k = legal.len();
        let favored = self.favored_index(key, k);
        let probs = (0..k).map(|i| self.prob_at(favored, i, k)).collect();
        InfoStateDistribution::new(legal.to_vec(), probs)
    }

    fn action_probability(&self, key: &InfoStateKey, legal: &[Action], action: Action) -> f64 {
        let k = legal.len();
        match legal.iter().position(|&a| a == action) {
            Some(index) => self.prob_at(self.favored_index(key, k), index, k),
            None => 0.0,
        }
    }
}

type QKey = (u64, u8, u64);

/// Per-player Q tables with an epsilon-floor mixed greedy policy:
/// `(1 - support_floor) * greedy + support_floor * uniform`, where ties in
/// the greedy set share the greedy mass. Unvisited infostates are uniform.
pub struct TabularQPolicy {
    tables: Vec<HashMap<QKey, Vec<f64>>>,
    support_floor: f64,
    config_digest: u64,
}

impl TabularQPolicy {
    fn greedy_probs(&self, key: &InfoStateKey, num_legal: usize) -> Vec<f64> {
        let floor_share = self.support_floor / num_legal as f64;
        let entry = self.tables[key.player].get(&key.table_key());
        let q: &[f64] = match entry {
            Some(values) => values,
            None => return vec![1.0 / num_legal as f64; num_legal],
        };
        debug_assert_eq!(q.len(), num_legal);
        let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let ties = q.iter().filter(|&&v| v == max).count();
        let greedy_share = (1.0 - self.support_floor) / ties as f64;
        q.iter()
            .map(|&v| {
                if v == max {
                    greedy_share + floor_share
                } else {
                    floor_share
                }
            })
            .collect()
    }

    /// Persist to a versioned binary file tagged with the config digest.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(b"TTCGQ001");
        out.extend_from_slice(&self.config_digest.to_le_bytes());
        out.extend_from_slice(&self.support_floor.to_le_bytes());
        out.extend_from_slice(&(self.tables.len() as u32).to_le_bytes());
        for table in &self.tables {
            out.extend_from_slice(&(table.len() as u64).to_le_bytes());
            let mut keys: Vec<&QKey> = table.keys().collect();
            keys.sort();
            for key in keys {
                let values = &table[key];
                out.extend_from_slice(&key.0.to_le_bytes());
                out.push(key.1);
                out.extend_from_slice(&key.2.to_le_bytes());
                out.extend_from_slice(&(values.len() as u32).to_le_bytes());
                for v in values {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(&out))
            .map_err(|e| Error::Contract(format!("cannot write q table: {e}")))
    }

    pub fn load(path: &Path, config: &GameConfig) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::Contract(format!("cannot read q table: {e}")))?;
        let mut at = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            if at + n > bytes.len() {
                return Err(Error::Contract("truncated q table file".into()));
            }
            let slice = &bytes[at..at + n];
            at += n;
            Ok(slice)
        };
        if take(8)? != b"TTCGQ001" {
            return Err(Error::Contract("unrecognized q table format".into()));
        }
        let digest = u64::from_le_bytes(take(8)?.try_into().unwrap());
        if digest != config.digest() {
            return Err(Error::Contract(
                "q table was trained for a different configuration".into(),
            ));
        }
        let support_floor = f64::from_le_bytes(take(8)?.try_into().unwrap());
        let num_tables = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut tables = Vec::with_capacity(num_tables);
        for _ in 0..num_tables {
            let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
            let mut table = HashMap::with_capacity(count);
            for _ in 0..count {
                let a = u64::from_le_bytes(take(8)?.try_into().unwrap());
                let b = take(1)?[0];
                let c = u64::from_le_bytes(take(8)?.try_into().unwrap());
                let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
                let mut values = Vec::with_capacity(len);
                for _ in 0..len {
                    values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
                }
                table.insert((a, b, c), values);
            }
            tables.push(table);
        }
        Ok(TabularQPolicy {
            tables,
            support_floor,
            config_digest: digest,
        })
    }
}

impl Policy for TabularQPolicy {
    fn action_distribution(
        &self,
        key: &InfoStateKey,
        legal: &[Action],
    ) -> InfoStateDistribution {
        InfoStateDistribution::new(legal.to_vec(), self.greedy_probs(key, legal.len()))
    }

    fn action_probability(&self, key: &InfoStateKey, legal: &[Action], action: Action) -> f64 {
        match legal.iter().position(|&a| a == action) {
            Some(index) => self.greedy_probs(key, legal.len())[index],
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TabularQParams {
    pub episodes: usize,
    pub learning_rate: f64,
    pub discount: f64,
    pub exploration: f64,
    pub support_floor: f64,
    pub seed: u64,
}

/// Hard cap on total stored Q entries across all players.
pub const Q_TABLE_CAP: usize = 5_000_000;

/// Independent one-step Q-learning by self-play. Each player learns over
/// its own infostates with epsilon-greedy exploration; the reward is the
/// terminal score. The resulting policy keeps full support through the
/// epsilon-floor mix.
pub fn train_q_policies(config: &GameConfig, params: &TabularQParams) -> Result<TabularQPolicy> {
    config.validate()?;
    if !(0.0 < params.support_floor && params.support_floor <= 1.0) {
        return Err(Error::InvalidConfig(
            "support floor must lie in (0, 1]".into(),
        ));
    }
    let mut tables: Vec<HashMap<QKey, Vec<f64>>> = vec![HashMap::new(); config.num_players];
    let mut rng = derive_rng(params.seed, &[0x71747261]); // "qtra"
    let alpha = params.learning_rate;

    for episode in 0..params.episodes {
        let mut state = crate::game::new_game(*config, mix_seed(params.seed, &[1, episode as u64]))?;
        let mut public = PublicState::new(*config, state.deal.trump_upcard)?;
        // Last (key, action index, estimate target hook) per player.
        let mut pending: Vec<Option<(QKey, usize)>> = vec![None; config.num_players];

        while !state.is_terminal() {
            let player = state.to_act;
            let legal = state.legal_actions()?;
            let key = InfoStateKey {
                public: &public,
                player,
                hand: state.hands[player],
            };
            let table_key = key.table_key();
            let q_len = legal.len();
            let max_next = {
                let entry = tables[player].get(&table_key);
                entry
                    .map(|q| q.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
                    .unwrap_or(0.0)
            };
            // One-step update for this player's previous decision.
            if let Some((prev_key, prev_index)) = pending[player].take() {
                let q = tables[player].get_mut(&prev_key).expect("pending entry");
                q[prev_index] += alpha * (params.discount * max_next - q[prev_index]);
            }
            let entry = tables[player]
                .entry(table_key)
                .or_insert_with(|| vec![0.0; q_len]);
            let chosen = if rng.gen::<f64>() < params.exploration {
                rng.gen_range(0..q_len)
            } else {
                let max = entry.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                entry.iter().position(|&v| v == max).unwrap_or(0)
            };
            pending[player] = Some((table_key, chosen));

            let action = legal[chosen];
            match action {
                Action::Bid(b) => public.push_bid(b),
                Action::Play(c) => public.push_play(player, c),
            }
            state.apply_action_in_place(action)?;
        }
        let utility = state.utility()?;
        for (player, slot) in pending.iter().enumerate() {
            if let Some((prev_key, prev_index)) = slot {
                let q = tables[player].get_mut(prev_key).expect("pending entry");
                q[*prev_index] += alpha * (utility[player] - q[*prev_index]);
            }
        }
        let total: usize = tables.iter().map(HashMap::len).sum();
        if total > Q_TABLE_CAP {
            return Err(Error::ResourceLimit(format!(
                "q table grew past {Q_TABLE_CAP} entries"
            )));
        }
    }

    Ok(TabularQPolicy {
        tables,
        support_floor: params.support_floor,
        config_digest: config.digest(),
    })
}

/// Draw an action from a distribution.
pub fn sample_action<R: Rng>(dist: &InfoStateDistribution, rng: &mut R) -> Action {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (action, &p) in dist.actions.iter().zip(&dist.probs) {
        acc += p;
        if u < acc {
            return *action;
        }
    }
    *dist.actions.last().expect("non-empty distribution")
}

/// Log of the unnormalized reach probability of `h`: the sum over decision
/// steps of the log probability the acting player assigns to the recorded
/// action. The constant chance factor is omitted; it cancels in every ratio
/// taken over a fixed public state.
pub fn unnormalized_reach(h: &History, policy: &dyn Policy) -> Result<f64> {
    let mut state = WorldState::from_deal(h.config, h.deal.clone())?;
    let mut public = PublicState::new(h.config, h.deal.trump_upcard)?;
    let mut log_reach = 0.0;
    for &(player, action) in &h.actions {
        if player != state.to_act {
            return Err(Error::Contract("actor out of turn in history".into()));
        }
        let legal = state.legal_actions()?;
        let key = InfoStateKey {
            public: &public,
            player,
            hand: state.hands[player],
        };
        let p = policy.action_probability(&key, &legal, action);
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_reach += p.ln();
        match action {
            Action::Bid(b) => public.push_bid(b),
            Action::Play(c) => public.push_play(player, c),
        }
        state.apply_action_in_place(action)?;
    }
    Ok(log_reach)
}

enum ReachStep {
    Bid { actor: usize, bid: usize },
    Play { actor: usize, card: Card, led: Option<u8> },
}

/// Precomputed reach evaluation for one public state: the decision
/// sequence, per-step public prefixes, and led suits are deal-independent,
/// so evaluating a candidate deal touches only that deal's hands.
pub struct ReachEvaluator {
    config: GameConfig,
    prefixes: Vec<PublicState>,
    steps: Vec<ReachStep>,
}

impl ReachEvaluator {
    pub fn new(public: &PublicState) -> ReachEvaluator {
        let config = *public.config();
        let mut prefixes = Vec::with_capacity(public.bids().len() + public.plays().len());
        let mut steps = Vec::with_capacity(prefixes.capacity());
        let mut prefix = PublicState::new(config, public.trump_upcard()).expect("valid public");
        for (actor, &bid) in public.bids().iter().enumerate() {
            prefixes.push(prefix.clone());
            steps.push(ReachStep::Bid { actor, bid });
            prefix.push_bid(bid);
        }
        for (at, &(actor, card)) in public.plays().iter().enumerate() {
            let trick_offset = at % config.num_players;
            let led = if trick_offset == 0 {
                None
            } else {
                Some(public.plays()[at - trick_offset].1.suit)
            };
            prefixes.push(prefix.clone());
            steps.push(ReachStep::Play { actor, card, led });
            prefix.push_play(actor, card);
        }
        ReachEvaluator {
            config,
            prefixes,
            steps,
        }
    }

    /// Log unnormalized reach of the history formed by `deal` under the
    /// fixed public action sequence.
    pub fn log_reach(&self, deal: &Deal, policy: &dyn Policy) -> f64 {
        let mut hands = deal.hands.clone();
        let mut log_reach = 0.0;
        let mut legal: Vec<Action> = Vec::with_capacity(self.config.hand_size + 1);
        for (step, prefix) in self.steps.iter().zip(&self.prefixes) {
            match *step {
                ReachStep::Bid { actor, bid } => {
                    legal.clear();
                    legal.extend((0..=self.config.hand_size).map(Action::Bid));
                    let key = InfoStateKey {
                        public: prefix,
                        player: actor,
                        hand: hands[actor],
                    };
                    let p = policy.action_probability(&key, &legal, Action::Bid(bid));
                    if p <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    log_reach += p.ln();
                }
                ReachStep::Play { actor, card, led } => {
                    let hand = hands[actor];
                    let playable = match led {
                        Some(suit) => {
                            let follow = hand.of_suit(suit, &self.config);
                            if follow.is_empty() {
                                hand
                            } else {
                                follow
                            }
                        }
                        None => hand,
                    };
                    legal.clear();
                    legal.extend(playable.cards(&self.config).map(Action::Play));
                    let key = InfoStateKey {
                        public: prefix,
                        player: actor,
                        hand,
                    };
                    let p = policy.action_probability(&key, &legal, Action::Play(card));
                    if p <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    log_reach += p.ln();
                    hands[actor].remove(card.index(&self.config));
                }
            }
        }
        log_reach
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{new_game, GameConfig};
    use crate::observation::public_state_of;

    fn small() -> GameConfig {
        GameConfig::new(3, 2, 4, 2, 10).unwrap()
    }

    fn key_at<'a>(public: &'a PublicState, state: &WorldState) -> InfoStateKey<'a> {
        InfoStateKey {
            public,
            player: state.to_act,
            hand: state.hands[state.to_act],
        }
    }

    #[test]
    fn biased_distribution_shape() {
        // bias 0.9 over 4 legal actions: favored 0.9, others 1/30 each.
        let config = GameConfig::new(3, 3, 4, 3, 10).unwrap();
        let state = new_game(config, 4).unwrap();
        let public = PublicState::new(config, state.deal.trump_upcard).unwrap();
        let legal = state.legal_actions().unwrap();
        assert_eq!(legal.len(), 4);
        let policy = BiasedRandomPolicy::new(0.9, 7);
        let dist = policy.action_distribution(&key_at(&public, &state), &legal);
        let mut sorted = dist.probs.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[3] - 0.9).abs() < 1e-15);
        for p in &sorted[..3] {
            assert!((p - 1.0 / 30.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_bias_is_uniform() {
        let config = small();
        let state = new_game(config, 4).unwrap();
        let public = PublicState::new(config, state.deal.trump_upcard).unwrap();
        let legal = state.legal_actions().unwrap();
        let policy = BiasedRandomPolicy::new(0.0, 7);
        let dist = policy.action_distribution(&key_at(&public, &state), &legal);
        for p in &dist.probs {
            assert!((p - 1.0 / legal.len() as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn same_key_same_distribution() {
        let config = small();
        let state = new_game(config, 4).unwrap();
        let public = PublicState::new(config, state.deal.trump_upcard).unwrap();
        let legal = state.legal_actions().unwrap();
        let policy = BiasedRandomPolicy::new(0.7, 21);
        let a = policy.action_distribution(&key_at(&public, &state), &legal);
        let b = policy.action_distribution(&key_at(&public, &state), &legal);
        assert_eq!(a, b);
    }

    #[test]
    fn reach_of_bare_deal_is_zero_log() {
        let config = small();
        let state = new_game(config, 4).unwrap();
        let h = History {
            config,
            deal: state.deal.clone(),
            actions: vec![],
        };
        let reach = unnormalized_reach(&h, &UniformPolicy).unwrap();
        assert_eq!(reach, 0.0);
    }

    #[test]
    fn uniform_reach_is_product_of_counts() {
        // Three bid decisions with 3 legal bids each under hand size 2:
        // reach = (1/3)^3.
        let config = small();
        let mut state = new_game(config, 4).unwrap();
        let mut actions = Vec::new();
        for _ in 0..3 {
            let a = state.legal_actions().unwrap()[0];
            actions.push((state.to_act, a));
            state.apply_action_in_place(a).unwrap();
        }
        let h = History {
            config,
            deal: state.deal.clone(),
            actions,
        };
        let reach = unnormalized_reach(&h, &UniformPolicy).unwrap();
        assert!((reach - (1.0f64 / 27.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn reach_evaluator_matches_replay_path() {
        let config = small();
        let policy = BiasedRandomPolicy::new(0.7, 3);
        for seed in 0..20 {
            let mut state = new_game(config, seed).unwrap();
            let mut actions = Vec::new();
            let mut rng = derive_rng(seed, &[5]);
            let mut public = PublicState::new(config, state.deal.trump_upcard).unwrap();
            for _ in 0..6 {
                let legal = state.legal_actions().unwrap();
                let key = InfoStateKey {
                    public: &public,
                    player: state.to_act,
                    hand: state.hands[state.to_act],
                };
                let action = sample_action(&policy.action_distribution(&key, &legal), &mut rng);
                actions.push((state.to_act, action));
                match action {
                    Action::Bid(b) => public.push_bid(b),
                    Action::Play(c) => public.push_play(state.to_act, c),
                }
                state.apply_action_in_place(action).unwrap();
            }
            let h = History {
                config,
                deal: state.deal.clone(),
                actions,
            };
            let s = public_state_of(&h).unwrap();
            let slow = unnormalized_reach(&h, &policy).unwrap();
            let fast = ReachEvaluator::new(&s).log_reach(&h.deal, &policy);
            assert!((slow - fast).abs() < 1e-12, "seed {seed}: {slow} vs {fast}");
        }
    }

    #[test]
    fn zero_episode_q_policy_is_uniform() {
        let config = small();
        let params = TabularQParams {
            episodes: 0,
            learning_rate: 0.1,
            discount: 1.0,
            exploration: 0.1,
            support_floor: 0.05,
            seed: 1,
        };
        let policy = train_q_policies(&config, &params).unwrap();
        let state = new_game(config, 4).unwrap();
        let public = PublicState::new(config, state.deal.trump_upcard).unwrap();
        let legal = state.legal_actions().unwrap();
        let dist = policy.action_distribution(&key_at(&public, &state), &legal);
        for p in &dist.probs {
            assert!((p - 1.0 / legal.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn q_policy_keeps_full_support() {
        let config = GameConfig::new(2, 1, 3, 1, 10).unwrap();
        let params = TabularQParams {
            episodes: 2_000,
            learning_rate: 0.2,
            discount: 1.0,
            exploration: 0.2,
            support_floor: 0.05,
            seed: 3,
        };
        let policy = train_q_policies(&config, &params).unwrap();
        let state = new_game(config, 11).unwrap();
        let public = PublicState::new(config, state.deal.trump_upcard).unwrap();
        let legal = state.legal_actions().unwrap();
        let dist = policy.action_distribution(&key_at(&public, &state), &legal);
        for p in &dist.probs {
            assert!(*p > 0.0);
        }
        assert!((dist.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_table_round_trips_through_file() {
        let config = small();
        let params = TabularQParams {
            episodes: 200,
            learning_rate: 0.1,
            discount: 1.0,
            exploration: 0.1,
            support_floor: 0.05,
            seed: 5,
        };
        let policy = train_q_policies(&config, &params).unwrap();
        let dir = std::env::temp_dir().join("ttcg_filter_qtable_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("q.bin");
        policy.save(&path).unwrap();
        let loaded = TabularQPolicy::load(&path, &config).unwrap();
        assert_eq!(policy.tables, loaded.tables);

        let other = GameConfig::new(3, 3, 4, 3, 10).unwrap();
        assert!(TabularQPolicy::load(&path, &other).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn single_action_infostate_gets_probability_one() {
        let config = small();
        let state = new_game(config, 4).unwrap();
        let public = PublicState::new(config, state.deal.trump_upcard).unwrap();
        let legal = vec![Action::Bid(0)];
        let policy = BiasedRandomPolicy::new(0.9, 7);
        let dist = policy.action_distribution(&key_at(&public, &state), &legal);
        assert_eq!(dist.probs, vec![1.0]);
    }
}
