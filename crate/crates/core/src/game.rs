//! Deterministic, seedable Oh Hell engine: world states, legal actions,
//! transitions and utilities.
//!
//! Rules implemented here: sequential public bidding from 0 to the hand
//! size (no dealer restriction), trump fixed by a public upcard, mandatory
//! follow-suit, and scoring of one point per trick won plus a bonus for
//! hitting the bid exactly.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Static parameters of a single Oh Hell hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameConfig {
    #[serde(rename = "players")]
    pub num_players: usize,
    #[serde(rename = "suits")]
    pub num_suits: u8,
    #[serde(rename = "ranks")]
    pub num_ranks: u8,
    pub hand_size: usize,
    #[serde(rename = "bonus", default = "default_bonus")]
    pub scoring_bonus: i64,
}

fn default_bonus() -> i64 {
    10
}

/// Card sets are stored as 64-bit masks, so decks are capped at 64 cards.
/// Real trick-taking decks (52 cards) fit.
pub const MAX_DECK: usize = 64;

impl GameConfig {
    pub fn new(
        num_players: usize,
        num_suits: u8,
        num_ranks: u8,
        hand_size: usize,
        scoring_bonus: i64,
    ) -> Result<Self> {
        let config = GameConfig {
            num_players,
            num_suits,
            num_ranks,
            hand_size,
            scoring_bonus,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_players < 2 {
            return Err(Error::InvalidConfig("need at least 2 players".into()));
        }
        if self.num_suits < 1 {
            return Err(Error::InvalidConfig("need at least 1 suit".into()));
        }
        if self.num_ranks < 2 {
            return Err(Error::InvalidConfig("need at least 2 ranks".into()));
        }
        if self.hand_size < 1 {
            return Err(Error::InvalidConfig("need hand size of at least 1".into()));
        }
        let deck = self.deck_size();
        if deck > MAX_DECK {
            return Err(Error::InvalidConfig(format!(
                "deck of {deck} cards exceeds the supported maximum of {MAX_DECK}"
            )));
        }
        // One card is always reserved as the exposed trump upcard.
        if self.num_players * self.hand_size > deck - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} players x {} cards exceeds the {} dealable cards",
                self.num_players,
                self.hand_size,
                deck - 1
            )));
        }
        Ok(())
    }

    pub fn deck_size(&self) -> usize {
        usize::from(self.num_suits) * usize::from(self.num_ranks)
    }

    /// Number of hidden undealt cards (excludes the public trump upcard).
    pub fn kitty_size(&self) -> usize {
        self.deck_size() - self.num_players * self.hand_size - 1
    }

    pub fn full_deck(&self) -> CardSet {
        CardSet::full(self.deck_size())
    }

    /// Stable digest of the canonical configuration encoding.
    pub fn digest(&self) -> u64 {
        let mut bytes = Vec::with_capacity(20);
        bytes.extend_from_slice(b"CFG1");
        bytes.extend_from_slice(&(self.num_players as u32).to_le_bytes());
        bytes.push(self.num_suits);
        bytes.push(self.num_ranks);
        bytes.extend_from_slice(&(self.hand_size as u32).to_le_bytes());
        bytes.extend_from_slice(&self.scoring_bonus.to_le_bytes());
        crate::rng::fnv1a(&bytes)
    }

    pub fn card_from_index(&self, index: u8) -> Result<Card> {
        if usize::from(index) >= self.deck_size() {
            return Err(Error::MalformedPublicState(format!(
                "card index {index} out of range for a {}-card deck",
                self.deck_size()
            )));
        }
        Ok(Card {
            suit: index / self.num_ranks,
            rank: index % self.num_ranks,
        })
    }
}

/// A playing card. The canonical index `suit * num_ranks + rank` is used in
/// every file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card {
    pub suit: u8,
    pub rank: u8,
}

impl Card {
    pub fn index(&self, config: &GameConfig) -> u8 {
        self.suit * config.num_ranks + self.rank
    }
}

/// Unordered card set backed by a bit mask over canonical card indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CardSet(pub u64);

impl CardSet {
    pub fn empty() -> Self {
        CardSet(0)
    }

    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_DECK);
        if n == 64 {
            CardSet(u64::MAX)
        } else {
            CardSet((1u64 << n) - 1)
        }
    }

    pub fn insert(&mut self, index: u8) {
        self.0 |= 1u64 << index;
    }

    pub fn remove(&mut self, index: u8) {
        self.0 &= !(1u64 << index);
    }

    pub fn contains(&self, index: u8) -> bool {
        self.0 & (1u64 << index) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(&self, other: CardSet) -> CardSet {
        CardSet(self.0 | other.0)
    }

    pub fn difference(&self, other: CardSet) -> CardSet {
        CardSet(self.0 & !other.0)
    }

    pub fn intersection(&self, other: CardSet) -> CardSet {
        CardSet(self.0 & other.0)
    }

    pub fn is_subset_of(&self, other: CardSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint_from(&self, other: CardSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Card indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as u8;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn cards<'a>(&'a self, config: &'a GameConfig) -> impl Iterator<Item = Card> + 'a {
        self.iter().map(|i| Card {
            suit: i / config.num_ranks,
            rank: i % config.num_ranks,
        })
    }

    /// Cards of `suit` contained in this set.
    pub fn of_suit(&self, suit: u8, config: &GameConfig) -> CardSet {
        let lo = u64::from(suit) * u64::from(config.num_ranks);
        let width = u64::from(config.num_ranks);
        let mask = if width == 64 {
            u64::MAX
        } else {
            ((1u64 << width) - 1) << lo
        };
        CardSet(self.0 & mask)
    }
}

impl FromIterator<u8> for CardSet {
    fn from_iter<T: IntoIterator<Item = u8>>(iter: T) -> Self {
        let mut set = CardSet::empty();
        for i in iter {
            set.insert(i);
        }
        set
    }
}

/// The chance outcome: one hand per player, an exposed trump upcard, and
/// the hidden undealt kitty. Hands are unordered sets; together with the
/// upcard and kitty they partition the deck.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Deal {
    pub hands: Vec<CardSet>,
    pub trump_upcard: Card,
    pub kitty: CardSet,
}

impl Deal {
    pub fn validate(&self, config: &GameConfig) -> Result<()> {
        if self.hands.len() != config.num_players {
            return Err(Error::Contract("wrong number of hands".into()));
        }
        let mut seen = CardSet::empty();
        let mut total = 0;
        for hand in &self.hands {
            if hand.len() != config.hand_size {
                return Err(Error::Contract("hand of wrong size".into()));
            }
            if !seen.is_disjoint_from(*hand) {
                return Err(Error::Contract("duplicate card across hands".into()));
            }
            seen = seen.union(*hand);
            total += hand.len();
        }
        let trump_index = self.trump_upcard.index(config);
        if seen.contains(trump_index) || !self.kitty.is_disjoint_from(seen) {
            return Err(Error::Contract("deal does not partition the deck".into()));
        }
        seen.insert(trump_index);
        seen = seen.union(self.kitty);
        total += 1 + self.kitty.len();
        if total != config.deck_size() || seen != config.full_deck() {
            return Err(Error::Contract("deal does not partition the deck".into()));
        }
        Ok(())
    }

    /// Compact canonical encoding: hands joined by '|', card indices by '.',
    /// then '/kitty/trump'. Example: `0.5|2.9|4.6/3/7`.
    pub fn encode(&self, config: &GameConfig) -> String {
        let set_str = |s: &CardSet| {
            s.iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(".")
        };
        format!(
            "{}/{}/{}",
            self.hands.iter().map(&set_str).collect::<Vec<_>>().join("|"),
            set_str(&self.kitty),
            self.trump_upcard.index(config)
        )
    }
}

/// A player decision: a bid, or a card played to the current trick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Bid(usize),
    Play(Card),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Bidding,
    TrickPlay,
    Terminal,
}

/// Full game state, including hidden information. Immutable from the
/// outside: `apply_action` returns a new state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorldState {
    pub config: GameConfig,
    pub deal: Deal,
    pub phase: Phase,
    /// Remaining (unplayed) cards per hand.
    pub hands: Vec<CardSet>,
    pub bids: Vec<Option<usize>>,
    pub current_trick: Vec<(usize, Card)>,
    pub tricks_won: Vec<usize>,
    pub to_act: usize,
    pub trick_leader: usize,
}

impl WorldState {
    /// The post-deal initial state: bidding opens with player 0.
    pub fn from_deal(config: GameConfig, deal: Deal) -> Result<Self> {
        config.validate()?;
        deal.validate(&config)?;
        Ok(WorldState {
            hands: deal.hands.clone(),
            bids: vec![None; config.num_players],
            current_trick: Vec::new(),
            tricks_won: vec![0; config.num_players],
            to_act: 0,
            trick_leader: 0,
            phase: Phase::Bidding,
            config,
            deal,
        })
    }

    pub fn is_terminal(&self) -> bool {
        self.phase == Phase::Terminal
    }

    pub fn trump_suit(&self) -> u8 {
        self.deal.trump_upcard.suit
    }

    /// Suit led in the current trick, if any card is down.
    pub fn led_suit(&self) -> Option<u8> {
        self.current_trick.first().map(|(_, c)| c.suit)
    }

    /// Legal actions for the player to act, in canonical order (bids
    /// ascending, plays ascending by card index).
    pub fn legal_actions(&self) -> Result<Vec<Action>> {
        match self.phase {
            Phase::Bidding => Ok((0..=self.config.hand_size).map(Action::Bid).collect()),
            Phase::TrickPlay => {
                let hand = self.hands[self.to_act];
                let playable = match self.led_suit() {
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
                Ok(playable.cards(&self.config).map(Action::Play).collect())
            }
            Phase::Terminal => Err(Error::Contract(
                "no legal actions in a terminal state".into(),
            )),
        }
    }

    pub fn apply_action(&self, action: Action) -> Result<WorldState> {
        let mut next = self.clone();
        next.apply_action_in_place(action)?;
        Ok(next)
    }

    /// In-place transition; used by replay and enumeration hot paths.
    pub fn apply_action_in_place(&mut self, action: Action) -> Result<()> {
        if !self.legal_actions()?.contains(&action) {
            return Err(Error::Contract(format!(
                "action {action:?} is not legal for player {}",
                self.to_act
            )));
        }
        match action {
            Action::Bid(count) => {
                self.bids[self.to_act] = Some(count);
                if self.to_act + 1 < self.config.num_players {
                    self.to_act += 1;
                } else {
                    self.phase = Phase::TrickPlay;
                    self.to_act = 0;
                    self.trick_leader = 0;
                }
            }
            Action::Play(card) => {
                self.hands[self.to_act].remove(card.index(&self.config));
                self.current_trick.push((self.to_act, card));
                if self.current_trick.len() == self.config.num_players {
                    let winner = trick_winner(&self.current_trick, self.trump_suit())
                        .expect("completed trick has a winner");
                    self.tricks_won[winner] += 1;
                    self.current_trick.clear();
                    self.trick_leader = winner;
                    self.to_act = winner;
                    let played: usize = self.tricks_won.iter().sum();
                    if played == self.config.hand_size {
                        self.phase = Phase::Terminal;
                    }
                } else {
                    self.to_act = (self.to_act + 1) % self.config.num_players;
                }
            }
        }
        Ok(())
    }

    /// Final score vector: tricks won plus the exact-bid bonus.
    pub fn utility(&self) -> Result<Vec<f64>> {
        if self.phase != Phase::Terminal {
            return Err(Error::Contract(
                "utility is only defined at terminal states".into(),
            ));
        }
        Ok(self
            .tricks_won
            .iter()
            .zip(&self.bids)
            .map(|(&won, bid)| {
                let bonus = if *bid == Some(won) {
                    self.config.scoring_bonus as f64
                } else {
                    0.0
                };
                won as f64 + bonus
            })
            .collect())
    }
}

/// Winner of a completed (or partial) trick: highest trump if any trump was
/// played, otherwise highest card of the led suit.
pub fn trick_winner(trick: &[(usize, Card)], trump_suit: u8) -> Option<usize> {
    let (_, led) = *trick.first()?;
    trick
        .iter()
        .filter(|(_, c)| c.suit == trump_suit)
        .max_by_key(|(_, c)| c.rank)
        .or_else(|| {
            trick
                .iter()
                .filter(|(_, c)| c.suit == led.suit)
                .max_by_key(|(_, c)| c.rank)
        })
        .map(|&(player, _)| player)
}

/// Start a new game with a uniformly random deal.
pub fn new_game(config: GameConfig, rng_seed: u64) -> Result<WorldState> {
    config.validate()?;
    let mut rng = rng::derive_rng(rng_seed, &[0x6465616c]); // "deal" stream
    let mut deck: Vec<u8> = (0..config.deck_size() as u8).collect();
    deck.shuffle(&mut rng);
    let deal = deal_from_order(&config, &deck)?;
    WorldState::from_deal(config, deal)
}

/// Assemble a deal from a shuffled deck order: hands first, then the trump
/// upcard, then the kitty.
pub fn deal_from_order(config: &GameConfig, order: &[u8]) -> Result<Deal> {
    if order.len() != config.deck_size() {
        return Err(Error::Contract("deck order of wrong length".into()));
    }
    let mut at = 0;
    let mut hands = Vec::with_capacity(config.num_players);
    for _ in 0..config.num_players {
        hands.push(order[at..at + config.hand_size].iter().copied().collect());
        at += config.hand_size;
    }
    let trump_upcard = config.card_from_index(order[at])?;
    at += 1;
    let kitty = order[at..].iter().copied().collect();
    Ok(Deal {
        hands,
        trump_upcard,
        kitty,
    })
}

/// Probability of any single deal given the exposed trump upcard: one over
/// the multinomial count of ways to split the remaining deck into the
/// players' hands and the kitty. Constant across deals of the same shape.
pub fn deal_chance_probability(config: &GameConfig) -> Result<BigRational> {
    config.validate()?;
    let remaining = config.deck_size() - 1;
    let mut count = factorial(remaining);
    for _ in 0..config.num_players {
        count /= factorial(config.hand_size);
    }
    count /= factorial(config.kitty_size());
    Ok(BigRational::new(One::one(), count.into()))
}

pub fn factorial(n: usize) -> BigUint {
    let mut acc = BigUint::one();
    for k in 2..=n {
        acc *= BigUint::from(k);
    }
    acc
}

/// A complete trajectory: the chance outcome plus every decision taken,
/// with actor indices. Replaying the actions from the post-deal state must
/// produce only legal transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct History {
    pub config: GameConfig,
    pub deal: Deal,
    pub actions: Vec<(usize, Action)>,
}

impl History {
    /// Validate and replay, returning the final state.
    pub fn replay(&self) -> Result<WorldState> {
        let mut state = WorldState::from_deal(self.config, self.deal.clone())?;
        for &(player, action) in &self.actions {
            if player != state.to_act {
                return Err(Error::Contract(format!(
                    "action recorded for player {player} but player {} is to act",
                    state.to_act
                )));
            }
            state.apply_action_in_place(action)?;
        }
        Ok(state)
    }

    /// Number of chance plus decision steps taken (the deal counts as one
    /// chance step).
    pub fn len(&self) -> usize {
        1 + self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
