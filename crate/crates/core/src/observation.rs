//! Public states, infostates, and the deal constraints extracted from them.
//!
//! A public state is everything every player can see: the trump upcard, the
//! bid sequence, and every card played with its seat. Constraint extraction
//! is a single pass over the play sequence producing, per holder, how many
//! unknown cards it holds and which suits it provably cannot hold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{trick_winner, Action, Card, CardSet, Deal, GameConfig, History};
use crate::policy::Policy;
use crate::rng::{fnv1a, fnv1a_continue};

/// The shared observation sequence. Equality and hashing are structural;
/// `digest` is an incrementally maintained FNV-1a over the canonical
/// encoding and changes in lockstep with the fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PublicStateRepr", into = "PublicStateRepr")]
pub struct PublicState {
    config: GameConfig,
    trump_upcard: Card,
    bids: Vec<usize>,
    plays: Vec<(usize, Card)>,
    hand_counts: Vec<usize>,
    digest: u64,
}

impl PublicState {
    pub fn new(config: GameConfig, trump_upcard: Card) -> Result<Self> {
        config.validate()?;
        if trump_upcard.suit >= config.num_suits || trump_upcard.rank >= config.num_ranks {
            return Err(Error::MalformedPublicState(
                "trump upcard outside the deck".into(),
            ));
        }
        let mut bytes = Vec::with_capacity(16);
        bytes.extend_from_slice(b"PUB1");
        bytes.extend_from_slice(&(config.num_players as u32).to_le_bytes());
        bytes.push(config.num_suits);
        bytes.push(config.num_ranks);
        bytes.extend_from_slice(&(config.hand_size as u32).to_le_bytes());
        bytes.extend_from_slice(&config.scoring_bonus.to_le_bytes());
        bytes.push(trump_upcard.index(&config));
        Ok(PublicState {
            hand_counts: vec![config.hand_size; config.num_players],
            bids: Vec::new(),
            plays: Vec::new(),
            digest: fnv1a(&bytes),
            config,
            trump_upcard,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn trump_upcard(&self) -> Card {
        self.trump_upcard
    }

    pub fn bids(&self) -> &[usize] {
        &self.bids
    }

    pub fn plays(&self) -> &[(usize, Card)] {
        &self.plays
    }

    /// Cards still held per player: hand size minus cards played.
    pub fn hand_counts(&self) -> &[usize] {
        &self.hand_counts
    }

    /// Digest of the canonical encoding; stable across processes.
    pub fn digest(&self) -> u64 {
        self.digest
    }

    pub fn push_bid(&mut self, bid: usize) {
        debug_assert!(self.bids.len() < self.config.num_players);
        debug_assert!(bid <= self.config.hand_size);
        self.digest = fnv1a_continue(self.digest, &[0x01, bid as u8]);
        self.bids.push(bid);
    }

    pub fn push_play(&mut self, player: usize, card: Card) {
        debug_assert!(player < self.config.num_players);
        debug_assert!(self.hand_counts[player] > 0);
        self.digest = fnv1a_continue(
            self.digest,
            &[0x02, player as u8, card.index(&self.config)],
        );
        self.plays.push((player, card));
        self.hand_counts[player] -= 1;
    }

    /// Undo the most recent `push_play`, restoring the saved digest.
    /// Used by game-tree recursions that extend and retract the public
    /// state in place.
    pub fn pop_play(&mut self, saved_digest: u64) {
        let (player, _) = self.plays.pop().expect("pop_play without a play");
        self.hand_counts[player] += 1;
        self.digest = saved_digest;
    }

    /// Undo the most recent `push_bid`, restoring the saved digest.
    pub fn pop_bid(&mut self, saved_digest: u64) {
        self.bids.pop().expect("pop_bid without a bid");
        self.digest = saved_digest;
    }

    /// Every card visible to all players: the upcard plus all plays.
    pub fn placed_cards(&self) -> CardSet {
        let mut placed = CardSet::empty();
        placed.insert(self.trump_upcard.index(&self.config));
        for (_, card) in &self.plays {
            placed.insert(card.index(&self.config));
        }
        placed
    }
}

#[derive(Serialize, Deserialize)]
struct PublicStateRepr {
    config: GameConfig,
    trump: u8,
    bids: Vec<usize>,
    plays: Vec<(usize, u8)>,
}

impl From<PublicState> for PublicStateRepr {
    fn from(s: PublicState) -> Self {
        PublicStateRepr {
            trump: s.trump_upcard.index(&s.config),
            bids: s.bids.clone(),
            plays: s
                .plays
                .iter()
                .map(|&(p, c)| (p, c.index(&s.config)))
                .collect(),
            config: s.config,
        }
    }
}

impl TryFrom<PublicStateRepr> for PublicState {
    type Error = Error;

    fn try_from(repr: PublicStateRepr) -> Result<Self> {
        let config = repr.config;
        let mut state = PublicState::new(config, config.card_from_index(repr.trump)?)?;
        if repr.bids.len() > config.num_players {
            return Err(Error::MalformedPublicState("too many bids".into()));
        }
        for bid in repr.bids {
            if bid > config.hand_size {
                return Err(Error::MalformedPublicState(format!(
                    "bid {bid} exceeds hand size"
                )));
            }
            state.push_bid(bid);
        }
        for (player, card_index) in repr.plays {
            if player >= config.num_players {
                return Err(Error::MalformedPublicState(format!(
                    "player index {player} out of range"
                )));
            }
            if state.hand_counts[player] == 0 {
                return Err(Error::MalformedPublicState(format!(
                    "player {player} plays more cards than dealt"
                )));
            }
            state.push_play(player, config.card_from_index(card_index)?);
        }
        Ok(state)
    }
}

/// Everything one player knows: the public state plus their private hand.
#[derive(Debug, Clone, Copy)]
pub struct InfoStateKey<'a> {
    pub public: &'a PublicState,
    pub player: usize,
    pub hand: CardSet,
}

impl InfoStateKey<'_> {
    /// Stable digest of the canonical infostate encoding.
    pub fn digest(&self) -> u64 {
        let mut bytes = [0u8; 10];
        bytes[0] = 0x03;
        bytes[1] = self.player as u8;
        bytes[2..].copy_from_slice(&self.hand.0.to_le_bytes());
        fnv1a_continue(self.public.digest, &bytes)
    }

    /// Compact lookup key for tabular policies.
    pub fn table_key(&self) -> (u64, u8, u64) {
        (self.public.digest, self.player as u8, self.hand.0)
    }
}

/// Deterministic projection of a history onto what everyone saw.
/// Validates the history by replay: two histories differing only in hidden
/// deal cards map to equal public states.
pub fn public_state_of(h: &History) -> Result<PublicState> {
    h.replay()?;
    let mut public = PublicState::new(h.config, h.deal.trump_upcard)?;
    for &(player, action) in &h.actions {
        match action {
            Action::Bid(bid) => public.push_bid(bid),
            Action::Play(card) => public.push_play(player, card),
        }
    }
    Ok(public)
}

/// Assemble the history whose deal is `deal` and whose decision sequence is
/// exactly the public record of `public`. The caller is responsible for the
/// deal being consistent; the result replays legally iff it is.
pub fn history_with_deal(public: &PublicState, deal: Deal) -> History {
    let mut actions = Vec::with_capacity(public.bids.len() + public.plays.len());
    for (player, &bid) in public.bids.iter().enumerate() {
        actions.push((player, Action::Bid(bid)));
    }
    for &(player, card) in &public.plays {
        actions.push((player, Action::Play(card)));
    }
    History {
        config: public.config,
        deal,
        actions,
    }
}

/// The FILTER predicate: true iff `h` is a legal history, its public
/// projection equals `S`, and it is reachable under `policy`. Costs O(|h|)
/// policy and observation evaluations.
pub fn verify_consistency(s: &PublicState, h: &History, policy: &dyn Policy) -> bool {
    let projected = match public_state_of(h) {
        Ok(p) => p,
        Err(_) => return false,
    };
    if projected != *s {
        return false;
    }
    match crate::policy::unnormalized_reach(h, policy) {
        Ok(log_reach) => log_reach > f64::NEG_INFINITY,
        Err(_) => false,
    }
}

/// Deal constraints read off a public state: per-holder unknown-card
/// counts, per-suit unknown pools, and the void mask. Rows are the players
/// in seat order followed by the kitty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSummary {
    pub config: GameConfig,
    pub trump_upcard: Card,
    /// Unknown cards each row must hold; players then kitty.
    pub unknown_per_row: Vec<usize>,
    /// Per suit, the cards not publicly placed.
    pub unknown_pool: Vec<CardSet>,
    /// `void_mask[row][suit]`: the row provably holds no unknown card of
    /// that suit. The kitty row is never void.
    pub void_mask: Vec<Vec<bool>>,
    /// Cards each player has revealed by playing them.
    pub forced_cards: Vec<CardSet>,
}

impl ConstraintSummary {
    pub fn num_rows(&self) -> usize {
        self.config.num_players + 1
    }

    pub fn kitty_row(&self) -> usize {
        self.config.num_players
    }

    pub fn pool_sizes(&self) -> Vec<usize> {
        self.unknown_pool.iter().map(CardSet::len).collect()
    }

    pub fn total_unknown(&self) -> usize {
        self.unknown_pool.iter().map(CardSet::len).sum()
    }
}

/// Single pass over the observation sequence.
///
/// A follower who does not follow the led suit is marked void in it from
/// that trick onward. Structural breakage (duplicate cards, bad indices,
/// over-long sequences) is `MalformedPublicState`; sequences that are
/// well-formed but provably not producible by any legal game (broken seat
/// rotation, a void suit played later) are `InconsistentPublicState`.
pub fn extract_constraints(s: &PublicState) -> Result<ConstraintSummary> {
    let config = *s.config();
    let num_players = config.num_players;

    if s.bids.len() > num_players {
        return Err(Error::MalformedPublicState("too many bids".into()));
    }
    for &bid in &s.bids {
        if bid > config.hand_size {
            return Err(Error::MalformedPublicState("bid exceeds hand size".into()));
        }
    }
    if !s.plays.is_empty() && s.bids.len() < num_players {
        return Err(Error::MalformedPublicState(
            "plays recorded before bidding finished".into(),
        ));
    }
    if s.plays.len() > num_players * config.hand_size {
        return Err(Error::MalformedPublicState("too many plays".into()));
    }

    let mut placed = CardSet::empty();
    placed.insert(s.trump_upcard.index(&config));
    let mut forced_cards = vec![CardSet::empty(); num_players];
    let mut void_mask = vec![vec![false; usize::from(config.num_suits)]; num_players + 1];
    let mut leader = 0usize;

    for trick in s.plays.chunks(num_players) {
        let led_suit = trick[0].1.suit;
        for (offset, &(player, card)) in trick.iter().enumerate() {
            if player >= num_players {
                return Err(Error::MalformedPublicState(
                    "player index out of range".into(),
                ));
            }
            if player != (leader + offset) % num_players {
                return Err(Error::InconsistentPublicState(format!(
                    "player {player} plays out of seat order"
                )));
            }
            if card.suit >= config.num_suits || card.rank >= config.num_ranks {
                return Err(Error::MalformedPublicState("card outside the deck".into()));
            }
            let index = card.index(&config);
            if placed.contains(index) {
                return Err(Error::MalformedPublicState(format!(
                    "card {index} placed twice"
                )));
            }
            if void_mask[player][usize::from(card.suit)] {
                return Err(Error::InconsistentPublicState(format!(
                    "player {player} plays suit {} after showing void in it",
                    card.suit
                )));
            }
            if card.suit != led_suit {
                // Can only happen for followers; the leader defines the suit.
                void_mask[player][usize::from(led_suit)] = true;
            }
            placed.insert(index);
            forced_cards[player].insert(index);
            if forced_cards[player].len() > config.hand_size {
                return Err(Error::MalformedPublicState(format!(
                    "player {player} plays more cards than dealt"
                )));
            }
        }
        if trick.len() == num_players {
            leader = trick_winner(trick, s.trump_upcard.suit)
                .expect("non-empty trick has a winner");
        }
    }

    let unknown_pool: Vec<CardSet> = (0..config.num_suits)
        .map(|suit| config.full_deck().of_suit(suit, &config).difference(placed))
        .collect();
    let mut unknown_per_row: Vec<usize> = s.hand_counts.clone();
    unknown_per_row.push(config.kitty_size());

    Ok(ConstraintSummary {
        config,
        trump_upcard: s.trump_upcard,
        unknown_per_row,
        unknown_pool,
        void_mask,
        forced_cards,
    })
}
