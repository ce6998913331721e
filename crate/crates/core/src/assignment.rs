//! Suit-length assignment matrices, ring-swap neighbor generation, and
//! exact counting and uniform sampling of the concrete deals realizing an
//! assignment.
//!
//! An assignment gives, per holder (players then kitty) and per suit, how
//! many unknown cards of that suit the holder was dealt. Row sums are the
//! holders' unknown-card counts, column sums the per-suit unknown pools,
//! and void cells are pinned to zero.

use std::collections::{HashSet, VecDeque};

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{factorial, CardSet, Deal};
use crate::observation::ConstraintSummary;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuitLengthMatrix {
    /// `entries[row][suit]`, rows are players then kitty.
    pub entries: Vec<Vec<u32>>,
    pub row_sums: Vec<u32>,
    pub col_sums: Vec<u32>,
    pub void_mask: Vec<Vec<bool>>,
}

impl SuitLengthMatrix {
    pub fn num_rows(&self) -> usize {
        self.entries.len()
    }

    pub fn num_suits(&self) -> usize {
        self.col_sums.len()
    }

    /// Row/column sums and void cells all satisfied.
    pub fn is_valid(&self) -> bool {
        let rows_ok = self
            .entries
            .iter()
            .zip(&self.row_sums)
            .all(|(row, &sum)| row.iter().sum::<u32>() == sum);
        let cols_ok = (0..self.num_suits()).all(|j| {
            self.entries.iter().map(|row| row[j]).sum::<u32>() == self.col_sums[j]
        });
        let voids_ok = self
            .entries
            .iter()
            .zip(&self.void_mask)
            .all(|(row, voids)| row.iter().zip(voids).all(|(&e, &v)| !v || e == 0));
        rows_ok && cols_ok && voids_ok
    }
}

/// Count unknown cards per holder and suit under a concrete deal.
pub fn matrix_of(deal: &Deal, c: &ConstraintSummary) -> Result<SuitLengthMatrix> {
    let config = &c.config;
    let num_suits = usize::from(config.num_suits);
    let mut entries = vec![vec![0u32; num_suits]; c.num_rows()];

    for (player, hand) in deal.hands.iter().enumerate() {
        if !c.forced_cards[player].is_subset_of(*hand) {
            return Err(Error::Contract(format!(
                "player {player} lacks a card they publicly played"
            )));
        }
        let unknown = hand.difference(c.forced_cards[player]);
        for suit in 0..num_suits {
            let in_suit = unknown.of_suit(suit as u8, config);
            if !in_suit.is_subset_of(c.unknown_pool[suit]) {
                return Err(Error::Contract(
                    "deal assigns a publicly placed card as unknown".into(),
                ));
            }
            entries[player][suit] = in_suit.len() as u32;
        }
    }
    for suit in 0..num_suits {
        let in_suit = deal.kitty.of_suit(suit as u8, config);
        if !in_suit.is_subset_of(c.unknown_pool[suit]) {
            return Err(Error::Contract(
                "kitty holds a publicly placed card".into(),
            ));
        }
        entries[c.kitty_row()][suit] = in_suit.len() as u32;
    }

    let matrix = SuitLengthMatrix {
        entries,
        row_sums: c.unknown_per_row.iter().map(|&n| n as u32).collect(),
        col_sums: c.pool_sizes().iter().map(|&n| n as u32).collect(),
        void_mask: c.void_mask.clone(),
    };
    if !matrix.is_valid() {
        return Err(Error::Contract(
            "deal is inconsistent with the extracted constraints".into(),
        ));
    }
    Ok(matrix)
}

/// All valid assignments reachable from `a` by one ring swap: an initial
/// swap inside one row followed by a shortest sequence of corrective swaps
/// through other rows (each row at most once) that restores the column
/// sums. The input matrix itself is excluded.
pub fn ring_swap(a: &SuitLengthMatrix) -> Vec<SuitLengthMatrix> {
    debug_assert!(a.is_valid());
    let rows = a.num_rows();
    let cols = a.num_suits();
    let mut found: HashSet<Vec<Vec<u32>>> = HashSet::new();

    for i in 0..rows {
        for j in 0..cols {
            for k in 0..cols {
                if j == k || a.void_mask[i][j] || a.void_mask[i][k] || a.entries[i][k] == 0 {
                    continue;
                }
                let mut grid = a.entries.clone();
                grid[i][j] += 1;
                grid[i][k] -= 1;
                // Column j now has one card too many and column k one too
                // few; repair through the other rows.
                collect_repairs(a, grid, 1u64 << i, j, k, &mut found);
            }
        }
    }
    found.remove(&a.entries);
    let mut neighbors: Vec<SuitLengthMatrix> = found
        .into_iter()
        .map(|entries| SuitLengthMatrix {
            entries,
            row_sums: a.row_sums.clone(),
            col_sums: a.col_sums.clone(),
            void_mask: a.void_mask.clone(),
        })
        .collect();
    neighbors.sort_by(|x, y| x.entries.cmp(&y.entries));
    neighbors
}

/// Breadth-first expansion of corrective swap sequences. `surplus` is the
/// column currently holding one extra card; `deficit` never changes.
fn collect_repairs(
    a: &SuitLengthMatrix,
    grid: Vec<Vec<u32>>,
    used_rows: u64,
    surplus: usize,
    deficit: usize,
    found: &mut HashSet<Vec<Vec<u32>>>,
) {
    let rows = a.num_rows();
    let cols = a.num_suits();
    let mut queue = VecDeque::new();
    queue.push_back((grid, used_rows, surplus));
    while let Some((grid, used_rows, surplus)) = queue.pop_front() {
        if surplus == deficit {
            debug_assert!(SuitLengthMatrix {
                entries: grid.clone(),
                row_sums: a.row_sums.clone(),
                col_sums: a.col_sums.clone(),
                void_mask: a.void_mask.clone(),
            }
            .is_valid());
            found.insert(grid);
            continue;
        }
        for row in 0..rows {
            if used_rows & (1 << row) != 0 || grid[row][surplus] == 0 {
                continue;
            }
            for target in 0..cols {
                if target == surplus || a.void_mask[row][target] {
                    continue;
                }
                let mut next = grid.clone();
                next[row][surplus] -= 1;
                next[row][target] += 1;
                queue.push_back((next, used_rows | (1 << row), target));
            }
        }
    }
}

/// Number of concrete deals realizing an assignment: the product over
/// suits of the multinomial coefficient splitting that suit's unknown pool
/// into the row cell sizes.
pub fn deal_count(a: &SuitLengthMatrix, c: &ConstraintSummary) -> BigUint {
    let mut count = BigUint::one();
    for (suit, pool) in c.unknown_pool.iter().enumerate() {
        count *= factorial(pool.len());
        for row in &a.entries {
            count /= factorial(row[suit] as usize);
        }
    }
    count
}

/// Natural log of a big integer, exact enough for acceptance ratios.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if let Some(f) = x.to_f64() {
        if f.is_finite() && f > 0.0 {
            return f.ln();
        }
    }
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(52);
    let top = (x >> shift).to_f64().expect("52-bit value fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Uniform draw among the `deal_count(a, c)` concrete deals of `a`: per
/// suit, a uniformly random partition of the unknown pool into the row
/// cell sizes, merged with the publicly forced cards.
pub fn sample_deal_in<R: Rng>(a: &SuitLengthMatrix, c: &ConstraintSummary, rng: &mut R) -> Deal {
    let mut row_sets = vec![CardSet::empty(); a.num_rows()];
    let mut scratch: Vec<u8> = Vec::new();
    for (suit, pool) in c.unknown_pool.iter().enumerate() {
        scratch.clear();
        scratch.extend(pool.iter());
        scratch.shuffle(rng);
        let mut at = 0usize;
        for (row, set) in row_sets.iter_mut().enumerate() {
            let take = a.entries[row][suit] as usize;
            for &card in &scratch[at..at + take] {
                set.insert(card);
            }
            at += take;
        }
        debug_assert_eq!(at, scratch.len());
    }
    assemble_deal(&row_sets, c)
}

fn assemble_deal(row_sets: &[CardSet], c: &ConstraintSummary) -> Deal {
    let hands = c
        .forced_cards
        .iter()
        .zip(row_sets)
        .map(|(forced, unknown)| forced.union(*unknown))
        .collect();
    Deal {
        hands,
        trump_upcard: c.trump_upcard,
        kitty: row_sets[c.kitty_row()],
    }
}

/// Every concrete deal realizing `a`, in a deterministic order.
pub fn enumerate_deals_in(a: &SuitLengthMatrix, c: &ConstraintSummary) -> Vec<Deal> {
    let per_suit: Vec<Vec<Vec<CardSet>>> = c
        .unknown_pool
        .iter()
        .enumerate()
        .map(|(suit, pool)| {
            let sizes: Vec<usize> = a.entries.iter().map(|row| row[suit] as usize).collect();
            let items: Vec<u8> = pool.iter().collect();
            let mut splits = Vec::new();
            let mut current = vec![CardSet::empty(); sizes.len()];
            split_recurse(&items, &sizes, 0, &mut current, &mut splits);
            splits
        })
        .collect();

    let mut deals = Vec::new();
    let mut choice = vec![0usize; per_suit.len()];
    loop {
        let mut row_sets = vec![CardSet::empty(); a.num_rows()];
        for (suit, splits) in per_suit.iter().enumerate() {
            for (row, set) in splits[choice[suit]].iter().enumerate() {
                row_sets[row] = row_sets[row].union(*set);
            }
        }
        deals.push(assemble_deal(&row_sets, c));
        // Odometer over the per-suit split choices.
        let mut at = 0;
        loop {
            if at == per_suit.len() {
                return deals;
            }
            choice[at] += 1;
            if choice[at] < per_suit[at].len() {
                break;
            }
            choice[at] = 0;
            at += 1;
        }
    }
}

/// All ways to deal `items[from..]` into groups of the given sizes.
fn split_recurse(
    items: &[u8],
    sizes: &[usize],
    row: usize,
    current: &mut Vec<CardSet>,
    out: &mut Vec<Vec<CardSet>>,
) {
    if row == sizes.len() {
        out.push(current.clone());
        return;
    }
    let taken: CardSet = current.iter().fold(CardSet::empty(), |acc, s| acc.union(*s));
    let available: Vec<u8> = items.iter().copied().filter(|&i| !taken.contains(i)).collect();
    let mut combo = CardSet::empty();
    choose_recurse(&available, sizes[row], 0, &mut combo, &mut |set| {
        current[row] = set;
        split_recurse(items, sizes, row + 1, current, out);
        current[row] = CardSet::empty();
    });
}

fn choose_recurse(
    items: &[u8],
    k: usize,
    from: usize,
    acc: &mut CardSet,
    visit: &mut impl FnMut(CardSet),
) {
    if k == 0 {
        visit(*acc);
        return;
    }
    if items.len() - from < k {
        return;
    }
    for at in from..=items.len() - k {
        acc.insert(items[at]);
        choose_recurse(items, k - 1, at + 1, acc, visit);
        acc.remove(items[at]);
    }
}

/// Exhaustively enumerate every valid suit-length assignment for the
/// constraints, in a deterministic order.
pub fn valid_assignments(c: &ConstraintSummary) -> Vec<SuitLengthMatrix> {
    let num_suits = usize::from(c.config.num_suits);
    let row_sums: Vec<u32> = c.unknown_per_row.iter().map(|&n| n as u32).collect();
    let col_sums: Vec<u32> = c.pool_sizes().iter().map(|&n| n as u32).collect();
    let mut out = Vec::new();
    let mut grid: Vec<Vec<u32>> = Vec::new();
    let mut remaining = col_sums.clone();
    fill_rows(
        c,
        &row_sums,
        &col_sums,
        num_suits,
        &mut grid,
        &mut remaining,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn fill_rows(
    c: &ConstraintSummary,
    row_sums: &[u32],
    col_sums: &[u32],
    num_suits: usize,
    grid: &mut Vec<Vec<u32>>,
    remaining: &mut Vec<u32>,
    out: &mut Vec<SuitLengthMatrix>,
) {
    let row = grid.len();
    if row == row_sums.len() {
        if remaining.iter().all(|&r| r == 0) {
            out.push(SuitLengthMatrix {
                entries: grid.clone(),
                row_sums: row_sums.to_vec(),
                col_sums: col_sums.to_vec(),
                void_mask: c.void_mask.clone(),
            });
        }
        return;
    }
    let mut current = vec![0u32; num_suits];
    fill_cells(
        c, row_sums, col_sums, num_suits, row, 0, row_sums[row], &mut current, grid, remaining,
        out,
    );
}

#[allow(clippy::too_many_arguments)]
fn fill_cells(
    c: &ConstraintSummary,
    row_sums: &[u32],
    col_sums: &[u32],
    num_suits: usize,
    row: usize,
    suit: usize,
    left: u32,
    current: &mut Vec<u32>,
    grid: &mut Vec<Vec<u32>>,
    remaining: &mut Vec<u32>,
    out: &mut Vec<SuitLengthMatrix>,
) {
    if suit == num_suits {
        if left == 0 {
            grid.push(current.clone());
            fill_rows(c, row_sums, col_sums, num_suits, grid, remaining, out);
            grid.pop();
        }
        return;
    }
    let cap = if c.void_mask[row][suit] {
        0
    } else {
        remaining[suit].min(left)
    };
    for take in 0..=cap {
        current[suit] = take;
        remaining[suit] -= take;
        fill_cells(
            c,
            row_sums,
            col_sums,
            num_suits,
            row,
            suit + 1,
            left - take,
            current,
            grid,
            remaining,
            out,
        );
        remaining[suit] += take;
        current[suit] = 0;
    }
}

/// The neighborhood of a concrete deal: every deal realizing a ring-swap
/// neighbor of its assignment, plus the other deals realizing the same
/// assignment. The deal itself is excluded from the count.
#[derive(Debug, Clone)]
pub struct NeighborSet {
    pub assignments: Vec<SuitLengthMatrix>,
    pub include_self: bool,
    /// |Omega_sigma|.
    pub total_deal_count: BigUint,
    pub current: SuitLengthMatrix,
    counts: Vec<BigUint>,
    self_count: BigUint,
}

impl NeighborSet {
    pub fn is_empty(&self) -> bool {
        self.total_deal_count.is_zero()
    }
}

pub fn neighbor_set(deal: &Deal, c: &ConstraintSummary) -> Result<NeighborSet> {
    let current = matrix_of(deal, c)?;
    let assignments = ring_swap(&current);
    let counts: Vec<BigUint> = assignments
        .iter()
        .map(|a| deal_count(a, c))
        .collect();
    let self_count = deal_count(&current, c);
    let mut total: BigUint = counts.iter().sum();
    total += &self_count;
    total -= BigUint::one();
    Ok(NeighborSet {
        assignments,
        include_self: true,
        total_deal_count: total,
        current,
        counts,
        self_count,
    })
}

/// Uniform draw from the neighborhood, without materializing it: pick an
/// assignment with probability proportional to its deal count, then a
/// uniform deal inside it. When the current assignment is picked, resample
/// until the drawn deal differs from the current one, which preserves
/// uniformity over the remaining deals.
pub fn propose_from<R: Rng>(
    deal: &Deal,
    ns: &NeighborSet,
    c: &ConstraintSummary,
    rng: &mut R,
) -> Option<Deal> {
    if ns.is_empty() {
        return None;
    }
    let mut pick = rng.gen_biguint_below(&ns.total_deal_count);
    for (assignment, count) in ns.assignments.iter().zip(&ns.counts) {
        if &pick < count {
            return Some(sample_deal_in(assignment, c, rng));
        }
        pick -= count;
    }
    // Same-assignment branch: self_count - 1 remaining deals.
    loop {
        let candidate = sample_deal_in(&ns.current, c, rng);
        if candidate != *deal {
            return Some(candidate);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Card, GameConfig};
    use crate::rng::derive_rng;

    /// The flow-network example: three suits with unknown pools of sizes
    /// (3, 1, 2), two players each needing three more cards, player 0 void
    /// in suit 2 and player 1 void in suit 1, no kitty.
    pub(crate) fn figure_constraints() -> ConstraintSummary {
        let config = GameConfig::new(2, 3, 3, 4, 10).unwrap();
        // Deck 9, indices: suit0 = {0,1,2}, suit1 = {3,4,5}, suit2 = {6,7,8}.
        // Publicly placed: trump upcard 4, plays 5 (suit1) and 8 (suit2),
        // leaving pools {0,1,2}, {3}, {6,7}.
        ConstraintSummary {
            config,
            trump_upcard: Card { suit: 1, rank: 1 },
            unknown_per_row: vec![3, 3, 0],
            unknown_pool: vec![
                [0u8, 1, 2].into_iter().collect(),
                [3u8].into_iter().collect(),
                [6u8, 7].into_iter().collect(),
            ],
            void_mask: vec![
                vec![false, false, true],
                vec![false, true, false],
                vec![false, false, false],
            ],
            forced_cards: vec![
                [5u8].into_iter().collect(),
                [8u8].into_iter().collect(),
            ],
        }
    }

    pub(crate) fn figure_matrix() -> SuitLengthMatrix {
        SuitLengthMatrix {
            entries: vec![vec![2, 1, 0], vec![1, 0, 2], vec![0, 0, 0]],
            row_sums: vec![3, 3, 0],
            col_sums: vec![3, 1, 2],
            void_mask: figure_constraints().void_mask,
        }
    }

    /// Independent brute force: all matrices with the given sums/voids,
    /// by nested enumeration of every cell value.
    fn brute_force_matrices(
        row_sums: &[u32],
        col_sums: &[u32],
        void_mask: &[Vec<bool>],
    ) -> Vec<Vec<Vec<u32>>> {
        let rows = row_sums.len();
        let cols = col_sums.len();
        let cells = rows * cols;
        let max = *col_sums.iter().max().unwrap_or(&0);
        let mut out = Vec::new();
        let mut grid = vec![vec![0u32; cols]; rows];
        fn rec(
            cell: usize,
            cells: usize,
            cols: usize,
            max: u32,
            grid: &mut Vec<Vec<u32>>,
            row_sums: &[u32],
            col_sums: &[u32],
            void_mask: &[Vec<bool>],
            out: &mut Vec<Vec<Vec<u32>>>,
        ) {
            if cell == cells {
                let rows_ok = grid
                    .iter()
                    .zip(row_sums)
                    .all(|(r, &s)| r.iter().sum::<u32>() == s);
                let cols_ok = (0..cols)
                    .all(|j| grid.iter().map(|r| r[j]).sum::<u32>() == col_sums[j]);
                if rows_ok && cols_ok {
                    out.push(grid.clone());
                }
                return;
            }
            let (i, j) = (cell / cols, cell % cols);
            let limit = if void_mask[i][j] { 0 } else { max };
            for v in 0..=limit {
                grid[i][j] = v;
                rec(cell + 1, cells, cols, max, grid, row_sums, col_sums, void_mask, out);
            }
            grid[i][j] = 0;
        }
        rec(
            0, cells, cols, max, &mut grid, row_sums, col_sums, void_mask, &mut out,
        );
        out
    }

    #[test]
    fn two_by_two_single_neighbor() {
        let a = SuitLengthMatrix {
            entries: vec![vec![1, 0], vec![0, 1]],
            row_sums: vec![1, 1],
            col_sums: vec![1, 1],
            void_mask: vec![vec![false; 2]; 2],
        };
        let neighbors = ring_swap(&a);
        assert_eq!(neighbors.len(), 1);
        assert_eq!(neighbors[0].entries, vec![vec![0, 1], vec![1, 0]]);

        // Exhaustive cross-check: exactly two valid matrices exist.
        let all = brute_force_matrices(&a.row_sums, &a.col_sums, &a.void_mask);
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn figure_matrix_is_unique_assignment() {
        let matrix = figure_matrix();
        assert!(matrix.is_valid());
        assert!(ring_swap(&matrix).is_empty());
        let all = brute_force_matrices(&matrix.row_sums, &matrix.col_sums, &matrix.void_mask);
        assert_eq!(all, vec![matrix.entries.clone()]);
    }

    #[test]
    fn figure_deal_count_is_three() {
        let c = figure_constraints();
        let matrix = figure_matrix();
        assert_eq!(deal_count(&matrix, &c), BigUint::from(3u32));

        // Independent count: enumerate the concrete placements.
        let deals = enumerate_deals_in(&matrix, &c);
        assert_eq!(deals.len(), 3);
        let unique: HashSet<_> = deals.iter().cloned().collect();
        assert_eq!(unique.len(), 3);
    }

    #[test]
    fn zero_matrix_counts_one_deal() {
        let config = GameConfig::new(2, 2, 4, 2, 10).unwrap();
        let c = ConstraintSummary {
            config,
            trump_upcard: Card { suit: 0, rank: 0 },
            unknown_per_row: vec![0, 0, 0],
            unknown_pool: vec![CardSet::empty(), CardSet::empty()],
            void_mask: vec![vec![false; 2]; 3],
            forced_cards: vec![CardSet::empty(); 2],
        };
        let matrix = SuitLengthMatrix {
            entries: vec![vec![0, 0]; 3],
            row_sums: vec![0, 0, 0],
            col_sums: vec![0, 0],
            void_mask: c.void_mask.clone(),
        };
        assert_eq!(deal_count(&matrix, &c), BigUint::one());
        assert_eq!(enumerate_deals_in(&matrix, &c).len(), 1);
    }

    #[test]
    fn valid_assignments_match_brute_force() {
        let c = figure_constraints();
        let ours = valid_assignments(&c);
        let brute = brute_force_matrices(
            &[3, 3, 0],
            &[3, 1, 2],
            &c.void_mask,
        );
        assert_eq!(ours.len(), brute.len());
        let ours_set: HashSet<_> = ours.into_iter().map(|m| m.entries).collect();
        let brute_set: HashSet<_> = brute.into_iter().collect();
        assert_eq!(ours_set, brute_set);
    }

    #[test]
    fn sampled_deal_realizes_matrix() {
        let c = figure_constraints();
        let matrix = figure_matrix();
        let mut rng = derive_rng(3, &[1]);
        for _ in 0..50 {
            let deal = sample_deal_in(&matrix, &c, &mut rng);
            let back = matrix_of(&deal, &c).unwrap();
            assert_eq!(back, matrix);
        }
    }

    #[test]
    fn sampling_is_uniform_within_assignment() {
        // Three concrete deals; 30,000 draws should put each within
        // 3 sigma of 10,000.
        let c = figure_constraints();
        let matrix = figure_matrix();
        let all = enumerate_deals_in(&matrix, &c);
        assert_eq!(all.len(), 3);
        let mut rng = derive_rng(11, &[2]);
        let mut counts = vec![0u32; all.len()];
        let draws = 30_000;
        for _ in 0..draws {
            let deal = sample_deal_in(&matrix, &c, &mut rng);
            let at = all.iter().position(|d| *d == deal).unwrap();
            counts[at] += 1;
        }
        let expected = draws as f64 / 3.0;
        let sigma = (draws as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &count in &counts {
            assert!(
                (f64::from(count) - expected).abs() < 3.0 * sigma,
                "counts {counts:?} not uniform"
            );
        }
    }

    #[test]
    fn neighbor_set_counts_same_assignment_deals() {
        // Unique assignment with three deals: every deal has the other two
        // as neighbors.
        let c = figure_constraints();
        let matrix = figure_matrix();
        let deals = enumerate_deals_in(&matrix, &c);
        for deal in &deals {
            let ns = neighbor_set(deal, &c).unwrap();
            assert!(ns.assignments.is_empty());
            assert!(ns.include_self);
            assert_eq!(ns.total_deal_count, BigUint::from(2u32));
        }
    }

    #[test]
    fn proposals_stay_inside_neighborhood() {
        let c = figure_constraints();
        let matrix = figure_matrix();
        let deals = enumerate_deals_in(&matrix, &c);
        let deal = &deals[0];
        let ns = neighbor_set(deal, &c).unwrap();
        let mut rng = derive_rng(5, &[7]);
        for _ in 0..100 {
            let proposal = propose_from(deal, &ns, &c, &mut rng).unwrap();
            assert_ne!(&proposal, deal);
            assert!(deals.contains(&proposal));
        }
    }

    #[test]
    fn ln_biguint_handles_large_values() {
        let small = BigUint::from(1000u32);
        assert!((ln_biguint(&small) - 1000f64.ln()).abs() < 1e-12);
        let huge = factorial(60); // ~ 8.3e81, still finite in f64
        assert!((ln_biguint(&huge) - 272.43469677540346).abs() < 1e-9);
        let monster = factorial(200); // overflows f64
        // Stirling check: ln(200!) ~ 863.2319872
        assert!((ln_biguint(&monster) - 863.2319871924054).abs() < 1e-6);
    }
}
