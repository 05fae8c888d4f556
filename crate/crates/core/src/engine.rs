//! Strategy banks, history encoding, virtual scoring, and adaptive
//! memory-length selection.
//!
//! A strategy of memory length `m` is a complete lookup table from every
//! possible `m`-bit history of past price-change signs to a predicted next
//! direction, so there are `2^(2^m)` of them. Every strategy in every bank
//! is scored virtually each period (+1 when its prediction matches the
//! realized sign, -1 otherwise) and the prediction for the next period
//! comes from the best strategy of the best-performing memory length.
//!
//! Bit order convention: the most recent sign sits in the least-significant
//! bit of a history index, and bit `h` of a strategy table holds the
//! predicted direction (1 = up) for history index `h`.

use std::collections::HashSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest supported memory length. Tables hold `2^m` bits, so this also
/// bounds per-strategy storage (2^20 bits = 128 KiB).
pub const MAX_MEMORY_LENGTH: u8 = 20;

/// Default number of strategies kept per memory length.
pub const DEFAULT_STRATEGY_CAP: usize = 10_000;

/// Default largest memory length considered.
pub const DEFAULT_MAX_MEMORY: u8 = 10;

/// Direction of a price change over one period. A zero change counts as
/// `Down`, so `Up` means strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    /// Classify a simple return; zero maps to `Down`.
    pub fn from_return(r: f64) -> Self {
        if r > 0.0 {
            Direction::Up
        } else {
            Direction::Down
        }
    }

    pub const fn bit(self) -> u64 {
        match self {
            Direction::Down => 0,
            Direction::Up => 1,
        }
    }

    pub const fn from_bit(bit: u64) -> Self {
        if bit & 1 == 1 {
            Direction::Up
        } else {
            Direction::Down
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Down => write!(f, "down"),
            Direction::Up => write!(f, "up"),
        }
    }
}

/// An encoded history of the last `m` signs. Bit `k` of `index` is the sign
/// `k + 1` steps in the past (most recent in the least-significant bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryIndex {
    m: u8,
    index: u32,
}

impl HistoryIndex {
    pub fn memory(&self) -> u8 {
        self.m
    }

    pub fn index(&self) -> u32 {
        self.index
    }
}

/// Encode the last `m` signs into a history index.
pub fn encode_history(signs: &[Direction], m: u8) -> Result<HistoryIndex> {
    validate_memory(m)?;
    if signs.len() < m as usize {
        return Err(Error::InsufficientHistory {
            needed: m as usize,
            available: signs.len(),
        });
    }
    let mut index = 0u32;
    for k in 0..m as usize {
        index |= (signs[signs.len() - 1 - k].bit() as u32) << k;
    }
    Ok(HistoryIndex { m, index })
}

fn validate_memory(m: u8) -> Result<()> {
    if m == 0 || m > MAX_MEMORY_LENGTH {
        return Err(Error::InvalidParameter(format!(
            "memory length must be in 1..={MAX_MEMORY_LENGTH}, got {m}"
        )));
    }
    Ok(())
}

/// Number of table entries (= history indices) for memory length `m`.
fn table_bits(m: u8) -> u64 {
    1u64 << m
}

/// Number of 64-bit words needed to hold a `2^m`-bit table.
fn table_words(m: u8) -> usize {
    table_bits(m).div_ceil(64) as usize
}

/// A single strategy: a `2^m`-bit lookup table. Two strategies are equal
/// iff their memory lengths and tables are bitwise equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    m: u8,
    table: Vec<u64>,
}

impl Strategy {
    /// Build a strategy from raw table words. Unused high bits of the last
    /// word must be zero so that equality stays bitwise.
    pub fn new(m: u8, mut table: Vec<u64>) -> Result<Self> {
        validate_memory(m)?;
        if table.len() != table_words(m) {
            return Err(Error::InvalidParameter(format!(
                "table for m={m} needs {} words, got {}",
                table_words(m),
                table.len()
            )));
        }
        mask_top_word(m, &mut table);
        Ok(Self { m, table })
    }

    /// The strategy that predicts up for every history.
    pub fn all_up(m: u8) -> Result<Self> {
        validate_memory(m)?;
        let mut table = vec![u64::MAX; table_words(m)];
        mask_top_word(m, &mut table);
        Ok(Self { m, table })
    }

    /// The strategy that predicts down for every history.
    pub fn all_down(m: u8) -> Result<Self> {
        validate_memory(m)?;
        Ok(Self {
            m,
            table: vec![0u64; table_words(m)],
        })
    }

    pub fn memory(&self) -> u8 {
        self.m
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    /// Predicted direction for a raw history index.
    pub fn bit(&self, index: u32) -> Direction {
        debug_assert!((index as u64) < table_bits(self.m));
        let word = (index >> 6) as usize;
        Direction::from_bit(self.table[word] >> (index & 63))
    }

    /// Predicted direction for an encoded history of matching memory length.
    pub fn predict(&self, history: HistoryIndex) -> Result<Direction> {
        if history.m != self.m {
            return Err(Error::MemoryMismatch {
                strategy_m: self.m,
                history_m: history.m,
            });
        }
        Ok(self.bit(history.index))
    }
}

fn mask_top_word(m: u8, table: &mut [u64]) {
    let bits = table_bits(m);
    let rem = (bits % 64) as u32;
    if rem != 0 {
        if let Some(last) = table.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// All strategies kept for one memory length, with their cumulative scores.
///
/// Tables are stored column-major (word `w` of strategy `i` lives at
/// `tables[w * count + i]`) so a score update touches one contiguous slice.
#[derive(Debug, Clone)]
pub struct StrategyBank {
    m: u8,
    count: usize,
    words: usize,
    tables: Vec<u64>,
    scores: Vec<i32>,
    exhaustive: bool,
}

/// Generate the bank for memory length `m`: the full enumeration when
/// `2^(2^m) <= cap` (in ascending table order), otherwise `cap` distinct
/// strategies sampled uniformly from a generator seeded with `seed`.
pub fn generate_bank(m: u8, cap: usize, seed: u64) -> Result<StrategyBank> {
    validate_memory(m)?;
    if cap == 0 {
        return Err(Error::InvalidParameter(
            "strategy cap must be at least 1".into(),
        ));
    }

    let bits = table_bits(m);
    let exhaustive = bits < 64 && (1u128 << bits) <= cap as u128;
    let words = table_words(m);

    let rows: Vec<Vec<u64>> = if exhaustive {
        (0..(1u64 << bits)).map(|v| vec![v]).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen: HashSet<Vec<u64>> = HashSet::with_capacity(cap * 2);
        let mut rows = Vec::with_capacity(cap);
        while rows.len() < cap {
            let mut table: Vec<u64> = (0..words).map(|_| rng.random()).collect();
            mask_top_word(m, &mut table);
            if seen.insert(table.clone()) {
                rows.push(table);
            }
        }
        rows
    };

    let count = rows.len();
    let mut tables = vec![0u64; words * count];
    for (i, row) in rows.iter().enumerate() {
        for (w, &word) in row.iter().enumerate() {
            tables[w * count + i] = word;
        }
    }

    Ok(StrategyBank {
        m,
        count,
        words,
        tables,
        scores: vec![0; count],
        exhaustive,
    })
}

impl StrategyBank {
    pub fn memory(&self) -> u8 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// True when the bank holds every possible table for its memory length.
    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn scores(&self) -> &[i32] {
        &self.scores
    }

    /// Materialize strategy `i` from the column-major store.
    pub fn strategy(&self, i: usize) -> Strategy {
        assert!(i < self.count, "strategy index out of range");
        let table = (0..self.words)
            .map(|w| self.tables[w * self.count + i])
            .collect();
        Strategy { m: self.m, table }
    }

    /// Prediction bit of strategy `i` at a raw history index.
    fn prediction_bit(&self, i: usize, index: u32) -> u64 {
        let word = (index >> 6) as usize;
        (self.tables[word * self.count + i] >> (index & 63)) & 1
    }

    /// Best cumulative score and the lowest strategy index attaining it.
    pub fn best(&self) -> (i32, u32) {
        let mut best_score = i32::MIN;
        let mut best_index = 0u32;
        for (i, &s) in self.scores.iter().enumerate() {
            if s > best_score {
                best_score = s;
                best_index = i as u32;
            }
        }
        (best_score, best_index)
    }

    /// Apply one virtual scoring step: every strategy gains +1 if its
    /// prediction at `index` matches `realized`, and loses 1 otherwise.
    fn update(&mut self, index: u32, realized: Direction) {
        debug_assert!((index as u64) < table_bits(self.m));
        let want = realized.bit();
        let bit = index & 63;
        let base = (index >> 6) as usize * self.count;
        let column = &self.tables[base..base + self.count];
        for (score, &bits) in self.scores.iter_mut().zip(column) {
            let hit = ((bits >> bit) & 1 == want) as i32;
            *score += 2 * hit - 1;
        }
    }
}

/// One recorded decision: which memory length and which strategy index
/// produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Selection {
    pub memory: u8,
    pub strategy_index: u32,
}

/// Engine parameters: which memory lengths to keep banks for, how many
/// strategies per bank, and the seed for bank generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub max_memory: u8,
    pub strategy_cap: usize,
    /// When set, only the bank for this single memory length is kept and
    /// memory selection is disabled. Used for fixed-memory comparison runs.
    pub fixed_memory: Option<u8>,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_memory: DEFAULT_MAX_MEMORY,
            strategy_cap: DEFAULT_STRATEGY_CAP,
            fixed_memory: None,
            seed: 0,
        }
    }
}

impl EngineConfig {
    fn memory_lengths(&self) -> Result<Vec<u8>> {
        validate_memory(self.max_memory)?;
        if self.strategy_cap == 0 {
            return Err(Error::InvalidParameter(
                "strategy cap must be at least 1".into(),
            ));
        }
        match self.fixed_memory {
            Some(m) => {
                validate_memory(m)?;
                if m > self.max_memory {
                    return Err(Error::InvalidParameter(format!(
                        "fixed memory {m} exceeds max memory {}",
                        self.max_memory
                    )));
                }
                Ok(vec![m])
            }
            None => Ok((1..=self.max_memory).collect()),
        }
    }
}

/// Per-asset adaptive predictor: one scored bank per memory length plus the
/// log of selections made so far. Evolution is deterministic given the seed
/// and the input sign sequence.
#[derive(Debug, Clone)]
pub struct AdaptiveState {
    banks: Vec<StrategyBank>,
    selection_log: Vec<Selection>,
    seed: u64,
    min_history: u8,
}

impl AdaptiveState {
    pub fn new(config: &EngineConfig) -> Result<Self> {
        let memories = config.memory_lengths()?;
        let banks = memories
            .iter()
            .map(|&m| generate_bank(m, config.strategy_cap, derive_seed(config.seed, m as u64)))
            .collect::<Result<Vec<_>>>()?;
        let min_history = banks.iter().map(|b| b.m).max().expect("at least one bank");
        Ok(Self {
            banks,
            selection_log: Vec::new(),
            seed: config.seed,
            min_history,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Banks in ascending memory-length order.
    pub fn banks(&self) -> &[StrategyBank] {
        &self.banks
    }

    pub fn bank(&self, m: u8) -> Option<&StrategyBank> {
        self.banks.iter().find(|b| b.m == m)
    }

    /// Signs required before the state can score or predict: the largest
    /// memory length among its banks.
    pub fn min_history(&self) -> u8 {
        self.min_history
    }

    pub fn selection_log(&self) -> &[Selection] {
        &self.selection_log
    }

    fn check_history(&self, signs: &[Direction]) -> Result<()> {
        if signs.len() < self.min_history as usize {
            return Err(Error::InsufficientHistory {
                needed: self.min_history as usize,
                available: signs.len(),
            });
        }
        Ok(())
    }

    /// Score every strategy in every bank against the realized sign that
    /// followed `signs`. Pure with respect to its inputs: the same state,
    /// signs, and realized value always produce the same updated state.
    pub fn update_scores(&mut self, signs: &[Direction], realized: Direction) -> Result<()> {
        self.check_history(signs)?;
        for bank in &mut self.banks {
            let history = encode_history(signs, bank.m)?;
            bank.update(history.index, realized);
        }
        Ok(())
    }

    /// The best strategy of the best memory length right now. Ties go to
    /// the lowest strategy index within a bank and the smallest memory
    /// length across banks.
    pub fn select_best(&self) -> Selection {
        let mut best_score = i32::MIN;
        let mut selection = Selection {
            memory: self.banks[0].m,
            strategy_index: 0,
        };
        for bank in &self.banks {
            let (score, index) = bank.best();
            if score > best_score {
                best_score = score;
                selection = Selection {
                    memory: bank.m,
                    strategy_index: index,
                };
            }
        }
        selection
    }

    /// Predict the next direction from the currently best strategy and
    /// record the choice in the selection log.
    pub fn predict_next(&mut self, signs: &[Direction]) -> Result<Direction> {
        self.check_history(signs)?;
        let selection = self.select_best();
        let bank = self
            .bank(selection.memory)
            .expect("selection references an existing bank");
        let history = encode_history(signs, bank.m)?;
        let direction =
            Direction::from_bit(bank.prediction_bit(selection.strategy_index as usize, history.index));
        self.selection_log.push(selection);
        Ok(direction)
    }
}

/// Stateless seed derivation (splitmix64 of `base` mixed with `salt`).
/// Banks use it per memory length, so the bank for a given length is
/// identical whether it lives in an adaptive state or a fixed-memory one.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Direction::{Down, Up};

    fn signs(bits: &[u8]) -> Vec<Direction> {
        bits.iter().map(|&b| Direction::from_bit(b as u64)).collect()
    }

    #[test]
    fn encode_all_zero_history() {
        let h = encode_history(&[Down, Down, Down], 3).unwrap();
        assert_eq!(h.index(), 0);
        assert_eq!(h.memory(), 3);
    }

    #[test]
    fn encode_all_one_history() {
        let h = encode_history(&[Up, Up], 2).unwrap();
        assert_eq!(h.index(), 3);
    }

    #[test]
    fn encode_mixed_history_most_recent_in_lsb() {
        // Last three signs oldest-to-newest are (Up, Down, Up):
        // LSB = most recent = Up = 1, bit1 = Down = 0, bit2 = Up = 1.
        let h = encode_history(&[Down, Up, Down, Up], 3).unwrap();
        assert_eq!(h.index(), 0b101);
    }

    #[test]
    fn encode_requires_enough_signs() {
        let err = encode_history(&[Up, Down], 3).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientHistory {
                needed: 3,
                available: 2
            }
        ));
    }

    #[test]
    fn bank_m1_is_full_enumeration() {
        let bank = generate_bank(1, 10_000, 0).unwrap();
        assert_eq!(bank.len(), 4);
        assert!(bank.is_exhaustive());
        // Ascending table order: 0b00, 0b01, 0b10, 0b11.
        for v in 0..4u64 {
            assert_eq!(bank.strategy(v as usize).table(), &[v]);
        }
    }

    #[test]
    fn bank_m3_has_256_strategies() {
        let bank = generate_bank(3, 10_000, 7).unwrap();
        assert_eq!(bank.len(), 256);
        assert!(bank.is_exhaustive());
    }

    #[test]
    fn full_enumeration_matches_brute_force_sets() {
        for m in 1..=3u8 {
            let bank = generate_bank(m, DEFAULT_STRATEGY_CAP, 9).unwrap();
            let expected: Vec<Strategy> = (0..(1u64 << (1 << m)))
                .map(|v| Strategy::new(m, vec![v]).unwrap())
                .collect();
            let got: Vec<Strategy> = (0..bank.len()).map(|i| bank.strategy(i)).collect();
            assert_eq!(got, expected, "m={m}");
        }
    }

    #[test]
    fn sampled_bank_is_capped_distinct_and_reproducible() {
        let a = generate_bank(4, 10_000, 42).unwrap();
        let b = generate_bank(4, 10_000, 42).unwrap();
        assert_eq!(a.len(), 10_000);
        assert!(!a.is_exhaustive());
        let set: HashSet<Vec<u64>> = (0..a.len()).map(|i| a.strategy(i).table().to_vec()).collect();
        assert_eq!(set.len(), 10_000, "sampled tables must be distinct");
        for i in 0..a.len() {
            assert_eq!(a.strategy(i), b.strategy(i), "same seed, same bank");
        }
        let c = generate_bank(4, 10_000, 43).unwrap();
        assert!((0..c.len()).any(|i| c.strategy(i) != a.strategy(i)));
    }

    #[test]
    fn strategy_predict_reads_table_bits() {
        let all_up = Strategy::all_up(2).unwrap();
        let h2 = encode_history(&signs(&[1, 0]), 2).unwrap();
        assert_eq!(all_up.predict(h2).unwrap(), Up);

        let all_down = Strategy::all_down(2).unwrap();
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let h = encode_history(&signs(&bits), 2).unwrap();
            assert_eq!(all_down.predict(h).unwrap(), Down);
        }

        let s = Strategy::new(2, vec![0b0110]).unwrap();
        assert_eq!(s.bit(1), Up);
        assert_eq!(s.bit(3), Down);
    }

    #[test]
    fn strategy_predict_rejects_memory_mismatch() {
        let s = Strategy::all_up(3).unwrap();
        let h = encode_history(&signs(&[1, 1]), 2).unwrap();
        assert!(matches!(
            s.predict(h),
            Err(Error::MemoryMismatch {
                strategy_m: 3,
                history_m: 2
            })
        ));
    }

    #[test]
    fn update_scores_hand_enumerated_m1() {
        let config = EngineConfig {
            max_memory: 1,
            strategy_cap: 10_000,
            fixed_memory: None,
            seed: 0,
        };
        let mut state = AdaptiveState::new(&config).unwrap();
        // Last sign Up -> history index 1; realized Up rewards tables with
        // bit 1 set (0b10 and 0b11).
        state.update_scores(&[Up], Up).unwrap();
        assert_eq!(state.bank(1).unwrap().scores(), &[-1, -1, 1, 1]);
    }

    #[test]
    fn constant_up_strategy_scores_t_on_all_up_series() {
        let config = EngineConfig {
            max_memory: 1,
            strategy_cap: 10_000,
            fixed_memory: None,
            seed: 0,
        };
        let mut state = AdaptiveState::new(&config).unwrap();
        let series = [Up; 40];
        for t in 1..series.len() {
            state.update_scores(&series[..t], series[t]).unwrap();
        }
        // Table 0b11 (index 3) is the constant-up strategy.
        assert_eq!(state.bank(1).unwrap().scores()[3], 39);
    }

    #[test]
    fn fixed_strategy_expected_score_zero_on_iid_signs() {
        // Monte Carlo: a fixed strategy against iid coin flips drifts like a
        // random walk; the mean over many seeds stays within 3 sigma of 0.
        let steps = 200usize;
        let n_runs = 400usize;
        let mut total: i64 = 0;
        for run in 0..n_runs {
            let mut rng = ChaCha8Rng::seed_from_u64(run as u64);
            let series: Vec<Direction> =
                (0..steps + 1).map(|_| Direction::from_bit(rng.random::<u64>())).collect();
            let config = EngineConfig {
                max_memory: 2,
                strategy_cap: 10_000,
                fixed_memory: None,
                seed: 5,
            };
            let mut state = AdaptiveState::new(&config).unwrap();
            for t in 2..series.len() {
                state.update_scores(&series[..t], series[t]).unwrap();
            }
            total += state.bank(2).unwrap().scores()[6] as i64;
        }
        let mean = total as f64 / n_runs as f64;
        // One run makes steps - 1 iid +/-1 updates, so its score has
        // variance steps - 1; the mean over runs divides that by n_runs.
        let sigma = ((steps - 1) as f64 / n_runs as f64).sqrt();
        assert!(
            mean.abs() <= 3.0 * sigma,
            "mean score {mean} outside 3 sigma {sigma}"
        );
    }

    #[test]
    fn select_best_initial_state_ties_to_smallest() {
        let state = AdaptiveState::new(&EngineConfig {
            max_memory: 4,
            strategy_cap: 100,
            fixed_memory: None,
            seed: 0,
        })
        .unwrap();
        let sel = state.select_best();
        assert_eq!(sel.memory, 1);
        assert_eq!(sel.strategy_index, 0);
    }

    #[test]
    fn select_best_cross_bank_tie_goes_to_smaller_memory() {
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 4,
            strategy_cap: 50,
            fixed_memory: None,
            seed: 0,
        })
        .unwrap();
        for bank in &mut state.banks {
            match bank.m {
                2 => bank.scores[5] = 7,
                3 => bank.scores[2] = 7,
                4 => bank.scores[9] = 3,
                _ => {}
            }
        }
        let sel = state.select_best();
        assert_eq!(sel.memory, 2);
        assert_eq!(sel.strategy_index, 5);
    }

    #[test]
    fn select_best_is_invariant_to_constant_score_shifts() {
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 3,
            strategy_cap: 100,
            fixed_memory: None,
            seed: 11,
        })
        .unwrap();
        let series = signs(&[1, 0, 0, 1, 1, 0, 1, 0, 1, 1, 0, 0, 0, 1]);
        for t in 3..series.len() {
            state.update_scores(&series[..t], series[t]).unwrap();
        }
        let before = state.select_best();
        for bank in &mut state.banks {
            for s in &mut bank.scores {
                *s += 17;
            }
        }
        assert_eq!(state.select_best(), before);
    }

    #[test]
    fn selected_strategy_learns_period_four_pattern() {
        // Period-4 sign pattern; after enough updates the selected strategy
        // predicts every visited history's successor correctly.
        let pattern = [Up, Up, Down, Down];
        let series: Vec<Direction> = (0..504).map(|i| pattern[i % 4]).collect();
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 4,
            strategy_cap: 10_000,
            fixed_memory: None,
            seed: 0,
        })
        .unwrap();
        for t in 4..series.len() {
            state.update_scores(&series[..t], series[t]).unwrap();
        }
        let sel = state.select_best();
        let strategy = state.bank(sel.memory).unwrap().strategy(sel.strategy_index as usize);
        for start in 0..4 {
            let window: Vec<Direction> =
                (0..sel.memory as usize).map(|k| pattern[(start + k) % 4]).collect();
            let next = pattern[(start + sel.memory as usize) % 4];
            let h = encode_history(&window, sel.memory).unwrap();
            assert_eq!(strategy.predict(h).unwrap(), next);
        }
    }

    #[test]
    fn predict_next_initial_state_is_down() {
        let mut state = AdaptiveState::new(&EngineConfig::default()).unwrap();
        let series = vec![Up; 10];
        assert_eq!(state.predict_next(&series).unwrap(), Down);
        assert_eq!(
            state.selection_log(),
            &[Selection {
                memory: 1,
                strategy_index: 0
            }]
        );
    }

    #[test]
    fn predict_next_tracks_all_up_series() {
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 3,
            strategy_cap: 10_000,
            fixed_memory: None,
            seed: 2,
        })
        .unwrap();
        let series = [Up; 60];
        let mut correct_tail = true;
        for t in 3..series.len() {
            let p = state.predict_next(&series[..t]).unwrap();
            if t > 10 && p != Up {
                correct_tail = false;
            }
            state.update_scores(&series[..t], series[t]).unwrap();
        }
        assert!(correct_tail, "predictions must lock onto the upward trend");
    }

    #[test]
    fn predict_next_learns_alternating_pattern_perfectly() {
        let series: Vec<Direction> = (0..600)
            .map(|i| if i % 2 == 0 { Up } else { Down })
            .collect();
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 4,
            strategy_cap: 10_000,
            fixed_memory: None,
            seed: 0,
        })
        .unwrap();
        let mut wrong_after_learn_in = 0;
        for t in 4..series.len() {
            let p = state.predict_next(&series[..t]).unwrap();
            if t >= 100 && p != series[t] {
                wrong_after_learn_in += 1;
            }
            state.update_scores(&series[..t], series[t]).unwrap();
        }
        assert_eq!(wrong_after_learn_in, 0);
    }

    #[test]
    fn score_conservation_in_exhaustive_banks() {
        // For every table position half of all tables carry each bit, so a
        // full bank's total score stays zero after every update.
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 3,
            strategy_cap: 10_000,
            fixed_memory: None,
            seed: 0,
        })
        .unwrap();
        let series = signs(&[1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0]);
        for t in 3..series.len() {
            state.update_scores(&series[..t], series[t]).unwrap();
            for bank in state.banks() {
                let sum: i64 = bank.scores().iter().map(|&s| s as i64).sum();
                assert_eq!(sum, 0, "bank m={} drifted", bank.memory());
            }
        }
    }

    #[test]
    fn fixed_memory_state_keeps_single_bank() {
        let state = AdaptiveState::new(&EngineConfig {
            max_memory: 10,
            strategy_cap: 100,
            fixed_memory: Some(7),
            seed: 3,
        })
        .unwrap();
        assert_eq!(state.banks().len(), 1);
        assert_eq!(state.banks()[0].memory(), 7);
        assert_eq!(state.min_history(), 7);
        let sel = state.select_best();
        assert_eq!(sel.memory, 7);
    }

    #[test]
    fn fixed_bank_matches_adaptive_bank_for_same_seed() {
        let adaptive = AdaptiveState::new(&EngineConfig {
            max_memory: 5,
            strategy_cap: 64,
            fixed_memory: None,
            seed: 21,
        })
        .unwrap();
        let fixed = AdaptiveState::new(&EngineConfig {
            max_memory: 5,
            strategy_cap: 64,
            fixed_memory: Some(5),
            seed: 21,
        })
        .unwrap();
        let a = adaptive.bank(5).unwrap();
        let f = fixed.bank(5).unwrap();
        assert_eq!(a.len(), f.len());
        for i in 0..a.len() {
            assert_eq!(a.strategy(i), f.strategy(i));
        }
    }

    #[test]
    fn state_requires_full_history() {
        let mut state = AdaptiveState::new(&EngineConfig {
            max_memory: 5,
            strategy_cap: 10,
            fixed_memory: None,
            seed: 0,
        })
        .unwrap();
        let short = vec![Up; 4];
        assert!(matches!(
            state.predict_next(&short),
            Err(Error::InsufficientHistory { needed: 5, available: 4 })
        ));
        assert!(state.update_scores(&short, Up).is_err());
    }

    #[test]
    fn engine_types_transfer_between_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<Direction>();
        assert_send_sync::<HistoryIndex>();
        assert_send_sync::<Strategy>();
        assert_send_sync::<StrategyBank>();
        assert_send_sync::<AdaptiveState>();
        assert_send_sync::<Selection>();
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(AdaptiveState::new(&EngineConfig {
            max_memory: 0,
            ..EngineConfig::default()
        })
        .is_err());
        assert!(AdaptiveState::new(&EngineConfig {
            strategy_cap: 0,
            ..EngineConfig::default()
        })
        .is_err());
        assert!(AdaptiveState::new(&EngineConfig {
            max_memory: 4,
            fixed_memory: Some(5),
            ..EngineConfig::default()
        })
        .is_err());
        assert!(generate_bank(0, 10, 0).is_err());
        assert!(generate_bank(MAX_MEMORY_LENGTH + 1, 10, 0).is_err());
    }
}
