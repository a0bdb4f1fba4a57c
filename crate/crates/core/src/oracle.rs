//! Simulated random oracles.
//!
//! A [`LazyOracle`] answers each query with one bit drawn from a keyed hash of
//! the root seed and the query, so answers are a fixed function of
//! `(seed, query)`. Queries of different bit lengths never collide because the
//! length is part of the hashed input. Optionally the oracle is pinned to a
//! [`QuerySet`]: pinned queries return the recorded bit, everything else falls
//! through to the hash.
//!
//! Statistical claims made with these oracles are with respect to the seed.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::hash::Hasher;
use std::sync::Arc;

use siphasher::sip::SipHasher13;

use crate::bits::BitString;
use crate::error::{PrcError, Result};
use crate::seed::Seed;

pub trait Oracle {
    fn query(&mut self, q: &BitString) -> bool;
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn query(&mut self, q: &BitString) -> bool {
        (**self).query(q)
    }
}

/// Insertion-ordered map from queries to answer bits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QuerySet {
    entries: Vec<(BitString, bool)>,
    index: HashMap<BitString, usize>,
}

impl QuerySet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `(q, bit)`. Re-adding the same pair is a no-op; a different bit
    /// for a known query is an error.
    pub fn insert(&mut self, q: BitString, bit: bool) -> Result<()> {
        match self.index.get(&q) {
            Some(&i) if self.entries[i].1 == bit => Ok(()),
            Some(_) => Err(PrcError::ConflictingQuery(q.to_string())),
            None => {
                self.index.insert(q.clone(), self.entries.len());
                self.entries.push((q, bit));
                Ok(())
            }
        }
    }

    pub fn get(&self, q: &BitString) -> Option<bool> {
        self.index.get(q).map(|&i| self.entries[i].1)
    }

    pub fn contains(&self, q: &BitString) -> bool {
        self.index.contains_key(q)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BitString, bool)> {
        self.entries.iter().map(|(q, b)| (q, *b))
    }

    /// One line per entry: `<len>:<hex> <bit>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (q, b) in &self.entries {
            writeln!(s, "{q} {}", u8::from(*b)).expect("writing to a String");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut set = Self::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (q, b) = line
                .split_once(' ')
                .ok_or_else(|| PrcError::Parse(format!("line {}: expected '<query> <bit>'", lineno + 1)))?;
            let bit = match b {
                "0" => false,
                "1" => true,
                other => return Err(PrcError::Parse(format!("line {}: bad bit {other:?}", lineno + 1))),
            };
            set.insert(q.parse()?, bit)?;
        }
        Ok(set)
    }
}

impl FromIterator<(BitString, bool)> for QuerySet {
    /// Panics on conflicting entries.
    fn from_iter<I: IntoIterator<Item = (BitString, bool)>>(iter: I) -> Self {
        let mut set = Self::new();
        for (q, b) in iter {
            set.insert(q, b).expect("conflicting query entries");
        }
        set
    }
}

#[derive(Clone, Debug)]
pub struct LazyOracle {
    seed: Seed,
    keys: (u64, u64),
    pinned: Option<Arc<QuerySet>>,
    logging: bool,
    seen: HashSet<BitString>,
    log: Vec<(BitString, bool)>,
    queries_made: u64,
}

impl LazyOracle {
    /// Fresh oracle that logs every distinct query in first-query order.
    pub fn new(seed: Seed) -> Self {
        Self::build(seed, None, true)
    }

    /// Same answers as [`new`](Self::new) but keeps no log.
    pub fn unlogged(seed: Seed) -> Self {
        Self::build(seed, None, false)
    }

    fn build(seed: Seed, pinned: Option<Arc<QuerySet>>, logging: bool) -> Self {
        let k = seed.stream("oracle");
        Self {
            seed,
            keys: (k.0, k.child(1).0),
            pinned,
            logging,
            seen: HashSet::new(),
            log: Vec::new(),
            queries_made: 0,
        }
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn pinned(&self) -> Option<&Arc<QuerySet>> {
        self.pinned.as_ref()
    }

    /// Answer without touching the log.
    pub fn peek(&self, q: &BitString) -> bool {
        if let Some(b) = self.pinned.as_ref().and_then(|s| s.get(q)) {
            return b;
        }
        let mut h = SipHasher13::new_with_keys(self.keys.0, self.keys.1);
        h.write_u64(q.len() as u64);
        for &w in q.words() {
            h.write_u64(w);
        }
        h.finish() >> 63 == 1
    }

    /// Distinct queries in first-query order.
    pub fn log(&self) -> &[(BitString, bool)] {
        &self.log
    }

    pub fn take_log(&mut self) -> Vec<(BitString, bool)> {
        self.seen.clear();
        std::mem::take(&mut self.log)
    }

    /// Total queries including repeats.
    pub fn queries_made(&self) -> u64 {
        self.queries_made
    }

    /// Same function (seed and pinned set), empty log.
    pub fn fresh_view(&self) -> Self {
        Self::build(self.seed, self.pinned.clone(), self.logging)
    }

    /// Same function and pins with `extra` entries pinned on top.
    pub fn with_extra_pins(&self, extra: impl IntoIterator<Item = (BitString, bool)>) -> Result<Self> {
        let mut set = self.pinned.as_deref().cloned().unwrap_or_default();
        for (q, b) in extra {
            set.insert(q, b)?;
        }
        Ok(Self::build(self.seed, Some(Arc::new(set)), self.logging))
    }
}

impl Oracle for LazyOracle {
    fn query(&mut self, q: &BitString) -> bool {
        self.queries_made += 1;
        let bit = self.peek(q);
        if self.logging && !self.seen.contains(q) {
            self.seen.insert(q.clone());
            self.log.push((q.clone(), bit));
        }
        bit
    }
}

pub fn oracle_query(o: &mut LazyOracle, q: &BitString) -> bool {
    o.query(q)
}

/// A fresh oracle that agrees with `set` on its domain and answers every
/// other query from `seed`.
pub fn consistent_resample(set: Arc<QuerySet>, seed: Seed) -> LazyOracle {
    LazyOracle::build(seed, Some(set), true)
}

/// The view `q -> base(prefix || q)`.
pub struct PrefixedOracle<'a, O: Oracle + ?Sized> {
    base: &'a mut O,
    prefix: BitString,
    // Reused query buffer; always starts with `prefix`.
    buf: BitString,
}

impl<'a, O: Oracle + ?Sized> PrefixedOracle<'a, O> {
    pub fn prefix(&self) -> &BitString {
        &self.prefix
    }
}

impl<O: Oracle + ?Sized> Oracle for PrefixedOracle<'_, O> {
    fn query(&mut self, q: &BitString) -> bool {
        self.buf.truncate(self.prefix.len());
        self.buf.append(q);
        self.base.query(&self.buf)
    }
}

/// Keyed view of `base`. With a fixed key length the views under distinct
/// keys query disjoint parts of the base oracle.
pub fn secret_prefix<'a, O: Oracle + ?Sized>(base: &'a mut O, sk: &BitString) -> PrefixedOracle<'a, O> {
    PrefixedOracle {
        base,
        prefix: sk.clone(),
        buf: sk.clone(),
    }
}

/// Counts queries passing through to `inner`.
pub struct CountingOracle<'a> {
    inner: &'a mut dyn Oracle,
    count: usize,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a mut dyn Oracle) -> Self {
        Self { inner, count: 0 }
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

impl Oracle for CountingOracle<'_> {
    fn query(&mut self, q: &BitString) -> bool {
        self.count += 1;
        self.inner.query(q)
    }
}

/// Answers from `fixed` when possible, otherwise from `inner`. Fixed answers
/// never reach `inner` and so never show up in its log.
pub struct OverlayOracle<'a> {
    fixed: &'a QuerySet,
    inner: &'a mut dyn Oracle,
}

impl<'a> OverlayOracle<'a> {
    pub fn new(fixed: &'a QuerySet, inner: &'a mut dyn Oracle) -> Self {
        Self { fixed, inner }
    }
}

impl Oracle for OverlayOracle<'_> {
    fn query(&mut self, q: &BitString) -> bool {
        match self.fixed.get(q) {
            Some(b) => b,
            None => self.inner.query(q),
        }
    }
}

/// Explicit function on a finite list of points, for exhaustive enumeration
/// over all oracles on a small domain. Querying outside the domain panics.
#[derive(Clone, Debug)]
pub struct TableOracle {
    index: HashMap<BitString, usize>,
    table: u64,
}

impl TableOracle {
    /// `table` bit `i` is the answer on `domain[i]`. At most 64 points.
    pub fn new(domain: &[BitString], table: u64) -> Self {
        assert!(domain.len() <= 64, "table oracles hold at most 64 points");
        Self {
            index: domain.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect(),
            table,
        }
    }

    pub fn domain_index(&self, q: &BitString) -> Option<usize> {
        self.index.get(q).copied()
    }
}

impl Oracle for TableOracle {
    fn query(&mut self, q: &BitString) -> bool {
        let i = self
            .index
            .get(q)
            .unwrap_or_else(|| panic!("query {q} outside the table oracle's domain"));
        (self.table >> i) & 1 == 1
    }
}

/// Records every `(query, answer)` pair seen by `inner`, repeats included.
pub struct RecordingOracle<'a> {
    inner: &'a mut dyn Oracle,
    pub record: Vec<(BitString, bool)>,
}

impl<'a> RecordingOracle<'a> {
    pub fn new(inner: &'a mut dyn Oracle) -> Self {
        Self {
            inner,
            record: Vec::new(),
        }
    }
}

impl Oracle for RecordingOracle<'_> {
    fn query(&mut self, q: &BitString) -> bool {
        let b = self.inner.query(q);
        self.record.push((q.clone(), b));
        b
    }
}

/// A stateless deterministic program with oracle access. Implementations take
/// `&self` and must not use interior mutability.
pub trait CryptoOracleMachine {
    fn step_bound(&self) -> u64;
    fn run(&self, input: &BitString, ctx: &mut MachineContext<'_>) -> Result<BitString>;
}

/// Oracle handle given to a running machine; every query and every explicit
/// [`step`](Self::step) is charged against the declared bound.
pub struct MachineContext<'a> {
    oracle: &'a mut dyn Oracle,
    steps: u64,
    bound: u64,
}

impl MachineContext<'_> {
    pub fn step(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.bound {
            Err(PrcError::StepBoundExceeded { bound: self.bound })
        } else {
            Ok(())
        }
    }

    pub fn query(&mut self, q: &BitString) -> Result<bool> {
        self.step()?;
        Ok(self.oracle.query(q))
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
}

pub fn run_crypto_oracle<M: CryptoOracleMachine + ?Sized>(
    machine: &M,
    input: &BitString,
    oracle: &mut dyn Oracle,
) -> Result<BitString> {
    let mut ctx = MachineContext {
        oracle,
        steps: 0,
        bound: machine.step_bound(),
    };
    machine.run(input, &mut ctx)
}
