//! Ranked eigenvalue enumeration for tensor-product spectra.
//!
//! The full eigenvalue family over k ∈ Z^d is the product of per-coordinate
//! factors, each nonincreasing in |k_j|. Enumeration in nonincreasing order
//! is the classic k-largest-products walk: a max-heap over magnitude
//! multi-indices m ∈ N₀^d seeded at the origin, where popping m pushes its
//! successors m + e_j. Each successor is pushed only for coordinates j at or
//! after the popped node's pivot (the coordinate last incremented), which
//! generates every lattice point exactly once — increments along the unique
//! path to m occur in nondecreasing coordinate order — so no visited set is
//! needed and memory stays proportional to the frontier.
//!
//! A popped magnitude index is a *group*: it stands for 2^z signed indices
//! (z = number of nonzero coordinates), all sharing one eigenvalue. Rank
//! arithmetic (partial sums, tails) works on groups; materialized
//! [`EigenEntry`] lists expand groups into signed indices, breaking
//! exact-value ties by lexicographic order with per-coordinate key
//! (|h|, sign), i.e. 0 before +h before −h.
//!
//! Floating-point discipline: a node's eigenvalue is always the fresh
//! left-to-right product of its per-coordinate factors (never an incremental
//! update), so enumeration order and values are bit-for-bit reproducible and
//! match a brute-force oracle computing the same products. Partial sums use
//! one shared compensated-accumulation recipe (see [`partial_in_group`]) so
//! every caller — tail queries here, the streaming complexity search — sees
//! identical floats.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{KernelModel, ModelError};

/// One eigenvalue with its signed frequency index and 1-based rank.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenEntry {
    pub rank: u64,
    pub value: f64,
    pub index: Vec<i32>,
}

// ---------------------------------------------------------------------------
// compensated summation
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator. All spectral partial sums go through
/// this type so that independently computed prefixes agree bitwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    s: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Partial sum at `offset` ranks into a group whose previous-group snapshot
/// is `snapshot`: snapshot + value·offset, as a single fixed expression.
/// Both `Spectrum::partial_sum` and the streaming complexity search use this
/// exact formula, which is what makes the bracketing invariant exact.
#[inline]
pub(crate) fn partial_in_group(snapshot: f64, value: f64, offset: u64) -> f64 {
    snapshot + value * offset as f64
}

// ---------------------------------------------------------------------------
// magnitude-index enumerator
// ---------------------------------------------------------------------------

struct Node {
    value: f64,
    mag: Box<[u32]>,
    pivot: u32,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.mag == other.mag
    }
}
impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap: larger value pops first; among equal values the
        // lexicographically smaller magnitude index pops first.
        match self.value.partial_cmp(&other.value).expect("eigenvalues are never NaN") {
            Ordering::Equal => other.mag.cmp(&self.mag),
            ord => ord,
        }
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A popped magnitude index: eigenvalue, |h_j| per coordinate, and the
/// number of signed indices it represents (2^{#nonzero}).
#[derive(Clone, Debug)]
pub(crate) struct MagnitudeGroup {
    pub value: f64,
    pub mag: Box<[u32]>,
    pub mult: u32,
}

/// Best-first walk over N₀^d in nonincreasing eigenvalue order.
pub(crate) struct MagnitudeEnumerator {
    model: KernelModel,
    /// Lazily grown per-coordinate factor tables, indexed by |h|.
    tables: Vec<Vec<f64>>,
    heap: BinaryHeap<Node>,
}

impl MagnitudeEnumerator {
    pub fn new(model: KernelModel) -> Self {
        let d = model.d();
        let mut e = MagnitudeEnumerator {
            model,
            tables: vec![Vec::new(); d],
            heap: BinaryHeap::new(),
        };
        let root = Node { value: 1.0, mag: vec![0u32; d].into_boxed_slice(), pivot: 0 };
        e.heap.push(root);
        e
    }

    fn factor(&mut self, coord0: usize, h: u32) -> f64 {
        let table = &mut self.tables[coord0];
        while table.len() <= h as usize {
            let next_h = table.len() as u64;
            table.push(self.model.coordinate_factor(coord0 + 1, next_h));
        }
        table[h as usize]
    }

    /// Fresh left-to-right product of coordinate factors.
    fn value_of(&mut self, mag: &[u32]) -> f64 {
        let mut v = 1.0f64;
        for (j, &h) in mag.iter().enumerate() {
            v *= self.factor(j, h);
        }
        v
    }

    pub fn next_group(&mut self) -> MagnitudeGroup {
        let node = self.heap.pop().expect("the lattice walk never exhausts Z^d");
        let d = node.mag.len();
        for j in node.pivot as usize..d {
            let mut mag = node.mag.clone();
            mag[j] += 1;
            let value = self.value_of(&mag);
            self.heap.push(Node { value, mag, pivot: j as u32 });
        }
        let zeros = node.mag.iter().filter(|&&h| h == 0).count();
        let mult = 1u32 << (d - zeros);
        MagnitudeGroup { value: node.value, mag: node.mag, mult }
    }
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

struct Group {
    value: f64,
    mag: Box<[u32]>,
    end_rank: u64,
    /// Compensated partial sum over all ranks up to and including this group.
    cum: f64,
}

/// A kernel model's eigenvalue sequence in nonincreasing order, with lazy
/// enumeration, exact trace (product of coordinate sums), partial sums, and
/// tail sums. Single-owner and stateful: extending methods take `&mut self`;
/// the returned entry slices are immutable snapshots.
pub struct Spectrum {
    model: KernelModel,
    coord_sums: Vec<f64>,
    trace: f64,
    log_trace: f64,
    enumerator: MagnitudeEnumerator,
    groups: Vec<Group>,
    acc: CompensatedSum,
    total_ranks: u64,
    entries: Vec<EigenEntry>,
    expanded_groups: usize,
}

impl Spectrum {
    pub fn new(model: KernelModel) -> Result<Self, ModelError> {
        model.validate()?;
        let d = model.d();
        let mut coord_sums = Vec::with_capacity(d);
        for coord in 1..=d {
            coord_sums.push(model.coordinate_sum(coord)?);
        }
        let mut trace = 1.0f64;
        let mut log_trace = 0.0f64;
        for &s in &coord_sums {
            trace *= s;
            log_trace += s.ln();
        }
        let enumerator = MagnitudeEnumerator::new(model.clone());
        Ok(Spectrum {
            model,
            coord_sums,
            trace,
            log_trace,
            enumerator,
            groups: Vec::new(),
            acc: CompensatedSum::default(),
            total_ranks: 0,
            entries: Vec::new(),
            expanded_groups: 0,
        })
    }

    pub fn model(&self) -> &KernelModel {
        &self.model
    }

    pub fn d(&self) -> usize {
        self.model.d()
    }

    /// Σ_k λ_k = ∏_j (coordinate sum). +∞ when the product overflows f64;
    /// check [`Spectrum::trace_overflowed`] and fall back to
    /// [`Spectrum::log_trace`] in that regime.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn log_trace(&self) -> f64 {
        self.log_trace
    }

    pub fn trace_overflowed(&self) -> bool {
        !self.trace.is_finite()
    }

    pub fn coordinate_sums(&self) -> &[f64] {
        &self.coord_sums
    }

    fn ensure_group_count(&mut self, count: usize) {
        while self.groups.len() < count {
            self.pop_group();
        }
    }

    fn ensure_ranks(&mut self, n: u64) {
        while self.total_ranks < n {
            self.pop_group();
        }
    }

    fn pop_group(&mut self) {
        let g = self.enumerator.next_group();
        self.acc.add(g.value * g.mult as f64);
        self.total_ranks += g.mult as u64;
        self.groups.push(Group {
            value: g.value,
            mag: g.mag,
            end_rank: self.total_ranks,
            cum: self.acc.value(),
        });
    }

    /// λ_rank (1-based).
    pub fn value_at(&mut self, rank: u64) -> f64 {
        assert!(rank >= 1, "ranks are 1-based");
        self.ensure_ranks(rank);
        let i = self.group_index_for_rank(rank);
        self.groups[i].value
    }

    fn group_index_for_rank(&self, rank: u64) -> usize {
        self.groups.partition_point(|g| g.end_rank < rank)
    }

    /// Σ_{k ≤ n} λ_k.
    pub fn partial_sum(&mut self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.ensure_ranks(n);
        let i = self.group_index_for_rank(n);
        let snapshot = if i == 0 { 0.0 } else { self.groups[i - 1].cum };
        let start = if i == 0 { 0 } else { self.groups[i - 1].end_rank };
        partial_in_group(snapshot, self.groups[i].value, n - start)
    }

    /// Σ_{k > n} λ_k = trace − partial_sum(n), clamped at 0. Absolute
    /// accuracy is ~1e-16·trace (compensated partial sums against an exact
    /// trace), which callers inherit.
    pub fn tail_sum(&mut self, n: u64) -> f64 {
        (self.trace - self.partial_sum(n)).max(0.0)
    }

    /// First `count` eigenvalues as signed-index entries in the documented
    /// order: value nonincreasing; exact-value ties sorted lexicographically
    /// by per-coordinate key (|h|, sign) with + before −.
    pub fn entries(&mut self, count: usize) -> &[EigenEntry] {
        while self.entries.len() < count {
            self.expand_next_run();
        }
        &self.entries[..count]
    }

    /// Expand the next maximal run of bitwise-equal-value groups into sorted
    /// signed entries.
    fn expand_next_run(&mut self) {
        let start = self.expanded_groups;
        self.ensure_group_count(start + 1);
        let run_value = self.groups[start].value;
        let mut end = start + 1;
        loop {
            self.ensure_group_count(end + 1);
            if self.groups[end].value == run_value {
                end += 1;
            } else {
                break;
            }
        }
        let mut signed: Vec<Vec<i32>> = Vec::new();
        for g in &self.groups[start..end] {
            expand_signs(&g.mag, &mut signed);
        }
        signed.sort_unstable_by(|a, b| signed_index_cmp(a, b));
        for index in signed {
            let rank = self.entries.len() as u64 + 1;
            self.entries.push(EigenEntry { rank, value: run_value, index });
        }
        self.expanded_groups = end;
    }
}

/// All sign patterns of a magnitude index, in ascending binary-counter order
/// over the nonzero coordinates (+ = 0, − = 1, first nonzero coordinate most
/// significant). This is already the documented tie order within one group.
fn expand_signs(mag: &[u32], out: &mut Vec<Vec<i32>>) {
    let nonzero: Vec<usize> = (0..mag.len()).filter(|&j| mag[j] != 0).collect();
    let z = nonzero.len();
    for id in 0..(1u64 << z) {
        let mut index: Vec<i32> = mag.iter().map(|&h| h as i32).collect();
        for (t, &j) in nonzero.iter().enumerate() {
            let bit = (id >> (z - 1 - t)) & 1;
            if bit == 1 {
                index[j] = -index[j];
            }
        }
        out.push(index);
    }
}

/// Lexicographic order with per-coordinate key (|h|, sign), + before −.
fn signed_index_cmp(a: &[i32], b: &[i32]) -> Ordering {
    for (&x, &y) in a.iter().zip(b.iter()) {
        let kx = (x.unsigned_abs(), (x < 0) as u8);
        let ky = (y.unsigned_abs(), (y < 0) as u8);
        match kx.cmp(&ky) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// First `count` eigen entries of a model (convenience wrapper).
pub fn enumerate_spectrum(model: &KernelModel, count: usize) -> Result<Vec<EigenEntry>, ModelError> {
    let mut s = Spectrum::new(model.clone())?;
    Ok(s.entries(count).to_vec())
}

/// N(m, x) = Σ_{k ≤ m} |η_k(x)|² for the ranked eigenbasis. Every
/// eigenfunction of these periodic models is a unimodular exponential, so
/// the sum is exactly m for every x on the torus; the signature keeps the
/// evaluation point so callers can treat this as the general quantity.
pub fn christoffel(model: &KernelModel, m: u64, x: &[f64]) -> f64 {
    assert_eq!(x.len(), model.d(), "evaluation point must have dimension d");
    debug_assert!(x.iter().all(|v| v.is_finite()));
    m as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::SequenceFamily;

    fn wk(d: usize, r: f64, g: f64) -> KernelModel {
        KernelModel::weighted_korobov(
            d,
            SequenceFamily::Constant { c: r },
            SequenceFamily::Constant { c: g },
        )
        .unwrap()
    }

    fn ek(d: usize, omega: f64) -> KernelModel {
        KernelModel::exp_korobov(
            d,
            SequenceFamily::Constant { c: 1.0 },
            SequenceFamily::Constant { c: 1.0 },
            omega,
        )
        .unwrap()
    }

    #[test]
    fn korobov_d1_first_five() {
        let entries = enumerate_spectrum(&wk(1, 1.0, 1.0), 5).unwrap();
        let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
        assert_eq!(values, vec![1.0, 1.0, 1.0, 0.25, 0.25]);
        let indices: Vec<Vec<i32>> = entries.iter().map(|e| e.index.clone()).collect();
        assert_eq!(indices, vec![vec![0], vec![1], vec![-1], vec![2], vec![-2]]);
        assert_eq!(entries[4].rank, 5);
    }

    #[test]
    fn exp_d2_first_four() {
        let entries = enumerate_spectrum(&ek(2, 0.5), 4).unwrap();
        let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
        assert_eq!(values, vec![1.0, 0.5, 0.5, 0.5]);
        let indices: Vec<Vec<i32>> = entries.iter().map(|e| e.index.clone()).collect();
        assert_eq!(indices, vec![vec![0, 0], vec![0, 1], vec![0, -1], vec![1, 0]]);
    }

    #[test]
    fn tie_run_interleaves_across_groups() {
        // r = g = 1 in d = 2: the nine indices with |h_j| ≤ 1 all have
        // eigenvalue exactly 1, and must come out in full signed-lex order.
        let entries = enumerate_spectrum(&wk(2, 1.0, 1.0), 9).unwrap();
        assert!(entries.iter().all(|e| e.value == 1.0));
        let indices: Vec<Vec<i32>> = entries.iter().map(|e| e.index.clone()).collect();
        assert_eq!(
            indices,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, -1],
                vec![1, 0],
                vec![1, 1],
                vec![1, -1],
                vec![-1, 0],
                vec![-1, 1],
                vec![-1, -1],
            ]
        );
    }

    #[test]
    fn values_nonincreasing_and_match_index_product() {
        for model in [wk(3, 1.0, 0.5), ek(3, 0.4)] {
            let entries = enumerate_spectrum(&model, 300).unwrap();
            for w in entries.windows(2) {
                assert!(w[0].value >= w[1].value);
            }
            for e in &entries {
                let mut want = 1.0f64;
                for (j, &h) in e.index.iter().enumerate() {
                    want *= model.coordinate_factor(j + 1, h.unsigned_abs() as u64);
                }
                assert_eq!(e.value, want, "index {:?}", e.index);
            }
        }
    }

    #[test]
    fn mini_brute_force_oracle_d2() {
        // Exact multiset equality against a brute-force box enumeration.
        let model = ek(2, 0.5);
        let count = 200;
        let mut brute: Vec<f64> = Vec::new();
        let bound = 40i32;
        for h1 in -bound..=bound {
            for h2 in -bound..=bound {
                let mut v = 1.0f64;
                v *= model.coordinate_factor(1, h1.unsigned_abs() as u64);
                v *= model.coordinate_factor(2, h2.unsigned_abs() as u64);
                brute.push(v);
            }
        }
        brute.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
        let entries = enumerate_spectrum(&model, count).unwrap();
        for (e, b) in entries.iter().zip(brute.iter()) {
            assert_eq!(e.value, *b);
        }
    }

    #[test]
    fn partial_and_tail_sums_are_consistent() {
        let mut s = Spectrum::new(wk(2, 1.0, 0.5)).unwrap();
        assert_eq!(s.partial_sum(0), 0.0);
        assert_eq!(s.tail_sum(0), s.trace());
        let trace = s.trace();
        let mut prev_tail = f64::INFINITY;
        for n in [1u64, 2, 3, 10, 100, 1000, 5000] {
            let p = s.partial_sum(n);
            let t = s.tail_sum(n);
            assert!(t <= prev_tail + 1e-12 * trace);
            assert!((p + t - trace).abs() <= 1e-12 * trace);
            prev_tail = t;
        }
        // Deep tails decay; for r=1 the tail goes like (ln n)^2/n, so at
        // n = 20000 expect roughly half a percent of the trace.
        let deep = s.tail_sum(20_000);
        assert!(deep > 0.0);
        assert!(deep < 0.02 * trace, "tail {deep} vs trace {trace}");
    }

    #[test]
    fn value_at_matches_entries() {
        let mut s = Spectrum::new(ek(2, 0.3)).unwrap();
        let vals: Vec<f64> = s.entries(50).iter().map(|e| e.value).collect();
        for (i, v) in vals.iter().enumerate() {
            assert_eq!(s.value_at(i as u64 + 1), *v);
        }
    }

    #[test]
    fn trace_overflow_flag() {
        let model = wk(800, 1.0, 1.0); // 4.29^800 overflows f64
        let s = Spectrum::new(model).unwrap();
        assert!(s.trace_overflowed());
        assert!(s.log_trace().is_finite());
        let expected_log = 800.0 * 4.2898681336964528729f64.ln();
        assert!((s.log_trace() - expected_log).abs() < 1e-9 * expected_log);
    }

    #[test]
    fn christoffel_is_exactly_m() {
        let model = ek(2, 0.5);
        assert_eq!(christoffel(&model, 7, &[0.3, 0.9]), 7.0);
        assert_eq!(christoffel(&model, 1, &[0.0, 0.0]), 1.0);
    }
}
