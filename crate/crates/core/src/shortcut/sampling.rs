//! Keyed counter-based sampling.
//!
//! Every Bernoulli trial is a pure function of `(seed, large part index,
//! repetition, domain, tail, head)`. A node can therefore evaluate its own
//! trials without coordination, and the centralized and distributed builders
//! agree bit for bit. A trial succeeds iff its uniform draw in `[0, 1)` is
//! below `p`, so raising `p` never turns a success into a failure.

use crate::graph::{Graph, VertexId};

/// Sampling domains. Odd mode samples the two halves of a subdivided edge
/// under separate domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub(crate) enum Domain {
    Even = 0x45_56_45_4e,
    OddTail = 0x4f_44_44_54,
    OddDummy = 0x4f_44_44_44,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix(state.wrapping_add(GOLDEN) ^ word)
}

/// Key of one (part, repetition, domain) stream.
#[inline]
pub(crate) fn stream_key(seed: u64, large_index: u32, rep: u32, domain: Domain) -> u64 {
    let s = absorb(absorb(mix(seed), domain as u64), large_index as u64);
    absorb(s, rep as u64)
}

/// Key of the directed arc `tail -> head`.
#[inline]
pub(crate) fn arc_key(tail: VertexId, head: VertexId) -> u64 {
    absorb(absorb(0x0061_7263, tail as u64), head as u64)
}

/// 53-bit uniform draw; the real value is `draw * 2^-53`.
#[inline]
pub(crate) fn draw(stream: u64, arc: u64) -> u64 {
    mix(stream ^ arc) >> 11
}

/// Integer threshold `t` with `draw * 2^-53 < p  <=>  draw < t`.
pub(crate) fn threshold(p: f64) -> u64 {
    debug_assert!((0.0..=1.0).contains(&p));
    // scaling by a power of two is exact, and draw is an integer
    (p * (1u64 << 53) as f64).ceil() as u64
}

/// Uniform value of one trial in `[0, 1)`, for diagnostics and tests.
pub fn uniform(seed: u64, large_index: u32, rep: u32, tail: VertexId, head: VertexId) -> f64 {
    let d = draw(stream_key(seed, large_index, rep, Domain::Even), arc_key(tail, head));
    d as f64 / (1u64 << 53) as f64
}

/// Arc keys for every CSR slot, computed once per graph.
pub(crate) fn slot_keys(graph: &Graph) -> Vec<u64> {
    let mut keys = Vec::with_capacity(graph.slot_count());
    for u in 0..graph.n() {
        keys.extend(graph.neighbors(u).iter().map(|&v| arc_key(u, v)));
    }
    keys
}

/// Per-repetition trial for one arc, shared by both builders.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Sampler {
    even: bool,
    threshold: u64,
    seed: u64,
}

impl Sampler {
    /// Even mode: one trial with probability `p`. Odd mode: two independent
    /// half trials with probability `sqrt(p)`, both required.
    pub(crate) fn new(seed: u64, p: f64, even: bool) -> Self {
        let q = if even { p } else { p.sqrt() };
        Self {
            even,
            threshold: threshold(q),
            seed,
        }
    }

    pub(crate) fn streams(&self, large_index: u32, rep: u32) -> (u64, u64) {
        if self.even {
            (stream_key(self.seed, large_index, rep, Domain::Even), 0)
        } else {
            (
                stream_key(self.seed, large_index, rep, Domain::OddTail),
                stream_key(self.seed, large_index, rep, Domain::OddDummy),
            )
        }
    }

    #[inline]
    pub(crate) fn keep(&self, streams: (u64, u64), arc: u64) -> bool {
        let first = draw(streams.0, arc) < self.threshold;
        if self.even {
            first
        } else {
            first && draw(streams.1, arc) < self.threshold
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_matches_real_comparison() {
        for &p in &[0.0, 1e-9, 0.0625, 1.0 / 3.0, 0.5, 0.999_999, 1.0] {
            let t = threshold(p);
            for d in [0u64, 1, t.saturating_sub(1), t, t + 1, (1 << 53) - 1] {
                let real = d as f64 / (1u64 << 53) as f64;
                assert_eq!(d < t, real < p, "p = {p}, d = {d}");
            }
        }
        assert_eq!(threshold(1.0), 1 << 53);
    }

    #[test]
    fn streams_differ_by_every_key_component() {
        let base = stream_key(1, 2, 3, Domain::Even);
        assert_ne!(base, stream_key(2, 2, 3, Domain::Even));
        assert_ne!(base, stream_key(1, 3, 3, Domain::Even));
        assert_ne!(base, stream_key(1, 2, 4, Domain::Even));
        assert_ne!(base, stream_key(1, 2, 3, Domain::OddTail));
        assert_ne!(arc_key(3, 5), arc_key(5, 3));
    }

    #[test]
    fn draws_look_uniform() {
        let s = stream_key(42, 1, 1, Domain::Even);
        let n = 200_000u64;
        let mut bins = [0u64; 16];
        for a in 0..n {
            let u = draw(s, arc_key(a as usize, (a + 1) as usize));
            bins[(u >> 49) as usize] += 1;
        }
        let expect = n as f64 / 16.0;
        let chi2: f64 = bins
            .iter()
            .map(|&b| (b as f64 - expect).powi(2) / expect)
            .sum();
        // 15 degrees of freedom, p-value ~ 1e-6
        assert!(chi2 < 50.0, "chi2 = {chi2}");
    }
}
