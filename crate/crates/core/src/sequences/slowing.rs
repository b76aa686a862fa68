//! Time slowing: G_n = F_k for φ(k−1) < n ≤ φ(k). The slowed filtration has
//! the same nature as F, so a question about (G_n)_{n∈Q} is answered on the
//! original axis by the set {k : G_t = F_k for some t ∈ Q}.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::extraction::{analyze_extraction, ExtractionAnalysis, ExtractionSet};
use super::{index_of_depth, LengthSequence, SequenceError};

/// An increasing map φ with φ(0) = 0, stored on depths: j ↦ −φ(−j).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SlowingMap {
    Identity,
    /// φ(−1) = −1, φ(2k) = −2^|k|, φ(2k−1) = −2^|k| − 1 for k ≤ −1.
    RepeatedInterlinking,
    /// Depth images of 0, 1, 2, ... (finite horizon only).
    Explicit { depths: Vec<u64> },
}

impl SlowingMap {
    /// Slowed depth of original depth j.
    pub fn image(&self, j: u64) -> Option<u64> {
        match self {
            SlowingMap::Identity => Some(j),
            SlowingMap::RepeatedInterlinking => match j {
                0 | 1 => Some(j),
                _ => {
                    let m = j / 2;
                    let base = 1u64.checked_shl(m as u32).filter(|_| m < 63)?;
                    Some(if j % 2 == 0 { base } else { base + 1 })
                }
            },
            SlowingMap::Explicit { depths } => depths.get(j as usize).copied(),
        }
    }

    pub fn validate(&self, horizon: u64) -> Result<(), SequenceError> {
        let mut prev = None;
        for j in 0..=horizon {
            let v = self.image(j).ok_or_else(|| {
                SequenceError::OutsideHorizon(format!("φ undefined at n={}", index_of_depth(j)))
            })?;
            if j == 0 && v != 0 {
                return Err(SequenceError::InvalidExtraction("φ(0) must be 0".into()));
            }
            if prev.is_some_and(|p| v <= p) {
                return Err(SequenceError::InvalidExtraction("φ must be strictly increasing".into()));
            }
            prev = Some(v);
        }
        Ok(())
    }

    /// Original depth j with G_t = F_j, i.e. the largest j with image(j) ≤ t.
    pub fn source(&self, t: u64, horizon: u64) -> u64 {
        let mut j = 0;
        while j < horizon && self.image(j + 1).is_some_and(|v| v <= t) {
            j += 1;
        }
        j
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SlowingResult {
    pub original_horizon: u64,
    pub slowed_horizon: u64,
    /// (slowed n, original k) pairs with G_n = F_k; omitted past 4096 rows.
    pub table: Option<Vec<(i64, i64)>>,
    /// Induced original-axis indices inside the horizon.
    pub induced_within_horizon: Vec<i64>,
    /// Full ultimately periodic induced set when the map has a known tail.
    pub induced: Option<ExtractionSet>,
}

const TABLE_LIMIT: u64 = 4096;

/// Whether the query meets the interval [lo, hi] of slowed depths.
fn meets(query: &ExtractionSet, lo: u64, hi: u64) -> bool {
    let scan_end = hi.min(lo.max(query.tail_start).saturating_add(query.period));
    (lo..=scan_end).any(|t| query.contains(t))
}

fn check_query(query: &ExtractionSet, slowed_horizon: u64) -> Result<(), SequenceError> {
    query.validate()?;
    if query.head.iter().any(|&t| t > slowed_horizon) || query.tail_start > slowed_horizon {
        return Err(SequenceError::OutsideHorizon(format!(
            "query reaches below the slowed horizon n={}",
            index_of_depth(slowed_horizon)
        )));
    }
    Ok(())
}

/// Induced set for the repeated-interlinking map: odd depth 2m+1 covers the
/// slowed interval [2^m+1, 2^(m+1)−1] and even depth 2m the single point 2^m.
fn interlinking_tail(query: &ExtractionSet) -> ExtractionSet {
    let p = query.period;
    let in_even = |m: u64| -> bool {
        let t = 1u64 << m;
        query.contains(t)
    };
    let in_odd = |m: u64| meets(query, (1u64 << m) + 1, (1u64 << (m + 1)) - 1);
    // From m0 on, 2^m ≥ tail_start and 2^m − 1 ≥ period, and 2^m mod p is
    // periodic in m with some period λ.
    let mut m0 = 1u64;
    while (1u64 << m0) < query.tail_start.max(p + 1) {
        m0 += 1;
    }
    let mut seen: HashMap<u64, u64> = HashMap::new();
    let mut m = m0;
    let (mu, lambda) = loop {
        let r = pow_mod(2, m, p);
        if let Some(&first) = seen.get(&r) {
            break (first, m - first);
        }
        seen.insert(r, m);
        m += 1;
    };
    let start = 2 * mu;
    let period = 2 * lambda;
    let mut residues = BTreeSet::new();
    for k in mu..mu + lambda {
        if in_even(k) {
            residues.insert((2 * k) % period);
        }
        residues.insert((2 * k + 1) % period);
    }
    let head = (0..start)
        .filter(|&j| match j {
            0 | 1 => query.contains(j),
            _ if j % 2 == 0 => in_even(j / 2),
            _ => in_odd(j / 2),
        })
        .collect();
    ExtractionSet { head, tail_start: start, period, residues }
}

fn pow_mod(base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    let mut b = base % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Maps a query on the slowed axis to the original axis, for a filtration
/// known on depths 0..=horizon.
pub fn slow(map: &SlowingMap, horizon: u64, query: &ExtractionSet) -> Result<SlowingResult, SequenceError> {
    map.validate(horizon)?;
    let slowed_horizon = map.image(horizon).expect("validated");
    check_query(query, slowed_horizon)?;
    let table = (slowed_horizon <= TABLE_LIMIT).then(|| {
        (0..=slowed_horizon)
            .map(|t| (index_of_depth(t), index_of_depth(map.source(t, horizon))))
            .collect()
    });
    let induced_within_horizon: Vec<i64> = (0..=horizon)
        .filter(|&j| {
            let lo = map.image(j).unwrap();
            let hi = if j < horizon { map.image(j + 1).unwrap() - 1 } else { lo };
            meets(query, lo, hi)
        })
        .map(index_of_depth)
        .collect();
    let induced = match map {
        SlowingMap::Identity => Some(query.clone()),
        SlowingMap::RepeatedInterlinking => Some(interlinking_tail(query)),
        SlowingMap::Explicit { .. } => None,
    };
    Ok(SlowingResult { original_horizon: horizon, slowed_horizon, table, induced_within_horizon, induced })
}

#[derive(Debug, Clone, Serialize)]
pub struct SlowedAnalysis {
    pub slowing: SlowingResult,
    /// Classification of the induced extraction of the original sequence;
    /// the slowed question has the same answer.
    pub extraction: Option<ExtractionAnalysis>,
}

/// `query` lives on the slowed axis; the original sequence is `seq`.
pub fn classify_slowed(
    seq: &LengthSequence,
    map: &SlowingMap,
    query: &ExtractionSet,
) -> Result<SlowedAnalysis, SequenceError> {
    let slowing = slow(map, seq.depth(), query)?;
    let extraction = match &slowing.induced {
        Some(set) => {
            // Head points below the horizon only affect the undefined
            // deepest ratio; the verdict comes from the tail pattern.
            let mut set = set.clone();
            set.head.retain(|&d| d <= seq.depth());
            Some(analyze_extraction(seq, &set)?)
        }
        None => None,
    };
    Ok(SlowedAnalysis { slowing, extraction })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn depths(xs: &[i64]) -> Vec<u64> {
        xs.iter().map(|&n| (-n) as u64).collect()
    }

    #[test]
    fn interlinking_map_values() {
        let m = SlowingMap::RepeatedInterlinking;
        let v: Vec<u64> = (0..10).map(|j| m.image(j).unwrap()).collect();
        assert_eq!(v, [0, 1, 2, 3, 4, 5, 8, 9, 16, 17]);
        assert!(m.validate(20).is_ok());
    }

    #[test]
    fn identity_maps_query_to_itself() {
        let q = ExtractionSet::odds();
        let r = slow(&SlowingMap::Identity, 10, &q).unwrap();
        assert_eq!(r.induced, Some(q));
        assert_eq!(depths(&r.induced_within_horizon), [1, 3, 5, 7, 9]);
    }

    #[test]
    fn full_query_induces_full_horizon() {
        let r = slow(&SlowingMap::RepeatedInterlinking, 12, &ExtractionSet::all()).unwrap();
        assert_eq!(depths(&r.induced_within_horizon), (0..=12).collect::<Vec<_>>());
        let set = r.induced.unwrap();
        assert!((0..200).all(|d| set.contains(d)));
    }

    /// Direct evaluation: G_t = F_{source(t)} for every t on the slowed
    /// horizon, collected for t in the query.
    fn brute_induced(horizon: u64, q: &ExtractionSet) -> Vec<u64> {
        let m = SlowingMap::RepeatedInterlinking;
        let top = m.image(horizon).unwrap();
        let set: BTreeSet<u64> = (0..=top).filter(|&t| q.contains(t)).map(|t| m.source(t, horizon)).collect();
        set.into_iter().collect()
    }

    #[test]
    fn dyadic_queries_reduce_to_tail_and_odd_extractions() {
        let horizon = 12;
        for d in 1..=3u32 {
            let step = 1u64 << d;
            let even_q = ExtractionSet::residue_class(step, 0);
            let r = slow(&SlowingMap::RepeatedInterlinking, horizon, &even_q).unwrap();
            let got = depths(&r.induced_within_horizon);
            assert_eq!(got, brute_induced(horizon, &even_q));
            // Everything from depth 2d+2 on is hit.
            let cut = 2 * d as u64 + 2;
            assert!((cut..=horizon).all(|j| got.contains(&j)), "d={d}: {got:?}");
            let tail = r.induced.unwrap();
            assert!((cut..400).all(|j| tail.contains(j)));

            let odd_q = ExtractionSet::residue_class(step, step / 2);
            let r = slow(&SlowingMap::RepeatedInterlinking, horizon, &odd_q).unwrap();
            let got = depths(&r.induced_within_horizon);
            assert_eq!(got, brute_induced(horizon, &odd_q));
            let tail = r.induced.unwrap();
            // Deep enough, exactly the odd depths.
            for j in (2 * d as u64 + 2)..400 {
                assert_eq!(tail.contains(j), j % 2 == 1, "d={d} j={j}");
            }
            for &j in &got {
                assert!(tail.contains(j));
            }
        }
    }

    #[test]
    fn queries_outside_the_horizon_fail() {
        let mut q = ExtractionSet::all();
        q.tail_start = 100;
        q.head = (0..100).collect();
        assert!(matches!(
            slow(&SlowingMap::RepeatedInterlinking, 6, &q),
            Err(SequenceError::OutsideHorizon(_))
        ));
    }
}
