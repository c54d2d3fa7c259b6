//! Integer partitions as multiplicity sequences, their size distribution
//! functions, exhaustive enumeration, and partition-number arithmetic.
//!
//! A partition of `M` is stored as the map `k -> p_k` (part size to count);
//! the mass `Σ k·p_k` is cached. The size distribution `f(x) = Σ_{k≥x} p_k`
//! counts parts of size at least `x`; its subgraph is the Young diagram and
//! its integral recovers the mass exactly.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default cap on exhaustive enumeration (p(60) = 966_467 partitions).
pub const DEFAULT_ENUMERATION_CAP: u64 = 60;

/// An integer partition encoded by part multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    multiplicities: BTreeMap<u64, u64>,
    mass: u64,
}

impl Partition {
    /// The empty partition (the single partition of zero).
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a partition from explicit parts, e.g. `[5, 3, 2, 2, 1, 1]`.
    pub fn from_parts<I: IntoIterator<Item = u64>>(parts: I) -> Result<Self> {
        let mut multiplicities = BTreeMap::new();
        for part in parts {
            if part == 0 {
                return Err(Error::InvalidConfig("partition part must be >= 1".into()));
            }
            *multiplicities.entry(part).or_insert(0) += 1;
        }
        Self::from_multiplicities(multiplicities)
    }

    /// Builds a partition from a multiplicity map; zero counts are dropped.
    pub fn from_multiplicities(multiplicities: BTreeMap<u64, u64>) -> Result<Self> {
        let mut cleaned = BTreeMap::new();
        let mut mass: u64 = 0;
        for (k, count) in multiplicities {
            if count == 0 {
                continue;
            }
            if k == 0 {
                return Err(Error::InvalidConfig("partition part must be >= 1".into()));
            }
            let add = k.checked_mul(count).ok_or_else(|| {
                Error::InvalidConfig("partition mass overflows u64".into())
            })?;
            mass = mass.checked_add(add).ok_or_else(|| {
                Error::InvalidConfig("partition mass overflows u64".into())
            })?;
            cleaned.insert(k, count);
        }
        Ok(Self {
            multiplicities: cleaned,
            mass,
        })
    }

    /// Total mass `Σ k·p_k` (the number of monomers).
    pub fn mass(&self) -> u64 {
        self.mass
    }

    /// Multiplicity of parts of size `k`.
    pub fn multiplicity(&self, k: u64) -> u64 {
        self.multiplicities.get(&k).copied().unwrap_or(0)
    }

    /// Number of parts, `Σ p_k`.
    pub fn num_parts(&self) -> u64 {
        self.multiplicities.values().sum()
    }

    /// Iterates over `(k, p_k)` pairs with `p_k > 0`, ascending in `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.multiplicities.iter().map(|(&k, &c)| (k, c))
    }

    /// Number of parts with size `>= x` (counts over the stored map).
    pub fn count_parts_at_least(&self, x: f64) -> u64 {
        if x <= 1.0 {
            return self.num_parts();
        }
        let threshold = x.ceil() as u64;
        self.multiplicities.range(threshold..).map(|(_, &c)| c).sum()
    }

    /// Total mass held in parts with size `>= x`.
    pub fn mass_at_least(&self, x: f64) -> u64 {
        if x <= 1.0 {
            return self.mass;
        }
        let threshold = x.ceil() as u64;
        self.multiplicities
            .range(threshold..)
            .map(|(&k, &c)| k * c)
            .sum()
    }

    /// The size distribution function of this partition.
    pub fn size_distribution(&self) -> SizeDistribution {
        let mut breakpoints: Vec<(u64, u64)> = Vec::with_capacity(self.multiplicities.len());
        let mut suffix = 0u64;
        for (&k, &count) in self.multiplicities.iter().rev() {
            suffix += count;
            breakpoints.push((k, suffix));
        }
        breakpoints.reverse();
        SizeDistribution {
            breakpoints,
            mass: self.mass,
        }
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // {"parts": {"k": p_k, ...}}
        #[derive(Serialize)]
        struct Wire<'a> {
            parts: PartsMap<'a>,
        }
        struct PartsMap<'a>(&'a BTreeMap<u64, u64>);
        impl Serialize for PartsMap<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(&k.to_string(), v)?;
                }
                map.end()
            }
        }
        Wire {
            parts: PartsMap(&self.multiplicities),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            parts: BTreeMap<String, u64>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let mut multiplicities = BTreeMap::new();
        for (k, v) in wire.parts {
            let k: u64 = k.parse().map_err(D::Error::custom)?;
            multiplicities.insert(k, v);
        }
        Partition::from_multiplicities(multiplicities).map_err(D::Error::custom)
    }
}

/// Right-evaluated step representation of `f(x; p) = Σ_{k≥x} p_k`.
///
/// Breakpoints are the distinct part sizes in ascending order; the stored
/// value at breakpoint `k` is the count of parts of size `>= k`, so the
/// function is constant on each interval `(k_{i-1}, k_i]` and zero beyond
/// the largest part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeDistribution {
    /// `(part size, number of parts >= that size)`, ascending in part size.
    breakpoints: Vec<(u64, u64)>,
    mass: u64,
}

impl SizeDistribution {
    /// Evaluates `f(x) = Σ_{k≥x} p_k`.
    pub fn value_at(&self, x: f64) -> u64 {
        if self.breakpoints.is_empty() {
            return 0;
        }
        if x <= 1.0 {
            return self.breakpoints[0].1;
        }
        let threshold = x.ceil() as u64;
        match self
            .breakpoints
            .binary_search_by_key(&threshold, |&(k, _)| k)
        {
            Ok(i) => self.breakpoints[i].1,
            Err(i) if i < self.breakpoints.len() => self.breakpoints[i].1,
            Err(_) => 0,
        }
    }

    /// Exact integral `∫_0^∞ f(x) dx`, computed in integer arithmetic.
    ///
    /// Equals the mass of the generating partition.
    pub fn total_integral(&self) -> u64 {
        let mut total = 0u64;
        let mut prev = 0u64;
        for &(k, value) in &self.breakpoints {
            total += (k - prev) * value;
            prev = k;
        }
        total
    }

    /// Mass of the generating partition.
    pub fn mass(&self) -> u64 {
        self.mass
    }

    /// Breakpoints `(k, f(k))` ascending in `k`.
    pub fn breakpoints(&self) -> &[(u64, u64)] {
        &self.breakpoints
    }

    /// True if the stored values are non-increasing in `x`.
    pub fn is_non_increasing(&self) -> bool {
        self.breakpoints.windows(2).all(|w| w[0].1 >= w[1].1)
    }

    /// CSV rows `x,f` (one row per breakpoint plus the trailing zero).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,f\n");
        for &(k, v) in &self.breakpoints {
            out.push_str(&format!("{k},{v}\n"));
        }
        if let Some(&(k_max, _)) = self.breakpoints.last() {
            out.push_str(&format!("{},0\n", k_max + 1));
        }
        out
    }
}

/// Calls `visit` once for every partition of `m`, in deterministic order:
/// largest part first, recursing with non-increasing parts.
///
/// The visitor receives parts in non-increasing order.
pub fn visit_partitions<F: FnMut(&[u64])>(m: u64, visit: &mut F) {
    let mut parts = Vec::new();
    fn recurse<F: FnMut(&[u64])>(remaining: u64, max_part: u64, parts: &mut Vec<u64>, visit: &mut F) {
        if remaining == 0 {
            visit(parts);
            return;
        }
        let mut k = remaining.min(max_part);
        while k >= 1 {
            parts.push(k);
            recurse(remaining - k, k, parts, visit);
            parts.pop();
            k -= 1;
        }
    }
    recurse(m, m.max(1), &mut parts, visit);
}

/// Enumerates every partition of `m` exactly once (deterministic order:
/// decreasing largest part).
///
/// Fails if `m` exceeds [`DEFAULT_ENUMERATION_CAP`]; use
/// [`enumerate_partitions_with_cap`] to raise the cap deliberately.
pub fn enumerate_partitions(m: u64) -> Result<Vec<Partition>> {
    enumerate_partitions_with_cap(m, DEFAULT_ENUMERATION_CAP)
}

/// Enumeration with an explicit cap.
pub fn enumerate_partitions_with_cap(m: u64, cap: u64) -> Result<Vec<Partition>> {
    if m > cap {
        return Err(Error::EnumerationCap { requested: m, cap });
    }
    let mut out = Vec::new();
    visit_partitions(m, &mut |parts| {
        out.push(Partition::from_parts(parts.iter().copied()).expect("parts are positive"));
    });
    Ok(out)
}

/// Partition number `Q_M` via the Euler pentagonal-number recurrence, in
/// exact big-integer arithmetic.
pub fn partition_number(m: u64) -> BigUint {
    partition_numbers_up_to(m)
        .pop()
        .expect("table has m + 1 entries")
}

/// Table `[Q_0, ..., Q_m]` from the pentagonal recurrence.
pub fn partition_numbers_up_to(m: u64) -> Vec<BigUint> {
    let m = m as usize;
    let mut table: Vec<BigUint> = Vec::with_capacity(m + 1);
    table.push(BigUint::from(1u32));
    for n in 1..=m {
        // Q_n = Σ_k (-1)^{k+1} [Q_{n-g_k} + Q_{n-h_k}],
        // g_k = k(3k-1)/2, h_k = k(3k+1)/2.
        let mut acc_pos = BigUint::ZERO;
        let mut acc_neg = BigUint::ZERO;
        let mut k = 1usize;
        loop {
            let g = k * (3 * k - 1) / 2;
            if g > n {
                break;
            }
            let positive = k % 2 == 1;
            let mut contrib = table[n - g].clone();
            let h = k * (3 * k + 1) / 2;
            if h <= n {
                contrib += &table[n - h];
            }
            if positive {
                acc_pos += contrib;
            } else {
                acc_neg += contrib;
            }
            k += 1;
        }
        table.push(acc_pos - acc_neg);
    }
    table
}

/// The Hardy-Ramanujan asymptotic `exp(π√(2M/3)) / (4M√3)` for `Q_M`.
pub fn hardy_ramanujan_estimate(m: u64) -> f64 {
    assert!(m >= 1, "hardy_ramanujan_estimate requires m >= 1");
    let m = m as f64;
    let pi = std::f64::consts::PI;
    (pi * (2.0 * m / 3.0).sqrt()).exp() / (4.0 * m * 3.0_f64.sqrt())
}

/// Ratio `Q_M / hardy_ramanujan_estimate(M)`; tends to 1 as `M` grows.
pub fn hardy_ramanujan_ratio(m: u64) -> f64 {
    let q = partition_number(m)
        .to_f64()
        .expect("partition number fits in f64 for moderate m");
    q / hardy_ramanujan_estimate(m)
}
