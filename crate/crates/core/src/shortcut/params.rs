use crate::error::{Error, Result};
use crate::graph::{PartLabel, Partition};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShortcutParams {
    pub n: usize,
    /// Claimed diameter; also the number of sampling repetitions.
    pub d: u32,
    /// `n^((D-2)/(2D-2))`.
    pub k_d: f64,
    /// `ceil(n / k_D)`.
    pub big_n: usize,
    pub log2_n: f64,
    pub c_p: f64,
    /// `c_p * k_D * log2(n) / N`, clamped to 1.
    pub p: f64,
}

impl ShortcutParams {
    pub fn repetitions(&self) -> u32 {
        self.d
    }

    pub fn is_even(&self) -> bool {
        self.d.is_multiple_of(2)
    }

    /// `ceil(k_D)`, the truncation depth used when identifying large parts.
    pub fn k_ceil(&self) -> u32 {
        self.k_d.ceil() as u32
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `n^(a/b)`, snapped to an integer `r` whenever `r^b == n^a` exactly.
fn rational_power(n: u64, a: u64, b: u64) -> f64 {
    let g = gcd(a, b).max(1);
    let (a, b) = (a / g, b / g);
    let approx = (n as f64).powf(a as f64 / b as f64);
    let r = approx.round();
    let exact = (|| {
        let lhs = (r as u128).checked_pow(u32::try_from(b).ok()?)?;
        let rhs = (n as u128).checked_pow(u32::try_from(a).ok()?)?;
        Some(lhs == rhs)
    })();
    if exact == Some(true) {
        r
    } else {
        approx
    }
}

pub fn compute_params(n: usize, d: u32, c_p: f64) -> Result<ShortcutParams> {
    if d < 3 {
        return Err(Error::DiameterTooSmall(d));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    if !(c_p.is_finite() && c_p >= 0.0) {
        return Err(Error::InvalidParameter(format!("c_p must be finite and >= 0, got {c_p}")));
    }
    let k_d = rational_power(n as u64, (d - 2) as u64, (2 * d - 2) as u64);
    let big_n = (n as f64 / k_d).ceil() as usize;
    let log2_n = (n as f64).log2();
    let p = (c_p * k_d * log2_n / big_n as f64).min(1.0);
    Ok(ShortcutParams {
        n,
        d,
        k_d,
        big_n: big_n.max(1),
        log2_n,
        c_p,
        p,
    })
}

/// Labels parts with `|S| <= k_D` as small; the rest are large and numbered
/// `1..` by ascending leader ID.
pub fn classify_parts(partition: &Partition, params: &ShortcutParams) -> Partition {
    let mut large: Vec<(usize, usize)> = partition
        .parts()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() as f64 > params.k_d)
        .map(|(i, _)| (partition.leader(i), i))
        .collect();
    large.sort_unstable();
    let mut labels = vec![PartLabel::Small; partition.len()];
    for (idx, &(_, i)) in large.iter().enumerate() {
        labels[i] = PartLabel::Large(idx as u32 + 1);
    }
    let mut out = partition.clone();
    out.set_labels(labels);
    out
}
