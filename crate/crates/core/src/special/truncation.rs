/// How an infinite sum is cut off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TruncationPolicy {
    /// Sum exactly `cutoff` terms and report whatever tail bound can be proven.
    Fixed { cutoff: u64 },
    /// Choose the smallest admissible cutoff whose proven tail bound is at
    /// most `tolerance`, never exceeding `max_cutoff`.
    TailBound { tolerance: f64, max_cutoff: u64 },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::TailBound {
            tolerance: 1e-12,
            max_cutoff: 100_000,
        }
    }
}

/// The cutoff actually used together with a proven upper bound on the
/// omitted tail of that specific sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    pub cutoff: u64,
    pub tail_bound: f64,
}
