//! Analytic question-generation call counts: exhaustive expansion versus the
//! per-turn ceiling of the tree search.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QgcBounds {
    /// `((2m)^(d_s+1) - 1) / (2m - 1)` calls to grow the full tree once.
    pub exhaustive_first: u128,
    /// `(2m)^d_s` calls per later turn.
    pub exhaustive_subsequent: u128,
    /// `K * d_s`.
    pub mcts_max_per_turn: u128,
}

/// `None` when an argument is zero or a value overflows `u128`.
pub fn qgc_bounds(m: u32, d_s: u32, k: u32) -> Option<QgcBounds> {
    if m == 0 || d_s == 0 || k == 0 {
        return None;
    }
    let b = 2 * m as u128;
    let subsequent = b.checked_pow(d_s)?;
    let first = (b.checked_pow(d_s + 1)? - 1) / (b - 1);
    Some(QgcBounds {
        exhaustive_first: first,
        exhaustive_subsequent: subsequent,
        mcts_max_per_turn: k as u128 * d_s as u128,
    })
}
