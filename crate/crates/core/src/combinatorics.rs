//! Binomial coefficients and rank/unrank maps for fixed-weight bitstrings and
//! fixed-total occupation vectors, both in occupancy-descending lexicographic
//! order (the state with everything packed to the left comes first).

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 1..=k {
        result = result * (n - (k - i)) as u128 / i as u128;
    }
    result
}

/// Number of occupation vectors on `parts` sites with `total` particles.
pub fn compositions(parts: usize, total: usize) -> u128 {
    if parts == 0 {
        return if total == 0 { 1 } else { 0 };
    }
    binomial(parts + total - 1, total)
}

/// Rank of a weight-`wt(mask)` bitstring among all `k`-bit strings of the same
/// weight, descending lexicographic on (b_0, b_1, ..., b_{k-1}).
pub fn weight_rank(k: usize, mask: u64) -> usize {
    let mut rank: u128 = 0;
    let mut remaining = mask.count_ones() as usize;
    for i in 0..k {
        if remaining == 0 {
            break;
        }
        if mask >> i & 1 == 1 {
            remaining -= 1;
        } else {
            rank += binomial(k - i - 1, remaining - 1);
        }
    }
    rank as usize
}

/// Inverse of [`weight_rank`]: the `rank`-th `k`-bit string of weight `n`.
pub fn weight_unrank(k: usize, n: usize, rank: usize) -> u64 {
    let mut rank = rank as u128;
    let mut mask = 0u64;
    let mut remaining = n;
    for i in 0..k {
        if remaining == 0 {
            break;
        }
        let ones_here = binomial(k - i - 1, remaining - 1);
        if rank < ones_here {
            mask |= 1 << i;
            remaining -= 1;
        } else {
            rank -= ones_here;
        }
    }
    mask
}

/// Rank of an occupation vector among all vectors with the same site count
/// and total, descending lexicographic.
pub fn occupation_rank(occ: &[u8]) -> usize {
    let k = occ.len();
    let mut remaining: usize = occ.iter().map(|&n| n as usize).sum();
    let mut rank: u128 = 0;
    for (site, &n) in occ.iter().enumerate() {
        let n = n as usize;
        for v in n + 1..=remaining {
            rank += compositions(k - site - 1, remaining - v);
        }
        remaining -= n;
    }
    rank as usize
}

/// Inverse of [`occupation_rank`], writing the result into `out`.
pub fn occupation_unrank(k: usize, n: usize, rank: usize, out: &mut [u8]) {
    debug_assert_eq!(out.len(), k);
    let mut rank = rank as u128;
    let mut remaining = n;
    for (site, slot) in out.iter_mut().enumerate() {
        let mut chosen = 0u8;
        for v in (0..=remaining).rev() {
            let block = compositions(k - site - 1, remaining - v);
            if rank < block {
                chosen = v as u8;
                break;
            }
            rank -= block;
        }
        *slot = chosen;
        remaining -= chosen as usize;
    }
}
