//! Subset counting and colexicographic enumeration.

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) / (i + 1) is C(n, i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Calls `visit` with every `k`-subset of `0..n` as a strictly increasing
/// slice, in colexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut visit: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        visit(&comb);
        // advance the lowest position that can move up without colliding
        let mut i = 0;
        while i < k {
            let limit = if i + 1 < k { comb[i + 1] } else { n };
            if comb[i] + 1 < limit {
                break;
            }
            i += 1;
        }
        if i == k {
            return;
        }
        comb[i] += 1;
        for (j, slot) in comb.iter_mut().enumerate().take(i) {
            *slot = j;
        }
    }
}
