//! Multisets of size q over [n], stored as sorted index vectors and ranked in
//! colexicographic order of the associated strictly increasing sequence
//! c_k = i_k + k.

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc as usize
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Number of multisets of size q over [n].
pub fn multiset_count(n: usize, q: usize) -> usize {
    if q == 0 {
        1
    } else if n == 0 {
        0
    } else {
        binom(n + q - 1, q)
    }
}

pub fn rank(sorted: &[usize]) -> usize {
    sorted.iter().enumerate().map(|(k, &i)| binom(i + k, k + 1)).sum()
}

/// Rank of an arbitrary ordering of a multiset.
pub fn rank_unsorted(idx: &[usize]) -> usize {
    let mut v = idx.to_vec();
    v.sort_unstable();
    rank(&v)
}

pub fn unrank(mut r: usize, q: usize, out: &mut Vec<usize>) {
    out.clear();
    out.resize(q, 0);
    for k in (0..q).rev() {
        // largest c with C(c, k+1) <= r
        let mut lo = k;
        let mut hi = k + 1;
        while binom(hi, k + 1) <= r {
            hi *= 2;
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if binom(mid, k + 1) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        r -= binom(lo, k + 1);
        out[k] = lo - k;
    }
}

/// Number of distinct orderings q!/∏ m_i! of a sorted multiset.
pub fn multiplicity(sorted: &[usize]) -> f64 {
    let mut denom = 1.0;
    let mut run = 1usize;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
            denom *= run as f64;
        } else {
            run = 1;
        }
    }
    factorial(sorted.len()) / denom
}

/// (value, count) pairs of a sorted multiset.
pub fn runs(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &i in sorted {
        match out.last_mut() {
            Some((v, c)) if *v == i => *c += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

/// Iterates all multisets of size q over [n] in rank order.
pub fn for_each_multiset(n: usize, q: usize, mut f: impl FnMut(usize, &[usize])) {
    let total = multiset_count(n, q);
    let mut buf = Vec::with_capacity(q);
    for r in 0..total {
        unrank(r, q, &mut buf);
        f(r, &buf);
    }
}

/// Merges two sorted slices into `out`.
pub fn merge_sorted(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// All sub-multisets of size `a` of a sorted multiset, each with its
/// complement and the hypergeometric weight ∏ C(m_i, a_i) / C(|ms|, a).
pub fn splits(sorted: &[usize], a: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let rs = runs(sorted);
    let total = binom(sorted.len(), a) as f64;
    let mut out = Vec::new();
    let mut take = vec![0usize; rs.len()];
    fn rec(
        rs: &[(usize, usize)],
        pos: usize,
        left: usize,
        take: &mut Vec<usize>,
        total: f64,
        out: &mut Vec<(Vec<usize>, Vec<usize>, f64)>,
    ) {
        if pos == rs.len() {
            if left == 0 {
                let mut a = Vec::new();
                let mut b = Vec::new();
                let mut w = 1.0;
                for (&(v, c), &t) in rs.iter().zip(take.iter()) {
                    a.extend(std::iter::repeat_n(v, t));
                    b.extend(std::iter::repeat_n(v, c - t));
                    w *= binom(c, t) as f64;
                }
                out.push((a, b, w / total));
            }
            return;
        }
        let cap = rs[pos].1.min(left);
        for t in 0..=cap {
            take[pos] = t;
            rec(rs, pos + 1, left - t, take, total, out);
        }
        take[pos] = 0;
    }
    rec(&rs, 0, a, &mut take, total, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_is_bijective() {
        for (n, q) in [(1, 3), (3, 2), (4, 3), (5, 4), (2, 0)] {
            let total = multiset_count(n, q);
            let mut seen = vec![false; total];
            let mut buf = Vec::new();
            for r in 0..total {
                unrank(r, q, &mut buf);
                assert!(buf.windows(2).all(|w| w[0] <= w[1]));
                assert!(buf.iter().all(|&i| i < n));
                assert_eq!(rank(&buf), r);
                seen[r] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(&[0, 0]), 1.0);
        assert_eq!(multiplicity(&[0, 1]), 2.0);
        assert_eq!(multiplicity(&[0, 0, 1]), 3.0);
        assert_eq!(multiplicity(&[0, 1, 2]), 6.0);
        assert_eq!(multiplicity(&[]), 1.0);
        // Σ over multisets of multiplicity = n^q
        let mut s = 0.0;
        for_each_multiset(4, 3, |_, m| s += multiplicity(m));
        assert_eq!(s, 64.0);
    }

    #[test]
    fn split_weights_sum_to_one() {
        let sp = splits(&[0, 0, 1, 2], 2);
        let w: f64 = sp.iter().map(|s| s.2).sum();
        assert!((w - 1.0).abs() < 1e-15);
        assert_eq!(sp.len(), 4); // {00},{01},{02},{12}
    }
}
