//! Small integer helpers shared by the group models.

/// Trial-division factorization of `n > 0` into `(prime, exponent)` pairs,
/// primes ascending. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// Exponent of `p` in `n` (`n != 0`).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0 && p >= 2);
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

/// Position of `v` in the sequence 0, 1, -1, 2, -2, ...
pub fn zigzag(v: i64) -> u64 {
    if v > 0 {
        2 * v as u64 - 1
    } else {
        2 * v.unsigned_abs()
    }
}

/// The integers `0, 1, -1, ..., bound, -bound` in zigzag order.
pub fn zigzag_range(bound: u64) -> impl Iterator<Item = i64> {
    let bound = bound as i64;
    std::iter::once(0).chain((1..=bound).flat_map(|k| [k, -k]))
}

/// `n(n-1)/2`, defined for negative `n` as well.
pub fn pair_count(n: i64) -> i64 {
    n * (n - 1) / 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorizations() {
        assert_eq!(factorize(1), vec![]);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(97), vec![(97, 1)]);
        assert!(is_prime(2) && is_prime(31) && !is_prime(1) && !is_prime(91));
        assert_eq!(valuation(48, 2), 4);
    }

    #[test]
    fn zigzag_order() {
        let seq: Vec<i64> = zigzag_range(2).collect();
        assert_eq!(seq, vec![0, 1, -1, 2, -2]);
        for (i, v) in seq.iter().enumerate() {
            assert_eq!(zigzag(*v), i as u64);
        }
        assert_eq!(pair_count(-1), 1);
        assert_eq!(pair_count(4), 6);
    }
}
