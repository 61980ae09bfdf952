/// Nonincreasing allocations `k1 >= ... >= kr >= 1` of `k_total` with `k1 <= p`, lexicographically ordered.
pub fn enumerate_allocations(k_total: usize, r: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, cap: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left < slots {
            return;
        }
        let hi = cap.min(left - (slots - 1));
        let lo = left.div_ceil(slots);
        for v in lo..=hi {
            cur.push(v);
            rec(left - v, slots - 1, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r == 0 {
        return out;
    }
    rec(k_total, r, p, &mut Vec::with_capacity(r), &mut out);
    out.sort();
    out
}

/// `sum_i a_i ln(a_i / b_i)` on the raw tuples.
fn kl(a: &[usize], b: f64) -> f64 {
    a.iter().map(|&x| x as f64 * (x as f64 / b).ln()).sum()
}

/// KL divergence of `allocation` from the uniform split, relative to the largest over all feasible allocations.
pub fn kl_asymmetry(allocation: &[usize], k_total: usize, r: usize, p: usize) -> f64 {
    let u = k_total as f64 / r as f64;
    let max = enumerate_allocations(k_total, r, p).iter().map(|a| kl(a, u)).fold(0.0, f64::max);
    if max <= 0.0 {
        0.0
    } else {
        kl(allocation, u) / max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partitions_oracle(n: usize, r: usize, p: usize) -> usize {
        let mut c = 0;
        for a in 1..=n {
            for b in 1..=a {
                if r == 3 {
                    if a + b < n {
                        let c3 = n - a - b;
                        if c3 <= b && a <= p {
                            c += 1;
                        }
                    }
                } else if r == 2 && a + b == n && a <= p {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn small_cases() {
        assert_eq!(enumerate_allocations(3, 3, 5), vec![vec![1, 1, 1]]);
        assert_eq!(enumerate_allocations(6, 2, 5), vec![vec![3, 3], vec![4, 2], vec![5, 1]]);
        assert_eq!(enumerate_allocations(4, 2, 13), vec![vec![2, 2], vec![3, 1]]);
    }

    #[test]
    fn counts_match_partition_oracle() {
        for (n, r, p) in [(15, 3, 13), (30, 3, 13), (30, 3, 30), (10, 2, 4), (9, 3, 3)] {
            assert_eq!(enumerate_allocations(n, r, p).len(), partitions_oracle(n, r, p), "{n} {r} {p}");
        }
        assert_eq!(enumerate_allocations(15, 3, 13).len(), 19);
        assert_eq!(enumerate_allocations(30, 3, 30).len(), 75);
        assert_eq!(enumerate_allocations(30, 3, 13).len(), 12);
    }

    #[test]
    fn kl_ratio() {
        assert_eq!(kl_asymmetry(&[5, 5, 5], 15, 3, 13), 0.0);
        let all = enumerate_allocations(15, 3, 13);
        let best = all
            .iter()
            .max_by(|a, b| kl_asymmetry(a, 15, 3, 13).total_cmp(&kl_asymmetry(b, 15, 3, 13)))
            .unwrap();
        assert!((kl_asymmetry(best, 15, 3, 13) - 1.0).abs() < 1e-12);
        let v = kl_asymmetry(&[7, 6, 2], 15, 3, 13);
        assert!(v > 0.0 && v < 1.0);
    }
}
