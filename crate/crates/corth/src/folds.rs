//! Balanced random fold assignment, shared by cross-validation and
//! cross-fitting.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// Assigns each of `n` rows to one of `k` folds uniformly at random, with
/// fold sizes differing by at most one. The first `n % k` folds (by fold
/// index) receive the extra row.
pub(crate) fn shuffled_assignment(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(rng);
    let base = n / k;
    let extra = n % k;
    let mut assignment = vec![0usize; n];
    let mut cursor = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        for &row in &rows[cursor..cursor + size] {
            assignment[row] = fold;
        }
        cursor += size;
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;

    fn sizes(assignment: &[usize], k: usize) -> Vec<usize> {
        let mut out = vec![0usize; k];
        for &f in assignment {
            out[f] += 1;
        }
        out
    }

    #[test]
    fn balanced_sizes() {
        let mut rng = rng_from(0, &[99]);
        let a = shuffled_assignment(10, 3, &mut rng);
        let mut s = sizes(&a, 3);
        s.sort_unstable();
        assert_eq!(s, vec![3, 3, 4]);
    }

    #[test]
    fn every_row_assigned_in_range() {
        let mut rng = rng_from(3, &[1]);
        let a = shuffled_assignment(17, 5, &mut rng);
        assert_eq!(a.len(), 17);
        assert!(a.iter().all(|&f| f < 5));
        assert!(sizes(&a, 5).iter().all(|&s| s == 3 || s == 4));
    }
}
