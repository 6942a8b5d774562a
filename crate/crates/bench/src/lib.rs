//! Inputs shared by the benchmarks.

use ktorus_core::schweitzer::SchweitzerElement;
use ktorus_core::IntMatrix;

/// Deterministic `n × n` integer matrix with entries in `[-9, 9]`.
pub fn dense_matrix(n: usize, seed: u64) -> IntMatrix {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut rows = vec![vec![0i64; n]; n];
    for row in rows.iter_mut() {
        for e in row.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            *e = ((state >> 33) % 19) as i64 - 9;
        }
    }
    IntMatrix::from_rows(&rows)
}

/// Element with a four-term tail and two exceptional values.
pub fn schweitzer_sample() -> SchweitzerElement {
    let mut a = SchweitzerElement::real_tail(0.5, &[1.3, -2.1, 0.7, 0.4]);
    a = a.add(&SchweitzerElement::reciprocal().multiply(&SchweitzerElement::real_tail(0.0, &[0.0, 1.0])));
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_deterministic() {
        assert_eq!(dense_matrix(5, 1), dense_matrix(5, 1));
        assert_ne!(dense_matrix(5, 1), dense_matrix(5, 2));
        assert!(schweitzer_sample().norms().sup_norm.hi.is_finite());
    }
}
