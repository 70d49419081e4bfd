use std::collections::BTreeMap;

use super::MetricsError;

/// Cohen's kappa between two annotators over the same items.
///
/// Computed from integer counts: with `n` items, `a` agreements and
/// `m = Σ_k count_a(k) * count_b(k)`, kappa = `(n*a - m) / (n^2 - m)`.
pub fn cohens_kappa<L: Ord>(ann_a: &[L], ann_b: &[L]) -> Result<f64, MetricsError> {
    if ann_a.len() != ann_b.len() {
        return Err(MetricsError::LengthMismatch {
            left: ann_a.len(),
            right: ann_b.len(),
        });
    }
    if ann_a.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = ann_a.len() as u128;
    let mut marginals: BTreeMap<&L, (u128, u128)> = BTreeMap::new();
    let mut agree = 0u128;
    for (a, b) in ann_a.iter().zip(ann_b) {
        marginals.entry(a).or_default().0 += 1;
        marginals.entry(b).or_default().1 += 1;
        if a == b {
            agree += 1;
        }
    }
    let chance: u128 = marginals.values().map(|(ca, cb)| ca * cb).sum();
    let denom = n * n - chance;
    if denom == 0 {
        return Err(MetricsError::DegenerateAgreement);
    }
    let numer = (n * agree) as f64 - chance as f64;
    Ok(numer / denom as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_non_constant() {
        assert_eq!(cohens_kappa(&["A", "B", "A"], &["A", "B", "A"]).unwrap(), 1.0);
    }

    #[test]
    fn chance_level_hand_case() {
        // p_o = 0.5, p_e = 0.5*0.5 + 0.5*0.5 = 0.5
        assert_eq!(cohens_kappa(&["A", "A", "B", "B"], &["A", "B", "A", "B"]).unwrap(), 0.0);
    }

    #[test]
    fn constant_identical_is_degenerate() {
        assert_eq!(
            cohens_kappa(&["A", "A"], &["A", "A"]),
            Err(MetricsError::DegenerateAgreement)
        );
    }

    #[test]
    fn constant_but_different_is_defined() {
        // p_o = 0, p_e = 0 -> 0
        assert_eq!(cohens_kappa(&["A", "A"], &["B", "B"]).unwrap(), 0.0);
    }

    #[test]
    fn textbook_value() {
        // 50 items: yes/yes 20, yes/no 5, no/yes 10, no/no 15 -> kappa = 0.4
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (x, y, k) in [("y", "y", 20), ("y", "n", 5), ("n", "y", 10), ("n", "n", 15)] {
            for _ in 0..k {
                a.push(x);
                b.push(y);
            }
        }
        assert!((cohens_kappa(&a, &b).unwrap() - 0.4).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(pairs in prop::collection::vec((0u8..3, 0u8..3), 1..40)) {
            let a: Vec<u8> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            match (cohens_kappa(&a, &b), cohens_kappa(&b, &a)) {
                (Ok(x), Ok(y)) => { prop_assert_eq!(x, y); prop_assert!(x <= 1.0); }
                (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
                _ => prop_assert!(false, "asymmetric error"),
            }
        }
    }
}
