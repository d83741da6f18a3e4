//! Two-entry filter of `(theta, phi)` pairs with envelope dominance.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterSet {
    entries: Vec<(f64, f64)>,
    gamma_theta: f64,
}

/// `(theta, phi)` is blocked by the entry `(theta_j, phi_j)`.
fn blocked_by(entry: (f64, f64), theta: f64, phi: f64, gamma: f64) -> bool {
    let (theta_j, phi_j) = entry;
    theta > (1.0 - gamma) * theta_j && phi > phi_j - gamma * theta_j
}

/// `a` lies in the envelope-dominated region of `b`.
fn dominated(a: (f64, f64), b: (f64, f64), gamma: f64) -> bool {
    a.0 >= b.0 && a.1 - gamma * a.0 >= b.1 - gamma * b.0
}

impl FilterSet {
    pub fn new(gamma_theta: f64) -> Self {
        assert!(gamma_theta > 0.0 && gamma_theta < 1.0, "gamma_theta must lie in (0, 1)");
        Self {
            entries: Vec::new(),
            gamma_theta,
        }
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gamma_theta(&self) -> f64 {
        self.gamma_theta
    }

    pub fn acceptable(&self, theta: f64, phi: f64) -> bool {
        let g = self.gamma_theta;
        self.entries.iter().all(|&e| !blocked_by(e, theta, phi, g))
    }

    /// Acceptance for the filter temporarily augmented by `(theta_k, phi_k)`.
    pub fn augmented_acceptable(&self, theta_k: f64, phi_k: f64, theta: f64, phi: f64) -> bool {
        self.acceptable(theta, phi) && !blocked_by((theta_k, phi_k), theta, phi, self.gamma_theta)
    }

    /// Acceptance ignoring entries equal to `skip`.
    pub fn acceptable_without(&self, skip: (f64, f64), theta: f64, phi: f64) -> bool {
        let g = self.gamma_theta;
        self.entries
            .iter()
            .filter(|&&e| e != skip)
            .all(|&e| !blocked_by(e, theta, phi, g))
    }

    /// Inserts `(theta, phi)` and removes the entries it dominates.
    ///
    /// A pair that is itself dominated by an entry is not stored: its
    /// forbidden region is already covered.
    pub fn add(&mut self, theta: f64, phi: f64) -> Result<()> {
        if theta <= 0.0 {
            return Err(Error::FeasiblePointRejected { phi });
        }
        let g = self.gamma_theta;
        let new = (theta, phi);
        if self.entries.iter().any(|&e| e != new && dominated(new, e, g)) {
            return Ok(());
        }
        self.entries.retain(|&e| !dominated(e, new, g));
        self.entries.push(new);
        Ok(())
    }

    /// Pairs `(i, j)` with entry `i` dominated by entry `j`.
    pub fn dominated_pairs(&self) -> Vec<(usize, usize)> {
        let g = self.gamma_theta;
        let mut out = Vec::new();
        for (i, &a) in self.entries.iter().enumerate() {
            for (j, &b) in self.entries.iter().enumerate() {
                if i != j && dominated(a, b, g) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const G: f64 = 1e-4;

    #[test]
    fn acceptance_examples() {
        let mut f = FilterSet::new(G);
        assert!(f.acceptable(123.0, -4.0));
        f.add(1.0, 5.0).unwrap();
        assert!(!f.acceptable(2.0, 10.0));
        assert!(f.acceptable(0.5, 10.0));
    }

    #[test]
    fn augmented_examples() {
        let f = FilterSet::new(G);
        assert!(!f.augmented_acceptable(1.0, 5.0, 1.0, 5.0));
        assert!(f.augmented_acceptable(1.0, 5.0, 0.5, 5.0));
        let mut f = FilterSet::new(G);
        f.add(0.3, 2.0).unwrap();
        f.add(1.0, 1.0).unwrap();
        assert!(f.augmented_acceptable(0.7, 0.5, 0.0, 0.9));
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn add_examples() {
        let mut f = FilterSet::new(G);
        f.add(1.0, 5.0).unwrap();
        f.add(0.5, 4.0).unwrap();
        assert_eq!(f.entries(), &[(0.5, 4.0)]);

        let mut f = FilterSet::new(G);
        f.add(1.0, 5.0).unwrap();
        f.add(2.0, 1.0).unwrap();
        assert_eq!(f.len(), 2);
        assert!(!f.acceptable(2.0, 1.0));
    }

    #[test]
    fn feasible_pairs_rejected() {
        let mut f = FilterSet::new(G);
        assert_eq!(f.add(0.0, 3.0), Err(Error::FeasiblePointRejected { phi: 3.0 }));
        assert!(f.is_empty());
    }

    #[test]
    fn add_twice_keeps_one() {
        let mut f = FilterSet::new(G);
        f.add(0.25, 1.5).unwrap();
        f.add(0.25, 1.5).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn acceptable_without_self() {
        let mut f = FilterSet::new(G);
        f.add(0.5, 1.0).unwrap();
        assert!(!f.acceptable(0.5, 1.0));
        assert!(f.acceptable_without((0.5, 1.0), 0.5, 1.0));
    }

    fn pair() -> impl Strategy<Value = (f64, f64)> {
        (1e-6f64..10.0, -10.0f64..10.0)
    }

    proptest! {
        #[test]
        fn no_dominated_pairs(seq in prop::collection::vec(pair(), 1..60)) {
            let mut f = FilterSet::new(G);
            for (t, p) in seq {
                f.add(t, p).unwrap();
                prop_assert!(f.dominated_pairs().is_empty());
                prop_assert!(!f.acceptable(t, p));
            }
        }

        #[test]
        fn adding_never_widens(seq in prop::collection::vec(pair(), 1..30), probe in pair(), extra in pair()) {
            let mut f = FilterSet::new(G);
            for (t, p) in seq {
                f.add(t, p).unwrap();
            }
            let before = f.acceptable(probe.0, probe.1);
            f.add(extra.0, extra.1).unwrap();
            prop_assert!(before || !f.acceptable(probe.0, probe.1));
        }
    }
}
