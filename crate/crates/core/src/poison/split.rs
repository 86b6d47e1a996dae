use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Operation;
use crate::error::{Error, Result};

/// Three-way partition of image ids by corruption operation.
///
/// Each bucket keeps ids in the order the seeded shuffle produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitAssignment {
    pub erode: Vec<String>,
    pub dilate: Vec<String>,
    pub clean: Vec<String>,
}

impl SplitAssignment {
    pub fn operation_of(&self, id: &str) -> Option<Operation> {
        if self.erode.iter().any(|x| x == id) {
            Some(Operation::Erode)
        } else if self.dilate.iter().any(|x| x == id) {
            Some(Operation::Dilate)
        } else if self.clean.iter().any(|x| x == id) {
            Some(Operation::Clean)
        } else {
            None
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("split serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.erode.len() + self.dilate.len() + self.clean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Shuffles `ids` with a seeded stream and deals `floor(n/3)` to erosion,
/// the next `floor(n/3)` to dilation and the remainder to the clean bucket.
pub fn assign_splits<S: AsRef<str>>(ids: &[S], seed: u64) -> Result<SplitAssignment> {
    if ids.is_empty() {
        return Err(Error::Empty("split ids"));
    }
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id.as_ref()) {
            return Err(Error::Invalid(format!("duplicate image id {:?}", id.as_ref())));
        }
    }

    let mut shuffled: Vec<String> = ids.iter().map(|s| s.as_ref().to_owned()).collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let third = shuffled.len() / 3;
    let clean = shuffled.split_off(2 * third);
    let dilate = shuffled.split_off(third);
    Ok(SplitAssignment {
        erode: shuffled,
        dilate,
        clean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img_{i:04}")).collect()
    }

    #[test]
    fn nine_ids() {
        let s = assign_splits(&ids(9), 1).unwrap();
        assert_eq!((s.erode.len(), s.dilate.len(), s.clean.len()), (3, 3, 3));
    }

    #[test]
    fn remainder_goes_to_clean() {
        let s = assign_splits(&ids(883), 42).unwrap();
        assert_eq!((s.erode.len(), s.dilate.len(), s.clean.len()), (294, 294, 295));
        let mut all: Vec<_> = s.erode.iter().chain(&s.dilate).chain(&s.clean).cloned().collect();
        all.sort();
        assert_eq!(all, ids(883));
        for n in [1, 2, 4, 5] {
            let s = assign_splits(&ids(n), 0).unwrap();
            assert_eq!(s.erode.len(), n / 3);
            assert_eq!(s.clean.len(), n - 2 * (n / 3));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = assign_splits(&ids(100), 5).unwrap();
        assert_eq!(a, assign_splits(&ids(100), 5).unwrap());
        assert_ne!(a, assign_splits(&ids(100), 6).unwrap());
        assert_eq!(a.operation_of(&a.dilate[0]), Some(Operation::Dilate));
        assert_eq!(a.operation_of("missing"), None);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(assign_splits::<&str>(&[], 1), Err(Error::Empty(_))));
        assert!(assign_splits(&["a", "b", "a"], 1).is_err());
    }
}
