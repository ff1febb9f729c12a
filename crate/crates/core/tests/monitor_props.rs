use std::collections::HashMap;

use adaptive_smc::monitor::{CandidateTracker, TransitionCounts};
use proptest::prelude::*;

fn naive_strong(keys: &[u64], cand: &[u64], birthday: usize, k: u64) -> bool {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for &s in &keys[birthday..] {
        *counts.entry(s).or_default() += 1;
    }
    let last = *keys.last().unwrap();
    cand.iter().all(|s| counts.get(s).copied().unwrap_or(0) >= k) && counts[&last] > k
}

fn arb_walk() -> impl Strategy<Value = Vec<u64>> {
    // small alphabet so candidates form and dissolve often
    prop::collection::vec(0u64..4, 1..120)
}

proptest! {
    #[test]
    fn strong_candidacy_matches_recount(
        walk in arb_walk(),
        queries in prop::collection::vec(0u64..12, 120),
        cb in prop::sample::select(vec![1u64, 5]),
    ) {
        let mut tr = CandidateTracker::new(Some(4), cb);
        let mut last_index = 0;
        for (i, &s) in walk.iter().enumerate() {
            tr.advance(s);
            prop_assert!(tr.candidate_index() >= last_index);
            last_index = tr.candidate_index();
            let k = queries[i];
            let keys: Vec<u64> = tr.path_keys().collect();
            match (tr.candidate(), tr.birthday()) {
                (Some(cand), Some(b)) => {
                    prop_assert!(b < keys.len());
                    prop_assert!(keys[b..].iter().all(|x| cand.contains(x)));
                    prop_assert_eq!(tr.strong_k_holds(k), naive_strong(&keys, &cand, b, k));
                    // a second query with a smaller k must not be shadowed
                    let k2 = k / 2;
                    prop_assert_eq!(tr.strong_k_holds(k2), naive_strong(&keys, &cand, b, k2));
                    for &m in &cand {
                        let c = keys[b..].iter().filter(|&&x| x == m).count() as u64;
                        prop_assert_eq!(tr.count_since_birth(m), c);
                    }
                    prop_assert_eq!(
                        tr.transition_counts().unwrap(),
                        TransitionCounts::from_segment(&cand, &keys[b..])
                    );
                }
                (None, None) => prop_assert!(!tr.strong_k_holds(k)),
                _ => prop_assert!(false, "birthday without candidate"),
            }
        }
    }

    #[test]
    fn check_bound_only_delays(walk in arb_walk(), cb in 2u64..9) {
        let mut eager = CandidateTracker::new(Some(4), 1);
        let mut lazy = CandidateTracker::new(Some(4), cb);
        for &s in &walk {
            eager.advance(s);
            lazy.advance(s);
        }
        lazy.refresh();
        prop_assert_eq!(lazy.candidate(), eager.candidate());
        prop_assert_eq!(lazy.birthday(), eager.birthday());
    }
}
