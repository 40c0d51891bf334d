use proptest::prelude::*;

use raag::complex::{fold, fold_with, rose};
use raag::cosets::{enumerate_cosets, resume_cosets, CosetOutcome};
use raag::word::{are_equal, canonical, cyclic_reduce, is_normal_form, normalize};
use raag::{classify, star_length, DefiningGraph, ElementKind, Letter, Vertex, Word};

fn c5() -> DefiningGraph {
    DefiningGraph::cycle(&["a", "b", "c", "d", "e"]).unwrap()
}

fn word(max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0u8..5, any::<bool>()), 0..=max_len).prop_map(|v| {
        Word(
            v.into_iter()
                .map(|(x, i)| Letter::new(Vertex(x), i))
                .collect(),
        )
    })
}

proptest! {
    #[test]
    fn normalize_is_idempotent(w in word(14)) {
        let g = c5();
        let nf = normalize(&g, &w).unwrap();
        prop_assert!(is_normal_form(&g, nf.word()));
        prop_assert_eq!(normalize(&g, nf.word()).unwrap().len(), nf.len());
        prop_assert!(are_equal(&g, &w, nf.word()));
    }

    #[test]
    fn canonical_form_is_shared_by_equal_words(u in word(10), v in word(10)) {
        let g = c5();
        let uv = normalize(&g, &u.concat(&v)).unwrap();
        let vu = normalize(&g, &u.concat(&v).concat(&v.inverse()).concat(&v)).unwrap();
        prop_assert_eq!(canonical(&g, &uv), canonical(&g, &vu));
    }

    #[test]
    fn equal_words_share_abelianization(u in word(10), v in word(10)) {
        let g = c5();
        if are_equal(&g, &u, &v) {
            prop_assert_eq!(u.abelianization(5), v.abelianization(5));
        }
    }

    #[test]
    fn cyclic_reduction_is_a_conjugate(w in word(12)) {
        let g = c5();
        let r = cyclic_reduce(&g, &w);
        let back = r.conjugator.concat(r.core.word()).concat(&r.conjugator.inverse());
        prop_assert!(are_equal(&g, &back, &w));
    }

    #[test]
    fn classification_is_conjugation_invariant(w in word(8), x in word(4)) {
        let g = c5();
        let conj = x.concat(&w).concat(&x.inverse());
        prop_assert_eq!(classify(&g, &w).unwrap().kind, classify(&g, &conj).unwrap().kind);
    }

    #[test]
    fn star_length_is_subadditive(u in word(6), v in word(6)) {
        let g = c5();
        let su = star_length(&g, &u).unwrap().length;
        let sv = star_length(&g, &v).unwrap().length;
        let suv = star_length(&g, &u.concat(&v)).unwrap().length;
        prop_assert!(suv <= su + sv);
        prop_assert_eq!(su, star_length(&g, &u.inverse()).unwrap().length);
    }

    #[test]
    fn elliptic_powers_stay_short(w in word(8)) {
        let g = c5();
        let class = classify(&g, &w).unwrap();
        if class.kind == ElementKind::Elliptic {
            let outer = star_length(&g, &class.reduced.conjugator).unwrap().length;
            let growth = raag::growth_probe(&g, &w, 6).unwrap();
            prop_assert!(growth.iter().all(|&s| s <= 2 * outer + 2));
        }
    }

    #[test]
    fn fold_is_order_independent(
        gens in prop::collection::vec(word(6).prop_filter("nonempty", |w| !w.is_empty()), 1..4),
        seed in any::<u64>(),
    ) {
        let g = c5();
        let r = rose(&g, &gens).unwrap();
        let mut state = seed;
        let other = fold_with(&r, |n| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize % n
        });
        prop_assert_eq!(fold(&r).canonical_form(), other.canonical_form());
    }

    #[test]
    fn coset_enumeration_resumes_to_the_same_index(a in 1i64..5, b in 1i64..5, split in 1usize..40) {
        let g = DefiningGraph::new(&["x", "y"], &[("x", "y")]).unwrap();
        let gens = vec![
            g.parse_word("x").unwrap().pow(a),
            g.parse_word("y").unwrap().pow(b),
        ];
        let whole = match enumerate_cosets(&g, &gens, 1_000_000).unwrap() {
            CosetOutcome::Complete { index, .. } => index,
            CosetOutcome::BudgetExhausted(_) => unreachable!(),
        };
        prop_assert_eq!(whole as i64, a * b);
        let resumed = match enumerate_cosets(&g, &gens, split).unwrap() {
            CosetOutcome::Complete { index, .. } => index,
            CosetOutcome::BudgetExhausted(state) => {
                let text = serde_json::to_string(&state).unwrap();
                match resume_cosets(serde_json::from_str(&text).unwrap(), 1_000_000) {
                    CosetOutcome::Complete { index, .. } => index,
                    CosetOutcome::BudgetExhausted(_) => unreachable!(),
                }
            }
        };
        prop_assert_eq!(resumed, whole);
    }
}
