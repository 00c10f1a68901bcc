//! Models against probabilities recomputed from raw counts by hand.

mod common;

use std::collections::HashMap;

use approx::assert_relative_eq;
use common::{prepare_sentences, random_sentences};
use lmsmooth::smoothers::{
    katz_discounts, Additive, ChurchGale, ChurchGaleParams, DenominatorSpace, Katz, KatzParams, OneCount,
    OneCountParams,
};
use lmsmooth::{CountOfCounts, Execution, LanguageModel, TokenId, BOS, EOS};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Bigrams = HashMap<(TokenId, TokenId), u64>;

fn bigram_counts(c: &common::Corpus) -> (Bigrams, HashMap<TokenId, u64>) {
    let mut big = HashMap::new();
    let mut uni = HashMap::new();
    for s in &c.train {
        for (h, w) in s.events() {
            *big.entry((h[0], w)).or_default() += 1;
            *uni.entry(w).or_default() += 1;
        }
    }
    (big, uni)
}

fn histories(events: TokenId) -> Vec<TokenId> {
    std::iter::once(BOS).chain((1..=events).filter(|&w| w != EOS)).collect()
}

#[test]
fn plus_delta_matches_counting() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for delta in [0.01, 0.3, 2.0] {
        let c = prepare_sentences(&random_sentences(&mut rng, 12, 30, 8), 2);
        let (big, _) = bigram_counts(&c);
        let e = c.vocab.event_count();
        let m = Additive::new(c.counts.clone(), e, c.vocab.content_len(), delta, DenominatorSpace::Events).unwrap();
        for h in histories(e as TokenId) {
            let total: u64 = big.iter().filter(|((a, _), _)| *a == h).map(|(_, &n)| n).sum();
            for w in 1..=e as TokenId {
                let r = big.get(&(h, w)).copied().unwrap_or(0);
                let expected = (r as f64 + delta) / (total as f64 + delta * e as f64);
                assert_relative_eq!(m.prob(&[h], w).unwrap(), expected, max_relative = 1e-13);
            }
        }
    }
}

/// Bigram Katz written out from its defining equations.
fn katz_by_hand(big: &Bigrams, uni: &HashMap<TokenId, u64>, events: TokenId, delta: f64, k: u64) -> Bigrams2 {
    let tokens: u64 = uni.values().sum();
    let p1 = |w: TokenId| (uni.get(&w).copied().unwrap_or(0) as f64 + delta) / (tokens as f64 + delta * events as f64);
    let mut coc: HashMap<u64, u64> = HashMap::new();
    for &r in big.values() {
        *coc.entry(r).or_default() += 1;
    }
    let n = |r: u64| coc.get(&r).copied().unwrap_or(0) as f64;
    let mu = (k + 1) as f64 * n(k + 1) / n(1);
    let corrected = |r: u64| {
        if r > k {
            r as f64
        } else {
            let r_star = (r + 1) as f64 * n(r + 1) / n(r);
            (r_star / r as f64 - mu) / (1.0 - mu) * r as f64
        }
    };
    let mut out = HashMap::new();
    for h in histories(events) {
        let seen: Vec<(TokenId, u64)> = (1..=events).filter_map(|w| big.get(&(h, w)).map(|&r| (w, r))).collect();
        let total: u64 = seen.iter().map(|s| s.1).sum();
        if total == 0 {
            for w in 1..=events {
                out.insert((h, w), p1(w));
            }
            continue;
        }
        let removed: f64 = seen.iter().map(|&(_, r)| r as f64 - corrected(r)).sum();
        let unseen_low: f64 = (1..=events).filter(|w| !seen.iter().any(|s| s.0 == *w)).map(p1).sum();
        for w in 1..=events {
            let p = match seen.iter().find(|s| s.0 == w) {
                Some(&(_, r)) if removed > 0.0 => corrected(r) / total as f64,
                Some(&(_, r)) => r as f64 / (total as f64 + 1.0),
                None if removed > 0.0 => removed / total as f64 * p1(w) / unseen_low,
                None => p1(w) / (total as f64 + 1.0) / unseen_low,
            };
            out.insert((h, w), p);
        }
    }
    out
}

type Bigrams2 = HashMap<(TokenId, TokenId), f64>;

#[test]
fn katz_on_three_word_vocabulary_matches_hand_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    for _ in 0..200 {
        let c = prepare_sentences(&random_sentences(&mut rng, 3, 12, 6), 2);
        if c.vocab.content_len() != 3 {
            continue;
        }
        match katz_discounts(&c.counts.count_of_counts(2), Some(2)) {
            Ok(d) if d.k == 2 => {}
            _ => continue,
        }
        let (big, uni) = bigram_counts(&c);
        let e = c.vocab.event_count();
        let params = KatzParams {
            k: Some(2),
            delta: 0.5,
            beta: 1.0,
        };
        let m = Katz::new(c.counts.clone(), e, params, Execution::Sequential).unwrap();
        let hand = katz_by_hand(&big, &uni, e as TokenId, 0.5, 2);
        for (&(h, w), &p) in &hand {
            assert_relative_eq!(m.prob(&[h], w).unwrap(), p, max_relative = 1e-12);
        }
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} corpora had a cutoff of 2");
}

#[test]
fn katz_keeps_total_counts_per_history() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let c = prepare_sentences(&random_sentences(&mut rng, 30, 200, 10), 3);
    let e = c.vocab.event_count();
    let m = Katz::new(c.counts.clone(), e, KatzParams::default(), Execution::Sequential).unwrap();
    for k in 2..=3 {
        for (h, node) in c.counts.histories(k - 1) {
            let mut ctx = vec![BOS; 2 - h.len()];
            ctx.extend_from_slice(h);
            let sum: f64 = (1..=e as TokenId).map(|w| m.corrected_count(k, &ctx, w)).sum();
            assert_relative_eq!(sum, node.total as f64, max_relative = 1e-9);
        }
    }
}

#[test]
fn one_count_two_level_recursion_by_hand() {
    let c = common::prepare(common::TOY, 2);
    let v = &c.vocab;
    let e = v.event_count() as f64;
    let m = OneCount::new(c.counts.clone(), v.event_count(), OneCountParams::uniform(2, 1.0, 1.0)).unwrap();
    // unigram: N = 18 tokens, one singleton-heavy history so alpha = n1 + 1
    let uni = c.counts.history(&[]).unwrap();
    let alpha1 = uni.ones as f64 + 1.0;
    let p_a = (2.0 + alpha1 / e) / (18.0 + alpha1);
    let expected = (2.0 + 2.0 * p_a) / (3.0 + 2.0);
    assert_relative_eq!(m.prob(&[v.id("read")], v.id("a")).unwrap(), expected, max_relative = 1e-14);
}

#[test]
fn one_count_with_zero_gamma_is_maximum_likelihood_on_seen_events() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let c = prepare_sentences(&random_sentences(&mut rng, 10, 40, 6), 2);
    let (big, _) = bigram_counts(&c);
    let m = OneCount::new(c.counts.clone(), c.vocab.event_count(), OneCountParams::uniform(2, 1.0, 0.0)).unwrap();
    for (&(h, w), &r) in &big {
        let total = c.counts.history(&[h]).unwrap().total;
        assert_relative_eq!(m.prob(&[h], w).unwrap(), r as f64 / total as f64, max_relative = 1e-14);
    }
}

#[test]
fn church_gale_trigram_populations_by_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..5 {
        let c = prepare_sentences(&random_sentences(&mut rng, 6, 8, 5), 3);
        assert!(c.counts.tokens() <= 50);
        let e = c.vocab.event_count() as TokenId;
        let params = ChurchGaleParams {
            c_mb: Some(6),
            c_min: 3,
            ..ChurchGaleParams::default()
        };
        let m = ChurchGale::new(c.counts.clone(), e as usize, params).unwrap();
        let words: Vec<TokenId> = (2..=e).collect();
        let mut h3 = vec![[BOS, BOS]];
        for &a in std::iter::once(&BOS).chain(&words) {
            for &b in &words {
                h3.push([a, b]);
            }
        }
        let mut pop = vec![0u64; m.bucket_populations(3).len()];
        for h in &h3 {
            for w in 1..=e {
                pop[m.bucket_of(&[h[0], h[1], w])] += 1;
            }
        }
        assert_eq!(pop, m.bucket_populations(3));
    }
}

#[test]
fn katz_schedule_on_worked_counts() {
    let coc = CountOfCounts::from_pairs([(1, 10), (2, 5), (3, 3), (4, 2), (5, 1), (6, 1)]);
    let d = katz_discounts(&coc, Some(5)).unwrap();
    let lost: f64 = (1..=d.k as u64).map(|r| coc.get(r) as f64 * (1.0 - d.d[r as usize - 1]) * r as f64).sum();
    assert_relative_eq!(lost, 10.0, max_relative = 1e-12);
    assert!(d.d.iter().all(|&x| x > 0.0 && x <= 1.0));
}
