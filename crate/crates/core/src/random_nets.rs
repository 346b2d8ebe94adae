//! Seeded generators of small 1-safe nets and independence alphabets, used
//! by the verification suite and the property tests.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::petri_net::{NetDocument, PetriNet, TransitionDocument};
use crate::trace_monoid::TraceMonoid;

pub const MAX_RANDOM_TRANSITIONS: usize = 6;
const MAX_RANDOM_PLACES: usize = 6;
const MAX_RANDOM_STATES: usize = 256;
const MAX_ATTEMPTS: usize = 10_000;

fn subset(rng: &mut ChaCha8Rng, n: usize, names: &[String]) -> Vec<String> {
    let k = rng.gen_range(1..=n.min(3));
    let mut picked: Vec<usize> = sample(rng, n, k).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| names[i].clone()).collect()
}

/// A 1-safe net with between one and `max_transitions` transitions (at most
/// six), found by rejection: candidates whose reachability exploration hits
/// a contact or more than 256 markings are discarded.
pub fn random_safe_net(seed: u64, max_transitions: usize) -> PetriNet {
    let max_transitions = max_transitions.clamp(1, MAX_RANDOM_TRANSITIONS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let places = rng.gen_range(2..=MAX_RANDOM_PLACES);
        let names: Vec<String> = (0..places).map(|i| format!("p{i}")).collect();
        let transitions = rng.gen_range(1..=max_transitions);
        let doc = NetDocument {
            places: names.clone(),
            transitions: (0..transitions)
                .map(|i| TransitionDocument {
                    id: char::from(b'a' + i as u8).to_string(),
                    pre: subset(&mut rng, places, &names),
                    post: subset(&mut rng, places, &names),
                })
                .collect(),
            initial_marking: subset(&mut rng, places, &names),
        };
        let net = PetriNet::from_document(&doc).expect("generated nets are well formed");
        match net.reachability_graph(MAX_RANDOM_STATES) {
            Ok(_) => return net,
            Err(Error::NotSafe { .. } | Error::StateLimit(_)) => continue,
            Err(e) => panic!("unexpected error on a generated net: {e}"),
        }
    }
    unreachable!("a self-loop candidate is always accepted eventually")
}

/// Alphabet of `letters` letters (at most six) with each pair independent
/// with probability one half.
pub fn random_monoid(seed: u64, letters: usize) -> TraceMonoid {
    let letters = letters.clamp(1, MAX_RANDOM_TRANSITIONS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = (0..letters)
        .map(|i| char::from(b'a' + i as u8).to_string())
        .collect();
    let mut pairs = Vec::new();
    for a in 0..letters {
        for b in a + 1..letters {
            if rng.gen_bool(0.5) {
                pairs.push((a, b));
            }
        }
    }
    TraceMonoid::new(names, &pairs).expect("distinct letters, irreflexive pairs")
}
