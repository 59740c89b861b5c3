//! Suite runners for `pmplus test`. Each prints its parameters and a
//! verdict line per sub-check and returns the overall pass/fail.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use pmplus::quality;
use pmplus::toy::{self, ToyParams, TOY_P17, TOY_P257};
use pmplus::tree::{Finalizer, Hasher};
use pmplus::{keygen, Word};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn verdict(name: &str, ok: bool) -> bool {
    println!("check={name} status={}", if ok { "pass" } else { "fail" });
    ok
}

pub fn reduction(seed: u64) -> bool {
    println!("suite=reduction iterations=10000000 widths=32,64 toy=exhaustive");
    let toy = quality::reduction_exhaustive_toy();
    let mut ok = verdict("toy_exhaustive_n8", toy.passed());
    let v32 = quality::reduction_fuzz::<u32>(10_000_000, seed);
    for m in v32.mismatches.iter().take(3) {
        println!("mismatch={m}");
    }
    ok &= verdict("fuzz_n32", v32.passed());
    let v64 = quality::reduction_fuzz::<u64>(10_000_000, seed ^ 1);
    for m in v64.mismatches.iter().take(3) {
        println!("mismatch={m}");
    }
    ok &= verdict("fuzz_n64", v64.passed());
    ok
}

pub fn regularity(seed: u64) -> bool {
    println!("suite=regularity params=p257,m4 draws=50");
    let params = TOY_P257;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ok = true;
    for draw in 0..50 {
        let keys = toy::random_keys(&params, &mut rng);
        let i = rng.gen_range(0..params.m);
        let fixed: Vec<u64> = (0..params.m).map(|_| rng.gen_range(0..257)).collect();
        let (perm, _) = toy::check_component_regularity(&params, &keys.levels[0], i, &fixed);
        if !perm {
            println!("draw={draw} component={i} status=not_a_permutation");
            ok = false;
        }
        let folded =
            toy::component_sweep_mod_histogram(&params, &keys.levels[0], i, &fixed, 256);
        let total: usize = folded.iter().sum();
        if total != 257 || !folded.iter().all(|&c| c == 1 || c == 2) {
            println!("draw={draw} component={i} status=mod256_counts_out_of_range");
            ok = false;
        }
    }
    verdict("component_regularity_and_mod2n", ok)
}

pub fn universality(seed: u64) -> bool {
    println!("suite=universality params=p17,kappa2,m2 keyspace=exhaustive triples=10");
    let params = TOY_P17;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let bound = 1.0 / 14.0;
    let mut ok = true;
    for trial in 0..10 {
        let s: Vec<u64> = (0..2).map(|_| rng.gen_range(0..17)).collect();
        let mut s_prime = s.clone();
        while s_prime == s {
            s_prime = (0..2).map(|_| rng.gen_range(0..17)).collect();
        }
        let c = rng.gen_range(0..17);
        let (matches, total) = toy::check_delta_universality(&params, &s, &s_prime, c);
        let prob = matches as f64 / total as f64;
        println!("triple={trial} matches={matches} total={total} prob={prob:.6}");
        ok &= prob <= bound + 1e-12;
    }
    ok = verdict("delta_universality_bound", ok);

    // Uniformity companion: over b, at most one offset hits any target.
    let mut uok = true;
    for _ in 0..10 {
        let a: Vec<u64> = (0..2).map(|_| rng.gen_range(1..=14)).collect();
        let s: Vec<u64> = (0..2).map(|_| rng.gen_range(0..17)).collect();
        let y = rng.gen_range(0..17);
        uok &= toy::uniformity_offset_count(&params, &a, &s, y) <= 1;
    }
    ok & verdict("uniformity_over_offset", uok)
}

pub fn avalanche(seed: u64) -> bool {
    println!("suite=avalanche lengths=4,8,16,32,64 trials=100000 threshold=0.03");
    let mut ok = true;
    let schedule = keygen::generate_seeded::<u32>(seed);
    for len in [4usize, 8, 16, 32, 64] {
        let report = quality::avalanche_test(&schedule, len, 100_000, seed);
        print!("{}", report.kv_lines());
        ok &= report.worst_bias < 0.03;
    }
    let schedule = keygen::generate_seeded::<u64>(seed ^ 1);
    for len in [4usize, 8, 16, 32, 64] {
        let report = quality::avalanche_test(&schedule, len, 100_000, seed);
        print!("{}", report.kv_lines());
        ok &= report.worst_bias < 0.03;
    }
    verdict("worst_bias_below_threshold", ok)
}

pub fn mix(seed: u64) -> bool {
    println!("suite=mix iterations=10000000 widths=32,64");
    let ok32 = quality::mix_roundtrip::<u32>(10_000_000, seed).passed();
    let ok64 = quality::mix_roundtrip::<u64>(10_000_000, seed ^ 1).passed();
    verdict("roundtrip_n32", ok32) & verdict("roundtrip_n64", ok64)
}

pub fn tree_equivalence(seed: u64) -> bool {
    println!("suite=tree-equivalence toy=p17,p257 production=0..389_words splits=1kB");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut ok = true;

    // Streaming fold vs literal per-level oracle at toy scale.
    for params in [TOY_P17, TOY_P257] {
        let keys = toy::random_keys(&params, &mut rng);
        let p = params.p().to_u64().unwrap();
        let max = params.m.pow(params.levels as u32) - 1;
        for len in 0..=max.min(40) {
            let chars: Vec<u64> = (0..len as u64).map(|_| rng.gen_range(0..p)).collect();
            let big: Vec<BigUint> = chars.iter().map(|&c| BigUint::from(c)).collect();
            let literal = toy::oracle_tree(&params, &keys, &big).unwrap().to_u64().unwrap();
            ok &= toy::stream_tree(&params, &keys, &chars).unwrap() == literal;
        }
    }
    ok = verdict("toy_stream_vs_literal", ok);

    // Production streaming vs the arbitrary-precision literal tree.
    let schedule = keygen::generate_seeded::<u64>(seed);
    let oracle_keys = toy_keys_from_schedule(&schedule);
    let params = ToyParams::production(64);
    let mut pok = true;
    for words in 0..=(3 * 128 + 5) {
        let mut bytes = vec![0u8; words * 8];
        rng.fill_bytes(&mut bytes);
        let digest = pre_mix_digest(&schedule, &bytes);
        let chars: Vec<BigUint> = bytes
            .chunks(8)
            .map(|c| BigUint::from(u64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        let tree = toy::oracle_tree(&params, &oracle_keys, &chars).unwrap();
        let expect = (tree % (BigUint::from(1u8) << 64u32)).to_u64().unwrap();
        pok &= digest == expect;
    }
    ok &= verdict("production_stream_vs_oracle", pok);

    // Split invariance on 1 kB.
    let mut data = vec![0u8; 1024];
    rng.fill_bytes(&mut data);
    let whole = pmplus::hash_oneshot(&schedule, &data).unwrap();
    let mut sok = true;
    for split in 0..=data.len() {
        let mut h = Hasher::new(&schedule);
        h.update(&data[..split]).unwrap();
        h.update(&data[split..]).unwrap();
        sok &= h.finalize() == whole;
    }
    ok & verdict("split_invariance", sok)
}

pub fn nh_fraction() -> bool {
    println!("suite=nh-fraction range=1..=12");
    let mut ok = true;
    let mut prev = f64::INFINITY;
    for n in 1..=12 {
        let point = quality::nh_image_fraction(n).unwrap();
        println!("n={n} reachable={} fraction={:.6}", point.reachable, point.fraction);
        ok &= point.fraction < prev;
        if n >= 3 {
            ok &= point.fraction < 0.5;
        }
        prev = point.fraction;
    }
    verdict("strictly_decreasing_below_half", ok)
}

/// Re-expresses a production schedule in the oracle's key layout.
pub fn toy_keys_from_schedule<W: Word>(schedule: &pmplus::KeySchedule<W>) -> toy::ToyKeys {
    toy::ToyKeys {
        levels: schedule
            .levels()
            .iter()
            .map(|level| toy::ToyLevelKeys {
                a: level.a.iter().map(|a| a.to_u64()).collect(),
                b: level.b.to_u64(),
            })
            .collect(),
    }
}

/// Digest before mixing: the tree value reduced mod 2^n.
pub fn pre_mix_digest<W: Word + Finalizer>(schedule: &pmplus::KeySchedule<W>, bytes: &[u8]) -> u64 {
    let mut h = Hasher::new(schedule);
    h.update(bytes).unwrap();
    h.finalize_tree().mod_word().to_u64()
}
