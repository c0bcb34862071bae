use serde::de::DeserializeOwned;
use serde::Serialize;

use qdepth_core::compressed::{equivalence_suite, extract_collision, ExtractConfig, ExtractTarget};
use qdepth_core::experiments::*;
use qdepth_core::shadowlab::{run_shadowlab, ShadowlabConfig};
use qdepth_core::Seed;

fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(r: &T) {
    let json = serde_json::to_string(r).unwrap();
    let back: T = serde_json::from_str(&json).unwrap();
    assert_eq!(&back, r);
    assert_eq!(serde_json::to_string(&back).unwrap(), json);
}

#[test]
fn reports_survive_json() {
    let seed = Seed::from_u64(1);
    round_trip(&constants_table(6).unwrap());
    round_trip(&honest_collision_experiment(&CollisionConfig::new(5, 1, 6, seed)).unwrap());
    round_trip(&serial_experiment(&SerialConfig::new(6, 1, 4, seed)).unwrap());
    round_trip(&h_collision_experiment(&HCollisionConfig::new(4, 1, 4, seed)).unwrap());
    round_trip(&backend_cross_check(4, 100, seed).unwrap());
    round_trip(&equivalence_suite(3, seed).unwrap());
    let cfg = ExtractConfig {
        lambda: 3,
        d: 1,
        trials: 5,
        seed,
        target: ExtractTarget::HonestQc,
    };
    round_trip(&extract_collision(&cfg).unwrap());
    round_trip(&run_shadowlab(&ShadowlabConfig::new(2, 1, 20, seed)).unwrap());
}

#[test]
fn reports_depend_only_on_the_seed() {
    let a = honest_collision_experiment(&CollisionConfig::new(6, 0, 10, Seed::from_u64(2))).unwrap();
    let b = honest_collision_experiment(&CollisionConfig::new(6, 0, 10, Seed::from_u64(3))).unwrap();
    assert_eq!(a, honest_collision_experiment(&a.config).unwrap());
    assert_ne!(a.interference, b.interference);
}
