mod common;

use acl_bench::weights;
use acl_core::procgen::{terrain_profiles, CppnWeights, TerrainSpec, STARTPAD_CEILING, STARTPAD_GROUND};
use common::*;

#[test]
fn weights_fixture_decodes_to_seed_42() {
    let w = weights::read_file(&fixtures_dir().join(WEIGHTS_FIXTURE)).unwrap();
    assert_eq!(w, CppnWeights::canonical());
}

#[test]
fn profiles_from_the_weights_file_match_in_memory_weights() {
    let from_file = weights::read_file(&fixtures_dir().join(WEIGHTS_FIXTURE)).unwrap();
    let spec = TerrainSpec::new([-0.2, 0.9, 0.1], 0.0, 0.0, 0.0);
    assert_eq!(terrain_profiles(&spec, &from_file), terrain_profiles(&spec, &CppnWeights::canonical()));
}

#[test]
fn theta_zero_profile_matches_fixture() {
    let stored: Profile = load_json(THETA_ZERO_FIXTURE);
    let now = compute_theta_zero(&CppnWeights::canonical());
    assert!(max_abs_diff(&stored.ground, &now.ground) <= 1e-9);
    assert!(max_abs_diff(&stored.ceiling, &now.ceiling) <= 1e-9);
    assert_eq!(now.ground[0], STARTPAD_GROUND);
    assert_eq!(now.ceiling[0], STARTPAD_CEILING);
}

/// Rewrites every fixture from the current generator:
/// `cargo test -p acl-bench --test procgen_fixtures -- --ignored`.
#[test]
#[ignore]
fn regenerate_fixtures() {
    let dir = fixtures_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let w = CppnWeights::canonical();
    weights::write_file(&dir.join(WEIGHTS_FIXTURE), &w).unwrap();
    let pinned = serde_json::to_string_pretty(&compute_pinned(&w)).unwrap();
    std::fs::write(dir.join(PINNED_FIXTURE), pinned + "\n").unwrap();
    let zero = serde_json::to_string_pretty(&compute_theta_zero(&w)).unwrap();
    std::fs::write(dir.join(THETA_ZERO_FIXTURE), zero + "\n").unwrap();
}
