//! Times the test-set computation on the bundled instances.

use std::time::Instant;

use portopt::convex::Polytope;
use portopt::fixtures::{illustrative_instance, mixed_instance};
use portopt::testset::{build_slack_system, groebner_test_set, DEFAULT_PAIR_CAP};

fn main() {
    let inst = illustrative_instance();
    let poly = Polytope::base(&inst, 11_809_715, 11_802_500);
    let sys = build_slack_system(&inst, &poly).unwrap();
    let t = Instant::now();
    let ts = groebner_test_set(&sys, DEFAULT_PAIR_CAP).unwrap();
    println!("two-asset basis {} in {:?}", ts.len(), t.elapsed());

    let mixed = mixed_instance(5_000_000);
    let poly3 = Polytope::base(&mixed, 10_000_000, 0);
    let sys3 = build_slack_system(&mixed, &poly3).unwrap();
    let t = Instant::now();
    let ts3 = groebner_test_set(&sys3, DEFAULT_PAIR_CAP).unwrap();
    println!("mixed basis {} in {:?}", ts3.len(), t.elapsed());
}
