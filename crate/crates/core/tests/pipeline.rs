//! Cross-module checks on small settings.

use std::sync::Arc;

use galmckay::cyclo::HEllElt;
use galmckay::mckaybij::{sp_pairing, verify_equivariance, ActionResult, RunContext, Status};
use galmckay::relweyl::Setting;

fn setting(s: &str, q: u64) -> Arc<Setting> {
    Arc::new(Setting::from_str(s, q, false).unwrap())
}

#[test]
fn b3_odd_parameters_fixed_at_q_1_mod_4() {
    let ctx = RunContext::build(setting("B3", 5), 2).unwrap();
    for sigma in ctx.galois_generators() {
        for pi in 0..ctx.params.params.len() {
            assert_eq!(ctx.param_action(&sigma, pi).unwrap(), ActionResult::Param(pi));
        }
    }
}

#[test]
fn c2_at_five_swaps_pairs_for_odd_r() {
    let ctx = RunContext::build(setting("C2", 5), 2).unwrap();
    let level = ctx.galois_level;
    let odd = galmckay::cyclo::h_ell_units(2, level)
        .into_iter()
        .map(|u| HEllElt::from_unit(level, u, 2).unwrap())
        .find(|s| s.r % 2 == 1)
        .unwrap();
    let mut moved = 0;
    for pi in 0..ctx.params.params.len() {
        let oi = ctx.orbit_of_param(pi);
        let o = &ctx.orbits[oi].data;
        if let ActionResult::Param(j) = ctx.param_action(&odd, pi).unwrap() {
            if j != pi {
                moved += 1;
                // same λ, η twisted by the sign of C(λ)
                assert_eq!(ctx.params.params[j].lambda(), &o.lambda);
                assert!(o.rel.c_lambda.len() > 1);
            }
        }
    }
    assert!(moved > 0);
}

#[test]
fn g2_at_seven_ell_three_is_flagged() {
    let rep = verify_equivariance(setting("G2", 7), 3).unwrap();
    assert!(rep.checks.iter().any(|c| c.name == "exclusion" && c.status == Status::Flagged));
    assert!(rep.params.iter().all(|p| p.degree.unwrap() % 3 != 0));
}

#[test]
fn pairing_q7_fixes_everything() {
    let rep = sp_pairing(2, 7).unwrap();
    assert!(!rep.failed(), "{}", rep.to_json());
}
