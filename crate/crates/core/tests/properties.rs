use std::sync::Arc;

use galmckay::chevnorm::build_n;
use galmckay::charkit::FiniteGroup;
use galmckay::cyclo::{euler_phi, gcd, Cyclotomic, GaloisElt};
use galmckay::mckaybij::{Status, VerificationReport, ZRing};
use galmckay::rootsys::{RootSystem, WeylGroup};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use serde_json::json;

fn cyclotomic(level: u64) -> impl Strategy<Value = Cyclotomic> {
    let phi = euler_phi(level) as usize;
    prop::collection::vec((-20i64..20, 1i64..5), phi).prop_map(move |cs| {
        Cyclotomic::from_coeffs(
            level,
            cs.into_iter().map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d))).collect(),
        )
    })
}

fn unit(level: u64) -> impl Strategy<Value = u64> {
    (1..level).prop_filter("unit", move |&u| gcd(u, level) == 1)
}

fn weyl(s: &str) -> Arc<WeylGroup> {
    Arc::new(WeylGroup::new(Arc::new(RootSystem::build_str(s).unwrap())).unwrap())
}

proptest! {
    #[test]
    fn text_roundtrip(x in cyclotomic(12)) {
        let back: Cyclotomic = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn galois_is_a_ring_map(x in cyclotomic(15), y in cyclotomic(15), u in unit(15)) {
        let s = GaloisElt::new(15, u).unwrap();
        prop_assert_eq!(s.act(&(&x * &y)), &s.act(&x) * &s.act(&y));
        prop_assert_eq!(s.act(&(&x + &y)), &s.act(&x) + &s.act(&y));
    }

    #[test]
    fn galois_composition(x in cyclotomic(20), a in unit(20), b in unit(20)) {
        let (sa, sb) = (GaloisElt::new(20, a).unwrap(), GaloisElt::new(20, b).unwrap());
        prop_assert_eq!(sa.compose(&sb).act(&x), sa.act(&sb.act(&x)));
    }

    #[test]
    fn lift_preserves_value(x in cyclotomic(6)) {
        prop_assert_eq!(x.lift(24).normalized(), x.normalized());
    }

    #[test]
    fn integer_ring_matches_field(a in prop::collection::vec(-5i64..5, 8), b in prop::collection::vec(-5i64..5, 8), u in unit(24)) {
        let r = ZRing::new(24);
        let (x, y) = (r.to_cyclo(&a), r.to_cyclo(&b));
        prop_assert_eq!(r.to_cyclo(&r.mul(&a, &b)), &x * &y);
        prop_assert_eq!(r.to_cyclo(&r.conj(&a)), x.conj());
        prop_assert_eq!(r.to_cyclo(&r.galois(&a, u)), GaloisElt::new(24, u).unwrap().act(&x));
    }

    #[test]
    fn weyl_group_laws(a in 0usize..48, b in 0usize..48, c in 0usize..48) {
        let w = weyl("B3");
        prop_assert_eq!(w.mul(w.mul(a, b), c), w.mul(a, w.mul(b, c)));
        prop_assert_eq!(w.mul(a, w.inv(a)), 0);
        prop_assert!(w.length(w.mul(a, b)) <= w.length(a) + w.length(b));
    }

    #[test]
    fn normalizer_laws(a in 0usize..3072, b in 0usize..3072, c in 0usize..3072) {
        let n = build_n(weyl("B3"), 5, false).unwrap();
        prop_assert_eq!(n.mul(n.mul(a, b), c), n.mul(a, n.mul(b, c)));
        prop_assert_eq!(n.mul(a, n.inv(a)), 0);
    }

    #[test]
    fn torus_action_is_additive(x in prop::collection::vec(0u64..4, 2), y in prop::collection::vec(0u64..4, 2), w in 0usize..8) {
        let n = build_n(weyl("C2"), 5, false).unwrap();
        let t = &n.torus;
        let (x, y) = (galmckay::chevnorm::TorusElt { exps: x }, galmckay::chevnorm::TorusElt { exps: y });
        prop_assert_eq!(t.act(w, &t.add(&x, &y)), t.add(&t.act(w, &x), &t.act(w, &y)));
    }

    #[test]
    fn report_roundtrip(q in 2u64..100, ell in 2u64..20, statuses in prop::collection::vec(0u8..4, 0..6)) {
        let mut r = VerificationReport::new("G2", q, ell, 1, false);
        for (i, s) in statuses.iter().enumerate() {
            let st = [Status::Pass, Status::Fail, Status::Flagged, Status::Indeterminate][*s as usize];
            r.push(&format!("check{i}"), st, json!({ "i": i }));
        }
        let back = VerificationReport::parse(&r.to_json()).unwrap();
        prop_assert_eq!(back.failed(), statuses.contains(&1));
        prop_assert_eq!(back, r);
    }
}
