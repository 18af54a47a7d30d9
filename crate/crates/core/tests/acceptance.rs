//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use galmckay::chevnorm::structural_check;
use galmckay::cyclo::{is_prime, pow_mod, sqrt_as_cyclotomic, sqrt_fixed, HEllElt};
use galmckay::extmap::element_c_check;
use galmckay::mckaybij::{
    delta_checks, hecke_suite, sp_pairing, type_c_sign_table, verify_equivariance, verify_rationality_n1, Status,
    VerificationReport,
};
use galmckay::relweyl::Setting;
use galmckay::rootsys::{RootSystem, WeylGroup};

type Outcome = Result<String, String>;

fn setting(label: &str, q: u64, twisted: bool) -> Arc<Setting> {
    Arc::new(Setting::from_str(label, q, twisted).expect("valid setting"))
}

fn failing_checks(rep: &VerificationReport) -> Vec<String> {
    rep.checks
        .iter()
        .filter(|c| c.status == Status::Fail)
        .map(|c| format!("{} {}({}) {}", rep.meta.group_type, c.name, rep.meta.q, truncate(&c.witness.to_string())))
        .collect()
}

fn truncate(s: &str) -> String {
    s.chars().take(300).collect()
}

fn require(rep: &VerificationReport, names: &[&str]) -> Result<(), String> {
    for n in names {
        match rep.status_of(n) {
            Some(Status::Pass) => {}
            other => {
                return Err(format!(
                    "{}({}) ℓ={}: {n} is {other:?}; failing: {:?}",
                    rep.meta.group_type,
                    rep.meta.q,
                    rep.meta.ell,
                    failing_checks(rep)
                ))
            }
        }
    }
    Ok(())
}

fn structural() -> Outcome {
    let mut cases = 0;
    for t in ["A1", "C2", "C3", "B3", "G2"] {
        let weyl = Arc::new(WeylGroup::new(Arc::new(RootSystem::build_str(t).unwrap())).unwrap());
        for q in [3, 5, 7, 9, 11, 13] {
            let rep = structural_check(weyl.clone(), q, 10_000, q).map_err(|e| e.to_string())?;
            if !rep.passed() {
                return Err(format!("{t}({q}): {rep:?}"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} cases"))
}

fn sqrt_p() -> Outcome {
    let mut cells = 0;
    for ell in (3..50).filter(|&l| is_prime(l)) {
        for p in (2..50).filter(|&p| is_prime(p) && p != ell) {
            for r in [1u64, 2] {
                let level = if p == 2 { 8 } else { 4 * p };
                let mut sigma = HEllElt::from_unit(level, pow_mod(ell, r, level), ell).map_err(|e| e.to_string())?;
                // the level is prime to ℓ, so r is only known modulo the order of ℓ
                sigma.r = r;
                let s = sqrt_as_cyclotomic(p);
                let direct = sigma.act(&s) == s;
                let by_residue = sqrt_fixed(p, &sigma).map_err(|e| e.to_string())?;
                if direct != by_residue {
                    return Err(format!("ℓ={ell} p={p} r={r}: direct {direct}, criterion {by_residue}"));
                }
                cells += 1;
            }
        }
    }
    Ok(format!("{cells} cells"))
}

fn delta_properties() -> Outcome {
    let mut runs = 0;
    for t in ["C2", "C3", "B3", "B4", "G2"] {
        for q in [5, 13] {
            let rep = delta_checks(setting(t, q, false), 2, t.starts_with('B')).map_err(|e| e.to_string())?;
            let names: &[&str] = if t.starts_with('B') {
                &["delta_trivial_on_r", "delta_order_two", "delta_trivial"]
            } else {
                &["delta_trivial_on_r", "delta_order_two"]
            };
            require(&rep, names)?;
            runs += 1;
        }
    }
    for q in [3, 5, 7] {
        let rep = element_c_check(4, q).map_err(|e| e.to_string())?;
        if !rep.passed() || !rep.lambda_c_squared.is_rational() {
            return Err(format!("element c, q={q}: {rep:?}"));
        }
    }
    Ok(format!("{runs} runs, element c at q = 3, 5, 7"))
}

fn sign_table() -> Outcome {
    let mut rows = 0;
    for k in [2, 3] {
        for q in [3, 5, 11, 13] {
            let table = type_c_sign_table(k, q).map_err(|e| e.to_string())?;
            let parities: std::collections::HashSet<u64> = table.iter().map(|r| r.r % 2).collect();
            if parities.len() != 2 {
                return Err(format!("C{k}({q}): only r parities {parities:?} occur"));
            }
            if let Some(bad) = table.iter().find(|r| r.value != r.expected) {
                return Err(format!("{bad:?}"));
            }
            rows += table.len();
        }
    }
    Ok(format!("{rows} (λ, σ) rows"))
}

const EQUIVARIANCE_RUNS: [(&str, u64, u64); 6] =
    [("G2", 11, 5), ("G2", 5, 2), ("B3", 5, 2), ("B3", 13, 3), ("C2", 17, 2), ("C3", 17, 2)];

fn equivariance_runs() -> Vec<Result<VerificationReport, String>> {
    EQUIVARIANCE_RUNS
        .iter()
        .map(|&(t, q, ell)| {
            let start = Instant::now();
            let r = verify_equivariance(setting(t, q, false), ell).map_err(|e| format!("{t}({q}) ℓ={ell}: {e}"));
            eprintln!("  {t}({q}) ℓ={ell}: {:.1?}", start.elapsed());
            r
        })
        .collect()
}

fn omega_equivariance(reports: &[Result<VerificationReport, String>]) -> Outcome {
    let mut params = 0;
    for r in reports {
        let rep = r.as_ref().map_err(|e| e.clone())?;
        require(
            rep,
            &["equivariance", "omega_injective", "ell_prime_degrees", "omega_irreducible", "exhaustion", "central_characters", "action_law"],
        )?;
        if rep.failed() {
            return Err(format!("{:?}", failing_checks(rep)));
        }
        params += rep.params.len();
    }
    Ok(format!("{} runs, {params} parameters", reports.len()))
}

fn rationality() -> Outcome {
    let mut members = 0;
    for (t, q) in [("G2", 3), ("G2", 7), ("B3", 3), ("B3", 7)] {
        let rep = verify_rationality_n1(setting(t, q, true)).map_err(|e| format!("{t}({q}): {e}"))?;
        require(&rep, &["rational_values", "omega_irreducible", "exhaustion"])?;
        members += rep.params.len();
    }
    Ok(format!("{members} characters of odd degree"))
}

fn hecke() -> Outcome {
    let mut runs: Vec<(&str, u64, u64)> = Vec::new();
    for t in ["C2", "C3", "B3", "B4", "G2"] {
        for q in [5, 13] {
            runs.push((t, q, 2));
        }
    }
    runs.extend(EQUIVARIANCE_RUNS);
    runs.sort();
    runs.dedup();
    for &(t, q, ell) in &runs {
        let rep = hecke_suite(setting(t, q, false), ell).map_err(|e| format!("{t}({q}): {e}"))?;
        require(&rep, &["hecke_relations", "hecke_g_point", "hecke_f_rational", "eta_twist_galois", "clifford_induction"])?;
    }
    Ok(format!("{} settings", runs.len()))
}

fn pairing() -> Outcome {
    for n in [2, 3, 4] {
        for q in [3, 7, 11] {
            let rep = sp_pairing(n, q).map_err(|e| format!("n={n} q={q}: {e}"))?;
            require(&rep, &["pair_respecting_matching", "equivariance", "fixed_point_counts", "count_g_side", "count_m_side"])?;
        }
    }
    Ok("9 (n, q) cases".into())
}

fn counting(reports: &[Result<VerificationReport, String>]) -> Outcome {
    let mut out = Vec::new();
    for r in reports {
        let rep = r.as_ref().map_err(|e| e.clone())?;
        require(rep, &["exhaustion", "class_count"])?;
        out.push(format!("{}({})={}", rep.meta.group_type, rep.meta.q, rep.params.len()));
    }
    Ok(out.join(" "))
}

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut report = |n: usize, name: &str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("criterion {n} [{name}]: PASS ({msg}; {secs:.1}s)"),
            Err(msg) => {
                all_ok = false;
                println!("criterion {n} [{name}]: FAIL ({msg}; {secs:.1}s)")
            }
        }
    };
    report(1, "structure of V, T, N", &structural);
    report(2, "square-root criterion", &sqrt_p);
    report(3, "δ properties", &delta_properties);
    report(4, "type C sign table", &sign_table);
    let runs = equivariance_runs();
    report(5, "Ω equivariance", &|| omega_equivariance(&runs));
    report(6, "twisted rationality", &rationality);
    report(7, "Hecke suite", &hecke);
    report(8, "symplectic pairing", &pairing);
    report(9, "Clifford counting", &|| counting(&runs));
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
