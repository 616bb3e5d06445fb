//! End-to-end acceptance checks at the default desk-scale configuration.
//! Each test prints one verdict line; run with `--nocapture` to see them all.

use cartanlie::report::{Report, Status};
use cartanlie::suites::{run_suite, SuiteConfig};

fn suite(name: &str) -> Vec<Report> {
    run_suite(name, &SuiteConfig::default()).expect("default suite configuration is valid")
}

fn find<'a>(reports: &'a [Report], name: &str, param: Option<(&str, &str)>) -> &'a Report {
    reports
        .iter()
        .find(|r| {
            r.name == name
                && param.map_or(true, |(k, v)| {
                    r.parameters.get(k).map(String::as_str) == Some(v)
                })
        })
        .unwrap_or_else(|| panic!("missing report {name} {param:?}"))
}

fn verdict(n: u32, name: &str, ok: bool) {
    println!("criterion {n} ({name}): {}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed");
}

#[test]
fn criterion_01_bracket_identities() {
    let reports = suite("jacobi");
    let mut ok = reports.iter().all(|r| r.status == Status::Pass);
    let small = find(&reports, "jacobi_exhaustive", Some(("algebra", "W(1,(1))")));
    ok &= small.evidence["triples"] == 125;
    let tall = find(&reports, "jacobi_exhaustive", Some(("algebra", "W(1,(2))")));
    ok &= tall.evidence["triples"] == 15_625;
    for alg in ["W(2,(1,1))", "W(3,(1,1,1))"] {
        let r = find(&reports, "jacobi_random", Some(("algebra", alg)));
        ok &= r.evidence["triples"] == 10_000
            && r.evidence["jacobi_failures"] == 0
            && r.evidence["anticommutativity_failures"] == 0;
    }
    verdict(1, "Jacobi and anticommutativity", ok);
}

#[test]
fn criterion_02_divergence_identities() {
    let reports = suite("divergence");
    let mut ok = reports.iter().all(|r| r.status == Status::Pass);
    for name in ["divergence_product_rule", "divergence_commutator_rule"] {
        let r = find(&reports, name, None);
        let total: i64 = r
            .evidence
            .iter()
            .filter(|(k, _)| k.starts_with("samples_"))
            .map(|(_, v)| v)
            .sum();
        let failures: i64 = r
            .evidence
            .iter()
            .filter(|(k, _)| k.starts_with("failures_"))
            .map(|(_, v)| v)
            .sum();
        ok &= total >= 1000 && failures == 0;
    }
    verdict(2, "divergence identities", ok);
}

#[test]
fn criterion_03_flattening_embedding() {
    let reports = suite("embedding");
    let mut ok = reports.iter().all(|r| r.status == Status::Pass);
    let one = find(&reports, "flattening_embedding", Some(("source", "W(1,(2))")));
    ok &= one.evidence["basis_divergence_checks"] == 25 && one.evidence["bracket_pairs"] == 500;
    let two = find(&reports, "flattening_embedding", Some(("source", "W(2,(1,2))")));
    ok &= two.evidence["basis_divergence_checks"] == 250 && two.evidence["bracket_pairs"] == 500;
    ok &= reports
        .iter()
        .all(|r| r.evidence["divergence_failures"] == 0 && r.evidence["bracket_failures"] == 0);
    verdict(3, "flattening embedding", ok);
}

#[test]
fn criterion_04_structural_dimensions() {
    let reports = suite("dimensions");
    let w = find(&reports, "dimensions_w", None);
    let mut ok = w.status == Status::Pass;
    ok &= w.evidence["dim_o_m2_n11"] == 25 && w.evidence["dim_w_m2_n11"] == 50;
    ok &= w.evidence["dim_o_m3_n111"] == 125 && w.evidence["dim_w_m3_n111"] == 375;
    ok &= w.evidence["dim_o_m1_n2"] == 25 && w.evidence["dim_w_m1_n2"] == 25;
    ok &= w.evidence["dim_o_m2_n12"] == 125 && w.evidence["dim_w_m2_n12"] == 250;
    let s = find(&reports, "dimensions_s_codim", None);
    ok &= s.status == Status::Pass;
    ok &= s.evidence["dim_s_m2_n11"] - s.evidence["dim_s1_m2_n11"] == 2;
    ok &= s.evidence["dim_s_m3_n111"] - s.evidence["dim_s1_m3_n111"] == 3;
    let h = find(&reports, "dimensions_h", None);
    ok &= h.status == Status::Pass && h.evidence["dim_h2"] == 23;
    let k = find(&reports, "dimensions_k_codim", None);
    ok &= k.status == Status::Pass && k.evidence["dim_k1"] == 125 && k.evidence["codim"] == 0;
    let k7 = find(&reports, "dimensions_k_codim_large", None);
    if k7.status == Status::Skipped {
        println!("criterion 4 note: K codimension probe at m = 7 SKIPPED (above dimension cap)");
    }
    ok &= matches!(k7.status, Status::Skipped | Status::Pass);
    verdict(4, "structural dimensions", ok);
}

#[test]
fn criterion_05_centraliser_and_decomposition() {
    let centr = suite("centraliser");
    let mut ok = centr.iter().all(|r| r.status == Status::Pass);
    for r in &centr {
        ok &= r.evidence["trivial_constants"] == 100 && r.evidence["failures"] == 0;
    }
    let decomp = suite("decomposition");
    ok &= decomp.iter().all(|r| r.status == Status::Pass);
    for r in &decomp {
        ok &= r.evidence["decomposed"] == 100 && r.evidence["failures"] == 0;
    }
    verdict(5, "centraliser law and eigenbasis decomposition", ok);
}

#[test]
fn criterion_06_contact_suite() {
    let reports = suite("contact");
    let mut ok = reports.iter().all(|r| r.status == Status::Pass);
    ok &= find(&reports, "contact_homomorphism", None).evidence["pairs"] == 500;
    ok &= find(&reports, "contact_module_identity", None).evidence["matrices"] == 200;
    ok &= find(&reports, "contact_char_poly", None).evidence["comparisons"] == 50;
    let bounds = find(&reports, "contact_centraliser_bounds", None);
    ok &= bounds.evidence["samples"] == 50
        && bounds.evidence["min_dim_full"] >= 3
        && bounds.evidence["min_dim_filtered"] >= 2;
    ok &= reports.iter().all(|r| r.evidence["failures"] == 0);
    verdict(6, "contact identities and bounds", ok);
}

#[test]
fn criterion_07_witness_constructions() {
    let reports = suite("witness");
    let mut ok = reports.iter().all(|r| r.status == Status::Pass);
    ok &= find(&reports, "witness_s", None).evidence["samples"] == 200;
    ok &= find(&reports, "witness_h", None).evidence["samples"] == 200;
    ok &= find(&reports, "witness_k", None).evidence["samples"] == 50;
    ok &= reports
        .iter()
        .all(|r| r.evidence["failures"] == 0 && r.evidence["omega_misses"] == 0);
    verdict(7, "commuting witness constructions", ok);
}

#[test]
fn criterion_08_nongeneration_probes() {
    let reports = suite("nongen");
    let mut ok = true;
    for (name, samples) in [("nongen_s", 200), ("nongen_h", 200), ("nongen_k", 50)] {
        let r = find(&reports, name, None);
        if r.status == Status::TheoremViolation {
            println!("criterion 8 note: {name} reported a theorem violation");
        }
        ok &= r.status == Status::Pass
            && r.evidence["samples_per_vector"] == samples
            && r.evidence["hits"] == 0
            && r.evidence["top_dim"] >= 1;
    }
    verdict(8, "non-generation from the top component", ok);
}

#[test]
fn criterion_09_generation_control() {
    let reports = suite("sanity");
    let r = find(&reports, "sanity_generation", None);
    let outcome = if r.evidence["hits"] >= 1 { "PASS" } else { "FAIL" };
    println!("criterion 9 (generation control, non-gating): {outcome}");
    // The control experiment is informational; only its non-gating marker is
    // load bearing.
    assert_eq!(r.parameters["gating"], "false");
}

#[test]
fn criterion_10_deterministic_reports() {
    let exe = env!("CARGO_BIN_EXE_cartanlie");
    let run = || {
        let out = std::process::Command::new(exe)
            .args(["verify", "--samples", "20", "--seed", "42"])
            .output()
            .expect("verify runs");
        assert!(
            out.status.success(),
            "verify exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let first = run();
    let second = run();
    verdict(10, "byte identical reports", !first.is_empty() && first == second);
}
