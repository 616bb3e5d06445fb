use cartanlie::suites::{run_suite, SuiteConfig, SUITE_NAMES};

fn main() {
    let cfg = SuiteConfig::default();
    let total = std::time::Instant::now();
    for name in SUITE_NAMES {
        let t = std::time::Instant::now();
        let reports = run_suite(name, &cfg).unwrap();
        let ok = reports.iter().all(|r| r.status.is_ok());
        println!("{:>14}  {:>8.2}s  ok={} reports={}", name, t.elapsed().as_secs_f64(), ok, reports.len());
    }
    println!("{:>14}  {:>8.2}s", "TOTAL", total.elapsed().as_secs_f64());
}
