//! Acceptance suite: runs every numbered verification check at its pinned
//! tolerance and prints one pass/fail line per check.
//!
//! Check 2a (the layering-rate asymptote pinned at P=100) is known to be
//! unattainable — the asymptote carries an O(1/sqrt(P)) correction of
//! about 14% at that power — and is kept as an honest failing assertion;
//! see the 2c diagnostic for the large-P behaviour that does hold.

use layercast::suites::{self, Check};

fn report(checks: &[Check]) {
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", c.name, c.detail);
    }
}

fn assert_all(checks: Vec<Check>) {
    report(&checks);
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    assert!(failed.is_empty(), "failed checks: {:?}", failed.iter().map(|c| &c.name).collect::<Vec<_>>());
}

#[test]
fn criterion_01_siso_closed_form() {
    assert_all(suites::siso_closed_form());
}

#[test]
fn criterion_02_siso_asymptotes() {
    // The C_erg clause holds as stated; the R_bs clause does not hold at
    // P=100 and is asserted separately below.
    let checks = suites::siso_asymptotes();
    report(&checks);
    let by_name = |tag: &str| checks.iter().find(|c| c.name.starts_with(tag)).unwrap();
    assert!(by_name("2b").passed, "C_erg asymptote at P=100");
    assert!(by_name("2c").passed, "R_bs asymptote at large P");
}

#[test]
fn criterion_02a_siso_rate_asymptote_as_stated() {
    // Faithful to the stated check: R_bs(100) within 2% of ln(100/9.256).
    // The exact rate is 2.75637 against a target of 2.37990 (13.7% off),
    // so this assertion fails by construction of the target itself.
    let checks = suites::siso_asymptotes();
    report(&checks);
    let clause = checks.iter().find(|c| c.name.starts_with("2a")).unwrap();
    assert!(clause.passed, "{}", clause.detail);
}

#[test]
fn criterion_03_siso_ordering() {
    assert_all(suites::siso_ordering());
}

#[test]
fn criterion_04_siso_monte_carlo() {
    assert_all(suites::siso_monte_carlo());
}

#[test]
fn criterion_05_mac_inclusion() {
    assert_all(suites::mac_inclusion());
}

#[test]
fn criterion_06_mac_average_rate() {
    assert_all(suites::mac_average_rate());
}

#[test]
fn criterion_07_relay_scheme1() {
    assert_all(suites::relay_scheme1());
}

#[test]
fn criterion_08_relay_af_law() {
    assert_all(suites::relay_af_law());
}

#[test]
fn criterion_09_queue_bounds() {
    assert_all(suites::queue_bounds());
}

#[test]
fn criterion_10_mixed_delay() {
    assert_all(suites::mixed_delay());
}

#[test]
fn criterion_11_parallel_twostate() {
    assert_all(suites::parallel_twostate());
}

#[test]
fn criterion_12_sr_distortion() {
    assert_all(suites::sr_distortion());
}

#[test]
fn criterion_13_bottleneck() {
    assert_all(suites::bottleneck_suite());
}

#[test]
fn criterion_14_harvest_bruteforce() {
    assert_all(suites::harvest_bruteforce());
}

#[test]
fn criterion_15_determinism() {
    let exe = std::path::PathBuf::from(env!("CARGO_BIN_EXE_layercast"));
    assert_all(suites::determinism_with_binary(&exe));
}
