//! Acceptance criteria 1 to 12, one line each. Runs without the libtest
//! harness so the verdicts are always printed.

use std::process::ExitCode;
use std::time::Instant;

use dplab::construction::BumpProfile;
use dplab::experiments::verify::{self, AcceptanceRuns, CheckResult};
use dplab::experiments::norms_csv;

fn timed<T>(label: &str, f: impl FnOnce() -> T) -> T {
    let clock = Instant::now();
    let out = f();
    eprintln!("  [{label}: {:.1} s]", clock.elapsed().as_secs_f64());
    out
}

fn main() -> ExitCode {
    let bump = BumpProfile::new();
    let mut results: Vec<CheckResult> = vec![
        timed("partition", || verify::check_partition(&verify::reference_bank().unwrap())),
        timed("block purity", || verify::check_block_purity(&bump, &[8, 12, 16]).unwrap()),
        timed("rho0 scaling", || verify::check_rho0_scaling(&bump, &[8, 12, 16, 20]).unwrap()),
        timed("lemma", || verify::check_lemma32(&bump, &[8, 12, 16]).unwrap()),
        timed("g identity", || verify::check_g_identity(100, 7).unwrap()),
        timed("solver orders", || verify::check_solver_orders().unwrap()),
    ];

    let runs = timed("runs n = 8, 8, 12, 16 and control", || AcceptanceRuns::execute(&bump).unwrap());
    for o in [&runs.n8, &runs.n8_repeat, &runs.n12, &runs.n16, &runs.control] {
        eprintln!("  [{}: {:.1} s]", o.run_id, o.wall_time_s);
    }
    let sweep = runs.sweep();
    results.push(verify::check_mform(&sweep));
    results.push(verify::check_picard_slope(&runs.n12));
    results.push(verify::check_a_priori(&sweep));
    results.push(verify::check_inflation(&sweep, &runs.control));
    results.push(verify::check_transport(&runs.n8));
    results.push(verify::check_determinism(
        &norms_csv(&[&runs.n8.report]),
        &norms_csv(&[&runs.n8_repeat.report]),
    ));
    results.sort_by_key(|c| c.id);

    for r in &results {
        println!("{r}");
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
