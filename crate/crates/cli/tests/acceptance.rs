//! Acceptance suite: one test and one printed PASS/FAIL line per criterion.
//!
//! Lines go straight to the process stdout so they show up without
//! `--nocapture`. Criteria run one at a time so the timings are not skewed
//! by each other; the shared table is solved inside whichever timed
//! region asks for it first.

use std::io::Write;
use std::process::Command;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use bkdv_cli::cache::Cache;
use bkdv_cli::checks::{find, run_one, Context};
use bkdv_core::loop_solver::{solve_up_to, FreeEnergyTable};

static SERIAL: Mutex<()> = Mutex::new(());

fn shared_table() -> Arc<FreeEnergyTable> {
    static T: OnceLock<Arc<FreeEnergyTable>> = OnceLock::new();
    T.get_or_init(|| Arc::new(solve_up_to(2).expect("loop solve"))).clone()
}

fn line(n: usize, pass: bool, elapsed: Duration, limit: Option<Duration>, note: &str) {
    let limit = limit.map(|l| format!(", limit {} s", l.as_secs())).unwrap_or_default();
    let s = format!(
        "acceptance criterion {n:>2}: {} ({:.2} s{limit}) {note}\n",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes());
    let _ = out.flush();
}

/// Run check `id` in `ctx` (built inside the timed region) and report it.
fn criterion(n: usize, id: &str, limit: Option<Duration>, ctx: impl FnOnce() -> Context) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let ctx = ctx();
    let entry = run_one(find(id).expect("registered check"), &ctx);
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let note = match &entry.witness {
        Some(w) => w.clone(),
        None => entry.details.first().cloned().unwrap_or_default(),
    };
    line(n, entry.passed() && in_time, elapsed, limit, &format!("[{id}] {note}"));
    assert!(entry.passed(), "criterion {n}: {entry:?}");
    assert!(in_time, "criterion {n} took {elapsed:?}");
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

#[test]
fn criterion_01_flow_seeds_and_coefficients() {
    criterion(1, "seeds", secs(1), || Context::new(Cache::disabled(), 0));
}

#[test]
fn criterion_02_order_zero_seed_residual() {
    criterion(2, "Fo1", secs(5), || Context::new(Cache::disabled(), 0));
}

#[test]
fn criterion_03_first_order_solve() {
    // the solve itself is inside the timed region
    criterion(3, "Fo2", secs(30), || {
        let ctx = Context::new(Cache::disabled(), 1);
        ctx.table().expect("solve");
        ctx
    });
}

#[test]
fn criterion_04_second_order_split() {
    criterion(4, "Fc2-Fo3", secs(600), || {
        let ctx = Context::new(Cache::disabled(), 2);
        ctx.table().expect("solve");
        ctx
    });
}

#[test]
fn criterion_05_homogeneity_and_denominators() {
    criterion(5, "homogeneity", None, || Context::with_table(Cache::disabled(), shared_table()));
}

#[test]
fn criterion_06_iz_variables_and_inversion() {
    criterion(6, "iz-coords", None, || Context::new(Cache::disabled(), 0));
}

#[test]
fn criterion_07_iz_forms_of_free_energy() {
    criterion(7, "iz-free-energy", None, || Context::with_table(Cache::disabled(), shared_table()));
}

#[test]
fn criterion_08_btilde_values_two_routes() {
    criterion(8, "btilde", secs(120), || Context::with_table(Cache::disabled(), shared_table()));
}

#[test]
fn criterion_09_vanishing_sweeps() {
    criterion(9, "vanishing", None, || Context::with_table(Cache::disabled(), shared_table()));
}

#[test]
fn criterion_10_genus_zero_and_virasoro() {
    criterion(10, "virasoro", secs(300), || Context::with_table(Cache::disabled(), shared_table()));
}

#[test]
fn criterion_11_euler_lagrange_cross_check() {
    criterion(11, "el-recursion", None, || Context::with_table(Cache::disabled(), shared_table()));
}

#[test]
fn criterion_12_verify_paper_is_deterministic() {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        let out = Command::new(env!("CARGO_BIN_EXE_bkdv"))
            .args(["verify-paper", "--json", "--cache-dir"])
            .arg(dir.path())
            .env_remove("BKDV_CACHE_DIR")
            .output()
            .expect("run bkdv");
        (out.status.code(), out.stdout)
    };
    let (cold_code, cold) = run();
    let cached = std::fs::read_dir(dir.path()).map(|d| d.count()).unwrap_or(0);
    let (warm_code, warm) = run();
    let pass = cold_code == Some(0) && warm_code == Some(0) && cold == warm && cached > 0;
    line(
        12,
        pass,
        start.elapsed(),
        None,
        &format!("[determinism] cold and cached verify-paper runs byte-identical: {}, {cached} cache entries, exit codes {cold_code:?}/{warm_code:?}", cold == warm),
    );
    assert!(pass);
}
