//! Drive the full pipeline from a config file, as `shellscale report` does.
//!
//! cargo run --release --example run_config -- crates/core/examples/configs/conformal_cubic.toml [--json]

use std::path::PathBuf;

use shellscale::cli::{to_json, Session};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/conformal_quadratic.toml")));
    let session = Session::load(&path).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(1);
    });
    let report = session.report().unwrap();
    for g in &report.gates {
        println!("{:<34} {:>12.4e} {:<16} {}", g.name, g.value, g.bound, if g.pass { "ok" } else { "FAIL" });
    }
    if let Some(l) = &report.limit_energy {
        println!("limit energy minimum {:.6e}", l.total);
    }
    if std::env::args().any(|a| a == "--json") {
        print!("{}", to_json(&report));
    }
}
