//! The generated header must be valid C and expose the whole interface.

use std::path::Path;
use std::process::Command;

const PROGRAM: &str = r#"
#include "freud.h"
#include <stdio.h>

int main(void) {
    FreudParams *p = NULL;
    FreudRecurrence *r = NULL;
    double beta = 0.0;
    char buf[128];
    size_t needed = 0;
    if (freud_params_new(2, "0", "-1/2", 0, &p) != FREUD_STATUS_OK) return 1;
    if (freud_recurrence_new(p, 4, FREUD_METHOD_HANKEL, &r) != FREUD_STATUS_OK) return 1;
    freud_beta(r, 1, &beta);
    freud_beta_str(r, 1, buf, sizeof buf, &needed);
    freud_last_error(buf, sizeof buf, &needed);
    printf("%s %f\n", freud_version(), beta);
    freud_recurrence_free(r);
    freud_params_free(p);
    return 0;
}
"#;

#[test]
fn header_declares_interface() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(dir.join("freud.h")).unwrap();
    for name in [
        "freud_version",
        "freud_last_error",
        "freud_params_new",
        "freud_params_free",
        "freud_mu0",
        "freud_moment",
        "freud_recurrence_new",
        "freud_recurrence_free",
        "freud_recurrence_len",
        "freud_recurrence_precision",
        "freud_beta",
        "freud_beta_str",
        "freud_string_residual",
        "freud_zeros",
        "freud_density",
        "freud_limit_value",
        "FREUD_STATUS_BUFFER_TOO_SMALL",
        "typedef struct FreudParams FreudParams",
    ] {
        assert!(header.contains(name), "{name} missing from freud.h");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::env::var("CC").or_else(|_| which("cc")) else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use_header.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-c", "-o"])
        .arg(tmp.path().join("use_header.o"))
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which(name: &str) -> Result<String, ()> {
    let ok = Command::new(name).arg("--version").output().map(|o| o.status.success()).unwrap_or(false);
    if ok {
        Ok(name.to_string())
    } else {
        Err(())
    }
}
