//! The generated header must compile as both C and C++.

use std::path::Path;
use std::process::Command;

fn compiles(compiler: &str, lang: &str) -> Option<bool> {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/fermi_klein.h");
    assert!(header.exists(), "header not generated");
    let dir = std::env::temp_dir().join(format!("fk-header-{}-{lang}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join(if lang == "c" { "probe.c" } else { "probe.cpp" });
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ FkAlgebra *a = 0; size_t d, n; return fk_algebra_dim(a, &d, &n) == FK_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    let status = Command::new(compiler).args(["-fsyntax-only", "-Wall", "-Werror"]).arg(&src).status().ok()?;
    Some(status.success())
}

#[test]
fn header_compiles_as_c() {
    match compiles("cc", "c") {
        Some(ok) => assert!(ok),
        None => eprintln!("no C compiler found; skipped"),
    }
}

#[test]
fn header_compiles_as_cpp() {
    match compiles("c++", "cpp") {
        Some(ok) => assert!(ok),
        None => eprintln!("no C++ compiler found; skipped"),
    }
}
