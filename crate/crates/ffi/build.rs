use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let header = PathBuf::from(&crate_dir).join("include/conedist.h");
    let bindings = cbindgen::generate(&crate_dir).expect("header generation");
    let mut buf = Vec::new();
    bindings.write(&mut buf);
    // Rewrite only on change to keep incremental builds quiet.
    if std::fs::read(&header).ok().as_deref() != Some(buf.as_slice()) {
        std::fs::create_dir_all(header.parent().unwrap()).unwrap();
        std::fs::write(&header, &buf).unwrap();
    }
}
