//! Generates the C header into OUT_DIR. The committed `include/spe.h` is
//! the authoritative copy; a test compares it with the generated one and
//! explains how to refresh it when the API changes.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR set");
    let out = PathBuf::from(env::var("OUT_DIR").expect("OUT_DIR set")).join("spe.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let config = cbindgen::Config::from_root_or_default(&crate_dir);
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen generation failed")
        .write_to_file(out);
}
