use std::env;
use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml"))
        .expect("cbindgen.toml is malformed");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation failed");

    let out = PathBuf::from(env::var("OUT_DIR").unwrap()).join("lsade.h");
    bindings.write_to_file(&out);
    // Keep the committed copy in sync so C consumers can use the checkout
    // without running a build first.
    bindings.write_to_file(crate_dir.join("include").join("lsade.h"));
}
