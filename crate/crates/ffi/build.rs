use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml");
    let bindings = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation");

    let header = crate_dir.join("include").join("pdrs.h");
    let mut fresh = Vec::new();
    bindings.write(&mut fresh);
    if std::fs::read(&header).ok().as_deref() != Some(&fresh[..]) {
        std::fs::create_dir_all(header.parent().expect("include dir")).expect("create include dir");
        std::fs::write(&header, fresh).expect("write header");
    }
}
