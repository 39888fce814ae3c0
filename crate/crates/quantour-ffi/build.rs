use std::path::Path;

fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let header_path = Path::new(&crate_dir).join("include/quantour.h");

    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            std::fs::create_dir_all(header_path.parent().unwrap()).unwrap();
            // write_to_file only touches the file when the content changed,
            // keeping incremental builds quiet.
            bindings.write_to_file(&header_path);
        }
        Err(e) => panic!("header generation failed: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
