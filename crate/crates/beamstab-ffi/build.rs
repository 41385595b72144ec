#[cfg(feature = "ffi-headers")]
fn generate_headers() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    std::fs::create_dir_all("include").expect("create include directory");
    cbindgen::generate(&crate_dir)
        .expect("generate C header")
        .write_to_file("include/beamstab.h");
}

fn main() {
    #[cfg(feature = "ffi-headers")]
    generate_headers();
}
