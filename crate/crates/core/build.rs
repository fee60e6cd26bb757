use std::path::Path;

// The system has reference BLAS/LAPACK/LAPACKE but no separate CBLAS library;
// openblas carries the cblas_* symbols, so expose it under the expected name.
fn main() {
    let out = std::env::var("OUT_DIR").unwrap();
    let link = Path::new(&out).join("libcblas.so");
    if !link.exists() {
        for candidate in ["/usr/lib/libopenblas.so", "/usr/lib/x86_64-linux-gnu/libopenblas.so"] {
            if Path::new(candidate).exists() {
                let _ = std::os::unix::fs::symlink(candidate, &link);
                break;
            }
        }
    }
    println!("cargo:rustc-link-search=native={out}");
}
