//! Regenerate the files under `data/`.
//!
//! Usage: cargo run -p semgrad --example make_bundled [-- <data dir>]

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let root = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"));
    for f in semgrad::bundle::bundled_files() {
        let path = root.join(&f.path);
        std::fs::create_dir_all(path.parent().expect("file has a parent"))?;
        std::fs::write(&path, &f.contents)?;
        println!("{}", path.display());
    }
    Ok(())
}
