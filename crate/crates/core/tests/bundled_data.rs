use std::path::PathBuf;

use semgrad::bundle::bundled_files;

#[test]
fn data_directory_matches_generator() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for f in bundled_files() {
        let path = root.join(&f.path);
        let on_disk = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}; run the make_bundled example", path.display()));
        assert!(
            on_disk == f.contents,
            "{} is stale; run the make_bundled example",
            path.display()
        );
    }
}
