//! The JSON files under `instances/` are exactly the built-in generators.

use std::path::PathBuf;

use bvqft::instances::{builtin, BUILTIN_NAMES};
use bvqft::io::{load_instance, same_instance, serialize_instance};

fn instance_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

#[test]
fn shipped_files_match_generators() {
    for name in BUILTIN_NAMES {
        let path = instance_dir().join(format!("{name}.json"));
        let loaded = load_instance(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let generated = builtin(name).unwrap();
        assert!(same_instance(&loaded, &generated), "{name} differs from its generator");
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, serialize_instance(&generated), "{name} is not in canonical form");
    }
}

#[test]
fn every_shipped_file_is_a_builtin() {
    let mut names: Vec<String> = std::fs::read_dir(instance_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let mut want: Vec<String> = BUILTIN_NAMES.iter().map(|s| s.to_string()).collect();
    want.sort();
    assert_eq!(names, want);
}
