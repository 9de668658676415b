use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

/// Directory holding the library artifacts of this build profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/trainrec.h")).unwrap();
    for name in [
        "typedef struct TrainrecSignal TrainrecSignal;",
        "typedef struct TrainrecCloud TrainrecCloud;",
        "typedef struct TrainrecResult TrainrecResult;",
        "TRAINREC_STATUS_OK = 0",
        "TrainrecStatus trainrec_reconstruct(",
        "const char *trainrec_last_error(void);",
        "void trainrec_string_free(char *s);",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libtrainrec_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let period: f64 = String::from_utf8(run.stdout).unwrap().trim().parse().unwrap();
    assert!((period - 1.0).abs() < 1e-2, "{period}");
}
