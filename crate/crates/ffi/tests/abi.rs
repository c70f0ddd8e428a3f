use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use pdrs_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pdrs_last_error()) }.to_string_lossy().into_owned()
}

struct Handles {
    cfg: *mut PdrsConfig,
    ctx: *mut PdrsContext,
    frame: *mut PdrsFrame,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            pdrs_frame_free(self.frame);
            pdrs_context_free(self.ctx);
            pdrs_config_free(self.cfg);
        }
    }
}

fn small_frame(snr_db: f64, trial: u64) -> Handles {
    let mut h = Handles {
        cfg: ptr::null_mut(),
        ctx: ptr::null_mut(),
        frame: ptr::null_mut(),
    };
    unsafe {
        assert_eq!(pdrs_config_new_small(16, 32, 12, 8, &mut h.cfg), PdrsStatus::Ok);
        assert_eq!(pdrs_config_set_snr_db(h.cfg, snr_db), PdrsStatus::Ok);
        assert_eq!(pdrs_context_new(h.cfg, &mut h.ctx), PdrsStatus::Ok);
        assert_eq!(pdrs_frame_generate(h.ctx, trial, &mut h.frame), PdrsStatus::Ok);
    }
    h
}

fn support(frame: *const PdrsFrame, det: PdrsDetector, zeta: usize) -> Vec<usize> {
    unsafe {
        let mut res = ptr::null_mut();
        assert_eq!(pdrs_detect(frame, det, zeta, &mut res), PdrsStatus::Ok, "{}", last_error());
        let mut buf = vec![0usize; zeta];
        let mut n = 0;
        assert_eq!(pdrs_result_support(res, buf.as_mut_ptr(), buf.len(), &mut n), PdrsStatus::Ok);
        pdrs_result_free(res);
        buf.truncate(n);
        buf
    }
}

fn active(frame: *const PdrsFrame) -> Vec<usize> {
    let mut buf = vec![0usize; 64];
    let mut n = 0;
    assert_eq!(unsafe { pdrs_frame_active(frame, buf.as_mut_ptr(), buf.len(), &mut n) }, PdrsStatus::Ok);
    buf.truncate(n);
    buf
}

#[test]
fn noiseless_detection_through_the_abi() {
    let h = small_frame(f64::INFINITY, 3);
    let truth = active(h.frame);
    assert_eq!(truth.len(), 8);
    for det in [PdrsDetector::Pdrs, PdrsDetector::Fpr, PdrsDetector::Oracle] {
        let mut s = support(h.frame, det, 8);
        s.sort_unstable();
        assert_eq!(s, truth, "{det:?}");
    }
    let mut dims = PdrsFrameDims::default();
    assert_eq!(unsafe { pdrs_frame_dims(h.frame, &mut dims) }, PdrsStatus::Ok);
    assert_eq!(
        dims,
        PdrsFrameDims {
            antennas: 16,
            pool_size: 32,
            pilot_len: 12,
            pdrs_len: 2,
            data_len: dims.data_len,
            active_users: 8
        }
    );
}

#[test]
fn results_expose_scores_and_counts() {
    let h = small_frame(5.0, 0);
    unsafe {
        let mut res = ptr::null_mut();
        assert_eq!(pdrs_detect(h.frame, PdrsDetector::Bomp, 5, &mut res), PdrsStatus::Ok);
        let mut scores = [0.0f64; 5];
        let mut n = 0;
        assert_eq!(pdrs_result_scores(res, scores.as_mut_ptr(), 5, &mut n), PdrsStatus::Ok);
        assert_eq!(n, 5);
        assert!(scores.iter().all(|s| s.is_finite() && *s > 0.0));
        let (mut c, mut r) = (0u64, 0u64);
        assert_eq!(pdrs_result_mults(res, &mut c, &mut r), PdrsStatus::Ok);
        assert!(c > 0);
        pdrs_result_free(res);
    }
}

#[test]
fn small_buffer_reports_needed_length() {
    let h = small_frame(f64::INFINITY, 1);
    let mut buf = [0usize; 3];
    let mut n = 0;
    let st = unsafe { pdrs_frame_active(h.frame, buf.as_mut_ptr(), buf.len(), &mut n) };
    assert_eq!(st, PdrsStatus::BufferTooSmall);
    assert_eq!(n, 8);
    assert!(last_error().contains("8 needed"));
}

#[test]
fn null_and_invalid_arguments_are_reported() {
    unsafe {
        assert_eq!(pdrs_config_new_default(ptr::null_mut()), PdrsStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut out = ptr::null_mut();
        assert_eq!(pdrs_detect(ptr::null(), PdrsDetector::Pdrs, 1, &mut out), PdrsStatus::NullPointer);
        assert!(out.is_null());

        let mut cfg = ptr::null_mut();
        assert_eq!(pdrs_config_new_small(4, 10, 6, 20, &mut cfg), PdrsStatus::InvalidArgument);
        assert!(cfg.is_null());

        assert_eq!(pdrs_config_new_default(&mut cfg), PdrsStatus::Ok);
        assert_eq!(last_error(), "");
        let mut zeta = 0;
        assert_eq!(pdrs_config_set_alpha(cfg, 2.0), PdrsStatus::Ok);
        assert_eq!(pdrs_config_zeta(cfg, &mut zeta), PdrsStatus::Ok);
        assert_eq!(zeta, 192);
        assert_eq!(pdrs_config_set_alpha(cfg, f64::NAN), PdrsStatus::InvalidArgument);
        assert_eq!(pdrs_config_set_pdrs_len(cfg, 0), PdrsStatus::InvalidArgument);
        assert_eq!(pdrs_config_zeta(cfg, &mut zeta), PdrsStatus::Ok);
        assert_eq!(zeta, 192, "failed setter left the config unchanged");
        pdrs_config_free(cfg);

        pdrs_config_free(ptr::null_mut());
        pdrs_frame_free(ptr::null_mut());
    }
}

#[test]
fn config_text_and_frame_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = CString::new("M = 16\nN = 32\nL = 12\nl = 2\nK = 6\nsnr_db = inf\nD = 3\n").unwrap();
    unsafe {
        let mut cfg = ptr::null_mut();
        assert_eq!(pdrs_config_from_text(text.as_ptr(), &mut cfg), PdrsStatus::Ok);
        let mut ctx = ptr::null_mut();
        assert_eq!(pdrs_context_new(cfg, &mut ctx), PdrsStatus::Ok);
        let mut frame = ptr::null_mut();
        assert_eq!(pdrs_frame_generate(ctx, 7, &mut frame), PdrsStatus::Ok);

        let path = CString::new(dir.path().join("f.bin").to_str().unwrap()).unwrap();
        assert_eq!(pdrs_frame_write(frame, path.as_ptr()), PdrsStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(pdrs_frame_read(path.as_ptr(), &mut back), PdrsStatus::Ok);
        assert_eq!(active(back), active(frame));
        assert_eq!(support(back, PdrsDetector::Pdrs, 6), support(frame, PdrsDetector::Pdrs, 6));

        let missing = CString::new(dir.path().join("none.bin").to_str().unwrap()).unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(pdrs_frame_read(missing.as_ptr(), &mut none), PdrsStatus::Io);

        let bad = CString::new("M = sixteen\n").unwrap();
        let mut c2 = ptr::null_mut();
        assert_eq!(pdrs_config_from_text(bad.as_ptr(), &mut c2), PdrsStatus::Config);

        pdrs_frame_free(back);
        pdrs_frame_free(frame);
        pdrs_context_free(ctx);
        pdrs_config_free(cfg);
    }
}

#[test]
fn lemma_check_entry_point() {
    let mut ok = false;
    assert_eq!(unsafe { pdrs_lemma_check(5, 0.0, 3, &mut ok) }, PdrsStatus::Ok);
    assert!(ok);
    assert_eq!(unsafe { pdrs_lemma_check(3, 1e-300, 3, &mut ok) }, PdrsStatus::Ok);
    assert!(!ok);
}

#[test]
fn header_declares_the_exported_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pdrs.h")).unwrap();
    for sym in [
        "pdrs_last_error",
        "pdrs_config_new_default",
        "pdrs_context_new",
        "pdrs_frame_generate",
        "pdrs_detect",
        "pdrs_result_support",
        "pdrs_lemma_check",
        "PDRS_STATUS_BUFFER_TOO_SMALL",
        "typedef struct PdrsFrame PdrsFrame;",
    ] {
        assert!(header.contains(sym), "header lacks {sym}");
    }
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_static_library() {
    let lib = profile_dir().join("libpdrs_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let out = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("C compiler available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{stdout}{}", String::from_utf8_lossy(&run.stderr));
    assert!(stdout.contains("found 8 of 8"), "{stdout}");
}
