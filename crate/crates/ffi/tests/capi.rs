use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use blockmodel_ffi::*;

fn two_cliques() -> (Vec<u32>, Vec<u32>) {
    let mut src = Vec::new();
    let mut dst = Vec::new();
    for base in [0u32, 4] {
        for i in 0..4 {
            for j in i + 1..4 {
                src.push(base + i);
                dst.push(base + j);
            }
        }
    }
    src.push(3);
    dst.push(4);
    (src, dst)
}

fn new_graph(n: usize, directed: bool, src: &[u32], dst: &[u32]) -> *mut BmGraph {
    let mut g = ptr::null_mut();
    let st = unsafe { bm_graph_new(n, directed, src.as_ptr(), dst.as_ptr(), src.len(), &mut g) };
    assert_eq!(st, BmStatus::BmOk);
    assert!(!g.is_null());
    g
}

fn last_error() -> String {
    let p = bm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn graph_round_trip_and_counts() {
    let (s, d) = two_cliques();
    let g = new_graph(8, false, &s, &d);
    unsafe {
        assert_eq!(bm_graph_num_vertices(g), 8);
        assert_eq!(bm_graph_num_edges(g), 13);
        bm_graph_free(g);
        bm_graph_free(ptr::null_mut());
        assert_eq!(bm_graph_num_vertices(ptr::null()), 0);
    }
}

#[test]
fn loglik_matches_library() {
    let (s, d) = two_cliques();
    let g = new_graph(8, false, &s, &d);
    let labels = [0u32, 0, 0, 0, 1, 1, 1, 1];
    let model = CString::new("dc").unwrap();
    let mut out = 0.0;
    let st = unsafe { bm_loglik(g, model.as_ptr(), labels.as_ptr(), 8, 2, &mut out) };
    assert_eq!(st, BmStatus::BmOk);
    assert!(bm_last_error().is_null());

    let graph = blockmodel::Graph::new(8, false, s.iter().zip(&d).map(|(&u, &v)| (u as usize, v as usize, 1))).unwrap();
    let part = blockmodel::Partition::new(2, labels.iter().map(|&l| l as usize).collect()).unwrap();
    let want = blockmodel::objective(&"dc".parse().unwrap(), &graph, &part).unwrap();
    assert!((out - want).abs() <= 1e-12 * want.abs().max(1.0));
    unsafe { bm_graph_free(g) };
}

#[test]
fn infer_recovers_cliques() {
    let (s, d) = two_cliques();
    let g = new_graph(8, false, &s, &d);
    let model = CString::new("dc").unwrap();
    let mut labels = [9u32; 8];
    let mut obj = f64::NAN;
    let st = unsafe { bm_infer(g, model.as_ptr(), 2, 3, 2_000, true, 7, labels.as_mut_ptr(), 8, &mut obj) };
    assert_eq!(st, BmStatus::BmOk);
    assert!(obj.is_finite());
    let truth = [0u32, 0, 0, 0, 1, 1, 1, 1];
    let mut v = 0.0;
    assert_eq!(unsafe { bm_nmi(truth.as_ptr(), labels.as_ptr(), 8, &mut v) }, BmStatus::BmOk);
    assert!((v - 1.0).abs() < 1e-12, "nmi {v}, labels {labels:?}");
    unsafe { bm_graph_free(g) };
}

#[test]
fn error_codes_and_messages() {
    let mut g = ptr::null_mut();
    let (s, d) = ([0u32, 1], [1u32, 1]);
    let st = unsafe { bm_graph_new(2, true, s.as_ptr(), d.as_ptr(), 2, &mut g) };
    assert_eq!(st, BmStatus::BmInvalidGraph);
    assert!(g.is_null());
    assert!(last_error().contains("self-loop"));

    let st = unsafe { bm_graph_new(2, true, ptr::null(), d.as_ptr(), 2, &mut g) };
    assert_eq!(st, BmStatus::BmNullPointer);

    let (s, d) = two_cliques();
    let g = new_graph(8, false, &s, &d);
    let labels = [0u32; 8];
    let mut out = 0.0;
    let bad = CString::new("nope").unwrap();
    let st = unsafe { bm_loglik(g, bad.as_ptr(), labels.as_ptr(), 8, 2, &mut out) };
    assert_eq!(st, BmStatus::BmInvalidArgument);
    assert!(last_error().contains("dg-odc"));

    // a directed family cannot score an undirected graph
    let ddc = CString::new("ddc").unwrap();
    let st = unsafe { bm_loglik(g, ddc.as_ptr(), labels.as_ptr(), 8, 2, &mut out) };
    assert_eq!(st, BmStatus::BmInvalidArgument);

    let dc = CString::new("dc").unwrap();
    let st = unsafe { bm_loglik(g, dc.as_ptr(), labels.as_ptr(), 7, 2, &mut out) };
    assert_eq!(st, BmStatus::BmInvalidArgument);
    let st = unsafe { bm_loglik(g, dc.as_ptr(), labels.as_ptr(), 8, 2, ptr::null_mut()) };
    assert_eq!(st, BmStatus::BmNullPointer);
    unsafe { bm_graph_free(g) };
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps/
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let lib = target_dir().join("libblockmodel_ffi.a");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let has_cc = Command::new("cc").arg("--version").output().is_ok();
    if !has_cc || !lib.exists() || !include.join("blockmodel.h").exists() {
        eprintln!("skipping C link check: cc, static library or header missing");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "blockmodel.h"
int main(void) {
    uint32_t s[] = {0, 0, 1, 3, 3, 4, 2};
    uint32_t d[] = {1, 2, 2, 4, 5, 5, 3};
    BmGraph *g = NULL;
    if (bm_graph_new(6, false, s, d, 7, &g) != BM_OK) return 1;
    uint32_t labels[] = {0, 0, 0, 1, 1, 1};
    double ll = 0.0;
    if (bm_loglik(g, "dc", labels, 6, 2, &ll) != BM_OK) return 2;
    if (bm_loglik(g, "bogus", labels, 6, 2, &ll) != BM_INVALID_ARGUMENT) return 3;
    if (bm_last_error() == NULL) return 4;
    uint32_t found[6];
    if (bm_infer(g, "dc", 2, 2, 500, true, 1, found, 6, NULL) != BM_OK) return 5;
    double v = 0.0;
    if (bm_nmi(labels, found, 6, &v) != BM_OK) return 6;
    bm_graph_free(g);
    printf("%.6f %.6f\n", ll, v);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let st = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(st.success(), "C compile/link failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Vec<f64> = text.split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert!(v[0].is_finite() && v[0] < 0.0);
    assert!((v[1] - 1.0).abs() < 1e-9, "C-side inference nmi {}", v[1]);
}
