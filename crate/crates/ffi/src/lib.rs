//! C ABI over the `blockmodel` crate.
//!
//! Every fallible call returns a [`BmStatus`]; on anything but `BM_OK` a
//! message is kept per thread and can be read with [`bm_last_error`].
//! Graphs are opaque handles owned by the caller and released with
//! [`bm_graph_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use blockmodel::inference::model_view;
use blockmodel::metrics::nmi;
use blockmodel::{objective, run_inference, Error, Graph, InferenceConfig, ModelSpec, Partition};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmStatus {
    BmOk = 0,
    /// A required pointer was NULL.
    BmNullPointer = 1,
    /// Bad sizes, labels or model name.
    BmInvalidArgument = 2,
    /// Rejected graph input (self-loop, empty graph).
    BmInvalidGraph = 3,
    /// Numerical or search failure inside the library.
    BmSolverFailure = 4,
    /// A panic was caught at the boundary.
    BmPanic = 5,
}

/// Opaque graph handle.
pub struct BmGraph {
    graph: Graph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> BmStatus {
    match err {
        Error::SelfLoop { .. } | Error::EmptyGraph | Error::Parse { .. } => BmStatus::BmInvalidGraph,
        Error::Solver(_) => BmStatus::BmSolverFailure,
        _ => BmStatus::BmInvalidArgument,
    }
}

struct Fail(BmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(BmStatus::BmNullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BmStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BmStatus::BmOk,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside blockmodel".into());
            BmStatus::BmPanic
        }
    }
}

/// # Safety
/// `p` is NULL or points to `len` readable values.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `model` is NULL or a NUL-terminated string.
unsafe fn model_arg(model: *const c_char) -> Result<ModelSpec, Fail> {
    if model.is_null() {
        return Err(null("model"));
    }
    let name = CStr::from_ptr(model)
        .to_str()
        .map_err(|_| Fail(BmStatus::BmInvalidArgument, "model name is not UTF-8".into()))?;
    Ok(name.parse()?)
}

fn graph_ref<'a>(g: *const BmGraph) -> Result<&'a BmGraph, Fail> {
    // SAFETY: non-null handles come from bm_graph_new and the caller keeps them alive.
    unsafe { g.as_ref() }.ok_or_else(|| null("graph"))
}

fn partition_arg(labels: &[u32], n: usize, k: u32) -> Result<Partition, Fail> {
    if labels.len() != n {
        return Err(Fail(
            BmStatus::BmInvalidArgument,
            format!("{} labels for {n} vertices", labels.len()),
        ));
    }
    Ok(Partition::new(k as usize, labels.iter().map(|&l| l as usize).collect())?)
}

/// Last error message on this thread, or NULL after a successful call. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn bm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph on vertices `0..n` from `m` edges `src[i] -> dst[i]`.
/// Repeated pairs become multi-edges. Self-loops are rejected.
///
/// # Safety
/// `src` and `dst` point to `m` readable values each (may be NULL when
/// `m == 0`); `out` is writable. Free the handle with `bm_graph_free`.
#[no_mangle]
pub unsafe extern "C" fn bm_graph_new(
    n: usize,
    directed: bool,
    src: *const u32,
    dst: *const u32,
    m: usize,
    out: *mut *mut BmGraph,
) -> BmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let src = slice(src, m, "src")?;
        let dst = slice(dst, m, "dst")?;
        let pairs = src.iter().zip(dst).map(|(&u, &v)| (u as usize, v as usize, 1u64));
        let graph = Graph::new(n, directed, pairs)?;
        *out = Box::into_raw(Box::new(BmGraph { graph }));
        Ok(())
    })
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `g` is NULL or a handle from `bm_graph_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bm_graph_free(g: *mut BmGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, 0 for NULL.
///
/// # Safety
/// `g` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_graph_num_vertices(g: *const BmGraph) -> usize {
    g.as_ref().map_or(0, |g| g.graph.num_vertices())
}

/// Edge count including multiplicity, 0 for NULL.
///
/// # Safety
/// `g` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bm_graph_num_edges(g: *const BmGraph) -> u64 {
    g.as_ref().map_or(0, |g| g.graph.num_edges())
}

/// Objective of model `model` ("sbm", "dc", "ddc", "odc", "dg-dc", ...) for
/// the labelling `labels[0..n]` into `k` blocks. Undirected models view a
/// directed graph without its orientations.
///
/// # Safety
/// `g` is a live handle, `model` a NUL-terminated string, `labels` holds `n`
/// values and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bm_loglik(
    g: *const BmGraph,
    model: *const c_char,
    labels: *const u32,
    n: usize,
    k: u32,
    out: *mut f64,
) -> BmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let model = model_arg(model)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let part = partition_arg(slice(labels, n, "labels")?, g.graph.num_vertices(), k)?;
        let view = model_view(&g.graph, &model)?;
        *out = objective(&model, view.as_ref().unwrap_or(&g.graph), &part)?;
        Ok(())
    })
}

/// Runs the full search (random starts, heat-bath MCMC, then Kernighan-Lin
/// when `use_kl`) and writes the best labelling to `labels_out[0..n]` and its
/// objective to `objective_out` (which may be NULL).
///
/// # Safety
/// `g` is a live handle, `model` a NUL-terminated string, `labels_out` has
/// room for `n` values, `objective_out` is NULL or writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bm_infer(
    g: *const BmGraph,
    model: *const c_char,
    k: u32,
    runs: u32,
    steps: u64,
    use_kl: bool,
    seed: u64,
    labels_out: *mut u32,
    n: usize,
    objective_out: *mut f64,
) -> BmStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let model = model_arg(model)?;
        if labels_out.is_null() {
            return Err(null("labels_out"));
        }
        if n != g.graph.num_vertices() {
            return Err(Fail(
                BmStatus::BmInvalidArgument,
                format!("labels_out holds {n} values, graph has {}", g.graph.num_vertices()),
            ));
        }
        let mut cfg = InferenceConfig::new(model, k as usize);
        cfg.runs = runs as usize;
        cfg.mcmc_steps = steps;
        cfg.use_kl = use_kl;
        cfg.seed = seed;
        let res = run_inference(&g.graph, &cfg)?;
        let dst = std::slice::from_raw_parts_mut(labels_out, n);
        for (d, &l) in dst.iter_mut().zip(res.best_partition.labels()) {
            *d = l as u32;
        }
        if let Some(o) = objective_out.as_mut() {
            *o = res.best_objective;
        }
        Ok(())
    })
}

/// Normalized mutual information between two labellings of `n` vertices.
///
/// # Safety
/// `a` and `b` hold `n` values each; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bm_nmi(a: *const u32, b: *const u32, n: usize, out: *mut f64) -> BmStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let to_part = |xs: &[u32]| Partition::from_raw_labels(&xs.iter().map(|&x| x as usize).collect::<Vec<_>>());
        let pa = to_part(slice(a, n, "a")?);
        let pb = to_part(slice(b, n, "b")?);
        *out = nmi(&pa, &pb)?;
        Ok(())
    })
}
