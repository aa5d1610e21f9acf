//! C ABI over `hoopsnet-core`.
//!
//! Objects are opaque heap handles released with the matching `*_free`. Every fallible
//! call returns an [`HnStatus`]; on failure `hn_last_error` describes the cause for the
//! calling thread. Output arrays are caller-allocated and their length is checked.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hoopsnet::centrality::{
    con_scores, low_key_leader_strengths, pagerank_adversarial, PageRankParams,
};
use hoopsnet::embedding::{self, EmbeddingMatrix, TrainConfig, WalkConfig};
use hoopsnet::glm::{fit_logistic, DesignMatrix, FitOptions, FitResult};
use hoopsnet::{Error, WeightedDigraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HnStatus {
    Ok = 0,
    /// Bad argument value or inconsistent sizes.
    InvalidArgument = 1,
    /// Input data failed validation.
    Data = 2,
    /// Non-convergence, separation, I/O and other runtime failures.
    Numerical = 3,
    NullPointer = 4,
    /// Internal panic; the handle involved should be considered unusable.
    Panic = 5,
}

/// Directed weighted graph.
pub struct HnGraph(WeightedDigraph);

/// Node embeddings, one row per node.
pub struct HnEmbedding(EmbeddingMatrix);

/// Logistic regression result.
pub struct HnFit(FitResult);

/// Walk and training settings; start from `hn_embed_params_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HnEmbedParams {
    pub p: f64,
    pub q: f64,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub dimensions: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    pub lr_initial: f64,
    pub lr_final: f64,
    pub walk_seed: u64,
    pub train_seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct HnFitSummary {
    pub log_lik: f64,
    pub null_log_lik: f64,
    pub pseudo_r2: f64,
    pub llr_stat: f64,
    pub llr_p: f64,
    pub n_obs: usize,
    pub df_model: usize,
    pub iterations: usize,
    pub converged: bool,
    pub ridge_applied: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(HnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            1 => HnStatus::InvalidArgument,
            2 => HnStatus::Data,
            _ => HnStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(HnStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            HnStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(HnStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn as_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(HnStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, expected: usize) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(Failure(
            HnStatus::NullPointer,
            "output buffer is null".into(),
        ));
    }
    if len != expected {
        return Err(invalid(format!(
            "output buffer holds {len}, need {expected}"
        )));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(HnStatus::NullPointer, format!("`{name}` is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(HnStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not UTF-8")))
}

/// Message for the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn hn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Empty graph; never NULL.
#[no_mangle]
pub extern "C" fn hn_graph_new() -> *mut HnGraph {
    Box::into_raw(Box::new(HnGraph(WeightedDigraph::new())))
}

/// # Safety
/// `graph` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hn_graph_free(graph: *mut HnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Reads an edge-list CSV (`source_label,target_label,weight`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hn_graph_load(path: *const c_char, out: *mut *mut HnGraph) -> HnStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let path = c_str(path, "path")?;
        let g = WeightedDigraph::load_edge_list(Path::new(path))?;
        *out = Box::into_raw(Box::new(HnGraph(g)));
        Ok(())
    })
}

/// Id of the node labelled `label`, created if absent.
///
/// # Safety
/// `graph` must be a live handle, `label` NUL-terminated, `out_id` valid.
#[no_mangle]
pub unsafe extern "C" fn hn_graph_add_node(
    graph: *mut HnGraph,
    label: *const c_char,
    out_id: *mut usize,
) -> HnStatus {
    guard(|| {
        let g = as_mut(graph, "graph")?;
        let out_id = as_mut(out_id, "out_id")?;
        *out_id = g.0.add_node(c_str(label, "label")?);
        Ok(())
    })
}

/// Adds `weight` to edge `source -> target`, creating it if needed.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hn_graph_add_edge(
    graph: *mut HnGraph,
    source: usize,
    target: usize,
    weight: f64,
) -> HnStatus {
    guard(|| {
        as_mut(graph, "graph")?
            .0
            .add_edge_accumulate(source, target, weight)?;
        Ok(())
    })
}

/// Node count, 0 for NULL.
///
/// # Safety
/// `graph` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hn_graph_num_nodes(graph: *const HnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_nodes())
}

/// Edge count, 0 for NULL.
///
/// # Safety
/// `graph` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hn_graph_num_edges(graph: *const HnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.num_edges())
}

/// CON scores into `out[0..len)`, `len` equal to the node count.
///
/// # Safety
/// `graph` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_con_scores(
    graph: *const HnGraph,
    include_self: bool,
    out: *mut u64,
    len: usize,
) -> HnStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.0;
        let out = out_slice(out, len, g.num_nodes())?;
        out.copy_from_slice(&con_scores(g, include_self));
        Ok(())
    })
}

/// Reversed-edge weighted PageRank with the given damping (0.85 is customary).
///
/// # Safety
/// `graph` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_pagerank(
    graph: *const HnGraph,
    damping: f64,
    out: *mut f64,
    len: usize,
) -> HnStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.0;
        let out = out_slice(out, len, g.num_nodes())?;
        let params = PageRankParams {
            damping,
            ..PageRankParams::default()
        };
        out.copy_from_slice(&pagerank_adversarial(g, &params)?);
        Ok(())
    })
}

/// Low-key leader strengths (normalized CON minus normalized PageRank).
///
/// # Safety
/// `graph` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_lkl(
    graph: *const HnGraph,
    include_self: bool,
    out: *mut f64,
    len: usize,
) -> HnStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.0;
        let out = out_slice(out, len, g.num_nodes())?;
        let table = low_key_leader_strengths(g, &PageRankParams::default(), include_self)?;
        out.copy_from_slice(&table.lkl());
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn hn_embed_params_default() -> HnEmbedParams {
    let w = WalkConfig::default();
    let t = TrainConfig::default();
    HnEmbedParams {
        p: w.p,
        q: w.q,
        walk_length: w.walk_length,
        walks_per_node: w.walks_per_node,
        dimensions: t.dimensions,
        window: t.window,
        negative_samples: t.negative_samples,
        epochs: t.epochs,
        lr_initial: t.lr_initial,
        lr_final: t.lr_final,
        walk_seed: w.seed,
        train_seed: t.seed,
    }
}

/// node2vec embeddings of `graph`.
///
/// # Safety
/// `graph` must be a live handle, `params` and `out` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hn_node2vec(
    graph: *const HnGraph,
    params: *const HnEmbedParams,
    out: *mut *mut HnEmbedding,
) -> HnStatus {
    guard(|| {
        let g = &as_ref(graph, "graph")?.0;
        let p = as_ref(params, "params")?;
        let out = as_mut(out, "out")?;
        let walk = WalkConfig {
            p: p.p,
            q: p.q,
            walk_length: p.walk_length,
            walks_per_node: p.walks_per_node,
            seed: p.walk_seed,
        };
        let train = TrainConfig {
            dimensions: p.dimensions,
            window: p.window,
            negative_samples: p.negative_samples,
            epochs: p.epochs,
            lr_initial: p.lr_initial,
            lr_final: p.lr_final,
            seed: p.train_seed,
        };
        let emb = embedding::node2vec(g, &walk, &train)?;
        *out = Box::into_raw(Box::new(HnEmbedding(emb)));
        Ok(())
    })
}

/// # Safety
/// `emb` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hn_embedding_free(emb: *mut HnEmbedding) {
    if !emb.is_null() {
        drop(Box::from_raw(emb));
    }
}

/// # Safety
/// `emb` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hn_embedding_dims(emb: *const HnEmbedding) -> usize {
    emb.as_ref().map_or(0, |e| e.0.dims())
}

/// # Safety
/// `emb` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hn_embedding_rows(emb: *const HnEmbedding) -> usize {
    emb.as_ref().map_or(0, |e| e.0.num_rows())
}

/// Copies the vector of `node` into `out`, `len` equal to the dimension.
///
/// # Safety
/// `emb` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_embedding_row(
    emb: *const HnEmbedding,
    node: usize,
    out: *mut f64,
    len: usize,
) -> HnStatus {
    guard(|| {
        let e = &as_ref(emb, "emb")?.0;
        if node >= e.num_rows() {
            return Err(Error::NodeOutOfRange {
                node,
                num_nodes: e.num_rows(),
            }
            .into());
        }
        out_slice(out, len, e.dims())?.copy_from_slice(e.row(node));
        Ok(())
    })
}

/// Cosine similarity of two nodes' vectors; 0 if either is zero.
///
/// # Safety
/// `emb` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hn_embedding_cosine(
    emb: *const HnEmbedding,
    a: usize,
    b: usize,
    out: *mut f64,
) -> HnStatus {
    guard(|| {
        let e = &as_ref(emb, "emb")?.0;
        let out = as_mut(out, "out")?;
        let n = e.num_rows();
        if let Some(&node) = [a, b].iter().find(|&&x| x >= n) {
            return Err(Error::NodeOutOfRange { node, num_nodes: n }.into());
        }
        *out = embedding::cosine_similarity(e.row(a), e.row(b))?;
        Ok(())
    })
}

/// Maximum-likelihood logistic regression of `y` on the row-major `rows x cols`
/// matrix `x` plus an intercept. `ridge` is used only for singular fits (0 disables).
///
/// # Safety
/// `x` must hold `rows * cols` values, `y` `rows` values of 0 or 1; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_logistic(
    x: *const f64,
    rows: usize,
    cols: usize,
    y: *const u8,
    ridge: f64,
    out: *mut *mut HnFit,
) -> HnStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let n = rows
            .checked_mul(cols)
            .ok_or_else(|| invalid("rows * cols overflows"))?;
        let x = in_slice(x, n, "x")?;
        let y = in_slice(y, rows, "y")?;
        let features: Vec<Vec<f64>> = if cols == 0 {
            vec![Vec::new(); rows]
        } else {
            x.chunks(cols).map(<[f64]>::to_vec).collect()
        };
        let design = DesignMatrix::new(&features, y)?;
        let opts = FitOptions {
            ridge,
            ..FitOptions::default()
        };
        *out = Box::into_raw(Box::new(HnFit(fit_logistic(&design, &opts)?)));
        Ok(())
    })
}

/// # Safety
/// `fit` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_free(fit: *mut HnFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Number of coefficients including the intercept.
///
/// # Safety
/// `fit` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_num_coefficients(fit: *const HnFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.coefficients.len())
}

/// Intercept first.
///
/// # Safety
/// `fit` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_coefficients(
    fit: *const HnFit,
    out: *mut f64,
    len: usize,
) -> HnStatus {
    guard(|| {
        let f = &as_ref(fit, "fit")?.0;
        out_slice(out, len, f.coefficients.len())?.copy_from_slice(&f.coefficients);
        Ok(())
    })
}

/// Standard errors, intercept first.
///
/// # Safety
/// `fit` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_std_errors(
    fit: *const HnFit,
    out: *mut f64,
    len: usize,
) -> HnStatus {
    guard(|| {
        let f = &as_ref(fit, "fit")?.0;
        out_slice(out, len, f.std_errors.len())?.copy_from_slice(&f.std_errors);
        Ok(())
    })
}

/// Wald p-values, intercept first.
///
/// # Safety
/// `fit` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_p_values(fit: *const HnFit, out: *mut f64, len: usize) -> HnStatus {
    guard(|| {
        let f = &as_ref(fit, "fit")?.0;
        out_slice(out, len, f.p_values.len())?.copy_from_slice(&f.p_values);
        Ok(())
    })
}

/// # Safety
/// `fit` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hn_fit_summary(fit: *const HnFit, out: *mut HnFitSummary) -> HnStatus {
    guard(|| {
        let f = &as_ref(fit, "fit")?.0;
        *as_mut(out, "out")? = HnFitSummary {
            log_lik: f.log_lik,
            null_log_lik: f.null_log_lik,
            pseudo_r2: f.pseudo_r2,
            llr_stat: f.llr_stat,
            llr_p: f.llr_p,
            n_obs: f.n_obs,
            df_model: f.df_model,
            iterations: f.iterations,
            converged: f.converged,
            ridge_applied: f.ridge_applied,
        };
        Ok(())
    })
}

/// `P(X > x)` for chi-square with `df` degrees of freedom; NaN if `df` is 0.
#[no_mangle]
pub extern "C" fn hn_chi_square_sf(x: f64, df: u32) -> f64 {
    if df == 0 {
        return f64::NAN;
    }
    hoopsnet::glm::chi_square_sf(x, df)
}

/// `P(Z > z)` for a standard normal.
#[no_mangle]
pub extern "C" fn hn_normal_sf(z: f64) -> f64 {
    hoopsnet::glm::normal_sf(z)
}
