//! C interface to `qnetsim`.
//!
//! Objects are exposed as opaque handles created by `qn_*_new` / `qn_*_run`
//! and released with the matching `qn_*_free`. Every fallible function
//! returns a [`QnStatus`]; on failure a message describing the error can be
//! retrieved with [`qn_last_error_message`] on the same thread.
//!
//! Handles are not synchronized. A handle may be moved between threads but
//! must not be used from two threads at once.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qnetsim::ensemble::{run_ensemble, EnsembleOptions, EnsemblePoint, MeasureOptions};
use qnetsim::metrics::{average_clustering, connected_components, degree_histogram};
use qnetsim::model::{self, ModelParams, PhotonicMode, Realization, SeedSpec};
use qnetsim::{Error, Layer};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InsufficientData = 3,
    OutOfRange = 4,
    BufferTooSmall = 5,
    Io = 6,
    Internal = 7,
    Panic = 8,
}

/// Network layer selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnLayer {
    Fiber = 0,
    Photonic = 1,
}

impl From<QnLayer> for Layer {
    fn from(l: QnLayer) -> Self {
        match l {
            QnLayer::Fiber => Layer::Fiber,
            QnLayer::Photonic => Layer::Photonic,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> QnStatus {
    match e {
        Error::InvalidParameter { .. }
        | Error::NegativeDistance(_)
        | Error::ProbabilityOutOfRange(_)
        | Error::InvalidSweep(_)
        | Error::Config(_) => QnStatus::InvalidParameter,
        Error::InsufficientData(_)
        | Error::GiantClusterTooSmall(_)
        | Error::NoCrossing { .. }
        | Error::NonOverlappingSupport
        | Error::MissingInputs(_) => QnStatus::InsufficientData,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Schema { .. } => QnStatus::Io,
        _ => QnStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (QnStatus, String)>) -> QnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QnStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside qnetsim");
            QnStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (QnStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (QnStatus, String) {
    (QnStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QnStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (QnStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Length in bytes of the last error message of this thread, excluding the
/// terminating NUL; 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn qn_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string. Fails with `BUFFER_TOO_SMALL` when `len` cannot
/// hold the message and its terminator.
#[no_mangle]
pub unsafe extern "C" fn qn_last_error_message(buf: *mut c_char, len: usize) -> QnStatus {
    if buf.is_null() {
        return QnStatus::NullPointer;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[0u8][..], |s| s.as_bytes_with_nul());
        if bytes.len() > len {
            return QnStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
        QnStatus::Ok
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Model parameters.
pub struct QnParams {
    inner: ModelParams,
}

/// Parameters with the library defaults (R = 1800 km, N = 1000, αL = 226 km,
/// β = 1, γ = 0.2 dB/km, n_p = 1000).
#[no_mangle]
pub extern "C" fn qn_params_new() -> *mut QnParams {
    Box::into_raw(Box::new(QnParams {
        inner: ModelParams::default(),
    }))
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_free(params: *mut QnParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Applies `edit` to a copy and keeps it only if the result validates.
unsafe fn edit_params(params: *mut QnParams, edit: impl FnOnce(&mut ModelParams)) -> QnStatus {
    guard(|| {
        let p = as_mut(params, "params")?;
        let mut next = p.inner.clone();
        edit(&mut next);
        next.validate().map_err(lib_err)?;
        p.inner = next;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_set_radius_km(
    params: *mut QnParams,
    radius_km: f64,
) -> QnStatus {
    edit_params(params, |p| p.radius_km = radius_km)
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_set_n_nodes(params: *mut QnParams, n_nodes: usize) -> QnStatus {
    edit_params(params, |p| p.n_nodes = n_nodes)
}

/// Sets β and αL of the fiber law. An infinite scale disables distance decay.
#[no_mangle]
pub unsafe extern "C" fn qn_params_set_waxman(
    params: *mut QnParams,
    beta: f64,
    scale_km: f64,
) -> QnStatus {
    edit_params(params, |p| {
        p.waxman_beta = beta;
        p.waxman_scale_km = scale_km;
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_set_loss_db_per_km(
    params: *mut QnParams,
    loss: f64,
) -> QnStatus {
    edit_params(params, |p| p.loss_db_per_km = loss)
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_set_n_pulses(params: *mut QnParams, n_pulses: u32) -> QnStatus {
    edit_params(params, |p| p.n_pulses = n_pulses)
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_set_cutoff_epsilon(
    params: *mut QnParams,
    epsilon: f64,
) -> QnStatus {
    edit_params(params, |p| p.cutoff_epsilon = epsilon)
}

/// Non-zero draws photonic links on all pairs instead of over fibers only.
#[no_mangle]
pub unsafe extern "C" fn qn_params_set_photonic_on_all_pairs(
    params: *mut QnParams,
    all_pairs: bool,
) -> QnStatus {
    edit_params(params, |p| {
        p.photonic_mode = if all_pairs {
            PhotonicMode::AllPairs
        } else {
            PhotonicMode::FiberConditioned
        }
    })
}

/// Keeps N and rescales R so that N / (πR²) equals `rho`.
#[no_mangle]
pub unsafe extern "C" fn qn_params_set_density(params: *mut QnParams, rho: f64) -> QnStatus {
    guard(|| {
        let p = as_mut(params, "params")?;
        p.inner = p.inner.with_density(rho).map_err(lib_err)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_params_density(params: *const QnParams, out: *mut f64) -> QnStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        *as_mut(out, "out")? = p.inner.density();
        Ok(())
    })
}

/// Fiber probability Π(d) = β·exp(−d/αL).
#[no_mangle]
pub unsafe extern "C" fn qn_fiber_link_prob(
    params: *const QnParams,
    d_km: f64,
    out: *mut f64,
) -> QnStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        *as_mut(out, "out")? = model::fiber_link_prob(d_km, &p.inner).map_err(lib_err)?;
        Ok(())
    })
}

/// Transmissivity 10^(−γd/10).
#[no_mangle]
pub unsafe extern "C" fn qn_transmissivity(
    d_km: f64,
    loss_db_per_km: f64,
    out: *mut f64,
) -> QnStatus {
    guard(|| {
        *as_mut(out, "out")? = model::transmissivity(d_km, loss_db_per_km).map_err(lib_err)?;
        Ok(())
    })
}

/// Probability that at least one of `n_pulses` photons survives.
#[no_mangle]
pub unsafe extern "C" fn qn_photonic_link_prob(p: f64, n_pulses: u32, out: *mut f64) -> QnStatus {
    guard(|| {
        *as_mut(out, "out")? = model::photonic_link_prob(p, n_pulses).map_err(lib_err)?;
        Ok(())
    })
}

/// Probability of a photonic edge at distance `d_km` under `params`.
#[no_mangle]
pub unsafe extern "C" fn qn_combined_link_prob(
    params: *const QnParams,
    d_km: f64,
    out: *mut f64,
) -> QnStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        *as_mut(out, "out")? = model::combined_link_prob(d_km, &p.inner).map_err(lib_err)?;
        Ok(())
    })
}

/// One sampled network: node positions plus fiber and photonic layers.
pub struct QnRealization {
    inner: Realization,
}

/// Observables of one layer of a realization.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QnGraphStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub s1: usize,
    pub s2: usize,
    pub giant_fraction: f64,
    pub mean_degree: f64,
    pub avg_clustering: f64,
}

/// Samples realization `index` of the ensemble seeded by `base_seed`.
#[no_mangle]
pub unsafe extern "C" fn qn_realization_generate(
    params: *const QnParams,
    base_seed: u64,
    index: u64,
    out: *mut *mut QnRealization,
) -> QnStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        let out = as_mut(out, "out")?;
        p.inner.validate().map_err(lib_err)?;
        let inner = Realization::sample(&p.inner, &SeedSpec::new(base_seed, index));
        *out = Box::into_raw(Box::new(QnRealization { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_realization_free(r: *mut QnRealization) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

#[no_mangle]
pub unsafe extern "C" fn qn_realization_node_count(
    r: *const QnRealization,
    out: *mut usize,
) -> QnStatus {
    guard(|| {
        *as_mut(out, "out")? = as_ref(r, "realization")?.inner.positions.len();
        Ok(())
    })
}

/// Position of node `i` in km, relative to the disk center.
#[no_mangle]
pub unsafe extern "C" fn qn_realization_node_position(
    r: *const QnRealization,
    i: usize,
    x_km: *mut f64,
    y_km: *mut f64,
) -> QnStatus {
    guard(|| {
        let r = as_ref(r, "realization")?;
        let &(x, y) = r
            .inner
            .positions
            .coords
            .get(i)
            .ok_or_else(|| (QnStatus::OutOfRange, format!("node {i} out of range")))?;
        *as_mut(x_km, "x_km")? = x;
        *as_mut(y_km, "y_km")? = y;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_realization_edge_count(
    r: *const QnRealization,
    layer: QnLayer,
    out: *mut usize,
) -> QnStatus {
    guard(|| {
        let r = as_ref(r, "realization")?;
        *as_mut(out, "out")? = r.inner.layer(layer.into()).n_edges();
        Ok(())
    })
}

/// Copies the edges of `layer` as `(i, j)` pairs with `i < j` into
/// `pairs`, which must hold `2 * capacity` integers. `written` receives the
/// number of edges copied. Fails with `BUFFER_TOO_SMALL` and copies nothing
/// when `capacity` is below the edge count.
#[no_mangle]
pub unsafe extern "C" fn qn_realization_edges(
    r: *const QnRealization,
    layer: QnLayer,
    pairs: *mut u32,
    capacity: usize,
    written: *mut usize,
) -> QnStatus {
    guard(|| {
        let r = as_ref(r, "realization")?;
        let written = as_mut(written, "written")?;
        let edges = r.inner.layer(layer.into()).edges();
        *written = 0;
        if edges.len() > capacity {
            return Err((
                QnStatus::BufferTooSmall,
                format!("{} edges do not fit in {capacity}", edges.len()),
            ));
        }
        if !edges.is_empty() {
            if pairs.is_null() {
                return Err(null("pairs"));
            }
            let out = std::slice::from_raw_parts_mut(pairs, 2 * edges.len());
            for (k, &(i, j)) in edges.iter().enumerate() {
                out[2 * k] = i;
                out[2 * k + 1] = j;
            }
        }
        *written = edges.len();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_realization_stats(
    r: *const QnRealization,
    layer: QnLayer,
    out: *mut QnGraphStats,
) -> QnStatus {
    guard(|| {
        let r = as_ref(r, "realization")?;
        let out = as_mut(out, "out")?;
        let g = r.inner.layer(layer.into());
        let d = connected_components(g);
        let hist = degree_histogram(g);
        *out = QnGraphStats {
            n_nodes: g.n_nodes(),
            n_edges: g.n_edges(),
            s1: d.s1(),
            s2: d.s2(),
            giant_fraction: d.s1() as f64 / g.n_nodes() as f64,
            mean_degree: hist.mean(),
            avg_clustering: average_clustering(g),
        };
        Ok(())
    })
}

/// Aggregate statistics of an ensemble of realizations.
pub struct QnEnsemble {
    inner: EnsemblePoint,
}

/// Scalar ensemble statistics. Quantities that could not be computed are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QnEnsembleSummary {
    pub n_nodes: usize,
    pub n_realizations: usize,
    pub rho: f64,
    pub radius_km: f64,
    pub m: f64,
    pub m_stderr: f64,
    pub chi: f64,
    pub binder: f64,
    pub s2_over_s1: f64,
    pub mean_degree: f64,
    pub avg_clustering: f64,
    pub avg_path: f64,
    pub s_star: f64,
}

/// Runs realizations `0..n_realizations` with the given base seed.
/// Statistics are taken on the photonic layer.
#[no_mangle]
pub unsafe extern "C" fn qn_ensemble_run(
    params: *const QnParams,
    n_realizations: usize,
    base_seed: u64,
    measure_paths: bool,
    out: *mut *mut QnEnsemble,
) -> QnStatus {
    guard(|| {
        let p = as_ref(params, "params")?;
        let out = as_mut(out, "out")?;
        let opts = EnsembleOptions {
            measure: MeasureOptions {
                measure_paths,
                ..MeasureOptions::default()
            },
            bootstrap_resamples: 0,
        };
        let inner = run_ensemble(&p.inner, n_realizations, base_seed, &opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(QnEnsemble { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn qn_ensemble_free(e: *mut QnEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

#[no_mangle]
pub unsafe extern "C" fn qn_ensemble_summary(
    e: *const QnEnsemble,
    out: *mut QnEnsembleSummary,
) -> QnStatus {
    guard(|| {
        let e = &as_ref(e, "ensemble")?.inner;
        *as_mut(out, "out")? = QnEnsembleSummary {
            n_nodes: e.n_nodes,
            n_realizations: e.n_realizations,
            rho: e.rho,
            radius_km: e.radius_km,
            m: e.m,
            m_stderr: e.m_stderr,
            chi: e.chi.unwrap_or(f64::NAN),
            binder: e.binder,
            s2_over_s1: e.s2_over_s1,
            mean_degree: e.mean_degree,
            avg_clustering: e.avg_clustering,
            avg_path: e.avg_path.unwrap_or(f64::NAN),
            s_star: e.s_star.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Copies the mean degree distribution into `k` / `p_k` (each `capacity`
/// long). `written` receives the number of entries, also on
/// `BUFFER_TOO_SMALL`, so a first call with `capacity = 0` sizes the buffers.
#[no_mangle]
pub unsafe extern "C" fn qn_ensemble_degree_distribution(
    e: *const QnEnsemble,
    k: *mut usize,
    p_k: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> QnStatus {
    guard(|| {
        let e = &as_ref(e, "ensemble")?.inner;
        let written = as_mut(written, "written")?;
        let dist = &e.degree_distribution;
        *written = dist.len();
        if dist.len() > capacity {
            return Err((
                QnStatus::BufferTooSmall,
                format!("{} entries do not fit in {capacity}", dist.len()),
            ));
        }
        if !dist.is_empty() {
            if k.is_null() || p_k.is_null() {
                return Err(null("k or p_k"));
            }
            let ks = std::slice::from_raw_parts_mut(k, dist.len());
            let ps = std::slice::from_raw_parts_mut(p_k, dist.len());
            for (i, (&kk, &pp)) in dist.iter().enumerate() {
                ks[i] = kk;
                ps[i] = pp;
            }
        }
        Ok(())
    })
}

/// Least-squares line through (ln x, ln y).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QnPowerLawFit {
    pub exponent: f64,
    pub prefactor_log: f64,
    pub residual: f64,
    pub exponent_stderr: f64,
    pub n_points: usize,
}

/// Fits y = e^c·x^k to `n` strictly positive points.
#[no_mangle]
pub unsafe extern "C" fn qn_fit_power_law(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out: *mut QnPowerLawFit,
) -> QnStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        if n > 0 && (xs.is_null() || ys.is_null()) {
            return Err(null("xs or ys"));
        }
        let (xs, ys) = if n == 0 {
            (&[][..], &[][..])
        } else {
            (
                std::slice::from_raw_parts(xs, n),
                std::slice::from_raw_parts(ys, n),
            )
        };
        let f = qnetsim::criticality::fit_power_law(xs, ys).map_err(lib_err)?;
        *out = QnPowerLawFit {
            exponent: f.exponent,
            prefactor_log: f.prefactor_log,
            residual: f.residual,
            exponent_stderr: f.exponent_stderr,
            n_points: f.n_points,
        };
        Ok(())
    })
}
