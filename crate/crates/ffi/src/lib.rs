//! C interface to bellforge. Games and strategies cross the boundary as
//! opaque handles; every fallible call returns a [`BfStatus`] and writes its
//! result through an out-pointer. The message for the most recent failure on
//! the calling thread is available from [`bf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bellforge::embezzlement::{emb_value, gram_summary};
use bellforge::exchange::{build_exchange_strategy, ltw_bound, success_probability, ExchangeInstance};
use bellforge::games::{build_tchsh, classical_value, shipped_emb, shipped_three_chsh, strategy_value};
use bellforge::strategies::{ideal_emb, ideal_tchsh, ideal_three_chsh};
use bellforge::{Error, NonlocalGame, QuantumStrategy};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    CapExceeded = 4,
    Parse = 5,
    Io = 6,
    Panic = 7,
}

/// A non-local game.
pub struct BfGame(NonlocalGame);

/// A finite-dimensional quantum strategy.
pub struct BfStrategy(QuantumStrategy);

/// Overlap quantities of the embezzling family at index `d`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct BfGram {
    pub d: u64,
    pub n_d: f64,
    pub x_d: f64,
    pub gap: f64,
    pub deviation: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BfStatus {
    match err {
        Error::Shape(_) => BfStatus::ShapeMismatch,
        Error::CapExceeded { .. } => BfStatus::CapExceeded,
        Error::Schema(_) | Error::Json(_) => BfStatus::Parse,
        Error::Io { .. } => BfStatus::Io,
        _ => BfStatus::InvalidArgument,
    }
}

/// Runs `f`, storing its value in `out`. Errors and panics become statuses.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, Error>) -> BfStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return BfStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: checked non-null; the caller provides writable storage for a T.
            unsafe { out.write(v) };
            BfStatus::Ok
        }
        Ok(Err(e)) => {
            let status = status_of(&e);
            set_error(e.to_string());
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BfStatus::Panic
        }
    }
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Error> {
    // SAFETY: delegated to the caller of the exported function.
    unsafe { p.as_ref() }.ok_or_else(|| Error::InvalidParameter(format!("{what} handle is null")))
}

unsafe fn read_str(p: *const c_char) -> Result<String, Error> {
    if p.is_null() {
        return Err(Error::InvalidParameter("string argument is null".into()));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) };
    s.to_str()
        .map(str::to_owned)
        .map_err(|_| Error::Schema("string argument is not UTF-8".into()))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Tilted CHSH game with state ratio `alpha` in (0, 1]; `flipped` selects the
/// label-swapped variant.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_game_tchsh(alpha: f64, flipped: bool, out: *mut *mut BfGame) -> BfStatus {
    guarded(out, || Ok(boxed(BfGame(build_tchsh(alpha, flipped)?))))
}

/// The shipped 3-CHSH game.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_game_three_chsh(out: *mut *mut BfGame) -> BfStatus {
    guarded(out, || Ok(boxed(BfGame(shipped_three_chsh()))))
}

/// The composed embezzlement game.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_game_emb(out: *mut *mut BfGame) -> BfStatus {
    guarded(out, || Ok(boxed(BfGame(shipped_emb().0))))
}

/// Game from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_game_from_json(json: *const c_char, out: *mut *mut BfGame) -> BfStatus {
    guarded(out, || {
        let s = unsafe { read_str(json) }?;
        Ok(boxed(BfGame(NonlocalGame::from_json_str(&s)?)))
    })
}

/// Question and answer counts `(nx, ny, na, nb)` written to `shape[0..4]`.
///
/// # Safety
/// `game` must be a live handle; `shape` must point to four writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn bf_game_shape(game: *const BfGame, shape: *mut usize) -> BfStatus {
    guarded(shape.cast::<[usize; 4]>(), || {
        let (nx, ny, na, nb) = unsafe { borrow(game, "game") }?.0.shape();
        Ok([nx, ny, na, nb])
    })
}

/// # Safety
/// `game` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bf_game_free(game: *mut BfGame) {
    if !game.is_null() {
        drop(unsafe { Box::from_raw(game) });
    }
}

/// Ideal strategy for the tilted CHSH game.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_strategy_tchsh(alpha: f64, flipped: bool, out: *mut *mut BfStrategy) -> BfStatus {
    guarded(out, || Ok(boxed(BfStrategy(ideal_tchsh(alpha, flipped)?))))
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_strategy_three_chsh(out: *mut *mut BfStrategy) -> BfStatus {
    guarded(out, || Ok(boxed(BfStrategy(ideal_three_chsh()))))
}

/// Dense ideal strategy for the embezzlement game with embezzler index `d`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_strategy_emb(d: usize, out: *mut *mut BfStrategy) -> BfStatus {
    guarded(out, || Ok(boxed(BfStrategy(ideal_emb(d)?))))
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_strategy_from_json(json: *const c_char, out: *mut *mut BfStrategy) -> BfStatus {
    guarded(out, || {
        let s = unsafe { read_str(json) }?;
        Ok(boxed(BfStrategy(QuantumStrategy::from_json_str(&s)?)))
    })
}

/// # Safety
/// `strategy` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bf_strategy_free(strategy: *mut BfStrategy) {
    if !strategy.is_null() {
        drop(unsafe { Box::from_raw(strategy) });
    }
}

/// # Safety
/// `game` and `strategy` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_strategy_value(game: *const BfGame, strategy: *const BfStrategy, out: *mut f64) -> BfStatus {
    guarded(out, || {
        let g = unsafe { borrow(game, "game") }?;
        let s = unsafe { borrow(strategy, "strategy") }?;
        strategy_value(&g.0, &s.0)
    })
}

/// Best deterministic value by exhaustive enumeration.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_classical_value(game: *const BfGame, out: *mut f64) -> BfStatus {
    guarded(out, || classical_value(&unsafe { borrow(game, "game") }?.0))
}

/// Structured value of the ideal embezzlement strategy at any `d >= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_emb_value(d: usize, out: *mut f64) -> BfStatus {
    guarded(out, || emb_value(d))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_gram_summary(d: usize, out: *mut BfGram) -> BfStatus {
    guarded(out, || {
        let g = gram_summary(d)?;
        Ok(BfGram {
            d: g.d as u64,
            n_d: g.n_d,
            x_d: g.x_d,
            gap: g.gap,
            deviation: g.deviation,
        })
    })
}

/// Referee acceptance probability of the embezzler-based exchange strategy,
/// entangled branch on qutrit levels {1, 2}.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_exchange_success(d: usize, out: *mut f64) -> BfStatus {
    guarded(out, || success_probability(&build_exchange_strategy(d)?, &ExchangeInstance::default()))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bf_ltw_bound(local_dim: usize, out: *mut f64) -> BfStatus {
    guarded(out, || ltw_bound(local_dim))
}
