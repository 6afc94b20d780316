//! C ABI over `qgamebound`.
//!
//! Games are opaque handles created by `qgb_game_*` and released with
//! `qgb_game_free`. Every fallible call returns a `QgbStatus`; on failure the
//! message is available from `qgb_last_error` until the next call on the same
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qgamebound::csep::game_to_csep;
use qgamebound::gamecore::{classical_value, Game};
use qgamebound::hierarchy::{build, level_for_epsilon, BuildOptions, GapDims, GapVariant, Method};
use qgamebound::rounding::{game_lower_bound, LowerOptions};
use qgamebound::sdpsolve::{export_sdpa, solve, SolveOptions, Status};
use qgamebound::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QgbStatus {
    QgbOk = 0,
    QgbErrInvalid = 1,
    QgbErrCap = 2,
    QgbErrNumerical = 3,
    QgbErrNullPointer = 4,
    QgbErrIo = 5,
    QgbErrPanic = 6,
}

/// Opaque game handle.
pub struct QgbGame {
    game: Game,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QgbStatus {
    match e {
        Error::Cap(_) => QgbStatus::QgbErrCap,
        Error::Numerical(_) => QgbStatus::QgbErrNumerical,
        Error::Io(_) => QgbStatus::QgbErrIo,
        _ => QgbStatus::QgbErrInvalid,
    }
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> QgbStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QgbStatus::QgbOk,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QgbStatus::QgbErrPanic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error::Invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error::Invalid(format!("{what} is not UTF-8")))
}

unsafe fn game_arg<'a>(g: *const QgbGame) -> Result<&'a Game, Error> {
    g.as_ref().map(|h| &h.game).ok_or_else(|| Error::Invalid("game handle is null".into()))
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null output pointer".into());
            return QgbStatus::QgbErrNullPointer;
        }
    };
}

/// Message of the last failed call on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn qgb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parse a game from its JSON description.
///
/// # Safety
///
/// `json` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qgb_game_from_json(json: *const c_char, out: *mut *mut QgbGame) -> QgbStatus {
    nonnull!(out);
    *out = ptr::null_mut();
    guard(|| {
        let game = Game::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(QgbGame { game }));
        Ok(())
    })
}

/// CHSH with uniform questions and assistance dimension `assist_dim`; null if `assist_dim` is 0.
#[no_mangle]
pub extern "C" fn qgb_game_chsh(assist_dim: usize) -> *mut QgbGame {
    if assist_dim == 0 {
        set_error("assist_dim must be at least 1".into());
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(QgbGame { game: Game::chsh(assist_dim) }))
}

/// # Safety
///
/// `game` must come from this library and not be freed twice; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qgb_game_free(game: *mut QgbGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Best classical winning probability by brute force.
///
/// # Safety
///
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qgb_classical_value(game: *const QgbGame, out: *mut f64) -> QgbStatus {
    nonnull!(out);
    guard(|| {
        *out = classical_value(game_arg(game)?)?;
        Ok(())
    })
}

fn method_arg(p: *const c_char) -> Result<Method, Error> {
    if p.is_null() {
        return Ok(Method::Sym);
    }
    unsafe { str_arg(p, "method") }?.parse()
}

/// Upper bound from level `level` of the hierarchy. `method` is one of
/// "dense", "sym", "bose", "bose-reduced"; null selects "sym".
///
/// # Safety
///
/// `game` must be a live handle, `method` null or a valid string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qgb_upper_bound(
    game: *const QgbGame,
    level: usize,
    method: *const c_char,
    tol: f64,
    out: *mut f64,
) -> QgbStatus {
    nonnull!(out);
    guard(|| {
        let g = game_arg(game)?;
        let h = build(&game_to_csep(g), level, method_arg(method)?, &BuildOptions::default())?;
        let sol = solve(&h.problem, &SolveOptions::with_tol(tol))?;
        if sol.status != Status::Optimal {
            return Err(Error::Numerical(format!("solver status {:?}", sol.status)));
        }
        *out = sol.dual_value;
        Ok(())
    })
}

/// Upper bound plus a rounded, see-saw-polished strategy value at the same level.
///
/// # Safety
///
/// `game` must be a live handle, `method` null or a valid string, `upper`/`lower` writable.
#[no_mangle]
pub unsafe extern "C" fn qgb_bounds(
    game: *const QgbGame,
    level: usize,
    method: *const c_char,
    seesaw_iters: usize,
    seed: u64,
    upper: *mut f64,
    lower: *mut f64,
) -> QgbStatus {
    nonnull!(upper, lower);
    guard(|| {
        let g = game_arg(game)?;
        let p = game_to_csep(g);
        let h = build(&p, level, method_arg(method)?, &BuildOptions::default())?;
        let sol = solve(&h.problem, &SolveOptions::default())?;
        if sol.status != Status::Optimal {
            return Err(Error::Numerical(format!("solver status {:?}", sol.status)));
        }
        let opts = LowerOptions { seesaw_iters, seed, ..Default::default() };
        let res = game_lower_bound(g, &p, &h, &sol.x, &opts)?;
        *upper = sol.dual_value;
        *lower = res.lower;
        Ok(())
    })
}

/// Hierarchy level whose de Finetti bound is at most `epsilon`.
///
/// # Safety
///
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qgb_level_for_epsilon(game: *const QgbGame, epsilon: f64, bose: bool, out: *mut u64) -> QgbStatus {
    nonnull!(out);
    guard(|| {
        let g = game_arg(game)?;
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Invalid("epsilon must be positive and finite".into()));
        }
        let variant = if bose { GapVariant::Bose } else { GapVariant::Game };
        *out = level_for_epsilon(GapDims::for_game(g), epsilon, variant);
        Ok(())
    })
}

/// Write one hierarchy level as an SDPA sparse file.
///
/// # Safety
///
/// `game` must be a live handle; `method` null or a valid string; `path` a valid string.
#[no_mangle]
pub unsafe extern "C" fn qgb_export_sdpa(game: *const QgbGame, level: usize, method: *const c_char, path: *const c_char) -> QgbStatus {
    guard(|| {
        let g = game_arg(game)?;
        let path = str_arg(path, "path")?;
        let h = build(&game_to_csep(g), level, method_arg(method)?, &BuildOptions::default())?;
        export_sdpa(&h.problem, path)
    })
}
