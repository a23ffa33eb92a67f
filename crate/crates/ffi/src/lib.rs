//! C ABI over `posmine`.
//!
//! Games and states cross the boundary as opaque heap handles that the
//! caller frees with the matching `_free` function. Every fallible call
//! returns a [`PosmineStatus`] and writes results through out-pointers; on
//! failure `posmine_last_error` describes what went wrong on this thread.
//! Panics are caught at the boundary and reported as `POSMINE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use posmine::analysis::{self, AnalysisError};
use posmine::blocktree::{parse_statefile, GameState, Miner};
use posmine::strategies::{Game, StrategySpec};
use posmine::structure;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosmineStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    SimulationError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A game of some Miner-1 strategy against FRONTIER.
pub struct PosmineGame {
    game: Game,
    last_revenue: f64,
}

/// A block-tree state.
pub struct PosmineState {
    state: GameState,
}

/// One played round.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PosmineRound {
    pub round: u64,
    /// 1 or 2.
    pub creator: u8,
    pub tip: u64,
    pub height: u64,
    pub chain1: u64,
    pub chain2: u64,
    pub capitulated: bool,
    pub renewal: bool,
    pub revenue: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let bytes: Vec<u8> = message.into().into_bytes().into_iter().filter(|&b| b != 0).collect();
    let c = CString::new(bytes).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(PosmineStatus, String);

impl From<AnalysisError> for Fail {
    fn from(e: AnalysisError) -> Self {
        let status = match e {
            AnalysisError::Sim(_) => PosmineStatus::SimulationError,
            _ => PosmineStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PosmineStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PosmineStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {message}"));
            PosmineStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(PosmineStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or a valid nul-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PosmineStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// # Safety
/// `out` must be null or valid for a write of `T`.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn spec(s: &str) -> Result<StrategySpec, Fail> {
    s.parse().map_err(|e: posmine::strategies::SpecError| Fail(PosmineStatus::ParseError, e.to_string()))
}

/// Crate version, static storage.
#[no_mangle]
pub extern "C" fn posmine_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn posmine_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Closed-form revenue of `strategy` ("frontier", "sm" or "nsm").
///
/// # Safety
/// `strategy` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_revenue_closed(
    strategy: *const c_char,
    alpha: f64,
    out: *mut f64,
) -> PosmineStatus {
    guard(|| {
        let f = match text(strategy, "strategy")? {
            "frontier" => analysis::rev_frontier,
            "sm" => analysis::rev_sm_closed,
            "nsm" => analysis::rev_nsm_closed,
            other => return Err(Fail(PosmineStatus::InvalidArgument, format!("no closed form for `{other}`"))),
        };
        put(out, f(alpha)?, "out")
    })
}

/// Where the NSM closed form crosses α, by bisection on [lo, hi].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_nsm_crossover(lo: f64, hi: f64, out: *mut f64) -> PosmineStatus {
    guard(|| put(out, analysis::crossover(analysis::rev_nsm_closed, lo, hi, 1e-9)?, "out"))
}

/// Renewal-cycle Monte Carlo revenue for any strategy spec.
///
/// # Safety
/// `strategy` must be a nul-terminated string; `estimate` and `stderr`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_revenue_renewal(
    strategy: *const c_char,
    alpha: f64,
    cycles: u64,
    seed: u64,
    estimate: *mut f64,
    stderr: *mut f64,
) -> PosmineStatus {
    guard(|| {
        let spec = spec(text(strategy, "strategy")?)?;
        spec.build().map_err(|e| Fail(PosmineStatus::InvalidArgument, e.to_string()))?;
        let factory = || spec.build().expect("built once already");
        let p = analysis::mc_revenue_renewal(&factory, alpha, cycles, seed, analysis::DEFAULT_CYCLE_CAP)?;
        put(estimate, p.estimate, "estimate")?;
        put(stderr, p.stderr.unwrap_or(f64::NAN), "stderr")
    })
}

/// Parses a statefile.
///
/// # Safety
/// `source` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_state_parse(source: *const c_char, out: *mut *mut PosmineState) -> PosmineStatus {
    guard(|| {
        let src = text(source, "source")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let state = parse_statefile(src).map_err(|e| Fail(PosmineStatus::ParseError, e.to_string()))?;
        put(out, Box::into_raw(Box::new(PosmineState { state })), "out")
    })
}

/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn posmine_state_free(state: *mut PosmineState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Writes the checkpoint ids into `ids[0..cap]` and their count into
/// `len`. If `cap` is too small nothing is written to `ids`, `len` still
/// receives the required count and the call returns
/// `POSMINE_STATUS_BUFFER_TOO_SMALL`.
///
/// # Safety
/// `state` must be a live handle, `ids` valid for `cap` writes (or null
/// when `cap` is 0), `len` writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_state_checkpoints(
    state: *const PosmineState,
    ids: *mut u64,
    cap: usize,
    len: *mut usize,
) -> PosmineStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let cps = structure::checkpoints(&s.state);
        put(len, cps.len(), "len")?;
        if cps.len() > cap {
            return Err(Fail(
                PosmineStatus::BufferTooSmall,
                format!("{} checkpoints, buffer holds {cap}", cps.len()),
            ));
        }
        if ids.is_null() {
            return Err(null("ids"));
        }
        ptr::copy_nonoverlapping(cps.as_ptr(), ids, cps.len());
        Ok(())
    })
}

/// Starts a game from B_0 for a strategy spec such as "nsm" or
/// "lcm(random:0.5:1)".
///
/// # Safety
/// `strategy` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_game_new(
    strategy: *const c_char,
    alpha: f64,
    seed: u64,
    out: *mut *mut PosmineGame,
) -> PosmineStatus {
    guard(|| {
        let spec = spec(text(strategy, "strategy")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Fail(PosmineStatus::InvalidArgument, format!("alpha = {alpha} is outside [0, 1]")));
        }
        let strategy = spec.build().map_err(|e| Fail(PosmineStatus::InvalidArgument, e.to_string()))?;
        let game = Game::new(strategy, alpha, seed);
        put(out, Box::into_raw(Box::new(PosmineGame { game, last_revenue: 0.0 })), "out")
    })
}

/// # Safety
/// `game` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn posmine_game_free(game: *mut PosmineGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Plays one round. `out` may be null.
///
/// # Safety
/// `game` must be a live handle; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_game_step(game: *mut PosmineGame, out: *mut PosmineRound) -> PosmineStatus {
    guard(|| {
        let g = game.as_mut().ok_or_else(|| null("game"))?;
        let r = g
            .game
            .step()
            .map_err(|e| Fail(PosmineStatus::SimulationError, e.to_string()))?
            .expect("random draws never run out");
        g.last_revenue = r.revenue();
        if !out.is_null() {
            out.write(PosmineRound {
                round: r.round,
                creator: r.creator.number(),
                tip: r.tip,
                height: r.height,
                chain1: r.chain[0],
                chain2: r.chain[1],
                capitulated: r.capitulation.is_some(),
                renewal: r.renewal,
                revenue: r.revenue(),
            });
        }
        Ok(())
    })
}

/// Plays `rounds` rounds and writes Miner 1's revenue after the last one.
///
/// # Safety
/// `game` must be a live handle; `revenue` null or writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_game_run(game: *mut PosmineGame, rounds: u64, revenue: *mut f64) -> PosmineStatus {
    guard(|| {
        let g = game.as_mut().ok_or_else(|| null("game"))?;
        for _ in 0..rounds {
            let r = g
                .game
                .step()
                .map_err(|e| Fail(PosmineStatus::SimulationError, e.to_string()))?
                .expect("random draws never run out");
            g.last_revenue = r.revenue();
        }
        if !revenue.is_null() {
            revenue.write(g.last_revenue);
        }
        Ok(())
    })
}

/// Snapshot of the game's current state as a new handle.
///
/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_game_state(game: *const PosmineGame, out: *mut *mut PosmineState) -> PosmineStatus {
    guard(|| {
        let g = game.as_ref().ok_or_else(|| null("game"))?;
        let state = g.game.state().clone();
        put(out, Box::into_raw(Box::new(PosmineState { state })), "out")
    })
}

/// Number of blocks Miner `miner` (1 or 2) has on the longest path,
/// finalized ones included.
///
/// # Safety
/// `state` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn posmine_state_chain_count(
    state: *const PosmineState,
    miner: u8,
    out: *mut u64,
) -> PosmineStatus {
    guard(|| {
        let s = state.as_ref().ok_or_else(|| null("state"))?;
        let m = Miner::from_number(miner)
            .ok_or_else(|| Fail(PosmineStatus::InvalidArgument, format!("miner must be 1 or 2, got {miner}")))?;
        put(out, s.state.chain_count(m), "out")
    })
}
