//! C ABI over the mapkit engine.
//!
//! Theories and b-states are opaque handles owned by the caller and released
//! with the matching `_free` function. Every fallible call returns a
//! [`MapkitStatus`]; on failure the message is available from
//! [`mapkit_last_error`] on the same thread until the next failing call.
//! Strings returned by the library are freed with [`mapkit_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mapkit::cli::StateDocument;
use mapkit::init::generate_initial;
use mapkit::lang::{parse_query, parse_theory, Theory};
use mapkit::transition::{entails, run_plan, BState};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapkitStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    /// Inconsistent initial statements, non-definite theory, unknown
    /// action category and the like.
    Semantic = 4,
    /// The plan was not executable in some state; the result is the failed
    /// b-state.
    PlanFailed = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// A parsed action theory.
pub struct MapkitTheory(Theory);

/// A b-state: a set of pointed Kripke structures, or the failed state.
pub struct MapkitState(BState);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

struct Error(MapkitStatus, String);

impl Error {
    fn new(status: MapkitStatus, msg: impl ToString) -> Self {
        Error(status, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Error>) -> MapkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MapkitStatus::Ok,
        Ok(Err(Error(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MapkitStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Error> {
    if p.is_null() {
        return Err(Error::new(MapkitStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Error::new(MapkitStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Error> {
    p.as_ref().ok_or_else(|| Error::new(MapkitStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Error> {
    if p.is_null() {
        Err(Error::new(MapkitStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// The message of the last failed call on this thread, or an empty string.
/// Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn mapkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses theory source text.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mapkit_theory_parse(source: *const c_char, out: *mut *mut MapkitTheory) -> MapkitStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(source, "source")?;
        let theory = parse_theory(text).map_err(|e| Error::new(MapkitStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(MapkitTheory(theory)));
        Ok(())
    })
}

/// # Safety
/// `theory` must come from [`mapkit_theory_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mapkit_theory_free(theory: *mut MapkitTheory) {
    if !theory.is_null() {
        drop(Box::from_raw(theory));
    }
}

/// Generates the initial b-state, optionally completing the initial
/// statements under the closed world assumption.
///
/// # Safety
/// `theory` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mapkit_initial_state(
    theory: *const MapkitTheory,
    cwa: bool,
    out: *mut *mut MapkitState,
) -> MapkitStatus {
    guard(|| {
        out_arg(out, "out")?;
        let t = &ref_arg(theory, "theory")?.0;
        let init = generate_initial(t, cwa).map_err(|e| Error::new(MapkitStatus::Semantic, e))?;
        *out = Box::into_raw(Box::new(MapkitState(init.bstate())));
        Ok(())
    })
}

/// Reads a state document (text or JSON) against the theory's signature.
///
/// # Safety
/// `theory` must be a live handle, `document` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mapkit_state_parse(
    theory: *const MapkitTheory,
    document: *const c_char,
    out: *mut *mut MapkitState,
) -> MapkitStatus {
    guard(|| {
        out_arg(out, "out")?;
        let t = &ref_arg(theory, "theory")?.0;
        let text = str_arg(document, "document")?;
        let b = StateDocument::parse(text)
            .and_then(|d| d.to_bstate(t.signature()))
            .map_err(|e| Error::new(MapkitStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(MapkitState(b)));
        Ok(())
    })
}

/// # Safety
/// `state` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mapkit_state_free(state: *mut MapkitState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Executes a plan such as `"a; b"` (empty for no actions). The resulting
/// handle is written to `out` even when the status is
/// [`MapkitStatus::PlanFailed`], in which case it holds the failed b-state.
///
/// # Safety
/// Handles must be live, `plan` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mapkit_exec(
    theory: *const MapkitTheory,
    state: *const MapkitState,
    plan: *const c_char,
    out: *mut *mut MapkitState,
) -> MapkitStatus {
    guard(|| {
        out_arg(out, "out")?;
        let t = &ref_arg(theory, "theory")?.0;
        let b = &ref_arg(state, "state")?.0;
        let plan = str_arg(plan, "plan")?;
        let plan = parse_query(t.signature(), &format!("true after {plan}"))
            .map_err(|e| Error::new(MapkitStatus::Parse, e))?
            .plan;
        let next = run_plan(t, &plan, b).map_err(|e| Error::new(MapkitStatus::Semantic, e))?;
        let failed = next.is_failed();
        *out = Box::into_raw(Box::new(MapkitState(next)));
        if failed {
            return Err(Error::new(MapkitStatus::PlanFailed, "plan is not executable"));
        }
        Ok(())
    })
}

/// Decides a query `goal after plan` from `state`.
///
/// # Safety
/// Handles must be live, `query` NUL-terminated and `verdict` valid.
#[no_mangle]
pub unsafe extern "C" fn mapkit_query(
    theory: *const MapkitTheory,
    state: *const MapkitState,
    query: *const c_char,
    verdict: *mut bool,
) -> MapkitStatus {
    guard(|| {
        out_arg(verdict, "verdict")?;
        let t = &ref_arg(theory, "theory")?.0;
        let b = &ref_arg(state, "state")?.0;
        let q = parse_query(t.signature(), str_arg(query, "query")?).map_err(|e| Error::new(MapkitStatus::Parse, e))?;
        *verdict = entails(t, &q, b).map_err(|e| Error::new(MapkitStatus::Semantic, e))?;
        Ok(())
    })
}

/// Number of pointed structures in the b-state; 0 for the failed state.
///
/// # Safety
/// `state` must be a live handle and `len` valid.
#[no_mangle]
pub unsafe extern "C" fn mapkit_state_len(state: *const MapkitState, len: *mut usize) -> MapkitStatus {
    guard(|| {
        out_arg(len, "len")?;
        *len = ref_arg(state, "state")?.0.len();
        Ok(())
    })
}

/// Number of worlds in the `index`-th pointed structure.
///
/// # Safety
/// `state` must be a live handle and `worlds` valid.
#[no_mangle]
pub unsafe extern "C" fn mapkit_state_worlds(
    state: *const MapkitState,
    index: usize,
    worlds: *mut usize,
) -> MapkitStatus {
    guard(|| {
        out_arg(worlds, "worlds")?;
        let states = ref_arg(state, "state")?.0.states();
        let s = states
            .get(index)
            .ok_or_else(|| Error::new(MapkitStatus::OutOfRange, format!("index {index} of {}", states.len())))?;
        *worlds = s.structure.len();
        Ok(())
    })
}

/// Renders the b-state as a state document, text or JSON. Free the result
/// with [`mapkit_string_free`].
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mapkit_state_render(
    theory: *const MapkitTheory,
    state: *const MapkitState,
    json: bool,
    out: *mut *mut c_char,
) -> MapkitStatus {
    guard(|| {
        out_arg(out, "out")?;
        let t = &ref_arg(theory, "theory")?.0;
        let doc = StateDocument::from_bstate(t.signature(), &ref_arg(state, "state")?.0);
        let text = if json { doc.to_json() } else { doc.to_text() };
        *out = CString::new(text).expect("documents have no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mapkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn mapkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
