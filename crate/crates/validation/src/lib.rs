//! Acceptance checks for the `revspec` workspace live in `tests/acceptance.rs`.
