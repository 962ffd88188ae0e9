//! Empty: the criteria live in `tests/acceptance.rs` and run with `cargo test -p shepard-cv-acceptance`.
