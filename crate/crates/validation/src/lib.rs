//! Holds the acceptance suite in `tests/acceptance.rs`. Kept as its own
//! package so the suite runs after every other test target in the workspace.
