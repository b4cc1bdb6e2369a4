//! Holds the `acceptance` integration test, which runs after the unit and module suites of the
//! other crates. Nothing is exported.
