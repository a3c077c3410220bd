//! Holds the `acceptance` test target, kept in its own package so that it
//! runs after the unit and integration tests of the other crates.
