//! Holds the `acceptance` test target, which runs every engine-level
//! criterion in one process and prints a PASS/FAIL line for each.
//! Run it with `cargo test -p plotmap-validation --test acceptance`.
