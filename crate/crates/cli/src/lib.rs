//! Command-line front end, instance generator and benchmark harness for
//! `shortcut-frechet`.

pub mod app;
pub mod bench;
pub mod gen;
pub mod io;
