//! Edge colorings of (d,s)-edge colorable graphs that avoid sparse lists of
//! forbidden colors.

pub mod bounds;
pub mod constructors;
pub mod graph;
pub mod instance;
pub mod lists;
pub mod oracle;
pub mod ratio;
pub mod solver;
pub mod sweep;
