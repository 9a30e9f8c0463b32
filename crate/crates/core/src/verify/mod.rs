mod hardy;
mod points;
mod report;
mod suites;

pub use hardy::*;
pub use points::*;
pub use report::*;
pub use suites::*;
