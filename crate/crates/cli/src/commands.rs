pub mod bounds;
pub mod kernel;
pub mod nystrom;
pub mod sketch;
