pub mod construct;
pub mod control;
pub mod converge;
pub mod meanfield;
pub mod simulate;
pub mod stability;
