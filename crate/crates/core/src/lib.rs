pub mod krylov;
pub mod matfun;
pub mod orderconds;
pub mod problems;
pub mod scalar;
pub mod schemes;
pub mod study;
