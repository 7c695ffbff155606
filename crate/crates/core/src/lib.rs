pub mod imodel;
pub mod knowledge;
pub mod refine;
pub mod rewrite;
pub mod specify;
pub mod terms;
