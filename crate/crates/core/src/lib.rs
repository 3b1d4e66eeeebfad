pub mod cli;
pub mod exactq;
pub mod numkernel;
pub mod operator;
pub mod polys;
pub mod sections;
pub mod triplet;
pub mod weyl;
