pub mod erf;
pub mod fixed;
pub mod logsum;
pub mod pfaffian;
pub mod quadrature;
pub mod special;
