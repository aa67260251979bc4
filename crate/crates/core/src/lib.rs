pub mod exact;
pub mod explorer;
pub mod fock_goncharov;
pub mod grassmannian;
pub mod maps;
pub mod cluster;
pub mod quiver;
pub mod scott;
pub mod suite;
pub mod webs;
