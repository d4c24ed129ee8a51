pub mod cep;
pub mod forecast;
pub mod ik;
pub mod ingest;
pub mod model;
pub mod scenario;
pub mod service;
pub mod store;
