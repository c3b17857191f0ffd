pub mod error;
pub mod exec;
pub mod observables;
pub mod singlet;
pub mod spin;
pub mod bell;
pub mod simplex;
pub mod netsim;
pub mod protocols;
pub mod verify;
