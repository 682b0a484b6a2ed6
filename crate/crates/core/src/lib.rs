#![no_std]
extern crate alloc;

pub mod case;
pub mod channel;
pub mod coordinator;
pub mod cost;
pub mod electric;
pub mod gas;
pub mod milp;
pub mod oracle;
pub mod ries;
