#![no_std]
extern crate alloc;

pub mod adr;
pub mod error;
pub mod gaussian;
pub mod gmm;
pub mod gmm_teachers;
pub mod harness;
pub mod linalg;
pub mod procgen;
pub mod riac;
pub mod spdl;
pub mod stats;
pub mod student;
pub mod task_space;
pub mod teacher;

pub use error::{AclError, Result};
pub use task_space::{BoxSpace, ShuffleMap, Task};
