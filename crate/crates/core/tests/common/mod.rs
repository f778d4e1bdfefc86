#![allow(dead_code)]

pub mod ordered;
