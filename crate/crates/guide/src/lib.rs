//! Book listings compiled as doc-tests.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/grids.md")]
mod grids {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/eigenpairs.md")]
mod eigenpairs {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/limits.md")]
mod limits {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/certificates.md")]
mod certificates {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod experiments {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/verification.md")]
mod verification {}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
