//! Facility location on the real line when some agents report their position
//! and the rest are drawn from a known distribution.
//!
//! The crate covers:
//!
//! * piecewise-uniform distributions and sequences that concentrate on points
//!   ([`distributions`]);
//! * the ex-ante social cost and its exact minimiser ([`instance`]);
//! * truthful single-facility mechanisms built from phantom quantiles
//!   ([`single`]) and closed-form bounds on their worst-case ratio ([`bounds`]);
//! * two capacitated facilities ([`two`]);
//! * worst-case instance families, brute-force oracles and a truthfulness
//!   fuzzer ([`adversary`]);
//! * the configuration-driven experiment runner behind the command line tool
//!   ([`experiment`]).
//!
//! ```
//! use aleatory_facility::{distributions::PiecewiseUniform, instance::{esc, solve_optimal, Instance}};
//!
//! let inst = Instance::new(5, vec![0.0, 0.0, 1.25]).unwrap();
//! let mu = PiecewiseUniform::uniform(1.0, 2.0).unwrap();
//! let opt = solve_optimal(&inst, &mu);
//! assert_eq!(opt.canonical, 1.25);
//! assert!((esc(&inst, &mu, opt.canonical) - 3.125).abs() < 1e-12);
//! ```

pub mod adversary;
pub mod bounds;
pub mod distributions;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod single;
pub mod two;

pub use error::{Error, Result};
